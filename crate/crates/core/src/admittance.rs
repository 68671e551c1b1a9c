//! Closed-loop admittance control against the simulated lattice.
//!
//! The arm is position-controlled, so the loop renders a virtual spring by
//! chasing the estimated tip deflection: each 200 Hz cycle the lattice
//! deflects under the external force, pressures are synthesized, the
//! deflection is estimated from them, and the commanded arm position is set
//! to `u_i = beta_i * delta_i` per axis (an absolute command, not an
//! integrator). The arm tracks the command through a first-order lag.
//!
//! At steady state the total tip motion is `x = delta * (1 + beta)`, so the
//! effective stiffness seen by whoever pushes is
//! `k_eff = k_lattice / (1 + beta)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimator::{estimate_displacement, EstimatorCalibration};
use crate::model::{synth_tip_pressures, ChannelPressures, LatticeParams, TipDisplacement};

/// Per-axis dimensionless position gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmittanceGains {
    pub beta_x: f64,
    pub beta_y: f64,
    pub beta_z: f64,
}

impl AdmittanceGains {
    pub fn new(beta_x: f64, beta_y: f64, beta_z: f64) -> Result<Self> {
        for (axis, b) in [('x', beta_x), ('y', beta_y), ('z', beta_z)] {
            if !(b.is_finite() && b >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "beta_{axis} must be finite and >= 0, got {b}"
                )));
            }
        }
        Ok(AdmittanceGains {
            beta_x,
            beta_y,
            beta_z,
        })
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.beta_x, self.beta_y, self.beta_z]
    }
}

/// Gain products that define the stock interaction feel: the lateral
/// alpha*beta products are 1/15, the axial one 1/7.5.
pub const GAIN_PRODUCT_XY: f64 = 1.0 / 15.0;
pub const GAIN_PRODUCT_Z: f64 = 1.0 / 7.5;

/// Gains that keep the alpha*beta products at their stock values for the
/// given calibration.
pub fn default_gains(cal: &EstimatorCalibration) -> AdmittanceGains {
    AdmittanceGains {
        beta_x: GAIN_PRODUCT_XY / cal.alpha_x,
        beta_y: GAIN_PRODUCT_XY / cal.alpha_y,
        beta_z: GAIN_PRODUCT_Z / cal.alpha_z,
    }
}

/// Loop timing and conditioning knobs.
#[derive(Debug, Clone, Copy)]
pub struct LoopConfig {
    /// s, control period (200 Hz).
    pub dt: f64,
    /// s, arm first-order lag time constant.
    pub tau: f64,
    /// mm; estimated deflections below this are treated as zero so sensor
    /// noise cannot walk the arm around.
    pub deadband: f64,
    /// Sensor noise on when set; the seed makes runs reproducible.
    pub noise_seed: Option<u64>,
    /// mm, steady-state detection: max |du| per step...
    pub settle_tol: f64,
    /// ...sustained for this many consecutive steps.
    pub settle_window: usize,
    /// Step budget for convergence-seeking runs.
    pub max_steps: usize,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            dt: 1.0 / 200.0,
            tau: 0.05,
            deadband: 0.1,
            noise_seed: None,
            settle_tol: 1e-4,
            settle_window: 20,
            max_steps: 20_000,
        }
    }
}

/// Snapshot of one control cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopState {
    pub step: usize,
    /// N, external force applied at the tip this cycle.
    pub force: [f64; 3],
    /// Pa, synthesized channel pressures (after any disturbance).
    pub pressures: ChannelPressures,
    /// mm, true lattice deflection.
    pub true_deflection: [f64; 3],
    /// mm, estimated deflection after the deadband.
    pub estimated: [f64; 3],
    /// mm, commanded arm position (lag output).
    pub commanded: [f64; 3],
}

impl LoopState {
    /// mm, total tip displacement: lattice deflection plus arm motion.
    pub fn total(&self) -> [f64; 3] {
        [
            self.true_deflection[0] + self.commanded[0],
            self.true_deflection[1] + self.commanded[1],
            self.true_deflection[2] + self.commanded[2],
        ]
    }

    pub fn time_s(&self, cfg: &LoopConfig) -> f64 {
        self.step as f64 * cfg.dt
    }
}

/// The running loop: owns the arm state and the noise stream.
#[derive(Debug, Clone)]
pub struct AdmittanceSim {
    pub params: LatticeParams,
    pub cal: EstimatorCalibration,
    pub gains: AdmittanceGains,
    pub cfg: LoopConfig,
    commanded: [f64; 3],
    step: usize,
    rng: Option<ChaCha8Rng>,
}

impl AdmittanceSim {
    pub fn new(
        params: LatticeParams,
        cal: EstimatorCalibration,
        gains: AdmittanceGains,
        cfg: LoopConfig,
    ) -> AdmittanceSim {
        AdmittanceSim {
            params,
            cal,
            gains,
            cfg,
            commanded: [0.0; 3],
            step: 0,
            rng: cfg.noise_seed.map(ChaCha8Rng::seed_from_u64),
        }
    }

    /// Override the arm position (tests of the zero-input transient).
    pub fn set_commanded(&mut self, u: [f64; 3]) {
        self.commanded = u;
    }

    pub fn commanded(&self) -> [f64; 3] {
        self.commanded
    }

    /// Run one 200 Hz cycle under `force`, with an optional pressure offset
    /// added to every channel (ambient disturbance injection).
    pub fn step(&mut self, force: [f64; 3], pressure_offset: f64) -> Result<LoopState> {
        let p = &self.params;
        let deflection = TipDisplacement::new(
            force[0] / p.lattice_stiffness_xy,
            force[1] / p.lattice_stiffness_xy,
            force[2] / p.lattice_stiffness_z,
        );
        let mut pressures = match self.rng.as_mut() {
            Some(rng) => synth_tip_pressures(p, &deflection, Some(rng))?,
            None => synth_tip_pressures::<ChaCha8Rng>(p, &deflection, None)?,
        };
        if pressure_offset != 0.0 {
            pressures = pressures.add_offset(pressure_offset);
        }

        let est = estimate_displacement(&pressures, &self.cal)?;
        let mut est = [est.dx, est.dy, est.dz];
        for v in &mut est {
            if v.abs() < self.cfg.deadband {
                *v = 0.0;
            }
        }

        let betas = self.gains.as_array();
        let alpha = 1.0 - (-self.cfg.dt / self.cfg.tau).exp();
        for i in 0..3 {
            let target = betas[i] * est[i];
            self.commanded[i] += alpha * (target - self.commanded[i]);
        }
        self.step += 1;

        Ok(LoopState {
            step: self.step,
            force,
            pressures,
            true_deflection: [deflection.dx, deflection.dy, deflection.dz],
            estimated: est,
            commanded: self.commanded,
        })
    }

    /// Step under constant force until the command settles
    /// (|du| < settle_tol for settle_window consecutive steps).
    pub fn run_to_steady_state(&mut self, force: [f64; 3]) -> Result<LoopState> {
        let mut quiet = 0;
        let mut last_u = self.commanded;
        for _ in 0..self.cfg.max_steps {
            let state = self.step(force, 0.0)?;
            let du = (0..3)
                .map(|i| (state.commanded[i] - last_u[i]).abs())
                .fold(0.0, f64::max);
            last_u = state.commanded;
            quiet = if du < self.cfg.settle_tol { quiet + 1 } else { 0 };
            if quiet >= self.cfg.settle_window {
                return Ok(state);
            }
        }
        Err(Error::NotConverged(format!(
            "command still moving after {} steps",
            self.cfg.max_steps
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    /// Force direction used when loading this axis: lateral axes push
    /// outward, the axial axis pushes down into the lattice.
    pub fn force_sign(self) -> f64 {
        match self {
            Axis::X | Axis::Y => 1.0,
            Axis::Z => -1.0,
        }
    }

    pub fn label(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }
}

/// Result of the effective-stiffness measurement.
#[derive(Debug, Clone)]
pub struct StiffnessReport {
    pub axis: Axis,
    /// (force N, total tip displacement mm), signed along the axis.
    pub points: Vec<(f64, f64)>,
    /// N per mm, through-origin least-squares slope.
    pub stiffness: f64,
    pub r2: f64,
}

impl StiffnessReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# axis = {}\n", self.axis.label()));
        out.push_str(&format!("# k_N_per_mm = {:.9}\n", self.stiffness));
        out.push_str(&format!("# r2 = {:.9}\n", self.r2));
        out.push_str("force_N,disp_mm\n");
        for (f, x) in &self.points {
            out.push_str(&format!("{f:.6},{x:.6}\n"));
        }
        out
    }
}

/// The canonical 10-force ladder used by the measurement procedure.
pub fn default_force_ladder() -> Vec<f64> {
    (1..=10).map(|k| k as f64 * 0.5).collect()
}

/// Measure the closed-loop stiffness along one axis: run each force to
/// steady state from rest, record (F, x), fit `F = k * x` through the
/// origin.
pub fn measure_stiffness(
    params: &LatticeParams,
    cal: &EstimatorCalibration,
    gains: &AdmittanceGains,
    cfg: &LoopConfig,
    axis: Axis,
    force_magnitudes: &[f64],
) -> Result<StiffnessReport> {
    if force_magnitudes.len() < 2 {
        return Err(Error::InvalidInput(
            "stiffness fit needs at least 2 forces".into(),
        ));
    }
    for w in force_magnitudes.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidInput("duplicate force magnitude".into()));
        }
    }
    if force_magnitudes.iter().any(|&f| !(f.is_finite() && f > 0.0)) {
        return Err(Error::InvalidInput(
            "force magnitudes must be positive".into(),
        ));
    }

    let idx = axis.index();
    let sign = axis.force_sign();
    let mut points = Vec::with_capacity(force_magnitudes.len());
    for &mag in force_magnitudes {
        let mut sim = AdmittanceSim::new(params.clone(), *cal, *gains, *cfg);
        let mut force = [0.0; 3];
        force[idx] = sign * mag;
        let final_state = sim.run_to_steady_state(force)?;
        points.push((force[idx], final_state.total()[idx]));
    }

    let sxx: f64 = points.iter().map(|(_, x)| x * x).sum();
    if sxx == 0.0 {
        return Err(Error::NotConverged("no displacement recorded".into()));
    }
    let sxf: f64 = points.iter().map(|(f, x)| f * x).sum();
    let k = sxf / sxx;
    let ss_res: f64 = points.iter().map(|(f, x)| (f - k * x).powi(2)).sum();
    let ss_tot: f64 = points.iter().map(|(f, _)| f * f).sum();
    Ok(StiffnessReport {
        axis,
        points,
        stiffness: k,
        r2: 1.0 - ss_res / ss_tot,
    })
}

/// Piecewise-constant force profile: each row holds from its time until the
/// next row.
#[derive(Debug, Clone, Default)]
pub struct ForceProfile {
    /// (t_s, force N), strictly increasing t.
    pub rows: Vec<(f64, [f64; 3])>,
}

impl ForceProfile {
    pub fn from_csv(text: &str) -> Result<ForceProfile> {
        let mut lines = text.lines();
        match lines.next().map(str::trim) {
            Some("t_s,Fx_N,Fy_N,Fz_N") => {}
            other => {
                return Err(Error::Parse(format!(
                    "force profile header mismatch: got {other:?}"
                )))
            }
        }
        let mut rows: Vec<(f64, [f64; 3])> = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::Parse(format!(
                    "force profile row {}: expected 4 fields",
                    i + 2
                )));
            }
            let mut vals = [0.0; 4];
            for (slot, f) in vals.iter_mut().zip(&fields) {
                *slot = f.trim().parse::<f64>().map_err(|_| {
                    Error::Parse(format!("force profile row {}: bad number `{f}`", i + 2))
                })?;
            }
            if let Some(last) = rows.last() {
                if vals[0] <= last.0 {
                    return Err(Error::Parse(format!(
                        "force profile row {}: time must increase",
                        i + 2
                    )));
                }
            }
            rows.push((vals[0], [vals[1], vals[2], vals[3]]));
        }
        Ok(ForceProfile { rows })
    }

    pub fn force_at(&self, t: f64) -> [f64; 3] {
        let mut current = [0.0; 3];
        for (row_t, f) in &self.rows {
            if *row_t <= t {
                current = *f;
            } else {
                break;
            }
        }
        current
    }

    pub fn duration(&self) -> f64 {
        self.rows.last().map(|(t, _)| *t).unwrap_or(0.0)
    }
}

pub const RUN_LOG_CSV_HEADER: &str =
    "t_s,Fx,Fy,Fz,p1,p2,p3,p4,p5,p6,p7,dx,dy,dz,ux,uy,uz";

/// Drive the loop along a force profile for `duration_s`, returning every
/// cycle's state.
pub fn run_profile(
    sim: &mut AdmittanceSim,
    profile: &ForceProfile,
    duration_s: f64,
) -> Result<Vec<LoopState>> {
    let steps = (duration_s / sim.cfg.dt).round() as usize;
    let mut log = Vec::with_capacity(steps);
    for k in 0..steps {
        let t = k as f64 * sim.cfg.dt;
        log.push(sim.step(profile.force_at(t), 0.0)?);
    }
    Ok(log)
}

pub fn run_log_to_csv(states: &[LoopState], cfg: &LoopConfig) -> String {
    let mut out = String::from(RUN_LOG_CSV_HEADER);
    out.push('\n');
    for s in states {
        out.push_str(&format!(
            "{:.4},{:.6},{:.6},{:.6}",
            s.time_s(cfg),
            s.force[0],
            s.force[1],
            s.force[2]
        ));
        for p in s.pressures.p {
            out.push_str(&format!(",{p:.6}"));
        }
        out.push_str(&format!(
            ",{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            s.estimated[0],
            s.estimated[1],
            s.estimated[2],
            s.commanded[0],
            s.commanded[1],
            s.commanded[2]
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::calibrate;
    use crate::model::TipDisplacement;

    fn noiseless_params() -> LatticeParams {
        LatticeParams {
            noise_sigma: 0.0,
            ..LatticeParams::default()
        }
    }

    fn fitted_cal(params: &LatticeParams) -> EstimatorCalibration {
        let mut samples = Vec::new();
        for k in -20..=20 {
            let v = k as f64 * 0.4;
            for d in [
                TipDisplacement::new(v, 0.0, 0.0),
                TipDisplacement::new(0.0, v, 0.0),
            ] {
                samples.push((
                    synth_tip_pressures::<ChaCha8Rng>(params, &d, None).unwrap(),
                    d,
                ));
            }
        }
        for k in 1..=30 {
            let d = TipDisplacement::new(0.0, 0.0, -(k as f64 * 0.1));
            samples.push((
                synth_tip_pressures::<ChaCha8Rng>(params, &d, None).unwrap(),
                d,
            ));
        }
        calibrate(&samples).unwrap().cal
    }

    fn setup() -> (LatticeParams, EstimatorCalibration, AdmittanceGains) {
        let params = noiseless_params();
        let cal = fitted_cal(&params);
        let gains = default_gains(&cal);
        (params, cal, gains)
    }

    #[test]
    fn default_gain_arithmetic() {
        let cal = EstimatorCalibration::new(1.0 / 30.0, 1.0 / 30.0, 2.0 / 15.0).unwrap();
        let g = default_gains(&cal);
        assert!((g.beta_x - 2.0).abs() < 1e-12);
        assert!((g.beta_y - 2.0).abs() < 1e-12);
        assert!((g.beta_z - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gain_products_survive_recalibration() {
        let a = EstimatorCalibration::new(0.02, 0.025, 0.05).unwrap();
        let b = EstimatorCalibration::new(0.04, 0.01, 0.08).unwrap();
        for cal in [a, b] {
            let g = default_gains(&cal);
            assert!((cal.alpha_x * g.beta_x - GAIN_PRODUCT_XY).abs() < 1e-12);
            assert!((cal.alpha_y * g.beta_y - GAIN_PRODUCT_XY).abs() < 1e-12);
            assert!((cal.alpha_z * g.beta_z - GAIN_PRODUCT_Z).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_force_is_a_fixed_point() {
        let (params, cal, gains) = setup();
        let mut sim = AdmittanceSim::new(params, cal, gains, LoopConfig::default());
        for _ in 0..200 {
            let s = sim.step([0.0; 3], 0.0).unwrap();
            assert_eq!(s.commanded, [0.0; 3]);
        }
    }

    #[test]
    fn steady_state_obeys_fixed_point_algebra() {
        let (params, cal, gains) = setup();
        let mut sim = AdmittanceSim::new(params.clone(), cal, gains, LoopConfig::default());
        let force = [1.0, 0.0, 0.0];
        let s = sim.run_to_steady_state(force).unwrap();
        let delta = force[0] / params.lattice_stiffness_xy;
        assert!((s.estimated[0] - delta).abs() / delta < 1e-6);
        let expect_u = gains.beta_x * delta;
        assert!(
            (s.commanded[0] - expect_u).abs() / expect_u < 1e-2,
            "u = {} vs beta*delta = {}",
            s.commanded[0],
            expect_u
        );
        let total = s.total()[0];
        assert!((total - delta * (1.0 + gains.beta_x)).abs() / total < 1e-2);
    }

    #[test]
    fn release_returns_home_within_five_tau() {
        let (params, cal, gains) = setup();
        let cfg = LoopConfig::default();
        let mut sim = AdmittanceSim::new(params, cal, gains, cfg);
        sim.run_to_steady_state([0.2, 0.0, 0.0]).unwrap();
        let steps_5tau = (5.0 * cfg.tau / cfg.dt).round() as usize;
        let mut last = [0.0; 3];
        for _ in 0..steps_5tau {
            last = sim.step([0.0; 3], 0.0).unwrap().commanded;
        }
        assert!(last[0].abs() < 0.01, "u_x = {} mm after 5 tau", last[0]);
    }

    #[test]
    fn zero_input_decay_is_monotone() {
        let (params, cal, gains) = setup();
        let mut sim = AdmittanceSim::new(params, cal, gains, LoopConfig::default());
        sim.set_commanded([4.0, -2.0, 1.0]);
        let mut prev = 4.0_f64;
        for _ in 0..400 {
            let s = sim.step([0.0; 3], 0.0).unwrap();
            assert!(s.commanded[0] <= prev + 1e-15);
            assert!(s.commanded[0] >= 0.0);
            prev = s.commanded[0];
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn common_mode_disturbance_does_not_move_the_arm() {
        let (params, cal, gains) = setup();
        let cfg = LoopConfig::default();
        let mut clean = AdmittanceSim::new(params.clone(), cal, gains, cfg);
        let mut disturbed = AdmittanceSim::new(params, cal, gains, cfg);
        let force = [0.8, 0.0, 0.0];
        for step in 0..400 {
            let offset = if step >= 100 { 25.0 } else { 0.0 };
            let a = clean.step(force, 0.0).unwrap();
            let b = disturbed.step(force, offset).unwrap();
            for i in 0..3 {
                assert!((a.commanded[i] - b.commanded[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pure_x_force_leaves_other_axes_untouched() {
        let (params, cal, gains) = setup();
        let mut sim = AdmittanceSim::new(params, cal, gains, LoopConfig::default());
        let s = sim.run_to_steady_state([2.0, 0.0, 0.0]).unwrap();
        assert!(s.commanded[0] > 1.0);
        assert!(s.commanded[1].abs() < 0.01 * s.commanded[0].abs());
        assert!(s.commanded[2].abs() < 0.01 * s.commanded[0].abs());
    }

    #[test]
    fn stiffness_matches_analytic_value() {
        let (params, cal, gains) = setup();
        let cfg = LoopConfig::default();
        for (axis, k_lat, beta) in [
            (Axis::X, params.lattice_stiffness_xy, gains.beta_x),
            (Axis::Y, params.lattice_stiffness_xy, gains.beta_y),
            (Axis::Z, params.lattice_stiffness_z, gains.beta_z),
        ] {
            let report = measure_stiffness(
                &params,
                &cal,
                &gains,
                &cfg,
                axis,
                &default_force_ladder(),
            )
            .unwrap();
            let expect = k_lat / (1.0 + beta);
            let err = (report.stiffness - expect).abs() / expect;
            assert!(
                err < 0.02,
                "axis {}: k = {} vs {}",
                axis.label(),
                report.stiffness,
                expect
            );
            assert!(report.r2 >= 0.999);
        }
    }

    #[test]
    fn controller_off_measures_the_passive_lattice() {
        let (params, cal, _) = setup();
        let gains = AdmittanceGains::new(0.0, 0.0, 0.0).unwrap();
        let report = measure_stiffness(
            &params,
            &cal,
            &gains,
            &LoopConfig::default(),
            Axis::X,
            &default_force_ladder(),
        )
        .unwrap();
        let err = (report.stiffness - params.lattice_stiffness_xy).abs()
            / params.lattice_stiffness_xy;
        assert!(err < 0.01, "k = {}", report.stiffness);
    }

    #[test]
    fn raising_beta_softens_the_spring() {
        let (params, cal, gains) = setup();
        let cfg = LoopConfig::default();
        let soft_gains =
            AdmittanceGains::new(gains.beta_x, gains.beta_y, 2.0 * gains.beta_z).unwrap();
        let base =
            measure_stiffness(&params, &cal, &gains, &cfg, Axis::Z, &default_force_ladder())
                .unwrap();
        let soft = measure_stiffness(
            &params,
            &cal,
            &soft_gains,
            &cfg,
            Axis::Z,
            &default_force_ladder(),
        )
        .unwrap();
        assert!(soft.stiffness < base.stiffness);
    }

    #[test]
    fn convergence_budget_is_enforced() {
        let (params, cal, gains) = setup();
        let cfg = LoopConfig {
            max_steps: 5,
            ..LoopConfig::default()
        };
        let mut sim = AdmittanceSim::new(params, cal, gains, cfg);
        assert!(matches!(
            sim.run_to_steady_state([1.0, 0.0, 0.0]),
            Err(Error::NotConverged(_))
        ));
    }

    #[test]
    fn stiffness_input_validation() {
        let (params, cal, gains) = setup();
        let cfg = LoopConfig::default();
        assert!(measure_stiffness(&params, &cal, &gains, &cfg, Axis::X, &[1.0]).is_err());
        assert!(
            measure_stiffness(&params, &cal, &gains, &cfg, Axis::X, &[1.0, 1.0]).is_err()
        );
        assert!(
            measure_stiffness(&params, &cal, &gains, &cfg, Axis::X, &[1.0, -2.0]).is_err()
        );
    }

    #[test]
    fn force_profile_parses_and_holds() {
        let text = "t_s,Fx_N,Fy_N,Fz_N\n0.0,0,0,0\n0.5,1.5,0,0\n1.0,0,0,0\n";
        let profile = ForceProfile::from_csv(text).unwrap();
        assert_eq!(profile.force_at(0.25), [0.0, 0.0, 0.0]);
        assert_eq!(profile.force_at(0.75), [1.5, 0.0, 0.0]);
        assert_eq!(profile.force_at(2.0), [0.0, 0.0, 0.0]);
        assert!(ForceProfile::from_csv("bad header\n").is_err());
        assert!(ForceProfile::from_csv("t_s,Fx_N,Fy_N,Fz_N\n1,0,0,0\n0.5,0,0,0\n").is_err());
    }

    #[test]
    fn run_log_csv_shape() {
        let (params, cal, gains) = setup();
        let cfg = LoopConfig::default();
        let mut sim = AdmittanceSim::new(params, cal, gains, cfg);
        let profile =
            ForceProfile::from_csv("t_s,Fx_N,Fy_N,Fz_N\n0.0,1.0,0,0\n").unwrap();
        let log = run_profile(&mut sim, &profile, 0.1).unwrap();
        assert_eq!(log.len(), 20);
        let csv = run_log_to_csv(&log, &cfg);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), RUN_LOG_CSV_HEADER);
        assert_eq!(lines.next().unwrap().split(',').count(), 17);
    }
}
