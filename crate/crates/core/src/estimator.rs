//! Geometric tip-displacement estimation from the seven channel pressures.
//!
//! Each peripheral channel is weighted by its normal distance from the
//! bending neutral plane, giving three weighted pressure sums whose weights
//! each total zero, so a pressure offset common to all channels (ambient
//! temperature, drift) cancels identically:
//!
//! ```text
//! wx = (sqrt(3)/2) * (p5 + p6 - p2 - p3)
//! wy = p1 - p4 + (1/2) * (p2 - p3 - p5 + p6)
//! wz = p7 - (1/6) * (p1 + p2 + p3 + p4 + p5 + p6)
//! ```
//!
//! Calibration maps each weighted sum to millimetres with one positive scale
//! factor per axis, fitted by least squares through the origin.
//!
//! # Axis orientation
//!
//! `wz` increases when the lattice is compressed toward its base, while tip
//! displacement uses a z-up convention (`dz <= 0` is compression). `alpha_z`
//! therefore scales `wz` to *compression depth*, and the z estimate is
//! `dz = -alpha_z * wz`. All three scale factors stay positive.
//!
//! # Contact angle
//!
//! `contact_arc` computes the contact angle as `atan2(dx, dy)` — the x
//! component is deliberately the *first* argument, unlike the common
//! `atan2(y, x)` convention. Angle 0 is +y and +90 degrees is +x.

use crate::error::{Error, Result};
use crate::model::{ChannelPressures, TipDisplacement};

/// The three weighted pressure sums, Pa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedSums {
    pub wx: f64,
    pub wy: f64,
    pub wz: f64,
}

/// Per-axis scale factors, mm per Pa. All strictly positive; see the module
/// docs for the z orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorCalibration {
    pub alpha_x: f64,
    pub alpha_y: f64,
    pub alpha_z: f64,
}

impl EstimatorCalibration {
    pub fn new(alpha_x: f64, alpha_y: f64, alpha_z: f64) -> Result<Self> {
        for (axis, v) in [('x', alpha_x), ('y', alpha_y), ('z', alpha_z)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "alpha_{axis} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(EstimatorCalibration {
            alpha_x,
            alpha_y,
            alpha_z,
        })
    }

    pub fn from_kv_text(text: &str) -> Result<Self> {
        let (mut ax, mut ay, mut az) = (None, None, None);
        for entry in crate::config::parse(text)? {
            let slot = match entry.key.as_str() {
                "alpha_x" => &mut ax,
                "alpha_y" => &mut ay,
                "alpha_z" => &mut az,
                _ => return Err(entry.unknown_key()),
            };
            if slot.is_some() {
                return Err(entry.duplicate_key());
            }
            *slot = Some(entry.f64()?);
        }
        match (ax, ay, az) {
            (Some(x), Some(y), Some(z)) => EstimatorCalibration::new(x, y, z),
            _ => Err(Error::Parse(
                "calibration file must define alpha_x, alpha_y and alpha_z".into(),
            )),
        }
    }
}

/// Calibration plus the goodness-of-fit that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationReport {
    pub cal: EstimatorCalibration,
    pub r2_x: f64,
    pub r2_y: f64,
    pub r2_z: f64,
}

impl CalibrationReport {
    /// Key/value file with the fit quality recorded as comments.
    pub fn to_kv_text(&self) -> String {
        crate::config::render(
            &[
                "estimator calibration (mm per Pa)".into(),
                "alpha_z scales the axial weighted sum to compression depth".into(),
                format!("r2_x = {:.12}", self.r2_x),
                format!("r2_y = {:.12}", self.r2_y),
                format!("r2_z = {:.12}", self.r2_z),
            ],
            &[
                ("alpha_x", format!("{:e}", self.cal.alpha_x)),
                ("alpha_y", format!("{:e}", self.cal.alpha_y)),
                ("alpha_z", format!("{:e}", self.cal.alpha_z)),
            ],
        )
    }
}

/// Weight each channel by its normal distance from the neutral plane.
pub fn weighted_sums(p: &ChannelPressures) -> Result<WeightedSums> {
    if !p.is_finite() {
        return Err(Error::InvalidInput("non-finite pressure input".into()));
    }
    let v = &p.p;
    let wx = (3.0_f64.sqrt() / 2.0) * (v[4] + v[5] - v[1] - v[2]);
    let wy = v[0] - v[3] + 0.5 * (v[1] - v[2] - v[4] + v[5]);
    let wz = v[6] - (v[0] + v[1] + v[2] + v[3] + v[4] + v[5]) / 6.0;
    Ok(WeightedSums { wx, wy, wz })
}

/// Scale the weighted sums into a tip displacement estimate, mm.
pub fn estimate_displacement(
    p: &ChannelPressures,
    cal: &EstimatorCalibration,
) -> Result<TipDisplacement> {
    let w = weighted_sums(p)?;
    Ok(TipDisplacement {
        dx: cal.alpha_x * w.wx,
        dy: cal.alpha_y * w.wy,
        // wz is compression-positive; the displacement frame is z-up.
        dz: -(cal.alpha_z * w.wz),
    })
}

/// Fit the per-axis scale factors on labeled (pressures, displacement)
/// samples: one-dimensional least squares through the origin per axis,
/// `alpha = sum(w * d) / sum(w^2)`, with the uncentered R^2 of each fit.
pub fn calibrate(
    samples: &[(ChannelPressures, TipDisplacement)],
) -> Result<CalibrationReport> {
    if samples.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "calibration needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    // (weighted sum, target displacement) per axis; z targets are
    // compression depths so the fitted scale comes out positive.
    let mut pairs: [Vec<(f64, f64)>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for (p, d) in samples {
        if !d.is_finite() {
            return Err(Error::InvalidInput("non-finite displacement label".into()));
        }
        let w = weighted_sums(p)?;
        pairs[0].push((w.wx, d.dx));
        pairs[1].push((w.wy, d.dy));
        pairs[2].push((w.wz, -d.dz));
    }

    let mut alpha = [0.0; 3];
    let mut r2 = [0.0; 3];
    for (axis_idx, axis) in ['x', 'y', 'z'].into_iter().enumerate() {
        let data = &pairs[axis_idx];
        let sww: f64 = data.iter().map(|(w, _)| w * w).sum();
        if sww == 0.0 {
            return Err(Error::DegenerateAxis { axis });
        }
        let swd: f64 = data.iter().map(|(w, d)| w * d).sum();
        let a = swd / sww;
        let ss_res: f64 = data.iter().map(|(w, d)| (d - a * w).powi(2)).sum();
        let ss_tot: f64 = data.iter().map(|(_, d)| d * d).sum();
        alpha[axis_idx] = a;
        r2[axis_idx] = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    }

    Ok(CalibrationReport {
        cal: EstimatorCalibration::new(alpha[0], alpha[1], alpha[2])?,
        r2_x: r2[0],
        r2_y: r2[1],
        r2_z: r2[2],
    })
}

/// Calibrate against the forward model itself: noiseless single-axis sweeps
/// spanning the linear ranges (41 lateral steps per axis, 31 compression
/// steps).
pub fn calibrate_from_model(params: &crate::model::LatticeParams) -> Result<CalibrationReport> {
    use crate::model::synth_tip_pressures;
    let noiseless = crate::model::LatticeParams {
        noise_sigma: 0.0,
        ..params.clone()
    };
    let mut samples = Vec::new();
    for k in -20..=20i32 {
        let v = k as f64 / 20.0 * noiseless.linear_range_xy;
        for d in [
            TipDisplacement::new(v, 0.0, 0.0),
            TipDisplacement::new(0.0, v, 0.0),
        ] {
            let p = synth_tip_pressures::<rand_chacha::ChaCha8Rng>(&noiseless, &d, None)?;
            samples.push((p, d));
        }
    }
    for k in 1..=30i32 {
        let d = TipDisplacement::new(0.0, 0.0, -(k as f64 / 30.0 * noiseless.linear_range_z));
        let p = synth_tip_pressures::<rand_chacha::ChaCha8Rng>(&noiseless, &d, None)?;
        samples.push((p, d));
    }
    calibrate(&samples)
}

/// An inferred contact patch on the fingertip circumference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactArc {
    /// Radians; 0 points along +y, pi/2 along +x (see module docs).
    pub center_angle: f64,
    /// Radians, total angular extent.
    pub span: f64,
    /// mm.
    pub radius: f64,
}

/// Geometry used to turn a displacement estimate into a contact arc.
#[derive(Debug, Clone, Copy)]
pub struct ArcConfig {
    /// mm, outer lattice radius.
    pub lattice_radius: f64,
    /// mm, added skin thickness of the contact surface.
    pub thickness: f64,
    /// mm of lateral displacement below which no contact is reported.
    pub threshold: f64,
    /// Radians, fixed arc span.
    pub span: f64,
}

impl Default for ArcConfig {
    fn default() -> Self {
        ArcConfig {
            lattice_radius: 16.0,
            thickness: 1.0,
            threshold: 0.5,
            span: 60.0_f64.to_radians(),
        }
    }
}

/// Contact arc from a displacement estimate, or `None` while the lateral
/// displacement stays below the detection threshold.
pub fn contact_arc(delta: &TipDisplacement, cfg: &ArcConfig) -> Option<ContactArc> {
    assert!(cfg.threshold > 0.0, "detection threshold must be positive");
    assert!(cfg.span > 0.0 && cfg.span <= std::f64::consts::PI);
    if delta.lateral() < cfg.threshold {
        return None;
    }
    Some(ContactArc {
        // Paper-order arguments: x first.
        center_angle: delta.dx.atan2(delta.dy),
        span: cfg.span,
        radius: cfg.lattice_radius + cfg.thickness,
    })
}
