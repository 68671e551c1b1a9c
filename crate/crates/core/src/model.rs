//! Forward sensor model of the lattice fingertip.
//!
//! Seven sealed air channels sit inside the lattice: six peripheral channels
//! spaced 60 degrees apart in the cross-section plus one central axial
//! channel. Deforming the lattice changes each channel's pressure. This
//! module synthesizes those deformation-induced pressure changes for two
//! loading cases: a displacement applied at the tip, and a point contact
//! somewhere along the side of the lattice. It also generates the full
//! labeled characterization grid used to train the contact network.
//!
//! Within the configured linear ranges the tip model is an exactly linear
//! map of the displacement; beyond them the projected displacement is
//! compressed with a tanh roll-off, so responses stay smooth and monotone.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};

/// Number of pressure channels, peripheral plus central.
pub const CHANNEL_COUNT: usize = 7;
/// Peripheral channels 1..6.
pub const PERIPHERAL_CHANNELS: usize = 6;
/// Discrete axial contact positions (base to tip).
pub const AXIAL_POSITIONS: usize = 5;
/// Discrete radial contact orientations, one per peripheral channel.
pub const RADIAL_ANGLES: usize = 6;

/// Cross-section angle of each peripheral channel, degrees. Channel 1 points
/// along +y; the rest follow at 60-degree steps.
pub const CHANNEL_ANGLES_DEG: [f64; PERIPHERAL_CHANNELS] =
    [90.0, 150.0, 210.0, 270.0, 330.0, 30.0];

/// Displacement inputs beyond this multiple of the linear range are clamped.
const HARD_CLAMP_FACTOR: f64 = 3.0;

/// Unit direction vector of each peripheral channel in the cross-section
/// plane. Exact components (no trig rounding), so the 60-degree symmetry
/// identities hold bit-for-bit.
pub fn channel_dirs() -> [[f64; 2]; PERIPHERAL_CHANNELS] {
    let s = 3.0_f64.sqrt() / 2.0;
    [
        [0.0, 1.0],
        [-s, 0.5],
        [-s, -0.5],
        [0.0, -1.0],
        [s, -0.5],
        [s, 0.5],
    ]
}

/// Geometry and gain constants of the simulated lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeParams {
    /// Pa per mm of lateral tip displacement projected onto a channel direction.
    pub bend_gain: f64,
    /// Pa per mm of axial compression, central channel.
    pub axial_gain: f64,
    /// Pa per mm of axial compression induced equally in the peripheral channels.
    pub axial_coupling: f64,
    /// Pa per N of direct compression at the contact-side channel (base value).
    pub contact_direct_gain: f64,
    /// Pa per N of bending response at the tip end of the lattice.
    pub contact_bend_gain: f64,
    /// Pa per N picked up by the central channel during side contact.
    pub contact_center_gain: f64,
    /// N per mm, passive lateral stiffness at the tip.
    pub lattice_stiffness_xy: f64,
    /// N per mm, passive axial stiffness at the tip.
    pub lattice_stiffness_z: f64,
    /// mm, extent of the linear lateral response.
    pub linear_range_xy: f64,
    /// mm, extent of the linear axial response.
    pub linear_range_z: f64,
    /// Pa, additive Gaussian sensor noise per channel per sample.
    pub noise_sigma: f64,
}

impl Default for LatticeParams {
    fn default() -> Self {
        LatticeParams {
            bend_gain: 15.0,
            axial_gain: 40.0,
            axial_coupling: 5.0,
            contact_direct_gain: 25.0,
            contact_bend_gain: 30.0,
            contact_center_gain: 2.0,
            lattice_stiffness_xy: 0.5,
            lattice_stiffness_z: 2.0,
            linear_range_xy: 10.0,
            linear_range_z: 3.0,
            noise_sigma: 0.5,
        }
    }
}

impl LatticeParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("bend_gain", self.bend_gain),
            ("axial_gain", self.axial_gain),
            ("axial_coupling", self.axial_coupling),
            ("contact_direct_gain", self.contact_direct_gain),
            ("contact_bend_gain", self.contact_bend_gain),
            ("contact_center_gain", self.contact_center_gain),
            ("lattice_stiffness_xy", self.lattice_stiffness_xy),
            ("lattice_stiffness_z", self.lattice_stiffness_z),
            ("linear_range_xy", self.linear_range_xy),
            ("linear_range_z", self.linear_range_z),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "noise_sigma must be finite and >= 0, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }

    /// Parse from the flat key/value format. Starts from defaults; every key
    /// present overrides one field; unknown and duplicate keys are errors.
    pub fn from_kv_text(text: &str) -> Result<LatticeParams> {
        let mut p = LatticeParams::default();
        let mut seen = std::collections::HashSet::new();
        for entry in crate::config::parse(text)? {
            if !seen.insert(entry.key.clone()) {
                return Err(entry.duplicate_key());
            }
            let v = entry.f64()?;
            match entry.key.as_str() {
                "bend_gain" => p.bend_gain = v,
                "axial_gain" => p.axial_gain = v,
                "axial_coupling" => p.axial_coupling = v,
                "contact_direct_gain" => p.contact_direct_gain = v,
                "contact_bend_gain" => p.contact_bend_gain = v,
                "contact_center_gain" => p.contact_center_gain = v,
                "lattice_stiffness_xy" => p.lattice_stiffness_xy = v,
                "lattice_stiffness_z" => p.lattice_stiffness_z = v,
                "linear_range_xy" => p.linear_range_xy = v,
                "linear_range_z" => p.linear_range_z = v,
                "noise_sigma" => p.noise_sigma = v,
                _ => return Err(entry.unknown_key()),
            }
        }
        p.validate()?;
        Ok(p)
    }

    pub fn to_kv_text(&self) -> String {
        crate::config::render(
            &["lattice parameters".into()],
            &[
                ("bend_gain", format!("{}", self.bend_gain)),
                ("axial_gain", format!("{}", self.axial_gain)),
                ("axial_coupling", format!("{}", self.axial_coupling)),
                ("contact_direct_gain", format!("{}", self.contact_direct_gain)),
                ("contact_bend_gain", format!("{}", self.contact_bend_gain)),
                ("contact_center_gain", format!("{}", self.contact_center_gain)),
                ("lattice_stiffness_xy", format!("{}", self.lattice_stiffness_xy)),
                ("lattice_stiffness_z", format!("{}", self.lattice_stiffness_z)),
                ("linear_range_xy", format!("{}", self.linear_range_xy)),
                ("linear_range_z", format!("{}", self.linear_range_z)),
                ("noise_sigma", format!("{}", self.noise_sigma)),
            ],
        )
    }
}

/// Tip displacement in mm. `dz <= 0` is compression toward the base.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TipDisplacement {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl TipDisplacement {
    pub fn new(dx: f64, dy: f64, dz: f64) -> Self {
        TipDisplacement { dx, dy, dz }
    }

    pub fn is_finite(&self) -> bool {
        self.dx.is_finite() && self.dy.is_finite() && self.dz.is_finite()
    }

    /// Magnitude of the lateral component, mm.
    pub fn lateral(&self) -> f64 {
        self.dx.hypot(self.dy)
    }
}

/// Deformation-induced pressure change per channel, Pa, baseline-subtracted.
/// `p[i]` is channel `i + 1`; `p[6]` is the central axial channel.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChannelPressures {
    pub p: [f64; CHANNEL_COUNT],
}

impl ChannelPressures {
    pub fn new(p: [f64; CHANNEL_COUNT]) -> Self {
        ChannelPressures { p }
    }

    pub fn is_finite(&self) -> bool {
        self.p.iter().all(|v| v.is_finite())
    }

    /// Central (axial) channel, the paper's channel 7.
    pub fn center(&self) -> f64 {
        self.p[6]
    }

    /// Same readings with the peripheral channels cyclically shifted by
    /// `steps` (channel i takes the value channel i-steps had). The central
    /// channel is untouched.
    pub fn shift_peripheral(&self, steps: usize) -> ChannelPressures {
        let mut out = *self;
        for i in 0..PERIPHERAL_CHANNELS {
            out.p[i] = self.p[(i + PERIPHERAL_CHANNELS - steps % PERIPHERAL_CHANNELS) % PERIPHERAL_CHANNELS];
        }
        out
    }

    pub fn add_offset(&self, c: f64) -> ChannelPressures {
        let mut out = *self;
        for v in &mut out.p {
            *v += c;
        }
        out
    }
}

/// A mid-lattice point contact: one of five axial positions (0 = base,
/// 4 = tip), one of six radial orientations aligned with the peripheral
/// channels, and a force magnitude in N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactSpec {
    pub axial_pos: usize,
    pub radial_angle: usize,
    pub force: f64,
}

impl ContactSpec {
    pub fn new(axial_pos: usize, radial_angle: usize, force: f64) -> Result<Self> {
        if axial_pos >= AXIAL_POSITIONS {
            return Err(Error::InvalidInput(format!(
                "axial_pos {axial_pos} out of range 0..{AXIAL_POSITIONS}"
            )));
        }
        if radial_angle >= RADIAL_ANGLES {
            return Err(Error::InvalidInput(format!(
                "radial_angle {radial_angle} out of range 0..{RADIAL_ANGLES}"
            )));
        }
        if !(force.is_finite() && (0.0..=10.0).contains(&force)) {
            return Err(Error::InvalidInput(format!(
                "force {force} N outside [0, 10]"
            )));
        }
        Ok(ContactSpec {
            axial_pos,
            radial_angle,
            force,
        })
    }

    /// Normalized axial coordinate: 0 at the base, 1 at the tip.
    pub fn axial_frac(&self) -> f64 {
        self.axial_pos as f64 / (AXIAL_POSITIONS - 1) as f64
    }
}

/// Identity inside `range`, tanh roll-off beyond. C1-continuous, monotone,
/// asymptotes at 2 * range.
fn smooth_limit(v: f64, range: f64) -> f64 {
    let a = v.abs();
    if a <= range {
        v
    } else {
        v.signum() * (range + range * ((a - range) / range).tanh())
    }
}

fn hard_clamp(v: f64, limit: f64) -> f64 {
    v.clamp(-limit, limit)
}

fn add_noise<R: Rng>(p: &mut ChannelPressures, sigma: f64, rng: &mut R) {
    if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma).expect("sigma validated");
        for v in &mut p.p {
            *v += normal.sample(rng);
        }
    }
}

/// Pressures produced by a displacement applied at the tip.
///
/// Peripheral channel i responds to the lateral displacement projected onto
/// its direction vector (compression side positive, tension side negative)
/// plus a small equal share of the axial compression; the central channel
/// responds to axial compression alone.
pub fn synth_tip_pressures<R: Rng>(
    params: &LatticeParams,
    disp: &TipDisplacement,
    noise: Option<&mut R>,
) -> Result<ChannelPressures> {
    if !disp.is_finite() {
        return Err(Error::InvalidInput(format!(
            "non-finite displacement ({}, {}, {})",
            disp.dx, disp.dy, disp.dz
        )));
    }
    let dx = hard_clamp(disp.dx, HARD_CLAMP_FACTOR * params.linear_range_xy);
    let dy = hard_clamp(disp.dy, HARD_CLAMP_FACTOR * params.linear_range_xy);
    let dz = hard_clamp(disp.dz, HARD_CLAMP_FACTOR * params.linear_range_z);

    let compression = smooth_limit(-dz, params.linear_range_z);
    let dirs = channel_dirs();
    let mut out = ChannelPressures::default();
    for i in 0..PERIPHERAL_CHANNELS {
        let proj = dirs[i][0] * dx + dirs[i][1] * dy;
        out.p[i] = params.bend_gain * smooth_limit(proj, params.linear_range_xy)
            + params.axial_coupling * compression;
    }
    out.p[6] = params.axial_gain * compression;
    if let Some(rng) = noise {
        add_noise(&mut out, params.noise_sigma, rng);
    }
    Ok(out)
}

/// Per-channel response coefficient (Pa per N) for a contact at normalized
/// axial position `s`, as a function of the 60-degree angular distance step
/// between the channel and the contact direction.
///
/// Direct compression `a(s)` fades from full strength at the base to 20% at
/// the tip; it squeezes the contact-aligned channel locally and leaves the
/// others untouched. Bending `b(s)` grows from zero at the base to full
/// strength at the tip and follows the cosine of the angular distance:
/// compression on the far side, tension on the near side.
///
/// The two angular profiles must differ. A half-cosine direct lobe makes
/// the balanced case a(s) = b(s) collapse onto the pure base-contact
/// pattern of the opposite angle (max(0,c) - c = max(0,-c)), which no
/// classifier can undo.
fn contact_coefficient(params: &LatticeParams, s: f64, angle_steps: usize) -> f64 {
    // cos of 60-degree multiples, exact.
    const COS_TABLE: [f64; 6] = [1.0, 0.5, -0.5, -1.0, -0.5, 0.5];
    let cos_d = COS_TABLE[angle_steps % 6];
    let a = params.contact_direct_gain * (1.0 - 0.8 * s);
    let b = params.contact_bend_gain * s;
    let local = if angle_steps % 6 == 0 { 1.0 } else { 0.0 };
    a * local - b * cos_d
}

/// Pressures produced by a mid-lattice point contact.
pub fn synth_contact_pressures<R: Rng>(
    params: &LatticeParams,
    contact: &ContactSpec,
    noise: Option<&mut R>,
) -> Result<ChannelPressures> {
    // Re-validate so raw struct literals can't sneak out-of-range indices in.
    let contact = ContactSpec::new(contact.axial_pos, contact.radial_angle, contact.force)?;
    let s = contact.axial_frac();
    let mut out = ChannelPressures::default();
    for i in 0..PERIPHERAL_CHANNELS {
        let steps = (i + PERIPHERAL_CHANNELS - contact.radial_angle) % PERIPHERAL_CHANNELS;
        out.p[i] = contact_coefficient(params, s, steps) * contact.force;
    }
    out.p[6] = params.contact_center_gain * (1.0 - 0.5 * s) * contact.force;
    if let Some(rng) = noise {
        add_noise(&mut out, params.noise_sigma, rng);
    }
    Ok(out)
}

/// One labeled characterization sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledSample {
    pub trial: usize,
    pub contact: ContactSpec,
    pub pressures: ChannelPressures,
}

/// A labeled dataset in deterministic grid order:
/// trial-major, then axial position, then radial angle, then force step.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub samples: Vec<LabeledSample>,
}

/// Grid layout of a characterization run.
#[derive(Debug, Clone)]
pub struct CharacterizationConfig {
    /// Number of repeated trials.
    pub trials: usize,
    /// Force increment in N.
    pub force_step: f64,
    /// Number of force steps per ramp; forces are `force_step * (1..=steps)`,
    /// strictly positive so every sample is a real contact.
    pub force_steps: usize,
    pub exec: ExecMode,
}

impl Default for CharacterizationConfig {
    fn default() -> Self {
        CharacterizationConfig {
            trials: 5,
            force_step: 0.05,
            force_steps: 101,
            exec: ExecMode::default(),
        }
    }
}

impl CharacterizationConfig {
    pub fn forces(&self) -> Vec<f64> {
        (1..=self.force_steps)
            .map(|k| k as f64 * self.force_step)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidInput("trials must be >= 1".into()));
        }
        if self.force_steps < 1 {
            return Err(Error::InvalidInput("force_steps must be >= 1".into()));
        }
        if !(self.force_step.is_finite() && self.force_step > 0.0) {
            return Err(Error::InvalidInput(format!(
                "force_step must be > 0, got {}",
                self.force_step
            )));
        }
        let max = self.force_step * self.force_steps as f64;
        if max > 10.0 {
            return Err(Error::InvalidInput(format!(
                "ramp peak {max} N exceeds the 10 N contact limit"
            )));
        }
        Ok(())
    }
}

/// Run the full characterization grid: every (trial, axial, radial)
/// combination swept over the force ramp, with fresh sensor noise per
/// sample.
///
/// Each (trial, axial, radial) unit draws from its own counter-derived
/// ChaCha stream, so output is bit-identical for a given seed regardless of
/// execution mode or thread count.
pub fn run_characterization(
    params: &LatticeParams,
    cfg: &CharacterizationConfig,
    seed: u64,
) -> Result<Dataset> {
    params.validate()?;
    cfg.validate()?;
    let forces = cfg.forces();
    let units = cfg.trials * AXIAL_POSITIONS * RADIAL_ANGLES;

    let per_unit = exec::map_indexed(cfg.exec, units, |u| {
        let trial = u / (AXIAL_POSITIONS * RADIAL_ANGLES);
        let rest = u % (AXIAL_POSITIONS * RADIAL_ANGLES);
        let axial = rest / RADIAL_ANGLES;
        let radial = rest % RADIAL_ANGLES;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u as u64);
        forces
            .iter()
            .map(|&force| {
                let contact = ContactSpec {
                    axial_pos: axial,
                    radial_angle: radial,
                    force,
                };
                let pressures = synth_contact_pressures(params, &contact, Some(&mut rng))
                    .expect("grid indices are in range");
                LabeledSample {
                    trial,
                    contact,
                    pressures,
                }
            })
            .collect::<Vec<_>>()
    });

    Ok(Dataset {
        samples: per_unit.into_iter().flatten().collect(),
    })
}

pub const DATASET_CSV_HEADER: &str = "trial,axial,radial,force_N,p1,p2,p3,p4,p5,p6,p7";

/// Render the dataset CSV (pressures in Pa, 6 decimal places).
pub fn dataset_to_csv(ds: &Dataset) -> String {
    let mut out = String::with_capacity(64 * ds.samples.len() + 64);
    out.push_str(DATASET_CSV_HEADER);
    out.push('\n');
    for s in &ds.samples {
        out.push_str(&format!(
            "{},{},{},{:.6}",
            s.trial, s.contact.axial_pos, s.contact.radial_angle, s.contact.force
        ));
        for v in s.pressures.p {
            out.push_str(&format!(",{v:.6}"));
        }
        out.push('\n');
    }
    out
}

pub fn dataset_from_csv(text: &str) -> Result<Dataset> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == DATASET_CSV_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "dataset header mismatch: got {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut samples = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(Error::Parse(format!(
                "dataset row {}: expected 11 fields, got {}",
                idx + 2,
                fields.len()
            )));
        }
        let parse_usize = |f: &str, what: &str| {
            f.trim().parse::<usize>().map_err(|_| {
                Error::Parse(format!("dataset row {}: bad {what} `{f}`", idx + 2))
            })
        };
        let parse_f64 = |f: &str, what: &str| {
            f.trim().parse::<f64>().map_err(|_| {
                Error::Parse(format!("dataset row {}: bad {what} `{f}`", idx + 2))
            })
        };
        let trial = parse_usize(fields[0], "trial")?;
        let axial = parse_usize(fields[1], "axial")?;
        let radial = parse_usize(fields[2], "radial")?;
        let force = parse_f64(fields[3], "force")?;
        let mut p = [0.0; CHANNEL_COUNT];
        for (i, slot) in p.iter_mut().enumerate() {
            *slot = parse_f64(fields[4 + i], "pressure")?;
        }
        samples.push(LabeledSample {
            trial,
            contact: ContactSpec::new(axial, radial, force)?,
            pressures: ChannelPressures::new(p),
        });
    }
    Ok(Dataset { samples })
}
