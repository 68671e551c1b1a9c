//! Scratch probe: measure the actual noise in generated samples.

use lattice_tact::model::{
    run_characterization, synth_contact_pressures, CharacterizationConfig, LatticeParams,
};
use rand_chacha::ChaCha8Rng;

fn main() {
    let params = LatticeParams::default();
    let char_cfg = CharacterizationConfig {
        trials: 6,
        ..CharacterizationConfig::default()
    };
    let ds = run_characterization(&params, &char_cfg, 7).unwrap();

    let mut sum_sq = 0.0;
    let mut n = 0usize;
    let mut worst: f64 = 0.0;
    for s in &ds.samples {
        let clean =
            synth_contact_pressures::<ChaCha8Rng>(&params, &s.contact, None).unwrap();
        for i in 0..7 {
            let r = s.pressures.p[i] - clean.p[i];
            sum_sq += r * r;
            worst = worst.max(r.abs());
            n += 1;
        }
    }
    println!(
        "residual std {:.4} Pa (configured {}), worst |r| {:.3}, n {}",
        (sum_sq / n as f64).sqrt(),
        params.noise_sigma,
        worst,
        n
    );

    // First few samples of the first ramp.
    for s in &ds.samples[..3] {
        let clean =
            synth_contact_pressures::<ChaCha8Rng>(&params, &s.contact, None).unwrap();
        println!(
            "F={:.2} axial={} radial={}\n  noisy {:?}\n  clean {:?}",
            s.contact.force, s.contact.axial_pos, s.contact.radial_angle, s.pressures.p, clean.p
        );
    }
}
