//! Scratch probe: nearest-centroid oracle accuracy on the synthetic
//! characterization set, to bound what any classifier can achieve.

use lattice_tact::model::{
    run_characterization, synth_contact_pressures, CharacterizationConfig, ContactSpec,
    LatticeParams,
};
use lattice_tact::net::split_holdout;
use rand_chacha::ChaCha8Rng;

fn main() {
    let params = LatticeParams::default();
    let char_cfg = CharacterizationConfig {
        trials: 6,
        ..CharacterizationConfig::default()
    };
    let ds = run_characterization(&params, &char_cfg, 7).unwrap();
    let (_, test) = split_holdout(&ds, None).unwrap();

    // Noiseless template library over a fine force grid.
    let mut templates = Vec::new();
    for axial in 0..5 {
        for radial in 0..6 {
            for k in 1..=505 {
                let f = k as f64 * 0.01;
                let spec = ContactSpec::new(axial, radial, f).unwrap();
                let p = synth_contact_pressures::<ChaCha8Rng>(&params, &spec, None).unwrap();
                templates.push((axial, radial, p));
            }
        }
    }

    let (mut ax_ok, mut ra_ok) = (0usize, 0usize);
    let mut buckets = vec![(0usize, 0usize, 0usize); 11];
    let mut printed = 0;
    for s in &test {
        let mut best = (f64::INFINITY, 0usize, 0usize);
        for (axial, radial, t) in &templates {
            let mut d = 0.0;
            for i in 0..7 {
                d += (s.pressures.p[i] - t.p[i]).powi(2);
            }
            if d < best.0 {
                best = (d, *axial, *radial);
            }
        }
        let b = ((s.contact.force / 0.5) as usize).min(10);
        buckets[b].0 += 1;
        if best.1 == s.contact.axial_pos {
            ax_ok += 1;
        } else {
            buckets[b].1 += 1;
        }
        if best.2 == s.contact.radial_angle {
            ra_ok += 1;
        } else {
            buckets[b].2 += 1;
        }
        if (best.1 != s.contact.axial_pos || best.2 != s.contact.radial_angle)
            && s.contact.force > 3.0
            && printed < 5
        {
            printed += 1;
            println!(
                "MISS: true=({},{},{:.2}) best=({},{}) p={:?}",
                s.contact.axial_pos,
                s.contact.radial_angle,
                s.contact.force,
                best.1,
                best.2,
                s.pressures.p
            );
        }
    }
    let n = test.len() as f64;
    println!(
        "oracle: axial {:.4} radial {:.4} over {} samples",
        ax_ok as f64 / n,
        ra_ok as f64 / n,
        test.len()
    );
    for (i, (cnt, ax, ra)) in buckets.iter().enumerate() {
        if *cnt > 0 {
            println!(
                "force {:4.2}-{:4.2}: n={cnt:4} axial_err {:5.2}% radial_err {:5.2}%",
                i as f64 * 0.5,
                (i + 1) as f64 * 0.5,
                100.0 * *ax as f64 / *cnt as f64,
                100.0 * *ra as f64 / *cnt as f64
            );
        }
    }
}
