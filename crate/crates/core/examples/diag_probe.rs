//! Scratch probe: where do the classification errors live?

use lattice_tact::exec::ExecMode;
use lattice_tact::model::{run_characterization, CharacterizationConfig, LatticeParams};
use lattice_tact::net::{split_holdout, train, TrainConfig};

fn main() {
    let params = LatticeParams::default();
    let char_cfg = CharacterizationConfig {
        trials: 6,
        ..CharacterizationConfig::default()
    };
    let mut args = std::env::args().skip(1);
    let lr: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1e-3);
    let epochs: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(100);
    let lambda: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let ds = run_characterization(&params, &char_cfg, 7).unwrap();

    let cfg = TrainConfig {
        seed: 7,
        epochs,
        learning_rate: lr,
        lambda,
        ..TrainConfig::default()
    };
    let start = std::time::Instant::now();
    let out = train(&ds, &cfg).unwrap();
    println!(
        "lr {lr} epochs {epochs} lambda {lambda}: axial {:.4} radial {:.4} mae {:.4} ({:.0} s)",
        out.final_metrics.axial_accuracy,
        out.final_metrics.radial_accuracy,
        out.final_metrics.force_mae,
        start.elapsed().as_secs_f64()
    );

    // Error breakdown by force bucket on the held-out trial.
    let (_, test) = split_holdout(&ds, None).unwrap();
    let mut scratch = out.model.scratch();
    let mut buckets = vec![(0usize, 0usize, 0usize); 11];
    for s in &test {
        let pred = out.model.forward_scratch(&s.pressures, &mut scratch);
        let b = ((s.contact.force / 0.5) as usize).min(10);
        buckets[b].0 += 1;
        if pred.axial_argmax() != s.contact.axial_pos {
            buckets[b].1 += 1;
        }
        if pred.radial_argmax() != s.contact.radial_angle {
            buckets[b].2 += 1;
        }
    }
    for (i, (n, ax, ra)) in buckets.iter().enumerate() {
        if *n > 0 {
            println!(
                "force {:4.2}-{:4.2} N: n={n:4} axial_err {:5.2}% radial_err {:5.2}%",
                i as f64 * 0.5,
                (i + 1) as f64 * 0.5,
                100.0 * *ax as f64 / *n as f64,
                100.0 * *ra as f64 / *n as f64
            );
        }
    }
    let _ = ExecMode::default();
}
