//! Scratch probe: train on the six-trial synthetic set and print metrics.

use std::time::Instant;

use lattice_tact::model::{run_characterization, CharacterizationConfig, LatticeParams};
use lattice_tact::net::{train, TrainConfig};

fn main() {
    let params = LatticeParams::default();
    let char_cfg = CharacterizationConfig {
        trials: 6,
        ..CharacterizationConfig::default()
    };
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7u64);
    let epochs = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(200usize);
    let ds = run_characterization(&params, &char_cfg, seed).unwrap();
    println!("dataset: {} samples", ds.samples.len());

    let cfg = TrainConfig {
        seed,
        epochs,
        ..TrainConfig::default()
    };
    let start = Instant::now();
    let out = train(&ds, &cfg).unwrap();
    let wall = start.elapsed().as_secs_f64();
    println!(
        "seed {seed} epochs {epochs}: axial {:.4} radial {:.4} mae {:.4} N in {:.1} s",
        out.final_metrics.axial_accuracy,
        out.final_metrics.radial_accuracy,
        out.final_metrics.force_mae,
        wall
    );
    for row in out.history.iter().step_by(20) {
        println!(
            "  epoch {:3} loss {:.4} axial {:.4} radial {:.4} mae {:.4}",
            row.epoch,
            row.train_loss,
            row.metrics.axial_accuracy,
            row.metrics.radial_accuracy,
            row.metrics.force_mae
        );
    }
}
