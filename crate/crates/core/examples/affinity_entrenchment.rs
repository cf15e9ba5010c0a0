//! A small affinity advantage entrenches one group; Equal Advantage from the same start does not.
//!
//! cargo run --release --example affinity_entrenchment

use merit_dynamics::error::Result;
use merit_dynamics::meanfield::MapKind;
use merit_dynamics::model::ModelParams;
use merit_dynamics::stochastic::{run_ensemble_map, SimConfig};

fn main() -> Result<()> {
    for (kind, eps) in [(MapKind::Ea, 0.0), (MapKind::Aa, 0.03)] {
        let params = ModelParams::new(0.3, 0.9, 0.4, eps, 1000)?;
        let config = SimConfig::from_fractions(params, kind, 0.2, 0.2, 500, 11, 50)?;
        let mut seps = run_ensemble_map(&config, |traj| {
            let tail = &traj.steps[375..];
            tail.iter().map(|s| s.state.delta().abs()).sum::<f64>() / tail.len() as f64
        })?;
        seps.sort_by(f64::total_cmp);
        println!(
            "{} eps={eps:<4}  long-run |delta|: median {:.4}, min {:.4}, max {:.4}",
            kind.as_str(),
            seps[seps.len() / 2],
            seps[0],
            seps[seps.len() - 1]
        );
    }
    Ok(())
}
