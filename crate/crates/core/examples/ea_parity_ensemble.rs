//! A seeded stochastic ensemble under Equal Advantage: groups reach parity from unequal starts.
//!
//! cargo run --release --example ea_parity_ensemble

use merit_dynamics::bounds::{empirical_hitting_times, HittingMode};
use merit_dynamics::error::Result;
use merit_dynamics::meanfield::MapKind;
use merit_dynamics::model::ModelParams;
use merit_dynamics::stochastic::{run_ensemble, SimConfig};

fn main() -> Result<()> {
    let params = ModelParams::new(0.3, 0.9, 0.4, 0.0, 2000)?;
    let config = SimConfig::from_fractions(params, MapKind::Ea, 0.1, 0.7, 400, 7, 20)?;
    let runs = run_ensemble(&config)?;

    for t in [0usize, 1, 2, 5, 10, 50, 200, 400] {
        let mean = |f: fn(f64, f64) -> f64| {
            runs.iter()
                .map(|r| f(r.steps[t].state.x_a(), r.steps[t].state.x_b()))
                .sum::<f64>()
                / runs.len() as f64
        };
        println!(
            "t={t:>3}  x_a {:.4}  x_b {:.4}  |delta| {:.4}",
            mean(|a, _| a),
            mean(|_, b| b),
            mean(|a, b| (a - b).abs())
        );
    }

    let hits = empirical_hitting_times(&runs, 0.01, HittingMode::Parity);
    println!(
        "\ntime to 0.01-parity: mean {:.1}, p95 {:?}, censored {}/{}",
        hits.mean().unwrap_or(f64::NAN),
        hits.percentile(95.0),
        hits.censored(),
        hits.n_runs()
    );
    Ok(())
}
