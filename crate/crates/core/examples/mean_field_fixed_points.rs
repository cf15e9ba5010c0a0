//! Mean-field fixed points of both transition models and the affinity threshold.
//!
//! cargo run --example mean_field_fixed_points

use merit_dynamics::error::Result;
use merit_dynamics::meanfield::{
    aa_fixed_point, aa_separation_lower_bound, ea_fixed_point, epsilon_threshold, iterate, MapKind, DEFAULT_MAX_ITER,
    DEFAULT_TOLERANCE,
};
use merit_dynamics::model::{GroupState, ModelParams};

fn main() -> Result<()> {
    let params = ModelParams::new(0.3, 0.9, 0.4, 0.0, 1)?;
    for start in [(0.1, 0.7), (0.1, 0.4)] {
        let report = iterate(
            MapKind::Ea,
            &GroupState::new(start.0, start.1)?,
            &params,
            1e-12,
            DEFAULT_MAX_ITER,
        );
        let last = report.last();
        println!(
            "EA from {start:?}: ({:.6}, {:.6}) after {} iterations",
            last.x_a, last.x_b, report.iterations
        );
    }
    let ea = ea_fixed_point(&params);
    println!("EA closed form: ({}, {})", ea.x_a, ea.x_b);

    let tilde = epsilon_threshold(0.3, 0.9)?;
    println!("\naffinity threshold {tilde:.4}");
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "eps", "x_a", "x_b", "delta", "bound");
    for eps in [0.0, 0.02, 0.05, 0.1, 0.14, 0.15, 0.2, 0.3] {
        let aa = ModelParams::new(0.3, 0.9, 0.0, eps, 1)?;
        let point = aa_fixed_point(&aa, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER)?;
        println!(
            "{eps:>6.2} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            point.x_a,
            point.x_b,
            point.delta(),
            aa_separation_lower_bound(&aa)
        );
    }
    Ok(())
}
