//! High-probability bounds on the time to parity and on the time to a one-step separation.
//!
//! cargo run --example parity_bounds

use merit_dynamics::bounds::{separation_prob_ps, time_to_parity_bound, time_to_separation_bound, ParityBoundInput};
use merit_dynamics::error::Result;
use merit_dynamics::model::ModelParams;

fn main() -> Result<()> {
    println!("{:>6} {:>6} {:>8} {:>10}", "alpha", "p", "T_eta", "c");
    for alpha in [0.2, 0.3] {
        for p in [0.8, 0.9, 0.95] {
            let input = ParityBoundInput {
                delta0: 0.8,
                eta: 0.05,
                omega: 0.05,
                params: ModelParams::new(alpha, p, 0.4, 0.0, 65_000)?,
            };
            let t = time_to_parity_bound(&input)?;
            println!("{alpha:>6} {p:>6} {t:>8} {:>10.3e}", input.validity_floor()?);
        }
    }

    let small = ParityBoundInput {
        delta0: 0.8,
        eta: 0.05,
        omega: 0.05,
        params: ModelParams::new(0.3, 0.9, 0.4, 0.0, 100)?,
    };
    println!("\nN=100: {}", time_to_parity_bound(&small).unwrap_err());

    println!("\n{:>6} {:>6} {:>12} {:>10}", "N", "delta", "p_s", "T_delta");
    for n in [10, 100, 1000] {
        for delta in [0.05, 0.1, 0.2] {
            let params = ModelParams::new(0.3, 0.9, 0.4, 0.0, n)?;
            let ps = separation_prob_ps(delta, &params)?;
            let t = time_to_separation_bound(delta, 0.05, &params)?;
            println!("{n:>6} {delta:>6} {ps:>12.4e} {:>10}", t.as_f64());
        }
    }
    Ok(())
}
