//! The continuous-ability model: admit shares with and without an affinity boost.
//!
//! cargo run --release --example rich_model

use merit_dynamics::error::Result;
use merit_dynamics::richmodel::{run_rich, RichParams};

fn main() -> Result<()> {
    for mu_eps in [0.0, 0.06, 0.24] {
        let params = RichParams {
            master_seed: 3,
            ..RichParams::base(0.3, mu_eps)
        };
        let run = run_rich(&params, 0)?;
        let last = run.metrics.last().expect("horizon is positive");
        println!(
            "mu_eps={mu_eps:<5} leading share (last 30) {:.3}  final means A {:+.3} B {:+.3}  admits {:?}",
            run.tail_share(30),
            last.mean[0],
            last.mean[1],
            last.admits
        );
    }
    Ok(())
}
