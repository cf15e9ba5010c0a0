//! Apply the selection rule to a few states and check its three properties.
//!
//! cargo run --example allocation_rule

use merit_dynamics::allocation::{allocate_integer, allocate_real, check_integer_properties, check_properties};
use merit_dynamics::error::Result;
use merit_dynamics::model::{GroupState, ModelParams};

fn main() -> Result<()> {
    let params = ModelParams::new(0.3, 0.9, 0.4, 0.0, 1000)?;
    println!("capacity {} seats for {} individuals", params.capacity(), 2 * params.n_per_group());
    for (h_a, h_b) in [(500, 300), (200, 200), (100, 700), (333, 0)] {
        let state = GroupState::from_counts(h_a, h_b, params.n_per_group())?;
        let real = allocate_real(&state, &params)?;
        let int = allocate_integer(&state, &params)?;
        let props = check_properties(&state, &real, &params);
        let int_props = check_integer_properties(&state, &int, &params)?;
        println!(
            "H=({h_a:>3},{h_b:>3}) {:<5} real high {:?} low {:?} | integer high {:?} low {:?} | properties {} / {:?}",
            real.regime.as_str(),
            real.high.map(|v| (v * 100.0).round() / 100.0),
            real.low.map(|v| (v * 100.0).round() / 100.0),
            int.high,
            int.low,
            props.all(),
            int_props.fairness,
        );
    }
    Ok(())
}
