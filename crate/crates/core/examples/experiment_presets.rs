//! Run a named preset, optionally overridden from TOML, and read the CSV back.
//!
//! cargo run --release --example experiment_presets

use merit_dynamics::error::Result;
use merit_dynamics::experiments::{presets, read_results, resolve, run_experiment, ConfigFile};

fn main() -> Result<()> {
    for name in presets::PRESET_NAMES.iter().take(4) {
        println!("{name:<8} {}", presets::describe(name).unwrap_or(""));
    }

    let config = ConfigFile::parse(
        r#"
        n_runs = 10
        horizon = 60
        [fixed]
        q = 0.4
        [[grid]]
        alpha = [0.1]
        population = [10, 100, 1000]
        "#,
    )?;
    let spec = resolve("fig2", Some(&config))?;
    let output = run_experiment(&spec)?;
    let dir = std::env::temp_dir().join("merit-dynamics-example");
    let paths = output.write_to_dir(&dir)?;
    let table = read_results(&paths[0])?;
    println!("\nwrote {}", paths[0].display());
    for r in table.stat("ratio") {
        println!("population {:>5}: ratio {:.3} +- {:.3} ({} runs)", r.keys[1], r.mean, r.stderr, r.n);
    }
    Ok(())
}
