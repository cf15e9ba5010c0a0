//! Command-line front end. Every subcommand is a thin wrapper over library calls.
//!
//! Exit codes: 0 success, 2 invalid input, 3 I/O failure, 4 no convergence.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bounds::{separation_prob_ps, time_to_parity_bound, time_to_separation_bound, ParityBoundInput};
use crate::error::{Error, Result};
use crate::experiments::{self, presets, write_trajectory_csv, ConfigFile};
use crate::meanfield::{
    aa_fixed_point, aa_separation_lower_bound, canonical_aa_start, ea_fixed_point, epsilon_threshold, iterate,
    MapKind, MeanFieldPoint, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE,
};
use crate::model::ModelParams;
use crate::stochastic::{run_ensemble, SimConfig};

pub const THREADS_ENV: &str = "MERIT_DYNAMICS_THREADS";

#[derive(Debug, Parser)]
#[command(name = "merit-dynamics", version, about = "Group dynamics under meritocratic selection")]
pub struct Cli {
    /// Worker threads (default: MERIT_DYNAMICS_THREADS, else all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Ea,
    Aa,
}

impl From<ModelArg> for MapKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Ea => MapKind::Ea,
            ModelArg::Aa => MapKind::Aa,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the finite-population model and write trajectory CSV.
    Simulate(SimulateArgs),
    /// Solve for the mean-field fixed point.
    Fixedpoint(FixedpointArgs),
    /// Evaluate the time-to-parity or time-to-separation bound.
    Bounds {
        #[command(subcommand)]
        which: BoundsCommand,
    },
    /// Run a named experiment preset and write its CSV.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "ea")]
    pub model: ModelArg,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0.4)]
    pub q: f64,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    /// Individuals per group.
    #[arg(long)]
    pub n: u64,
    /// Number of generations.
    #[arg(long)]
    pub t: u64,
    #[arg(long, default_value_t = 1)]
    pub runs: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Initial high-type fractions `x_a,x_b`.
    #[arg(long, value_parser = parse_pair, default_value = "0.1,0.7")]
    pub init: (f64, f64),
    /// Output file (one run; default stdout) or directory (several runs).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FixedpointArgs {
    #[arg(long, value_enum, default_value = "ea")]
    pub model: ModelArg,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum BoundsCommand {
    /// High-probability time to eta-parity.
    TEta {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        delta0: f64,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        omega: f64,
        #[arg(long)]
        json: bool,
    },
    /// High-probability time to a one-step delta-separation.
    TDelta {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        omega: f64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Preset name (see --list).
    #[arg(required_unless_present = "list")]
    pub name: Option<String>,
    /// TOML file overriding the preset (or defining a new experiment).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (default: the config's `output` file, else `results`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub runs: Option<u64>,
    /// List presets and exit.
    #[arg(long)]
    pub list: bool,
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `x_a,x_b`, got `{s}`"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok((num(a)?, num(b)?))
}

/// Format a number with at most 12 decimals and no trailing zeros.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    match s {
        "-0" | "" => "0".to_string(),
        other => other.to_string(),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } => 3,
        Error::NoConvergence { .. } => 4,
        _ => 2,
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::invalid(format!("{THREADS_ENV} must be a positive integer (got `{v}`)"))),
        Err(_) => Ok(None),
    }
}

/// Parse `args` and run, writing normal output to `out`. Help and version requests are written to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli, out),
        Err(e) if !e.use_stderr() => write!(out, "{}", e.render()).map_err(stdout_err),
        Err(e) => Err(Error::invalid(e.render().to_string())),
    }
}

/// Run an already parsed command line.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(cli.threads)? {
        if n == 0 {
            return Err(Error::invalid("--threads must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::invalid(e.to_string()))?;
    let mut buf = Vec::new();
    let result = pool.install(|| dispatch(cli.command, &mut buf));
    out.write_all(&buf).map_err(stdout_err)?;
    result
}

fn stdout_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Fixedpoint(a) => cmd_fixedpoint(a, out),
        Command::Bounds { which } => cmd_bounds(which, out),
        Command::Experiment(a) => cmd_experiment(a, out),
    }
}

fn cmd_simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let params = ModelParams::new(a.alpha, a.p, a.q, a.eps, a.n)?;
    let config = SimConfig::from_fractions(params, a.model.into(), a.init.0, a.init.1, a.t, a.seed, a.runs)?;
    let runs = run_ensemble(&config)?;
    match (&a.out, runs.len()) {
        (None, 1) => write_trajectory_csv(&mut *out, &runs[0]),
        (Some(path), 1) => {
            let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
            write_trajectory_csv(std::io::BufWriter::new(file), &runs[0])
        }
        (None, _) => Err(Error::invalid("--out DIR is required when --runs > 1")),
        (Some(dir), _) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            for r in &runs {
                let path = dir.join(format!("run_{:04}.csv", r.run_index));
                let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
                write_trajectory_csv(std::io::BufWriter::new(file), r)?;
            }
            writeln!(out, "wrote {} trajectories to {}", runs.len(), dir.display()).map_err(stdout_err)
        }
    }
}

fn cmd_fixedpoint(a: FixedpointArgs, out: &mut dyn Write) -> Result<()> {
    let params = ModelParams::new(a.alpha, a.p, a.q, a.eps, 1)?;
    let kind: MapKind = a.model.into();
    let eps_tilde = epsilon_threshold(a.alpha, a.p)?;
    let (point, bound): (MeanFieldPoint, Option<f64>) = match kind {
        MapKind::Aa if a.eps > 0.0 && a.q == 0.0 => {
            let point = aa_fixed_point(&params, a.tol, a.max_iter)?;
            (point, Some(aa_separation_lower_bound(&params)))
        }
        MapKind::Aa if a.eps > 0.0 => {
            let report = iterate(MapKind::Aa, &canonical_aa_start(a.alpha), &params, a.tol, a.max_iter);
            if !report.converged {
                return Err(Error::NoConvergence {
                    iterations: report.iterations,
                    residual: report.last().residual,
                });
            }
            (*report.last(), None)
        }
        _ => (ea_fixed_point(&params), None),
    };
    let affinity = kind == MapKind::Aa && a.eps > 0.0;
    let text = if a.json {
        json!({
            "x_a": point.x_a,
            "x_b": point.x_b,
            "regime": point.regime.as_str(),
            "residual": point.residual,
            "eps_tilde": eps_tilde,
            "bound": bound,
        })
        .to_string()
    } else {
        let mut fields = vec![
            fmt_num(point.x_a),
            fmt_num(point.x_b),
            point.regime.as_str().to_string(),
            fmt_num(point.residual),
        ];
        if affinity {
            fields.push(fmt_num(eps_tilde));
        }
        if let Some(b) = bound {
            fields.push(fmt_num(b));
        }
        fields.join(" ")
    };
    writeln!(out, "{text}").map_err(stdout_err)
}

fn cmd_bounds(which: BoundsCommand, out: &mut dyn Write) -> Result<()> {
    let text = match which {
        BoundsCommand::TEta {
            alpha,
            p,
            q,
            n,
            delta0,
            eta,
            omega,
            json,
        } => {
            let input = ParityBoundInput {
                delta0,
                eta,
                omega,
                params: ModelParams::new(alpha, p, q, 0.0, n)?,
            };
            let t = time_to_parity_bound(&input).map_err(|e| match e {
                Error::BoundInvalid(msg) => Error::BoundInvalid(format!("N below validity threshold ({msg})")),
                other => other,
            })?;
            if json {
                json!({ "t_eta": t, "validity_floor": input.validity_floor()? }).to_string()
            } else {
                t.to_string()
            }
        }
        BoundsCommand::TDelta {
            alpha,
            p,
            q,
            n,
            delta,
            omega,
            json,
        } => {
            let params = ModelParams::new(alpha, p, q, 0.0, n)?;
            let bound = time_to_separation_bound(delta, omega, &params)?;
            let t = bound.as_f64();
            if json {
                json!({
                    "t_delta": if t.is_finite() { json!(t as u64) } else { json!("inf") },
                    "p_s": separation_prob_ps(delta, &params)?,
                })
                .to_string()
            } else if t.is_finite() {
                (t as u64).to_string()
            } else {
                "inf".to_string()
            }
        }
    };
    writeln!(out, "{text}").map_err(stdout_err)
}

fn cmd_experiment(a: ExperimentArgs, out: &mut dyn Write) -> Result<()> {
    if a.list {
        for name in presets::PRESET_NAMES {
            let spec = presets::preset(name).expect("listed presets exist");
            writeln!(
                out,
                "{name:<16} {:<17} {}",
                spec.kind.as_str(),
                presets::describe(name).unwrap_or("")
            )
            .map_err(stdout_err)?;
        }
        return Ok(());
    }
    let name = a.name.expect("clap requires a name without --list");
    let config = a.config.as_deref().map(ConfigFile::load).transpose()?;
    let mut spec = experiments::resolve(&name, config.as_ref())?;
    if let Some(seed) = a.seed {
        spec.master_seed = seed;
    }
    if let Some(runs) = a.runs {
        spec.n_runs = runs;
    }
    let output = experiments::run_experiment(&spec)?;
    let written = match (&a.out, &spec.output) {
        (Some(dir), _) => output.write_to_dir(dir)?,
        (None, Some(file)) => output.write_to(file)?,
        (None, None) => output.write_to_dir(Path::new("results"))?,
    };
    for path in written {
        writeln!(out, "{}", path.display()).map_err(stdout_err)?;
    }
    Ok(())
}

/// Entry point of the binary: run with the process arguments and map errors to exit codes.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> Result<String> {
        let mut out = Vec::new();
        let mut full = vec!["merit-dynamics"];
        full.extend_from_slice(args);
        run(full, &mut out)?;
        Ok(String::from_utf8(out).unwrap())
    }

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_num(0.1 + 0.2), "0.3");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(-1e-17), "0");
        assert_eq!(fmt_num(0.62), "0.62");
        assert_eq!(fmt_num(3.0), "3");
    }

    #[test]
    fn fixedpoint_lines() {
        assert_eq!(run_str(&["fixedpoint", "--model", "ea", "--alpha", "0.3", "--p", "0.9"]).unwrap(), "0.27 0.27 under 0\n");
        let aa = run_str(&["fixedpoint", "--model", "aa", "--alpha", "0.3", "--p", "0.9", "--eps", "0.2"]).unwrap();
        assert!(aa.starts_with("0.62 0 over 0 0.15 0.62"), "{aa}");
        let zero = run_str(&["fixedpoint", "--model", "aa", "--alpha", "0.3", "--p", "0.9", "--eps", "0"]).unwrap();
        assert_eq!(zero, "0.27 0.27 under 0\n");
    }

    #[test]
    fn error_codes() {
        let e = run_str(&["simulate", "--alpha", "0.6", "--p", "0.9", "--n", "10", "--t", "5"]).unwrap_err();
        assert_eq!(exit_code(&e), 2);
        assert!(e.to_string().contains("alpha"));
        let e = run_str(&[
            "bounds", "t-eta", "--alpha", "0.3", "--p", "0.9", "--q", "0.4", "--n", "100", "--delta0", "0.8", "--eta",
            "0.05", "--omega", "0.05",
        ])
        .unwrap_err();
        assert_eq!(exit_code(&e), 2);
        assert!(e.to_string().contains("N below validity threshold"));
        let e = run_str(&["experiment", "nope"]).unwrap_err();
        assert_eq!(exit_code(&e), 2);
        assert!(run_str(&["simulate", "--bogus"]).is_err());
    }
}
