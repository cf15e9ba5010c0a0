//! One runner per [`ExperimentKind`]. Runs inside a cell execute in parallel and are
//! aggregated in run-index order, so output is independent of the thread count.

use std::ops::ControlFlow;

use rayon::prelude::*;

use super::table::{ResultTable, Summary};
use super::{Cell, ExperimentKind, ExperimentOutput, ExperimentSpec, SNAPSHOT_KEYS};
use crate::bounds::{time_to_parity_bound, HittingTimeStats, ParityBoundInput};
use crate::error::{Error, Result};
use crate::meanfield::{
    aa_equilibrium_separation_qpos, aa_separation_lower_bound, at_or_above_threshold, epsilon_threshold, iterate,
    MapKind,
};
use crate::model::{GroupState, ModelParams, Regime};
use crate::richmodel::{run_rich, AbilityScale, RichParams};
use crate::stochastic::{run_ensemble, simulate_run, SimConfig};

const MEANFIELD_TOLERANCE: f64 = 1e-13;
const MEANFIELD_MAX_ITER: usize = 1_000_000;

fn get(cell: &Cell, key: &str, default: f64) -> f64 {
    cell.get(key).copied().unwrap_or(default)
}

fn whole(value: f64, key: &str) -> Result<u64> {
    if value >= 1.0 && value.fract() == 0.0 && value < 1e15 {
        Ok(value as u64)
    } else {
        Err(Error::Config(format!("`{key}` must be a positive integer (got {value})")))
    }
}

/// Per-group size from `n`, or from `population` (both groups together).
pub fn n_per_group(cell: &Cell) -> Result<u64> {
    match (cell.get("population"), cell.get("n")) {
        (Some(_), Some(_)) => Err(Error::Config("give either `n` or `population`, not both".into())),
        (Some(&pop), None) => {
            let pop = whole(pop, "population")?;
            if pop % 2 != 0 {
                return Err(Error::Config(format!("`population` must be even (got {pop})")));
            }
            Ok(pop / 2)
        }
        (None, Some(&n)) => whole(n, "n"),
        (None, None) => Ok(1000),
    }
}

/// Stylized-model parameters of a cell (defaults: `alpha = 0.3`, `p = 0.9`, `q = 0.4`,
/// `eps = 0`, `n = 1000`).
pub fn model_params(cell: &Cell) -> Result<ModelParams> {
    ModelParams::new(
        get(cell, "alpha", 0.3),
        get(cell, "p", 0.9),
        get(cell, "q", 0.4),
        get(cell, "eps", 0.0),
        n_per_group(cell)?,
    )
}

pub fn map_kind(cell: &Cell) -> Result<MapKind> {
    match cell.get("model") {
        Some(0.0) => Ok(MapKind::Ea),
        Some(1.0) => Ok(MapKind::Aa),
        Some(&m) => Err(Error::Config(format!("`model` must be 0 (EA) or 1 (AA), got {m}"))),
        None if get(cell, "eps", 0.0) > 0.0 => Ok(MapKind::Aa),
        None => Ok(MapKind::Ea),
    }
}

/// Simulation config of a cell, starting from `(x_a0, x_b0)` or `default_start`.
pub fn sim_config(spec: &ExperimentSpec, cell: &Cell, default_start: (f64, f64)) -> Result<SimConfig> {
    let params = model_params(cell)?;
    SimConfig::from_fractions(
        params,
        map_kind(cell)?,
        get(cell, "x_a0", default_start.0),
        get(cell, "x_b0", default_start.1),
        spec.horizon,
        spec.master_seed,
        spec.n_runs,
    )
}

/// Rich-model parameters of a cell on top of [`RichParams::base`].
pub fn rich_params(spec: &ExperimentSpec, cell: &Cell) -> Result<RichParams> {
    let mu_eps = get(cell, "mu_eps", 0.0);
    let n = whole(get(cell, "n", 500.0), "n")? as usize;
    let scale = match get(cell, "scale", 0.0) {
        0.0 => AbilityScale::Standardized,
        1.0 => AbilityScale::Raw,
        s => return Err(Error::Config(format!("`scale` must be 0 or 1, got {s}"))),
    };
    let base = RichParams::base(get(cell, "alpha", 0.3), mu_eps);
    let snapshots = SNAPSHOT_KEYS
        .iter()
        .filter_map(|k| cell.get(*k))
        .map(|&g| whole(g + 1.0, "snapshot").map(|v| v - 1))
        .collect::<Result<Vec<_>>>()?;
    let params = RichParams {
        n: [n, n],
        sigma_eps: get(cell, "sigma_eps", mu_eps / 2.0),
        theta: get(cell, "theta", base.theta),
        mu_i: get(cell, "mu_i", base.mu_i),
        sigma_i: get(cell, "sigma_i", base.sigma_i),
        sigma_lambda: get(cell, "sigma_lambda", base.sigma_lambda),
        horizon: spec.horizon,
        master_seed: spec.master_seed,
        scale,
        snapshots,
        ..base
    };
    params.validate()?;
    Ok(params)
}

fn par_runs<T, F>(n_runs: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..n_runs).into_par_iter().map(f).collect()
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Run `spec` and collect its result table.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    match spec.kind {
        ExperimentKind::Trajectories => exp_trajectories(spec),
        ExperimentKind::MaxSeparation => exp_max_separation_vs_n(spec),
        ExperimentKind::TimeToParity => exp_time_to_parity(spec),
        ExperimentKind::Thm3Ratio => exp_thm3_ratio(spec),
        ExperimentKind::DeltaVsEpsilon => exp_delta_vs_epsilon(spec),
        ExperimentKind::AaHeatmap => exp_aa_heatmap(spec),
        ExperimentKind::RichHeatmap => exp_rich_heatmap(spec),
        ExperimentKind::RichSnapshots => exp_rich_snapshots(spec),
    }
}

fn table_for(spec: &ExperimentSpec, extra_keys: &[&str]) -> ResultTable {
    let mut keys = spec.key_names();
    keys.extend(extra_keys.iter().map(|k| k.to_string()));
    ResultTable::new(spec.id.clone(), keys, spec.master_seed)
}

fn only_table(table: ResultTable) -> Result<ExperimentOutput> {
    Ok(ExperimentOutput {
        table,
        snapshots: Vec::new(),
    })
}

fn admit_share_a(admits: [u64; 2]) -> f64 {
    let total = admits[0] + admits[1];
    if total == 0 {
        0.5
    } else {
        admits[0] as f64 / total as f64
    }
}

/// Per-generation `x_a`, `x_b`, `delta`, `abs_delta`, `share_a`, `share_b` averaged over runs.
pub fn exp_trajectories(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let mut table = table_for(spec, &["t"]);
    for cell in spec.cells() {
        let config = sim_config(spec, &cell, (0.1, 0.7))?;
        let runs = run_ensemble(&config)?;
        let keys = spec.cell_keys(&cell);
        for t in 0..=spec.horizon as usize {
            let steps: Vec<_> = runs.iter().map(|r| &r.steps[t]).collect();
            let col = |f: &dyn Fn(&crate::stochastic::TrajectoryStep) -> f64| {
                Summary::of(&steps.iter().map(|s| f(s)).collect::<Vec<_>>())
            };
            let mut k = keys.clone();
            k.push(t as f64);
            table.push(k.clone(), "x_a", col(&|s| s.state.x_a()));
            table.push(k.clone(), "x_b", col(&|s| s.state.x_b()));
            table.push(k.clone(), "delta", col(&|s| s.state.delta()));
            table.push(k.clone(), "abs_delta", col(&|s| s.state.delta().abs()));
            table.push(k.clone(), "share_a", col(&|s| admit_share_a(s.allocation.admits())));
            table.push(k, "share_b", col(&|s| 1.0 - admit_share_a(s.allocation.admits())));
        }
    }
    only_table(table)
}

/// `max_{t <= T} |Delta(t)|` of each run, starting both groups at `alpha p`.
pub fn max_separation_runs(spec: &ExperimentSpec, cell: &Cell) -> Result<Vec<f64>> {
    let params = model_params(cell)?;
    let x0 = params.alpha() * params.p();
    let config = sim_config(spec, cell, (x0, x0))?;
    par_runs(spec.n_runs, |i| {
        let mut max = 0.0f64;
        simulate_run(&config, i, |s| {
            max = max.max(s.state.delta().abs());
            ControlFlow::Continue(())
        })?;
        Ok(max)
    })
}

/// Stats `max_abs_delta` and `ratio` (the maximum divided by `2 alpha`).
pub fn exp_max_separation_vs_n(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let mut table = table_for(spec, &[]);
    for cell in spec.cells() {
        let alpha = model_params(&cell)?.alpha();
        let maxima = max_separation_runs(spec, &cell)?;
        let ratios: Vec<f64> = maxima.iter().map(|m| m / (2.0 * alpha)).collect();
        let keys = spec.cell_keys(&cell);
        table.push(keys.clone(), "max_abs_delta", Summary::of(&maxima));
        table.push(keys, "ratio", Summary::of(&ratios));
    }
    only_table(table)
}

/// Per-run first time with `|Delta| <= eta`, censored at the horizon.
pub fn parity_hitting_times(spec: &ExperimentSpec, cell: &Cell) -> Result<HittingTimeStats> {
    let eta = get(cell, "eta", 0.01);
    let config = sim_config(spec, cell, (0.9, 0.1))?;
    let times = par_runs(spec.n_runs, |i| {
        let mut hit = None;
        simulate_run(&config, i, |s| {
            if s.state.delta().abs() <= eta {
                hit = Some(s.t);
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })?;
        Ok(hit)
    })?;
    Ok(HittingTimeStats::new(times, spec.horizon))
}

/// Stats `hit_time` (uncensored runs), `hit_time_p95` and `censored_frac`.
pub fn exp_time_to_parity(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let mut table = table_for(spec, &[]);
    for cell in spec.cells() {
        let stats = parity_hitting_times(spec, &cell)?;
        let observed: Vec<f64> = stats.times.iter().flatten().map(|&t| t as f64).collect();
        let censored: Vec<f64> = stats.times.iter().map(|t| indicator(t.is_none())).collect();
        let p95 = stats.percentile(95.0).map_or(f64::INFINITY, |t| t as f64);
        let keys = spec.cell_keys(&cell);
        table.push(keys.clone(), "hit_time", Summary::of(&observed));
        table.push(keys.clone(), "hit_time_p95", Summary { n: stats.n_runs() as u64, ..Summary::exact(p95) });
        table.push(keys, "censored_frac", Summary::of(&censored));
    }
    only_table(table)
}

/// Outcome of one bound-ratio cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRatioCell {
    pub t_eta: Result<u64>,
    pub validity_floor: f64,
    pub hits: HittingTimeStats,
    /// Per run: still outside eta-parity at `t = T_eta`.
    pub failed_at_bound: Vec<bool>,
}

impl BoundRatioCell {
    /// `T_eta` over the empirical 95th-percentile time to parity.
    pub fn ratio(&self) -> Option<f64> {
        let t = *self.t_eta.as_ref().ok()?;
        let p95 = self.hits.percentile(95.0)?;
        Some(t as f64 / p95 as f64)
    }

    pub fn fail_fraction(&self) -> f64 {
        let n = self.failed_at_bound.len();
        self.failed_at_bound.iter().filter(|&&f| f).count() as f64 / n.max(1) as f64
    }
}

/// Start at `(1/2 + delta0/2, 1/2 - delta0/2)`, compute `T_eta`, and simulate each run
/// until both `T_eta` is reached and parity is hit (or the horizon ends).
pub fn bound_ratio_cell(spec: &ExperimentSpec, cell: &Cell) -> Result<BoundRatioCell> {
    let params = model_params(cell)?;
    let delta0 = get(cell, "delta0", 0.8);
    let eta = get(cell, "eta", 0.05);
    let input = ParityBoundInput {
        delta0,
        eta,
        omega: get(cell, "omega", 0.05),
        params,
    };
    let validity_floor = input.validity_floor()?;
    let t_eta = time_to_parity_bound(&input);
    let target = match &t_eta {
        Ok(t) => *t,
        Err(Error::BoundInvalid(_)) => {
            return Ok(BoundRatioCell {
                t_eta,
                validity_floor,
                hits: HittingTimeStats::new(Vec::new(), spec.horizon),
                failed_at_bound: Vec::new(),
            })
        }
        Err(e) => return Err(e.clone()),
    };
    let config = sim_config(spec, cell, (0.5 + delta0 / 2.0, 0.5 - delta0 / 2.0))?;
    let runs = par_runs(spec.n_runs, |i| {
        let mut hit = None;
        let mut failed = true;
        simulate_run(&config, i, |s| {
            let d = s.state.delta().abs();
            if hit.is_none() && d <= eta {
                hit = Some(s.t);
            }
            if s.t == target {
                failed = d > eta;
            }
            if hit.is_some() && s.t >= target {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })?;
        Ok((hit, failed))
    })?;
    let (times, failed_at_bound) = runs.into_iter().unzip();
    Ok(BoundRatioCell {
        t_eta,
        validity_floor,
        hits: HittingTimeStats::new(times, spec.horizon),
        failed_at_bound,
    })
}

/// Stats `t_eta`, `emp_p95`, `emp_mean`, `ratio`, `fail_frac`, `validity_floor`; cells whose
/// bound does not exist get `bound_invalid = 1` and `validity_floor` only.
pub fn exp_thm3_ratio(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let mut table = table_for(spec, &[]);
    for cell in spec.cells() {
        let res = bound_ratio_cell(spec, &cell)?;
        let keys = spec.cell_keys(&cell);
        table.push(keys.clone(), "validity_floor", Summary::exact(res.validity_floor));
        let Ok(t_eta) = res.t_eta else {
            table.push(keys, "bound_invalid", Summary::exact(1.0));
            continue;
        };
        let n = res.hits.n_runs() as u64;
        let observed: Vec<f64> = res.hits.times.iter().flatten().map(|&t| t as f64).collect();
        let p95 = res.hits.percentile(95.0).map_or(f64::INFINITY, |t| t as f64);
        let fails: Vec<f64> = res.failed_at_bound.iter().map(|&f| indicator(f)).collect();
        table.push(keys.clone(), "t_eta", Summary::exact(t_eta as f64));
        table.push(keys.clone(), "emp_p95", Summary { n, ..Summary::exact(p95) });
        table.push(keys.clone(), "emp_mean", Summary::of(&observed));
        let ratio = res.ratio().unwrap_or(f64::NAN);
        table.push(keys.clone(), "ratio", Summary { n, ..Summary::exact(ratio) });
        table.push(keys, "fail_frac", Summary::of(&fails));
    }
    only_table(table)
}

/// Mean-field AA equilibria of a cell from an under-subscribed start `(0.505 alpha, 0.495 alpha)`
/// and an over-subscribed start `(0.5005, 0.4995)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumPair {
    pub under: (f64, f64),
    pub over: (f64, f64),
    pub under_regime: Regime,
    pub converged: bool,
}

pub fn aa_equilibria(params: &ModelParams) -> EquilibriumPair {
    let a = params.alpha();
    let starts = [
        GroupState::new(0.505 * a, 0.495 * a).expect("valid start"),
        GroupState::new(0.5005, 0.4995).expect("valid start"),
    ];
    let [u, o] = starts.map(|s| iterate(MapKind::Aa, &s, params, MEANFIELD_TOLERANCE, MEANFIELD_MAX_ITER));
    EquilibriumPair {
        under: (u.last().x_a, u.last().x_b),
        over: (o.last().x_a, o.last().x_b),
        under_regime: u.last().regime,
        converged: u.converged && o.converged,
    }
}

/// Stats `delta_under`, `delta_over`, `x_a_under`, `x_b_under`, `converged`, `eps_tilde`,
/// `closed_form` (at or above the threshold), and `bound` (`q = 0` only).
pub fn exp_delta_vs_epsilon(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let mut table = table_for(spec, &[]);
    for cell in spec.cells() {
        let params = model_params(&cell)?;
        let eq = aa_equilibria(&params);
        let keys = spec.cell_keys(&cell);
        let exact = |v: f64| Summary::exact(v);
        table.push(keys.clone(), "delta_under", exact(eq.under.0 - eq.under.1));
        table.push(keys.clone(), "delta_over", exact(eq.over.0 - eq.over.1));
        table.push(keys.clone(), "x_a_under", exact(eq.under.0));
        table.push(keys.clone(), "x_b_under", exact(eq.under.1));
        table.push(keys.clone(), "converged", exact(indicator(eq.converged)));
        table.push(
            keys.clone(),
            "over_subscribed",
            exact(indicator(eq.under_regime == Regime::OverSubscribed)),
        );
        table.push(keys.clone(), "eps_tilde", exact(epsilon_threshold(params.alpha(), params.p())?));
        let closed = if at_or_above_threshold(&params) {
            aa_equilibrium_separation_qpos(&params)?
        } else {
            f64::NAN
        };
        table.push(keys.clone(), "closed_form", exact(closed));
        if params.q() == 0.0 {
            table.push(keys, "bound", exact(aa_separation_lower_bound(&params)));
        }
    }
    only_table(table)
}

/// Per run: long-run mean of `|Delta|` and of the leading group's share of high types,
/// over the final `window_frac` of the horizon.
pub fn long_run_separation(spec: &ExperimentSpec, cell: &Cell) -> Result<Vec<(f64, f64)>> {
    let window_frac = get(cell, "window_frac", 0.25);
    if !(window_frac > 0.0 && window_frac <= 1.0) {
        return Err(Error::Config(format!("`window_frac` must lie in (0, 1], got {window_frac}")));
    }
    let config = sim_config(spec, cell, (0.2, 0.2))?;
    let start = ((1.0 - window_frac) * spec.horizon as f64).ceil() as u64;
    par_runs(spec.n_runs, |i| {
        let (mut sep, mut share, mut count) = (0.0, 0.0, 0.0);
        simulate_run(&config, i, |s| {
            if s.t >= start {
                let (a, b) = (s.state.x_a(), s.state.x_b());
                sep += (a - b).abs();
                share += if a + b > 0.0 { a.max(b) / (a + b) } else { 0.5 };
                count += 1.0;
            }
            ControlFlow::Continue(())
        })?;
        Ok((sep / count, share / count))
    })
}

/// Stats `abs_delta`, `abs_delta_median` and `leading_share`.
pub fn exp_aa_heatmap(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let mut table = table_for(spec, &[]);
    for cell in spec.cells() {
        let runs = long_run_separation(spec, &cell)?;
        let seps: Vec<f64> = runs.iter().map(|r| r.0).collect();
        let shares: Vec<f64> = runs.iter().map(|r| r.1).collect();
        let keys = spec.cell_keys(&cell);
        table.push(keys.clone(), "abs_delta", Summary::of(&seps));
        table.push(
            keys.clone(),
            "abs_delta_median",
            Summary { n: seps.len() as u64, ..Summary::exact(median(&seps)) },
        );
        table.push(keys, "leading_share", Summary::of(&shares));
    }
    only_table(table)
}

/// Per-run leading-group admit share averaged over the last `window` generations (default 30).
pub fn rich_tail_shares(spec: &ExperimentSpec, cell: &Cell) -> Result<Vec<f64>> {
    let params = rich_params(spec, cell)?;
    let window = whole(get(cell, "window", 30.0), "window")? as usize;
    par_runs(spec.n_runs, |i| Ok(run_rich(&params, i)?.tail_share(window)))
}

/// Stats `leading_share` and `frac_above_0.7` (runs whose tail share exceeds 0.7).
pub fn exp_rich_heatmap(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let mut table = table_for(spec, &[]);
    for cell in spec.cells() {
        let shares = rich_tail_shares(spec, &cell)?;
        let above: Vec<f64> = shares.iter().map(|&s| indicator(s > 0.7)).collect();
        let keys = spec.cell_keys(&cell);
        table.push(keys.clone(), "leading_share", Summary::of(&shares));
        table.push(keys, "frac_above_0.7", Summary::of(&above));
    }
    only_table(table)
}

/// Per-generation group means, sds and admit shares averaged over runs; ability snapshots
/// of run 0 at the `snapN` generations.
pub fn exp_rich_snapshots(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let mut table = table_for(spec, &["generation"]);
    let mut snapshots = Vec::new();
    for cell in spec.cells() {
        let params = rich_params(spec, &cell)?;
        let runs = par_runs(spec.n_runs, |i| run_rich(&params, i))?;
        let keys = spec.cell_keys(&cell);
        for g in 0..spec.horizon as usize {
            let mut k = keys.clone();
            k.push(g as f64);
            let col = |f: &dyn Fn(&crate::richmodel::RichMetrics) -> f64| {
                Summary::of(&runs.iter().map(|r| f(&r.metrics[g])).collect::<Vec<_>>())
            };
            table.push(k.clone(), "leading_share", col(&|m| m.leading_share));
            table.push(k.clone(), "share_a", col(&|m| m.shares()[0]));
            table.push(k.clone(), "mean_a", col(&|m| m.mean[0]));
            table.push(k.clone(), "mean_b", col(&|m| m.mean[1]));
            table.push(k.clone(), "sd_a", col(&|m| m.sd[0]));
            table.push(k, "sd_b", col(&|m| m.sd[1]));
        }
        snapshots.push(runs.into_iter().next().map(|r| r.snapshots).unwrap_or_default());
    }
    Ok(ExperimentOutput { table, snapshots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::presets::preset;

    fn small(mut spec: ExperimentSpec, runs: u64, horizon: u64) -> ExperimentSpec {
        spec.n_runs = runs;
        spec.horizon = horizon;
        spec
    }

    #[test]
    fn cell_parsing() {
        let mut cell = Cell::new();
        cell.insert("population".into(), 10.0);
        assert_eq!(n_per_group(&cell).unwrap(), 5);
        cell.insert("population".into(), 11.0);
        assert!(n_per_group(&cell).is_err());
        cell.insert("n".into(), 10.0);
        assert!(n_per_group(&cell).is_err());
        assert_eq!(n_per_group(&Cell::new()).unwrap(), 1000);
        assert_eq!(map_kind(&Cell::new()).unwrap(), MapKind::Ea);
        let aa: Cell = [("eps".to_string(), 0.1)].into();
        assert_eq!(map_kind(&aa).unwrap(), MapKind::Aa);
        assert!(map_kind(&[("model".to_string(), 2.0)].into()).is_err());
    }

    #[test]
    fn grid_completeness_and_determinism() {
        let spec = small(preset("desk-fig2").unwrap(), 4, 20);
        let a = run_experiment(&spec).unwrap();
        assert_eq!(a.table.records.len(), 5 * 2);
        assert_eq!(a.table.key_names, vec!["alpha", "population"]);
        let b = run_experiment(&spec).unwrap();
        assert_eq!(a.table.to_csv_string(), b.table.to_csv_string());
    }

    #[test]
    fn stderr_shrinks_with_runs() {
        let mut spec = small(preset("desk-fig2").unwrap(), 50, 30);
        spec.grids[0].insert("population".into(), vec![40.0]);
        let se = |runs| {
            let s = small(spec.clone(), runs, 30);
            run_experiment(&s).unwrap().table.find("max_abs_delta", &[]).unwrap().stderr
        };
        let ratio = se(50) / se(200);
        assert!(ratio > 1.4 && ratio < 2.8, "ratio {ratio}");
    }

    #[test]
    fn trajectories_table_shape() {
        let spec = small(preset("fig1").unwrap(), 2, 5);
        let out = run_experiment(&spec).unwrap();
        assert_eq!(out.table.records.len(), 2 * 6 * 6);
        let share = out.table.find("share_a", &[("x_b0", 0.7), ("t", 0.0)]).unwrap();
        assert!((share.mean - 0.125).abs() < 1e-12);
    }

    #[test]
    fn delta_vs_epsilon_examples() {
        let mut spec = preset("fig4").unwrap();
        spec.grids[0].insert("eps".into(), vec![0.05, 0.2]);
        let t = run_experiment(&spec).unwrap().table;
        let over = t.find("delta_under", &[("eps", 0.2)]).unwrap().mean;
        assert!((over - 0.62).abs() < 1e-10);
        assert!((t.find("bound", &[("eps", 0.2)]).unwrap().mean - 0.62).abs() < 1e-12);
        let under = t.find("delta_under", &[("eps", 0.05)]).unwrap().mean;
        let under_o = t.find("delta_over", &[("eps", 0.05)]).unwrap().mean;
        assert!((under - under_o).abs() < 1e-8);
        assert!(t.find("closed_form", &[("eps", 0.05)]).unwrap().mean.is_nan());
    }

    #[test]
    fn parity_start_at_parity() {
        let mut spec = small(preset("desk-fig6").unwrap(), 3, 50);
        spec.fixed.insert("x_a0".into(), 0.3);
        spec.fixed.insert("x_b0".into(), 0.3);
        let t = run_experiment(&spec).unwrap().table;
        assert!(t.stat("hit_time").all(|r| r.mean == 0.0));
    }

    #[test]
    fn bound_invalid_cells_are_marked() {
        let mut spec = small(preset("desk-fig9").unwrap(), 2, 1000);
        spec.fixed.insert("n".into(), 100.0);
        let t = run_experiment(&spec).unwrap().table;
        assert_eq!(t.stat("bound_invalid").count(), 4);
        assert_eq!(t.stat("validity_floor").count(), 4);
    }

    #[test]
    fn rich_snapshots_output() {
        let mut spec = preset("fig5-snapshots").unwrap();
        spec.horizon = 12;
        spec.fixed.insert("snap3".into(), 11.0);
        let out = run_experiment(&spec).unwrap();
        assert_eq!(out.snapshots.len(), 2);
        let gens: Vec<u64> = out.snapshots[0].iter().map(|s| s.generation).collect();
        assert_eq!(gens, vec![1, 10, 11]);
        let dir = tempfile::tempdir().unwrap();
        let paths = out.write_to_dir(dir.path()).unwrap();
        assert_eq!(paths.len(), 3);
    }
}
