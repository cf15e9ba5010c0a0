//! Named experiment presets. `figN` presets use full-scale grids and run counts; `desk-*`
//! presets are reduced versions that finish in seconds to minutes.

use std::collections::BTreeMap;

use super::{ExperimentKind, ExperimentSpec};

fn range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    // rounding to 1e-9 keeps grid values such as 0.15 exact in the output
    (0..=n).map(|k| ((start + k as f64 * step) * 1e9).round() / 1e9).collect()
}

fn grid(entries: &[(&str, Vec<f64>)]) -> BTreeMap<String, Vec<f64>> {
    entries.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn fixed(entries: &[(&str, f64)]) -> BTreeMap<String, f64> {
    entries.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn spec(
    id: &str,
    kind: ExperimentKind,
    grids: Vec<BTreeMap<String, Vec<f64>>>,
    fixed: BTreeMap<String, f64>,
    n_runs: u64,
    horizon: u64,
) -> ExperimentSpec {
    ExperimentSpec {
        id: id.to_string(),
        kind,
        grids,
        fixed,
        n_runs,
        horizon,
        master_seed: 20_240_601,
        output: None,
    }
}

const PARITY_CAP: u64 = 100_000;

fn fig1(id: &str, n_runs: u64) -> ExperimentSpec {
    spec(
        id,
        ExperimentKind::Trajectories,
        vec![
            grid(&[("x_a0", vec![0.1]), ("x_b0", vec![0.7])]),
            grid(&[("x_a0", vec![0.1]), ("x_b0", vec![0.4])]),
        ],
        fixed(&[("alpha", 0.3), ("p", 0.9), ("q", 0.4), ("n", 2000.0), ("model", 0.0)]),
        n_runs,
        400,
    )
}

fn fig2(id: &str, alphas: Vec<f64>, populations: Vec<f64>) -> ExperimentSpec {
    spec(
        id,
        ExperimentKind::MaxSeparation,
        vec![grid(&[("alpha", alphas), ("population", populations)])],
        fixed(&[("p", 0.9), ("q", 0.4)]),
        100,
        100,
    )
}

fn fig3(id: &str, n_runs: u64) -> ExperimentSpec {
    spec(
        id,
        ExperimentKind::Trajectories,
        vec![grid(&[("eps", vec![0.0, 0.03])])],
        fixed(&[
            ("alpha", 0.3),
            ("p", 0.9),
            ("q", 0.4),
            ("n", 1000.0),
            ("x_a0", 0.2),
            ("x_b0", 0.2),
            ("model", 1.0),
        ]),
        n_runs,
        500,
    )
}

fn delta_vs_eps(id: &str, qs: Vec<f64>, eps: Vec<f64>) -> ExperimentSpec {
    spec(
        id,
        ExperimentKind::DeltaVsEpsilon,
        vec![grid(&[("q", qs), ("eps", eps)])],
        fixed(&[("alpha", 0.3), ("p", 0.9)]),
        1,
        1,
    )
}

fn rich_heatmap(id: &str, alphas: Vec<f64>, mu_eps: Vec<f64>, n_runs: u64, horizon: u64) -> ExperimentSpec {
    spec(
        id,
        ExperimentKind::RichHeatmap,
        vec![grid(&[("alpha", alphas), ("mu_eps", mu_eps)])],
        fixed(&[("n", 500.0), ("window", 30.0)]),
        n_runs,
        horizon,
    )
}

fn rich_snapshots(id: &str) -> ExperimentSpec {
    spec(
        id,
        ExperimentKind::RichSnapshots,
        vec![
            grid(&[("mu_eps", vec![0.0]), ("sigma_eps", vec![0.0])]),
            grid(&[("mu_eps", vec![0.2]), ("sigma_eps", vec![0.1])]),
        ],
        fixed(&[
            ("alpha", 0.3),
            ("n", 500.0),
            ("snap0", 1.0),
            ("snap1", 10.0),
            ("snap2", 20.0),
            ("snap3", 99.0),
        ]),
        1,
        100,
    )
}

fn parity_sweeps(id: &str, p_grid: Vec<f64>, q_grid: Vec<f64>, n_runs: u64) -> ExperimentSpec {
    spec(
        id,
        ExperimentKind::TimeToParity,
        vec![
            grid(&[("p", p_grid), ("q", vec![0.4])]),
            grid(&[("p", vec![0.95]), ("q", q_grid)]),
        ],
        fixed(&[("alpha", 0.3), ("n", 2000.0), ("eta", 0.01), ("x_a0", 0.9), ("x_b0", 0.1)]),
        n_runs,
        PARITY_CAP,
    )
}

fn parity_heatmap(id: &str, alphas: Vec<f64>, ps: Vec<f64>, qs: Vec<f64>, n_runs: u64) -> ExperimentSpec {
    let starts = [(0.9, 0.1), (0.6, 0.2)];
    let grids = starts
        .iter()
        .map(|&(a, b)| {
            grid(&[
                ("alpha", alphas.clone()),
                ("p", ps.clone()),
                ("q", qs.clone()),
                ("x_a0", vec![a]),
                ("x_b0", vec![b]),
            ])
        })
        .collect();
    spec(
        id,
        ExperimentKind::TimeToParity,
        grids,
        fixed(&[("n", 2000.0), ("eta", 0.01)]),
        n_runs,
        PARITY_CAP,
    )
}

fn thm3(id: &str, alphas: Vec<f64>, ps: Vec<f64>, n_runs: u64) -> ExperimentSpec {
    spec(
        id,
        ExperimentKind::Thm3Ratio,
        vec![grid(&[("alpha", alphas), ("p", ps)])],
        fixed(&[("q", 0.4), ("n", 65_000.0), ("delta0", 0.8), ("eta", 0.05), ("omega", 0.05)]),
        n_runs,
        PARITY_CAP,
    )
}

fn aa_heatmap(id: &str, alphas: Vec<f64>, eps: Vec<f64>, n_runs: u64) -> ExperimentSpec {
    spec(
        id,
        ExperimentKind::AaHeatmap,
        vec![grid(&[("alpha", alphas), ("eps", eps)])],
        fixed(&[
            ("p", 0.9),
            ("q", 0.4),
            ("n", 1000.0),
            ("x_a0", 0.2),
            ("x_b0", 0.2),
            ("model", 1.0),
        ]),
        n_runs,
        500,
    )
}

/// Preset names in listing order.
pub const PRESET_NAMES: &[&str] = &[
    "fig1",
    "fig2",
    "fig3",
    "fig4",
    "fig5",
    "fig5-snapshots",
    "fig6",
    "fig7",
    "fig8",
    "fig9",
    "fig10",
    "fig11",
    "desk-fig1",
    "desk-fig2",
    "desk-fig3",
    "desk-fig5",
    "desk-fig6",
    "desk-fig7",
    "desk-fig9",
    "desk-fig11",
];

/// One-line description of a preset.
pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1" => "EA trajectories from an over- and an under-subscribed start",
        "fig2" => "mean maximum separation versus total population size",
        "fig3" => "EA versus AA (eps = 0.03) trajectories from a symmetric start",
        "fig4" => "mean-field equilibrium separation and its lower bound versus eps (q = 0)",
        "fig5" => "rich-model leading-group admit share over (alpha, mu_eps)",
        "fig5-snapshots" => "rich-model ability snapshots without and with affinity advantage",
        "fig6" => "time to parity versus p (q = 0.4) and versus q (p = 0.95)",
        "fig7" => "time to parity over (alpha, p, q) for two starting points",
        "fig8" => "mean-field equilibrium separation versus eps for q in {0, 0.2, 0.4}",
        "fig9" => "parity bound versus empirical 95th-percentile time to parity",
        "fig10" => "fig8 sweep on a wider eps range (both starting regimes)",
        "fig11" => "stochastic AA long-run separation and leading share over (alpha, eps)",
        "desk-fig1" => "fig1 with 20 runs",
        "desk-fig2" => "fig2 at alpha = 0.1 on five population sizes",
        "desk-fig3" => "fig3 with 50 runs",
        "desk-fig5" => "fig5 on a 3x3 grid, 200 generations, 30 runs",
        "desk-fig6" => "fig6 endpoints with 50 runs",
        "desk-fig7" => "fig7 on a 2x2x2 grid with 20 runs",
        "desk-fig9" => "fig9 on alpha {0.2, 0.3} x p {0.8, 0.9} with 20 runs",
        "desk-fig11" => "fig11 at alpha = 0.3, eps in {0, 0.03}, 50 runs",
        _ => return None,
    })
}

pub fn preset(name: &str) -> Option<ExperimentSpec> {
    Some(match name {
        "fig1" => fig1(name, 1),
        "fig2" => fig2(
            name,
            vec![0.1, 0.2, 0.3, 0.4, 0.45],
            vec![
                10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0, 200.0, 500.0, 1000.0, 2000.0, 5000.0,
            ],
        ),
        "fig3" => fig3(name, 1),
        "fig4" => delta_vs_eps(name, vec![0.0], range(0.005, 0.4, 0.005)),
        "fig5" => rich_heatmap(
            name,
            vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.45],
            vec![0.0, 0.02, 0.04, 0.06, 0.1, 0.14, 0.18, 0.24, 0.3],
            100,
            500,
        ),
        "fig5-snapshots" => rich_snapshots(name),
        "fig6" => parity_sweeps(name, range(0.7, 0.96, 0.02), range(0.0, 0.5, 0.1), 100),
        "fig7" => parity_heatmap(
            name,
            vec![0.1, 0.2, 0.3, 0.4],
            vec![0.7, 0.8, 0.9],
            vec![0.0, 0.2, 0.4],
            100,
        ),
        "fig8" => delta_vs_eps(name, vec![0.0, 0.2, 0.4], range(0.005, 0.4, 0.005)),
        "fig9" => thm3(name, vec![0.1, 0.2, 0.3, 0.4], vec![0.6, 0.7, 0.8, 0.9], 100),
        "fig10" => delta_vs_eps(name, vec![0.0, 0.2, 0.4], range(0.01, 0.6, 0.01)),
        "fig11" => aa_heatmap(
            name,
            range(0.05, 0.45, 0.05),
            vec![0.0, 0.01, 0.02, 0.03, 0.05, 0.075, 0.1, 0.15, 0.2],
            100,
        ),
        "desk-fig1" => fig1(name, 20),
        "desk-fig2" => fig2(name, vec![0.1], vec![10.0, 20.0, 50.0, 100.0, 500.0]),
        "desk-fig3" => fig3(name, 50),
        "desk-fig5" => rich_heatmap(name, vec![0.1, 0.3, 0.45], vec![0.0, 0.06, 0.24], 30, 200),
        "desk-fig6" => parity_sweeps(name, vec![0.7, 0.96], vec![0.0, 0.2, 0.4], 50),
        "desk-fig7" => parity_heatmap(name, vec![0.2, 0.3], vec![0.8, 0.9], vec![0.0, 0.4], 20),
        "desk-fig9" => thm3(name, vec![0.2, 0.3], vec![0.8, 0.9], 20),
        "desk-fig11" => aa_heatmap(name, vec![0.3], vec![0.0, 0.03], 50),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_valid_and_described() {
        for name in PRESET_NAMES {
            let s = preset(name).unwrap_or_else(|| panic!("{name}"));
            s.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(s.id, *name);
            assert!(describe(name).is_some());
        }
        for k in 1..=11 {
            assert!(preset(&format!("fig{k}")).is_some());
        }
        assert!(preset("fig12").is_none());
    }

    #[test]
    fn ranges_are_exact() {
        assert_eq!(range(0.7, 0.96, 0.02).len(), 14);
        assert!(range(0.005, 0.4, 0.005).contains(&0.15));
        assert_eq!(*range(0.05, 0.45, 0.05).last().unwrap(), 0.45);
    }
}
