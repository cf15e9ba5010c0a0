//! Experiment specifications, presets, runners and CSV persistence.
//!
//! An experiment is a [`ExperimentKind`] evaluated on every cell of a parameter grid. Grids
//! are lists of Cartesian products (their union is evaluated), merged over a set of fixed
//! parameters. Specs come from [`presets`] or from a TOML config file:
//!
//! ```toml
//! kind = "max_separation"   # optional when overriding a preset
//! n_runs = 100
//! horizon = 100
//! master_seed = 7
//! output = "results/fig2.csv"
//!
//! [fixed]
//! p = 0.9
//! q = 0.4
//!
//! [[grid]]
//! alpha = [0.1, 0.3]
//! population = [10, 20, 50, 100]
//! ```
//!
//! Every key is numeric. The keys each kind understands are listed in [`ExperimentKind::keys`].

pub mod presets;
pub mod runners;
pub mod table;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::richmodel::AbilitySnapshot;

pub use runners::run_experiment;
pub use table::{read_results, write_results, write_trajectory_csv, Record, ResultTable, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Per-generation fractions, separation and admit shares of individual runs.
    Trajectories,
    /// Mean of `max_t |Delta(t)|` and its ratio to `2 alpha`.
    MaxSeparation,
    /// Empirical time to eta-parity.
    TimeToParity,
    /// Parity bound against the empirical 95th-percentile time to parity.
    Thm3Ratio,
    /// Mean-field equilibrium separation against the affinity advantage.
    DeltaVsEpsilon,
    /// Long-run separation and leading share of the stochastic affinity model.
    AaHeatmap,
    /// Leading-group admit share of the rich model.
    RichHeatmap,
    /// Per-generation rich-model metrics plus ability snapshots.
    RichSnapshots,
}

const STYLIZED_KEYS: &[&str] = &["alpha", "p", "q", "eps", "n", "population", "model", "x_a0", "x_b0"];
const RICH_KEYS: &[&str] = &[
    "alpha", "mu_eps", "sigma_eps", "n", "theta", "mu_i", "sigma_i", "sigma_lambda", "scale", "window",
];

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::Trajectories,
        ExperimentKind::MaxSeparation,
        ExperimentKind::TimeToParity,
        ExperimentKind::Thm3Ratio,
        ExperimentKind::DeltaVsEpsilon,
        ExperimentKind::AaHeatmap,
        ExperimentKind::RichHeatmap,
        ExperimentKind::RichSnapshots,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Trajectories => "trajectories",
            ExperimentKind::MaxSeparation => "max_separation",
            ExperimentKind::TimeToParity => "time_to_parity",
            ExperimentKind::Thm3Ratio => "thm3_ratio",
            ExperimentKind::DeltaVsEpsilon => "delta_vs_epsilon",
            ExperimentKind::AaHeatmap => "aa_heatmap",
            ExperimentKind::RichHeatmap => "rich_heatmap",
            ExperimentKind::RichSnapshots => "rich_snapshots",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == name)
    }

    /// Parameter keys accepted in `fixed` and grids.
    ///
    /// Stylized-model keys: `alpha`, `p`, `q`, `eps`, `n` (per group), `population`
    /// (both groups, `n = population / 2`), `model` (0 = EA, 1 = AA; default AA iff
    /// `eps > 0`), `x_a0`, `x_b0`. Time to parity adds `eta`; the bound ratio adds
    /// `delta0`, `eta`, `omega`. Rich-model keys: `alpha`, `mu_eps`, `sigma_eps`
    /// (default `mu_eps / 2`), `n` (per group), `theta`, `mu_i`, `sigma_i`,
    /// `sigma_lambda`, `scale` (0 = standardized, 1 = raw), `window`; snapshots add
    /// `snap0`..`snap9` (generations to record).
    pub fn keys(self) -> Vec<&'static str> {
        let mut keys = match self {
            ExperimentKind::RichHeatmap | ExperimentKind::RichSnapshots => RICH_KEYS.to_vec(),
            _ => STYLIZED_KEYS.to_vec(),
        };
        match self {
            ExperimentKind::TimeToParity => keys.push("eta"),
            ExperimentKind::Thm3Ratio => keys.extend(["delta0", "eta", "omega"]),
            ExperimentKind::AaHeatmap => keys.push("window_frac"),
            ExperimentKind::RichSnapshots => keys.extend(SNAPSHOT_KEYS),
            _ => {}
        }
        keys
    }
}

pub(crate) const SNAPSHOT_KEYS: [&str; 10] = [
    "snap0", "snap1", "snap2", "snap3", "snap4", "snap5", "snap6", "snap7", "snap8", "snap9",
];

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub type Cell = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub id: String,
    pub kind: ExperimentKind,
    /// The evaluated cells are the union of the Cartesian products of these grids.
    pub grids: Vec<BTreeMap<String, Vec<f64>>>,
    pub fixed: BTreeMap<String, f64>,
    pub n_runs: u64,
    pub horizon: u64,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
}

impl ExperimentSpec {
    /// Swept key names in output order: first appearance across grids, each grid's keys sorted.
    pub fn key_names(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for g in &self.grids {
            for k in g.keys() {
                if !names.contains(k) {
                    names.push(k.clone());
                }
            }
        }
        names
    }

    pub fn validate(&self) -> Result<()> {
        if self.grids.is_empty() || self.grids.iter().any(|g| g.values().any(|v| v.is_empty())) {
            return Err(Error::Config(format!("{}: the parameter grid is empty", self.id)));
        }
        if self.n_runs < 1 {
            return Err(Error::Config(format!("{}: n_runs must be at least 1", self.id)));
        }
        if self.horizon < 1 {
            return Err(Error::Config(format!("{}: horizon must be at least 1", self.id)));
        }
        let allowed = self.kind.keys();
        let names = self.key_names();
        for key in names.iter().chain(self.fixed.keys()) {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "{}: key `{key}` is not used by {} experiments (allowed: {})",
                    self.id,
                    self.kind,
                    allowed.join(", ")
                )));
            }
        }
        for g in &self.grids {
            if g.len() != names.len() {
                return Err(Error::Config(format!(
                    "{}: every grid must sweep the same keys ({})",
                    self.id,
                    names.join(", ")
                )));
            }
        }
        Ok(())
    }

    /// All cells in grid order, each merged over `fixed`.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for grid in &self.grids {
            let mut partial: Vec<Cell> = vec![self.fixed.clone()];
            for (key, values) in grid {
                partial = partial
                    .into_iter()
                    .flat_map(|cell| {
                        values.iter().map(move |&v| {
                            let mut c = cell.clone();
                            c.insert(key.clone(), v);
                            c
                        })
                    })
                    .collect();
            }
            cells.extend(partial);
        }
        cells
    }

    /// Values of the swept keys of `cell`, in [`Self::key_names`] order.
    pub fn cell_keys(&self, cell: &Cell) -> Vec<f64> {
        self.key_names().iter().map(|k| cell[k]).collect()
    }

    /// Apply a TOML config on top of this spec. Grids in the config replace the spec's;
    /// fixed values are merged.
    pub fn apply_config(mut self, config: &ConfigFile) -> Result<Self> {
        if let Some(kind) = &config.kind {
            self.kind = ExperimentKind::parse(kind)
                .ok_or_else(|| Error::Config(format!("unknown experiment kind `{kind}`")))?;
        }
        if let Some(n) = config.n_runs {
            self.n_runs = n;
        }
        if let Some(h) = config.horizon {
            self.horizon = h;
        }
        if let Some(s) = config.master_seed {
            self.master_seed = s;
        }
        if let Some(o) = &config.output {
            self.output = Some(PathBuf::from(o));
        }
        if let Some(fixed) = &config.fixed {
            self.fixed.extend(fixed.clone());
        }
        if let Some(grid) = &config.grid {
            self.grids = grid.clone();
        }
        Ok(self)
    }

    /// Build a spec from a config alone; `kind` and `grid` are then required.
    pub fn from_config(id: &str, config: &ConfigFile) -> Result<Self> {
        let kind = config
            .kind
            .as_deref()
            .ok_or_else(|| Error::Config("config needs `kind` when not overriding a preset".into()))?;
        let kind = ExperimentKind::parse(kind)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind `{kind}`")))?;
        let base = ExperimentSpec {
            id: id.to_string(),
            kind,
            grids: Vec::new(),
            fixed: BTreeMap::new(),
            n_runs: 1,
            horizon: 100,
            master_seed: 0,
            output: None,
        };
        let spec = base.apply_config(config)?;
        spec.validate()?;
        Ok(spec)
    }
}

/// TOML experiment config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub kind: Option<String>,
    pub n_runs: Option<u64>,
    pub horizon: Option<u64>,
    pub master_seed: Option<u64>,
    pub output: Option<String>,
    pub fixed: Option<BTreeMap<String, f64>>,
    pub grid: Option<Vec<BTreeMap<String, Vec<f64>>>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

/// Resolve an experiment by preset name, optionally overridden by a config file. A name
/// that is not a preset is accepted when the config supplies `kind` and a grid.
pub fn resolve(name: &str, config: Option<&ConfigFile>) -> Result<ExperimentSpec> {
    let spec = match (presets::preset(name), config) {
        (Some(spec), Some(cfg)) => spec.apply_config(cfg)?,
        (Some(spec), None) => spec,
        (None, Some(cfg)) if cfg.kind.is_some() => ExperimentSpec::from_config(name, cfg)?,
        (None, _) => return Err(Error::UnknownExperiment(name.to_string())),
    };
    spec.validate()?;
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub table: ResultTable,
    /// Ability snapshots of run 0 for each cell, for rich-model snapshot experiments.
    pub snapshots: Vec<Vec<AbilitySnapshot>>,
}

impl ExperimentOutput {
    /// Write `<dir>/<id>.csv` plus `<dir>/<id>_snapshots_cell<k>.csv` files. Returns the paths written.
    pub fn write_to_dir(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        self.write_to(&dir.join(format!("{}.csv", self.table.experiment)))
    }

    /// Write the table to `path` and snapshots next to it as `<stem>_snapshots_cell<k>.csv`.
    pub fn write_to(&self, path: &Path) -> Result<Vec<PathBuf>> {
        write_results(&self.table, path)?;
        let mut written = vec![path.to_path_buf()];
        let stem = path.file_stem().map_or_else(|| self.table.experiment.clone(), |s| s.to_string_lossy().into_owned());
        for (k, snaps) in self.snapshots.iter().enumerate() {
            let snap_path = path.with_file_name(format!("{stem}_snapshots_cell{k}.csv"));
            let file = std::fs::File::create(&snap_path).map_err(|e| Error::io(&snap_path, e))?;
            crate::richmodel::write_snapshots_csv(std::io::BufWriter::new(file), snaps)?;
            written.push(snap_path);
        }
        Ok(written)
    }
}
