//! Long-format result tables and the trajectory CSV layout.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stochastic::Trajectory;

pub const SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    /// Values of the cell keys, in the order of [`ResultTable::key_names`].
    pub keys: Vec<f64>,
    pub stat: String,
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub experiment: String,
    pub key_names: Vec<String>,
    pub records: Vec<Record>,
    pub master_seed: u64,
}

/// Mean, standard error (`sd / sqrt n`, sample sd) and count of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len();
        if n == 0 {
            return Summary {
                mean: f64::NAN,
                stderr: f64::NAN,
                n: 0,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Summary {
            mean,
            stderr,
            n: n as u64,
        }
    }

    /// A single exact value.
    pub fn exact(value: f64) -> Summary {
        Summary {
            mean: value,
            stderr: 0.0,
            n: 1,
        }
    }
}

impl ResultTable {
    pub fn new(experiment: impl Into<String>, key_names: Vec<String>, master_seed: u64) -> Self {
        ResultTable {
            experiment: experiment.into(),
            key_names,
            records: Vec::new(),
            master_seed,
        }
    }

    pub fn push(&mut self, keys: Vec<f64>, stat: &str, summary: Summary) {
        debug_assert_eq!(keys.len(), self.key_names.len());
        self.records.push(Record {
            keys,
            stat: stat.to_string(),
            mean: summary.mean,
            stderr: summary.stderr,
            n: summary.n,
        });
    }

    /// Records of one statistic.
    pub fn stat<'a>(&'a self, stat: &'a str) -> impl Iterator<Item = &'a Record> + 'a {
        self.records.iter().filter(move |r| r.stat == stat)
    }

    pub fn key_index(&self, name: &str) -> Option<usize> {
        self.key_names.iter().position(|k| k == name)
    }

    /// The record of `stat` whose keys match every `(name, value)` pair given.
    pub fn find(&self, stat: &str, keys: &[(&str, f64)]) -> Option<&Record> {
        let idx: Vec<(usize, f64)> = keys
            .iter()
            .map(|(k, v)| self.key_index(k).map(|i| (i, *v)))
            .collect::<Option<_>>()?;
        self.records
            .iter()
            .filter(|r| r.stat == stat)
            .find(|r| idx.iter().all(|&(i, v)| (r.keys[i] - v).abs() <= 1e-12 * (1.0 + v.abs())))
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# schema_version={SCHEMA_VERSION}\n"));
        out.push_str(&format!("# experiment={}\n", self.experiment));
        out.push_str(&format!("# master_seed={}\n", self.master_seed));
        out.push_str(&format!("# artifact_version={ARTIFACT_VERSION}\n"));
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        let mut header = vec!["experiment".to_string()];
        header.extend(self.key_names.iter().cloned());
        header.extend(["stat_name", "mean", "stderr", "n_runs"].map(String::from));
        w.write_record(&header).expect("in-memory write");
        for r in &self.records {
            let mut row = vec![self.experiment.clone()];
            row.extend(r.keys.iter().map(|k| k.to_string()));
            row.push(r.stat.clone());
            row.push(r.mean.to_string());
            row.push(r.stderr.to_string());
            row.push(r.n.to_string());
            w.write_record(&row).expect("in-memory write");
        }
        let body = w.into_inner().expect("in-memory flush");
        out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::Config(format!("result table: {msg}"));
        let mut experiment = None;
        let mut master_seed = 0;
        let mut body = String::new();
        for line in text.lines() {
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((k, v)) = meta.trim().split_once('=') {
                    match k.trim() {
                        "experiment" => experiment = Some(v.trim().to_string()),
                        "master_seed" => {
                            master_seed = v.trim().parse().map_err(|e| bad(format!("master_seed: {e}")))?
                        }
                        "schema_version" => {
                            let version: u32 = v.trim().parse().map_err(|e| bad(format!("schema_version: {e}")))?;
                            if version != SCHEMA_VERSION {
                                return Err(bad(format!("unsupported schema version {version}")));
                            }
                        }
                        _ => {}
                    }
                }
            } else {
                body.push_str(line);
                body.push('\n');
            }
        }
        let mut reader = csv::ReaderBuilder::new().from_reader(body.as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| bad(e.to_string()))?
            .iter()
            .map(String::from)
            .collect();
        let n_cols = header.len();
        if n_cols < 5 || header[0] != "experiment" || header[n_cols - 4..] != ["stat_name", "mean", "stderr", "n_runs"] {
            return Err(bad(format!("unexpected header {header:?}")));
        }
        let key_names = header[1..n_cols - 4].to_vec();
        let mut table = ResultTable::new(experiment.clone().unwrap_or_default(), key_names, master_seed);
        for row in reader.records() {
            let row = row.map_err(|e| bad(e.to_string()))?;
            if table.experiment.is_empty() {
                table.experiment = row[0].to_string();
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
            let keys = (1..n_cols - 4).map(|i| num(&row[i])).collect::<Result<Vec<_>>>()?;
            table.records.push(Record {
                keys,
                stat: row[n_cols - 4].to_string(),
                mean: num(&row[n_cols - 3])?,
                stderr: num(&row[n_cols - 2])?,
                n: row[n_cols - 1].parse().map_err(|e| bad(format!("n_runs: {e}")))?,
            });
        }
        Ok(table)
    }
}

/// Write `table` to `path`, replacing any existing file and creating parent directories.
pub fn write_results(table: &ResultTable, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, table.to_csv_string()).map_err(|e| Error::io(path, e))
}

pub fn read_results(path: &Path) -> Result<ResultTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ResultTable::from_csv_str(&text)
}

/// Write one trajectory as CSV: `t,x_a,x_b,delta,regime,admits_a,admits_b`.
pub fn write_trajectory_csv<W: Write>(writer: W, trajectory: &Trajectory) -> Result<()> {
    let err = |e: csv::Error| Error::io("trajectory csv", e);
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["t", "x_a", "x_b", "delta", "regime", "admits_a", "admits_b"])
        .map_err(err)?;
    for s in &trajectory.steps {
        let admits = s.allocation.admits();
        w.write_record([
            s.t.to_string(),
            s.state.x_a().to_string(),
            s.state.x_b().to_string(),
            s.state.delta().to_string(),
            s.regime.as_str().to_string(),
            admits[0].to_string(),
            admits[1].to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io("trajectory csv", e))
}
