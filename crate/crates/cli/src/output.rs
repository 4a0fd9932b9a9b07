use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::Domain;
use crate::study::{LevelResult, StudyReport};
use crate::StudyError;

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn rate(prev: Option<f64>, cur: Option<f64>) -> Option<f64> {
    match (prev, cur) {
        (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some((a / b).log2()),
        _ => None,
    }
}

impl StudyReport {
    /// Row preceding `i` at the same degree, if any.
    fn previous(&self, i: usize) -> Option<&LevelResult> {
        let row = &self.rows[i];
        self.rows[..i].iter().rev().find(|r| r.p == row.p && r.level + 1 == row.level)
    }

    fn error(row: Option<&LevelResult>, k: usize) -> Option<f64> {
        row.and_then(|r| r.errors.get(k).copied().flatten())
    }

    pub fn csv(&self) -> String {
        let cluster = self.reference.as_ref().map_or(0, |r| r.values.len());
        let seq = |prefix: &str| (1..=cluster).map(|k| format!("{prefix}_{k}")).collect::<Vec<_>>();
        let mut header: Vec<String> = Vec::new();
        match self.config.domain {
            Domain::Square => {
                header.extend(["p", "level", "h"].map(String::from));
                header.extend(seq("lambda"));
                header.extend(seq("err"));
                header.extend(["hausdorff", "d_h", "noc_hausdorff"].map(String::from));
            }
            Domain::Lshape => {
                header.extend(["p", "level", "h"].map(String::from));
                header.extend(seq("lambda"));
                header.extend(seq("err"));
                header.extend(seq("noc"));
                header.extend(["hausdorff", "noc_hausdorff"].map(String::from));
            }
            Domain::DiscFiber => {
                header.extend(["level", "h_core"].map(String::from));
                header.extend(seq("e"));
                header.extend(seq("noc"));
            }
            Domain::ExternalMesh => header.extend(["p", "level", "h", "count", "lambdas"].map(String::from)),
        }
        header.extend(["iters", "seconds", "config_hash"].map(String::from));

        let mut out = header.join(",") + "\n";
        for (i, row) in self.rows.iter().enumerate() {
            let prev = self.previous(i);
            let mut f: Vec<String> = Vec::new();
            let lambdas = (0..cluster).map(|k| opt(row.values.get(k).copied()));
            let errs = (0..cluster).map(|k| opt(Self::error(Some(row), k)));
            let nocs = (0..cluster).map(|k| opt(rate(Self::error(prev, k), Self::error(Some(row), k))));
            let noc_hd = opt(rate(prev.and_then(|r| r.hausdorff), row.hausdorff));
            match self.config.domain {
                Domain::Square => {
                    f.extend([row.p.to_string(), row.level.to_string(), num(row.h)]);
                    f.extend(lambdas);
                    f.extend(errs);
                    f.extend([opt(row.hausdorff), opt(row.d_h), noc_hd]);
                }
                Domain::Lshape => {
                    f.extend([row.p.to_string(), row.level.to_string(), num(row.h)]);
                    f.extend(lambdas);
                    f.extend(errs);
                    f.extend(nocs);
                    f.extend([opt(row.hausdorff), noc_hd]);
                }
                Domain::DiscFiber => {
                    f.extend([row.level.to_string(), num(row.h)]);
                    f.extend(errs);
                    f.extend(nocs);
                }
                Domain::ExternalMesh => {
                    let values: Vec<String> = row.values.iter().map(|&v| num(v)).collect();
                    f.extend([row.p.to_string(), row.level.to_string(), num(row.h)]);
                    f.extend([row.values.len().to_string(), values.join(";")]);
                }
            }
            let seconds = if self.config.outputs.seconds_in_csv { num(row.seconds) } else { String::new() };
            f.extend([row.iterations.to_string(), seconds, self.config_hash.clone()]);
            out += &(f.join(",") + "\n");
        }
        out
    }

    /// Solver settings and per-run results; independent of timing and
    /// thread count.
    pub fn metadata(&self) -> Value {
        let f = &self.filter;
        json!({
            "package_version": env!("CARGO_PKG_VERSION"),
            "config_hash": self.config_hash,
            "config": self.config,
            "reference": self.reference.as_ref().map(|r| json!({
                "values": r.values,
                "source": format!("{:?}", r.source),
            })),
            "filter": {
                "axis": if self.config.negated_spectrum() { "negated" } else { "direct" },
                "y": f.y,
                "gamma": f.gamma,
                "n": f.n,
                "phi": f.phi,
                "weight_sum": f.weight_sum(),
                "nodes": f.nodes.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                "weights": f.weights.iter().map(|w| [w.re, w.im]).collect::<Vec<_>>(),
            },
            "runs": self.rows.iter().map(|r| json!({
                "p": r.p,
                "level": r.level,
                "h": r.h,
                "n_trial": r.n_trial,
                "n_condensed": r.n_condensed,
                "ritz_values": r.values,
                "iterations": r.iterations,
                "final_change": r.final_change,
                "changes": r.changes.iter().map(|c| if c.is_finite() { json!(c) } else { Value::Null }).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn timings(&self) -> Value {
        json!({
            "config_hash": self.config_hash,
            "runs": self.rows.iter().map(|r| json!({
                "p": r.p,
                "level": r.level,
                "seconds": r.seconds,
                "factor_seconds": r.factor_seconds,
            })).collect::<Vec<_>>(),
        })
    }

    /// Writes the CSV, the metadata and (if configured) the timings under
    /// `dir`; returns the written paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, StudyError> {
        fs::create_dir_all(dir).map_err(|e| StudyError::Io(format!("{}: {e}", dir.display())))?;
        let outputs = &self.config.outputs;
        let pretty = |v: &Value| serde_json::to_string_pretty(v).expect("json") + "\n";
        let mut files = vec![
            (dir.join(&outputs.csv), self.csv()),
            (dir.join(&outputs.metadata), pretty(&self.metadata())),
        ];
        if let Some(t) = &outputs.timings {
            files.push((dir.join(t), pretty(&self.timings())));
        }
        for (path, text) in &files {
            fs::write(path, text).map_err(|e| StudyError::Io(format!("{}: {e}", path.display())))?;
        }
        Ok(files.into_iter().map(|(p, _)| p).collect())
    }
}
