//! Deterministic parallel classification of many point files.
//!
//! Work fans out over a bounded rayon pool; every point draws from streams
//! keyed by its input index, and rows are emitted in input order, so a report
//! depends only on the master seed and the inputs.

use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io::load_point_data_with;
use crate::lawson_simons::OptimizerConfig;
use crate::rigidity::{classify_point, PointVerdict};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Markdown,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            "markdown" | "md" => Ok(Self::Markdown),
            other => Err(format!("unknown format {other:?} (json, csv, markdown)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: usize,
    pub tolerances: Tolerances,
    pub format: OutputFormat,
    /// Random optimizer starts per point.
    pub starts: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            workers: 1,
            tolerances: Tolerances::default(),
            format: OutputFormat::Json,
            starts: OptimizerConfig::default().starts,
        }
    }
}

impl RunConfig {
    pub fn optimizer(&self, stream: u64) -> OptimizerConfig {
        OptimizerConfig {
            starts: self.starts,
            seed: self.seed,
            stream,
            tolerances: self.tolerances,
            ..OptimizerConfig::default()
        }
    }

    /// Runs `f` inside a pool of `workers` threads.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> Result<R> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers.max(1))
            .build()
            .map_err(|e| Error::InternalInconsistency(format!("cannot start worker pool: {e}")))?;
        Ok(pool.install(f))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowOutcome {
    Verdict(PointVerdict),
    InputError(String),
    Failure(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchRow {
    pub index: usize,
    pub source: String,
    pub label: Option<String>,
    pub outcome: RowOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchReport {
    pub k: usize,
    pub config: RunConfig,
    pub rows: Vec<BatchRow>,
}

impl BatchReport {
    pub fn error_count(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| !matches!(r.outcome, RowOutcome::Verdict(_)))
            .count()
    }

    pub fn all_input_errors(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| matches!(r.outcome, RowOutcome::InputError(_)))
    }

    pub fn render(&self) -> String {
        match self.config.format {
            OutputFormat::Json => self.render_json(),
            OutputFormat::Csv => self.render_csv(),
            OutputFormat::Markdown => self.render_markdown(),
        }
    }

    fn render_json(&self) -> String {
        let tol = serde_json::to_value(self.config.tolerances).expect("tolerances serialize");
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut v = json!({
                    "index": r.index,
                    "source": r.source,
                    "label": r.label,
                    "tolerances": tol,
                });
                match &r.outcome {
                    RowOutcome::Verdict(pv) => v["result"] = serde_json::to_value(pv).expect("verdict serializes"),
                    RowOutcome::InputError(e) => v["input_error"] = Value::String(e.clone()),
                    RowOutcome::Failure(e) => v["error"] = Value::String(e.clone()),
                }
                v
            })
            .collect();
        let doc = json!({ "k": self.k, "seed": self.config.seed, "rows": rows });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }

    fn cells(&self, r: &BatchRow) -> Vec<String> {
        let t = &self.config.tolerances;
        let mut cells = vec![
            r.index.to_string(),
            r.source.clone(),
            r.label.clone().unwrap_or_default(),
        ];
        match &r.outcome {
            RowOutcome::Verdict(v) => cells.extend([
                v.verdict.as_str().to_string(),
                format!("{:e}", v.pinching_margin),
                format!("{}", v.alpha),
                v.theta.map(|x| format!("{x}")).unwrap_or_default(),
                format!("{}", v.threshold),
                v.theta_global_certified.to_string(),
                format!("{:e}", v.einstein_residual),
                String::new(),
            ]),
            RowOutcome::InputError(e) | RowOutcome::Failure(e) => {
                cells.extend(std::iter::repeat_n(String::new(), 7));
                cells.push(e.clone());
            }
        }
        cells.extend([
            format!("{:e}", t.pinching),
            format!("{:e}", t.equality),
            format!("{:e}", t.detection),
        ]);
        cells
    }

    const HEADER: [&'static str; 14] = [
        "index",
        "source",
        "label",
        "verdict",
        "pinching_margin",
        "alpha",
        "theta_max",
        "threshold",
        "global_certified",
        "einstein_residual",
        "error",
        "tol_pinching",
        "tol_equality",
        "tol_detection",
    ];

    fn render_csv(&self) -> String {
        let mut out = Self::HEADER.join(",");
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = self.cells(r).into_iter().map(|c| csv_escape(&c)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn render_markdown(&self) -> String {
        let mut out = format!("| {} |\n", Self::HEADER.join(" | "));
        let _ = writeln!(out, "|{}", "---|".repeat(Self::HEADER.len()));
        for r in &self.rows {
            let cells: Vec<String> = self.cells(r).into_iter().map(|c| c.replace('|', "\\|")).collect();
            let _ = writeln!(out, "| {} |", cells.join(" | "));
        }
        out
    }
}

pub(crate) fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Classifies every file at split index `k`. Per-file failures become error
/// rows; they never abort the batch.
pub fn batch_classify(paths: &[PathBuf], k: usize, cfg: &RunConfig) -> Result<BatchReport> {
    let rows = cfg.install(|| {
        paths
            .par_iter()
            .enumerate()
            .map(|(index, path)| {
                let source = path.display().to_string();
                let file = match load_point_data_with(path, cfg.tolerances.symmetry) {
                    Ok(f) => f,
                    Err(e) => {
                        return BatchRow {
                            index,
                            source,
                            label: None,
                            outcome: RowOutcome::InputError(e.to_string()),
                        }
                    }
                };
                let outcome = match classify_point(&file.to_float(), k, &cfg.optimizer(index as u64)) {
                    Ok(v) => RowOutcome::Verdict(v),
                    Err(e) => RowOutcome::Failure(e.to_string()),
                };
                BatchRow {
                    index,
                    source,
                    label: file.label,
                    outcome,
                }
            })
            .collect()
    })?;
    Ok(BatchReport {
        k,
        config: cfg.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{save_point_data, PointFile};
    use crate::models::{clifford_minimal, umbilical_sphere};

    fn fixtures(dir: &std::path::Path) -> Vec<PathBuf> {
        let a = dir.join("clifford.json");
        save_point_data(
            &a,
            &PointFile::float(clifford_minimal(3, 1.0, 0.0, 2).unwrap().0).with_label("clifford"),
        )
        .unwrap();
        let b = dir.join("broken.json");
        std::fs::write(&b, "{\"n\": 6").unwrap();
        let c = dir.join("sphere.json");
        save_point_data(&c, &PointFile::float(umbilical_sphere(6, 1, 0.0, 1.0).unwrap())).unwrap();
        vec![a, b, c]
    }

    #[test]
    fn corrupt_file_becomes_error_row() {
        let dir = tempfile::tempdir().unwrap();
        let paths = fixtures(dir.path());
        let report = batch_classify(&paths, 3, &RunConfig::default()).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert_eq!(report.error_count(), 1);
        assert!(matches!(report.rows[1].outcome, RowOutcome::InputError(_)));
        assert!(!report.all_input_errors());
        let RowOutcome::Verdict(v) = &report.rows[0].outcome else {
            panic!()
        };
        assert_eq!(v.verdict.as_str(), "EQUALITY_TORUS_STRUCTURE");
    }

    #[test]
    fn worker_count_does_not_change_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let paths = fixtures(dir.path());
        for format in [OutputFormat::Json, OutputFormat::Csv, OutputFormat::Markdown] {
            let one = RunConfig {
                workers: 1,
                seed: 9,
                format,
                ..Default::default()
            };
            let many = RunConfig {
                workers: 8,
                ..one.clone()
            };
            let a = batch_classify(&paths, 3, &one).unwrap().render();
            let b = batch_classify(&paths, 3, &many).unwrap().render();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn csv_quotes_commas() {
        assert_eq!(csv_escape("a,b"), "\"a,b\"");
        assert_eq!(csv_escape("say \"x\""), "\"say \"\"x\"\"\"");
        assert_eq!(csv_escape("plain"), "plain");
    }
}
