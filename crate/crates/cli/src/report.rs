//! Trial reports and their CSV / JSON forms.

use std::io::Write;
use std::path::Path;

use asymsens::MechanismKind;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::experiment::Task;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    /// `json` for a `.json` extension, CSV otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// Aggregated errors of one (epsilon, mechanism) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub epsilon: f64,
    pub mechanism: MechanismKind,
    pub mean_abs_error: f64,
    /// 5th percentile of `errors`.
    pub ci_low: f64,
    /// 95th percentile of `errors`.
    pub ci_high: f64,
    pub trials: usize,
    /// `mean_abs_error` divided by the sample size for summed losses.
    pub per_example_mean_abs_error: f64,
    pub exhausted_trials: usize,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub task: Task,
    pub seed: u64,
    pub beta: f64,
    pub bounded: bool,
    pub range: Option<(f64, f64)>,
    pub sample_size: usize,
    pub cutoff: usize,
    pub zero_noise: bool,
    pub rows: Vec<ReportRow>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    task: &'a str,
    epsilon: f64,
    mechanism: String,
    mean_abs_error: f64,
    ci_low: f64,
    ci_high: f64,
    trials: usize,
    beta: f64,
    bounded: bool,
    seed: u64,
}

const CSV_HEADER: [&str; 10] = [
    "task",
    "epsilon",
    "mechanism",
    "mean_abs_error",
    "ci_low",
    "ci_high",
    "trials",
    "beta",
    "bounded",
    "seed",
];

impl TrialReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        writer.write_record(CSV_HEADER)?;
        for row in &self.rows {
            writer.serialize(CsvRow {
                task: self.task.name(),
                epsilon: row.epsilon,
                mechanism: row.mechanism.to_string(),
                mean_abs_error: row.mean_abs_error,
                ci_low: row.ci_low,
                ci_high: row.ci_high,
                trials: row.trials,
                beta: self.beta,
                bounded: self.bounded,
                seed: self.seed,
            })?;
        }
        writer.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    pub fn write<W: Write>(&self, out: W, format: Format) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The row for `(epsilon, mechanism)`, if present.
    pub fn row(&self, epsilon: f64, mechanism: MechanismKind) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.epsilon == epsilon && r.mechanism == mechanism)
    }
}

/// Writes `bytes` to `path`, or to stdout when `path` is `None`.
pub(crate) fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| BenchError::io(p, e)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| BenchError::io("<stdout>", e)),
    }
}
