//! CSV result rows.
//!
//! Every command writes the same six columns:
//! `experiment_id,seed,step,metric,value,wall_ms`.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};

pub const HEADER: [&str; 6] = ["experiment_id", "seed", "step", "metric", "value", "wall_ms"];

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment_id: String,
    pub seed: u64,
    pub step: u64,
    pub metric: String,
    pub value: f64,
    /// Left empty unless timing was requested, so reruns stay byte-identical.
    pub wall_ms: Option<u64>,
}

impl ResultRow {
    pub fn new(experiment_id: &str, seed: u64, step: u64, metric: impl Into<String>, value: f64) -> Self {
        Self { experiment_id: experiment_id.to_owned(), seed, step, metric: metric.into(), value, wall_ms: None }
    }
}

/// Shortest round-trip representation; non-finite values become `nan`.
pub fn format_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else {
        "nan".to_owned()
    }
}

pub struct CsvSink {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvSink {
    /// Creates (or truncates) `path` and writes the header.
    pub fn create(path: &Path) -> Result<Self> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        }
        let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
        let mut sink = Self { path: path.to_owned(), writer: csv::Writer::from_writer(BufWriter::new(file)) };
        sink.write_fields(HEADER.iter().map(|s| s.to_string()))?;
        Ok(sink)
    }

    fn write_fields(&mut self, fields: impl IntoIterator<Item = String>) -> Result<()> {
        self.writer.write_record(fields).map_err(|e| csv_error(&self.path, e))
    }

    pub fn write(&mut self, row: &ResultRow) -> Result<()> {
        self.write_fields([
            row.experiment_id.clone(),
            row.seed.to_string(),
            row.step.to_string(),
            row.metric.clone(),
            format_value(row.value),
            row.wall_ms.map(|ms| ms.to_string()).unwrap_or_default(),
        ])
    }

    pub fn write_all<'a>(&mut self, rows: impl IntoIterator<Item = &'a ResultRow>) -> Result<()> {
        rows.into_iter().try_for_each(|r| self.write(r))
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.writer.flush().map_err(|e| HarnessError::io(&self.path, e))?;
        Ok(self.path)
    }
}

/// Writes `rows` to a fresh file at `path`.
pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<PathBuf> {
    let mut sink = CsvSink::create(path)?;
    sink.write_all(rows)?;
    sink.finish()
}

/// Parses a file written by [`CsvSink`], checking the header.
pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(HEADER) {
        return Err(HarnessError::Config(format!("{}: unexpected header {:?}", path.display(), header)));
    }
    let bad = |line: usize, what: &str| HarnessError::Config(format!("{}:{line}: bad {what}", path.display()));
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = i + 2;
        let value = match &record[4] {
            "nan" => f64::NAN,
            v => v.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad(line, "value"))?,
        };
        rows.push(ResultRow {
            experiment_id: record[0].to_owned(),
            seed: record[1].parse().map_err(|_| bad(line, "seed"))?,
            step: record[2].parse().map_err(|_| bad(line, "step"))?,
            metric: record[3].to_owned(),
            value,
            wall_ms: match &record[5] {
                "" => None,
                ms => Some(ms.parse().map_err(|_| bad(line, "wall_ms"))?),
            },
        });
    }
    Ok(rows)
}

fn csv_error(path: &Path, e: csv::Error) -> HarnessError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => HarnessError::io(path, source),
        other => HarnessError::Config(format!("{}: {other:?}", path.display())),
    }
}
