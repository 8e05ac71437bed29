//! Dataset CSV, truth sidecar, result JSON and bench CSV formats.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use fastshift::datagen::Dataset;
use fastshift::eval::BenchRecord;
use fastshift::{ClusterResult, GenSpec, ShiftConfig, VectorSet};
use serde::{Deserialize, Serialize};

use crate::Failure;

/// Dataset CSV: no header, one point per row, 17 significant digits.
pub fn format_dataset(points: &VectorSet) -> String {
    let mut out = String::with_capacity(points.len() * points.dim() * 24);
    for row in points.rows() {
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&format!("{v:.16e}"));
        }
        out.push('\n');
    }
    out
}

pub fn read_dataset(path: &Path) -> Result<VectorSet, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut data = Vec::new();
    let mut dim = None;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let d = *dim.get_or_insert(record.len());
        if record.len() != d {
            return Err(Failure::Usage(format!(
                "{}:{}: expected {d} columns, found {}",
                path.display(),
                line + 1,
                record.len()
            )));
        }
        for field in record.iter() {
            let v: f64 = field.parse().map_err(|_| {
                Failure::Usage(format!("{}:{}: '{field}' is not a number", path.display(), line + 1))
            })?;
            data.push(v);
        }
    }
    VectorSet::new(data, dim.unwrap_or(0)).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Ground truth written next to a generated dataset.
#[derive(Debug, Serialize, Deserialize)]
pub struct TruthFile {
    pub spec: GenSpec,
    pub labels: Vec<usize>,
    pub centers: Option<Vec<Vec<f64>>>,
}

pub fn truth_path(dataset: &Path) -> PathBuf {
    let mut name = dataset.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".truth.json");
    dataset.with_file_name(name)
}

pub fn write_generated(path: &Path, spec: &GenSpec, ds: &Dataset) -> Result<(), Failure> {
    write_file(path, format_dataset(&ds.points).as_bytes())?;
    let truth = TruthFile { spec: spec.clone(), labels: ds.labels.clone(), centers: ds.centers.clone() };
    write_file(&truth_path(path), to_json(&truth)?.as_bytes())
}

/// Configuration echoed in every result file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    #[serde(flatten)]
    pub shift: ShiftConfig,
    /// `"flag"` or `"estimated"`.
    pub bandwidth_source: String,
    pub quantile: f64,
    pub sample_cap: usize,
    /// Seeds requested for the fixed-count method; null otherwise.
    pub requested_seeds: Option<usize>,
}

/// Result JSON. Every key is present for every method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub method: String,
    pub n_points: usize,
    pub dim: usize,
    pub modes: Vec<Vec<f64>>,
    pub mode_support: Vec<usize>,
    pub labels: Vec<usize>,
    pub seeds_used: usize,
    pub seeds_discarded: usize,
    pub iterations_run: usize,
    pub distance_evals: u64,
    pub peak_batch_bytes: u64,
    pub wall_time_s: f64,
    /// True when the seed count hit the dataset size below the band.
    pub seed_exhausted: bool,
    pub config: ConfigEcho,
}

impl ResultFile {
    pub fn new(method: &str, points: &VectorSet, res: &ClusterResult, seed_exhausted: bool, config: ConfigEcho, timing: bool) -> Self {
        Self {
            method: method.to_string(),
            n_points: points.len(),
            dim: points.dim(),
            modes: res.mode_set.modes().map(<[f64]>::to_vec).collect(),
            mode_support: res.mode_set.support().to_vec(),
            labels: res.labels.clone(),
            seeds_used: res.seeds_used,
            seeds_discarded: res.seeds_discarded,
            iterations_run: res.iterations_run,
            distance_evals: res.distance_evals,
            peak_batch_bytes: res.peak_batch_bytes,
            wall_time_s: if timing { res.wall_time.as_secs_f64() } else { 0.0 },
            seed_exhausted,
            config,
        }
    }
}

pub fn read_result(path: &Path) -> Result<ResultFile, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

pub const BENCH_HEADER: [&str; 8] = [
    "method",
    "n_points",
    "wall_time_s",
    "distance_evals",
    "peak_batch_bytes",
    "modes_found",
    "rand_index_vs_baseline",
    "status",
];

pub fn format_bench(records: &[BenchRecord]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Io(e.to_string());
    w.write_record(BENCH_HEADER).map_err(io)?;
    for r in records {
        let status = match &r.failure {
            None => "ok".to_string(),
            Some(msg) => format!("failed: {msg}"),
        };
        w.write_record([
            r.method.name().to_string(),
            r.n_points.to_string(),
            r.wall_time_s.to_string(),
            r.distance_evals.to_string(),
            r.peak_batch_bytes.to_string(),
            r.modes_found.to_string(),
            r.rand_index_vs_baseline.map(|v| v.to_string()).unwrap_or_default(),
            status,
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

/// Writes to `path`, or to stdout when it is `None` or `-`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) if p != Path::new("-") => write_file(p, text.as_bytes()),
        _ => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(e.to_string())),
    }
}
