//! Shared pipeline steps: ingest records, apply hygiene filters, project to
//! an (x, error) cloud on the chosen axis, and extract a frontier.

use std::fs::File;
use std::path::Path;

use scalelaw::frontier::{self, Axis, FrontierPoint};
use scalelaw::records::{
    self, derive_compute, filter_records, FilterPolicy, MeasurementRecord, RecordFormat,
};

use crate::CliError;

pub fn parse_axis(s: &str) -> Result<Axis, CliError> {
    match s {
        "compute" => Ok(Axis::Compute),
        "samples" => Ok(Axis::Samples),
        other => Err(CliError::user(format!(
            "unknown axis '{other}' (expected compute|samples)"
        ))),
    }
}

pub fn parse_format(s: &str) -> Result<RecordFormat, CliError> {
    match s {
        "csv" => Ok(RecordFormat::Csv),
        "jsonl" => Ok(RecordFormat::Jsonl),
        other => Err(CliError::user(format!(
            "unknown format '{other}' (expected csv|jsonl)"
        ))),
    }
}

pub fn load_records(path: &Path, format: RecordFormat) -> Result<Vec<MeasurementRecord>, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::user(format!("cannot open {}: {e}", path.display())))?;
    records::parse_records(file, format).map_err(CliError::from)
}

/// Frontier extraction strategy over the (x, error) cloud.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontierMode {
    /// Per-bin minima over logarithmically spaced x bins.
    Bins(usize),
    /// Non-dominated (skyline) selection.
    Skyline,
    /// No reduction; every point enters the fit.
    Raw,
}

pub struct Projection {
    pub points: Vec<FrontierPoint>,
    pub kept: usize,
    pub dropped: Vec<(String, &'static str)>,
    pub compute_mismatches: Vec<String>,
    /// samples_seen of each projected cloud point, indexed by source_index.
    pub samples_of_source: Vec<f64>,
}

/// Filters records, projects them onto `axis` for `task`, and extracts the
/// frontier. Records missing the task are ignored.
pub fn project(
    records: Vec<MeasurementRecord>,
    task: &str,
    axis: Axis,
    policy: &FilterPolicy,
    mode: FrontierMode,
) -> Result<Projection, CliError> {
    policy.validate()?;
    let (kept, dropped) = filter_records(records, policy);
    let kept_count = kept.len();
    let dropped: Vec<(String, &'static str)> = dropped
        .into_iter()
        .map(|(r, reason)| (r.model_id, reason.as_str()))
        .collect();

    let mut cloud: Vec<(f64, f64)> = Vec::new();
    let mut samples_of_source = Vec::new();
    let mut compute_mismatches = Vec::new();
    for record in &kept {
        let Some(metric) = record.metrics.get(task) else {
            continue;
        };
        let x = match axis {
            Axis::Compute => {
                let derived = derive_compute(record);
                if derived.mismatch {
                    compute_mismatches.push(record.model_id.clone());
                }
                derived.gflops
            }
            Axis::Samples => record.samples_seen,
        };
        cloud.push((x, metric.to_error()));
        samples_of_source.push(record.samples_seen);
    }
    if cloud.is_empty() {
        return Err(CliError::user(format!(
            "no records carry task '{task}' after filtering"
        )));
    }

    let points = match mode {
        FrontierMode::Bins(n_bins) => frontier::log_bin_minima(&cloud, n_bins, axis)?,
        FrontierMode::Skyline => frontier::skyline_minima(&cloud, axis)?,
        FrontierMode::Raw => cloud
            .iter()
            .enumerate()
            .map(|(i, &(x, error))| FrontierPoint {
                x,
                error,
                source_index: i,
                axis,
            })
            .collect(),
    };
    Ok(Projection {
        points,
        kept: kept_count,
        dropped,
        compute_mismatches,
        samples_of_source,
    })
}

/// Comma-separated float list, e.g. `--probes 5e10,1e11,5e11`.
pub fn parse_float_list(raw: &str, name: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| CliError::user(format!("--{name}: cannot parse '{part}'")))
        })
        .collect()
}

/// `lo,hi` range pair.
pub fn parse_range(raw: &str, name: &str) -> Result<(f64, f64), CliError> {
    let values = parse_float_list(raw, name)?;
    if values.len() != 2 {
        return Err(CliError::user(format!("--{name} expects 'lo,hi'")));
    }
    Ok((values[0], values[1]))
}
