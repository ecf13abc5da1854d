//! Measurement data model: experiment-log parsing, compute derivation, and
//! data-hygiene filters.
//!
//! One [`MeasurementRecord`] is one evaluated checkpoint of one trained model:
//! identity, size, per-sample compute cost, samples consumed, and a map of
//! downstream task metrics. Logs arrive as CSV (one row per record/task pair)
//! or JSONL (one object per record).

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Learning-rate schedule the checkpoint was trained under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    Cosine,
    Const,
    ConstCooldown,
}

impl Schedule {
    pub fn as_str(&self) -> &'static str {
        match self {
            Schedule::Cosine => "cosine",
            Schedule::Const => "const",
            Schedule::ConstCooldown => "const_cooldown",
        }
    }

    fn parse(s: &str) -> Option<Schedule> {
        match s {
            "cosine" => Some(Schedule::Cosine),
            "const" => Some(Schedule::Const),
            "const_cooldown" => Some(Schedule::ConstCooldown),
            _ => None,
        }
    }
}

/// How a stored metric value maps to an error rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Accuracy,
    RecallAt5,
    Miou,
    ErrorRate,
}

impl MetricKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MetricKind::Accuracy => "accuracy",
            MetricKind::RecallAt5 => "recall_at_5",
            MetricKind::Miou => "miou",
            MetricKind::ErrorRate => "error_rate",
        }
    }

    fn parse(s: &str) -> Option<MetricKind> {
        match s {
            "accuracy" => Some(MetricKind::Accuracy),
            "recall_at_5" => Some(MetricKind::RecallAt5),
            "miou" => Some(MetricKind::Miou),
            "error_rate" => Some(MetricKind::ErrorRate),
            _ => None,
        }
    }
}

/// A task metric in its original orientation, convertible to an error rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub kind: MetricKind,
    pub value: f64,
}

impl MetricValue {
    /// Builds a metric, rejecting values outside `[0, 1]`.
    pub fn new(kind: MetricKind, value: f64) -> Result<MetricValue> {
        if !(0.0..=1.0).contains(&value) || !value.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "metric value {value} outside [0, 1]"
            )));
        }
        Ok(MetricValue { kind, value })
    }

    /// Error rate in `[0, 1]`: score-like metrics map to `1 - value`,
    /// `error_rate` passes through.
    pub fn to_error(&self) -> f64 {
        match self.kind {
            MetricKind::Accuracy | MetricKind::RecallAt5 | MetricKind::Miou => 1.0 - self.value,
            MetricKind::ErrorRate => self.value,
        }
    }
}

/// One trained-model evaluation point from an experiment log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub model_id: String,
    pub family: String,
    pub dataset_id: String,
    /// Absolute parameter count.
    pub n_params: u64,
    /// GFLOPs per forward pass per sample, > 0.
    pub gflops_per_sample: f64,
    /// Image-text samples consumed, > 0 (repetitions counted).
    pub samples_seen: f64,
    /// Total GFLOPs if the log supplies it; derivable otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compute: Option<f64>,
    pub schedule: Schedule,
    /// Fraction of consumed samples that fell inside warmup; >= 1 means the
    /// checkpoint is still inside warmup. Only const-schedule filtering uses it.
    #[serde(default)]
    pub warmup_fraction: f64,
    /// Task id -> metric, ordered for deterministic serialization.
    pub metrics: BTreeMap<String, MetricValue>,
}

impl MeasurementRecord {
    fn validate(&self) -> std::result::Result<(), String> {
        if self.n_params == 0 {
            return Err("n_params must be > 0".into());
        }
        if self.gflops_per_sample <= 0.0 || !self.gflops_per_sample.is_finite() {
            return Err(format!(
                "gflops_per_sample must be > 0, got {}",
                self.gflops_per_sample
            ));
        }
        if self.samples_seen <= 0.0 || !self.samples_seen.is_finite() {
            return Err(format!(
                "samples_seen must be > 0, got {}",
                self.samples_seen
            ));
        }
        if let Some(c) = self.compute {
            if c <= 0.0 || !c.is_finite() {
                return Err(format!("compute must be > 0, got {c}"));
            }
        }
        if !self.warmup_fraction.is_finite() || self.warmup_fraction < 0.0 {
            return Err(format!(
                "warmup_fraction must be finite and >= 0, got {}",
                self.warmup_fraction
            ));
        }
        for (task, m) in &self.metrics {
            if !(0.0..=1.0).contains(&m.value) || !m.value.is_finite() {
                return Err(format!("metric {task} value {} outside [0, 1]", m.value));
            }
        }
        Ok(())
    }
}

/// Total-compute derivation: the product of per-sample GFLOPs and samples
/// seen, cross-checked against a supplied compute column when present.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedCompute {
    /// Supplied compute if the record carried one, otherwise the product.
    pub gflops: f64,
    /// Set when a supplied compute disagrees with the product by more than
    /// [`COMPUTE_MISMATCH_RTOL`] relative.
    pub mismatch: bool,
}

/// Relative tolerance between supplied and derived compute before flagging.
pub const COMPUTE_MISMATCH_RTOL: f64 = 0.01;

/// Returns the record's total compute in GFLOPs.
///
/// A supplied `compute` value is returned unchanged; the mismatch flag is
/// raised when it disagrees with `gflops_per_sample * samples_seen` by more
/// than 1% relative.
pub fn derive_compute(record: &MeasurementRecord) -> DerivedCompute {
    let derived = record.gflops_per_sample * record.samples_seen;
    match record.compute {
        Some(supplied) => DerivedCompute {
            gflops: supplied,
            mismatch: (derived - supplied).abs() > COMPUTE_MISMATCH_RTOL * supplied,
        },
        None => DerivedCompute {
            gflops: derived,
            mismatch: false,
        },
    }
}

/// Data-hygiene policy applied before frontier extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterPolicy {
    /// Records above this samples-seen scale are dropped (repetition confound).
    pub max_samples_seen: f64,
    /// Unique samples in the pre-training dataset, if known.
    pub dataset_unique_samples: Option<f64>,
    /// Maximum tolerated samples_seen / dataset_unique_samples ratio.
    pub max_repetition: f64,
    /// Drop const-schedule checkpoints that lie inside warmup.
    pub drop_warmup_const: bool,
}

impl Default for FilterPolicy {
    fn default() -> Self {
        FilterPolicy {
            max_samples_seen: 3.07e9,
            dataset_unique_samples: None,
            max_repetition: 3.0,
            drop_warmup_const: true,
        }
    }
}

impl FilterPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.max_samples_seen <= 0.0 || !self.max_samples_seen.is_finite() {
            return Err(Error::InvalidArgument(
                "max_samples_seen must be > 0".into(),
            ));
        }
        if self.max_repetition < 1.0 || !self.max_repetition.is_finite() {
            return Err(Error::InvalidArgument("max_repetition must be >= 1".into()));
        }
        Ok(())
    }
}

/// Machine-readable reason a record was dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    MaxSamplesSeen,
    Warmup,
    Repetition,
}

impl DropReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            DropReason::MaxSamplesSeen => "max_samples_seen",
            DropReason::Warmup => "warmup",
            DropReason::Repetition => "repetition",
        }
    }
}

/// Partitions records into kept and dropped (with reasons), preserving order.
pub fn filter_records(
    records: Vec<MeasurementRecord>,
    policy: &FilterPolicy,
) -> (Vec<MeasurementRecord>, Vec<(MeasurementRecord, DropReason)>) {
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for record in records {
        if record.samples_seen > policy.max_samples_seen {
            dropped.push((record, DropReason::MaxSamplesSeen));
            continue;
        }
        // Closed boundary: a checkpoint exactly at warmup end is still warmup.
        if policy.drop_warmup_const
            && record.schedule == Schedule::Const
            && record.warmup_fraction >= 1.0
        {
            dropped.push((record, DropReason::Warmup));
            continue;
        }
        if let Some(unique) = policy.dataset_unique_samples {
            if unique > 0.0 && record.samples_seen / unique > policy.max_repetition {
                dropped.push((record, DropReason::Repetition));
                continue;
            }
        }
        kept.push(record);
    }
    (kept, dropped)
}

/// Input encodings understood by [`parse_records`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordFormat {
    Csv,
    Jsonl,
}

/// Column order of the CSV schema (one row per record/task pair).
pub const CSV_HEADER: &str = "model_id,family,dataset_id,n_params,gflops_per_sample,\
samples_seen,compute,schedule,warmup_fraction,task_id,metric_kind,metric_value";

/// Parses an experiment log. Rows sharing the same record identity merge
/// their task metrics into a single [`MeasurementRecord`]; the first invalid
/// row aborts the parse with its row number.
pub fn parse_records(source: impl Read, format: RecordFormat) -> Result<Vec<MeasurementRecord>> {
    match format {
        RecordFormat::Csv => parse_csv(source),
        RecordFormat::Jsonl => parse_jsonl(source),
    }
}

/// Key of the non-metric fields; rows with equal keys merge into one record.
#[derive(Hash, PartialEq, Eq)]
struct IdentityKey {
    model_id: String,
    family: String,
    dataset_id: String,
    n_params: u64,
    gflops_bits: u64,
    samples_bits: u64,
    compute_bits: Option<u64>,
    schedule: Schedule,
    warmup_bits: u64,
}

impl IdentityKey {
    fn of(r: &MeasurementRecord) -> IdentityKey {
        IdentityKey {
            model_id: r.model_id.clone(),
            family: r.family.clone(),
            dataset_id: r.dataset_id.clone(),
            n_params: r.n_params,
            gflops_bits: r.gflops_per_sample.to_bits(),
            samples_bits: r.samples_seen.to_bits(),
            compute_bits: r.compute.map(f64::to_bits),
            schedule: r.schedule,
            warmup_bits: r.warmup_fraction.to_bits(),
        }
    }
}

fn row_err(row: usize, message: impl Into<String>) -> Error {
    Error::ParseRow {
        row,
        message: message.into(),
    }
}

fn parse_csv(source: impl Read) -> Result<Vec<MeasurementRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source);

    let headers = reader
        .headers()
        .map_err(|e| Error::ParseInput(format!("cannot read header: {e}")))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let required = [
        "model_id",
        "family",
        "dataset_id",
        "n_params",
        "gflops_per_sample",
        "samples_seen",
        "schedule",
        "task_id",
        "metric_kind",
        "metric_value",
    ];
    let mut idx = HashMap::new();
    for name in required {
        match col(name) {
            Some(i) => {
                idx.insert(name, i);
            }
            None => {
                return Err(Error::ParseInput(format!("missing required column {name}")));
            }
        }
    }
    // Optional columns: may be absent or empty.
    let compute_col = col("compute");
    let warmup_col = col("warmup_fraction");

    let mut records: Vec<MeasurementRecord> = Vec::new();
    let mut index_of: HashMap<IdentityKey, usize> = HashMap::new();

    for (row_i, row) in reader.records().enumerate() {
        let row_no = row_i + 1; // 1-based data row
        let row = row.map_err(|e| row_err(row_no, format!("malformed row: {e}")))?;
        let field = |name: &str| -> Result<&str> {
            let i = idx[name];
            match row.get(i) {
                Some(v) if !v.trim().is_empty() => Ok(v.trim()),
                _ => Err(row_err(row_no, format!("missing required column {name}"))),
            }
        };
        let num = |name: &str| -> Result<f64> {
            let raw = field(name)?;
            raw.parse::<f64>()
                .map_err(|_| row_err(row_no, format!("column {name}: cannot parse '{raw}'")))
        };

        let n_params_raw = num("n_params")?;
        if n_params_raw < 1.0 || n_params_raw.fract() != 0.0 || n_params_raw > u64::MAX as f64 {
            return Err(row_err(
                row_no,
                format!("column n_params: expected positive count, got {n_params_raw}"),
            ));
        }
        let gflops_per_sample = num("gflops_per_sample")?;
        if gflops_per_sample <= 0.0 || !gflops_per_sample.is_finite() {
            return Err(row_err(
                row_no,
                format!("column gflops_per_sample: must be > 0, got {gflops_per_sample}"),
            ));
        }
        let samples_seen = num("samples_seen")?;
        if samples_seen <= 0.0 || !samples_seen.is_finite() {
            return Err(row_err(
                row_no,
                format!("column samples_seen: must be > 0, got {samples_seen}"),
            ));
        }
        let compute = match compute_col.and_then(|i| row.get(i)).map(str::trim) {
            Some("") | None => None,
            Some(raw) => {
                let v = raw.parse::<f64>().map_err(|_| {
                    row_err(row_no, format!("column compute: cannot parse '{raw}'"))
                })?;
                if v <= 0.0 || !v.is_finite() {
                    return Err(row_err(
                        row_no,
                        format!("column compute: must be > 0, got {v}"),
                    ));
                }
                Some(v)
            }
        };
        let schedule_raw = field("schedule")?;
        let schedule = Schedule::parse(schedule_raw).ok_or_else(|| {
            row_err(
                row_no,
                format!("column schedule: unknown schedule '{schedule_raw}'"),
            )
        })?;
        let warmup_fraction = match warmup_col.and_then(|i| row.get(i)).map(str::trim) {
            Some("") | None => 0.0,
            Some(raw) => {
                let v = raw.parse::<f64>().map_err(|_| {
                    row_err(
                        row_no,
                        format!("column warmup_fraction: cannot parse '{raw}'"),
                    )
                })?;
                if !v.is_finite() || v < 0.0 {
                    return Err(row_err(
                        row_no,
                        format!("column warmup_fraction: must be finite and >= 0, got {v}"),
                    ));
                }
                v
            }
        };
        let task_id = field("task_id")?.to_string();
        let kind_raw = field("metric_kind")?;
        let kind = MetricKind::parse(kind_raw).ok_or_else(|| {
            row_err(
                row_no,
                format!("column metric_kind: unknown kind '{kind_raw}'"),
            )
        })?;
        let metric_value = num("metric_value")?;
        if !(0.0..=1.0).contains(&metric_value) {
            return Err(row_err(
                row_no,
                format!("column metric_value: {metric_value} outside [0, 1]"),
            ));
        }
        let metric = MetricValue {
            kind,
            value: metric_value,
        };

        let record = MeasurementRecord {
            model_id: field("model_id")?.to_string(),
            family: field("family")?.to_string(),
            dataset_id: field("dataset_id")?.to_string(),
            n_params: n_params_raw as u64,
            gflops_per_sample,
            samples_seen,
            compute,
            schedule,
            warmup_fraction,
            metrics: BTreeMap::new(),
        };

        let key = IdentityKey::of(&record);
        let slot = *index_of.entry(key).or_insert_with(|| {
            records.push(record);
            records.len() - 1
        });
        if records[slot]
            .metrics
            .insert(task_id.clone(), metric)
            .is_some()
        {
            return Err(row_err(
                row_no,
                format!("duplicate metric for task {task_id}"),
            ));
        }
    }
    Ok(records)
}

fn parse_jsonl(source: impl Read) -> Result<Vec<MeasurementRecord>> {
    let reader = BufReader::new(source);
    let mut records = Vec::new();
    let mut row_no = 0usize;
    for line in reader.lines() {
        let line = line.map_err(|e| Error::ParseInput(format!("read failure: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        row_no += 1;
        let record: MeasurementRecord = serde_json::from_str(&line)
            .map_err(|e| row_err(row_no, format!("malformed object: {e}")))?;
        record.validate().map_err(|m| row_err(row_no, m))?;
        records.push(record);
    }
    Ok(records)
}

/// Writes records back out in the CSV schema, one row per (record, task).
pub fn write_csv(records: &[MeasurementRecord], mut out: impl Write) -> Result<()> {
    let io_err = |e: std::io::Error| Error::ParseInput(format!("write failure: {e}"));
    writeln!(out, "{CSV_HEADER}").map_err(io_err)?;
    for r in records {
        for (task, m) in &r.metrics {
            writeln!(
                out,
                "{},{},{},{},{:e},{:e},{},{},{:e},{},{},{:e}",
                r.model_id,
                r.family,
                r.dataset_id,
                r.n_params,
                r.gflops_per_sample,
                r.samples_seen,
                r.compute.map(|c| format!("{c:e}")).unwrap_or_default(),
                r.schedule.as_str(),
                r.warmup_fraction,
                task,
                m.kind.as_str(),
                m.value,
            )
            .map_err(io_err)?;
        }
    }
    Ok(())
}
