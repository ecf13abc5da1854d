//! `scalelaw` — derive scaling laws from experiment logs and compare models.
//!
//! Pipeline subcommands: `synth` fabricates benchmark data, `pareto` extracts
//! minimal-error frontiers, `fit` estimates curve coefficients, `validate`
//! scores extrapolation on held-out points, `compare`/`predict`/`dopt` turn
//! fits into comparisons and forecasts, `plot` renders SVG panels.
//!
//! Exit codes: 0 success, 1 user error, 2 numerical failure.

mod config;
mod output;
mod pipeline;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use scalelaw::analysis::{self, log_design, synth_generate};
use scalelaw::frontier::{frontier_from_csv, frontier_to_csv, Axis};
use scalelaw::inference::{attach_covariance, holdout_rmse, threshold_split};
use scalelaw::plot::{emit_curve_csv, emit_plot, PlotOptions};
use scalelaw::powerlaw::{ScalingForm, ScalingParams};
use scalelaw::records::{self, FilterPolicy, MeasurementRecord, MetricKind, MetricValue, Schedule};
use scalelaw::solver::{fit_saturated, FitConfig, FitResult};

use config::{resolve, resolve_required, FileConfig};
use output::{human, write_atomic};
use pipeline::{
    load_records, parse_axis, parse_float_list, parse_format, parse_range, project, FrontierMode,
    Projection,
};

/// Error carrying the exit-code class.
#[derive(Debug)]
pub struct CliError {
    message: String,
    numerical: bool,
}

impl CliError {
    pub fn user(message: impl Into<String>) -> CliError {
        CliError {
            message: message.into(),
            numerical: false,
        }
    }

    pub fn numerical(message: impl Into<String>) -> CliError {
        CliError {
            message: message.into(),
            numerical: true,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<scalelaw::Error> for CliError {
    fn from(e: scalelaw::Error) -> CliError {
        let numerical = matches!(
            e,
            scalelaw::Error::NonFiniteResiduals | scalelaw::Error::RankDeficient(_)
        );
        CliError {
            message: e.to_string(),
            numerical,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "scalelaw",
    version,
    about = "Scaling-law fitting, validation, and model comparison from experiment logs"
)]
struct Cli {
    /// JSON config file supplying defaults for omitted flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized steps (falls back to SCALELAW_SEED, then 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct IngestArgs {
    /// Experiment log (CSV or JSONL).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Input format: csv|jsonl.
    #[arg(long)]
    format: Option<String>,
    /// Task id whose metric drives the error axis.
    #[arg(long)]
    task: Option<String>,
    /// Resource axis: compute|samples.
    #[arg(long)]
    axis: Option<String>,
    /// Frontier extraction: bins|skyline|raw (default: bins on compute,
    /// skyline on samples).
    #[arg(long)]
    frontier: Option<String>,
    /// Bin count for the bins frontier.
    #[arg(long)]
    n_bins: Option<usize>,
    /// Drop records above this samples-seen scale.
    #[arg(long)]
    max_samples_seen: Option<f64>,
    /// Unique samples in the pre-training dataset (enables the repetition cap).
    #[arg(long)]
    dataset_unique_samples: Option<f64>,
    /// Maximum samples_seen / dataset_unique_samples ratio.
    #[arg(long)]
    max_repetition: Option<f64>,
    /// Keep const-schedule checkpoints that lie inside warmup.
    #[arg(long)]
    keep_warmup: bool,
}

impl IngestArgs {
    fn run(&self, file: &FileConfig) -> Result<(Projection, Axis), CliError> {
        let input = resolve_required(self.input.clone(), file.input.clone(), "input")?;
        let format = parse_format(&resolve(
            self.format.clone(),
            file.format.clone(),
            "csv".into(),
        ))?;
        let task = resolve_required(self.task.clone(), file.task.clone(), "task")?;
        let axis = parse_axis(&resolve(
            self.axis.clone(),
            file.axis.clone(),
            "compute".into(),
        ))?;
        let policy = FilterPolicy {
            max_samples_seen: resolve(self.max_samples_seen, file.max_samples_seen, 3.07e9),
            dataset_unique_samples: self.dataset_unique_samples.or(file.dataset_unique_samples),
            max_repetition: resolve(self.max_repetition, file.max_repetition, 3.0),
            drop_warmup_const: !self.keep_warmup && !file.keep_warmup.unwrap_or(false),
        };
        let n_bins = resolve(self.n_bins, file.n_bins, scalelaw::frontier::DEFAULT_N_BINS);
        let mode = match self.frontier.as_deref() {
            Some("bins") => FrontierMode::Bins(n_bins),
            Some("skyline") => FrontierMode::Skyline,
            Some("raw") => FrontierMode::Raw,
            Some(other) => {
                return Err(CliError::user(format!(
                    "unknown frontier mode '{other}' (expected bins|skyline|raw)"
                )))
            }
            None => match axis {
                Axis::Compute => FrontierMode::Bins(n_bins),
                Axis::Samples => FrontierMode::Skyline,
            },
        };
        let records = load_records(&input, format)?;
        let projection = project(records, &task, axis, &policy, mode)?;
        for (model, reason) in &projection.dropped {
            eprintln!("dropped {model}: {reason}");
        }
        for model in &projection.compute_mismatches {
            eprintln!("warning: {model}: supplied compute disagrees with gflops_per_sample * samples_seen by > 1%");
        }
        Ok((projection, axis))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit a scaling law to the extracted frontier and write fit JSON.
    Fit {
        #[command(flatten)]
        ingest: IngestArgs,
        /// Functional form: saturated|simple.
        #[arg(long)]
        form: Option<String>,
        /// Fit only points strictly below this threshold.
        #[arg(long)]
        threshold: Option<f64>,
        /// Artifact name prefix (default "fit": fit.json, fit_frontier.csv).
        #[arg(long, default_value = "fit")]
        tag: String,
        /// Relative jitter applied to multistart initial values.
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
    },
    /// Threshold-split the frontier, fit below, score held-out RMSE above.
    Validate {
        #[command(flatten)]
        ingest: IngestArgs,
        /// Compute threshold separating train (below) from holdout.
        #[arg(long)]
        threshold: Option<f64>,
        /// Comma-separated candidate forms to rank (saturated,simple).
        #[arg(long, default_value = "saturated")]
        forms: String,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Compare two fits: crossover, derivative table, predictions.
    Compare {
        #[arg(long)]
        fit_a: PathBuf,
        #[arg(long)]
        fit_b: PathBuf,
        #[arg(long, default_value = "a")]
        label_a: String,
        #[arg(long, default_value = "b")]
        label_b: String,
        /// Probe points for the derivative table, e.g. 5e10,1e11,5e11.
        #[arg(long, default_value = "5e10,1e11,5e11")]
        probes: String,
        /// Crossover search range lo,hi (defaults to the probe span widened
        /// by two decades each way).
        #[arg(long)]
        range: Option<String>,
        /// Target compute scales for predictions.
        #[arg(long)]
        targets: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Predict error/accuracy at target compute for candidate models.
    Predict {
        #[arg(long)]
        fit: PathBuf,
        /// Target compute scales, e.g. 2.14e12,2.59e12.
        #[arg(long)]
        targets: String,
        /// CSV of candidates: model_id,gflops_per_sample.
        #[arg(long)]
        candidates: Option<PathBuf>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Also sample the curve with intervals onto this many grid points
        /// spanning the targets.
        #[arg(long)]
        curve_points: Option<usize>,
    },
    /// Extract and write the minimal-error frontier only.
    Pareto {
        #[command(flatten)]
        ingest: IngestArgs,
    },
    /// Compute-optimal dataset-size chain: trend fit plus error forecasts.
    Dopt {
        /// CSV of observed (compute,samples) optima; alternatively extract
        /// them from --input via per-bin minima.
        #[arg(long)]
        pairs: Option<PathBuf>,
        #[command(flatten)]
        ingest: IngestArgs,
        /// Fit JSON on the samples axis used to score error at D_opt.
        #[arg(long)]
        error_fit: PathBuf,
        #[arg(long)]
        targets: String,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Generate synthetic records from known coefficients.
    Synth {
        /// ScalingParams JSON file.
        #[arg(long)]
        params: PathBuf,
        /// Design grid lo,hi,n (log-spaced).
        #[arg(long)]
        design: String,
        /// Gaussian noise sigma on the error scale.
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        /// Task id attached to the generated metric rows.
        #[arg(long, default_value = "synthetic")]
        task: String,
        /// Artifact name (default "synth": synth.csv).
        #[arg(long, default_value = "synth")]
        tag: String,
    },
    /// Render fits and frontiers as a standalone SVG.
    Plot {
        /// Fit JSON files (repeatable).
        #[arg(long = "fit")]
        fits: Vec<PathBuf>,
        /// Labels for the fits, comma-separated (defaults to file stems).
        #[arg(long)]
        labels: Option<String>,
        /// Frontier CSV files to scatter (repeatable).
        #[arg(long = "points")]
        points: Vec<PathBuf>,
        /// x range lo,hi.
        #[arg(long)]
        range: Option<String>,
        /// y range lo,hi.
        #[arg(long)]
        y_range: Option<String>,
        /// Shade confidence bands.
        #[arg(long)]
        band: bool,
        /// Samples per curve polyline.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        alpha: Option<f64>,
        /// Output file name inside --out.
        #[arg(long, default_value = "plot.svg")]
        name: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 1u8,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.numerical { 2u8 } else { 1u8 })
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let out_dir = resolve(cli.out.clone(), file.out.clone(), PathBuf::from("."));
    let seed = cli
        .seed
        .or(file.seed)
        .or_else(|| {
            std::env::var("SCALELAW_SEED")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0);

    match cli.command {
        Command::Fit {
            ingest,
            form,
            threshold,
            tag,
            jitter,
        } => cmd_fit(
            &ingest, &file, &out_dir, form, threshold, &tag, jitter, seed,
        ),
        Command::Validate {
            ingest,
            threshold,
            forms,
            alpha,
        } => cmd_validate(&ingest, &file, &out_dir, threshold, &forms, alpha, seed),
        Command::Compare {
            fit_a,
            fit_b,
            label_a,
            label_b,
            probes,
            range,
            targets,
            alpha,
        } => cmd_compare(
            &file, &out_dir, &fit_a, &fit_b, &label_a, &label_b, &probes, range, targets, alpha,
        ),
        Command::Predict {
            fit,
            targets,
            candidates,
            alpha,
            curve_points,
        } => cmd_predict(
            &file,
            &out_dir,
            &fit,
            &targets,
            candidates,
            alpha,
            curve_points,
        ),
        Command::Pareto { ingest } => cmd_pareto(&ingest, &file, &out_dir),
        Command::Dopt {
            pairs,
            ingest,
            error_fit,
            targets,
            alpha,
        } => cmd_dopt(&file, &out_dir, pairs, &ingest, &error_fit, &targets, alpha),
        Command::Synth {
            params,
            design,
            sigma,
            task,
            tag,
        } => cmd_synth(&out_dir, &params, &design, sigma, &task, &tag, seed),
        Command::Plot {
            fits,
            labels,
            points,
            range,
            y_range,
            band,
            samples,
            alpha,
            name,
        } => cmd_plot(
            &file, &out_dir, &fits, labels, &points, range, y_range, band, samples, alpha, &name,
        ),
    }
}

fn read_fit(path: &Path) -> Result<FitResult, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::user(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::user(format!("bad fit JSON {}: {e}", path.display())))
}

fn to_json(value: &impl serde::Serialize) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::user(format!("serialization failed: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn parse_form(raw: &str) -> Result<ScalingForm, CliError> {
    raw.parse::<ScalingForm>().map_err(CliError::from)
}

fn fit_config(seed: u64, jitter: f64) -> FitConfig {
    FitConfig {
        jitter,
        seed,
        ..FitConfig::default()
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_fit(
    ingest: &IngestArgs,
    file: &FileConfig,
    out_dir: &Path,
    form: Option<String>,
    threshold: Option<f64>,
    tag: &str,
    jitter: f64,
    seed: u64,
) -> Result<(), CliError> {
    let (projection, _) = ingest.run(file)?;
    let form = parse_form(&resolve(form, file.form.clone(), "saturated".into()))?;
    let threshold = threshold.or(file.threshold);

    let fit_points = match threshold {
        Some(t) => threshold_split(&projection.points, t)?.0,
        None => projection.points.clone(),
    };
    let mut fit = fit_saturated(&fit_points, form, &fit_config(seed, jitter))?;
    if fit.n > fit.p {
        attach_covariance(&mut fit, &fit_points)?;
    } else {
        eprintln!("warning: n == p, covariance unavailable");
    }

    write_atomic(&out_dir.join(format!("{tag}.json")), &to_json(&fit)?)?;
    write_atomic(
        &out_dir.join(format!("{tag}_frontier.csv")),
        frontier_to_csv(&projection.points).as_bytes(),
    )?;

    let c = fit.params.coefficients();
    println!(
        "fitted {} on {} frontier points (rss {}, start {}): {}",
        form.as_str(),
        fit.n,
        human(fit.rss),
        fit.start_index,
        c.iter().map(|v| human(*v)).collect::<Vec<_>>().join(", ")
    );
    if !fit.converged {
        return Err(CliError::numerical(format!(
            "fit did not converge after {} starts (best rss {})",
            fit.start_index + 1,
            fit.rss
        )));
    }
    Ok(())
}

fn cmd_validate(
    ingest: &IngestArgs,
    file: &FileConfig,
    out_dir: &Path,
    threshold: Option<f64>,
    forms_raw: &str,
    alpha: Option<f64>,
    seed: u64,
) -> Result<(), CliError> {
    let (projection, _) = ingest.run(file)?;
    let threshold = threshold
        .or(file.threshold)
        .ok_or_else(|| CliError::user("--threshold is required"))?;
    let alpha = resolve(alpha, file.alpha, 0.05);
    let forms: Vec<ScalingForm> = forms_raw
        .split(',')
        .map(|f| parse_form(f.trim()))
        .collect::<Result<_, _>>()?;

    let ranked = analysis::select_form(
        &projection.points,
        threshold,
        &forms,
        &fit_config(seed, 0.0),
        alpha,
    )?;

    let (_, holdout) = threshold_split(&projection.points, threshold)?;
    let best = &ranked[0];
    let report = holdout_rmse(&best.fit, &holdout, threshold, alpha)?;
    write_atomic(&out_dir.join("validation.json"), &to_json(&report)?)?;
    write_atomic(&out_dir.join("validation.csv"), report.to_csv().as_bytes())?;

    if ranked.len() > 1 {
        let mut csv = String::from("form,rmse_holdout\n");
        for score in &ranked {
            csv.push_str(&format!(
                "{},{:.16e}\n",
                score.form.as_str(),
                score.rmse_holdout
            ));
        }
        write_atomic(&out_dir.join("forms.csv"), csv.as_bytes())?;
    }
    println!(
        "threshold {}: train {} / holdout {}",
        human(threshold),
        report.train_count,
        report.holdout_count
    );
    for score in &ranked {
        println!(
            "  {:<10} holdout rmse {}",
            score.form.as_str(),
            human(score.rmse_holdout)
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_compare(
    file: &FileConfig,
    out_dir: &Path,
    fit_a: &Path,
    fit_b: &Path,
    label_a: &str,
    label_b: &str,
    probes_raw: &str,
    range: Option<String>,
    targets: Option<String>,
    alpha: Option<f64>,
) -> Result<(), CliError> {
    let (a, b) = (read_fit(fit_a)?, read_fit(fit_b)?);
    let probes = parse_float_list(probes_raw, "probes")?;
    let alpha = resolve(alpha, file.alpha, 0.05);
    let x_range = match range {
        Some(raw) => parse_range(&raw, "range")?,
        None => {
            let lo = probes.iter().fold(f64::INFINITY, |m, &v| m.min(v));
            let hi = probes.iter().fold(0.0f64, |m, &v| m.max(v));
            (lo / 100.0, hi * 100.0)
        }
    };
    let targets = match targets {
        Some(raw) => parse_float_list(&raw, "targets")?,
        None => Vec::new(),
    };
    let report = analysis::compare(label_a, &a, label_b, &b, x_range, &probes, &targets, alpha)?;

    let text = render_comparison(&report);
    write_atomic(&out_dir.join("compare.json"), &to_json(&report)?)?;
    write_atomic(&out_dir.join("compare.txt"), text.as_bytes())?;
    print!("{text}");
    Ok(())
}

fn render_comparison(report: &analysis::ComparisonReport) -> String {
    let mut s = String::new();
    let (a, b) = (&report.label_a, &report.label_b);
    s.push_str(&format!("comparison: {a} vs {b}\n"));
    match &report.crossover {
        Some(c) => {
            s.push_str(&format!(
                "crossover: {} GFLOPs{}\n",
                human(c.x),
                if c.multiple {
                    " (multiple crossings; smallest reported)"
                } else {
                    ""
                }
            ));
        }
        None => s.push_str("crossover: none in range\n"),
    }
    s.push_str(&format!("\n{:<12} {:>14} {:>14}  winner\n", "probe", a, b));
    for ((x, da, db), (_, winner)) in report.scalability.rows.iter().zip(&report.winner_by_scale) {
        s.push_str(&format!(
            "{:<12} {:>14} {:>14}  {winner}\n",
            human(*x),
            human(*da),
            human(*db)
        ));
    }
    s.push_str(&format!(
        "{:<12} {:>14} {:>14}\n",
        "average",
        human(report.scalability.average_a),
        human(report.scalability.average_b)
    ));
    s.push_str(&format!(
        "stronger scalability: {}\n",
        match report.scalability.stronger {
            Some(analysis::Side::A) => a.as_str(),
            Some(analysis::Side::B) => b.as_str(),
            None => "tie",
        }
    ));
    if !report.predictions.is_empty() {
        s.push_str(&format!(
            "\n{:<10} {:>12} {:>22}\n",
            "fit", "compute", "accuracy (95% CI)"
        ));
        for row in &report.predictions {
            s.push_str(&format!(
                "{:<10} {:>12} {:>8} ({}, {})\n",
                row.label,
                human(row.target_compute),
                human(row.accuracy),
                human(row.accuracy_lo),
                human(row.accuracy_hi),
            ));
        }
    }
    s
}

fn cmd_predict(
    file: &FileConfig,
    out_dir: &Path,
    fit_path: &Path,
    targets_raw: &str,
    candidates: Option<PathBuf>,
    alpha: Option<f64>,
    curve_points: Option<usize>,
) -> Result<(), CliError> {
    let fit = read_fit(fit_path)?;
    if fit.covariance.is_none() {
        return Err(CliError::user(
            "fit JSON carries no covariance; refit with more points than parameters",
        ));
    }
    let targets = parse_float_list(targets_raw, "targets")?;
    let alpha = resolve(alpha, file.alpha, 0.05);
    let candidates = match candidates {
        None => vec![("any".to_string(), 1.0)],
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::user(format!("cannot read {}: {e}", path.display())))?;
            let mut rows = Vec::new();
            for (i, line) in text.lines().enumerate() {
                if i == 0 || line.trim().is_empty() {
                    continue;
                }
                let (model_id, gflops) = line.split_once(',').ok_or_else(|| {
                    CliError::user(format!("candidates row {i}: expected model_id,gflops"))
                })?;
                let gflops: f64 = gflops.trim().parse().map_err(|_| {
                    CliError::user(format!("candidates row {i}: bad gflops '{gflops}'"))
                })?;
                rows.push((model_id.trim().to_string(), gflops));
            }
            if rows.is_empty() {
                return Err(CliError::user("candidates file has no data rows"));
            }
            rows
        }
    };

    let rows = analysis::predict_table(&fit, &targets, &candidates, alpha)?;
    write_atomic(&out_dir.join("predictions.json"), &to_json(&rows)?)?;
    let mut csv = String::from(
        "model_id,target_compute,gflops_per_sample,implied_samples,error,error_lo,error_hi,accuracy,accuracy_lo,accuracy_hi\n",
    );
    for row in &rows {
        csv.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            row.label,
            row.target_compute,
            row.gflops_per_sample,
            row.implied_samples,
            row.interval.y_hat,
            row.interval.lo,
            row.interval.hi,
            row.accuracy,
            row.accuracy_lo,
            row.accuracy_hi
        ));
    }
    write_atomic(&out_dir.join("predictions.csv"), csv.as_bytes())?;

    println!(
        "{:<22} {:>10} {:>12} {:>24}",
        "model", "compute", "samples", "accuracy (CI)"
    );
    for row in &rows {
        println!(
            "{:<22} {:>10} {:>12} {:>8} ({}, {})",
            row.label,
            human(row.target_compute),
            human(row.implied_samples),
            human(row.accuracy),
            human(row.accuracy_lo),
            human(row.accuracy_hi)
        );
    }

    if let Some(n) = curve_points {
        let lo = targets.iter().fold(f64::INFINITY, |m, &v| m.min(v)) / 10.0;
        let hi = targets.iter().fold(0.0f64, |m, &v| m.max(v)) * 10.0;
        let grid = log_design(lo, hi, n.max(2))?;
        let csv = emit_curve_csv(&fit, &grid, alpha)?;
        write_atomic(&out_dir.join("curve.csv"), csv.as_bytes())?;
    }
    Ok(())
}

fn cmd_pareto(ingest: &IngestArgs, file: &FileConfig, out_dir: &Path) -> Result<(), CliError> {
    let (projection, axis) = ingest.run(file)?;
    write_atomic(
        &out_dir.join("frontier.csv"),
        frontier_to_csv(&projection.points).as_bytes(),
    )?;
    println!(
        "frontier: {} points on the {} axis (from {} kept records)",
        projection.points.len(),
        axis.as_str(),
        projection.kept
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_dopt(
    file: &FileConfig,
    out_dir: &Path,
    pairs_path: Option<PathBuf>,
    ingest: &IngestArgs,
    error_fit_path: &Path,
    targets_raw: &str,
    alpha: Option<f64>,
) -> Result<(), CliError> {
    let alpha = resolve(alpha, file.alpha, 0.05);
    let targets = parse_float_list(targets_raw, "targets")?;
    let pairs: Vec<(f64, f64)> = match pairs_path {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::user(format!("cannot read {}: {e}", path.display())))?;
            let mut rows = Vec::new();
            for (i, line) in text.lines().enumerate() {
                if i == 0 || line.trim().is_empty() {
                    continue;
                }
                let (c, d) = line.split_once(',').ok_or_else(|| {
                    CliError::user(format!("pairs row {i}: expected compute,samples"))
                })?;
                let parse = |raw: &str| -> Result<f64, CliError> {
                    raw.trim()
                        .parse()
                        .map_err(|_| CliError::user(format!("pairs row {i}: bad number '{raw}'")))
                };
                rows.push((parse(c)?, parse(d)?));
            }
            rows
        }
        None => {
            // Per-compute-bin minima; each bin's winner contributes its
            // (compute, samples seen) pair.
            let (projection, axis) = ingest.run(file)?;
            if axis != Axis::Compute {
                return Err(CliError::user(
                    "dopt extraction runs on the compute axis (pass --axis compute)",
                ));
            }
            projection
                .points
                .iter()
                .map(|pt| (pt.x, projection.samples_of_source[pt.source_index]))
                .collect()
        }
    };

    let error_fit = read_fit(error_fit_path)?;
    let (trend, rows) = analysis::compute_optimal_chain(&pairs, &error_fit, &targets, alpha)?;

    #[derive(serde::Serialize)]
    struct DoptArtifact<'a> {
        trend: &'a scalelaw::solver::LogLogFit,
        rows: &'a [analysis::ChainRow],
    }
    write_atomic(
        &out_dir.join("dopt.json"),
        &to_json(&DoptArtifact {
            trend: &trend,
            rows: &rows,
        })?,
    )?;
    let mut csv = String::from(
        "target_compute,d_opt,d_opt_lo,d_opt_hi,error,error_lo,error_hi,accuracy,accuracy_lo,accuracy_hi\n",
    );
    for row in &rows {
        csv.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            row.target_compute,
            row.d_opt,
            row.d_opt_lo,
            row.d_opt_hi,
            row.error_interval.y_hat,
            row.error_interval.lo,
            row.error_interval.hi,
            row.accuracy,
            row.accuracy_lo,
            row.accuracy_hi
        ));
    }
    write_atomic(&out_dir.join("dopt.csv"), csv.as_bytes())?;

    let c = trend.params.coefficients();
    println!(
        "trend: D_opt = {} * C^{} (n = {})",
        human(c[0]),
        human(c[1]),
        trend.n
    );
    println!(
        "{:<12} {:>24} {:>24}",
        "compute", "D_opt (CI)", "accuracy (CI)"
    );
    for row in &rows {
        println!(
            "{:<12} {:>8} ({}, {}) {:>8} ({}, {})",
            human(row.target_compute),
            human(row.d_opt),
            human(row.d_opt_lo),
            human(row.d_opt_hi),
            human(row.accuracy),
            human(row.accuracy_lo),
            human(row.accuracy_hi)
        );
    }
    Ok(())
}

fn cmd_synth(
    out_dir: &Path,
    params_path: &Path,
    design_raw: &str,
    sigma: f64,
    task: &str,
    tag: &str,
    seed: u64,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(params_path)
        .map_err(|e| CliError::user(format!("cannot read {}: {e}", params_path.display())))?;
    let params: ScalingParams =
        serde_json::from_str(&text).map_err(|e| CliError::user(format!("bad params JSON: {e}")))?;
    let parts = parse_float_list(design_raw, "design")?;
    if parts.len() != 3 {
        return Err(CliError::user("--design expects 'lo,hi,n'"));
    }
    let design = log_design(parts[0], parts[1], parts[2] as usize)?;
    let points = synth_generate(&params, &design, sigma, seed)?;
    let clamped = points
        .iter()
        .filter(|p| p.error == 0.0 || p.error == 1.0)
        .count();
    if clamped > 0 {
        eprintln!(
            "warning: {clamped} of {} points clamped to the [0, 1] boundary; \
the curve may leave the valid error range on this design",
            points.len()
        );
    }

    // Encode each point so both axes reproduce x: one sample costing x
    // GFLOPs, i.e. compute = samples_seen * gflops_per_sample = x.
    let records: Vec<MeasurementRecord> = points
        .iter()
        .enumerate()
        .map(|(i, pt)| MeasurementRecord {
            model_id: format!("synth-{i:03}"),
            family: "synth".into(),
            dataset_id: "synth".into(),
            n_params: 1,
            gflops_per_sample: 1.0,
            samples_seen: pt.x,
            compute: Some(pt.x),
            schedule: Schedule::Cosine,
            warmup_fraction: 0.0,
            metrics: [(
                task.to_string(),
                MetricValue {
                    kind: MetricKind::ErrorRate,
                    value: pt.error,
                },
            )]
            .into_iter()
            .collect(),
        })
        .collect();
    let mut buf = Vec::new();
    records::write_csv(&records, &mut buf)?;
    write_atomic(&out_dir.join(format!("{tag}.csv")), &buf)?;
    println!(
        "wrote {} synthetic records (sigma {}, seed {seed})",
        records.len(),
        human(sigma)
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_plot(
    file: &FileConfig,
    out_dir: &Path,
    fit_paths: &[PathBuf],
    labels: Option<String>,
    point_paths: &[PathBuf],
    range: Option<String>,
    y_range: Option<String>,
    band: bool,
    samples: usize,
    alpha: Option<f64>,
    name: &str,
) -> Result<(), CliError> {
    let alpha = resolve(alpha, file.alpha, 0.05);
    let labels: Vec<String> = match labels {
        Some(raw) => raw.split(',').map(|s| s.trim().to_string()).collect(),
        None => fit_paths
            .iter()
            .map(|p| {
                p.file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("fit")
                    .to_string()
            })
            .collect(),
    };
    if !fit_paths.is_empty() && labels.len() != fit_paths.len() {
        return Err(CliError::user("--labels count must match --fit count"));
    }
    let mut fits = Vec::new();
    for (path, label) in fit_paths.iter().zip(&labels) {
        fits.push((label.clone(), read_fit(path)?));
    }
    let mut point_sets = Vec::new();
    for path in point_paths {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::user(format!("cannot read {}: {e}", path.display())))?;
        let pts = frontier_from_csv(&text, Axis::Compute)?;
        let label = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("points")
            .to_string();
        point_sets.push((label, pts));
    }

    let options = PlotOptions {
        x_range: match range {
            Some(raw) => Some(parse_range(&raw, "range")?),
            None => None,
        },
        y_range: match y_range {
            Some(raw) => Some(parse_range(&raw, "y-range")?),
            None => None,
        },
        band,
        alpha,
        curve_samples: samples,
        ..PlotOptions::default()
    };
    let svg = emit_plot(&fits, &point_sets, &options)?;
    write_atomic(&out_dir.join(name), svg.as_bytes())?;
    println!("wrote {}", out_dir.join(name).display());
    Ok(())
}
