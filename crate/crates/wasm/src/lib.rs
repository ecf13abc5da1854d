//! Browser bindings for the scaling-law toolkit: three interactive
//! operations behind `wasm-bindgen`, each taking and returning strings so
//! the page stays a single static file with no framework.
//!
//! * [`render_curve`] — parameter exploration: coefficients in, SVG out.
//! * [`fit_points`] — paste an (x, error) table, get the fitted curve, its
//!   coefficients, and an SVG overlay; optionally a held-out validation.
//! * [`compare_curves`] — two coefficient sets in, crossover + derivative
//!   table + overlay SVG out.
//!
//! The demo page lives at `www/index.html`; build with
//! `wasm-pack build --target web`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use scalelaw::analysis::{find_crossover, scalability_table, Side};
use scalelaw::frontier::{Axis, FrontierPoint};
use scalelaw::inference::{attach_covariance, holdout_rmse, threshold_split};
use scalelaw::plot::{emit_plot, PlotOptions};
use scalelaw::powerlaw::{ScalingForm, ScalingParams};
use scalelaw::solver::{fit_saturated, FitConfig, FitResult};

fn err_str(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn parse_params(json: &str) -> Result<ScalingParams, String> {
    let params: ScalingParams =
        serde_json::from_str(json).map_err(|e| format!("bad params JSON: {e}"))?;
    let violations = params.check_shape();
    if violations.is_empty() {
        Ok(params)
    } else {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        Err(list.join("; "))
    }
}

fn bare_fit(params: ScalingParams) -> FitResult {
    FitResult {
        params,
        rss: 0.0,
        n: 0,
        p: params.form().param_count(),
        converged: true,
        start_index: 0,
        residuals: Vec::new(),
        covariance: None,
    }
}

/// Accepts `x,error` lines with or without a header; `#` comments ignored.
fn parse_point_lines(text: &str) -> Result<Vec<FrontierPoint>, String> {
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split([',', ';', '\t', ' ']).filter(|f| !f.is_empty());
        let (Some(x_raw), Some(e_raw)) = (fields.next(), fields.next()) else {
            return Err(format!("line {}: expected 'x,error'", i + 1));
        };
        let (Ok(x), Ok(error)) = (x_raw.parse::<f64>(), e_raw.parse::<f64>()) else {
            if i == 0 {
                continue; // header row
            }
            return Err(format!("line {}: cannot parse '{line}'", i + 1));
        };
        if x <= 0.0 || !x.is_finite() {
            return Err(format!("line {}: x must be > 0", i + 1));
        }
        if !(0.0..=1.0).contains(&error) {
            return Err(format!("line {}: error must lie in [0, 1]", i + 1));
        }
        points.push(FrontierPoint {
            x,
            error,
            source_index: points.len(),
            axis: Axis::Compute,
        });
    }
    if points.is_empty() {
        return Err("no data points found".into());
    }
    Ok(points)
}

fn svg_options(x_lo: f64, x_hi: f64, band: bool) -> PlotOptions {
    PlotOptions {
        x_range: Some((x_lo, x_hi)),
        band,
        width: 760.0,
        height: 440.0,
        ..PlotOptions::default()
    }
}

fn render_curve_impl(params_json: &str, x_lo: f64, x_hi: f64) -> Result<String, String> {
    let params = parse_params(params_json)?;
    emit_plot(
        &[("curve".to_string(), bare_fit(params))],
        &[],
        &svg_options(x_lo, x_hi, false),
    )
    .map_err(err_str)
}

#[derive(Serialize)]
struct FitOutcome {
    svg: String,
    params: ScalingParams,
    rss: f64,
    n: usize,
    converged: bool,
    start_index: usize,
    holdout_rmse: Option<f64>,
    holdout_count: Option<usize>,
}

fn fit_points_impl(points_text: &str, form: &str, threshold: f64) -> Result<String, String> {
    let points = parse_point_lines(points_text)?;
    let form: ScalingForm = form.parse().map_err(err_str)?;
    let config = FitConfig::default();

    let (train, holdout) = if threshold > 0.0 {
        threshold_split(&points, threshold).map_err(err_str)?
    } else {
        (points.clone(), Vec::new())
    };
    if train.is_empty() {
        return Err("threshold leaves no training points".into());
    }
    let mut fit = fit_saturated(&train, form, &config).map_err(err_str)?;
    let mut report = None;
    if fit.n > fit.p && fit.converged {
        attach_covariance(&mut fit, &train).map_err(err_str)?;
        if !holdout.is_empty() {
            report = Some(holdout_rmse(&fit, &holdout, threshold, 0.05).map_err(err_str)?);
        }
    }

    let x_lo = points.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let x_hi = points.iter().map(|p| p.x).fold(0.0f64, f64::max);
    let svg = emit_plot(
        &[("fit".to_string(), fit.clone())],
        &[("data".to_string(), points)],
        &svg_options(x_lo, x_hi, fit.covariance.is_some()),
    )
    .map_err(err_str)?;

    serde_json::to_string(&FitOutcome {
        svg,
        params: fit.params,
        rss: fit.rss,
        n: fit.n,
        converged: fit.converged,
        start_index: fit.start_index,
        holdout_rmse: report.as_ref().map(|r| r.rmse_holdout),
        holdout_count: report.as_ref().map(|r| r.holdout_count),
    })
    .map_err(err_str)
}

#[derive(Serialize)]
struct CompareOutcome {
    svg: String,
    crossover: Option<f64>,
    crossover_multiple: bool,
    rows: Vec<(f64, f64, f64)>,
    average_a: f64,
    average_b: f64,
    stronger: String,
}

fn compare_curves_impl(
    a_json: &str,
    b_json: &str,
    x_lo: f64,
    x_hi: f64,
    probes_csv: &str,
) -> Result<String, String> {
    let (a, b) = (
        bare_fit(parse_params(a_json)?),
        bare_fit(parse_params(b_json)?),
    );
    let probes: Vec<f64> = probes_csv
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad probe '{p}'"))
        })
        .collect::<Result<_, _>>()?;
    let crossover = find_crossover(&a, &b, (x_lo, x_hi)).map_err(err_str)?;
    let table = scalability_table(&a, &b, &probes).map_err(err_str)?;
    let svg = emit_plot(
        &[("A".to_string(), a), ("B".to_string(), b)],
        &[],
        &svg_options(x_lo, x_hi, false),
    )
    .map_err(err_str)?;
    serde_json::to_string(&CompareOutcome {
        svg,
        crossover: crossover.map(|c| c.x),
        crossover_multiple: crossover.map(|c| c.multiple).unwrap_or(false),
        rows: table.rows.clone(),
        average_a: table.average_a,
        average_b: table.average_b,
        stronger: match table.stronger {
            Some(Side::A) => "A".into(),
            Some(Side::B) => "B".into(),
            None => "tie".into(),
        },
    })
    .map_err(err_str)
}

/// Renders one parameterized curve as a standalone SVG.
#[wasm_bindgen]
pub fn render_curve(params_json: &str, x_lo: f64, x_hi: f64) -> Result<String, JsValue> {
    render_curve_impl(params_json, x_lo, x_hi).map_err(|e| JsValue::from_str(&e))
}

/// Fits a pasted `x,error` table; returns `{svg, params, rss, ...}` JSON.
/// `threshold > 0` fits below it and scores held-out RMSE above it.
#[wasm_bindgen]
pub fn fit_points(points_text: &str, form: &str, threshold: f64) -> Result<String, JsValue> {
    fit_points_impl(points_text, form, threshold).map_err(|e| JsValue::from_str(&e))
}

/// Compares two coefficient sets: crossover, |dL/dx| table, overlay SVG.
#[wasm_bindgen]
pub fn compare_curves(
    a_json: &str,
    b_json: &str,
    x_lo: f64,
    x_hi: f64,
    probes_csv: &str,
) -> Result<String, JsValue> {
    compare_curves_impl(a_json, b_json, x_lo, x_hi, probes_csv).map_err(|e| JsValue::from_str(&e))
}
