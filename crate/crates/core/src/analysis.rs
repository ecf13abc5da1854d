//! Comparative analysis of fitted curves: crossover detection, scalability
//! derivative tables, prediction tables at target compute, compute-optimal
//! dataset-size chains, functional-form selection, and synthetic data for
//! self-validation.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontier::{Axis, FrontierPoint};
use crate::inference::{self, predict_ci, t_quantile, PredictionInterval};
use crate::powerlaw::{ScalingForm, ScalingParams};
use crate::solver::{fit_loglog, fit_saturated, FitConfig, FitResult, LogLogFit};

// --- crossover ---------------------------------------------------------------

/// Compute at which two fitted curves intersect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub x: f64,
    /// More than one sign change was detected on the scan; `x` is the
    /// smallest root.
    pub multiple: bool,
}

const CROSSOVER_SCAN_SEGMENTS: usize = 512;
const CROSSOVER_VALUE_TOLERANCE: f64 = 1e-9;

/// Finds where `L_a - L_b` changes sign on `[lo, hi]`, by bisection in log-x.
///
/// Returns `None` when the difference never strictly changes sign (identical
/// curves included). With several crossings, the smallest-x root is returned
/// and flagged. `rel_tolerance` bounds the relative x uncertainty; bisection
/// also continues until the curve gap at the midpoint falls under 1e-9.
pub fn find_crossover_with_tolerance(
    fit_a: &FitResult,
    fit_b: &FitResult,
    x_range: (f64, f64),
    rel_tolerance: f64,
) -> Result<Option<Crossover>> {
    let (lo, hi) = x_range;
    if !(lo > 0.0 && hi > 0.0 && lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "invalid range [{lo}, {hi}]"
        )));
    }
    if fit_a.axis() != fit_b.axis() {
        return Err(Error::AxisMismatch(
            fit_a.axis().as_str().into(),
            fit_b.axis().as_str().into(),
        ));
    }
    let gap = |x: f64| fit_a.params.evaluate_unchecked(x) - fit_b.params.evaluate_unchecked(x);

    // Scan a log grid for sign changes.
    let (log_lo, log_hi) = (lo.ln(), hi.ln());
    let grid: Vec<f64> = (0..=CROSSOVER_SCAN_SEGMENTS)
        .map(|i| (log_lo + (log_hi - log_lo) * i as f64 / CROSSOVER_SCAN_SEGMENTS as f64).exp())
        .collect();
    let values: Vec<f64> = grid.iter().map(|&x| gap(x)).collect();

    let mut roots: Vec<(f64, f64)> = Vec::new(); // bracketing intervals
    let mut exact: Vec<f64> = Vec::new();
    for i in 0..CROSSOVER_SCAN_SEGMENTS {
        let (fa, fb) = (values[i], values[i + 1]);
        if fa * fb < 0.0 {
            roots.push((grid[i], grid[i + 1]));
        }
    }
    // A curve touching zero exactly at a grid point counts when the signs on
    // its two sides differ; an identically-zero gap never counts.
    for i in 1..CROSSOVER_SCAN_SEGMENTS {
        if values[i] == 0.0 && values[i - 1] * values[i + 1] < 0.0 {
            exact.push(grid[i]);
        }
    }

    let n_candidates = roots.len() + exact.len();
    if n_candidates == 0 {
        return Ok(None);
    }
    let multiple = n_candidates > 1;

    let first_exact = exact.first().copied();
    let first_bracket = roots.first().copied();
    let x = match (first_exact, first_bracket) {
        (Some(e), Some((a, _))) if e < a => e,
        (Some(e), None) => e,
        (_, Some((mut a, mut b))) => {
            let geo_mid = |a: f64, b: f64| ((a.ln() + b.ln()) / 2.0).exp();
            let mut fa = gap(a);
            loop {
                let mid = geo_mid(a, b);
                let fm = gap(mid);
                if fm == 0.0 {
                    break mid;
                }
                if (fa < 0.0) == (fm < 0.0) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
                let rel = (b - a) / a;
                let resolved = rel < rel_tolerance
                    && (fm.abs() < CROSSOVER_VALUE_TOLERANCE || rel < 8.0 * f64::EPSILON);
                if resolved {
                    break geo_mid(a, b);
                }
            }
        }
        (None, None) => unreachable!(),
    };
    Ok(Some(Crossover { x, multiple }))
}

/// [`find_crossover_with_tolerance`] at the default 1e-6 relative tolerance.
pub fn find_crossover(
    fit_a: &FitResult,
    fit_b: &FitResult,
    x_range: (f64, f64),
) -> Result<Option<Crossover>> {
    find_crossover_with_tolerance(fit_a, fit_b, x_range, 1e-6)
}

// --- scalability -------------------------------------------------------------

/// |dL/dx| magnitudes of two fits over a probe set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalabilityTable {
    /// (probe x, |dL/dx| of a, |dL/dx| of b).
    pub rows: Vec<(f64, f64, f64)>,
    pub average_a: f64,
    pub average_b: f64,
    /// Which side decreases faster on average; `None` on an exact tie.
    pub stronger: Option<Side>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
}

/// Tabulates derivative magnitudes at each probe and declares the fit with
/// the larger average magnitude the more scalable one.
pub fn scalability_table(
    fit_a: &FitResult,
    fit_b: &FitResult,
    probes: &[f64],
) -> Result<ScalabilityTable> {
    if probes.is_empty() {
        return Err(Error::EmptyInput("probes"));
    }
    if fit_a.axis() != fit_b.axis() {
        return Err(Error::AxisMismatch(
            fit_a.axis().as_str().into(),
            fit_b.axis().as_str().into(),
        ));
    }
    let mut rows = Vec::with_capacity(probes.len());
    for &x in probes {
        let da = fit_a.params.derivative(x)?.abs();
        let db = fit_b.params.derivative(x)?.abs();
        rows.push((x, da, db));
    }
    let average_a = rows.iter().map(|r| r.1).sum::<f64>() / rows.len() as f64;
    let average_b = rows.iter().map(|r| r.2).sum::<f64>() / rows.len() as f64;
    let stronger = if average_a > average_b {
        Some(Side::A)
    } else if average_b > average_a {
        Some(Side::B)
    } else {
        None
    };
    Ok(ScalabilityTable {
        rows,
        average_a,
        average_b,
        stronger,
    })
}

// --- prediction tables -------------------------------------------------------

/// One row of a prediction table at a target compute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub label: String,
    pub target_compute: f64,
    pub gflops_per_sample: f64,
    /// target_compute / gflops_per_sample.
    pub implied_samples: f64,
    /// Interval on the error scale.
    pub interval: PredictionInterval,
    /// 1 - error, for score-oriented readers.
    pub accuracy: f64,
    pub accuracy_lo: f64,
    pub accuracy_hi: f64,
}

/// Predicts error (with CI) at each target compute and, per candidate model,
/// the samples-seen budget that reaches the target.
pub fn predict_table(
    fit: &FitResult,
    targets: &[f64],
    candidates: &[(String, f64)],
    alpha: f64,
) -> Result<Vec<PredictionRow>> {
    let mut rows = Vec::new();
    for &target in targets {
        if target <= 0.0 || !target.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "target compute must be > 0, got {target}"
            )));
        }
        for (label, gflops_per_sample) in candidates {
            if *gflops_per_sample <= 0.0 || !gflops_per_sample.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{label}: gflops_per_sample must be > 0"
                )));
            }
            let interval = predict_ci(fit, target, alpha)?;
            rows.push(PredictionRow {
                label: label.clone(),
                target_compute: target,
                gflops_per_sample: *gflops_per_sample,
                implied_samples: target / gflops_per_sample,
                accuracy: 1.0 - interval.y_hat,
                accuracy_lo: 1.0 - interval.hi,
                accuracy_hi: 1.0 - interval.lo,
                interval,
            });
        }
    }
    Ok(rows)
}

// --- compute-optimal chain ---------------------------------------------------

/// One chained compute-optimal prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRow {
    pub target_compute: f64,
    /// D_opt point estimate from the power-law trend.
    pub d_opt: f64,
    /// CI of D_opt from the log-log regression itself.
    pub d_opt_lo: f64,
    pub d_opt_hi: f64,
    /// Error interval of the samples-axis fit evaluated at the D_opt point
    /// estimate (the trend fit's own uncertainty is not propagated through).
    pub error_interval: PredictionInterval,
    pub accuracy: f64,
    pub accuracy_lo: f64,
    pub accuracy_hi: f64,
}

/// Fits `D_opt = D0·C^a` to observed (compute, optimal-samples) pairs, then
/// chains each target through the trend into the samples-axis error fit.
pub fn compute_optimal_chain(
    dopt_points: &[(f64, f64)],
    error_fit_on_samples: &FitResult,
    targets: &[f64],
    alpha: f64,
) -> Result<(LogLogFit, Vec<ChainRow>)> {
    if error_fit_on_samples.axis() != Axis::Samples {
        return Err(Error::AxisMismatch(
            "samples".into(),
            error_fit_on_samples.axis().as_str().into(),
        ));
    }
    let trend = fit_loglog(dopt_points, Axis::Compute)?;
    let df = trend.degrees_of_freedom().max(1);
    let mut rows = Vec::with_capacity(targets.len());
    for &target in targets {
        if target <= 0.0 || !target.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "target compute must be > 0, got {target}"
            )));
        }
        let d_opt = trend.params.evaluate(target)?;
        let log_se = trend.predict_log_se(target);
        let half = if log_se > 0.0 {
            t_quantile(alpha, df)? * log_se
        } else {
            0.0
        };
        let error_interval = predict_ci(error_fit_on_samples, d_opt, alpha)?;
        rows.push(ChainRow {
            target_compute: target,
            d_opt,
            d_opt_lo: d_opt * (-half).exp(),
            d_opt_hi: d_opt * half.exp(),
            accuracy: 1.0 - error_interval.y_hat,
            accuracy_lo: 1.0 - error_interval.hi,
            accuracy_hi: 1.0 - error_interval.lo,
            error_interval,
        });
    }
    Ok((trend, rows))
}

// --- form selection ----------------------------------------------------------

/// One candidate functional form scored on held-out RMSE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormScore {
    pub form: ScalingForm,
    pub rmse_holdout: f64,
    pub fit: FitResult,
}

/// Fits each form on the sub-threshold points and ranks them by held-out
/// RMSE, ascending. The ranking is the deliverable; rank 1 is not an
/// automatic winner.
pub fn select_form(
    points: &[FrontierPoint],
    c_threshold: f64,
    forms: &[ScalingForm],
    config: &FitConfig,
    alpha: f64,
) -> Result<Vec<FormScore>> {
    if forms.is_empty() {
        return Err(Error::EmptyInput("forms"));
    }
    let (train, holdout) = inference::threshold_split(points, c_threshold)?;
    if train.is_empty() || holdout.is_empty() {
        return Err(Error::DegenerateSplit(
            "both train and holdout must be non-empty",
        ));
    }
    let mut scores = Vec::with_capacity(forms.len());
    for &form in forms {
        let mut fit = fit_saturated(&train, form, config)?;
        inference::attach_covariance(&mut fit, &train)?;
        let report = inference::holdout_rmse(&fit, &holdout, c_threshold, alpha)?;
        scores.push(FormScore {
            form,
            rmse_holdout: report.rmse_holdout,
            fit,
        });
    }
    scores.sort_by(|a, b| a.rmse_holdout.total_cmp(&b.rmse_holdout));
    Ok(scores)
}

// --- synthetic data ----------------------------------------------------------

/// Samples a frontier from a known curve plus clamped Gaussian noise;
/// deterministic for a given seed (ChaCha12 stream).
pub fn synth_generate(
    true_params: &ScalingParams,
    design: &[f64],
    noise_sigma: f64,
    seed: u64,
) -> Result<Vec<FrontierPoint>> {
    if noise_sigma < 0.0 || !noise_sigma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise_sigma must be finite and >= 0, got {noise_sigma}"
        )));
    }
    let violations = true_params.check_shape();
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::InvalidParams(list.join("; ")));
    }
    let axis = true_params.axis();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    design
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if x <= 0.0 || !x.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "design point {i}: x must be finite and > 0, got {x}"
                )));
            }
            let clean = true_params.evaluate_unchecked(x);
            let noisy = if noise_sigma > 0.0 {
                clean + noise_sigma * normal.sample(&mut rng)
            } else {
                clean
            };
            Ok(FrontierPoint {
                x,
                error: noisy.clamp(0.0, 1.0),
                source_index: i,
                axis,
            })
        })
        .collect()
}

/// Log-spaced design grid, inclusive of both endpoints.
pub fn log_design(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need 0 < lo < hi and n >= 2, got [{lo}, {hi}] n={n}"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect())
}

// --- comparison report -------------------------------------------------------

/// Two fits evaluated jointly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub label_a: String,
    pub label_b: String,
    pub fit_a: FitResult,
    pub fit_b: FitResult,
    pub crossover: Option<Crossover>,
    pub scalability: ScalabilityTable,
    /// Per probe, the label of the lower-error curve.
    pub winner_by_scale: Vec<(f64, String)>,
    pub predictions: Vec<PredictionRow>,
}

/// Builds the full comparison of two fits on the same axis and task.
#[allow(clippy::too_many_arguments)]
pub fn compare(
    label_a: &str,
    fit_a: &FitResult,
    label_b: &str,
    fit_b: &FitResult,
    x_range: (f64, f64),
    probes: &[f64],
    targets: &[f64],
    alpha: f64,
) -> Result<ComparisonReport> {
    let crossover = find_crossover(fit_a, fit_b, x_range)?;
    let scalability = scalability_table(fit_a, fit_b, probes)?;
    let mut winner_by_scale = Vec::with_capacity(probes.len());
    for &x in probes {
        let ea = fit_a.params.evaluate(x)?;
        let eb = fit_b.params.evaluate(x)?;
        let winner = if ea < eb { label_a } else { label_b };
        winner_by_scale.push((x, winner.to_string()));
    }
    let predictions = if targets.is_empty() {
        Vec::new()
    } else {
        let mut rows = Vec::new();
        if fit_a.covariance.is_some() {
            rows.extend(predict_table(
                fit_a,
                targets,
                &[(label_a.to_string(), 1.0)],
                alpha,
            )?);
        }
        if fit_b.covariance.is_some() {
            rows.extend(predict_table(
                fit_b,
                targets,
                &[(label_b.to_string(), 1.0)],
                alpha,
            )?);
        }
        rows
    };
    Ok(ComparisonReport {
        label_a: label_a.to_string(),
        label_b: label_b.to_string(),
        fit_a: fit_a.clone(),
        fit_b: fit_b.clone(),
        crossover,
        scalability,
        winner_by_scale,
        predictions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::powerlaw::from_published;

    fn fit_from(params: ScalingParams, n: usize) -> FitResult {
        FitResult {
            params,
            rss: 0.0,
            n,
            p: params.form().param_count(),
            converged: true,
            start_index: 0,
            residuals: vec![0.0; n],
            covariance: None,
        }
    }

    fn clip() -> FitResult {
        fit_from(
            from_published(Axis::Compute, 57.862, 18.391, -0.227, 0.111),
            40,
        )
    }

    fn mammut() -> FitResult {
        fit_from(
            from_published(Axis::Compute, 79.970, 19.111, -0.233, 0.076),
            40,
        )
    }

    #[test]
    fn crossover_of_published_curves() {
        let root = find_crossover(&clip(), &mammut(), (1e9, 1e13))
            .unwrap()
            .expect("curves cross");
        assert!(root.x > 1e10 && root.x < 1e11, "{:e}", root.x);
        assert!(!root.multiple);
        // Gap is tiny at the root and changes sign across it.
        let gap =
            |x: f64| clip().params.evaluate_unchecked(x) - mammut().params.evaluate_unchecked(x);
        assert!(gap(root.x).abs() < 1e-9);
        assert!(gap(root.x * 0.99) * gap(root.x * 1.01) < 0.0);
    }

    #[test]
    fn crossover_swap_symmetric() {
        let a = find_crossover(&clip(), &mammut(), (1e9, 1e13))
            .unwrap()
            .unwrap();
        let b = find_crossover(&mammut(), &clip(), (1e9, 1e13))
            .unwrap()
            .unwrap();
        assert_eq!(a.x.to_bits(), b.x.to_bits());
    }

    #[test]
    fn identical_fits_have_no_crossover() {
        assert!(find_crossover(&clip(), &clip(), (1e9, 1e13))
            .unwrap()
            .is_none());
    }

    #[test]
    fn disjoint_curves_have_no_crossover() {
        // Same decay, different floors -> no sign change.
        let low = fit_from(
            ScalingParams::Saturated {
                axis: Axis::Compute,
                amplitude: 1.0,
                shift: 0.0,
                decay: 0.3,
                floor: 0.05,
            },
            10,
        );
        let high = fit_from(
            ScalingParams::Saturated {
                axis: Axis::Compute,
                amplitude: 1.0,
                shift: 0.0,
                decay: 0.3,
                floor: 0.2,
            },
            10,
        );
        assert!(find_crossover(&low, &high, (1.0, 1e12)).unwrap().is_none());
    }

    #[test]
    fn scalability_published_ordering() {
        let probes = [5e10, 1e11, 5e11];
        let table = scalability_table(&clip(), &mammut(), &probes).unwrap();
        for (x, da, db) in &table.rows {
            assert!(db > da, "probe {x:e}: {db:e} <= {da:e}");
        }
        assert!(table.average_b > table.average_a);
        assert_eq!(table.stronger, Some(Side::B));
    }

    #[test]
    fn scalability_tie() {
        let table = scalability_table(&clip(), &clip(), &[1e10, 1e11]).unwrap();
        assert_eq!(table.stronger, None);
        assert_eq!(table.average_a, table.average_b);
    }

    #[test]
    fn scalability_reciprocal_arithmetic() {
        let simple = fit_from(
            ScalingParams::Simple {
                axis: Axis::Compute,
                amplitude: 1.0,
                shift: 0.0,
                decay: 1.0,
            },
            10,
        );
        let table = scalability_table(&simple, &simple, &[1.0, 2.0]).unwrap();
        assert!((table.rows[0].1 - 1.0).abs() < 1e-12);
        assert!((table.rows[1].1 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn predict_table_implied_samples() {
        let mut fit = mammut();
        // Zero covariance so intervals collapse and the table can be built.
        let p = fit.p;
        fit.covariance = Some(crate::solver::Covariance {
            dim: p,
            rank: p,
            data: vec![0.0; p * p],
        });
        let rows = predict_table(
            &fit,
            &[2.14e12, 2.59e12],
            &[("mammut-ViT-L-14".to_string(), 202.56)],
            0.05,
        )
        .unwrap();
        assert!((rows[0].implied_samples - 10.6e9).abs() / 10.6e9 < 0.005);
        assert!((rows[1].implied_samples - 12.8e9).abs() / 12.8e9 < 0.005);
        for row in &rows {
            assert!((row.accuracy + row.interval.y_hat - 1.0).abs() < 1e-15);
        }
        // Unit ratio.
        let rows = predict_table(&fit, &[202.56], &[("x".to_string(), 202.56)], 0.05).unwrap();
        assert!((rows[0].implied_samples - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chain_matches_manual_composition() {
        // D_opt = 10·C^0.8 sampled exactly; error curve on the samples axis.
        let error_params = ScalingParams::Saturated {
            axis: Axis::Samples,
            amplitude: 5.0,
            shift: 1e6,
            decay: 0.3,
            floor: 0.1,
        };
        let mut error_fit = fit_from(error_params, 20);
        error_fit.covariance = Some(crate::solver::Covariance {
            dim: 4,
            rank: 4,
            data: vec![0.0; 16],
        });
        let cs: [f64; 6] = [1e8, 1e9, 1e10, 1e11, 5e11, 1e12];
        let pairs: Vec<(f64, f64)> = cs.iter().map(|&c| (c, 10.0 * c.powf(0.8))).collect();
        let (trend, rows) = compute_optimal_chain(&pairs, &error_fit, &[1e12], 0.05).unwrap();
        let c = trend.params.coefficients();
        assert!((c[0] - 10.0).abs() / 10.0 < 1e-9);
        assert!((c[1] - 0.8).abs() < 1e-12);
        let d_opt = 10.0 * 1e12_f64.powf(0.8);
        assert!((rows[0].d_opt - d_opt).abs() / d_opt < 1e-6);
        let expected_err = error_params.evaluate_unchecked(d_opt);
        assert!((rows[0].error_interval.y_hat - expected_err).abs() < 1e-6);
    }

    #[test]
    fn chain_two_exact_points_reduces_to_evaluation() {
        let error_params = ScalingParams::Saturated {
            axis: Axis::Samples,
            amplitude: 5.0,
            shift: 1e6,
            decay: 0.3,
            floor: 0.1,
        };
        let mut error_fit = fit_from(error_params, 20);
        error_fit.covariance = Some(crate::solver::Covariance {
            dim: 4,
            rank: 4,
            data: vec![0.0; 16],
        });
        let pairs = [(1e9, 2e9), (1e11, 2e10)];
        let (_, rows) = compute_optimal_chain(&pairs, &error_fit, &[1e10], 0.05).unwrap();
        // Exact two-point fit: the D_opt interval collapses to the estimate.
        assert_eq!(rows[0].d_opt_lo, rows[0].d_opt);
        assert_eq!(rows[0].d_opt_hi, rows[0].d_opt);
    }

    #[test]
    fn chain_rejects_compute_axis_fit() {
        let err = compute_optimal_chain(&[(1.0, 2.0), (2.0, 3.0)], &clip(), &[1e10], 0.05);
        assert!(matches!(err, Err(Error::AxisMismatch(_, _))));
    }

    #[test]
    fn synth_deterministic_and_clamped() {
        let params = from_published(Axis::Compute, 57.862, 18.391, -0.227, 0.111);
        let design = log_design(3e8, 3e13, 40).unwrap();
        let a = synth_generate(&params, &design, 0.005, 7).unwrap();
        let b = synth_generate(&params, &design, 0.005, 7).unwrap();
        assert_eq!(a, b);
        let c = synth_generate(&params, &design, 0.005, 8).unwrap();
        assert_ne!(a, c);

        // Noiseless points sit exactly on the curve.
        let exact = synth_generate(&params, &design, 0.0, 7).unwrap();
        for pt in &exact {
            assert_eq!(pt.error, params.evaluate_unchecked(pt.x));
        }

        // Near-1 truth plus huge noise stays clamped to [0, 1].
        let hot = ScalingParams::Saturated {
            axis: Axis::Compute,
            amplitude: 0.0995,
            shift: 0.0,
            decay: 1e-9,
            floor: 0.9,
        };
        let noisy = synth_generate(&hot, &[1.0; 200], 0.5, 3).unwrap();
        assert!(noisy.iter().all(|p| (0.0..=1.0).contains(&p.error)));
        assert!(noisy.iter().any(|p| p.error == 1.0));
    }

    #[test]
    fn select_form_prefers_floor_when_data_has_one() {
        // Generated with a clear floor; the floor-free form must extrapolate
        // worse past the threshold.
        let truth = ScalingParams::Saturated {
            axis: Axis::Compute,
            amplitude: 2.0,
            shift: 0.0,
            decay: 0.35,
            floor: 0.12,
        };
        let design = log_design(1e2, 1e8, 48).unwrap();
        let points = synth_generate(&truth, &design, 0.003, 11).unwrap();
        let ranked = select_form(
            &points,
            1e6,
            &[ScalingForm::Simple, ScalingForm::Saturated],
            &FitConfig::default(),
            0.05,
        )
        .unwrap();
        assert_eq!(ranked[0].form, ScalingForm::Saturated);
        assert!(ranked[0].rmse_holdout < ranked[1].rmse_holdout);
    }

    #[test]
    fn select_form_floor_free_data_leaves_both_admissible() {
        // With no floor in the generator, the simple form should score at
        // least as well as the saturated one more often than not.
        let truth = ScalingParams::Simple {
            axis: Axis::Compute,
            amplitude: 2.0,
            shift: 0.0,
            decay: 0.35,
        };
        let design = log_design(1e2, 1e8, 48).unwrap();
        let mut simple_at_least_as_good = 0;
        for seed in 0..50 {
            let points = synth_generate(&truth, &design, 0.005, seed).unwrap();
            let ranked = select_form(
                &points,
                1e6,
                &[ScalingForm::Saturated, ScalingForm::Simple],
                &FitConfig::default(),
                0.05,
            )
            .unwrap();
            let rmse_of = |form: ScalingForm| {
                ranked
                    .iter()
                    .find(|s| s.form == form)
                    .map(|s| s.rmse_holdout)
                    .unwrap()
            };
            if rmse_of(ScalingForm::Simple) <= rmse_of(ScalingForm::Saturated) {
                simple_at_least_as_good += 1;
            }
        }
        assert!(
            simple_at_least_as_good >= 25,
            "simple form at least as good in only {simple_at_least_as_good}/50 seeds"
        );
    }

    #[test]
    fn select_form_single_candidate() {
        let truth = ScalingParams::Saturated {
            axis: Axis::Compute,
            amplitude: 2.0,
            shift: 0.0,
            decay: 0.35,
            floor: 0.12,
        };
        let design = log_design(1e2, 1e8, 30).unwrap();
        let points = synth_generate(&truth, &design, 0.0, 1).unwrap();
        let ranked = select_form(
            &points,
            1e6,
            &[ScalingForm::Saturated],
            &FitConfig::default(),
            0.05,
        )
        .unwrap();
        assert_eq!(ranked.len(), 1);
    }

    #[test]
    fn select_form_degenerate_split_rejected() {
        let truth = ScalingParams::Saturated {
            axis: Axis::Compute,
            amplitude: 2.0,
            shift: 0.0,
            decay: 0.35,
            floor: 0.12,
        };
        let design = log_design(1e2, 1e4, 10).unwrap();
        let points = synth_generate(&truth, &design, 0.0, 1).unwrap();
        let err = select_form(
            &points,
            1e9,
            &[ScalingForm::Saturated],
            &FitConfig::default(),
            0.05,
        );
        assert!(matches!(err, Err(Error::DegenerateSplit(_))));
    }
}
