//! Statistical layer: Gauss–Newton parameter covariance, delta-method
//! prediction intervals with Student-t critical values, threshold splits,
//! and held-out RMSE validation.
//!
//! Covariance uses the standard nonlinear-least-squares estimator
//! `Cov(θ̂) = s²·(JᵀJ)⁻¹` with `s² = rss/(n-p)` and J the Jacobian of
//! predictions with respect to the natural coefficients at θ̂. When JᵀJ is
//! numerically singular (an unidentifiable shift is the usual culprit) the
//! pseudo-inverse is taken and the deficient rank is reported.

pub mod student_t;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontier::FrontierPoint;
use crate::solver::{Covariance, FitResult};

pub use student_t::t_quantile;

/// Delta-method interval for one prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionInterval {
    pub x: f64,
    pub y_hat: f64,
    pub lo: f64,
    pub hi: f64,
    /// Two-sided significance level.
    pub alpha: f64,
    /// Degrees of freedom n - p.
    pub df: usize,
}

impl PredictionInterval {
    pub fn half_width(&self) -> f64 {
        (self.hi - self.lo) / 2.0
    }
}

/// Covariance from an explicit prediction Jacobian: `s²·(JᵀJ)⁻¹` via SVD,
/// falling back to the pseudo-inverse below numerical rank.
pub fn gn_covariance(jacobian: &DMatrix<f64>, rss: f64, n: usize, p: usize) -> Result<Covariance> {
    if n <= p {
        return Err(Error::TooFewPoints {
            needed: p + 1,
            got: n,
        });
    }
    if jacobian.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite Jacobian".into()));
    }
    let s2 = rss.max(0.0) / (n - p) as f64;
    let svd = jacobian.clone().svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::InvalidArgument("SVD failed".into()))?;
    let sigma_max = svd.singular_values.iter().fold(0.0_f64, |m, &s| m.max(s));
    let tol = sigma_max * n.max(p) as f64 * f64::EPSILON;

    let mut data = vec![0.0; p * p];
    let mut rank = 0;
    for (k, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma <= tol {
            continue;
        }
        rank += 1;
        let w = s2 / (sigma * sigma);
        for i in 0..p {
            for j in 0..p {
                data[i * p + j] += w * v_t[(k, i)] * v_t[(k, j)];
            }
        }
    }
    // Enforce exact symmetry against accumulation order.
    for i in 0..p {
        for j in (i + 1)..p {
            let avg = 0.5 * (data[i * p + j] + data[j * p + i]);
            data[i * p + j] = avg;
            data[j * p + i] = avg;
        }
    }
    Ok(Covariance { dim: p, rank, data })
}

/// Jacobian of fit predictions (natural coefficients) at the fit points.
fn prediction_jacobian(fit: &FitResult, points: &[FrontierPoint]) -> DMatrix<f64> {
    let p = fit.p;
    let mut jac = DMatrix::zeros(points.len(), p);
    for (row, pt) in points.iter().enumerate() {
        let grad = fit.params.gradient_at(pt.x);
        for col in 0..p {
            jac[(row, col)] = grad[col];
        }
    }
    jac
}

/// `Cov(θ̂) = s²·(JᵀJ)⁻¹` over the points the fit was computed on.
pub fn param_covariance(fit: &FitResult, points: &[FrontierPoint]) -> Result<Covariance> {
    if !fit.converged {
        return Err(Error::InvalidArgument(
            "covariance requires a converged fit".into(),
        ));
    }
    if points.len() != fit.n {
        return Err(Error::InvalidArgument(format!(
            "fit saw {} points but covariance got {}",
            fit.n,
            points.len()
        )));
    }
    gn_covariance(&prediction_jacobian(fit, points), fit.rss, fit.n, fit.p)
}

/// Computes and stores the covariance on the fit.
pub fn attach_covariance(fit: &mut FitResult, points: &[FrontierPoint]) -> Result<()> {
    fit.covariance = Some(param_covariance(fit, points)?);
    Ok(())
}

/// Delta-method prediction interval at `x`:
/// `σ² = gᵀ·Cov·g`, half-width `t(α/2, n-p)·σ`.
pub fn predict_ci(fit: &FitResult, x: f64, alpha: f64) -> Result<PredictionInterval> {
    let cov = fit.covariance.as_ref().ok_or(Error::MissingCovariance)?;
    let y_hat = fit.params.evaluate(x)?;
    let grad = fit.params.gradient_at(x);
    let variance = cov.quadratic_form(&grad).max(0.0);
    let sigma = variance.sqrt();
    let df = fit.degrees_of_freedom();
    let t = t_quantile(alpha, df)?;
    let half = t * sigma;
    Ok(PredictionInterval {
        x,
        y_hat,
        lo: y_hat - half,
        hi: y_hat + half,
        alpha,
        df,
    })
}

/// Splits points at a compute threshold: train strictly below, holdout at or
/// above. Either side may come back empty.
pub fn threshold_split(
    points: &[FrontierPoint],
    c_threshold: f64,
) -> Result<(Vec<FrontierPoint>, Vec<FrontierPoint>)> {
    if c_threshold <= 0.0 || !c_threshold.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "threshold must be > 0, got {c_threshold}"
        )));
    }
    let (train, holdout) = points.iter().partition(|pt| pt.x < c_threshold);
    Ok((train, holdout))
}

/// One held-out point with its prediction and interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub x: f64,
    pub observed: f64,
    pub predicted: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Held-out validation of an extrapolating fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub c_threshold: f64,
    pub train_count: usize,
    pub holdout_count: usize,
    /// sqrt(mean squared residual) over the holdout rows.
    pub rmse_holdout: f64,
    pub rows: Vec<ValidationRow>,
}

impl ValidationReport {
    /// CSV rendering: `x,observed,predicted,lo,hi`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,observed,predicted,lo,hi\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.x, r.observed, r.predicted, r.lo, r.hi
            ));
        }
        s
    }
}

/// Scores a fit on held-out points; requires the fit to carry covariance so
/// every row gets its interval.
pub fn holdout_rmse(
    fit: &FitResult,
    holdout: &[FrontierPoint],
    c_threshold: f64,
    alpha: f64,
) -> Result<ValidationReport> {
    if holdout.is_empty() {
        return Err(Error::EmptyInput("holdout"));
    }
    let mut rows = Vec::with_capacity(holdout.len());
    let mut sum_sq = 0.0;
    for pt in holdout {
        let interval = predict_ci(fit, pt.x, alpha)?;
        let residual = interval.y_hat - pt.error;
        sum_sq += residual * residual;
        rows.push(ValidationRow {
            x: pt.x,
            observed: pt.error,
            predicted: interval.y_hat,
            lo: interval.lo,
            hi: interval.hi,
        });
    }
    Ok(ValidationReport {
        c_threshold,
        train_count: fit.n,
        holdout_count: holdout.len(),
        rmse_holdout: (sum_sq / holdout.len() as f64).sqrt(),
        rows,
    })
}
