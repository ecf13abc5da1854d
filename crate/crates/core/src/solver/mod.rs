//! Scaling-law fitting: multistart Levenberg–Marquardt for the saturated and
//! simple forms, closed-form log-log regression for the plain power law.
//!
//! Shape constraints are enforced by a smooth reparameterization, so the LM
//! core stays unconstrained while every returned fit passes
//! [`ScalingParams::check_shape`]:
//!
//! * `A = exp(u)` — amplitude stays positive;
//! * `B = softplus(v)` — shift stays non-negative, with 0 reachable;
//! * `α = decay_cap·sigmoid(w)` — decay in `(0, decay_cap)`, default cap 2;
//! * `E = min_error·sigmoid(s)` — the floor stays below every observation.
//!
//! Residuals live on the error-rate scale: `r_i = L(θ, x_i) - y_i`.

pub mod lm;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontier::{Axis, FrontierPoint};
use crate::powerlaw::{ScalingForm, ScalingParams};

pub use lm::{lm_minimize, LmConfig, LmOutcome};

/// Configuration for [`fit_saturated`].
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub step_tolerance: f64,
    pub initial_damping: f64,
    /// Upper bound on the decay exponent; published fits sit in 0.12–0.38.
    pub decay_cap: f64,
    /// Explicit multistart grid; `None` builds the default data-driven grid.
    pub starts: Option<Vec<ScalingParams>>,
    /// Relative jitter applied to start coefficients (0 disables).
    pub jitter: f64,
    /// Seed for the jitter stream (ChaCha12, platform-independent).
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iterations: 500,
            gradient_tolerance: 1e-10,
            step_tolerance: 1e-10,
            initial_damping: 1e-3,
            decay_cap: 2.0,
            starts: None,
            jitter: 0.0,
            seed: 0,
        }
    }
}

impl FitConfig {
    fn lm_config(&self) -> LmConfig {
        LmConfig {
            max_iterations: self.max_iterations,
            gradient_tolerance: self.gradient_tolerance,
            step_tolerance: self.step_tolerance,
            initial_damping: self.initial_damping,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.gradient_tolerance <= 0.0 || self.step_tolerance <= 0.0 {
            return Err(Error::InvalidArgument("tolerances must be > 0".into()));
        }
        if self.decay_cap <= 0.0 {
            return Err(Error::InvalidArgument("decay_cap must be > 0".into()));
        }
        if let Some(starts) = &self.starts {
            if starts.is_empty() {
                return Err(Error::InvalidArgument("multistart grid is empty".into()));
            }
        }
        Ok(())
    }
}

/// Parameter covariance with its numerical rank (filled by the inference
/// layer; rank < dim means a pseudo-inverse was taken).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covariance {
    pub dim: usize,
    pub rank: usize,
    /// Row-major dim×dim, symmetric PSD.
    pub data: Vec<f64>,
}

impl Covariance {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn is_rank_deficient(&self) -> bool {
        self.rank < self.dim
    }

    /// Quadratic form gᵀ·Cov·g.
    pub fn quadratic_form(&self, g: &[f64]) -> f64 {
        assert_eq!(g.len(), self.dim);
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += g[i] * self.get(i, j) * g[j];
            }
        }
        acc
    }
}

/// A fitted curve with its residual statistics and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: ScalingParams,
    /// Residual sum of squares on the error-rate scale.
    pub rss: f64,
    /// Point count.
    pub n: usize,
    /// Parameter count of the form.
    pub p: usize,
    pub converged: bool,
    /// Which multistart won.
    pub start_index: usize,
    /// Per-point `prediction - observed`, in input order.
    pub residuals: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariance: Option<Covariance>,
}

impl FitResult {
    pub fn form(&self) -> ScalingForm {
        self.params.form()
    }

    pub fn axis(&self) -> Axis {
        self.params.axis()
    }

    /// Degrees of freedom n - p for t-based intervals.
    pub fn degrees_of_freedom(&self) -> usize {
        self.n.saturating_sub(self.p)
    }
}

// --- smooth reparameterization -------------------------------------------

fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn softplus(v: f64) -> f64 {
    if v > 30.0 {
        v
    } else {
        v.exp().ln_1p()
    }
}

fn softplus_inv(b: f64) -> f64 {
    if b > 30.0 {
        b
    } else if b <= 0.0 {
        // softplus underflows to exactly 0 here; the coordinate is frozen.
        -750.0
    } else {
        b.exp_m1().ln()
    }
}

/// Maps internal (unconstrained) coordinates to natural coefficients and the
/// diagonal of the transform Jacobian. `floor_cap <= 0` pins E at 0.
struct Transform {
    form: ScalingForm,
    decay_cap: f64,
    floor_cap: f64,
}

impl Transform {
    fn dim(&self) -> usize {
        match self.form {
            ScalingForm::Saturated => 4,
            ScalingForm::Simple => 3,
            ScalingForm::LogLog => unreachable!("loglog fits are closed-form"),
        }
    }

    fn natural(&self, internal: &DVector<f64>) -> (f64, f64, f64, f64) {
        let amplitude = internal[0].exp();
        let shift = softplus(internal[1]);
        let decay = self.decay_cap * sigmoid(internal[2]);
        let floor = if self.form == ScalingForm::Saturated && self.floor_cap > 0.0 {
            self.floor_cap * sigmoid(internal[3])
        } else {
            0.0
        };
        (amplitude, shift, decay, floor)
    }

    /// d(natural)/d(internal) for the chain rule.
    fn jacobian_diag(&self, internal: &DVector<f64>) -> Vec<f64> {
        let (amplitude, _, decay, floor) = self.natural(internal);
        let mut d = vec![
            amplitude,
            sigmoid(internal[1]),
            decay * (1.0 - decay / self.decay_cap),
        ];
        if self.form == ScalingForm::Saturated {
            d.push(if self.floor_cap > 0.0 {
                floor * (1.0 - floor / self.floor_cap)
            } else {
                0.0
            });
        }
        d
    }

    /// Internal coordinates that reproduce the requested natural coefficients
    /// as closely as the open domains allow.
    fn internal(&self, amplitude: f64, shift: f64, decay: f64, floor: f64) -> DVector<f64> {
        let u = amplitude.max(1e-300).ln();
        let v = softplus_inv(shift);
        let decay_frac = (decay / self.decay_cap).clamp(1e-9, 1.0 - 1e-9);
        let w = logit(decay_frac);
        let mut coords = vec![u, v, w];
        if self.form == ScalingForm::Saturated {
            let s = if self.floor_cap > 0.0 {
                logit((floor / self.floor_cap).clamp(1e-9, 1.0 - 1e-9))
            } else {
                0.0
            };
            coords.push(s);
        }
        DVector::from_vec(coords)
    }

    fn params(&self, internal: &DVector<f64>, axis: Axis) -> ScalingParams {
        let (amplitude, shift, decay, floor) = self.natural(internal);
        match self.form {
            ScalingForm::Saturated => ScalingParams::Saturated {
                axis,
                amplitude,
                shift,
                decay,
                floor,
            },
            ScalingForm::Simple => ScalingParams::Simple {
                axis,
                amplitude,
                shift,
                decay,
            },
            ScalingForm::LogLog => unreachable!(),
        }
    }
}

// --- multistart saturated/simple fit --------------------------------------

struct Start {
    amplitude: f64,
    shift: f64,
    decay: f64,
    floor: f64,
}

fn default_starts(
    form: ScalingForm,
    points: &[FrontierPoint],
    min_error: f64,
    decay_cap: f64,
) -> Vec<Start> {
    let mut by_x: Vec<&FrontierPoint> = points.iter().collect();
    by_x.sort_by(|a, b| a.x.total_cmp(&b.x));
    let median = by_x[by_x.len() / 2];
    let min_x = by_x[0].x;

    let decays: [f64; 3] = [0.1, 0.25, 0.5];
    let floors: &[f64] = if form == ScalingForm::Saturated {
        &[0.0, 0.5]
    } else {
        &[0.0]
    };
    let shifts = [0.0, min_x / 100.0];

    let mut starts = Vec::new();
    for &decay in &decays {
        let decay = decay.min(0.9 * decay_cap);
        for &floor_frac in floors {
            let floor = floor_frac * min_error;
            for &shift in &shifts {
                // Pass the curve through the median frontier point.
                let residual = (median.error - floor).max(1e-6);
                let amplitude = residual * (median.x + shift).powf(decay);
                starts.push(Start {
                    amplitude,
                    shift,
                    decay,
                    floor,
                });
            }
        }
    }
    starts
}

/// Fits the saturated or simple form to frontier points by multistart LM.
///
/// Returns the lowest-rss converged start (ties break to the lowest start
/// index); if no start converges the best non-converged point is returned
/// with `converged = false`. The result always passes shape checks.
pub fn fit_saturated(
    points: &[FrontierPoint],
    form: ScalingForm,
    config: &FitConfig,
) -> Result<FitResult> {
    config.validate()?;
    if form == ScalingForm::LogLog {
        return Err(Error::InvalidArgument(
            "use fit_loglog for the loglog form".into(),
        ));
    }
    let p = form.param_count();
    if points.len() < p {
        return Err(Error::TooFewPoints {
            needed: p,
            got: points.len(),
        });
    }
    let axis = points[0].axis;
    for (i, pt) in points.iter().enumerate() {
        if pt.x <= 0.0 || !pt.x.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "point {i}: x must be finite and > 0, got {}",
                pt.x
            )));
        }
        if !(0.0..=1.0).contains(&pt.error) {
            return Err(Error::InvalidArgument(format!(
                "point {i}: error {} outside [0, 1]",
                pt.error
            )));
        }
        if pt.axis != axis {
            return Err(Error::AxisMismatch(
                axis.as_str().into(),
                pt.axis.as_str().into(),
            ));
        }
    }
    let first_x = points[0].x;
    if points.iter().all(|pt| pt.x == first_x) {
        return Err(Error::RankDeficient("all x values identical".into()));
    }

    let min_error = points
        .iter()
        .map(|pt| pt.error)
        .fold(f64::INFINITY, f64::min);
    let transform = Transform {
        form,
        decay_cap: config.decay_cap,
        floor_cap: min_error,
    };

    let xs: Vec<f64> = points.iter().map(|pt| pt.x).collect();
    let ys: Vec<f64> = points.iter().map(|pt| pt.error).collect();

    let residual_fn = |internal: &DVector<f64>| -> DVector<f64> {
        let params = transform.params(internal, axis);
        DVector::from_iterator(
            xs.len(),
            xs.iter()
                .zip(&ys)
                .map(|(&x, &y)| params.evaluate_unchecked(x) - y),
        )
    };
    let jacobian_fn = |internal: &DVector<f64>| -> DMatrix<f64> {
        let params = transform.params(internal, axis);
        let chain = transform.jacobian_diag(internal);
        let mut jac = DMatrix::zeros(xs.len(), transform.dim());
        for (row, &x) in xs.iter().enumerate() {
            let grad = params.gradient_at(x);
            for (col, &dnat) in chain.iter().enumerate() {
                jac[(row, col)] = grad[col] * dnat;
            }
        }
        jac
    };

    let mut starts: Vec<Start> = match &config.starts {
        Some(explicit) => explicit
            .iter()
            .map(|sp| {
                let c = sp.coefficients();
                match sp.form() {
                    ScalingForm::Saturated => Ok(Start {
                        amplitude: c[0],
                        shift: c[1],
                        decay: c[2],
                        floor: c[3],
                    }),
                    ScalingForm::Simple => Ok(Start {
                        amplitude: c[0],
                        shift: c[1],
                        decay: c[2],
                        floor: 0.0,
                    }),
                    ScalingForm::LogLog => Err(Error::InvalidArgument(
                        "loglog params cannot seed a saturated fit".into(),
                    )),
                }
            })
            .collect::<Result<_>>()?,
        None => default_starts(form, points, min_error, config.decay_cap),
    };

    if config.jitter > 0.0 {
        let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
        for start in &mut starts {
            let mut bump = |value: &mut f64| {
                let u: f64 = rng.random();
                *value *= 1.0 + config.jitter * (2.0 * u - 1.0);
            };
            bump(&mut start.amplitude);
            bump(&mut start.shift);
            bump(&mut start.decay);
            bump(&mut start.floor);
        }
    }

    let lm_config = config.lm_config();
    let mut best: Option<(usize, LmOutcome)> = None;
    for (start_index, start) in starts.iter().enumerate() {
        let init = transform.internal(start.amplitude, start.shift, start.decay, start.floor);
        let outcome = match lm_minimize(residual_fn, jacobian_fn, &init, &lm_config) {
            Ok(outcome) => outcome,
            Err(Error::NonFiniteResiduals) => continue,
            Err(e) => return Err(e),
        };
        let better = match &best {
            None => true,
            Some((_, incumbent)) => match (outcome.converged, incumbent.converged) {
                (true, false) => true,
                (false, true) => false,
                _ => outcome.rss < incumbent.rss,
            },
        };
        if better {
            best = Some((start_index, outcome));
        }
    }
    let (start_index, outcome) = best.ok_or(Error::NonFiniteResiduals)?;

    let params = transform.params(&outcome.solution, axis);
    let residuals: Vec<f64> = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| params.evaluate_unchecked(x) - y)
        .collect();
    let rss = residuals.iter().map(|r| r * r).sum();

    Ok(FitResult {
        params,
        rss,
        n: points.len(),
        p,
        converged: outcome.converged,
        start_index,
        residuals,
        covariance: None,
    })
}

// --- closed-form log-log regression ----------------------------------------

/// Ordinary least squares of `ln y` on `ln x`, with the sufficient statistics
/// needed for prediction intervals in log space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub params: ScalingParams,
    pub n: usize,
    /// ln D0.
    pub intercept: f64,
    /// Exponent a.
    pub slope: f64,
    pub intercept_se: f64,
    pub slope_se: f64,
    /// Residual variance in log space, rss/(n-2); 0 when n == 2.
    pub residual_variance: f64,
    pub mean_log_x: f64,
    /// Centered sum of squares of ln x.
    pub sxx: f64,
}

impl LogLogFit {
    /// Standard error of the mean-response prediction of `ln y` at `x`.
    pub fn predict_log_se(&self, x: f64) -> f64 {
        let d = x.ln() - self.mean_log_x;
        (self.residual_variance * (1.0 / self.n as f64 + d * d / self.sxx)).sqrt()
    }

    pub fn degrees_of_freedom(&self) -> usize {
        self.n.saturating_sub(2)
    }
}

/// Exact closed-form power-law fit `y = D0·x^a` through log-log OLS.
pub fn fit_loglog(points: &[(f64, f64)], axis: Axis) -> Result<LogLogFit> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    for (i, &(x, y)) in points.iter().enumerate() {
        if x <= 0.0 || y <= 0.0 || !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "point {i}: coordinates must be finite and > 0, got ({x}, {y})"
            )));
        }
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mean_lx = lx.iter().sum::<f64>() / n;
    let mean_ly = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mean_lx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::RankDeficient(
            "need at least 2 distinct x values".into(),
        ));
    }
    let sxy: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(&a, &b)| (a - mean_lx) * (b - mean_ly))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_ly - slope * mean_lx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(&a, &b)| (intercept + slope * a - b).powi(2))
        .sum();
    let residual_variance = if points.len() > 2 {
        rss / (n - 2.0)
    } else {
        0.0
    };
    let slope_se = (residual_variance / sxx).sqrt();
    let intercept_se = (residual_variance * (1.0 / n + mean_lx * mean_lx / sxx)).sqrt();

    Ok(LogLogFit {
        params: ScalingParams::LogLog {
            axis,
            scale: intercept.exp(),
            exponent: slope,
        },
        n: points.len(),
        intercept,
        slope,
        intercept_se,
        slope_se,
        residual_variance,
        mean_log_x: mean_lx,
        sxx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frontier(xs: &[f64], ys: &[f64], axis: Axis) -> Vec<FrontierPoint> {
        xs.iter()
            .zip(ys)
            .enumerate()
            .map(|(i, (&x, &error))| FrontierPoint {
                x,
                error,
                source_index: i,
                axis,
            })
            .collect()
    }

    fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let (a, b) = (lo.ln(), hi.ln());
        (0..n)
            .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }

    #[test]
    fn recovers_published_curve_from_noiseless_data() {
        // The curve sits inside (0, 1) from ~2e8 on; sample five decades there.
        let truth = crate::powerlaw::from_published(Axis::Compute, 57.862, 18.391, -0.227, 0.111);
        let xs = log_grid(3e8, 3e13, 40);
        let ys: Vec<f64> = xs.iter().map(|&x| truth.evaluate_unchecked(x)).collect();
        let points = frontier(&xs, &ys, Axis::Compute);
        let fit = fit_saturated(&points, ScalingForm::Saturated, &FitConfig::default()).unwrap();
        assert!(fit.converged);
        // Prediction equivalence on held-out x values.
        for &x in &log_grid(5e8, 2e13, 17) {
            let diff = (fit.params.evaluate_unchecked(x) - truth.evaluate_unchecked(x)).abs();
            assert!(diff < 1e-6, "x={x:e} diff={diff:e}");
        }
        // A, alpha, E recover; B is not identifiable over this range.
        let c = fit.params.coefficients();
        assert!((c[0] - 57.862).abs() / 57.862 < 1e-3, "A={}", c[0]);
        assert!((c[2] - 0.227).abs() / 0.227 < 1e-3, "alpha={}", c[2]);
        assert!((c[3] - 0.111).abs() / 0.111 < 1e-3, "E={}", c[3]);
    }

    #[test]
    fn exact_simple_power_law_three_points() {
        let points = frontier(&[1.0, 2.0, 4.0], &[1.0, 0.5, 0.25], Axis::Compute);
        let fit = fit_saturated(&points, ScalingForm::Simple, &FitConfig::default()).unwrap();
        let c = fit.params.coefficients();
        assert!((c[0] - 1.0).abs() < 1e-8, "A={}", c[0]);
        assert!(c[1].abs() < 1e-8, "B={}", c[1]);
        assert!((c[2] - 1.0).abs() < 1e-8, "alpha={}", c[2]);
        assert!(fit.rss < 1e-16);
    }

    #[test]
    fn too_few_points_rejected() {
        let points = frontier(&[1.0, 2.0, 4.0], &[1.0, 0.5, 0.25], Axis::Compute);
        let err = fit_saturated(&points, ScalingForm::Saturated, &FitConfig::default());
        assert!(matches!(
            err,
            Err(Error::TooFewPoints { needed: 4, got: 3 })
        ));
    }

    #[test]
    fn identical_x_rejected() {
        let points = frontier(&[5.0; 6], &[0.5, 0.4, 0.3, 0.2, 0.25, 0.35], Axis::Compute);
        let err = fit_saturated(&points, ScalingForm::Saturated, &FitConfig::default());
        assert!(matches!(err, Err(Error::RankDeficient(_))));
    }

    #[test]
    fn fit_is_deterministic() {
        let truth = crate::powerlaw::from_published(Axis::Compute, 79.970, 19.111, -0.233, 0.076);
        let xs = log_grid(3e8, 3e13, 30);
        let ys: Vec<f64> = xs.iter().map(|&x| truth.evaluate_unchecked(x)).collect();
        let points = frontier(&xs, &ys, Axis::Compute);
        let config = FitConfig {
            jitter: 0.05,
            seed: 42,
            ..FitConfig::default()
        };
        let a = fit_saturated(&points, ScalingForm::Saturated, &config).unwrap();
        let b = fit_saturated(&points, ScalingForm::Saturated, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn result_passes_shape_check() {
        let xs = log_grid(1e3, 1e9, 25);
        // Noisy-ish hand values still inside [0,1].
        let ys: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                (0.9 * (1.0 + x / 50.0).powf(-0.3) + 0.05 + 0.002 * ((i % 3) as f64)).min(1.0)
            })
            .collect();
        let points = frontier(&xs, &ys, Axis::Compute);
        let fit = fit_saturated(&points, ScalingForm::Saturated, &FitConfig::default()).unwrap();
        assert!(fit.params.check_shape().is_empty());
    }

    #[test]
    fn loglog_exact_recovery() {
        let points: Vec<(f64, f64)> = [1.0, 3.0, 10.0, 55.0, 400.0]
            .iter()
            .map(|&x: &f64| (x, 1e3 * x.powf(0.3)))
            .collect();
        let fit = fit_loglog(&points, Axis::Compute).unwrap();
        let c = fit.params.coefficients();
        assert!((c[0] - 1e3).abs() / 1e3 < 1e-10, "D0={}", c[0]);
        assert!((c[1] - 0.3).abs() < 1e-10, "a={}", c[1]);
    }

    #[test]
    fn loglog_two_point_interpolation() {
        let fit = fit_loglog(&[(1.0, 2.0), (4.0, 8.0)], Axis::Compute).unwrap();
        let c = fit.params.coefficients();
        assert!((c[0] - 2.0).abs() < 1e-12);
        assert!((c[1] - 1.0).abs() < 1e-12);
        assert_eq!(fit.residual_variance, 0.0);
        assert_eq!(fit.predict_log_se(10.0), 0.0);
    }

    #[test]
    fn loglog_rejects_degenerate_input() {
        assert!(matches!(
            fit_loglog(&[(1.0, 2.0)], Axis::Compute),
            Err(Error::TooFewPoints { .. })
        ));
        assert!(matches!(
            fit_loglog(&[(1.0, 2.0), (1.0, 3.0)], Axis::Compute),
            Err(Error::RankDeficient(_))
        ));
        assert!(fit_loglog(&[(0.0, 2.0), (1.0, 3.0)], Axis::Compute).is_err());
    }
}
