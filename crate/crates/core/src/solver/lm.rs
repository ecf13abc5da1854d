//! Levenberg–Marquardt minimization of a residual vector.
//!
//! Damped Gauss–Newton with Marquardt scaling: each iteration solves
//! `(JᵀJ + λ·diag(JᵀJ))·δ = -Jᵀr` and accepts the step only when the
//! residual sum of squares does not increase, so rss is non-increasing over
//! accepted iterations by construction. λ shrinks on acceptance and grows on
//! rejection; when it saturates without an acceptable step the best point so
//! far is returned as non-converged.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Damping bounds; λ outside these means the problem is locally unsolvable.
const DAMPING_MIN: f64 = 1e-14;
const DAMPING_MAX: f64 = 1e14;

/// Tuning knobs for one LM run.
#[derive(Debug, Clone)]
pub struct LmConfig {
    pub max_iterations: usize,
    /// Terminate when the max-norm of the gradient Jᵀr drops below this.
    pub gradient_tolerance: f64,
    /// Terminate when the step is this small relative to the parameters.
    pub step_tolerance: f64,
    pub initial_damping: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig {
            max_iterations: 500,
            gradient_tolerance: 1e-10,
            step_tolerance: 1e-10,
            initial_damping: 1e-3,
        }
    }
}

/// Result of one LM run.
#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub solution: DVector<f64>,
    pub rss: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Minimizes `|residuals(x)|²` from `init` with analytic `jacobian`.
///
/// Errors if the residuals are not finite at `init`; never returns a point
/// with higher rss than `init`.
pub fn lm_minimize<R, J>(
    residuals: R,
    jacobian: J,
    init: &DVector<f64>,
    config: &LmConfig,
) -> Result<LmOutcome>
where
    R: Fn(&DVector<f64>) -> DVector<f64>,
    J: Fn(&DVector<f64>) -> DMatrix<f64>,
{
    let mut x = init.clone();
    let mut r = residuals(&x);
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteResiduals);
    }
    let mut rss = r.norm_squared();
    let mut damping = config.initial_damping.max(DAMPING_MIN);

    for iteration in 0..config.max_iterations {
        let jac = jacobian(&x);
        if jac.iter().any(|v| !v.is_finite()) {
            return Ok(LmOutcome {
                solution: x,
                rss,
                converged: false,
                iterations: iteration,
            });
        }
        let gradient = jac.transpose() * &r;
        if gradient.amax() < config.gradient_tolerance {
            return Ok(LmOutcome {
                solution: x,
                rss,
                converged: true,
                iterations: iteration,
            });
        }
        let hessian = jac.transpose() * &jac;
        let diag_floor = hessian.diagonal().amax().max(1.0) * 1e-14;

        // Inner loop: raise damping until a step is solvable and decreases rss.
        loop {
            let mut damped = hessian.clone();
            for i in 0..damped.nrows() {
                damped[(i, i)] += damping * hessian[(i, i)].max(diag_floor);
            }
            let step = damped.cholesky().map(|ch| ch.solve(&(-&gradient)));
            let accepted = step.and_then(|step| {
                let candidate = &x + &step;
                let r_new = residuals(&candidate);
                if r_new.iter().all(|v| v.is_finite()) {
                    let rss_new = r_new.norm_squared();
                    if rss_new <= rss {
                        return Some((step, candidate, r_new, rss_new));
                    }
                }
                None
            });
            match accepted {
                Some((step, candidate, r_new, rss_new)) => {
                    let small_step =
                        step.norm() < config.step_tolerance * (x.norm() + config.step_tolerance);
                    x = candidate;
                    r = r_new;
                    rss = rss_new;
                    damping = (damping * 0.05).max(DAMPING_MIN);
                    if small_step {
                        return Ok(LmOutcome {
                            solution: x,
                            rss,
                            converged: true,
                            iterations: iteration + 1,
                        });
                    }
                    break;
                }
                None => {
                    damping *= 10.0;
                    if damping > DAMPING_MAX {
                        // Normal equations unsolvable even at maximal damping.
                        return Ok(LmOutcome {
                            solution: x,
                            rss,
                            converged: false,
                            iterations: iteration,
                        });
                    }
                }
            }
        }
    }

    Ok(LmOutcome {
        solution: x,
        rss,
        converged: false,
        iterations: config.max_iterations,
    })
}
