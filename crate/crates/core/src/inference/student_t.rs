//! Student-t critical values via the inverse regularized incomplete beta
//! function, polished by Newton steps on the tail probability.
//!
//! For `T ~ t(df)` and `t > 0`, `P(|T| > t) = I_y(df/2, 1/2)` with
//! `y = df/(df + t²)`, so the two-sided critical value is recovered by
//! inverting the incomplete beta at the requested tail mass.

use crate::error::{Error, Result};

const LN_2PI: f64 = 1.8378770664093453;
const PI: f64 = std::f64::consts::PI;

/// Natural log of the gamma function (Lanczos, g = 7, 9 terms).
#[allow(clippy::excessive_precision)] // published coefficient table
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // Reflection formula keeps the series on x >= 0.5.
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.99999999999980993;
    for (i, &c) in COEFFS.iter().enumerate() {
        acc += c / (x + (i + 1) as f64);
    }
    let t = x + 7.5;
    0.5 * LN_2PI + (x + 0.5) * t.ln() - t + acc.ln()
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn betacf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 20_000;
    const EPS: f64 = 3e-16;
    const FPMIN: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let mf = m as f64;
        let m2 = 2.0 * mf;
        let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta I_x(a, b).
pub fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * betacf(a, b, x) / a
    } else {
        1.0 - front * betacf(b, a, 1.0 - x) / b
    }
}

/// Inverse of I_x(a, b): bracketed bisection, then Newton polishing.
pub fn inv_inc_beta(target: f64, a: f64, b: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&target));
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if inc_beta(a, b, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    let lnb = ln_beta(a, b);
    for _ in 0..4 {
        let f = inc_beta(a, b, x) - target;
        let ln_pdf = (a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - lnb;
        let step = f / ln_pdf.exp();
        let candidate = x - step;
        if candidate > 0.0 && candidate < 1.0 {
            x = candidate;
        }
    }
    x
}

fn t_log_pdf(t: f64, df: f64) -> f64 {
    ln_gamma((df + 1.0) / 2.0)
        - ln_gamma(df / 2.0)
        - 0.5 * (df * PI).ln()
        - (df + 1.0) / 2.0 * (1.0 + t * t / df).ln()
}

/// Two-sided tail mass P(|T| > t) for t >= 0.
fn two_sided_tail(t: f64, df: f64) -> f64 {
    inc_beta(df / 2.0, 0.5, df / (df + t * t))
}

/// Critical value t with `P(|T_df| > t) = alpha_two_sided`.
pub fn t_quantile(alpha_two_sided: f64, df: usize) -> Result<f64> {
    if df < 1 {
        return Err(Error::InvalidArgument("df must be >= 1".into()));
    }
    if !(alpha_two_sided > 0.0 && alpha_two_sided < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha_two_sided}"
        )));
    }
    let nu = df as f64;
    let y = inv_inc_beta(alpha_two_sided, nu / 2.0, 0.5);
    let mut t = (nu * (1.0 - y) / y).sqrt();
    // Newton refinement on the tail probability itself.
    for _ in 0..3 {
        let f = two_sided_tail(t, nu) - alpha_two_sided;
        let dfdt = -2.0 * t_log_pdf(t, nu).exp();
        let candidate = t - f / dfdt;
        if candidate.is_finite() && candidate > 0.0 {
            t = candidate;
        }
    }
    Ok(t)
}
