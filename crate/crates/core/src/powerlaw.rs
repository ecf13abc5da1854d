//! Scaling-law functional families: evaluation, analytic derivatives, and
//! shape constraints.
//!
//! Three families, all decreasing-error curves over a resource axis:
//!
//! * saturated — `A·(x+B)^(-α) + E`, with low-x saturation (B) and an
//!   asymptotic error floor (E);
//! * simple — `A·(x+B)^(-α)`, the floor-free variant;
//! * loglog — `D0·x^a`, exactly linear in log-log coordinates (used for
//!   compute-optimal dataset-size trends, where `a` may have either sign).
//!
//! The decay exponent is stored positive and the minus sign lives in the
//! exponent. Published coefficient tables print it negated; negate on
//! ingestion. Evaluation works in log space so that x spanning 1e6..1e13
//! never overflows the power.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontier::Axis;

/// The functional family, without coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingForm {
    Saturated,
    Simple,
    LogLog,
}

impl ScalingForm {
    /// Number of free coefficients: 4, 3, 2.
    pub fn param_count(&self) -> usize {
        match self {
            ScalingForm::Saturated => 4,
            ScalingForm::Simple => 3,
            ScalingForm::LogLog => 2,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ScalingForm::Saturated => "saturated",
            ScalingForm::Simple => "simple",
            ScalingForm::LogLog => "loglog",
        }
    }
}

impl std::str::FromStr for ScalingForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<ScalingForm> {
        match s {
            "saturated" => Ok(ScalingForm::Saturated),
            "simple" => Ok(ScalingForm::Simple),
            "loglog" => Ok(ScalingForm::LogLog),
            other => Err(Error::InvalidArgument(format!("unknown form '{other}'"))),
        }
    }
}

/// Coefficients of one fitted curve, tagged with the resource axis.
///
/// JSON wire format keeps the conventional coefficient names:
/// `{"form":"saturated","axis":"compute","A":…,"B":…,"alpha":…,"E":…}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum ScalingParams {
    Saturated {
        axis: Axis,
        /// Amplitude A > 0.
        #[serde(rename = "A")]
        amplitude: f64,
        /// Shift B >= 0, in x units.
        #[serde(rename = "B")]
        shift: f64,
        /// Decay exponent α > 0 (the minus sign is applied in the exponent).
        #[serde(rename = "alpha")]
        decay: f64,
        /// Irreducible error E >= 0.
        #[serde(rename = "E")]
        floor: f64,
    },
    Simple {
        axis: Axis,
        #[serde(rename = "A")]
        amplitude: f64,
        #[serde(rename = "B")]
        shift: f64,
        #[serde(rename = "alpha")]
        decay: f64,
    },
    LogLog {
        axis: Axis,
        /// Scale D0 > 0.
        #[serde(rename = "D0")]
        scale: f64,
        /// Exponent a, any sign.
        #[serde(rename = "a")]
        exponent: f64,
    },
}

/// One failed shape constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShapeViolation {
    /// A <= 0 (or D0 <= 0): the curve is not strictly positive.
    StrictPositivity,
    /// α <= 0: the curve does not decrease monotonically.
    MonotonicDecrease,
    /// E < 0: a negative asymptotic error.
    IrreducibleErrorNegative,
    /// B < 0: the shift moves the singularity into the positive axis.
    ShiftNegative,
    /// A coefficient is NaN or infinite.
    NonFinite,
}

impl std::fmt::Display for ShapeViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ShapeViolation::StrictPositivity => "strict positivity violated",
            ShapeViolation::MonotonicDecrease => "monotonic decrease violated",
            ShapeViolation::IrreducibleErrorNegative => "irreducible error negative",
            ShapeViolation::ShiftNegative => "shift negative",
            ShapeViolation::NonFinite => "non-finite coefficient",
        };
        f.write_str(s)
    }
}

impl ScalingParams {
    pub fn form(&self) -> ScalingForm {
        match self {
            ScalingParams::Saturated { .. } => ScalingForm::Saturated,
            ScalingParams::Simple { .. } => ScalingForm::Simple,
            ScalingParams::LogLog { .. } => ScalingForm::LogLog,
        }
    }

    pub fn axis(&self) -> Axis {
        match *self {
            ScalingParams::Saturated { axis, .. }
            | ScalingParams::Simple { axis, .. }
            | ScalingParams::LogLog { axis, .. } => axis,
        }
    }

    /// Coefficients in canonical order: `[A, B, α, E]`, `[A, B, α]`, or
    /// `[D0, a]`.
    pub fn coefficients(&self) -> Vec<f64> {
        match *self {
            ScalingParams::Saturated {
                amplitude,
                shift,
                decay,
                floor,
                ..
            } => vec![amplitude, shift, decay, floor],
            ScalingParams::Simple {
                amplitude,
                shift,
                decay,
                ..
            } => vec![amplitude, shift, decay],
            ScalingParams::LogLog {
                scale, exponent, ..
            } => vec![scale, exponent],
        }
    }

    /// Rebuilds params of the same form/axis from canonical-order coefficients.
    pub fn with_coefficients(&self, c: &[f64]) -> Result<ScalingParams> {
        let expected = self.form().param_count();
        if c.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "{} form takes {expected} coefficients, got {}",
                self.form().as_str(),
                c.len()
            )));
        }
        Ok(match self {
            ScalingParams::Saturated { axis, .. } => ScalingParams::Saturated {
                axis: *axis,
                amplitude: c[0],
                shift: c[1],
                decay: c[2],
                floor: c[3],
            },
            ScalingParams::Simple { axis, .. } => ScalingParams::Simple {
                axis: *axis,
                amplitude: c[0],
                shift: c[1],
                decay: c[2],
            },
            ScalingParams::LogLog { axis, .. } => ScalingParams::LogLog {
                axis: *axis,
                scale: c[0],
                exponent: c[1],
            },
        })
    }

    /// Checks the shape constraints; empty means valid
    /// (A > 0, α > 0, B >= 0, E >= 0, so L > 0, lim L = E, dL/dx < 0).
    pub fn check_shape(&self) -> Vec<ShapeViolation> {
        let mut v = Vec::new();
        if self.coefficients().iter().any(|c| !c.is_finite()) {
            v.push(ShapeViolation::NonFinite);
            return v;
        }
        match *self {
            ScalingParams::Saturated {
                amplitude,
                shift,
                decay,
                floor,
                ..
            } => {
                if amplitude <= 0.0 {
                    v.push(ShapeViolation::StrictPositivity);
                }
                if decay <= 0.0 {
                    v.push(ShapeViolation::MonotonicDecrease);
                }
                if shift < 0.0 {
                    v.push(ShapeViolation::ShiftNegative);
                }
                if floor < 0.0 {
                    v.push(ShapeViolation::IrreducibleErrorNegative);
                }
            }
            ScalingParams::Simple {
                amplitude,
                shift,
                decay,
                ..
            } => {
                if amplitude <= 0.0 {
                    v.push(ShapeViolation::StrictPositivity);
                }
                if decay <= 0.0 {
                    v.push(ShapeViolation::MonotonicDecrease);
                }
                if shift < 0.0 {
                    v.push(ShapeViolation::ShiftNegative);
                }
            }
            ScalingParams::LogLog { scale, .. } => {
                if scale <= 0.0 {
                    v.push(ShapeViolation::StrictPositivity);
                }
            }
        }
        v
    }

    fn require_valid(&self) -> Result<()> {
        let violations = self.check_shape();
        if violations.is_empty() {
            Ok(())
        } else {
            let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            Err(Error::InvalidParams(list.join("; ")))
        }
    }

    /// Evaluates the curve at `x > 0`, validating parameters first.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        self.require_valid()?;
        check_x(x)?;
        Ok(self.evaluate_unchecked(x))
    }

    /// Evaluation without the validity checks, for hot loops that validated
    /// once up front. Computed as `exp(ln A - α·ln(x+B)) + E`.
    #[inline]
    pub fn evaluate_unchecked(&self, x: f64) -> f64 {
        match *self {
            ScalingParams::Saturated {
                amplitude,
                shift,
                decay,
                floor,
                ..
            } => power_term(amplitude, shift, decay, x) + floor,
            ScalingParams::Simple {
                amplitude,
                shift,
                decay,
                ..
            } => power_term(amplitude, shift, decay, x),
            ScalingParams::LogLog {
                scale, exponent, ..
            } => (scale.ln() + exponent * x.ln()).exp(),
        }
    }

    /// Analytic dL/dx at `x > 0`: `-α·A·(x+B)^(-α-1)` or `a·D0·x^(a-1)`.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        self.require_valid()?;
        check_x(x)?;
        Ok(self.derivative_unchecked(x))
    }

    #[inline]
    pub fn derivative_unchecked(&self, x: f64) -> f64 {
        match *self {
            ScalingParams::Saturated {
                amplitude,
                shift,
                decay,
                ..
            }
            | ScalingParams::Simple {
                amplitude,
                shift,
                decay,
                ..
            } => -decay * power_term(amplitude, shift, decay + 1.0, x),
            ScalingParams::LogLog {
                scale, exponent, ..
            } => exponent * (scale.ln() + (exponent - 1.0) * x.ln()).exp(),
        }
    }

    /// Gradient of the prediction with respect to the natural coefficients,
    /// in canonical order. Used for covariance and delta-method intervals.
    pub fn gradient_at(&self, x: f64) -> Vec<f64> {
        match *self {
            ScalingParams::Saturated {
                amplitude,
                shift,
                decay,
                ..
            } => {
                let pw = power_term(1.0, shift, decay, x);
                vec![
                    pw,                                                    // d/dA
                    -decay * power_term(amplitude, shift, decay + 1.0, x), // d/dB
                    -amplitude * (x + shift).ln() * pw,                    // d/dα
                    1.0,                                                   // d/dE
                ]
            }
            ScalingParams::Simple {
                amplitude,
                shift,
                decay,
                ..
            } => {
                let pw = power_term(1.0, shift, decay, x);
                vec![
                    pw,
                    -decay * power_term(amplitude, shift, decay + 1.0, x),
                    -amplitude * (x + shift).ln() * pw,
                ]
            }
            ScalingParams::LogLog {
                scale, exponent, ..
            } => {
                let y = (scale.ln() + exponent * x.ln()).exp();
                vec![y / scale, y * x.ln()]
            }
        }
    }
}

#[inline]
fn power_term(amplitude: f64, shift: f64, decay: f64, x: f64) -> f64 {
    (amplitude.ln() - decay * (x + shift).ln()).exp()
}

fn check_x(x: f64) -> Result<()> {
    if x <= 0.0 || !x.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "x must be finite and > 0, got {x}"
        )));
    }
    Ok(())
}

/// Published coefficient tables print the decay exponent negated; this maps a
/// printed row `(A, B, printed_alpha, E)` to internal params.
pub fn from_published(axis: Axis, a: f64, b: f64, printed_alpha: f64, e: f64) -> ScalingParams {
    ScalingParams::Saturated {
        axis,
        amplitude: a,
        shift: b,
        decay: -printed_alpha,
        floor: e,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 0-shot classification fit published for the contrastive-only model.
    pub fn clip_in1k() -> ScalingParams {
        from_published(Axis::Compute, 57.862, 18.391, -0.227, 0.111)
    }

    /// 0-shot classification fit published for the contrastive+captioning model.
    pub fn mammut_in1k() -> ScalingParams {
        from_published(Axis::Compute, 79.970, 19.111, -0.233, 0.076)
    }

    #[test]
    fn evaluate_published_clip_point() {
        let err = clip_in1k().evaluate(2.14e12).unwrap();
        assert!((err - 0.2029).abs() < 5e-4, "{err}");
        assert!(((1.0 - err) - 0.796).abs() < 5e-3);
    }

    #[test]
    fn evaluate_published_mammut_point() {
        let err = mammut_in1k().evaluate(2.59e12).unwrap();
        assert!((err - 0.1785).abs() < 5e-4, "{err}");
        assert!(((1.0 - err) - 0.820).abs() < 5e-3);
    }

    #[test]
    fn evaluate_unit_coefficients() {
        let p = ScalingParams::Saturated {
            axis: Axis::Compute,
            amplitude: 1.0,
            shift: 0.0,
            decay: 1.0,
            floor: 0.1,
        };
        assert!((p.evaluate(10.0).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn derivative_published_points() {
        let p = clip_in1k();
        let d1 = p.derivative(5e10).unwrap().abs();
        assert!((d1 - 9.85e-13).abs() / 9.85e-13 < 0.01, "{d1:e}");
        let d2 = p.derivative(1e11).unwrap().abs();
        assert!((d2 - 4.21e-13).abs() / 4.21e-13 < 0.01, "{d2:e}");
    }

    #[test]
    fn derivative_reciprocal() {
        let p = ScalingParams::Saturated {
            axis: Axis::Compute,
            amplitude: 1.0,
            shift: 0.0,
            decay: 1.0,
            floor: 0.0,
        };
        assert!((p.derivative(2.0).unwrap() - (-0.25)).abs() < 1e-15);
    }

    #[test]
    fn check_shape_published_ok() {
        assert!(clip_in1k().check_shape().is_empty());
    }

    #[test]
    fn check_shape_negative_decay() {
        let p = ScalingParams::Saturated {
            axis: Axis::Compute,
            amplitude: 1.0,
            shift: 0.0,
            decay: -0.2,
            floor: 0.0,
        };
        let v = p.check_shape();
        assert_eq!(v, vec![ShapeViolation::MonotonicDecrease]);
        assert_eq!(v[0].to_string(), "monotonic decrease violated");
    }

    #[test]
    fn check_shape_negative_floor() {
        let p = ScalingParams::Saturated {
            axis: Axis::Compute,
            amplitude: 1.0,
            shift: 0.0,
            decay: 0.5,
            floor: -0.01,
        };
        let v = p.check_shape();
        assert_eq!(v, vec![ShapeViolation::IrreducibleErrorNegative]);
        assert_eq!(v[0].to_string(), "irreducible error negative");
    }

    #[test]
    fn evaluate_rejects_bad_x_and_params() {
        assert!(clip_in1k().evaluate(0.0).is_err());
        assert!(clip_in1k().evaluate(-1.0).is_err());
        let bad = ScalingParams::Saturated {
            axis: Axis::Compute,
            amplitude: 0.0,
            shift: 0.0,
            decay: 1.0,
            floor: 0.0,
        };
        assert!(bad.evaluate(1.0).is_err());
    }

    #[test]
    fn loglog_is_linear_in_log_space() {
        let p = ScalingParams::LogLog {
            axis: Axis::Compute,
            scale: 1e3,
            exponent: 0.3,
        };
        for &x in &[1.0, 10.0, 1e6, 1e12] {
            let y = p.evaluate(x).unwrap();
            let expected = 1e3_f64.ln() + 0.3 * x.ln();
            assert!((y.ln() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn json_wire_format() {
        let p = clip_in1k();
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("\"form\":\"saturated\""), "{json}");
        assert!(json.contains("\"axis\":\"compute\""), "{json}");
        assert!(json.contains("\"A\":57.862"), "{json}");
        assert!(json.contains("\"alpha\":0.227"), "{json}");
        let back: ScalingParams = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }
}
