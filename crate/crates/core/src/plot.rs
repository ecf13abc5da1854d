//! Standalone SVG rendering of frontiers and fitted curves: log10 x axis,
//! linear error axis, optional confidence bands, deterministic output.

use crate::error::{Error, Result};
use crate::frontier::FrontierPoint;
use crate::inference::predict_ci;
use crate::solver::FitResult;

const PALETTE: [&str; 6] = [
    "#1f6fb2", "#d95f02", "#2a9d4e", "#b03a9c", "#c9a227", "#566573",
];

#[derive(Debug, Clone)]
pub struct PlotOptions {
    pub width: f64,
    pub height: f64,
    /// Explicit x range; `None` spans the data.
    pub x_range: Option<(f64, f64)>,
    /// Explicit y range; `None` spans the data with padding.
    pub y_range: Option<(f64, f64)>,
    /// Shade delta-method confidence bands around each curve that has
    /// covariance attached.
    pub band: bool,
    pub alpha: f64,
    /// Samples per curve polyline.
    pub curve_samples: usize,
    pub x_label: String,
    pub y_label: String,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            width: 820.0,
            height: 520.0,
            x_range: None,
            y_range: None,
            band: false,
            alpha: 0.05,
            curve_samples: 200,
            x_label: "compute (GFLOPs)".into(),
            y_label: "error rate".into(),
        }
    }
}

struct Frame {
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
    log_lo: f64,
    log_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn sx(&self, x: f64) -> f64 {
        let t = (x.log10() - self.log_lo) / (self.log_hi - self.log_lo);
        self.left + t * (self.right - self.left)
    }

    fn sy(&self, y: f64) -> f64 {
        let t = (y - self.y_lo) / (self.y_hi - self.y_lo);
        self.bottom - t * (self.bottom - self.top)
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

/// Renders labeled fits and point sets into a standalone SVG document.
///
/// Curves are sampled at `curve_samples` log-spaced x values; vertical
/// gridlines sit on the integer decades inside the range. Output bytes are a
/// pure function of the input.
pub fn emit_plot(
    fits: &[(String, FitResult)],
    point_sets: &[(String, Vec<FrontierPoint>)],
    options: &PlotOptions,
) -> Result<String> {
    if fits.is_empty() && point_sets.is_empty() {
        return Err(Error::EmptyInput("plot"));
    }
    if options.curve_samples < 2 {
        return Err(Error::InvalidArgument("curve_samples must be >= 2".into()));
    }

    // Establish the x range.
    let (x_lo, x_hi) = match options.x_range {
        Some((lo, hi)) => {
            if !(lo > 0.0 && hi > lo) {
                return Err(Error::InvalidArgument(format!(
                    "invalid x range [{lo}, {hi}]"
                )));
            }
            (lo, hi)
        }
        None => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (_, pts) in point_sets {
                for p in pts {
                    lo = lo.min(p.x);
                    hi = hi.max(p.x);
                }
            }
            if !lo.is_finite() || !hi.is_finite() || hi <= lo {
                return Err(Error::InvalidArgument(
                    "cannot infer x range; pass one explicitly".into(),
                ));
            }
            (lo, hi)
        }
    };

    // Sample the curves.
    type Band = Vec<(f64, f64, f64)>;
    type Curve<'c> = (String, &'c str, Vec<(f64, f64)>, Option<Band>);
    let mut curves: Vec<Curve> = Vec::new();
    let n = options.curve_samples;
    let (la, lb) = (x_lo.ln(), x_hi.ln());
    for (idx, (label, fit)) in fits.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let mut samples = Vec::with_capacity(n);
        let mut band = if options.band && fit.covariance.is_some() {
            Some(Vec::with_capacity(n))
        } else {
            None
        };
        for i in 0..n {
            let x = (la + (lb - la) * i as f64 / (n - 1) as f64).exp();
            let y = fit.params.evaluate(x)?;
            samples.push((x, y));
            if let Some(rows) = band.as_mut() {
                let ci = predict_ci(fit, x, options.alpha)?;
                rows.push((x, ci.lo, ci.hi));
            }
        }
        curves.push((label.clone(), color, samples, band));
    }

    // Establish the y range.
    let (y_lo, y_hi) = match options.y_range {
        Some((lo, hi)) => {
            if !lo.is_finite() || !hi.is_finite() || hi <= lo {
                return Err(Error::InvalidArgument(format!(
                    "invalid y range [{lo}, {hi}]"
                )));
            }
            (lo, hi)
        }
        None => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (_, _, samples, band) in &curves {
                for &(_, y) in samples {
                    lo = lo.min(y);
                    hi = hi.max(y);
                }
                if let Some(rows) = band {
                    for &(_, b_lo, b_hi) in rows {
                        lo = lo.min(b_lo);
                        hi = hi.max(b_hi);
                    }
                }
            }
            for (_, pts) in point_sets {
                for p in pts {
                    lo = lo.min(p.error);
                    hi = hi.max(p.error);
                }
            }
            let pad = ((hi - lo) * 0.08).max(1e-6);
            ((lo - pad).max(0.0), hi + pad)
        }
    };

    let frame = Frame {
        left: 64.0,
        right: options.width - 24.0,
        top: 24.0,
        bottom: options.height - 48.0,
        log_lo: x_lo.log10(),
        log_hi: x_hi.log10(),
        y_lo,
        y_hi,
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"12\">\n",
        w = options.width,
        h = options.height
    ));
    svg.push_str(&format!(
        "<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n",
        options.width, options.height
    ));

    // Decade gridlines on integer powers of ten strictly right of the left
    // edge (the left edge is the axis itself).
    let first_decade = frame.log_lo.floor() as i64 + 1;
    let last_decade = frame.log_hi.floor() as i64;
    for d in first_decade..=last_decade {
        let x = frame.sx(10f64.powi(d as i32));
        svg.push_str(&format!(
            "<line class=\"gridline\" x1=\"{x}\" y1=\"{t}\" x2=\"{x}\" y2=\"{b}\" \
stroke=\"#dddddd\"/>\n",
            x = fmt(x),
            t = fmt(frame.top),
            b = fmt(frame.bottom)
        ));
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\" fill=\"#444444\">1e{d}</text>\n",
            x = fmt(x),
            y = fmt(frame.bottom + 16.0)
        ));
    }

    // Horizontal ticks: 5 evenly spaced y values.
    for i in 0..=4 {
        let y = y_lo + (y_hi - y_lo) * i as f64 / 4.0;
        let sy = frame.sy(y);
        svg.push_str(&format!(
            "<line class=\"ytick\" x1=\"{l}\" y1=\"{sy}\" x2=\"{r}\" y2=\"{sy}\" \
stroke=\"#eeeeee\"/>\n",
            l = fmt(frame.left),
            r = fmt(frame.right),
            sy = fmt(sy)
        ));
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\" text-anchor=\"end\" fill=\"#444444\">{v:.3}</text>\n",
            x = fmt(frame.left - 6.0),
            y = fmt(sy + 4.0),
            v = y
        ));
    }

    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"#222222\"/>\n\
<line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"#222222\"/>\n",
        l = fmt(frame.left),
        r = fmt(frame.right),
        t = fmt(frame.top),
        b = fmt(frame.bottom)
    ));
    svg.push_str(&format!(
        "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\" fill=\"#222222\">{}</text>\n",
        xml_escape(&options.x_label),
        x = fmt((frame.left + frame.right) / 2.0),
        y = fmt(options.height - 10.0)
    ));
    svg.push_str(&format!(
        "<text x=\"14\" y=\"{y}\" transform=\"rotate(-90 14 {y})\" text-anchor=\"middle\" \
fill=\"#222222\">{}</text>\n",
        xml_escape(&options.y_label),
        y = fmt((frame.top + frame.bottom) / 2.0)
    ));

    // Confidence bands under the curves.
    for (_, color, _, band) in &curves {
        if let Some(rows) = band {
            let mut path = String::from("M");
            for (x, _, hi) in rows {
                path.push_str(&format!("{},{} ", fmt(frame.sx(*x)), fmt(frame.sy(*hi))));
            }
            for (x, lo, _) in rows.iter().rev() {
                path.push_str(&format!("L{},{} ", fmt(frame.sx(*x)), fmt(frame.sy(*lo))));
            }
            path.push('Z');
            svg.push_str(&format!(
                "<path class=\"band\" d=\"{path}\" fill=\"{color}\" opacity=\"0.15\"/>\n"
            ));
        }
    }

    // Scatter points.
    for (idx, (_, pts)) in point_sets.iter().enumerate() {
        let color = PALETTE[(fits.len() + idx) % PALETTE.len()];
        for p in pts {
            if p.x < x_lo || p.x > x_hi {
                continue;
            }
            svg.push_str(&format!(
                "<circle class=\"pt\" cx=\"{cx}\" cy=\"{cy}\" r=\"3\" fill=\"{color}\" \
opacity=\"0.7\"/>\n",
                cx = fmt(frame.sx(p.x)),
                cy = fmt(frame.sy(p.error))
            ));
        }
    }

    // Curves.
    for (_, color, samples, _) in &curves {
        let pts: Vec<String> = samples
            .iter()
            .map(|&(x, y)| format!("{},{}", fmt(frame.sx(x)), fmt(frame.sy(y))))
            .collect();
        svg.push_str(&format!(
            "<polyline class=\"curve\" points=\"{}\" fill=\"none\" stroke=\"{color}\" \
stroke-width=\"2\"/>\n",
            pts.join(" ")
        ));
    }

    // Legend.
    let mut legend_y = frame.top + 8.0;
    for (label, color, _, _) in &curves {
        svg.push_str(&format!(
            "<line x1=\"{x1}\" y1=\"{y}\" x2=\"{x2}\" y2=\"{y}\" stroke=\"{color}\" \
stroke-width=\"2\"/><text x=\"{tx}\" y=\"{ty}\" fill=\"#222222\">{}</text>\n",
            xml_escape(label),
            x1 = fmt(frame.right - 150.0),
            x2 = fmt(frame.right - 126.0),
            y = fmt(legend_y),
            tx = fmt(frame.right - 120.0),
            ty = fmt(legend_y + 4.0)
        ));
        legend_y += 18.0;
    }
    for (idx, (label, _)) in point_sets.iter().enumerate() {
        let color = PALETTE[(fits.len() + idx) % PALETTE.len()];
        svg.push_str(&format!(
            "<circle cx=\"{cx}\" cy=\"{y}\" r=\"3\" fill=\"{color}\"/>\
<text x=\"{tx}\" y=\"{ty}\" fill=\"#222222\">{}</text>\n",
            xml_escape(label),
            cx = fmt(frame.right - 138.0),
            y = fmt(legend_y),
            tx = fmt(frame.right - 120.0),
            ty = fmt(legend_y + 4.0)
        ));
        legend_y += 18.0;
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

/// CSV of curve samples with their intervals: `x,y_hat,lo,hi`, values exactly
/// as [`predict_ci`] returns them.
pub fn emit_curve_csv(fit: &FitResult, x_grid: &[f64], alpha: f64) -> Result<String> {
    if x_grid.is_empty() {
        return Err(Error::EmptyInput("x_grid"));
    }
    let mut s = String::from("x,y_hat,lo,hi\n");
    for &x in x_grid {
        let ci = predict_ci(fit, x, alpha)?;
        s.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e}\n",
            ci.x, ci.y_hat, ci.lo, ci.hi
        ));
    }
    Ok(s)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
