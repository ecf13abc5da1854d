//! Minimal-error frontier extraction.
//!
//! Two reductions of a measurement cloud to the points worth fitting:
//!
//! * [`log_bin_minima`] — split the x range into logarithmically spaced bins
//!   and keep the lowest-error point of each non-empty bin.
//! * [`skyline_minima`] — keep exactly the non-dominated points, where `p`
//!   dominates `q` iff `p.x <= q.x` and `p.error <= q.error` with at least
//!   one strict inequality.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which resource the x coordinate measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Total pre-training compute in GFLOPs.
    Compute,
    /// Image-text samples seen.
    Samples,
}

impl Axis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Axis::Compute => "compute",
            Axis::Samples => "samples",
        }
    }
}

/// A point surviving minimal-error selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub x: f64,
    pub error: f64,
    /// Index into the originating point list.
    pub source_index: usize,
    pub axis: Axis,
}

/// Default bin count for compute-axis frontier extraction.
pub const DEFAULT_N_BINS: usize = 1500;

fn check_points(points: &[(f64, f64)], what: &'static str) -> Result<()> {
    if points.is_empty() {
        return Err(Error::EmptyInput(what));
    }
    for (i, &(x, _)) in points.iter().enumerate() {
        if x <= 0.0 || !x.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "point {i}: x must be finite and > 0, got {x}"
            )));
        }
    }
    Ok(())
}

/// Per-bin minima over `n_bins` logarithmically spaced intervals spanning
/// `[min x, max x]`. Ties inside a bin prefer smaller x, then smaller index.
/// The max-x point belongs to the last bin (right edge closed).
pub fn log_bin_minima(
    points: &[(f64, f64)],
    n_bins: usize,
    axis: Axis,
) -> Result<Vec<FrontierPoint>> {
    check_points(points, "log_bin_minima")?;
    if n_bins == 0 {
        return Err(Error::InvalidArgument("n_bins must be >= 1".into()));
    }

    let log_min = points
        .iter()
        .map(|p| p.0.ln())
        .fold(f64::INFINITY, f64::min);
    let log_max = points
        .iter()
        .map(|p| p.0.ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let span = log_max - log_min;

    let bin_of = |x: f64| -> usize {
        if span <= 0.0 {
            return 0;
        }
        let raw = ((x.ln() - log_min) / span * n_bins as f64) as usize;
        raw.min(n_bins - 1)
    };

    let mut best: Vec<Option<(f64, f64, usize)>> = vec![None; n_bins];
    for (i, &(x, error)) in points.iter().enumerate() {
        let b = bin_of(x);
        let replace = match best[b] {
            None => true,
            Some((bx, berr, bi)) => {
                error < berr || (error == berr && (x < bx || (x == bx && i < bi)))
            }
        };
        if replace {
            best[b] = Some((x, error, i));
        }
    }

    let mut out: Vec<FrontierPoint> = best
        .into_iter()
        .flatten()
        .map(|(x, error, source_index)| FrontierPoint {
            x,
            error,
            source_index,
            axis,
        })
        .collect();
    out.sort_by(|a, b| a.x.total_cmp(&b.x));
    Ok(out)
}

/// Non-dominated selection: keeps points no other point beats on both
/// coordinates. Exact duplicates keep the smallest source index. Output is
/// strictly increasing in x and strictly decreasing in error.
pub fn skyline_minima(points: &[(f64, f64)], axis: Axis) -> Result<Vec<FrontierPoint>> {
    check_points(points, "skyline_minima")?;

    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .0
            .total_cmp(&points[b].0)
            .then(points[a].1.total_cmp(&points[b].1))
            .then(a.cmp(&b))
    });

    let mut out = Vec::new();
    let mut best_error = f64::INFINITY;
    for i in order {
        let (x, error) = points[i];
        if error < best_error {
            out.push(FrontierPoint {
                x,
                error,
                source_index: i,
                axis,
            });
            best_error = error;
        }
    }
    Ok(out)
}

/// Frontier CSV schema: `x,error,source_index,axis`.
pub fn frontier_to_csv(points: &[FrontierPoint]) -> String {
    let mut s = String::from("x,error,source_index,axis\n");
    for p in points {
        s.push_str(&format!(
            "{:.16e},{:.16e},{},{}\n",
            p.x,
            p.error,
            p.source_index,
            p.axis.as_str()
        ));
    }
    s
}

/// Parses the `x,error[,source_index[,axis]]` CSV produced by
/// [`frontier_to_csv`] (extra columns ignored, header required).
pub fn frontier_from_csv(text: &str, default_axis: Axis) -> Result<Vec<FrontierPoint>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or(Error::EmptyInput("frontier csv"))?
        .trim();
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let find = |name: &str| cols.iter().position(|c| *c == name);
    let (xi, ei) = match (find("x"), find("error")) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::ParseInput(
                "frontier csv needs 'x' and 'error' columns".into(),
            ))
        }
    };
    let si = find("source_index");
    let ai = find("axis");

    let mut out = Vec::new();
    for (row_i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row_no = row_i + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |i: usize, name: &str| -> Result<&str> {
            fields.get(i).copied().ok_or_else(|| Error::ParseRow {
                row: row_no,
                message: format!("missing column {name}"),
            })
        };
        let parse_f = |raw: &str, name: &str| -> Result<f64> {
            raw.parse().map_err(|_| Error::ParseRow {
                row: row_no,
                message: format!("column {name}: cannot parse '{raw}'"),
            })
        };
        let x = parse_f(get(xi, "x")?, "x")?;
        let error = parse_f(get(ei, "error")?, "error")?;
        if x <= 0.0 || !x.is_finite() {
            return Err(Error::ParseRow {
                row: row_no,
                message: format!("x must be > 0, got {x}"),
            });
        }
        let source_index = match si {
            Some(i) => get(i, "source_index")?.parse().unwrap_or(row_i),
            None => row_i,
        };
        let axis = match ai {
            Some(i) => match get(i, "axis")? {
                "compute" => Axis::Compute,
                "samples" => Axis::Samples,
                other => {
                    return Err(Error::ParseRow {
                        row: row_no,
                        message: format!("unknown axis '{other}'"),
                    })
                }
            },
            None => default_axis,
        };
        out.push(FrontierPoint {
            x,
            error,
            source_index,
            axis,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("frontier csv"));
    }
    Ok(out)
}
