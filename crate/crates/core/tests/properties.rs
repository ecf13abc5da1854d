//! Property tests for the library invariants: partition laws, frontier
//! oracles, curve monotonicity, derivative consistency, solver descent, and
//! composition identities.

use proptest::prelude::*;

use scalelaw::analysis;
use scalelaw::frontier::{log_bin_minima, skyline_minima, Axis, FrontierPoint};
use scalelaw::inference;
use scalelaw::powerlaw::{ScalingForm, ScalingParams};
use scalelaw::records::{
    derive_compute, filter_records, parse_records, write_csv, FilterPolicy, MeasurementRecord,
    MetricKind, MetricValue, RecordFormat, Schedule,
};
use scalelaw::solver::{fit_loglog, fit_saturated, FitConfig};

// --- generators ---------------------------------------------------------------

fn arb_points(max_len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec(
        ((-3.0f64..12.0).prop_map(|e| 10f64.powf(e)), 0.0f64..=1.0),
        1..max_len,
    )
}

fn arb_saturated() -> impl Strategy<Value = ScalingParams> {
    // E in [0, 0.2], alpha in [0.1, 0.6], A anchored so the curve stays in (0,1)
    // over x >= 1.
    (0.0f64..0.2, 0.1f64..0.6, 0.05f64..0.7, 0.0f64..5.0).prop_map(
        |(floor, decay, headroom, shift)| ScalingParams::Saturated {
            axis: Axis::Compute,
            amplitude: headroom,
            shift,
            decay,
            floor,
        },
    )
}

fn arb_record() -> impl Strategy<Value = MeasurementRecord> {
    (
        "[a-z][a-z0-9-]{0,12}",
        1u64..1_000_000_000,
        1e-2f64..1e3,
        1e3f64..1e10,
        prop::option::of(1e3f64..1e13),
        prop_oneof![
            Just(Schedule::Cosine),
            Just(Schedule::Const),
            Just(Schedule::ConstCooldown)
        ],
        0.0f64..1.5,
        prop::collection::btree_map(
            "[a-z][a-z0-9_]{0,8}",
            (
                prop_oneof![
                    Just(MetricKind::Accuracy),
                    Just(MetricKind::RecallAt5),
                    Just(MetricKind::Miou),
                    Just(MetricKind::ErrorRate)
                ],
                0.0f64..=1.0,
            )
                .prop_map(|(kind, value)| MetricValue { kind, value }),
            1..4,
        ),
    )
        .prop_map(
            |(id, n_params, gflops, samples, compute, schedule, warmup, metrics)| {
                MeasurementRecord {
                    model_id: id.clone(),
                    family: "clip".into(),
                    dataset_id: "ds".into(),
                    n_params,
                    gflops_per_sample: gflops,
                    samples_seen: samples,
                    compute,
                    schedule,
                    warmup_fraction: warmup,
                    metrics,
                }
            },
        )
}

// --- brute-force oracles --------------------------------------------------------

fn brute_force_bins(points: &[(f64, f64)], n_bins: usize) -> Vec<(f64, f64, usize)> {
    let log_min = points
        .iter()
        .map(|p| p.0.ln())
        .fold(f64::INFINITY, f64::min);
    let log_max = points
        .iter()
        .map(|p| p.0.ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let span = log_max - log_min;
    let mut best: Vec<Option<(f64, f64, usize)>> = vec![None; n_bins];
    for (i, &(x, e)) in points.iter().enumerate() {
        let b = if span <= 0.0 {
            0
        } else {
            (((x.ln() - log_min) / span * n_bins as f64) as usize).min(n_bins - 1)
        };
        let cand = (x, e, i);
        best[b] = Some(match best[b] {
            None => cand,
            Some(cur) => {
                if e < cur.1 || (e == cur.1 && (x < cur.0 || (x == cur.0 && i < cur.2))) {
                    cand
                } else {
                    cur
                }
            }
        });
    }
    let mut out: Vec<_> = best.into_iter().flatten().collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn dominated(points: &[(f64, f64)], q: usize) -> bool {
    let (qx, qe) = points[q];
    points
        .iter()
        .enumerate()
        .any(|(i, &(px, pe))| i != q && px <= qx && pe <= qe && (px < qx || pe < qe))
}

// --- records properties ---------------------------------------------------------

proptest! {
    #[test]
    fn derive_compute_is_multiplicative(
        g in 1e-3f64..1e4,
        d in 1.0f64..1e12,
        k in prop_oneof![Just(2.0f64), Just(10.0), Just(0.5), Just(7.25)],
    ) {
        let rec = |samples: f64| MeasurementRecord {
            model_id: "m".into(),
            family: "f".into(),
            dataset_id: "d".into(),
            n_params: 1,
            gflops_per_sample: g,
            samples_seen: samples,
            compute: None,
            schedule: Schedule::Cosine,
            warmup_fraction: 0.0,
            metrics: Default::default(),
        };
        let lhs = derive_compute(&rec(k * d)).gflops;
        let rhs = k * derive_compute(&rec(d)).gflops;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()));
    }

    #[test]
    fn filter_partitions_preserving_order(
        records in prop::collection::vec(arb_record(), 0..24),
        unique in prop::option::of(1e6f64..1e10),
    ) {
        let policy = FilterPolicy { dataset_unique_samples: unique, ..FilterPolicy::default() };
        let (kept, dropped) = filter_records(records.clone(), &policy);
        prop_assert_eq!(kept.len() + dropped.len(), records.len());

        // Partition: merging back in order-of-appearance reproduces the input.
        let mut ki = kept.iter();
        let mut di = dropped.iter();
        let mut k_next = ki.next();
        let mut d_next = di.next();
        for original in &records {
            if let Some(k) = k_next {
                if k == original {
                    k_next = ki.next();
                    continue;
                }
            }
            if let Some((d, _)) = d_next {
                if d == original {
                    d_next = di.next();
                    continue;
                }
            }
            prop_assert!(false, "record lost or reordered");
        }
        prop_assert!(k_next.is_none() && d_next.is_none());
    }

    #[test]
    fn to_error_is_an_involution_across_kinds(
        kind in prop_oneof![
            Just(MetricKind::Accuracy),
            Just(MetricKind::RecallAt5),
            Just(MetricKind::Miou),
            Just(MetricKind::ErrorRate)
        ],
        value in 0.0f64..=1.0,
    ) {
        let m = MetricValue { kind, value };
        let as_error = MetricValue { kind: MetricKind::ErrorRate, value: m.to_error() };
        prop_assert_eq!(as_error.to_error(), m.to_error());
    }

    #[test]
    fn csv_roundtrip_is_identity(records in prop::collection::vec(arb_record(), 1..12)) {
        // Identities must be distinct for a clean round trip; suffix ids.
        let records: Vec<MeasurementRecord> = records
            .into_iter()
            .enumerate()
            .map(|(i, mut r)| { r.model_id = format!("{}-{i}", r.model_id); r })
            .collect();
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        let back = parse_records(buf.as_slice(), RecordFormat::Csv).unwrap();
        prop_assert_eq!(back, records);
    }
}

// --- frontier properties ----------------------------------------------------------

proptest! {
    #[test]
    fn binning_matches_brute_force(points in arb_points(200), n_bins in 1usize..2000) {
        let got = log_bin_minima(&points, n_bins, Axis::Compute).unwrap();
        let expected = brute_force_bins(&points, n_bins);
        prop_assert_eq!(got.len(), expected.len());
        for (g, e) in got.iter().zip(&expected) {
            prop_assert_eq!((g.x, g.error, g.source_index), *e);
        }
        // Sorted strictly increasing in x.
        for w in got.windows(2) {
            prop_assert!(w[0].x < w[1].x);
        }
    }

    #[test]
    fn skyline_matches_dominance_oracle(points in arb_points(120)) {
        let got = skyline_minima(&points, Axis::Samples).unwrap();
        // Exactly the non-dominated points, modulo duplicate representatives.
        for p in &got {
            prop_assert!(!dominated(&points, p.source_index));
        }
        for (i, &pt) in points.iter().enumerate() {
            let in_front = got.iter().any(|g| (g.x, g.error) == pt);
            prop_assert_eq!(!dominated(&points, i), in_front,
                "point {} misclassified", i);
        }
        // Strictly increasing x, strictly decreasing error.
        for w in got.windows(2) {
            prop_assert!(w[0].x < w[1].x && w[0].error > w[1].error);
        }
    }

    #[test]
    fn skyline_is_idempotent(points in arb_points(120)) {
        let once = skyline_minima(&points, Axis::Samples).unwrap();
        let coords: Vec<(f64, f64)> = once.iter().map(|p| (p.x, p.error)).collect();
        let twice = skyline_minima(&coords, Axis::Samples).unwrap();
        let again: Vec<(f64, f64)> = twice.iter().map(|p| (p.x, p.error)).collect();
        prop_assert_eq!(coords, again);
    }

    #[test]
    fn fine_binning_converges_to_distinct_x_minima(points in arb_points(60)) {
        // With ~1e6 bins and x ratios far above the bin width, each distinct x
        // owns its own bin.
        let got = log_bin_minima(&points, 1_000_000, Axis::Compute).unwrap();
        let mut expected: Vec<(f64, f64, usize)> = Vec::new();
        let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        for &x in &xs {
            let best = points
                .iter()
                .enumerate()
                .filter(|(_, p)| p.0 == x)
                .min_by(|(i, a), (j, b)| a.1.total_cmp(&b.1).then(i.cmp(j)))
                .unwrap();
            expected.push((x, best.1 .1, best.0));
        }
        // Distinct x values may still share a bin when extremely close; allow
        // only exact collisions to collapse by filtering them out up front.
        prop_assume!(
            xs.windows(2).all(|w| w[1] / w[0] > 1.0001),
            "grid too tight for the bin count"
        );
        prop_assert_eq!(got.len(), expected.len());
        for (g, e) in got.iter().zip(&expected) {
            prop_assert_eq!((g.x, g.error, g.source_index), *e);
        }
    }
}

// --- powerlaw properties ------------------------------------------------------------

proptest! {
    #[test]
    fn saturated_curves_decrease(params in arb_saturated(), x1 in 1.0f64..1e12, ratio in 1.001f64..1e4) {
        let x2 = x1 * ratio;
        prop_assert!(params.evaluate(x1).unwrap() > params.evaluate(x2).unwrap());
    }

    #[test]
    fn saturated_limit_is_the_floor(params in arb_saturated()) {
        let (amplitude, shift, decay, floor) = match params {
            ScalingParams::Saturated { amplitude, shift, decay, floor, .. } =>
                (amplitude, shift, decay, floor),
            _ => unreachable!(),
        };
        let _ = shift;
        for k in (6..=30).step_by(6) {
            let x = 10f64.powi(k);
            let excess = params.evaluate(x).unwrap() - floor;
            // One rounding of the tiny power term into the floor's ulps.
            let ulp_slack = f64::EPSILON * floor + f64::MIN_POSITIVE;
            prop_assert!(excess >= 0.0);
            prop_assert!(excess <= amplitude * x.powf(-decay) * 1.01 + ulp_slack);
        }
    }

    #[test]
    fn derivative_matches_central_differences(params in arb_saturated(), x in 10.0f64..1e10) {
        let h = x * 1e-6;
        let numeric = (params.evaluate(x + h).unwrap() - params.evaluate(x - h).unwrap()) / (2.0 * h);
        let analytic = params.derivative(x).unwrap();
        // Relative 1e-6 plus the cancellation the difference quotient cannot
        // avoid once the power term is dwarfed by the floor.
        let cancellation = f64::EPSILON * params.evaluate(x).unwrap().abs() / (2.0 * h);
        let tol = 1e-6 * analytic.abs().max(1e-300) + 8.0 * cancellation;
        prop_assert!(
            (numeric - analytic).abs() < tol,
            "x={x} analytic={analytic:e} numeric={numeric:e}"
        );
    }

    #[test]
    fn loglog_evaluates_linearly_in_log_space(
        scale in 1e-6f64..1e6,
        exponent in -2.0f64..2.0,
        x in 1e-3f64..1e12,
    ) {
        let p = ScalingParams::LogLog { axis: Axis::Compute, scale, exponent };
        let lhs = p.evaluate(x).unwrap().ln();
        let rhs = scale.ln() + exponent * x.ln();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0));
    }
}

// --- solver properties ---------------------------------------------------------------

fn noiseless_frontier(params: &ScalingParams, lo: f64, hi: f64, n: usize) -> Vec<FrontierPoint> {
    analysis::log_design(lo, hi, n)
        .unwrap()
        .into_iter()
        .enumerate()
        .map(|(i, x)| FrontierPoint {
            x,
            error: params.evaluate_unchecked(x),
            source_index: i,
            axis: params.axis(),
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn noiseless_recovery_is_prediction_equivalent(params in arb_saturated()) {
        // x spans 5 decades with B far below min x.
        let points = noiseless_frontier(&params, 1e4, 1e9, 40);
        prop_assume!(points.iter().all(|p| p.error <= 1.0));
        let fit = fit_saturated(&points, ScalingForm::Saturated, &FitConfig::default()).unwrap();
        for pt in &points {
            let predicted = fit.params.evaluate_unchecked(pt.x);
            prop_assert!(
                (predicted - pt.error).abs() < 1e-5,
                "x={:e}: fit {} vs truth {}",
                pt.x, predicted, pt.error
            );
        }
    }

    #[test]
    fn multistart_winner_dominates_each_start(params in arb_saturated(), noise_seed in 0u64..50) {
        let mut points = noiseless_frontier(&params, 1e4, 1e9, 24);
        // Deterministic pseudo-noise so the fit is not exact.
        for (i, p) in points.iter_mut().enumerate() {
            let bump = ((i as f64 * 2654435761.0 + noise_seed as f64).sin()) * 0.004;
            p.error = (p.error + bump).clamp(0.0, 1.0);
        }
        let joint = fit_saturated(&points, ScalingForm::Saturated, &FitConfig::default()).unwrap();
        prop_assume!(joint.converged);

        let starts = [0.1, 0.25, 0.5];
        for (i, &decay) in starts.iter().enumerate() {
            let single = FitConfig {
                starts: Some(vec![ScalingParams::Saturated {
                    axis: Axis::Compute,
                    amplitude: 0.5 * 1e4f64.powf(decay),
                    shift: 0.0,
                    decay,
                    floor: 0.0,
                }]),
                ..FitConfig::default()
            };
            let alone = fit_saturated(&points, ScalingForm::Saturated, &single).unwrap();
            if alone.converged {
                prop_assert!(
                    joint.rss <= alone.rss + 1e-12,
                    "start {i}: joint {} > single {}",
                    joint.rss, alone.rss
                );
            }
        }
    }

    #[test]
    fn loglog_matches_normal_equations_oracle(
        scale_log in -3.0f64..3.0,
        exponent in -1.5f64..1.5,
        seed in 0u64..1000,
    ) {
        // 50 noisy points around the power law, fixed pseudo-noise.
        let points: Vec<(f64, f64)> = (0..50)
            .map(|i| {
                let x = 10f64.powf(i as f64 / 7.0);
                let wobble = ((i as f64 * 0.7 + seed as f64) * 12.9898).sin() * 0.05;
                (x, (scale_log + exponent * x.ln() + wobble).exp())
            })
            .collect();
        let fit = fit_loglog(&points, Axis::Compute).unwrap();

        // Independent oracle: solve the 2x2 normal equations directly.
        let n = points.len() as f64;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for &(x, y) in &points {
            let (lx, ly) = (x.ln(), y.ln());
            sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        }
        let det = n * sxx - sx * sx;
        let slope = (n * sxy - sx * sy) / det;
        let intercept = (sxx * sy - sx * sxy) / det;
        prop_assert!((fit.slope - slope).abs() < 1e-12 * slope.abs().max(1.0));
        prop_assert!((fit.intercept - intercept).abs() < 1e-12 * intercept.abs().max(1.0));
    }
}

// --- inference + analysis properties ----------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn threshold_split_partitions(points in arb_points(80), threshold in 1e-2f64..1e11) {
        let frontier: Vec<FrontierPoint> = points
            .iter()
            .enumerate()
            .map(|(i, &(x, error))| FrontierPoint { x, error, source_index: i, axis: Axis::Compute })
            .collect();
        let (train, holdout) = inference::threshold_split(&frontier, threshold).unwrap();
        prop_assert_eq!(train.len() + holdout.len(), frontier.len());
        prop_assert!(train.iter().all(|p| p.x < threshold));
        prop_assert!(holdout.iter().all(|p| p.x >= threshold));
        // Order preserved within each side.
        for w in train.windows(2) {
            prop_assert!(w[0].source_index < w[1].source_index);
        }
        for w in holdout.windows(2) {
            prop_assert!(w[0].source_index < w[1].source_index);
        }
    }

    #[test]
    fn crossover_is_swap_invariant(pa in arb_saturated(), pb in arb_saturated()) {
        let fit = |params: ScalingParams| scalelaw::solver::FitResult {
            params,
            rss: 0.0,
            n: 10,
            p: 4,
            converged: true,
            start_index: 0,
            residuals: vec![0.0; 10],
            covariance: None,
        };
        let (fa, fb) = (fit(pa), fit(pb));
        let ab = analysis::find_crossover(&fa, &fb, (1.0, 1e12)).unwrap();
        let ba = analysis::find_crossover(&fb, &fa, (1.0, 1e12)).unwrap();
        match (ab, ba) {
            (None, None) => {}
            (Some(a), Some(b)) => {
                prop_assert_eq!(a.x.to_bits(), b.x.to_bits());
                prop_assert_eq!(a.multiple, b.multiple);
                // Sign change across the root.
                let gap = |x: f64| fa.params.evaluate_unchecked(x) - fb.params.evaluate_unchecked(x);
                let (before, after) = (gap(a.x * (1.0 - 2e-6)), gap(a.x * (1.0 + 2e-6)));
                prop_assert!(before * after <= 0.0, "no sign change at {:e}", a.x);
            }
            other => prop_assert!(false, "asymmetric crossover {:?}", other),
        }
    }

    #[test]
    fn chain_equals_manual_composition(
        d0_log in -2.0f64..2.0,
        a_exp in 0.3f64..1.2,
        params in arb_saturated(),
        target in 1e8f64..1e12,
    ) {
        let error_params = match params {
            ScalingParams::Saturated { amplitude, shift, decay, floor, .. } =>
                ScalingParams::Saturated { axis: Axis::Samples, amplitude, shift, decay, floor },
            _ => unreachable!(),
        };
        let mut error_fit = scalelaw::solver::FitResult {
            params: error_params,
            rss: 0.0,
            n: 20,
            p: 4,
            converged: true,
            start_index: 0,
            residuals: vec![0.0; 20],
            covariance: Some(scalelaw::solver::Covariance { dim: 4, rank: 4, data: vec![0.0; 16] }),
        };
        let d0 = 10f64.powf(d0_log);
        let pairs: Vec<(f64, f64)> = (0..8)
            .map(|i| {
                let c = 10f64.powf(6.0 + i as f64);
                (c, d0 * c.powf(a_exp))
            })
            .collect();
        let (trend, rows) =
            analysis::compute_optimal_chain(&pairs, &error_fit, &[target], 0.05).unwrap();

        // Manual composition through an exact fit of the same pairs.
        let manual_trend = fit_loglog(&pairs, Axis::Compute).unwrap();
        let d_opt = manual_trend.params.evaluate(target).unwrap();
        let expected = error_fit.params.evaluate(d_opt).unwrap();
        prop_assert!((rows[0].d_opt - d_opt).abs() <= 1e-9 * d_opt);
        prop_assert!((rows[0].error_interval.y_hat - expected).abs() <= 1e-9);
        prop_assert!((trend.slope - a_exp).abs() < 1e-9);
        error_fit.covariance = None;
        prop_assert!(analysis::compute_optimal_chain(&pairs, &error_fit, &[target], 0.05).is_err());
    }
}
