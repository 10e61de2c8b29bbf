//! Limit-density laws of the real zeros as |q| -> 1, checked on the grids
//! where the counts were frozen against an independent scan oracle.

use ptheta::{
    core_counts, count_zeros, density_sweep, deviations_decreasing, DensityBranch, Interval,
    ParamQ, Precision, E_PI, E_PI_HALF,
};

fn prec() -> Precision {
    Precision::default()
}

#[test]
fn positive_sweep_matches_frozen_counts_and_converges() {
    let grid = [0.9, 0.95, 0.98, 0.99];
    let reports = density_sweep(DensityBranch::Positive, 100.0, &grid, &prec()).unwrap();
    let counts: Vec<u64> = reports.iter().map(|r| r.left_count).collect();
    assert_eq!(counts, vec![14, 28, 72, 146]);

    let predicted = (100.0 / E_PI).ln();
    for r in &reports {
        assert!((r.predicted - predicted).abs() < 1e-14);
        assert_eq!(r.right_count, None);
    }
    // (1-q)*count approaches ln(a/e^pi): deviations shrink along the grid
    // (the first two grid points tie exactly at 1.40, hence non-strict)
    assert!(deviations_decreasing(&reports));
    let last = reports.last().unwrap();
    assert!(last.deviation / predicted < 0.30, "relative deviation {}", last.deviation / predicted);
    assert!(last.deviation / predicted < 0.01);
}

#[test]
fn negative_sweep_matches_frozen_counts_on_both_axes() {
    let grid = [-0.9, -0.95, -0.98];
    let reports = density_sweep(DensityBranch::Negative, 50.0, &grid, &prec()).unwrap();
    let left: Vec<u64> = reports.iter().map(|r| r.left_count).collect();
    let right: Vec<u64> = reports.iter().map(|r| r.right_count.unwrap()).collect();
    assert_eq!(left, vec![11, 23, 58]);
    assert_eq!(right, vec![12, 23, 58]);

    let predicted = (50.0 / E_PI_HALF).ln() / 2.0;
    for r in &reports {
        assert!((r.predicted - predicted).abs() < 1e-14);
        // the two half-axes obey one law; the functional equation ties them
        assert!(r.left_count.abs_diff(r.right_count.unwrap()) <= 2);
    }
    assert!(deviations_decreasing(&reports));
    let last = reports.last().unwrap();
    assert!(last.deviation / predicted < 0.30);
    assert!(last.deviation_right.unwrap() / predicted < 0.30);
}

#[test]
fn core_counts_obey_the_log_bound_up_to_nine_tenths() {
    let p = prec();
    for i in 2..=9u32 {
        let r = i as f64 / 10.0;
        let bound = (std::f64::consts::PI / (1.0 / r).ln()).floor() as u64 + 1;
        let c = core_counts(&ParamQ::real(r).unwrap(), &p).unwrap();
        assert!(c.negative_side <= bound, "core count {} over bound {bound} at q={r}", c.negative_side);
    }
}

#[test]
fn mirrored_interval_pairing_holds_near_minus_one() {
    // count over (0, e^{pi/2}] equals count over [-e^{pi/2}/|q|, 0) up to 1
    let p = prec();
    for qv in [-0.6, -0.8, -0.9] {
        let q = ParamQ::real(qv).unwrap();
        let pos = count_zeros(
            &q,
            Interval { lo: 0.0, hi: E_PI_HALF, include_lo: false, include_hi: true },
            &p,
        )
        .unwrap();
        let mirrored =
            count_zeros(&q, Interval::half_open(-E_PI_HALF / qv.abs(), 0.0), &p).unwrap();
        assert!(pos.abs_diff(mirrored) <= 1, "pair gap at q={qv}: {pos} vs {mirrored}");
    }
}
