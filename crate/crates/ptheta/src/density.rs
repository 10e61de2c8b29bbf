//! Real-zero counts over intervals and the limit-density laws near |q| = 1.
//!
//! For q in (0,1) the real zeros accumulate on (-inf, -e^pi] and their
//! normalized count (1-q)*Z over [-a, -e^pi] tends to ln(a/e^pi).  For q in
//! (-1,0) both half-axes carry zeros beyond e^{pi/2} and the normalized
//! counts (1+q)*Z tend to ln(a/e^{pi/2})/2 on each side.  This module counts
//! zeros with explicit endpoint handling, reports normalized counts against
//! the predicted limits, and probes denseness through the functional-equation
//! ladder x_{s+1} = x_s / q seeded at a double zero.

use crate::error::{Error, Result};
use crate::num::{cplx, ParamQ, Precision};
use crate::series::evaluate;
use crate::spectrum::{real_spectrum_negative, real_spectrum_positive, E_PI, E_PI_HALF};
use crate::zeros::{real_zeros_in_interval, refine_zero};
use rug::ops::CompleteRound;
use rug::Float;

/// A bounded real interval with explicit endpoint inclusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub include_lo: bool,
    pub include_hi: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, include_lo: true, include_hi: true }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, include_lo: false, include_hi: false }
    }

    /// [lo, hi)
    pub fn half_open(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, include_lo: true, include_hi: false }
    }

    fn validate(&self) -> Result<()> {
        if !self.lo.is_finite() || !self.hi.is_finite() || self.lo > self.hi {
            return Err(Error::InvalidParam(format!(
                "interval [{}, {}] must be finite with lo <= hi",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

/// Zero counts in the fixed core next to the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoreCounts {
    /// q > 0: zeros in [-e^pi, 0).  q < 0: zeros in [-e^{pi/2}, 0).
    pub negative_side: u64,
    /// q < 0 only: zeros in (0, e^{pi/2}].
    pub positive_side: Option<u64>,
}

/// Which sign of q a density sweep walks toward |q| = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityBranch {
    Positive,
    Negative,
}

/// Zero counts over [-a, ...] plus their normalized comparison against the
/// limit-density prediction for one parameter value.
#[derive(Debug, Clone)]
pub struct DensityReport {
    pub q: f64,
    pub a: f64,
    pub core: CoreCounts,
    /// q > 0: zeros in [-a, -e^pi].  q < 0: zeros in [-a, -e^{pi/2}].
    pub left_count: u64,
    /// q < 0 only: zeros in [e^{pi/2}, a].
    pub right_count: Option<u64>,
    /// left_count * (1 - q) for q > 0, left_count * (1 + q) for q < 0.
    pub normalized: f64,
    /// ln(a/e^pi) for q > 0, ln(a/e^{pi/2})/2 for q < 0.
    pub predicted: f64,
    /// |normalized - predicted|
    pub deviation: f64,
    pub normalized_right: Option<f64>,
    pub deviation_right: Option<f64>,
}

/// One point x_s = y/q^s of a denseness ladder with theta's value there.
#[derive(Debug, Clone)]
pub struct LadderRung {
    pub s: u32,
    pub x: f64,
    pub theta: f64,
}

/// Ladder rungs from a double zero and the real zeros they bracket.
#[derive(Debug, Clone)]
pub struct DenseProbe {
    pub k: u32,
    pub branch: DensityBranch,
    pub q: f64,
    pub a: f64,
    /// |theta(q, y/q) - 1|; the functional equation makes the value exactly 1
    /// at an exact double zero y.
    pub unit_gap: f64,
    pub rungs: Vec<LadderRung>,
    /// One bracketed zero per sign change between ladder neighbors whose gap
    /// lies inside the branch's density support, ascending.
    pub zeros: Vec<f64>,
    /// Widest ladder gap inside the density support.
    pub max_gap: f64,
    /// (1 - q) * a on the positive branch, (1 - q^2) * a on the negative
    /// branch where ladder neighbors on one axis are two steps apart.
    pub gap_bound: f64,
}

fn endpoint_tol(x: f64) -> f64 {
    1e-9 * (1.0 + x.abs())
}

/// Raise the working precision as |q| approaches 1: neighboring zeros shrink
/// together like (1 - |q|) * |x|, so sign resolution needs the extra bits.
/// The refinement target stays near the caller's: far below 1e-12 it would
/// dip under the cancellation noise of near-1 evaluations and stall Newton.
fn scan_precision(q: &ParamQ, prec: &Precision) -> Precision {
    let gap = (1.0 - q.abs()).max(1e-6);
    let extra = (2.0 * (1.0 / gap).log2()).ceil() as u32;
    Precision {
        mantissa_bits: prec.mantissa_bits.max(96).max(53 + extra),
        target_eps: prec.target_eps.clamp(1e-12, 1e-10),
    }
}

/// Multiplicity at a single point: 0 unless the point is itself a zero.
fn zeros_at_point(q: &ParamQ, x: f64, prec: &Precision) -> Result<u64> {
    let tol = endpoint_tol(x);
    let z0 = cplx(prec.mantissa_bits.max(96), x, 0.0);
    match refine_zero(q, &z0, prec) {
        Ok(rec) => {
            let rx = rec.z.real().to_f64();
            Ok(if (rx - x).abs() <= tol { u64::from(rec.multiplicity) } else { 0 })
        }
        Err(Error::DoubleZeroSuspected { z_re, .. }) => {
            Ok(if (z_re - x).abs() <= tol { 2 } else { 0 })
        }
        Err(_) => Ok(0),
    }
}

/// Number of real zeros of theta(q, .) in the interval, with multiplicity.
///
/// A zero within 1e-9 * (1 + |endpoint|) of an endpoint counts iff that
/// endpoint is included; interior zeros always count.
pub fn count_zeros(q: &ParamQ, j: Interval, prec: &Precision) -> Result<u64> {
    q.require_real()?;
    q.require_nonzero()?;
    j.validate()?;
    if j.lo == j.hi {
        if !(j.include_lo && j.include_hi) {
            return Ok(0);
        }
        return zeros_at_point(q, j.lo, prec);
    }
    let sprec = scan_precision(q, prec);
    let tol_lo = endpoint_tol(j.lo);
    let tol_hi = endpoint_tol(j.hi);
    let found = real_zeros_in_interval(q, j.lo - tol_lo, j.hi + tol_hi, &sprec)?;
    let mut n = 0u64;
    for rec in &found {
        let x = rec.z.real().to_f64();
        let m = u64::from(rec.multiplicity);
        if (x - j.lo).abs() <= tol_lo {
            if j.include_lo {
                n += m;
            }
        } else if (x - j.hi).abs() <= tol_hi {
            if j.include_hi {
                n += m;
            }
        } else if j.lo < x && x < j.hi {
            n += m;
        }
    }
    Ok(n)
}

/// Zero counts over the sign-appropriate core next to the origin:
/// [-e^pi, 0) for q > 0; [-e^{pi/2}, 0) and (0, e^{pi/2}] for q < 0.
pub fn core_counts(q: &ParamQ, prec: &Precision) -> Result<CoreCounts> {
    let qr = q.require_real()?;
    q.require_nonzero()?;
    if qr > 0.0 {
        let neg = count_zeros(q, Interval::half_open(-E_PI, 0.0), prec)?;
        Ok(CoreCounts { negative_side: neg, positive_side: None })
    } else {
        let neg = count_zeros(q, Interval::half_open(-E_PI_HALF, 0.0), prec)?;
        let pos = count_zeros(
            q,
            Interval { lo: 0.0, hi: E_PI_HALF, include_lo: false, include_hi: true },
            prec,
        )?;
        Ok(CoreCounts { negative_side: neg, positive_side: Some(pos) })
    }
}

/// Zeros in [-a, -e^pi] for q in (0, 1).
pub fn tail_count(q: &ParamQ, a: f64, prec: &Precision) -> Result<u64> {
    let qr = q.require_real()?;
    if qr <= 0.0 {
        return Err(Error::InvalidParam(format!("tail_count needs q in (0,1), got {qr}")));
    }
    if !a.is_finite() || a < E_PI {
        return Err(Error::InvalidParam(format!("tail bound a = {a} must be >= e^pi = {E_PI}")));
    }
    count_zeros(q, Interval::closed(-a, -E_PI), prec)
}

/// Zeros in [-a, -e^{pi/2}] and in [e^{pi/2}, a] for q in (-1, 0).
pub fn tail_counts_two_sided(q: &ParamQ, a: f64, prec: &Precision) -> Result<(u64, u64)> {
    let qr = q.require_real()?;
    if qr >= 0.0 {
        return Err(Error::InvalidParam(format!(
            "tail_counts_two_sided needs q in (-1,0), got {qr}"
        )));
    }
    if !a.is_finite() || a < E_PI_HALF {
        return Err(Error::InvalidParam(format!(
            "tail bound a = {a} must be >= e^(pi/2) = {E_PI_HALF}"
        )));
    }
    let n = count_zeros(q, Interval::closed(-a, -E_PI_HALF), prec)?;
    let p = count_zeros(q, Interval::closed(E_PI_HALF, a), prec)?;
    Ok((n, p))
}

/// Counts and normalized-density comparison for one (q, a).
pub fn density_report(q: &ParamQ, a: f64, prec: &Precision) -> Result<DensityReport> {
    let qr = q.require_real()?;
    q.require_nonzero()?;
    let core = core_counts(q, prec)?;
    if qr > 0.0 {
        let ell = tail_count(q, a, prec)?;
        let normalized = (1.0 - qr) * ell as f64;
        let predicted = (a / E_PI).ln();
        Ok(DensityReport {
            q: qr,
            a,
            core,
            left_count: ell,
            right_count: None,
            normalized,
            predicted,
            deviation: (normalized - predicted).abs(),
            normalized_right: None,
            deviation_right: None,
        })
    } else {
        let (n, p) = tail_counts_two_sided(q, a, prec)?;
        let scale = 1.0 + qr;
        let normalized = scale * n as f64;
        let normalized_right = scale * p as f64;
        let predicted = (a / E_PI_HALF).ln() / 2.0;
        Ok(DensityReport {
            q: qr,
            a,
            core,
            left_count: n,
            right_count: Some(p),
            normalized,
            predicted,
            deviation: (normalized - predicted).abs(),
            normalized_right: Some(normalized_right),
            deviation_right: Some((normalized_right - predicted).abs()),
        })
    }
}

/// Density reports over a grid of q values walking toward |q| = 1.
///
/// Reports come back in input order.  As |q| grows the deviations should
/// shrink toward 0; that is a trend over the grid tail, not a per-point
/// tolerance, and a single-point grid carries no trend at all.  Check with
/// [`deviations_decreasing`].
pub fn density_sweep(
    branch: DensityBranch,
    a: f64,
    q_grid: &[f64],
    prec: &Precision,
) -> Result<Vec<DensityReport>> {
    if q_grid.is_empty() {
        return Err(Error::InvalidParam("density sweep needs a nonempty q grid".into()));
    }
    let mut out = Vec::with_capacity(q_grid.len());
    for &qv in q_grid {
        let sign_ok = match branch {
            DensityBranch::Positive => qv > 0.0,
            DensityBranch::Negative => qv < 0.0,
        };
        if !sign_ok {
            return Err(Error::InvalidParam(format!(
                "grid point {qv} does not lie on the {branch:?} side"
            )));
        }
        let q = ParamQ::real(qv)?;
        out.push(density_report(&q, a, prec)?);
    }
    Ok(out)
}

/// True when deviations never increase from one report to the next (both
/// sides for two-sided reports).  Vacuously true for a single report.
pub fn deviations_decreasing(reports: &[DensityReport]) -> bool {
    let left = reports.windows(2).all(|w| w[1].deviation <= w[0].deviation + 1e-12);
    let right = reports.windows(2).all(|w| match (w[0].deviation_right, w[1].deviation_right) {
        (Some(a), Some(b)) => b <= a + 1e-12,
        (None, None) => true,
        _ => false,
    });
    left && right
}

fn theta_real_at(q: &ParamQ, x: &Float, eprec: &Precision) -> Result<Float> {
    let bits = eprec.mantissa_bits;
    let z = rug::Complex::with_val(bits, (x.clone(), Float::new(bits)));
    Ok(evaluate(q, &z, eprec)?.value.real().clone())
}

/// Bisect theta(q, .) on [lo, hi] given opposite signs at the ends.
fn bisect_theta_real(q: &ParamQ, lo: f64, hi: f64, eprec: &Precision) -> Result<f64> {
    let bits = eprec.mantissa_bits;
    let mut a = Float::with_val(bits, lo);
    let mut b = Float::with_val(bits, hi);
    let sa = theta_real_at(q, &a, eprec)?.is_sign_negative();
    let scale = lo.abs().max(hi.abs());
    for _ in 0..90 {
        let m = (&a + &b).complete(bits) / 2u32;
        let vm = theta_real_at(q, &m, eprec)?;
        if vm.is_zero() {
            return Ok(m.to_f64());
        }
        if vm.is_sign_negative() == sa {
            a = m;
        } else {
            b = m;
        }
        if (&b - &a).complete(64).to_f64().abs() <= 1e-18 * scale {
            break;
        }
    }
    Ok(((&a + &b).complete(bits) / 2u32).to_f64())
}

/// Walk the ladder x_s = y/q^s from the k-th double zero (q, y) and bracket
/// the real zeros it pins down inside the branch's density support.
///
/// On the positive branch theta is exactly 1 at x_1 and alternates sign along
/// the rungs (negative at even s >= 2, positive at odd s >= 3) once k is
/// large; a violated alternation aborts with `SignPatternViolated`, which
/// flags k as too small rather than a numerical fault.  On the negative
/// branch the rungs alternate between the two half-axes and zeros are
/// bracketed between same-axis neighbors, two ladder steps apart.
pub fn dense_zero_probe(
    k: u32,
    branch: DensityBranch,
    a: f64,
    prec: &Precision,
) -> Result<DenseProbe> {
    if k == 0 {
        return Err(Error::InvalidParam("ladder probe needs k >= 1".into()));
    }
    let floor = match branch {
        DensityBranch::Positive => E_PI,
        DensityBranch::Negative => E_PI_HALF,
    };
    if !a.is_finite() || a < floor {
        return Err(Error::InvalidParam(format!("probe bound a = {a} must be >= {floor}")));
    }
    let chain = match branch {
        DensityBranch::Positive => real_spectrum_positive(k, prec)?,
        DensityBranch::Negative => real_spectrum_negative(k, prec)?,
    };
    let sp = chain
        .iter()
        .find(|p| p.index == Some(k))
        .ok_or(Error::MissedIndex { k: k as usize })?;
    let eprec = scan_precision(&sp.q, prec);
    let bits = eprec.mantissa_bits;
    let q_re = sp.q.re_f64();
    let qf = Float::with_val(bits, sp.q.as_cplx().real());
    let y = Float::with_val(bits, sp.y.real());

    // rungs x_s = y / q^s while |x_s| <= a
    let mut rungs: Vec<LadderRung> = Vec::new();
    let mut x = y.clone();
    for s in 1..100_000u32 {
        x = (&x / &qf).complete(bits);
        let xa = x.to_f64();
        if xa.abs() > a {
            break;
        }
        let th = theta_real_at(&sp.q, &x, &eprec)?.to_f64();
        rungs.push(LadderRung { s, x: xa, theta: th });
    }
    let unit_gap = match rungs.first() {
        Some(r0) if r0.s == 1 => (r0.theta - 1.0).abs(),
        _ => {
            let x1 = (&y / &qf).complete(bits);
            (theta_real_at(&sp.q, &x1, &eprec)?.to_f64() - 1.0).abs()
        }
    };

    if branch == DensityBranch::Positive {
        for r in &rungs {
            let want_negative = r.s >= 2 && r.s % 2 == 0;
            let want_positive = r.s >= 3 && r.s % 2 == 1;
            if (want_negative && r.theta >= 0.0) || (want_positive && r.theta <= 0.0) {
                return Err(Error::SignPatternViolated { s: r.s as usize });
            }
        }
    }

    // same-axis neighbors are 1 ladder step apart on the positive branch and
    // 2 on the negative branch, where consecutive rungs swap half-axes
    let stride = match branch {
        DensityBranch::Positive => 1,
        DensityBranch::Negative => 2,
    };
    let in_support = |x: f64| -> bool {
        match branch {
            DensityBranch::Positive => (-a..=-E_PI).contains(&x),
            DensityBranch::Negative => x.abs() >= E_PI_HALF && x.abs() <= a,
        }
    };
    let mut zeros: Vec<f64> = Vec::new();
    let mut max_gap = 0.0f64;
    for i in 0..rungs.len().saturating_sub(stride) {
        let (near, far) = (&rungs[i], &rungs[i + stride]);
        if !(in_support(near.x) && in_support(far.x)) {
            continue;
        }
        let gap = (far.x - near.x).abs();
        max_gap = max_gap.max(gap);
        if (near.theta < 0.0) != (far.theta < 0.0) {
            let (lo, hi) = if near.x < far.x { (near.x, far.x) } else { (far.x, near.x) };
            zeros.push(bisect_theta_real(&sp.q, lo, hi, &eprec)?);
        }
    }
    zeros.sort_by(|u, v| u.partial_cmp(v).unwrap());

    let gap_bound = match branch {
        DensityBranch::Positive => (1.0 - q_re) * a,
        DensityBranch::Negative => (1.0 - q_re * q_re) * a,
    };
    Ok(DenseProbe {
        k,
        branch,
        q: q_re,
        a,
        unit_gap,
        rungs,
        zeros,
        max_gap,
        gap_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prec() -> Precision {
        Precision::default()
    }

    const XI1_Q02: f64 = -6.700760910099115;

    #[test]
    fn no_zeros_on_the_positive_axis_for_positive_q() {
        let q = ParamQ::real(0.5).unwrap();
        let n = count_zeros(&q, Interval::closed(0.0, 1e6), &prec()).unwrap();
        assert_eq!(n, 0);
    }

    #[test]
    fn one_zero_between_the_annulus_two_circles() {
        let q = ParamQ::real(0.2).unwrap();
        let j = Interval::closed(-0.2f64.powf(-2.5), -0.2f64.powf(-1.5));
        assert_eq!(count_zeros(&q, j, &prec()).unwrap(), 1);
    }

    #[test]
    fn open_interval_isolates_the_third_zero_at_negative_q() {
        let q = ParamQ::real(-0.5).unwrap();
        assert_eq!(count_zeros(&q, Interval::open(4.0, 16.0), &prec()).unwrap(), 1);
    }

    #[test]
    fn endpoint_inclusion_decides_a_boundary_zero() {
        let q = ParamQ::real(0.2).unwrap();
        let closed = Interval::closed(XI1_Q02, -5.0);
        let open_lo = Interval { include_lo: false, ..closed };
        assert_eq!(count_zeros(&q, closed, &prec()).unwrap(), 1);
        assert_eq!(count_zeros(&q, open_lo, &prec()).unwrap(), 0);
    }

    #[test]
    fn degenerate_intervals_count_only_an_exact_zero() {
        let q = ParamQ::real(0.2).unwrap();
        let p = prec();
        assert_eq!(count_zeros(&q, Interval::closed(XI1_Q02, XI1_Q02), &p).unwrap(), 1);
        assert_eq!(count_zeros(&q, Interval::closed(-E_PI, -E_PI), &p).unwrap(), 0);
        assert_eq!(count_zeros(&q, Interval::half_open(XI1_Q02, XI1_Q02), &p).unwrap(), 0);
    }

    #[test]
    fn counts_add_over_adjacent_intervals() {
        let q = ParamQ::real(0.2).unwrap();
        let p = prec();
        let whole = count_zeros(&q, Interval::closed(-30.0, -5.0), &p).unwrap();
        let left = count_zeros(&q, Interval::closed(-30.0, -10.0), &p).unwrap();
        let right = count_zeros(&q, Interval { lo: -10.0, hi: -5.0, include_lo: false, include_hi: true }, &p).unwrap();
        assert_eq!(whole, 2);
        assert_eq!(left + right, whole);
    }

    #[test]
    fn core_counts_stay_under_the_log_bound() {
        let p = prec();
        // [pi/ln(1/r)] + 1 = 2 at r = 0.2, met by the single core zero
        let c02 = core_counts(&ParamQ::real(0.2).unwrap(), &p).unwrap();
        assert_eq!(c02, CoreCounts { negative_side: 1, positive_side: None });
        // at q = 0.3 the second zero has pulled inside the core: 2 <= 3
        let c03 = core_counts(&ParamQ::real(0.3).unwrap(), &p).unwrap();
        assert_eq!(c03, CoreCounts { negative_side: 2, positive_side: None });
    }

    #[test]
    fn negative_core_reports_both_sides() {
        let c = core_counts(&ParamQ::real(-0.5).unwrap(), &prec()).unwrap();
        assert_eq!(c, CoreCounts { negative_side: 1, positive_side: Some(1) });
    }

    #[test]
    fn functional_equation_pairs_the_half_axes() {
        // count over (0, e^{pi/2}] matches count over [-e^{pi/2}/|q|, 0) to +-1
        let q = ParamQ::real(-0.5).unwrap();
        let p = prec();
        let pos = count_zeros(
            &q,
            Interval { lo: 0.0, hi: E_PI_HALF, include_lo: false, include_hi: true },
            &p,
        )
        .unwrap();
        let mirrored =
            count_zeros(&q, Interval::half_open(-E_PI_HALF / 0.5, 0.0), &p).unwrap();
        assert!(pos.abs_diff(mirrored) <= 1);
    }

    #[test]
    fn first_pair_sits_between_consecutive_circle_radii() {
        let p = prec();
        for qv in [0.1f64, 0.2, 0.3] {
            let q = ParamQ::real(qv).unwrap();
            let j = Interval::open(-qv.powi(-2), -qv.powi(-1));
            assert_eq!(count_zeros(&q, j, &p).unwrap(), 2, "q = {qv}");
        }
    }

    #[test]
    fn odd_positive_zeros_follow_the_negative_branch_windows() {
        // zeros near rho^{-4s+1} land inside (rho^{-4s+2}, rho^{-4s})
        let q = ParamQ::real(-0.15).unwrap();
        let p = prec();
        let rho = 0.15f64;
        for s in [1i32, 2] {
            let j = Interval::open(rho.powi(-4 * s + 2), rho.powi(-4 * s));
            assert_eq!(count_zeros(&q, j, &p).unwrap(), 1, "s = {s}");
        }
    }

    #[test]
    fn degenerate_tail_is_empty() {
        let p = prec();
        assert_eq!(tail_count(&ParamQ::real(0.2).unwrap(), E_PI, &p).unwrap(), 0);
        assert_eq!(tail_count(&ParamQ::real(0.5).unwrap(), E_PI, &p).unwrap(), 0);
        let (n, pz) =
            tail_counts_two_sided(&ParamQ::real(-0.2).unwrap(), E_PI_HALF, &p).unwrap();
        assert_eq!((n, pz), (0, 0));
    }

    #[test]
    fn one_tail_zero_at_half_for_a_40() {
        let q = ParamQ::real(0.5).unwrap();
        assert_eq!(tail_count(&q, 40.0, &prec()).unwrap(), 1);
    }

    #[test]
    fn tail_validation_rejects_wrong_side_and_small_a() {
        let p = prec();
        let pos = ParamQ::real(0.5).unwrap();
        let neg = ParamQ::real(-0.5).unwrap();
        assert!(matches!(tail_count(&neg, 100.0, &p), Err(Error::InvalidParam(_))));
        assert!(matches!(tail_count(&pos, 20.0, &p), Err(Error::InvalidParam(_))));
        assert!(matches!(tail_counts_two_sided(&pos, 50.0, &p), Err(Error::InvalidParam(_))));
        assert!(matches!(tail_counts_two_sided(&neg, 4.0, &p), Err(Error::InvalidParam(_))));
    }

    #[test]
    fn report_at_nine_tenths_matches_the_frozen_count() {
        let q = ParamQ::real(0.9).unwrap();
        let r = density_report(&q, 100.0, &prec()).unwrap();
        assert_eq!(r.left_count, 14);
        assert_eq!(r.right_count, None);
        let predicted = (100.0 / E_PI).ln();
        assert!((r.predicted - predicted).abs() < 1e-15);
        assert!((r.normalized - 1.4).abs() < 1e-12);
        assert!((r.deviation - (predicted - 1.4)).abs() < 1e-12);
        assert!(r.deviation / r.predicted < 0.05);
    }

    #[test]
    fn negative_report_counts_both_axes() {
        let q = ParamQ::real(-0.9).unwrap();
        let r = density_report(&q, 50.0, &prec()).unwrap();
        assert_eq!(r.left_count, 11);
        assert_eq!(r.right_count, Some(12));
        assert!(r.left_count.abs_diff(r.right_count.unwrap()) <= 2);
        let predicted = (50.0 / E_PI_HALF).ln() / 2.0;
        assert!((r.predicted - predicted).abs() < 1e-15);
        assert!(r.deviation / r.predicted < 0.10);
        assert!(r.deviation_right.unwrap() / r.predicted < 0.10);
    }

    #[test]
    fn sweep_validates_the_grid_and_keeps_input_order() {
        let p = prec();
        assert!(matches!(
            density_sweep(DensityBranch::Positive, 100.0, &[], &p),
            Err(Error::InvalidParam(_))
        ));
        assert!(matches!(
            density_sweep(DensityBranch::Positive, 100.0, &[-0.9], &p),
            Err(Error::InvalidParam(_))
        ));
        let one = density_sweep(DensityBranch::Positive, 100.0, &[0.9], &p).unwrap();
        assert_eq!(one.len(), 1);
        assert!(deviations_decreasing(&one));
    }

    #[test]
    fn ladder_probe_brackets_a_zero_in_every_gap() {
        let probe = dense_zero_probe(8, DensityBranch::Positive, 60.0, &prec()).unwrap();
        assert!(probe.unit_gap < 1e-12, "theta at x_1 is 1, gap {}", probe.unit_gap);
        // alternation makes every in-support ladder gap bracket exactly one zero
        let contained: Vec<&LadderRung> =
            probe.rungs.iter().filter(|r| (-60.0..=-E_PI).contains(&r.x)).collect();
        assert!(contained.len() >= 3);
        assert!(probe.zeros.len() + 1 >= contained.len());
        assert!(probe.max_gap <= probe.gap_bound, "{} vs {}", probe.max_gap, probe.gap_bound);
        // consecutive bracketed zeros sit in adjacent ladder cells at worst
        for w in probe.zeros.windows(2) {
            assert!(w[1] - w[0] <= 2.0 * probe.gap_bound);
        }
    }

    #[test]
    fn negative_ladder_lands_on_both_axes() {
        let probe = dense_zero_probe(2, DensityBranch::Negative, 30.0, &prec()).unwrap();
        assert!(probe.unit_gap < 1e-12);
        assert!(probe.rungs.iter().any(|r| r.x < 0.0));
        assert!(probe.rungs.iter().any(|r| r.x > 0.0));
        assert!(probe.q < 0.0);
    }

    #[test]
    fn probe_rejects_bad_arguments() {
        let p = prec();
        assert!(matches!(
            dense_zero_probe(0, DensityBranch::Positive, 100.0, &p),
            Err(Error::InvalidParam(_))
        ));
        assert!(matches!(
            dense_zero_probe(3, DensityBranch::Positive, 10.0, &p),
            Err(Error::InvalidParam(_))
        ));
    }

    #[test]
    fn interval_and_parameter_validation() {
        let p = prec();
        let q = ParamQ::real(0.5).unwrap();
        assert!(matches!(
            count_zeros(&q, Interval::closed(3.0, 1.0), &p),
            Err(Error::InvalidParam(_))
        ));
        assert!(matches!(
            count_zeros(&q, Interval::closed(f64::NAN, 1.0), &p),
            Err(Error::InvalidParam(_))
        ));
        let qc = ParamQ::complex(0.3, 0.2).unwrap();
        assert!(count_zeros(&qc, Interval::closed(-10.0, -1.0), &p).is_err());
    }
}
