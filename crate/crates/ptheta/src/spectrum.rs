//! Spectral parameters of θ: the (q, y) pairs where θ(q,·) has a double zero.
//!
//! Along the positive real axis the innermost real pair of zeros coalesces at
//! q̃₁ < q̃₂ < ⋯ and leaves the axis as a conjugate pair; along the negative
//! axis coalescences alternate between the two real half-axes; one
//! complex-conjugate pair of spectral parameters is located off-axis.  All
//! solves are damped 2×2 Newton iterations on the system (θ, θ_z) = 0 in the
//! variables (q, z), with the mixed partial θ_qz supplied by central
//! differences of θ_z in q.  Seeds come from structural window searches
//! (small index) or residual-calibrated asymptotic prediction (large index),
//! never from previously solved values baked in as constants.

use crate::error::{Error, Result};
use crate::num::{abs_f64, at_bits, cplx, ParamQ, Precision, LN2};
use crate::series::{evaluate, evaluate_dq, evaluate_dz};
use crate::zeros::zeros_in_disk;
use rug::ops::{CompleteRound, NegAssign};
use rug::{Complex, Float};
use std::f64::consts::PI;

/// e^π, the limiting modulus of the positive-branch double zeros ỹ_k.
pub const E_PI: f64 = 23.140692632779269;
/// e^{π/2}, the limiting modulus of the negative-branch double zeros ȳ_k.
pub const E_PI_HALF: f64 = 4.810477380965352;

/// Which family a spectral point belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// q ∈ (0,1), double zero on the negative real z-axis (local minimum).
    PositiveReal,
    /// q ∈ (−1,0), double zero real; odd index on the negative z-axis
    /// (local minimum), even index on the positive z-axis (local maximum).
    NegativeReal,
    /// q off the real axis; comes in conjugate pairs.
    ComplexPair,
}

/// A parameter q at which θ(q,·) has a double zero, together with the zero.
#[derive(Clone, Debug)]
pub struct SpectralPoint {
    pub q: ParamQ,
    /// The double zero y: θ(q,y) = θ_z(q,y) = 0.
    pub y: Complex,
    /// Coalescence index along a real branch (1-based); None off-axis.
    pub index: Option<u32>,
    pub branch: Branch,
    /// max(|θ|, |θ_z|·ŷ)/(1 + |θ_zz|·ŷ²) at the solution, ŷ = max(1,|y|).
    pub newton_residual: f64,
    /// θ_zz(q,y): the nondegeneracy witness (≠ 0 at genuine double zeros).
    pub theta_zz: Complex,
}

/// One row of an asymptotic-law comparison.
#[derive(Clone, Copy, Debug)]
pub struct AsymptoticRow {
    pub k: u32,
    pub q_measured: f64,
    pub q_predicted: f64,
    pub y_measured: f64,
    pub y_predicted: f64,
    /// q_measured − q_predicted.
    pub residual_q: f64,
    /// residual_q scaled by the law's decay rate (k² positive branch,
    /// family index s negative branch): bounded resp. → 0 when the law holds.
    pub scaled_residual_q: f64,
    /// y_measured − y_predicted.
    pub residual_y: f64,
}

/// Measured-vs-predicted table for one branch of the spectrum.
#[derive(Clone, Debug)]
pub struct AsymptoticReport {
    pub branch: Branch,
    pub rows: Vec<AsymptoticRow>,
}

impl AsymptoticReport {
    /// |scaled_residual_q| per row, in index order.
    pub fn scaled_q_magnitudes(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.scaled_residual_q.abs()).collect()
    }

    /// |residual_y| per row, in index order.
    pub fn y_magnitudes(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.residual_y.abs()).collect()
    }
}

// Predicted laws: q̃_k = 1 − π/2k + ln k/8k² and ỹ_k = −e^π·e^{−ln k/4k};
// |q̄| per family = 1 − π/8s and |ȳ| → e^{π/2}.
fn pos_pred_q(k: f64) -> f64 {
    1.0 - PI / (2.0 * k) + k.ln() / (8.0 * k * k)
}

fn pos_pred_y(k: f64) -> f64 {
    -E_PI * (-k.ln() / (4.0 * k)).exp()
}

fn neg_pred_rho(s: f64) -> f64 {
    1.0 - PI / (8.0 * s)
}

/// Precision whose eps is honored by construction (bits sized to eps).
fn prec_at(bits: u32, eps: f64) -> Precision {
    let need = ((-eps.max(f64::MIN_POSITIVE).ln()) / LN2).ceil() as u32 + 24;
    Precision { mantissa_bits: bits.max(need).max(64), target_eps: eps }
}

fn theta_val(qc: &Complex, z: &Complex, eps: f64) -> Result<Complex> {
    let pq = ParamQ::from_cplx(qc.clone())?;
    Ok(evaluate(&pq, z, &prec_at(64, eps))?.value)
}

fn theta_dz1(qc: &Complex, z: &Complex, eps: f64) -> Result<Complex> {
    let pq = ParamQ::from_cplx(qc.clone())?;
    Ok(evaluate_dz(&pq, z, 1, &prec_at(64, eps))?.value)
}

/// Real-branch containment for the Newton iterate.
#[derive(Clone, Copy, PartialEq)]
enum Guard {
    Free,
    RealPositive,
    RealNegative,
}

impl Guard {
    fn admits(self, q: &Complex) -> bool {
        let re = q.real().to_f64();
        let a = abs_f64(q);
        if !(a < 0.9995) || a < 0.02 {
            return false;
        }
        match self {
            Guard::Free => true,
            Guard::RealPositive => re > 0.02 && re < 0.9995,
            Guard::RealNegative => re < -0.02 && re > -0.9995,
        }
    }
}

struct Solve2 {
    q: Complex,
    y: Complex,
    residual: f64,
    theta_zz: Complex,
}

/// Damped Newton on F(q,y) = (θ, θ_z) with step clamping and backtracking.
/// Works entirely at `bits`; evaluation accuracy `eps` absolute.
fn newton2(q0: &Complex, y0: &Complex, bits: u32, eps: f64, guard: Guard) -> Result<Solve2> {
    let pe = prec_at(bits, eps);
    let fnorm = |q: &Complex, y: &Complex| -> Result<f64> {
        let f = theta_val(q, y, eps)?;
        let g = theta_dz1(q, y, eps)?;
        Ok(abs_f64(&f) + abs_f64(&g))
    };

    let mut q = at_bits(q0, bits);
    let mut y = at_bits(y0, bits);
    let mut cur = fnorm(&q, &y)?;
    let mut converged = false;
    for _ in 0..90 {
        let pq = ParamQ::from_cplx(q.clone())?;
        let f = evaluate(&pq, &y, &pe)?.value;
        let g = evaluate_dz(&pq, &y, 1, &pe)?.value;
        let fq = evaluate_dq(&pq, &y, &pe)?.value;
        let gz = evaluate_dz(&pq, &y, 2, &pe)?.value;
        // mixed partial by a central difference of θ_z in q
        let h = Float::with_val(bits, 1e-7) * (1.0 - abs_f64(&q));
        let qp = Complex::with_val(bits, (q.real() + &h, q.imag()));
        let qm = Complex::with_val(bits, (q.real() - &h, q.imag()));
        let gq = {
            let gp = theta_dz1(&qp, &y, eps)?;
            let gm = theta_dz1(&qm, &y, eps)?;
            let mut d: Complex = (&gp - &gm).complete((bits, bits));
            d /= h.clone() * 2u32;
            d
        };
        let ja: Complex = (&fq * &gz).complete((bits, bits));
        let jb: Complex = (&g * &gq).complete((bits, bits));
        let det = ja - jb;
        let det_scale = abs_f64(&fq) * abs_f64(&gz) + abs_f64(&g) * abs_f64(&gq);
        if abs_f64(&det) <= 1e-18 * det_scale + 1e-280 {
            return Err(Error::DegenerateJacobian { det: abs_f64(&det) });
        }
        let mut dq = ((&f * &gz).complete((bits, bits)) - (&g * &g).complete((bits, bits))) / &det;
        let mut dy = ((&fq * &g).complete((bits, bits)) - (&gq * &f).complete((bits, bits))) / &det;
        // clamp the step to the trust region
        let mq = 0.08 * (1.0 + abs_f64(&q));
        let my = 0.3 * (1.0 + abs_f64(&y));
        let sc = (abs_f64(&dq) / mq).max(abs_f64(&dy) / my).max(1.0);
        if sc > 1.0 {
            dq /= sc;
            dy /= sc;
        }
        let step = abs_f64(&dq) + abs_f64(&dy);
        // backtrack until the residual norm drops; never move to a point the
        // guard rejects
        let mut lam = 1.0f64;
        let mut moved = false;
        for _bt in 0..9 {
            let qn = q.clone() - (dq.clone() * lam);
            let yn = y.clone() - (dy.clone() * lam);
            if guard.admits(&qn) {
                let new = fnorm(&qn, &yn)?;
                if new < cur || lam < 0.01 {
                    q = qn;
                    y = yn;
                    cur = new;
                    moved = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        let scale_qy = 1.0 + abs_f64(&q) + abs_f64(&y);
        if step < (eps * 1e5).max(1e-290) * scale_qy {
            converged = true;
            break;
        }
        if !moved {
            break;
        }
    }

    let f = theta_val(&q, &y, eps)?;
    let g = theta_dz1(&q, &y, eps)?;
    let pq = ParamQ::from_cplx(q.clone())?;
    let t2 = evaluate_dz(&pq, &y, 2, &pe)?.value;
    let yh = abs_f64(&y).max(1.0);
    let scale = 1.0 + abs_f64(&t2) * yh * yh;
    let residual = (abs_f64(&f).max(abs_f64(&g) * yh)) / scale;
    if !converged && residual > eps * 1e3 {
        return Err(Error::NoConvergence(format!(
            "Newton on (θ, θ_z) stalled: residual {residual:.3e} from q0 = {:.6}",
            q0.real().to_f64()
        )));
    }
    Ok(Solve2 { q, y, residual, theta_zz: t2 })
}

fn classify(q: &Complex) -> Branch {
    if q.imag().is_zero() {
        if q.real().to_f64() > 0.0 {
            Branch::PositiveReal
        } else {
            Branch::NegativeReal
        }
    } else {
        Branch::ComplexPair
    }
}

/// Solve θ(q,z) = θ_z(q,z) = 0 from the seed (q0, z0).
///
/// The returned point satisfies the residual bound `newton_residual ≤
/// prec.target_eps` (scale-normalized) and the nondegeneracy condition
/// θ_zz ≠ 0; a vanishing curvature is rejected as DegenerateJacobian.
pub fn find_double_zero(q0: &ParamQ, z0: &Complex, prec: &Precision) -> Result<SpectralPoint> {
    q0.require_nonzero()?;
    let bits = solve_bits(prec, q0.abs());
    let eps = prec.target_eps.max(Precision::tight(bits).target_eps);
    let guard = if q0.is_real() && z0.imag().is_zero() {
        if q0.re_f64() > 0.0 {
            Guard::RealPositive
        } else {
            Guard::RealNegative
        }
    } else {
        Guard::Free
    };
    let sol = newton2(q0.as_cplx(), z0, bits, eps, guard)?;
    finish_point(sol, None, prec)
}

/// Working precision for a solve whose double zero has modulus ≲ e^π: the
/// series peak grows like exp(π²/2ε) with ε = −ln|q|, so bits must track it.
fn solve_bits(prec: &Precision, q_abs: f64) -> u32 {
    let eps_ln = -(q_abs.min(0.9995).max(1e-6).ln());
    let peak_bits = (PI * PI / (2.0 * eps_ln) / LN2).ceil() as u32;
    prec.mantissa_bits.max(128).max(peak_bits + 96)
}

fn finish_point(sol: Solve2, index: Option<u32>, prec: &Precision) -> Result<SpectralPoint> {
    let yh = abs_f64(&sol.y).max(1.0);
    // θ_zz ≈ 0 would make the double zero degenerate (triple or worse)
    if abs_f64(&sol.theta_zz) * yh * yh <= 1e-6 {
        return Err(Error::DegenerateJacobian { det: abs_f64(&sol.theta_zz) });
    }
    if sol.residual > prec.target_eps.max(Precision::tight(sol.q.prec().0).target_eps) * 10.0 {
        return Err(Error::NoConvergence(format!(
            "solution residual {:.3e} exceeds the requested accuracy",
            sol.residual
        )));
    }
    let branch = classify(&sol.q);
    Ok(SpectralPoint {
        q: ParamQ::from_cplx(sol.q)?,
        y: sol.y,
        index,
        branch,
        newton_residual: sol.residual,
        theta_zz: sol.theta_zz,
    })
}

/// Sign changes of θ(q, sign·x) over a log grid on (lo, hi), with dip
/// refinement: a cell whose endpoint magnitudes drop sharply is subdivided so
/// a barely-separated pair of crossings is not missed.
fn sign_changes_real(
    qc: &Complex,
    lo: f64,
    hi: f64,
    sign: f64,
    n: usize,
    eps: f64,
) -> Result<(usize, Vec<f64>)> {
    let bits = 96u32;
    let r = (hi / lo).powf(1.0 / n as f64);
    let mut xs = Vec::with_capacity(n + 1);
    let mut vals = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let x = lo * r.powi(i as i32);
        let z = cplx(bits, sign * x, 0.0);
        let v = theta_val(qc, &z, eps)?;
        xs.push(x);
        vals.push(v.real().to_f64());
    }
    let mut cnt = 0usize;
    let mut locs = Vec::new();
    for i in 0..n {
        let (a, b) = (vals[i], vals[i + 1]);
        if (a > 0.0) != (b > 0.0) {
            cnt += 1;
            locs.push(sign * (xs[i] * xs[i + 1]).sqrt());
        } else if a.abs().min(b.abs()) < 0.3 * a.abs().max(b.abs()) {
            // sharp dip: look inside the cell for a hidden double crossing
            let sub = 14;
            let r2 = (xs[i + 1] / xs[i]).powf(1.0 / sub as f64);
            let mut prev = a;
            let mut px = xs[i];
            for kk in 1..=sub {
                let xx = xs[i] * r2.powi(kk);
                let z = cplx(bits, sign * xx, 0.0);
                let v = theta_val(qc, &z, eps)?.real().to_f64();
                if (prev > 0.0) != (v > 0.0) {
                    cnt += 1;
                    locs.push(sign * (px * xx).sqrt());
                }
                prev = v;
                px = xx;
            }
        }
    }
    Ok((cnt, locs))
}

/// argmin over a log grid of |θ| + |θ_z| on sign·(lo, hi): the dip marks the
/// (nearly) coalesced pair.
fn dip_argmin(qc: &Complex, lo: f64, hi: f64, sign: f64, n: usize, eps: f64) -> Result<f64> {
    let bits = 96u32;
    let r = (hi / lo).powf(1.0 / n as f64);
    let mut best = (f64::INFINITY, sign * lo);
    for i in 0..=n {
        let x = lo * r.powi(i as i32);
        let z = cplx(bits, sign * x, 0.0);
        let v = abs_f64(&theta_val(qc, &z, eps)?) + abs_f64(&theta_dz1(qc, &z, eps)?);
        if v < best.0 {
            best = (v, sign * x);
        }
    }
    Ok(best.1)
}

// Search windows in q for the first four positive-branch coalescences; the
// asymptotic prediction is unusable at small index, a windowed bisection on
// the pair count is not.
const POS_WINDOWS: [(f64, f64); 4] = [(0.22, 0.40), (0.42, 0.58), (0.58, 0.665), (0.665, 0.725)];

/// Modulus window holding exactly the k-th coalescing pair (ξ_{2k−1}, ξ_{2k})
/// on the negative real axis and nothing else.
fn pos_pair_window(q: f64, k: u32) -> (f64, f64) {
    let e = -(q.ln());
    ((e * (2.0 * k as f64 - 1.5)).exp(), (e * (2.0 * k as f64 + 0.75)).exp())
}

fn pos_pair_count(q: f64, k: u32) -> Result<usize> {
    let (lo, hi) = pos_pair_window(q, k);
    let qc = cplx(96, q, 0.0);
    Ok(sign_changes_real(&qc, lo, hi, -1.0, 28, 1e-22)?.0)
}

/// Seed for the k-th positive coalescence (k ≤ 4) by bisection on the count
/// of real zeros in the pair window: 2 below the coalescence, 0 above.
fn positive_dense_seed(k: u32) -> Result<(f64, f64)> {
    let (mut qa, mut qb) = POS_WINDOWS[(k - 1) as usize];
    let mut ca = pos_pair_count(qa, k)?;
    let mut tries = 0;
    while ca < 2 && tries < 3 {
        qa -= 0.02;
        ca = pos_pair_count(qa, k)?;
        tries += 1;
    }
    let mut cb = pos_pair_count(qb, k)?;
    while cb > 0 && tries < 6 {
        qb = (qb + 0.012).min(0.74);
        cb = pos_pair_count(qb, k)?;
        tries += 1;
    }
    if ca < 2 || cb > 0 {
        return Err(Error::NoConvergence(format!(
            "coalescence window for index {k} lost the pair: counts {ca} at {qa}, {cb} at {qb}"
        )));
    }
    for _ in 0..12 {
        let qm = 0.5 * (qa + qb);
        if pos_pair_count(qm, k)? >= 2 {
            qa = qm;
        } else {
            qb = qm;
        }
    }
    let (wlo, whi) = pos_pair_window(qa, k);
    let qc = cplx(96, qa, 0.0);
    let y = dip_argmin(&qc, wlo, whi, -1.0, 120, 1e-22)?;
    Ok((0.5 * (qa + qb), y))
}

/// The increasing sequence of positive-branch spectral parameters q̃_1 … q̃_{k_max}
/// with their double zeros, solved index by index.
///
/// Indices 1–4 are found by windowed bisection on the real-pair count; later
/// indices continue from the asymptotic law with the previous index's
/// residual as calibration, so the seed stays well inside the Newton basin.
/// A non-monotone landing reports MissedIndex rather than silently relabeling.
pub fn real_spectrum_positive(k_max: u32, prec: &Precision) -> Result<Vec<SpectralPoint>> {
    if k_max < 1 {
        return Err(Error::InvalidParam(format!("k_max must be ≥ 1, got {k_max}")));
    }
    let mut out: Vec<SpectralPoint> = Vec::with_capacity(k_max as usize);
    let mut rq = f64::NAN;
    let mut ry = f64::NAN;
    for k in 1..=k_max {
        let kf = k as f64;
        let (qs, ys) = if k <= 4 {
            positive_dense_seed(k)?
        } else {
            let mut qg = pos_pred_q(kf);
            let mut yg = pos_pred_y(kf);
            if rq.is_finite() {
                qg += rq / (kf * kf);
                yg += ry;
            }
            (qg, yg)
        };
        let bits = solve_bits(prec, qs);
        let eps = prec.target_eps.max(Precision::tight(bits).target_eps);
        let sol = newton2(&cplx(bits, qs, 0.0), &cplx(bits, ys, 0.0), bits, eps, Guard::RealPositive)?;
        let qv = sol.q.real().to_f64();
        let yv = sol.y.real().to_f64();
        // the landing must be a local minimum on the negative axis, reached
        // in index order, and (when continued) close to its seed
        if !(yv < 0.0) || !sol.y.imag().is_zero() || sol.theta_zz.real().to_f64() <= 0.0 {
            return Err(Error::MissedIndex { k: k as usize });
        }
        if let Some(prev) = out.last() {
            if qv <= prev.q.re_f64() {
                return Err(Error::MissedIndex { k: k as usize });
            }
        }
        if k >= 5 {
            let spacing = PI / (2.0 * kf * (kf + 1.0));
            if (qv - qs).abs() > 0.45 * spacing {
                return Err(Error::MissedIndex { k: k as usize });
            }
        }
        rq = (qv - pos_pred_q(kf)) * kf * kf;
        ry = yv - pos_pred_y(kf);
        out.push(finish_point(sol, Some(k), prec)?);
    }
    Ok(out)
}

/// Modulus window holding exactly the coalescing pair for family index s:
/// odd parity pairs (ξ_{4s−2}, ξ_{4s}) on the negative z-axis, even parity
/// (ξ_{4s−1}, ξ_{4s+1}) on the positive z-axis.
fn neg_pair_window(s: u32, odd: bool, rho: f64) -> (f64, f64, f64) {
    let e = -(rho.ln());
    if odd {
        ((e * (4.0 * s as f64 - 3.0)).exp(), (e * (4.0 * s as f64 + 1.0)).exp(), -1.0)
    } else {
        ((e * (4.0 * s as f64 - 2.0)).exp(), (e * (4.0 * s as f64 + 2.0)).exp(), 1.0)
    }
}

fn neg_pair_count(s: u32, odd: bool, rho: f64) -> Result<usize> {
    let (lo, hi, sign) = neg_pair_window(s, odd, rho);
    let qc = cplx(96, -rho, 0.0);
    let eps_ln = -(rho.ln());
    let eps = (10f64).powf(-(28.0 + PI * PI / (8.0 * eps_ln) / std::f64::consts::LN_10));
    Ok(sign_changes_real(&qc, lo, hi, sign, 28, eps.max(1e-160))?.0)
}

/// The merged-index sequence of negative-branch spectral parameters
/// q̄_1, q̄_2, … with their double zeros.  Odd indices carry a local minimum on
/// the negative z-axis, even indices a local maximum on the positive z-axis;
/// |q̄_k| increases strictly with k.
pub fn real_spectrum_negative(k_max: u32, prec: &Precision) -> Result<Vec<SpectralPoint>> {
    if k_max < 1 {
        return Err(Error::InvalidParam(format!("k_max must be ≥ 1, got {k_max}")));
    }
    let mut out: Vec<SpectralPoint> = Vec::with_capacity(k_max as usize);
    // per-parity deviation (1−ρ)·8s/π, carried for window prediction
    let mut dev = [f64::NAN, f64::NAN];
    for k in 1..=k_max {
        let s = (k + 1) / 2;
        let odd = k % 2 == 1;
        let sf = s as f64;
        let m = if odd { 4.0 * sf - 1.0 } else { 4.0 * sf };
        let dev_prev = dev[if odd { 0 } else { 1 }];
        let (mut lo, mut hi, mut halfw) = if dev_prev.is_finite() {
            let rho_pred = 1.0 - PI * dev_prev / (8.0 * sf);
            let hw = PI / (5.0 * sf * sf);
            (rho_pred - hw, (rho_pred + hw).min(0.9993), hw)
        } else {
            let rho_pred = (-PI / (2.0 * m)).exp();
            ((rho_pred - 0.15).max(0.25), (rho_pred + 0.10).min(0.9925), 0.06)
        };
        let mut clo = neg_pair_count(s, odd, lo)?;
        let mut tries = 0;
        while clo != 2 && tries < 6 {
            lo -= 0.5 * halfw;
            clo = neg_pair_count(s, odd, lo)?;
            tries += 1;
        }
        let mut chi = neg_pair_count(s, odd, hi)?;
        while chi != 0 && tries < 14 {
            hi = (hi + 0.5 * halfw).min(0.99935);
            if hi >= 0.99935 {
                halfw *= 0.5;
            }
            chi = neg_pair_count(s, odd, hi)?;
            tries += 1;
        }
        if clo != 2 || chi != 0 {
            return Err(Error::NoConvergence(format!(
                "coalescence window for merged index {k} failed: counts {clo}/{chi} on [{lo}, {hi}]"
            )));
        }
        for _ in 0..13 {
            let mid = 0.5 * (lo + hi);
            if neg_pair_count(s, odd, mid)? >= 2 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (wlo, whi, sign) = neg_pair_window(s, odd, lo);
        let eps_ln = -(lo.ln());
        let eps_dip = (10f64).powf(-(28.0 + PI * PI / (8.0 * eps_ln) / std::f64::consts::LN_10));
        let ys = dip_argmin(&cplx(96, -lo, 0.0), wlo, whi, sign, 120, eps_dip.max(1e-160))?;
        let rho_mid = 0.5 * (lo + hi);
        let bits = neg_solve_bits(prec, rho_mid);
        let eps = prec.target_eps.max(Precision::tight(bits).target_eps);
        let sol = newton2(&cplx(bits, -rho_mid, 0.0), &cplx(bits, ys, 0.0), bits, eps, Guard::RealNegative)?;
        let rho = -sol.q.real().to_f64();
        let yv = sol.y.real().to_f64();
        // parity decides side and extremum type: odd is a minimum on the
        // negative axis, even a maximum on the positive axis
        let curv = sol.theta_zz.real().to_f64();
        let sign_ok = if odd { yv < 0.0 && curv > 0.0 } else { yv > 0.0 && curv < 0.0 };
        if !sign_ok || !sol.y.imag().is_zero() {
            return Err(Error::MissedIndex { k: k as usize });
        }
        if let Some(prev) = out.last() {
            let rho_prev = prev.q.abs();
            if (rho - rho_prev).abs() < 1e-10 * (1.0 - rho).abs() {
                return Err(Error::OrderingUnresolved { q_abs: rho });
            }
            if rho <= rho_prev {
                return Err(Error::MissedIndex { k: k as usize });
            }
        }
        dev[if odd { 0 } else { 1 }] = (1.0 - rho) * 8.0 * sf / PI;
        out.push(finish_point(sol, Some(k), prec)?);
    }
    Ok(out)
}

/// Bits for a negative-branch solve: the double zero modulus stays near
/// e^{π/2}, so the peak grows like exp(π²/8ε).
fn neg_solve_bits(prec: &Precision, rho: f64) -> u32 {
    let eps_ln = -(rho.min(0.9995).max(1e-6).ln());
    let peak_bits = (PI * PI / (8.0 * eps_ln) / LN2).ceil() as u32;
    prec.mantissa_bits.max(128).max(peak_bits + 96)
}

/// Compare a contiguous single-branch run of spectral points against the
/// asymptotic laws.  Small indices produce large residuals by design (the
/// laws are limits); the report never fails on that.
pub fn asymptotic_residuals(points: &[SpectralPoint]) -> Result<AsymptoticReport> {
    if points.is_empty() {
        return Err(Error::InvalidParam("empty spectral point list".into()));
    }
    let branch = points[0].branch;
    if branch == Branch::ComplexPair {
        return Err(Error::InvalidParam(
            "asymptotic laws cover the real branches only".into(),
        ));
    }
    let mut rows = Vec::with_capacity(points.len());
    let mut prev_k: Option<u32> = None;
    for p in points {
        if p.branch != branch {
            return Err(Error::MixedBranches);
        }
        let k = p.index.ok_or_else(|| {
            Error::InvalidParam("asymptotic residuals need indexed points".into())
        })?;
        if let Some(pk) = prev_k {
            if k != pk + 1 {
                return Err(Error::InvalidParam(format!(
                    "indices must be contiguous: {pk} then {k}"
                )));
            }
        }
        prev_k = Some(k);
        let kf = k as f64;
        let qm = p.q.re_f64();
        let ym = p.y.real().to_f64();
        let row = match branch {
            Branch::PositiveReal => {
                let qp = pos_pred_q(kf);
                let yp = pos_pred_y(kf);
                AsymptoticRow {
                    k,
                    q_measured: qm,
                    q_predicted: qp,
                    y_measured: ym,
                    y_predicted: yp,
                    residual_q: qm - qp,
                    scaled_residual_q: (qm - qp) * kf * kf,
                    residual_y: ym - yp,
                }
            }
            Branch::NegativeReal => {
                let sf = ((k + 1) / 2) as f64;
                let rho = -qm;
                let rho_pred = neg_pred_rho(sf);
                let ylim = if k % 2 == 1 { -E_PI_HALF } else { E_PI_HALF };
                AsymptoticRow {
                    k,
                    q_measured: qm,
                    q_predicted: -rho_pred,
                    y_measured: ym,
                    y_predicted: ylim,
                    residual_q: rho - rho_pred,
                    scaled_residual_q: (rho - rho_pred) * sf,
                    residual_y: ym - ylim,
                }
            }
            Branch::ComplexPair => unreachable!(),
        };
        rows.push(row);
    }
    Ok(AsymptoticReport { branch, rows })
}

/// Locate the off-axis conjugate pair of spectral parameters by a coarse
/// 2D proxy scan over (q, z) followed by the double-zero Newton solve.
/// Returns the upper-half-plane point first, then its conjugate.
pub fn complex_spectral_pair(prec: &Precision) -> Result<(SpectralPoint, SpectralPoint)> {
    let eps = 1e-10;
    let mut best = (f64::INFINITY, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for iq in 0..11 {
        for jq in 0..9 {
            let qre = 0.30 + 0.025 * iq as f64;
            let qim = 0.04 + 0.025 * jq as f64;
            let qc = cplx(64, qre, qim);
            for &rz in &[5.0f64, 7.0, 9.0, 11.0] {
                for &ph in &[1.95f64, 2.15, 2.35, 2.55] {
                    let z = cplx(64, rz * ph.cos(), rz * ph.sin());
                    let v = abs_f64(&theta_val(&qc, &z, eps)?)
                        + abs_f64(&theta_dz1(&qc, &z, eps)?);
                    if v < best.0 {
                        best = (v, qre, qim, z.real().to_f64(), z.imag().to_f64());
                    }
                }
            }
        }
    }
    let q0 = ParamQ::complex(best.1, best.2)?;
    let z0 = cplx(prec.mantissa_bits.max(128), best.3, best.4);
    let up = find_double_zero(&q0, &z0, prec)?;
    if up.q.im_f64().abs() < 0.02 {
        return Err(Error::NoConvergence(
            "proxy scan collapsed onto the real axis; no off-axis pair found there".into(),
        ));
    }
    // normalize to the upper half-plane, then mirror
    let (hi, lo) = if up.q.im_f64() > 0.0 {
        let mut lo = up.clone();
        lo.q = ParamQ::from_cplx(conj(up.q.as_cplx()))?;
        lo.y = conj(&up.y);
        lo.theta_zz = conj(&up.theta_zz);
        (up, lo)
    } else {
        let mut hi = up.clone();
        hi.q = ParamQ::from_cplx(conj(up.q.as_cplx()))?;
        hi.y = conj(&up.y);
        hi.theta_zz = conj(&up.theta_zz);
        (hi, up)
    };
    Ok((hi, lo))
}

fn conj(z: &Complex) -> Complex {
    let mut w = z.clone();
    w.mut_imag().neg_assign();
    w
}

/// All spectral parameters with |q| ≤ radius, across both real branches and
/// the complex pair, sorted by |q|.  Each real branch is walked outward until
/// its (strictly increasing) |q| passes the radius, which certifies
/// completeness for that branch.
pub fn spectral_points_in_disk(radius: f64, prec: &Precision) -> Result<Vec<SpectralPoint>> {
    if !(radius > 0.0 && radius < 0.98) {
        return Err(Error::InvalidParam(format!(
            "radius must lie in (0, 0.98), got {radius}"
        )));
    }
    let mut found: Vec<SpectralPoint> = Vec::new();
    // each real branch is exhausted by walking one index past the radius;
    // strict |q| monotonicity makes the first overshoot a certificate
    let mut k_hi = 1u32;
    loop {
        let pts = real_spectrum_positive(k_hi, prec)?;
        if pts.last().map(|p| p.q.re_f64()).unwrap_or(1.0) > radius {
            found.extend(pts.into_iter().filter(|p| p.q.abs() <= radius));
            break;
        }
        // jump to the asymptotic estimate of the first index past the radius
        k_hi = (k_hi + 2).max((PI / (2.0 * (1.0 - radius))).ceil() as u32 + 1);
    }
    let mut k_hi = 1u32;
    loop {
        let pts = real_spectrum_negative(k_hi, prec)?;
        if pts.last().map(|p| p.q.abs()).unwrap_or(1.0) > radius {
            found.extend(pts.into_iter().filter(|p| p.q.abs() <= radius));
            break;
        }
        k_hi = (k_hi + 2).max((PI / (4.0 * (1.0 - radius))).ceil() as u32 + 1);
    }
    if radius > 0.40 {
        let (hi, lo) = complex_spectral_pair(prec)?;
        if hi.q.abs() <= radius {
            found.push(hi);
            found.push(lo);
        }
    }
    found.sort_by(|a, b| a.q.abs().partial_cmp(&b.q.abs()).unwrap());
    Ok(found)
}

/// Gradient norm |(θ_q, θ_z)| at a spectral point: nonzero exactly when the
/// spectrum is smooth there.  The caller checks the companion identity via
/// [`smoothness_identity_residual`].
pub fn verify_smoothness(p: &SpectralPoint, prec: &Precision) -> Result<Float> {
    let bits = solve_bits(prec, p.q.abs());
    let pe = prec_at(bits, prec.target_eps.max(Precision::tight(bits).target_eps));
    let y = at_bits(&p.y, bits);
    let tq = evaluate_dq(&p.q, &y, &pe)?.value;
    let tz = evaluate_dz(&p.q, &y, 1, &pe)?.value;
    let a2 = tq.abs_ref().complete((bits, bits));
    let b2 = tz.abs_ref().complete((bits, bits));
    let mut s = a2.real().clone() * a2.real();
    s += b2.real().clone() * b2.real();
    Ok(s.sqrt())
}

/// Relative deviation of θ_q from (y²/2q)·θ_zz at a spectral point; the two
/// agree at any genuine double zero because 2q·θ_q = 2z·θ_z + z²·θ_zz there.
pub fn smoothness_identity_residual(p: &SpectralPoint, prec: &Precision) -> Result<f64> {
    let bits = solve_bits(prec, p.q.abs());
    let pe = prec_at(bits, prec.target_eps.max(Precision::tight(bits).target_eps));
    let y = at_bits(&p.y, bits);
    let tq = evaluate_dq(&p.q, &y, &pe)?.value;
    let t2 = evaluate_dz(&p.q, &y, 2, &pe)?.value;
    let qh = at_bits(p.q.as_cplx(), bits);
    let y2 = (&y * &y).complete((bits, bits));
    let rhs = (y2 * &t2) / (qh * 2.0);
    let denom = abs_f64(&tq).max(1e-300);
    let diff = tq.clone() - &rhs;
    Ok(abs_f64(&diff) / denom)
}

/// Confirm the coalescence indices of a positive-branch run: strictly
/// between q̃_k and q̃_{k+1} the disk reaching just past the k-th pair holds
/// exactly k conjugate pairs and nothing real.  Expensive; intended for
/// small indices.
pub fn confirm_positive_indices(points: &[SpectralPoint], prec: &Precision) -> Result<()> {
    for w in points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let k = a.index.ok_or_else(|| Error::InvalidParam("unindexed point".into()))?;
        let qm = 0.5 * (a.q.re_f64() + b.q.re_f64());
        let r = (-(qm.ln()) * (2.0 * k as f64 + 0.5)).exp();
        let recs = zeros_in_disk(&ParamQ::real(qm)?, r, prec)?;
        let pairs = recs.iter().filter(|z| z.z.imag().to_f64() > 0.0).count();
        let reals = recs.iter().filter(|z| z.z.imag().is_zero()).count();
        if recs.len() != 2 * k as usize || pairs != k as usize || reals != 0 {
            return Err(Error::MissedIndex { k: k as usize });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prec() -> Precision {
        Precision::new(192, 1e-30).unwrap()
    }

    fn parse_f(s: &str) -> Float {
        Float::with_val(220, Float::parse(s).unwrap())
    }

    #[test]
    fn first_positive_coalescence_from_coarse_seed() {
        // Newton from a deliberately rough seed lands on the first
        // coalescence; position frozen from an independent high-precision
        // solve of the same system.
        let q0 = ParamQ::real(0.31).unwrap();
        let p = find_double_zero(&q0, &cplx(128, -7.0, 0.0), &prec()).unwrap();
        assert_eq!(p.branch, Branch::PositiveReal);
        assert!((p.q.re_f64() - 0.3092).abs() < 5e-4);
        let qf = parse_f("0.3092493386000774800274834");
        let yf = parse_f("-7.503255964244192365654315");
        let dq = (Float::with_val(220, p.q.as_cplx().real()) - &qf).abs();
        let dy = (Float::with_val(220, p.y.real()) - &yf).abs();
        assert!(dq.to_f64() < 1e-20, "q off by {dq}");
        assert!(dy.to_f64() < 1e-18, "y off by {dy}");
        assert!(p.newton_residual <= 1e-30);
        assert!((p.theta_zz.real().to_f64() - 0.02498758552).abs() < 1e-9);
    }

    #[test]
    fn perturbed_seed_returns_same_point() {
        let pr = prec();
        let base = find_double_zero(&ParamQ::real(0.31).unwrap(), &cplx(128, -7.0, 0.0), &pr).unwrap();
        let q0 = ParamQ::real(base.q.re_f64() * (1.0 + 1e-3)).unwrap();
        let z0 = cplx(128, base.y.real().to_f64() * (1.0 - 1e-3), 0.0);
        let again = find_double_zero(&q0, &z0, &pr).unwrap();
        assert!((again.q.re_f64() - base.q.re_f64()).abs() < 1e-8);
        assert!((again.y.real().to_f64() - base.y.real().to_f64()).abs() < 1e-8);
    }

    #[test]
    fn positive_chain_first_two_match_frozen() {
        let pts = real_spectrum_positive(2, &prec()).unwrap();
        assert_eq!(pts.len(), 2);
        let q2 = parse_f("0.5169593597880520705461511");
        let y2 = parse_f("-11.71316821892419056334334");
        let dq = (Float::with_val(220, pts[1].q.as_cplx().real()) - &q2).abs();
        let dy = (Float::with_val(220, pts[1].y.real()) - &y2).abs();
        assert!(dq.to_f64() < 1e-18, "q̃₂ off by {dq}");
        assert!(dy.to_f64() < 1e-16, "ỹ₂ off by {dy}");
        assert!(pts[0].q.re_f64() < pts[1].q.re_f64());
        for p in &pts {
            assert!(p.y.real().to_f64() < 0.0);
            assert!(p.theta_zz.real().to_f64() > 0.0);
        }
    }

    #[test]
    fn negative_chain_first_two_match_frozen() {
        let pts = real_spectrum_negative(2, &prec()).unwrap();
        assert_eq!(pts.len(), 2);
        assert!((pts[0].q.re_f64() - -0.7271333254557868).abs() < 1e-12);
        assert!((pts[0].y.real().to_f64() - -2.991115175905828).abs() < 1e-11);
        assert!((pts[1].q.re_f64() - -0.7837420931951355).abs() < 1e-12);
        assert!((pts[1].y.real().to_f64() - 2.906784175409571).abs() < 1e-11);
        // odd index: minimum on the negative side; even: maximum, positive side
        assert!(pts[0].theta_zz.real().to_f64() > 0.0);
        assert!(pts[1].theta_zz.real().to_f64() < 0.0);
    }

    #[test]
    fn complex_pair_matches_published_digits() {
        let (hi, lo) = complex_spectral_pair(&prec()).unwrap();
        assert!((hi.q.re_f64() - 0.4353184958).abs() < 1e-9);
        assert!((hi.q.im_f64() - 0.1230440086).abs() < 1e-9);
        assert!(hi.newton_residual <= 1e-10);
        // frozen high-precision regression for the full pair
        let qre = parse_f("0.43531849582448641720814525032");
        let qim = parse_f("0.123044008551949111056353863228");
        let dre = (Float::with_val(220, hi.q.as_cplx().real()) - &qre).abs();
        let dim = (Float::with_val(220, hi.q.as_cplx().imag()) - &qim).abs();
        assert!(dre.to_f64() < 1e-20 && dim.to_f64() < 1e-20);
        let yre = parse_f("-5.96392371961959475857565786513");
        let yim = parse_f("6.10477517423574413535877637665");
        assert!((Float::with_val(220, hi.y.real()) - &yre).abs().to_f64() < 1e-18);
        assert!((Float::with_val(220, hi.y.imag()) - &yim).abs().to_f64() < 1e-18);
        // conjugate partner mirrors exactly
        assert_eq!(lo.q.re_f64(), hi.q.re_f64());
        assert_eq!(lo.q.im_f64(), -hi.q.im_f64());
        assert_eq!(lo.y.real().to_f64(), hi.y.real().to_f64());
        assert_eq!(lo.y.imag().to_f64(), -hi.y.imag().to_f64());
    }

    #[test]
    fn conjugate_seed_lands_on_conjugate_point() {
        let pr = prec();
        let q0 = ParamQ::complex(0.435, -0.123).unwrap();
        let z0 = cplx(128, -5.96, -6.10);
        let p = find_double_zero(&q0, &z0, &pr).unwrap();
        assert!((p.q.re_f64() - 0.4353184958).abs() < 1e-9);
        assert!((p.q.im_f64() - -0.1230440086).abs() < 1e-9);
    }

    #[test]
    fn smoothness_at_first_coalescence() {
        let pr = prec();
        let p = find_double_zero(&ParamQ::real(0.31).unwrap(), &cplx(128, -7.0, 0.0), &pr).unwrap();
        let grad = verify_smoothness(&p, &pr).unwrap();
        assert!(grad.to_f64() > 1e-6);
        let idres = smoothness_identity_residual(&p, &pr).unwrap();
        assert!(idres < 1e-8, "identity residual {idres}");
    }

    #[test]
    fn asymptotic_report_shapes_and_errors() {
        let pr = prec();
        let pos = real_spectrum_positive(3, &pr).unwrap();
        let rep = asymptotic_residuals(&pos).unwrap();
        assert_eq!(rep.rows.len(), 3);
        // the law is a large-k limit: small-k rows simply carry big residuals
        assert!(rep.rows[0].residual_q.abs() > 0.5);
        let neg = real_spectrum_negative(1, &pr).unwrap();
        let mut mixed = pos.clone();
        mixed.push(neg[0].clone());
        assert!(matches!(asymptotic_residuals(&mixed), Err(Error::MixedBranches)));
        let gap = vec![pos[0].clone(), pos[2].clone()];
        assert!(asymptotic_residuals(&gap).is_err());
    }

    #[test]
    fn only_one_spectral_point_inside_radius_031() {
        let pts = spectral_points_in_disk(0.31, &prec()).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].index, Some(1));
        assert!((pts[0].q.re_f64() - 0.3092493386).abs() < 1e-9);
    }

    #[test]
    fn landing_near_asymptotic_prediction_for_k20() {
        // seed at the bare asymptotic guess for index 20; the solver must land
        // on some nearby coalescence, within 0.02 of the predicted location
        let pr = Precision::new(192, 1e-25).unwrap();
        let q0 = ParamQ::real(1.0 - PI / 40.0).unwrap();
        let p = find_double_zero(&q0, &cplx(192, -23.0, 0.0), &pr).unwrap();
        let predicted = 1.0 - PI / 40.0 + (20f64).ln() / 3200.0;
        assert!((p.q.re_f64() - predicted).abs() < 0.02);
        assert!(p.y.real().to_f64() < 0.0);
    }
}
