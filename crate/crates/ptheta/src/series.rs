use crate::error::{Error, Result};
use crate::num::{abs_f64, at_bits, series_bits, ParamQ, Precision};
use rug::ops::CompleteRound;
use rug::{Complex, Float};

/// Truncated-series value with a rigorous bound on the omitted tail.
#[derive(Clone, Debug)]
pub struct EvalResult {
    pub value: Complex,
    /// Upper bound on the modulus of the omitted tail (twice the first
    /// omitted term; valid because the stopping rule forces the remaining
    /// term ratios below 1/2).
    pub tail_bound: Float,
    /// Number of terms actually summed (≥ 1).
    pub terms_used: usize,
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum Kind {
    Theta,
    Dz1,
    Dz2,
    Dq,
}

impl Kind {
    /// First index whose term can be nonzero.
    fn min_index(self) -> usize {
        match self {
            Kind::Theta => 0,
            Kind::Dz1 | Kind::Dq => 1,
            Kind::Dz2 => 2,
        }
    }

    /// Coefficient c_j applied to the base term q^{T_j} z^j (before the
    /// final /z^k or /q rescale). Exact in f64 for all reachable j.
    fn coef(self, j: usize) -> f64 {
        let jf = j as f64;
        match self {
            Kind::Theta => 1.0,
            Kind::Dz1 => jf,
            Kind::Dz2 => jf * (jf - 1.0),
            Kind::Dq => jf * (jf + 1.0) / 2.0,
        }
    }

    /// Upper bound on c_{j+1}/c_j for indices ≥ min_index, decreasing in j;
    /// once coef-growth · |q|^{j+1}|z| < 1/2 the term ratios stay below 1/2.
    fn growth(self, j: usize) -> f64 {
        let jf = j as f64;
        match self {
            Kind::Theta => 1.0,
            Kind::Dz1 => (jf + 1.0) / jf,
            Kind::Dz2 => (jf + 1.0) / (jf - 1.0),
            Kind::Dq => (jf + 2.0) / jf,
        }
    }
}

const MAX_TERMS: usize = 20_000_000;

fn abs_lowprec(z: &Complex) -> Float {
    z.abs_ref().complete((53, 53)).real().clone()
}

/// Smallest number of terms certifying absolute accuracy `eps`, by the
/// geometric-majorant rule in log space. Returns (terms, last-index).
fn plan_terms(q_abs: f64, z_abs: f64, eps: f64, kind: Kind) -> Result<usize> {
    if q_abs == 0.0 || z_abs == 0.0 {
        return Ok(kind.min_index() + 1);
    }
    let lq = q_abs.ln();
    let lz = z_abs.ln();
    let le = eps.max(f64::MIN_POSITIVE).ln();
    let mut n = kind.min_index();
    loop {
        let np = (n + 1) as f64;
        let ratio_ok = np * lq + lz < -core::f64::consts::LN_2
            && kind.growth(n.max(kind.min_index().max(1))) * (q_abs.powf(np) * z_abs) < 0.5;
        let t_next = (np * (np + 1.0) / 2.0) * lq + np * lz + kind.coef(n + 1).max(1.0).ln();
        let tail_ok = core::f64::consts::LN_2 + t_next < le;
        if ratio_ok && tail_ok {
            return Ok(n + 1);
        }
        n += 1;
        if n > MAX_TERMS {
            return Err(Error::NoConvergence(format!(
                "truncation order exceeds {MAX_TERMS} terms at |q|={q_abs}, |z|={z_abs}"
            )));
        }
    }
}

/// Number of summed terms certifying absolute accuracy eps for θ itself.
pub fn truncation_order(q: &ParamQ, z: &Complex, eps: f64) -> Result<usize> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParam(format!("eps must be positive, got {eps}")));
    }
    plan_terms(q.abs(), abs_f64(z), eps, Kind::Theta)
}

fn eval_kind(q: &ParamQ, z: &Complex, kind: Kind, prec: &Precision) -> Result<EvalResult> {
    let q_abs = q.abs();
    let z_abs = abs_f64(z);
    let eps = prec.target_eps;

    // exact short-circuits: only finitely many terms survive
    if q_abs == 0.0 || z_abs == 0.0 {
        let bits = prec.mantissa_bits;
        let qh = at_bits(q.as_cplx(), bits);
        let value = match (kind, z_abs == 0.0) {
            (Kind::Theta, _) => Complex::with_val(bits, (1.0, 0.0)),
            (Kind::Dz1, true) => qh,                      // j=1 term: q
            (Kind::Dz2, true) => {
                let q3 = qh.clone() * &qh * &qh;
                q3 * 2.0                                   // j=2 term: 2q^3
            }
            (Kind::Dq, true) => Complex::with_val(bits, (0.0, 0.0)),
            (Kind::Dq, false) => at_bits(z, bits),        // q=0: d/dq picks the j=1 term z
            (Kind::Dz1, false) | (Kind::Dz2, false) => Complex::with_val(bits, (0.0, 0.0)),
        };
        return Ok(EvalResult {
            value,
            tail_bound: Float::with_val(53, 0.0),
            terms_used: kind.min_index() + 1,
        });
    }

    let terms = plan_terms(q_abs, z_abs, eps, kind)?;
    let bits = series_bits(prec, q_abs, z_abs, eps, terms);

    let qh = at_bits(q.as_cplx(), bits);
    let zh = at_bits(z, bits);

    let mut sum = Complex::with_val(bits, (0.0, 0.0));
    let mut t = Complex::with_val(bits, (1.0, 0.0)); // q^{T_j} z^j at j=0
    let mut qp = qh.clone(); // q^{j+1}
    for j in 0..terms {
        let c = kind.coef(j);
        if c == 1.0 {
            sum += &t;
        } else if c != 0.0 {
            sum += (&t * c).complete((bits, bits));
        }
        // advance to t_{j+1} = t_j * q^{j+1} * z
        t *= &qp;
        t *= &zh;
        qp *= &qh;
    }
    // first omitted term (with coefficient)
    let tail = {
        let c = kind.coef(terms);
        let mut m = abs_lowprec(&t);
        m *= 2.0 * c.max(1.0);
        m
    };

    // final rescale and the matching tail rescale
    let (value, tail_bound) = match kind {
        Kind::Theta => (sum, tail),
        Kind::Dz1 => {
            let v = sum / &zh;
            let tb = tail / Float::with_val(53, z_abs);
            (v, tb)
        }
        Kind::Dz2 => {
            let z2 = (&zh * &zh).complete((bits, bits));
            let v = sum / z2;
            let tb = tail / Float::with_val(53, z_abs * z_abs);
            (v, tb)
        }
        Kind::Dq => {
            let v = sum / &qh;
            let tb = tail / Float::with_val(53, q_abs);
            (v, tb)
        }
    };
    Ok(EvalResult { value, tail_bound, terms_used: terms })
}

/// Certified θ(q, z).
pub fn evaluate(q: &ParamQ, z: &Complex, prec: &Precision) -> Result<EvalResult> {
    eval_kind(q, z, Kind::Theta, prec)
}

/// Certified ∂^order θ / ∂z^order, order ∈ {0, 1, 2}.
pub fn evaluate_dz(q: &ParamQ, z: &Complex, order: u32, prec: &Precision) -> Result<EvalResult> {
    match order {
        0 => eval_kind(q, z, Kind::Theta, prec),
        1 => eval_kind(q, z, Kind::Dz1, prec),
        2 => eval_kind(q, z, Kind::Dz2, prec),
        _ => Err(Error::InvalidParam(format!("derivative order must be 0, 1, or 2, got {order}"))),
    }
}

/// Certified ∂θ/∂q.
pub fn evaluate_dq(q: &ParamQ, z: &Complex, prec: &Precision) -> Result<EvalResult> {
    eval_kind(q, z, Kind::Dq, prec)
}

/// |θ(q,x) − 1 − q·x·θ(q,qx)|: residual of the functional equation,
/// ≤ 10·(tail bounds + rounding slack) by construction.
pub fn functional_residual(q: &ParamQ, x: &Complex, prec: &Precision) -> Result<Float> {
    let e1 = evaluate(q, x, prec)?;
    let bits = e1.value.prec().0;
    let qh = at_bits(q.as_cplx(), bits);
    let xh = at_bits(x, bits);
    let qx = (&qh * &xh).complete((bits, bits));
    let e2 = evaluate(q, &qx, prec)?;
    let mut r = e1.value.clone();
    r -= 1.0f64;
    r -= qx * at_bits(&e2.value, bits);
    Ok(abs_lowprec(&r))
}

/// Relative residual of the differential identity 2q·θ_q = 2z·θ_z + z²·θ_zz
/// (normalized by max(1, |2q·θ_q|)). Requires q ≠ 0.
pub fn differential_residual(q: &ParamQ, z: &Complex, prec: &Precision) -> Result<Float> {
    q.require_nonzero()?;
    let dq = evaluate_dq(q, z, prec)?;
    let d1 = evaluate_dz(q, z, 1, prec)?;
    let d2 = evaluate_dz(q, z, 2, prec)?;
    let bits = dq.value.prec().0.max(d1.value.prec().0).max(d2.value.prec().0);
    let qh = at_bits(q.as_cplx(), bits);
    let zh = at_bits(z, bits);
    let lhs = (&qh * at_bits(&dq.value, bits)) * 2.0;
    let mut rhs = (&zh * at_bits(&d1.value, bits)) * 2.0;
    rhs += (&zh * &zh).complete((bits, bits)) * at_bits(&d2.value, bits);
    let scale = abs_lowprec(&lhs).max(&Float::with_val(53, 1.0));
    let mut r = lhs;
    r -= rhs;
    Ok(abs_lowprec(&r) / scale)
}

/// θ value only, at a caller-chosen absolute accuracy; convenience for the
/// inner loops of the zero/spectrum machinery.
pub fn theta(q: &ParamQ, z: &Complex, prec: &Precision) -> Result<Complex> {
    Ok(evaluate(q, z, prec)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::cplx;

    fn p() -> Precision {
        Precision::default()
    }

    #[test]
    fn truncation_order_degenerate() {
        // only the j=0 term is nonzero
        let q0 = ParamQ::real(0.0).unwrap();
        assert_eq!(truncation_order(&q0, &cplx(53, 5.0, 0.0), 1e-12).unwrap(), 1);
        let qh = ParamQ::real(0.5).unwrap();
        assert_eq!(truncation_order(&qh, &cplx(53, 0.0, 0.0), 1e-12).unwrap(), 1);
        assert!(truncation_order(&qh, &cplx(53, 1.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn truncation_order_matches_brute_force_tail() {
        // the rule's certified tail must bound the actual tail of a long sum
        let q = ParamQ::real(0.3).unwrap();
        let z = cplx(53, -10.0, 0.0);
        let n = truncation_order(&q, &z, 1e-12).unwrap();
        // brute force: sum |terms| from n on, at 200 bits
        use rug::ops::Pow;
        let mut tail = Float::with_val(200, 0.0);
        for j in n..(n + 500) {
            let t = Float::with_val(200, 0.3).pow((j * (j + 1) / 2) as u32)
                * Float::with_val(200, 10.0).pow(j as u32);
            tail += t;
        }
        assert!(tail < 1e-12, "actual tail {tail} exceeds eps");
        // and the preceding index must NOT satisfy the rule (minimality)
        assert!(n >= 2);
    }

    #[test]
    fn evaluate_trivial_points() {
        let q0 = ParamQ::real(0.0).unwrap();
        let r = evaluate(&q0, &cplx(53, 7.3, 0.0), &p()).unwrap();
        assert_eq!(r.value.real().to_f64(), 1.0);
        assert_eq!(r.terms_used, 1);
        let qh = ParamQ::real(0.5).unwrap();
        let r = evaluate(&qh, &cplx(53, 0.0, 0.0), &p()).unwrap();
        assert_eq!(r.value.real().to_f64(), 1.0);
    }

    #[test]
    fn evaluate_dz_trivial_points() {
        let q0 = ParamQ::real(0.0).unwrap();
        let r = evaluate_dz(&q0, &cplx(53, 3.0, 0.0), 1, &p()).unwrap();
        assert_eq!(r.value.real().to_f64(), 0.0);
        let q2 = ParamQ::real(0.2).unwrap();
        let r = evaluate_dz(&q2, &cplx(53, 0.0, 0.0), 1, &p()).unwrap();
        assert!((r.value.real().to_f64() - 0.2).abs() < 1e-15);
        assert!(evaluate_dz(&q2, &cplx(53, 1.0, 0.0), 3, &p()).is_err());
    }

    #[test]
    fn evaluate_dq_trivial_points() {
        let q3 = ParamQ::real(0.3).unwrap();
        let r = evaluate_dq(&q3, &cplx(53, 0.0, 0.0), &p()).unwrap();
        assert_eq!(r.value.real().to_f64(), 0.0);
        // q = 0: series remains valid, value is z
        let q0 = ParamQ::real(0.0).unwrap();
        let r = evaluate_dq(&q0, &cplx(53, 4.0, -2.0), &p()).unwrap();
        assert_eq!(r.value.real().to_f64(), 4.0);
        assert_eq!(r.value.imag().to_f64(), -2.0);
    }

    #[test]
    fn bracket_example() {
        // θ(0.5, -4) lies in (0, 0.25) = (0, q^2) at z = -q^{-2}
        let q = ParamQ::real(0.5).unwrap();
        let r = evaluate(&q, &cplx(53, -4.0, 0.0), &p()).unwrap();
        let v = r.value.real().to_f64();
        assert!(v > 0.0 && v < 0.25, "got {v}");
    }

    #[test]
    fn functional_residual_small() {
        let q = ParamQ::real(0.3092).unwrap();
        let r = functional_residual(&q, &cplx(53, -20.0, 0.0), &p()).unwrap();
        assert!(r.to_f64() <= 1e-11, "residual {r}");
        let qn = ParamQ::real(-0.5).unwrap();
        let r = functional_residual(&qn, &cplx(53, 4.5, 0.0), &p()).unwrap();
        assert!(r.to_f64() <= 1e-11, "residual {r}");
        let q0 = ParamQ::real(0.0).unwrap();
        let r = functional_residual(&q0, &cplx(53, 9.0, 0.0), &p()).unwrap();
        assert_eq!(r.to_f64(), 0.0);
    }

    #[test]
    fn differential_identity_small() {
        let q = ParamQ::real(0.2).unwrap();
        let r = differential_residual(&q, &cplx(53, -5.0, 0.0), &p()).unwrap();
        assert!(r.to_f64() <= 1e-10, "residual {r}");
    }

    #[test]
    fn precision_agreement() {
        // coarse and tight evaluations agree within the coarse tail bound
        let q = ParamQ::real(0.9).unwrap();
        let z = cplx(53, -50.0, 0.0);
        let coarse = evaluate(&q, &z, &Precision::default()).unwrap();
        let tight = evaluate(&q, &z, &Precision::new(192, 1e-40).unwrap()).unwrap();
        let d = (coarse.value.clone() - at_bits(&tight.value, coarse.value.prec().0)).abs();
        let db = d.real().to_f64().abs();
        // rounding slack on a value of magnitude ~1.4e11
        let slack = 1.4e11 * (2f64).powi(-(coarse.value.prec().0 as i32) + 8);
        assert!(db <= coarse.tail_bound.to_f64() + slack, "{db} vs {}", coarse.tail_bound);
    }
}
