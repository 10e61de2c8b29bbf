use crate::error::{Error, Result};
use rug::ops::CompleteRound;
use rug::{Complex, Float};

pub const LN2: f64 = core::f64::consts::LN_2;

/// Working-precision request. `mantissa_bits` is a floor: operations escalate
/// beyond it automatically when the series peak or the target accuracy
/// demands more. `target_eps` is the absolute accuracy goal for certified
/// values (tail bounds are measured against it).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Precision {
    pub mantissa_bits: u32,
    pub target_eps: f64,
}

impl Precision {
    pub fn new(mantissa_bits: u32, target_eps: f64) -> Result<Self> {
        if mantissa_bits < 53 {
            return Err(Error::InvalidParam(format!(
                "mantissa_bits must be >= 53, got {mantissa_bits}"
            )));
        }
        if !(target_eps > 0.0) || !target_eps.is_finite() {
            return Err(Error::InvalidParam(format!(
                "target_eps must be positive and finite, got {target_eps}"
            )));
        }
        // guard against requesting accuracy below working precision
        let floor = (2f64).powi(-(mantissa_bits as i32) + 8);
        if target_eps < floor {
            return Err(Error::InvalidParam(format!(
                "target_eps {target_eps} below 2^(-{mantissa_bits}+8) = {floor}"
            )));
        }
        Ok(Precision { mantissa_bits, target_eps })
    }

    /// Tightest valid eps for a bit count (with the 8-bit guard).
    pub fn tight(mantissa_bits: u32) -> Self {
        let eps = (2f64).powi(-(mantissa_bits as i32) + 8);
        Precision { mantissa_bits, target_eps: eps.max(f64::MIN_POSITIVE) }
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision { mantissa_bits: 53, target_eps: 1e-12 }
    }
}

/// The series parameter q, validated to the open unit disk. Stored as an
/// arbitrary-precision complex so iterative solvers can carry refined values
/// without round-tripping through f64.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamQ {
    q: Complex,
}

impl ParamQ {
    pub fn from_cplx(q: Complex) -> Result<Self> {
        let a = abs_f64(&q);
        if !a.is_finite() || a >= 1.0 {
            return Err(Error::InvalidParam(format!("|q| must be < 1, got |q| = {a}")));
        }
        Ok(ParamQ { q })
    }

    pub fn real(re: f64) -> Result<Self> {
        Self::from_cplx(Complex::with_val(53, (re, 0.0)))
    }

    pub fn complex(re: f64, im: f64) -> Result<Self> {
        Self::from_cplx(Complex::with_val(53, (re, im)))
    }

    pub fn as_cplx(&self) -> &Complex {
        &self.q
    }

    /// |q| as f64 (sufficient for truncation/precision planning).
    pub fn abs(&self) -> f64 {
        abs_f64(&self.q)
    }

    pub fn is_zero(&self) -> bool {
        self.q.real().is_zero() && self.q.imag().is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.q.imag().is_zero()
    }

    /// Real part as f64; exact for ParamQ built from f64.
    pub fn re_f64(&self) -> f64 {
        self.q.real().to_f64()
    }

    pub fn im_f64(&self) -> f64 {
        self.q.imag().to_f64()
    }

    /// Reject q = 0 for operations on zeros (θ(0,·) ≡ 1 has none).
    pub fn require_nonzero(&self) -> Result<()> {
        if self.is_zero() {
            return Err(Error::InvalidParam("q = 0 rejected: θ(0,·) ≡ 1 has no zeros".into()));
        }
        Ok(())
    }

    pub fn require_real(&self) -> Result<f64> {
        if !self.is_real() {
            return Err(Error::InvalidParam("operation defined for real q only".into()));
        }
        Ok(self.re_f64())
    }
}

pub fn abs_f64(z: &Complex) -> f64 {
    z.abs_ref().complete((53, 53)).real().to_f64()
}

/// Upgrade a complex value to `bits` working precision (exact embedding).
pub fn at_bits(z: &Complex, bits: u32) -> Complex {
    let mut w = z.clone();
    w.set_prec(bits);
    w
}

pub fn cplx(bits: u32, re: f64, im: f64) -> Complex {
    Complex::with_val(bits, (re, im))
}

pub fn real(bits: u32, x: f64) -> Float {
    Float::with_val(bits, x)
}

/// ln of the largest term modulus of Σ q^{j(j+1)/2} z^j over j ≥ 0, from
/// f64 moduli. The peak sits near j* = ln|z|/(-ln|q|) - 1/2; the j = 0 term
/// pins the result at ≥ 0. Used to size working precision so that absolute
/// accuracy survives cancellation.
pub fn ln_peak_term(q_abs: f64, z_abs: f64) -> f64 {
    if q_abs <= 0.0 || z_abs <= 0.0 {
        return 0.0;
    }
    let lq = q_abs.ln();
    let lz = z_abs.ln();
    if lz <= 0.0 {
        return 0.0;
    }
    let js = (lz / -lq - 0.5).max(0.0);
    let mut best = 0.0f64;
    for j in [js.floor(), js.ceil()] {
        let j = j.max(0.0);
        let t = j * (j + 1.0) / 2.0 * lq + j * lz;
        if t > best {
            best = t;
        }
    }
    best
}

/// Working precision for summing the series at (q, z) to absolute accuracy
/// `eps`: enough bits that the peak term's rounding error stays below eps,
/// plus headroom for accumulation over ~n_terms and a policy floor near the
/// unit circle.
pub fn series_bits(prec: &Precision, q_abs: f64, z_abs: f64, eps: f64, n_terms_hint: usize) -> u32 {
    let peak = ln_peak_term(q_abs, z_abs);
    let need = (peak - eps.max(f64::MIN_POSITIVE).ln()) / LN2;
    let acc = ((n_terms_hint.max(1) as f64).log2()).ceil() as i64 + 16;
    let mut bits = prec.mantissa_bits.max((need.max(0.0).ceil() as i64 + acc).max(53) as u32);
    if q_abs > 0.99 || prec.target_eps < 1e-13 {
        bits = bits.max(128);
    }
    bits
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_guard_rejects_eps_below_working() {
        assert!(Precision::new(53, 1e-15).is_err());
        assert!(Precision::new(64, 1e-15).is_ok());
        assert!(Precision::new(52, 1e-6).is_err());
        assert!(Precision::new(53, -1.0).is_err());
    }

    #[test]
    fn param_q_unit_disk() {
        assert!(ParamQ::real(0.999).is_ok());
        assert!(ParamQ::real(1.0).is_err());
        assert!(ParamQ::real(-1.0).is_err());
        assert!(ParamQ::complex(0.8, 0.7).is_err()); // |q| > 1
        assert!(ParamQ::complex(0.7, 0.7).is_ok());
        assert!(ParamQ::real(0.0).unwrap().require_nonzero().is_err());
    }

    #[test]
    fn peak_estimate_matches_direct_max() {
        for &(q, z) in &[(0.5f64, 100.0f64), (0.9, 50.0), (0.95, 1000.0), (0.3, 2.0)] {
            let mut direct: f64 = 0.0;
            for j in 0..5000u64 {
                let t = (j * (j + 1) / 2) as f64 * q.ln() + j as f64 * z.ln();
                direct = direct.max(t);
            }
            let est = ln_peak_term(q, z);
            assert!((est - direct).abs() < 1e-6, "q={q} z={z}: {est} vs {direct}");
        }
    }

    #[test]
    fn peak_degenerate_cases() {
        assert_eq!(ln_peak_term(0.0, 10.0), 0.0);
        assert_eq!(ln_peak_term(0.5, 0.0), 0.0);
        assert_eq!(ln_peak_term(0.5, 0.5), 0.0); // |z| < 1: peak is the j=0 term
    }
}
