//! Zero counting and isolation for θ(q,·) in disks, annuli, and real intervals.
//!
//! Counting is by the argument principle: θ is entire, so the winding number
//! of θ around a contour equals the number of enclosed zeros.  Every count is
//! validated two ways, a trapezoid estimate of (1/2πi)∮ θ_z/θ dz and an
//! unwrapped-phase winding number, and the contour is rejected when a sample
//! appears to sit too close to a zero.

use crate::error::{Error, Result};
use crate::num::{abs_f64, at_bits, cplx, ln_peak_term, series_bits, ParamQ, Precision};
use crate::series::{evaluate, evaluate_dz};
use rug::ops::CompleteRound;
use rug::{Complex, Float};
use std::f64::consts::PI;

/// √3/(2π), the constant scaling the strong-separation bound |q| ≤ 1 − 1/(α₀n).
pub const ALPHA0: f64 = 0.275_664_447_710_895_95;
/// Largest modulus with one zero per annulus for every k ≥ 1.
pub const C0: f64 = 0.207_875_020_6;

/// Relative threshold under which |θ_z| marks a double zero.
const DOUBLE_ZERO_REL: f64 = 1e-6;
/// A contour sample closer to a zero than `CONTOUR_GUARD`·R rejects the contour.
const CONTOUR_GUARD: f64 = 1e-8;
/// Hard cap on circle samples.
const MAX_SAMPLES: usize = 1 << 17;
/// Quadtree depth limit.
const MAX_DEPTH: usize = 40;

/// A located zero of θ(q,·).
#[derive(Debug, Clone)]
pub struct ZeroRecord {
    pub z: Complex,
    /// |θ(q,z)| at the stored position.
    pub residual: f64,
    /// 1, or 2 when |θ_z| falls under the double-zero threshold.
    pub multiplicity: u32,
    /// k when |q|^{-k+1/2} < |z| < |q|^{-k-1/2}.
    pub annulus_index: Option<i64>,
}

/// Zero count of one annulus |q|^{-k+1/2} < |z| < |q|^{-k-1/2}.
#[derive(Debug, Clone)]
pub struct AnnulusCensus {
    pub k: i64,
    pub count: i64,
    /// Outer-minus-inner raw contour integral before rounding.
    pub contour_integral_raw: f64,
    /// True iff |contour_integral_raw - count| < 0.25.
    pub verified: bool,
}

/// Censuses of annuli n..=k_max and the strong-separation verdict.
#[derive(Debug, Clone)]
pub struct SeparationReport {
    pub n: i64,
    pub q: ParamQ,
    pub per_annulus: Vec<AnnulusCensus>,
    /// True iff every annulus in [n, k_max] holds exactly one zero.
    pub strong: bool,
}

fn exp_clamped(ln_x: f64) -> f64 {
    ln_x.clamp(-700.0, 700.0).exp()
}

fn ln_abs(z: &Complex) -> f64 {
    let a = z.abs_ref().complete((64, 64)).real().clone();
    if a.is_zero() {
        f64::NEG_INFINITY
    } else {
        a.ln().to_f64()
    }
}

fn arg_f64(z: &Complex) -> f64 {
    let y = Float::with_val(64, z.imag());
    let x = Float::with_val(64, z.real());
    y.atan2(&x).to_f64()
}

fn wrap_angle(d: f64) -> f64 {
    d - 2.0 * PI * (d / (2.0 * PI)).round()
}

/// Evaluation precision giving `extra` bits of headroom under the peak series
/// term at radius `z_abs`.
fn contour_precision(prec: &Precision, q_abs: f64, z_abs: f64, extra: u32) -> Result<Precision> {
    let ln_pk = ln_peak_term(q_abs, z_abs);
    let eps = exp_clamped(ln_pk - extra as f64 * core::f64::consts::LN_2);
    let bits = series_bits(prec, q_abs, z_abs, eps, 0) + 32;
    Precision::new(bits.max(prec.mantissa_bits), eps)
}

/// Extra guard bits for evaluations near the real axis of a real parameter.
/// There the terms cancel down to about exp(-pi^2/(2 ln(1/q))) of the peak
/// for q > 0 and exp(-pi^2/(8 ln(1/|q|))) for q < 0, so a peak-relative
/// budget alone leaves absolute noise above the function scale as |q| -> 1.
fn axis_guard_bits(q: &ParamQ) -> u32 {
    if !q.is_real() {
        return 0;
    }
    let qa = q.abs();
    if qa == 0.0 {
        return 0;
    }
    let eps_ln = -qa.ln();
    let nats = if q.re_f64() > 0.0 {
        PI * PI / (2.0 * eps_ln)
    } else {
        PI * PI / (8.0 * eps_ln)
    };
    (nats / core::f64::consts::LN_2).ceil() as u32
}

enum CirclePass {
    /// Samples were too coarse or the precision too low; retry with more bits.
    NeedBits,
    /// A sample sits within the guard distance of a zero.
    TooClose { dist_est: f64 },
    Data { raw_re: f64, raw_im: f64, wind: f64, max_jump: f64 },
}

/// One trapezoid + winding pass over |z| = R with M samples.
fn circle_pass(q: &ParamQ, r: f64, m: usize, extra: u32, prec: &Precision) -> Result<CirclePass> {
    let eprec = contour_precision(prec, q.abs(), r, extra)?;
    let bits = eprec.mantissa_bits;
    let ln_pk = ln_peak_term(q.abs(), r);
    let mirror = q.as_cplx().imag().is_zero();
    let half = m / 2;

    let mut th: Vec<Complex> = Vec::with_capacity(m);
    let mut w_re = vec![0.0f64; m];
    let mut w_im = vec![0.0f64; m];
    let top = if mirror { half } else { m - 1 };
    for s in 0..=top {
        let phi = 2.0 * PI * s as f64 / m as f64;
        let mut z = cplx(bits, phi.cos(), phi.sin());
        z *= Float::with_val(bits, r);
        let t = evaluate(q, &z, &eprec)?.value;
        let tz = evaluate_dz(q, &z, 1, &eprec)?.value;
        let w = (&z * &tz).complete((bits, bits)) / &t;
        w_re[s] = w.real().to_f64();
        w_im[s] = w.imag().to_f64();
        th.push(t);
    }
    if mirror {
        // real q: θ(conj z) = conj θ(z), so the lower semicircle mirrors the upper
        for s in half + 1..m {
            let t = th[m - s].clone().conj();
            let w_mirror = (w_re[m - s], -w_im[m - s]);
            w_re[s] = w_mirror.0;
            w_im[s] = w_mirror.1;
            th.push(t);
        }
    }

    // reject samples drowned in cancellation noise at this precision
    let floor_ln = ln_pk - (extra.saturating_sub(40)) as f64 * core::f64::consts::LN_2;
    let lns: Vec<f64> = th.iter().map(ln_abs).collect();
    if lns.iter().any(|&l| l < floor_ln) {
        return Ok(CirclePass::NeedBits);
    }

    // distance-to-zero estimate |θ|/|θ′| with |θ′| taken from neighbor differences
    let seg = 2.0 * PI * r / m as f64;
    let mut min_dist = f64::INFINITY;
    for s in 0..m {
        let prev = &th[(s + m - 1) % m];
        let next = &th[(s + 1) % m];
        let d1 = (next - &th[s]).complete((64, 64));
        let d2 = (prev - &th[s]).complete((64, 64));
        let dmax = abs_ln_max(&d1, &d2);
        // |θ_s| / (|Δθ|/seg), computed in logs to survive huge magnitudes
        let dist_ln = lns[s] - dmax + seg.ln();
        min_dist = min_dist.min(exp_clamped(dist_ln - r.ln()));
    }
    if min_dist < CONTOUR_GUARD {
        return Ok(CirclePass::TooClose { dist_est: min_dist * r });
    }

    let raw_re = w_re.iter().sum::<f64>() / m as f64;
    let raw_im = w_im.iter().sum::<f64>() / m as f64;

    let args: Vec<f64> = th.iter().map(arg_f64).collect();
    let mut wind = 0.0;
    let mut max_jump: f64 = 0.0;
    for s in 0..m {
        let d = wrap_angle(args[(s + 1) % m] - args[s]);
        wind += d;
        max_jump = max_jump.max(d.abs());
    }
    Ok(CirclePass::Data { raw_re, raw_im, wind: wind / (2.0 * PI), max_jump })
}

fn abs_ln_max(a: &Complex, b: &Complex) -> f64 {
    ln_abs(a).max(ln_abs(b))
}

/// Argument-principle count plus the raw pre-rounding integral.
pub(crate) fn disk_count_raw(q: &ParamQ, r: f64, prec: &Precision) -> Result<(i64, f64)> {
    q.require_nonzero()?;
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParam(format!("disk radius must be positive, got {r}")));
    }
    let mut m = 256usize;
    let mut extra = 96u32;
    let mut prev_raw: Option<f64> = None;
    loop {
        match circle_pass(q, r, m, extra, prec)? {
            CirclePass::NeedBits => {
                if extra >= 4096 {
                    return Err(Error::NoConvergence(format!(
                        "contour at R={r} still cancellation-dominated at {extra} guard bits"
                    )));
                }
                extra *= 2;
            }
            CirclePass::TooClose { dist_est } => {
                return Err(Error::ContourTooCloseToZero { radius: r, dist_est })
            }
            CirclePass::Data { raw_re, raw_im, wind, max_jump } => {
                let n = raw_re.round();
                let settled = prev_raw.is_some_and(|p| (p - raw_re).abs() < 0.05);
                if settled
                    && (raw_re - n).abs() < 0.12
                    && raw_im.abs() < 0.05
                    && max_jump < 0.5 * PI
                    && (wind - n).abs() < 0.25
                    && n >= 0.0
                {
                    return Ok((n as i64, raw_re));
                }
                prev_raw = Some(raw_re);
                if m >= MAX_SAMPLES {
                    return Err(Error::NonIntegerCount { raw: raw_re, samples: m });
                }
                m *= 2;
            }
        }
    }
}

/// Number of zeros of θ(q,·) in |z| < R by the argument principle.
pub fn count_in_disk(q: &ParamQ, r: f64, prec: &Precision) -> Result<i64> {
    Ok(disk_count_raw(q, r, prec)?.0)
}

/// Zero census of the annulus |q|^{-k+1/2} < |z| < |q|^{-k-1/2}.
pub fn annulus_census(q: &ParamQ, k: i64, prec: &Precision) -> Result<AnnulusCensus> {
    q.require_nonzero()?;
    if k < 1 {
        return Err(Error::InvalidParam(format!("annulus index must be >= 1, got {k}")));
    }
    let aq = q.abs();
    let (c_in, raw_in) = disk_count_raw(q, aq.powf(-(k as f64 - 0.5)), prec)?;
    let (c_out, raw_out) = disk_count_raw(q, aq.powf(-(k as f64 + 0.5)), prec)?;
    let count = c_out - c_in;
    let raw = raw_out - raw_in;
    Ok(AnnulusCensus { k, count, contour_integral_raw: raw, verified: (raw - count as f64).abs() < 0.25 })
}

/// Verify one-zero-per-annulus for k ∈ [n, k_max], sharing each boundary
/// circle between the two annuli that touch it.
pub fn check_strong_separation(q: &ParamQ, n: i64, k_max: i64, prec: &Precision) -> Result<SeparationReport> {
    q.require_nonzero()?;
    if n < 5 {
        return Err(Error::InvalidParam(format!("strong separation needs n >= 5, got {n}")));
    }
    let bound = 1.0 - 1.0 / (ALPHA0 * n as f64);
    if q.abs() > bound + 1e-12 {
        return Err(Error::InvalidParam(format!(
            "strong separation at n={n} needs |q| <= {bound:.4}, got {:.4}",
            q.abs()
        )));
    }
    if k_max < n {
        return Err(Error::InvalidParam(format!("k_max={k_max} must be >= n={n}")));
    }
    let aq = q.abs();
    let mut boundary = Vec::new();
    for k in n..=k_max + 1 {
        boundary.push(disk_count_raw(q, aq.powf(-(k as f64 - 0.5)), prec)?);
    }
    let mut per_annulus = Vec::new();
    let mut strong = true;
    for (i, k) in (n..=k_max).enumerate() {
        let count = boundary[i + 1].0 - boundary[i].0;
        let raw = boundary[i + 1].1 - boundary[i].1;
        strong &= count == 1;
        per_annulus.push(AnnulusCensus {
            k,
            count,
            contour_integral_raw: raw,
            verified: (raw - count as f64).abs() < 0.25,
        });
    }
    Ok(SeparationReport { n, q: q.clone(), per_annulus, strong })
}

/// Annulus index k with |q|^{-k+1/2} < |z| < |q|^{-k-1/2}, when one exists.
pub fn annulus_index_of(q_abs: f64, z_abs: f64) -> Option<i64> {
    if z_abs <= 0.0 {
        return None;
    }
    let t = z_abs.ln() / (1.0 / q_abs).ln();
    let k = t.round();
    if k >= 1.0 && (t - k).abs() < 0.5 - 1e-9 {
        Some(k as i64)
    } else {
        None
    }
}

fn double_zero_threshold(tz_abs: f64, tzz_abs: f64, z_abs: f64) -> bool {
    tz_abs < DOUBLE_ZERO_REL * (1.0 + tzz_abs * z_abs)
}

fn record_at(q: &ParamQ, z: &Complex, prec: &Precision) -> Result<ZeroRecord> {
    let z_abs = abs_f64(z);
    let eprec = contour_precision(prec, q.abs(), z_abs.max(1.0), 96 + axis_guard_bits(q))?;
    let t = evaluate(q, z, &eprec)?.value;
    let tz = evaluate_dz(q, z, 1, &eprec)?.value;
    let tzz = evaluate_dz(q, z, 2, &eprec)?.value;
    let mult = if double_zero_threshold(abs_f64(&tz), abs_f64(&tzz), z_abs) { 2 } else { 1 };
    Ok(ZeroRecord {
        z: z.clone(),
        residual: abs_f64(&t),
        multiplicity: mult,
        annulus_index: annulus_index_of(q.abs(), z_abs),
    })
}

/// Newton-refine a zero from `z0`.
pub fn refine_zero(q: &ParamQ, z0: &Complex, prec: &Precision) -> Result<ZeroRecord> {
    q.require_nonzero()?;
    let guard = 96 + axis_guard_bits(q);
    // near the unit circle the peak term grows so fast in |z| that a generous
    // radius allowance would consume the whole noise margin, so the budget
    // hugs the running iterate and is rebuilt when the iterate drifts
    let mut cover = abs_f64(z0).max(1.0);
    let mut eprec = contour_precision(prec, q.abs(), 1.02 * cover, guard)?;
    let mut bits = eprec.mantissa_bits;
    let mut z = at_bits(z0, bits);
    let mut last_steps: Vec<f64> = Vec::new();
    for _ in 0..80 {
        let z_now = abs_f64(&z).max(1.0);
        if z_now > 1.02 * cover || z_now < 0.98 * cover {
            cover = z_now;
            eprec = contour_precision(prec, q.abs(), 1.02 * cover, guard)?;
            bits = eprec.mantissa_bits;
            z = at_bits(&z, bits);
        }
        let t = evaluate(q, &z, &eprec)?.value;
        let tz = evaluate_dz(q, &z, 1, &eprec)?.value;
        if tz.is_zero() {
            return Err(Error::DegenerateJacobian { det: 0.0 });
        }
        let step = (&t / &tz).complete((bits, bits));
        let step_abs = abs_f64(&step);
        z -= &step;
        let z_abs = abs_f64(&z);
        if step_abs <= prec.target_eps * z_abs.max(1.0) {
            let rec = record_at(q, &z, prec)?;
            let tz_abs = abs_f64(&evaluate_dz(q, &z, 1, &eprec)?.value);
            let scale = (tz_abs * z_abs).max(1.0);
            if rec.residual <= prec.target_eps * scale {
                return Ok(rec);
            }
        }
        last_steps.push(step_abs);
        if last_steps.len() >= 6 {
            let n = last_steps.len();
            // a double zero makes Newton contract linearly with ratio near 1/2
            let linear = (1..6).all(|i| {
                let r0 = last_steps[n - i];
                let r1 = last_steps[n - i - 1];
                r1 > 0.0 && r0 / r1 > 0.25 && r0 / r1 < 0.8
            });
            if linear {
                let tz_abs = abs_f64(&evaluate_dz(q, &z, 1, &eprec)?.value);
                let tzz_abs = abs_f64(&evaluate_dz(q, &z, 2, &eprec)?.value);
                if double_zero_threshold(tz_abs, tzz_abs, z_abs) {
                    return Err(Error::DoubleZeroSuspected {
                        z_re: z.real().to_f64(),
                        z_im: z.imag().to_f64(),
                    });
                }
            }
        }
    }
    Err(Error::NoConvergence(format!(
        "zero refinement from ({:.6e}, {:.6e}) did not converge",
        z0.real().to_f64(),
        z0.imag().to_f64()
    )))
}

enum RectCount {
    Count(i64),
    EdgeTooClose,
}

/// Winding number of θ along a rectangle boundary by adaptive phase tracking.
fn rect_winding(
    q: &ParamQ,
    cx: f64,
    cy: f64,
    hw: f64,
    hh: f64,
    prec: &Precision,
) -> Result<RectCount> {
    let corner_r = ((cx.abs() + hw).powi(2) + (cy.abs() + hh).powi(2)).sqrt();
    let mut extra = 96u32;
    loop {
        let eprec = contour_precision(prec, q.abs(), corner_r.max(1.0), extra)?;
        let ln_pk = ln_peak_term(q.abs(), corner_r.max(1.0));
        let floor_ln = ln_pk - (extra - 40) as f64 * core::f64::consts::LN_2;
        let corners = [
            (cx - hw, cy - hh),
            (cx + hw, cy - hh),
            (cx + hw, cy + hh),
            (cx - hw, cy + hh),
        ];
        let perim = 4.0 * (hw + hh);
        let mut need_bits = false;
        let mut too_close = false;
        let mut wind = 0.0f64;
        'edges: for e in 0..4 {
            let (x0, y0) = corners[e];
            let (x1, y1) = corners[(e + 1) % 4];
            // walk the edge keeping each phase step under pi/2
            let mut stack = vec![(1.0f64, eval_pt(q, x1, y1, &eprec)?)];
            let mut t_cur = 0.0f64;
            let mut f_cur = eval_pt(q, x0, y0, &eprec)?;
            let mut splits = 0usize;
            while let Some((t_next, f_next)) = stack.pop() {
                if f_cur.1 < floor_ln || f_next.1 < floor_ln {
                    need_bits = true;
                    break 'edges;
                }
                let d = wrap_angle(f_next.2 - f_cur.2);
                let seg = (t_next - t_cur) * ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
                // |θ|/|θ′| distance estimate over this sub-segment
                let df = (&f_next.0 - &f_cur.0).complete((64, 64));
                let df_ln = ln_abs(&df);
                if df_ln > f64::NEG_INFINITY {
                    let dist_ln = f_cur.1.min(f_next.1) - df_ln + seg.ln();
                    if exp_clamped(dist_ln) < 1e-9 * perim {
                        too_close = true;
                        break 'edges;
                    }
                }
                if splits > 400 {
                    too_close = true;
                    break 'edges;
                }
                let tm = 0.5 * (t_cur + t_next);
                let fm = eval_pt(q, x0 + (x1 - x0) * tm, y0 + (y1 - y0) * tm, &eprec)?;
                let d1 = wrap_angle(fm.2 - f_cur.2);
                let d2 = wrap_angle(f_next.2 - fm.2);
                // accept a step only when the midpoint phase agrees with it
                if d.abs() < 1.3 && d1.abs() < 1.1 && d2.abs() < 1.1 && (d1 + d2 - d).abs() < 1e-6 {
                    wind += d;
                    t_cur = t_next;
                    f_cur = f_next;
                } else {
                    splits += 1;
                    stack.push((t_next, f_next));
                    stack.push((tm, fm));
                }
            }
        }
        if need_bits {
            if extra >= 4096 {
                return Err(Error::NoConvergence(
                    "cell contour cancellation-dominated at precision cap".into(),
                ));
            }
            extra *= 2;
            continue;
        }
        if too_close {
            return Ok(RectCount::EdgeTooClose);
        }
        let w = wind / (2.0 * PI);
        let n = w.round();
        if (w - n).abs() > 0.15 || n < 0.0 {
            if extra >= 4096 {
                return Err(Error::NoConvergence(format!("cell winding {w} is not an integer")));
            }
            extra *= 2;
            continue;
        }
        return Ok(RectCount::Count(n as i64));
    }
}

/// Evaluate θ at a point, returning (value, ln|θ|, arg θ).
fn eval_pt(q: &ParamQ, x: f64, y: f64, eprec: &Precision) -> Result<(Complex, f64, f64)> {
    let z = cplx(eprec.mantissa_bits, x, y);
    let t = evaluate(q, &z, eprec)?.value;
    let l = ln_abs(&t);
    let a = arg_f64(&t);
    Ok((t, l, a))
}

struct Cell {
    cx: f64,
    cy: f64,
    hw: f64,
    hh: f64,
    depth: usize,
    count: i64,
}

/// All zeros of θ(q,·) with |z| < R, isolated by quadtree subdivision and
/// polished by Newton.
pub fn zeros_in_disk(q: &ParamQ, r: f64, prec: &Precision) -> Result<Vec<ZeroRecord>> {
    let total = count_in_disk(q, r, prec)?;
    if total == 0 {
        return Ok(Vec::new());
    }
    // the root box is offset so box edges avoid the axes where zeros cluster
    let cx0 = 0.00731 * r;
    let cy0 = 0.00549 * r;
    let half0 = 1.0123 * r;
    let root_count = match rect_winding(q, cx0, cy0, half0, half0, prec)? {
        RectCount::Count(n) => n,
        RectCount::EdgeTooClose => {
            return Err(Error::NoConvergence("root cell boundary passes through a zero".into()))
        }
    };
    let mut stack = vec![Cell { cx: cx0, cy: cy0, hw: half0, hh: half0, depth: 0, count: root_count }];
    let mut found: Vec<ZeroRecord> = Vec::new();
    while let Some(cell) = stack.pop() {
        match cell.count {
            0 => {}
            1 => {
                let z0 = cplx(prec.mantissa_bits.max(64), cell.cx, cell.cy);
                let rec = refine_zero(q, &z0, prec)?;
                let zx = rec.z.real().to_f64();
                let zy = rec.z.imag().to_f64();
                let inx = (zx - cell.cx).abs() <= cell.hw * 1.25 + 1e-14 * r;
                let iny = (zy - cell.cy).abs() <= cell.hh * 1.25 + 1e-14 * r;
                if inx && iny {
                    found.push(rec);
                } else {
                    split_cell(q, &cell, prec, &mut stack)?;
                }
            }
            2 if cell.hw + cell.hh < 1e-5 * r => {
                // unresolvable pair: try the double-zero normal form, Newton on θ_z
                let z0 = cplx(prec.mantissa_bits.max(64), cell.cx, cell.cy);
                match refine_theta_dz_zero(q, &z0, prec) {
                    Ok(Some(rec)) => found.push(rec),
                    _ => {
                        if cell.depth >= MAX_DEPTH {
                            return Err(Error::BudgetExceeded { depth: cell.depth });
                        }
                        split_cell(q, &cell, prec, &mut stack)?;
                    }
                }
            }
            _ => {
                if cell.depth >= MAX_DEPTH {
                    return Err(Error::BudgetExceeded { depth: cell.depth });
                }
                split_cell(q, &cell, prec, &mut stack)?;
            }
        }
    }
    let mut inside: Vec<ZeroRecord> =
        found.into_iter().filter(|rec| abs_f64(&rec.z) < r).collect();
    let total_found: i64 = inside.iter().map(|rec| rec.multiplicity as i64).sum();
    if total_found != total {
        return Err(Error::NoConvergence(format!(
            "disk count {total} but subdivision isolated {total_found}"
        )));
    }
    inside.sort_by(|a, b| {
        let ka = (abs_f64(&a.z), arg_f64(&a.z));
        let kb = (abs_f64(&b.z), arg_f64(&b.z));
        ka.partial_cmp(&kb).unwrap()
    });
    Ok(inside)
}

/// Newton on θ_z at a suspected double zero; accepts only if θ itself vanishes.
fn refine_theta_dz_zero(q: &ParamQ, z0: &Complex, prec: &Precision) -> Result<Option<ZeroRecord>> {
    let guard = 128 + axis_guard_bits(q);
    // same drifting budget as in refine_zero: a wide radius allowance would
    // eat the margin near the unit circle
    let mut cover = abs_f64(z0).max(1.0);
    let mut eprec = contour_precision(prec, q.abs(), 1.02 * cover, guard)?;
    let mut bits = eprec.mantissa_bits;
    let mut z = at_bits(z0, bits);
    for _ in 0..60 {
        let z_now = abs_f64(&z).max(1.0);
        if z_now > 1.02 * cover || z_now < 0.98 * cover {
            cover = z_now;
            eprec = contour_precision(prec, q.abs(), 1.02 * cover, guard)?;
            bits = eprec.mantissa_bits;
            z = at_bits(&z, bits);
        }
        let tz = evaluate_dz(q, &z, 1, &eprec)?.value;
        let tzz = evaluate_dz(q, &z, 2, &eprec)?.value;
        if tzz.is_zero() {
            return Ok(None);
        }
        let step = (&tz / &tzz).complete((bits, bits));
        let step_abs = abs_f64(&step);
        z -= &step;
        if step_abs <= prec.target_eps * abs_f64(&z).max(1.0) {
            let t = evaluate(q, &z, &eprec)?.value;
            let tzz_abs = abs_f64(&evaluate_dz(q, &z, 2, &eprec)?.value);
            let z_abs = abs_f64(&z);
            let scale = (tzz_abs * z_abs * z_abs).max(1.0);
            if abs_f64(&t) <= 100.0 * prec.target_eps * scale {
                let mut rec = record_at(q, &z, prec)?;
                rec.multiplicity = 2;
                return Ok(Some(rec));
            }
            return Ok(None);
        }
    }
    Ok(None)
}

fn split_cell(q: &ParamQ, cell: &Cell, prec: &Precision, stack: &mut Vec<Cell>) -> Result<()> {
    // wiggle the split point off zeros sitting on the midlines
    const FRACS: [f64; 4] = [0.5, 0.47, 0.53, 0.44];
    'fracs: for &f in FRACS.iter() {
        let sx = cell.cx - cell.hw + 2.0 * cell.hw * f;
        let sy = cell.cy - cell.hh + 2.0 * cell.hh * f;
        let xr = [(cell.cx - cell.hw, sx), (sx, cell.cx + cell.hw)];
        let yr = [(cell.cy - cell.hh, sy), (sy, cell.cy + cell.hh)];
        let mut children = Vec::with_capacity(4);
        let mut sum = 0i64;
        for (x0, x1) in xr.iter() {
            for (y0, y1) in yr.iter() {
                let c = Cell {
                    cx: 0.5 * (x0 + x1),
                    cy: 0.5 * (y0 + y1),
                    hw: 0.5 * (x1 - x0),
                    hh: 0.5 * (y1 - y0),
                    depth: cell.depth + 1,
                    count: 0,
                };
                match rect_winding(q, c.cx, c.cy, c.hw, c.hh, prec)? {
                    RectCount::EdgeTooClose => continue 'fracs,
                    RectCount::Count(n) => {
                        children.push(Cell { count: n, ..c });
                        sum += n;
                    }
                }
            }
        }
        if sum != cell.count {
            continue 'fracs;
        }
        stack.extend(children);
        return Ok(());
    }
    Err(Error::NoConvergence(
        "no subdivision of a cell avoided its boundary zeros".into(),
    ))
}

/// Real zeros of θ(q,·) in the half-open interval [lo, hi), for real q.
///
/// Zeros are found by geometric sign-change scan with dip refinement; a
/// sign-preserving dip reaching the residual floor is recorded as one
/// multiplicity-2 zero.  For 0 < q ≤ c₀ the count is cross-checked against
/// disk-count differences whenever the endpoints sit safely between annuli.
pub fn real_zeros_in_interval(
    q: &ParamQ,
    lo: f64,
    hi: f64,
    prec: &Precision,
) -> Result<Vec<ZeroRecord>> {
    let qr = q.require_real()?;
    q.require_nonzero()?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParam(format!("bad interval [{lo}, {hi})")));
    }
    let mut out: Vec<ZeroRecord> = Vec::new();
    if qr > 0.0 {
        scan_side(q, lo, hi, -1, (1.0 / qr).powf(1.0 / 8.0), 0.45 * qr.powf(-0.5), prec, &mut out)?;
        cross_check_positive_q(q, qr, lo, hi, &out, prec)?;
    } else {
        let rho = -qr;
        // negative-axis zeros sit near -rho^{-even}, positive near rho^{-odd};
        // same-axis neighbors are a factor rho^{-2} apart
        let ratio = (1.0 / rho).powf(1.0 / 4.0);
        scan_side(q, lo, hi, -1, ratio, 0.45 * rho.powf(-1.5), prec, &mut out)?;
        scan_side(q, lo, hi, 1, ratio, 0.45 * rho.powf(-0.5), prec, &mut out)?;
    }
    out.sort_by(|a, b| a.z.real().to_f64().partial_cmp(&b.z.real().to_f64()).unwrap());
    Ok(out)
}

/// Scan one sign of the real axis over [lo, hi) ∩ (sign side), geometric step.
#[allow(clippy::too_many_arguments)]
fn scan_side(
    q: &ParamQ,
    lo: f64,
    hi: f64,
    side: i32,
    ratio: f64,
    min_start: f64,
    prec: &Precision,
    out: &mut Vec<ZeroRecord>,
) -> Result<()> {
    // magnitude range of this side's overlap with [lo, hi)
    let (m_lo, m_hi) = if side < 0 {
        if lo >= 0.0 {
            return Ok(());
        }
        (hi.min(0.0).abs(), lo.abs())
    } else {
        if hi <= 0.0 {
            return Ok(());
        }
        (lo.max(0.0), hi)
    };
    let start = m_lo.max(min_start);
    if start >= m_hi {
        return Ok(());
    }
    let steps = ((m_hi / start).ln() / ratio.ln()).ceil() as usize + 1;
    let mut mags = Vec::with_capacity(steps + 1);
    let mut x = start;
    for _ in 0..=steps {
        mags.push(x.min(m_hi));
        if x >= m_hi {
            break;
        }
        x *= ratio;
    }
    let guard = 96 + axis_guard_bits(q);
    let vals: Result<Vec<Float>> = mags
        .iter()
        .map(|&m| {
            // per-point budget: the peak grows fast in |z| near the unit
            // circle, so one outer-radius precision would waste bits inside
            // while an inner one would be noise outside
            let ep = contour_precision(prec, q.abs(), m, guard)?;
            let z = cplx(ep.mantissa_bits, side as f64 * m, 0.0);
            Ok(evaluate(q, &z, &ep)?.value.real().clone())
        })
        .collect();
    let vals = vals?;
    walk_for_zeros(q, side, &mags, &vals, lo, hi, 0, prec, guard, out)
}

/// Detect sign changes and suspicious dips over one magnitude grid.
#[allow(clippy::too_many_arguments)]
fn walk_for_zeros(
    q: &ParamQ,
    side: i32,
    mags: &[f64],
    vals: &[Float],
    lo: f64,
    hi: f64,
    depth: usize,
    prec: &Precision,
    guard: u32,
    out: &mut Vec<ZeroRecord>,
) -> Result<()> {
    let n = vals.len();
    for i in 0..n - 1 {
        let sa = vals[i].is_sign_negative();
        let sb = vals[i + 1].is_sign_negative();
        if sa != sb && !vals[i].is_zero() {
            let eprec = contour_precision(prec, q.abs(), mags[i].max(mags[i + 1]), guard)?;
            let x = bisect_real(q, side, mags[i], mags[i + 1], &eprec)?;
            push_real_zero(q, x * side as f64, lo, hi, prec, out)?;
            continue;
        }
        // a dip without sign change: refine; at max depth test for a touch zero
        if i + 2 < n {
            let a = ln_float(&vals[i]);
            let b = ln_float(&vals[i + 1]);
            let c = ln_float(&vals[i + 2]);
            let deep_dip = b < a && b < c && b < a.min(c) + (0.3f64).ln();
            if deep_dip {
                if depth >= 3 {
                    // sign-preserving local minimum at the residual floor: a double zero
                    if let Some(rec) = try_touch_zero(q, side, mags[i + 1], prec)? {
                        let zx = rec.z.real().to_f64();
                        if lo <= zx && zx < hi && !out.iter().any(|r| close(r, zx)) {
                            out.push(rec);
                        }
                    }
                    continue;
                }
                let sub = 12usize;
                let r2 = (mags[i + 2] / mags[i]).powf(1.0 / sub as f64);
                let mut smags = Vec::with_capacity(sub + 1);
                let mut sx = mags[i];
                for _ in 0..=sub {
                    smags.push(sx);
                    sx *= r2;
                }
                let svals: Result<Vec<Float>> = smags
                    .iter()
                    .map(|&m| {
                        let ep = contour_precision(prec, q.abs(), m, guard)?;
                        let z = cplx(ep.mantissa_bits, side as f64 * m, 0.0);
                        Ok(evaluate(q, &z, &ep)?.value.real().clone())
                    })
                    .collect();
                let svals = svals?;
                walk_for_zeros(q, side, &smags, &svals, lo, hi, depth + 1, prec, guard, out)?;
            }
        }
    }
    Ok(())
}

fn ln_float(v: &Float) -> f64 {
    let a = v.clone().abs();
    if a.is_zero() {
        f64::NEG_INFINITY
    } else {
        a.ln().to_f64()
    }
}

fn close(r: &ZeroRecord, zx: f64) -> bool {
    let rx = r.z.real().to_f64();
    (rx - zx).abs() <= 1e-9 * (rx.abs() + zx.abs())
}

fn bisect_real(q: &ParamQ, side: i32, m_lo: f64, m_hi: f64, eprec: &Precision) -> Result<f64> {
    let bits = eprec.mantissa_bits;
    let mut a = Float::with_val(bits, m_lo);
    let mut b = Float::with_val(bits, m_hi);
    let za = cplx(bits, side as f64 * m_lo, 0.0);
    let mut fa_neg = evaluate(q, &za, eprec)?.value.real().is_sign_negative();
    for _ in 0..90 {
        let m = (&a + &b).complete(bits) / 2u32;
        let xm = Float::with_val(bits, side) * &m;
        let zm = Complex::with_val(bits, (xm, Float::new(bits)));
        let fm = evaluate(q, &zm, eprec)?.value;
        let fm_neg = fm.real().is_sign_negative();
        if fm.real().is_zero() {
            return Ok(m.to_f64());
        }
        if fm_neg == fa_neg {
            a = m;
            fa_neg = fm_neg;
        } else {
            b = m;
        }
        let gap = Float::with_val(64, &b - &a);
        if gap.to_f64() <= 1e-18 * m_hi {
            break;
        }
    }
    Ok(((&a + &b).complete(bits) / 2u32).to_f64())
}

fn push_real_zero(
    q: &ParamQ,
    x: f64,
    lo: f64,
    hi: f64,
    prec: &Precision,
    out: &mut Vec<ZeroRecord>,
) -> Result<()> {
    let z0 = cplx(prec.mantissa_bits.max(64), x, 0.0);
    let mut rec = refine_zero(q, &z0, prec)?;
    // the refined zero of a real-coefficient problem is real
    let zx = rec.z.real().to_f64();
    let bits = rec.z.prec().0;
    let zre = rec.z.real().clone();
    rec.z = Complex::with_val(bits, (zre, Float::new(bits)));
    if lo <= zx && zx < hi && !out.iter().any(|r| close(r, zx)) {
        out.push(rec);
    }
    Ok(())
}

/// Newton on θ_z from a dip bottom; accept as a touch (double) zero only if θ
/// reaches its curvature-scaled residual floor.
fn try_touch_zero(q: &ParamQ, side: i32, mag: f64, prec: &Precision) -> Result<Option<ZeroRecord>> {
    let z0 = cplx(prec.mantissa_bits.max(64), side as f64 * mag, 0.0);
    refine_theta_dz_zero(q, &z0, prec)
}

/// For 0 < q ≤ c₀ every zero is real and negative, so a scan over [lo, hi) can
/// be validated against disk counts when both endpoint radii sit strictly
/// between annuli.
fn cross_check_positive_q(
    q: &ParamQ,
    qr: f64,
    lo: f64,
    hi: f64,
    found: &[ZeroRecord],
    prec: &Precision,
) -> Result<()> {
    if qr > C0 {
        return Ok(());
    }
    let safe = |radius: f64| -> bool {
        if radius < qr.powf(-0.5) {
            return radius > 0.0;
        }
        let t = radius.ln() / (1.0 / qr).ln();
        (t - t.round()).abs() > 0.15 && (t - t.floor() - 0.5).abs() > 0.35
    };
    let r_hi = lo.abs();
    let r_lo = hi.min(0.0).abs();
    if !safe(r_hi) || (r_lo > 0.0 && !safe(r_lo)) {
        return Ok(());
    }
    let outer = count_in_disk(q, r_hi, prec)?;
    let inner = if r_lo > 0.0 && r_lo > qr.powf(-0.5) { count_in_disk(q, r_lo, prec)? } else { 0 };
    let expected = outer - inner;
    let got: i64 = found.iter().map(|r| r.multiplicity as i64).sum();
    if expected != got {
        return Err(Error::NoConvergence(format!(
            "real-axis scan found {got} zeros in [{lo}, {hi}) but contours count {expected}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::cplx;

    fn prec() -> Precision {
        Precision::default()
    }

    #[test]
    fn disk_counts_small_q() {
        let q = ParamQ::real(0.2).unwrap();
        let r1 = 0.2f64.powf(-1.5);
        assert_eq!(count_in_disk(&q, r1, &prec()).unwrap(), 1);
        let r0 = 0.2f64.powf(-0.5);
        assert_eq!(count_in_disk(&q, r0, &prec()).unwrap(), 0);
    }

    #[test]
    fn disk_count_five_zeros() {
        let q = ParamQ::real(0.3).unwrap();
        let r = 0.3f64.powf(-5.5);
        assert_eq!(count_in_disk(&q, r, &prec()).unwrap(), 5);
    }

    #[test]
    fn disk_count_rejects_bad_input() {
        let q0 = ParamQ::real(0.0).unwrap();
        assert!(matches!(count_in_disk(&q0, 5.0, &prec()), Err(Error::InvalidParam(_))));
        let q = ParamQ::real(0.5).unwrap();
        assert!(matches!(count_in_disk(&q, -1.0, &prec()), Err(Error::InvalidParam(_))));
    }

    #[test]
    fn annulus_counts() {
        let q = ParamQ::real(0.15).unwrap();
        let c = annulus_census(&q, 3, &prec()).unwrap();
        assert_eq!(c.count, 1);
        assert!(c.verified);
        let q = ParamQ::real(0.5).unwrap();
        let c = annulus_census(&q, 8, &prec()).unwrap();
        assert_eq!(c.count, 1);
        assert!(c.verified);
    }

    #[test]
    fn zeros_in_disk_first_annulus() {
        let q = ParamQ::real(0.1).unwrap();
        let r = 0.1f64.powf(-1.5);
        let zs = zeros_in_disk(&q, r, &prec()).unwrap();
        assert_eq!(zs.len(), 1);
        let z = zs[0].z.real().to_f64();
        assert!(zs[0].z.imag().to_f64().abs() < 1e-20);
        // first zero of θ(0.1,·), frozen from an mpmath Newton solve
        assert!((z - -11.25180120987569359940051).abs() < 1e-10, "got {z}");
        assert_eq!(zs[0].annulus_index, Some(1));
        assert_eq!(zs[0].multiplicity, 1);
    }

    #[test]
    fn refine_zero_converges_and_flags_double() {
        let q = ParamQ::real(0.1).unwrap();
        let z0 = cplx(64, -9.5, 0.0);
        let rec = refine_zero(&q, &z0, &prec()).unwrap();
        assert!((rec.z.real().to_f64() - -11.25180120987569359940051).abs() < 1e-10);

        // at the first positive spectral point the innermost pair has merged
        let qs = ParamQ::real(0.309_249_338_600_077_48).unwrap();
        let z0 = cplx(64, -7.503, 0.0);
        match refine_zero(&qs, &z0, &prec()) {
            Err(Error::DoubleZeroSuspected { z_re, .. }) => {
                assert!((z_re - -7.5032559642441924).abs() < 1e-2, "z_re={z_re}")
            }
            other => panic!("expected DoubleZeroSuspected, got {other:?}"),
        }
    }

    #[test]
    fn real_interval_membership_is_by_refined_position() {
        let q = ParamQ::real(0.2).unwrap();
        // ξ₁(0.2) ≈ -6.71 sits left of -6, so [-6, 0) holds no zero
        let zs = real_zeros_in_interval(&q, -6.0, 0.0, &prec()).unwrap();
        assert!(zs.is_empty());
        let zs = real_zeros_in_interval(&q, -11.18, 0.0, &prec()).unwrap();
        assert_eq!(zs.len(), 1);
        assert_eq!(zs[0].annulus_index, Some(1));
    }

    #[test]
    fn no_nonnegative_zeros_for_positive_q() {
        let q = ParamQ::real(0.5).unwrap();
        let zs = real_zeros_in_interval(&q, 0.0, 100.0, &prec()).unwrap();
        assert!(zs.is_empty());
    }

    #[test]
    fn negative_q_interval_holds_xi3_only() {
        let q = ParamQ::real(-0.5).unwrap();
        let zs = real_zeros_in_interval(&q, 4.0, 16.0, &prec()).unwrap();
        assert_eq!(zs.len(), 1);
        assert!(zs[0].z.real().to_f64() > 4.0 && zs[0].z.real().to_f64() < 16.0);
    }

    #[test]
    fn strong_separation_small_real_q() {
        let q = ParamQ::real(0.5).unwrap();
        let rep = check_strong_separation(&q, 8, 14, &prec()).unwrap();
        assert!(rep.strong);
        assert_eq!(rep.per_annulus.len(), 7);
        assert!(rep.per_annulus.iter().all(|c| c.verified && c.count == 1));
    }

    #[test]
    fn separation_rejects_out_of_bound_q() {
        let q = ParamQ::real(0.9).unwrap();
        assert!(matches!(
            check_strong_separation(&q, 8, 10, &prec()),
            Err(Error::InvalidParam(_))
        ));
    }

    #[test]
    fn annulus_additivity() {
        let q = ParamQ::complex(0.25, 0.18).unwrap();
        let aq = q.abs();
        let k = 4;
        let disk = count_in_disk(&q, aq.powf(-(k as f64 + 0.5)), &prec()).unwrap();
        let mut sum = 0;
        for m in 1..=k {
            sum += annulus_census(&q, m, &prec()).unwrap().count;
        }
        assert_eq!(disk, sum);
    }
}
