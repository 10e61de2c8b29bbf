//! Zero tracking along parameter paths and monodromy extraction.
//!
//! A zero ξ(q) of θ(q,·) continues analytically while q moves in the
//! punctured disk avoiding the spectral set; around a spectral parameter the
//! two colliding zeros exchange.  This module builds the standard loops
//! (out-and-back along an axis with a circle around one spectral number and
//! small half-circle bypasses around the intermediate ones), tracks zeros
//! with a predictor-corrector scheme driven by dz/dq = −θ_q/θ_z, and reads
//! off the induced permutation of zero labels.

use crate::error::{Error, Result};
use crate::num::{abs_f64, at_bits, cplx, ParamQ, Precision};
use crate::series::{evaluate, evaluate_dq, evaluate_dz};
use crate::spectrum::{real_spectrum_negative, real_spectrum_positive};
use rug::Complex;

/// One piece of a parameter path; coordinates are exact enough in f64
/// because path geometry only seeds the arbitrary-precision evaluations.
#[derive(Clone, Copy, Debug)]
pub enum PathSeg {
    Line { from: (f64, f64), to: (f64, f64) },
    /// Angles in radians; traversal from `from_angle` to `to_angle` (the sign
    /// of the difference is the orientation).
    Arc { center: (f64, f64), radius: f64, from_angle: f64, to_angle: f64 },
}

impl PathSeg {
    pub fn start(&self) -> (f64, f64) {
        match *self {
            PathSeg::Line { from, .. } => from,
            PathSeg::Arc { center, radius, from_angle, .. } => {
                (center.0 + radius * from_angle.cos(), center.1 + radius * from_angle.sin())
            }
        }
    }

    pub fn end(&self) -> (f64, f64) {
        match *self {
            PathSeg::Line { to, .. } => to,
            PathSeg::Arc { center, radius, to_angle, .. } => {
                (center.0 + radius * to_angle.cos(), center.1 + radius * to_angle.sin())
            }
        }
    }

    /// Point at parameter t ∈ [0,1].
    pub fn at(&self, t: f64) -> (f64, f64) {
        match *self {
            PathSeg::Line { from, to } => {
                (from.0 + t * (to.0 - from.0), from.1 + t * (to.1 - from.1))
            }
            PathSeg::Arc { center, radius, from_angle, to_angle } => {
                let a = from_angle + t * (to_angle - from_angle);
                (center.0 + radius * a.cos(), center.1 + radius * a.sin())
            }
        }
    }

    pub fn len(&self) -> f64 {
        match *self {
            PathSeg::Line { from, to } => (to.0 - from.0).hypot(to.1 - from.1),
            PathSeg::Arc { radius, from_angle, to_angle, .. } => {
                radius * (to_angle - from_angle).abs()
            }
        }
    }

    pub fn reversed(&self) -> PathSeg {
        match *self {
            PathSeg::Line { from, to } => PathSeg::Line { from: to, to: from },
            PathSeg::Arc { center, radius, from_angle, to_angle } => {
                PathSeg::Arc { center, radius, from_angle: to_angle, to_angle: from_angle }
            }
        }
    }
}

/// Piecewise path in the punctured parameter disk.
#[derive(Clone, Debug)]
pub struct QPath {
    pub segments: Vec<PathSeg>,
    pub base_point: ParamQ,
}

impl QPath {
    pub fn start(&self) -> (f64, f64) {
        self.segments.first().map(|s| s.start()).unwrap_or((f64::NAN, f64::NAN))
    }

    pub fn end(&self) -> (f64, f64) {
        self.segments.last().map(|s| s.end()).unwrap_or((f64::NAN, f64::NAN))
    }

    pub fn total_len(&self) -> f64 {
        self.segments.iter().map(|s| s.len()).sum()
    }

    pub fn is_closed(&self) -> bool {
        let (s, e) = (self.start(), self.end());
        (s.0 - e.0).hypot(s.1 - e.1) <= 1e-12 * (1.0 + s.0.abs() + s.1.abs())
    }

    /// Traversal-reversed path (same base point).
    pub fn reversed(&self) -> QPath {
        QPath {
            segments: self.segments.iter().rev().map(|s| s.reversed()).collect(),
            base_point: self.base_point.clone(),
        }
    }

    fn validate_in_disk(&self) -> Result<()> {
        for seg in &self.segments {
            for i in 0..=32 {
                let (re, im) = seg.at(i as f64 / 32.0);
                let r = re.hypot(im);
                if !(r > 1e-9 && r < 0.9995) {
                    return Err(Error::InvalidParam(format!(
                        "path leaves the punctured disk: |q| = {r} at ({re}, {im})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Loop families: out-and-back circles around the j-th spectral number of
/// the positive (`Gamma`) or negative (`Delta`) branch, and the upper/lower
/// half-circumferences of radius a exchanging the two axis base points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoopKind {
    Gamma(u32),
    Delta(u32),
    EtaPlus,
    EtaMinus,
}

const C0: f64 = 0.2078750206;

/// Minimum admissible distance from the path to a spectral point that is
/// neither encircled nor bypassed.
fn clearance_of(eps: f64) -> f64 {
    (eps / 2.0).max(1e-4)
}

/// Build one of the standard loops/paths based at a (Gamma, EtaPlus start
/// there; Delta is based at −a).  `eps` is the radius of the circle around
/// the target spectral number, `eps_prime` the radius of the half-circle
/// bypasses around intermediate ones; pass 0.0 for either to get the
/// defaults (ε = min(1e-2, half gap to the nearest other spectral number),
/// ε′ = ε/100).
pub fn build_loop(
    kind: LoopKind,
    a: f64,
    eps: f64,
    eps_prime: f64,
    prec: &Precision,
) -> Result<QPath> {
    if !(a > 0.0 && a < C0) {
        return Err(Error::InvalidParam(format!(
            "base point a = {a} must lie in (0, {C0})"
        )));
    }
    match kind {
        LoopKind::EtaPlus => half_circle(a, true, prec),
        LoopKind::EtaMinus => half_circle(a, false, prec),
        LoopKind::Gamma(j) => axis_loop(j, a, eps, eps_prime, prec, true),
        LoopKind::Delta(j) => axis_loop(j, a, eps, eps_prime, prec, false),
    }
}

fn half_circle(a: f64, upper: bool, prec: &Precision) -> Result<QPath> {
    // the circle |q| = a must clear the whole spectrum; the innermost
    // spectral number is the first positive one
    let q1 = real_spectrum_positive(1, prec)?[0].q.re_f64();
    if q1 - a < clearance_of(0.0) {
        return Err(Error::SpectrumTooClose { dist: q1 - a, clearance: clearance_of(0.0) });
    }
    let (f, t) = if upper { (0.0, std::f64::consts::PI) } else { (std::f64::consts::PI, 2.0 * std::f64::consts::PI) };
    let base = if upper { ParamQ::real(a)? } else { ParamQ::real(-a)? };
    Ok(QPath {
        segments: vec![PathSeg::Arc { center: (0.0, 0.0), radius: a, from_angle: f, to_angle: t }],
        base_point: base,
    })
}

/// Out-and-back loop along one real half-axis: segment from the base to the
/// target circle with upper half-circle bypasses around intermediate
/// spectral numbers, a full counterclockwise circle around the target, and
/// the reversed segment home.
fn axis_loop(
    j: u32,
    a: f64,
    eps_in: f64,
    eps_prime_in: f64,
    prec: &Precision,
    positive: bool,
) -> Result<QPath> {
    if j < 1 {
        return Err(Error::InvalidParam("loop index must be ≥ 1".into()));
    }
    // spectral moduli along this axis, one past the target for isolation
    let pts = if positive {
        real_spectrum_positive(j + 1, prec)?
    } else {
        real_spectrum_negative(j + 1, prec)?
    };
    let rho: Vec<f64> = pts.iter().map(|p| p.q.abs()).collect();
    let target = rho[(j - 1) as usize];
    // default ε: half the gap to the nearest other spectral number
    let mut gap = rho[j as usize] - target;
    if j >= 2 {
        gap = gap.min(target - rho[(j - 2) as usize]);
    }
    let eps = if eps_in > 0.0 { eps_in } else { (1e-2f64).min(gap / 2.0) };
    let epsp = if eps_prime_in > 0.0 { eps_prime_in } else { eps / 100.0 };
    if epsp > eps / 10.0 {
        return Err(Error::InvalidParam(format!(
            "bypass radius {epsp} must be well under the target radius {eps}"
        )));
    }
    if epsp < 1e-4 {
        return Err(Error::SpectrumTooClose { dist: epsp, clearance: 1e-4 });
    }
    // the target circle must exclude every other spectral number
    let clear = clearance_of(eps);
    for (i, r) in rho.iter().enumerate() {
        if i == (j - 1) as usize {
            continue;
        }
        let d = (r - target).abs();
        if d <= eps + clear {
            return Err(Error::SpectrumTooClose { dist: d - eps, clearance: clear });
        }
    }
    // bypassed intermediates must stay clear of each other and of the ends
    let inter = &rho[..(j - 1) as usize];
    let mut prev_edge = a;
    for r in inter {
        if r - epsp <= prev_edge + 1e-12 {
            return Err(Error::SpectrumTooClose { dist: r - prev_edge, clearance: epsp });
        }
        prev_edge = r + epsp;
    }
    if target - eps <= prev_edge + 1e-12 {
        return Err(Error::SpectrumTooClose { dist: target - eps - prev_edge, clearance: epsp });
    }

    // walk the axis outward; mirror onto the negative axis afterwards
    let sgn = if positive { 1.0 } else { -1.0 };
    let mut segs: Vec<PathSeg> = Vec::new();
    let mut cur = a;
    for r in inter {
        segs.push(PathSeg::Line { from: (sgn * cur, 0.0), to: (sgn * (r - epsp), 0.0) });
        // upper half-circle over the intermediate spectral number; which side
        // is immaterial for the induced permutation because colliding pairs
        // at distinct spectral numbers share no zero
        let (af, at_) = if positive { (std::f64::consts::PI, 0.0) } else { (0.0, std::f64::consts::PI) };
        segs.push(PathSeg::Arc {
            center: (sgn * r, 0.0),
            radius: epsp,
            from_angle: af,
            to_angle: at_,
        });
        cur = r + epsp;
    }
    segs.push(PathSeg::Line { from: (sgn * cur, 0.0), to: (sgn * (target - eps), 0.0) });
    // full counterclockwise circle around the target
    let start_angle = if positive { std::f64::consts::PI } else { 0.0 };
    segs.push(PathSeg::Arc {
        center: (sgn * target, 0.0),
        radius: eps,
        from_angle: start_angle,
        to_angle: start_angle + 2.0 * std::f64::consts::PI,
    });
    // retrace home
    let back: Vec<PathSeg> = segs[..segs.len() - 1].iter().rev().map(|s| s.reversed()).collect();
    segs.extend(back);
    let path = QPath { segments: segs, base_point: ParamQ::real(sgn * a)? };
    path.validate_in_disk()?;
    Ok(path)
}

/// Concatenate paths end to start.
pub fn compose(paths: &[QPath]) -> Result<QPath> {
    if paths.is_empty() {
        return Err(Error::InvalidParam("cannot compose an empty path list".into()));
    }
    let mut segments: Vec<PathSeg> = Vec::new();
    for (i, p) in paths.iter().enumerate() {
        if i > 0 {
            let prev = segments.last().unwrap().end();
            let next = p.start();
            if (prev.0 - next.0).hypot(prev.1 - next.1) > 1e-9 {
                return Err(Error::EndpointMismatch { index: i });
            }
        }
        segments.extend(p.segments.iter().copied());
    }
    let composed = QPath { segments, base_point: paths[0].base_point.clone() };
    composed.validate_in_disk()?;
    Ok(composed)
}

/// One accepted tracking step, in export-friendly coordinates.
#[derive(Clone, Copy, Debug)]
pub struct TrackSample {
    /// Global path parameter in segment units (segment index + fraction).
    pub t: f64,
    pub q_re: f64,
    pub q_im: f64,
    pub z_re: f64,
    pub z_im: f64,
    /// |θ| / (1 + |θ_z|·(1+|z|)) after the corrector.
    pub residual: f64,
}

/// A tracked zero: samples along the path plus the full-precision endpoint.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<TrackSample>,
    pub end: Complex,
}

struct Corrected {
    z: Complex,
    residual: f64,
    /// Conservative distance to the nearest other zero: the two-zero cluster
    /// estimate 2|θ_z/θ_zz| capped by the annulus half-gap.
    d_min: f64,
}

/// Newton in z at fixed q; the tracked zero stays simple on admissible paths.
fn correct(q: &ParamQ, z0: &Complex, pe: &Precision, bits: u32) -> Result<Corrected> {
    let mut z = at_bits(z0, bits);
    let mut residual = f64::INFINITY;
    let mut tz_abs = 0.0f64;
    for _ in 0..14 {
        let f = evaluate(q, &z, pe)?.value;
        let tz = evaluate_dz(q, &z, 1, pe)?.value;
        tz_abs = abs_f64(&tz);
        let zs = 1.0 + abs_f64(&z);
        residual = abs_f64(&f) / (1.0 + tz_abs * zs);
        if tz_abs * zs < 1e-10 {
            return Err(Error::NoConvergence(
                "θ_z ≈ 0 while tracking: the path runs into a double zero".into(),
            ));
        }
        let dz = f / &tz;
        let step = abs_f64(&dz);
        z -= &dz;
        if step <= pe.target_eps.max(1e-60) * zs {
            break;
        }
    }
    if residual > pe.target_eps.sqrt() {
        return Err(Error::NoConvergence(format!(
            "corrector residual {residual:.3e} did not settle"
        )));
    }
    let t2 = evaluate_dz(q, &z, 2, pe)?.value;
    let t2_abs = abs_f64(&t2);
    let d_pair = if t2_abs > 0.0 { 2.0 * tz_abs / t2_abs } else { f64::INFINITY };
    let qa = q.abs();
    let d_ann = 0.5 * abs_f64(&z) * (qa.powf(-0.5) - qa.powf(0.5)).abs();
    Ok(Corrected { z, residual, d_min: d_pair.min(d_ann).max(1e-12) })
}

/// Track one zero of θ along the path.  Steps adapt so each move stays under
/// a fifth of the estimated distance to the nearest other zero; a step
/// forced below 1e-9 of the path length reports StepCollapse.
pub fn track_zero(path: &QPath, z_start: &Complex, prec: &Precision) -> Result<Trajectory> {
    path.validate_in_disk()?;
    if path.segments.is_empty() {
        return Err(Error::InvalidParam("empty path".into()));
    }
    let bits = prec.mantissa_bits.max(128);
    let pe = Precision {
        mantissa_bits: bits,
        target_eps: prec.target_eps.max(Precision::tight(bits).target_eps),
    };
    let total_len = path.total_len().max(1e-300);

    let q_at = |p: (f64, f64)| -> Result<ParamQ> { ParamQ::from_cplx(cplx(bits, p.0, p.1)) };

    let q0 = q_at(path.start())?;
    let first = correct(&q0, &at_bits(z_start, bits), &pe, bits)?;
    // the start must actually be the zero the caller named
    let moved = first.z.clone() - at_bits(z_start, bits);
    if abs_f64(&moved) > 0.25 * first.d_min.max(1e-9) + 1e-6 * (1.0 + abs_f64(z_start)) {
        return Err(Error::InvalidParam(format!(
            "z_start is not a zero at the path start (polish moved it by {:.3e})",
            abs_f64(&moved)
        )));
    }

    let mut z = first.z;
    let mut d_min = first.d_min;
    let mut samples = vec![TrackSample {
        t: 0.0,
        q_re: path.start().0,
        q_im: path.start().1,
        z_re: z.real().to_f64(),
        z_im: z.imag().to_f64(),
        residual: first.residual,
    }];

    for (si, seg) in path.segments.iter().enumerate() {
        let seg_len = seg.len();
        if seg_len <= 1e-15 {
            continue;
        }
        let dt_min = (1e-9 * total_len / seg_len).min(1e-3);
        let mut t = 0.0f64;
        let mut dt = 1.0f64 / 16.0;
        while t < 1.0 {
            dt = dt.min(1.0 - t);
            let (qr, qi) = seg.at(t);
            let q_cur = q_at((qr, qi))?;
            let tq = evaluate_dq(&q_cur, &z, &pe)?.value;
            let tz = evaluate_dz(&q_cur, &z, 1, &pe)?.value;
            let slope = tq / &tz;
            loop {
                let (nr, ni) = seg.at(t + dt);
                let dq = cplx(bits, nr - qr, ni - qi);
                let pred_step: Complex = (slope.clone() * &dq) * -1.0;
                let pred_norm = abs_f64(&pred_step);
                if pred_norm > 0.2 * d_min {
                    dt *= 0.5;
                    if dt < dt_min {
                        return Err(Error::StepCollapse { q_re: qr, q_im: qi });
                    }
                    continue;
                }
                let z_pred = z.clone() + &pred_step;
                let q_next = q_at((nr, ni))?;
                match correct(&q_next, &z_pred, &pe, bits) {
                    Ok(c) => {
                        let corr = c.z.clone() - &z_pred;
                        let corr_norm = abs_f64(&corr);
                        let tot = c.z.clone() - &z;
                        let tot_norm = abs_f64(&tot);
                        let budget = 0.15 * (pred_norm + 1e-3 * (1.0 + abs_f64(&z)));
                        if corr_norm > budget || tot_norm > 0.25 * d_min.max(1e-12) + budget {
                            dt *= 0.5;
                            if dt < dt_min {
                                return Err(Error::StepCollapse { q_re: qr, q_im: qi });
                            }
                            continue;
                        }
                        z = c.z;
                        d_min = c.d_min;
                        t += dt;
                        samples.push(TrackSample {
                            t: si as f64 + t,
                            q_re: nr,
                            q_im: ni,
                            z_re: z.real().to_f64(),
                            z_im: z.imag().to_f64(),
                            residual: c.residual,
                        });
                        dt = (dt * 1.5).min(0.25);
                        break;
                    }
                    Err(Error::NoConvergence(_)) => {
                        dt *= 0.5;
                        if dt < dt_min {
                            return Err(Error::StepCollapse { q_re: qr, q_im: qi });
                        }
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(Trajectory { end: z, samples })
}

/// Monodromy of a closed loop on a labeled start set of zeros.
#[derive(Clone, Debug)]
pub struct MonodromyResult {
    /// Pairs (start label, label whose start the trajectory ended on),
    /// sorted by start label; always a bijection.
    pub permutation: Vec<(String, String)>,
    pub trajectories: Vec<(String, Trajectory)>,
    pub max_step_residual: f64,
}

impl MonodromyResult {
    pub fn maps_to(&self, from: &str) -> Option<&str> {
        self.permutation
            .iter()
            .find(|(a, _)| a == from)
            .map(|(_, b)| b.as_str())
    }

    pub fn is_identity(&self) -> bool {
        self.permutation.iter().all(|(a, b)| a == b)
    }
}

/// Sequential composition of label permutations: the result maps x through
/// `first`, then `second`.
pub fn compose_permutations(
    first: &[(String, String)],
    second: &[(String, String)],
) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = first
        .iter()
        .map(|(a, mid)| {
            let b = second
                .iter()
                .find(|(x, _)| x == mid)
                .map(|(_, y)| y.clone())
                .unwrap_or_else(|| mid.clone());
            (a.clone(), b)
        })
        .collect();
    out.sort();
    out
}

/// Track every labeled zero around a closed loop and return the induced
/// permutation.  Trajectories are pairwise compared along the way; two that
/// come within isolation tolerance of each other make the labels unreliable
/// and report Collision.
pub fn monodromy(
    loop_path: &QPath,
    labels: &[(String, Complex)],
    prec: &Precision,
) -> Result<MonodromyResult> {
    if !loop_path.is_closed() {
        return Err(Error::InvalidParam("monodromy needs a closed loop".into()));
    }
    if labels.is_empty() {
        return Err(Error::InvalidParam("no labels to track".into()));
    }
    let mut trajectories: Vec<(String, Trajectory)> = Vec::with_capacity(labels.len());
    for (name, z0) in labels {
        let tr = track_zero(loop_path, z0, prec)?;
        trajectories.push((name.clone(), tr));
    }

    // collision scan: resample all trajectories on a common parameter grid
    let n_seg = loop_path.segments.len();
    let grid_n = 64 * n_seg;
    let resampled: Vec<Vec<(f64, f64)>> = trajectories
        .iter()
        .map(|(_, tr)| resample(&tr.samples, n_seg as f64, grid_n))
        .collect();
    for i in 0..resampled.len() {
        for j in (i + 1)..resampled.len() {
            for g in 0..=grid_n {
                let (xi, yi) = resampled[i][g];
                let (xj, yj) = resampled[j][g];
                let d = (xi - xj).hypot(yi - yj);
                let scale = 1.0 + xi.hypot(yi).min(xj.hypot(yj));
                if d < 1e-6 * scale {
                    return Err(Error::Collision { a: i, b: j });
                }
            }
        }
    }

    // match endpoints back to the start set
    let starts: Vec<(String, f64, f64)> = labels
        .iter()
        .map(|(n, z)| (n.clone(), z.real().to_f64(), z.imag().to_f64()))
        .collect();
    let mut min_sep = f64::INFINITY;
    for i in 0..starts.len() {
        for j in (i + 1)..starts.len() {
            let d = (starts[i].1 - starts[j].1).hypot(starts[i].2 - starts[j].2);
            min_sep = min_sep.min(d);
        }
    }
    let tol = if min_sep.is_finite() { 0.25 * min_sep } else { 1e-3 };
    let mut permutation: Vec<(String, String)> = Vec::with_capacity(labels.len());
    let mut used: Vec<bool> = vec![false; starts.len()];
    let mut max_res = 0.0f64;
    for (name, tr) in &trajectories {
        for s in &tr.samples {
            max_res = max_res.max(s.residual);
        }
        let (er, ei) = (tr.end.real().to_f64(), tr.end.imag().to_f64());
        let mut best: Option<(usize, f64)> = None;
        for (idx, (_, sr, si_)) in starts.iter().enumerate() {
            let d = (er - sr).hypot(ei - si_);
            if best.map(|(_, bd)| d < bd).unwrap_or(true) {
                best = Some((idx, d));
            }
        }
        let (idx, d) = best.unwrap();
        if d > tol || used[idx] {
            return Err(Error::NoConvergence(format!(
                "trajectory of {name} ended {d:.3e} away from the nearest start ({})",
                starts[idx].0
            )));
        }
        used[idx] = true;
        permutation.push((name.clone(), starts[idx].0.clone()));
    }
    permutation.sort();
    Ok(MonodromyResult { permutation, trajectories, max_step_residual: max_res })
}

/// Linear resample of trajectory samples onto a uniform grid of the global
/// parameter [0, t_max].
fn resample(samples: &[TrackSample], t_max: f64, n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n + 1);
    let mut k = 0usize;
    for g in 0..=n {
        let t = t_max * g as f64 / n as f64;
        while k + 1 < samples.len() && samples[k + 1].t < t {
            k += 1;
        }
        let p = if k + 1 >= samples.len() {
            let s = &samples[samples.len() - 1];
            (s.z_re, s.z_im)
        } else {
            let (a, b) = (&samples[k], &samples[k + 1]);
            let w = if b.t > a.t { ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0) } else { 0.0 };
            (a.z_re + w * (b.z_re - a.z_re), a.z_im + w * (b.z_im - a.z_im))
        };
        out.push(p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prec() -> Precision {
        Precision::new(128, 1e-20).unwrap()
    }

    #[test]
    fn segment_and_arc_geometry() {
        let line = PathSeg::Line { from: (0.1, 0.0), to: (0.3, 0.0) };
        assert_eq!(line.at(0.5), (0.2, 0.0));
        assert!((line.len() - 0.2).abs() < 1e-15);
        let arc = PathSeg::Arc {
            center: (0.0, 0.0),
            radius: 0.1,
            from_angle: 0.0,
            to_angle: std::f64::consts::PI,
        };
        let mid = arc.at(0.5);
        assert!((mid.0 - 0.0).abs() < 1e-15 && (mid.1 - 0.1).abs() < 1e-15);
        let rev = arc.reversed();
        assert_eq!(rev.start(), arc.end());
    }

    #[test]
    fn compose_requires_chained_endpoints() {
        let p1 = QPath {
            segments: vec![PathSeg::Line { from: (0.1, 0.0), to: (0.2, 0.0) }],
            base_point: ParamQ::real(0.1).unwrap(),
        };
        let p2 = QPath {
            segments: vec![PathSeg::Line { from: (0.2, 0.0), to: (0.1, 0.0) }],
            base_point: ParamQ::real(0.2).unwrap(),
        };
        let c = compose(&[p1.clone(), p2]).unwrap();
        assert_eq!(c.segments.len(), 2);
        assert!(c.is_closed());
        let bad = QPath {
            segments: vec![PathSeg::Line { from: (0.4, 0.0), to: (0.1, 0.0) }],
            base_point: ParamQ::real(0.4).unwrap(),
        };
        assert!(matches!(
            compose(&[p1, bad]),
            Err(Error::EndpointMismatch { index: 1 })
        ));
    }

    #[test]
    fn constant_path_keeps_zero_fixed() {
        let path = QPath {
            segments: vec![PathSeg::Line { from: (0.1, 0.0), to: (0.1, 0.0) }],
            base_point: ParamQ::real(0.1).unwrap(),
        };
        let z0 = cplx(128, -11.25180120987569, 0.0);
        let tr = track_zero(&path, &z0, &prec()).unwrap();
        let end = tr.end.real().to_f64();
        assert!((end - -11.25180120987569).abs() < 1e-10);
    }

    #[test]
    fn real_segment_stays_in_first_annulus() {
        // q from 0.05 to 0.2 with the innermost zero: every sample obeys the
        // annulus bound and the endpoint matches the frozen zero at q = 0.2
        let path = QPath {
            segments: vec![PathSeg::Line { from: (0.05, 0.0), to: (0.2, 0.0) }],
            base_point: ParamQ::real(0.05).unwrap(),
        };
        let z0 = cplx(128, -20.0, 0.0);
        let tr = track_zero(&path, &z0, &prec()).unwrap();
        for s in &tr.samples {
            let qa = s.q_re.abs();
            let za = s.z_re.hypot(s.z_im);
            assert!(za > qa.powf(-0.5) && za < qa.powf(-1.5), "sample left annulus 1");
        }
        assert!((tr.end.real().to_f64() - -6.700760910099115).abs() < 1e-10);
    }

    #[test]
    fn gamma1_swaps_the_innermost_pair() {
        let pr = prec();
        let g1 = build_loop(LoopKind::Gamma(1), 0.1, 0.0, 0.0, &pr).unwrap();
        assert!(g1.is_closed());
        // frozen zeros of θ(0.1, ·) in the first three annuli
        let labels = vec![
            ("xi1".to_string(), cplx(128, -11.25180120987569359940051, 0.0)),
            ("xi2".to_string(), cplx(128, -99.85789301361329213949365, 0.0)),
            ("xi3".to_string(), cplx(128, -1000.001418305919896273368, 0.0)),
        ];
        let m = monodromy(&g1, &labels, &pr).unwrap();
        assert_eq!(m.maps_to("xi1"), Some("xi2"));
        assert_eq!(m.maps_to("xi2"), Some("xi1"));
        assert_eq!(m.maps_to("xi3"), Some("xi3"));
        assert!(m.max_step_residual < 1e-8);
    }

    #[test]
    fn small_loop_around_origin_is_trivial() {
        let pr = prec();
        let path = QPath {
            segments: vec![PathSeg::Arc {
                center: (0.0, 0.0),
                radius: 0.05,
                from_angle: 0.0,
                to_angle: 2.0 * std::f64::consts::PI,
            }],
            base_point: ParamQ::real(0.05).unwrap(),
        };
        let labels = vec![
            ("xi1".to_string(), cplx(128, -20.0, 0.0)),
            ("xi2".to_string(), cplx(128, -400.0, 0.0)),
        ];
        let m = monodromy(&path, &labels, &pr).unwrap();
        assert!(m.is_identity());
    }

    #[test]
    fn eta_loops_chain_and_close() {
        let pr = prec();
        let ep = build_loop(LoopKind::EtaPlus, 0.1, 0.0, 0.0, &pr).unwrap();
        let em = build_loop(LoopKind::EtaMinus, 0.1, 0.0, 0.0, &pr).unwrap();
        let c = compose(&[ep, em]).unwrap();
        assert!(c.is_closed());
    }

    #[test]
    fn oversized_eps_is_rejected() {
        let pr = prec();
        // ε = 0.15 swallows the gap between the first two positive spectral
        // numbers (0.309 and 0.517)
        let r = build_loop(LoopKind::Gamma(1), 0.1, 0.15, 0.0015, &pr);
        assert!(matches!(r, Err(Error::SpectrumTooClose { .. })));
    }

    #[test]
    fn reversal_identity_on_two_zeros() {
        let pr = prec();
        let g1 = build_loop(LoopKind::Gamma(1), 0.1, 0.0, 0.0, &pr).unwrap();
        let back = g1.reversed();
        let c = compose(&[g1, back]).unwrap();
        let labels = vec![
            ("xi1".to_string(), cplx(128, -11.25180120987569359940051, 0.0)),
            ("xi2".to_string(), cplx(128, -99.85789301361329213949365, 0.0)),
        ];
        let m = monodromy(&c, &labels, &pr).unwrap();
        assert!(m.is_identity());
    }

    #[test]
    fn permutation_composition_helper() {
        let s = |x: &str, y: &str| (x.to_string(), y.to_string());
        let p1 = vec![s("a", "b"), s("b", "a"), s("c", "c")];
        let p2 = vec![s("a", "a"), s("b", "c"), s("c", "b")];
        let c = compose_permutations(&p1, &p2);
        assert_eq!(c, vec![s("a", "c"), s("b", "a"), s("c", "b")]);
    }

    #[test]
    fn track_rejects_non_zero_start() {
        let path = QPath {
            segments: vec![PathSeg::Line { from: (0.1, 0.0), to: (0.12, 0.0) }],
            base_point: ParamQ::real(0.1).unwrap(),
        };
        let r = track_zero(&path, &cplx(128, -3.0, 0.0), &prec());
        assert!(r.is_err());
    }

    #[test]
    fn base_point_outside_core_disk_rejected() {
        let r = build_loop(LoopKind::Gamma(1), 0.25, 0.0, 0.0, &prec());
        assert!(matches!(r, Err(Error::InvalidParam(_))));
    }
}
