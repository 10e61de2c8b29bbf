//! Flat, serializable views of computation results.
//!
//! Each row type mirrors a result struct with plain numeric fields so output
//! is format-stable: JSON through serde, CSV through the fixed column lists
//! here.  Floats are printed in shortest round-trip form in both formats, so
//! a rerun of the same computation emits identical bytes.

use serde::Serialize;
use std::fmt::Write as _;

use crate::continuation::{MonodromyResult, TrackSample, Trajectory};
use crate::density::{DenseProbe, DensityBranch, DensityReport};
use crate::series::EvalResult;
use crate::spectrum::{AsymptoticReport, Branch, SpectralPoint};
use crate::zeros::{AnnulusCensus, SeparationReport, ZeroRecord};

/// One cell of a CSV line; empty for a missing optional value.
fn cell_f64(x: f64) -> String {
    // serde_json prints floats via shortest round-trip, matching the JSON view
    serde_json::to_string(&x).unwrap_or_else(|_| "null".into())
}

fn cell_opt_f64(x: Option<f64>) -> String {
    x.map(cell_f64).unwrap_or_default()
}

/// A table that knows its CSV header and how to print one row.
pub trait CsvTable {
    fn header() -> &'static str;
    fn line(&self) -> String;
}

/// Header plus one line per row, every line newline-terminated.
pub fn to_csv<T: CsvTable>(rows: &[T]) -> String {
    let mut s = String::new();
    s.push_str(T::header());
    s.push('\n');
    for r in rows {
        s.push_str(&r.line());
        s.push('\n');
    }
    s
}

/// Pretty JSON plus a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::PositiveReal => "positive-real",
        Branch::NegativeReal => "negative-real",
        Branch::ComplexPair => "complex-pair",
    }
}

pub fn density_branch_name(b: DensityBranch) -> &'static str {
    match b {
        DensityBranch::Positive => "positive",
        DensityBranch::Negative => "negative",
    }
}

/// A function or derivative value with its evaluation certificate.
#[derive(Debug, Clone, Serialize)]
pub struct EvalRow {
    pub quantity: &'static str,
    pub q_re: f64,
    pub q_im: f64,
    pub z_re: f64,
    pub z_im: f64,
    pub re: f64,
    pub im: f64,
    pub tail_bound: f64,
    pub terms_used: usize,
}

impl EvalRow {
    pub fn new(quantity: &'static str, q: (f64, f64), z: (f64, f64), r: &EvalResult) -> Self {
        EvalRow {
            quantity,
            q_re: q.0,
            q_im: q.1,
            z_re: z.0,
            z_im: z.1,
            re: r.value.real().to_f64(),
            im: r.value.imag().to_f64(),
            tail_bound: r.tail_bound.to_f64(),
            terms_used: r.terms_used,
        }
    }
}

impl CsvTable for EvalRow {
    fn header() -> &'static str {
        "quantity,q_re,q_im,z_re,z_im,re,im,tail_bound,terms_used"
    }
    fn line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.quantity,
            cell_f64(self.q_re),
            cell_f64(self.q_im),
            cell_f64(self.z_re),
            cell_f64(self.z_im),
            cell_f64(self.re),
            cell_f64(self.im),
            cell_f64(self.tail_bound),
            self.terms_used
        )
    }
}

/// One located zero.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroRow {
    pub z_re: f64,
    pub z_im: f64,
    pub residual: f64,
    pub multiplicity: u32,
    pub annulus_index: Option<i64>,
}

impl From<&ZeroRecord> for ZeroRow {
    fn from(r: &ZeroRecord) -> Self {
        ZeroRow {
            z_re: r.z.real().to_f64(),
            z_im: r.z.imag().to_f64(),
            residual: r.residual,
            multiplicity: r.multiplicity,
            annulus_index: r.annulus_index,
        }
    }
}

impl CsvTable for ZeroRow {
    fn header() -> &'static str {
        "z_re,z_im,residual,multiplicity,annulus_index"
    }
    fn line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            cell_f64(self.z_re),
            cell_f64(self.z_im),
            cell_f64(self.residual),
            self.multiplicity,
            self.annulus_index.map(|k| k.to_string()).unwrap_or_default()
        )
    }
}

/// One annulus census line.
#[derive(Debug, Clone, Serialize)]
pub struct CensusRow {
    pub k: i64,
    pub count: i64,
    pub contour_integral_raw: f64,
    pub verified: bool,
}

impl From<&AnnulusCensus> for CensusRow {
    fn from(c: &AnnulusCensus) -> Self {
        CensusRow {
            k: c.k,
            count: c.count,
            contour_integral_raw: c.contour_integral_raw,
            verified: c.verified,
        }
    }
}

impl CsvTable for CensusRow {
    fn header() -> &'static str {
        "k,count,contour_integral_raw,verified"
    }
    fn line(&self) -> String {
        format!(
            "{},{},{},{}",
            self.k,
            self.count,
            cell_f64(self.contour_integral_raw),
            self.verified
        )
    }
}

/// Separation check over a run of annuli.
#[derive(Debug, Clone, Serialize)]
pub struct SeparationView {
    pub n: i64,
    pub q_re: f64,
    pub q_im: f64,
    pub strong: bool,
    pub per_annulus: Vec<CensusRow>,
}

impl From<&SeparationReport> for SeparationView {
    fn from(r: &SeparationReport) -> Self {
        SeparationView {
            n: r.n,
            q_re: r.q.re_f64(),
            q_im: r.q.im_f64(),
            strong: r.strong,
            per_annulus: r.per_annulus.iter().map(CensusRow::from).collect(),
        }
    }
}

/// One spectral point (a parameter where the function has a double zero).
#[derive(Debug, Clone, Serialize)]
pub struct SpectralRow {
    pub index: Option<u32>,
    pub branch: &'static str,
    pub q_re: f64,
    pub q_im: f64,
    pub y_re: f64,
    pub y_im: f64,
    pub newton_residual: f64,
    pub theta_zz_re: f64,
    pub theta_zz_im: f64,
}

impl From<&SpectralPoint> for SpectralRow {
    fn from(p: &SpectralPoint) -> Self {
        SpectralRow {
            index: p.index,
            branch: branch_name(p.branch),
            q_re: p.q.re_f64(),
            q_im: p.q.im_f64(),
            y_re: p.y.real().to_f64(),
            y_im: p.y.imag().to_f64(),
            newton_residual: p.newton_residual,
            theta_zz_re: p.theta_zz.real().to_f64(),
            theta_zz_im: p.theta_zz.imag().to_f64(),
        }
    }
}

impl CsvTable for SpectralRow {
    fn header() -> &'static str {
        "index,branch,q_re,q_im,y_re,y_im,newton_residual,theta_zz_re,theta_zz_im"
    }
    fn line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.index.map(|k| k.to_string()).unwrap_or_default(),
            self.branch,
            cell_f64(self.q_re),
            cell_f64(self.q_im),
            cell_f64(self.y_re),
            cell_f64(self.y_im),
            cell_f64(self.newton_residual),
            cell_f64(self.theta_zz_re),
            cell_f64(self.theta_zz_im)
        )
    }
}

/// One row of measured-versus-predicted spectral asymptotics.
#[derive(Debug, Clone, Serialize)]
pub struct AsymRow {
    pub k: u32,
    pub q_measured: f64,
    pub q_predicted: f64,
    pub y_measured: f64,
    pub y_predicted: f64,
    pub residual_q: f64,
    pub scaled_residual_q: f64,
    pub residual_y: f64,
}

impl From<&crate::spectrum::AsymptoticRow> for AsymRow {
    fn from(r: &crate::spectrum::AsymptoticRow) -> Self {
        AsymRow {
            k: r.k,
            q_measured: r.q_measured,
            q_predicted: r.q_predicted,
            y_measured: r.y_measured,
            y_predicted: r.y_predicted,
            residual_q: r.residual_q,
            scaled_residual_q: r.scaled_residual_q,
            residual_y: r.residual_y,
        }
    }
}

impl CsvTable for AsymRow {
    fn header() -> &'static str {
        "k,q_measured,q_predicted,y_measured,y_predicted,residual_q,scaled_residual_q,residual_y"
    }
    fn line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.k,
            cell_f64(self.q_measured),
            cell_f64(self.q_predicted),
            cell_f64(self.y_measured),
            cell_f64(self.y_predicted),
            cell_f64(self.residual_q),
            cell_f64(self.scaled_residual_q),
            cell_f64(self.residual_y)
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymView {
    pub branch: &'static str,
    pub rows: Vec<AsymRow>,
}

impl From<&AsymptoticReport> for AsymView {
    fn from(r: &AsymptoticReport) -> Self {
        AsymView {
            branch: branch_name(r.branch),
            rows: r.rows.iter().map(AsymRow::from).collect(),
        }
    }
}

/// Real-zero counts against the limiting density at one parameter.
#[derive(Debug, Clone, Serialize)]
pub struct DensityRow {
    pub q: f64,
    pub a: f64,
    pub core_negative: u64,
    pub core_positive: Option<u64>,
    pub left_count: u64,
    pub right_count: Option<u64>,
    pub normalized: f64,
    pub predicted: f64,
    pub deviation: f64,
    pub normalized_right: Option<f64>,
    pub deviation_right: Option<f64>,
}

impl From<&DensityReport> for DensityRow {
    fn from(r: &DensityReport) -> Self {
        DensityRow {
            q: r.q,
            a: r.a,
            core_negative: r.core.negative_side,
            core_positive: r.core.positive_side,
            left_count: r.left_count,
            right_count: r.right_count,
            normalized: r.normalized,
            predicted: r.predicted,
            deviation: r.deviation,
            normalized_right: r.normalized_right,
            deviation_right: r.deviation_right,
        }
    }
}

impl CsvTable for DensityRow {
    fn header() -> &'static str {
        "q,a,core_negative,core_positive,left_count,right_count,normalized,predicted,deviation,normalized_right,deviation_right"
    }
    fn line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            cell_f64(self.q),
            cell_f64(self.a),
            self.core_negative,
            self.core_positive.map(|c| c.to_string()).unwrap_or_default(),
            self.left_count,
            self.right_count.map(|c| c.to_string()).unwrap_or_default(),
            cell_f64(self.normalized),
            cell_f64(self.predicted),
            cell_f64(self.deviation),
            cell_opt_f64(self.normalized_right),
            cell_opt_f64(self.deviation_right)
        )
    }
}

/// One step of a tracked zero trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct TrackRow {
    pub step: usize,
    pub q_re: f64,
    pub q_im: f64,
    pub z_re: f64,
    pub z_im: f64,
    pub residual: f64,
}

impl TrackRow {
    pub fn new(step: usize, s: &TrackSample) -> Self {
        TrackRow {
            step,
            q_re: s.q_re,
            q_im: s.q_im,
            z_re: s.z_re,
            z_im: s.z_im,
            residual: s.residual,
        }
    }
}

impl CsvTable for TrackRow {
    fn header() -> &'static str {
        "step,q_re,q_im,z_re,z_im,residual"
    }
    fn line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.step,
            cell_f64(self.q_re),
            cell_f64(self.q_im),
            cell_f64(self.z_re),
            cell_f64(self.z_im),
            cell_f64(self.residual)
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryView {
    pub label: String,
    pub end_re: f64,
    pub end_im: f64,
    pub samples: Vec<TrackRow>,
}

impl TrajectoryView {
    pub fn new(label: &str, t: &Trajectory) -> Self {
        TrajectoryView {
            label: label.to_string(),
            end_re: t.end.real().to_f64(),
            end_im: t.end.imag().to_f64(),
            samples: t
                .samples
                .iter()
                .enumerate()
                .map(|(i, s)| TrackRow::new(i, s))
                .collect(),
        }
    }
}

/// Where each labeled zero ends up after a parameter loop.
#[derive(Debug, Clone, Serialize)]
pub struct PermRow {
    pub from: String,
    pub to: String,
}

impl CsvTable for PermRow {
    fn header() -> &'static str {
        "from,to"
    }
    fn line(&self) -> String {
        format!("{},{}", self.from, self.to)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MonodromyView {
    pub permutation: Vec<PermRow>,
    pub max_step_residual: f64,
    pub trajectories: Vec<TrajectoryView>,
}

impl MonodromyView {
    pub fn new(r: &MonodromyResult, with_trajectories: bool) -> Self {
        MonodromyView {
            permutation: r
                .permutation
                .iter()
                .map(|(a, b)| PermRow { from: a.clone(), to: b.clone() })
                .collect(),
            max_step_residual: r.max_step_residual,
            trajectories: if with_trajectories {
                r.trajectories
                    .iter()
                    .map(|(l, t)| TrajectoryView::new(l, t))
                    .collect()
            } else {
                Vec::new()
            },
        }
    }
}

/// One denseness-ladder rung with the zero bracketed in the gap it opens.
#[derive(Debug, Clone, Serialize)]
pub struct RungRow {
    pub s: u32,
    pub x: f64,
    pub theta: f64,
    pub bracketed_zero: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeView {
    pub k: u32,
    pub branch: &'static str,
    pub q: f64,
    pub a: f64,
    pub unit_gap: f64,
    pub max_gap: f64,
    pub gap_bound: f64,
    pub zeros: Vec<f64>,
    pub rungs: Vec<RungRow>,
}

impl From<&DenseProbe> for ProbeView {
    fn from(p: &DenseProbe) -> Self {
        // attach each bracketed zero to the last rung before it on its axis
        let mut rungs: Vec<RungRow> = p
            .rungs
            .iter()
            .map(|r| RungRow { s: r.s, x: r.x, theta: r.theta, bracketed_zero: None })
            .collect();
        for &z in &p.zeros {
            let mut best: Option<usize> = None;
            for (i, r) in rungs.iter().enumerate() {
                if r.x.signum() == z.signum() && r.x.abs() <= z.abs() {
                    let better = match best {
                        None => true,
                        Some(j) => rungs[j].x.abs() < r.x.abs(),
                    };
                    if better {
                        best = Some(i);
                    }
                }
            }
            if let Some(i) = best {
                rungs[i].bracketed_zero = Some(z);
            }
        }
        ProbeView {
            k: p.k,
            branch: density_branch_name(p.branch),
            q: p.q,
            a: p.a,
            unit_gap: p.unit_gap,
            max_gap: p.max_gap,
            gap_bound: p.gap_bound,
            zeros: p.zeros.clone(),
            rungs,
        }
    }
}

impl CsvTable for RungRow {
    fn header() -> &'static str {
        "s,x,theta,bracketed_zero"
    }
    fn line(&self) -> String {
        format!(
            "{},{},{},{}",
            self.s,
            cell_f64(self.x),
            cell_f64(self.theta),
            cell_opt_f64(self.bracketed_zero)
        )
    }
}

/// Disk or interval zero counts as a one-line table.
#[derive(Debug, Clone, Serialize)]
pub struct CountRow {
    pub label: String,
    pub count: i64,
}

impl CsvTable for CountRow {
    fn header() -> &'static str {
        "label,count"
    }
    fn line(&self) -> String {
        format!("{},{}", self.label, self.count)
    }
}

/// Float probe values keyed by name (smoothness checks and the like).
#[derive(Debug, Clone, Serialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

impl CsvTable for NamedValue {
    fn header() -> &'static str {
        "name,value"
    }
    fn line(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{},{}", self.name, cell_f64(self.value));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_floats_match_the_json_view() {
        let row = ZeroRow {
            z_re: -6.700760910099115,
            z_im: 0.0,
            residual: 2.5e-21,
            multiplicity: 1,
            annulus_index: Some(1),
        };
        let csv = to_csv(std::slice::from_ref(&row));
        assert_eq!(
            csv,
            "z_re,z_im,residual,multiplicity,annulus_index\n-6.700760910099115,0.0,2.5e-21,1,1\n"
        );
        let json = to_json(&row);
        assert!(json.contains("-6.700760910099115"));
        assert!(json.ends_with('\n'));
    }

    #[test]
    fn missing_optionals_leave_empty_cells() {
        let row = DensityRow {
            q: 0.9,
            a: 100.0,
            core_negative: 3,
            core_positive: None,
            left_count: 14,
            right_count: None,
            normalized: 1.4,
            predicted: 1.4635791394,
            deviation: 0.0635791394,
            normalized_right: None,
            deviation_right: None,
        };
        let line = row.line();
        assert!(line.ends_with(",,"));
        assert_eq!(line.matches(',').count(), DensityRow::header().matches(',').count());
    }

    #[test]
    fn probe_view_attaches_zeros_to_their_rungs() {
        use crate::density::{DenseProbe, DensityBranch, LadderRung};
        let p = DenseProbe {
            k: 1,
            branch: DensityBranch::Positive,
            q: 0.3,
            a: 40.0,
            unit_gap: 1e-13,
            rungs: vec![
                LadderRung { s: 2, x: -25.0, theta: -1.0 },
                LadderRung { s: 3, x: -35.0, theta: 2.0 },
            ],
            zeros: vec![-30.0],
            max_gap: 10.0,
            gap_bound: 28.0,
        };
        let v = ProbeView::from(&p);
        assert_eq!(v.rungs[0].bracketed_zero, Some(-30.0));
        assert_eq!(v.rungs[1].bracketed_zero, None);
    }
}
