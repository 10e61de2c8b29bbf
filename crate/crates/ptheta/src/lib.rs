//! Certified evaluation and zero analysis of the partial theta function
//!
//! The series
//!
//! ```text
//! theta(q, z) = sum_{j >= 0} q^{j(j+1)/2} z^j,    |q| < 1
//! ```
//!
//! converges for every complex `z`, and for fixed `q` its zero set carries a
//! rigid multiplicative structure: away from small exceptional sets the k-th
//! zero sits in the annulus `|q|^{-k+1/2} < |z| < |q|^{-k-1/2}`.  This crate
//! provides:
//!
//! - evaluation with a certified truncation-tail bound, in arbitrary
//!   precision, together with `z`- and `q`-derivatives
//!   ([`evaluate`], [`evaluate_dz`], [`evaluate_dq`]);
//! - zero location and counting in disks and annuli by contour integration,
//!   plus subdivision search and Newton refinement
//!   ([`count_in_disk`], [`annulus_census`], [`zeros_in_disk`]);
//! - real-axis zero scans and separation checks
//!   ([`real_zeros_in_interval`], [`check_strong_separation`]);
//! - the spectrum of parameters where a double zero forms, on both real
//!   branches and off-axis ([`find_double_zero`], [`real_spectrum_positive`],
//!   [`real_spectrum_negative`]), with asymptotic-law residual reports;
//! - zero monodromy along loops in the parameter disk
//!   ([`build_loop`], [`track_zero`], [`monodromy`]);
//! - real-zero density statistics as `q` approaches +1 or -1
//!   ([`ell_a`], [`n_a`], [`p_a`], [`density_sweep`]).

pub mod continuation;
pub mod density;
pub mod error;
pub mod num;
pub mod report;
pub mod series;
pub mod spectrum;
pub mod zeros;

pub use continuation::{
    build_loop, compose, compose_permutations, monodromy, track_zero, LoopKind, MonodromyResult,
    PathSeg, QPath, TrackSample, Trajectory,
};
pub use density::{
    core_counts, count_zeros, dense_zero_probe, density_report, density_sweep,
    deviations_decreasing, tail_count, tail_counts_two_sided, CoreCounts, DenseProbe,
    DensityBranch, DensityReport, Interval, LadderRung,
};
pub use error::{Error, Result};
pub use num::{ParamQ, Precision};
pub use series::{
    differential_residual, evaluate, evaluate_dq, evaluate_dz, functional_residual,
    truncation_order, EvalResult,
};
pub use spectrum::{
    asymptotic_residuals, complex_spectral_pair, confirm_positive_indices, find_double_zero,
    real_spectrum_negative, real_spectrum_positive, smoothness_identity_residual,
    spectral_points_in_disk, verify_smoothness, AsymptoticReport, AsymptoticRow, Branch,
    SpectralPoint, E_PI, E_PI_HALF,
};
pub use zeros::{
    annulus_census, annulus_index_of, check_strong_separation, count_in_disk, real_zeros_in_interval,
    refine_zero, zeros_in_disk, AnnulusCensus, SeparationReport, ZeroRecord,
};
