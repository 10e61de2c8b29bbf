use thiserror::Error;

/// Failure modes of the numerical operations. Input-domain violations are
/// `InvalidParam`; the rest report algorithmic breakdowns that callers are
/// expected to handle (retry with different parameters, tighter precision,
/// or a different method) rather than silently absorb.
#[derive(Error, Debug, Clone)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A zero lies essentially on the counting contour; the inside/outside
    /// decision would be meaningless at this radius.
    #[error("contour at radius {radius} passes too close to a zero (distance estimate {dist_est:.3e})")]
    ContourTooCloseToZero { radius: f64, dist_est: f64 },

    /// The argument-principle integral refused to settle near an integer.
    #[error("contour count did not validate: raw integral {raw} at {samples} samples")]
    NonIntegerCount { raw: f64, samples: usize },

    /// Subdivision recursion exceeded its depth limit.
    #[error("subdivision budget exceeded at depth {depth}")]
    BudgetExceeded { depth: usize },

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    /// Newton on a simple zero stagnated with |θ_z| under the double-zero
    /// threshold; the caller should treat the point as a multiplicity-2
    /// candidate and switch to the two-variable solver.
    #[error("double zero suspected near z = {z_re}+{z_im}i")]
    DoubleZeroSuspected { z_re: f64, z_im: f64 },

    #[error("Jacobian numerically singular (|det| = {det:.3e})")]
    DegenerateJacobian { det: f64 },

    /// Continuation over spectral indices produced a non-monotone or
    /// out-of-window parameter value: an index was skipped or duplicated.
    #[error("spectral index {k} failed its ordering/window check")]
    MissedIndex { k: usize },

    /// Two candidate spectral values coincide within tolerance.
    #[error("spectral ordering unresolved near |q| = {q_abs}")]
    OrderingUnresolved { q_abs: f64 },

    #[error("asymptotic report requires points from a single branch")]
    MixedBranches,

    /// Loop construction cannot keep the required clearance from the spectrum.
    #[error("cannot build loop: spectral point within {dist:.3e} of the path (clearance {clearance:.3e})")]
    SpectrumTooClose { dist: f64, clearance: f64 },

    #[error("path composition endpoint mismatch at segment {index}")]
    EndpointMismatch { index: usize },

    /// Path-tracking step control collapsed below the minimum step, which
    /// indicates the path passes too close to a spectral point.
    #[error("tracking step collapsed at q = {q_re}+{q_im}i")]
    StepCollapse { q_re: f64, q_im: f64 },

    /// Two tracked trajectories approached within isolation tolerance.
    #[error("trajectories {a} and {b} collided during tracking")]
    Collision { a: usize, b: usize },

    /// The sign pattern of the dense-zero ladder failed; the index is too
    /// small for the asymptotic regime.
    #[error("ladder sign pattern violated at rung {s}")]
    SignPatternViolated { s: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI/FFI exit discipline: 2 for configuration errors, 3 for numerical
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParam(_) => 2,
            _ => 3,
        }
    }
}
