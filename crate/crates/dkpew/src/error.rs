use thiserror::Error;

/// Unified error type for the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A point lies outside a solution family's domain of validity.
    #[error("point ({x}, {y}, {t}) outside domain: {reason}")]
    OutsideDomain { x: f64, y: f64, t: f64, reason: String },

    /// The hodograph denominator `1 - t f'(s)` dropped below the caustic
    /// tolerance: characteristics are crossing (gradient catastrophe).
    #[error("hodograph caustic: |1 - t f'(s)| = {0:.3e} below tolerance")]
    Caustic(f64),

    /// Newton iteration failed to converge.
    #[error("Newton iteration did not converge within {0} steps")]
    NoConvergence(usize),

    /// A polynomial exceeds the configured maximum degree.
    #[error("polynomial degree {got} exceeds maximum {max}")]
    DegreeOverflow { got: usize, max: usize },

    /// Unknown solution-family identifier in serialized input.
    #[error("unknown solution family `{0}`")]
    UnknownFamily(String),

    /// A metric was singular where an inverse was required.
    #[error("singular metric: |det| = {0:.3e} at the queried point")]
    SingularMetric(f64),

    /// `u_x` vanishes, so the monopole potential `V = u_x / 2` and every
    /// construction dividing by it degenerate.
    #[error("degenerate monopole: u_x = {0:.3e} at the queried point")]
    DegenerateMonopole(f64),

    /// `u_xx` vanishes, so the gauge function `rho = -2 u_xxy / u_xx` of the
    /// hyper-CR test is undefined.
    #[error("degenerate gauge: u_xx = {0:.3e} at the queried point")]
    DegenerateGauge(f64),

    /// Conformal time reparametrization needs an orientation-preserving `c`.
    #[error("conformal reparametrization requires c'(t) > 0, got {0:.3e}")]
    ConformalBranch(f64),

    /// Laurent truncation too shallow for the requested expansion.
    #[error("Laurent truncation depth {0} too shallow (need >= 2)")]
    TruncationTooShallow(usize),

    /// Twistor-line intersection is undefined for coincident base points.
    #[error("coincident points: the two lines are identical")]
    CoincidentPoints,

    /// The CFL condition could not be met even after the allowed number of
    /// time-step halvings.
    #[error("CFL violation persists after {halvings} dt halvings (dt = {dt:.3e})")]
    CflViolation { halvings: usize, dt: f64 },

    /// The evolved field stopped being finite.
    #[error("non-finite field value at t = {0:.6}")]
    NonFinite(f64),

    /// Grid dimensions must be powers of two for the FFT layout used here.
    #[error("grid {nx}x{ny} invalid: sizes must be powers of two >= 4")]
    BadGrid { nx: usize, ny: usize },

    /// Malformed run configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
