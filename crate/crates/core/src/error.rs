//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while building states, tables, or spectra.
#[derive(Debug, Error)]
pub enum Error {
    /// The torus dimensions are unusable: both sides must be at least 2 and coprime.
    #[error("invalid torus dimensions N={n}, M={m}: need N >= 2, M >= 2, gcd(N, M) = 1")]
    InvalidTorus { n: usize, m: usize },

    /// A field entry violates a structural constraint (zero B, non-finite value).
    #[error("invalid {field} entry at (n={n}, m={m}): {reason}")]
    InvalidEntry {
        field: &'static str,
        n: usize,
        m: usize,
        reason: &'static str,
    },

    /// Grid data has the wrong shape for the declared dimensions.
    #[error("malformed state data: {0}")]
    MalformedState(String),

    /// The state file declares a schema version this build does not understand.
    #[error("unsupported state file version {0} (expected 1)")]
    UnsupportedVersion(u32),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("state file parse: {0}")]
    Parse(#[from] serde_json::Error),

    /// The operator is undefined at alpha = 0 (a corner entry carries 1/alpha).
    #[error("alpha = 0 is outside the operator domain")]
    AlphaZero,

    /// A sign table was paired with a state of different dimensions.
    #[error("dimension mismatch: state is {state_n}x{state_m}, table is {table_n}x{table_m}")]
    DimensionMismatch {
        state_n: usize,
        state_m: usize,
        table_n: usize,
        table_m: usize,
    },

    /// A derived quantity broke an identity that should hold by construction.
    /// Surfaced loudly instead of being clamped.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    /// The flow drove some |B| below the underflow floor; the trajectory blew up.
    #[error("flow blow-up: |B({n},{m})| < 1e-300 at step {step}")]
    FlowBlowup { n: usize, m: usize, step: usize },

    /// Root extraction cannot proceed at this beta (degenerate leading/trailing
    /// coefficient of the alpha polynomial).
    #[error("degenerate beta for root extraction: {0}")]
    DegenerateBeta(String),

    /// The eigenvalue iteration did not converge.
    #[error("eigenvalue iteration failed to converge")]
    EigenConvergence,

    /// The numerical kernel at the requested point is not one-dimensional.
    #[error("kernel not one-dimensional: singular-value isolation {isolation:.3e} < 1e3")]
    KernelNotIsolated { isolation: f64 },

    /// The kernel vector cannot be normalized because its (0,0) component vanishes.
    #[error("kernel normalization failed: |psi(0,0)| = {0:.3e} is too small")]
    KernelNormalization(f64),

    /// The denominator minor in a component-ratio computation vanishes;
    /// callers should retry with another row.
    #[error("minor-ratio denominator too small: {0:.3e}")]
    MinorDenominator(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
