//! Error type shared by all modules.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building lattices, diagonalizing,
/// classifying phases, or integrating field dynamics.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: bad rational flux, empty domain list, negative
    /// lengths, non-finite parameters, and similar construction failures.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The chain (or Bloch cell) has odd dimension, so the sublattice
    /// symmetry operator `C = diag(+1, -1, ...)` does not exist.
    #[error("symmetry operator requires even dimension, got {0}")]
    OddDimension(usize),

    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// The LAPACK eigensolver failed to converge. The fingerprint is an
    /// FNV-1a hash of the matrix bytes so the failing input can be matched
    /// against logs without dumping the matrix itself.
    #[error("eigensolver failed (dim {dim}, matrix fingerprint {fingerprint:#018x}): {detail}")]
    Eigensolver {
        dim: usize,
        fingerprint: u64,
        detail: String,
    },

    /// A computation that requires a real line gap was asked to run on a
    /// gapless spectrum (some `|Re E|` fell below the gap floor). `context`
    /// localizes the violation, e.g. the momentum it was detected at.
    #[error("real line gap violated{context}: min |Re E| = {min_abs_re:.3e} < {floor:.3e}")]
    GapViolated {
        context: String,
        min_abs_re: f64,
        floor: f64,
    },

    /// Left/right eigenvector pairing degenerated: some overlap `<L|R>` is
    /// numerically zero, signalling an exceptional point.
    #[error("exceptional point: biorthogonal overlap {overlap:.3e} below {floor:.3e} at eigenvalue index {index}")]
    ExceptionalPoint {
        index: usize,
        overlap: f64,
        floor: f64,
    },

    /// An iterative refinement (Wilson-loop discretization, threshold
    /// bisection, ...) hit its budget without meeting its tolerance.
    #[error("no convergence in {what}: {detail}")]
    NonConvergence { what: String, detail: String },

    /// A quantity that must be quantized (polarization, global Berry phase)
    /// landed too far from every allowed value. `value` is the raw number,
    /// `track` describes the accumulated data that produced it.
    #[error("unquantized invariant: {value:.6} not within {tol:.1e} of any allowed value ({track})")]
    Unquantized { value: f64, tol: f64, track: String },

    /// Time integration produced a non-finite field amplitude.
    #[error("field blow-up at t = {t:.3}: non-finite amplitude at site {site}")]
    BlowUp { t: f64, site: usize },

    /// The requested averaging/spectral window is not covered by the stored
    /// samples of a trace.
    #[error("trace does not cover window [{t_start}, {t_end}]: samples span [{have_start}, {have_end}]")]
    WindowNotCovered {
        t_start: f64,
        t_end: f64,
        have_start: f64,
        have_end: f64,
    },

    /// Threshold search could not bracket a sign change.
    #[error("no threshold bracket in [{lo}, {hi}]: {detail}")]
    NoThresholdBracket { lo: f64, hi: f64, detail: String },

    /// Serialization and file I/O failures from the export layer.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failures.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
