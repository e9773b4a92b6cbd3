use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

/// A point `(eta, xi')` of the reduced dual group where a per-mode computation
/// failed. `eta` is the time frequency, `xi_prime` the tangential frequency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModePoint {
    pub eta: f64,
    pub xi_prime: Vec<f64>,
}

impl ModePoint {
    pub fn new(eta: f64, xi_prime: &[f64]) -> Self {
        Self {
            eta,
            xi_prime: xi_prime.to_vec(),
        }
    }
}

impl fmt::Display for ModePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(eta={:.6e}, xi'=[", self.eta)?;
        for (i, x) in self.xi_prime.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x:.6e}")?;
        }
        write!(f, "])")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("field is in {found} state, operation needs {expected}")]
    StateMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("time mean of the data does not vanish (relative size {relative:.3e})")]
    MeanNotZero { relative: f64 },

    #[error("root {root} too close to the real axis at {mode}")]
    RootOnRealAxis { mode: ModePoint, root: Complex64 },

    #[error("wrong root split at {mode}: {plus} roots above and {minus} below the real axis, expected {expected} each")]
    WrongSplit {
        mode: ModePoint,
        plus: usize,
        minus: usize,
        expected: usize,
    },

    #[error("root classification undecidable for zeta={zeta:?}, xi={xi:?}: root {root}")]
    DegenerateRoot {
        zeta: Vec<f64>,
        xi: Vec<f64>,
        root: Complex64,
    },

    #[error("characteristic matrix is singular at {mode} (|det F| / prod |row| = {ratio:.3e})")]
    SingularCharMatrix { mode: ModePoint, ratio: f64 },

    #[error("symbol ik + A(xi) vanishes at k={k}, xi={xi:?} (principal part on the imaginary axis: {agmon_violation})")]
    SymbolVanishes {
        k: f64,
        xi: Vec<f64>,
        agmon_violation: bool,
    },

    #[error("boundary trace matrix ill-conditioned at {mode} (cond {cond:.3e})")]
    IllConditionedTrace { mode: ModePoint, cond: f64 },

    #[error("oracle system singular at {mode}")]
    SingularSystem { mode: ModePoint },

    #[error("polynomial root finder failed: {0}")]
    RootFinder(String),

    #[error("schema error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Schema {
        line: Option<usize>,
        message: String,
    },

    #[error("data entry {entry} has time index k=0; data must be purely oscillatory")]
    MeanModePresent { entry: String },

    #[error("bad magic bytes in field file")]
    BadMagic,

    #[error("field file size mismatch: expected {expected} bytes, found {found}")]
    SizeMismatch { expected: u64, found: u64 },

    #[error("unsupported field file version {0}")]
    UnsupportedVersion(u32),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Failures that mean a structural condition (ellipticity, Agmon,
    /// complementing) does not hold, as opposed to numerical or I/O trouble.
    pub fn is_condition_failure(&self) -> bool {
        matches!(
            self,
            Error::RootOnRealAxis { .. }
                | Error::WrongSplit { .. }
                | Error::DegenerateRoot { .. }
                | Error::SingularCharMatrix { .. }
                | Error::SymbolVanishes { .. }
                | Error::SingularSystem { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
