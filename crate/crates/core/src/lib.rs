//! Spectral solvers for time-periodic parabolic boundary value problems on
//! `T x R^n` and `T x R^n_+`.

pub mod ellipticity;
pub mod error;
pub mod factor;
pub mod field;
pub mod fourier;
pub mod grid;
pub mod halfspace;
pub mod io;
pub mod oracle;
pub mod poly;
pub mod symbol;
pub mod wholespace;

pub use ellipticity::{EllipticityReport, SamplingPolicy};
pub use error::{Error, ModePoint, Result};
pub use factor::{CharMatrix, SymbolFactorization};
pub use field::{BoundaryField, State, TPField};
pub use fourier::SpectralMode;
pub use grid::{GroupGrid, TraceSpaceSpec};
pub use halfspace::{HalfSpaceProblem, HalfSpaceSolver};
pub use num_complex::Complex64;
pub use oracle::{Domain, ModeODEProblem, SweepReport};
pub use io::{ProblemSpec, Task};
pub use symbol::{DifferentialSymbol, OperatorTuple};
pub use wholespace::WholeSpaceProblem;
