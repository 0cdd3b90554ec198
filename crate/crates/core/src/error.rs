//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("level mismatch: left operand has level {left}, right has level {right}")]
    LevelMismatch { left: u32, right: u32 },

    #[error("Cayley-Dickson level {0} exceeds the supported maximum of 4")]
    LevelTooLarge(u32),

    #[error("coordinate vector of length {len} is not 2^level for any level <= 4")]
    BadCoordinateLength { len: usize },

    #[error("cannot invert element with norm {norm:e}")]
    ZeroInverse { norm: f64 },

    #[error("expected a unit element, got norm {norm}")]
    NotUnit { norm: f64 },

    #[error("expected a purely imaginary element, got Re = {re}")]
    NotImaginary { re: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("chart degenerate at u = {u:?}: {what}")]
    ChartDegeneracy { u: Vec<f64>, what: String },

    #[error(
        "finite-difference stencil leaves the domain on non-periodic axis {axis} at u = {u:?}"
    )]
    StencilOutOfDomain { axis: usize, u: Vec<f64> },

    #[error("manifold spec error at byte {pos}: {msg}")]
    SpecParse { pos: usize, msg: String },

    #[error("invalid manifold spec: {0}")]
    SpecInvalid(String),

    #[error("Jacobi eigen-solver did not converge after {sweeps} sweeps")]
    JacobiNonConvergence { sweeps: usize },

    #[error("unknown check name '{0}'")]
    UnknownCheck(String),

    #[error("unknown tolerance name '{0}'")]
    UnknownTolerance(String),

    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
