//! Error type shared across the solver pipeline.

use std::fmt;

use crate::solver::SolveReport;

/// Errors raised by geometry validation, assembly, solving, and integration.
#[derive(Debug, Clone)]
pub enum Error {
    /// A structural or field coordinate does not lie on a grid line.
    GeometryOffGrid { what: &'static str, value: f64 },
    /// Island and ground node sets touch or overlap.
    GeometryOverlap,
    /// Structure comes closer than two nodes to the outer boundary.
    MarginViolation { what: &'static str },
    /// A grid or structure parameter violates its invariants.
    InvalidParameter { what: &'static str, message: String },
    /// Nonzero field assigned to a conductor-interior node.
    FieldInConductor { i: usize, j: usize },
    /// Two grids that must share a `GridSpec` do not.
    InconsistentGrids,
    /// The assembled system has no unknowns.
    EmptySystem,
    /// Iterative solve hit the iteration cap; the partial report is attached.
    NoConvergence(SolveReport),
    /// Direct factorization met a zero pivot.
    SingularSystem,
    /// A path vertex is off the grid or a segment is not axis-aligned.
    PathOffGrid { message: String },
    /// A loop path does not close on itself.
    OpenLoop,
    /// Junction paths plus closures do not form a closed loop.
    PathsDoNotCloseLoop,
    /// Electrostatic solve requires both conductors.
    MissingConductor { which: &'static str },
    /// Charge below threshold on one side of the delimiter.
    DegenerateCharge { side: &'static str },
    /// Field region is not inside the named capacitor gap.
    FieldNotInGap,
    /// Sweep axis references an unknown config parameter.
    InvalidAxis { name: String },
    /// Config parse or validation failure; `key` names the offending entry.
    Config { key: String, message: String },
    /// File IO failure.
    Io { path: String, message: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::GeometryOffGrid { what, value } => {
                write!(f, "{what} = {value} does not lie on a grid line")
            }
            Error::GeometryOverlap => write!(f, "island and ground conductors touch"),
            Error::MarginViolation { what } => {
                write!(f, "{what} is within two nodes of the outer boundary")
            }
            Error::InvalidParameter { what, message } => write!(f, "invalid {what}: {message}"),
            Error::FieldInConductor { i, j } => {
                write!(f, "nonzero field at conductor-interior node ({i}, {j})")
            }
            Error::InconsistentGrids => write!(f, "inputs are defined on different grids"),
            Error::EmptySystem => write!(f, "assembled system has no unknowns"),
            Error::NoConvergence(report) => write!(
                f,
                "solver did not converge: {} iterations, residual {:.3e}",
                report.iterations, report.residual_norm
            ),
            Error::SingularSystem => write!(f, "linear system is singular"),
            Error::PathOffGrid { message } => write!(f, "path off grid: {message}"),
            Error::OpenLoop => write!(f, "loop path is not closed"),
            Error::PathsDoNotCloseLoop => write!(f, "junction paths and closures do not close"),
            Error::MissingConductor { which } => write!(f, "conductor missing: {which}"),
            Error::DegenerateCharge { side } => {
                write!(f, "degenerate charge on {side} side of delimiter")
            }
            Error::FieldNotInGap => write!(f, "field region is not inside the capacitor gap"),
            Error::InvalidAxis { name } => write!(f, "unknown sweep axis: {name}"),
            Error::Config { key, message } => write!(f, "config key `{key}`: {message}"),
            Error::Io { path, message } => write!(f, "{path}: {message}"),
        }
    }
}

impl std::error::Error for Error {}

impl Error {
    pub fn io(path: impl Into<String>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoConvergence(_) | Error::SingularSystem | Error::EmptySystem => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
