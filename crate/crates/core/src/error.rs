use alloc::string::String;
use core::fmt;

use crate::coord::Coord;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A sink-spec parameter is out of range (period < 2, empty sink set, ...).
    InvalidSpec(String),
    /// A state violates an invariant (negative cell, bad window, background > 3).
    InvalidState(String),
    /// The relaxation exceeded its toppling or sweep budget.
    BudgetExceeded { events: u128, budget: u128 },
    /// Driving a state to its recurrent representative did not converge.
    DriveCapExceeded { added: u64, cap: u64 },
    /// An iteration cap was hit before a fixpoint was found.
    IterationCapExceeded { cap: u64 },
    /// A probed cell is farther from the sinks than the configured cap.
    DistanceCapExceeded { cell: Coord, cap: u32 },
    /// `superharmonic_h` was called with a C smaller than the cell's distance.
    SuperharmonicOutOfRange { cell: Coord, dist: u32, c: u32 },
    /// Torsion construction needs a nonzero residue.
    ZeroTorsionSeed,
    /// The Eq.(3)-style state left its proven range; signals an arithmetic bug.
    TorsionStateOutOfRange { position: i64, value: i64 },
    /// An operation that needs a torus carrier got a plane one, or vice versa.
    CarrierMismatch(String),
    /// The element has no finite order representable here.
    OrderNotFound { cap: u64 },
    /// Neither sign choice in the no-torsion construction kills the kernel.
    NoTorsionSignFailed { step: usize },
    /// Exact linear algebra met a singular matrix (disconnected quotient).
    SingularMatrix,
    /// The Poisson iteration did not reach the tolerance within its cap.
    PoissonNoConvergence { iterations: u64 },
    /// Arithmetic left the fast-path range and no fallback was possible.
    Overflow(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSpec(msg) => write!(f, "invalid sink spec: {msg}"),
            Error::InvalidState(msg) => write!(f, "invalid state: {msg}"),
            Error::BudgetExceeded { events, budget } => {
                write!(f, "relaxation budget exceeded: {events} events, budget {budget}")
            }
            Error::DriveCapExceeded { added, cap } => {
                write!(f, "recurrent drive did not converge after adding {added} beta (cap {cap})")
            }
            Error::IterationCapExceeded { cap } => write!(f, "iteration cap {cap} exceeded"),
            Error::DistanceCapExceeded { cell, cap } => {
                write!(f, "cell ({}, {}) exceeds distance cap {}", cell.x, cell.y, cap)
            }
            Error::SuperharmonicOutOfRange { cell, dist, c } => write!(
                f,
                "h formula used outside validity at ({}, {}): dist {} > C {}",
                cell.x, cell.y, dist, c
            ),
            Error::ZeroTorsionSeed => write!(f, "torsion construction needs c_num in [1, k)"),
            Error::TorsionStateOutOfRange { position, value } => {
                write!(f, "phi({position}) = {value} outside [-3, 1]; arithmetic bug")
            }
            Error::CarrierMismatch(msg) => write!(f, "carrier mismatch: {msg}"),
            Error::OrderNotFound { cap } => write!(f, "no order found up to {cap}"),
            Error::NoTorsionSignFailed { step } => {
                write!(f, "neither sign kills the kernel at construction step {step}")
            }
            Error::SingularMatrix => write!(f, "singular matrix (disconnected quotient?)"),
            Error::PoissonNoConvergence { iterations } => {
                write!(f, "poisson iteration did not converge within {iterations} steps")
            }
            Error::Overflow(msg) => write!(f, "arithmetic overflow: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
