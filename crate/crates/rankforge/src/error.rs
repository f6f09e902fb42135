//! Crate-wide error type.
//!
//! Arithmetic on well-formed values (same prime, matching exponent lattice)
//! is infallible and uses ordinary operators; constructors and queries that
//! depend on caller input return `Result<_, Error>`.

use thiserror::Error;

/// Errors raised by series construction, coefficient queries, solving and
/// the command-line layer.
#[derive(Debug, Error)]
pub enum Error {
    /// Two values built over roots of unity of different prime order were mixed.
    #[error("prime mismatch: expected zeta_{expected}, got zeta_{found}")]
    PrimeMismatch { expected: u32, found: u32 },

    /// A coefficient beyond the trusted truncation order was requested.
    #[error("truncation exceeded: exponent {requested}/{den} lies beyond trusted bound {trunc}/{den}")]
    TruncationExceeded { requested: i64, trunc: i64, den: i64 },

    /// An exponent fell off the (1/24p)Z lattice of the series ring.
    #[error("exponent off lattice: {0}")]
    OffLattice(String),

    /// Attempt to invert zero, a series with zero leading coefficient, or a
    /// non-unit where a unit is required.
    #[error("not invertible: {0}")]
    NotInvertible(String),

    /// A parameter was outside its documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The linear system for identity coefficients was rank-deficient or
    /// inconsistent on the requested coefficient window.
    #[error("solve failed: {0}")]
    Solve(String),

    /// Malformed textual input (cyclotomic literals, identity JSON).
    #[error("parse error: {0}")]
    Parse(String),

    /// Unknown identity name passed to the database or CLI.
    #[error("unknown identity: {0}")]
    UnknownIdentity(String),

    /// I/O failure while writing a report.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Convenient alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
