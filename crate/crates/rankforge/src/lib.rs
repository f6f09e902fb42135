//! rankforge: exact computer algebra for Dyson's rank function.
//!
//! The crate builds the p-dissection slices of the two-variable rank
//! generating function at p-th roots of unity, expands generalized
//! eta-quotients as exact q-series over Z[zeta_p], and certifies
//! eta-quotient identities for the slices by a finite valence-formula
//! computation at the cusps of Gamma_1(p).
//!
//! Layering (each module depends only on the ones above it):
//! - [`error`]: shared error type.
//! - [`cyclotomic`]: exact arithmetic in Q(zeta_p).
//! - [`qseries`]: truncated q-expansions with fractional exponents.
//! - [`ranks`]: partitions, rank counts, and the rank generating function.
//! - [`etaforms`]: eta functions, generalized eta-quotients, and the
//!   Appell--Lerch-style series entering dissection corrections.
//! - [`dissection`]: the p-dissection slices and the U_p operator.
//! - [`cusps`]: cusp data for Gamma_0(p^2) and order bounds.
//! - [`prover`]: identity verification, coefficient solving, and the
//!   symmetry transforms of the slices.
//! - [`cli`]: the command-line interface.

pub mod cli;
pub mod cusps;
pub mod cyclotomic;
pub mod dissection;
pub mod error;
pub mod etaforms;
pub mod prover;
pub mod qseries;
pub mod ranks;

pub use cyclotomic::{CycNum, Rat};
pub use error::{Error, Result};
pub use etaforms::EtaVector;
pub use qseries::QSeries;
