//! Extended characteristic functions of ergodic coisometric row contractions
//! on finite-dimensional spaces.
//!
//! The crate is organized bottom-up:
//!
//! * [`numerics`] dense complex linear algebra with deterministic bases,
//! * [`tuple`] row contractions, invariant vector states, ergodic profiles,
//! * [`fock`] words over `{1..d}` and truncated multi-analytic symbols,
//! * [`charfun`] the Poisson kernel, the extended characteristic function,
//!   the characteristic function of the `*`-stable corner and their link,
//! * [`dilation`] truncated minimal isometric dilations, the coupling
//!   oracle and the intertwiner check,
//! * [`equivalence`] unitary invariance, mixing transforms and conjugacy.

pub mod charfun;
pub mod dilation;
pub mod equivalence;
pub mod fock;
pub mod numerics;
pub mod tuple;

pub use numerics::{ComplexMatrix, ComplexVector, C64};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] numerics::NumericsError),
    #[error(transparent)]
    Tuple(#[from] tuple::TupleError),
    #[error(transparent)]
    Fock(#[from] fock::FockError),
    #[error(transparent)]
    Charfun(#[from] charfun::CharfunError),
    #[error(transparent)]
    Dilation(#[from] dilation::DilationError),
    #[error(transparent)]
    Equivalence(#[from] equivalence::EquivalenceError),
}

pub type Result<T> = std::result::Result<T, Error>;
