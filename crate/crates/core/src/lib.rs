//! Exact-arithmetic toolkit for finite-rank mixed tensor spaces and the
//! matrix Lie algebras acting on them.
//!
//! Everything here is computed over arbitrary-precision rationals; there is
//! no floating point anywhere in the crate. The main building blocks are:
//!
//! * [`exactlin`] — sparse rational matrices, reduced row echelon form,
//!   kernels, subspace intersections.
//! * [`partitions`] — Young diagram combinatorics: Weyl dimensions,
//!   Littlewood-Richardson coefficients, layer multiplicity predictions.
//! * [`tensorspace`] — concrete tensor powers `V^{⊗m} ⊗ W^{⊗n}` with
//!   Lie algebra generator actions, contractions and Schur projectors for
//!   the general linear, orthogonal and symplectic flavors.
//! * [`invariants`] — invariant functionals, trace/matching spanning
//!   families and annihilator-invariant decompositions.
//! * [`socle`] — contraction filtrations and their layer decompositions.
//! * [`diagrams`] — walled Brauer and Brauer diagram algebras with a loop
//!   parameter, and their representations on tensor spaces.
//! * [`mackey`] — finitely encoded banded infinite matrices: ideal
//!   classification, commutator constructions, gradings, density solving.
//!
//! Data-parallel inner loops (generator matrix construction, batched
//! kernels, diagram evaluation) run on rayon when the default `parallel`
//! feature is enabled and fall back to sequential iterators without it.

pub mod diagrams;
pub mod error;
pub mod exactlin;
pub mod invariants;
pub mod mackey;
mod par;
pub mod partitions;
pub mod socle;
pub mod tensorspace;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
