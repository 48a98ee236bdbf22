//! Exact enumeration and verification of symmetric-group invariant exceptional
//! collections on moduli spaces of weighted points on the projective line.
//!
//! The crate is organised bottom-up:
//!
//! * [`sl2`]: finite-dimensional SL(2) representations and graded virtual representations.
//! * [`cohomology`]: equivariant cohomology of line bundles on products of P1 and
//!   RHom between the bundles `F(l,E)` on the quotient stack.
//! * [`score`]: subset functions, scores, group membership and exhaustive lemma checks.
//! * [`git`]: Kempf-Ness strata, window feasibility and quantization (Teleman) checks.
//! * [`enumerate`]: the collections themselves, their orders and symmetry checks.
//! * [`verify`]: pairwise vanishing certificates for enumerated collections.
//! * [`ktheory`]: an independent rank oracle via Hassett wall crossing and Koszul class checks.
//! * [`fullness`]: replay of the Koszul-game generation arguments as checkable certificates.
//! * [`equivariant`]: orbits, permutation characters and symmetric-group decompositions.

// Inequalities are kept in the `<= bound - 1` form they are usually stated in.
#![allow(clippy::int_plus_one)]

pub mod bits;
pub mod cohomology;
pub mod enumerate;
pub mod equivariant;
pub mod error;
pub mod fullness;
pub mod git;
pub mod ktheory;
pub mod score;
pub mod sl2;
pub mod verify;

pub use error::{Error, Result};
