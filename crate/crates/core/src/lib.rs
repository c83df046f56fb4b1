//! Affine sampling-without-replacement designs.
//!
//! Given a probability vector `p` over a population of size `N` and a sample
//! size `n`, the affine scheme assigns every ordered tuple of distinct labels
//! the probability `A(N,n) + B(N,n) * sum(p over the tuple)`. This crate
//! builds those designs, compares the Horvitz-Thompson variance they induce
//! against sampling with replacement, describes the polytope of feasible
//! probability vectors and draws samples from stratified populations.
//!
//! Modules:
//! - [`coeffs`]: exact scheme coefficients and their combinatorial identities.
//! - [`design`]: probability vectors, design construction, joint and marginal pmfs.
//! - [`variance`]: HT variances, the Ψ / Γ / Ω matrices, Jacobi eigensolver, PSD verdicts.
//! - [`polytope`]: vertices, facets and adjacency of the feasibility polytope.
//! - [`sampler`]: stratified rejection sampler with a multinomial proposal.
//! - [`report`], [`input`], [`verify`]: the pieces behind the `swor` command line tool.

// dense matrix code reads better with explicit indices
#![allow(clippy::needless_range_loop)]

pub mod coeffs;
mod combinatorics;
pub mod design;
pub mod error;
pub mod input;
pub mod polytope;
pub mod rational;
pub mod report;
pub mod sampler;
pub mod variance;
pub mod verify;

pub use coeffs::{coeff_pair, verify_identities, CoeffPair, IdentityCheck};
pub use design::{AffineDesign, Label, ProbabilityVector, Scalar, SubsetWeight};
pub use error::{Error, Result};
pub use polytope::{ConeVertex, Facet, PolytopeVertex, VertexKind};
pub use rational::Rational;
pub use sampler::{RejectionStats, Sampler, StratifiedPopulation, StratumCounts};
pub use variance::{PopulationValues, SpectralReport, SymmetricMatrix, Verdict};
