//! Gain-sparse graphs on the annulus.
//!
//! Maps, (2,3,l)-sparsity, triangle and quadrilateral moves, inductive
//! decomposition, and replay of construction sequences into symmetric
//! contact systems and pointed pseudotriangulations.

pub mod annulus_map;
pub mod catalog;
pub mod format;
pub mod geometry;
pub mod moves;
pub mod realize_contact;
pub mod realize_pseudo;
pub mod reduction;
pub mod scalar;
pub mod sparsity;

pub use annulus_map::{
    canonical_code, find_isomorphism, isomorphic, AnnulusMap, Corner, Dart, Edge, EdgeSubset, FaceWalk, MapError,
};
pub use scalar::{QSqrt3, Scalar};
pub use sparsity::{check_sparse, oracle_sparse, SparsityVerdict};

/// Exact rational coordinates.
pub type Rational = num_rational::BigRational;
