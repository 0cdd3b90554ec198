//! Numerical verification of octonionic Gauss maps on minimal submanifolds of the
//! unit 7-sphere.
//!
//! The library builds explicit charts of minimal (isoparametric) submanifolds
//! `M^d ⊂ S^7` — great spheres, products of round spheres and compositions of the
//! two — and certifies, per entry:
//!
//! * the Cayley–Dickson algebra laws behind the octonionic product,
//! * minimality, parallelism of the shipped normal frames, and isoparametricity,
//! * the Laplacian identity for scalar projections of the Gauss map,
//! * the eigenmap identity `Δγ_η = -(7-k+σ)γ_η` together with the spectral
//!   structure of the shape-operator Gram matrix,
//! * harmonicity of Gauss maps of hypersurfaces of great spheres,
//! * the hemisphere obstruction for Gauss images of eigen-directions.
//!
//! All computations are deterministic: grids, quadrature, eigen-solves and random
//! sweeps are seeded and reduction order is independent of the worker count.

// indexed loops over the fixed-size octonion/metric arrays mirror the formulas
#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod catalog;
pub mod chart;
pub mod error;
pub mod gauss;
pub mod hemisphere;
pub mod linalg;
pub mod runner;
pub mod spectra;
pub mod tol;

pub use error::Error;
pub type Result<T> = std::result::Result<T, Error>;
