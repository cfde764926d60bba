//! Generalized-geometry calculus on flat periodic tori.
//!
//! Pointwise Clifford and spinor algebra of T+T*, generalized complex and
//! generalized Kahler structures, discretized generalized connections with
//! their curvature, mean curvature and moment map, and the analyses built on
//! them: symbol exactness of the deformation complex, the co-Higgs and
//! Kahler-Ricci soliton specializations, and an Einstein-Hermitian solver for
//! line bundles.

pub mod analysis;
pub mod calibration;
pub mod cli;
pub mod error;
pub mod field;
pub mod fixtures;
pub mod input;
pub mod multivector;
pub mod numerics;
pub mod report;
pub mod structures;
pub mod verify;

pub use error::{Error, Result};
