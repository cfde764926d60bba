//! Analyses built on the pointwise algebra and the field calculus.

pub mod symbols;
pub mod cohiggs;
pub mod soliton;
pub mod solver;
