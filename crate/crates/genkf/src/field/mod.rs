//! Discretized fields on flat periodic tori and the generalized-connection
//! calculus built on them.

pub mod canonical;
pub mod connection;
pub mod dbar;
pub mod fields;
pub mod grid;
pub mod moment;

pub use connection::{GenConnection, SpinorField};
pub use fields::{EndField, EndFormField, FormField};
pub use grid::TorusGrid;
