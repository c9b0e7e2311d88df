//! Bordered Floer bimodules of surface mapping classes, computed over F2
//! from combinatorial Heegaard-type diagrams.

pub mod arc_algebra;
pub mod bimodules;
pub mod box_tensor;
pub mod cli;
pub mod diagram;
pub mod error;
pub mod ground;
pub mod polygons;
pub mod reduction;

pub use error::{Error, Result};
