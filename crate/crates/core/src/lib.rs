//! Hyperbolic pants geometry, reflection-orbit counting, random surfaces
//! glued from pants, and the peeling exploration used to bound their diameter.

pub mod error;
pub mod graph;
pub mod hexagon;
pub mod harness;
pub mod hyp;
pub mod lattice;
pub mod peeling;
pub mod seeds;
pub mod stats;
pub mod surface;

pub use error::{Error, Result};
