//! Cayley graphs of SL(2, Z_n) used as expander overlays for message passing.

pub mod cayley;
pub mod curvature;
pub mod dynamics;
pub mod error;
pub mod generators;
pub mod graph;
pub mod io;
pub mod locality;
pub mod modular_group;
pub mod propagation;
pub mod spectral;
pub mod transport;

pub use cayley::{build_cayley, overlay_for, select_n, CayleyGraph, SlicedAdjacency};
pub use error::{Error, Result};
pub use graph::Graph;
pub use modular_group::{group_order, GeneratorSet, ModMatrix};
