//! Geometric graphs over point sets with a uniform grid index.

mod connection;
mod graph;

pub use connection::{ConnectionKind, ConnectionSet};
pub use graph::{brute_force_adjacency, GeoGraph};
