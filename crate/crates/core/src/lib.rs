//! First-passage percolation on Delaunay triangulations of planar Poisson
//! processes, with the dual Voronoi bond percolation, box renormalization,
//! lattice animals and path diagnostics that go with it.

pub mod error;
pub mod fpp;
pub mod geometry;
pub mod paths;
pub mod percolation;
pub mod renorm;
pub mod runner;
pub mod seed;
pub mod stats;
pub mod weights;

pub use error::{Error, Result};
