//! Surface energies, Wulff crystals and ground states of sticky-disk
//! lattice models on the FCC and HCP lattices.

pub mod convex;
pub mod crystallize;
pub mod discrete;
pub mod geometry;
pub mod lattice;
pub mod surface_density;
pub mod symmetry;
pub mod voronoi;
pub mod wulff;
