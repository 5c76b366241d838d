//! Dyadic grids, sparse families and the sparse domination experiment.

pub mod domination;
pub mod grid;
pub mod sparse;

pub use domination::{domination_experiment, DominationStats, TrialRow};
pub use grid::{build_dyadic_grids, verify_grid_axioms, AxiomReport, Cube, DyadicGrid, GridFamily};
pub use sparse::{
    admissible_region, average, proof_scale_collection, sparse_form, sparsify, Admissibility, CubeCollection, Region,
    SparseFamily,
};
