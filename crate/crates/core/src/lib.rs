//! Poisson random Schrödinger operators in one dimension with soft obstacles,
//! their low-lying spectra and the free Bose gas they trap.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod point_process;
pub mod seed;
pub mod spectral;
pub mod thermo;

pub use error::{Error, Result};
pub use experiments::{run_experiment, ExperimentConfig, ExperimentKind, ExperimentReport};
pub use point_process::{
    clipped_gaps, sample_configuration, top_gaps, GapStatistics, PointConfiguration,
};
pub use spectral::{
    assemble_potential, discretize, lowest_eigenvalues, luttinger_sy_eigenvalues, Boundary,
    DiscretizedOperator, GapEventParams, Grid, PotentialField, Shape, SingleSitePotential,
    Spectrum,
};
pub use thermo::{critical_density_ls, solve_chemical_potential, ThermoState};
