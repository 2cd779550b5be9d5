pub mod bounds;
pub mod eigen;
pub mod luttinger_sy;
pub mod operator;
pub mod potential;

pub use bounds::{
    dirichlet_ground_upper_bound, gap_event_indicator, neumann_ground_lower_bound, GapEventParams,
};
pub use eigen::{count_below, eigenvalues_below, lowest_eigenvalues, Spectrum, SturmCounter};
pub use luttinger_sy::{luttinger_sy_eigenvalues, luttinger_sy_levels_below};
pub use operator::{discretize, Boundary, DiscretizedOperator};
pub use potential::{assemble_potential, Grid, PotentialField, Shape, SingleSitePotential};
