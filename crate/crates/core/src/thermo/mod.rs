pub mod bose;
pub mod condensate;
pub mod critical;
pub mod ids;

pub use bose::{
    bose_factor, density_at_gap, occupation_numbers, single_level_chemical_potential,
    solve_chemical_potential, solve_ground_gap, ThermoState,
};
pub use condensate::{condensate_density, condensate_statistics, CondensateStats};
pub use critical::{critical_density, critical_density_ls, AnalyticLsIds, IntegratedDensity};
pub use ids::{
    analytic_ids_ls, empirical_ids, lifshitz_slope_fit, IdsCurve, IdsProvenance, LifshitzFit,
};
