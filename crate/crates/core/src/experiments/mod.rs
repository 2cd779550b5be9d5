//! Monte Carlo experiments over the size ladder, with per-trial tables and
//! aggregate summaries.
//!
//! Trials run on the current rayon pool; each trial seeds its own generator
//! from `(master seed, size, trial index)` and results are collected in trial
//! order, so reports do not depend on the number of workers.

mod condensation;
pub mod config;
mod energy_bounds;
mod gap_law;
mod lifshitz;
mod ls_compare;
pub mod report;

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::point_process::{clipped_gaps, sample_configuration, GapStatistics, PointConfiguration};
use crate::seed::trial_seed;
use crate::spectral::eigen::{lowest_eigenvalues_with_hint, Spectrum};
use crate::spectral::luttinger_sy::{lowest_levels, shrunk_gaps};
use crate::spectral::operator::{discretize, Boundary};
use crate::spectral::potential::{
    assemble_potential, resolve_spacing, PotentialField, SingleSitePotential,
};

pub use config::{ExperimentConfig, ExperimentKind};
pub use report::{ExperimentReport, Frequency, Outcome, RunMeta, Tally};

/// Run `cfg` on a pool of `threads` workers (default: all cores) and stamp
/// the report with wall-clock metadata.
pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::invalid("thread count must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let timestamp = chrono::Utc::now()
        .format("%Y-%m-%dT%H:%M:%S%.3fZ")
        .to_string();
    let start = Instant::now();
    let mut report = pool.install(|| match cfg.kind {
        ExperimentKind::GapLaw => gap_law::run(cfg),
        ExperimentKind::EnergyBounds => energy_bounds::run(cfg),
        ExperimentKind::Condensation => condensation::run(cfg),
        ExperimentKind::Lifshitz => lifshitz::run(cfg),
        ExperimentKind::LsCompare => ls_compare::run(cfg),
    })?;
    report.run = Some(RunMeta {
        timestamp,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        threads: pool.current_num_threads(),
    });
    Ok(report)
}

/// Gap-law probabilities: tails of `l1 - l2`, separations `l1 - l(j)`,
/// count concentration and largest-gap scaling.
pub fn run_gap_law(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.expect_kind(ExperimentKind::GapLaw)?;
    gap_law::run(cfg)
}

/// Per-realization checks of the closed-form eigenvalue brackets.
pub fn run_energy_bounds(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.expect_kind(ExperimentKind::EnergyBounds)?;
    energy_bounds::run(cfg)
}

/// Chemical potential, occupations and condensate fractions along the size ladder.
pub fn run_condensation(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.expect_kind(ExperimentKind::Condensation)?;
    condensation::run(cfg)
}

/// Ensemble IDS and its Lifshitz-tail slope.
pub fn run_lifshitz(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.expect_kind(ExperimentKind::Lifshitz)?;
    lifshitz::run(cfg)
}

/// Distance between finite-strength spectra and the infinite-wall comparator
/// along a strength ladder.
pub fn run_ls_compare(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.expect_kind(ExperimentKind::LsCompare)?;
    ls_compare::run(cfg)
}

/// `f(trial)` for every trial, in trial order.
pub(crate) fn map_trials<T: Send>(trials: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..trials).into_par_iter().map(f).collect()
}

/// One sampled configuration and its gaps.
pub(crate) struct Realization {
    pub seed: u64,
    pub config: PointConfiguration,
    pub gaps: GapStatistics,
}

impl Realization {
    pub fn sample(cfg: &ExperimentConfig, key: u64, box_length: f64, trial: usize) -> Result<Self> {
        let seed = trial_seed(cfg.run.seed, key, trial as u64);
        let config = sample_configuration(cfg.model.rate, box_length, seed)?;
        let gaps = clipped_gaps(&config);
        Ok(Realization { seed, config, gaps })
    }

    pub fn l1(&self) -> f64 {
        self.gaps.sorted_desc.first().copied().unwrap_or(0.0)
    }

    pub fn l2(&self) -> f64 {
        self.gaps.sorted_desc.get(1).copied().unwrap_or(0.0)
    }
}

/// Grid spacing for a realization: the configured override or the default rule.
pub(crate) fn spacing(cfg: &ExperimentConfig, site: &SingleSitePotential, box_length: f64) -> f64 {
    resolve_spacing(site, box_length, cfg.run.grid_resolution)
}

/// `k` smallest infinite-wall levels on gaps shortened by `C_u + h`: with the
/// potential vanishing there, they bound the discrete Dirichlet levels from above.
pub(crate) fn shrunk_comparator(
    gaps: &GapStatistics,
    site: &SingleSitePotential,
    h: f64,
    k: usize,
) -> Option<Vec<f64>> {
    let g = shrunk_gaps(&gaps.gaps, site.support_total() + h);
    lowest_levels(&g, k).ok()
}

/// Potential field and the `k` lowest Dirichlet levels of a realization.
pub(crate) fn dirichlet_levels(
    cfg: &ExperimentConfig,
    real: &Realization,
    site: &SingleSitePotential,
    k: usize,
) -> Result<(PotentialField, Spectrum, Option<Vec<f64>>)> {
    let h = spacing(cfg, site, real.config.box_length);
    let field = assemble_potential(&real.config, site, h)?;
    let op = discretize(&field, Boundary::Dirichlet)?;
    let k = k.min(op.dim());
    let upper = shrunk_comparator(&real.gaps, site, field.spacing(), k);
    let hint = upper
        .as_ref()
        .and_then(|u| u.last())
        .map(|&e| e * (1.0 + 1e-9) + cfg.tolerance.eig_tol);
    let spec = lowest_eigenvalues_with_hint(&op, k, cfg.tolerance.eig_tol, hint)?;
    Ok((field, spec, upper))
}
