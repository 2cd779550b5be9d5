use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::experiments::config::ExperimentConfig;
use crate::experiments::report::{
    median, moments, nondecreasing, strictly_decreasing, strictly_increasing, BaseRow,
    ExperimentReport, Frequency, Row, TrialTable,
};
use crate::experiments::{dirichlet_levels, map_trials, Realization};
use crate::spectral::bounds::{gap_event_indicator, GapEventParams};
use crate::spectral::eigen::Spectrum;
use crate::spectral::luttinger_sy::{levels_below, lowest_levels};
use crate::spectral::potential::SingleSitePotential;
use crate::thermo::bose::{truncation_tail, ThermoState};
use crate::thermo::condensate::{condensate_density, condensate_statistics};
use crate::thermo::critical::critical_density_ls;

const DEFAULT_ENERGY_CUTOFF: f64 = 36.0;
const DEFAULT_FLOOR_EPS: f64 = 0.1;

struct Trial {
    base: BaseRow,
    residual: Option<f64>,
    levels_used: usize,
    truncation_tail: Option<f64>,
    omega: Option<bool>,
}

/// Levels of the infinite-wall model up to `E^1 + cutoff / beta`, and at
/// least `min_levels` of them.
fn ls_spectrum(real: &Realization, cutoff: f64, beta: f64, min_levels: usize) -> Result<Spectrum> {
    let gaps = &real.gaps.gaps;
    let e1 = lowest_levels(gaps, 1)?[0];
    let mut levels = levels_below(gaps, e1 + cutoff / beta);
    if levels.len() < min_levels {
        levels = lowest_levels(gaps, min_levels)?;
    }
    let k = levels.len();
    Ok(Spectrum {
        eigenvalues: levels,
        k,
        grid_spacing: None,
        boundary: None,
        domain_length: real.config.box_length,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_trial(
    cfg: &ExperimentConfig,
    site: Option<&SingleSitePotential>,
    rho: f64,
    particle_count: u64,
    key: u64,
    box_length: f64,
    t: usize,
    cutoff: f64,
) -> Result<Trial> {
    let beta = cfg.beta();
    let real = Realization::sample(cfg, key, box_length, t)?;
    let mut trial = Trial {
        base: BaseRow {
            seed: real.seed,
            particle_count,
            box_length,
            strength: site.map(|s| s.strength_scale),
            l1: real.l1(),
            l2: real.l2(),
            trial: t,
            ..Default::default()
        },
        residual: None,
        levels_used: 0,
        truncation_tail: None,
        omega: None,
    };
    let min_levels = cfg.run.levels.max(2);
    let spec = match site {
        None => ls_spectrum(&real, cutoff, beta, min_levels),
        Some(site) => dirichlet_levels(cfg, &real, site, min_levels).map(|(_, s, _)| s),
    };
    let spec = match spec {
        Ok(s) => s,
        Err(e) if e.is_numerical() => {
            trial.base.solver_error = Some(e.to_string());
            return Ok(trial);
        }
        Err(e) => return Err(e),
    };
    trial.base.levels = spec.eigenvalues.iter().take(5).copied().collect();
    trial.levels_used = spec.len();
    if site.is_some() {
        trial.truncation_tail = Some(truncation_tail(&spec, beta, box_length));
    }
    let params = GapEventParams::new(
        cfg.run.zeta1,
        cfg.run.zeta2,
        particle_count.max(1),
        cfg.model.rate,
        box_length,
    )?;
    trial.omega = gap_event_indicator(&spec, 2, &params).ok();

    match ThermoState::solve(&spec, rho, beta, box_length, cfg.tolerance.mu_tol) {
        Ok(state) => {
            let eps = spec.eigenvalues[1] * (1.0 + cfg.run.eps_window);
            let stats =
                condensate_statistics(&spec, &state.occupations, particle_count.max(1), eps);
            trial.base.mu = Some(state.chemical_potential);
            trial.base.n1_frac = Some(stats.ground_fraction);
            trial.base.n2_frac = Some(stats.second_fraction);
            trial.base.band_frac = Some(stats.band_fraction);
            trial.residual = Some(state.residual());
        }
        Err(e) if e.is_numerical() => trial.base.solver_error = Some(e.to_string()),
        Err(e) => return Err(e),
    }
    Ok(trial)
}

pub(crate) fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let rho = cfg.density()?.ok_or_else(|| {
        Error::Config("condensation needs thermo.density or thermo.density_factor".into())
    })?;
    let beta = cfg.beta();
    let rho_c = critical_density_ls(cfg.model.rate, beta)?;
    let rho0 = condensate_density(rho, rho_c);
    let cond = &cfg.condensation;
    let cutoff = cond.energy_cutoff.unwrap_or(DEFAULT_ENERGY_CUTOFF);
    let theta = cond.theta.unwrap_or(0.5 * rho0 / rho);
    let cor_eps = cond.floor_eps.unwrap_or(DEFAULT_FLOOR_EPS);
    let mut warnings = Vec::new();
    if rho <= rho_c {
        warnings.push(format!(
            "density {rho} does not exceed the infinite-wall critical density {rho_c}; no condensation expected"
        ));
    }

    let extra: Vec<String> = ["levels_used", "residual", "truncation_tail", "omega2"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut table = TrialTable::new(&extra);

    let mut per_size = Vec::new();
    let (mut med_n1, mut med_n2, mut med_band, mut p_omega) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut max_residual = 0.0f64;
    for (idx, point) in cfg.size_points()?.iter().enumerate() {
        let strength = cfg.strength_at(idx, point);
        let site = cfg.site(strength)?;
        let trials: Vec<Result<Trial>> = map_trials(cfg.run.trials, |t| {
            run_trial(
                cfg,
                site.as_ref(),
                rho,
                point.particle_count,
                point.key,
                point.box_length,
                t,
                cutoff,
            )
        });
        let trials: Vec<Trial> = trials.into_iter().collect::<Result<_>>()?;

        for tr in &trials {
            let row = Row::default()
                .int(tr.levels_used as u64)
                .opt(tr.residual)
                .opt(tr.truncation_tail)
                .opt_flag(tr.omega);
            table.push(&tr.base, row);
            if let Some(r) = tr.residual {
                max_residual = max_residual.max(r.abs());
            }
        }

        let n1 = || trials.iter().filter_map(|t| t.base.n1_frac);
        let n2 = || trials.iter().filter_map(|t| t.base.n2_frac);
        let band = || trials.iter().filter_map(|t| t.base.band_frac);
        let omega = Frequency::from_flags(trials.iter().map(|t| t.omega == Some(true)));
        // single-level lower bound on the event, j = 2
        let floor = (1.0 - cor_eps) * rho0 / rho;
        let on_event: Vec<&Trial> = trials.iter().filter(|t| t.omega == Some(true)).collect();
        let floor_freq = Frequency::from_flags(
            on_event
                .iter()
                .map(|t| t.base.n1_frac.is_some_and(|f| f >= floor)),
        );
        let solver_failures = trials
            .iter()
            .filter(|t| t.base.solver_error.is_some())
            .count();
        med_n1.push(median(n1()));
        med_n2.push(median(n2()));
        med_band.push(median(band()));
        p_omega.push(omega.p);
        per_size.push(json!({
            "N": point.particle_count,
            "L": point.box_length,
            "S": site.as_ref().map(|_| strength),
            "median_n1_frac": median(n1()),
            "median_n2_frac": median(n2()),
            "median_band_frac": median(band()),
            "n1_frac_moments": moments(n1()),
            "theta": theta,
            "above_theta": Frequency::from_flags(n1().map(|f| f >= theta)),
            "omega2": omega,
            "ground_floor_on_omega2": {"eps": cor_eps, "floor": floor, "frequency": floor_freq},
            "median_levels_used": median(trials.iter().map(|t| t.levels_used as f64)),
            "max_truncation_tail": trials.iter().filter_map(|t| t.truncation_tail).reduce(f64::max),
            "solver_failures": solver_failures,
        }));
    }

    let last_band = med_band.last().copied().flatten();
    let results: Value = json!({
        "rate": cfg.model.rate,
        "beta": beta,
        "density": rho,
        "critical_density_ls": rho_c,
        "rho0": rho0,
        "rho0_over_rho": rho0 / rho,
        "sizes": per_size,
        "max_abs_residual": max_residual,
        "trends": {
            "median_n1_strictly_increasing": strictly_increasing(&med_n1),
            "median_n2_strictly_decreasing": strictly_decreasing(&med_n2),
            "median_band_strictly_decreasing": strictly_decreasing(&med_band),
            "last_median_band": last_band,
            "last_median_band_below_0_05": last_band.is_some_and(|b| b < 0.05),
            "omega2_nondecreasing": nondecreasing(&p_omega),
        },
        "warnings": warnings,
    });
    Ok(ExperimentReport {
        config: cfg.clone(),
        table,
        results,
        run: None,
    })
}
