use std::f64::consts::PI;

use serde_json::{json, Value};

use crate::error::Result;
use crate::experiments::config::ExperimentConfig;
use crate::experiments::report::{fmt_f64, BaseRow, ExperimentReport, Row, TrialTable};
use crate::experiments::{map_trials, spacing, Realization};
use crate::spectral::eigen::SturmCounter;
use crate::spectral::luttinger_sy::levels_below;
use crate::spectral::operator::{discretize, Boundary};
use crate::spectral::potential::{assemble_potential, SingleSitePotential};
use crate::thermo::ids::{
    analytic_ids_ls_curve, default_fit_window, empirical_ids_from_counts, inverse_sqrt_grid,
    lifshitz_slope_fit, IdsCurve,
};

const CONTROL_POINTS: usize = 50;

/// Eigenvalue counts below every grid energy, with the grid spacing used.
/// Base row, eigenvalue counts on the grid, grid spacing.
type TrialCounts = (BaseRow, Vec<usize>, Option<f64>);

fn trial_counts(
    cfg: &ExperimentConfig,
    site: Option<&SingleSitePotential>,
    real: &Realization,
    energies: &[f64],
) -> Result<(Vec<usize>, Option<f64>)> {
    match site {
        None => {
            let top = energies.last().copied().unwrap_or(0.0);
            let levels = levels_below(&real.gaps.gaps, top);
            let counts = energies
                .iter()
                .map(|&e| levels.partition_point(|&x| x < e))
                .collect();
            Ok((counts, None))
        }
        Some(site) => {
            let h = spacing(cfg, site, real.config.box_length);
            let field = assemble_potential(&real.config, site, h)?;
            let op = discretize(&field, Boundary::Dirichlet)?;
            Ok((
                SturmCounter::new(&op).counts(energies),
                Some(field.spacing()),
            ))
        }
    }
}

fn fit_json(ids: &IdsCurve, window: Option<(f64, f64)>, rate: f64) -> Value {
    let Some(window) = window else {
        return json!({"ok": false, "error": "no IDS value above 1e-6 on the grid"});
    };
    match lifshitz_slope_fit(ids, window) {
        Ok(fit) => json!({
            "ok": true,
            "window": [window.0, window.1],
            "points": fit.points,
            "slope": fit.slope,
            "intercept": fit.intercept,
            "slope_over_minus_rate_pi": fit.slope / (-rate * PI),
            "relative_error": (fit.slope / (-rate * PI) - 1.0).abs(),
        }),
        Err(e) => json!({"ok": false, "window": [window.0, window.1], "error": e.to_string()}),
    }
}

pub(crate) fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let rate = cfg.model.rate;
    let lc = &cfg.lifshitz;
    let energies = inverse_sqrt_grid(lc.energy_range[0], lc.energy_range[1], lc.energy_points);
    let extra: Vec<String> = energies
        .iter()
        .map(|e| format!("count_{}", fmt_f64(*e)))
        .collect();
    let mut table = TrialTable::new(&extra);

    // the analytic curve is the positive control for the fit itself
    let control_grid =
        inverse_sqrt_grid(lc.control_window[0], lc.control_window[1], CONTROL_POINTS);
    let control = analytic_ids_ls_curve(rate, &control_grid)?;
    let control_fit = fit_json(
        &control,
        Some((lc.control_window[0], lc.control_window[1])),
        rate,
    );

    let mut per_size = Vec::new();
    for (idx, point) in cfg.size_points()?.iter().enumerate() {
        let strength = cfg.strength_at(idx, point);
        let site = cfg.site(strength)?;
        let l = point.box_length;
        let trials: Vec<Result<TrialCounts>> = map_trials(cfg.run.trials, |t| {
            let real = Realization::sample(cfg, point.key, l, t)?;
            let (counts, h) = trial_counts(cfg, site.as_ref(), &real, &energies)?;
            let base = BaseRow {
                seed: real.seed,
                particle_count: point.particle_count,
                box_length: l,
                strength: site.as_ref().map(|_| strength),
                l1: real.l1(),
                l2: real.l2(),
                trial: t,
                ..Default::default()
            };
            Ok((base, counts, h))
        });
        let trials: Vec<_> = trials.into_iter().collect::<Result<_>>()?;
        let mut all_counts = Vec::with_capacity(trials.len());
        let mut h_max = 0.0f64;
        for (base, counts, h) in trials {
            let mut row = Row::default();
            for &c in &counts {
                row = row.int(c as u64);
            }
            table.push(&base, row);
            all_counts.push(counts);
            h_max = h_max.max(h.unwrap_or(0.0));
        }

        let ids = empirical_ids_from_counts(&all_counts, l, &energies)?;
        let window = lc
            .fit_window
            .map(|w| (w[0], w[1]))
            .or_else(|| default_fit_window(&ids));
        let fit = fit_json(&ids, window, rate);
        // discrete free levels sit below the continuum ones by a relative O(E h^2)
        let weyl_slack = lc.energy_range[1] * h_max * h_max / 3.0 + 1e-12;
        let prefactor_ratio = match (fit["intercept"].as_f64(), control_fit["intercept"].as_f64()) {
            (Some(a), Some(b)) => Some((a - b).exp()),
            _ => None,
        };
        per_size.push(json!({
            "N": point.particle_count,
            "L": l,
            "S": site.as_ref().map(|_| strength),
            "energies": energies,
            "ids": ids.values,
            "fit": fit,
            "prefactor_ratio_to_analytic": prefactor_ratio,
            "within_weyl_bound": ids.within_weyl_bound(weyl_slack),
            "weyl_slack": weyl_slack,
        }));
    }

    Ok(ExperimentReport {
        config: cfg.clone(),
        table,
        results: json!({
            "rate": rate,
            "target_slope": -rate * PI,
            "analytic_control": control_fit,
            "sizes": per_size,
        }),
        run: None,
    })
}
