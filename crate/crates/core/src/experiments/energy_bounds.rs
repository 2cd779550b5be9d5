use std::f64::consts::PI;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::experiments::config::ExperimentConfig;
use crate::experiments::report::{
    median, BaseRow, ExperimentReport, Outcome, Row, Tally, TrialTable,
};
use crate::experiments::{dirichlet_levels, map_trials, Realization};
use crate::spectral::bounds::{
    dirichlet_ground_upper_bound, higher_level_threshold, neumann_ground_lower_bound,
    second_level_threshold,
};
use crate::spectral::eigen::{lowest_eigenvalues, lowest_eigenvalues_with_hint};
use crate::spectral::operator::{discretize, Boundary, DiscretizedOperator};
use crate::spectral::potential::{PotentialField, SingleSitePotential};

const CHECKS: [&str; 7] = [
    "ground_upper",
    "neumann_lower",
    "bracketing",
    "second_level",
    "higher_levels",
    "ls_domination",
    "free_control",
];

struct Trial {
    base: BaseRow,
    outcomes: [Outcome; 7],
    ground_upper_bound: Option<f64>,
    neumann_lower_bound: Option<f64>,
    neumann_lower_block: Option<f64>,
    second_ratio: Option<f64>,
    higher_ratio: Option<f64>,
}

/// Ground state of the Neumann operator on the nodes of `[a, b)`; `None`
/// when the block holds fewer than two nodes.
fn neumann_block_ground(
    field: &PotentialField,
    interval: (f64, f64),
    tol: f64,
) -> Result<Option<f64>> {
    let block = field.restrict(interval.0, interval.1);
    if block.values.len() < 2 {
        return Ok(None);
    }
    let op = discretize(&block, Boundary::Neumann)?;
    Ok(lowest_eigenvalues(&op, 1, tol)?.ground())
}

fn run_trial(
    cfg: &ExperimentConfig,
    site: &SingleSitePotential,
    (a, b): (f64, f64),
    particle_count: u64,
    key: u64,
    box_length: f64,
    t: usize,
) -> Result<Trial> {
    let real = Realization::sample(cfg, key, box_length, t)?;
    let tol = cfg.tolerance.eig_tol;
    let mut base = BaseRow {
        seed: real.seed,
        particle_count,
        box_length,
        strength: Some(site.strength_scale),
        l1: real.l1(),
        l2: real.l2(),
        trial: t,
        ..Default::default()
    };
    let mut trial = Trial {
        base: BaseRow::default(),
        outcomes: [Outcome::SolverFailed; 7],
        ground_upper_bound: None,
        neumann_lower_bound: None,
        neumann_lower_block: None,
        second_ratio: None,
        higher_ratio: None,
    };

    let (field, spec, upper) = match dirichlet_levels(cfg, &real, site, cfg.run.levels) {
        Ok(v) => v,
        Err(e) if e.is_numerical() => {
            base.solver_error = Some(e.to_string());
            trial.base = base;
            return Ok(trial);
        }
        Err(e) => return Err(e),
    };
    let h = field.spacing();
    let levels = &spec.eigenvalues;
    let c_u = site.support_total();
    let slack = cfg.tolerance.eigen_slack * h * h;
    base.levels = levels.clone();

    // upper bound on the ground state from the free part of the largest gap
    trial.ground_upper_bound = dirichlet_ground_upper_bound(real.l1(), c_u);
    let ground_upper = match trial.ground_upper_bound {
        Some(bound) => Outcome::from_check(levels[0] <= bound * (1.0 + slack) + tol),
        None => Outcome::Vacuous,
    };

    // Neumann lower bound on a gap with obstacles at both ends
    let rank = cfg.energy_bounds.gap_rank;
    let neumann_lower = match real.gaps.order.get(rank - 1) {
        Some(&i) if real.gaps.is_interior(i) && site.edge_strength(a, b) > 0.0 => {
            match neumann_ground_lower_bound(real.gaps.gaps[i], site, a, b) {
                Ok(bound) if bound > 0.0 => {
                    trial.neumann_lower_bound = Some(bound);
                    match neumann_block_ground(&field, real.gaps.interval(i), tol) {
                        Ok(Some(e)) => {
                            trial.neumann_lower_block = Some(e);
                            Outcome::from_check(e >= bound * (1.0 - slack) - tol)
                        }
                        Ok(None) => Outcome::Vacuous,
                        Err(_) => Outcome::SolverFailed,
                    }
                }
                Ok(_) | Err(Error::Precondition(_)) => Outcome::Vacuous,
                Err(e) => return Err(e),
            }
        }
        _ => Outcome::Vacuous,
    };

    // Dirichlet dominates the Neumann direct sum with cuts at every atom
    let k = levels.len();
    let bracketing = match DiscretizedOperator::neumann_direct_sum(&field, &real.config.atoms)
        .and_then(|op| lowest_eigenvalues_with_hint(&op, k, tol, levels.last().copied()))
    {
        Ok(neu) => Outcome::from_check(
            levels
                .iter()
                .zip(&neu.eigenvalues)
                .all(|(d, n)| *d >= n - tol),
        ),
        Err(_) => Outcome::SolverFailed,
    };

    let ranked_ground = |r: usize| -> Result<Option<f64>> {
        match real.gaps.ranked_interval(r) {
            Some(iv) => neumann_block_ground(&field, iv, tol),
            None => Ok(None),
        }
    };
    let t2 = second_level_threshold(cfg.model.rate, box_length);
    let t3 = higher_level_threshold(cfg.model.rate, box_length);
    let second_level = match (levels.get(1), ranked_ground(2)) {
        (None, _) | (_, Ok(None)) => Outcome::Vacuous,
        (_, Err(_)) => Outcome::SolverFailed,
        (Some(&e2), Ok(Some(n))) => {
            trial.second_ratio = Some(e2 / t2);
            Outcome::from_check(e2 >= n.min(t2) * (1.0 - slack) - tol)
        }
    };
    let mut higher_levels = if k >= 3 {
        Outcome::Held
    } else {
        Outcome::Vacuous
    };
    let mut ratio = f64::INFINITY;
    for j in 3..=k {
        let ej = levels[j - 1];
        ratio = ratio.min(ej / t3);
        match ranked_ground(j.div_ceil(2)) {
            Ok(Some(n)) => {
                if ej < n.min(t3) * (1.0 - slack) - tol {
                    higher_levels = Outcome::Violated;
                }
            }
            Ok(None) => {}
            Err(_) => {
                higher_levels = Outcome::SolverFailed;
                break;
            }
        }
    }
    trial.higher_ratio = ratio.is_finite().then_some(ratio);

    // walls at the obstacle edges bound every level from above
    let ls_domination = match &upper {
        Some(u) if u.len() >= k => {
            Outcome::from_check(levels.iter().zip(u).all(|(e, c)| *e <= c + tol))
        }
        _ => Outcome::Vacuous,
    };

    let free_control = if site.strength_scale == 0.0 {
        let l = box_length;
        Outcome::from_check(levels.iter().enumerate().all(|(j, &e)| {
            let exact = (PI * (j + 1) as f64 / l).powi(2);
            (e / exact - 1.0).abs() <= 1e-3
        }))
    } else {
        Outcome::Vacuous
    };

    trial.outcomes = [
        ground_upper,
        neumann_lower,
        bracketing,
        second_level,
        higher_levels,
        ls_domination,
        free_control,
    ];
    trial.base = base;
    Ok(trial)
}

pub(crate) fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut extra: Vec<String> = [
        "C_u",
        "h",
        "ground_upper_bound",
        "neumann_lower_bound",
        "neumann_lower_block_E1",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    extra.extend(CHECKS.iter().map(|s| s.to_string()));
    let mut table = TrialTable::new(&extra);

    let mut per_size = Vec::new();
    for (idx, point) in cfg.size_points()?.iter().enumerate() {
        let strength = cfg.strength_at(idx, point);
        let site = cfg
            .site(strength)?
            .ok_or_else(|| Error::Config("energy_bounds needs a finite-strength shape".into()))?;
        let a = cfg.energy_bounds.bound_a.unwrap_or(site.support_right);
        let b = cfg.energy_bounds.bound_b.unwrap_or(site.support_left);
        if !(a > 0.0 && a <= site.support_right && b > 0.0 && b <= site.support_left) {
            return Err(Error::Config(format!(
                "energy_bounds: need 0 < bound_a <= {} and 0 < bound_b <= {}",
                site.support_right, site.support_left
            )));
        }
        let h = crate::experiments::spacing(cfg, &site, point.box_length);
        let trials: Vec<Result<Trial>> = map_trials(cfg.run.trials, |t| {
            run_trial(
                cfg,
                &site,
                (a, b),
                point.particle_count,
                point.key,
                point.box_length,
                t,
            )
        });
        let trials: Vec<Trial> = trials.into_iter().collect::<Result<_>>()?;

        for tr in &trials {
            let mut row = Row::default()
                .num(site.support_total())
                .num(h)
                .opt(tr.ground_upper_bound)
                .opt(tr.neumann_lower_bound)
                .opt(tr.neumann_lower_block);
            for &o in &tr.outcomes {
                row = row.outcome(o);
            }
            table.push(&tr.base, row);
        }

        let tallies: serde_json::Map<String, Value> = CHECKS
            .iter()
            .enumerate()
            .map(|(c, name)| {
                let t = Tally::from_outcomes(trials.iter().map(|tr| tr.outcomes[c]));
                (
                    name.to_string(),
                    json!({"tally": t, "held_fraction": t.held_fraction()}),
                )
            })
            .collect();
        let violated_seeds: Vec<u64> = trials
            .iter()
            .filter(|tr| tr.outcomes.contains(&Outcome::Violated))
            .map(|tr| tr.base.seed)
            .collect();
        per_size.push(json!({
            "N": point.particle_count,
            "L": point.box_length,
            "S": strength,
            "support_total": site.support_total(),
            "grid_spacing": h,
            "bound_a": a,
            "bound_b": b,
            "edge_strength": site.edge_strength(a, b),
            "checks": tallies,
            "violated_seeds": violated_seeds,
            "threshold_ratios": {
                "second_level": second_level_threshold(cfg.model.rate, point.box_length),
                "median_E2_over_second": median(trials.iter().filter_map(|t| t.second_ratio)),
                "higher_level": higher_level_threshold(cfg.model.rate, point.box_length),
                "median_min_Ej_over_higher": median(trials.iter().filter_map(|t| t.higher_ratio)),
            },
        }));
    }

    Ok(ExperimentReport {
        config: cfg.clone(),
        table,
        results: json!({"rate": cfg.model.rate, "sizes": per_size}),
        run: None,
    })
}
