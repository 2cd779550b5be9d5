use std::f64::consts::PI;

use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::config::ExperimentConfig;
use crate::experiments::report::{
    mean, strictly_decreasing, BaseRow, ExperimentReport, Outcome, Row, Tally, TrialTable,
};
use crate::experiments::{dirichlet_levels, map_trials, Realization};
use crate::spectral::luttinger_sy::lowest_levels;
use crate::spectral::potential::PotentialField;

struct Trial {
    base: BaseRow,
    e1_dev: Option<f64>,
    max_dev: Option<f64>,
    discrete_dev: Option<f64>,
    domination: Outcome,
}

/// The `k` lowest levels of the grid operator once every node carrying
/// potential becomes a wall: free Dirichlet chains between them.
pub(crate) fn discrete_wall_limit(field: &PotentialField, k: usize) -> Vec<f64> {
    let h = field.spacing();
    let mut levels = Vec::new();
    let mut push_block = |m: usize| {
        for j in 1..=m.min(k) {
            let s = (PI * j as f64 / (2 * (m + 1)) as f64).sin();
            levels.push(4.0 * s * s / (h * h));
        }
    };
    let mut run = 0;
    for &v in &field.values {
        if v > 0.0 {
            push_block(run);
            run = 0;
        } else {
            run += 1;
        }
    }
    push_block(run);
    levels.sort_by(f64::total_cmp);
    levels.truncate(k);
    levels
}

fn max_rel_dev(levels: &[f64], reference: &[f64]) -> Option<f64> {
    if reference.len() < levels.len() {
        return None;
    }
    levels
        .iter()
        .zip(reference)
        .map(|(e, r)| ((e - r) / r).abs())
        .reduce(f64::max)
}

pub(crate) fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let strengths = &cfg.ls_compare.strengths;
    if strengths.is_empty() || strengths.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::Config(
            "ls_compare.strengths must be a nonempty list of positive values".into(),
        ));
    }
    let extra: Vec<String> = [
        "E1_rel_dev",
        "max_rel_dev",
        "discrete_limit_rel_dev",
        "ls_domination",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut table = TrialTable::new(&extra);
    let tol = cfg.tolerance.eig_tol;
    let k = cfg.run.levels;

    let mut per_size = Vec::new();
    let mut all_decreasing = true;
    for point in cfg.size_points()? {
        let l = point.box_length;
        let mut ladder = Vec::new();
        let mut mean_e1 = Vec::new();
        for &s in strengths {
            let site = cfg
                .site(s)?
                .ok_or_else(|| Error::Config("ls_compare needs a finite-strength shape".into()))?;
            let trials: Vec<Result<Trial>> = map_trials(cfg.run.trials, |t| {
                let real = Realization::sample(cfg, point.key, l, t)?;
                let mut trial = Trial {
                    base: BaseRow {
                        seed: real.seed,
                        particle_count: point.particle_count,
                        box_length: l,
                        strength: Some(s),
                        l1: real.l1(),
                        l2: real.l2(),
                        trial: t,
                        ..Default::default()
                    },
                    e1_dev: None,
                    max_dev: None,
                    discrete_dev: None,
                    domination: Outcome::SolverFailed,
                };
                let (field, spec, upper) = match dirichlet_levels(cfg, &real, &site, k) {
                    Ok(v) => v,
                    Err(e) if e.is_numerical() => {
                        trial.base.solver_error = Some(e.to_string());
                        return Ok(trial);
                    }
                    Err(e) => return Err(e),
                };
                let levels = &spec.eigenvalues;
                let ls = lowest_levels(&real.gaps.gaps, levels.len())?;
                trial.e1_dev = Some(((levels[0] - ls[0]) / ls[0]).abs());
                trial.max_dev = max_rel_dev(levels, &ls);
                trial.discrete_dev =
                    max_rel_dev(levels, &discrete_wall_limit(&field, levels.len()));
                trial.domination = match &upper {
                    Some(u) if u.len() >= levels.len() => {
                        Outcome::from_check(levels.iter().zip(u).all(|(e, c)| *e <= c + tol))
                    }
                    _ => Outcome::Vacuous,
                };
                trial.base.levels = spec.eigenvalues;
                Ok(trial)
            });
            let trials: Vec<Trial> = trials.into_iter().collect::<Result<_>>()?;
            for tr in &trials {
                let row = Row::default()
                    .opt(tr.e1_dev)
                    .opt(tr.max_dev)
                    .opt(tr.discrete_dev)
                    .outcome(tr.domination);
                table.push(&tr.base, row);
            }
            let m1 = mean(trials.iter().filter_map(|t| t.e1_dev));
            mean_e1.push(m1);
            ladder.push(json!({
                "S": s,
                "mean_E1_rel_dev": m1,
                "mean_max_rel_dev": mean(trials.iter().filter_map(|t| t.max_dev)),
                "max_rel_dev": trials.iter().filter_map(|t| t.max_dev).reduce(f64::max),
                "mean_discrete_limit_rel_dev": mean(trials.iter().filter_map(|t| t.discrete_dev)),
                "ls_domination": Tally::from_outcomes(trials.iter().map(|t| t.domination)),
            }));
        }
        let decreasing = strictly_decreasing(&mean_e1);
        all_decreasing &= decreasing;
        per_size.push(json!({
            "N": point.particle_count,
            "L": l,
            "strengths": ladder,
            "mean_E1_rel_dev_strictly_decreasing": decreasing,
        }));
    }

    Ok(ExperimentReport {
        config: cfg.clone(),
        table,
        results: json!({
            "rate": cfg.model.rate,
            "sizes": per_size,
            "trends": {"mean_E1_rel_dev_strictly_decreasing": all_decreasing},
        }),
        run: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::potential::Grid;

    #[test]
    fn wall_limit_of_free_chain() {
        let grid = Grid::dirichlet_box(PI, PI / 256.0).unwrap();
        let field = PotentialField::zeros(grid);
        let levels = discrete_wall_limit(&field, 3);
        for (j, e) in levels.iter().enumerate() {
            let exact = ((j + 1) * (j + 1)) as f64;
            assert!((e / exact - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn wall_splits_chain() {
        // 7 nodes, wall at the middle: two chains of 3
        let grid = Grid::dirichlet_box(8.0, 1.0).unwrap();
        let mut field = PotentialField::zeros(grid);
        field.values[3] = 1.0;
        let levels = discrete_wall_limit(&field, 2);
        let e = 4.0 * (PI / 8.0).sin().powi(2);
        assert!((levels[0] - e).abs() < 1e-14 && (levels[1] - e).abs() < 1e-14);
    }
}
