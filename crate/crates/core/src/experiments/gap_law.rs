use serde_json::{json, Value};

use crate::error::Result;
use crate::experiments::config::ExperimentConfig;
use crate::experiments::report::{
    fmt_f64, mean, nondecreasing, BaseRow, ExperimentReport, Frequency, Row, TrialTable,
};
use crate::experiments::{map_trials, Realization};
use crate::point_process::{
    count_concentration_bound, count_concentration_event, gap_difference_tail_exact,
    iid_exponential_top_two, largest_gap_event, top_gaps,
};
use crate::seed::{rng_from_seed, stream_seed};

struct Trial {
    base: BaseRow,
    count: usize,
    tails: Vec<bool>,
    vanishing: bool,
    separations: Vec<bool>,
    count_event: bool,
    largest_gap: bool,
}

pub(crate) fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let rate = cfg.model.rate;
    let gl = &cfg.gap_law;
    let thresholds = &cfg.run.thresholds;
    let j_max = gl.gap_indices.iter().copied().max().unwrap_or(2).max(2);

    let mut extra = vec!["count".to_string()];
    extra.extend(thresholds.iter().map(|c| format!("tail_c{}", fmt_f64(*c))));
    extra.push("vanishing".into());
    extra.extend(gl.gap_indices.iter().map(|j| format!("separation_j{j}")));
    extra.push("count_event".into());
    extra.push("largest_gap_event".into());
    let mut table = TrialTable::new(&extra);

    let mut per_size = Vec::new();
    let mut largest_gap_freqs = Vec::new();
    let mut vanishing_freqs = Vec::new();
    for point in cfg.size_points()? {
        let l = point.box_length;
        let c_vanish = 1.0 / l.ln();
        let trials: Vec<Result<Trial>> = map_trials(cfg.run.trials, |t| {
            let real = Realization::sample(cfg, point.key, l, t)?;
            let top = top_gaps(&real.gaps, j_max)?;
            let diff = top[0] - top[1];
            Ok(Trial {
                base: BaseRow {
                    seed: real.seed,
                    particle_count: point.particle_count,
                    box_length: l,
                    l1: top[0],
                    l2: top[1],
                    trial: t,
                    ..Default::default()
                },
                count: real.config.count(),
                tails: thresholds.iter().map(|&c| diff > c).collect(),
                vanishing: diff > c_vanish,
                separations: gl
                    .gap_indices
                    .iter()
                    .map(|&j| top[0] - top[j - 1] > gl.c_hat)
                    .collect(),
                count_event: count_concentration_event(real.config.count(), rate, l, gl.count_eps),
                largest_gap: largest_gap_event(top[0], rate, l, gl.zeta_gap),
            })
        });
        let trials: Vec<Trial> = trials.into_iter().collect::<Result<_>>()?;

        for tr in &trials {
            let mut row = Row::default().int(tr.count as u64);
            for &f in &tr.tails {
                row = row.flag(f);
            }
            row = row.flag(tr.vanishing);
            for &f in &tr.separations {
                row = row.flag(f);
            }
            row = row.flag(tr.count_event).flag(tr.largest_gap);
            table.push(&tr.base, row);
        }

        let tails: Vec<Value> = thresholds
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let f = Frequency::from_flags(trials.iter().map(|t| t.tails[i]));
                let exact = gap_difference_tail_exact(rate, c);
                json!({
                    "c": c,
                    "frequency": f,
                    "exact_tail": exact,
                    "at_least_exact_minus_slack": f.p >= exact - cfg.tolerance.probability_slack,
                })
            })
            .collect();
        let separations: Vec<Value> = gl
            .gap_indices
            .iter()
            .enumerate()
            .map(|(i, &j)| json!({"j": j, "frequency": Frequency::from_flags(trials.iter().map(|t| t.separations[i]))}))
            .collect();
        let sep_p: Vec<f64> = separations
            .iter()
            .map(|v| v["frequency"]["p"].as_f64().unwrap_or(0.0))
            .collect();
        let count_bound = count_concentration_bound(rate, l, gl.count_eps).ok();
        let count_freq = Frequency::from_flags(trials.iter().map(|t| t.count_event));
        let largest = Frequency::from_flags(trials.iter().map(|t| t.largest_gap));
        let vanishing = Frequency::from_flags(trials.iter().map(|t| t.vanishing));
        largest_gap_freqs.push(largest.p);
        vanishing_freqs.push(vanishing.p);
        per_size.push(json!({
            "N": point.particle_count,
            "L": l,
            "mean_count_per_length": mean(trials.iter().map(|t| t.count as f64)).map(|m| m / l),
            "tails": tails,
            "vanishing_threshold": {"c": c_vanish, "frequency": vanishing},
            "separations": separations,
            "separation_nondecreasing_in_j": nondecreasing(&sep_p),
            "count_concentration": {
                "eps": gl.count_eps,
                "frequency": count_freq,
                "bound": count_bound,
                "at_least_bound": count_bound.map(|b| count_freq.p >= b),
            },
            "largest_gap_scaling": {"zeta": gl.zeta_gap, "frequency": largest},
        }));
    }

    // iid exponential surrogate: the tail is exactly exp(-rate c)
    let k = gl.iid_gaps;
    let pairs: Vec<Result<(f64, f64)>> = map_trials(gl.iid_trials, |t| {
        let mut rng = rng_from_seed(stream_seed(cfg.run.seed, 1, k as u64, t as u64));
        iid_exponential_top_two(rate, k, &mut rng)
    });
    let pairs: Vec<(f64, f64)> = pairs.into_iter().collect::<Result<_>>()?;
    let iid: Vec<Value> = thresholds
        .iter()
        .map(|&c| {
            let f = Frequency::from_flags(pairs.iter().map(|(a, b)| a - b > c));
            let exact = gap_difference_tail_exact(rate, c);
            json!({
                "c": c,
                "frequency": f,
                "exact_tail": exact,
                "within_clt_band": (f.p - exact).abs() <= 3.0 * (exact * (1.0 - exact) / f.trials as f64).sqrt(),
            })
        })
        .collect();

    let results = json!({
        "rate": rate,
        "sizes": per_size,
        "iid_surrogate": {"gaps": k, "trials": gl.iid_trials, "tails": iid},
        "trends": {
            "largest_gap_scaling_increasing": largest_gap_freqs.windows(2).all(|w| w[1] > w[0]),
            "vanishing_threshold_increasing": vanishing_freqs.windows(2).all(|w| w[1] > w[0]),
        },
    });
    Ok(ExperimentReport {
        config: cfg.clone(),
        table,
        results,
        run: None,
    })
}
