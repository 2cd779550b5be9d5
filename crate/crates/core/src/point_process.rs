//! Poisson point configurations on the box `(-L/2, L/2)` and the order
//! statistics of the atom-free intervals they cut the box into.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::seed::{rng_from_seed, TrialRng};

/// One realization of the Poisson random measure restricted to the box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointConfiguration {
    pub rate: f64,
    pub box_length: f64,
    /// Strictly increasing, all inside the open box.
    pub atoms: Vec<f64>,
    pub seed: u64,
}

impl PointConfiguration {
    pub fn count(&self) -> usize {
        self.atoms.len()
    }

    pub fn half_length(&self) -> f64 {
        0.5 * self.box_length
    }
}

/// Draw `Poisson(mean)` by inversion, searching outward from the mode so the
/// work is `O(sqrt(mean))` and nothing underflows for large means.
pub fn sample_poisson_inversion<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let u: f64 = rng.random();
    let mode = mean.floor();
    let ln_mean = mean.ln();
    let p_mode = (mode * ln_mean - mean - ln_gamma(mode + 1.0)).exp();

    // CDF at the mode, summed downward until the terms no longer matter.
    let mut cdf_mode = p_mode;
    let mut p = p_mode;
    let mut k = mode;
    while k > 0.0 {
        p *= k / mean;
        k -= 1.0;
        cdf_mode += p;
        if p < cdf_mode * 1e-17 {
            break;
        }
    }

    let mut k = mode;
    let mut cdf = cdf_mode.min(1.0);
    let mut p = p_mode;
    if u <= cdf {
        // smallest k with F(k) >= u
        while k > 0.0 && cdf - p >= u {
            cdf -= p;
            p *= k / mean;
            k -= 1.0;
        }
    } else {
        while cdf < u {
            k += 1.0;
            p *= mean / k;
            if p == 0.0 {
                break;
            }
            cdf += p;
        }
    }
    k as u64
}

/// Sample a configuration: `kappa ~ Poisson(rate * L)`, then `kappa` iid
/// uniform positions, sorted.
pub fn sample_configuration(rate: f64, box_length: f64, seed: u64) -> Result<PointConfiguration> {
    let mut rng = rng_from_seed(seed);
    sample_configuration_with(rate, box_length, seed, &mut rng)
}

pub(crate) fn sample_configuration_with(
    rate: f64,
    box_length: f64,
    seed: u64,
    rng: &mut TrialRng,
) -> Result<PointConfiguration> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::invalid(format!("rate must be positive, got {rate}")));
    }
    if !(box_length >= 0.0) || !box_length.is_finite() {
        return Err(Error::invalid(format!(
            "box length must be nonnegative, got {box_length}"
        )));
    }
    let count = sample_poisson_inversion(rate * box_length, rng) as usize;
    let half = 0.5 * box_length;
    let atoms = loop {
        let mut atoms = Vec::with_capacity(count);
        while atoms.len() < count {
            let x = -half + rng.random::<f64>() * box_length;
            if x > -half && x < half {
                atoms.push(x);
            }
        }
        atoms.sort_by(f64::total_cmp);
        // coincident atoms have probability zero but can occur in floating point
        if atoms.windows(2).all(|w| w[0] < w[1]) {
            break atoms;
        }
    };
    Ok(PointConfiguration {
        rate,
        box_length,
        atoms,
        seed,
    })
}

/// Lengths of the atom-free intervals, in box order and sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct GapStatistics {
    pub box_length: f64,
    /// `[-L/2, atoms..., L/2]`; gap `i` is `(edges[i], edges[i + 1])`.
    pub edges: Vec<f64>,
    pub gaps: Vec<f64>,
    pub sorted_desc: Vec<f64>,
    /// `sorted_desc[r] == gaps[order[r]]`.
    pub order: Vec<usize>,
}

impl GapStatistics {
    pub fn from_gaps(gaps: Vec<f64>) -> Self {
        let box_length: f64 = gaps.iter().sum();
        let mut edges = Vec::with_capacity(gaps.len() + 1);
        let mut x = -0.5 * box_length;
        edges.push(x);
        for g in &gaps {
            x += g;
            edges.push(x);
        }
        Self::build(box_length, edges, gaps)
    }

    fn build(box_length: f64, edges: Vec<f64>, gaps: Vec<f64>) -> Self {
        let mut order: Vec<usize> = (0..gaps.len()).collect();
        // stable: equal lengths keep box order, leftmost first
        order.sort_by(|&a, &b| gaps[b].total_cmp(&gaps[a]));
        let sorted_desc = order.iter().map(|&i| gaps[i]).collect();
        GapStatistics {
            box_length,
            edges,
            gaps,
            sorted_desc,
            order,
        }
    }

    /// Endpoints of the gap with box index `i`.
    pub fn interval(&self, i: usize) -> (f64, f64) {
        (self.edges[i], self.edges[i + 1])
    }

    /// Endpoints of the `rank`-th largest gap (`rank` starting at 1).
    pub fn ranked_interval(&self, rank: usize) -> Option<(f64, f64)> {
        let i = *self.order.get(rank.checked_sub(1)?)?;
        Some(self.interval(i))
    }

    /// Whether both ends of gap `i` are atoms rather than box walls.
    pub fn is_interior(&self, i: usize) -> bool {
        i > 0 && i + 1 < self.gaps.len()
    }

    pub fn largest(&self) -> f64 {
        self.sorted_desc.first().copied().unwrap_or(0.0)
    }
}

/// The `kappa + 1` clipped gaps of a configuration.
pub fn clipped_gaps(config: &PointConfiguration) -> GapStatistics {
    let half = config.half_length();
    let mut edges = Vec::with_capacity(config.atoms.len() + 2);
    edges.push(-half);
    edges.extend_from_slice(&config.atoms);
    edges.push(half);
    let gaps = edges.windows(2).map(|w| w[1] - w[0]).collect();
    GapStatistics::build(config.box_length, edges, gaps)
}

/// The `j` largest gaps, zero-padded when fewer exist.
pub fn top_gaps(stats: &GapStatistics, j: usize) -> Result<Vec<f64>> {
    if j == 0 {
        return Err(Error::invalid("top_gaps needs j >= 1"));
    }
    let mut out: Vec<f64> = stats.sorted_desc.iter().take(j).copied().collect();
    out.resize(j, 0.0);
    Ok(out)
}

/// `P(l1 - l2 > c) = exp(-rate * c)` for iid exponential gaps, for any number
/// `k >= 2` of gaps; the asymptotic lower bound for box gaps.
pub fn gap_difference_tail_exact(rate: f64, c: f64) -> f64 {
    debug_assert!(rate > 0.0 && c >= 0.0);
    (-rate * c).exp()
}

/// Guaranteed lower bound `1 - 2 exp(-(rate/3) L^(1 - 2 eps))` on the
/// probability of [`count_concentration_event`], clamped at zero.
pub fn count_concentration_bound(rate: f64, box_length: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::invalid(format!(
            "eps must lie in (0, 1/2), got {eps}"
        )));
    }
    if !(rate > 0.0) || !(box_length > 0.0) {
        return Err(Error::invalid("rate and box length must be positive"));
    }
    let bound = 1.0 - 2.0 * (-(rate / 3.0) * box_length.powf(1.0 - 2.0 * eps)).exp();
    Ok(bound.max(0.0))
}

/// `(1 - L^-eps) rate L <= count <= (1 + L^-eps) rate L`.
pub fn count_concentration_event(count: usize, rate: f64, box_length: f64, eps: f64) -> bool {
    let mean = rate * box_length;
    let spread = box_length.powf(-eps);
    let k = count as f64;
    (1.0 - spread) * mean <= k && k <= (1.0 + spread) * mean
}

/// `(1 - zeta) ln(L) / rate <= l1 <= (1 + zeta) ln(L) / rate`.
pub fn largest_gap_event(l1: f64, rate: f64, box_length: f64, zeta: f64) -> bool {
    let scale = box_length.ln() / rate;
    (1.0 - zeta) * scale <= l1 && l1 <= (1.0 + zeta) * scale
}

/// `k` iid `Exp(rate)` lengths, the surrogate for box gaps.
pub fn iid_exponential_gaps<R: Rng + ?Sized>(rate: f64, k: usize, rng: &mut R) -> Result<Vec<f64>> {
    let exp = Exp::new(rate).map_err(|e| Error::invalid(e.to_string()))?;
    Ok((0..k).map(|_| exp.sample(rng)).collect())
}

/// The two largest of `k` iid `Exp(rate)` lengths without storing them.
pub fn iid_exponential_top_two<R: Rng + ?Sized>(
    rate: f64,
    k: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if k < 2 {
        return Err(Error::invalid("need at least two iid gaps"));
    }
    let exp = Exp::new(rate).map_err(|e| Error::invalid(e.to_string()))?;
    let (mut first, mut second) = (0.0f64, 0.0f64);
    for _ in 0..k {
        let x: f64 = exp.sample(rng);
        if x > first {
            second = first;
            first = x;
        } else if x > second {
            second = x;
        }
    }
    Ok((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn config(atoms: Vec<f64>, box_length: f64) -> PointConfiguration {
        PointConfiguration {
            rate: 1.0,
            box_length,
            atoms,
            seed: 0,
        }
    }

    #[test]
    fn empty_box_has_no_atoms() {
        for seed in 0..20 {
            assert_eq!(sample_configuration(1.0, 0.0, seed).unwrap().count(), 0);
        }
    }

    #[test]
    fn nonpositive_rate_rejected() {
        assert!(matches!(
            sample_configuration(0.0, 10.0, 1),
            Err(Error::InvalidParameter(_))
        ));
        assert!(sample_configuration(-1.0, 10.0, 1).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_configuration(1.0, 50.0, 99).unwrap();
        let b = sample_configuration(1.0, 50.0, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gaps_of_small_configurations() {
        assert_eq!(clipped_gaps(&config(vec![], 10.0)).gaps, vec![10.0]);
        assert_eq!(
            clipped_gaps(&config(vec![-2.0, 1.0], 10.0)).gaps,
            vec![3.0, 3.0, 4.0]
        );
        assert_eq!(clipped_gaps(&config(vec![0.0], 8.0)).gaps, vec![4.0, 4.0]);
    }

    #[test]
    fn top_gaps_examples() {
        let s = GapStatistics::from_gaps(vec![3.0, 3.0, 4.0]);
        assert_eq!(top_gaps(&s, 2).unwrap(), vec![4.0, 3.0]);
        assert_eq!(s.order, vec![2, 0, 1]);
        let s = GapStatistics::from_gaps(vec![10.0]);
        assert_eq!(top_gaps(&s, 3).unwrap(), vec![10.0, 0.0, 0.0]);
        let s = GapStatistics::from_gaps(vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(top_gaps(&s, 1).unwrap(), vec![5.0]);
        assert!(top_gaps(&s, 0).is_err());
    }

    #[test]
    fn tail_closed_form() {
        assert_eq!(gap_difference_tail_exact(1.0, 0.0), 1.0);
        assert!((gap_difference_tail_exact(1.0, 1.0) - 0.36787944117144233).abs() < 1e-15);
    }

    #[test]
    fn concentration_bound_values() {
        let b = count_concentration_bound(1.0, 1e4, 0.25).unwrap();
        let expected = 1.0 - 2.0 * (-100.0f64 / 3.0).exp();
        assert!((b - expected).abs() < 1e-16);
        assert!(1.0 - b > 6.0e-15 && 1.0 - b < 7.0e-15);
        assert_eq!(count_concentration_bound(1.0, 1.0, 0.25).unwrap(), 0.0);
        assert!(count_concentration_bound(1.0, 10.0, 0.5).is_err());
        assert!(count_concentration_bound(1.0, 10.0, 0.0).is_err());
    }

    #[test]
    fn poisson_inversion_mean_and_variance() {
        let mut rng = rng_from_seed(5);
        for &mean in &[0.3, 4.0, 850.0] {
            let m = 20_000;
            let draws: Vec<f64> = (0..m)
                .map(|_| sample_poisson_inversion(mean, &mut rng) as f64)
                .collect();
            let avg = draws.iter().sum::<f64>() / m as f64;
            let var = draws.iter().map(|x| (x - avg).powi(2)).sum::<f64>() / (m - 1) as f64;
            let se = (mean / m as f64).sqrt();
            assert!((avg - mean).abs() < 4.0 * se, "mean {mean}: {avg}");
            assert!((var / mean - 1.0).abs() < 0.06, "var {mean}: {var}");
        }
    }

    // (1 + x) ln(1 + x) - x >= x^2 / ((2/3) x + 2) for x > -1
    #[test]
    fn elementary_log_inequality() {
        let mut x: f64 = -0.999;
        while x <= 10.0 {
            let lhs = (1.0 + x) * (1.0 + x).ln() - x;
            let rhs = x * x / (2.0 / 3.0 * x + 2.0);
            assert!(lhs - rhs >= -1e-12, "x = {x}");
            x += 0.001;
        }
    }

    proptest! {
        #[test]
        fn configuration_invariants(rate in 0.05f64..5.0, len in 0.0f64..300.0, seed in any::<u64>()) {
            let c = sample_configuration(rate, len, seed).unwrap();
            let half = 0.5 * len;
            prop_assert!(c.atoms.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(c.atoms.iter().all(|&x| x > -half && x < half));
            let s = clipped_gaps(&c);
            prop_assert_eq!(s.gaps.len(), c.count() + 1);
            let total: f64 = s.gaps.iter().sum();
            prop_assert!((total - len).abs() <= f64::EPSILON * len.max(1.0) * s.gaps.len() as f64);
            prop_assert!(s.sorted_desc.windows(2).all(|w| w[0] >= w[1]));
            let mut a = s.gaps.clone();
            let mut b = s.sorted_desc.clone();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            prop_assert_eq!(a, b);
        }
    }
}
