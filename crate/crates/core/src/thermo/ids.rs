//! Integrated density of states per unit length and Lifshitz-tail fits.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Spectrum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum IdsProvenance {
    Empirical {
        ensemble_size: usize,
        box_length: f64,
    },
    AnalyticLs {
        rate: f64,
    },
    Tabulated,
}

/// `N(E)` sampled on an ascending energy grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdsCurve {
    pub energies: Vec<f64>,
    pub values: Vec<f64>,
    pub provenance: IdsProvenance,
}

impl IdsCurve {
    pub fn new(energies: Vec<f64>, values: Vec<f64>, provenance: IdsProvenance) -> Result<Self> {
        if energies.len() != values.len() || energies.is_empty() {
            return Err(Error::invalid(
                "IDS grid and values must be nonempty and of equal length",
            ));
        }
        if energies.windows(2).any(|w| !(w[0] < w[1])) || !energies.iter().all(|e| e.is_finite()) {
            return Err(Error::invalid(
                "IDS energies must be finite and strictly ascending",
            ));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite())
            || values.windows(2).any(|w| w[1] < w[0])
        {
            return Err(Error::invalid(
                "IDS values must be finite, nonnegative and nondecreasing",
            ));
        }
        Ok(IdsCurve {
            energies,
            values,
            provenance,
        })
    }

    /// Whether every sample lies below `(1 + slack) sqrt(E) / pi`.
    pub fn within_weyl_bound(&self, slack: f64) -> bool {
        self.energies
            .iter()
            .zip(&self.values)
            .all(|(&e, &v)| v <= (1.0 + slack) * weyl_bound(e))
    }
}

/// `sqrt(E) / pi`, the free per-length eigenvalue count.
pub fn weyl_bound(energy: f64) -> f64 {
    energy.max(0.0).sqrt() / PI
}

/// `nu q / (1 - q)` with `q = exp(-nu pi / sqrt(E))`: the infinite-volume IDS of
/// Dirichlet walls at the atoms of a rate-`nu` Poisson process. Zero for `E <= 0`.
pub fn analytic_ids_ls(rate: f64, energy: f64) -> f64 {
    if !(energy > 0.0) {
        return 0.0;
    }
    let x = -rate * PI / energy.sqrt();
    rate * x.exp() / -x.exp_m1()
}

pub fn analytic_ids_ls_curve(rate: f64, energies: &[f64]) -> Result<IdsCurve> {
    let values = energies.iter().map(|&e| analytic_ids_ls(rate, e)).collect();
    IdsCurve::new(
        energies.to_vec(),
        values,
        IdsProvenance::AnalyticLs { rate },
    )
}

/// Ensemble average of `|{j : E^j < E}| / L` on `energies`. Each spectrum must
/// contain every level below the top of the grid.
pub fn empirical_ids(spectra: &[Spectrum], box_length: f64, energies: &[f64]) -> Result<IdsCurve> {
    let counts: Vec<Vec<usize>> = spectra
        .iter()
        .map(|s| energies.iter().map(|&e| s.count_below(e)).collect())
        .collect();
    empirical_ids_from_counts(&counts, box_length, energies)
}

/// As [`empirical_ids`], from eigenvalue counts `counts[trial][grid index]`.
/// Trials are summed in index order.
pub fn empirical_ids_from_counts(
    counts: &[Vec<usize>],
    box_length: f64,
    energies: &[f64],
) -> Result<IdsCurve> {
    if counts.is_empty() {
        return Err(Error::invalid(
            "empirical IDS needs at least one realization",
        ));
    }
    if !(box_length > 0.0) {
        return Err(Error::invalid("box length must be positive"));
    }
    let mut totals = vec![0u64; energies.len()];
    for row in counts {
        if row.len() != energies.len() {
            return Err(Error::invalid("count row does not match the energy grid"));
        }
        for (t, &c) in totals.iter_mut().zip(row) {
            *t += c as u64;
        }
    }
    let denom = counts.len() as f64 * box_length;
    let values = totals.iter().map(|&t| t as f64 / denom).collect();
    IdsCurve::new(
        energies.to_vec(),
        values,
        IdsProvenance::Empirical {
            ensemble_size: counts.len(),
            box_length,
        },
    )
}

/// Least-squares line `ln N(E) = intercept + slope * E^(-1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifshitzFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
    pub window: (f64, f64),
}

/// Fit over the grid points in `window` with positive values; at least 5 needed.
pub fn lifshitz_slope_fit(ids: &IdsCurve, window: (f64, f64)) -> Result<LifshitzFit> {
    let (lo, hi) = window;
    let pts: Vec<(f64, f64)> = ids
        .energies
        .iter()
        .zip(&ids.values)
        .filter(|(&e, &v)| e >= lo && e <= hi && e > 0.0 && v > 0.0)
        .map(|(&e, &v)| (1.0 / e.sqrt(), v.ln()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::invalid(format!(
            "only {} positive IDS values in [{lo}, {hi}], need 5",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(x, y) in &pts {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if !(sxx > 0.0) {
        return Err(Error::invalid("fit window holds a single energy"));
    }
    let slope = sxy / sxx;
    Ok(LifshitzFit {
        slope,
        intercept: my - slope * mx,
        points: pts.len(),
        window,
    })
}

/// `[E0, 10 E0]` where `E0` is the lowest grid energy with `N > 1e-6`.
pub fn default_fit_window(ids: &IdsCurve) -> Option<(f64, f64)> {
    let i = ids.values.iter().position(|&v| v > 1e-6)?;
    let e0 = ids.energies[i];
    Some((e0, 10.0 * e0))
}

/// `count` energies spaced evenly in `E^(-1/2)` between `lo` and `hi`, ascending.
/// This spacing makes Lifshitz fits uniformly weighted along the regression axis.
pub fn inverse_sqrt_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (1.0 / hi.sqrt(), 1.0 / lo.sqrt());
    if count < 2 {
        return vec![lo];
    }
    let mut grid: Vec<f64> = (0..count)
        .map(|i| {
            let x = b + (a - b) * i as f64 / (count - 1) as f64;
            1.0 / (x * x)
        })
        .collect();
    grid[0] = lo;
    grid[count - 1] = hi;
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_values() {
        let e = (PI / 10f64.ln()).powi(2);
        assert!((analytic_ids_ls(1.0, e) - 1.0 / 9.0).abs() < 1e-14);
        assert_eq!(analytic_ids_ls(1.0, 0.0), 0.0);
        assert_eq!(analytic_ids_ls(1.0, -1.0), 0.0);
        assert!(analytic_ids_ls(1.0, 1e-3) < 1e-40);
        let grid: Vec<f64> = (1..2000).map(|i| i as f64 * 0.01).collect();
        let c = analytic_ids_ls_curve(1.0, &grid).unwrap();
        assert!(c.values.windows(2).all(|w| w[0] <= w[1]));
        assert!(c.within_weyl_bound(0.0));
    }

    #[test]
    fn empirical_counts() {
        let s = Spectrum::from_levels(vec![1.0, 2.0, 3.0], 10.0).unwrap();
        let c = empirical_ids(std::slice::from_ref(&s), 10.0, &[0.5, 2.0, 2.5]).unwrap();
        assert_eq!(c.values, vec![0.0, 0.1, 0.2]);
        let t = Spectrum::from_levels(vec![0.1], 10.0).unwrap();
        let c = empirical_ids(&[s, t], 10.0, &[0.5, 2.5]).unwrap();
        assert_eq!(c.values, vec![0.05, 0.15]);
        assert!(empirical_ids(&[], 10.0, &[1.0]).is_err());
    }

    #[test]
    fn exact_linear_data() {
        let grid = inverse_sqrt_grid(0.01, 1.0, 12);
        let values: Vec<f64> = grid.iter().map(|e| (3.0 - 2.0 / e.sqrt()).exp()).collect();
        let c = IdsCurve::new(grid, values, IdsProvenance::Tabulated).unwrap();
        let fit = lifshitz_slope_fit(&c, (0.0, 1.0)).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-12);
        assert!((fit.intercept - 3.0).abs() < 1e-12);
        assert_eq!(fit.points, 12);
    }

    #[test]
    fn analytic_slopes() {
        for rate in [1.0, 2.0] {
            let grid = inverse_sqrt_grid(1e-4, 1e-2, 50);
            let c = analytic_ids_ls_curve(rate, &grid).unwrap();
            let fit = lifshitz_slope_fit(&c, (1e-4, 1e-2)).unwrap();
            assert!(
                (fit.slope / (-rate * PI) - 1.0).abs() < 1e-3,
                "{}",
                fit.slope
            );
        }
    }

    #[test]
    fn too_few_points() {
        let c = IdsCurve::new(
            vec![1.0, 2.0, 3.0],
            vec![0.0, 0.0, 1.0],
            IdsProvenance::Tabulated,
        )
        .unwrap();
        assert!(lifshitz_slope_fit(&c, (0.0, 10.0)).is_err());
    }

    #[test]
    fn curve_validation() {
        assert!(IdsCurve::new(vec![1.0, 1.0], vec![0.0, 0.0], IdsProvenance::Tabulated).is_err());
        assert!(IdsCurve::new(vec![1.0, 2.0], vec![1.0, 0.5], IdsProvenance::Tabulated).is_err());
        assert!(IdsCurve::new(vec![], vec![], IdsProvenance::Tabulated).is_err());
    }

    #[test]
    fn default_window() {
        let grid: Vec<f64> = (1..=100).map(|i| i as f64 * 0.01).collect();
        let c = analytic_ids_ls_curve(1.0, &grid).unwrap();
        let (lo, hi) = default_fit_window(&c).unwrap();
        assert!(analytic_ids_ls(1.0, lo) > 1e-6);
        assert_eq!(hi, 10.0 * lo);
    }
}
