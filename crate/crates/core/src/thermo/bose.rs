use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Spectrum;

/// Largest number of bracket doublings or bisection steps in the μ solve.
const MAX_STEPS: usize = 4000;

/// `1 / (exp(beta * gap) - 1)`.
pub fn bose_factor(energy_gap: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("beta must be positive, got {beta}")));
    }
    if !(energy_gap > 0.0) {
        return Err(Error::Domain(format!(
            "Bose factor needs a positive gap above the chemical potential, got {energy_gap}"
        )));
    }
    Ok(bose_unchecked(energy_gap, beta))
}

#[inline]
pub(crate) fn bose_unchecked(gap: f64, beta: f64) -> f64 {
    1.0 / (beta * gap).exp_m1()
}

/// `-d/dE B(E) = beta / (4 sinh^2(beta E / 2))`, the weight against which the
/// integrated density of states is integrated.
pub fn bose_weight(energy: f64, beta: f64) -> f64 {
    let s = (0.5 * beta * energy).sinh();
    beta / (4.0 * s * s)
}

/// `n_j = B(E^j - mu)` for every computed level.
pub fn occupation_numbers(spec: &Spectrum, mu: f64, beta: f64) -> Result<Vec<f64>> {
    let Some(e1) = spec.ground() else {
        return Ok(Vec::new());
    };
    if !(mu < e1) {
        return Err(Error::Domain(format!(
            "chemical potential {mu} is not below the ground state {e1}"
        )));
    }
    spec.eigenvalues
        .iter()
        .map(|&e| bose_factor(e - mu, beta))
        .collect()
}

/// `(1/L) sum_j B(E^j - mu)`, summed from the top level down.
pub fn density_at(levels: &[f64], mu: f64, beta: f64, box_length: f64) -> f64 {
    levels
        .iter()
        .rev()
        .map(|&e| bose_unchecked(e - mu, beta))
        .sum::<f64>()
        / box_length
}

/// The chemical potential of a single level: `E - ln(1 + 1/(rho L)) / beta`.
pub fn single_level_chemical_potential(energy: f64, rho: f64, beta: f64, box_length: f64) -> f64 {
    energy - (1.0 / (rho * box_length)).ln_1p() / beta
}

/// `(1/L) sum_j B(E^j - E^1 + gap)`: the density at `mu = E^1 - gap`, without
/// the cancellation of forming `E^j - mu` from `mu`.
pub fn density_at_gap(levels: &[f64], gap: f64, beta: f64, box_length: f64) -> f64 {
    let e1 = levels[0];
    levels
        .iter()
        .rev()
        .map(|&e| bose_unchecked((e - e1) + gap, beta))
        .sum::<f64>()
        / box_length
}

/// Solve `(1/L) sum_j B(E^j - mu) = rho` for `mu < E^1` to absolute residual
/// `tol`, bisecting on `ln(E^1 - mu)`.
pub fn solve_chemical_potential(
    spec: &Spectrum,
    rho: f64,
    beta: f64,
    box_length: f64,
    tol: f64,
) -> Result<f64> {
    let g = solve_ground_gap(spec, rho, beta, box_length, tol)?;
    Ok(spec.eigenvalues[0] - g)
}

/// As [`solve_chemical_potential`], returning `E^1 - mu`.
pub fn solve_ground_gap(
    spec: &Spectrum,
    rho: f64,
    beta: f64,
    box_length: f64,
    tol: f64,
) -> Result<f64> {
    if !(rho > 0.0) || !(beta > 0.0) || !(box_length > 0.0) || !(tol > 0.0) {
        return Err(Error::invalid(format!(
            "need positive rho, beta, L and tol; got {rho}, {beta}, {box_length}, {tol}"
        )));
    }
    if spec.is_empty() {
        return Err(Error::invalid("empty spectrum"));
    }
    let levels = &spec.eigenvalues;
    let excess = |g: f64| density_at_gap(levels, g, beta, box_length) - rho;

    let mut g_lo = f64::MIN_POSITIVE;
    if excess(g_lo) < 0.0 {
        return Err(Error::Truncation(format!(
            "{} levels cannot hold density {rho} at L = {box_length}",
            levels.len()
        )));
    }
    let mut g_hi = 1.0 / beta;
    let mut steps = 0;
    while excess(g_hi) > 0.0 {
        g_lo = g_hi;
        g_hi *= 2.0;
        steps += 1;
        if steps == MAX_STEPS || !g_hi.is_finite() {
            return Err(Error::ChemicalPotential(format!(
                "could not bracket the chemical potential for rho = {rho}"
            )));
        }
    }

    // bisect down to adjacent floats and keep the smallest residual
    let mut best = (f64::INFINITY, g_hi);
    for _ in 0..MAX_STEPS {
        let g = (g_lo * g_hi).sqrt();
        let r = excess(g);
        if r.abs() < best.0 {
            best = (r.abs(), g);
        }
        if r == 0.0 || g <= g_lo || g >= g_hi {
            break;
        }
        if r > 0.0 {
            g_lo = g;
        } else {
            g_hi = g;
        }
    }
    if best.0 <= tol {
        return Ok(best.1);
    }
    Err(Error::ChemicalPotential(format!(
        "bracket collapsed at E1 - mu = {:e} with residual {:e} > {tol:e}",
        best.1, best.0
    )))
}

/// `B(E^k - E^1) / L`: the occupation per length the highest computed level
/// would carry in the most condensed state.
pub fn truncation_tail(spec: &Spectrum, beta: f64, box_length: f64) -> f64 {
    match (spec.ground(), spec.eigenvalues.last()) {
        (Some(e1), Some(&ek)) if ek > e1 => bose_unchecked(ek - e1, beta) / box_length,
        _ => f64::INFINITY,
    }
}

/// Error unless `B(E^k - E^1) / L < 1e-3 rho`.
pub fn check_truncation(spec: &Spectrum, rho: f64, beta: f64, box_length: f64) -> Result<()> {
    let tail = truncation_tail(spec, beta, box_length);
    if tail < 1e-3 * rho {
        Ok(())
    } else {
        Err(Error::Truncation(format!(
            "top level of {} still carries {tail:e} per length against rho = {rho}",
            spec.len()
        )))
    }
}

/// A solved grand-canonical state on a fixed spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoState {
    pub beta: f64,
    pub density: f64,
    pub box_length: f64,
    /// `round(rho L)`.
    pub particle_count: u64,
    pub chemical_potential: f64,
    pub occupations: Vec<f64>,
}

impl ThermoState {
    pub fn solve(
        spec: &Spectrum,
        density: f64,
        beta: f64,
        box_length: f64,
        tol: f64,
    ) -> Result<Self> {
        let g = solve_ground_gap(spec, density, beta, box_length, tol)?;
        let e1 = spec.eigenvalues[0];
        let occupations = spec
            .eigenvalues
            .iter()
            .map(|&e| bose_unchecked((e - e1) + g, beta))
            .collect();
        Ok(ThermoState {
            beta,
            density,
            box_length,
            particle_count: (density * box_length).round().max(1.0) as u64,
            chemical_potential: e1 - g,
            occupations,
        })
    }

    /// `(1/L) sum_j n_j - rho`.
    pub fn residual(&self) -> f64 {
        self.occupations.iter().rev().sum::<f64>() / self.box_length - self.density
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(levels: &[f64]) -> Spectrum {
        Spectrum::from_levels(levels.to_vec(), 1.0).unwrap()
    }

    #[test]
    fn bose_factor_values() {
        assert!((bose_factor(2f64.ln(), 1.0).unwrap() - 1.0).abs() < 1e-15);
        let b = bose_factor(0.1, 1.0).unwrap();
        assert!((b - 9.5083).abs() < 1e-4);
        // 1/g - 1/2 + g/12
        assert!((b - (10.0 - 0.5 + 0.1 / 12.0)).abs() < 1e-5);
        assert_eq!(bose_factor(1e4, 1.0).unwrap(), 0.0);
        assert!(matches!(bose_factor(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(bose_factor(-1.0, 1.0), Err(Error::Domain(_))));
        assert!(bose_factor(1.0, 0.0).is_err());
    }

    #[test]
    fn bose_weight_is_minus_derivative() {
        for &(e, beta) in &[(0.3, 1.0), (2.0, 0.5), (0.01, 3.0)] {
            let d = 1e-6 * e;
            let fd = -(bose_unchecked(e + d, beta) - bose_unchecked(e - d, beta)) / (2.0 * d);
            assert!((fd / bose_weight(e, beta) - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn occupation_examples() {
        let n = occupation_numbers(&spec(&[1.0, 2.0]), 0.0, 1.0).unwrap();
        assert!((n[0] - 0.58198).abs() < 1e-5 && (n[1] - 0.15652).abs() < 1e-5);
        let n = occupation_numbers(&spec(&[0.5, 0.5, 0.7]), 0.1, 2.0).unwrap();
        assert_eq!(n[0], n[1]);
        let n = occupation_numbers(&spec(&[1.0, 2.0]), -800.0, 1.0).unwrap();
        assert!(n.iter().all(|&v| v < 1e-300));
        assert!(occupation_numbers(&spec(&[1.0]), 1.0, 1.0).is_err());
    }

    #[test]
    fn single_level_closed_form() {
        let mu = solve_chemical_potential(&spec(&[1.0]), 1.0, 1.0, 1.0, 1e-12).unwrap();
        assert!((mu - (1.0 - 2f64.ln())).abs() < 1e-10);
        assert!((mu - 0.30685).abs() < 1e-5);
        for &(e, rho, beta, l) in &[
            (0.2, 0.3, 2.0, 50.0),
            (3.0, 5.0, 0.1, 1000.0),
            (1e-3, 0.01, 10.0, 20.0),
        ] {
            let s = Spectrum::from_levels(vec![e], l).unwrap();
            let mu = solve_chemical_potential(&s, rho, beta, l, 1e-12).unwrap();
            assert!((mu - single_level_chemical_potential(e, rho, beta, l)).abs() < 1e-10);
        }
    }

    #[test]
    fn two_levels_match_scan() {
        // scan mu on a fine grid, then interpolate the sign change linearly
        let f = |mu: f64| bose_unchecked(1.0 - mu, 1.0) + bose_unchecked(2.0 - mu, 1.0) - 1.0;
        let (lo, hi) = (-2.0, 0.999_999);
        let n = 1_000_000;
        let step = (hi - lo) / n as f64;
        let mut root = f64::NAN;
        let mut prev = f(lo);
        for i in 1..=n {
            let x = lo + i as f64 * step;
            let v = f(x);
            if prev < 0.0 && v >= 0.0 {
                let x0 = x - step;
                root = x0 + step * (-prev) / (v - prev);
                break;
            }
            prev = v;
        }
        let mu = solve_chemical_potential(&spec(&[1.0, 2.0]), 1.0, 1.0, 1.0, 1e-13).unwrap();
        assert!((mu - root).abs() < 1e-8, "{mu} vs {root}");
    }

    #[test]
    fn mu_increases_with_density() {
        let s = spec(&[0.3, 0.5, 0.9, 1.4]);
        let mu1 = solve_chemical_potential(&s, 1.0, 1.0, 1.0, 1e-12).unwrap();
        let mu2 = solve_chemical_potential(&s, 2.0, 1.0, 1.0, 1e-12).unwrap();
        assert!(mu2 > mu1 && mu2 < 0.3);
    }

    #[test]
    fn state_residual_and_order() {
        let s = Spectrum::from_levels(vec![0.01, 0.02, 0.05, 0.3, 0.31], 40.0).unwrap();
        let st = ThermoState::solve(&s, 0.7, 1.5, 40.0, 1e-12).unwrap();
        assert!(st.residual().abs() <= 1e-12);
        assert!(st.occupations.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(st.particle_count, 28);
    }

    #[test]
    fn truncation_rule() {
        let s = Spectrum::from_levels(vec![0.01, 5.0], 100.0).unwrap();
        assert!(check_truncation(&s, 0.5, 2.0, 100.0).is_ok());
        assert!(matches!(
            check_truncation(&s, 0.5, 0.01, 100.0),
            Err(Error::Truncation(_))
        ));
        assert!(check_truncation(&spec(&[1.0]), 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn invalid_inputs() {
        assert!(solve_chemical_potential(&spec(&[1.0]), 0.0, 1.0, 1.0, 1e-10).is_err());
        assert!(solve_chemical_potential(&spec(&[]), 1.0, 1.0, 1.0, 1e-10).is_err());
    }
}
