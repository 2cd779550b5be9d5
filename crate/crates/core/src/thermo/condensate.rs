use serde::{Deserialize, Serialize};

use crate::spectral::Spectrum;

/// Fractions of the `N` particles held by the lowest levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondensateStats {
    /// `n^1 / N`.
    pub ground_fraction: f64,
    /// `n^2 / N`; zero when only one level is known.
    pub second_fraction: f64,
    /// `sum_{E^j <= eps} n^j / N`.
    pub band_fraction: f64,
    pub band_eps: f64,
    /// Reference condensate density `max(rho - rho_c, 0)`, when known.
    pub rho0: Option<f64>,
}

pub fn condensate_statistics(
    spec: &Spectrum,
    occupations: &[f64],
    particle_count: u64,
    eps: f64,
) -> CondensateStats {
    let n = particle_count.max(1) as f64;
    let ground = occupations.first().copied().unwrap_or(0.0);
    let second = occupations.get(1).copied().unwrap_or(0.0);
    let band: f64 = spec
        .eigenvalues
        .iter()
        .zip(occupations)
        .take_while(|(e, _)| **e <= eps)
        .map(|(_, n)| n)
        .sum();
    CondensateStats {
        ground_fraction: ground / n,
        second_fraction: second / n,
        band_fraction: band / n,
        band_eps: eps,
        rho0: None,
    }
}

/// `max(rho - rho_c, 0)`.
pub fn condensate_density(rho: f64, rho_c: f64) -> f64 {
    (rho - rho_c).max(0.0)
}
