//! Critical density `rho_c = int B(E) dN(E) = int N(E) (-B'(E)) dE`.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::thermo::bose::bose_weight;
use crate::thermo::ids::{analytic_ids_ls, IdsCurve};

/// Beyond `CUTOFF / beta` the Bose weight is below `e^-80` and dropped.
const CUTOFF: f64 = 80.0;
const FIXED_PANELS: usize = 4096;
const FIXED_DEGREE: usize = 16;

/// A nondecreasing integrated density of states `N(E)`, zero for `E <= 0`.
pub trait IntegratedDensity {
    fn value(&self, energy: f64) -> f64;

    /// Energies where `N` may fail to be smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// The analytic infinite-wall IDS at rate `nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticLsIds {
    pub rate: f64,
}

impl IntegratedDensity for AnalyticLsIds {
    fn value(&self, energy: f64) -> f64 {
        analytic_ids_ls(self.rate, energy)
    }
}

/// Piecewise linear between samples, zero below the first energy and
/// continued as `N(E_last) sqrt(E / E_last)` above the last.
impl IntegratedDensity for IdsCurve {
    fn value(&self, energy: f64) -> f64 {
        let e = &self.energies;
        let v = &self.values;
        if energy < e[0] {
            return 0.0;
        }
        let last = e.len() - 1;
        if energy >= e[last] {
            return v[last] * (energy / e[last]).sqrt();
        }
        let i = e.partition_point(|&x| x <= energy) - 1;
        let t = (energy - e[i]) / (e[i + 1] - e[i]);
        v[i] + t * (v[i + 1] - v[i])
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.energies.clone()
    }
}

/// Both quadrature results, for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalDensity {
    pub adaptive: f64,
    pub fixed: f64,
}

fn segments(ids: &impl IntegratedDensity, upper: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    pts.extend(
        ids.breakpoints()
            .into_iter()
            .filter(|&b| b > 0.0 && b < upper),
    );
    pts.push(upper);
    pts.dedup();
    pts
}

/// `int_0^inf N(E) beta / (4 sinh^2(beta E / 2)) dE` by tanh-sinh and by
/// composite Gauss-Legendre; the two must agree to relative `tol`.
pub fn critical_density_both(
    ids: &impl IntegratedDensity,
    beta: f64,
    tol: f64,
) -> Result<CriticalDensity> {
    if !(beta > 0.0) || !(tol > 0.0) {
        return Err(Error::invalid(format!(
            "need beta > 0 and tol > 0, got {beta}, {tol}"
        )));
    }
    let upper = CUTOFF / beta;
    let integrand = |e: f64| {
        let n = ids.value(e);
        if n == 0.0 {
            0.0
        } else {
            n * bose_weight(e, beta)
        }
    };
    let pts = segments(ids, upper);

    let adaptive: f64 = pts
        .windows(2)
        .map(|w| quadrature::double_exponential::integrate(integrand, w[0], w[1], 1e-14).integral)
        .sum();

    let rule = GaussLegendre::new(NonZeroUsize::new(FIXED_DEGREE).expect("nonzero degree"));
    let panel = upper / FIXED_PANELS as f64;
    let mut fixed = 0.0f64;
    for w in pts.windows(2) {
        let panels = ((w[1] - w[0]) / panel).ceil().max(1.0) as usize;
        let width = (w[1] - w[0]) / panels as f64;
        for p in 0..panels {
            let a = w[0] + p as f64 * width;
            fixed += rule.integrate(a, a + width, integrand);
        }
    }

    let scale = adaptive.abs().max(fixed.abs());
    if (adaptive - fixed).abs() > tol * scale {
        return Err(Error::QuadratureDisagreement { adaptive, fixed });
    }
    Ok(CriticalDensity { adaptive, fixed })
}

pub fn critical_density(ids: &impl IntegratedDensity, beta: f64, tol: f64) -> Result<f64> {
    critical_density_both(ids, beta, tol).map(|c| c.adaptive)
}

/// `rho_c` of the infinite-wall model at rate `nu`.
pub fn critical_density_ls(rate: f64, beta: f64) -> Result<f64> {
    critical_density(&AnalyticLsIds { rate }, beta, 1e-8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::ids::{analytic_ids_ls_curve, IdsProvenance};

    #[test]
    fn zero_ids_gives_zero() {
        let c = IdsCurve::new(vec![1.0, 2.0], vec![0.0, 0.0], IdsProvenance::Tabulated).unwrap();
        assert_eq!(critical_density(&c, 1.0, 1e-6).unwrap(), 0.0);
    }

    // reference values from an independent adaptive quadrature of the same
    // integrand, carried out to 60/beta
    #[test]
    fn luttinger_sy_reference_values() {
        for (beta, want) in [
            (0.5, 0.27703315144643703),
            (1.0, 0.09621049162584885),
            (2.0, 0.028765716483231663),
        ] {
            let c = critical_density_both(&AnalyticLsIds { rate: 1.0 }, beta, 1e-6).unwrap();
            assert!(
                (c.adaptive / want - 1.0).abs() < 1e-9,
                "beta = {beta}: {c:?}"
            );
            assert!((c.fixed / want - 1.0).abs() < 1e-9, "beta = {beta}: {c:?}");
        }
    }

    #[test]
    fn sampled_curve_approximates_analytic() {
        let grid: Vec<f64> = (1..=8000).map(|i| i as f64 * 0.01).collect();
        let curve = analytic_ids_ls_curve(1.0, &grid).unwrap();
        let sampled = critical_density(&curve, 1.0, 1e-6).unwrap();
        let exact = critical_density_ls(1.0, 1.0).unwrap();
        assert!((sampled / exact - 1.0).abs() < 1e-3, "{sampled} vs {exact}");
    }

    #[test]
    fn disagreement_is_reported() {
        struct Jumpy;
        impl IntegratedDensity for Jumpy {
            // an undeclared jump right where the weight is largest
            fn value(&self, e: f64) -> f64 {
                if e > 0.0123456 {
                    1.0
                } else {
                    0.0
                }
            }
        }
        match critical_density(&Jumpy, 1.0, 1e-12) {
            Err(Error::QuadratureDisagreement { adaptive, fixed }) => assert!(adaptive != fixed),
            other => panic!("expected disagreement, got {other:?}"),
        }
    }
}
