//! Closed-form eigenvalue brackets and the spectral-gap event.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::eigen::Spectrum;
use crate::spectral::potential::SingleSitePotential;

/// `(4 pi)^2 (8 pi + 1)^2`, the constant in the Neumann lower bound.
pub const NEUMANN_CORRECTION: f64 = 16.0 * PI * PI * (8.0 * PI + 1.0) * (8.0 * PI + 1.0);

/// `pi^2 / (l1 - C_u)^2`, an upper bound on the Dirichlet ground state when
/// the largest gap exceeds the obstacle width. `None` otherwise.
pub fn dirichlet_ground_upper_bound(l1: f64, support_total: f64) -> Option<f64> {
    if l1 > support_total {
        let w = l1 - support_total;
        Some(PI * PI / (w * w))
    } else {
        None
    }
}

/// Lower bound on the Neumann ground state of the operator restricted to an
/// interval of length `lj` whose two ends carry obstacles. May be negative.
pub fn neumann_ground_lower_bound(
    lj: f64,
    site: &SingleSitePotential,
    a: f64,
    b: f64,
) -> Result<f64> {
    if !(a > 0.0 && a <= site.support_right) || !(b > 0.0 && b <= site.support_left) {
        return Err(Error::invalid(format!(
            "need 0 < a <= {} and 0 < b <= {}, got a = {a}, b = {b}",
            site.support_right, site.support_left
        )));
    }
    neumann_ground_lower_bound_raw(lj, site.support_total(), a, b, site.edge_strength(a, b))
}

/// [`neumann_ground_lower_bound`] with the edge strength `s_tilde` given
/// directly.
pub fn neumann_ground_lower_bound_raw(
    lj: f64,
    support_total: f64,
    a: f64,
    b: f64,
    s_tilde: f64,
) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a + b <= support_total) {
        return Err(Error::invalid(format!(
            "edge widths a = {a}, b = {b} do not fit in support {support_total}"
        )));
    }
    if !(s_tilde > 0.0) {
        return Err(Error::invalid(format!(
            "edge strength must be positive, got {s_tilde}"
        )));
    }
    if !(lj >= 2.0 * support_total) {
        return Err(Error::Precondition(format!(
            "gap {lj} shorter than twice the support {support_total}"
        )));
    }
    let inner = lj - (support_total - a - b);
    let outer = lj - support_total;
    Ok(PI * PI / (inner * inner) - NEUMANN_CORRECTION / (s_tilde * outer * outer * lj))
}

/// `9/4 (nu pi)^2 / ln^2 L`: the energy the second level reaches when the
/// second gap does not control it.
pub fn second_level_threshold(rate: f64, box_length: f64) -> f64 {
    let l = box_length.ln();
    2.25 * (rate * PI).powi(2) / (l * l)
}

/// `15/9 (nu pi)^2 / ln^2 L`, the analogous threshold for higher levels.
pub fn higher_level_threshold(rate: f64, box_length: f64) -> f64 {
    let l = box_length.ln();
    15.0 / 9.0 * (rate * PI).powi(2) / (l * l)
}

/// Parameters of the event "the j-th spectral gap is at least `N^(-1+zeta1)`
/// and `E^1 <= [(1+zeta2) nu pi / ln L]^2`".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapEventParams {
    pub zeta1: f64,
    pub zeta2: f64,
    pub particle_count: u64,
    pub rate: f64,
    pub box_length: f64,
}

impl GapEventParams {
    pub fn new(
        zeta1: f64,
        zeta2: f64,
        particle_count: u64,
        rate: f64,
        box_length: f64,
    ) -> Result<Self> {
        if !(0.0 < zeta2 && zeta2 < zeta1 && zeta1 < 1.0) {
            return Err(Error::invalid(format!(
                "need 0 < zeta2 < zeta1 < 1, got zeta1 = {zeta1}, zeta2 = {zeta2}"
            )));
        }
        if particle_count == 0 || !(rate > 0.0) || !(box_length > 1.0) {
            return Err(Error::invalid("gap event needs N >= 1, rate > 0 and L > 1"));
        }
        Ok(GapEventParams {
            zeta1,
            zeta2,
            particle_count,
            rate,
            box_length,
        })
    }

    /// `N^(-1 + zeta1)`.
    pub fn gap_floor(&self) -> f64 {
        (self.particle_count as f64).powf(self.zeta1 - 1.0)
    }

    /// `[(1 + zeta2) nu pi / ln L]^2`.
    pub fn ground_ceiling(&self) -> f64 {
        ((1.0 + self.zeta2) * self.rate * PI / self.box_length.ln()).powi(2)
    }
}

/// Whether the spectrum lies in the gap event for level `j >= 2`. Both
/// inequalities are inclusive.
pub fn gap_event_indicator(spec: &Spectrum, j: usize, params: &GapEventParams) -> Result<bool> {
    if j < 2 {
        return Err(Error::invalid(format!("gap event needs j >= 2, got {j}")));
    }
    let (Some(e1), Some(ej)) = (spec.level(1), spec.level(j)) else {
        return Err(Error::invalid(format!(
            "gap event for level {j} but only {} levels computed",
            spec.len()
        )));
    };
    Ok(ej - e1 >= params.gap_floor() && e1 <= params.ground_ceiling())
}
