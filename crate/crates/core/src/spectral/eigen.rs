//! Lowest eigenvalues of symmetric tridiagonal matrices by Sturm-sequence
//! counting and bisection.
//!
//! The count of eigenvalues below `x` is the number of negative pivots in the
//! `LDL^T` factorization of `T - x I`. Counts are evaluated for four shifts
//! per sweep; the four recurrences are independent, so the divisions overlap
//! instead of forming one long latency chain, and each sweep shrinks a
//! bracket five-fold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::operator::{Boundary, DiscretizedOperator};

const SHIFTS: usize = 4;
const MAX_SWEEPS: usize = 400;

/// Ascending eigenvalues `E^1 <= E^2 <= ...` and where they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Number of levels requested.
    pub k: usize,
    /// `None` for analytic spectra.
    pub grid_spacing: Option<f64>,
    pub boundary: Option<Boundary>,
    pub domain_length: f64,
}

impl Spectrum {
    /// A spectrum given directly as levels (sorted on construction).
    pub fn from_levels(mut levels: Vec<f64>, domain_length: f64) -> Result<Self> {
        if levels.iter().any(|e| !e.is_finite()) {
            return Err(Error::invalid("spectrum levels must be finite"));
        }
        levels.sort_by(f64::total_cmp);
        Ok(Spectrum {
            k: levels.len(),
            eigenvalues: levels,
            grid_spacing: None,
            boundary: None,
            domain_length,
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn ground(&self) -> Option<f64> {
        self.eigenvalues.first().copied()
    }

    /// `E^j`, one-based.
    pub fn level(&self, j: usize) -> Option<f64> {
        self.eigenvalues.get(j.checked_sub(1)?).copied()
    }

    /// `|{j : E^j < energy}|`.
    pub fn count_below(&self, energy: f64) -> usize {
        self.eigenvalues.partition_point(|&e| e < energy)
    }
}

/// Tridiagonal data prepared for repeated Sturm counts.
pub struct SturmCounter<'a> {
    diag: &'a [f64],
    off2: Vec<f64>,
    pivmin: f64,
}

impl<'a> SturmCounter<'a> {
    pub fn new(op: &'a DiscretizedOperator) -> Self {
        let off2: Vec<f64> = op.offdiag.iter().map(|e| e * e).collect();
        let max_off2 = off2.iter().copied().fold(1.0f64, f64::max);
        SturmCounter {
            diag: &op.diag,
            off2,
            pivmin: f64::MIN_POSITIVE * max_off2,
        }
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count(&self, x: f64) -> usize {
        self.count4([x; SHIFTS])[0]
    }

    /// Counts for four shifts in one sweep.
    pub fn count4(&self, xs: [f64; SHIFTS]) -> [usize; SHIFTS] {
        let n = self.diag.len();
        let mut counts = [0usize; SHIFTS];
        if n == 0 {
            return counts;
        }
        let pivmin = self.pivmin;
        let mut q = [0.0f64; SHIFTS];
        for s in 0..SHIFTS {
            q[s] = self.diag[0] - xs[s];
            if q[s].abs() < pivmin {
                q[s] = -pivmin;
            }
            counts[s] += (q[s] < 0.0) as usize;
        }
        for i in 1..n {
            let d = self.diag[i];
            let e2 = self.off2[i - 1];
            for s in 0..SHIFTS {
                let mut t = d - xs[s] - e2 / q[s];
                if t.abs() < pivmin {
                    t = -pivmin;
                }
                q[s] = t;
                counts[s] += (t < 0.0) as usize;
            }
        }
        counts
    }

    /// Counts for an arbitrary list of shifts.
    pub fn counts(&self, xs: &[f64]) -> Vec<usize> {
        let mut out = Vec::with_capacity(xs.len());
        for chunk in xs.chunks(SHIFTS) {
            let mut buf = [chunk[chunk.len() - 1]; SHIFTS];
            buf[..chunk.len()].copy_from_slice(chunk);
            out.extend_from_slice(&self.count4(buf)[..chunk.len()]);
        }
        out
    }
}

/// Number of eigenvalues of `op` strictly below `energy`.
pub fn count_below(op: &DiscretizedOperator, energy: f64) -> usize {
    SturmCounter::new(op).count(energy)
}

/// The `k` smallest eigenvalues, each bracketed to width at most `tol`.
pub fn lowest_eigenvalues(op: &DiscretizedOperator, k: usize, tol: f64) -> Result<Spectrum> {
    lowest_eigenvalues_with_hint(op, k, tol, None)
}

/// As [`lowest_eigenvalues`]; `upper_hint`, if it is verified to lie above
/// `E^k`, replaces the Gershgorin upper end of the initial bracket.
pub fn lowest_eigenvalues_with_hint(
    op: &DiscretizedOperator,
    k: usize,
    tol: f64,
    upper_hint: Option<f64>,
) -> Result<Spectrum> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "requested {k} eigenvalues of a {n}x{n} matrix"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let counter = SturmCounter::new(op);
    let (g_lo, g_hi) = op.gershgorin();
    let pad = 1e-12 * (g_lo.abs().max(g_hi.abs())).max(1.0);
    let lo0 = g_lo - pad;
    let mut hi0 = g_hi + pad;
    if let Some(hint) = upper_hint {
        if hint.is_finite() && hint < hi0 && hint > lo0 && counter.count(hint) >= k {
            hi0 = hint;
        }
    }

    let mut lower = vec![lo0; k];
    let mut upper = vec![hi0; k];
    for j in 0..k {
        let mut sweeps = 0;
        while upper[j] - lower[j] > tol {
            if sweeps == MAX_SWEEPS {
                return Err(Error::EigenNonConvergence {
                    index: j + 1,
                    lo: lower[j],
                    hi: upper[j],
                    iterations: sweeps,
                });
            }
            sweeps += 1;
            let (a, b) = (lower[j], upper[j]);
            let step = (b - a) / (SHIFTS + 1) as f64;
            let mut xs = [0.0; SHIFTS];
            for (s, x) in xs.iter_mut().enumerate() {
                *x = a + (s + 1) as f64 * step;
            }
            if xs.iter().all(|&x| x <= a || x >= b) {
                // bracket is a few ulps wide and cannot shrink further
                return Err(Error::EigenNonConvergence {
                    index: j + 1,
                    lo: a,
                    hi: b,
                    iterations: sweeps,
                });
            }
            let counts = counter.count4(xs);
            for (&x, &c) in xs.iter().zip(&counts) {
                if x <= a || x >= b {
                    continue;
                }
                for idx in j..k {
                    if idx < c {
                        if x < upper[idx] {
                            upper[idx] = x;
                        }
                    } else if x > lower[idx] {
                        lower[idx] = x;
                    }
                }
            }
        }
    }

    let eigenvalues = lower
        .iter()
        .zip(&upper)
        .map(|(l, u)| 0.5 * (l + u))
        .collect();
    Ok(Spectrum {
        eigenvalues,
        k,
        grid_spacing: Some(op.grid_spacing),
        boundary: Some(op.boundary),
        domain_length: op.domain_length,
    })
}

/// Every eigenvalue strictly below `energy`.
pub fn eigenvalues_below(op: &DiscretizedOperator, energy: f64, tol: f64) -> Result<Spectrum> {
    let c = count_below(op, energy);
    if c == 0 {
        return Ok(Spectrum {
            eigenvalues: Vec::new(),
            k: 0,
            grid_spacing: Some(op.grid_spacing),
            boundary: Some(op.boundary),
            domain_length: op.domain_length,
        });
    }
    lowest_eigenvalues_with_hint(op, c, tol, Some(energy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::operator::discretize;
    use crate::spectral::potential::{Grid, PotentialField};
    use std::f64::consts::PI;

    fn free_dirichlet(length: f64, h: f64) -> DiscretizedOperator {
        let grid = Grid::dirichlet_box(length, h).unwrap();
        discretize(&PotentialField::zeros(grid), Boundary::Dirichlet).unwrap()
    }

    #[test]
    fn free_dirichlet_on_pi() {
        let op = free_dirichlet(PI, PI / 2048.0);
        let s = lowest_eigenvalues(&op, 3, 1e-10).unwrap();
        for (j, e) in s.eigenvalues.iter().enumerate() {
            let exact = ((j + 1) * (j + 1)) as f64;
            assert!((e / exact - 1.0).abs() < 1e-3, "E{} = {e}", j + 1);
        }
    }

    #[test]
    fn matches_discrete_closed_form() {
        // eigenvalues of the free Dirichlet matrix: (4/h^2) sin^2(pi j / (2(n+1)))
        let op = free_dirichlet(1.0, 0.01);
        let n = op.dim();
        let h = op.grid_spacing;
        let s = lowest_eigenvalues(&op, 6, 1e-9).unwrap();
        for (j, e) in s.eigenvalues.iter().enumerate() {
            let arg = PI * (j + 1) as f64 / (2.0 * (n + 1) as f64);
            let exact = 4.0 / (h * h) * arg.sin().powi(2);
            assert!((e - exact).abs() <= 1e-9, "{e} vs {exact}");
        }
    }

    #[test]
    fn free_neumann_on_unit_interval() {
        let grid = Grid::cell_centered(0.0, 1.0, 1.0 / 256.0).unwrap();
        let op = discretize(&PotentialField::zeros(grid), Boundary::Neumann).unwrap();
        let s = lowest_eigenvalues(&op, 2, 1e-12).unwrap();
        assert!(s.eigenvalues[0].abs() < 1e-10);
        assert!((s.eigenvalues[1] / (PI * PI) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn neumann_ground_state_is_zero_at_every_resolution() {
        for &h in &[0.5, 0.1, 0.013, 0.001] {
            let grid = Grid::cell_centered(0.0, 3.0, h).unwrap();
            let op = discretize(&PotentialField::zeros(grid), Boundary::Neumann).unwrap();
            let norm = 4.0 / (op.grid_spacing * op.grid_spacing);
            let s = lowest_eigenvalues(&op, 1, 1e-14 * norm).unwrap();
            // zero up to rounding relative to the matrix norm
            assert!(
                s.eigenvalues[0].abs() < 64.0 * f64::EPSILON * norm,
                "h = {h}: {}",
                s.eigenvalues[0]
            );
        }
    }

    #[test]
    fn constant_potential_shifts_spectrum() {
        let grid = Grid::dirichlet_box(5.0, 0.02).unwrap();
        let free = discretize(&PotentialField::zeros(grid), Boundary::Dirichlet).unwrap();
        let shifted =
            discretize(&PotentialField::from_fn(grid, |_| 2.5), Boundary::Dirichlet).unwrap();
        let a = lowest_eigenvalues(&free, 4, 1e-11).unwrap();
        let b = lowest_eigenvalues(&shifted, 4, 1e-11).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((y - x - 2.5).abs() < 1e-10);
        }
    }

    #[test]
    fn errors() {
        let op = free_dirichlet(1.0, 0.25);
        assert!(matches!(
            lowest_eigenvalues(&op, 4, 1e-8),
            Err(Error::InvalidParameter(_))
        ));
        assert!(lowest_eigenvalues(&op, 0, 1e-8).is_err());
        assert!(lowest_eigenvalues(&op, 1, 0.0).is_err());
        // tolerance below the float resolution of the eigenvalue
        let big = free_dirichlet(PI, PI / 64.0);
        let err = lowest_eigenvalues(&big, 1, 1e-300).unwrap_err();
        assert!(
            matches!(err, Error::EigenNonConvergence { index: 1, .. }),
            "{err}"
        );
    }

    #[test]
    fn counts_and_levels_below() {
        let op = free_dirichlet(PI, PI / 512.0);
        let c = SturmCounter::new(&op);
        assert_eq!(c.counts(&[0.5, 1.5, 4.5, 9.5, 16.5]), vec![0, 1, 2, 3, 4]);
        let s = eigenvalues_below(&op, 10.0, 1e-9).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.count_below(4.5), 2);
        assert!(eigenvalues_below(&op, 0.5, 1e-9).unwrap().is_empty());
    }

    #[test]
    fn decoupled_blocks_count_correctly() {
        // two identical free blocks: every level is doubly degenerate
        let grid = Grid::dirichlet_box(2.01, 0.01).unwrap();
        assert_eq!(grid.len, 200);
        let field = PotentialField::zeros(grid);
        let op = DiscretizedOperator::neumann_direct_sum(&field, &[0.0]).unwrap();
        let s = lowest_eigenvalues(&op, 4, 1e-10).unwrap();
        assert!(s.eigenvalues[0].abs() < 1e-9 && s.eigenvalues[1].abs() < 1e-9);
        assert!((s.eigenvalues[2] - s.eigenvalues[3]).abs() < 1e-9);
        assert!((s.eigenvalues[2] / (PI * PI) - 1.0).abs() < 1e-3);
    }
}
