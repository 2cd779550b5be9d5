use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::potential::PotentialField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Dirichlet,
    Neumann,
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Boundary::Dirichlet => "dirichlet",
            Boundary::Neumann => "neumann",
        })
    }
}

/// Symmetric tridiagonal three-point discretization of `-d^2/dx^2 + V`.
///
/// The quadratic form is `sum_edges (u_{i+1} - u_i)^2 / h^2 + sum_i V_i u_i^2`,
/// where a Dirichlet wall is an edge to a zero ghost node and a Neumann end
/// (or a cut) simply drops the edge. Every diagonal entry is therefore
/// `(edges at node) / h^2 + V_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedOperator {
    pub grid_spacing: f64,
    pub diag: Vec<f64>,
    /// `offdiag[i]` couples nodes `i` and `i + 1`; zero at a cut.
    pub offdiag: Vec<f64>,
    pub boundary: Boundary,
    pub domain_length: f64,
}

impl DiscretizedOperator {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Decouple the operator at `cuts` (positions on the field's grid) and
    /// make both outer ends Neumann. The result is the matched-discretization
    /// Neumann direct sum, bounded above by the Dirichlet operator.
    pub fn neumann_direct_sum(field: &PotentialField, cuts: &[f64]) -> Result<Self> {
        let mut op = discretize(field, Boundary::Neumann)?;
        let inv_h2 = 1.0 / (op.grid_spacing * op.grid_spacing);
        let n = op.dim();
        for &c in cuts {
            let e = field.grid.first_at_or_after(c);
            if e == 0 || e >= n || op.offdiag[e - 1] == 0.0 {
                continue;
            }
            op.offdiag[e - 1] = 0.0;
            op.diag[e - 1] -= inv_h2;
            op.diag[e] -= inv_h2;
        }
        Ok(op)
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.offdiag[i - 1].abs();
            }
            if i + 1 < n {
                r += self.offdiag[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }
}

/// Three-point stencil on the field's grid. Dirichlet: `diag = 2/h^2 + V`
/// everywhere, walls one spacing beyond the end nodes. Neumann: mirrored ghost
/// cells, so the end nodes get `1/h^2 + V`.
pub fn discretize(field: &PotentialField, boundary: Boundary) -> Result<DiscretizedOperator> {
    let n = field.values.len();
    if n < 2 {
        return Err(Error::invalid(format!(
            "operator needs at least 2 interior points, got {n}"
        )));
    }
    let h = field.grid.spacing;
    let inv_h2 = 1.0 / (h * h);
    let mut diag: Vec<f64> = field.values.iter().map(|v| 2.0 * inv_h2 + v).collect();
    let domain_length = match boundary {
        Boundary::Dirichlet => (n + 1) as f64 * h,
        Boundary::Neumann => {
            diag[0] -= inv_h2;
            diag[n - 1] -= inv_h2;
            n as f64 * h
        }
    };
    Ok(DiscretizedOperator {
        grid_spacing: h,
        diag,
        offdiag: vec![-inv_h2; n - 1],
        boundary,
        domain_length,
    })
}
