use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point_process::PointConfiguration;

/// Shape of the single-site obstacle `u`, unscaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    /// Constant `height` on `[-C_left, C_right]`.
    Box { height: f64 },
    /// Piecewise linear: 0 at both support ends, `peak` at the origin.
    Triangle { peak: f64 },
    /// Samples on a uniform grid spanning `[-C_left, C_right]`, linearly
    /// interpolated.
    Tabulated { samples: Vec<f64> },
    /// Point mass `gamma * delta`.
    Delta { gamma: f64 },
}

/// The obstacle `S * u(x)` placed at every atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleSitePotential {
    pub shape: Shape,
    pub support_left: f64,
    pub support_right: f64,
    /// The strength scaling `S`; zero gives the free operator.
    pub strength_scale: f64,
}

impl SingleSitePotential {
    pub fn new(
        shape: Shape,
        support_left: f64,
        support_right: f64,
        strength_scale: f64,
    ) -> Result<Self> {
        if !(strength_scale >= 0.0) || !strength_scale.is_finite() {
            return Err(Error::invalid(format!(
                "strength scale must be finite and nonnegative, got {strength_scale}"
            )));
        }
        match &shape {
            Shape::Delta { gamma } => {
                if !(*gamma > 0.0) || !gamma.is_finite() {
                    return Err(Error::invalid("delta obstacle needs gamma > 0"));
                }
                if support_left != 0.0 || support_right != 0.0 {
                    return Err(Error::invalid("delta obstacle has zero support width"));
                }
            }
            other => {
                if !(support_left > 0.0 && support_right > 0.0)
                    || !support_left.is_finite()
                    || !support_right.is_finite()
                {
                    return Err(Error::invalid(
                        "support half-widths must be positive and finite",
                    ));
                }
                let ok = match other {
                    Shape::Box { height } => *height > 0.0 && height.is_finite(),
                    Shape::Triangle { peak } => *peak > 0.0 && peak.is_finite(),
                    Shape::Tabulated { samples } => {
                        samples.len() >= 2 && samples.iter().all(|v| *v >= 0.0 && v.is_finite())
                    }
                    Shape::Delta { .. } => unreachable!(),
                };
                if !ok {
                    return Err(Error::invalid(format!("invalid obstacle shape {other:?}")));
                }
            }
        }
        let site = SingleSitePotential {
            shape,
            support_left,
            support_right,
            strength_scale,
        };
        if !site.is_delta() && !(site.strength() > 0.0) {
            return Err(Error::invalid(
                "obstacle must have positive mass on both sides of the origin",
            ));
        }
        Ok(site)
    }

    pub fn boxed(
        height: f64,
        support_left: f64,
        support_right: f64,
        strength_scale: f64,
    ) -> Result<Self> {
        Self::new(
            Shape::Box { height },
            support_left,
            support_right,
            strength_scale,
        )
    }

    pub fn delta(gamma: f64, strength_scale: f64) -> Result<Self> {
        Self::new(Shape::Delta { gamma }, 0.0, 0.0, strength_scale)
    }

    pub fn with_strength(&self, strength_scale: f64) -> Self {
        SingleSitePotential {
            strength_scale,
            ..self.clone()
        }
    }

    pub fn is_delta(&self) -> bool {
        matches!(self.shape, Shape::Delta { .. })
    }

    /// `C_u = C_left + C_right`.
    pub fn support_total(&self) -> f64 {
        self.support_left + self.support_right
    }

    /// Knots of the piecewise-linear profile; zero outside.
    fn knots(&self) -> Vec<(f64, f64)> {
        let (l, r) = (-self.support_left, self.support_right);
        match &self.shape {
            Shape::Box { height } => vec![(l, *height), (r, *height)],
            Shape::Triangle { peak } => vec![(l, 0.0), (0.0, *peak), (r, 0.0)],
            Shape::Tabulated { samples } => {
                let step = (r - l) / (samples.len() - 1) as f64;
                samples
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (l + i as f64 * step, *v))
                    .collect()
            }
            Shape::Delta { .. } => Vec::new(),
        }
    }

    /// Unscaled `u(x)`; the delta shape has no pointwise values.
    pub fn value(&self, x: f64) -> f64 {
        if x < -self.support_left || x > self.support_right {
            return 0.0;
        }
        let knots = self.knots();
        for w in knots.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if x <= x1 {
                let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
                return y0 + t.clamp(0.0, 1.0) * (y1 - y0);
            }
        }
        knots.last().map_or(0.0, |k| k.1)
    }

    /// Exact `int_lo^hi u`. For the delta shape, `gamma` if the origin lies in `[lo, hi]`.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        if let Shape::Delta { gamma } = self.shape {
            return if lo <= 0.0 && 0.0 <= hi { gamma } else { 0.0 };
        }
        let knots = self.knots();
        let mut total = 0.0;
        for w in knots.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            let a = lo.max(x0);
            let b = hi.min(x1);
            if b > a {
                let at = |x: f64| y0 + (x - x0) / (x1 - x0) * (y1 - y0);
                total += 0.5 * (at(a) + at(b)) * (b - a);
            }
        }
        total
    }

    /// `min(int_0^{C_right} u, int_{-C_left}^0 u)`, unscaled.
    pub fn strength(&self) -> f64 {
        if let Shape::Delta { gamma } = self.shape {
            return gamma;
        }
        self.integral(0.0, self.support_right)
            .min(self.integral(-self.support_left, 0.0))
    }

    /// `S * min(int_{C_r - a}^{C_r} u, int_{-C_l}^{-C_l + b} u)`: the mass of
    /// the outer edges of the obstacle, entering the Neumann lower bound.
    pub fn edge_strength(&self, a: f64, b: f64) -> f64 {
        let right = self.integral(self.support_right - a, self.support_right);
        let left = self.integral(-self.support_left, -self.support_left + b);
        self.strength_scale * right.min(left)
    }

    /// Grid spacing rule: 16 points across the narrower support side and at
    /// least 32 points per unit length.
    pub fn default_spacing(&self) -> f64 {
        let per_unit = 1.0 / 32.0;
        if self.is_delta() {
            per_unit
        } else {
            (self.support_left.min(self.support_right) / 16.0).min(per_unit)
        }
    }
}

/// Largest matrix dimension the default resolution rule will produce.
pub const MAX_DIMENSION: usize = 1_000_000;

/// Resolve the grid spacing for a box of length `box_length`.
pub fn resolve_spacing(
    site: &SingleSitePotential,
    box_length: f64,
    override_h: Option<f64>,
) -> f64 {
    match override_h {
        Some(h) => h,
        None => {
            let h = site.default_spacing();
            if box_length / h > MAX_DIMENSION as f64 {
                box_length / MAX_DIMENSION as f64
            } else {
                h
            }
        }
    }
}

/// Uniform grid `origin + i * spacing`, `i < len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub origin: f64,
    pub spacing: f64,
    pub len: usize,
}

impl Grid {
    /// Interior vertices of `(-L/2, L/2)` with spacing close to `target_h`;
    /// the walls sit one spacing beyond the first and last nodes.
    pub fn dirichlet_box(box_length: f64, target_h: f64) -> Result<Self> {
        if !(target_h > 0.0) || !target_h.is_finite() {
            return Err(Error::invalid(format!(
                "grid spacing must be positive, got {target_h}"
            )));
        }
        let intervals = (box_length / target_h - 1e-9).ceil().max(1.0) as usize;
        let spacing = box_length / intervals as f64;
        Ok(Grid {
            origin: -0.5 * box_length + spacing,
            spacing,
            len: intervals - 1,
        })
    }

    /// Cell centres of `[a, b]` with spacing close to `target_h`.
    pub fn cell_centered(a: f64, b: f64, target_h: f64) -> Result<Self> {
        if !(target_h > 0.0) || !target_h.is_finite() {
            return Err(Error::invalid(format!(
                "grid spacing must be positive, got {target_h}"
            )));
        }
        if !(b > a) {
            return Err(Error::invalid("empty interval"));
        }
        let cells = ((b - a) / target_h - 1e-9).ceil().max(1.0) as usize;
        let spacing = (b - a) / cells as f64;
        Ok(Grid {
            origin: a + 0.5 * spacing,
            spacing,
            len: cells,
        })
    }

    pub fn node(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    /// Index of the first node with `x >= position` (may equal `len`).
    pub fn first_at_or_after(&self, position: f64) -> usize {
        let t = ((position - self.origin) / self.spacing).ceil();
        let mut i = t.clamp(0.0, self.len as f64) as usize;
        // guard against rounding in the division
        while i > 0 && self.node(i - 1) >= position {
            i -= 1;
        }
        while i < self.len && self.node(i) < position {
            i += 1;
        }
        i
    }

    /// Node indices in `[a, b)`.
    pub fn nodes_in(&self, a: f64, b: f64) -> std::ops::Range<usize> {
        self.first_at_or_after(a)..self.first_at_or_after(b)
    }
}

/// The potential sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl PotentialField {
    pub fn zeros(grid: Grid) -> Self {
        PotentialField {
            grid,
            values: vec![0.0; grid.len],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        PotentialField {
            grid,
            values: (0..grid.len).map(|i| f(grid.node(i))).collect(),
        }
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing
    }

    /// The nodes in `[a, b)` as a field of their own.
    pub fn restrict(&self, a: f64, b: f64) -> PotentialField {
        let range = self.grid.nodes_in(a, b);
        let origin = if range.start < self.grid.len {
            self.grid.node(range.start)
        } else {
            a
        };
        PotentialField {
            grid: Grid {
                origin,
                spacing: self.grid.spacing,
                len: range.len(),
            },
            values: self.values[range].to_vec(),
        }
    }
}

/// Add `S * u(x_i - atom)` for every atom to the node values.
pub fn sample_on_grid(atoms: &[f64], site: &SingleSitePotential, grid: &Grid) -> Vec<f64> {
    let mut values = vec![0.0; grid.len];
    if site.strength_scale == 0.0 || grid.len == 0 {
        return values;
    }
    let h = grid.spacing;
    // relative slack so that nodes sitting on the support edge are included
    let edge = 1e-9 * h;
    match site.shape {
        Shape::Delta { gamma } => {
            let height = site.strength_scale * gamma / h;
            for &a in atoms {
                let i = ((a - grid.origin) / h).round();
                if i >= 0.0 && (i as usize) < grid.len {
                    values[i as usize] += height;
                }
            }
        }
        _ => {
            for &a in atoms {
                let range =
                    grid.nodes_in(a - site.support_left - edge, a + site.support_right + edge);
                let end = (range.end + 1).min(grid.len);
                for (i, v) in values.iter_mut().enumerate().take(end).skip(range.start) {
                    let offset = grid.node(i) - a;
                    if offset < -site.support_left - edge || offset > site.support_right + edge {
                        continue;
                    }
                    let offset = offset.clamp(-site.support_left, site.support_right);
                    *v += site.strength_scale * site.value(offset);
                }
            }
        }
    }
    values
}

/// `V(x) = sum_j S u(x - x_j)` on the interior vertices of the Dirichlet box
/// with spacing close to `grid_spacing`.
pub fn assemble_potential(
    config: &PointConfiguration,
    site: &SingleSitePotential,
    grid_spacing: f64,
) -> Result<PotentialField> {
    let grid = Grid::dirichlet_box(config.box_length, grid_spacing)?;
    let values = sample_on_grid(&config.atoms, site, &grid);
    Ok(PotentialField { grid, values })
}
