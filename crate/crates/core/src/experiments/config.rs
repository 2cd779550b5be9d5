//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::potential::{Shape, SingleSitePotential};
use crate::thermo::critical_density_ls;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    GapLaw,
    EnergyBounds,
    Condensation,
    Lifshitz,
    LsCompare,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::GapLaw => "gap_law",
            ExperimentKind::EnergyBounds => "energy_bounds",
            ExperimentKind::Condensation => "condensation",
            ExperimentKind::Lifshitz => "lifshitz",
            ExperimentKind::LsCompare => "ls_compare",
        }
    }
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Box,
    Triangle,
    Tabulated,
    Delta,
    /// Dirichlet walls at the atoms, solved analytically.
    LuttingerSy,
}

/// `S` for each system size: one value, one value per size, or a rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StrengthSpec {
    Fixed(f64),
    Ladder(Vec<f64>),
    /// `"ln"`: `S_N = ln N`.
    Rule(String),
}

impl Default for StrengthSpec {
    fn default() -> Self {
        StrengthSpec::Fixed(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "one")]
    pub rate: f64,
    #[serde(default = "default_shape")]
    pub shape: ShapeKind,
    #[serde(default = "one")]
    pub height: f64,
    #[serde(default = "one")]
    pub peak: f64,
    #[serde(default)]
    pub samples: Vec<f64>,
    #[serde(default = "one")]
    pub gamma: f64,
    /// Defaults to 0.5, or 0 for the delta shape.
    pub support_left: Option<f64>,
    pub support_right: Option<f64>,
    #[serde(default)]
    pub strength: StrengthSpec,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            rate: 1.0,
            shape: ShapeKind::Box,
            height: 1.0,
            peak: 1.0,
            samples: Vec::new(),
            gamma: 1.0,
            support_left: None,
            support_right: None,
            strength: StrengthSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermoConfig {
    /// Particle density `rho`.
    pub density: Option<f64>,
    /// Alternative to `density`: `rho` as a multiple of the infinite-wall
    /// critical density at the same rate and temperature.
    pub density_factor: Option<f64>,
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Particle numbers `N`, with `L = N / rho`.
    pub sizes: Option<Vec<u64>>,
    /// Box lengths, for experiments without a density.
    pub box_lengths: Option<Vec<f64>>,
    pub trials: usize,
    #[serde(default = "default_zeta1")]
    pub zeta1: f64,
    #[serde(default = "default_zeta2")]
    pub zeta2: f64,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
    #[serde(default = "default_eps_window")]
    pub eps_window: f64,
    #[serde(default)]
    pub seed: u64,
    pub grid_resolution: Option<f64>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Number of eigenvalues computed per realization.
    #[serde(default = "default_levels")]
    pub levels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapLawConfig {
    /// Trials of the iid exponential surrogate per threshold.
    #[serde(default = "default_iid_trials")]
    pub iid_trials: usize,
    #[serde(default = "default_iid_gaps")]
    pub iid_gaps: usize,
    #[serde(default = "default_gap_indices")]
    pub gap_indices: Vec<usize>,
    #[serde(default = "default_c_hat")]
    pub c_hat: f64,
    #[serde(default = "default_zeta_gap")]
    pub zeta_gap: f64,
    #[serde(default = "default_count_eps")]
    pub count_eps: f64,
}

impl Default for GapLawConfig {
    fn default() -> Self {
        GapLawConfig {
            iid_trials: default_iid_trials(),
            iid_gaps: default_iid_gaps(),
            gap_indices: default_gap_indices(),
            c_hat: default_c_hat(),
            zeta_gap: default_zeta_gap(),
            count_eps: default_count_eps(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyBoundsConfig {
    /// Edge widths for the Neumann lower bound; default to the support
    /// half-widths `C_right` and `C_left`.
    pub bound_a: Option<f64>,
    pub bound_b: Option<f64>,
    /// Rank of the gap the Neumann lower bound is checked on.
    #[serde(default = "one_usize")]
    pub gap_rank: usize,
}

impl Default for EnergyBoundsConfig {
    fn default() -> Self {
        EnergyBoundsConfig {
            bound_a: None,
            bound_b: None,
            gap_rank: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CondensationConfig {
    /// Threshold `theta` for the fraction of trials with `n1/N >= theta`;
    /// defaults to half the reference `rho0 / rho`.
    pub theta: Option<f64>,
    /// Levels above `E^1 + energy_cutoff / beta` are dropped from the
    /// analytic comparator (default 36, weight below `e^-36`).
    pub energy_cutoff: Option<f64>,
    /// `eps` of the single-level lower bound `n1/N >= (1 - eps) rho0 / rho / (j - 1)`.
    pub floor_eps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LifshitzConfig {
    /// Energy range of the counting grid.
    #[serde(default = "default_energy_range")]
    pub energy_range: [f64; 2],
    #[serde(default = "default_energy_points")]
    pub energy_points: usize,
    /// Fit window; defaults to the lowest decade where `N > 1e-6`.
    pub fit_window: Option<[f64; 2]>,
    /// Window for the analytic positive control.
    #[serde(default = "default_control_window")]
    pub control_window: [f64; 2],
}

impl Default for LifshitzConfig {
    fn default() -> Self {
        LifshitzConfig {
            energy_range: default_energy_range(),
            energy_points: default_energy_points(),
            fit_window: None,
            control_window: default_control_window(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LsCompareConfig {
    #[serde(default = "default_strengths")]
    pub strengths: Vec<f64>,
}

impl Default for LsCompareConfig {
    fn default() -> Self {
        LsCompareConfig {
            strengths: default_strengths(),
        }
    }
}

/// Finite-size slack constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    /// Subtracted from closed-form probability lower bounds.
    #[serde(default = "default_probability_slack")]
    pub probability_slack: f64,
    /// Eigenvalue assertions allow a relative slack of `eigen_slack * h^2`.
    #[serde(default = "default_eigen_slack")]
    pub eigen_slack: f64,
    /// Absolute eigenvalue bracket width.
    #[serde(default = "default_eig_tol")]
    pub eig_tol: f64,
    /// Absolute residual of the chemical potential solve.
    #[serde(default = "default_mu_tol")]
    pub mu_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            probability_slack: default_probability_slack(),
            eigen_slack: default_eigen_slack(),
            eig_tol: default_eig_tol(),
            mu_tol: default_mu_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub thermo: ThermoConfig,
    pub run: RunConfig,
    #[serde(default)]
    pub gap_law: GapLawConfig,
    #[serde(default)]
    pub energy_bounds: EnergyBoundsConfig,
    #[serde(default)]
    pub condensation: CondensationConfig,
    #[serde(default)]
    pub lifshitz: LifshitzConfig,
    #[serde(default)]
    pub ls_compare: LsCompareConfig,
    #[serde(default)]
    pub tolerance: ToleranceConfig,
}

/// One rung of the size ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SizePoint {
    /// Particle number; `round(rho L)` when the ladder is given by box length.
    pub particle_count: u64,
    pub box_length: f64,
    /// Enters the trial seeds.
    #[serde(skip)]
    pub key: u64,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let run = &self.run;
        if run.trials == 0 {
            return bad("run.trials must be at least 1".into());
        }
        if !(0.0 < run.zeta2 && run.zeta2 < run.zeta1 && run.zeta1 < 1.0) {
            return bad(format!(
                "need 0 < zeta2 < zeta1 < 1, got zeta1 = {}, zeta2 = {}",
                run.zeta1, run.zeta2
            ));
        }
        if !(self.model.rate > 0.0) {
            return bad(format!(
                "model.rate must be positive, got {}",
                self.model.rate
            ));
        }
        if run.levels == 0 {
            return bad("run.levels must be at least 1".into());
        }
        if let Some(h) = run.grid_resolution {
            if !(h > 0.0) {
                return bad(format!("run.grid_resolution must be positive, got {h}"));
            }
        }
        if self.energy_bounds.gap_rank == 0 {
            return bad("energy_bounds.gap_rank starts at 1".into());
        }
        if self.thermo.density.is_some() && self.thermo.density_factor.is_some() {
            return bad("give thermo.density or thermo.density_factor, not both".into());
        }
        match (&run.sizes, &run.box_lengths) {
            (Some(s), None) => {
                if s.is_empty() || s.windows(2).any(|w| w[0] >= w[1]) || s[0] == 0 {
                    return bad("run.sizes must be positive and strictly ascending".into());
                }
                if self.thermo.density.is_none() && self.thermo.density_factor.is_none() {
                    return bad("run.sizes needs thermo.density or thermo.density_factor".into());
                }
            }
            (None, Some(l)) => {
                if l.is_empty() || l.windows(2).any(|w| !(w[0] < w[1])) || !(l[0] > 0.0) {
                    return bad("run.box_lengths must be positive and strictly ascending".into());
                }
            }
            _ => return bad("give exactly one of run.sizes and run.box_lengths".into()),
        }
        if let StrengthSpec::Ladder(v) = &self.model.strength {
            if v.len() != self.size_count() {
                return bad(format!(
                    "strength ladder has {} entries for {} sizes",
                    v.len(),
                    self.size_count()
                ));
            }
        }
        if let StrengthSpec::Rule(r) = &self.model.strength {
            if r != "ln" {
                return bad(format!("unknown strength rule {r:?} (supported: \"ln\")"));
            }
        }
        if self.model.shape != ShapeKind::LuttingerSy {
            self.site(1.0)?;
        }
        Ok(())
    }

    fn size_count(&self) -> usize {
        self.run
            .sizes
            .as_ref()
            .map(Vec::len)
            .or(self.run.box_lengths.as_ref().map(Vec::len))
            .unwrap_or(0)
    }

    pub fn beta(&self) -> f64 {
        self.thermo.beta.unwrap_or(1.0)
    }

    /// `rho`, resolving a density factor against the infinite-wall critical density.
    pub fn density(&self) -> Result<Option<f64>> {
        if let Some(rho) = self.thermo.density {
            return Ok(Some(rho));
        }
        match self.thermo.density_factor {
            Some(f) => Ok(Some(f * critical_density_ls(self.model.rate, self.beta())?)),
            None => Ok(None),
        }
    }

    pub fn size_points(&self) -> Result<Vec<SizePoint>> {
        let rho = self.density()?;
        if let Some(sizes) = &self.run.sizes {
            let rho = rho.ok_or_else(|| Error::Config("run.sizes needs a density".into()))?;
            Ok(sizes
                .iter()
                .map(|&n| SizePoint {
                    particle_count: n,
                    box_length: n as f64 / rho,
                    key: n,
                })
                .collect())
        } else {
            let lengths = self.run.box_lengths.as_deref().unwrap_or_default();
            Ok(lengths
                .iter()
                .map(|&l| SizePoint {
                    particle_count: rho.map_or(0, |r| (r * l).round() as u64),
                    box_length: l,
                    key: l.to_bits(),
                })
                .collect())
        }
    }

    /// `S` at rung `index` of the size ladder.
    pub fn strength_at(&self, index: usize, point: &SizePoint) -> f64 {
        match &self.model.strength {
            StrengthSpec::Fixed(s) => *s,
            StrengthSpec::Ladder(v) => v[index],
            StrengthSpec::Rule(_) => {
                let n = if point.particle_count > 0 {
                    point.particle_count as f64
                } else {
                    point.box_length
                };
                n.ln()
            }
        }
    }

    /// The single-site potential at strength `strength`; `None` for the
    /// infinite-wall model.
    pub fn site(&self, strength: f64) -> Result<Option<SingleSitePotential>> {
        let m = &self.model;
        let (def_l, def_r) = if m.shape == ShapeKind::Delta {
            (0.0, 0.0)
        } else {
            (0.5, 0.5)
        };
        let left = m.support_left.unwrap_or(def_l);
        let right = m.support_right.unwrap_or(def_r);
        let shape = match m.shape {
            ShapeKind::LuttingerSy => return Ok(None),
            ShapeKind::Box => Shape::Box { height: m.height },
            ShapeKind::Triangle => Shape::Triangle { peak: m.peak },
            ShapeKind::Tabulated => Shape::Tabulated {
                samples: m.samples.clone(),
            },
            ShapeKind::Delta => Shape::Delta { gamma: m.gamma },
        };
        SingleSitePotential::new(shape, left, right, strength)
            .map(Some)
            .map_err(|e| Error::Config(format!("model: {e}")))
    }

    pub fn expect_kind(&self, kind: ExperimentKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::KindMismatch {
                expected: kind.name().into(),
                found: self.kind.name().into(),
            })
        }
    }
}

fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn default_shape() -> ShapeKind {
    ShapeKind::Box
}
fn default_zeta1() -> f64 {
    0.5
}
fn default_zeta2() -> f64 {
    0.25
}
fn default_thresholds() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}
fn default_eps_window() -> f64 {
    1e-3
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("runs")
}
fn default_levels() -> usize {
    5
}
fn default_iid_trials() -> usize {
    20_000
}
fn default_iid_gaps() -> usize {
    1000
}
fn default_gap_indices() -> Vec<usize> {
    vec![2, 5, 10]
}
fn default_c_hat() -> f64 {
    2.0
}
fn default_zeta_gap() -> f64 {
    0.3
}
fn default_count_eps() -> f64 {
    0.25
}
fn default_energy_range() -> [f64; 2] {
    [0.02, 1.0]
}
fn default_energy_points() -> usize {
    40
}
fn default_control_window() -> [f64; 2] {
    [1e-4, 1e-2]
}
fn default_strengths() -> Vec<f64> {
    vec![10.0, 100.0, 1000.0, 10000.0]
}
fn default_probability_slack() -> f64 {
    0.01
}
fn default_eigen_slack() -> f64 {
    10.0
}
fn default_eig_tol() -> f64 {
    1e-11
}
fn default_mu_tol() -> f64 {
    1e-10
}
