//! Trial tables, aggregates and the on-disk report layout.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use statrs::statistics::{Data, OrderStatistics};

use crate::error::Result;
use crate::experiments::config::ExperimentConfig;

/// Result of one per-realization assertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Held,
    /// The bound was unavailable or carried no information for this realization.
    Vacuous,
    Violated,
    SolverFailed,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Held => "held",
            Outcome::Vacuous => "vacuous",
            Outcome::Violated => "violated",
            Outcome::SolverFailed => "solver_failed",
        }
    }

    pub fn from_check(ok: bool) -> Self {
        if ok {
            Outcome::Held
        } else {
            Outcome::Violated
        }
    }
}

/// Counts of outcomes; they always add up to the number of trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Tally {
    pub held: usize,
    pub vacuous: usize,
    pub violated: usize,
    pub solver_failed: usize,
}

impl Tally {
    pub fn from_outcomes(outcomes: impl IntoIterator<Item = Outcome>) -> Self {
        let mut t = Tally::default();
        for o in outcomes {
            match o {
                Outcome::Held => t.held += 1,
                Outcome::Vacuous => t.vacuous += 1,
                Outcome::Violated => t.violated += 1,
                Outcome::SolverFailed => t.solver_failed += 1,
            }
        }
        t
    }

    pub fn total(&self) -> usize {
        self.held + self.vacuous + self.violated + self.solver_failed
    }

    /// Held over applicable (held or violated).
    pub fn held_fraction(&self) -> Option<f64> {
        let n = self.held + self.violated;
        (n > 0).then(|| self.held as f64 / n as f64)
    }
}

/// Empirical frequency with its `3 sqrt(p (1 - p) / M)` half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Frequency {
    pub successes: usize,
    pub trials: usize,
    pub p: f64,
    pub half_width: f64,
}

impl Frequency {
    pub fn new(successes: usize, trials: usize) -> Self {
        let p = if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        };
        let half_width = if trials == 0 {
            0.0
        } else {
            3.0 * (p * (1.0 - p) / trials as f64).sqrt()
        };
        Frequency {
            successes,
            trials,
            p,
            half_width,
        }
    }

    pub fn from_flags(flags: impl IntoIterator<Item = bool>) -> Self {
        let (mut s, mut n) = (0, 0);
        for f in flags {
            n += 1;
            s += f as usize;
        }
        Frequency::new(s, n)
    }
}

/// Median of the finite values, or `None` if there are none.
pub fn median(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    Some(Data::new(v).median())
}

pub fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (mut s, mut n) = (0.0, 0usize);
    for x in values.into_iter().filter(|x| x.is_finite()) {
        s += x;
        n += 1;
    }
    (n > 0).then(|| s / n as f64)
}

/// Sample moments `E[x]`, `E[x^2]`, `E[x^3]` of the finite values.
pub fn moments(values: impl IntoIterator<Item = f64>) -> [Option<f64>; 3] {
    let v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    let m = |p: i32| mean(v.iter().map(|x| x.powi(p)));
    [m(1), m(2), m(3)]
}

pub fn strictly_increasing(v: &[Option<f64>]) -> bool {
    v.windows(2)
        .all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if b > a))
}

pub fn strictly_decreasing(v: &[Option<f64>]) -> bool {
    v.windows(2)
        .all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if b < a))
}

pub fn nondecreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0])
}

/// Shortest round-trip decimal form.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// One CSV row under construction.
#[derive(Debug, Clone, Default)]
pub struct Row(pub Vec<String>);

impl Row {
    pub fn int(mut self, v: u64) -> Self {
        self.0.push(v.to_string());
        self
    }

    pub fn num(mut self, v: f64) -> Self {
        self.0.push(fmt_f64(v));
        self
    }

    pub fn opt(mut self, v: Option<f64>) -> Self {
        self.0.push(v.map(fmt_f64).unwrap_or_default());
        self
    }

    pub fn flag(mut self, v: bool) -> Self {
        self.0.push(if v { "1" } else { "0" }.into());
        self
    }

    pub fn opt_flag(mut self, v: Option<bool>) -> Self {
        self.0.push(
            v.map(|b| if b { "1" } else { "0" }.to_string())
                .unwrap_or_default(),
        );
        self
    }

    pub fn outcome(mut self, o: Outcome) -> Self {
        self.0.push(o.as_str().into());
        self
    }

    pub fn text(mut self, s: impl Into<String>) -> Self {
        self.0.push(s.into());
        self
    }

    /// `E1..E5`, blank where fewer levels exist.
    pub fn levels(mut self, levels: &[f64]) -> Self {
        for j in 0..5 {
            self = self.opt(levels.get(j).copied());
        }
        self
    }
}

/// The columns every trial table starts with.
pub const BASE_COLUMNS: [&str; 15] = [
    "seed",
    "N",
    "L",
    "S",
    "l1",
    "l2",
    "E1",
    "E2",
    "E3",
    "E4",
    "E5",
    "mu",
    "n1_frac",
    "n2_frac",
    "band_frac",
];

/// The columns every trial table ends with.
pub const TRAILING_COLUMNS: [&str; 2] = ["trial", "solver_error"];

/// Fixed part of a trial row.
#[derive(Debug, Clone, Default)]
pub struct BaseRow {
    pub seed: u64,
    pub particle_count: u64,
    pub box_length: f64,
    pub strength: Option<f64>,
    pub l1: f64,
    pub l2: f64,
    pub levels: Vec<f64>,
    pub mu: Option<f64>,
    pub n1_frac: Option<f64>,
    pub n2_frac: Option<f64>,
    pub band_frac: Option<f64>,
    pub solver_error: Option<String>,
    pub trial: usize,
}

impl BaseRow {
    fn leading(&self) -> Row {
        Row::default()
            .int(self.seed)
            .int(self.particle_count)
            .num(self.box_length)
            .opt(self.strength)
            .num(self.l1)
            .num(self.l2)
            .levels(&self.levels)
            .opt(self.mu)
            .opt(self.n1_frac)
            .opt(self.n2_frac)
            .opt(self.band_frac)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl TrialTable {
    /// A table with the base columns, then `extra`, then the trailing columns.
    pub fn new(extra: &[String]) -> Self {
        let mut header: Vec<String> = BASE_COLUMNS.iter().map(|s| s.to_string()).collect();
        header.extend_from_slice(extra);
        header.extend(TRAILING_COLUMNS.iter().map(|s| s.to_string()));
        TrialTable {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, base: &BaseRow, extra: Row) {
        let mut row = base.leading().0;
        row.extend(extra.0);
        row.push(base.trial.to_string());
        row.push(base.solver_error.clone().unwrap_or_default());
        debug_assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }
}

/// Wall-clock metadata, kept in one object so reports can be compared
/// without it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMeta {
    pub timestamp: String,
    pub wall_time_seconds: f64,
    pub threads: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub table: TrialTable,
    /// Kind-specific aggregates.
    pub results: Value,
    pub run: Option<RunMeta>,
}

impl ExperimentReport {
    pub fn summary(&self) -> Result<Value> {
        Ok(json!({
            "kind": self.config.kind.name(),
            "tool_version": env!("CARGO_PKG_VERSION"),
            "config": serde_json::to_value(&self.config)?,
            "results": self.results,
            "run": self.run,
        }))
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.summary()?)? + "\n")
    }

    /// Write `trials.csv`, `summary.json` and `config.echo` into a fresh
    /// `<out_dir>/<kind>-<timestamp>` directory and return its path.
    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let stamp = self
            .run
            .as_ref()
            .map(|r| r.timestamp.replace([':', '-'], ""))
            .unwrap_or_else(|| "untimed".into());
        fs::create_dir_all(out_dir)?;
        let base = format!("{}-{}", self.config.kind.name(), stamp);
        let mut dir = out_dir.join(&base);
        let mut n = 1;
        while dir.exists() {
            dir = out_dir.join(format!("{base}-{n}"));
            n += 1;
        }
        fs::create_dir(&dir)?;
        fs::write(dir.join("trials.csv"), self.table.to_csv()?)?;
        fs::write(dir.join("summary.json"), self.summary_json()?)?;
        fs::write(dir.join("config.echo"), self.config.to_toml_string()?)?;
        Ok(dir)
    }
}
