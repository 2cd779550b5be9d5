//! `softbec`: sample configurations, inspect single spectra and occupations,
//! and run the Monte Carlo experiments.

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use softbec::experiments::config::{ExperimentConfig, ExperimentKind};
use softbec::experiments::report::fmt_f64;
use softbec::spectral::{luttinger_sy_eigenvalues, DiscretizedOperator};
use softbec::thermo::{condensate_statistics, ThermoState};
use softbec::{
    assemble_potential, clipped_gaps, discretize, lowest_eigenvalues, run_experiment,
    sample_configuration, Boundary, Error, Shape, SingleSitePotential, Spectrum,
};

const SEED_ENV: &str = "SOFTBEC_SEED";

#[derive(Parser)]
#[command(
    name = "softbec",
    version,
    about = "Poisson soft-obstacle spectra and the free Bose gas"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one configuration; print atoms and ranked gaps as CSV.
    Sample(SampleArgs),
    /// Lowest eigenvalues of one realization.
    Spectrum(SpectrumArgs),
    /// Chemical potential and occupations on a given or computed spectrum.
    Occupancy(OccupancyArgs),
    /// Run an experiment from a TOML config and write its report directory.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, default_value_t = 1.0)]
    rate: f64,
    #[arg(long)]
    box_length: f64,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Box,
    Triangle,
    Delta,
    LuttingerSy,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Dirichlet,
    Neumann,
}

#[derive(Args)]
struct RealizationArgs {
    #[arg(long, default_value_t = 1.0)]
    rate: f64,
    #[arg(long)]
    box_length: f64,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ShapeArg::Box)]
    shape: ShapeArg,
    /// Strength scale `S`; 0 gives the free Laplacian.
    #[arg(long, default_value_t = 1.0)]
    strength: f64,
    /// Box height or triangle peak.
    #[arg(long, default_value_t = 1.0)]
    height: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long)]
    support_left: Option<f64>,
    #[arg(long)]
    support_right: Option<f64>,
    #[arg(long)]
    grid_resolution: Option<f64>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    realization: RealizationArgs,
    #[arg(short, long, default_value_t = 5)]
    k: usize,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Dirichlet)]
    boundary: BoundaryArg,
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
}

#[derive(Args)]
struct OccupancyArgs {
    /// Comma-separated synthetic spectrum; otherwise one realization is solved.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    levels: Option<Vec<f64>>,
    #[arg(long)]
    box_length: f64,
    #[arg(long)]
    density: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1e-3)]
    eps_window: f64,
    #[arg(long, default_value_t = 1e-12)]
    mu_tol: f64,
    #[arg(short, long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    rate: f64,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ShapeArg::LuttingerSy)]
    shape: ShapeArg,
    #[arg(long, default_value_t = 1.0)]
    strength: f64,
    #[arg(long, default_value_t = 1.0)]
    height: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long)]
    grid_resolution: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    GapLaw,
    EnergyBounds,
    Condensation,
    Lifshitz,
    LsCompare,
}

impl From<KindArg> for ExperimentKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::GapLaw => ExperimentKind::GapLaw,
            KindArg::EnergyBounds => ExperimentKind::EnergyBounds,
            KindArg::Condensation => ExperimentKind::Condensation,
            KindArg::Lifshitz => ExperimentKind::Lifshitz,
            KindArg::LsCompare => ExperimentKind::LsCompare,
        }
    }
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(value_enum)]
    kind: KindArg,
    #[arg(long)]
    config: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Master seed; overrides the environment and the config file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// Failure with its exit code: 1 for numerical failures, 2 for bad input.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<Error>() {
            Some(e) if e.is_numerical() => 1,
            Some(Error::Io(_) | Error::Json(_) | Error::Csv(_)) => 1,
            _ => 2,
        };
        Failure { code, error }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = io::stdout().lock();
    let result = match cli.command {
        Command::Sample(a) => sample(&a, &mut out),
        Command::Spectrum(a) => spectrum(&a, &mut out),
        Command::Occupancy(a) => occupancy(&a, &mut out),
        Command::Experiment(a) => experiment(a, &mut out),
    };
    match result.and_then(|()| {
        out.flush().map_err(|e| Failure {
            code: 1,
            error: e.into(),
        })
    }) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn io_err(e: io::Error) -> Failure {
    Failure {
        code: 1,
        error: e.into(),
    }
}

fn site_from(
    shape: ShapeArg,
    strength: f64,
    height: f64,
    gamma: f64,
    left: Option<f64>,
    right: Option<f64>,
) -> Result<Option<SingleSitePotential>, Error> {
    let (shape, def) = match shape {
        ShapeArg::LuttingerSy => return Ok(None),
        ShapeArg::Box => (Shape::Box { height }, 0.5),
        ShapeArg::Triangle => (Shape::Triangle { peak: height }, 0.5),
        ShapeArg::Delta => (Shape::Delta { gamma }, 0.0),
    };
    SingleSitePotential::new(shape, left.unwrap_or(def), right.unwrap_or(def), strength).map(Some)
}

fn sample(a: &SampleArgs, out: &mut impl Write) -> Result<(), Failure> {
    let config =
        sample_configuration(a.rate, a.box_length, a.seed).context(format!("seed {}", a.seed))?;
    let gaps = clipped_gaps(&config);
    writeln!(out, "record,index,value").map_err(io_err)?;
    writeln!(out, "count,,{}", config.count()).map_err(io_err)?;
    for (i, x) in config.atoms.iter().enumerate() {
        writeln!(out, "atom,{},{}", i + 1, fmt_f64(*x)).map_err(io_err)?;
    }
    for (r, l) in gaps.sorted_desc.iter().enumerate() {
        writeln!(out, "gap,{},{}", r + 1, fmt_f64(*l)).map_err(io_err)?;
    }
    Ok(())
}

/// Spectrum of one realization: numeric for finite strength, analytic for
/// the infinite-wall shape.
fn realization_spectrum(
    r: &RealizationArgs,
    k: usize,
    boundary: BoundaryArg,
    tol: f64,
) -> Result<Spectrum, Failure> {
    let config = sample_configuration(r.rate, r.box_length, r.seed)?;
    let site = site_from(
        r.shape,
        r.strength,
        r.height,
        r.gamma,
        r.support_left,
        r.support_right,
    )?;
    let Some(site) = site else {
        return Ok(luttinger_sy_eigenvalues(&clipped_gaps(&config), k)?);
    };
    let h = softbec::spectral::potential::resolve_spacing(&site, r.box_length, r.grid_resolution);
    let field = assemble_potential(&config, &site, h)?;
    let op = match boundary {
        BoundaryArg::Dirichlet => discretize(&field, Boundary::Dirichlet)?,
        BoundaryArg::Neumann => DiscretizedOperator::neumann_direct_sum(&field, &config.atoms)?,
    };
    if k > op.dim() {
        return Err(anyhow!(
            "requested {k} levels but the grid has only {} nodes",
            op.dim()
        )
        .into());
    }
    lowest_eigenvalues(&op, k, tol)
        .with_context(|| format!("seed {}", r.seed))
        .map_err(Failure::from)
}

fn spectrum(a: &SpectrumArgs, out: &mut impl Write) -> Result<(), Failure> {
    let spec = realization_spectrum(&a.realization, a.k, a.boundary, a.tol)?;
    writeln!(out, "j,eigenvalue").map_err(io_err)?;
    for (j, e) in spec.eigenvalues.iter().enumerate() {
        writeln!(out, "{},{}", j + 1, fmt_f64(*e)).map_err(io_err)?;
    }
    Ok(())
}

fn occupancy(a: &OccupancyArgs, out: &mut impl Write) -> Result<(), Failure> {
    let spec = match &a.levels {
        Some(levels) => Spectrum::from_levels(levels.clone(), a.box_length)?,
        None => {
            let r = RealizationArgs {
                rate: a.rate,
                box_length: a.box_length,
                seed: a.seed,
                shape: a.shape,
                strength: a.strength,
                height: a.height,
                gamma: a.gamma,
                support_left: None,
                support_right: None,
                grid_resolution: a.grid_resolution,
            };
            realization_spectrum(&r, a.k, BoundaryArg::Dirichlet, 1e-11)?
        }
    };
    let state = ThermoState::solve(&spec, a.density, a.beta, a.box_length, a.mu_tol)
        .with_context(|| format!("seed {}", a.seed))?;
    let n = (a.density * a.box_length).round().max(1.0) as u64;
    let eps = spec.level(2).unwrap_or(spec.eigenvalues[0]) * (1.0 + a.eps_window);
    let stats = condensate_statistics(&spec, &state.occupations, n, eps);
    writeln!(out, "record,index,value").map_err(io_err)?;
    writeln!(out, "mu,,{}", fmt_f64(state.chemical_potential)).map_err(io_err)?;
    writeln!(out, "residual,,{}", fmt_f64(state.residual())).map_err(io_err)?;
    for (j, (e, occ)) in spec.eigenvalues.iter().zip(&state.occupations).enumerate() {
        writeln!(out, "energy,{},{}", j + 1, fmt_f64(*e)).map_err(io_err)?;
        writeln!(out, "occupation,{},{}", j + 1, fmt_f64(*occ)).map_err(io_err)?;
    }
    writeln!(out, "ground_fraction,,{}", fmt_f64(stats.ground_fraction)).map_err(io_err)?;
    writeln!(out, "second_fraction,,{}", fmt_f64(stats.second_fraction)).map_err(io_err)?;
    writeln!(out, "band_fraction,,{}", fmt_f64(stats.band_fraction)).map_err(io_err)?;
    Ok(())
}

fn experiment(a: ExperimentArgs, out: &mut impl Write) -> Result<(), Failure> {
    let mut cfg = ExperimentConfig::from_path(&a.config)?;
    let kind = ExperimentKind::from(a.kind);
    cfg.expect_kind(kind)?;
    // flag, then environment, then file
    let env_seed = match std::env::var(SEED_ENV) {
        Ok(s) => Some(
            s.trim()
                .parse::<u64>()
                .map_err(|e| anyhow!("{SEED_ENV}={s:?} is not a seed: {e}"))?,
        ),
        Err(_) => None,
    };
    if let Some(seed) = a.seed.or(env_seed) {
        cfg.run.seed = seed;
    }
    if let Some(dir) = a.out_dir {
        cfg.run.out_dir = dir;
    }
    let report = run_experiment(&cfg, a.threads)
        .with_context(|| format!("{kind} with master seed {}", cfg.run.seed))?;
    let dir = report.write(&cfg.run.out_dir)?;
    writeln!(out, "{}", dir.join("summary.json").display()).map_err(io_err)?;
    Ok(())
}
