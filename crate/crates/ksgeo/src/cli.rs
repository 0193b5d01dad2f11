use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ksgeo_core::geometry::turning_points;
use ksgeo_core::integrator::{integrate_general, integrate_zero_constants};
use ksgeo_core::oscillator::spectrum_4d;
use ksgeo_core::{
    ConstantsOfMotion, Direction, GridSpec, IntegrationConfig, OscillatorParams, SpacetimeParams,
    Trajectory,
};

use crate::config::{DirectionArg, FileConfig, CONFIG_ENV};
use crate::error::{CliError, CliResult};
use crate::formats::{self, Format, SpectrumFile, TrajectoryFile};
use crate::ks_check::{self, Fault};
use crate::verify::{self, VerifyOptions};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_N_MAX: usize = 3;
pub const DEFAULT_GRID_POINTS: usize = 2001;
pub const DEFAULT_GRID_HALFWIDTH: f64 = 8.0;

#[derive(Debug, Parser)]
#[command(
    name = "ksgeo",
    version,
    about = "Radial geodesics, the KS map and the 4D oscillator spectrum"
)]
pub struct Cli {
    /// TOML file with [geodesic], [ks_check], [spectrum] and [verify] tables.
    #[arg(long, global = true, env = CONFIG_ENV, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a radial time-like geodesic.
    Geodesic(GeodesicArgs),
    /// Check the KS identities on seeded random inputs.
    KsCheck(KsCheckArgs),
    /// Finite-difference spectrum of the 4D oscillator.
    Spectrum(SpectrumArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct GeodesicArgs {
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub spin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub energy: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub angmom: Option<f64>,
    /// Start radius; defaults to 2m.
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long, value_enum)]
    pub direction: Option<DirectionArg>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Proper-time budget; also lets the run continue through turning points.
    #[arg(long)]
    pub max_tau: Option<f64>,
    #[arg(long)]
    pub terminal_radius: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to the extension of --out, else csv.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct KsCheckArgs {
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, hide = true)]
    pub fault: Option<Fault>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub grid_halfwidth: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Ten times fewer random samples.
    #[arg(long)]
    pub quick: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, hide = true)]
    pub fault: Option<Fault>,
}

/// A fully resolved `geodesic` invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicRun {
    pub params: SpacetimeParams,
    pub constants: ConstantsOfMotion,
    pub r0: f64,
    pub config: IntegrationConfig,
    pub out: Option<PathBuf>,
    pub format: Format,
}

fn finite(name: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::bad_input(format!(
            "{name} must be finite, got {v}"
        )))
    }
}

impl GeodesicRun {
    pub fn resolve(args: &GeodesicArgs, file: &FileConfig) -> CliResult<Self> {
        let f = &file.geodesic;
        let mass = finite("mass", args.mass.or(f.mass).unwrap_or(1.0))?;
        let spin = finite("spin", args.spin.or(f.spin).unwrap_or(0.0))?;
        let params = SpacetimeParams::new(mass, spin)?;
        let energy = finite("energy", args.energy.or(f.energy).unwrap_or(0.0))?;
        let angmom = finite("angmom", args.angmom.or(f.angmom).unwrap_or(0.0))?;
        let r0 = finite("r0", args.r0.or(f.r0).unwrap_or(2.0 * mass))?;

        let mut config = IntegrationConfig::for_mass(mass);
        config.direction = args
            .direction
            .or(f.direction)
            .unwrap_or(DirectionArg::Infall)
            .into();
        if let Some(v) = args.rel_tol.or(f.rel_tol) {
            config.rel_tol = v;
        }
        if let Some(v) = args.abs_tol.or(f.abs_tol) {
            config.abs_tol = v;
        }
        if let Some(v) = args.terminal_radius.or(f.terminal_radius) {
            config.terminal_radius = v;
        }
        if let Some(v) = args.max_tau.or(f.max_tau) {
            config.max_tau = Some(v);
            config.stop_at_turning_point = false;
        }
        config.validate()?;

        let out = args.out.clone().or_else(|| f.out.clone());
        let format = args
            .format
            .or(f.format)
            .or_else(|| out.as_deref().map(Format::from_path))
            .unwrap_or(Format::Csv);
        Ok(Self {
            params,
            constants: ConstantsOfMotion::timelike(energy, angmom),
            r0,
            config,
            out,
            format,
        })
    }

    pub fn integrate(&self) -> CliResult<Trajectory> {
        let traj = if self.constants.is_zero() {
            integrate_zero_constants(&self.params, self.r0, &self.config)?
        } else {
            let sign = match self.config.direction {
                Direction::Infall => -1.0,
                Direction::Outfall => 1.0,
            };
            integrate_general(&self.params, &self.constants, self.r0, sign, &self.config)?
        };
        Ok(traj)
    }
}

/// `v` rounded to 12 significant digits and printed in shortest form.
pub fn sig12(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    rounded.to_string()
}

pub fn geodesic_summary(traj: &Trajectory, turning: &[f64]) -> String {
    let points: Vec<String> = turning.iter().map(|r| sig12(*r)).collect();
    format!(
        "turning points: [{}]; tau span: {}; max normalization drift: {:.3e}; termination: {}",
        points.join(", "),
        sig12(traj.tau_span()),
        traj.max_normalization_drift,
        serde_json::to_value(traj.termination)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default(),
    )
}

fn emit(out: Option<&Path>, contents: &str) -> CliResult<()> {
    match out {
        Some(path) => formats::write_atomic(path, contents)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::bad_input(format!("writing to stdout: {e}")))?;
        }
    }
    Ok(())
}

pub fn cmd_geodesic(args: &GeodesicArgs, file: &FileConfig) -> CliResult<()> {
    let run = GeodesicRun::resolve(args, file)?;
    let traj = run.integrate()?;
    let turning = turning_points(&run.constants, &run.params);
    let contents = match run.format {
        Format::Csv => formats::trajectory_csv(&formats::rows(&traj)),
        Format::Json => formats::to_json(&TrajectoryFile::new(&traj, &run.config, turning.clone())),
    };
    emit(run.out.as_deref(), &contents)?;
    eprintln!("{}", geodesic_summary(&traj, &turning));
    Ok(())
}

pub fn cmd_ks_check(args: &KsCheckArgs, file: &FileConfig) -> CliResult<()> {
    let f = &file.ks_check;
    let samples = args.samples.or(f.samples).unwrap_or(DEFAULT_SAMPLES);
    let seed = args.seed.or(f.seed).unwrap_or(DEFAULT_SEED);
    let report = ks_check::run(samples, samples, seed, args.fault)?;
    let out = args.out.clone().or_else(|| f.out.clone());
    emit(out.as_deref(), &formats::to_json(&report))?;
    for o in &report.identities {
        eprintln!(
            "{:<17} max residual {:.3e} (threshold {:.0e}) {}",
            o.name,
            o.max_residual,
            o.threshold,
            if o.passed { "ok" } else { "FAILED" }
        );
    }
    if report.passed {
        Ok(())
    } else {
        Err(ks_check::failure(&report))
    }
}

pub fn cmd_spectrum(args: &SpectrumArgs, file: &FileConfig) -> CliResult<()> {
    let f = &file.spectrum;
    let n_max = args.n_max.or(f.n_max).unwrap_or(DEFAULT_N_MAX);
    let points = args
        .grid_points
        .or(f.grid_points)
        .unwrap_or(DEFAULT_GRID_POINTS);
    let half = args
        .grid_halfwidth
        .or(f.grid_halfwidth)
        .unwrap_or(DEFAULT_GRID_HALFWIDTH);
    let grid = GridSpec::new(half, points)?;
    let result = spectrum_4d(&grid, &OscillatorParams::KS, n_max)?;
    let out = args.out.clone().or_else(|| f.out.clone());
    emit(
        out.as_deref(),
        &formats::to_json(&SpectrumFile::from(&result)),
    )?;
    for level in &result.levels {
        eprintln!(
            "n = {:>2}: E = {} (analytic {}, degeneracy {}, max residual {:.3e})",
            level.n,
            sig12(level.numeric_energy),
            level.analytic_energy,
            level.degeneracy,
            level.residual
        );
    }
    eprintln!(
        "claim_comparison (numeric ground - 1): {}",
        sig12(result.claim_comparison)
    );
    Ok(())
}

pub fn cmd_verify(args: &VerifyArgs, file: &FileConfig) -> CliResult<()> {
    let f = &file.verify;
    let opts = VerifyOptions {
        quick: args.quick || f.quick.unwrap_or(false),
        seed: args.seed.or(f.seed).unwrap_or(DEFAULT_SEED),
        fault: args.fault,
    };
    let report = verify::run(&opts);
    let out = args.out.clone().or_else(|| f.out.clone());
    emit(out.as_deref(), &formats::to_json(&report))?;
    if report.passed {
        Ok(())
    } else {
        Err(verify::failure(&report))
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let file = FileConfig::resolve(cli.config.as_deref())?;
    match &cli.command {
        Command::Geodesic(a) => cmd_geodesic(a, &file),
        Command::KsCheck(a) => cmd_ks_check(a, &file),
        Command::Spectrum(a) => cmd_spectrum(a, &file),
        Command::Verify(a) => cmd_verify(a, &file),
    }
}
