//! Command-line flags, the flat TOML config file, and their merge into a
//! single resolved run configuration. Flags win over the file; the seed falls
//! back to `COHORT_FORGE_SEED` and then to a generated value.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use cohort_forge::anneal::SaParams;
use cohort_forge::coarsen::{BestChoiceParams, ScoreFn};
use cohort_forge::enrollnet::{ComponentKind, NetworkOptions, NetworkVariant};
use cohort_forge::rng::splitmix64;

use crate::error::{CliError, CliResult};

pub const SEED_ENV: &str = "COHORT_FORGE_SEED";

#[derive(Debug, Parser)]
#[command(name = "cohort-forge", version, about = "Size-bounded communities from membership data")]
pub struct Cli {
    /// Flat TOML file with defaults for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads for Monte-Carlo and sweep runs.
    #[arg(long, global = true, value_name = "K")]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the connectivity network from an enrollment CSV.
    Build {
        #[command(flatten)]
        network: NetworkFlags,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Create communities with hc, mhc or bc.
    Cluster {
        #[command(flatten)]
        network: NetworkFlags,
        #[command(flatten)]
        output: OutputFlags,
        #[command(flatten)]
        bc: ClusterFlags,
    },
    /// Refine communities by simulated annealing.
    Refine {
        #[command(flatten)]
        network: NetworkFlags,
        #[command(flatten)]
        output: OutputFlags,
        #[command(flatten)]
        bc: ClusterFlags,
        #[command(flatten)]
        sa: AnnealFlags,
        /// Starting communities. Without it the cluster stage runs first.
        #[arg(long, value_name = "FILE")]
        communities: Option<PathBuf>,
    },
    /// Run a parameter sweep described by a TOML or JSON spec file.
    Sweep {
        #[command(flatten)]
        network: NetworkFlags,
        #[command(flatten)]
        output: OutputFlags,
        /// Sweep target, values and run counts.
        #[arg(long, value_name = "FILE")]
        spec: Option<PathBuf>,
        /// Replaces the seed in the spec file.
        #[arg(long)]
        seed: Option<u64>,
        /// Include per-value wall-clock times in sweep.json.
        #[arg(long)]
        timings: bool,
    },
    /// Print a quality report, from a quality file or by scoring a community file.
    Report {
        /// quality.json written by cluster or refine.
        #[arg(long, value_name = "FILE")]
        quality: Option<PathBuf>,
        /// Community file to score against --input.
        #[arg(long, value_name = "FILE")]
        communities: Option<PathBuf>,
        #[command(flatten)]
        network: NetworkFlags,
    },
}

#[derive(Debug, Args)]
pub struct NetworkFlags {
    /// Enrollment CSV with entity_id,section_id[,component].
    #[arg(long, short, value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// dense or sparse.
    #[arg(long)]
    pub variant: Option<String>,
    /// Largest section kept by the sparse variant.
    #[arg(long)]
    pub max_section_size: Option<usize>,
    /// Component kinds dropped by the sparse variant, e.g. LEC.
    #[arg(long, value_delimiter = ',')]
    pub drop_kinds: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct OutputFlags {
    /// Output directory.
    #[arg(long, short, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Extra outputs besides JSON: csv, dot.
    #[arg(long, value_delimiter = ',')]
    pub formats: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct ClusterFlags {
    /// hc, mhc or bc.
    #[arg(long)]
    pub algorithm: Option<String>,
    /// linear or nonlinear best-choice score.
    #[arg(long)]
    pub score_fn: Option<String>,
    /// Community size cap for best choice.
    #[arg(long)]
    pub max_size: Option<usize>,
    /// Best-choice Monte-Carlo runs.
    #[arg(long)]
    pub mc_runs: Option<usize>,
    /// Seed for every stochastic stage; falls back to COHORT_FORGE_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the seed for the best-choice stage only.
    #[arg(long)]
    pub bc_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct AnnealFlags {
    /// Trial swaps used to estimate the initial temperature.
    #[arg(long)]
    pub n: Option<usize>,
    /// Initial acceptance probability.
    #[arg(long)]
    pub ap: Option<f64>,
    /// Cooling rate.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Final temperature.
    #[arg(long)]
    pub tmin: Option<f64>,
    /// Moves per temperature.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Overrides the seed for the annealing stage only.
    #[arg(long)]
    pub sa_seed: Option<u64>,
}

/// Every configurable key, as read from the config file or collected from
/// flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub input: Option<PathBuf>,
    pub variant: Option<String>,
    pub max_section_size: Option<usize>,
    pub drop_kinds: Option<Vec<String>>,
    pub out: Option<PathBuf>,
    pub formats: Option<Vec<String>>,
    pub algorithm: Option<String>,
    pub score_fn: Option<String>,
    pub max_size: Option<usize>,
    pub mc_runs: Option<usize>,
    pub seed: Option<u64>,
    pub bc_seed: Option<u64>,
    pub sa_seed: Option<u64>,
    pub n: Option<usize>,
    pub ap: Option<f64>,
    pub alpha: Option<f64>,
    pub tmin: Option<f64>,
    pub iters: Option<usize>,
    pub communities: Option<PathBuf>,
    pub spec: Option<PathBuf>,
    pub quality: Option<PathBuf>,
    pub timings: Option<bool>,
    pub jobs: Option<usize>,
}

macro_rules! overlay {
    ($dst:expr, $src:expr, $($field:ident),* $(,)?) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field; } )*
    };
}

impl Settings {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    fn overlay(&mut self, flags: Settings) {
        overlay!(
            self, flags, input, variant, max_section_size, drop_kinds, out, formats, algorithm, score_fn, max_size,
            mc_runs, seed, bc_seed, sa_seed, n, ap, alpha, tmin, iters, communities, spec, quality, timings, jobs,
        );
    }

    fn network(&mut self, f: NetworkFlags) {
        overlay!(self, f, input, variant, max_section_size, drop_kinds);
    }

    fn output(&mut self, f: OutputFlags) {
        overlay!(self, f, out, formats);
    }

    fn cluster(&mut self, f: ClusterFlags) {
        overlay!(self, f, algorithm, score_fn, max_size, mc_runs, seed, bc_seed);
    }

    fn anneal(&mut self, f: AnnealFlags) {
        overlay!(self, f, n, ap, alpha, tmin, iters, sa_seed);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Build,
    Cluster,
    Refine,
    Sweep,
    Report,
}

/// Split parsed flags into the subcommand and the settings they carry.
pub fn flag_settings(cli: Cli) -> (Action, Option<PathBuf>, Settings) {
    let mut s = Settings {
        jobs: cli.jobs,
        ..Default::default()
    };
    let action = match cli.command {
        Command::Build { network, output } => {
            s.network(network);
            s.output(output);
            Action::Build
        }
        Command::Cluster { network, output, bc } => {
            s.network(network);
            s.output(output);
            s.cluster(bc);
            Action::Cluster
        }
        Command::Refine {
            network,
            output,
            bc,
            sa,
            communities,
        } => {
            s.network(network);
            s.output(output);
            s.cluster(bc);
            s.anneal(sa);
            s.communities = communities;
            Action::Refine
        }
        Command::Sweep {
            network,
            output,
            spec,
            seed,
            timings,
        } => {
            s.network(network);
            s.output(output);
            s.spec = spec;
            s.seed = seed;
            s.timings = timings.then_some(true);
            Action::Sweep
        }
        Command::Report {
            quality,
            communities,
            network,
        } => {
            s.network(network);
            s.quality = quality;
            s.communities = communities;
            Action::Report
        }
    };
    (action, cli.config, s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Hc,
    Mhc,
    Bc,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Hc => "hc",
            Algorithm::Mhc => "mhc",
            Algorithm::Bc => "bc",
        }
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hc" => Ok(Algorithm::Hc),
            "mhc" => Ok(Algorithm::Mhc),
            "bc" => Ok(Algorithm::Bc),
            other => Err(format!("unknown algorithm {other:?}, expected hc, mhc or bc")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Json,
    Csv,
    Dot,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "dot" => Ok(Format::Dot),
            other => Err(format!("unknown output format {other:?}, expected json, csv or dot")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedSource {
    Flag,
    Env,
    Auto,
}

impl fmt::Display for SeedSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeedSource::Flag => "explicit",
            SeedSource::Env => "env",
            SeedSource::Auto => "auto",
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub network: NetworkOptions,
    pub algorithm: Algorithm,
    pub bc: BestChoiceParams,
    pub mc_runs: usize,
    pub sa: SaParams,
    pub out: PathBuf,
    pub formats: BTreeSet<Format>,
    pub seed: u64,
    pub seed_source: SeedSource,
    pub communities: Option<PathBuf>,
    pub spec: Option<PathBuf>,
    pub quality: Option<PathBuf>,
    pub timings: bool,
    pub jobs: Option<usize>,
}

fn parse<T: FromStr<Err = String>>(value: Option<&str>, default: T) -> CliResult<T> {
    value.map_or(Ok(default), |v| v.parse().map_err(CliError::Config))
}

fn resolve_seed(explicit: Option<u64>, env: Option<String>) -> CliResult<(u64, SeedSource)> {
    if let Some(seed) = explicit {
        return Ok((seed, SeedSource::Flag));
    }
    if let Some(raw) = env {
        let seed = raw
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{SEED_ENV}={raw:?} is not an unsigned integer")))?;
        return Ok((seed, SeedSource::Env));
    }
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_nanos() as u64);
    Ok((splitmix64(nanos ^ u64::from(std::process::id()).rotate_left(32)), SeedSource::Auto))
}

impl RunConfig {
    pub fn resolve(s: Settings) -> CliResult<Self> {
        let mut network = NetworkOptions {
            variant: parse::<NetworkVariant>(s.variant.as_deref(), NetworkVariant::FullyDense)?,
            ..NetworkOptions::default()
        };
        if let Some(cap) = s.max_section_size {
            network.max_section_size = cap;
        }
        for kind in s.drop_kinds.unwrap_or_default() {
            network.drop_kinds.insert(kind.parse::<ComponentKind>().map_err(CliError::Config)?);
        }
        if network.max_section_size == 0 {
            return Err(CliError::Config("max_section_size must be at least 1".into()));
        }

        let mut formats = BTreeSet::from([Format::Json]);
        for f in s.formats.unwrap_or_else(|| vec!["csv".into()]) {
            formats.insert(f.parse().map_err(CliError::Config)?);
        }

        let (seed, seed_source) = resolve_seed(s.seed, std::env::var(SEED_ENV).ok())?;

        let bc = BestChoiceParams {
            score_fn: parse::<ScoreFn>(s.score_fn.as_deref(), ScoreFn::Linear)?,
            max_size: s.max_size.unwrap_or(10),
            seed: s.bc_seed.unwrap_or(seed),
        };
        bc.validate()?;

        let defaults = SaParams::default();
        let sa = SaParams {
            trial_swaps: s.n.unwrap_or(defaults.trial_swaps),
            acceptance_probability: s.ap.unwrap_or(defaults.acceptance_probability),
            cooling_rate: s.alpha.unwrap_or(defaults.cooling_rate),
            min_temperature: s.tmin.unwrap_or(defaults.min_temperature),
            iters_per_temp: s.iters.unwrap_or(defaults.iters_per_temp),
            seed: s.sa_seed.unwrap_or(seed),
            ..defaults
        };
        sa.validate()?;

        let mc_runs = s.mc_runs.unwrap_or(100);
        if mc_runs == 0 {
            return Err(CliError::Config("mc_runs must be at least 1".into()));
        }
        if s.jobs == Some(0) {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }

        Ok(RunConfig {
            input: s.input,
            network,
            algorithm: parse(s.algorithm.as_deref(), Algorithm::Bc)?,
            bc,
            mc_runs,
            sa,
            out: s.out.unwrap_or_else(|| PathBuf::from(".")),
            formats,
            seed,
            seed_source,
            communities: s.communities,
            spec: s.spec,
            quality: s.quality,
            timings: s.timings.unwrap_or(false),
            jobs: s.jobs,
        })
    }
}

/// Config file values overlaid with flags, then resolved.
pub fn load(config: Option<&Path>, flags: Settings) -> CliResult<RunConfig> {
    let mut settings = match config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    settings.overlay(flags);
    RunConfig::resolve(settings)
}
