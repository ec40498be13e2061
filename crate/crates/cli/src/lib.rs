//! Command-line front end: configuration loading and the four subcommands.
//!
//! Every command is a pure function of its configuration and seeds, so
//! reruns write byte-identical files. Exit codes: 0 success, 1 internal
//! failure, 2 bad configuration or usage, 3 I/O failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use qaoa_gmvp::bench::{emit_report, run_bench, BenchConfig, Mode, DEFAULT_RUNS};
use qaoa_gmvp::gmvp::{block_weights, decode, feasible_indices, GmvpInstance};
use qaoa_gmvp::landscape::{scan_all_pairs, write_grid, DEFAULT_RESOLUTION};
use qaoa_gmvp::noise::{NamedProfile, ProfileSpec};
use qaoa_gmvp::optim::OptimizerSpec;
use qaoa_gmvp::qaoa::{CircuitGeometry, Coupling, QaoaProblem};
use qaoa_gmvp::Error;
use serde::Deserialize;

/// The configuration used when `--config` is not given.
pub const DEFAULT_CONFIG: &str = include_str!("../default.gmvp.json");

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub type Result<T> = std::result::Result<T, Error>;

/// Exit code for a failed command.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::Internal(_) => EXIT_INTERNAL,
        _ => EXIT_CONFIG,
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum InstanceRef {
    Path(PathBuf),
    Inline(serde_json::Value),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub n: usize,
    pub l: usize,
    pub m: usize,
    pub p: usize,
    #[serde(default)]
    pub coupling: Coupling,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    #[serde(default = "default_runs")]
    pub runs: usize,
    pub base_seed: u64,
    #[serde(default = "Mode::both")]
    pub modes: Vec<Mode>,
}

fn default_runs() -> usize {
    DEFAULT_RUNS
}

fn default_resolution() -> usize {
    DEFAULT_RESOLUTION
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandscapeSection {
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    pub theta_star: Vec<f64>,
    pub seed: u64,
}

/// Top-level configuration document.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub instance: InstanceRef,
    pub geometry: GeometrySection,
    pub profiles: Vec<ProfileSpec>,
    pub optimizers: Vec<OptimizerSpec>,
    pub bench: Option<BenchSection>,
    pub landscape: Option<LandscapeSection>,
}

/// A configuration after validation, ready to run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub problem: QaoaProblem,
    pub profiles: Vec<NamedProfile>,
    pub optimizers: Vec<OptimizerSpec>,
    pub bench: Option<BenchSection>,
    pub landscape: Option<LandscapeSection>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Read a configuration file; instance paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Resolved> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text)?.resolve(path.parent().unwrap_or(Path::new(".")))
    }

    pub fn resolve(self, base_dir: &Path) -> Result<Resolved> {
        let instance = match &self.instance {
            InstanceRef::Path(p) => GmvpInstance::load(&base_dir.join(p))?,
            InstanceRef::Inline(v) => GmvpInstance::from_json(&v.to_string())?,
        };
        let g = &self.geometry;
        if (g.n, g.l, g.m) != (instance.n(), instance.l(), instance.m()) {
            return Err(Error::Config(format!(
                "geometry (n, l, m) = ({}, {}, {}) does not match the instance ({}, {}, {})",
                g.n,
                g.l,
                g.m,
                instance.n(),
                instance.l(),
                instance.m()
            )));
        }
        let geometry = CircuitGeometry::new(g.n, g.l, g.p, &g.coupling)?;
        let problem = QaoaProblem::new(geometry, instance)?;
        let profiles = self
            .profiles
            .iter()
            .map(ProfileSpec::build)
            .collect::<Result<Vec<_>>>()?;
        for spec in &self.optimizers {
            spec.validate()?;
        }
        if let Some(b) = &self.bench {
            if b.runs < 2 {
                return Err(Error::Config(format!("bench.runs must be >= 2, got {}", b.runs)));
            }
        }
        if let Some(l) = &self.landscape {
            if l.theta_star.len() != 2 * g.p {
                return Err(Error::Config(format!(
                    "landscape.theta_star has {} entries, expected {}",
                    l.theta_star.len(),
                    2 * g.p
                )));
            }
            if l.resolution < 2 {
                return Err(Error::Config(format!(
                    "landscape.resolution must be >= 2, got {}",
                    l.resolution
                )));
            }
        }
        Ok(Resolved {
            problem,
            profiles,
            optimizers: self.optimizers,
            bench: self.bench,
            landscape: self.landscape,
        })
    }
}

/// The built-in configuration, validated.
pub fn default_config() -> Resolved {
    RunConfig::parse(DEFAULT_CONFIG)
        .and_then(|c| c.resolve(Path::new(".")))
        .expect("shipped configuration is valid")
}

fn load_or_default(path: Option<&Path>) -> Result<Resolved> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(default_config()),
    }
}

impl Resolved {
    /// Profile by name: from the configuration first, then the presets.
    pub fn profile(&self, name: &str) -> Result<NamedProfile> {
        self.profiles
            .iter()
            .find(|p| p.name == name)
            .cloned()
            .or_else(|| NamedProfile::preset(name))
            .ok_or_else(|| Error::Config(format!("unknown profile `{name}`")))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qaoa-gmvp",
    version,
    about = "Hard-constrained QAOA workbench for mean-variance problems"
)]
pub struct Cli {
    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random instance with a unit-diagonal covariance matrix.
    Instance(InstanceArgs),
    /// Brute-force optimum of an instance (the built-in one by default).
    Oracle(OracleArgs),
    /// Six pairwise cost landscapes of a two-layer circuit.
    Landscape(LandscapeArgs),
    /// Optimizer benchmark over every (optimizer, profile, mode) cell.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub l: usize,
    #[arg(long)]
    pub m: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub instance: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LandscapeArgs {
    /// Configuration file; the built-in one when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also render each grid as SVG level bands.
    #[arg(long)]
    pub svg: bool,
    /// Profile name from the configuration or a preset.
    #[arg(long, default_value = "noiseless")]
    pub profile: String,
    /// Grid points per axis; overrides the configuration.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Root seed for noisy cells; overrides the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Configuration file; the built-in one when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Restrict to these profiles (repeatable).
    #[arg(long)]
    pub profile: Vec<String>,
    /// Restrict to these modes (repeatable).
    #[arg(long, value_parser = parse_mode)]
    pub mode: Vec<Mode>,
    /// Runs per cell; overrides the configuration.
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub base_seed: Option<u64>,
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    match s {
        "standard" => Ok(Mode::Standard),
        "filtered" => Ok(Mode::Filtered),
        _ => Err(format!("unknown mode `{s}` (expected standard or filtered)")),
    }
}

pub fn cmd_instance(seed: u64, n: usize, l: usize, m: usize, out: Option<&Path>) -> Result<String> {
    let json = GmvpInstance::random_instance(seed, n, l, m)?.to_json();
    if let Some(path) = out {
        fs::write(path, &json)?;
        Ok(format!("wrote {}\n", path.display()))
    } else {
        Ok(json)
    }
}

pub fn cmd_oracle(instance: &GmvpInstance) -> String {
    let (n, l, m) = (instance.n(), instance.l(), instance.m());
    let (index, value) = instance.brute_force_optimum();
    let weights = decode(index, n, l, m).expect("optimum is feasible");
    let bits: String = (0..n * l)
        .rev()
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect();
    format!(
        "feasible states: {}\noptimal index: {index}\nbasis state (qubit {} first): {bits}\nblock weights: {:?}\nweights: {:?}\nvalue: {value:.16e}\n",
        feasible_indices(n, l, m).len(),
        n * l - 1,
        block_weights(index, n, l),
        weights.as_slice(),
    )
}

pub fn cmd_landscape(
    config: &Resolved,
    out_dir: &Path,
    svg: bool,
    profile: &str,
    resolution: Option<usize>,
    seed: Option<u64>,
) -> Result<Vec<PathBuf>> {
    let section = config
        .landscape
        .as_ref()
        .ok_or_else(|| Error::Config("configuration has no `landscape` section".into()))?;
    let profile = config.profile(profile)?;
    let resolution = resolution.unwrap_or(section.resolution);
    if resolution < 2 {
        return Err(Error::Config(format!("resolution must be >= 2, got {resolution}")));
    }
    let grids = scan_all_pairs(
        &config.problem,
        resolution,
        &section.theta_star,
        &profile,
        seed.unwrap_or(section.seed),
    )?;
    let mut written = Vec::new();
    for grid in &grids {
        written.extend(write_grid(grid, &profile, out_dir, svg)?);
    }
    Ok(written)
}

pub fn bench_config(
    config: &Resolved,
    profiles: &[String],
    modes: &[Mode],
    runs: Option<usize>,
    base_seed: Option<u64>,
) -> Result<BenchConfig> {
    let section = config
        .bench
        .as_ref()
        .ok_or_else(|| Error::Config("configuration has no `bench` section".into()))?;
    let profiles = if profiles.is_empty() {
        config.profiles.clone()
    } else {
        profiles.iter().map(|n| config.profile(n)).collect::<Result<_>>()?
    };
    let bench = BenchConfig {
        problem: config.problem.clone(),
        optimizers: config.optimizers.clone(),
        profiles,
        modes: if modes.is_empty() {
            section.modes.clone()
        } else {
            modes.to_vec()
        },
        runs_per_cell: runs.unwrap_or(section.runs),
        base_seed: base_seed.unwrap_or(section.base_seed),
    };
    bench.validate()?;
    Ok(bench)
}

pub fn cmd_bench(config: &BenchConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    emit_report(&run_bench(config)?, out_dir)
}

fn dispatch(command: Command) -> Result<String> {
    let listing = |paths: Vec<PathBuf>| paths.iter().map(|p| format!("wrote {}\n", p.display())).collect();
    match command {
        Command::Instance(a) => cmd_instance(a.seed, a.n, a.l, a.m, a.out.as_deref()),
        Command::Oracle(a) => {
            let instance = match &a.instance {
                Some(p) => GmvpInstance::load(p)?,
                None => GmvpInstance::default_instance(),
            };
            Ok(cmd_oracle(&instance))
        }
        Command::Landscape(a) => {
            let config = load_or_default(a.config.as_deref())?;
            cmd_landscape(&config, &a.out, a.svg, &a.profile, a.resolution, a.seed).map(listing)
        }
        Command::Bench(a) => {
            let config = load_or_default(a.config.as_deref())?;
            let bench = bench_config(&config, &a.profile, &a.mode, a.runs, a.base_seed)?;
            cmd_bench(&bench, &a.out).map(listing)
        }
    }
}

/// Parse `args`, run the command, print its output and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be >= 1");
            return EXIT_CONFIG;
        }
        pool = pool.num_threads(jobs);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_INTERNAL;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(text) => {
            print!("{text}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_complete() {
        let c = default_config();
        assert_eq!(c.profiles.len(), 4);
        assert_eq!(c.optimizers, OptimizerSpec::standard_set());
        assert_eq!(c.problem.instance(), &GmvpInstance::default_instance());
        assert_eq!(c.landscape.unwrap().resolution, 50);
        let b = c.bench.unwrap();
        assert_eq!((b.runs, b.modes.len()), (10, 2));
    }

    #[test]
    fn thermal_b_preset_parameters() {
        let p = default_config().profile("thermal_b").unwrap();
        assert_eq!(p.profile, qaoa_gmvp::noise::NoiseProfile::thermal_b());
        let spec = ProfileSpec::from_named(&p);
        assert_eq!((spec.t1_us, spec.t2_us), (Some(80.0), Some(100.0)));
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(DEFAULT_CONFIG).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(matches!(RunConfig::parse(&v.to_string()), Err(Error::Json(_))));
        let mut v: serde_json::Value = serde_json::from_str(DEFAULT_CONFIG).unwrap();
        v["landscape"]["zoom"] = serde_json::json!(2);
        assert!(RunConfig::parse(&v.to_string()).is_err());
    }

    #[test]
    fn missing_theta_star_is_a_config_error() {
        let mut v: serde_json::Value = serde_json::from_str(DEFAULT_CONFIG).unwrap();
        v["landscape"].as_object_mut().unwrap().remove("theta_star");
        let err = RunConfig::parse(&v.to_string()).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_CONFIG);
    }

    #[test]
    fn geometry_must_match_instance() {
        let mut v: serde_json::Value = serde_json::from_str(DEFAULT_CONFIG).unwrap();
        v["geometry"]["m"] = serde_json::json!(4);
        let err = RunConfig::parse(&v.to_string())
            .unwrap()
            .resolve(Path::new("."))
            .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn mode_filter_selects_cells() {
        let c = default_config();
        let b = bench_config(&c, &[], &[Mode::Filtered], None, None).unwrap();
        assert_eq!(b.optimizers.len() * b.profiles.len() * b.modes.len(), 12);
        let b = bench_config(&c, &[], &[], None, None).unwrap();
        assert_eq!(b.optimizers.len() * b.profiles.len() * b.modes.len(), 24);
        assert!(bench_config(&c, &["nope".into()], &[], None, None).is_err());
    }

    #[test]
    fn oracle_reports_feasible_count() {
        let text = cmd_oracle(&GmvpInstance::default_instance());
        assert!(text.starts_with("feasible states: 220\n"), "{text}");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::Usage("x".into())), 2);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), 3);
    }
}
