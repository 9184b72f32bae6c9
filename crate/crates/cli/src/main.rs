//! Command-line front end: simulation, classification, ergodic-average
//! experiments, and strong-order checks, with deterministic outputs and
//! manifest-based replay.

mod commands;
mod outputs;
mod params;
mod svg;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use commands::{cmd_classify, cmd_ergodic, cmd_order_check, cmd_simulate, EXIT_USAGE};
use ergodiff::sde_integrator::Scheme;
use params::{
    env_default_seed, parse_centers, parse_point, ClassifyParams, ErgodicParams,
    OrderCheckParams, RunManifest, RunParams, SimulateParams, DEFAULT_CENTERS,
};

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    Scheme::parse(s).ok_or_else(|| {
        format!("unknown scheme {s:?}; expected taylor15_full, taylor15_diagonal or euler")
    })
}

#[derive(Parser)]
#[command(
    name = "ergodiff",
    version,
    about = "Simulate a 2-D diffusion with polynomial drift, evaluate radial \
             recurrence criteria, and estimate ergodic time averages.",
    after_help = "The ERGODIFF_SEED environment variable provides the default \
                  master seed.\nExit codes: 0 ok, 2 usage or configuration \
                  error, 3 numerical failure."
)]
struct Cli {
    /// Bound on concurrent trajectory workers (outputs do not depend on it).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonIo {
    /// Output directory.
    #[arg(long, default_value = "ergodiff-out")]
    out_dir: PathBuf,
    /// Optional TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replay a recorded run: all parameters come from the manifest
    /// (only --out-dir and --workers still apply).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SimulateArgs {
    /// Drift field: z4 | zero | grad-r4 | path to a field JSON file.
    #[arg(long, required_unless_present_any = ["manifest", "config"])]
    field: Option<String>,
    /// Starting point "x1,x2".
    #[arg(long)]
    start: Option<String>,
    /// Time step.
    #[arg(long)]
    delta: Option<f64>,
    /// Total process time.
    #[arg(long, visible_alias = "T")]
    horizon: Option<f64>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Integration scheme: taylor15_full | taylor15_diagonal | euler.
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<Scheme>,
    /// Steps between recorded checkpoints.
    #[arg(long)]
    stride: Option<u64>,
    /// Explosion guard radius.
    #[arg(long)]
    guard: Option<f64>,
    #[command(flatten)]
    io: CommonIo,
}

#[derive(Args, Clone)]
struct ClassifyArgs {
    /// Built-in profile: brownian | power-well | power-attract | z4.
    #[arg(long, required_unless_present_any = ["field_file", "manifest", "config"])]
    profile: Option<String>,
    /// Dimension for the built-in profiles.
    #[arg(long)]
    dim: Option<usize>,
    /// Power-law exponent for the gradient profiles.
    #[arg(long)]
    alpha: Option<f64>,
    /// Classify a concrete field from its JSON definition instead of a
    /// built-in profile (envelopes sampled on circles).
    #[arg(long)]
    field_file: Option<PathBuf>,
    /// Circle sample count for sampled envelopes.
    #[arg(long)]
    n_angles: Option<usize>,
    /// Base radius r0 of the criteria.
    #[arg(long)]
    r0: Option<f64>,
    /// Doublings in the N-schedule.
    #[arg(long)]
    doublings: Option<u32>,
    #[command(flatten)]
    io: CommonIo,
}

#[derive(Args, Clone)]
struct ErgodicArgs {
    /// Drift field: z4 | zero | grad-r4 | path to a field JSON file.
    #[arg(long)]
    field: Option<String>,
    /// Ball centers, "x,y;x,y;...". Default: the seven reference centers.
    #[arg(long)]
    centers: Option<String>,
    /// Ball radius.
    #[arg(long)]
    radius: Option<f64>,
    /// Trajectories per center.
    #[arg(long)]
    n_traj: Option<usize>,
    /// Total process time per trajectory.
    #[arg(long, visible_alias = "T")]
    horizon: Option<f64>,
    /// Time step.
    #[arg(long)]
    delta: Option<f64>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Integration scheme.
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<Scheme>,
    /// Steps between recorded checkpoints.
    #[arg(long)]
    stride: Option<u64>,
    /// Explosion guard radius.
    #[arg(long)]
    guard: Option<f64>,
    /// Half-width of the centered starting box.
    #[arg(long)]
    start_box: Option<f64>,
    #[command(flatten)]
    io: CommonIo,
}

#[derive(Args, Clone)]
struct OrderCheckArgs {
    /// Drift field: z4 | zero | grad-r4 | path to a field JSON file.
    #[arg(long)]
    field: Option<String>,
    /// Starting point "x1,x2".
    #[arg(long)]
    start: Option<String>,
    /// Total process time.
    #[arg(long, visible_alias = "T")]
    horizon: Option<f64>,
    /// Coarsest tested step is horizon / 2^coarsest_exp.
    #[arg(long)]
    coarsest_exp: Option<u32>,
    /// Finest tested step is horizon / 2^finest_exp.
    #[arg(long)]
    finest_exp: Option<u32>,
    /// Reference step is horizon / 2^ref_exp.
    #[arg(long)]
    ref_exp: Option<u32>,
    /// Sample paths.
    #[arg(long)]
    n_paths: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    io: CommonIo,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one trajectory and write it as CSV.
    Simulate(SimulateArgs),
    /// Evaluate the recurrence/transience/finite-measure criteria.
    Classify(ClassifyArgs),
    /// Run ergodic-average ensembles and emit series, summary, and charts.
    Ergodic(ErgodicArgs),
    /// Measure strong convergence order of both schemes.
    OrderCheck(OrderCheckArgs),
}

/// Values loaded from a TOML config file (all optional; flags win).
struct FileConfig(toml::Table);

impl FileConfig {
    fn load(path: Option<&PathBuf>) -> Result<Self> {
        match path {
            None => Ok(FileConfig(toml::Table::new())),
            Some(p) => {
                let raw = std::fs::read_to_string(p)
                    .with_context(|| format!("read config file {}", p.display()))?;
                Ok(FileConfig(raw.parse().with_context(|| format!("parse {}", p.display()))?))
            }
        }
    }

    fn f64(&self, key: &str) -> Option<f64> {
        self.0
            .get(key)
            .and_then(|v| v.as_float().or_else(|| v.as_integer().map(|i| i as f64)))
    }

    fn u64(&self, key: &str) -> Option<u64> {
        self.0.get(key).and_then(|v| v.as_integer()).map(|i| i as u64)
    }

    fn usize(&self, key: &str) -> Option<usize> {
        self.0.get(key).and_then(|v| v.as_integer()).map(|i| i as usize)
    }

    fn string(&self, key: &str) -> Option<String> {
        self.0.get(key).and_then(|v| v.as_str()).map(str::to_string)
    }

    fn point(&self, key: &str) -> Result<Option<[f64; 2]>> {
        match self.string(key) {
            Some(s) => Ok(Some(parse_point(&s)?)),
            None => Ok(None),
        }
    }
}

fn resolve_seed(flag: Option<u64>, file: &FileConfig) -> Result<u64> {
    match flag.or_else(|| file.u64("seed")) {
        Some(s) => Ok(s),
        None => env_default_seed(),
    }
}

fn resolve_scheme(flag: Option<Scheme>, file: &FileConfig) -> Result<Scheme> {
    match flag {
        Some(s) => Ok(s),
        None => match file.string("scheme") {
            Some(s) => parse_scheme(&s).map_err(|e| anyhow::anyhow!(e)),
            None => Ok(Scheme::Taylor15Full),
        },
    }
}

fn manifest_params(io: &CommonIo) -> Result<Option<RunParams>> {
    match &io.manifest {
        Some(path) => Ok(Some(RunManifest::read(path)?.params)),
        None => Ok(None),
    }
}

fn simulate_params(args: &SimulateArgs) -> Result<SimulateParams> {
    let file = FileConfig::load(args.io.config.as_ref())?;
    let field = match args.field.clone().or_else(|| file.string("field")) {
        Some(f) => f,
        None => bail!("--field is required"),
    };
    let start = match &args.start {
        Some(s) => parse_point(s)?,
        None => file.point("start")?.unwrap_or([0.0, 0.0]),
    };
    Ok(SimulateParams {
        field,
        start,
        delta: args.delta.or_else(|| file.f64("delta")).unwrap_or(1e-4),
        horizon: args.horizon.or_else(|| file.f64("horizon")).unwrap_or(1.0),
        seed: resolve_seed(args.seed, &file)?,
        scheme: resolve_scheme(args.scheme, &file)?,
        stride: args.stride.or_else(|| file.u64("stride")).unwrap_or(100),
        guard_radius: args.guard.or_else(|| file.f64("guard")).unwrap_or(1e6),
    })
}

fn classify_params(args: &ClassifyArgs) -> Result<ClassifyParams> {
    let file = FileConfig::load(args.io.config.as_ref())?;
    let field_file =
        args.field_file.clone().or_else(|| file.string("field_file").map(PathBuf::from));
    let profile = match args.profile.clone().or_else(|| file.string("profile")) {
        Some(p) => p,
        None if field_file.is_some() => "sampled".to_string(),
        None => bail!("--profile or --field-file is required"),
    };
    Ok(ClassifyParams {
        profile,
        dim: args.dim.or_else(|| file.usize("dim")).unwrap_or(2),
        alpha: args.alpha.or_else(|| file.f64("alpha")).unwrap_or(1.0),
        field_file,
        n_angles: args.n_angles.or_else(|| file.usize("n_angles")).unwrap_or(256),
        r0: args.r0.or_else(|| file.f64("r0")).unwrap_or(1.0),
        doublings: args
            .doublings
            .or_else(|| file.u64("doublings").map(|v| v as u32))
            .unwrap_or(30),
    })
}

fn ergodic_params(args: &ErgodicArgs) -> Result<ErgodicParams> {
    let file = FileConfig::load(args.io.config.as_ref())?;
    let centers = match args.centers.clone().or_else(|| file.string("centers")) {
        Some(s) => parse_centers(&s)?,
        None => DEFAULT_CENTERS.to_vec(),
    };
    Ok(ErgodicParams {
        field: args.field.clone().or_else(|| file.string("field")).unwrap_or_else(|| "z4".into()),
        centers,
        radius: args.radius.or_else(|| file.f64("radius")).unwrap_or(1.0),
        n_traj: args.n_traj.or_else(|| file.usize("n_traj")).unwrap_or(8),
        horizon: args.horizon.or_else(|| file.f64("horizon")).unwrap_or(100.0),
        delta: args.delta.or_else(|| file.f64("delta")).unwrap_or(1e-4),
        seed: resolve_seed(args.seed, &file)?,
        scheme: resolve_scheme(args.scheme, &file)?,
        stride: args.stride.or_else(|| file.u64("stride")).unwrap_or(100),
        guard_radius: args.guard.or_else(|| file.f64("guard")).unwrap_or(1e6),
        start_box: args.start_box.or_else(|| file.f64("start_box")).unwrap_or(10.0),
    })
}

fn order_check_params(args: &OrderCheckArgs) -> Result<OrderCheckParams> {
    let file = FileConfig::load(args.io.config.as_ref())?;
    let start = match &args.start {
        Some(s) => parse_point(s)?,
        None => file.point("start")?.unwrap_or([0.5, 0.0]),
    };
    Ok(OrderCheckParams {
        field: args.field.clone().or_else(|| file.string("field")).unwrap_or_else(|| "z4".into()),
        start,
        horizon: args.horizon.or_else(|| file.f64("horizon")).unwrap_or(0.5),
        coarsest_exp: args
            .coarsest_exp
            .or_else(|| file.u64("coarsest_exp").map(|v| v as u32))
            .unwrap_or(6),
        finest_exp: args
            .finest_exp
            .or_else(|| file.u64("finest_exp").map(|v| v as u32))
            .unwrap_or(10),
        ref_exp: args.ref_exp.or_else(|| file.u64("ref_exp").map(|v| v as u32)).unwrap_or(14),
        n_paths: args.n_paths.or_else(|| file.usize("n_paths")).unwrap_or(200),
        seed: resolve_seed(args.seed, &file)?,
    })
}

fn run(cli: Cli) -> Result<i32> {
    if let Some(k) = cli.workers {
        if k == 0 {
            bail!("--workers must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .context("initialize worker pool")?;
    }
    match &cli.command {
        Command::Simulate(args) => {
            let params = match manifest_params(&args.io)? {
                Some(RunParams::Simulate(p)) => p,
                Some(_) => bail!("manifest does not describe a simulate run"),
                None => simulate_params(args)?,
            };
            cmd_simulate(&params, &args.io.out_dir)
        }
        Command::Classify(args) => {
            let params = match manifest_params(&args.io)? {
                Some(RunParams::Classify(p)) => p,
                Some(_) => bail!("manifest does not describe a classify run"),
                None => classify_params(args)?,
            };
            cmd_classify(&params, &args.io.out_dir)
        }
        Command::Ergodic(args) => {
            let params = match manifest_params(&args.io)? {
                Some(RunParams::Ergodic(p)) => p,
                Some(_) => bail!("manifest does not describe an ergodic run"),
                None => ergodic_params(args)?,
            };
            cmd_ergodic(&params, &args.io.out_dir)
        }
        Command::OrderCheck(args) => {
            let params = match manifest_params(&args.io)? {
                Some(RunParams::OrderCheck(p)) => p,
                Some(_) => bail!("manifest does not describe an order-check run"),
                None => order_check_params(args)?,
            };
            cmd_order_check(&params, &args.io.out_dir)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(EXIT_USAGE);
        }
    }
}
