//! Command-line interface: simulate coded snapshots, reconstruct them,
//! denoise cubes, and run the benchmark grid.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 IO or file-format error,
//! 3 numeric failure (non-finite values in a result).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use scitv::bench::{parse_grid, run_benchmark, BenchDefaults, Dataset};
use scitv::config::load_kv;
use scitv::error::Error;
use scitv::io::{load_cube, load_frame, save_cube, save_frame};
use scitv::sensing::{MaskCube, Measurement};
use scitv::sim::{generate_masks, generate_synthetic_scene, simulate_measurement, SceneKind};
use scitv::solve::{default_in_iter, reconstruct, Framework, SolveConfig};
use scitv::tv::{denoise, DenoiseConfig, TvVariant};
use scitv::VideoCube;

#[derive(Parser)]
#[command(name = "scitv", version, about = "TV reconstruction for video snapshot compressive imaging")]
struct Cli {
    /// Flat key=value file supplying defaults for any long flag; explicit
    /// flags always win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scene, masks and a coded measurement.
    Simulate(SimulateArgs),
    /// Reconstruct a video cube from one coded measurement.
    Reconstruct(ReconstructArgs),
    /// Run the framework x TV-variant grid over a dataset directory.
    Bench(BenchArgs),
    /// TV-denoise a cube from file.
    Denoise(DenoiseArgs),
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Bernoulli mask density in (0, 1].
    #[arg(long)]
    density: Option<f64>,
    #[arg(long = "noise-std")]
    noise_std: Option<f64>,
    /// moving-square or moving-gaussian.
    #[arg(long)]
    scene: Option<String>,
    /// Dataset name used as the file prefix (defaults to the scene kind).
    #[arg(long)]
    name: Option<String>,
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ReconstructArgs {
    #[arg(long)]
    measurement: Option<PathBuf>,
    #[arg(long)]
    masks: Option<PathBuf>,
    /// fista, twist, gap or admm.
    #[arg(long)]
    solver: Option<String>,
    /// One of the seven TV variants, e.g. atv-fgp or itv3d-cham.
    #[arg(long)]
    tv: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    #[arg(long = "in-iter")]
    in_iter: Option<usize>,
    /// Ground-truth cube; enables per-iteration PSNR in the trace.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Write a per-iteration CSV trace here.
    #[arg(long = "trace-out")]
    trace_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long = "datasets-dir")]
    datasets_dir: Option<PathBuf>,
    /// "full" or a comma-separated list of framework:tv pairs.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long = "report-out")]
    report_out: Option<PathBuf>,
    /// Cap on concurrent grid cells.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    #[arg(long = "in-iter")]
    in_iter: Option<usize>,
}

#[derive(clap::Args)]
struct DenoiseArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    tv: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long = "in-iter")]
    in_iter: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Flag resolution order: explicit CLI value, then config-file key (named
/// after the long flag), then built-in default.
struct Resolver {
    file: BTreeMap<String, String>,
}

impl Resolver {
    fn new(config: &Option<PathBuf>) -> Result<Self, Error> {
        let file = match config {
            Some(path) => load_kv(path)?,
            None => BTreeMap::new(),
        };
        Ok(Self { file })
    }

    fn lookup<T: FromStr>(&self, key: &str) -> Result<Option<T>, Error> {
        match self.file.get(key) {
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                Error::Config(format!("config key {key}: cannot parse {raw:?}"))
            }),
            None => Ok(None),
        }
    }

    fn get<T: FromStr>(&self, cli: Option<T>, key: &str, default: T) -> Result<T, Error> {
        match cli {
            Some(v) => Ok(v),
            None => Ok(self.lookup(key)?.unwrap_or(default)),
        }
    }

    fn get_opt<T: FromStr>(&self, cli: Option<T>, key: &str) -> Result<Option<T>, Error> {
        match cli {
            Some(v) => Ok(Some(v)),
            None => self.lookup(key),
        }
    }

    fn require<T: FromStr>(&self, cli: Option<T>, key: &str) -> Result<T, Error> {
        self.get_opt(cli, key)?
            .ok_or_else(|| Error::Parameter(format!("missing required flag --{key}")))
    }
}

fn main() {
    let code = match Cli::try_parse() {
        Ok(cli) => match run(cli) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {e}");
                exit_code(&e)
            }
        },
        Err(e) => {
            let informational = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            if informational {
                0
            } else {
                1
            }
        }
    };
    std::process::exit(code);
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_)
        | Error::BadMagic
        | Error::BadVersion(_)
        | Error::BadDtype(_)
        | Error::BadRank(_)
        | Error::ZeroDim
        | Error::TruncatedPayload { .. }
        | Error::TrailingBytes(_)
        | Error::NonFiniteInput { .. } => 2,
        Error::Numeric(_) => 3,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let resolver = Resolver::new(&cli.config)?;
    match cli.command {
        Command::Simulate(args) => run_simulate(args, &resolver),
        Command::Reconstruct(args) => run_reconstruct(args, &resolver),
        Command::Bench(args) => run_bench(args, &resolver),
        Command::Denoise(args) => run_denoise(args, &resolver),
    }
}

fn check_finite(cube: &VideoCube, what: &str) -> Result<(), Error> {
    if cube.all_finite() {
        Ok(())
    } else {
        Err(Error::Numeric(format!("{what} contains non-finite samples")))
    }
}

fn run_simulate(args: SimulateArgs, r: &Resolver) -> Result<(), Error> {
    let nx = r.get(args.nx, "nx", 64)?;
    let ny = r.get(args.ny, "ny", 64)?;
    let frames = r.get(args.frames, "frames", 8)?;
    let seed = r.get(args.seed, "seed", 0u64)?;
    let density = r.get(args.density, "density", 0.5)?;
    let noise_std = r.get(args.noise_std, "noise-std", 0.0)?;
    let scene: String = r.get(args.scene, "scene", "moving-square".into())?;
    let kind: SceneKind = scene.parse()?;
    let name: String = r.get(args.name, "name", scene.clone())?;
    let out_dir: PathBuf = r.require(args.out_dir, "out-dir")?;

    let truth = generate_synthetic_scene(nx, ny, frames, seed, kind)?;
    let masks = generate_masks(nx, ny, frames, seed.wrapping_add(1), density)?;
    let meas = simulate_measurement(&truth, &masks, noise_std, seed.wrapping_add(2))?;

    std::fs::create_dir_all(&out_dir)?;
    save_cube(out_dir.join(format!("{name}_truth.scit")), &truth)?;
    save_cube(out_dir.join(format!("{name}_masks.scit")), &masks.to_cube())?;
    save_frame(out_dir.join(format!("{name}_meas.scit")), meas.frame())?;
    println!(
        "wrote {name}_truth.scit, {name}_masks.scit, {name}_meas.scit ({nx}x{ny}x{frames}, \
         density {density}, noise std {noise_std}) to {}",
        out_dir.display()
    );
    Ok(())
}

fn build_solve_config(
    solver: Framework,
    tv: TvVariant,
    lambda: f64,
    rho: f64,
    max_iter: usize,
    in_iter: Option<usize>,
    reference: Option<VideoCube>,
) -> SolveConfig {
    let mut cfg = SolveConfig::new(solver, tv);
    cfg.lambda = lambda;
    cfg.rho = rho;
    cfg.max_iter = max_iter;
    cfg.in_iter = in_iter.unwrap_or_else(|| default_in_iter(tv));
    cfg.trace_psnr = reference.is_some();
    cfg.reference = reference;
    cfg
}

fn run_reconstruct(args: ReconstructArgs, r: &Resolver) -> Result<(), Error> {
    let measurement_path: PathBuf = r.require(args.measurement, "measurement")?;
    let masks_path: PathBuf = r.require(args.masks, "masks")?;
    let solver: String = r.require(args.solver, "solver")?;
    let tv: String = r.require(args.tv, "tv")?;
    let out: PathBuf = r.require(args.out, "out")?;
    let solver: Framework = solver.parse()?;
    let tv: TvVariant = tv.parse()?;
    let lambda = r.get(args.lambda, "lambda", 0.05)?;
    let rho = r.get(args.rho, "rho", 0.01)?;
    let max_iter = r.get(args.max_iter, "max-iter", 100)?;
    let in_iter = r.get_opt(args.in_iter, "in-iter")?;
    let reference_path: Option<PathBuf> = r.get_opt(args.reference, "reference")?;
    let trace_out: Option<PathBuf> = r.get_opt(args.trace_out, "trace-out")?;

    let y = Measurement::new(load_frame(&measurement_path)?);
    let masks = MaskCube::from_cube(load_cube(&masks_path)?)?;
    let reference = reference_path.map(load_cube).transpose()?;

    let cfg = build_solve_config(solver, tv, lambda, rho, max_iter, in_iter, reference);
    let (cube, trace) = reconstruct(&y, &masks, &cfg)?;
    check_finite(&cube, "reconstruction")?;

    save_cube(&out, &cube)?;
    if let Some(path) = trace_out {
        let file = std::fs::File::create(&path)?;
        trace.write_csv(std::io::BufWriter::new(file))?;
    }
    match trace.final_psnr() {
        Some(db) => println!(
            "reconstructed {} ({} iterations, final psnr {db:.2} dB)",
            out.display(),
            trace.len()
        ),
        None => println!("reconstructed {} ({} iterations)", out.display(), trace.len()),
    }
    Ok(())
}

fn run_bench(args: BenchArgs, r: &Resolver) -> Result<(), Error> {
    let datasets_dir: PathBuf = r.require(args.datasets_dir, "datasets-dir")?;
    let report_out: PathBuf = r.require(args.report_out, "report-out")?;
    let grid_spec: String = r.get(args.grid, "grid", "full".into())?;
    let workers: Option<usize> = r.get_opt(args.workers, "workers")?;

    let mut defaults = BenchDefaults::default();
    defaults.lambda = r.get(args.lambda, "lambda", defaults.lambda)?;
    defaults.rho = r.get(args.rho, "rho", defaults.rho)?;
    defaults.max_iter = r.get(args.max_iter, "max-iter", defaults.max_iter)?;
    defaults.in_iter = r.get_opt(args.in_iter, "in-iter")?;

    let grid = parse_grid(&grid_spec)?;
    let datasets = Dataset::discover(&datasets_dir)?;
    if datasets.is_empty() {
        return Err(Error::Config(format!(
            "no datasets (*_masks.scit) found under {}",
            datasets_dir.display()
        )));
    }
    let report = run_benchmark(&datasets, &grid, &defaults, workers)?;
    for name in report.skipped() {
        eprintln!("warning: dataset {name} has no ground truth; skipped");
    }
    if report.cells().iter().any(|c| !c.psnr_db.is_finite()) {
        return Err(Error::Numeric("benchmark produced non-finite PSNR".into()));
    }

    let file = std::fs::File::create(&report_out)?;
    report.write_csv(std::io::BufWriter::new(file))?;
    println!(
        "wrote {} ({} cells, {} datasets)",
        report_out.display(),
        report.cells().len(),
        report.datasets().len()
    );
    if let Some((fw, tv, avg)) = report.best_average() {
        println!("best average: {fw}/{tv} at {avg:.2} dB");
    }
    Ok(())
}

fn run_denoise(args: DenoiseArgs, r: &Resolver) -> Result<(), Error> {
    let input: PathBuf = r.require(args.input, "in")?;
    let tv: String = r.require(args.tv, "tv")?;
    let out: PathBuf = r.require(args.out, "out")?;
    let tv: TvVariant = tv.parse()?;
    let lambda = r.get(args.lambda, "lambda", 0.05)?;
    let in_iter = r
        .get_opt(args.in_iter, "in-iter")?
        .unwrap_or_else(|| default_in_iter(tv));

    let cube = load_cube(&input)?;
    let cfg = DenoiseConfig::new(lambda, in_iter);
    let result = denoise(&cube, tv, &cfg)?;
    check_finite(&result, "denoised cube")?;
    save_cube(&out, &result)?;
    let before = scitv::tv_norm(&cube, tv.norm());
    let after = scitv::tv_norm(&result, tv.norm());
    println!("denoised {} (tv {before:.4} -> {after:.4})", out.display());
    Ok(())
}
