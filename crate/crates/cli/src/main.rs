//! `rbfshapenet` command-line front end.

mod bench;
mod error;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rbfshapenet::neural::features::{DistanceTransform, FeatureMode, FeatureSpec};
use rbfshapenet::neural::train::{fraction_in_band, initial_model, predicted_conds, train_with_progress};
use rbfshapenet::neural::{load_model, save_model, stencil_cond, Dataset, TrainConfig};
use rbfshapenet::{KernelFamily, PointSet};

use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "rbfshapenet", version, about = "RBF shape parameters: datasets, training, prediction, benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Kernel family: imq or gaussian.
    #[arg(long, global = true, default_value = "imq", value_parser = parse_kernel)]
    kernel: KernelFamily,
    /// Shape strategy; repeat for several (benchmarks only).
    #[arg(long = "strategy", global = true)]
    strategies: Vec<String>,
    /// RNG seed (datasets, training) or layout seed (jittered benchmarks).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 1 disables parallel evaluation.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output path: dataset dir, model file or benchmark dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate random training/validation stencils.
    GenData(GenDataArgs),
    /// Train a network on a generated dataset.
    Train(TrainArgs),
    /// Predict ε (and the resulting cond) for one stencil.
    Predict(PredictArgs),
    /// Interpolation ladder of a registered case.
    InterpBench(InterpArgs),
    /// Heat equation ladder with the three-point baseline.
    HeatBench(HeatArgs),
    /// 2D Poisson ladder.
    PoissonBench(PoissonArgs),
}

#[derive(Args, Debug)]
struct GenDataArgs {
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// distance or coordinate
    #[arg(long, default_value = "distance")]
    mode: String,
    /// inverse or log_inverse (distance features)
    #[arg(long, default_value = "log_inverse")]
    transform: String,
    /// Stencil size.
    #[arg(long, short = 'n', default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 4400)]
    train: usize,
    #[arg(long, default_value_t = 1100)]
    valid: usize,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Dataset directory written by gen-data.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    max_epochs: Option<usize>,
    /// Relative step of the dC/dε difference quotient.
    #[arg(long)]
    fd_step: Option<f64>,
    /// Stop once the median validation cond is within 10^(12±0.5).
    #[arg(long)]
    median_stop: bool,
    /// Print a progress line every this many epochs (0: silent).
    #[arg(long, default_value_t = 100)]
    log_every: usize,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Stencil file: one point per line (`x` or `x y`).
    #[arg(long)]
    file: Option<PathBuf>,
    /// Inline points: `x` in 1D, `x,y` in 2D.
    #[arg(allow_hyphen_values = true)]
    points: Vec<String>,
}

#[derive(Args, Debug)]
struct LadderArgs {
    /// Comma-separated rungs (node counts in 1D, grid sides in 2D).
    #[arg(long, value_delimiter = ',')]
    ladder: Option<Vec<usize>>,
}

#[derive(Args, Debug)]
struct InterpArgs {
    /// Case id, e.g. f1-equi, f2-nonequi, interp2d-f3, interp2d-f4-alpha0.1.
    #[arg(long)]
    case: String,
    #[command(flatten)]
    ladder: LadderArgs,
}

#[derive(Args, Debug)]
struct HeatArgs {
    /// quad or sine
    #[arg(long, default_value = "quad")]
    ic: String,
    /// equi or nonequi
    #[arg(long, default_value = "equi")]
    points: String,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[command(flatten)]
    ladder: LadderArgs,
}

#[derive(Args, Debug)]
struct PoissonArgs {
    #[command(flatten)]
    ladder: LadderArgs,
}

fn parse_kernel(s: &str) -> Result<KernelFamily, String> {
    s.parse().map_err(|e: rbfshapenet::Error| e.to_string())
}

/// Effective thread count; `RBFSN_DETERMINISTIC=1` forces one.
fn configure_threads(requested: Option<usize>) -> CliResult<usize> {
    let deterministic = std::env::var("RBFSN_DETERMINISTIC").is_ok_and(|v| v == "1");
    let threads = if deterministic { Some(1) } else { requested };
    if threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    if let Some(k) = threads {
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    Ok(rayon::current_num_threads())
}

fn require_out(g: &Global) -> CliResult<&Path> {
    g.out
        .as_deref()
        .ok_or_else(|| CliError::Usage("--out is required for this command".into()))
}

fn gen_data(g: &Global, a: &GenDataArgs) -> CliResult<()> {
    let out = require_out(g)?;
    let mode: FeatureMode = a.mode.parse()?;
    let transform: DistanceTransform = a.transform.parse()?;
    let spec = FeatureSpec::new(a.dim, mode, transform, a.n)?;
    let data = Dataset::generate(spec, a.train, a.valid, g.seed.unwrap_or(42))?;
    data.save_dir(out).map_err(|e| CliError::at(out, e))?;
    println!(
        "wrote {} train + {} valid stencils (feature dim {}) to {}",
        data.train.len(),
        data.valid.len(),
        data.spec.input_dim(),
        out.display()
    );
    Ok(())
}

fn trace_path(model: &Path) -> PathBuf {
    model.with_extension("trace.csv")
}

fn train_cmd(g: &Global, a: &TrainArgs, threads: usize) -> CliResult<()> {
    let out = require_out(g)?;
    let data = Dataset::load_dir(&a.data).map_err(|e| CliError::at(&a.data, e))?;
    let mut cfg = TrainConfig {
        seed: g.seed.unwrap_or(42),
        parallel: threads > 1,
        train_samples: data.train.len(),
        valid_samples: data.valid.len(),
        ..TrainConfig::default()
    };
    if let Some(v) = a.lr {
        cfg.learning_rate = v;
    }
    if let Some(v) = a.beta {
        cfg.reg_beta = v;
    }
    if let Some(v) = a.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = a.patience {
        cfg.patience = v;
    }
    if let Some(v) = a.max_epochs {
        cfg.max_epochs = v;
    }
    if let Some(v) = a.fd_step {
        cfg.fd_rel_step = v;
    }
    if a.median_stop {
        cfg = cfg.with_median_cond_stop();
    }
    cfg.validate()?;

    let init = initial_model(&data, g.kernel, &cfg.band, cfg.seed);
    let init_eps = init.output_map.apply(init.layers.last().map_or(0.0, |l| l.bias[0]));
    let log_every = a.log_every;
    let (mut model, trace) = train_with_progress(init, &data, &cfg, |s| {
        if log_every > 0 && s.epoch % log_every == 0 {
            eprintln!("epoch {:5}  train {:.5}  valid {:.5}", s.epoch, s.train_loss, s.valid_loss);
        }
    })?;
    let conds = predicted_conds(&model, &data.valid, cfg.parallel)?;
    let frac = fraction_in_band(&conds, cfg.band.lower, cfg.band.cap);

    for (k, v) in [
        ("kernel", g.kernel.name().to_string()),
        ("learning_rate", cfg.learning_rate.to_string()),
        ("reg_beta", cfg.reg_beta.to_string()),
        ("batch_size", cfg.batch_size.to_string()),
        ("patience", cfg.patience.to_string()),
        ("max_epochs", cfg.max_epochs.to_string()),
        ("fd_rel_step", cfg.fd_rel_step.to_string()),
        ("seed", cfg.seed.to_string()),
        ("train_samples", data.train.len().to_string()),
        ("valid_samples", data.valid.len().to_string()),
        ("init_eps", init_eps.to_string()),
        ("best_epoch", trace.best_epoch.to_string()),
        ("epochs_run", trace.valid_loss.len().to_string()),
        ("stop_reason", trace.stop_reason.name().to_string()),
        ("valid_fraction_in_band", format!("{frac:.4}")),
    ] {
        model.set_provenance(k, v);
    }
    save_model(&model, out).map_err(|e| CliError::at(out, e))?;

    let mut csv = String::from("epoch,train_loss,valid_loss\n");
    for (i, (t, v)) in trace.train_loss.iter().zip(&trace.valid_loss).enumerate() {
        let _ = writeln!(csv, "{},{t:e},{v:e}", i + 1);
    }
    let tp = trace_path(out);
    fs::write(&tp, csv).map_err(|e| CliError::at(&tp, e.into()))?;
    println!(
        "best epoch {} of {} ({}), {:.1}% of validation stencils in band; model {}",
        trace.best_epoch,
        trace.valid_loss.len(),
        trace.stop_reason.name(),
        100.0 * frac,
        out.display()
    );
    Ok(())
}

fn parse_point(tok: &str, dim: usize) -> CliResult<[f64; 2]> {
    let bad = || CliError::Usage(format!("cannot parse point `{tok}`"));
    let v: Vec<f64> = tok
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| bad()))
        .collect::<CliResult<_>>()?;
    match (dim, v.as_slice()) {
        (1, [x]) => Ok([*x, 0.0]),
        (2, [x, y]) => Ok([*x, *y]),
        _ => Err(CliError::Usage(format!("point `{tok}` does not have {dim} coordinate(s)"))),
    }
}

fn predict(a: &PredictArgs) -> CliResult<()> {
    let model = load_model(&a.model).map_err(|e| CliError::at(&a.model, e))?;
    let dim = model.dim();
    let mut tokens: Vec<String> = a.points.clone();
    if let Some(f) = &a.file {
        let text = fs::read_to_string(f).map_err(|e| CliError::at(f, e.into()))?;
        tokens.extend(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(String::from),
        );
    }
    if tokens.is_empty() {
        return Err(CliError::Usage("no stencil points given".into()));
    }
    let pts: Vec<[f64; 2]> = tokens.iter().map(|t| parse_point(t, dim)).collect::<CliResult<_>>()?;
    let stencil = if dim == 1 {
        PointSet::new_1d(&pts.iter().map(|p| p[0]).collect::<Vec<_>>())?
    } else {
        PointSet::new_2d(pts)?
    };
    let eps = model.predict(&stencil)?;
    // the model's own kernel; --kernel does not apply here
    let cond = stencil_cond(&stencil, model.kernel_family, eps);
    println!("eps {eps:e}");
    println!("cond {cond:e}");
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let threads = configure_threads(cli.global.threads)?;
    let g = &cli.global;
    match &cli.command {
        Command::GenData(a) => gen_data(g, a),
        Command::Train(a) => train_cmd(g, a, threads),
        Command::Predict(a) => predict(a),
        Command::InterpBench(a) => bench::interp(g, a, threads),
        Command::HeatBench(a) => bench::heat(g, a, threads),
        Command::PoissonBench(a) => bench::poisson(g, a, threads),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
