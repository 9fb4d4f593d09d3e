//! `rsr`: generate datasets, fit estimators, run oracles, diagnostics and sweeps.
//!
//! Exit codes: 0 on success, 1 for configuration or input errors, 2 for runtime
//! errors, 3 when `oracle` finds a degenerate instance.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rsr::dataset::{self, LabeledDataset, NoiseKind, NoiseSpec, Truth};
use rsr::diagnostics;
use rsr::estimators::{self, AffinePipelineConfig, FitTrace, RansacConfig, Schedule, SggdConfig};
use rsr::harness::{self, fmt_float, ExperimentConfig};
use rsr::oracles::{self, WellDefinedness};
use rsr::{RsrError, Subspace};

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;

#[derive(Parser)]
#[command(name = "rsr", version, about = "Robust subspace recovery under adversarial outliers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated dataset file.
    Gen(GenArgs),
    /// Fit one estimator to a dataset file.
    Fit(FitArgs),
    /// Exact small-instance checks (N <= 25).
    Oracle(OracleArgs),
    /// Stability statistics of a labeled dataset.
    Diag(DiagArgs),
    /// Run a Monte Carlo sweep from a TOML config.
    Sweep(SweepArgs),
    /// Locate phase transitions in a sweep summary.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Adversarial,
    Haystack,
    Affine,
    SplitAxes,
    HeavyAxis,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "adversarial")]
    model: Model,
    #[arg(long = "ambient-dim", short = 'D')]
    ambient_dim: usize,
    #[arg(long = "dim", short = 'd')]
    dim: usize,
    #[arg(long)]
    n_in: usize,
    #[arg(long)]
    n_out: usize,
    /// Norm of the adversarial outliers.
    #[arg(long, default_value_t = 1.0)]
    magnitude: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma_in: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma_out: f64,
    #[arg(long, default_value_t = 0.0)]
    noise_eps: f64,
    /// none, gaussian-clipped or uniform-ball.
    #[arg(long, default_value = "uniform-ball")]
    noise_kind: NoiseKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Estimator {
    Spca,
    Sggd,
    Ransac,
    AffineSggd,
    RansacAffine,
}

impl Estimator {
    fn name(self) -> &'static str {
        match self {
            Estimator::Spca => "spca",
            Estimator::Sggd => "sggd",
            Estimator::Ransac => "ransac",
            Estimator::AffineSggd => "affine-sggd",
            Estimator::RansacAffine => "ransac-affine",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleKind {
    Piecewise,
    Sqrt,
}

#[derive(Args)]
struct FitArgs {
    data: PathBuf,
    #[arg(long, value_enum, default_value = "sggd")]
    estimator: Estimator,
    /// Subspace dimension; defaults to the dimension of the stored truth.
    #[arg(long = "dim", short = 'd')]
    dim: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    #[arg(long, value_enum, default_value = "piecewise")]
    schedule: ScheduleKind,
    #[arg(long, default_value_t = 0.1)]
    s0: f64,
    #[arg(long, default_value_t = 0.5)]
    shrink_factor: f64,
    #[arg(long, default_value_t = 10)]
    patience: usize,
    #[arg(long, default_value_t = 1e-11)]
    converge_tol: f64,
    #[arg(long, default_value_t = 0.0)]
    tau: f64,
    /// Consensus needed for early exit; default N/2.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    max_trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV with columns iter,energy,theta1,step,gradnorm.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    data: PathBuf,
    #[arg(long = "dim", short = 'd')]
    dim: Option<usize>,
}

#[derive(Args)]
struct DiagArgs {
    data: PathBuf,
    /// Radius of the ball around the truth; default arccos(1/sqrt(3)).
    #[arg(long)]
    gamma: Option<f64>,
    /// Also estimate the sup over the ball from this many random subspaces.
    #[arg(long)]
    sup_samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Append one row to this CSV (header written when the file is new).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    config: PathBuf,
    /// Overrides `base_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output_dir`.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    summary: PathBuf,
    /// Summary column holding the predicted threshold.
    #[arg(long, default_value = "sggd_bound")]
    threshold: String,
    /// Write one recovery curve CSV per sweep line into this directory.
    #[arg(long)]
    curves: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Runtime(String),
    Degenerate,
}

impl From<RsrError> for Failure {
    fn from(e: RsrError) -> Self {
        match e {
            RsrError::Config { .. } | RsrError::Parse { .. } | RsrError::InvalidArgument { .. } => {
                Failure::Config(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Fit(a) => fit(a),
        Command::Oracle(a) => oracle(a),
        Command::Diag(a) => diag(a),
        Command::Sweep(a) => sweep(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_RUNTIME)
        }
        Err(Failure::Degenerate) => ExitCode::from(EXIT_DEGENERATE),
    }
}

fn load(path: &Path) -> Result<LabeledDataset, Failure> {
    dataset::load_dataset(path).map_err(|e| match e {
        RsrError::Io(io) => Failure::Config(format!("{}: {io}", path.display())),
        RsrError::Parse { line, message } => Failure::Config(format!("{}:{line}: {message}", path.display())),
        other => other.into(),
    })
}

fn resolve_dim(ds: &LabeledDataset, dim: Option<usize>) -> Result<usize, Failure> {
    dim.or_else(|| ds.truth.as_ref().map(Truth::dim))
        .ok_or_else(|| Failure::Config("--dim is required when the dataset has no truth".into()))
}

fn gen(a: GenArgs) -> CliResult {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let ds = match a.model {
        Model::Adversarial => dataset::gen_adversarial(a.ambient_dim, a.dim, a.n_in, a.n_out, a.magnitude, &mut rng)?,
        Model::Haystack => dataset::gen_haystack(
            a.ambient_dim,
            a.dim,
            a.n_in,
            a.n_out,
            a.sigma_in,
            a.sigma_out,
            &mut rng,
        )?,
        Model::Affine => dataset::gen_affine_adversarial(a.ambient_dim, a.dim, a.n_in, a.n_out, a.magnitude, &mut rng)?,
        Model::SplitAxes => dataset::fixture_split_axes(a.dim, a.ambient_dim, a.n_in, a.n_out)?,
        Model::HeavyAxis => dataset::fixture_heavy_axis(a.dim, a.ambient_dim, a.n_in, a.n_out)?,
    };
    let ds = if a.noise_eps > 0.0 {
        let spec = NoiseSpec {
            epsilon: a.noise_eps,
            kind: a.noise_kind,
        };
        dataset::add_noise(&ds, spec, &mut rng)?
    } else {
        ds
    };
    dataset::save_dataset(&ds, &a.out)?;
    println!(
        "wrote {} ambient_dim={} n_in={} n_out={} snr={}",
        a.out.display(),
        ds.ambient_dim(),
        ds.n_in(),
        ds.n_out(),
        fmt_float(ds.snr())
    );
    Ok(())
}

struct FitSummary {
    theta1: Option<f64>,
    offset_error: Option<f64>,
    energy: f64,
    iterations: usize,
    consensus: Option<usize>,
    trace: Option<FitTrace>,
}

fn linear_theta(fit: &Subspace, truth: Option<&Subspace>) -> Result<Option<f64>, Failure> {
    Ok(match truth {
        Some(t) => Some(fit.distance(t)?),
        None => None,
    })
}

fn fit(a: FitArgs) -> CliResult {
    let ds = load(&a.data)?;
    let d = resolve_dim(&ds, a.dim)?;
    let schedule = match a.schedule {
        ScheduleKind::Piecewise => Schedule::Piecewise {
            s0: a.s0,
            shrink_factor: a.shrink_factor,
            patience: a.patience,
        },
        ScheduleKind::Sqrt => Schedule::Sqrt { s0: a.s0 },
    };
    let sggd_cfg = SggdConfig {
        max_iter: a.max_iter,
        schedule,
        converge_tol: a.converge_tol,
        ..SggdConfig::default()
    };
    let ransac_cfg = RansacConfig {
        tau: a.tau,
        m: a.m,
        max_trials: a.max_trials,
        seed: a.seed,
    };
    let truth = ds.truth_subspace().filter(|t| t.dim() == d);
    let x = &ds.points;
    let start = Instant::now();
    let out = match a.estimator {
        Estimator::Spca => {
            let f = estimators::spca(x, d)?;
            FitSummary {
                theta1: linear_theta(&f.subspace, truth)?,
                offset_error: None,
                energy: estimators::lad_energy(x, &f.subspace)?,
                iterations: 0,
                consensus: None,
                trace: None,
            }
        }
        Estimator::Sggd => {
            let init = estimators::spca(x, d)?.subspace;
            let f = estimators::sggd_traced(x, d, &init, &sggd_cfg, truth)?;
            FitSummary {
                theta1: linear_theta(&f.subspace, truth)?,
                offset_error: None,
                energy: f.energy,
                iterations: f.iterations,
                consensus: None,
                trace: Some(f.trace),
            }
        }
        Estimator::Ransac => {
            let f = estimators::ransac_rsr_traced(x, d, &ransac_cfg, truth)?;
            FitSummary {
                theta1: linear_theta(&f.subspace, truth)?,
                offset_error: None,
                energy: (ds.len() - f.consensus) as f64,
                iterations: f.trials,
                consensus: Some(f.consensus),
                trace: Some(f.trace),
            }
        }
        Estimator::AffineSggd | Estimator::RansacAffine => {
            let (fitted, energy, iterations, consensus, trace) = if let Estimator::AffineSggd = a.estimator {
                let cfg = AffinePipelineConfig {
                    sggd: sggd_cfg,
                    ..AffinePipelineConfig::default()
                };
                let f = estimators::affine_sggd_pipeline(x, d, &cfg, Some(&ds.inlier_mask), truth)?;
                (f.subspace, f.energy, f.iterations, None, f.trace)
            } else {
                let f = estimators::ransac_affine(x, d, &ransac_cfg)?;
                let energy = (ds.len() - f.consensus) as f64;
                (f.subspace, energy, f.trials, Some(f.consensus), f.trace)
            };
            let (theta1, offset_error) = match &ds.truth {
                Some(Truth::Affine(t)) if t.linear().dim() == d => (
                    Some(fitted.linear().distance(t.linear())?),
                    Some((fitted.offset() - t.offset()).norm()),
                ),
                _ => (None, None),
            };
            FitSummary {
                theta1,
                offset_error,
                energy,
                iterations,
                consensus,
                trace: Some(trace),
            }
        }
    };
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    if let Some(path) = &a.trace {
        match &out.trace {
            Some(t) => t.write_csv(BufWriter::new(File::create(path)?))?,
            None => return Err(Failure::Config("spca is not iterative and has no trace".into())),
        }
    }
    let mut line = format!("estimator={}", a.estimator.name());
    if let Some(t) = out.theta1 {
        line += &format!(" theta1={}", fmt_float(t));
    }
    if let Some(e) = out.offset_error {
        line += &format!(" offset_error={}", fmt_float(e));
    }
    line += &format!(" energy={} iterations={}", fmt_float(out.energy), out.iterations);
    if let Some(c) = out.consensus {
        line += &format!(" consensus={c}");
    }
    line += &format!(" wall_ms={wall_ms:.3}");
    println!("{line}");
    Ok(())
}

fn oracle(a: OracleArgs) -> CliResult {
    let ds = load(&a.data)?;
    let d = resolve_dim(&ds, a.dim)?;
    let l0 = oracles::l0_bruteforce(&ds.points, d)?;
    let th = oracles::snr_and_thresholds(&ds, d)?;
    let mut line = format!(
        "status={} best_count={} co_maximizers={} truncated={}",
        l0.status,
        l0.best_count,
        l0.co_maximizers.len(),
        l0.truncated
    );
    let mut degenerate = l0.status == oracles::L0Status::Degenerate;
    if ds.truth_subspace().is_some() {
        let wd = oracles::well_defined_check(&ds, d)?;
        degenerate |= wd == WellDefinedness::Degenerate;
        line += &format!(" well_defined={wd}");
    }
    let opt_f = |v: Option<f64>| v.map_or_else(|| "none".to_string(), fmt_float);
    line += &format!(
        " snr={} general_position_bound={} directional_bound={} directional_c={} ill_posed={} hardness_bound={}",
        fmt_float(th.snr),
        fmt_float(th.general_position_bound),
        opt_f(th.directional_bound),
        th.directional_c.map_or_else(|| "none".to_string(), |c| c.to_string()),
        th.ill_posed,
        fmt_float(th.hardness_bound)
    );
    println!("{line}");
    if degenerate {
        Err(Failure::Degenerate)
    } else {
        Ok(())
    }
}

fn diag(a: DiagArgs) -> CliResult {
    let ds = load(&a.data)?;
    let gamma = a.gamma.unwrap_or_else(diagnostics::default_gamma);
    let rep = diagnostics::stability_lower_bound(&ds, gamma)?;
    let mut fields: Vec<(&str, String)> = rep
        .fields()
        .into_iter()
        .map(|(k, v)| {
            let text = match k {
                "d" | "n_in" | "n_out" => format!("{v:.0}"),
                "pigeonhole_ok" => (v != 0.0).to_string(),
                _ => fmt_float(v),
            };
            (k, text)
        })
        .collect();
    if let Some(samples) = a.sup_samples {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        let sup = diagnostics::stability_sup_estimate(&ds, gamma, samples, &mut rng)?;
        fields.push(("sup_estimate", fmt_float(sup.estimate)));
        fields.push(("sup_first_term", fmt_float(sup.first_term)));
        fields.push(("sup_max_gradient_norm", fmt_float(sup.max_gradient_norm)));
    }
    for (k, v) in &fields {
        println!("{k}={v}");
    }
    if let Some(path) = &a.csv {
        let fresh = std::fs::metadata(path).map_or(true, |m| m.len() == 0);
        let mut f = OpenOptions::new().create(true).append(true).open(path)?;
        if fresh {
            let header: Vec<&str> = std::iter::once("dataset").chain(fields.iter().map(|(k, _)| *k)).collect();
            writeln!(f, "{}", header.join(","))?;
        }
        let name = a.data.display().to_string().replace([',', '\n'], "_");
        let row: Vec<&str> = std::iter::once(name.as_str()).chain(fields.iter().map(|(_, v)| v.as_str())).collect();
        writeln!(f, "{}", row.join(","))?;
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> CliResult {
    let mut cfg = ExperimentConfig::load(&a.config).map_err(|e| match e {
        RsrError::Io(io) => Failure::Config(format!("{}: {io}", a.config.display())),
        other => other.into(),
    })?;
    if let Some(seed) = a.seed {
        cfg.base_seed = seed;
    }
    if let Some(dir) = a.output_dir {
        cfg.output_dir = dir;
    }
    let workers = harness::resolve_workers(&cfg)?;
    let out = harness::sweep(&cfg, workers)?;
    println!(
        "trials={} cells={} workers={} trials_csv={} summary_csv={}",
        out.rows.len(),
        out.summary.len(),
        workers,
        out.trials_csv.display(),
        out.summary_csv.display()
    );
    Ok(())
}

fn report(a: ReportArgs) -> CliResult {
    let rep = harness::report_phase_transition(&a.summary, &a.threshold).map_err(|e| match e {
        RsrError::Io(io) => Failure::Config(format!("{}: {io}", a.summary.display())),
        RsrError::Csv(c) => Failure::Config(format!("{}: {c}", a.summary.display())),
        other => other.into(),
    })?;
    print!("{}", rep.text());
    if let Some(dir) = &a.curves {
        for p in harness::write_curves(&rep, dir)? {
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}
