use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{Cell, EstimatorSpec, ExperimentConfig, ModelKind};
use super::fmt_float;
use super::seed::trial_seed;
use crate::dataset::{add_noise, gen_adversarial, gen_haystack, LabeledDataset};
use crate::diagnostics::{default_gamma, haystack_bound, stability_lower_bound, HaystackRegime};
use crate::error::{Result, RsrError};
use crate::estimators::{ransac_rsr, sggd, spca, RansacConfig};
use crate::linalg::binomial;
use crate::oracles::general_position_bound;

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "RSR_WORKERS";

pub const TRIALS_HEADER: [&str; 17] = [
    "cell",
    "trial",
    "estimator",
    "seed",
    "ambient_dim",
    "subspace_dim",
    "n_in",
    "n_out",
    "snr",
    "noise_eps",
    "status",
    "theta1",
    "recovered",
    "iterations",
    "energy",
    "kappa_d",
    "lower_bound",
];

pub const SUMMARY_HEADER: [&str; 19] = [
    "cell",
    "estimator",
    "ambient_dim",
    "subspace_dim",
    "n_in",
    "n_out",
    "snr",
    "noise_eps",
    "trials",
    "ok_trials",
    "recovered",
    "recovery_rate",
    "mean_iterations",
    "mean_theta1",
    "mean_kappa_d",
    "sggd_bound",
    "general_position_bound",
    "haystack_bound",
    "ransac_predicted_iterations",
];

pub const TIMING_HEADER: [&str; 4] = ["cell", "trial", "estimator", "wall_time_ms"];

#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub cell: Cell,
    pub trial: usize,
    pub estimator: &'static str,
    pub seed: u64,
    /// `"ok"` or the error message.
    pub status: String,
    pub theta1: f64,
    pub recovered: bool,
    pub iterations: usize,
    pub energy_final: f64,
    pub snr: f64,
    pub kappa_d: f64,
    pub lower_bound: f64,
    pub wall_time_ms: f64,
}

impl TrialResult {
    pub fn csv_row(&self) -> Vec<String> {
        let c = &self.cell;
        vec![
            c.index.to_string(),
            self.trial.to_string(),
            self.estimator.to_string(),
            self.seed.to_string(),
            c.ambient_dim.to_string(),
            c.subspace_dim.to_string(),
            c.n_in.to_string(),
            c.n_out.to_string(),
            fmt_float(self.snr),
            fmt_float(c.noise_eps),
            self.status.clone(),
            fmt_float(self.theta1),
            u8::from(self.recovered).to_string(),
            self.iterations.to_string(),
            fmt_float(self.energy_final),
            fmt_float(self.kappa_d),
            fmt_float(self.lower_bound),
        ]
    }
}

pub fn generate(cfg: &ExperimentConfig, cell: &Cell, seed: u64) -> Result<LabeledDataset> {
    let m = &cfg.model;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ds = match m.kind {
        ModelKind::Haystack => gen_haystack(
            cell.ambient_dim,
            cell.subspace_dim,
            cell.n_in,
            cell.n_out,
            m.sigma_in,
            m.sigma_out,
            &mut rng,
        )?,
        ModelKind::AdversarialLine => gen_adversarial(
            cell.ambient_dim,
            cell.subspace_dim,
            cell.n_in,
            cell.n_out,
            m.magnitude,
            &mut rng,
        )?,
    };
    let mut ds = add_noise(&ds, cell.noise(m.noise_kind), &mut rng)?;
    ds.meta.seed = Some(seed);
    Ok(ds)
}

struct Outcome {
    theta1: f64,
    iterations: usize,
    energy: f64,
}

fn fit(ds: &LabeledDataset, d: usize, spec: &EstimatorSpec, seed: u64) -> Result<Outcome> {
    let truth = ds.truth_subspace().ok_or(RsrError::MissingTruth)?;
    let out = match spec {
        EstimatorSpec::Spca => {
            let s = spca(&ds.points, d)?.subspace;
            Outcome {
                theta1: s.distance(truth)?,
                iterations: 0,
                energy: crate::estimators::lad_energy(&ds.points, &s)?,
            }
        }
        EstimatorSpec::Sggd(c) => {
            let init = spca(&ds.points, d)?.subspace;
            let f = sggd(&ds.points, d, &init, c)?;
            Outcome {
                theta1: f.subspace.distance(truth)?,
                iterations: f.iterations,
                energy: f.energy,
            }
        }
        EstimatorSpec::Ransac(c) => {
            let c = RansacConfig { seed, ..*c };
            let f = ransac_rsr(&ds.points, d, &c)?;
            Outcome {
                theta1: f.subspace.distance(truth)?,
                iterations: f.trials,
                energy: (ds.len() - f.consensus) as f64,
            }
        }
    };
    Ok(out)
}

/// Generates the dataset of `(cell, trial)` and runs every configured estimator on it.
pub fn run_trial(cfg: &ExperimentConfig, cell: &Cell, trial: usize) -> Vec<TrialResult> {
    let seed = trial_seed(cfg.base_seed, cell.index as u64, trial as u64);
    let snr = crate::dataset::snr(cell.n_in, cell.n_out);
    let data = generate(cfg, cell, seed);
    let (kappa, lower) = match &data {
        Ok(ds) => stability_lower_bound(ds, default_gamma())
            .map(|r| (r.kappa_d, r.lower_bound))
            .unwrap_or((f64::NAN, f64::NAN)),
        Err(_) => (f64::NAN, f64::NAN),
    };
    cfg.estimators
        .iter()
        .map(|spec| {
            let start = Instant::now();
            let outcome = data
                .as_ref()
                .map_err(|e| e.to_string())
                .and_then(|ds| fit(ds, cell.subspace_dim, spec, seed).map_err(|e| e.to_string()));
            let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
            let (status, theta1, iterations, energy_final) = match outcome {
                Ok(o) => ("ok".to_string(), o.theta1, o.iterations, o.energy),
                Err(msg) => (msg, f64::NAN, 0, f64::NAN),
            };
            TrialResult {
                cell: *cell,
                trial,
                estimator: spec.name(),
                seed,
                status,
                recovered: theta1 < cfg.recovery_tol,
                theta1,
                iterations,
                energy_final,
                snr,
                kappa_d: kappa,
                lower_bound: lower,
                wall_time_ms,
            }
        })
        .collect()
}

/// Runs every `(cell, trial)` on `workers` threads; rows come back ordered by
/// cell, trial and estimator regardless of the thread count.
pub fn run_sweep(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<TrialResult>> {
    let cells = cfg.cells();
    let items: Vec<(Cell, usize)> = cells
        .iter()
        .flat_map(|c| (0..cfg.trials_per_cell).map(move |t| (*c, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| RsrError::invalid("worker pool", e.to_string()))?;
    let nested: Vec<Vec<TrialResult>> =
        pool.install(|| items.par_iter().map(|(c, t)| run_trial(cfg, c, *t)).collect());
    Ok(nested.into_iter().flatten().collect())
}

/// Worker count: `RSR_WORKERS` if set, else the config value, else all cores.
pub fn resolve_workers(cfg: &ExperimentConfig) -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(RsrError::config(WORKERS_ENV, format!("expected a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(cfg
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))),
    }
}

pub fn write_trials<W: Write>(rows: &[TrialResult], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRIALS_HEADER)?;
    for r in rows {
        out.write_record(r.csv_row())?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_timing<W: Write>(rows: &[TrialResult], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TIMING_HEADER)?;
    for r in rows {
        out.write_record([
            r.cell.index.to_string(),
            r.trial.to_string(),
            r.estimator.to_string(),
            fmt_float(r.wall_time_ms),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub cell: Cell,
    pub estimator: &'static str,
    pub trials: usize,
    pub ok_trials: usize,
    pub recovered: usize,
    pub recovery_rate: f64,
    pub mean_iterations: f64,
    pub mean_theta1: f64,
    pub mean_kappa_d: f64,
    pub sggd_bound: f64,
    pub general_position_bound: f64,
    pub haystack_bound: f64,
    pub ransac_predicted_iterations: f64,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Aggregates per `(cell, estimator)`, in first-appearance order.
pub fn summarize(rows: &[TrialResult]) -> Vec<SummaryRow> {
    let mut order: Vec<(usize, &'static str)> = Vec::new();
    let mut groups: BTreeMap<(usize, &'static str), Vec<&TrialResult>> = BTreeMap::new();
    for r in rows {
        let key = (r.cell.index, r.estimator);
        groups
            .entry(key)
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let g = &groups[&key];
            let cell = g[0].cell;
            let ok: Vec<&&TrialResult> = g.iter().filter(|r| r.status == "ok").collect();
            let recovered = g.iter().filter(|r| r.recovered).count();
            let kappa = mean(g.iter().map(|r| r.kappa_d).filter(|k| k.is_finite()));
            let (n, d) = (cell.n_in + cell.n_out, cell.subspace_dim);
            SummaryRow {
                cell,
                estimator: key.1,
                trials: g.len(),
                ok_trials: ok.len(),
                recovered,
                recovery_rate: recovered as f64 / g.len() as f64,
                mean_iterations: mean(ok.iter().map(|r| r.iterations as f64)),
                mean_theta1: mean(ok.iter().map(|r| r.theta1)),
                mean_kappa_d: kappa,
                sggd_bound: 3f64.sqrt() * d as f64 * kappa,
                general_position_bound: general_position_bound(n, d),
                haystack_bound: haystack_bound(cell.ambient_dim, d, HaystackRegime::Small),
                ransac_predicted_iterations: binomial(n as u64, d as u64) / binomial(cell.n_in as u64, d as u64),
            }
        })
        .collect()
}

pub fn write_summary<W: Write>(rows: &[SummaryRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SUMMARY_HEADER)?;
    for r in rows {
        let c = &r.cell;
        out.write_record([
            c.index.to_string(),
            r.estimator.to_string(),
            c.ambient_dim.to_string(),
            c.subspace_dim.to_string(),
            c.n_in.to_string(),
            c.n_out.to_string(),
            fmt_float(crate::dataset::snr(c.n_in, c.n_out)),
            fmt_float(c.noise_eps),
            r.trials.to_string(),
            r.ok_trials.to_string(),
            r.recovered.to_string(),
            fmt_float(r.recovery_rate),
            fmt_float(r.mean_iterations),
            fmt_float(r.mean_theta1),
            fmt_float(r.mean_kappa_d),
            fmt_float(r.sggd_bound),
            fmt_float(r.general_position_bound),
            fmt_float(r.haystack_bound),
            fmt_float(r.ransac_predicted_iterations),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Files written by [`sweep`].
#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub trials_csv: PathBuf,
    pub summary_csv: PathBuf,
    pub timing_csv: PathBuf,
    pub rows: Vec<TrialResult>,
    pub summary: Vec<SummaryRow>,
}

/// Runs the sweep and writes `trials.csv`, `summary.csv` and `timing.csv` into
/// the configured output directory.
pub fn sweep(cfg: &ExperimentConfig, workers: usize) -> Result<SweepOutput> {
    let rows = run_sweep(cfg, workers)?;
    let summary = summarize(&rows);
    let dir: &Path = &cfg.output_dir;
    std::fs::create_dir_all(dir)?;
    let trials_csv = dir.join("trials.csv");
    let summary_csv = dir.join("summary.csv");
    let timing_csv = dir.join("timing.csv");
    write_trials(&rows, std::fs::File::create(&trials_csv)?)?;
    write_summary(&summary, std::fs::File::create(&summary_csv)?)?;
    write_timing(&rows, std::fs::File::create(&timing_csv)?)?;
    Ok(SweepOutput {
        trials_csv,
        summary_csv,
        timing_csv,
        rows,
        summary,
    })
}
