//! Monte Carlo success-rate sweeps.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::signals::{generate_signal, SignalModel};
use crate::init::{spectral_init, SpectralConfig};
use crate::measurements::{CdpEnsemble, Ensemble, GaussianEnsemble, MeasurementOperator, PatternKind};
use crate::rng::RandomSource;
use crate::solver::{csv_error, solve, Schedule, SolverConfig, DEFAULT_SUCCESS_THRESHOLD};
use crate::vector::relative_error;

pub const DEFAULT_SWEEP_ITERATIONS: usize = 2500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasurementModel {
    /// Sweep values are oversampling ratios `m/n`.
    Gaussian,
    /// Sweep values are pattern counts `L`.
    Cdp { pattern: PatternKind },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub model: MeasurementModel,
    pub signal: SignalModel,
    pub n: usize,
    pub sweep: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub solver: SolverConfig,
    pub init: SpectralConfig,
    pub success_threshold: f64,
}

impl ExperimentSpec {
    /// Complex Gaussian signals, 2500 iterations with the model's default
    /// schedule, 50 power iterations and threshold `1e-5`.
    pub fn new(model: MeasurementModel, n: usize, sweep: Vec<f64>, trials: usize, seed: u64) -> Self {
        let schedule = match model {
            MeasurementModel::Gaussian => Schedule::gaussian_default(),
            MeasurementModel::Cdp { .. } => Schedule::cdp_default(),
        };
        Self {
            model,
            signal: SignalModel::RandomGaussianComplex,
            n,
            sweep,
            trials,
            seed,
            solver: SolverConfig::new(DEFAULT_SWEEP_ITERATIONS, schedule),
            init: SpectralConfig::default(),
            success_threshold: DEFAULT_SUCCESS_THRESHOLD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Precondition("trials must be at least 1".into()));
        }
        if self.sweep.is_empty() {
            return Err(Error::Precondition("sweep has no points".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidDimension("n must be positive".into()));
        }
        if self.success_threshold.is_nan() || self.success_threshold <= 0.0 {
            return Err(Error::Precondition("success threshold must be positive".into()));
        }
        if let MeasurementModel::Cdp { pattern } = self.model {
            pattern.distribution()?;
        }
        for &v in &self.sweep {
            self.measurement_count(v)?;
        }
        Ok(())
    }

    /// Number of measurements (Gaussian) or patterns (CDP) for a sweep value.
    fn measurement_count(&self, value: f64) -> Result<usize> {
        let count = match self.model {
            MeasurementModel::Gaussian => (value * self.n as f64).round(),
            MeasurementModel::Cdp { .. } => {
                if value.fract() != 0.0 {
                    return Err(Error::Precondition(format!("pattern count {value} is not an integer")));
                }
                value
            }
        };
        if !(count >= 1.0 && count <= u32::MAX as f64) {
            return Err(Error::Precondition(format!("sweep value {value} yields no measurements")));
        }
        Ok(count as usize)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub success: bool,
    pub diverged: bool,
    pub iterations: usize,
    pub rel_error: Option<f64>,
}

/// One end-to-end pipeline on the stream for `(seed, point, trial)`.
pub fn run_trial(spec: &ExperimentSpec, point: usize, trial: usize) -> Result<TrialOutcome> {
    let value = spec.sweep[point];
    let count = spec.measurement_count(value)?;
    let mut rng = RandomSource::for_trial(spec.seed, point as u32, trial as u32);
    let x = generate_signal(&spec.signal, spec.n, &mut rng)?;
    let ensemble = match spec.model {
        MeasurementModel::Gaussian => Ensemble::Gaussian(GaussianEnsemble::sample(spec.n, count, &mut rng)?),
        MeasurementModel::Cdp { pattern } => {
            Ensemble::Cdp(CdpEnsemble::sample(spec.n, count, &pattern.distribution()?, &mut rng)?)
        }
    };
    let y = ensemble.observe(&x)?;
    let init = spectral_init(&ensemble, &y, &spec.init, &mut rng)?;
    if init.degenerate {
        return Ok(TrialOutcome { success: false, diverged: false, iterations: 0, rel_error: Some(1.0) });
    }
    match solve(&ensemble, &y, &init.z, &spec.solver, None) {
        Ok(result) => {
            let err = relative_error(&result.z_final, &x)?;
            Ok(TrialOutcome {
                success: err < spec.success_threshold,
                diverged: false,
                iterations: result.iterations_run,
                rel_error: Some(err),
            })
        }
        Err(Error::Divergence { iteration, .. }) => {
            Ok(TrialOutcome { success: false, diverged: true, iterations: iteration, rel_error: None })
        }
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub sweep_value: f64,
    pub successes: usize,
    pub trials: usize,
    pub success_rate: f64,
    pub diverged: usize,
    pub mean_iters: f64,
    /// Mean over trials that did not diverge; absent if all diverged.
    pub mean_rel_error: Option<f64>,
}

/// Reduces outcomes in the order given.
pub fn aggregate(sweep_value: f64, outcomes: &[TrialOutcome]) -> SweepPoint {
    let trials = outcomes.len();
    let successes = outcomes.iter().filter(|o| o.success).count();
    let diverged = outcomes.iter().filter(|o| o.diverged).count();
    let mean_iters = outcomes.iter().map(|o| o.iterations as f64).sum::<f64>() / trials.max(1) as f64;
    let errors: Vec<f64> = outcomes.iter().filter_map(|o| o.rel_error).collect();
    let mean_rel_error = (!errors.is_empty()).then(|| errors.iter().sum::<f64>() / errors.len() as f64);
    SweepPoint {
        sweep_value,
        successes,
        trials,
        success_rate: successes as f64 / trials.max(1) as f64,
        diverged,
        mean_iters,
        mean_rel_error,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessCurve {
    pub spec: ExperimentSpec,
    pub points: Vec<SweepPoint>,
}

/// Worker count from `WIRTFLOW_THREADS`, or rayon's default when unset.
pub fn worker_threads() -> Option<usize> {
    std::env::var("WIRTFLOW_THREADS").ok()?.trim().parse().ok().filter(|&t| t > 0)
}

pub fn run_success_sweep(spec: &ExperimentSpec) -> Result<SuccessCurve> {
    spec.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = worker_threads() {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    let jobs: Vec<(usize, usize)> =
        (0..spec.sweep.len()).flat_map(|p| (0..spec.trials).map(move |t| (p, t))).collect();
    let outcomes: Vec<TrialOutcome> =
        pool.install(|| jobs.par_iter().map(|&(p, t)| run_trial(spec, p, t)).collect::<Result<_>>())?;
    let points = outcomes
        .chunks(spec.trials)
        .zip(&spec.sweep)
        .map(|(chunk, &value)| aggregate(value, chunk))
        .collect();
    Ok(SuccessCurve { spec: spec.clone(), points })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl SuccessCurve {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["sweep_value", "successes", "trials", "success_rate", "mean_iters", "mean_rel_error"])
            .map_err(csv_error)?;
        for p in &self.points {
            out.write_record([
                p.sweep_value.to_string(),
                p.successes.to_string(),
                p.trials.to_string(),
                p.success_rate.to_string(),
                p.mean_iters.to_string(),
                p.mean_rel_error.map(|e| e.to_string()).unwrap_or_default(),
            ])
            .map_err(csv_error)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, self).map_err(|e| Error::Serialization(e.to_string()))?;
        writeln!(w)?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn export(&self, path: impl AsRef<Path>, format: ExportFormat) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        match format {
            ExportFormat::Csv => self.write_csv(&mut w)?,
            ExportFormat::Json => self.write_json(&mut w)?,
        }
        w.flush()?;
        Ok(())
    }
}
