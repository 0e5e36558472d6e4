//! The Wirtinger Flow iteration
//! `z_{τ+1} = z_τ − (μ_{τ+1} / ‖z_0‖²) ∇f(z_τ)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurements::{MeasurementOperator, Observations};
use crate::objective::evaluate;
use crate::vector::{check_len, relative_error, ComplexVector};

/// Step-size sequence `μ_τ`, `τ ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    Constant { mu: f64 },
    /// `μ_τ = min(1 − e^{−τ/τ₀}, μ_max)`
    Heuristic { tau0: f64, mu_max: f64 },
}

impl Schedule {
    pub fn constant(mu: f64) -> Self {
        Schedule::Constant { mu }
    }

    pub fn heuristic(tau0: f64, mu_max: f64) -> Self {
        Schedule::Heuristic { tau0, mu_max }
    }

    /// Schedule used for the Gaussian success-rate sweeps.
    pub fn gaussian_default() -> Self {
        Self::heuristic(330.0, 0.2)
    }

    /// Schedule used for coded diffraction and image runs.
    pub fn cdp_default() -> Self {
        Self::heuristic(330.0, 0.4)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Schedule::Constant { mu } if !(mu > 0.0 && mu.is_finite()) => {
                Err(Error::Precondition(format!("constant step must be positive, got {mu}")))
            }
            Schedule::Heuristic { tau0, mu_max } if !(tau0 > 0.0 && tau0.is_finite() && mu_max > 0.0 && mu_max <= 1.0) => {
                Err(Error::Precondition(format!(
                    "heuristic schedule needs tau0 > 0 and 0 < mu_max <= 1 (got {tau0}, {mu_max})"
                )))
            }
            _ => Ok(()),
        }
    }
}

pub fn schedule_mu(schedule: &Schedule, tau: usize) -> f64 {
    match *schedule {
        Schedule::Constant { mu } => mu,
        Schedule::Heuristic { tau0, mu_max } => (1.0 - (-(tau as f64) / tau0).exp()).min(mu_max),
    }
}

/// `z − (μ / ‖z_0‖²) g`.
pub fn step(z: &ComplexVector, gradient: &ComplexVector, mu: f64, norm_z0_squared: f64) -> Result<ComplexVector> {
    if norm_z0_squared.is_nan() || norm_z0_squared <= 0.0 {
        return Err(Error::Precondition(format!("‖z0‖² must be positive, got {norm_z0_squared}")));
    }
    z.sub(&gradient.scale_real(mu / norm_z0_squared))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub schedule: Schedule,
    /// Stop once `‖∇f(z)‖ / ‖z_0‖³` falls to this value; `0` disables.
    pub gradient_tolerance: f64,
    pub trace_every: usize,
}

impl SolverConfig {
    pub fn new(max_iterations: usize, schedule: Schedule) -> Self {
        Self { max_iterations, schedule, gradient_tolerance: 0.0, trace_every: 1 }
    }

    pub fn with_gradient_tolerance(mut self, tol: f64) -> Self {
        self.gradient_tolerance = tol;
        self
    }

    pub fn with_trace_every(mut self, every: usize) -> Self {
        self.trace_every = every;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Precondition("max_iterations must be at least 1".into()));
        }
        if self.trace_every == 0 {
            return Err(Error::Precondition("trace_every must be at least 1".into()));
        }
        if self.gradient_tolerance.is_nan() || self.gradient_tolerance < 0.0 {
            return Err(Error::Precondition("gradient_tolerance must be non-negative".into()));
        }
        self.schedule.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub loss: f64,
    pub mu: f64,
    pub grad_norm: f64,
    pub rel_error: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IterateTrace {
    pub records: Vec<TraceRecord>,
}

impl IterateTrace {
    /// Writes `iteration,loss,mu,grad_norm,rel_error`; `rel_error` is empty
    /// when no ground truth was supplied.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["iteration", "loss", "mu", "grad_norm", "rel_error"])
            .map_err(csv_error)?;
        for r in &self.records {
            out.write_record([
                r.iteration.to_string(),
                r.loss.to_string(),
                r.mu.to_string(),
                r.grad_norm.to_string(),
                r.rel_error.map(|e| e.to_string()).unwrap_or_default(),
            ])
            .map_err(csv_error)?;
        }
        out.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Serialization(format!("{other:?}")),
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub z_final: ComplexVector,
    /// Gradient evaluations performed; each one uses a forward and an
    /// adjoint application.
    pub iterations_run: usize,
    pub trace: IterateTrace,
    pub converged: bool,
    pub norm_z0_squared: f64,
    /// Transforms spent by the iteration, `2 · ffts_per_application` per
    /// gradient evaluation; zero for dense ensembles.
    pub fft_units: u64,
}

/// Runs Wirtinger Flow from `z0`.
///
/// Iteration `τ = 0, 1, …` evaluates `f` and `∇f` at `z_τ`, records a trace
/// sample when `τ` is a multiple of `trace_every`, stops if the gradient
/// tolerance is met, and otherwise steps with `μ_{τ+1}`. When `truth` is
/// given the trace carries the relative error of each sampled iterate.
pub fn solve<M: MeasurementOperator>(
    op: &M,
    y: &Observations,
    z0: &ComplexVector,
    config: &SolverConfig,
    truth: Option<&ComplexVector>,
) -> Result<SolveResult> {
    config.validate()?;
    check_len(op.num_measurements(), y.len())?;
    check_len(op.dim(), z0.len())?;
    if let Some(x) = truth {
        check_len(op.dim(), x.len())?;
    }
    let norm_z0_squared = z0.norm_sqr();
    if norm_z0_squared == 0.0 {
        return Err(Error::Precondition("initial point must be non-zero".into()));
    }
    let grad_scale = norm_z0_squared.powf(1.5);

    let mut trace = IterateTrace::default();
    let mut z = z0.clone();
    let mut converged = false;
    let mut iterations_run = 0;
    for tau in 0..config.max_iterations {
        let eval = match evaluate(op, y, &z) {
            Ok(e) => e,
            Err(Error::NonFinite(_)) => {
                return Err(Error::Divergence { iteration: tau, trace: Box::new(trace) })
            }
            Err(e) => return Err(e),
        };
        iterations_run = tau + 1;
        let mu = schedule_mu(&config.schedule, tau + 1);
        let grad_norm = eval.gradient.norm();
        if tau % config.trace_every == 0 {
            let rel_error = truth.map(|x| relative_error(&z, x)).transpose()?;
            trace.records.push(TraceRecord { iteration: tau, loss: eval.loss, mu, grad_norm, rel_error });
        }
        if config.gradient_tolerance > 0.0 && grad_norm / grad_scale <= config.gradient_tolerance {
            converged = true;
            break;
        }
        z = match step(&z, &eval.gradient, mu, norm_z0_squared) {
            Ok(next) => next,
            Err(Error::NonFinite(_)) => {
                return Err(Error::Divergence { iteration: tau + 1, trace: Box::new(trace) })
            }
            Err(e) => return Err(e),
        };
    }
    let fft_units = 2 * op.ffts_per_application() * iterations_run as u64;
    Ok(SolveResult { z_final: z, iterations_run, trace, converged, norm_z0_squared, fft_units })
}

pub const DEFAULT_SUCCESS_THRESHOLD: f64 = 1e-5;

/// Whether `dist(z_final, x) / ‖x‖ < threshold`.
pub fn success(result: &SolveResult, x: &ComplexVector, threshold: f64) -> bool {
    relative_error(&result.z_final, x).map(|e| e < threshold).unwrap_or(false)
}
