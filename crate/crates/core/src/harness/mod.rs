//! Experiment drivers: synthetic data, success sweeps, image recovery,
//! timing and the regularity diagnostic sweep.

pub mod image;
pub mod pnm;
pub mod signals;
pub mod sweep;
pub mod timing;

pub use image::{ingest_image, run_image_recovery, ImageProblem, ImageRecovery, RecoveryConfig};
pub use signals::{generate_signal, SignalModel};
pub use sweep::{run_success_sweep, ExperimentSpec, ExportFormat, MeasurementModel, SuccessCurve, SweepPoint};
pub use timing::{fft_unit_calibration, TimingReport};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurements::{GaussianEnsemble, MeasurementOperator};
use crate::objective::regularity_diagnostic;
use crate::rng::RandomSource;
use crate::vector::{sample_complex_gaussian, ComplexVector};

/// Radius of the neighbourhood `E(ε) = {z : dist(z, x) ≤ ε}` probed by
/// [`regularity_sweep`], for unit-norm `x`.
pub const DIAGNOSTIC_RADIUS: f64 = 0.125;

/// A random point of `E(radius)`: `e^{iθ}(x + h)` with `h` in a uniformly
/// random direction and `‖h‖` uniform on `[0, radius]`.
pub fn sample_neighbourhood(x: &ComplexVector, radius: f64, rng: &mut RandomSource) -> Result<ComplexVector> {
    let dir = sample_complex_gaussian(x.len(), rng)?.normalized()?;
    let r = radius * rng.random::<f64>();
    let theta = std::f64::consts::TAU * rng.random::<f64>();
    Ok(x.add(&dir.scale_real(r))?.rotate(theta))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticSummary {
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub beta: f64,
    pub samples: usize,
    pub passed: usize,
    pub pass_rate: f64,
    pub min_value: f64,
}

/// Evaluates the regularity diagnostic at `samples` random points of
/// `E(1/8)` around a unit-norm Gaussian signal, one Gaussian ensemble of
/// `m` measurements.
pub fn regularity_sweep(n: usize, m: usize, alpha: f64, beta: f64, samples: usize, seed: u64) -> Result<DiagnosticSummary> {
    if samples == 0 {
        return Err(Error::Precondition("at least one sample required".into()));
    }
    let mut rng = RandomSource::new(seed, 0);
    let x = sample_complex_gaussian(n, &mut rng)?.normalized()?;
    let ens = GaussianEnsemble::sample(n, m, &mut rng)?;
    let y = ens.observe(&x)?;
    let mut passed = 0;
    let mut min_value = f64::INFINITY;
    for _ in 0..samples {
        let z = sample_neighbourhood(&x, DIAGNOSTIC_RADIUS, &mut rng)?;
        let v = regularity_diagnostic(&ens, &y, &x, &z, alpha, beta)?;
        if v >= 0.0 {
            passed += 1;
        }
        min_value = min_value.min(v);
    }
    Ok(DiagnosticSummary {
        n,
        m,
        alpha,
        beta,
        samples,
        passed,
        pass_rate: passed as f64 / samples as f64,
        min_value,
    })
}
