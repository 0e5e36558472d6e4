//! Recovery of real-valued images from coded diffraction patterns.
//!
//! Each channel is vectorized row-major into a real signal of length
//! `width · height` and measured with the same set of 1D codes.

use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harness::pnm::{self, Raster};
use crate::harness::timing::{fft_unit_calibration, TimingReport};
use crate::init::{spectral_init, SpectralConfig, DEFAULT_POWER_ITERATIONS};
use crate::measurements::{CdpEnsemble, MeasurementOperator, PatternKind};
use crate::rng::RandomSource;
use crate::solver::{solve, Schedule, SolveResult, SolverConfig};
use crate::vector::{optimal_phase, relative_error, ComplexVector};

pub const DEFAULT_IMAGE_ITERATIONS: usize = 300;
pub const DEFAULT_IMAGE_PATTERNS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct ImageProblem {
    pub width: usize,
    pub height: usize,
    /// One row-major vector per channel, values nominally in `[0, 1]`.
    pub channels: Vec<Vec<f64>>,
}

impl ImageProblem {
    pub fn new(width: usize, height: usize, channels: Vec<Vec<f64>>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimension(format!("empty image {width}x{height}")));
        }
        if channels.len() != 1 && channels.len() != 3 {
            return Err(Error::InvalidDimension(format!("{} channels, expected 1 or 3", channels.len())));
        }
        for c in &channels {
            if c.len() != width * height {
                return Err(Error::mismatch(width * height, c.len()));
            }
            if let Some(i) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(i));
            }
        }
        Ok(Self { width, height, channels })
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn from_raster(r: &Raster) -> Result<Self> {
        let channels = (0..r.channels)
            .map(|c| r.data.iter().skip(c).step_by(r.channels).map(|&b| b as f64 / 255.0).collect())
            .collect();
        Self::new(r.width, r.height, channels)
    }

    /// Quantizes to 8 bits, clamping to `[0, 1]`.
    pub fn to_raster(&self) -> Raster {
        let k = self.channels.len();
        let mut data = vec![0u8; self.pixels() * k];
        for (c, values) in self.channels.iter().enumerate() {
            for (i, v) in values.iter().enumerate() {
                data[i * k + c] = (v.clamp(0.0, 1.0) * 255.0).round() as u8;
            }
        }
        Raster { width: self.width, height: self.height, channels: k, data }
    }

    /// Smooth grayscale scene: a vertical ramp, a bright disc and a dark bar.
    pub fn test_pattern(width: usize, height: usize) -> Result<Self> {
        let (w, h) = (width as f64, height as f64);
        let values = (0..height)
            .flat_map(|i| (0..width).map(move |j| (i as f64, j as f64)))
            .map(|(i, j)| {
                let mut v = 0.15 + 0.5 * i / h;
                let (di, dj) = (i - 0.4 * h, j - 0.6 * w);
                if di * di + dj * dj < (0.2 * w.min(h)).powi(2) {
                    v += 0.3;
                }
                if (0.7 * w..0.8 * w).contains(&j) && i > 0.5 * h {
                    v *= 0.3;
                }
                v.min(1.0)
            })
            .collect();
        Self::new(width, height, vec![values])
    }
}

pub fn ingest_image(path: impl AsRef<Path>) -> Result<ImageProblem> {
    ImageProblem::from_raster(&pnm::read_file(path)?)
}

/// Wraps an operator and counts the transforms spent in applications.
pub struct CountingOperator<'a, M> {
    inner: &'a M,
    ffts: AtomicU64,
}

impl<'a, M: MeasurementOperator> CountingOperator<'a, M> {
    pub fn new(inner: &'a M) -> Self {
        Self { inner, ffts: AtomicU64::new(0) }
    }

    pub fn ffts(&self) -> u64 {
        self.ffts.load(Ordering::Relaxed)
    }
}

impl<M: MeasurementOperator> MeasurementOperator for CountingOperator<'_, M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn num_measurements(&self) -> usize {
        self.inner.num_measurements()
    }

    fn forward_into(&self, z: &[Complex64], out: &mut [Complex64]) {
        self.ffts.fetch_add(self.inner.ffts_per_application(), Ordering::Relaxed);
        self.inner.forward_into(z, out);
    }

    fn adjoint_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        self.ffts.fetch_add(self.inner.ffts_per_application(), Ordering::Relaxed);
        self.inner.adjoint_into(v, out);
    }

    fn row_norm_sqr_sum(&self) -> f64 {
        self.inner.row_norm_sqr_sum()
    }

    fn ffts_per_application(&self) -> u64 {
        self.inner.ffts_per_application()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryConfig {
    pub patterns: usize,
    pub pattern: PatternKind,
    pub power_iterations: usize,
    pub solver: SolverConfig,
    /// Repetitions for the FFT-unit calibration; 0 skips timing.
    pub calibration_repetitions: usize,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            patterns: DEFAULT_IMAGE_PATTERNS,
            pattern: PatternKind::Octanary,
            power_iterations: DEFAULT_POWER_ITERATIONS,
            solver: SolverConfig::new(DEFAULT_IMAGE_ITERATIONS, Schedule::cdp_default()),
            calibration_repetitions: 101,
        }
    }
}

impl RecoveryConfig {
    /// `2 L (power_iterations + max_iterations)` transforms per channel.
    pub fn predicted_ffts(&self) -> u64 {
        2 * self.patterns as u64 * (self.power_iterations + self.solver.max_iterations) as u64
    }
}

#[derive(Clone, Debug)]
pub struct ChannelRecovery {
    pub result: SolveResult,
    pub rel_error: f64,
    /// Transforms counted during initialization and iteration.
    pub ffts: u64,
}

/// Recovers one real channel against a fixed ensemble.
pub fn recover_channel(
    ensemble: &CdpEnsemble,
    values: &[f64],
    config: &RecoveryConfig,
    rng: &mut RandomSource,
) -> Result<ChannelRecovery> {
    let x = ComplexVector::from_real(values)?;
    let y = ensemble.observe(&x)?;
    let counted = CountingOperator::new(ensemble);
    let init = spectral_init(&counted, &y, &SpectralConfig::with_power_iterations(config.power_iterations), rng)?;
    if init.degenerate {
        // an all-black channel: zero is an exact solution
        return Ok(ChannelRecovery {
            result: SolveResult {
                z_final: init.z,
                iterations_run: 0,
                trace: Default::default(),
                converged: true,
                norm_z0_squared: 0.0,
                fft_units: 0,
            },
            rel_error: 0.0,
            ffts: counted.ffts(),
        });
    }
    let result = solve(&counted, &y, &init.z, &config.solver, Some(&x))?;
    let rel_error = relative_error(&result.z_final, &x)?;
    Ok(ChannelRecovery { result, rel_error, ffts: counted.ffts() })
}

/// Real part of `z` after removing its global phase relative to `reference`.
pub fn aligned_real_part(z: &ComplexVector, reference: &[f64]) -> Result<Vec<f64>> {
    let x = ComplexVector::from_real(reference)?;
    let undo = optimal_phase(z, &x)?.rotation().conj();
    Ok(z.iter().map(|c| (c * undo).re).collect())
}

#[derive(Clone, Debug)]
pub struct ImageRecovery {
    pub channels: Vec<ChannelRecovery>,
    pub recovered: ImageProblem,
    pub ensemble: CdpEnsemble,
    pub predicted_ffts: u64,
    pub timing: Option<TimingReport>,
}

impl ImageRecovery {
    pub fn total_ffts(&self) -> u64 {
        self.channels.iter().map(|c| c.ffts).sum()
    }
}

/// Samples `L` codes from `rng`, then recovers each channel with its own
/// substream so the channels are independent of processing order.
pub fn run_image_recovery(problem: &ImageProblem, config: &RecoveryConfig, rng: &mut RandomSource) -> Result<ImageRecovery> {
    if config.patterns == 0 {
        return Err(Error::Precondition("at least one pattern is required".into()));
    }
    let n = problem.pixels();
    let ensemble = CdpEnsemble::sample(n, config.patterns, &config.pattern.distribution()?, rng)?;
    let start = Instant::now();
    let channels = problem
        .channels
        .iter()
        .enumerate()
        .map(|(c, values)| recover_channel(&ensemble, values, config, &mut rng.substream(c as u64)))
        .collect::<Result<Vec<_>>>()?;
    let seconds = start.elapsed().as_secs_f64();
    let timing = match config.calibration_repetitions {
        0 => None,
        reps if n >= 2 => Some(TimingReport::new(seconds, fft_unit_calibration(n, reps)?)),
        _ => None,
    };
    let recovered = channels
        .iter()
        .zip(&problem.channels)
        .map(|(ch, x)| aligned_real_part(&ch.result.z_final, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(ImageRecovery {
        recovered: ImageProblem::new(problem.width, problem.height, recovered)?,
        channels,
        ensemble,
        predicted_ffts: config.predicted_ffts(),
        timing,
    })
}
