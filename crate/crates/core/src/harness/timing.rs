//! FFT-unit calibration: wall time of one length-`n` transform.

use std::time::Instant;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Median seconds per forward FFT of length `n` over `repetitions` runs.
pub fn fft_unit_calibration(n: usize, repetitions: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!("calibration length must be at least 2, got {n}")));
    }
    let reps = repetitions.max(1);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut buf: Vec<Complex64> = (0..n).map(|t| Complex64::new((t as f64).sin(), (t as f64).cos())).collect();
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(&mut buf, &mut scratch);
    let mut samples: Vec<f64> = (0..reps)
        .map(|_| {
            let start = Instant::now();
            fft.process_with_scratch(&mut buf, &mut scratch);
            start.elapsed().as_secs_f64()
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    let mid = samples.len() / 2;
    let median = if samples.len().is_multiple_of(2) { 0.5 * (samples[mid - 1] + samples[mid]) } else { samples[mid] };
    // guard against a clock too coarse to resolve one transform
    Ok(median.max(f64::MIN_POSITIVE))
}

/// Wall-clock cost of a run expressed in FFT units.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TimingReport {
    pub seconds: f64,
    pub fft_unit_seconds: f64,
    pub fft_units: f64,
}

impl TimingReport {
    pub fn new(seconds: f64, fft_unit_seconds: f64) -> Self {
        Self { seconds, fft_unit_seconds, fft_units: seconds / fft_unit_seconds }
    }
}
