//! Synthetic test signals.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::vector::ComplexVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalModel {
    /// Entries `X + iY` with `X, Y ~ N(0, 1)` independent.
    RandomGaussianComplex,
    /// Sum of `bandwidth` complex exponentials at the lowest frequencies
    /// `−⌊M/2⌋, …, M − ⌊M/2⌋ − 1`, coefficients `X_k + iY_k` standard normal.
    RandomLowpass { bandwidth: usize },
}

impl SignalModel {
    /// Low-pass model with `M = n/8` (at least 1).
    pub fn lowpass_for(n: usize) -> Self {
        SignalModel::RandomLowpass { bandwidth: (n / 8).max(1) }
    }
}

fn normal(rng: &mut RandomSource) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Frequencies used by a low-pass signal of bandwidth `m` in dimension `n`,
/// reduced modulo `n`.
pub fn lowpass_band(n: usize, m: usize) -> Vec<usize> {
    let low = (m / 2) as i64;
    (0..m as i64).map(|j| (j - low).rem_euclid(n as i64) as usize).collect()
}

pub fn generate_signal(model: &SignalModel, n: usize, rng: &mut RandomSource) -> Result<ComplexVector> {
    if n == 0 {
        return Err(Error::InvalidDimension("signal length must be positive".into()));
    }
    match *model {
        SignalModel::RandomGaussianComplex => ComplexVector::new((0..n).map(|_| normal(rng)).collect()),
        SignalModel::RandomLowpass { bandwidth } => {
            if bandwidth == 0 || bandwidth > n {
                return Err(Error::Precondition(format!("lowpass bandwidth {bandwidth} must lie in 1..={n}")));
            }
            let terms: Vec<(usize, Complex64)> =
                lowpass_band(n, bandwidth).into_iter().map(|k| (k, normal(rng))).collect();
            let x = (0..n)
                .map(|t| {
                    terms
                        .iter()
                        .map(|&(k, c)| c * Complex64::from_polar(1.0, TAU * ((k * t) % n) as f64 / n as f64))
                        .sum()
                })
                .collect();
            ComplexVector::new(x)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &ComplexVector) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(t, v)| v * Complex64::from_polar(1.0, -TAU * (k * t) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn gaussian_signal_power() {
        let n = 64;
        let trials = 400;
        let mut rng = RandomSource::new(5, 0);
        let mean: f64 = (0..trials)
            .map(|_| generate_signal(&SignalModel::RandomGaussianComplex, n, &mut rng).unwrap().norm_sqr())
            .sum::<f64>()
            / trials as f64;
        assert!((mean / (2.0 * n as f64) - 1.0).abs() < 0.05, "mean ‖x‖² = {mean}");
    }

    #[test]
    fn lowpass_support() {
        let n = 128;
        let model = SignalModel::lowpass_for(n);
        let x = generate_signal(&model, n, &mut RandomSource::new(9, 0)).unwrap();
        let spectrum = naive_dft(&x);
        let band = lowpass_band(n, 16);
        assert_eq!(band.len(), 16);
        assert!(band.contains(&0) && band.contains(&7) && band.contains(&(n - 8)) && !band.contains(&8));
        let peak = spectrum.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (k, c) in spectrum.iter().enumerate() {
            if !band.contains(&k) {
                assert!(c.norm() <= 1e-9 * peak, "leak at {k}: {}", c.norm());
            }
        }
    }

    #[test]
    fn deterministic_and_validated() {
        let model = SignalModel::RandomLowpass { bandwidth: 4 };
        let a = generate_signal(&model, 32, &mut RandomSource::new(1, 2)).unwrap();
        let b = generate_signal(&model, 32, &mut RandomSource::new(1, 2)).unwrap();
        assert_eq!(a, b);
        let mut rng = RandomSource::new(1, 2);
        assert!(generate_signal(&SignalModel::RandomLowpass { bandwidth: 33 }, 32, &mut rng).is_err());
        assert!(generate_signal(&SignalModel::RandomLowpass { bandwidth: 0 }, 32, &mut rng).is_err());
        assert!(generate_signal(&SignalModel::RandomGaussianComplex, 0, &mut rng).is_err());
        assert_eq!(SignalModel::lowpass_for(4), SignalModel::RandomLowpass { bandwidth: 1 });
    }
}
