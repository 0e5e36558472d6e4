//! Phase retrieval by Wirtinger Flow.
//!
//! A signal `x ∈ Cⁿ` is recovered, up to a global phase, from intensity
//! measurements `y_r = |a_r^* x|²`. Recovery runs in two stages: a spectral
//! initialization (leading eigenvector of `(1/m) Σ y_r a_r a_r^*`, found by
//! the power method) followed by gradient descent on the quartic loss
//! `f(z) = (1/2m) Σ (y_r − |a_r^* z|²)²` using its Wirtinger gradient.
//!
//! Two measurement models are provided: dense complex Gaussian sampling
//! vectors and coded diffraction patterns (random modulation followed by a
//! DFT, applied matrix-free via FFTs).
//!
//! ```
//! use wirtflow::prelude::*;
//!
//! let mut rng = RandomSource::new(7, 0);
//! let x = sample_complex_gaussian(16, &mut rng).unwrap();
//! let ensemble = GaussianEnsemble::sample(16, 16 * 8, &mut rng).unwrap();
//! let y = ensemble.observe(&x).unwrap();
//! let init = spectral_init(&ensemble, &y, &SpectralConfig::default(), &mut rng).unwrap();
//! let config = SolverConfig::new(600, Schedule::heuristic(330.0, 0.4));
//! let result = solve(&ensemble, &y, &init.z, &config, Some(&x)).unwrap();
//! assert!(relative_error(&result.z_final, &x).unwrap() < 1e-6);
//! ```

pub mod error;
pub mod harness;
pub mod init;
pub mod io;
pub mod measurements;
pub mod objective;
pub mod rng;
pub mod solver;
pub mod vector;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::init::{
        power_method, resampled_init, spectral_init, Block, Normalization, ResampleConfig,
        SpectralConfig, SpectralInit,
    };
    pub use crate::measurements::{
        pattern_moments, CdpEnsemble, Ensemble, GaussianEnsemble, MeasurementOperator,
        MomentReport, Observations, PatternDistribution,
    };
    pub use crate::objective::{loss, wirtinger_gradient};
    pub use crate::rng::RandomSource;
    pub use crate::solver::{solve, success, Schedule, SolveResult, SolverConfig};
    pub use crate::vector::{
        dist, optimal_phase, relative_error, sample_complex_gaussian, ComplexVector,
    };
    pub use num_complex::Complex64;
}
