//! Measurement ensembles: the linear map `A` whose rows are `a_r^*`, its
//! adjoint, and the intensity observations `y = |Az|²`.

mod cdp;
mod gaussian;
mod pattern;

pub use cdp::CdpEnsemble;
pub use gaussian::GaussianEnsemble;
pub use pattern::{pattern_moments, Condition, MomentReport, PatternDistribution, PatternKind};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::vector::{check_len, ComplexVector};

/// A linear measurement map `A : Cⁿ → Cᵐ` applied without materializing it.
///
/// `forward_into` computes `(Az)_r = a_r^* z` and `adjoint_into` computes
/// `A^* v = Σ_r v_r a_r`. Both write into caller-provided buffers of the
/// exact lengths `m` and `n`.
pub trait MeasurementOperator: Sync {
    /// Signal length `n`.
    fn dim(&self) -> usize;

    /// Number of measurements `m`.
    fn num_measurements(&self) -> usize;

    fn forward_into(&self, z: &[Complex64], out: &mut [Complex64]);

    fn adjoint_into(&self, v: &[Complex64], out: &mut [Complex64]);

    /// `Σ_r ‖a_r‖²`.
    fn row_norm_sqr_sum(&self) -> f64;

    /// Length-`n` FFTs performed by one forward or one adjoint application.
    fn ffts_per_application(&self) -> u64 {
        0
    }

    fn forward(&self, z: &ComplexVector) -> Result<ComplexVector> {
        check_len(self.dim(), z.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.num_measurements()];
        self.forward_into(z.as_slice(), &mut out);
        ComplexVector::new(out)
    }

    fn adjoint(&self, v: &ComplexVector) -> Result<ComplexVector> {
        check_len(self.num_measurements(), v.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.adjoint_into(v.as_slice(), &mut out);
        ComplexVector::new(out)
    }

    /// `y_r = |a_r^* x|²`.
    fn observe(&self, x: &ComplexVector) -> Result<Observations> {
        let ax = self.forward(x)?;
        Ok(Observations(ax.iter().map(|c| c.norm_sqr()).collect()))
    }
}

impl<T: MeasurementOperator + ?Sized> MeasurementOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn num_measurements(&self) -> usize {
        (**self).num_measurements()
    }
    fn forward_into(&self, z: &[Complex64], out: &mut [Complex64]) {
        (**self).forward_into(z, out)
    }
    fn adjoint_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        (**self).adjoint_into(v, out)
    }
    fn row_norm_sqr_sum(&self) -> f64 {
        (**self).row_norm_sqr_sum()
    }
    fn ffts_per_application(&self) -> u64 {
        (**self).ffts_per_application()
    }
}

/// Either measurement model, for callers that choose at runtime.
#[derive(Clone, Debug)]
pub enum Ensemble {
    Gaussian(GaussianEnsemble),
    Cdp(CdpEnsemble),
}

impl MeasurementOperator for Ensemble {
    fn dim(&self) -> usize {
        match self {
            Ensemble::Gaussian(g) => g.dim(),
            Ensemble::Cdp(c) => c.dim(),
        }
    }
    fn num_measurements(&self) -> usize {
        match self {
            Ensemble::Gaussian(g) => g.num_measurements(),
            Ensemble::Cdp(c) => c.num_measurements(),
        }
    }
    fn forward_into(&self, z: &[Complex64], out: &mut [Complex64]) {
        match self {
            Ensemble::Gaussian(g) => g.forward_into(z, out),
            Ensemble::Cdp(c) => c.forward_into(z, out),
        }
    }
    fn adjoint_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        match self {
            Ensemble::Gaussian(g) => g.adjoint_into(v, out),
            Ensemble::Cdp(c) => c.adjoint_into(v, out),
        }
    }
    fn row_norm_sqr_sum(&self) -> f64 {
        match self {
            Ensemble::Gaussian(g) => g.row_norm_sqr_sum(),
            Ensemble::Cdp(c) => c.row_norm_sqr_sum(),
        }
    }
    fn ffts_per_application(&self) -> u64 {
        match self {
            Ensemble::Gaussian(g) => g.ffts_per_application(),
            Ensemble::Cdp(c) => c.ffts_per_application(),
        }
    }
}

/// Measured intensities; non-negative and finite.
#[derive(Clone, Debug, PartialEq)]
pub struct Observations(Vec<f64>);

impl Observations {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if let Some(i) = values.iter().position(|&v| v < 0.0) {
            return Err(Error::Precondition(format!("negative intensity at index {i}")));
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| v * c).collect())
    }
}
