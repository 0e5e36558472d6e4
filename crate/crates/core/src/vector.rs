//! Dense complex vectors and the phase-invariant distance.
//!
//! Inner products follow `⟨z, x⟩ = Σ conj(z_t) x_t` (conjugate-linear in the
//! first argument) throughout the crate.

use std::f64::consts::TAU;
use std::ops::Index;

use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// A length-`n` complex vector with finite entries. The length is fixed at
/// construction and the entries cannot be modified in place.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDimension("vector length must be at least 1".into()));
        }
        if let Some(i) = entries.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self(entries))
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); n])
    }

    /// Embeds a real signal with zero imaginary part.
    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Standard basis vector `e_k`.
    pub fn basis(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::InvalidDimension(format!("basis index {k} out of range for n = {n}")));
        }
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[k] = Complex64::new(1.0, 0.0);
        Self::new(v)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always `false`; vectors have at least one entry.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self, other⟩ = Σ conj(self_t) other_t`.
    pub fn inner(&self, other: &ComplexVector) -> Result<Complex64> {
        check_len(self.len(), other.len())?;
        Ok(inner(&self.0, &other.0))
    }

    pub fn scale(&self, c: Complex64) -> ComplexVector {
        Self(self.0.iter().map(|v| v * c).collect())
    }

    pub fn scale_real(&self, c: f64) -> ComplexVector {
        Self(self.0.iter().map(|v| v * c).collect())
    }

    /// Multiplies by the global phase `e^{iφ}`.
    pub fn rotate(&self, phi: f64) -> ComplexVector {
        self.scale(Complex64::from_polar(1.0, phi))
    }

    /// Returns the unit vector in the same direction.
    pub fn normalized(&self) -> Result<ComplexVector> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::DivisionByZero("normalizing the zero vector"));
        }
        Ok(self.scale_real(1.0 / norm))
    }

    pub fn sub(&self, other: &ComplexVector) -> Result<ComplexVector> {
        check_len(self.len(), other.len())?;
        Self::new(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &ComplexVector) -> Result<ComplexVector> {
        check_len(self.len(), other.len())?;
        Self::new(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.re).collect()
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<Complex64>> for ComplexVector {
    type Error = Error;

    fn try_from(v: Vec<Complex64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ComplexVector> for Vec<Complex64> {
    fn from(v: ComplexVector) -> Self {
        v.0
    }
}

impl AsRef<[Complex64]> for ComplexVector {
    fn as_ref(&self) -> &[Complex64] {
        &self.0
    }
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::mismatch(expected, actual))
    }
}

#[inline]
pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(u, v)| u.conj() * v).sum()
}

#[inline]
pub(crate) fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum()
}

/// Draws `n` i.i.d. entries with real and imaginary parts each `N(0, 1/2)`,
/// so that `E|entry|² = 1`.
pub fn sample_complex_gaussian(n: usize, rng: &mut RandomSource) -> Result<ComplexVector> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid std-dev");
    let entries = (0..n)
        .map(|_| {
            let re = normal.sample(rng);
            let im = normal.sample(rng);
            Complex64::new(re, im)
        })
        .collect();
    ComplexVector::new(entries)
}

/// The global phase `φ ∈ [0, 2π)` minimizing `‖z − e^{iφ} x‖`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseAlignment {
    phi: f64,
}

impl PhaseAlignment {
    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// `e^{iφ}`.
    pub fn rotation(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phi)
    }
}

/// Computes `φ(z) = argmin_φ ‖z − e^{iφ}x‖ = arg(⟨x, z⟩)`. When `⟨x, z⟩ = 0`
/// every phase is optimal and `0` is returned.
pub fn optimal_phase(z: &ComplexVector, x: &ComplexVector) -> Result<PhaseAlignment> {
    check_len(z.len(), x.len())?;
    let c = x.inner(z)?;
    if c.re == 0.0 && c.im == 0.0 {
        return Ok(PhaseAlignment { phi: 0.0 });
    }
    let mut phi = c.arg();
    if phi < 0.0 {
        phi += TAU;
    }
    if phi >= TAU {
        phi -= TAU;
    }
    Ok(PhaseAlignment { phi })
}

/// Distance up to a global phase, `min_φ ‖z − e^{iφ}x‖`.
///
/// Equal to `sqrt(‖z‖² + ‖x‖² − 2|⟨z, x⟩|)`, but evaluated as the norm of
/// the aligned residual so that small distances keep full relative accuracy.
pub fn dist(z: &ComplexVector, x: &ComplexVector) -> Result<f64> {
    check_len(z.len(), x.len())?;
    let c = x.inner(z)?;
    let magnitude = c.norm();
    let rotation = if magnitude == 0.0 { Complex64::new(1.0, 0.0) } else { c.unscale(magnitude) };
    Ok(z.iter().zip(x.iter()).map(|(a, b)| (a - rotation * b).norm_sqr()).sum::<f64>().sqrt())
}

/// `dist(zhat, x) / ‖x‖`.
pub fn relative_error(zhat: &ComplexVector, x: &ComplexVector) -> Result<f64> {
    let nx = x.norm();
    if nx == 0.0 {
        return Err(Error::DivisionByZero("relative error against a zero reference"));
    }
    Ok(dist(zhat, x)? / nx)
}
