//! The quartic intensity loss `f(z) = (1/2m) Σ_r (y_r − |a_r^* z|²)²`, its
//! Wirtinger gradient, and the expectation formulas used as test oracles.
//!
//! The gradient is `∇f(z) = (∂f/∂z)^* = (1/m) Σ_r (|a_r^* z|² − y_r) a_r a_r^* z`.
//! With `z = u + iv`, the real partial derivatives are `∂f/∂u = 2 Re ∇f` and
//! `∂f/∂v = 2 Im ∇f`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measurements::{MeasurementOperator, Observations};
use crate::rng::RandomSource;
use crate::vector::{check_len, dist, optimal_phase, sample_complex_gaussian, ComplexVector};

const UNIT_NORM_TOL: f64 = 1e-9;

/// Loss and gradient at one point, sharing a single forward application.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub loss: f64,
    pub gradient: ComplexVector,
}

fn check_dims<M: MeasurementOperator>(op: &M, y: &Observations, z: &ComplexVector) -> Result<()> {
    check_len(op.num_measurements(), y.len())?;
    check_len(op.dim(), z.len())
}

fn residual_terms<M: MeasurementOperator>(op: &M, y: &Observations, z: &ComplexVector) -> (Vec<Complex64>, f64) {
    let mut az = vec![Complex64::new(0.0, 0.0); op.num_measurements()];
    op.forward_into(z.as_slice(), &mut az);
    let mut sum_sq = 0.0;
    for (w, &yr) in az.iter_mut().zip(y.as_slice()) {
        let residual = w.norm_sqr() - yr;
        sum_sq += residual * residual;
        *w *= residual;
    }
    (az, sum_sq)
}

/// Evaluates `f(z)` and `∇f(z)` with one forward and one adjoint application.
pub fn evaluate<M: MeasurementOperator>(op: &M, y: &Observations, z: &ComplexVector) -> Result<Evaluation> {
    check_dims(op, y, z)?;
    let m = op.num_measurements() as f64;
    let (weighted, sum_sq) = residual_terms(op, y, z);
    let mut g = vec![Complex64::new(0.0, 0.0); op.dim()];
    op.adjoint_into(&weighted, &mut g);
    for v in &mut g {
        *v /= m;
    }
    let loss = sum_sq / (2.0 * m);
    if !loss.is_finite() {
        return Err(Error::NonFinite(0));
    }
    Ok(Evaluation { loss, gradient: ComplexVector::new(g)? })
}

pub fn loss<M: MeasurementOperator>(op: &M, y: &Observations, z: &ComplexVector) -> Result<f64> {
    check_dims(op, y, z)?;
    let (_, sum_sq) = residual_terms(op, y, z);
    Ok(sum_sq / (2.0 * op.num_measurements() as f64))
}

/// `∇f(z) = A^*((|Az|² − y) ⊙ Az) / m`.
pub fn wirtinger_gradient<M: MeasurementOperator>(op: &M, y: &Observations, z: &ComplexVector) -> Result<ComplexVector> {
    evaluate(op, y, z).map(|e| e.gradient)
}

fn require_unit(x: &ComplexVector) -> Result<()> {
    let norm = x.norm();
    if (norm - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::Precondition(format!("expected a unit-norm solution, got ‖x‖ = {norm}")));
    }
    Ok(())
}

/// Mean of `∇f(z)` over the Gaussian or admissible CDP model for a fixed `z`:
/// `(I − xx^*) z + 2(‖z‖² − 1) z`, valid for `‖x‖ = 1`.
pub fn expected_gradient(x: &ComplexVector, z: &ComplexVector) -> Result<ComplexVector> {
    require_unit(x)?;
    let proj = x.inner(z)?;
    let radial = 2.0 * (z.norm_sqr() - 1.0);
    ComplexVector::new(
        z.iter()
            .zip(x.iter())
            .map(|(zt, xt)| zt - xt * proj + zt * radial)
            .collect(),
    )
}

/// Mean Hessian at the solution in conjugate coordinates `[z; z̄]`:
/// `I₂ₙ + (3/2)[x; x̄][x^*, x^T] − (1/2)[x; −x̄][x^*, −x^T]`, for `‖x‖ = 1`.
pub fn expected_hessian(x: &ComplexVector) -> Result<DMatrix<Complex64>> {
    require_unit(x)?;
    let n = x.len();
    let stacked = |sign: f64| {
        DVector::from_iterator(
            2 * n,
            x.iter().copied().chain(x.iter().map(|c| c.conj() * sign)),
        )
    };
    let plus = stacked(1.0);
    let minus = stacked(-1.0);
    let mut h = DMatrix::<Complex64>::identity(2 * n, 2 * n);
    h += &plus * plus.adjoint() * Complex64::new(1.5, 0.0);
    h -= &minus * minus.adjoint() * Complex64::new(0.5, 0.0);
    Ok(h)
}

/// `[h; h̄]^* ∇²f(z) [h; h̄]`, evaluated row by row as
/// `(1/m) Σ_r 2(2|a_r^*z|² − y_r)|a_r^*h|² + 2 Re((a_r^*z)² conj(a_r^*h)²)`.
pub fn hessian_quadratic_form<M: MeasurementOperator>(
    op: &M,
    y: &Observations,
    z: &ComplexVector,
    h: &ComplexVector,
) -> Result<f64> {
    check_dims(op, y, z)?;
    check_len(op.dim(), h.len())?;
    let az = op.forward(z)?;
    let ah = op.forward(h)?;
    let total: f64 = az
        .iter()
        .zip(ah.iter())
        .zip(y.as_slice())
        .map(|((w, u), &yr)| {
            2.0 * (2.0 * w.norm_sqr() - yr) * u.norm_sqr() + 2.0 * (w * w * u.conj() * u.conj()).re
        })
        .sum();
    Ok(total / op.num_measurements() as f64)
}

/// A Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
}

impl Estimate {
    /// Whether `value` lies within `k` standard errors of the mean.
    pub fn within(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_err
    }
}

/// Monte Carlo estimates of Gaussian-model moments for fixed unit `u`, `v`.
#[derive(Clone, Debug)]
pub struct MomentEstimates {
    /// `E[(Re(u^* a a^* v))²]`
    pub re_squared: Estimate,
    /// `E[Re(u^* a a^* v) |a^* v|²]`
    pub re_times_power: Estimate,
    /// `E|a^* v|^{2k}` for `k = 1..=4`.
    pub power_moments: [Estimate; 4],
}

#[derive(Default)]
struct Accumulator {
    sum: f64,
    sum_sq: f64,
}

impl Accumulator {
    fn push(&mut self, v: f64) {
        self.sum += v;
        self.sum_sq += v * v;
    }

    fn finish(&self, count: usize) -> Estimate {
        let n = count as f64;
        let mean = self.sum / n;
        let var = if count > 1 { ((self.sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0) } else { 0.0 };
        Estimate { mean, std_err: (var / n).sqrt() }
    }
}

pub fn gaussian_moment_oracle(
    u: &ComplexVector,
    v: &ComplexVector,
    samples: usize,
    rng: &mut RandomSource,
) -> Result<MomentEstimates> {
    require_unit(u)?;
    require_unit(v)?;
    check_len(u.len(), v.len())?;
    if samples == 0 {
        return Err(Error::InvalidDimension("at least one sample required".into()));
    }
    let mut re_sq = Accumulator::default();
    let mut re_pow = Accumulator::default();
    let mut powers: [Accumulator; 4] = Default::default();
    for _ in 0..samples {
        let a = sample_complex_gaussian(u.len(), rng)?;
        // a^* v and u^* a = conj(a^* u)
        let av = a.inner(v)?;
        let ua = a.inner(u)?.conj();
        let re = (ua * av).re;
        let p = av.norm_sqr();
        re_sq.push(re * re);
        re_pow.push(re * p);
        let mut pk = 1.0;
        for acc in powers.iter_mut() {
            pk *= p;
            acc.push(pk);
        }
    }
    Ok(MomentEstimates {
        re_squared: re_sq.finish(samples),
        re_times_power: re_pow.finish(samples),
        power_moments: [0, 1, 2, 3].map(|k| powers[k].finish(samples)),
    })
}

/// `Re⟨∇f(z), z − x e^{iφ(z)}⟩ − dist²(z, x)/α − ‖∇f(z)‖²/β`.
///
/// A non-negative value means the regularity condition `RC(α, β, ·)` holds at
/// `z`. For `αβ < 4` the value is never positive.
pub fn regularity_diagnostic<M: MeasurementOperator>(
    op: &M,
    y: &Observations,
    x: &ComplexVector,
    z: &ComplexVector,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::Precondition(format!("alpha and beta must be positive (got {alpha}, {beta})")));
    }
    check_len(z.len(), x.len())?;
    let g = wirtinger_gradient(op, y, z)?;
    let aligned = x.scale(optimal_phase(z, x)?.rotation());
    let h = z.sub(&aligned)?;
    let correlation = g.inner(&h)?.re;
    let d = dist(z, x)?;
    Ok(correlation - d * d / alpha - g.norm_sqr() / beta)
}
