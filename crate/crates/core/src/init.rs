//! Spectral initialization and the resampled block-wise initializer.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurements::{MeasurementOperator, Observations};
use crate::objective::wirtinger_gradient;
use crate::rng::RandomSource;
use crate::vector::{check_len, norm_sqr, sample_complex_gaussian, ComplexVector};

pub const DEFAULT_POWER_ITERATIONS: usize = 50;

/// How the leading eigenvector is scaled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `λ² = n Σ_r y_r / Σ_r ‖a_r‖²`
    #[default]
    Algorithm1Lambda,
    /// `λ² = (1/m) Σ_r y_r`
    MeanIntensity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    pub power_iterations: usize,
    pub normalization: Normalization,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self { power_iterations: DEFAULT_POWER_ITERATIONS, normalization: Normalization::default() }
    }
}

impl SpectralConfig {
    pub fn with_power_iterations(power_iterations: usize) -> Self {
        Self { power_iterations, ..Self::default() }
    }
}

/// Power iteration `v ← Yv / ‖Yv‖` from a random unit start, `iters` times.
///
/// `apply` writes `Y v` into its second argument. An operator with no
/// spectral gap still returns a unit vector.
pub fn power_method<F>(mut apply: F, n: usize, iters: usize, rng: &mut RandomSource) -> Result<ComplexVector>
where
    F: FnMut(&[Complex64], &mut [Complex64]),
{
    if iters == 0 {
        return Err(Error::Precondition("power method needs at least one iteration".into()));
    }
    let mut v = sample_complex_gaussian(n, rng)?.normalized()?.into_inner();
    let mut yv = vec![Complex64::new(0.0, 0.0); n];
    for _ in 0..iters {
        apply(&v, &mut yv);
        let norm = norm_sqr(&yv).sqrt();
        if !norm.is_finite() {
            return Err(Error::NonFinite(0));
        }
        if norm == 0.0 {
            return Err(Error::DegenerateOperator("power iteration reached Yv = 0"));
        }
        for (vt, yt) in v.iter_mut().zip(&yv) {
            *vt = yt / norm;
        }
    }
    ComplexVector::new(v)
}

/// Output of [`spectral_init`].
#[derive(Clone, Debug)]
pub struct SpectralInit {
    pub z: ComplexVector,
    /// The norm `λ` the eigenvector was scaled to.
    pub lambda: f64,
    /// Set when all observations are zero; `z` is then the zero vector.
    pub degenerate: bool,
}

/// Applies `Y v = (1/m) A^*(y ⊙ A v)` matrix-free.
pub fn apply_spectral_matrix<M: MeasurementOperator>(op: &M, y: &Observations, v: &[Complex64], out: &mut [Complex64]) {
    let m = op.num_measurements();
    let mut av = vec![Complex64::new(0.0, 0.0); m];
    op.forward_into(v, &mut av);
    for (w, yr) in av.iter_mut().zip(y.as_slice()) {
        *w *= *yr;
    }
    op.adjoint_into(&av, out);
    let inv_m = 1.0 / m as f64;
    for o in out.iter_mut() {
        *o *= inv_m;
    }
}

/// Leading eigenvector of `Y = (1/m) Σ y_r a_r a_r^*`, scaled to norm `λ`.
pub fn spectral_init<M: MeasurementOperator>(
    op: &M,
    y: &Observations,
    config: &SpectralConfig,
    rng: &mut RandomSource,
) -> Result<SpectralInit> {
    check_len(op.num_measurements(), y.len())?;
    let n = op.dim();
    let total = y.sum();
    if total == 0.0 {
        return Ok(SpectralInit { z: ComplexVector::zeros(n)?, lambda: 0.0, degenerate: true });
    }
    let lambda_sq = match config.normalization {
        Normalization::Algorithm1Lambda => n as f64 * total / op.row_norm_sqr_sum(),
        Normalization::MeanIntensity => total / op.num_measurements() as f64,
    };
    let lambda = lambda_sq.sqrt();
    let v = power_method(
        |v, out| apply_spectral_matrix(op, y, v, out),
        n,
        config.power_iterations,
        rng,
    )?;
    Ok(SpectralInit { z: v.scale_real(lambda), lambda, degenerate: false })
}

/// Settings for [`resampled_init`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResampleConfig {
    /// Number of gradient blocks `B`; the data is split into `B + 1` groups.
    pub blocks: usize,
    /// Step size `μ̃`.
    pub mu_tilde: f64,
}

impl ResampleConfig {
    /// `B = ⌈2 ln n⌉` (at least 1) and `μ̃ = 0.1`.
    pub fn for_dim(n: usize) -> Self {
        let blocks = (2.0 * (n as f64).ln()).ceil().max(1.0) as usize;
        Self { blocks, mu_tilde: 0.1 }
    }
}

/// One group of sampling vectors and the observations they produced.
#[derive(Clone, Copy, Debug)]
pub struct Block<'a, M> {
    pub op: &'a M,
    pub y: &'a Observations,
}

impl<'a, M> Block<'a, M> {
    pub fn new(op: &'a M, y: &'a Observations) -> Self {
        Self { op, y }
    }
}

/// Output of [`resampled_init`]: the spectral start `u_0` and the result `u_B`.
#[derive(Clone, Debug)]
pub struct ResampledInit {
    pub u0: ComplexVector,
    pub z: ComplexVector,
}

/// Spectral start on block 0, then `u_{b+1} = u_b − (μ̃/‖u_0‖²) ∇f(u_b; b)`
/// for `b = 0..B−1`, where `∇f(·; b)` uses only block `b` (normalized by
/// that block's own size).
pub fn resampled_init<M: MeasurementOperator>(
    blocks: &[Block<'_, M>],
    config: &ResampleConfig,
    power_iterations: usize,
    rng: &mut RandomSource,
) -> Result<ResampledInit> {
    if blocks.len() < 2 {
        return Err(Error::InvalidDimension(format!("need at least 2 blocks, got {}", blocks.len())));
    }
    if config.blocks + 1 != blocks.len() {
        return Err(Error::mismatch(config.blocks + 1, blocks.len()));
    }
    let n = blocks[0].op.dim();
    for b in blocks {
        check_len(n, b.op.dim())?;
        check_len(b.op.num_measurements(), b.y.len())?;
    }
    let spectral = SpectralConfig::with_power_iterations(power_iterations);
    let u0 = spectral_init(blocks[0].op, blocks[0].y, &spectral, rng)?.z;
    let norm0 = u0.norm_sqr();
    if norm0 == 0.0 {
        return Ok(ResampledInit { z: u0.clone(), u0 });
    }
    let scale = config.mu_tilde / norm0;
    let mut u = u0.clone();
    for block in &blocks[..config.blocks] {
        let g = wirtinger_gradient(block.op, block.y, &u)?;
        u = u.sub(&g.scale_real(scale))?;
    }
    Ok(ResampledInit { u0, z: u })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurements::{CdpEnsemble, GaussianEnsemble, PatternDistribution};
    use crate::vector::{dist, inner};
    use nalgebra::{DMatrix, DVector};

    fn dense_apply(mat: &DMatrix<Complex64>) -> impl FnMut(&[Complex64], &mut [Complex64]) + '_ {
        move |v, out| {
            let r = mat * DVector::from_column_slice(v);
            out.copy_from_slice(r.as_slice());
        }
    }

    fn rayleigh(mat: &DMatrix<Complex64>, v: &[Complex64]) -> f64 {
        let dv = DVector::from_column_slice(v);
        (dv.adjoint() * mat * &dv)[(0, 0)].re
    }

    #[test]
    fn converges_on_expectation_matrix() {
        let mut rng = RandomSource::new(1, 0);
        let n = 20;
        let x = sample_complex_gaussian(n, &mut rng).unwrap().normalized().unwrap();
        let xv = DVector::from_column_slice(x.as_slice());
        let y = DMatrix::identity(n, n) + &xv * xv.adjoint() * Complex64::new(2.0, 0.0);
        let v = power_method(dense_apply(&y), n, 50, &mut rng).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-12);
        assert!(x.inner(&v).unwrap().norm() >= 1.0 - 1e-10);
    }

    #[test]
    fn identity_returns_a_unit_vector() {
        let mut rng = RandomSource::new(2, 0);
        let v = power_method(|v, out| out.copy_from_slice(v), 7, 10, &mut rng).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_operator_is_an_error() {
        let mut rng = RandomSource::new(2, 0);
        let r = power_method(|_, out| out.fill(Complex64::new(0.0, 0.0)), 3, 5, &mut rng);
        assert!(matches!(r, Err(Error::DegenerateOperator(_))));
        assert!(power_method(|v, out| out.copy_from_slice(v), 3, 0, &mut rng).is_err());
    }

    #[test]
    fn rayleigh_quotient_is_monotone() {
        let mut rng = RandomSource::new(3, 0);
        let n = 12;
        let b = DMatrix::from_fn(n, n, |_, _| {
            sample_complex_gaussian(1, &mut rng).unwrap()[0]
        });
        let psd = &b * b.adjoint();
        let mut previous = f64::NEG_INFINITY;
        for iters in 1..=30 {
            let v = power_method(dense_apply(&psd), n, iters, &mut RandomSource::new(9, 0)).unwrap();
            let q = rayleigh(&psd, v.as_slice());
            assert!(q >= previous - 1e-12 * q.abs(), "iteration {iters}: {q} < {previous}");
            previous = q;
        }
    }

    #[test]
    fn matrix_free_apply_matches_dense() {
        let mut rng = RandomSource::new(4, 0);
        let n = 12;
        let x = sample_complex_gaussian(n, &mut rng).unwrap();
        let ens = GaussianEnsemble::sample(n, 50, &mut rng).unwrap();
        let y = ens.observe(&x).unwrap();
        let mut dense = DMatrix::<Complex64>::zeros(n, n);
        for r in 0..50 {
            let a = DVector::from_column_slice(ens.row(r));
            dense += &a * a.adjoint() * Complex64::new(y.as_slice()[r] / 50.0, 0.0);
        }
        let v = sample_complex_gaussian(n, &mut rng).unwrap();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        apply_spectral_matrix(&ens, &y, v.as_slice(), &mut out);
        let expected = &dense * DVector::from_column_slice(v.as_slice());
        let err: f64 = out.iter().zip(expected.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err <= 1e-9 * expected.norm());
    }

    #[test]
    fn zero_observations_are_flagged() {
        let ens = GaussianEnsemble::sample(4, 10, &mut RandomSource::new(1, 1)).unwrap();
        let y = Observations::new(vec![0.0; 10]).unwrap();
        let init = spectral_init(&ens, &y, &SpectralConfig::default(), &mut RandomSource::new(1, 2)).unwrap();
        assert!(init.degenerate);
        assert_eq!(init.z.norm(), 0.0);
        let short = Observations::new(vec![1.0; 9]).unwrap();
        assert!(spectral_init(&ens, &short, &SpectralConfig::default(), &mut RandomSource::new(1, 2)).is_err());
    }

    #[test]
    fn lambda_normalizations() {
        let mut rng = RandomSource::new(5, 0);
        let n = 16;
        let x = sample_complex_gaussian(n, &mut rng).unwrap();
        let ens = GaussianEnsemble::sample(n, 96, &mut rng).unwrap();
        let y = ens.observe(&x).unwrap();
        let a = spectral_init(&ens, &y, &SpectralConfig::default(), &mut RandomSource::new(1, 0)).unwrap();
        let expected = (n as f64 * y.sum() / ens.row_norm_sqr_sum()).sqrt();
        assert!((a.lambda - expected).abs() < 1e-12 * expected);
        assert!((a.z.norm() - expected).abs() < 1e-10 * expected);
        let cfg = SpectralConfig { normalization: Normalization::MeanIntensity, ..SpectralConfig::default() };
        let b = spectral_init(&ens, &y, &cfg, &mut RandomSource::new(1, 0)).unwrap();
        assert!((b.lambda - (y.sum() / 96.0).sqrt()).abs() < 1e-12);
        // Same eigenvector either way.
        assert!(inner(a.z.as_slice(), b.z.as_slice()).norm() / (a.lambda * b.lambda) > 1.0 - 1e-12);
    }

    #[test]
    fn scaling_observations_scales_lambda_only() {
        let mut rng = RandomSource::new(6, 0);
        let n = 16;
        let x = sample_complex_gaussian(n, &mut rng).unwrap();
        let ens = CdpEnsemble::sample(n, 6, &PatternDistribution::octanary(), &mut rng).unwrap();
        let y = ens.observe(&x).unwrap();
        let c = 3.7;
        let a = spectral_init(&ens, &y, &SpectralConfig::default(), &mut RandomSource::new(2, 0)).unwrap();
        let b = spectral_init(&ens, &y.scale(c).unwrap(), &SpectralConfig::default(), &mut RandomSource::new(2, 0)).unwrap();
        assert!((b.lambda / a.lambda - c.sqrt()).abs() < 1e-12);
        let align = a.z.inner(&b.z).unwrap().norm() / (a.lambda * b.lambda);
        assert!(align >= 1.0 - 1e-8);
        // Replacing x by 2x scales λ by 2.
        let y2 = ens.observe(&x.scale_real(2.0)).unwrap();
        let d = spectral_init(&ens, &y2, &SpectralConfig::default(), &mut RandomSource::new(2, 0)).unwrap();
        assert!((d.lambda / a.lambda - 2.0).abs() < 1e-12);
    }

    #[test]
    fn resampled_single_block_step() {
        let mut rng = RandomSource::new(7, 0);
        let n = 8;
        let x = sample_complex_gaussian(n, &mut rng).unwrap();
        let ens = CdpEnsemble::sample(n, 4, &PatternDistribution::octanary(), &mut rng).unwrap();
        let y = ens.observe(&x).unwrap();
        let parts = ens.partition(&y, 2).unwrap();
        let blocks: Vec<_> = parts.iter().map(|(e, o)| Block::new(e, o)).collect();
        let cfg = ResampleConfig { blocks: 1, mu_tilde: 0.1 };
        let out = resampled_init(&blocks, &cfg, 50, &mut RandomSource::new(3, 0)).unwrap();

        let u0 = spectral_init(&parts[0].0, &parts[0].1, &SpectralConfig::default(), &mut RandomSource::new(3, 0))
            .unwrap()
            .z;
        assert_eq!(out.u0, u0);
        let g = wirtinger_gradient(&parts[0].0, &parts[0].1, &u0).unwrap();
        let expected = u0.sub(&g.scale_real(0.1 / u0.norm_sqr())).unwrap();
        assert!(out.z.sub(&expected).unwrap().norm() <= 1e-14 * expected.norm());
    }

    #[test]
    fn resampled_zero_step_returns_start() {
        let mut rng = RandomSource::new(8, 0);
        let n = 8;
        let x = sample_complex_gaussian(n, &mut rng).unwrap();
        let ens = GaussianEnsemble::sample(n, 64, &mut rng).unwrap();
        let y = ens.observe(&x).unwrap();
        let blocks = vec![Block::new(&ens, &y); 4];
        let cfg = ResampleConfig { blocks: 3, mu_tilde: 0.0 };
        let out = resampled_init(&blocks, &cfg, 50, &mut RandomSource::new(1, 0)).unwrap();
        assert_eq!(out.z, out.u0);
        assert!(dist(&out.z, &x).unwrap().is_finite());
    }

    #[test]
    fn resampled_rejects_bad_block_lists() {
        let ens = GaussianEnsemble::sample(4, 8, &mut RandomSource::new(1, 1)).unwrap();
        let other = GaussianEnsemble::sample(5, 8, &mut RandomSource::new(1, 1)).unwrap();
        let y = Observations::new(vec![1.0; 8]).unwrap();
        let cfg = ResampleConfig { blocks: 1, mu_tilde: 0.1 };
        let mut rng = RandomSource::new(0, 0);
        assert!(resampled_init(&[Block::new(&ens, &y)], &cfg, 5, &mut rng).is_err());
        let mixed = [Block::new(&ens, &y), Block::new(&other, &y)];
        assert!(resampled_init(&mixed, &cfg, 5, &mut rng).is_err());
        let three = [Block::new(&ens, &y), Block::new(&ens, &y), Block::new(&ens, &y)];
        assert!(resampled_init(&three, &cfg, 5, &mut rng).is_err());
    }

    #[test]
    fn default_block_count() {
        assert_eq!(ResampleConfig::for_dim(64).blocks, 9);
        assert_eq!(ResampleConfig::for_dim(1).blocks, 1);
    }
}
