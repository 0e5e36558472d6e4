use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::gaussian::block_sizes;
use super::{MeasurementOperator, Observations, PatternDistribution};
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::vector::ComplexVector;

/// Coded diffraction patterns: `L` modulation codes `d_ℓ` of length `n`.
///
/// Measurement `r = ℓ·n + k` is `Σ_t z[t] conj(d_ℓ(t)) e^{−i2πkt/n}`, i.e. the
/// unnormalized DFT of the modulated signal. The adjoint uses the conjugate
/// kernel, also unnormalized.
#[derive(Clone)]
pub struct CdpEnsemble {
    n: usize,
    codes: Vec<ComplexVector>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for CdpEnsemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CdpEnsemble")
            .field("n", &self.n)
            .field("patterns", &self.codes.len())
            .finish()
    }
}

impl PartialEq for CdpEnsemble {
    fn eq(&self, other: &Self) -> bool {
        self.codes == other.codes
    }
}

impl CdpEnsemble {
    pub fn sample(n: usize, patterns: usize, dist: &PatternDistribution, rng: &mut RandomSource) -> Result<Self> {
        if n == 0 || patterns == 0 {
            return Err(Error::InvalidDimension(format!(
                "CDP ensemble needs n, L >= 1 (got n = {n}, L = {patterns})"
            )));
        }
        let codes = (0..patterns).map(|_| dist.sample(n, rng)).collect::<Result<Vec<_>>>()?;
        Self::from_codes(codes)
    }

    pub fn from_codes(codes: Vec<ComplexVector>) -> Result<Self> {
        let n = codes
            .first()
            .ok_or_else(|| Error::InvalidDimension("at least one code required".into()))?
            .len();
        if let Some(bad) = codes.iter().find(|c| c.len() != n) {
            return Err(Error::mismatch(n, bad.len()));
        }
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        Ok(Self { n, codes, fft, ifft })
    }

    pub fn codes(&self) -> &[ComplexVector] {
        &self.codes
    }

    pub fn num_patterns(&self) -> usize {
        self.codes.len()
    }

    /// Splits whole patterns into `groups` blocks of `⌊L/groups⌋` codes each,
    /// with the remainder assigned to block 0.
    pub fn partition(&self, y: &Observations, groups: usize) -> Result<Vec<(CdpEnsemble, Observations)>> {
        if y.len() != self.num_measurements() {
            return Err(Error::mismatch(self.num_measurements(), y.len()));
        }
        let sizes = block_sizes(self.codes.len(), groups)?;
        let mut start = 0;
        let mut out = Vec::with_capacity(groups);
        for size in sizes {
            let ens = CdpEnsemble {
                n: self.n,
                codes: self.codes[start..start + size].to_vec(),
                fft: Arc::clone(&self.fft),
                ifft: Arc::clone(&self.ifft),
            };
            let obs = Observations::new(y.as_slice()[start * self.n..(start + size) * self.n].to_vec())?;
            out.push((ens, obs));
            start += size;
        }
        Ok(out)
    }
}

impl MeasurementOperator for CdpEnsemble {
    fn dim(&self) -> usize {
        self.n
    }

    fn num_measurements(&self) -> usize {
        self.n * self.codes.len()
    }

    fn forward_into(&self, z: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(z.len(), self.n);
        assert_eq!(out.len(), self.num_measurements());
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        for (block, code) in out.chunks_exact_mut(self.n).zip(&self.codes) {
            for ((o, zt), d) in block.iter_mut().zip(z).zip(code.iter()) {
                *o = zt * d.conj();
            }
            self.fft.process_with_scratch(block, &mut scratch);
        }
    }

    fn adjoint_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(v.len(), self.num_measurements());
        assert_eq!(out.len(), self.n);
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.ifft.get_inplace_scratch_len()];
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n];
        out.fill(Complex64::new(0.0, 0.0));
        for (block, code) in v.chunks_exact(self.n).zip(&self.codes) {
            buf.copy_from_slice(block);
            self.ifft.process_with_scratch(&mut buf, &mut scratch);
            for ((o, b), d) in out.iter_mut().zip(&buf).zip(code.iter()) {
                *o += d * b;
            }
        }
    }

    fn row_norm_sqr_sum(&self) -> f64 {
        // Every row of pattern ℓ has squared norm Σ_t |d_ℓ(t)|².
        self.n as f64 * self.codes.iter().map(ComplexVector::norm_sqr).sum::<f64>()
    }

    fn ffts_per_application(&self) -> u64 {
        self.codes.len() as u64
    }
}
