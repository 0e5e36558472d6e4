use num_complex::Complex64;

use super::{MeasurementOperator, Observations};
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::vector::{sample_complex_gaussian, ComplexVector};

/// `m` i.i.d. complex Gaussian sampling vectors `a_r ~ N(0, I/2) + iN(0, I/2)`,
/// stored densely row by row.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianEnsemble {
    n: usize,
    m: usize,
    /// Row-major `m × n`; row `r` holds `a_r`.
    rows: Vec<Complex64>,
}

impl GaussianEnsemble {
    pub fn sample(n: usize, m: usize, rng: &mut RandomSource) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidDimension(format!(
                "Gaussian ensemble needs n, m >= 1 (got n = {n}, m = {m})"
            )));
        }
        let mut rows = Vec::with_capacity(n * m);
        for _ in 0..m {
            rows.extend(sample_complex_gaussian(n, rng)?.into_inner());
        }
        Ok(Self { n, m, rows })
    }

    /// Builds an ensemble from explicit sampling vectors `a_r`.
    pub fn from_rows(rows: &[ComplexVector]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::InvalidDimension("at least one row required".into()))?;
        let n = first.len();
        let mut flat = Vec::with_capacity(n * rows.len());
        for row in rows {
            if row.len() != n {
                return Err(Error::mismatch(n, row.len()));
            }
            flat.extend_from_slice(row.as_slice());
        }
        Ok(Self { n, m: rows.len(), rows: flat })
    }

    /// The sampling vector `a_r`.
    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.rows[r * self.n..(r + 1) * self.n]
    }

    /// Splits rows and observations into `groups` consecutive blocks. Each
    /// block gets `⌊m/groups⌋` rows; the remainder goes to block 0.
    pub fn partition(&self, y: &Observations, groups: usize) -> Result<Vec<(GaussianEnsemble, Observations)>> {
        if y.len() != self.m {
            return Err(Error::mismatch(self.m, y.len()));
        }
        let sizes = block_sizes(self.m, groups)?;
        let mut start = 0;
        let mut out = Vec::with_capacity(groups);
        for size in sizes {
            let rows = self.rows[start * self.n..(start + size) * self.n].to_vec();
            let obs = Observations::new(y.as_slice()[start..start + size].to_vec())?;
            out.push((GaussianEnsemble { n: self.n, m: size, rows }, obs));
            start += size;
        }
        Ok(out)
    }
}

pub(super) fn block_sizes(total: usize, groups: usize) -> Result<Vec<usize>> {
    if groups == 0 || total < groups {
        return Err(Error::InvalidDimension(format!(
            "cannot split {total} items into {groups} non-empty groups"
        )));
    }
    let base = total / groups;
    let mut sizes = vec![base; groups];
    sizes[0] += total - base * groups;
    Ok(sizes)
}

impl MeasurementOperator for GaussianEnsemble {
    fn dim(&self) -> usize {
        self.n
    }

    fn num_measurements(&self) -> usize {
        self.m
    }

    fn forward_into(&self, z: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(z.len(), self.n);
        assert_eq!(out.len(), self.m);
        for (o, row) in out.iter_mut().zip(self.rows.chunks_exact(self.n)) {
            *o = row.iter().zip(z).map(|(a, zt)| a.conj() * zt).sum();
        }
    }

    fn adjoint_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(v.len(), self.m);
        assert_eq!(out.len(), self.n);
        out.fill(Complex64::new(0.0, 0.0));
        for (vr, row) in v.iter().zip(self.rows.chunks_exact(self.n)) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += vr * a;
            }
        }
    }

    fn row_norm_sqr_sum(&self) -> f64 {
        self.rows.iter().map(|c| c.norm_sqr()).sum()
    }
}
