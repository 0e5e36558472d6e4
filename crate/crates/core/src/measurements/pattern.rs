use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::vector::ComplexVector;

const PROBABILITY_TOL: f64 = 1e-12;
const MOMENT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternKind {
    Octanary,
    Ternary,
    Custom,
}

impl PatternKind {
    /// The built-in distribution of this kind; `Custom` has none.
    pub fn distribution(self) -> Result<PatternDistribution> {
        match self {
            PatternKind::Octanary => Ok(PatternDistribution::octanary()),
            PatternKind::Ternary => Ok(PatternDistribution::ternary()),
            PatternKind::Custom => Err(Error::InvalidDistribution("custom patterns need an atom table".into())),
        }
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PatternKind::Octanary => "octanary",
            PatternKind::Ternary => "ternary",
            PatternKind::Custom => "custom",
        })
    }
}

/// A finite distribution for the modulation variable `d`: a table of atoms
/// and their probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternDistribution {
    kind: PatternKind,
    atoms: Vec<(Complex64, f64)>,
    cumulative: Vec<f64>,
}

impl PatternDistribution {
    pub fn new(kind: PatternKind, atoms: Vec<(Complex64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("atom table is empty".into()));
        }
        for (i, (value, p)) in atoms.iter().enumerate() {
            if !value.re.is_finite() || !value.im.is_finite() {
                return Err(Error::InvalidDistribution(format!("atom {i} is not finite")));
            }
            if !(p.is_finite() && *p > 0.0) {
                return Err(Error::InvalidDistribution(format!("atom {i} has non-positive probability {p}")));
            }
        }
        let total: f64 = atoms.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}, not 1")));
        }
        let cumulative = atoms
            .iter()
            .scan(0.0, |acc, (_, p)| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        Ok(Self { kind, atoms, cumulative })
    }

    /// `d = b1·b2` with `b1` uniform on `{1, −1, −i, i}` and `b2 = √2/2` with
    /// probability 4/5, `√3` with probability 1/5.
    pub fn octanary() -> Self {
        let units = [
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
        ];
        let radii = [(FRAC_1_SQRT_2, 0.8), (3f64.sqrt(), 0.2)];
        let atoms = units
            .iter()
            .flat_map(|u| radii.iter().map(move |&(r, p)| (u * r, 0.25 * p)))
            .collect();
        Self::new(PatternKind::Octanary, atoms).expect("octanary table is valid")
    }

    /// `d ∈ {1, 0, −1}` with probabilities `1/4, 1/2, 1/4`.
    pub fn ternary() -> Self {
        let atoms = vec![
            (Complex64::new(1.0, 0.0), 0.25),
            (Complex64::new(0.0, 0.0), 0.5),
            (Complex64::new(-1.0, 0.0), 0.25),
        ];
        Self::new(PatternKind::Ternary, atoms).expect("ternary table is valid")
    }

    pub fn custom(atoms: Vec<(Complex64, f64)>) -> Result<Self> {
        Self::new(PatternKind::Custom, atoms)
    }

    /// Parses `"re,im,prob;re,im,prob;..."`.
    pub fn parse_atoms(spec: &str) -> Result<Self> {
        let mut atoms = Vec::new();
        for (i, part) in spec.split(';').map(str::trim).filter(|p| !p.is_empty()).enumerate() {
            let fields: Vec<&str> = part.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::InvalidDistribution(format!(
                    "atom {i}: expected `re,im,prob`, got `{part}`"
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::InvalidDistribution(format!("atom {i}: `{s}`: {e}")))
            };
            atoms.push((Complex64::new(parse(fields[0])?, parse(fields[1])?), parse(fields[2])?));
        }
        Self::custom(atoms)
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }

    pub fn atoms(&self) -> &[(Complex64, f64)] {
        &self.atoms
    }

    /// Largest atom magnitude.
    pub fn max_abs(&self) -> f64 {
        self.atoms.iter().map(|(v, _)| v.norm()).fold(0.0, f64::max)
    }

    fn draw(&self, rng: &mut RandomSource) -> Complex64 {
        let u: f64 = rng.random();
        let idx = self.cumulative.partition_point(|&c| c <= u).min(self.atoms.len() - 1);
        self.atoms[idx].0
    }

    /// `n` i.i.d. draws from the atom table.
    pub fn sample(&self, n: usize, rng: &mut RandomSource) -> Result<ComplexVector> {
        if n == 0 {
            return Err(Error::InvalidDimension("pattern length must be at least 1".into()));
        }
        ComplexVector::new((0..n).map(|_| self.draw(rng)).collect())
    }
}

/// One of the admissibility conditions checked by [`pattern_moments`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `E d = 0`
    ZeroMean,
    /// `E d² = 0`
    ZeroSecondMoment,
    /// `E|d|⁴ = 2 (E|d|²)²`
    FourthMoment,
    /// The distribution of `d` equals that of `−d`.
    Symmetric,
    /// `|d| ≤ M` for some finite `M`.
    Bounded,
    /// `E|d|² > 0`; a distribution concentrated at zero measures nothing.
    NonDegenerate,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::ZeroMean => "E d = 0",
            Condition::ZeroSecondMoment => "E d^2 = 0",
            Condition::FourthMoment => "E|d|^4 = 2(E|d|^2)^2",
            Condition::Symmetric => "symmetric",
            Condition::Bounded => "bounded",
            Condition::NonDegenerate => "E|d|^2 > 0",
        })
    }
}

/// Exact moments of a pattern distribution and its admissibility verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub mean: Complex64,
    pub second_moment: Complex64,
    pub abs2: f64,
    pub abs4: f64,
    pub max_abs: f64,
    pub symmetric: bool,
    pub admissible: bool,
    pub failed: Vec<Condition>,
}

/// Enumerates the atom table to compute `E d`, `E d²`, `E|d|²`, `E|d|⁴` and
/// checks admissibility with tolerance `1e-12`.
pub fn pattern_moments(dist: &PatternDistribution) -> MomentReport {
    let mut mean = Complex64::new(0.0, 0.0);
    let mut second_moment = Complex64::new(0.0, 0.0);
    let mut abs2 = 0.0;
    let mut abs4 = 0.0;
    for &(d, p) in dist.atoms() {
        mean += d * p;
        second_moment += d * d * p;
        let a2 = d.norm_sqr();
        abs2 += a2 * p;
        abs4 += a2 * a2 * p;
    }
    let max_abs = dist.max_abs();
    let symmetric = is_symmetric(dist.atoms());

    let mut failed = Vec::new();
    if mean.norm() > MOMENT_TOL {
        failed.push(Condition::ZeroMean);
    }
    if second_moment.norm() > MOMENT_TOL {
        failed.push(Condition::ZeroSecondMoment);
    }
    if (abs4 - 2.0 * abs2 * abs2).abs() > MOMENT_TOL {
        failed.push(Condition::FourthMoment);
    }
    if !symmetric {
        failed.push(Condition::Symmetric);
    }
    if !max_abs.is_finite() {
        failed.push(Condition::Bounded);
    }
    if abs2 <= MOMENT_TOL {
        failed.push(Condition::NonDegenerate);
    }
    MomentReport {
        mean,
        second_moment,
        abs2,
        abs4,
        max_abs,
        symmetric,
        admissible: failed.is_empty(),
        failed,
    }
}

/// Probability mass at `v` must equal the mass at `−v` for every atom.
fn is_symmetric(atoms: &[(Complex64, f64)]) -> bool {
    let mass_at = |v: Complex64| -> f64 {
        atoms
            .iter()
            .filter(|(a, _)| (a - v).norm() <= MOMENT_TOL)
            .map(|(_, p)| p)
            .sum()
    };
    atoms
        .iter()
        .all(|&(v, _)| (mass_at(v) - mass_at(-v)).abs() <= MOMENT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12
    }

    #[test]
    fn octanary_is_admissible() {
        let r = pattern_moments(&PatternDistribution::octanary());
        assert!(r.mean.norm() <= 1e-12);
        assert!(r.second_moment.norm() <= 1e-12);
        assert!(close(r.abs2, 1.0), "E|d|^2 = {}", r.abs2);
        assert!(close(r.abs4, 2.0), "E|d|^4 = {}", r.abs4);
        assert!(close(r.max_abs, 3f64.sqrt()));
        assert!(r.symmetric);
        assert!(r.admissible);
        assert!(r.failed.is_empty());
    }

    #[test]
    fn ternary_fails_only_second_moment() {
        let r = pattern_moments(&PatternDistribution::ternary());
        assert!(r.mean.norm() <= 1e-12);
        assert!(close(r.second_moment.re, 0.5) && r.second_moment.im == 0.0);
        assert!(close(r.abs2, 0.5));
        assert!(close(r.abs4, 0.5));
        assert!(!r.admissible);
        assert_eq!(r.failed, vec![Condition::ZeroSecondMoment]);
    }

    #[test]
    fn point_mass_at_zero_is_degenerate() {
        let dist = PatternDistribution::custom(vec![(Complex64::new(0.0, 0.0), 1.0)]).unwrap();
        let r = pattern_moments(&dist);
        assert_eq!((r.abs2, r.abs4, r.max_abs), (0.0, 0.0, 0.0));
        assert_eq!(r.mean, Complex64::new(0.0, 0.0));
        assert!(!r.admissible);
        assert_eq!(r.failed, vec![Condition::NonDegenerate]);
    }

    #[test]
    fn asymmetric_table_is_flagged() {
        let dist = PatternDistribution::custom(vec![
            (Complex64::new(1.0, 0.0), 0.5),
            (Complex64::new(0.0, 1.0), 0.5),
        ])
        .unwrap();
        let r = pattern_moments(&dist);
        assert!(!r.symmetric);
        assert!(r.failed.contains(&Condition::Symmetric));
    }

    #[test]
    fn invalid_tables() {
        assert!(matches!(PatternDistribution::custom(vec![]), Err(Error::InvalidDistribution(_))));
        assert!(PatternDistribution::custom(vec![(Complex64::new(1.0, 0.0), 0.7)]).is_err());
        assert!(PatternDistribution::custom(vec![
            (Complex64::new(1.0, 0.0), 1.5),
            (Complex64::new(-1.0, 0.0), -0.5)
        ])
        .is_err());
        assert!(PatternDistribution::parse_atoms("1,0").is_err());
        assert!(PatternDistribution::parse_atoms("1,0,x").is_err());
    }

    #[test]
    fn parse_atoms_round_trip() {
        let dist = PatternDistribution::parse_atoms("1,0,0.25; 0,0,0.5; -1,0,0.25").unwrap();
        assert_eq!(dist.atoms(), PatternDistribution::ternary().atoms());
        assert_eq!(pattern_moments(&dist).failed, vec![Condition::ZeroSecondMoment]);
    }

    #[test]
    fn octanary_draws_lie_in_atom_set() {
        let dist = PatternDistribution::octanary();
        let h = FRAC_1_SQRT_2;
        let s3 = 3f64.sqrt();
        let allowed = [
            Complex64::new(h, 0.0),
            Complex64::new(-h, 0.0),
            Complex64::new(0.0, h),
            Complex64::new(0.0, -h),
            Complex64::new(s3, 0.0),
            Complex64::new(-s3, 0.0),
            Complex64::new(0.0, s3),
            Complex64::new(0.0, -s3),
        ];
        let draws = dist.sample(10_000, &mut RandomSource::new(8, 0)).unwrap();
        for d in draws.iter() {
            assert!(allowed.iter().any(|a| (a - d).norm() < 1e-15), "unexpected atom {d}");
            assert!(d.norm() <= s3 + 1e-15);
        }
    }

    #[test]
    fn ternary_frequencies() {
        let draws = PatternDistribution::ternary().sample(100_000, &mut RandomSource::new(9, 0)).unwrap();
        let n = draws.len() as f64;
        let freq = |target: f64| draws.iter().filter(|d| d.re == target).count() as f64 / n;
        assert!((freq(1.0) - 0.25).abs() < 0.02);
        assert!((freq(0.0) - 0.5).abs() < 0.02);
        assert!((freq(-1.0) - 0.25).abs() < 0.02);
    }

    #[test]
    fn single_atom_is_constant() {
        let dist = PatternDistribution::custom(vec![(Complex64::new(1.0, 0.0), 1.0)]).unwrap();
        let draws = dist.sample(17, &mut RandomSource::new(1, 0)).unwrap();
        assert!(draws.iter().all(|d| *d == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn moments_do_not_depend_on_rng() {
        let a = pattern_moments(&PatternDistribution::octanary());
        let _ = PatternDistribution::octanary().sample(100, &mut RandomSource::new(1, 1));
        assert_eq!(a, pattern_moments(&PatternDistribution::octanary()));
    }
}
