//! Inhomogeneous ensembles `A = M + C ⋆ X` with independent entries.
//!
//! Complex variance convention: `E|Z|² = 1` for unit variance, and the complex
//! Gaussian has independent real and imaginary parts of variance 1/2 each.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::serde_complex;
use crate::linalg::ComplexMatrix;
use crate::seed::{map_trials, SeedSpec};
use crate::stats::MeanEstimate;
use crate::{Error, Real, Result, C64};

/// Probabilities of a finite law must sum to one within this tolerance.
pub const PROBABILITY_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(with = "serde_complex")]
    pub value: C64,
    pub prob: f64,
}

/// Law of a single complex entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    /// Circular Gaussian with `E|Z|² = variance`.
    ComplexGaussian { variance: f64 },
    /// Uniform on `{1, -1, i, -i}`.
    FourPointUniform,
    /// Uniform on `{1, -1}`.
    RealRademacher,
    /// Finite support with explicit probabilities.
    LatticeUniform { support: Vec<Atom> },
    Constant {
        #[serde(with = "serde_complex")]
        value: C64,
    },
    /// `value` with probability `p`, else 0.
    SparseBernoulli {
        p: f64,
        #[serde(with = "serde_complex")]
        value: C64,
    },
    /// `factor · Z` for `Z` drawn from `base`.
    Scaled {
        base: Box<DistributionSpec>,
        #[serde(with = "serde_complex")]
        factor: C64,
    },
}

const FOUR_POINTS: [C64; 4] = [
    C64::new(1.0, 0.0),
    C64::new(-1.0, 0.0),
    C64::new(0.0, 1.0),
    C64::new(0.0, -1.0),
];

impl DistributionSpec {
    pub fn gaussian() -> Self {
        DistributionSpec::ComplexGaussian { variance: 1.0 }
    }

    pub fn constant(value: C64) -> Self {
        DistributionSpec::Constant { value }
    }

    pub fn scaled(&self, factor: C64) -> Self {
        DistributionSpec::Scaled {
            base: Box::new(self.clone()),
            factor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DistributionSpec::ComplexGaussian { variance } => {
                if !(*variance > 0.0 && variance.is_finite()) {
                    return Err(Error::validation(format!(
                        "complex Gaussian variance must be positive, got {variance}"
                    )));
                }
            }
            DistributionSpec::LatticeUniform { support } => {
                if support.is_empty() {
                    return Err(Error::validation("lattice law has empty support"));
                }
                if support.iter().any(|a| !(a.prob >= 0.0) || !a.value.re.is_finite() || !a.value.im.is_finite()) {
                    return Err(Error::validation("lattice law has a negative probability or non-finite atom"));
                }
                let total: f64 = support.iter().map(|a| a.prob).sum();
                if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
                    return Err(Error::validation(format!("probabilities sum to {total}, not 1")));
                }
            }
            DistributionSpec::SparseBernoulli { p, value } => {
                if !(0.0..=1.0).contains(p) || !value.re.is_finite() || !value.im.is_finite() {
                    return Err(Error::validation(format!("sparse Bernoulli needs p in [0,1], got {p}")));
                }
            }
            DistributionSpec::Constant { value } => {
                if !value.re.is_finite() || !value.im.is_finite() {
                    return Err(Error::validation("constant law is not finite"));
                }
            }
            DistributionSpec::Scaled { base, factor } => {
                if !factor.re.is_finite() || !factor.im.is_finite() {
                    return Err(Error::validation("scale factor is not finite"));
                }
                base.validate()?;
            }
            DistributionSpec::FourPointUniform | DistributionSpec::RealRademacher => {}
        }
        Ok(())
    }

    /// One draw. The caller is expected to have validated the spec.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> C64 {
        match self {
            DistributionSpec::ComplexGaussian { variance } => {
                let s = (variance * 0.5).sqrt();
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                C64::new(s * re, s * im)
            }
            DistributionSpec::FourPointUniform => FOUR_POINTS[rng.random_range(0..4)],
            DistributionSpec::RealRademacher => {
                if rng.random::<bool>() {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(-1.0, 0.0)
                }
            }
            DistributionSpec::LatticeUniform { support } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for a in support {
                    acc += a.prob;
                    if u < acc {
                        return a.value;
                    }
                }
                support.last().map_or(C64::new(0.0, 0.0), |a| a.value)
            }
            DistributionSpec::Constant { value } => *value,
            DistributionSpec::SparseBernoulli { p, value } => {
                if rng.random::<f64>() < *p {
                    *value
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            DistributionSpec::Scaled { base, factor } => base.draw(rng) * factor,
        }
    }

    /// Atoms and probabilities for finitely supported laws.
    pub fn support(&self) -> Option<Vec<(C64, f64)>> {
        match self {
            DistributionSpec::ComplexGaussian { .. } => None,
            DistributionSpec::FourPointUniform => Some(FOUR_POINTS.iter().map(|&z| (z, 0.25)).collect()),
            DistributionSpec::RealRademacher => {
                Some(vec![(C64::new(1.0, 0.0), 0.5), (C64::new(-1.0, 0.0), 0.5)])
            }
            DistributionSpec::LatticeUniform { support } => {
                Some(support.iter().map(|a| (a.value, a.prob)).collect())
            }
            DistributionSpec::Constant { value } => Some(vec![(*value, 1.0)]),
            DistributionSpec::SparseBernoulli { p, value } => {
                Some(vec![(*value, *p), (C64::new(0.0, 0.0), 1.0 - p)])
            }
            DistributionSpec::Scaled { base, factor } => {
                base.support().map(|s| s.into_iter().map(|(z, p)| (z * factor, p)).collect())
            }
        }
    }

    /// Exact `E Z`.
    pub fn mean(&self) -> C64 {
        match self {
            DistributionSpec::ComplexGaussian { .. } => C64::new(0.0, 0.0),
            DistributionSpec::Scaled { base, factor } => base.mean() * factor,
            _ => self
                .support()
                .expect("finite support")
                .iter()
                .fold(C64::new(0.0, 0.0), |acc, (z, p)| acc + z * *p),
        }
    }

    /// Exact `E|Z|²`.
    pub fn second_moment(&self) -> f64 {
        match self {
            DistributionSpec::ComplexGaussian { variance } => *variance,
            DistributionSpec::Scaled { base, factor } => base.second_moment() * factor.norm_sqr(),
            _ => self
                .support()
                .expect("finite support")
                .iter()
                .map(|(z, p)| z.norm_sqr() * p)
                .sum(),
        }
    }

    /// True when the law is a point mass.
    pub fn is_degenerate(&self) -> bool {
        match self.support() {
            Some(s) => {
                let atoms: Vec<_> = s.iter().filter(|(_, p)| *p > 0.0).collect();
                atoms.windows(2).all(|w| w[0].0 == w[1].0)
            }
            None => false,
        }
    }
}

/// One draw from `dist` on the stream of `seed`.
pub fn sample_scalar(dist: &DistributionSpec, seed: SeedSpec) -> Result<C64> {
    dist.validate()?;
    Ok(dist.draw(&mut seed.rng()))
}

/// A shift or scale profile: constant entries, a multiple of the identity, or
/// an explicit matrix. Scale profiles use only the real parts.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant(C64),
    Identity(C64),
    Dense(ComplexMatrix<f64>),
}

impl Profile {
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::Identity(c) => {
                if i == j {
                    *c
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            Profile::Dense(m) => m[(i, j)],
        }
    }

    fn dims(&self) -> Option<(usize, usize)> {
        match self {
            Profile::Dense(m) => Some((m.rows(), m.cols())),
            _ => None,
        }
    }
}

/// Per-entry laws of the noise matrix `X`.
#[derive(Debug, Clone, PartialEq)]
pub enum EntryLaw {
    Uniform(DistributionSpec),
    /// Row-major, `n²` laws.
    PerEntry(Vec<DistributionSpec>),
}

impl EntryLaw {
    #[inline]
    pub fn at(&self, n: usize, i: usize, j: usize) -> &DistributionSpec {
        match self {
            EntryLaw::Uniform(d) => d,
            EntryLaw::PerEntry(v) => &v[i * n + j],
        }
    }
}

/// `A = M + C ⋆ X` with shift `M`, nonnegative scale `C` and independent `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub n: usize,
    pub shift: Profile,
    pub scale: Profile,
    pub entry_law: EntryLaw,
    pub declared_b: f64,
    pub declared_k: f64,
    /// `(α, β)` with `α ≤ σᵢⱼ ≤ β`, enforced when present (universality mode).
    pub bounds: Option<(f64, f64)>,
}

impl EnsembleSpec {
    /// Zero shift, unit scale, i.i.d. entries from `dist`.
    pub fn iid(n: usize, dist: DistributionSpec) -> Self {
        EnsembleSpec {
            n,
            shift: Profile::Constant(C64::new(0.0, 0.0)),
            scale: Profile::Constant(C64::new(1.0, 0.0)),
            entry_law: EntryLaw::Uniform(dist),
            declared_b: 0.5,
            declared_k: 2.0,
            bounds: None,
        }
    }

    /// Complex Ginibre: i.i.d. entries with `E|Z|² = 1`.
    pub fn ginibre(n: usize) -> Self {
        Self::iid(n, DistributionSpec::gaussian())
    }

    pub fn with_shift(mut self, shift: Profile) -> Self {
        self.shift = shift;
        self
    }

    pub fn with_scale(mut self, scale: Profile) -> Self {
        self.scale = scale;
        self
    }

    #[inline]
    pub fn mu(&self, i: usize, j: usize) -> C64 {
        self.shift.entry(i, j)
    }

    #[inline]
    pub fn sigma(&self, i: usize, j: usize) -> f64 {
        self.scale.entry(i, j).re
    }

    pub fn law(&self, i: usize, j: usize) -> &DistributionSpec {
        self.entry_law.at(self.n, i, j)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Err(Error::validation("ensemble dimension must be positive"));
        }
        for (name, p) in [("shift", &self.shift), ("scale", &self.scale)] {
            if let Some((r, c)) = p.dims() {
                if (r, c) != (n, n) {
                    return Err(Error::validation(format!("{name} is {r}x{c}, expected {n}x{n}")));
                }
            }
        }
        match &self.entry_law {
            EntryLaw::Uniform(d) => d.validate()?,
            EntryLaw::PerEntry(v) => {
                if v.len() != n * n {
                    return Err(Error::validation(format!("{} entry laws for an {n}x{n} ensemble", v.len())));
                }
                v.iter().try_for_each(DistributionSpec::validate)?;
            }
        }
        if !(self.declared_b > 0.0 && self.declared_b < 1.0) {
            return Err(Error::validation(format!("declared_b must lie in (0,1), got {}", self.declared_b)));
        }
        if !(self.declared_k > 0.0) {
            return Err(Error::validation(format!("declared_K must be positive, got {}", self.declared_k)));
        }
        if let Some((alpha, beta)) = self.bounds {
            if !(alpha > 0.0 && beta.is_finite() && alpha <= beta) {
                return Err(Error::validation(format!("need 0 < alpha <= beta < inf, got ({alpha}, {beta})")));
            }
        }
        for i in 0..n {
            for j in 0..n {
                let s = self.scale.entry(i, j);
                if !(s.re >= 0.0 && s.re.is_finite()) || s.im != 0.0 {
                    return Err(Error::validation(format!("scale entry ({i},{j}) = {s} is not a nonnegative real")));
                }
                if let Some((alpha, beta)) = self.bounds {
                    if s.re < alpha || s.re > beta {
                        return Err(Error::validation(format!(
                            "scale entry ({i},{j}) = {} outside [{alpha}, {beta}]",
                            s.re
                        )));
                    }
                }
                let m = self.shift.entry(i, j);
                if !m.re.is_finite() || !m.im.is_finite() {
                    return Err(Error::validation(format!("shift entry ({i},{j}) is not finite")));
                }
            }
        }
        Ok(())
    }

    /// Same profiles at another dimension; dense profiles pin the dimension.
    pub fn resized(&self, n: usize) -> Result<Self> {
        if n == self.n {
            return Ok(self.clone());
        }
        if self.shift.dims().is_some() || self.scale.dims().is_some() {
            return Err(Error::validation(format!(
                "ensemble with explicit {0}x{0} profiles cannot be resized to {n}",
                self.n
            )));
        }
        if let EntryLaw::PerEntry(_) = self.entry_law {
            return Err(Error::validation("ensemble with per-entry laws cannot be resized"));
        }
        let mut out = self.clone();
        out.n = n;
        Ok(out)
    }

    /// Exact `E|A_ij|² = |μ + σ E x|² + σ² Var x`.
    pub fn entry_second_moment(&self, i: usize, j: usize) -> f64 {
        let law = self.law(i, j);
        let (mu, sigma) = (self.mu(i, j), self.sigma(i, j));
        let m = law.mean();
        let var = law.second_moment() - m.norm_sqr();
        (mu + m * sigma).norm_sqr() + sigma * sigma * var
    }

    /// Largest column second moment `max_j Σ_i E|A_ij|²`.
    pub fn max_column_second_moment(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.entry_second_moment(i, j)).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Symmetrization-relevant law of column `j`: `σᵢⱼ·xᵢⱼ` for each row `i`.
    pub fn column_noise_laws(&self, j: usize) -> Vec<DistributionSpec> {
        (0..self.n)
            .map(|i| self.law(i, j).scaled(C64::new(self.sigma(i, j), 0.0)))
            .collect()
    }
}

/// Noise draws `xᵢⱼ`, row-major, from one trial stream.
pub fn sample_noise(ens: &EnsembleSpec, seed: SeedSpec) -> Vec<C64> {
    let n = ens.n;
    let mut rng = seed.rng();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(ens.law(i, j).draw(&mut rng));
        }
    }
    out
}

/// `Aᵢⱼ = μᵢⱼ + σᵢⱼ·xᵢⱼ`, deterministic in `seed`.
pub fn sample_matrix<T: Real>(ens: &EnsembleSpec, seed: SeedSpec) -> Result<ComplexMatrix<T>> {
    ens.validate()?;
    Ok(sample_matrix_unchecked(ens, seed))
}

/// [`sample_matrix`] without re-validating; for hot loops over a validated spec.
pub fn sample_matrix_unchecked<T: Real>(ens: &EnsembleSpec, seed: SeedSpec) -> ComplexMatrix<T> {
    let n = ens.n;
    let x = sample_noise(ens, seed);
    ComplexMatrix::from_fn(n, n, |i, j| {
        let a = ens.mu(i, j) + x[i * n + j] * ens.sigma(i, j);
        Complex::new(T::lit(a.re), T::lit(a.im))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsBudget {
    /// Estimate of `n⁻² Σᵢⱼ E|Aᵢⱼ|²`.
    pub estimate: MeanEstimate,
    pub declared_k: f64,
    /// `estimate - 3·SE ≤ K`.
    pub within_budget: bool,
}

pub fn check_hs_budget(ens: &EnsembleSpec, trials: usize, base_seed: u64) -> Result<HsBudget> {
    ens.validate()?;
    if trials == 0 {
        return Err(Error::validation("trials must be at least 1"));
    }
    let n2 = (ens.n * ens.n) as f64;
    let per_trial = map_trials(base_seed, trials, |seed| {
        let a: ComplexMatrix<f64> = sample_matrix_unchecked(ens, seed);
        a.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>() / n2
    });
    let estimate = MeanEstimate::from_samples(&per_trial);
    Ok(HsBudget {
        estimate,
        declared_k: ens.declared_k,
        within_budget: estimate.mean - 3.0 * estimate.std_err <= ens.declared_k,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityCheck {
    pub estimate: MeanEstimate,
    /// `estimate - 3·SE ≥ b`.
    pub pass: bool,
}

/// Both variants of the b-condition on the symmetrized entry `Z̃ = Z′ − Z″`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BCondition {
    pub b: f64,
    /// `P(b ≤ |Z̃| ≤ 1/b) ≥ b`.
    pub two_sided: ProbabilityCheck,
    /// `P(|Z̃| ≥ b) ≥ b`.
    pub one_sided: ProbabilityCheck,
}

pub fn check_b_condition(dist: &DistributionSpec, b: f64, trials: usize, seed: SeedSpec) -> Result<BCondition> {
    dist.validate()?;
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::validation(format!("b must lie in (0,1), got {b}")));
    }
    if trials == 0 {
        return Err(Error::validation("trials must be at least 1"));
    }
    let mut rng = seed.rng();
    let (mut two, mut one) = (0usize, 0usize);
    for _ in 0..trials {
        let d = (dist.draw(&mut rng) - dist.draw(&mut rng)).norm();
        if d >= b {
            one += 1;
            if d <= 1.0 / b {
                two += 1;
            }
        }
    }
    let check = |hits| {
        let estimate = MeanEstimate::proportion(hits, trials);
        ProbabilityCheck {
            estimate,
            pass: estimate.mean - 3.0 * estimate.std_err >= b,
        }
    };
    Ok(BCondition {
        b,
        two_sided: check(two),
        one_sided: check(one),
    })
}

/// Estimate of `n⁻² Σᵢⱼ E[|xᵢⱼ|² 1{|xᵢⱼ| ≥ ε√n}]`.
pub fn check_pastur(ens: &EnsembleSpec, eps: f64, trials: usize, base_seed: u64) -> Result<MeanEstimate> {
    ens.validate()?;
    if !(eps > 0.0) {
        return Err(Error::validation(format!("eps must be positive, got {eps}")));
    }
    if trials == 0 {
        return Err(Error::validation("trials must be at least 1"));
    }
    let n = ens.n as f64;
    let threshold = eps * n.sqrt();
    let per_trial = map_trials(base_seed, trials, |seed| {
        sample_noise(ens, seed)
            .iter()
            .map(|x| {
                let m = x.norm();
                if m >= threshold {
                    m * m
                } else {
                    0.0
                }
            })
            .sum::<f64>()
            / (n * n)
    });
    Ok(MeanEstimate::from_samples(&per_trial))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_variance_laws() -> Vec<DistributionSpec> {
        vec![
            DistributionSpec::gaussian(),
            DistributionSpec::FourPointUniform,
            DistributionSpec::RealRademacher,
            DistributionSpec::LatticeUniform {
                support: vec![
                    Atom { value: C64::new(2.0, 0.0), prob: 0.125 },
                    Atom { value: C64::new(-2.0, 0.0), prob: 0.125 },
                    Atom { value: C64::new(0.0, 0.0), prob: 0.75 },
                ],
            },
        ]
    }

    #[test]
    fn constant_and_four_point_draws() {
        for t in 0..20 {
            let s = SeedSpec::new(3, t);
            assert_eq!(sample_scalar(&DistributionSpec::constant(C64::new(0.0, 0.0)), s).unwrap(), C64::new(0.0, 0.0));
            let z = sample_scalar(&DistributionSpec::FourPointUniform, s).unwrap();
            assert!(FOUR_POINTS.contains(&z));
        }
    }

    #[test]
    fn gaussian_mean_is_small() {
        let mut rng = SeedSpec::new(17, 0).rng();
        let g = DistributionSpec::gaussian();
        let m = 100_000;
        let mean = (0..m).fold(C64::new(0.0, 0.0), |acc, _| acc + g.draw(&mut rng)) / m as f64;
        // |mean|² is exponential with mean 1/m; the bound is exceeded with probability e^{-18}
        assert!(mean.norm() <= 3.0 * 10f64.powf(-2.5) * 2f64.sqrt());
    }

    #[test]
    fn unit_variance_laws_have_unit_second_moment() {
        for (k, law) in unit_variance_laws().into_iter().enumerate() {
            assert!((law.second_moment() - 1.0).abs() < 1e-15);
            let mut rng = SeedSpec::new(99, k as u64).rng();
            let draws: Vec<C64> = (0..100_000).map(|_| law.draw(&mut rng)).collect();
            let re = MeanEstimate::from_samples(&draws.iter().map(|z| z.re).collect::<Vec<_>>());
            let im = MeanEstimate::from_samples(&draws.iter().map(|z| z.im).collect::<Vec<_>>());
            let sq = MeanEstimate::from_samples(&draws.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>());
            assert!(re.mean.abs() <= 4.0 * re.std_err, "{law:?}: {re:?}");
            assert!(im.mean.abs() <= 4.0 * im.std_err.max(1e-300), "{law:?}: {im:?}");
            assert!((sq.mean - 1.0).abs() <= 4.0 * sq.std_err.max(1e-15), "{law:?}: {sq:?}");
        }
    }

    #[test]
    fn gaussian_parts_have_half_variance() {
        let mut rng = SeedSpec::new(5, 5).rng();
        let g = DistributionSpec::gaussian();
        let re: Vec<f64> = (0..100_000).map(|_| g.draw(&mut rng).re.powi(2)).collect();
        let e = MeanEstimate::from_samples(&re);
        assert!((e.mean - 0.5).abs() <= 4.0 * e.std_err);
    }

    #[test]
    fn invalid_laws_are_rejected() {
        let bad = DistributionSpec::LatticeUniform {
            support: vec![Atom { value: C64::new(1.0, 0.0), prob: 0.6 }, Atom { value: C64::new(-1.0, 0.0), prob: 0.3 }],
        };
        assert!(sample_scalar(&bad, SeedSpec::new(0, 0)).is_err());
        assert!(DistributionSpec::ComplexGaussian { variance: 0.0 }.validate().is_err());
    }

    #[test]
    fn zero_noise_gives_the_shift() {
        let ens = EnsembleSpec::ginibre(5)
            .with_shift(Profile::Identity(C64::new(1.0, 0.0)))
            .with_scale(Profile::Constant(C64::new(0.0, 0.0)));
        let a: ComplexMatrix<f64> = sample_matrix(&ens, SeedSpec::new(1, 2)).unwrap();
        assert_eq!(a, ComplexMatrix::identity(5));
    }

    #[test]
    fn zero_scale_entries_reproduce_shift_exactly() {
        let n = 6;
        let shift = ComplexMatrix::from_fn(n, n, |i, j| C64::new(i as f64 * 0.3, -(j as f64) / 7.0));
        let scale = ComplexMatrix::from_fn(n, n, |i, j| C64::new(if (i + j) % 2 == 0 { 0.0 } else { 1.5 }, 0.0));
        let ens = EnsembleSpec::ginibre(n).with_shift(Profile::Dense(shift.clone())).with_scale(Profile::Dense(scale));
        let a: ComplexMatrix<f64> = sample_matrix(&ens, SeedSpec::new(8, 0)).unwrap();
        for i in 0..n {
            for j in 0..n {
                if (i + j) % 2 == 0 {
                    assert_eq!(a[(i, j)], shift[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let ens = EnsembleSpec::iid(8, DistributionSpec::FourPointUniform);
        let a: ComplexMatrix<f64> = sample_matrix(&ens, SeedSpec::new(4, 9)).unwrap();
        let b: ComplexMatrix<f64> = sample_matrix(&ens, SeedSpec::new(4, 9)).unwrap();
        assert_eq!(a, b);
        let c: ComplexMatrix<f64> = sample_matrix(&ens, SeedSpec::new(4, 10)).unwrap();
        assert_ne!(a, c);
        let a32: ComplexMatrix<f32> = sample_matrix(&ens, SeedSpec::new(4, 9)).unwrap();
        assert_eq!(a32[(2, 3)].re as f64, a[(2, 3)].re);
    }

    #[test]
    fn mean_hs_norm_of_ginibre() {
        // E‖A‖²_HS = Σσ² = 256 at n = 16
        let ens = EnsembleSpec::ginibre(16);
        let vals = map_trials(21, 500, |s| {
            let a: ComplexMatrix<f64> = sample_matrix_unchecked(&ens, s);
            a.hs_norm().powi(2)
        });
        let e = MeanEstimate::from_samples(&vals);
        assert!((e.mean - 256.0).abs() <= 5.0 * e.std_err, "{e:?}");
    }

    #[test]
    fn hs_budget_examples() {
        let ens = EnsembleSpec::ginibre(12);
        let r = check_hs_budget(&ens, 400, 1).unwrap();
        assert!((r.estimate.mean - 1.0).abs() <= 4.0 * r.estimate.std_err);
        assert!(r.within_budget);

        let n = 10;
        let det = EnsembleSpec::ginibre(n)
            .with_shift(Profile::Identity(C64::new(1.0, 0.0)))
            .with_scale(Profile::Constant(C64::new(0.0, 0.0)));
        let r = check_hs_budget(&det, 3, 1).unwrap();
        assert!((r.estimate.mean - 1.0 / n as f64).abs() < 1e-15);

        let both = EnsembleSpec::ginibre(n).with_shift(Profile::Identity(C64::new(1.0, 0.0)));
        let r = check_hs_budget(&both, 400, 2).unwrap();
        let exact = 1.0 + 1.0 / n as f64;
        assert!((r.estimate.mean - exact).abs() <= 4.0 * r.estimate.std_err);
        let sum: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| both.entry_second_moment(i, j)).sum();
        assert!((sum / (n * n) as f64 - exact).abs() < 1e-12);
        assert!(check_hs_budget(&both, 0, 2).is_err());
    }

    /// Exact P(b ≤ |Z′−Z″| ≤ 1/b) by enumerating ordered pairs of atoms.
    fn enumerate_b(dist: &DistributionSpec, b: f64) -> f64 {
        let s = dist.support().unwrap();
        let mut p = 0.0;
        for (x, px) in &s {
            for (y, py) in &s {
                let d = (x - y).norm();
                if d >= b && d <= 1.0 / b {
                    p += px * py;
                }
            }
        }
        p
    }

    #[test]
    fn b_condition_examples() {
        let c = check_b_condition(&DistributionSpec::constant(C64::new(2.0, 1.0)), 0.01, 1000, SeedSpec::new(0, 0)).unwrap();
        assert_eq!(c.two_sided.estimate.mean, 0.0);
        assert!(!c.two_sided.pass && !c.one_sided.pass);

        let fp = DistributionSpec::FourPointUniform;
        let exact = enumerate_b(&fp, 0.5);
        assert_eq!(exact, 0.75);
        let r = check_b_condition(&fp, 0.5, 20_000, SeedSpec::new(1, 0)).unwrap();
        assert!((r.two_sided.estimate.mean - exact).abs() <= 4.0 * r.two_sided.estimate.std_err);
        assert!(r.two_sided.pass);

        // |Z̃|² ~ Exp(mean 2): P(0.1 ≤ |Z̃| ≤ 10) = e^{-0.005} - e^{-50}
        let g = check_b_condition(&DistributionSpec::gaussian(), 0.1, 20_000, SeedSpec::new(2, 0)).unwrap();
        let exact = (-0.005f64).exp() - (-50f64).exp();
        assert!((g.two_sided.estimate.mean - exact).abs() <= 4.0 * g.two_sided.estimate.std_err.max(1e-3));
        assert!(g.two_sided.pass);
        assert!(check_b_condition(&fp, 1.0, 10, SeedSpec::new(0, 0)).is_err());
    }

    /// ∫_t^∞ s e^{-s} ds by composite Simpson on [t, t + 60].
    fn truncated_exponential_moment(t: f64) -> f64 {
        let steps = 200_000;
        let h = 60.0 / steps as f64;
        let f = |s: f64| s * (-s).exp();
        let mut acc = f(t) + f(t + 60.0);
        for k in 1..steps {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(t + k as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn pastur_examples() {
        let fp = EnsembleSpec::iid(16, DistributionSpec::FourPointUniform);
        assert_eq!(check_pastur(&fp, 1.0, 5, 0).unwrap().mean, 0.0);
        // ε√n = 0.4 < 1 = every |x|
        assert_eq!(check_pastur(&fp, 0.1, 5, 0).unwrap().mean, 1.0);

        // |x|² ~ Exp(1); threshold ε²n
        let g = EnsembleSpec::ginibre(64);
        let oracle = truncated_exponential_moment(0.0625 * 64.0);
        assert!((oracle - 5.0 * (-4f64).exp()).abs() < 1e-12);
        let e = check_pastur(&g, 0.25, 60, 3).unwrap();
        assert!((e.mean - oracle).abs() <= 4.0 * e.std_err, "{e:?} vs {oracle}");

        let oracle = truncated_exponential_moment(16.0);
        assert!((oracle - 17.0 * (-16f64).exp()).abs() < 1e-15);
        let e = check_pastur(&g, 0.5, 20, 3).unwrap();
        assert!(e.mean <= oracle + 3.0 * e.std_err + 1e-4);
    }

    #[test]
    fn resizing_respects_dense_profiles() {
        let ens = EnsembleSpec::ginibre(4);
        assert_eq!(ens.resized(9).unwrap().n, 9);
        let dense = ens.with_shift(Profile::Dense(ComplexMatrix::identity(4)));
        assert!(dense.resized(9).is_err());
    }

    #[test]
    fn validation_catches_bad_profiles() {
        let mut ens = EnsembleSpec::ginibre(3).with_scale(Profile::Constant(C64::new(0.5, 0.0)));
        ens.bounds = Some((1.0, 2.0));
        assert!(ens.validate().is_err());
        ens.bounds = Some((0.25, 2.0));
        assert!(ens.validate().is_ok());
        let wrong = EnsembleSpec::ginibre(3).with_shift(Profile::Dense(ComplexMatrix::identity(2)));
        assert!(wrong.validate().is_err());
    }
}
