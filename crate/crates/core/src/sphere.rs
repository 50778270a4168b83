//! Sparse, compressible and incompressible unit vectors, and Monte Carlo probes
//! of invertibility over each part of the sphere.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::anticonc::{crlcd_with_probe, CrlcdGrid, CrlcdQuery, CrlcdResult, LatticeProbe};
use crate::ensembles::{sample_matrix_unchecked, EnsembleSpec};
use crate::linalg::{column_complement_distances, dist_to_subspace, norm2, smallest_singular_value, ComplexMatrix};
use crate::report::InequalityReport;
use crate::seed::{map_trials, SeedSpec, TrialRng};
use crate::stats::{MeanEstimate, Summary};
use crate::{Error, Result, C64};

/// Unit vectors must have norm within this distance of 1.
pub const UNIT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereParams {
    pub delta: f64,
    pub rho: f64,
}

impl SphereParams {
    pub fn new(delta: f64, rho: f64) -> Self {
        SphereParams { delta, rho }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::validation(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::validation(format!("rho must lie in (0,1), got {}", self.rho)));
        }
        if sparsity(n, self.delta) == 0 {
            return Err(Error::validation(format!("delta*n = {} is below 1", self.delta * n as f64)));
        }
        Ok(())
    }
}

/// `⌊δn⌋`, tolerant of products like `0.29 · 100` landing just below an integer.
pub fn sparsity(n: usize, delta: f64) -> usize {
    (delta * n as f64 + 1e-9).floor() as usize
}

fn check_unit(u: &[C64]) -> Result<()> {
    if u.is_empty() {
        return Err(Error::validation("vector must be nonempty"));
    }
    let norm = norm2(u);
    if !((norm - 1.0).abs() <= UNIT_TOL) {
        return Err(Error::validation(format!("expected a unit vector, |u| = {norm}")));
    }
    Ok(())
}

/// Indices of the `k` largest-modulus coordinates, ties broken by lowest index.
fn largest_indices(moduli: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..moduli.len()).collect();
    idx.sort_by(|&a, &b| moduli[b].total_cmp(&moduli[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

fn tail_norm(u: &[C64], k: usize) -> f64 {
    let moduli: Vec<f64> = u.iter().map(|z| z.norm()).collect();
    let mut rest = u.to_vec();
    for i in largest_indices(&moduli, k) {
        rest[i] = C64::new(0.0, 0.0);
    }
    norm2(&rest)
}

/// Distance from a unit vector to the `⌊δn⌋`-sparse vectors: the norm left after
/// zeroing the `⌊δn⌋` largest coordinates.
pub fn dist_to_sparse(u: &[C64], delta: f64) -> Result<f64> {
    check_unit(u)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::validation(format!("delta must lie in (0,1), got {delta}")));
    }
    Ok(tail_norm(u, sparsity(u.len(), delta)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorClass {
    Sparse,
    Compressible,
    Incompressible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub kind: VectorClass,
    pub dist_to_sparse: f64,
}

impl Classification {
    /// Sparse vectors count as compressible.
    pub fn is_compressible(&self) -> bool {
        self.kind != VectorClass::Incompressible
    }
}

pub fn classify(u: &[C64], params: &SphereParams) -> Result<Classification> {
    params.validate(u.len())?;
    let dist = dist_to_sparse(u, params.delta)?;
    let support = u.iter().filter(|z| z.norm_sqr() > 0.0).count();
    let kind = if support <= sparsity(u.len(), params.delta) {
        VectorClass::Sparse
    } else if dist <= params.rho {
        VectorClass::Compressible
    } else {
        VectorClass::Incompressible
    };
    Ok(Classification {
        kind,
        dist_to_sparse: dist,
    })
}

fn gaussian_vector(n: usize, rng: &mut TrialRng) -> Vec<C64> {
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        })
        .collect()
}

fn normalized(mut x: Vec<C64>) -> Vec<C64> {
    let s = 1.0 / norm2(&x);
    x.iter_mut().for_each(|z| *z *= s);
    x
}

/// Uniform random unit vector.
pub fn random_unit_vector(n: usize, rng: &mut TrialRng) -> Vec<C64> {
    normalized(gaussian_vector(n, rng))
}

/// A compressible unit vector: a random unit vector on a random `⌊δn⌋`-subset,
/// plus a perturbation of norm at most `ρ/(1+ρ)`, renormalized. The result is
/// within `ρ` of the sparse vector it was built from.
pub fn random_compressible_vector(n: usize, params: &SphereParams, rng: &mut TrialRng) -> Vec<C64> {
    let k = sparsity(n, params.delta);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    let mut y = vec![C64::new(0.0, 0.0); n];
    let core = normalized(gaussian_vector(k, rng));
    for (slot, z) in idx[..k].iter().zip(core) {
        y[*slot] = z;
    }
    let size = rng.random::<f64>() * params.rho / (1.0 + params.rho);
    let p = normalized(gaussian_vector(n, rng));
    normalized(y.iter().zip(p).map(|(a, b)| a + b * size).collect())
}

fn trial_norm_ratios(a: &ComplexMatrix<f64>, v: &[C64]) -> f64 {
    norm2(&a.matvec(v)) / (a.rows() as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleVectorRow {
    pub c: f64,
    /// Estimate of `P(‖Av‖₂ ≤ c√n)`.
    pub prob: MeanEstimate,
    /// `(1 − c)ⁿ`.
    pub bound: f64,
    pub qualifies: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleVectorReport {
    pub n: usize,
    pub trials: usize,
    pub rows: Vec<SingleVectorRow>,
    /// Largest `c` with `P̂ ≤ (1 − c)ⁿ + 3·SE`.
    pub best_c: Option<f64>,
    pub norm_ratio: Summary,
}

/// Estimates `P(‖Av‖₂ ≤ c√n)` over a grid of `c` and compares with `(1 − c)ⁿ`.
pub fn single_vector_invertibility(
    ens: &EnsembleSpec,
    v: &[C64],
    c_grid: &[f64],
    trials: usize,
    base_seed: u64,
) -> Result<SingleVectorReport> {
    ens.validate()?;
    check_unit(v)?;
    if v.len() != ens.n {
        return Err(Error::validation(format!("vector has length {}, ensemble is {}", v.len(), ens.n)));
    }
    if trials == 0 || c_grid.is_empty() || c_grid.iter().any(|c| !(*c > 0.0 && *c < 1.0)) {
        return Err(Error::validation("need trials >= 1 and a nonempty grid of c in (0,1)"));
    }
    let ratios = map_trials(base_seed, trials, |seed| {
        trial_norm_ratios(&sample_matrix_unchecked::<f64>(ens, seed), v)
    });
    let n = ens.n;
    let mut grid = c_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let rows: Vec<SingleVectorRow> = grid
        .iter()
        .map(|&c| {
            let prob = MeanEstimate::proportion(ratios.iter().filter(|&&r| r <= c).count(), trials);
            let bound = (1.0 - c).powi(n as i32);
            SingleVectorRow {
                c,
                prob,
                bound,
                qualifies: prob.mean <= bound + 3.0 * prob.std_err,
            }
        })
        .collect();
    let best_c = rows.iter().rev().find(|r| r.qualifies).map(|r| r.c);
    Ok(SingleVectorReport {
        n,
        trials,
        rows,
        best_c,
        norm_ratio: Summary::of(&ratios),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressibleProbe {
    pub n: usize,
    pub params: SphereParams,
    pub vector_samples: usize,
    /// Per matrix trial, the smallest sampled `‖Ax‖₂/√n`.
    pub trial_minima: Vec<f64>,
    /// `(threshold, fraction of trials whose minimum is below it)`.
    pub below_threshold: Vec<(f64, f64)>,
    pub summary: Summary,
}

/// Minimum of `‖Ax‖₂/√n` over sampled compressible `x`, per matrix trial.
pub fn compressible_inf_probe(
    ens: &EnsembleSpec,
    params: &SphereParams,
    vector_samples: usize,
    thresholds: &[f64],
    trials: usize,
    base_seed: u64,
) -> Result<CompressibleProbe> {
    ens.validate()?;
    params.validate(ens.n)?;
    if vector_samples < 1000 {
        return Err(Error::validation(format!("need at least 1000 vector samples, got {vector_samples}")));
    }
    if trials == 0 {
        return Err(Error::validation("trials must be at least 1"));
    }
    let n = ens.n;
    let minima: Vec<Result<f64>> = map_trials(base_seed, trials, |seed| {
        let a: ComplexMatrix<f64> = sample_matrix_unchecked(ens, seed);
        let mut rng = seed.fork(0x5350).rng();
        let mut best = f64::INFINITY;
        for _ in 0..vector_samples {
            let x = random_compressible_vector(n, params, &mut rng);
            let d = tail_norm(&x, sparsity(n, params.delta));
            if d > params.rho * (1.0 + 1e-12) {
                return Err(Error::validation(format!("compressible sampler produced distance {d}")));
            }
            best = best.min(trial_norm_ratios(&a, &x));
        }
        Ok(best)
    });
    let trial_minima = minima.into_iter().collect::<Result<Vec<f64>>>()?;
    let below_threshold = thresholds
        .iter()
        .map(|&t| (t, trial_minima.iter().filter(|&&m| m < t).count() as f64 / trials as f64))
        .collect();
    Ok(CompressibleProbe {
        n,
        params: *params,
        vector_samples,
        summary: Summary::of(&trial_minima),
        trial_minima,
        below_threshold,
    })
}

/// Distances from each column to the span of the others; exact zeros for
/// singular matrices come from projecting out the other columns directly.
pub fn column_distances(a: &ComplexMatrix<f64>) -> Result<Vec<f64>> {
    match column_complement_distances(a) {
        Ok(d) => Ok(d),
        Err(e) if e.is_numerical() => {
            let cols: Vec<Vec<C64>> = (0..a.cols()).map(|j| a.column(j)).collect();
            (0..cols.len())
                .map(|j| {
                    let others: Vec<Vec<C64>> = cols
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != j)
                        .map(|(_, c)| c.clone())
                        .collect();
                    dist_to_subspace(&cols[j], &others)
                })
                .collect()
        }
        Err(e) => Err(e),
    }
}

/// `(4/δn)·Σ_{j∈I} 1{dist(Aⱼ, Hⱼ) ≤ ε}` with `I` = all columns except the
/// `⌊δn/2⌋` of largest norm.
pub fn distance_rhs(a: &ComplexMatrix<f64>, delta: f64, eps: f64) -> Result<f64> {
    let n = a.cols();
    let dist = column_distances(a)?;
    let norms: Vec<f64> = (0..n).map(|j| norm2(&a.column(j))).collect();
    let excluded = largest_indices(&norms, (delta * n as f64 / 2.0 + 1e-9).floor() as usize);
    let hits = (0..n)
        .filter(|j| !excluded.contains(j))
        .filter(|&j| dist[j] <= eps)
        .count();
    Ok(4.0 / (delta * n as f64) * hits as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceProbe {
    /// Estimate of `P(sₙ(A) ≤ ερ/√n)`, which dominates the incompressible infimum probability.
    pub lhs: MeanEstimate,
    /// Estimate of the column-distance bound.
    pub rhs: MeanEstimate,
    pub report: InequalityReport,
}

/// Both sides of the invertibility-via-distance bound, with `sₙ` standing in
/// for the infimum over incompressible vectors.
pub fn invertibility_via_distance_probe(
    ens: &EnsembleSpec,
    params: &SphereParams,
    eps: f64,
    trials: usize,
    base_seed: u64,
) -> Result<DistanceProbe> {
    ens.validate()?;
    params.validate(ens.n)?;
    let n = ens.n as f64;
    if n < 4.0 / params.delta {
        return Err(Error::validation(format!("need n >= 4/delta = {}, got n = {n}", 4.0 / params.delta)));
    }
    if !(eps >= 0.0) || trials == 0 {
        return Err(Error::validation("need eps >= 0 and trials >= 1"));
    }
    let threshold = eps * params.rho / n.sqrt();
    let per_trial: Vec<Result<(f64, f64)>> = map_trials(base_seed, trials, |seed| {
        let a: ComplexMatrix<f64> = sample_matrix_unchecked(ens, seed);
        let sn = smallest_singular_value(&a)?;
        let lhs = if sn <= threshold { 1.0 } else { 0.0 };
        Ok((lhs, distance_rhs(&a, params.delta, eps)?))
    });
    let per_trial = per_trial.into_iter().collect::<Result<Vec<_>>>()?;
    let lhs = MeanEstimate::from_samples(&per_trial.iter().map(|p| p.0).collect::<Vec<_>>());
    let rhs = MeanEstimate::from_samples(&per_trial.iter().map(|p| p.1).collect::<Vec<_>>());
    let report = InequalityReport::upper_bound(
        "invertibility_via_distance",
        (lhs.mean, lhs.std_err),
        (rhs.mean, rhs.std_err),
        json!({ "n": ens.n, "delta": params.delta, "rho": params.rho, "eps": eps, "trials": trials }),
    );
    Ok(DistanceProbe { lhs, rhs, report })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncompressibleScan {
    pub l: f64,
    pub u: f64,
    pub grid: CrlcdGrid,
    pub vector_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncompressibleScanReport {
    pub scanned: usize,
    pub rejected_compressible: usize,
    pub values: Vec<CrlcdResult>,
    pub min_crlcd: f64,
    pub all_capped: bool,
    /// Largest column second moment `max_j Σ_i E|Aᵢⱼ|²`.
    pub t: f64,
    /// `min_crlcd · √T / n`.
    pub h_fit: f64,
}

/// CRLCD of incompressible unit vectors against the symmetrized law of the
/// first column. `extra` vectors are classified and scanned before the random ones.
pub fn crlcd_incompressible_scan(
    ens: &EnsembleSpec,
    params: &SphereParams,
    scan: &IncompressibleScan,
    extra: &[Vec<C64>],
    seed: SeedSpec,
) -> Result<IncompressibleScanReport> {
    ens.validate()?;
    params.validate(ens.n)?;
    let n = ens.n;
    let laws = ens.column_noise_laws(0);
    let probe = LatticeProbe::auto(&laws, scan.grid.mc_samples, seed.fork(1))?;
    let mut rng = seed.fork(2).rng();
    let mut candidates: Vec<Vec<C64>> = extra.to_vec();
    candidates.extend((0..scan.vector_samples).map(|_| random_unit_vector(n, &mut rng)));

    let mut values = Vec::new();
    let mut rejected = 0;
    for v in candidates {
        if v.len() != n {
            return Err(Error::validation(format!("vector has length {}, ensemble is {n}", v.len())));
        }
        if classify(&v, params)?.is_compressible() {
            rejected += 1;
            continue;
        }
        let q = CrlcdQuery {
            v,
            l: scan.l,
            u: scan.u,
            grid: scan.grid,
        };
        values.push(crlcd_with_probe(&q, &probe)?);
    }
    let min_crlcd = values.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
    let t = ens.max_column_second_moment();
    Ok(IncompressibleScanReport {
        scanned: values.len(),
        rejected_compressible: rejected,
        all_capped: !values.is_empty() && values.iter().all(|r| r.capped),
        h_fit: min_crlcd * t.sqrt() / n as f64,
        min_crlcd,
        t,
        values,
    })
}
