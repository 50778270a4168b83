//! Complex anti-concentration: Lévy concentration, the `P_X` functional, torus
//! norms, expected lattice distances, the complex randomized least common
//! denominator (CRLCD), and statistical checks of the inequalities linking them.
//!
//! Throughout, `dists[j]` is the law of coordinate `X_j` and `X̃ = X′ − X″` is
//! the symmetrization. Estimators are pure functions of their inputs and seed.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::ensembles::DistributionSpec;
use crate::linalg::norm2;
use crate::report::{InequalityReport, GUARD_SIGMAS};
use crate::seed::{SeedSpec, TrialRng};
use crate::stats::MeanEstimate;
use crate::{Error, Result, C64};

/// Minimum Monte Carlo sample count for the estimators.
pub const MIN_SAMPLES: usize = 100;
/// Sample-centered concentration uses at most this many candidate centers.
pub const MAX_CENTERS: usize = 4096;
/// Finite laws whose symmetrization has at most this many atoms are handled exactly.
pub const EXACT_ATOM_LIMIT: usize = 4096;
/// Relative slack when comparing a pairwise distance against a radius.
const RADIUS_SLACK: f64 = 1e-12;

fn check_inputs(v: &[C64], dists: &[DistributionSpec], m: usize) -> Result<()> {
    if v.is_empty() {
        return Err(Error::validation("vector must be nonempty"));
    }
    if v.len() != dists.len() {
        return Err(Error::validation(format!(
            "{} coordinates but {} distributions",
            v.len(),
            dists.len()
        )));
    }
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::validation("vector has non-finite entries"));
    }
    if m < MIN_SAMPLES {
        return Err(Error::validation(format!("need at least {MIN_SAMPLES} samples, got {m}")));
    }
    dists.iter().try_for_each(DistributionSpec::validate)
}

/// Distance from `x` to the nearest integer.
#[inline]
pub fn frac_dist(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Squared distance from `z` to the Gaussian integers.
#[inline]
pub fn lattice_dist2(z: C64) -> f64 {
    let (a, b) = (frac_dist(z.re), frac_dist(z.im));
    a * a + b * b
}

#[inline]
fn draw_symmetric(dist: &DistributionSpec, rng: &mut TrialRng) -> C64 {
    dist.draw(rng) - dist.draw(rng)
}

/// `m` independent draws of `Z′ − Z″`.
pub fn symmetrize_samples(dist: &DistributionSpec, m: usize, seed: SeedSpec) -> Result<Vec<C64>> {
    dist.validate()?;
    if m == 0 {
        return Err(Error::validation("need at least one sample"));
    }
    let mut rng = seed.rng();
    Ok((0..m).map(|_| draw_symmetric(dist, &mut rng)).collect())
}

/// Exact law of `Z′ − Z″` for a finitely supported `Z`, with equal atoms merged.
pub fn symmetrized_support(dist: &DistributionSpec) -> Option<Vec<(C64, f64)>> {
    let support: Vec<_> = dist.support()?.into_iter().filter(|(_, p)| *p > 0.0).collect();
    if support.len() * support.len() > EXACT_ATOM_LIMIT * 4 {
        return None;
    }
    let mut atoms: Vec<(C64, f64)> = Vec::new();
    for &(a, pa) in &support {
        for &(b, pb) in &support {
            let d = a - b;
            match atoms.iter_mut().find(|(z, _)| *z == d) {
                Some(slot) => slot.1 += pa * pb,
                None => atoms.push((d, pa * pb)),
            }
        }
    }
    (atoms.len() <= EXACT_ATOM_LIMIT).then_some(atoms)
}

/// Sample-centered estimate of `ρ_{r,X}(v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationEstimate {
    pub radius: f64,
    pub estimate: f64,
    pub std_err: f64,
    pub samples: usize,
    /// Sample point whose ball attains the count.
    pub witness_center: C64,
    /// Same sample set read at radius `2r`; dominates the true `ρ_r`.
    pub doubled_radius_estimate: f64,
}

/// Fixed draws of `S = Σ vⱼXⱼ`, queried at any radius.
#[derive(Debug, Clone)]
pub struct SumCloud {
    points: Vec<C64>,
    by_real: Vec<C64>,
    centers: Vec<usize>,
}

impl SumCloud {
    pub fn sample(v: &[C64], dists: &[DistributionSpec], m: usize, seed: SeedSpec) -> Result<Self> {
        check_inputs(v, dists, m)?;
        let mut rng = seed.rng();
        let points: Vec<C64> = (0..m)
            .map(|_| {
                v.iter()
                    .zip(dists)
                    .fold(C64::new(0.0, 0.0), |acc, (vj, d)| acc + vj * d.draw(&mut rng))
            })
            .collect();
        Ok(Self::from_points(points))
    }

    pub fn from_points(points: Vec<C64>) -> Self {
        let mut by_real = points.clone();
        by_real.sort_by(|a, b| a.re.total_cmp(&b.re));
        let m = points.len();
        let centers = if m <= MAX_CENTERS {
            (0..m).collect()
        } else {
            (0..MAX_CENTERS).map(|k| k * m / MAX_CENTERS).collect()
        };
        SumCloud {
            points,
            by_real,
            centers,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    fn count_within(&self, c: C64, r: f64) -> usize {
        let lo = self.by_real.partition_point(|p| p.re < c.re - r);
        let hi = self.by_real.partition_point(|p| p.re <= c.re + r);
        self.by_real[lo..hi].iter().filter(|p| (*p - c).norm() <= r).count()
    }

    /// Largest number of sample points in a closed ball of radius `r` centered
    /// at a candidate sample point, with the first maximizing center.
    pub fn max_count(&self, r: f64) -> (usize, C64) {
        let r = r * (1.0 + RADIUS_SLACK) + f64::MIN_POSITIVE;
        let counts: Vec<usize> = self
            .centers
            .par_iter()
            .map(|&k| self.count_within(self.points[k], r))
            .collect();
        let mut best = 0;
        for (slot, &c) in counts.iter().enumerate() {
            if c > counts[best] {
                best = slot;
            }
        }
        (counts[best], self.points[self.centers[best]])
    }

    pub fn concentration(&self, r: f64) -> ConcentrationEstimate {
        let m = self.len();
        let (hits, center) = self.max_count(r);
        let est = MeanEstimate::proportion(hits, m);
        let (doubled, _) = self.max_count(2.0 * r);
        ConcentrationEstimate {
            radius: r,
            estimate: est.mean,
            std_err: est.std_err,
            samples: m,
            witness_center: center,
            doubled_radius_estimate: doubled as f64 / m as f64,
        }
    }
}

/// Estimate of `sup_x P(Σ vⱼXⱼ ∈ B(x, r))`, maximizing over sample points.
pub fn levy_concentration(
    v: &[C64],
    dists: &[DistributionSpec],
    r: f64,
    m: usize,
    seed: SeedSpec,
) -> Result<ConcentrationEstimate> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::validation(format!("radius must be finite and nonnegative, got {r}")));
    }
    Ok(SumCloud::sample(v, dists, m, seed)?.concentration(r))
}

/// Estimate of `P_X(v) = E exp(−π|Σ vⱼX̂ⱼ|²)`, `X̂ = X̃ ⋆ Ber(1/2)`.
pub fn p_functional(v: &[C64], dists: &[DistributionSpec], m: usize, seed: SeedSpec) -> Result<MeanEstimate> {
    check_inputs(v, dists, m)?;
    let mut rng = seed.rng();
    let values: Vec<f64> = (0..m)
        .map(|_| {
            let mut s = C64::new(0.0, 0.0);
            for (vj, d) in v.iter().zip(dists) {
                let x = draw_symmetric(d, &mut rng);
                if rng.random::<bool>() {
                    s += vj * x;
                }
            }
            (-PI * s.norm_sqr()).exp()
        })
        .collect();
    Ok(MeanEstimate::from_samples(&values))
}

/// Estimate of `‖a‖_z = (E ‖Re(a·z̃)‖²_{ℝ/ℤ})^{1/2}`.
pub fn torus_norm(a: C64, dist: &DistributionSpec, m: usize, seed: SeedSpec) -> Result<f64> {
    check_inputs(&[a], std::slice::from_ref(dist), m)?;
    let mut rng = seed.rng();
    let mean = (0..m)
        .map(|_| frac_dist((a * draw_symmetric(dist, &mut rng)).re).powi(2))
        .sum::<f64>()
        / m as f64;
    Ok(mean.sqrt())
}

/// Per-coordinate law of `X̃`, either exact atoms or a fixed Monte Carlo sample,
/// reused for every `θ` (common random numbers).
#[derive(Debug, Clone)]
pub struct LatticeProbe {
    coords: Vec<CoordinateLaw>,
}

#[derive(Debug, Clone)]
enum CoordinateLaw {
    Exact(Vec<(C64, f64)>),
    Sampled(Vec<C64>),
}

impl LatticeProbe {
    /// Monte Carlo sample of `m` rows of `X̃` for every coordinate.
    pub fn monte_carlo(dists: &[DistributionSpec], m: usize, seed: SeedSpec) -> Result<Self> {
        Self::build(dists, m, seed, false)
    }

    /// Exact atoms for finite laws, Monte Carlo samples for the rest.
    pub fn auto(dists: &[DistributionSpec], m: usize, seed: SeedSpec) -> Result<Self> {
        Self::build(dists, m, seed, true)
    }

    fn build(dists: &[DistributionSpec], m: usize, seed: SeedSpec, exact: bool) -> Result<Self> {
        if dists.is_empty() {
            return Err(Error::validation("need at least one coordinate"));
        }
        if m < MIN_SAMPLES {
            return Err(Error::validation(format!("need at least {MIN_SAMPLES} samples, got {m}")));
        }
        dists.iter().try_for_each(DistributionSpec::validate)?;
        let mut rng = seed.rng();
        let mut coords: Vec<CoordinateLaw> = Vec::with_capacity(dists.len());
        for d in dists {
            if exact {
                if let Some(atoms) = symmetrized_support(d) {
                    coords.push(CoordinateLaw::Exact(atoms));
                    continue;
                }
            }
            coords.push(CoordinateLaw::Sampled(Vec::with_capacity(m)));
        }
        for _ in 0..m {
            for (law, d) in coords.iter_mut().zip(dists) {
                if let CoordinateLaw::Sampled(s) = law {
                    s.push(draw_symmetric(d, &mut rng));
                }
            }
        }
        Ok(LatticeProbe { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_exact(&self) -> bool {
        self.coords.iter().all(|c| matches!(c, CoordinateLaw::Exact(_)))
    }

    /// `E dist²(θ·v ⋆ X̃, (ℤ+iℤ)ⁿ)` with its standard error (0 when exact).
    pub fn expected_dist2(&self, theta: C64, v: &[C64]) -> MeanEstimate {
        assert_eq!(v.len(), self.dim(), "vector length must match the probe");
        let mut mean = 0.0;
        let mut var = 0.0;
        let mut samples = 0;
        for (law, vj) in self.coords.iter().zip(v) {
            let a = theta * vj;
            match law {
                CoordinateLaw::Exact(atoms) => {
                    mean += atoms.iter().map(|(x, p)| p * lattice_dist2(a * x)).sum::<f64>();
                }
                CoordinateLaw::Sampled(xs) => {
                    let m = xs.len() as f64;
                    let (mut s, mut s2) = (0.0, 0.0);
                    for x in xs {
                        let d = lattice_dist2(a * x);
                        s += d;
                        s2 += d * d;
                    }
                    let mu = s / m;
                    mean += mu;
                    var += ((s2 - m * mu * mu) / (m - 1.0)).max(0.0) / m;
                    samples = xs.len();
                }
            }
        }
        MeanEstimate {
            mean,
            std_err: var.sqrt(),
            samples,
        }
    }
}

/// Monte Carlo estimate of `E dist²(θ·v ⋆ X̃, (ℤ+iℤ)ⁿ)`.
pub fn expected_lattice_dist2(
    theta: C64,
    v: &[C64],
    dists: &[DistributionSpec],
    m: usize,
    seed: SeedSpec,
) -> Result<MeanEstimate> {
    check_inputs(v, dists, m)?;
    Ok(LatticeProbe::monte_carlo(dists, m, seed)?.expected_dist2(theta, v))
}

/// Polar search grid for the CRLCD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrlcdGrid {
    pub modulus_min: f64,
    pub modulus_max: f64,
    pub points_per_decade: usize,
    pub phase_points: usize,
    pub mc_samples: usize,
    /// Bisection stops when the modulus bracket is this narrow.
    pub tol: f64,
}

impl Default for CrlcdGrid {
    fn default() -> Self {
        CrlcdGrid {
            modulus_min: 1e-2,
            modulus_max: 1e3,
            points_per_decade: 40,
            phase_points: 64,
            mc_samples: 20_000,
            tol: 1e-3,
        }
    }
}

impl CrlcdGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.modulus_min > 0.0 && self.modulus_min.is_finite()) {
            return Err(Error::validation(format!("modulus_min must be positive, got {}", self.modulus_min)));
        }
        if !(self.modulus_max >= self.modulus_min && self.modulus_max.is_finite()) {
            return Err(Error::validation("modulus range is empty"));
        }
        if self.points_per_decade == 0 {
            return Err(Error::validation("points_per_decade must be positive"));
        }
        if self.phase_points < 8 {
            return Err(Error::validation(format!("need at least 8 phase points, got {}", self.phase_points)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::validation("bisection tolerance must be positive"));
        }
        Ok(())
    }

    /// Ascending log-spaced moduli `min·10^{k/ppd} ≤ max`.
    pub fn moduli(&self) -> Vec<f64> {
        let step = 10f64.powf(1.0 / self.points_per_decade as f64);
        let mut out = Vec::new();
        let mut k = 0i32;
        loop {
            let t = self.modulus_min * step.powi(k);
            if t > self.modulus_max * (1.0 + 1e-12) {
                break;
            }
            out.push(t);
            k += 1;
        }
        out
    }

    pub fn phases(&self) -> Vec<C64> {
        (0..self.phase_points)
            .map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / self.phase_points as f64))
            .collect()
    }

    /// Same grid for the vector `k·v`.
    pub fn rescaled(&self, k: f64) -> Self {
        CrlcdGrid {
            modulus_min: self.modulus_min / k,
            modulus_max: self.modulus_max / k,
            tol: self.tol / k,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrlcdQuery {
    pub v: Vec<C64>,
    pub l: f64,
    pub u: f64,
    pub grid: CrlcdGrid,
}

impl CrlcdQuery {
    pub fn new(v: Vec<C64>, l: f64, u: f64) -> Self {
        CrlcdQuery {
            v,
            l,
            u,
            grid: CrlcdGrid::default(),
        }
    }

    pub fn with_grid(mut self, grid: CrlcdGrid) -> Self {
        self.grid = grid;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !(self.l > 0.0) {
            return Err(Error::validation(format!("L must be positive, got {}", self.l)));
        }
        if !(self.u > 0.0 && self.u < 1.0) {
            return Err(Error::validation(format!("u must lie in (0,1), got {}", self.u)));
        }
        let norm = norm2(&self.v);
        if !(0.5..=2.0).contains(&norm) {
            return Err(Error::validation(format!("need 1/2 <= |v| <= 2, got {norm}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrlcdResult {
    /// Smallest qualifying modulus, or `modulus_max` when `capped`.
    pub value: f64,
    pub capped: bool,
    /// Qualifying `θ`; when capped, the grid point closest to qualifying.
    pub witness_theta: C64,
    pub lhs_at_witness: f64,
    pub lhs_std_err: f64,
    pub bound_at_witness: f64,
    pub moduli_scanned: usize,
}

/// `min(u|θ|²‖v‖², L²)`.
fn crlcd_bound(q: &CrlcdQuery, v_norm2: f64, t: f64) -> f64 {
    (q.u * t * t * v_norm2).min(q.l * q.l)
}

/// Smallest `|θ|` with `E dist²(θv ⋆ X̃, (ℤ+iℤ)ⁿ) < min(u|θ|²‖v‖², L²)`, found by
/// an ascending polar grid scan; at the first modulus where some phase
/// qualifies, each qualifying phase is refined by bisection on the modulus
/// and the smallest result wins.
pub fn crlcd(q: &CrlcdQuery, dists: &[DistributionSpec], seed: SeedSpec) -> Result<CrlcdResult> {
    q.validate()?;
    let probe = LatticeProbe::auto(dists, q.grid.mc_samples, seed)?;
    if probe.dim() != q.v.len() {
        return Err(Error::validation(format!(
            "{} coordinates but {} distributions",
            q.v.len(),
            probe.dim()
        )));
    }
    crlcd_with_probe(q, &probe)
}

/// [`crlcd`] against an existing probe, so many vectors can share one sample.
pub fn crlcd_with_probe(q: &CrlcdQuery, probe: &LatticeProbe) -> Result<CrlcdResult> {
    q.validate()?;
    let moduli = q.grid.moduli();
    let phases = q.grid.phases();
    if moduli.is_empty() {
        return Err(Error::validation("CRLCD grid has no moduli"));
    }
    let v_norm2 = norm2(&q.v).powi(2);
    let eval = |theta: C64| {
        let e = probe.expected_dist2(theta, &q.v);
        (e, crlcd_bound(q, v_norm2, theta.norm()))
    };

    let mut closest: Option<(f64, C64, MeanEstimate, f64)> = None;
    let mut prev = 0.0;
    for (scanned, &t) in moduli.iter().enumerate() {
        let evals: Vec<(MeanEstimate, f64)> = phases.par_iter().map(|&ph| eval(ph * t)).collect();
        let qualifying: Vec<usize> = (0..phases.len()).filter(|&k| evals[k].0.mean < evals[k].1).collect();
        if !qualifying.is_empty() {
            let refined: Vec<(f64, MeanEstimate, f64)> = qualifying
                .par_iter()
                .map(|&k| {
                    let (lo, hi) = (prev, t);
                    bisect_modulus(phases[k], lo, hi, evals[k], q.grid.tol, &eval)
                })
                .collect();
            let mut best = 0;
            for (slot, r) in refined.iter().enumerate() {
                if r.0 < refined[best].0 {
                    best = slot;
                }
            }
            let (value, e, b) = refined[best];
            return Ok(CrlcdResult {
                value,
                capped: false,
                witness_theta: phases[qualifying[best]] * value,
                lhs_at_witness: e.mean,
                lhs_std_err: e.std_err,
                bound_at_witness: b,
                moduli_scanned: scanned + 1,
            });
        }
        for (k, (e, b)) in evals.iter().enumerate() {
            let gap = e.mean - b;
            if closest.as_ref().is_none_or(|c| gap < c.0) {
                closest = Some((gap, phases[k] * t, *e, *b));
            }
        }
        prev = t;
    }
    let (_, theta, e, b) = closest.expect("grid is nonempty");
    Ok(CrlcdResult {
        value: q.grid.modulus_max,
        capped: true,
        witness_theta: theta,
        lhs_at_witness: e.mean,
        lhs_std_err: e.std_err,
        bound_at_witness: b,
        moduli_scanned: moduli.len(),
    })
}

/// Bisects `[lo, hi]` along `phase`, keeping `hi` qualifying.
fn bisect_modulus(
    phase: C64,
    mut lo: f64,
    mut hi: f64,
    at_hi: (MeanEstimate, f64),
    tol: f64,
    eval: &(impl Fn(C64) -> (MeanEstimate, f64) + Sync),
) -> (f64, MeanEstimate, f64) {
    let (mut best_e, mut best_b) = at_hi;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let (e, b) = eval(phase * mid);
        if mid > 0.0 && e.mean < b {
            hi = mid;
            best_e = e;
            best_b = b;
        } else {
            lo = mid;
        }
    }
    (hi, best_e, best_b)
}

/// Checks `ρ_{r,X}(v) ≤ e^{πr²}·P_X(v)`.
pub fn verify_levy_p_bound(
    v: &[C64],
    dists: &[DistributionSpec],
    r: f64,
    m: usize,
    seed: SeedSpec,
) -> Result<InequalityReport> {
    let rho = levy_concentration(v, dists, r, m, seed.fork(1))?;
    let p = p_functional(v, dists, m, seed.fork(2))?;
    let factor = (PI * r * r).exp();
    Ok(InequalityReport::upper_bound(
        "levy_p_bound",
        (rho.estimate, rho.std_err),
        (factor * p.mean, factor * p.std_err),
        json!({
            "n": v.len(),
            "r": r,
            "samples": m,
            "p_functional": p.mean,
            "rho_doubled_radius": rho.doubled_radius_estimate,
        }),
    ))
}

/// Tensor-product trapezoid rule over `[−R, R]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub radius: f64,
    pub nodes_per_axis: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            radius: 3.0,
            nodes_per_axis: 241,
        }
    }
}

/// Largest Gaussian tail mass `e^{−πR²}` left outside the quadrature box.
pub const TRUNCATION_TOL: f64 = 1e-12;

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !((-PI * self.radius * self.radius).exp() < TRUNCATION_TOL) {
            return Err(Error::validation(format!(
                "truncation radius {} leaves Gaussian mass e^(-pi R^2) >= {TRUNCATION_TOL:e}",
                self.radius
            )));
        }
        if self.nodes_per_axis < 3 {
            return Err(Error::validation("need at least 3 quadrature nodes per axis"));
        }
        Ok(())
    }

    /// Integrates `f` over the box; returns the integral of each output component.
    fn integrate<const K: usize>(&self, f: impl Fn(C64) -> [f64; K] + Sync) -> [f64; K] {
        let n = self.nodes_per_axis;
        let h = 2.0 * self.radius / (n - 1) as f64;
        let weight = |k: usize| if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        let rows: Vec<[f64; K]> = (0..n)
            .into_par_iter()
            .map(|i| {
                let x = -self.radius + i as f64 * h;
                let mut acc = [0.0; K];
                for j in 0..n {
                    let y = -self.radius + j as f64 * h;
                    let w = weight(i) * weight(j);
                    let vals = f(C64::new(x, y));
                    for (a, v) in acc.iter_mut().zip(vals) {
                        *a += w * v;
                    }
                }
                acc
            })
            .collect();
        let mut total = [0.0; K];
        for row in rows {
            for (t, v) in total.iter_mut().zip(row) {
                *t += v * h * h;
            }
        }
        total
    }
}

/// Checks `ρ_{r,X}(w)² ≤ 2e^{2πr²} ∫ exp(−½E dist²(ξw ⋆ X̃, ·)) e^{−π|ξ|²} dξ`.
pub fn verify_doubling_bound(
    w: &[C64],
    dists: &[DistributionSpec],
    r: f64,
    quad: &QuadratureSpec,
    m: usize,
    seed: SeedSpec,
) -> Result<InequalityReport> {
    quad.validate()?;
    let rho = levy_concentration(w, dists, r, m, seed.fork(1))?;
    let probe = LatticeProbe::auto(dists, m, seed.fork(2))?;
    let [integral, spread] = quad.integrate(|xi| {
        let e = probe.expected_dist2(xi * C64::new(1.0, 0.0), w);
        let f = (-0.5 * e.mean - PI * xi.norm_sqr()).exp();
        [f, 0.5 * f * e.std_err]
    });
    let factor = 2.0 * (2.0 * PI * r * r).exp();
    Ok(InequalityReport::upper_bound(
        "doubling_bound",
        (rho.estimate.powi(2), 2.0 * rho.estimate * rho.std_err),
        (factor * integral, factor * spread),
        json!({
            "n": w.len(),
            "r": r,
            "samples": m,
            "integral": integral,
            "quadrature_radius": quad.radius,
            "nodes_per_axis": quad.nodes_per_axis,
            "exact_lattice_law": probe.is_exact(),
        }),
    ))
}

/// Largest implied constant tolerated in the CRLCD tail bound.
pub const CRLCD_CONSTANT_LIMIT: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrlcdTailReport {
    pub report: InequalityReport,
    /// `ρ̂ / bracket`.
    pub implied_constant: f64,
    /// `εu^{−1/2} + e^{−L²/4} + e^{−(π/4)ε²·CRLCD²}`.
    pub bracket: f64,
    pub crlcd: CrlcdResult,
}

/// Evaluates `ρ_{ε,X}(v)` against `εu^{−1/2} + e^{−L²/4} + e^{−(π/4)ε²·CRLCD²}` and
/// flags when the implied constant exceeds [`CRLCD_CONSTANT_LIMIT`].
#[allow(clippy::too_many_arguments)]
pub fn verify_crlcd_tail_bound(
    v: &[C64],
    dists: &[DistributionSpec],
    eps: f64,
    l: f64,
    u: f64,
    grid: &CrlcdGrid,
    m: usize,
    seed: SeedSpec,
) -> Result<CrlcdTailReport> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::validation(format!("eps must be positive, got {eps}")));
    }
    let query = CrlcdQuery {
        v: v.to_vec(),
        l,
        u,
        grid: *grid,
    };
    query.validate()?;
    let lcd = crlcd(&query, dists, seed.fork(3))?;
    let rho = levy_concentration(v, dists, eps, m, seed.fork(1))?;
    let terms = [
        eps / u.sqrt(),
        (-0.25 * l * l).exp(),
        (-0.25 * PI * eps * eps * lcd.value * lcd.value).exp(),
    ];
    let bracket: f64 = terms.iter().sum();
    let report = InequalityReport::upper_bound(
        "crlcd_tail_bound",
        (rho.estimate, rho.std_err),
        (CRLCD_CONSTANT_LIMIT * bracket, 0.0),
        json!({
            "n": v.len(),
            "eps": eps,
            "L": l,
            "u": u,
            "samples": m,
            "crlcd": lcd.value,
            "crlcd_capped": lcd.capped,
            "bracket_terms": terms,
            "implied_constant": rho.estimate / bracket,
        }),
    );
    Ok(CrlcdTailReport {
        report,
        implied_constant: rho.estimate / bracket,
        bracket,
        crlcd: lcd,
    })
}

/// Scans `c_grid` from the largest value down and returns the first `c` with
/// `ρ̂_c(v) + 3·SE ≤ 1 − c`; the report is flagged when no `c` qualifies.
pub fn verify_uniform_anticonc(
    v: &[C64],
    dists: &[DistributionSpec],
    c_grid: &[f64],
    m: usize,
    seed: SeedSpec,
) -> Result<(Option<f64>, InequalityReport)> {
    if c_grid.is_empty() {
        return Err(Error::validation("c grid is empty"));
    }
    if c_grid.iter().any(|c| !(*c > 0.0 && *c < 1.0)) {
        return Err(Error::validation("every c must lie in (0,1)"));
    }
    let norm = norm2(v);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::validation(format!("v must be a unit vector, |v| = {norm}")));
    }
    let cloud = SumCloud::sample(v, dists, m, seed)?;
    let mut grid = c_grid.to_vec();
    grid.sort_by(|a, b| b.total_cmp(a));
    let mut last = None;
    for &c in &grid {
        let rho = cloud.concentration(c);
        last = Some((c, rho));
        if rho.estimate + GUARD_SIGMAS * rho.std_err <= 1.0 - c {
            let report = InequalityReport::upper_bound(
                "uniform_anticoncentration",
                (rho.estimate, rho.std_err),
                (1.0 - c, 0.0),
                json!({ "n": v.len(), "c": c, "samples": m, "qualified": true }),
            );
            return Ok((Some(c), InequalityReport { flag: false, ..report }));
        }
    }
    let (c, rho) = last.expect("grid is nonempty");
    let report = InequalityReport::upper_bound(
        "uniform_anticoncentration",
        (rho.estimate, rho.std_err),
        (1.0 - c, 0.0),
        json!({ "n": v.len(), "c": c, "samples": m, "qualified": false }),
    );
    Ok((None, InequalityReport { flag: true, ..report }))
}
