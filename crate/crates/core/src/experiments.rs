//! Experiment drivers: smallest-singular-value tail curves, empirical spectral
//! distributions against the circular law, the log-determinant and
//! distance-sum comparisons between two ensembles, extreme singular values,
//! and CSV persistence of their records.

use std::cmp::Ordering;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::config::{csv_error, format_f64, serde_complex, EnsembleConfig};
use crate::ensembles::{sample_matrix_unchecked, EnsembleSpec};
use crate::linalg::{eigenvalues, log_abs_det, singular_values, ComplexMatrix, OrthonormalBasis, SpectrumKind};
use crate::seed::map_trials;
use crate::stats::{MeanEstimate, Summary};
use crate::{Error, Real, Result, C64};

/// Empirical spectral distribution `μₙ(s,t) = #{k : Re λₖ ≤ s, Im λₖ ≤ t}/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Esd<T> {
    eigenvalues: Vec<Complex<T>>,
}

impl<T: Real> Esd<T> {
    pub fn new(eigenvalues: Vec<Complex<T>>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::validation("an ESD needs at least one eigenvalue"));
        }
        if eigenvalues.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation("eigenvalues must be finite"));
        }
        Ok(Esd { eigenvalues })
    }

    pub fn eigenvalues(&self) -> &[Complex<T>] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn cdf(&self, s: T, t: T) -> T {
        let k = self.eigenvalues.iter().filter(|z| z.re <= s && z.im <= t).count();
        T::lit(k as f64) / T::lit(self.len() as f64)
    }
}

/// ESD of `scale·A`.
pub fn compute_esd<T: Real>(a: &ComplexMatrix<T>, scale: T) -> Result<Esd<T>> {
    if !a.is_square() {
        return Err(Error::validation("ESD needs a square matrix"));
    }
    Esd::new(eigenvalues(&a.scaled(scale))?.values)
}

/// `∫_{-1}^{a} √(1−x²) dx` for `a ∈ [−1, 1]`.
fn half_disc_primitive<T: Real>(a: T) -> T {
    let a = a.max(-T::one()).min(T::one());
    let half = T::lit(0.5);
    half * (a * (T::one() - a * a).max(T::zero()).sqrt() + a.asin()) + T::FRAC_PI_4()
}

/// `∫_{[lo, hi] ∩ [−1, min(s, 1)]} (c + k·√(1−x²)) dx`.
fn strip_integral<T: Real>(lo: T, hi: T, s: T, c: T, k: T) -> T {
    let hi = hi.min(s).min(T::one());
    let lo = lo.max(-T::one());
    if hi <= lo {
        return T::zero();
    }
    c * (hi - lo) + k * (half_disc_primitive(hi) - half_disc_primitive(lo))
}

/// CDF of the uniform law on the unit disc:
/// `(1/π)·area{|x| ≤ 1, Re x ≤ s, Im x ≤ t}`, in closed form.
pub fn circular_law_cdf<T: Real>(s: T, t: T) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    if s <= -one || t <= -one {
        return T::zero();
    }
    let area = if t >= one {
        strip_integral(-one, one, s, T::zero(), two)
    } else {
        let x0 = (one - t * t).sqrt();
        if t >= T::zero() {
            strip_integral(-one, -x0, s, T::zero(), two)
                + strip_integral(-x0, x0, s, t, one)
                + strip_integral(x0, one, s, T::zero(), two)
        } else {
            strip_integral(-x0, x0, s, t, one)
        }
    };
    (area / T::PI()).max(T::zero()).min(one)
}

/// Evaluation grid for ESD distances: `points × points` over `[−h, h]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsdGrid {
    pub half_width: f64,
    pub points: usize,
}

impl Default for EsdGrid {
    fn default() -> Self {
        EsdGrid {
            half_width: 2.5,
            points: 201,
        }
    }
}

impl EsdGrid {
    fn axis(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![0.0],
            p => (0..p)
                .map(|k| -self.half_width + 2.0 * self.half_width * k as f64 / (p - 1) as f64)
                .collect(),
        }
    }
}

/// What an ESD is compared against.
#[derive(Debug, Clone, Copy)]
pub enum EsdReference<'a, T> {
    Empirical(&'a Esd<T>),
    CircularLaw,
}

fn sorted_axis<T: Real>(mut v: Vec<T>) -> Vec<T> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    v.dedup();
    v
}

fn axis_index<T: Real>(axis: &[T], x: T) -> usize {
    axis.partition_point(|&a| a < x)
}

/// `P[i][j] = #{atoms with re ≤ xs[i], im ≤ ys[j]}`, row-major.
fn prefix_counts<T: Real>(esd: &Esd<T>, xs: &[T], ys: &[T]) -> Vec<u32> {
    let (nx, ny) = (xs.len(), ys.len());
    let mut p = vec![0u32; nx * ny];
    for z in esd.eigenvalues() {
        p[axis_index(xs, z.re) * ny + axis_index(ys, z.im)] += 1;
    }
    for i in 0..nx {
        for j in 0..ny {
            let mut v = p[i * ny + j];
            if i > 0 {
                v += p[(i - 1) * ny + j];
            }
            if j > 0 {
                v += p[i * ny + j - 1];
            }
            if i > 0 && j > 0 {
                v -= p[(i - 1) * ny + j - 1];
            }
            p[i * ny + j] = v;
        }
    }
    p
}

/// Largest `|μ_a − μ_b|` over the grid and every point whose coordinates come
/// from the atoms; against the circular law the empirical left limits at each
/// atom coordinate are also compared.
pub fn esd_distance<T: Real>(a: &Esd<T>, b: EsdReference<'_, T>, grid: &EsdGrid) -> T {
    let mut xs: Vec<T> = grid.axis().into_iter().map(T::lit).collect();
    let mut ys = xs.clone();
    let mut push_atoms = |e: &Esd<T>| {
        for z in e.eigenvalues() {
            xs.push(z.re);
            ys.push(z.im);
        }
    };
    push_atoms(a);
    if let EsdReference::Empirical(e) = b {
        push_atoms(e);
    }
    let xs = sorted_axis(xs);
    let ys = sorted_axis(ys);
    let ny = ys.len();
    let pa = prefix_counts(a, &xs, &ys);
    let na = T::lit(a.len() as f64);
    let mut worst = T::zero();
    match b {
        EsdReference::Empirical(e) => {
            let pb = prefix_counts(e, &xs, &ys);
            let nb = T::lit(e.len() as f64);
            for (ca, cb) in pa.iter().zip(&pb) {
                let d = (T::lit(*ca as f64) / na - T::lit(*cb as f64) / nb).abs();
                worst = worst.max(d);
            }
        }
        EsdReference::CircularLaw => {
            let at = |i: Option<usize>, j: Option<usize>| match (i, j) {
                (Some(i), Some(j)) => T::lit(pa[i * ny + j] as f64) / na,
                _ => T::zero(),
            };
            for (i, &x) in xs.iter().enumerate() {
                for (j, &y) in ys.iter().enumerate() {
                    let f = circular_law_cdf(x, y);
                    let (pi, pj) = (i.checked_sub(1), j.checked_sub(1));
                    for emp in [at(Some(i), Some(j)), at(pi, Some(j)), at(Some(i), pj), at(pi, pj)] {
                        worst = worst.max((emp - f).abs());
                    }
                }
            }
        }
    }
    worst
}

/// One CSV record type with a fixed column order.
pub trait CsvRecord: Sized {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
    fn parse(fields: &csv::StringRecord) -> std::result::Result<Self, String>;
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, k: usize, name: &str) -> std::result::Result<T, String> {
    let raw = rec.get(k).ok_or_else(|| format!("missing column `{name}`"))?;
    raw.trim().parse().map_err(|_| format!("bad value {raw:?} in column `{name}`"))
}

/// `(n, eps, trials, prob, stderr)`: empirical `P(sₙ ≤ ε/√n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub n: usize,
    pub eps: f64,
    pub trials: usize,
    pub prob: f64,
    pub stderr: f64,
}

impl CsvRecord for TailRow {
    const HEADER: &'static [&'static str] = &["n", "eps", "trials", "prob", "stderr"];
    fn fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            format_f64(self.eps),
            self.trials.to_string(),
            format_f64(self.prob),
            format_f64(self.stderr),
        ]
    }
    fn parse(r: &csv::StringRecord) -> std::result::Result<Self, String> {
        Ok(TailRow {
            n: field(r, 0, "n")?,
            eps: field(r, 1, "eps")?,
            trials: field(r, 2, "trials")?,
            prob: field(r, 3, "prob")?,
            stderr: field(r, 4, "stderr")?,
        })
    }
}

/// `(trial, k, re, im)`: eigenvalue `k` of a trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsdRow {
    pub trial: u64,
    pub k: usize,
    pub re: f64,
    pub im: f64,
}

impl CsvRecord for EsdRow {
    const HEADER: &'static [&'static str] = &["trial", "k", "re", "im"];
    fn fields(&self) -> Vec<String> {
        vec![self.trial.to_string(), self.k.to_string(), format_f64(self.re), format_f64(self.im)]
    }
    fn parse(r: &csv::StringRecord) -> std::result::Result<Self, String> {
        Ok(EsdRow {
            trial: field(r, 0, "trial")?,
            k: field(r, 1, "k")?,
            re: field(r, 2, "re")?,
            im: field(r, 3, "im")?,
        })
    }
}

/// `(trial, n, value)`: one scalar per trial and dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub trial: u64,
    pub n: usize,
    pub value: f64,
}

impl CsvRecord for ComparisonRow {
    const HEADER: &'static [&'static str] = &["trial", "n", "value"];
    fn fields(&self) -> Vec<String> {
        vec![self.trial.to_string(), self.n.to_string(), format_f64(self.value)]
    }
    fn parse(r: &csv::StringRecord) -> std::result::Result<Self, String> {
        Ok(ComparisonRow {
            trial: field(r, 0, "trial")?,
            n: field(r, 1, "n")?,
            value: field(r, 2, "value")?,
        })
    }
}

/// `(kind, index, re, im)`: one singular value or eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub kind: SpectrumKind,
    pub index: usize,
    pub re: f64,
    pub im: f64,
}

impl CsvRecord for SpectrumRow {
    const HEADER: &'static [&'static str] = &["kind", "index", "re", "im"];
    fn fields(&self) -> Vec<String> {
        let kind = match self.kind {
            SpectrumKind::Singular => "singular",
            SpectrumKind::Eigen => "eigen",
        };
        vec![kind.to_string(), self.index.to_string(), format_f64(self.re), format_f64(self.im)]
    }
    fn parse(r: &csv::StringRecord) -> std::result::Result<Self, String> {
        let kind = match r.get(0).map(str::trim) {
            Some("singular") => SpectrumKind::Singular,
            Some("eigen") => SpectrumKind::Eigen,
            other => return Err(format!("bad value {other:?} in column `kind`")),
        };
        Ok(SpectrumRow {
            kind,
            index: field(r, 1, "index")?,
            re: field(r, 2, "re")?,
            im: field(r, 3, "im")?,
        })
    }
}

/// Writes a header and one line per record, floats with 17 significant digits.
pub fn persist_results<R: CsvRecord>(records: &[R], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(R::HEADER).map_err(|e| csv_error(path, e))?;
    for r in records {
        w.write_record(r.fields()).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_results<R: CsvRecord>(path: &Path) -> Result<Vec<R>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != R::HEADER {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!("expected columns {:?}, found {names:?}", R::HEADER),
        });
    }
    reader
        .records()
        .enumerate()
        .map(|(line, rec)| {
            let rec = rec.map_err(|e| csv_error(path, e))?;
            R::parse(&rec).map_err(|message| Error::Parse {
                path: path.to_path_buf(),
                message: format!("row {}: {message}", line + 1),
            })
        })
        .collect()
}

fn default_eps() -> Vec<f64> {
    vec![0.1, 0.3, 0.5, 1.0]
}

fn default_trials() -> usize {
    100
}

fn default_c_grid() -> Vec<f64> {
    vec![1.0, 2.0]
}

/// Experiment section of a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentParams {
    /// Dimensions to run; empty means the ensemble's own `n`.
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Overrides the ensemble's `base_seed` when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_seed: Option<u64>,
    #[serde(default, with = "serde_complex")]
    pub z: C64,
    /// Exponents `C` for the extreme singular value frequencies.
    #[serde(default = "default_c_grid")]
    pub c_grid: Vec<f64>,
    #[serde(default)]
    pub esd_grid: EsdGrid,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        ExperimentParams {
            n: Vec::new(),
            eps: default_eps(),
            trials: default_trials(),
            base_seed: None,
            z: C64::new(0.0, 0.0),
            c_grid: default_c_grid(),
            esd_grid: EsdGrid::default(),
        }
    }
}

/// Ensembles `X` (and optionally `Y`) plus experiment parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub ensemble: EnsembleConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble_y: Option<EnsembleConfig>,
    #[serde(default)]
    pub experiment: ExperimentParams,
}

impl ExperimentConfig {
    pub fn base_seed(&self) -> u64 {
        self.experiment.base_seed.unwrap_or(self.ensemble.base_seed)
    }

    pub fn dimensions(&self) -> Result<Vec<usize>> {
        let ns = if self.experiment.n.is_empty() {
            self.ensemble.n.into_iter().collect()
        } else {
            self.experiment.n.clone()
        };
        if ns.is_empty() || ns.contains(&0) {
            return Err(Error::Config("no positive dimension configured (`n`)".into()));
        }
        Ok(ns)
    }

    pub fn validate(&self) -> Result<()> {
        self.dimensions()?;
        if self.experiment.trials == 0 {
            return Err(Error::Config("`trials` must be at least 1".into()));
        }
        if self.experiment.eps.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Config("every `eps` must be positive".into()));
        }
        if self.experiment.esd_grid.points == 0 {
            return Err(Error::Config("`esd_grid.points` must be positive".into()));
        }
        Ok(())
    }

    /// `X` at dimension `n`.
    pub fn x_at(&self, n: usize, base_dir: &Path) -> Result<EnsembleSpec> {
        self.ensemble.to_spec(Some(n), base_dir)
    }

    /// `Y` at dimension `n`.
    pub fn y_at(&self, n: usize, base_dir: &Path) -> Result<EnsembleSpec> {
        self.ensemble_y
            .as_ref()
            .ok_or_else(|| Error::Config("this experiment needs an `ensemble_y` section".into()))?
            .to_spec(Some(n), base_dir)
    }
}

/// Fitted `P ≈ C(ε + e^{−cε²n})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub c_big: f64,
    pub c_small: f64,
    pub sse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailResult {
    pub rows: Vec<TailRow>,
    /// `(n, trials excluded after a solver failure)`.
    pub failures: Vec<(usize, usize)>,
    pub fit: TailFit,
}

/// Nonnegative least squares for `(C, c)`: `C` in closed form for each `c` on a
/// log grid over `[1e−3, 1e3]`.
pub fn fit_tail(rows: &[TailRow]) -> TailFit {
    let mut best = TailFit {
        c_big: 0.0,
        c_small: f64::NAN,
        sse: rows.iter().map(|r| r.prob * r.prob).sum(),
    };
    for k in 0..=240 {
        let c = 10f64.powf(-3.0 + 6.0 * k as f64 / 240.0);
        let f: Vec<f64> = rows
            .iter()
            .map(|r| r.eps + (-c * r.eps * r.eps * r.n as f64).exp())
            .collect();
        let ff: f64 = f.iter().map(|x| x * x).sum();
        let pf: f64 = rows.iter().zip(&f).map(|(r, x)| r.prob * x).sum();
        let cb = if ff > 0.0 { (pf / ff).max(0.0) } else { 0.0 };
        let sse: f64 = rows.iter().zip(&f).map(|(r, x)| (r.prob - cb * x).powi(2)).sum();
        if sse < best.sse || best.c_small.is_nan() {
            best = TailFit {
                c_big: cb,
                c_small: c,
                sse,
            };
        }
    }
    best
}

/// Empirical `P(sₙ(A) ≤ ε/√n)` for each `(n, ε)`; every `ε` reuses the same
/// trials, so each curve is exactly nondecreasing in `ε`.
pub fn run_tail_experiment(
    ensemble_at: impl Fn(usize) -> Result<EnsembleSpec>,
    ns: &[usize],
    eps: &[f64],
    trials: usize,
    base_seed: u64,
) -> Result<TailResult> {
    if trials == 0 || eps.is_empty() || ns.is_empty() {
        return Err(Error::validation("need trials >= 1 and nonempty n and eps lists"));
    }
    let mut eps = eps.to_vec();
    eps.sort_by(f64::total_cmp);
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &n in ns {
        let ens = ensemble_at(n)?;
        ens.validate()?;
        let sn: Vec<Result<f64>> = map_trials(base_seed, trials, |seed| {
            let a: ComplexMatrix<f64> = sample_matrix_unchecked(&ens, seed);
            Ok(singular_values(&a)?.reals()[n - 1])
        });
        let mut ok = Vec::with_capacity(trials);
        let mut failed = 0;
        for r in sn {
            match r {
                Ok(s) => ok.push(s),
                Err(e) if e.is_numerical() => failed += 1,
                Err(e) => return Err(e),
            }
        }
        failures.push((n, failed));
        let root_n = (n as f64).sqrt();
        for &e in &eps {
            let hits = ok.iter().filter(|&&s| s <= e / root_n).count();
            let est = MeanEstimate::proportion(hits, ok.len());
            rows.push(TailRow {
                n,
                eps: e,
                trials: ok.len(),
                prob: est.mean,
                stderr: est.std_err,
            });
        }
    }
    let fit = fit_tail(&rows);
    Ok(TailResult { rows, failures, fit })
}

/// ESDs of `A/√n` for each trial, as CSV rows; failed trials are listed.
pub fn esd_trials(ens: &EnsembleSpec, trials: usize, base_seed: u64) -> Result<(Vec<Esd<f64>>, Vec<u64>)> {
    ens.validate()?;
    let scale = 1.0 / (ens.n as f64).sqrt();
    let out = map_trials(base_seed, trials, |seed| {
        compute_esd(&sample_matrix_unchecked::<f64>(ens, seed), scale)
    });
    let mut esds = Vec::new();
    let mut failed = Vec::new();
    for (t, r) in out.into_iter().enumerate() {
        match r {
            Ok(e) => esds.push(e),
            Err(e) if e.is_numerical() => failed.push(t as u64),
            Err(e) => return Err(e),
        }
    }
    Ok((esds, failed))
}

pub fn esd_rows(esds: &[(u64, Esd<f64>)]) -> Vec<EsdRow> {
    esds.iter()
        .flat_map(|(trial, e)| {
            e.eigenvalues().iter().enumerate().map(move |(k, z)| EsdRow {
                trial: *trial,
                k,
                re: z.re,
                im: z.im,
            })
        })
        .collect()
}

/// Per trial, the distance between the ESD of `X/√n` and the circular law, or
/// the ESD of `Y/√n` from the same trial seed when `y` is given.
pub fn esd_distance_trials(
    x: &EnsembleSpec,
    y: Option<&EnsembleSpec>,
    grid: &EsdGrid,
    trials: usize,
    base_seed: u64,
) -> Result<ComparisonOutcome> {
    x.validate()?;
    if let Some(y) = y {
        y.validate()?;
        if y.n != x.n {
            return Err(Error::validation("ensembles must have the same dimension"));
        }
    }
    let n = x.n;
    let scale = 1.0 / (n as f64).sqrt();
    let per_trial = map_trials(base_seed, trials, |seed| -> Result<f64> {
        let ex = compute_esd(&sample_matrix_unchecked::<f64>(x, seed), scale)?;
        Ok(match y {
            Some(y) => {
                let ey = compute_esd(&sample_matrix_unchecked::<f64>(y, seed), scale)?;
                esd_distance(&ex, EsdReference::Empirical(&ey), grid)
            }
            None => esd_distance(&ex, EsdReference::CircularLaw, grid),
        })
    });
    ComparisonOutcome::collect(n, per_trial)
}

/// Per-trial values of a comparison at one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonOutcome {
    pub n: usize,
    pub rows: Vec<ComparisonRow>,
    /// Trials whose value is not finite (singular matrices, zero distances).
    pub nonfinite: usize,
    /// Trials dropped after a solver failure.
    pub failed: Vec<u64>,
    /// Summary of `|value|` over finite trials.
    pub abs_summary: Summary,
}

impl ComparisonOutcome {
    fn collect(n: usize, per_trial: Vec<Result<f64>>) -> Result<Self> {
        let mut rows = Vec::new();
        let mut failed = Vec::new();
        for (t, r) in per_trial.into_iter().enumerate() {
            match r {
                Ok(value) => rows.push(ComparisonRow {
                    trial: t as u64,
                    n,
                    value,
                }),
                Err(e) if e.is_numerical() => failed.push(t as u64),
                Err(e) => return Err(e),
            }
        }
        let finite: Vec<f64> = rows.iter().map(|r| r.value.abs()).filter(|v| v.is_finite()).collect();
        Ok(ComparisonOutcome {
            n,
            nonfinite: rows.len() - finite.len(),
            abs_summary: Summary::of(&finite),
            rows,
            failed,
        })
    }

    /// Fraction of all trials whose value lies in `[−bound, bound]`.
    pub fn fraction_within(&self, bound: f64) -> f64 {
        let total = self.rows.len() + self.failed.len();
        self.rows.iter().filter(|r| r.value.abs() <= bound).count() as f64 / total as f64
    }
}

fn check_pair(x: &EnsembleSpec, y: &EnsembleSpec) -> Result<()> {
    x.validate()?;
    y.validate()?;
    if x.n != y.n {
        return Err(Error::validation(format!("ensemble dimensions differ: {} vs {}", x.n, y.n)));
    }
    Ok(())
}

/// `(1/n)log|det(A/√n − zI)|`.
pub fn normalized_log_det(a: &ComplexMatrix<f64>, z: C64) -> Result<f64> {
    let n = a.rows() as f64;
    Ok(log_abs_det(&a.scaled(1.0 / n.sqrt()).shifted(z))? / n)
}

/// Per trial `D = (1/n)log|det(A(X)/√n − zI)| − (1/n)log|det(A(Y)/√n − zI)|`,
/// with both matrices drawn from the same trial seed.
pub fn log_det_comparison(x: &EnsembleSpec, y: &EnsembleSpec, z: C64, trials: usize, base_seed: u64) -> Result<ComparisonOutcome> {
    check_pair(x, y)?;
    let per_trial = map_trials(base_seed, trials, |seed| -> Result<f64> {
        let ax = sample_matrix_unchecked::<f64>(x, seed);
        let ay = sample_matrix_unchecked::<f64>(y, seed);
        let (dx, dy) = (normalized_log_det(&ax, z)?, normalized_log_det(&ay, z)?);
        Ok(if dx == dy { 0.0 } else { dx - dy })
    });
    ComparisonOutcome::collect(x.n, per_trial)
}

/// First 1-based row index `⌈n − n^0.99⌉` of the distance sum.
pub fn distance_sum_start(n: usize) -> usize {
    let nf = n as f64;
    ((nf - nf.powf(0.99)).ceil() as usize).max(1)
}

/// `log dist(Rᵢ/√n, span(R₁,…,Rᵢ₋₁))` for `i ≥ start` (1-based), where `Rᵢ`
/// are the rows of `A − √n·zI`.
pub fn row_log_distances(a: &ComplexMatrix<f64>, z: C64, start: usize) -> Vec<f64> {
    let n = a.rows();
    let root_n = (n as f64).sqrt();
    let b = a.shifted(z * root_n);
    let mut basis = OrthonormalBasis::new(n);
    let mut out = Vec::with_capacity(n + 1 - start.min(n + 1));
    for i in 0..n {
        let row = b.row(i);
        if i + 1 >= start {
            out.push((basis.distance(row) / root_n).ln());
        }
        basis.push(row);
    }
    out
}

/// Per trial `(1/n)Σ_{i ≥ ⌈n − n^0.99⌉}(log dist(Xᵢ/√n, Vᵢ) − log dist(Yᵢ/√n, Wᵢ))`.
pub fn distance_sum_comparison(x: &EnsembleSpec, y: &EnsembleSpec, z: C64, trials: usize, base_seed: u64) -> Result<ComparisonOutcome> {
    check_pair(x, y)?;
    let n = x.n;
    let start = distance_sum_start(n);
    let per_trial = map_trials(base_seed, trials, |seed| -> Result<f64> {
        let lx = row_log_distances(&sample_matrix_unchecked(x, seed), z, start);
        let ly = row_log_distances(&sample_matrix_unchecked(y, seed), z, start);
        let sum: f64 = lx.iter().zip(&ly).map(|(a, b)| if a == b { 0.0 } else { a - b }).sum();
        Ok(sum / n as f64)
    });
    ComparisonOutcome::collect(n, per_trial)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremeFrequency {
    pub c: f64,
    /// Fraction of trials with `σ₁ ≥ n^C`.
    pub large: f64,
    /// Fraction of trials with `σₙ ≤ n^{−C}`.
    pub small: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeSvResult {
    pub n: usize,
    pub trials: usize,
    /// Per trial `(σ₁, σₙ)` of `A − z√n·I`.
    pub extremes: Vec<(f64, f64)>,
    pub frequencies: Vec<ExtremeFrequency>,
    pub failed: Vec<u64>,
}

pub fn extreme_sv_check(ens: &EnsembleSpec, z: C64, c_grid: &[f64], trials: usize, base_seed: u64) -> Result<ExtremeSvResult> {
    ens.validate()?;
    let n = ens.n;
    let shift = z * (n as f64).sqrt();
    let per_trial = map_trials(base_seed, trials, |seed| -> Result<(f64, f64)> {
        let a = sample_matrix_unchecked::<f64>(ens, seed).shifted(shift);
        let s = singular_values(&a)?.reals();
        Ok((s[0], s[n - 1]))
    });
    let mut extremes = Vec::new();
    let mut failed = Vec::new();
    for (t, r) in per_trial.into_iter().enumerate() {
        match r {
            Ok(p) => extremes.push(p),
            Err(e) if e.is_numerical() => failed.push(t as u64),
            Err(e) => return Err(e),
        }
    }
    let m = extremes.len().max(1) as f64;
    let frequencies = c_grid
        .iter()
        .map(|&c| {
            let big = (n as f64).powf(c);
            ExtremeFrequency {
                c,
                large: extremes.iter().filter(|e| e.0 >= big).count() as f64 / m,
                small: extremes.iter().filter(|e| e.1 <= 1.0 / big).count() as f64 / m,
            }
        })
        .collect();
    Ok(ExtremeSvResult {
        n,
        trials,
        extremes,
        frequencies,
        failed,
    })
}
