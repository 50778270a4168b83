use std::fs;
use std::path::{Path, PathBuf};

use rmtk::anticonc::{
    crlcd as crlcd_value, verify_crlcd_tail_bound, verify_doubling_bound, verify_levy_p_bound, verify_uniform_anticonc,
    CrlcdQuery,
};
use rmtk::config::write_matrix_csv;
use rmtk::ensembles::{sample_matrix, sample_matrix_unchecked, EnsembleSpec};
use rmtk::experiments::{
    distance_sum_comparison, esd_distance_trials, esd_rows, esd_trials, extreme_sv_check, log_det_comparison,
    persist_results, run_tail_experiment, ComparisonOutcome, ComparisonRow, ExperimentConfig,
};
use rmtk::linalg::negative_second_moment_check;
use rmtk::report::write_json;
use rmtk::seed::{map_trials, SeedSpec};
use rmtk::sphere::{
    compressible_inf_probe, crlcd_incompressible_scan, invertibility_via_distance_probe, single_vector_invertibility,
    IncompressibleScan, SphereParams,
};
use rmtk::C64;
use serde::Serialize;
use serde_json::json;

use crate::settings::{resolve, AnticoncCheck, RunConfig, SphereProbeKind};
use crate::{CliError, Common, Outcome};

struct Run {
    cfg: RunConfig,
    exp: ExperimentConfig,
    base_dir: PathBuf,
    output: PathBuf,
}

impl Run {
    fn seed(&self) -> u64 {
        self.exp.base_seed()
    }

    fn single_n(&self) -> Result<usize, CliError> {
        match self.exp.dimensions()?.as_slice() {
            [n] => Ok(*n),
            many => Err(CliError::Usage(format!("this subcommand takes one dimension, got n = {many:?}"))),
        }
    }

    fn x_at(&self, n: usize) -> Result<EnsembleSpec, CliError> {
        Ok(self.exp.x_at(n, &self.base_dir)?)
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Usage(format!("{}: {e}", path.display()))
}

/// Resolves the config, fixes the output location and writes the resolved
/// config beside it. `ext = None` makes the output a directory.
fn prepare(c: &Common, name: &str, ext: Option<&str>) -> Result<Run, CliError> {
    let resolved = resolve(&c.config, &c.overrides, c.seed)?;
    let output = c.output.clone().unwrap_or_else(|| {
        let stem = c.config.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
        let file = match ext {
            Some(ext) => format!("{stem}.{name}.{ext}"),
            None => format!("{stem}.{name}"),
        };
        resolved.base_dir.join(file)
    });
    let sidecar = match ext {
        Some(_) => {
            if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
            }
            let mut s = output.clone().into_os_string();
            s.push(".resolved.toml");
            PathBuf::from(s)
        }
        None => {
            fs::create_dir_all(&output).map_err(|e| io_error(&output, e))?;
            output.join("resolved.toml")
        }
    };
    fs::write(&sidecar, resolved.config.to_toml()).map_err(|e| io_error(&sidecar, e))?;
    let exp = resolved.config.experiment_config();
    exp.validate()?;
    Ok(Run {
        cfg: resolved.config,
        exp,
        base_dir: resolved.base_dir,
        output,
    })
}

fn emit<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("summary serializes"));
}

fn comparison_summary(o: &ComparisonOutcome) -> serde_json::Value {
    json!({
        "n": o.n,
        "trials": o.rows.len(),
        "nonfinite": o.nonfinite,
        "failed": o.failed,
        "abs": o.abs_summary,
    })
}

fn e1(n: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); n];
    if n > 0 {
        v[0] = C64::new(1.0, 0.0);
    }
    v
}

pub fn sample(c: &Common) -> Result<Outcome, CliError> {
    let run = prepare(c, "sample", Some("csv"))?;
    let n = run.single_n()?;
    let a = sample_matrix::<f64>(&run.x_at(n)?, SeedSpec::new(run.seed(), 0))?;
    write_matrix_csv(&run.output, &a)?;
    emit(&json!({ "n": n, "seed": run.seed() }));
    Ok(Outcome::Ok)
}

pub fn tail(c: &Common) -> Result<Outcome, CliError> {
    let run = prepare(c, "tail", Some("csv"))?;
    let p = &run.exp.experiment;
    let result = run_tail_experiment(|n| run.exp.x_at(n, &run.base_dir), &run.exp.dimensions()?, &p.eps, p.trials, run.seed())?;
    persist_results(&result.rows, &run.output)?;
    emit(&json!({ "fit": result.fit, "failures": result.failures }));
    Ok(Outcome::Ok)
}

pub fn esd(c: &Common) -> Result<Outcome, CliError> {
    let run = prepare(c, "esd", Some("csv"))?;
    let n = run.single_n()?;
    let trials = run.exp.experiment.trials;
    let (esds, failed) = esd_trials(&run.x_at(n)?, trials, run.seed())?;
    let ids = (0..trials as u64).filter(|t| !failed.contains(t));
    let labelled: Vec<_> = ids.zip(esds).collect();
    persist_results(&esd_rows(&labelled), &run.output)?;
    emit(&json!({ "n": n, "trials": trials, "failed": failed }));
    Ok(Outcome::Ok)
}

pub fn circular_law(c: &Common) -> Result<Outcome, CliError> {
    let run = prepare(c, "circular-law", Some("csv"))?;
    let p = &run.exp.experiment;
    let mut rows: Vec<ComparisonRow> = Vec::new();
    let mut summaries = Vec::new();
    for n in run.exp.dimensions()? {
        let o = esd_distance_trials(&run.x_at(n)?, None, &p.esd_grid, p.trials, run.seed())?;
        summaries.push(comparison_summary(&o));
        rows.extend(o.rows);
    }
    persist_results(&rows, &run.output)?;
    emit(&summaries);
    Ok(Outcome::Ok)
}

pub fn universality(c: &Common) -> Result<Outcome, CliError> {
    let run = prepare(c, "universality", None)?;
    let p = &run.exp.experiment;
    let seed = run.seed();
    let (mut esd, mut log_det, mut dist_sum) = (Vec::new(), Vec::new(), Vec::new());
    let mut extremes = Vec::new();
    let mut summaries = Vec::new();
    for n in run.exp.dimensions()? {
        let x = run.x_at(n)?;
        let y = run.exp.y_at(n, &run.base_dir)?;
        let d = esd_distance_trials(&x, Some(&y), &p.esd_grid, p.trials, seed)?;
        let l = log_det_comparison(&x, &y, p.z, p.trials, seed)?;
        let s = distance_sum_comparison(&x, &y, p.z, p.trials, seed)?;
        let e = extreme_sv_check(&x, p.z, &p.c_grid, p.trials, seed)?;
        summaries.push(json!({
            "n": n,
            "esd_distance": comparison_summary(&d),
            "log_det": comparison_summary(&l),
            "distance_sum": comparison_summary(&s),
            "distance_sum_start": rmtk::experiments::distance_sum_start(n),
            "extreme_sv": e.frequencies,
        }));
        esd.extend(d.rows);
        log_det.extend(l.rows);
        dist_sum.extend(s.rows);
        extremes.push(e);
    }
    persist_results(&esd, &run.output.join("esd_distance.csv"))?;
    persist_results(&log_det, &run.output.join("log_det.csv"))?;
    persist_results(&dist_sum, &run.output.join("distance_sum.csv"))?;
    write_json(&run.output.join("extreme_sv.json"), &extremes)?;
    write_json(&run.output.join("summary.json"), &summaries)?;
    emit(&summaries);
    Ok(Outcome::Ok)
}

/// The coefficient vector and per-coordinate laws for the vector verifiers.
fn vector_setup(run: &Run, v: &[C64]) -> Result<(Vec<C64>, Vec<rmtk::ensembles::DistributionSpec>), CliError> {
    let v = if v.is_empty() { e1(run.single_n()?) } else { v.to_vec() };
    let ens = run.x_at(v.len())?;
    Ok((v, ens.column_noise_laws(0)))
}

pub fn anticonc_verify(c: &Common) -> Result<Outcome, CliError> {
    let run = prepare(c, "anticonc", Some("json"))?;
    let a = &run.cfg.anticonc;
    let (v, dists) = vector_setup(&run, &a.v)?;
    let seed = SeedSpec::new(run.seed(), 0);
    let (flag, value) = match a.check {
        AnticoncCheck::LevyP => {
            let r = verify_levy_p_bound(&v, &dists, a.r, a.m, seed)?;
            (r.flag, serde_json::to_value(r))
        }
        AnticoncCheck::Doubling => {
            let r = verify_doubling_bound(&v, &dists, a.r, &a.quadrature, a.m, seed)?;
            (r.flag, serde_json::to_value(r))
        }
        AnticoncCheck::CrlcdTail => {
            let r = verify_crlcd_tail_bound(&v, &dists, a.eps, a.l, a.u, &a.grid, a.m, seed)?;
            (r.report.flag, serde_json::to_value(r))
        }
        AnticoncCheck::Uniform => {
            let (best_c, r) = verify_uniform_anticonc(&v, &dists, &a.c_grid, a.m, seed)?;
            (r.flag, serde_json::to_value(json!({ "best_c": best_c, "report": r })))
        }
    };
    let value = value.expect("report serializes");
    write_json(&run.output, &value)?;
    emit(&value);
    Ok(if flag { Outcome::Flagged } else { Outcome::Ok })
}

pub fn crlcd(c: &Common) -> Result<Outcome, CliError> {
    let run = prepare(c, "crlcd", Some("json"))?;
    let p = &run.cfg.crlcd;
    let (v, dists) = vector_setup(&run, &p.v)?;
    let q = CrlcdQuery::new(v, p.l, p.u).with_grid(p.grid);
    let result = crlcd_value(&q, &dists, SeedSpec::new(run.seed(), 0))?;
    write_json(&run.output, &result)?;
    emit(&result);
    Ok(Outcome::Ok)
}

pub fn sphere_probe(c: &Common) -> Result<Outcome, CliError> {
    let run = prepare(c, "sphere", Some("json"))?;
    let s = &run.cfg.sphere;
    let n = run.single_n()?;
    let ens = run.x_at(n)?;
    let params = SphereParams::new(s.delta, s.rho);
    let trials = run.exp.experiment.trials;
    let seed = run.seed();
    let (flag, value) = match s.probe {
        SphereProbeKind::SingleVector => {
            let v = if s.v.is_empty() {
                vec![C64::new(1.0 / (n as f64).sqrt(), 0.0); n]
            } else {
                s.v.clone()
            };
            let r = single_vector_invertibility(&ens, &v, &s.c_grid, trials, seed)?;
            (r.best_c.is_none(), serde_json::to_value(r))
        }
        SphereProbeKind::Compressible => {
            let r = compressible_inf_probe(&ens, &params, s.vector_samples, &s.thresholds, trials, seed)?;
            (false, serde_json::to_value(r))
        }
        SphereProbeKind::Distance => {
            let r = invertibility_via_distance_probe(&ens, &params, s.eps, trials, seed)?;
            (r.report.flag, serde_json::to_value(r))
        }
        SphereProbeKind::Incompressible => {
            let scan = IncompressibleScan {
                l: s.l,
                u: s.u,
                grid: s.grid,
                vector_samples: s.vector_samples,
            };
            let r = crlcd_incompressible_scan(&ens, &params, &scan, &[], SeedSpec::new(seed, 0))?;
            (!(r.h_fit > 0.0), serde_json::to_value(r))
        }
    };
    let value = value.expect("report serializes");
    write_json(&run.output, &value)?;
    emit(&value);
    Ok(if flag { Outcome::Flagged } else { Outcome::Ok })
}

pub fn identity_check(c: &Common) -> Result<Outcome, CliError> {
    let run = prepare(c, "identity", Some("csv"))?;
    let n = run.single_n()?;
    let ens = run.x_at(n)?;
    let trials = run.exp.experiment.trials;
    let checks = map_trials(run.seed(), trials, |seed| {
        negative_second_moment_check(&sample_matrix_unchecked::<f64>(&ens, seed))
    });
    let mut rows = Vec::with_capacity(trials);
    for (t, check) in checks.into_iter().enumerate() {
        rows.push(ComparisonRow {
            trial: t as u64,
            n,
            value: check?.rel_err,
        });
    }
    persist_results(&rows, &run.output)?;
    let tol = run.cfg.identity.tol;
    let worst = rows.iter().map(|r| r.value).fold(0.0, f64::max);
    let failing = rows.iter().filter(|r| !(r.value <= tol)).count();
    emit(&json!({ "n": n, "trials": trials, "max_rel_err": worst, "tol": tol, "failing": failing }));
    Ok(if failing > 0 { Outcome::Flagged } else { Outcome::Ok })
}
