//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::E;
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rmtk::anticonc::{
    crlcd, levy_concentration, verify_crlcd_tail_bound, verify_doubling_bound, verify_levy_p_bound, CrlcdGrid,
    CrlcdQuery, QuadratureSpec, TRUNCATION_TOL, CRLCD_CONSTANT_LIMIT,
};
use rmtk::ensembles::{sample_matrix_unchecked, Atom, DistributionSpec, EnsembleSpec};
use rmtk::experiments::{
    distance_sum_comparison, esd_distance_trials, esd_rows, esd_trials, log_det_comparison, persist_results,
    run_tail_experiment, EsdGrid, ExperimentConfig, TailResult,
};
use rmtk::linalg::negative_second_moment_check;
use rmtk::seed::{map_trials, SeedSpec};
use rmtk::{ComplexMatrix64, C64};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn e1(n: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); n];
    v[0] = C64::new(1.0, 0.0);
    v
}

fn edelman_tail() -> Verdict {
    let eps = [0.1, 0.3, 0.5, 1.0];
    let g = EnsembleSpec::ginibre(64);
    let r = run_tail_experiment(|n| g.resized(n), &[64], &eps, 2000, 20_240_101).unwrap();
    let worst = r
        .rows
        .iter()
        .map(|row| row.prob - (row.eps * row.eps + 3.0 * row.stderr))
        .fold(f64::NEG_INFINITY, f64::max);
    let probs: Vec<String> = r.rows.iter().map(|row| format!("eps={} p={:.4}", row.eps, row.prob)).collect();
    verdict(worst <= 0.0 && r.failures[0].1 == 0, format!("{}; worst excess {worst:.4}", probs.join(", ")))
}

fn monotone_in_eps(r: &TailResult) -> bool {
    r.rows.windows(2).filter(|w| w[0].n == w[1].n).all(|w| w[0].prob <= w[1].prob)
}

fn tail_shape() -> Verdict {
    let eps = [0.1, 0.25, 0.5];
    let fp = EnsembleSpec::iid(32, DistributionSpec::FourPointUniform);
    let r = run_tail_experiment(|n| fp.resized(n), &[32, 64, 128], &eps, 1000, 77).unwrap();
    let at = |n: usize| *r.rows.iter().find(|row| row.n == n && row.eps == 0.5).unwrap();
    let (small, large) = (at(32), at(128));
    let se = (large.stderr.powi(2) + 4.0 * small.stderr.powi(2)).sqrt() / 0.5;
    let (ratio_small, ratio_large) = (small.prob / 0.5, large.prob / 0.5);
    let bounded = ratio_large <= 2.0 * ratio_small + 3.0 * se;
    let monotone = monotone_in_eps(&r);
    verdict(
        bounded && monotone,
        format!(
            "P/eps at n=32: {ratio_small:.4}, n=64: {:.4}, n=128: {ratio_large:.4}; monotone in eps: {monotone}; fit C={:.3} c={:.3}",
            at(64).prob / 0.5,
            r.fit.c_big,
            r.fit.c_small
        ),
    )
}

fn negative_moment_identity() -> Verdict {
    let g = EnsembleSpec::ginibre(8);
    let checks = map_trials(4242, 100, |seed| {
        let a: ComplexMatrix64 = sample_matrix_unchecked(&g, seed);
        negative_second_moment_check(&a)
    });
    let mut worst: f64 = 0.0;
    let mut errors = 0;
    for c in checks {
        match c {
            Ok(c) => worst = worst.max(c.rel_err),
            Err(_) => errors += 1,
        }
    }
    verdict(errors == 0 && worst <= 1e-8, format!("100 matrices, max rel_err {worst:.2e}, solver errors {errors}"))
}

fn random_law(rng: &mut impl Rng) -> DistributionSpec {
    match rng.random_range(0..5) {
        0 => DistributionSpec::gaussian(),
        1 => DistributionSpec::FourPointUniform,
        2 => DistributionSpec::RealRademacher,
        3 => DistributionSpec::SparseBernoulli {
            p: rng.random_range(0.1..0.9),
            value: C64::new(1.0, 0.0),
        },
        _ => DistributionSpec::LatticeUniform {
            support: vec![
                Atom {
                    value: C64::new(0.0, 0.0),
                    prob: 0.5,
                },
                Atom {
                    value: C64::new(1.0, 1.0),
                    prob: 0.25,
                },
                Atom {
                    value: C64::new(-2.0, 0.5),
                    prob: 0.25,
                },
            ],
        },
    }
}

fn random_vector(n: usize, rng: &mut impl Rng) -> Vec<C64> {
    let g = DistributionSpec::gaussian();
    let v: Vec<C64> = (0..n).map(|_| g.draw(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let scale = rng.random_range(0.5..2.0) / norm;
    v.into_iter().map(|z| z * scale).collect()
}

fn anticoncentration_suite() -> Verdict {
    let mut rng = SeedSpec::new(31_337, 0).rng();
    let mut levy_flags = 0;
    let mut min_margin = f64::INFINITY;
    for case in 0..50u64 {
        let n = rng.random_range(1..=8);
        let v = random_vector(n, &mut rng);
        let dists: Vec<DistributionSpec> = (0..n).map(|_| random_law(&mut rng)).collect();
        let r = rng.random_range(0.05..1.5);
        let rep = verify_levy_p_bound(&v, &dists, r, 20_000, SeedSpec::new(900, case)).unwrap();
        levy_flags += rep.flag as usize;
        min_margin = min_margin.min(rep.margin);
    }

    let quad = QuadratureSpec::default();
    let truncation = (-std::f64::consts::PI * quad.radius * quad.radius).exp();
    let mut doubling_flags = 0;
    for case in 0..10u64 {
        let n = rng.random_range(1..=4);
        let w = random_vector(n, &mut rng);
        let dists: Vec<DistributionSpec> = (0..n).map(|_| random_law(&mut rng)).collect();
        let r = rng.random_range(0.1..1.0);
        let rep = verify_doubling_bound(&w, &dists, r, &quad, 4000, SeedSpec::new(901, case)).unwrap();
        doubling_flags += rep.flag as usize;
    }

    let tail_cases = [
        (e1(1), DistributionSpec::RealRademacher, 0.1),
        (e1(1), DistributionSpec::FourPointUniform, 0.1),
        (e1(1), DistributionSpec::gaussian(), 0.1),
        (vec![C64::new(0.5, 0.0); 4], DistributionSpec::FourPointUniform, 0.2),
        (e1(3), DistributionSpec::RealRademacher, 1.0),
    ];
    let mut worst_c: f64 = 0.0;
    for (k, (v, law, eps)) in tail_cases.iter().enumerate() {
        let dists = vec![law.clone(); v.len()];
        let rep = verify_crlcd_tail_bound(v, &dists, *eps, 6.0, 0.3, &CrlcdGrid::default(), 20_000, SeedSpec::new(902, k as u64))
            .unwrap();
        worst_c = worst_c.max(rep.implied_constant);
    }
    verdict(
        levy_flags == 0 && doubling_flags == 0 && truncation < TRUNCATION_TOL && worst_c <= CRLCD_CONSTANT_LIMIT,
        format!(
            "levy/P flags {levy_flags}/50 (min margin {min_margin:.3}), doubling flags {doubling_flags}/10 (e^-piR^2 = {truncation:.1e}), max implied constant {worst_c:.3} over {} cases",
            tail_cases.len()
        ),
    )
}

fn crlcd_oracles() -> Verdict {
    let run = |law: DistributionSpec| {
        let q = CrlcdQuery::new(e1(1), 10.0, 0.3);
        crlcd(&q, &[law], SeedSpec::new(5, 0)).unwrap()
    };
    let rad = run(DistributionSpec::RealRademacher);
    let four = run(DistributionSpec::FourPointUniform);
    let gauss = run(DistributionSpec::gaussian());
    let rad_ok = (rad.value - 0.5).abs() <= 1e-3;
    let four_ok = (four.value - 1.0).abs() <= 1e-3;
    verdict(
        rad_ok && four_ok && gauss.capped,
        format!(
            "rademacher {:.4} (target 0.5: {}), four-point {:.4} (target 1.0: {}), gaussian {:.4} capped={} (target: cap)",
            rad.value,
            ok(rad_ok),
            four.value,
            ok(four_ok),
            gauss.value,
            gauss.capped
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "miss"
    }
}

fn levy_closed_form() -> Verdict {
    let est = levy_concentration(&e1(1), &[DistributionSpec::gaussian()], 1.0, 50_000, SeedSpec::new(8, 0)).unwrap();
    let exact = 1.0 - 1.0 / E;
    let err = (est.estimate - exact).abs();
    verdict(err <= 0.02, format!("rho_1(e1) = {:.4} vs 1 - 1/e = {exact:.4} (|diff| {err:.4})", est.estimate))
}

fn universality() -> Verdict {
    let grid = EsdGrid::default();
    let trials = 20;
    let g = EnsembleSpec::ginibre(256);
    let fp = EnsembleSpec::iid(256, DistributionSpec::FourPointUniform);
    let to_law = esd_distance_trials(&g, None, &grid, trials, 1).unwrap();
    let pair = esd_distance_trials(&g, Some(&fp), &grid, trials, 2).unwrap();
    let z = C64::new(1.0, 1.0);
    let median = |n: usize| {
        let x = EnsembleSpec::ginibre(n);
        let y = EnsembleSpec::iid(n, DistributionSpec::FourPointUniform);
        log_det_comparison(&x, &y, z, trials, 3).unwrap().abs_summary.median
    };
    let (m64, m128) = (median(64), median(128));
    let (f_law, f_pair) = (to_law.fraction_within(0.08), pair.fraction_within(0.08));
    let sums = distance_sum_comparison(&EnsembleSpec::ginibre(128), &fp.resized(128).unwrap(), z, trials, 4).unwrap();
    verdict(
        f_law >= 0.8 && f_pair >= 0.8 && m128 <= m64,
        format!(
            "ESD vs law <= 0.08 in {:.0}% (median {:.4}); Gaussian vs four-point <= 0.08 in {:.0}% (median {:.4}); median |D| n=64 {m64:.5}, n=128 {m128:.5}; distance-sum median |.| n=128 {:.5}",
            100.0 * f_law,
            to_law.abs_summary.median,
            100.0 * f_pair,
            pair.abs_summary.median,
            sums.abs_summary.median
        ),
    )
}

const DETERMINISM_CONFIG: &str = r#"
[ensemble]
dist = { kind = "four_point_uniform" }
shift = "0.5"
base_seed = 123

[ensemble_y]
dist = { kind = "complex_gaussian", variance = 1.0 }

[experiment]
n = [12, 20]
eps = [0.2, 0.6, 1.0]
trials = 40
z = "0.5-0.25i"
"#;

fn run_pipeline(cfg: &ExperimentConfig, dir: &Path) -> Vec<Vec<u8>> {
    let here = Path::new(".");
    let p = &cfg.experiment;
    let ns = cfg.dimensions().unwrap();
    let tail = run_tail_experiment(|n| cfg.x_at(n, here), &ns, &p.eps, p.trials, cfg.base_seed()).unwrap();
    persist_results(&tail.rows, &dir.join("tail.csv")).unwrap();

    let x = cfg.x_at(ns[0], here).unwrap();
    let (esds, _) = esd_trials(&x, p.trials, cfg.base_seed()).unwrap();
    let labelled: Vec<_> = (0..).zip(esds).collect();
    persist_results(&esd_rows(&labelled), &dir.join("esd.csv")).unwrap();

    let mut rows = Vec::new();
    for &n in &ns {
        let (x, y) = (cfg.x_at(n, here).unwrap(), cfg.y_at(n, here).unwrap());
        rows.extend(log_det_comparison(&x, &y, p.z, p.trials, cfg.base_seed()).unwrap().rows);
        rows.extend(distance_sum_comparison(&x, &y, p.z, p.trials, cfg.base_seed()).unwrap().rows);
        rows.extend(esd_distance_trials(&x, Some(&y), &p.esd_grid, p.trials, cfg.base_seed()).unwrap().rows);
    }
    persist_results(&rows, &dir.join("comparisons.csv")).unwrap();
    ["tail.csv", "esd.csv", "comparisons.csv"]
        .iter()
        .map(|f| std::fs::read(dir.join(f)).unwrap())
        .collect()
}

fn determinism() -> Verdict {
    let cfg: ExperimentConfig = toml::from_str(DETERMINISM_CONFIG).unwrap();
    let resolved: ExperimentConfig = toml::from_str(&toml::to_string(&cfg).unwrap()).unwrap();
    let mut outputs = Vec::new();
    for (workers, config) in [(1, &cfg), (4, &cfg), (3, &resolved)] {
        let dir = tempfile::tempdir().unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
        outputs.push(pool.install(|| run_pipeline(config, dir.path())));
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    let bytes: usize = outputs[0].iter().map(Vec::len).sum();
    verdict(same, format!("tail, esd and comparison CSVs ({bytes} bytes) identical across 1, 4 and 3 workers and a resolved-config round trip"))
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 8] = [
        ("edelman_ginibre_tail", edelman_tail),
        ("tail_shape_four_point", tail_shape),
        ("negative_second_moment_identity", negative_moment_identity),
        ("anticoncentration_suite", anticoncentration_suite),
        ("crlcd_oracles", crlcd_oracles),
        ("levy_gaussian_closed_form", levy_closed_form),
        ("universality_desk_scale", universality),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let v = check();
        failed += !v.pass as usize;
        println!(
            "{} {name}: {} [{:.1}s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
