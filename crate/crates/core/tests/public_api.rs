use approx::assert_relative_eq;
use proptest::prelude::*;
use rmtk::config::EnsembleConfig;
use rmtk::ensembles::{sample_matrix, DistributionSpec, EnsembleSpec, Profile};
use rmtk::experiments::{circular_law_cdf, compute_esd, load_results, persist_results, run_tail_experiment, TailRow};
use rmtk::linalg::{eigenvalues, singular_values, smallest_singular_value};
use rmtk::seed::SeedSpec;
use rmtk::sphere::{classify, dist_to_sparse, random_compressible_vector, SphereParams, VectorClass};
use rmtk::{ComplexMatrix32, ComplexMatrix64, Esd64, C32, C64};

const CONFIG: &str = r#"
n = 12
dist = { kind = "four_point_uniform" }
shift = "identity*0.5+0.5i"
scale = "2"
base_seed = 5
"#;

#[test]
fn same_draw_in_both_precisions() {
    let ens = EnsembleSpec::ginibre(10).with_shift(Profile::Identity(C64::new(3.0, 0.0)));
    let seed = SeedSpec::new(17, 2);
    let a64: ComplexMatrix64 = sample_matrix(&ens, seed).unwrap();
    let a32: ComplexMatrix32 = sample_matrix(&ens, seed).unwrap();
    let s64 = singular_values(&a64).unwrap().reals();
    let s32 = singular_values(&a32).unwrap().reals();
    for (x, y) in s64.iter().zip(&s32) {
        assert_relative_eq!(*x, *y as f64, max_relative = 1e-4);
    }
    let e32 = eigenvalues(&a32).unwrap().values;
    let trace: C32 = e32.iter().sum();
    let diag: C32 = (0..10).map(|i| a32.row(i)[i]).sum();
    assert_relative_eq!(trace.re, diag.re, epsilon = 1e-3);
    assert_relative_eq!(trace.im, diag.im, epsilon = 1e-3);
}

#[test]
fn config_drives_sampling() {
    let cfg: EnsembleConfig = toml::from_str(CONFIG).unwrap();
    let ens = cfg.to_spec(None, std::path::Path::new(".")).unwrap();
    let a: ComplexMatrix64 = sample_matrix(&ens, SeedSpec::new(cfg.base_seed, 0)).unwrap();
    for i in 0..12 {
        for j in 0..12 {
            let noise = a.row(i)[j] - if i == j { C64::new(0.5, 0.5) } else { C64::new(0.0, 0.0) };
            assert_relative_eq!(noise.norm(), 2.0, epsilon = 1e-12);
        }
    }
}

#[test]
fn ginibre_spectrum_is_roughly_circular() {
    let n = 128;
    let a: ComplexMatrix64 = sample_matrix(&EnsembleSpec::ginibre(n), SeedSpec::new(3, 0)).unwrap();
    let esd: Esd64 = compute_esd(&a, 1.0 / (n as f64).sqrt()).unwrap();
    for (s, t) in [(0.0, 0.0), (0.5, 0.5), (-0.3, 0.6)] {
        assert!((esd.cdf(s, t) - circular_law_cdf(s, t)).abs() < 0.1, "({s}, {t})");
    }
}

#[test]
fn tail_rows_survive_a_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tail.csv");
    let g = EnsembleSpec::ginibre(8);
    let r = run_tail_experiment(|n| g.resized(n), &[8, 16], &[0.25, 1.0], 50, 9).unwrap();
    persist_results(&r.rows, &path).unwrap();
    assert_eq!(load_results::<TailRow>(&path).unwrap(), r.rows);
}

#[test]
fn shifted_identity_has_known_smallest_singular_value() {
    let zero_noise = EnsembleSpec::iid(6, DistributionSpec::constant(C64::new(0.0, 0.0)))
        .with_shift(Profile::Identity(C64::new(0.0, 2.5)));
    let a: ComplexMatrix64 = sample_matrix(&zero_noise, SeedSpec::new(0, 0)).unwrap();
    assert_relative_eq!(smallest_singular_value(&a).unwrap(), 2.5, epsilon = 1e-12);
}

fn unit(v: Vec<C64>) -> Vec<C64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sparse_distance_shrinks_with_delta(parts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..20)) {
        prop_assume!(parts.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3));
        let u = unit(parts.iter().map(|&(a, b)| C64::new(a, b)).collect());
        let n = u.len();
        let mut last = 1.0 + 1e-12;
        for k in 1..n {
            let d = dist_to_sparse(&u, k as f64 / n as f64).unwrap();
            prop_assert!((0.0..=last).contains(&d));
            last = d;
        }
        let smallest = u.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        prop_assert!((last - smallest).abs() <= 1e-12);
    }

    #[test]
    fn classification_partitions_the_sphere(parts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 10..30), rho in 0.05f64..0.9) {
        prop_assume!(parts.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3));
        let u = unit(parts.iter().map(|&(a, b)| C64::new(a, b)).collect());
        let params = SphereParams::new(0.2, rho);
        let c = classify(&u, &params).unwrap();
        prop_assert_eq!(c.is_compressible(), c.dist_to_sparse <= rho);
        prop_assert_eq!(c.kind == VectorClass::Incompressible, !c.is_compressible());
    }

    #[test]
    fn compressible_samples_are_compressible(seed in any::<u64>(), n in 10usize..40, rho in 0.01f64..0.9) {
        let params = SphereParams::new(0.1, rho);
        let mut rng = SeedSpec::new(seed, 0).rng();
        let u = random_compressible_vector(n, &params, &mut rng);
        prop_assert!(classify(&u, &params).unwrap().is_compressible());
    }

    #[test]
    fn esd_cdf_is_monotone(seed in 0u64..500, s in -1.5f64..1.5, t in -1.5f64..1.5, ds in 0.0f64..1.0, dt in 0.0f64..1.0) {
        let a: ComplexMatrix64 = sample_matrix(&EnsembleSpec::ginibre(12), SeedSpec::new(seed, 0)).unwrap();
        let esd = compute_esd(&a, 1.0 / 12f64.sqrt()).unwrap();
        prop_assert!(esd.cdf(s, t) <= esd.cdf(s + ds, t + dt));
        prop_assert!(circular_law_cdf(s, t) <= circular_law_cdf(s + ds, t + dt) + 1e-15);
    }
}
