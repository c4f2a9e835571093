use l1l2::certificates::*;
use l1l2::generators::{gen_matrix, gen_truth, GeneratorSpec};
use l1l2::linalg::{select_columns, support};
use l1l2::metrics::{relative_error, DEFAULT_SUCCESS_THRESHOLD};
use l1l2::rng::{derive_seed, rng_from_seed};
use l1l2::solvers::{admm_plus, SolverConfig};
use l1l2::{Domain, ProblemInstance};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;

fn gaussian(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng_from_seed(seed);
    DMatrix::from_fn(m, n, |_, _| rng.sample(StandardNormal))
}

fn subsets(items: &[usize]) -> Vec<Vec<usize>> {
    (1..(1u32 << items.len()) - 1)
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &c)| c)
                .collect()
        })
        .collect()
}

/// A feasible `y ≠ x` with `supp(y) ⊆ supp(x)` exists iff one exists on a proper
/// sub-support; checked by least squares on every proper subset.
fn has_other_feasible_point(a: &DMatrix<f64>, b: &DVector<f64>, x: &DVector<f64>) -> bool {
    subsets(&support(x)).iter().any(|cols| {
        let sub = select_columns(a, cols);
        let y = sub.clone().svd(true, true).solve(b, 1e-12).unwrap();
        (&sub * y - b).norm() <= 1e-8 * b.norm()
    })
}

#[test]
fn locally_sparse_matches_enumeration() {
    let mut mismatches = 0;
    let mut fails = 0;
    for i in 0..100u64 {
        let mut rng = rng_from_seed(derive_seed(0x10ca1, i));
        let n = rng.random_range(3..=8);
        let m = rng.random_range(2..n);
        let a = if i % 3 == 0 {
            let r = rng.random_range(1..m);
            gaussian(m, r, i) * gaussian(r, n, i + 1000)
        } else {
            gaussian(m, n, i)
        };
        let s = rng.random_range(1..=n.min(m + 2));
        let mut x = DVector::zeros(n);
        for j in sample(&mut rng, n, s) {
            x[j] =
                rng.sample::<f64, _>(StandardNormal) + 0.5f64.copysign(rng.random::<f64>() - 0.5);
        }
        let b = &a * &x;
        let report = is_locally_sparse(&a, &b, &x, Domain::Free, SvTol::default()).unwrap();
        let oracle = has_other_feasible_point(&a, &b, &x);
        if report.passed() == oracle {
            mismatches += 1;
        }
        fails += usize::from(oracle);
    }
    assert_eq!(mismatches, 0);
    assert!(fails > 20 && fails < 80, "{fails}");
}

#[test]
fn locally_sparse_examples() {
    let a = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    let x = DVector::from_column_slice(&[0.0, 0.0, 2.0]);
    let b = &a * &x;
    let r = is_locally_sparse(&a, &b, &x, Domain::NonNegative, SvTol::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);

    let x = DVector::from_column_slice(&[1.0, 1.0, 0.0]);
    let b = &a * &x;
    let r = is_locally_sparse(&a, &b, &x, Domain::NonNegative, SvTol::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);

    let r = is_locally_sparse(&a, &(b * 2.0), &x, Domain::Free, SvTol::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Inconclusive);
    let x = DVector::from_column_slice(&[0.0, 0.0, -1.0]);
    let r = is_locally_sparse(&a, &(&a * &x), &x, Domain::NonNegative, SvTol::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Inconclusive);
}

#[test]
fn support_independence_on_solver_successes() {
    let mut successes = 0;
    for seed in 0..10u64 {
        let a = gen_matrix(&GeneratorSpec::dct(20, 50, 10.0, seed)).unwrap();
        let truth = gen_truth(50, 3, derive_seed(seed, 1)).unwrap();
        let b = &a * &truth;
        let p = ProblemInstance::new(a.clone(), b, 1e-4, Domain::NonNegative).unwrap();
        let config = SolverConfig {
            beta: 0.1,
            kmax_multiplier: 200,
            seed,
            ..SolverConfig::default()
        };
        let r = admm_plus(&p, &config).unwrap();
        if relative_error(&r.x_final, &truth).unwrap() < DEFAULT_SUCCESS_THRESHOLD {
            successes += 1;
            let cert = support_independence(&a, &r.x_final, SvTol::Relative(1e-8)).unwrap();
            assert!(cert.passed(), "seed {seed}: {}", cert.details);
        }
    }
    assert!(successes >= 2, "{successes}");
}

#[test]
fn exact_recovery_golden() {
    let a = gaussian(4, 6, 61);
    let mut x0 = DVector::zeros(6);
    x0[2] = 1.5;
    let b = &a * &x0;
    let r = exact_recovery_check(&a, &b, &x0, Domain::NonNegative).unwrap();
    assert_eq!(r.verdict, GOLDEN_RECOVERY_NONNEG);
    let Some(Witness::Vector(w)) = &r.witness else {
        panic!("missing witness")
    };
    assert_eq!(
        support(&DVector::from_column_slice(w)),
        GOLDEN_RECOVERY_SUPPORT
    );
    assert!(w.iter().all(|v| *v >= 0.0));
    let r = exact_recovery_check(&a, &b, &x0, Domain::Free).unwrap();
    assert_eq!(r.verdict, GOLDEN_RECOVERY_FREE);
    if let Some(Witness::Vector(w)) = &r.witness {
        let w = DVector::from_column_slice(w);
        assert!((&a * &w - &b).norm() <= 1e-8 * b.norm());
        let k = support(&w).len();
        assert!(uniformity(&w).unwrap() <= recovery_threshold(k, 1));
    }
}

const GOLDEN_RECOVERY_NONNEG: Verdict = Verdict::Fail;
const GOLDEN_RECOVERY_FREE: Verdict = Verdict::Fail;
const GOLDEN_RECOVERY_SUPPORT: [usize; 4] = [0, 1, 3, 5];

#[test]
fn duplicated_one_sparse_solution_fails_recovery() {
    let a = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 2.0, 2.0, 1.0]);
    let x0 = DVector::from_column_slice(&[1.0, 0.0, 0.0]);
    let b = &a * &x0;
    let r = exact_recovery_check(&a, &b, &x0, Domain::NonNegative).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert_eq!(r.witness, Some(Witness::Vector(vec![0.0, 1.0, 0.0])));
}

#[test]
fn exact_recovery_rejects_bad_input() {
    let a = gaussian(3, 21, 1);
    let x = DVector::from_fn(21, |i, _| if i == 0 { 1.0 } else { 0.0 });
    assert!(exact_recovery_check(&a, &(&a * &x), &x, Domain::Free).is_err());
    let a = gaussian(3, 5, 1);
    let x = DVector::from_fn(5, |i, _| if i == 0 { 1.0 } else { 0.0 });
    assert!(exact_recovery_check(&a, &DVector::zeros(3), &x, Domain::Free).is_err());
}

#[test]
fn recovery_threshold_boundary() {
    for s in 1..6 {
        assert!((recovery_threshold(s, s) - 1.0).abs() < 1e-15);
        for k in s + 1..20 {
            let t = recovery_threshold(k, s);
            assert!(t > 0.0 && t < 1.0);
        }
    }
}

/// Minimum L1/L2 ratio of Gaussian vectors projected onto `N(A)`.
fn ssp_oracle(a: &DMatrix<f64>, samples: usize, seed: u64) -> f64 {
    let gram_inv = (a * a.transpose()).try_inverse().unwrap();
    let mut rng = rng_from_seed(seed);
    let n = a.ncols();
    (0..samples)
        .map(|_| {
            let g = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let v = &g - a.transpose() * (&gram_inv * (a * &g));
            v.lp_norm(1) / v.norm()
        })
        .fold(f64::INFINITY, f64::min)
}

const SSP_10X40_FIXTURE: f64 = 3.96;

#[test]
fn ssp_statistical_fixture() {
    let a = gaussian(10, 40, 2024);
    let est = ssp_estimate(&a, 100_000, 1).unwrap();
    let oracle = ssp_oracle(&a, 100_000, 2);
    assert_eq!(est.null_dim, 30);
    assert!((est.ratio_min - SSP_10X40_FIXTURE).abs() <= 0.05 * SSP_10X40_FIXTURE);
    assert!((oracle - SSP_10X40_FIXTURE).abs() <= 0.05 * SSP_10X40_FIXTURE);
    assert!((est.implied_mu_bound - 10.0 / est.ratio_min.powi(2)).abs() < 1e-12);
    let w = DVector::from_column_slice(&est.witness);
    assert!((&a * &w).norm() < 1e-10);
    assert!((w.lp_norm(1) - est.ratio_min).abs() < 1e-12);
}

#[test]
fn ssp_rejects_trivial_null_space() {
    assert!(ssp_estimate(&gaussian(5, 5, 3), 10, 0).is_err());
    assert!(ssp_estimate(&gaussian(2, 5, 3), 0, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ssp_monotone_in_samples(seed in any::<u64>(), short in 1usize..200, extra in 0usize..200) {
        let a = gaussian(3, 8, seed);
        let lo = ssp_estimate(&a, short, seed).unwrap();
        let hi = ssp_estimate(&a, short + extra, seed).unwrap();
        prop_assert!(hi.ratio_min <= lo.ratio_min);
        prop_assert!(lo.ratio_min >= 1.0 - 1e-12 && lo.ratio_min <= 8f64.sqrt() + 1e-12);
    }

    #[test]
    fn uniformity_is_scale_invariant(
        x in prop::collection::vec(-10.0f64..10.0, 1..12),
        scale in prop::sample::select(vec![-4.0, -1.0, 0.5, 2.0, 8.0, 1024.0]),
    ) {
        let x = DVector::from_vec(x);
        prop_assume!(x.iter().any(|v| *v != 0.0));
        let k = uniformity(&x).unwrap();
        prop_assert!(k > 0.0 && k <= 1.0);
        prop_assert_eq!(uniformity(&(&x * scale)).unwrap(), k);
    }
}

#[test]
fn uniformity_examples() {
    let u = |x: &[f64]| uniformity(&DVector::from_column_slice(x));
    assert!((u(&[0.0, 3.0, -1.0, 2.0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(u(&[0.0, 4.0]).unwrap(), 1.0);
    assert_eq!(u(&[2.0, 2.0, 2.0]).unwrap(), 1.0);
    assert!(u(&[0.0, 0.0]).is_err());
}
