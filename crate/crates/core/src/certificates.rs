//! Checkable optimality and recovery certificates: support independence, local
//! sparsity, uniformity, exact recovery, sampled spherical-section ratios and the
//! zero-exclusion threshold on γ.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    largest_singular_value, null_space_basis, select_columns, smallest_singular_pair, support,
};
use crate::problem::Domain;
use crate::rng::rng_from_seed;

/// Relative singular-value floor used when no explicit tolerance is given.
pub const DEFAULT_RELATIVE_SV_TOL: f64 = 1e-8;
/// Relative residual below which `Ax = b` counts as satisfied.
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// Largest `n` accepted by [`exact_recovery_check`].
pub const MAX_RECOVERY_N: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Witness {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub name: String,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub details: String,
}

impl CertificateReport {
    fn new(name: &str, verdict: Verdict, witness: Option<Witness>, details: String) -> Self {
        Self {
            name: name.to_string(),
            verdict,
            witness,
            details,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Singular-value threshold for a column submatrix: either the explicit value or
/// `1e-8 · σ_max(A_Λ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SvTol {
    Absolute(f64),
    Relative(f64),
}

impl Default for SvTol {
    fn default() -> Self {
        SvTol::Relative(DEFAULT_RELATIVE_SV_TOL)
    }
}

impl SvTol {
    fn threshold(self, sub: &DMatrix<f64>) -> f64 {
        match self {
            SvTol::Absolute(t) => t,
            SvTol::Relative(r) => r * largest_singular_value(sub),
        }
    }

    fn validate(self) -> Result<()> {
        let v = match self {
            SvTol::Absolute(t) | SvTol::Relative(t) => t,
        };
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(invalid("sv_tol", format!("must be positive, got {v}")))
        }
    }
}

struct RankTest {
    sigma_min: f64,
    threshold: f64,
    null_dir: DVector<f64>,
}

impl RankTest {
    fn full_rank(&self) -> bool {
        self.sigma_min > self.threshold
    }
}

fn rank_test(a: &DMatrix<f64>, cols: &[usize], tol: SvTol) -> RankTest {
    let sub = select_columns(a, cols);
    let threshold = tol.threshold(&sub);
    let (sigma_min, null_dir) = smallest_singular_pair(&sub);
    RankTest {
        sigma_min,
        threshold,
        null_dir,
    }
}

/// Scales `v` so its largest-magnitude entry equals 1.
fn normalize_witness(v: &DVector<f64>) -> Vec<f64> {
    let (idx, _) =
        v.iter().enumerate().fold(
            (0, 0.0),
            |acc, (i, x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc },
        );
    let pivot = v[idx];
    if pivot == 0.0 {
        return v.iter().copied().collect();
    }
    v.iter().map(|x| x / pivot).collect()
}

fn check_columns(a: &DMatrix<f64>, x: &DVector<f64>) -> Result<()> {
    if a.ncols() != x.len() {
        return Err(Error::Dimension(format!(
            "matrix has {} columns but x has length {}",
            a.ncols(),
            x.len()
        )));
    }
    if x.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroVector("x"));
    }
    Ok(())
}

/// Pass iff the columns of `A` on `supp(x)` are linearly independent. A failing
/// report carries the near-null combination over the support (largest entry scaled to 1).
pub fn support_independence(
    a: &DMatrix<f64>,
    x: &DVector<f64>,
    sv_tol: SvTol,
) -> Result<CertificateReport> {
    check_columns(a, x)?;
    sv_tol.validate()?;
    let supp = support(x);
    let test = rank_test(a, &supp, sv_tol);
    let details = format!(
        "support {:?}; sigma_min = {:e}, threshold = {:e}",
        supp, test.sigma_min, test.threshold
    );
    Ok(if test.full_rank() {
        CertificateReport::new("support_independence", Verdict::Pass, None, details)
    } else {
        let w = Witness::Vector(normalize_witness(&test.null_dir));
        CertificateReport::new("support_independence", Verdict::Fail, Some(w), details)
    })
}

/// Locally-sparse membership of a feasible `x`: the same rank test, preceded by a
/// feasibility and domain check. Infeasible input yields `Inconclusive`.
pub fn is_locally_sparse(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    x: &DVector<f64>,
    domain: Domain,
    sv_tol: SvTol,
) -> Result<CertificateReport> {
    check_columns(a, x)?;
    if a.nrows() != b.len() {
        return Err(Error::Dimension(format!(
            "matrix has {} rows but b has length {}",
            a.nrows(),
            b.len()
        )));
    }
    let res = (a * x - b).norm();
    let bound = FEASIBILITY_TOL * b.norm();
    if res > bound {
        return Ok(CertificateReport::new(
            "locally_sparse",
            Verdict::Inconclusive,
            Some(Witness::Scalar(res)),
            format!("x is not feasible: ‖Ax − b‖ = {res:e} > {bound:e}"),
        ));
    }
    if domain == Domain::NonNegative && x.iter().any(|v| *v < 0.0) {
        return Ok(CertificateReport::new(
            "locally_sparse",
            Verdict::Inconclusive,
            None,
            "x has negative entries outside the nonnegative domain".to_string(),
        ));
    }
    let mut report = support_independence(a, x, sv_tol)?;
    report.name = "locally_sparse".to_string();
    Ok(report)
}

/// `κ(x) = min nonzero |x_i| / max |x_i|`.
pub fn uniformity(x: &DVector<f64>) -> Result<f64> {
    let (lo, hi) = x
        .iter()
        .filter(|v| **v != 0.0)
        .map(|v| v.abs())
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if hi == 0.0 {
        return Err(Error::ZeroVector("x"));
    }
    Ok(lo / hi)
}

/// Right-hand side `(√k − √(k−s))²/s` of the recovery condition for a candidate with
/// `k` nonzeros against a truth with `s`.
pub fn recovery_threshold(k: usize, s: usize) -> f64 {
    let (k, s) = (k as f64, s as f64);
    (k.sqrt() - (k - s).sqrt()).powi(2) / s
}

fn combinations(n: usize, max_k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for k in 1..=max_k {
        rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// Feasible point supported on `cols`, if `A_Λ` has full column rank and the
/// solution of `A_Λ x_Λ = b` is exact and in the domain.
fn support_candidate(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    cols: &[usize],
    domain: Domain,
) -> Option<DVector<f64>> {
    let sub = select_columns(a, cols);
    let svd = sub.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > DEFAULT_RELATIVE_SV_TOL * smax) {
        return None;
    }
    let xs = svd.solve(b, 0.0).ok()?;
    if (&sub * &xs - b).norm() > FEASIBILITY_TOL * b.norm() {
        return None;
    }
    let scale = xs.amax();
    let mut x = DVector::zeros(a.ncols());
    for (j, &c) in cols.iter().enumerate() {
        let v = xs[j];
        if v.abs() <= 1e-12 * scale {
            continue;
        }
        if domain == Domain::NonNegative && v < 0.0 {
            return None;
        }
        x[c] = v;
    }
    Some(x)
}

/// Exhaustive check of the uniformity condition over every feasible point whose
/// support has full column rank. Pass means each candidate `x ≠ x0` has
/// `κ(x) > (√k − √(k−s))²/s`; Fail carries the first violating candidate in
/// support-enumeration order.
pub fn exact_recovery_check(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    x0: &DVector<f64>,
    domain: Domain,
) -> Result<CertificateReport> {
    let (m, n) = a.shape();
    if n > MAX_RECOVERY_N {
        return Err(Error::TooLarge(format!(
            "exact recovery enumeration needs n ≤ {MAX_RECOVERY_N}, got {n}"
        )));
    }
    check_columns(a, x0)?;
    if b.len() != m {
        return Err(Error::Dimension(format!(
            "matrix has {m} rows but b has length {}",
            b.len()
        )));
    }
    if (a * x0 - b).norm() > FEASIBILITY_TOL * b.norm() {
        return Err(invalid("x0", "not feasible for Ax = b"));
    }
    let s = support(x0).len();
    let x0_norm = x0.norm();
    let supports = combinations(n, m.min(n));
    let violation = supports.par_iter().find_map_first(|cols| {
        let x = support_candidate(a, b, cols, domain)?;
        if (&x - x0).norm() <= 1e-9 * x0_norm {
            return None;
        }
        let k = support(&x).len();
        if k < s {
            return Some((x, k, 0.0, f64::INFINITY));
        }
        let kappa = uniformity(&x).ok()?;
        let rhs = recovery_threshold(k, s);
        (kappa <= rhs).then_some((x, k, kappa, rhs))
    });
    Ok(match violation {
        None => CertificateReport::new(
            "exact_recovery",
            Verdict::Pass,
            None,
            format!(
                "{} supports enumerated; every feasible candidate satisfies the uniformity bound (s = {s})",
                supports.len()
            ),
        ),
        Some((x, k, kappa, rhs)) => {
            let details = if k < s {
                format!("feasible point with {k} < {s} nonzeros")
            } else {
                format!("candidate with {k} nonzeros has kappa = {kappa:e} ≤ {rhs:e}")
            };
            CertificateReport::new(
                "exact_recovery",
                Verdict::Fail,
                Some(Witness::Vector(x.iter().copied().collect())),
                details,
            )
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SspEstimate {
    /// Smallest sampled `‖v‖₁/‖v‖₂` over the null space.
    pub ratio_min: f64,
    /// Every `µ` below this value is refuted: `√(m/µ) > ratio_min`.
    pub implied_mu_bound: f64,
    pub samples: usize,
    pub null_dim: usize,
    pub witness: Vec<f64>,
}

/// Samples uniformly random unit directions in `N(A)` and records the smallest L1/L2
/// ratio seen. Samples are drawn sequentially from one stream, so a longer run
/// extends a shorter one with the same seed.
pub fn ssp_estimate(a: &DMatrix<f64>, samples: usize, seed: u64) -> Result<SspEstimate> {
    if samples == 0 {
        return Err(invalid("samples", "must be at least 1"));
    }
    if !crate::linalg::all_finite(a.as_slice()) {
        return Err(Error::NonFinite("A"));
    }
    let basis = null_space_basis(a);
    let d = basis.ncols();
    if d == 0 {
        return Err(invalid("A", "null space is trivial"));
    }
    let mut rng = rng_from_seed(seed);
    let mut best = f64::INFINITY;
    let mut witness = DVector::zeros(a.ncols());
    for _ in 0..samples {
        let c = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
        let v = &basis * c;
        let norm = v.norm();
        if norm == 0.0 {
            continue;
        }
        let ratio = v.lp_norm(1) / norm;
        if ratio < best {
            best = ratio;
            witness = v / norm;
        }
    }
    Ok(SspEstimate {
        ratio_min: best,
        implied_mu_bound: a.nrows() as f64 / (best * best),
        samples,
        null_dim: d,
        witness: witness.iter().copied().collect(),
    })
}

/// Sampling can only refute the spherical-section property, so the report is
/// always `Inconclusive` and carries the minimizing direction.
pub fn ssp_report(a: &DMatrix<f64>, samples: usize, seed: u64) -> Result<CertificateReport> {
    let est = ssp_estimate(a, samples, seed)?;
    Ok(CertificateReport::new(
        "ssp_estimate",
        Verdict::Inconclusive,
        Some(Witness::Vector(est.witness.clone())),
        format!(
            "ratio_min = {:.17e} over {} samples of a {}-dimensional null space; mu-SSP fails for mu < {:.17e}; sampled over the full null space, not the nonnegative cone",
            est.ratio_min, est.samples, est.null_dim, est.implied_mu_bound
        ),
    ))
}

/// γ threshold below which the origin cannot minimize the penalized model:
/// `(‖b‖² − ε²) / (2(√n − 1))`.
pub fn gamma_zero_bound(b: &DVector<f64>, n: usize, eps: f64) -> Result<f64> {
    if n <= 1 {
        return Err(invalid("n", "the bound needs n ≥ 2"));
    }
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(invalid(
            "eps",
            format!("must be finite and nonnegative, got {eps}"),
        ));
    }
    let nb = b.norm();
    if !(nb > eps) {
        return Err(invalid(
            "eps",
            format!("must be below ‖b‖ = {nb}, got {eps}"),
        ));
    }
    Ok((nb * nb - eps * eps) / (2.0 * ((n as f64).sqrt() - 1.0)))
}

pub fn gamma_bound_report(b: &DVector<f64>, n: usize, eps: f64) -> Result<CertificateReport> {
    let g = gamma_zero_bound(b, n, eps)?;
    Ok(CertificateReport::new(
        "gamma_zero_bound",
        Verdict::Pass,
        Some(Witness::Scalar(g)),
        format!("zero is excluded from the minimizers for gamma < {g}"),
    ))
}
