//! Proximal operator of the L1/L2 ratio.
//!
//! For `q ∈ Rⁿ` and `ρ > 0` the nonnegative operator returns a global minimizer of
//!
//! ```text
//! ‖x‖₁/‖x‖₂ + (ρ/2)‖x − q‖²   over x ≥ 0,
//! ```
//!
//! using the closed form: entries with `q_i ≤ 0` vanish, the survivors keep the
//! descending order of `q`, and a `t`-sparse solution is
//! `x_i = (ρ q_i − 1/r) / (ρ − a/r³)` where `(a, r) = (‖x‖₁, ‖x‖₂)` solve a
//! two-equation system. When `ρ ≤ 1/max(q)²` the solution is one-sparse.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{all_finite, l1_over_l2};

/// Number of log-spaced probes used to bracket roots of the reduced scalar equation.
const SCAN_POINTS: usize = 256;
/// Iteration cap for bisection and Newton polish.
const MAX_ROOT_ITERS: usize = 200;
/// Up to this many positive entries every support size is probed; above it the
/// bisection result is only compared against the one-sparse candidate.
pub const EXHAUSTIVE_SPARSITY_LIMIT: usize = 64;

#[derive(Clone, Debug)]
pub struct ProxQuery {
    q: DVector<f64>,
    rho: f64,
}

impl ProxQuery {
    pub fn new(q: DVector<f64>, rho: f64) -> Result<Self> {
        if q.is_empty() {
            return Err(invalid("q", "vector must have at least one entry"));
        }
        if !all_finite(q.as_slice()) {
            return Err(Error::NonFinite("prox input q"));
        }
        if !(rho.is_finite() && rho > 0.0) {
            return Err(invalid(
                "rho",
                format!("must be positive and finite, got {rho}"),
            ));
        }
        Ok(Self { q, rho })
    }

    pub fn from_slice(q: &[f64], rho: f64) -> Result<Self> {
        Self::new(DVector::from_column_slice(q), rho)
    }

    pub fn q(&self) -> &DVector<f64> {
        &self.q
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProxCase {
    ZeroInput,
    OneSparse,
    General,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProxSolution {
    pub x: DVector<f64>,
    /// Support size.
    pub t: usize,
    /// `‖x‖₁`.
    pub a: f64,
    /// `‖x‖₂`.
    pub r: f64,
    pub case: ProxCase,
}

impl ProxSolution {
    /// JSON object with keys `x`, `t`, `a`, `r`, `case`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "x": self.x.as_slice(),
            "t": self.t,
            "a": self.a,
            "r": self.r,
            "case": self.case,
        })
    }
}

/// Sums over the `t` largest (positive) entries of the sorted input.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrefixSums {
    /// `Σ_{i≤t} q_(i)`
    pub q_sum: f64,
    /// `Σ_{i≤t} q_(i)²`
    pub sq_sum: f64,
    pub t: usize,
    /// Largest entry `q_(1)`; sets the bracketing floor.
    pub lead: f64,
}

/// Sparsity level and norms selected by [`find_sparsity`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sparsity {
    pub t: usize,
    pub a: f64,
    pub r: f64,
}

/// `‖x‖₁/‖x‖₂ + (ρ/2)‖x − q‖²`, or `+∞` when `x` has a negative entry.
pub fn prox_objective_nonneg(x: &DVector<f64>, q: &DVector<f64>, rho: f64) -> f64 {
    if x.iter().any(|v| *v < 0.0) {
        return f64::INFINITY;
    }
    prox_objective(x, q, rho)
}

/// `‖x‖₁/‖x‖₂ + (ρ/2)‖x − q‖²` without any sign restriction.
pub fn prox_objective(x: &DVector<f64>, q: &DVector<f64>, rho: f64) -> f64 {
    l1_over_l2(x) + 0.5 * rho * (x - q).norm_squared()
}

/// Residuals of the two-equation system at `(a, r)`:
/// `a²/r³ − ρa + ρQ − t/r` and `r³ − S r + (Q − a)/ρ`.
pub fn ar_residuals(ps: &PrefixSums, rho: f64, a: f64, r: f64) -> (f64, f64) {
    let t = ps.t as f64;
    let first = a * a / (r * r * r) - rho * a + rho * ps.q_sum - t / r;
    let second = r * r * r - ps.sq_sum * r + (ps.q_sum - a) / rho;
    (first, second)
}

/// Global minimizer of the ratio prox over the nonnegative orthant.
pub fn prox_ratio_nonneg(query: &ProxQuery) -> Result<ProxSolution> {
    let q = &query.q;
    let rho = query.rho;
    let n = q.len();

    // positive entries in descending order; equal values keep ascending index order
    let mut order: Vec<usize> = (0..n).filter(|&i| q[i] > 0.0).collect();
    order.sort_by(|&i, &j| q[j].total_cmp(&q[i]));

    if order.is_empty() {
        return Ok(ProxSolution {
            x: DVector::zeros(n),
            t: 0,
            a: 0.0,
            r: 0.0,
            case: ProxCase::ZeroInput,
        });
    }

    let p: Vec<f64> = order.iter().map(|&i| q[i]).collect();
    let lead = p[0];
    let mut x = DVector::zeros(n);

    if rho * lead * lead <= 1.0 {
        x[order[0]] = lead;
        return Ok(ProxSolution {
            x,
            t: 1,
            a: lead,
            r: lead,
            case: ProxCase::OneSparse,
        });
    }

    let sp = find_sparsity(&p, rho)?;
    if sp.t == 1 {
        x[order[0]] = lead;
    } else {
        let denom = rho - sp.a / (sp.r * sp.r * sp.r);
        let shift = 1.0 / sp.r;
        for (k, &idx) in order.iter().take(sp.t).enumerate() {
            x[idx] = (rho * p[k] - shift) / denom;
        }
    }
    let a = x.lp_norm(1);
    let r = x.norm();
    let case = if sp.t == 1 {
        ProxCase::OneSparse
    } else {
        ProxCase::General
    };
    Ok(ProxSolution {
        x,
        t: sp.t,
        a,
        r,
        case,
    })
}

/// Prox of the ratio without the sign constraint: `sign(q) ⊙ prox⁺(|q|)`.
pub fn prox_ratio(query: &ProxQuery) -> Result<ProxSolution> {
    if query.q.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroVector(
            "unconstrained prox at q = 0 has no distinguished solution",
        ));
    }
    let magnitude = ProxQuery {
        q: query.q.abs(),
        rho: query.rho,
    };
    let mut sol = prox_ratio_nonneg(&magnitude)?;
    for (xi, qi) in sol.x.iter_mut().zip(query.q.iter()) {
        if *qi < 0.0 {
            *xi = -*xi;
        }
    }
    Ok(sol)
}

/// Solves the `(a, r)` system for a fixed support size.
///
/// `a` is eliminated through `a(r) = Q + ρ(r³ − S r)`; the remaining scalar equation
/// is bracketed on a log grid, bisected and Newton-polished. Among several admissible
/// roots the one with the lowest prox objective is returned. `None` means no root with
/// `r ≤ a ≤ √t·r` and `ρ > a/r³` exists for this `t`.
pub fn solve_ar_system(ps: &PrefixSums, rho: f64) -> Result<Option<(f64, f64)>> {
    Ok(ar_roots(ps, rho)?.into_iter().next())
}

/// Admissible roots sorted by increasing objective (`a/r − (ρ/2) r²`, the `t`-dependent part).
fn ar_roots(ps: &PrefixSums, rho: f64) -> Result<Vec<(f64, f64)>> {
    if ps.t == 0 || !(ps.q_sum > 0.0 && ps.sq_sum > 0.0 && ps.lead > 0.0) {
        return Err(invalid("prefix sums", "t ≥ 1 and positive sums required"));
    }
    if !(rho.is_finite() && rho > 0.0) {
        return Err(invalid(
            "rho",
            format!("must be positive and finite, got {rho}"),
        ));
    }
    if !(ps.q_sum.is_finite() && ps.sq_sum.is_finite()) {
        return Err(Error::NonFinite("prefix sums"));
    }
    if ps.t == 1 {
        // a single nonzero forces a = r, and the system then gives r = q_(1)
        return Ok(vec![(ps.lead, ps.lead)]);
    }

    let eq = Reduced { ps: *ps, rho };
    let floor = 1e-12 * ps.lead;
    let r_lo = floor.max(1.0 / (rho * ps.lead)) * (1.0 - 1e-9);
    let r_hi = ps.sq_sum.sqrt() + ps.q_sum;
    if r_lo >= r_hi {
        return Ok(Vec::new());
    }

    let ratio = (r_hi / r_lo).ln();
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|k| r_lo * (ratio * k as f64 / (SCAN_POINTS - 1) as f64).exp())
        .collect();
    let values: Vec<f64> = grid.iter().map(|&r| eq.value(r)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("reduced (a, r) equation"));
    }

    let mut roots = Vec::new();
    for k in 0..SCAN_POINTS {
        if values[k] == 0.0 {
            roots.push(grid[k]);
        } else if k + 1 < SCAN_POINTS && values[k] * values[k + 1] < 0.0 {
            roots.push(eq.refine(grid[k], grid[k + 1], values[k]));
        }
    }

    let t = ps.t as f64;
    let r_cap = ps.sq_sum.sqrt() * (1.0 + 1e-9);
    let mut admissible: Vec<(f64, f64)> = roots
        .into_iter()
        .map(|r| (eq.a_of(r), r))
        .filter(|&(a, r)| {
            r > 0.0
                && r <= r_cap
                && a >= r * (1.0 - 1e-12)
                && a <= t.sqrt() * r * (1.0 + 1e-12)
                && rho - a / (r * r * r) > 0.0
        })
        .collect();
    admissible.sort_by(|x, y| {
        let fx = x.0 / x.1 - 0.5 * rho * x.1 * x.1;
        let fy = y.0 / y.1 - 0.5 * rho * y.1 * y.1;
        fx.total_cmp(&fy)
    });
    Ok(admissible)
}

/// The scalar equation in `r` after eliminating `a`.
struct Reduced {
    ps: PrefixSums,
    rho: f64,
}

impl Reduced {
    fn a_of(&self, r: f64) -> f64 {
        self.ps.q_sum + self.rho * (r * r * r - self.ps.sq_sum * r)
    }

    fn value(&self, r: f64) -> f64 {
        let a = self.a_of(r);
        a * a / (r * r * r) - self.rho * a + self.rho * self.ps.q_sum - self.ps.t as f64 / r
    }

    fn derivative(&self, r: f64) -> f64 {
        let a = self.a_of(r);
        let da = self.rho * (3.0 * r * r - self.ps.sq_sum);
        let r2 = r * r;
        2.0 * a * da / (r2 * r) - 3.0 * a * a / (r2 * r2) - self.rho * da + self.ps.t as f64 / r2
    }

    fn refine(&self, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
        let lo_sign = f_lo.signum();
        for _ in 0..MAX_ROOT_ITERS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = self.value(mid);
            if fm == 0.0 {
                return mid;
            }
            if fm.signum() == lo_sign {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // Newton polish, kept only while it stays in the bracket and reduces the residual
        let mut r = 0.5 * (lo + hi);
        let mut fr = self.value(r).abs();
        for _ in 0..8 {
            let d = self.derivative(r);
            if d == 0.0 || !d.is_finite() {
                break;
            }
            let cand = r - self.value(r) / d;
            let fc = self.value(cand).abs();
            if !(cand >= lo && cand <= hi) || fc >= fr {
                break;
            }
            r = cand;
            fr = fc;
        }
        r
    }
}

enum Probe {
    Valid { a: f64, r: f64, objective: f64 },
    TooLarge,
    TooSmall,
    Ambiguous,
}

/// Finds the support size `t` of the prox solution for a descending positive vector.
///
/// Several `t` can satisfy the window conditions, so up to
/// [`EXHAUSTIVE_SPARSITY_LIMIT`] entries every `t` is probed and the lowest objective
/// wins, equal objectives going to the smaller `t`. Longer inputs use bisection on
/// `t`, driven by which window condition fails, checked against `t = 1`, with the
/// linear scan as fallback when the predicate is not monotone.
pub fn find_sparsity(q_sorted: &[f64], rho: f64) -> Result<Sparsity> {
    sparsity_search(q_sorted, rho, false)
}

/// Linear scan over every `t`, skipping the bisection. Used to cross-check
/// [`find_sparsity`].
pub fn find_sparsity_exhaustive(q_sorted: &[f64], rho: f64) -> Result<Sparsity> {
    sparsity_search(q_sorted, rho, true)
}

fn sparsity_search(q_sorted: &[f64], rho: f64, exhaustive: bool) -> Result<Sparsity> {
    let nu = q_sorted.len();
    if nu == 0 {
        return Err(invalid("q_sorted", "needs at least one entry"));
    }
    if q_sorted.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(invalid("q_sorted", "entries must be positive and finite"));
    }
    if q_sorted.windows(2).any(|w| w[0] < w[1]) {
        return Err(invalid("q_sorted", "entries must be in descending order"));
    }
    let lead = q_sorted[0];
    if rho * lead * lead <= 1.0 {
        return Err(invalid(
            "rho",
            "find_sparsity requires rho > 1/q_(1)^2; the solution is one-sparse otherwise",
        ));
    }

    let mut q_pre = vec![0.0; nu + 1];
    let mut s_pre = vec![0.0; nu + 1];
    for (k, &v) in q_sorted.iter().enumerate() {
        q_pre[k + 1] = q_pre[k] + v;
        s_pre[k + 1] = s_pre[k] + v * v;
    }
    let s_total = s_pre[nu];

    let probe = |t: usize| -> Result<Probe> {
        let ps = PrefixSums {
            q_sum: q_pre[t],
            sq_sum: s_pre[t],
            t,
            lead,
        };
        let roots = ar_roots(&ps, rho)?;
        if roots.is_empty() {
            return Ok(Probe::Ambiguous);
        }
        let (mut too_large, mut too_small) = (0, 0);
        let mut best: Option<(f64, f64, f64)> = None;
        for (a, r) in roots {
            let tau = 1.0 / (rho * r);
            let upper = q_sorted[t - 1] - tau > 0.0;
            let lower = t == nu || q_sorted[t] - tau <= 0.0;
            match (upper, lower) {
                (true, true) => {
                    let objective = a / r + 0.5 * rho * (s_total - r * r);
                    if best.is_none_or(|b| objective < b.2) {
                        best = Some((a, r, objective));
                    }
                }
                (false, _) => too_large += 1,
                (true, false) => too_small += 1,
            }
        }
        Ok(match best {
            Some((a, r, objective)) => Probe::Valid { a, r, objective },
            None if too_small == 0 => Probe::TooLarge,
            None if too_large == 0 => Probe::TooSmall,
            None => Probe::Ambiguous,
        })
    };

    if !exhaustive && nu > EXHAUSTIVE_SPARSITY_LIMIT {
        let (mut lo, mut hi) = (1usize, nu);
        while lo <= hi {
            let mid = lo + (hi - lo) / 2;
            match probe(mid)? {
                Probe::Valid { a, r, objective } => {
                    if mid > 1 {
                        if let Probe::Valid {
                            a: a1,
                            r: r1,
                            objective: f1,
                        } = probe(1)?
                        {
                            if f1 <= objective {
                                return Ok(Sparsity { t: 1, a: a1, r: r1 });
                            }
                        }
                    }
                    return Ok(Sparsity { t: mid, a, r });
                }
                Probe::TooLarge => {
                    if mid == 1 {
                        break;
                    }
                    hi = mid - 1;
                }
                Probe::TooSmall => lo = mid + 1,
                Probe::Ambiguous => break,
            }
        }
    }

    let mut best: Option<(Sparsity, f64)> = None;
    let mut rejected = Vec::new();
    for t in 1..=nu {
        match probe(t)? {
            Probe::Valid { a, r, objective } => {
                let better = match &best {
                    None => true,
                    Some((_, f)) => objective < *f - 1e-14 * f.abs().max(1.0),
                };
                if better {
                    best = Some((Sparsity { t, a, r }, objective));
                }
            }
            Probe::TooLarge => rejected.push(format!("t={t}:upper")),
            Probe::TooSmall => rejected.push(format!("t={t}:lower")),
            Probe::Ambiguous => rejected.push(format!("t={t}:none")),
        }
    }
    best.map(|(s, _)| s).ok_or_else(|| Error::NoSparsity {
        nu,
        rho,
        diagnostics: rejected.join(","),
    })
}

/// Exhaustive grid search of the nonnegative prox objective over `[0, box]ⁿ`
/// followed by a shrinking-step coordinate search from the best grid point.
/// Verification oracle only; limited to `n ≤ 3`.
pub fn brute_force_prox(query: &ProxQuery, grid_step: f64, box_size: f64) -> Result<DVector<f64>> {
    let n = query.q.len();
    if n > 3 {
        return Err(Error::TooLarge(format!(
            "brute-force prox supports n ≤ 3, got {n}"
        )));
    }
    if !(grid_step > 0.0 && grid_step <= 1e-2) {
        return Err(invalid("grid_step", "must lie in (0, 1e-2]"));
    }
    if !(box_size > 0.0 && box_size.is_finite()) {
        return Err(invalid("box", "must be positive"));
    }
    let q = &query.q;
    let rho = query.rho;
    let ticks = (box_size / grid_step).floor() as usize + 1;
    let total = ticks.pow(n as u32);

    let qs: Vec<f64> = q.iter().copied().collect();
    let grid_objective = |x: &[f64]| {
        let (mut l1, mut sq, mut dist) = (0.0, 0.0, 0.0);
        for (xi, qi) in x.iter().zip(&qs) {
            l1 += xi;
            sq += xi * xi;
            dist += (xi - qi) * (xi - qi);
        }
        let ratio = if sq == 0.0 { 1.0 } else { l1 / sq.sqrt() };
        ratio + 0.5 * rho * dist
    };
    let mut cur = vec![0.0; n];
    let mut best_code = 0;
    let mut best_f = f64::INFINITY;
    for code in 0..total {
        let mut c = code;
        for v in cur.iter_mut() {
            *v = (c % ticks) as f64 * grid_step;
            c /= ticks;
        }
        let f = grid_objective(&cur);
        if f < best_f {
            best_f = f;
            best_code = code;
        }
    }
    let mut best = DVector::zeros(n);
    let mut c = best_code;
    for i in 0..n {
        best[i] = (c % ticks) as f64 * grid_step;
        c /= ticks;
    }
    let mut best_f = prox_objective_nonneg(&best, q, rho);

    let mut step = grid_step;
    while step > 1e-13 {
        let mut improved = false;
        for i in 0..n {
            for dir in [1.0, -1.0] {
                let mut cand = best.clone();
                cand[i] = (cand[i] + dir * step).max(0.0);
                let f = prox_objective_nonneg(&cand, q, rho);
                if f < best_f {
                    best_f = f;
                    best = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(best)
}
