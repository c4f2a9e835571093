//! Merit function and first-order optimality measures.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::l1_over_l2;
use crate::problem::{Domain, ProblemInstance};

/// `T(x, y) = γ‖x‖₁/‖x‖₂ + ½‖Ax − b‖² + (β/2)‖x − y‖²`; `+∞` when `x` leaves the
/// nonnegative orthant of a `NonNegative` problem.
pub fn merit(x: &DVector<f64>, y: &DVector<f64>, problem: &ProblemInstance, beta: f64) -> f64 {
    if !problem.in_domain(x) {
        return f64::INFINITY;
    }
    problem.gamma() * l1_over_l2(x)
        + 0.5 * problem.residual(x).norm_squared()
        + 0.5 * beta * (x - y).norm_squared()
}

/// Gradient of `‖x‖₁/‖x‖₂` on the support: `sign(x_i)/‖x‖₂ − ‖x‖₁ x_i/‖x‖₂³`.
/// Off-support entries hold the one-sided value `1/‖x‖₂` used by the nonnegative
/// variational inequality.
pub fn ratio_gradient(x: &DVector<f64>) -> Result<DVector<f64>> {
    let r = x.norm();
    if r == 0.0 {
        return Err(Error::ZeroVector(
            "ratio gradient is undefined at the origin",
        ));
    }
    let a = x.lp_norm(1);
    let r3 = r * r * r;
    Ok(x.map(|v| {
        let s = if v == 0.0 { 1.0 } else { v.signum() };
        s / r - a * v / r3
    }))
}

/// KKT residual restricted to the support `Λ` of `x`:
/// `‖γ(sign(x_Λ)/‖x‖₂ − ‖x‖₁ x_Λ/‖x‖₂³) + A_Λᵀ(Ax − b)‖₂`.
pub fn kkt_residual(x: &DVector<f64>, problem: &ProblemInstance) -> Result<f64> {
    let g = full_gradient(x, problem)?;
    Ok(x.iter()
        .zip(g.iter())
        .filter(|(xi, _)| **xi != 0.0)
        .map(|(_, gi)| gi * gi)
        .sum::<f64>()
        .sqrt())
}

/// Violation of the d-stationarity variational inequality on the nonnegative orthant:
/// `max(‖g_Λ‖∞, max(0, −min_{i∉Λ} g_i))` with
/// `g = γ(1/‖x‖₂ − ‖x‖₁ x/‖x‖₂³) + Aᵀ(Ax − b)`. Zero exactly at d-stationary points.
pub fn stationarity_gap(x: &DVector<f64>, problem: &ProblemInstance) -> Result<f64> {
    if problem.domain() != Domain::NonNegative {
        return Err(Error::InvalidParameter {
            name: "domain",
            reason: "stationarity gap is defined for the nonnegative model".into(),
        });
    }
    let g = full_gradient(x, problem)?;
    let mut on_support: f64 = 0.0;
    let mut off_support: f64 = 0.0;
    for (xi, gi) in x.iter().zip(g.iter()) {
        if *xi != 0.0 {
            on_support = on_support.max(gi.abs());
        } else {
            off_support = off_support.max(-gi);
        }
    }
    Ok(on_support.max(off_support))
}

fn full_gradient(x: &DVector<f64>, problem: &ProblemInstance) -> Result<DVector<f64>> {
    if x.len() != problem.ncols() {
        return Err(Error::Dimension(format!(
            "x has {} entries, A has {} columns",
            x.len(),
            problem.ncols()
        )));
    }
    let mut g = ratio_gradient(x)?;
    g *= problem.gamma();
    g += problem.fidelity_gradient(x);
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn one_sparse_problem(gamma: f64) -> ProblemInstance {
        let a = DMatrix::identity(3, 3);
        let b = DVector::from_vec(vec![2.0, 0.0, 0.0]);
        ProblemInstance::new(a, b, gamma, Domain::NonNegative).unwrap()
    }

    #[test]
    fn merit_at_one_sparse_truth() {
        let p = ProblemInstance::new(
            DMatrix::identity(3, 3),
            DVector::from_vec(vec![2.0, 0.0, 0.0]),
            1.0,
            Domain::NonNegative,
        )
        .unwrap();
        let b = p.b().clone();
        assert!((merit(&b, &b, &p, 0.3) - 1.0).abs() < 1e-15);
        let neg = DVector::from_vec(vec![2.0, -0.1, 0.0]);
        assert_eq!(merit(&neg, &b, &p, 0.3), f64::INFINITY);
    }

    #[test]
    fn one_sparse_point_is_stationary() {
        let p = one_sparse_problem(1e-3);
        let x = p.b().clone();
        assert_eq!(kkt_residual(&x, &p).unwrap(), 0.0);
        assert_eq!(stationarity_gap(&x, &p).unwrap(), 0.0);
    }

    #[test]
    fn zero_point_is_rejected() {
        let p = one_sparse_problem(1e-3);
        assert!(kkt_residual(&DVector::zeros(3), &p).is_err());
        assert!(stationarity_gap(&DVector::zeros(3), &p).is_err());
    }

    #[test]
    fn perturbed_support_entry_opens_gap() {
        let p = one_sparse_problem(1e-3);
        let mut x = p.b().clone();
        x[0] += 1e-2;
        assert!(stationarity_gap(&x, &p).unwrap() >= 1e-3);
    }
}
