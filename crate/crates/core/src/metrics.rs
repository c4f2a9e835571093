//! Recovery quality and the success / model-failure / algorithm-failure split.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::problem::ProblemInstance;

/// Success threshold on the relative error.
pub const DEFAULT_SUCCESS_THRESHOLD: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OutcomeClass {
    Success,
    ModelFailure,
    AlgorithmFailure,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub class: OutcomeClass,
    pub rerr: f64,
    pub f_truth: f64,
    pub f_hat: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub success_rate: f64,
    pub model_failure_rate: f64,
    pub algorithm_failure_rate: f64,
    pub trials: usize,
}

/// `‖x̂ − x*‖₂ / ‖x*‖₂`.
pub fn relative_error(xhat: &DVector<f64>, xstar: &DVector<f64>) -> Result<f64> {
    check_len(xhat, xstar)?;
    let denom = xstar.norm();
    if denom == 0.0 {
        return Err(Error::ZeroVector("reference signal"));
    }
    Ok((xhat - xstar).norm() / denom)
}

/// `‖x̂ − x*‖₂`.
pub fn absolute_error(xhat: &DVector<f64>, xstar: &DVector<f64>) -> Result<f64> {
    check_len(xhat, xstar)?;
    Ok((xhat - xstar).norm())
}

/// Number of nonzero entries of `x̂ − x*`.
pub fn error_support_size(xhat: &DVector<f64>, xstar: &DVector<f64>) -> Result<usize> {
    check_len(xhat, xstar)?;
    Ok(xhat
        .iter()
        .zip(xstar.iter())
        .filter(|(a, b)| a != b)
        .count())
}

/// `F(x) = γ‖x‖₁/‖x‖₂ + ½‖Ax − b‖²`, with `F(x) = +∞` outside a nonnegative domain.
pub fn objective_f(problem: &ProblemInstance, x: &DVector<f64>) -> f64 {
    if !problem.in_domain(x) {
        return f64::INFINITY;
    }
    problem.objective(x)
}

/// Success when the relative error is below `threshold`; otherwise an algorithm failure
/// if the truth has strictly lower objective, and a model failure if not.
pub fn classify_outcome(
    problem: &ProblemInstance,
    xhat: &DVector<f64>,
    xstar: &DVector<f64>,
    threshold: f64,
) -> Result<Outcome> {
    let rerr = relative_error(xhat, xstar)?;
    let f_truth = objective_f(problem, xstar);
    let f_hat = objective_f(problem, xhat);
    let class = if rerr < threshold {
        OutcomeClass::Success
    } else if f_truth < f_hat {
        OutcomeClass::AlgorithmFailure
    } else {
        OutcomeClass::ModelFailure
    };
    Ok(Outcome {
        class,
        rerr,
        f_truth,
        f_hat,
    })
}

pub fn aggregate(outcomes: &[Outcome]) -> Result<Rates> {
    aggregate_classes(outcomes.iter().map(|o| o.class))
}

pub fn aggregate_classes(classes: impl IntoIterator<Item = OutcomeClass>) -> Result<Rates> {
    let mut counts = [0usize; 3];
    for c in classes {
        counts[match c {
            OutcomeClass::Success => 0,
            OutcomeClass::ModelFailure => 1,
            OutcomeClass::AlgorithmFailure => 2,
        }] += 1;
    }
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(invalid("outcomes", "cannot aggregate an empty set"));
    }
    let t = total as f64;
    Ok(Rates {
        success_rate: counts[0] as f64 / t,
        model_failure_rate: counts[1] as f64 / t,
        algorithm_failure_rate: counts[2] as f64 / t,
        trials: total,
    })
}

fn check_len(a: &DVector<f64>, b: &DVector<f64>) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}
