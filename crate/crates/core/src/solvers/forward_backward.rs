use nalgebra::DVector;

use crate::error::{invalid, Result};
use crate::linalg::largest_eigenvalue_ata;
use crate::problem::{Domain, ProblemInstance};
use crate::prox::{prox_ratio, prox_ratio_nonneg, ProxQuery};

use super::{
    check_stopping, correlation_warning, finish_report, rel_chg, FinalState, History, SolveReport,
    SolverConfig, SolverKind,
};

/// Proximal gradient `x ← prox_{αγ·ratio}(x − α Aᵀ(Ax − b))` with a fixed step
/// `α ∈ (0, 1/L)`. Works on both domains.
pub fn forward_backward(problem: &ProblemInstance, config: &SolverConfig) -> Result<SolveReport> {
    config.validate()?;
    let started = std::time::Instant::now();
    let lipschitz = largest_eigenvalue_ata(problem.a(), 1e-8);
    let alpha = config
        .alpha
        .ok_or_else(|| invalid("alpha", "forward-backward needs a step size"))?;
    if !(alpha > 0.0 && alpha * lipschitz < 1.0) {
        return Err(invalid(
            "alpha",
            format!("step {alpha} must lie in (0, 1/L) with L = {lipschitz}"),
        ));
    }
    let rho = 1.0 / (alpha * problem.gamma());
    let n = problem.ncols();
    let k_max = config.k_max(n);
    let warnings: Vec<_> = correlation_warning(problem).into_iter().collect();

    let mut x = config.initial_point(n)?;
    let mut x_prev = x.clone();
    let mut history = History::default();
    let mut converged = false;
    for k in 1..=k_max {
        let target = &x - problem.fidelity_gradient(&x) * alpha;
        x = prox_step(&target, rho, problem.domain())?;
        let rel = rel_chg(&x_prev, &x);
        let objective = problem.objective(&x);
        history.push(k, objective, objective, rel, 0.0, 0.0);
        converged = rel < config.tol;
        if check_stopping(&x_prev, &x, config.tol, k, k_max) {
            break;
        }
        x_prev.copy_from(&x);
    }
    let state = FinalState {
        x,
        y: None,
        z: None,
        history,
        converged,
    };
    Ok(finish_report(
        SolverKind::ForwardBackward,
        problem,
        config,
        state,
        started,
        lipschitz,
        warnings,
    ))
}

fn prox_step(target: &DVector<f64>, rho: f64, domain: Domain) -> Result<DVector<f64>> {
    match domain {
        Domain::NonNegative => Ok(prox_ratio_nonneg(&ProxQuery::new(target.clone(), rho)?)?.x),
        // the signed prox rejects an all-zero input; the origin maps to itself
        Domain::Free if target.iter().all(|v| *v == 0.0) => Ok(target.clone()),
        Domain::Free => Ok(prox_ratio(&ProxQuery::new(target.clone(), rho)?)?.x),
    }
}
