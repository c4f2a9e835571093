use crate::error::Result;
use crate::problem::ProblemInstance;
use crate::prox::{prox_ratio_nonneg, ProxQuery};

use super::{run_splitting, SolveReport, SolverConfig, SolverKind};

/// ADMM for `min γ‖x‖₁/‖x‖₂ + ½‖Ay − b‖²` s.t. `x = y`, `x ≥ 0`.
///
/// Each sweep takes `x ← prox⁺(y − z/β)` with `ρ = β/γ`, then the closed-form
/// `y`-update through the cached Woodbury matrix, then `z ← z + β(x − y)`.
/// The iteration starts from `y⁰ = z⁰` drawn according to `config.init`.
pub fn admm_plus(problem: &ProblemInstance, config: &SolverConfig) -> Result<SolveReport> {
    let rho = config.beta / problem.gamma();
    run_splitting(SolverKind::AdmmPlus, problem, config, |target| {
        let query = ProxQuery::new(target.clone(), rho)?;
        Ok(prox_ratio_nonneg(&query)?.x)
    })
}
