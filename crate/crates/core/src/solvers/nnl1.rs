use crate::error::Result;
use crate::problem::ProblemInstance;

use super::{run_splitting, SolveReport, SolverConfig, SolverKind};

/// ADMM for `min γ‖x‖₁ + ½‖Ax − b‖²` over `x ≥ 0`, on the same splitting as
/// [`admm_plus`](super::admm_plus). The `x`-step is the shifted clamp
/// `max(v − γ/β, 0)`.
pub fn nnl1_admm(problem: &ProblemInstance, config: &SolverConfig) -> Result<SolveReport> {
    let shift = problem.gamma() / config.beta;
    run_splitting(SolverKind::Nnl1Admm, problem, config, |target| {
        Ok(target.map(|v| (v - shift).max(0.0)))
    })
}
