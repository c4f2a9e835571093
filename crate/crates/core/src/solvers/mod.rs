//! Solvers for the nonnegative L1/L2 model and its baselines.
//!
//! * [`admm_plus`]: ADMM on the splitting `x = y`, ratio on `x`, fidelity on `y`.
//! * [`forward_backward`]: proximal gradient with a fixed step.
//! * [`nnl1_admm`]: the same splitting with `γ‖x‖₁` in place of the ratio.

mod admm;
mod diagnostics;
mod forward_backward;
mod nnl1;
mod stopping;
mod woodbury;

pub use admm::admm_plus;
pub use diagnostics::{kkt_residual, merit, ratio_gradient, stationarity_gap};
pub use forward_backward::forward_backward;
pub use nnl1::nnl1_admm;
pub use stopping::{check_stopping, default_tol, rel_chg, REL_CHG_FLOOR};
pub use woodbury::{precompute_woodbury, y_update, WoodburyFactor};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{invalid, Result};
use crate::problem::{Domain, ProblemInstance};
use crate::rng::Prng;

/// Initial point for the iterations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Init {
    /// i.i.d. uniform on `[0, 1)`.
    UniformRandom,
    /// `|N(0, 1)|` entries.
    AbsGaussian,
    Provided(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// ADMM penalty.
    pub beta: f64,
    pub tol: f64,
    /// The iteration cap is `kmax_multiplier · n`.
    pub kmax_multiplier: usize,
    /// Forward-backward step size; must lie in `(0, 1/L)`.
    pub alpha: Option<f64>,
    pub init: Init,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            beta: 0.025,
            tol: 1e-6,
            kmax_multiplier: 5,
            alpha: None,
            init: Init::UniformRandom,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn k_max(&self, n: usize) -> usize {
        self.kmax_multiplier * n
    }

    fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(invalid(
                "beta",
                format!("must be positive, got {}", self.beta),
            ));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(invalid(
                "tol",
                format!("must be positive, got {}", self.tol),
            ));
        }
        if self.kmax_multiplier == 0 {
            return Err(invalid("kmax_multiplier", "must be at least 1"));
        }
        Ok(())
    }

    /// Draws the starting vector of length `n`.
    pub fn initial_point(&self, n: usize) -> Result<DVector<f64>> {
        let mut rng = Prng::seed_from_u64(self.seed);
        Ok(match &self.init {
            Init::UniformRandom => DVector::from_fn(n, |_, _| rng.random::<f64>()),
            Init::AbsGaussian => {
                DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal).abs())
            }
            Init::Provided(v) => {
                if v.len() != n {
                    return Err(invalid(
                        "init",
                        format!("provided start has {} entries, expected {n}", v.len()),
                    ));
                }
                DVector::from_column_slice(v)
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverKind {
    AdmmPlus,
    ForwardBackward,
    Nnl1Admm,
}

/// Non-fatal conditions recorded alongside a solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SolverWarning {
    /// `β ≤ 2L`: the merit-descent guarantee does not apply.
    BetaBelowDescentThreshold { beta: f64, two_l: f64 },
    /// `Aᵀb ≤ 0` componentwise; the origin may attract the iterates.
    NonPositiveCorrelation,
    /// The final iterate is the zero vector.
    Degenerate,
}

/// Per-iteration records, stored column-wise.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub k: Vec<usize>,
    pub objective: Vec<f64>,
    pub merit: Vec<f64>,
    pub rel_chg: Vec<f64>,
    pub primal_residual: Vec<f64>,
    pub dual_change: Vec<f64>,
}

impl History {
    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    fn push(&mut self, k: usize, objective: f64, merit: f64, rel: f64, primal: f64, dual: f64) {
        self.k.push(k);
        self.objective.push(objective);
        self.merit.push(merit);
        self.rel_chg.push(rel);
        self.primal_residual.push(primal);
        self.dual_change.push(dual);
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub solver: SolverKind,
    pub x_final: DVector<f64>,
    /// Splitting variables at termination (ADMM-type solvers only).
    pub y_final: Option<DVector<f64>>,
    pub z_final: Option<DVector<f64>>,
    pub iterations: usize,
    pub history: History,
    /// `None` when the final iterate is zero.
    pub kkt_residual: Option<f64>,
    pub stationarity_gap: Option<f64>,
    pub wall_time: f64,
    pub config_echo: SolverConfig,
    pub converged: bool,
    /// `λ_max(AᵀA)`.
    pub lipschitz: f64,
    pub warnings: Vec<SolverWarning>,
}

impl SolveReport {
    /// JSON form with the history as per-key arrays.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "solver": self.solver,
            "x_final": self.x_final.as_slice(),
            "iterations": self.iterations,
            "converged": self.converged,
            "kkt_residual": self.kkt_residual,
            "stationarity_gap": self.stationarity_gap,
            "wall_time_s": self.wall_time,
            "lipschitz": self.lipschitz,
            "warnings": self.warnings,
            "config": self.config_echo,
            "history": self.history,
        })
    }
}

fn finish_report(
    solver: SolverKind,
    problem: &ProblemInstance,
    config: &SolverConfig,
    state: FinalState,
    started: std::time::Instant,
    lipschitz: f64,
    mut warnings: Vec<SolverWarning>,
) -> SolveReport {
    let x = state.x;
    let nonzero = !is_zero(&x);
    if !nonzero {
        warnings.push(SolverWarning::Degenerate);
    }
    let kkt = if nonzero {
        kkt_residual(&x, problem).ok()
    } else {
        None
    };
    let gap = if nonzero && problem.domain() == Domain::NonNegative {
        stationarity_gap(&x, problem).ok()
    } else {
        None
    };
    SolveReport {
        solver,
        x_final: x,
        y_final: state.y,
        z_final: state.z,
        iterations: state.history.len(),
        history: state.history,
        kkt_residual: kkt,
        stationarity_gap: gap,
        wall_time: started.elapsed().as_secs_f64(),
        config_echo: config.clone(),
        converged: state.converged,
        lipschitz,
        warnings,
    }
}

struct FinalState {
    x: DVector<f64>,
    y: Option<DVector<f64>>,
    z: Option<DVector<f64>>,
    history: History,
    converged: bool,
}

fn is_zero(x: &DVector<f64>) -> bool {
    x.iter().all(|v| *v == 0.0)
}

fn correlation_warning(problem: &ProblemInstance) -> Option<SolverWarning> {
    (problem.domain() == Domain::NonNegative && problem.atb().iter().all(|v| *v <= 0.0))
        .then_some(SolverWarning::NonPositiveCorrelation)
}

/// Shared loop of the two ADMM solvers; `x_step` solves the `x`-subproblem for the
/// point `y − z/β`.
fn run_splitting<F>(
    solver: SolverKind,
    problem: &ProblemInstance,
    config: &SolverConfig,
    mut x_step: F,
) -> Result<SolveReport>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    config.validate()?;
    if problem.domain() != Domain::NonNegative {
        return Err(invalid(
            "domain",
            "the splitting solvers target the nonnegative model",
        ));
    }
    let started = std::time::Instant::now();
    let n = problem.ncols();
    let beta = config.beta;
    let lipschitz = crate::linalg::largest_eigenvalue_ata(problem.a(), 1e-8);
    let mut warnings = Vec::new();
    if beta <= 2.0 * lipschitz {
        warnings.push(SolverWarning::BetaBelowDescentThreshold {
            beta,
            two_l: 2.0 * lipschitz,
        });
    }
    warnings.extend(correlation_warning(problem));

    let factor = precompute_woodbury(problem.a(), beta)?;
    let atb = problem.atb();
    let k_max = config.k_max(n);

    let mut y = config.initial_point(n)?;
    let mut z = y.clone();
    let mut x_prev = y.clone();
    let mut history = History::default();
    let mut x = x_prev.clone();

    let mut converged = false;
    for k in 1..=k_max {
        let target = &y - &z / beta;
        x = x_step(&target)?;
        let y_next = factor.apply(&atb, &z, &x);
        let z_next = &z + (&x - &y_next) * beta;
        let rel = rel_chg(&x_prev, &x);
        let primal = (&x - &y_next).norm();
        let objective = problem.objective(&x);
        let merit_value = if problem.in_domain(&x) {
            objective + 0.5 * beta * primal * primal
        } else {
            f64::INFINITY
        };
        history.push(
            k,
            objective,
            merit_value,
            rel,
            primal,
            (&z_next - &z).norm(),
        );
        y = y_next;
        z = z_next;
        // RelChg vanishes trivially while x sits at the origin; there the splitting
        // gap has to close as well
        let at_origin = is_zero(&x) && is_zero(&x_prev);
        converged = if at_origin {
            primal / REL_CHG_FLOOR < config.tol
        } else {
            check_stopping(&x_prev, &x, config.tol, k, usize::MAX)
        };
        if converged || k >= k_max {
            break;
        }
        x_prev.copy_from(&x);
    }

    let state = FinalState {
        x,
        y: Some(y),
        z: Some(z),
        history,
        converged,
    };
    Ok(finish_report(
        solver, problem, config, state, started, lipschitz, warnings,
    ))
}
