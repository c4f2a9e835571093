//! Reproducible experiment sweeps: success-rate benches over sparsity levels and the
//! synthetic DOAS comparison.

use std::path::Path;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::generators::{add_noise, gen_doas, gen_matrix, gen_truth, DoasSpec, GeneratorSpec};
use crate::linalg::{largest_eigenvalue_ata, support};
use crate::metrics::{
    absolute_error, aggregate_classes, classify_outcome, error_support_size, OutcomeClass, Rates,
    DEFAULT_SUCCESS_THRESHOLD,
};
use crate::problem::{Domain, ProblemInstance};
use crate::rng::{derive_seed, PRNG_ID};
use crate::solvers::{
    admm_plus, default_tol, forward_backward, nnl1_admm, Init, SolveReport, SolverConfig,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Admm,
    Fb,
    Nnl1,
}

impl SolverChoice {
    pub fn name(self) -> &'static str {
        match self {
            SolverChoice::Admm => "admm",
            SolverChoice::Fb => "fb",
            SolverChoice::Nnl1 => "nnl1",
        }
    }
}

impl std::str::FromStr for SolverChoice {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "admm" => Ok(SolverChoice::Admm),
            "fb" => Ok(SolverChoice::Fb),
            "nnl1" => Ok(SolverChoice::Nnl1),
            _ => Err(invalid(
                "solver",
                format!("expected admm, fb or nnl1, got {s:?}"),
            )),
        }
    }
}

/// Starting point selection; `L1` runs [`nnl1_admm`] first and starts from its output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitChoice {
    Rand,
    AbsRandn,
    L1,
}

impl std::str::FromStr for InitChoice {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rand" => Ok(InitChoice::Rand),
            "absrandn" => Ok(InitChoice::AbsRandn),
            "l1" => Ok(InitChoice::L1),
            _ => Err(invalid(
                "init",
                format!("expected rand, absrandn or l1, got {s:?}"),
            )),
        }
    }
}

/// Forward-backward step: a fixed value or `0.9/L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum StepSize {
    Auto,
    Fixed(f64),
}

pub const AUTO_STEP_FRACTION: f64 = 0.9;

/// Solver settings shared by the CLI and the sweeps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub solver: SolverChoice,
    pub init: InitChoice,
    pub beta: f64,
    pub tol: f64,
    pub kmax_multiplier: usize,
    pub step: StepSize,
    pub seed: u64,
}

impl Default for RunSettings {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            solver: SolverChoice::Admm,
            init: InitChoice::Rand,
            beta: d.beta,
            tol: d.tol,
            kmax_multiplier: d.kmax_multiplier,
            step: StepSize::Auto,
            seed: 0,
        }
    }
}

/// Outcome of [`run_solver`]: the final solve plus the `L1` warm start if one was used.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: SolveReport,
    pub warm_start: Option<SolveReport>,
}

impl RunOutput {
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = self.report.to_json();
        if let Some(w) = &self.warm_start {
            v["warm_start"] = serde_json::json!({
                "solver": w.solver,
                "iterations": w.iterations,
                "converged": w.converged,
                "wall_time_s": w.wall_time,
                "config": w.config_echo,
            });
        }
        v
    }
}

pub fn run_solver(problem: &ProblemInstance, settings: &RunSettings) -> Result<RunOutput> {
    let mut config = SolverConfig {
        beta: settings.beta,
        tol: settings.tol,
        kmax_multiplier: settings.kmax_multiplier,
        alpha: None,
        init: match settings.init {
            InitChoice::Rand | InitChoice::L1 => Init::UniformRandom,
            InitChoice::AbsRandn => Init::AbsGaussian,
        },
        seed: settings.seed,
    };
    let warm_start = if settings.init == InitChoice::L1 {
        let l1 = nnl1_admm(problem, &config)?;
        config.init = Init::Provided(l1.x_final.iter().copied().collect());
        Some(l1)
    } else {
        None
    };
    let report = match settings.solver {
        SolverChoice::Admm => admm_plus(problem, &config)?,
        SolverChoice::Nnl1 => nnl1_admm(problem, &config)?,
        SolverChoice::Fb => {
            config.alpha = Some(match settings.step {
                StepSize::Fixed(a) => a,
                StepSize::Auto => AUTO_STEP_FRACTION / largest_eigenvalue_ata(problem.a(), 1e-8),
            });
            forward_backward(problem, &config)?
        }
    };
    Ok(RunOutput { report, warm_start })
}

/// A sweep over sparsity levels with independent seeded trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchPlan {
    /// Matrix template; its seed is replaced per trial.
    pub generator: GeneratorSpec,
    pub sparsities: Vec<usize>,
    pub trials: usize,
    pub solvers: Vec<SolverChoice>,
    pub gamma: f64,
    pub beta: f64,
    /// `None` selects the noise-dependent default.
    pub tol: Option<f64>,
    pub sigma: f64,
    pub kmax_multiplier: usize,
    pub init: InitChoice,
    pub seed_base: u64,
}

impl BenchPlan {
    /// `seed_base ⊕ h(s, i)`.
    pub fn trial_seed(&self, s: usize, trial: usize) -> u64 {
        self.seed_base ^ derive_seed(s as u64, trial as u64)
    }

    fn validate(&self) -> Result<()> {
        if self.sparsities.is_empty() || self.trials == 0 || self.solvers.is_empty() {
            return Err(invalid("plan", "needs sparsities, trials ≥ 1 and a solver"));
        }
        if let Some(&s) = self
            .sparsities
            .iter()
            .find(|&&s| s == 0 || s > self.generator.n)
        {
            return Err(invalid(
                "sparsities",
                format!("{s} is outside 1..={}", self.generator.n),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub s: usize,
    pub solver: SolverChoice,
    pub rerr: f64,
    /// `Success`, `ModelFailure`, `AlgorithmFailure`, or `Error` when the trial aborted.
    pub class: String,
    pub f_truth: f64,
    pub f_hat: f64,
    pub kkt_r: f64,
    pub iters: usize,
    pub time_s: f64,
    #[serde(skip)]
    pub trial: usize,
    #[serde(skip)]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub s: usize,
    pub solver: SolverChoice,
    #[serde(flatten)]
    pub rates: Option<Rates>,
    pub errors: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub rows: Vec<TrialRow>,
    pub summaries: Vec<ScenarioSummary>,
}

fn class_name(c: OutcomeClass) -> &'static str {
    match c {
        OutcomeClass::Success => "Success",
        OutcomeClass::ModelFailure => "ModelFailure",
        OutcomeClass::AlgorithmFailure => "AlgorithmFailure",
    }
}

fn parse_class(name: &str) -> Option<OutcomeClass> {
    match name {
        "Success" => Some(OutcomeClass::Success),
        "ModelFailure" => Some(OutcomeClass::ModelFailure),
        "AlgorithmFailure" => Some(OutcomeClass::AlgorithmFailure),
        _ => None,
    }
}

fn run_trial(
    plan: &BenchPlan,
    s: usize,
    trial: usize,
    solver: SolverChoice,
) -> Result<(TrialRow, OutcomeClass)> {
    let seed = plan.trial_seed(s, trial);
    let spec = GeneratorSpec {
        seed,
        ..plan.generator
    };
    let a = gen_matrix(&spec)?;
    let truth = gen_truth(spec.n, s, derive_seed(seed, 1))?;
    let b = add_noise(&(&a * &truth), plan.sigma, derive_seed(seed, 2))?;
    let problem = ProblemInstance::new(a, b, plan.gamma, Domain::NonNegative)?;
    let settings = RunSettings {
        solver,
        init: plan.init,
        beta: plan.beta,
        tol: plan.tol.unwrap_or_else(|| default_tol(plan.sigma)),
        kmax_multiplier: plan.kmax_multiplier,
        step: StepSize::Auto,
        seed: derive_seed(seed, 3),
    };
    let out = run_solver(&problem, &settings)?;
    let outcome = classify_outcome(
        &problem,
        &out.report.x_final,
        &truth,
        DEFAULT_SUCCESS_THRESHOLD,
    )?;
    let time = out.report.wall_time + out.warm_start.as_ref().map_or(0.0, |w| w.wall_time);
    Ok((
        TrialRow {
            seed,
            m: spec.m,
            n: spec.n,
            s,
            solver,
            rerr: outcome.rerr,
            class: class_name(outcome.class).to_string(),
            f_truth: outcome.f_truth,
            f_hat: outcome.f_hat,
            kkt_r: out.report.kkt_residual.unwrap_or(f64::NAN),
            iters: out.report.iterations,
            time_s: time,
            trial,
            error: None,
        },
        outcome.class,
    ))
}

/// Runs every `(s, trial, solver)` cell, in parallel. Rows come back sorted by
/// sparsity, trial index and solver order; an aborted trial yields a row with class
/// `Error` and the sweep continues.
pub fn run_bench(plan: &BenchPlan) -> Result<BenchResult> {
    plan.validate()?;
    let mut cells = Vec::new();
    for &s in &plan.sparsities {
        for trial in 0..plan.trials {
            for (k, &solver) in plan.solvers.iter().enumerate() {
                cells.push((s, trial, k, solver));
            }
        }
    }
    let mut rows: Vec<(usize, usize, usize, TrialRow)> = cells
        .par_iter()
        .map(|&(s, trial, k, solver)| {
            let row = run_trial(plan, s, trial, solver)
                .map(|(row, _)| row)
                .unwrap_or_else(|e| TrialRow {
                    seed: plan.trial_seed(s, trial),
                    m: plan.generator.m,
                    n: plan.generator.n,
                    s,
                    solver,
                    rerr: f64::NAN,
                    class: "Error".to_string(),
                    f_truth: f64::NAN,
                    f_hat: f64::NAN,
                    kkt_r: f64::NAN,
                    iters: 0,
                    time_s: 0.0,
                    trial,
                    error: Some(e.to_string()),
                });
            (s, trial, k, row)
        })
        .collect();
    rows.sort_by_key(|(s, trial, k, _)| (*s, *trial, *k));
    let rows: Vec<TrialRow> = rows.into_iter().map(|(_, _, _, r)| r).collect();

    let mut summaries = Vec::new();
    for &s in &plan.sparsities {
        for &solver in &plan.solvers {
            let cell: Vec<&TrialRow> = rows
                .iter()
                .filter(|r| r.s == s && r.solver == solver)
                .collect();
            let classes: Vec<OutcomeClass> =
                cell.iter().filter_map(|r| parse_class(&r.class)).collect();
            summaries.push(ScenarioSummary {
                s,
                solver,
                rates: aggregate_classes(classes.iter().copied()).ok(),
                errors: cell.len() - classes.len(),
            });
        }
    }
    Ok(BenchResult { rows, summaries })
}

pub fn write_trials_csv(path: &Path, rows: &[TrialRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| invalid("output", format!("{}: {e}", path.display())))?;
    for r in rows {
        w.serialize(r)
            .map_err(|e| invalid("output", format!("{}: {e}", path.display())))?;
    }
    w.flush()?;
    Ok(())
}

pub const DOAS_DEFAULT_GAMMA: f64 = 1e-3;
pub const DOAS_DEFAULT_BETA: f64 = 0.25;

/// Settings of the DOAS comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoasPlan {
    pub spec: DoasSpec,
    pub solvers: Vec<SolverChoice>,
    pub gamma: f64,
    pub beta: f64,
    pub tol: Option<f64>,
    pub kmax_multiplier: usize,
    /// Start of the ratio solvers; the NNL1 row always starts from `Rand`.
    pub init: InitChoice,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoasRow {
    pub solver: SolverChoice,
    /// `‖x̂ − x*‖₂`.
    pub err: f64,
    /// Nonzero entries of `x̂ − x*`.
    pub error_nonzeros: usize,
    pub support: Vec<usize>,
    pub support_recovered: bool,
    pub iterations: usize,
    pub converged: bool,
    pub time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoasReport {
    pub spec: DoasSpec,
    pub prng: String,
    pub gamma: f64,
    pub beta: f64,
    pub truth_support: Vec<usize>,
    pub truth_values: Vec<f64>,
    pub rows: Vec<DoasRow>,
}

pub fn run_doas(plan: &DoasPlan) -> Result<DoasReport> {
    if plan.solvers.is_empty() {
        return Err(invalid("solvers", "at least one solver is required"));
    }
    let inst = gen_doas(&plan.spec)?;
    let problem = ProblemInstance::new(
        inst.dictionary.clone(),
        inst.observation.clone(),
        plan.gamma,
        Domain::NonNegative,
    )?;
    let truth_support = support(&inst.truth);
    let tol = plan.tol.unwrap_or_else(|| default_tol(plan.spec.noise_std));
    let rows = plan
        .solvers
        .par_iter()
        .map(|&solver| {
            let settings = RunSettings {
                solver,
                init: match solver {
                    SolverChoice::Nnl1 => InitChoice::Rand,
                    _ => plan.init,
                },
                beta: plan.beta,
                tol,
                kmax_multiplier: plan.kmax_multiplier,
                step: StepSize::Auto,
                seed: derive_seed(plan.spec.seed, 3),
            };
            let out = run_solver(&problem, &settings)?;
            doas_row(solver, &out.report, &inst.truth, &truth_support)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DoasReport {
        spec: plan.spec,
        prng: PRNG_ID.to_string(),
        gamma: plan.gamma,
        beta: plan.beta,
        truth_values: truth_support.iter().map(|&i| inst.truth[i]).collect(),
        truth_support,
        rows,
    })
}

fn doas_row(
    solver: SolverChoice,
    report: &SolveReport,
    truth: &DVector<f64>,
    truth_support: &[usize],
) -> Result<DoasRow> {
    let supp = support(&report.x_final);
    Ok(DoasRow {
        solver,
        err: absolute_error(&report.x_final, truth)?,
        error_nonzeros: error_support_size(&report.x_final, truth)?,
        support_recovered: supp == truth_support,
        support: supp,
        iterations: report.iterations,
        converged: report.converged,
        time_s: report.wall_time,
    })
}
