use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use l1l2::certificates::{
    exact_recovery_check, gamma_bound_report, is_locally_sparse, ssp_report, support_independence,
    SvTol,
};
use l1l2::generators::{add_noise, gen_matrix, gen_truth, GeneratorSpec};
use l1l2::harness::{
    run_bench, run_doas, run_solver, write_trials_csv, BenchPlan, DoasPlan, InitChoice,
    RunSettings, SolverChoice, StepSize,
};
use l1l2::io::{read_matrix_csv, read_vector_csv, write_matrix_csv, write_vector_csv};
use l1l2::metrics::{classify_outcome, DEFAULT_SUCCESS_THRESHOLD};
use l1l2::prox::{prox_ratio, prox_ratio_nonneg, ProxQuery};
use l1l2::rng::{derive_seed, PRNG_ID};
use l1l2::solvers::default_tol;
use l1l2::{Domain, ProblemInstance};
use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};

use crate::{
    BenchArgs, CertifyArgs, Check, Command, DoasArgs, DomainArg, GenArgs, Kind, MatrixArgs,
    ProxArgs, SolveArgs,
};

pub use l1l2::harness::{DOAS_DEFAULT_BETA as DOAS_BETA, DOAS_DEFAULT_GAMMA as DOAS_GAMMA};

/// How a successful command finished.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Done,
    IterationCap,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Done => 0,
            Status::IterationCap => 2,
        }
    }
}

pub fn run(command: Command) -> Result<Status> {
    match command {
        Command::Gen(args) => gen(&args),
        Command::Solve(args) => solve(&args),
        Command::Bench(args) => bench(&args),
        Command::Doas(args) => doas(&args),
        Command::Prox(args) => prox(&args),
        Command::Certify(args) => certify(&args),
    }
}

fn emit(value: &Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")
            .with_context(|| format!("writing {}", path.display()))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}")?;
        }
    }
    Ok(())
}

fn matrix_spec(args: &MatrixArgs, seed: u64) -> GeneratorSpec {
    match args.kind {
        Kind::Dct => GeneratorSpec::dct(args.m, args.n, args.f, seed),
        Kind::Gauss => GeneratorSpec::gaussian(args.m, args.n, args.corr, seed),
    }
}

fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    read_matrix_csv(path).with_context(|| format!("reading matrix {}", path.display()))
}

fn read_vector(path: &Path) -> Result<DVector<f64>> {
    read_vector_csv(path).with_context(|| format!("reading vector {}", path.display()))
}

fn need<'a>(path: &'a Option<PathBuf>, flag: &str, check: &str) -> Result<&'a Path> {
    match path {
        Some(p) => Ok(p),
        None => bail!("--check {check} needs --{flag}"),
    }
}

fn gen(args: &GenArgs) -> Result<Status> {
    let spec = matrix_spec(&args.matrix, args.seed);
    let truth_seed = derive_seed(args.seed, 1);
    let noise_seed = derive_seed(args.seed, 2);
    let a = gen_matrix(&spec)?;
    let x = gen_truth(spec.n, args.s, truth_seed)?;
    let b = add_noise(&(&a * &x), args.sigma, noise_seed)?;

    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    write_matrix_csv(&args.out_dir.join("A.csv"), &a)?;
    write_vector_csv(&args.out_dir.join("x.csv"), &x)?;
    write_vector_csv(&args.out_dir.join("b.csv"), &b)?;
    let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    let meta = json!({
        "spec": spec,
        "s": args.s,
        "sigma": args.sigma,
        "seeds": { "matrix": spec.seed, "truth": truth_seed, "noise": noise_seed },
        "prng": PRNG_ID,
        "column_norms": norms,
        "files": { "matrix": "A.csv", "truth": "x.csv", "observation": "b.csv" },
    });
    emit(&meta, Some(&args.out_dir.join("meta.json")))?;
    eprintln!("wrote {}", args.out_dir.display());
    Ok(Status::Done)
}

fn settings(args: &crate::SolverArgs, tol: f64, seed: u64) -> Result<RunSettings> {
    let step = match args.alpha.as_str() {
        "auto" => StepSize::Auto,
        s => StepSize::Fixed(
            s.parse()
                .with_context(|| format!("--alpha expects a number or auto, got {s:?}"))?,
        ),
    };
    Ok(RunSettings {
        solver: args.solver.parse()?,
        init: args.init.parse()?,
        beta: args.beta,
        tol,
        kmax_multiplier: args.kmax_mult,
        step,
        seed,
    })
}

fn solve(args: &SolveArgs) -> Result<Status> {
    let a = read_matrix(&args.a)?;
    let b = read_vector(&args.b)?;
    let problem = ProblemInstance::new(a, b, args.gamma, Domain::NonNegative)?;
    let tol = args.solver.tol.unwrap_or_else(|| default_tol(args.sigma));
    let settings = settings(&args.solver, tol, args.seed)?;
    let out = run_solver(&problem, &settings)?;
    let mut report = out.to_json();
    report["gamma"] = json!(args.gamma);
    if let Some(path) = &args.truth {
        let truth = read_vector(path)?;
        let outcome = classify_outcome(
            &problem,
            &out.report.x_final,
            &truth,
            DEFAULT_SUCCESS_THRESHOLD,
        )?;
        report["outcome"] = serde_json::to_value(outcome)?;
    }
    emit(&report, args.out.as_deref())?;
    let r = &out.report;
    eprintln!(
        "{}: {} iterations, converged = {}, {:.3} s",
        settings.solver.name(),
        r.iterations,
        r.converged,
        r.wall_time
    );
    Ok(if r.converged {
        Status::Done
    } else {
        Status::IterationCap
    })
}

fn solver_list(names: &[String]) -> Result<Vec<SolverChoice>> {
    Ok(names
        .iter()
        .map(|s| s.trim().parse())
        .collect::<l1l2::Result<_>>()?)
}

fn bench(args: &BenchArgs) -> Result<Status> {
    let gamma = args
        .gamma
        .unwrap_or(if args.sigma == 0.0 { 1e-6 } else { 1e-3 });
    let init: InitChoice = args.init.parse()?;
    let plan = BenchPlan {
        generator: matrix_spec(&args.matrix, 0),
        sparsities: args.sparsities.clone(),
        trials: args.trials,
        solvers: solver_list(&args.solvers)?,
        gamma,
        beta: args.beta,
        tol: args.tol,
        sigma: args.sigma,
        kmax_multiplier: args.kmax_mult,
        init,
        seed_base: args.seed_base,
    };
    let result = run_bench(&plan)?;
    write_trials_csv(&args.out_csv, &result.rows)?;
    for row in result.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "trial s={} #{} {}: {}",
            row.s,
            row.trial,
            row.solver.name(),
            row.error.as_deref().unwrap_or_default()
        );
    }
    let summary = json!({
        "plan": plan,
        "prng": PRNG_ID,
        "trials_csv": args.out_csv,
        "summaries": result.summaries,
    });
    emit(&summary, args.out_json.as_deref())?;
    Ok(Status::Done)
}

fn doas(args: &DoasArgs) -> Result<Status> {
    let plan = DoasPlan {
        spec: l1l2::generators::DoasSpec {
            gases: args.gases,
            samples: args.samples,
            k: args.k,
            l: args.l,
            noise_std: args.std,
            seed: args.seed,
        },
        solvers: solver_list(&args.solvers)?,
        gamma: args.gamma,
        beta: args.beta,
        tol: args.tol,
        kmax_multiplier: args.kmax_mult,
        init: args.init.parse()?,
    };
    let report = run_doas(&plan)?;
    emit(&serde_json::to_value(&report)?, args.out.as_deref())?;
    for row in &report.rows {
        eprintln!(
            "{}: err {:.3e}, error nonzeros {}, {} iterations, {:.2} s",
            row.solver.name(),
            row.err,
            row.error_nonzeros,
            row.iterations,
            row.time_s
        );
    }
    Ok(if report.rows.iter().all(|r| r.converged) {
        Status::Done
    } else {
        Status::IterationCap
    })
}

fn prox(args: &ProxArgs) -> Result<Status> {
    let q = match &args.q_file {
        Some(path) => read_vector(path)?,
        None => DVector::from_column_slice(&args.q),
    };
    let query = ProxQuery::new(q, args.rho)?;
    let sol = if args.free {
        prox_ratio(&query)?
    } else {
        prox_ratio_nonneg(&query)?
    };
    emit(&sol.to_json(), args.out.as_deref())?;
    Ok(Status::Done)
}

fn certify(args: &CertifyArgs) -> Result<Status> {
    let sv_tol = args.sv_tol.map_or(SvTol::default(), SvTol::Absolute);
    let domain = match args.domain {
        DomainArg::Nonneg => Domain::NonNegative,
        DomainArg::Free => Domain::Free,
    };
    let report = match args.check {
        Check::Support => {
            let a = read_matrix(need(&args.a, "a", "support")?)?;
            let x = read_vector(need(&args.x, "x", "support")?)?;
            support_independence(&a, &x, sv_tol)?
        }
        Check::Localsparse => {
            let a = read_matrix(need(&args.a, "a", "localsparse")?)?;
            let b = read_vector(need(&args.b, "b", "localsparse")?)?;
            let x = read_vector(need(&args.x, "x", "localsparse")?)?;
            is_locally_sparse(&a, &b, &x, domain, sv_tol)?
        }
        Check::Recovery => {
            let a = read_matrix(need(&args.a, "a", "recovery")?)?;
            let b = read_vector(need(&args.b, "b", "recovery")?)?;
            let x = read_vector(need(&args.x, "x", "recovery")?)?;
            exact_recovery_check(&a, &b, &x, domain)?
        }
        Check::Ssp => {
            let a = read_matrix(need(&args.a, "a", "ssp")?)?;
            ssp_report(&a, args.samples, args.seed)?
        }
        Check::Gammabound => {
            let b = read_vector(need(&args.b, "b", "gammabound")?)?;
            let n = match (args.n, &args.a) {
                (Some(n), _) => n,
                (None, Some(path)) => read_matrix(path)?.ncols(),
                (None, None) => bail!("--check gammabound needs --n or --a"),
            };
            gamma_bound_report(&b, n, args.eps)?
        }
    };
    emit(&serde_json::to_value(&report)?, args.out.as_deref())?;
    eprintln!("{}: {:?}", report.name, report.verdict);
    Ok(Status::Done)
}
