//! Mode drivers. Every mode builds its objects from the configuration,
//! executes, writes the selected reports and folds its verdicts into the
//! process exit code.

use std::path::PathBuf;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use muspar_core::diagnostics::energy_audit;
use muspar_core::fem::FemSpace;
use muspar_core::harness::{
    brute_force_oracle, case_by_name, spatial_refinement_study, temporal_order_study,
    ConvergenceReport, HarnessError,
};
use muspar_core::problem::{validate_b, validate_convection, validate_stress, ProblemSpec, Source};
use muspar_core::stepper::{run, solve_step, InitialState, StepError, TimeGrid};

use crate::config::{self, ConfigFile, Mode, Summary, Verdict};
use crate::reports;
use crate::sampling;
use crate::Cli;

#[derive(Debug)]
pub enum RunnerError {
    /// Configuration or validation problem (exit 2).
    Config(String),
    /// Filesystem problem (exit 2).
    Io(String),
    /// The nonlinear solver gave up (exit 3).
    NonConvergence(String),
}

impl RunnerError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunnerError::Config(_) | RunnerError::Io(_) => 2,
            RunnerError::NonConvergence(_) => 3,
        }
    }
}

impl std::fmt::Display for RunnerError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunnerError::Config(msg) => write!(f, "{msg}"),
            RunnerError::Io(msg) => write!(f, "{msg}"),
            RunnerError::NonConvergence(msg) => write!(f, "{msg}"),
        }
    }
}

fn map_step_error(e: StepError) -> RunnerError {
    match e {
        StepError::NonConvergence(_) => RunnerError::NonConvergence(e.to_string()),
        other => RunnerError::Config(other.to_string()),
    }
}

fn map_harness_error(e: HarnessError) -> RunnerError {
    match e {
        HarnessError::Step(StepError::NonConvergence(_)) => {
            RunnerError::NonConvergence(e.to_string())
        }
        other => RunnerError::Config(other.to_string()),
    }
}

struct Context<'a> {
    cli: &'a Cli,
    cfg: ConfigFile,
    out_dir: PathBuf,
    artifacts: Vec<String>,
}

impl Context<'_> {
    fn say(&self, line: &str) {
        if !self.cli.quiet {
            println!("{line}");
        }
    }

    fn emit(&mut self, name: &str, content: &str) -> Result<(), RunnerError> {
        if self.cfg.outputs.wants(name) {
            reports::write_text(&self.out_dir, name, content)?;
            self.artifacts.push(name.to_string());
        }
        Ok(())
    }

    fn emit_json<T: serde::Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunnerError> {
        if self.cfg.outputs.wants(name) {
            reports::write_json(&self.out_dir, name, value)?;
            self.artifacts.push(name.to_string());
        }
        Ok(())
    }

    fn finish(&mut self, mode: Mode, verdicts: Vec<Verdict>) -> Result<u8, RunnerError> {
        let all_pass = verdicts.iter().all(|v| v.passed);
        let code = u8::from(!all_pass);
        let summary = Summary {
            mode: mode.name(),
            exit_code: code,
            verdicts,
            artifacts: self.artifacts.clone(),
        };
        self.emit_json("summary.json", &summary)?;
        for v in &summary.verdicts {
            self.say(&format!(
                "{}: {} ({})",
                v.name,
                if v.passed { "PASS" } else { "FAIL" },
                v.detail
            ));
        }
        Ok(code)
    }
}

pub fn execute(cli: &Cli) -> Result<u8, RunnerError> {
    let cfg = config::load(&cli.config)?;
    let mode_name = cli
        .mode
        .clone()
        .or_else(|| cfg.mode.clone())
        .ok_or_else(|| {
            RunnerError::Config("no mode given (set \"mode\" in the config or pass --mode)".into())
        })?;
    let mode = Mode::parse(&mode_name)?;
    let out_dir = cli
        .out
        .clone()
        .or_else(|| cfg.outputs.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let mut ctx = Context {
        cli,
        cfg,
        out_dir,
        artifacts: Vec::new(),
    };
    match mode {
        Mode::Validate => run_validate(&mut ctx),
        Mode::Solve => run_solve(&mut ctx),
        Mode::Audit => run_audit(&mut ctx),
        Mode::TemporalStudy => run_temporal_study(&mut ctx),
        Mode::SpatialStudy => run_spatial_study(&mut ctx),
        Mode::OracleCheck => run_oracle_check(&mut ctx),
    }
}

fn build_space(cfg: &ConfigFile) -> Result<std::sync::Arc<FemSpace>, RunnerError> {
    let mesh = cfg.need_mesh()?;
    FemSpace::build(mesh.dim, mesh.m).map_err(|e| RunnerError::Config(e.to_string()))
}

fn build_grid(cfg: &ConfigFile) -> Result<TimeGrid, RunnerError> {
    let time = cfg.need_time()?;
    TimeGrid::new(time.t_final, time.steps).map_err(|e| RunnerError::Config(e.to_string()))
}

fn build_problem(cfg: &ConfigFile) -> Result<ProblemSpec, RunnerError> {
    config::build_problem(cfg.need_problem()?, cfg.need_mesh()?.dim)
}

fn run_validate(ctx: &mut Context<'_>) -> Result<u8, RunnerError> {
    let spec = build_problem(&ctx.cfg)?;
    let seed = ctx.cli.seed.unwrap_or(ctx.cfg.validation.seed);
    let samples = sampling::draw(&ctx.cfg.validation, ctx.cfg.need_mesh()?.dim, seed);
    let rb = validate_b(&spec, &samples.s);
    let rs = validate_stress(&spec, &samples.xi, &samples.x)
        .map_err(|e| RunnerError::Config(e.to_string()))?;
    let rk = validate_convection(&spec, &samples.s, &samples.x)
        .map_err(|e| RunnerError::Config(e.to_string()))?;

    #[derive(serde::Serialize)]
    struct ValidationReportOut {
        seed: u64,
        b_passed: bool,
        b_deriv_min: f64,
        b_deriv_max: f64,
        stress_passed: bool,
        stress_min_coercivity_slack: f64,
        convection_passed: bool,
        tightest_nu0: f64,
        tightest_nu1: f64,
        violations: Vec<String>,
    }
    let mut violations = Vec::new();
    violations.extend(rb.violations.iter().cloned());
    violations.extend(rs.violations.iter().cloned());
    violations.extend(rk.violations.iter().cloned());
    for v in &violations {
        ctx.say(&format!("violation: {v}"));
    }
    let report = ValidationReportOut {
        seed,
        b_passed: rb.passed,
        b_deriv_min: rb.deriv_min,
        b_deriv_max: rb.deriv_max,
        stress_passed: rs.passed,
        stress_min_coercivity_slack: rs.min_coercivity_slack,
        convection_passed: rk.passed,
        tightest_nu0: rk.tightest_nu0,
        tightest_nu1: rk.tightest_nu1,
        violations,
    };
    ctx.emit_json("validation.json", &report)?;
    let verdicts = vec![
        Verdict {
            name: "b-range".into(),
            passed: rb.passed,
            detail: format!("b' observed in [{}, {}]", rb.deriv_min, rb.deriv_max),
        },
        Verdict {
            name: "stress growth/monotonicity/coercivity".into(),
            passed: rs.passed,
            detail: format!(
                "min coercivity slack {} over {} samples",
                rs.min_coercivity_slack, rs.samples_checked
            ),
        },
        Verdict {
            name: "convection growth/Lipschitz".into(),
            passed: rk.passed,
            detail: format!(
                "tightest nu0 {} (configured {}), tightest nu1 {} (configured {})",
                rk.tightest_nu0, spec.constants.nu0, rk.tightest_nu1, spec.constants.nu1
            ),
        },
    ];
    ctx.finish(Mode::Validate, verdicts)
}

fn solve_trajectory(
    ctx: &Context<'_>,
    spec: &ProblemSpec,
) -> Result<muspar_core::stepper::DiscreteTrajectory, RunnerError> {
    let space = build_space(&ctx.cfg)?;
    let grid = build_grid(&ctx.cfg)?;
    run(
        spec,
        &space,
        &grid,
        InitialState::FromInitialData,
        &ctx.cfg.solver.to_opts(),
    )
    .map_err(map_step_error)
}

fn run_solve(ctx: &mut Context<'_>) -> Result<u8, RunnerError> {
    let spec = build_problem(&ctx.cfg)?;
    let traj = solve_trajectory(ctx, &spec)?;
    let space = traj.space().clone();
    ctx.emit("mesh.txt", &reports::mesh_text(space.mesh()))?;
    ctx.emit("final_state.csv", &reports::field_csv(&space, traj.final_state()))?;
    ctx.emit("trajectory.csv", &reports::trajectory_csv(&traj))?;
    let iters: usize = traj.reports().iter().map(|r| r.iterations).sum();
    let worst_residual = traj
        .reports()
        .iter()
        .filter_map(|r| r.residual_norms.last().copied())
        .fold(0.0f64, f64::max);
    let verdicts = vec![Verdict {
        name: "solve".into(),
        passed: true,
        detail: format!(
            "{} steps, {} Newton iterations total, final residuals <= {:e}",
            traj.grid().steps(),
            iters,
            worst_residual
        ),
    }];
    ctx.finish(Mode::Solve, verdicts)
}

fn run_audit(ctx: &mut Context<'_>) -> Result<u8, RunnerError> {
    let spec = build_problem(&ctx.cfg)?;
    let traj = solve_trajectory(ctx, &spec)?;
    let audit = energy_audit(&traj, &spec, ctx.cfg.audit.epsilon)
        .map_err(|e| RunnerError::Config(e.to_string()))?;
    ctx.emit("ledger.csv", &reports::ledger_csv(&audit))?;
    let verdicts = vec![
        Verdict {
            name: "energy-bound".into(),
            passed: audit.rows.iter().all(|r| r.pass),
            detail: format!(
                "margin {}, |f|(L1;L2) {}, bound {}",
                audit.margin,
                audit.f_l1_l2,
                audit.rows.first().map(|r| r.rhs).unwrap_or(0.0)
            ),
        },
        Verdict {
            name: "increment-sum".into(),
            passed: audit.increment_chain_holds,
            detail: format!("sum of L2 increments {}", audit.c4),
        },
    ];
    ctx.finish(Mode::Audit, verdicts)
}

fn study_config<'a>(ctx: &'a Context<'_>) -> Result<&'a config::StudyConfig, RunnerError> {
    ctx.cfg
        .study
        .as_ref()
        .ok_or_else(|| RunnerError::Config("this mode needs a \"study\" block".into()))
}

fn named_case(name: &str) -> Result<muspar_core::harness::ManufacturedCase, RunnerError> {
    case_by_name(name).ok_or_else(|| {
        RunnerError::Config(format!(
            "unknown manufactured case '{name}' \
             (known: heat-exp-sine-1d, heat-exp-sine-2d, stationary-parabola, zero)"
        ))
    })
}

fn emit_study(ctx: &mut Context<'_>, report: &ConvergenceReport) -> Result<(), RunnerError> {
    ctx.emit("study.csv", &reports::study_csv(report))?;
    #[derive(serde::Serialize)]
    struct StudyOut {
        case: &'static str,
        fitted_order: Option<f64>,
        degenerate: bool,
        levels: usize,
    }
    ctx.emit_json(
        "study.json",
        &StudyOut {
            case: report.case_name,
            fitted_order: report.fitted_order,
            degenerate: report.degenerate,
            levels: report.rows.len(),
        },
    )
}

fn run_temporal_study(ctx: &mut Context<'_>) -> Result<u8, RunnerError> {
    let study = study_config(ctx)?;
    let case = named_case(&study.case)?;
    let m = study.m.ok_or_else(|| {
        RunnerError::Config("temporal-study needs \"m\" in the study block".into())
    })?;
    let n_list = study.n_list.clone();
    if n_list.is_empty() {
        return Err(RunnerError::Config(
            "temporal-study needs a non-empty \"n_list\"".into(),
        ));
    }
    let report = temporal_order_study(&case, m, &n_list, &ctx.cfg.solver.to_opts())
        .map_err(map_harness_error)?;
    emit_study(ctx, &report)?;
    let monotone = report.rows.windows(2).all(|w| w[1].err_l1 < w[0].err_l1);
    let verdict = if report.degenerate {
        Verdict {
            name: "temporal-order".into(),
            passed: true,
            detail: "degenerate case: no temporal error signal, fit skipped".into(),
        }
    } else {
        let order = report.fitted_order.unwrap_or(0.0);
        Verdict {
            name: "temporal-order".into(),
            passed: order >= 0.9 && monotone,
            detail: format!("fitted order {order}, errors monotone: {monotone}"),
        }
    };
    ctx.finish(Mode::TemporalStudy, vec![verdict])
}

fn run_spatial_study(ctx: &mut Context<'_>) -> Result<u8, RunnerError> {
    let study = study_config(ctx)?;
    let case = named_case(&study.case)?;
    let n_fixed = study.n_fixed.ok_or_else(|| {
        RunnerError::Config("spatial-study needs \"n_fixed\" in the study block".into())
    })?;
    let m_list = study.m_list.clone();
    let report = spatial_refinement_study(&case, n_fixed, &m_list, &ctx.cfg.solver.to_opts())
        .map_err(map_harness_error)?;
    emit_study(ctx, &report)?;
    let verdict = Verdict {
        name: "spatial-order".into(),
        passed: true,
        detail: match report.fitted_order {
            Some(o) => format!("observed order {o} (exploratory, not contracted)"),
            None => "degenerate case: no spatial error signal".into(),
        },
    };
    ctx.finish(Mode::SpatialStudy, vec![verdict])
}

fn run_oracle_check(ctx: &mut Context<'_>) -> Result<u8, RunnerError> {
    let spec = build_problem(&ctx.cfg)?;
    let instances = ctx.cfg.oracle.instances;
    let resolution = ctx.cfg.oracle.resolution;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.oracle.seed);
    let mut rows = String::from("instance,unknowns,tau,deviation\n");
    let mut worst = 0.0f64;
    let opts = muspar_core::stepper::SolverOpts {
        tol: 1e-12,
        ..ctx.cfg.solver.to_opts()
    };
    for k in 0..instances {
        let m = 2 + k % 3;
        let space =
            FemSpace::build(1, m).map_err(|e| RunnerError::Config(e.to_string()))?;
        let coeffs: Vec<f64> = (0..space.n_dofs())
            .map(|_| rng.random_range(-1.5..1.5))
            .collect();
        let u_prev = space
            .function_from_coeffs(coeffs)
            .map_err(|e| RunnerError::Config(e.to_string()))?;
        let tau = rng.random_range(0.02..0.3);
        let f_val = rng.random_range(-1.0..1.0);
        let instance = spec.clone().with_source(Source::Constant { value: f_val });
        let oracle = brute_force_oracle(&instance, &space, &u_prev, tau, tau, resolution)
            .map_err(map_harness_error)?;
        let (newton, _) =
            solve_step(&instance, &u_prev, tau, tau, &opts).map_err(map_step_error)?;
        let dev = oracle
            .coeffs()
            .iter()
            .zip(newton.coeffs())
            .fold(0.0f64, |mx, (a, b)| mx.max((a - b).abs()));
        worst = worst.max(dev);
        use std::fmt::Write as _;
        let _ = writeln!(rows, "{},{},{},{}", k, space.n_dofs(), tau, dev);
    }
    ctx.emit("oracle.csv", &rows)?;
    let verdicts = vec![Verdict {
        name: "oracle-equivalence".into(),
        passed: worst <= 1e-8,
        detail: format!("max deviation {worst:e} over {instances} instances"),
    }];
    ctx.finish(Mode::OracleCheck, verdicts)
}
