//! Backward Euler time stepping: per-step damped Newton with an optional
//! Picard (frozen-coefficient) fallback, and the outer time loop.
//!
//! Convergence is measured in the residual max-norm, which directly certifies
//! that the discrete equation holds to tolerance. Steps are solved in order
//! (the scheme is sequential in `n`); a single step may use element-parallel
//! assembly. Runs are bitwise reproducible for a fixed configuration.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::fem::{
    assemble_jacobian, assemble_picard_matrix, assemble_residual, FemError, FemFunction, FemSpace,
};
use crate::problem::ProblemSpec;
use crate::real;

/// Uniform time grid on `[0, T]` with `tau = T / N`; the scheme requires
/// `tau < 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    t_final: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, steps: usize) -> Result<TimeGrid, StepError> {
        let ok = t_final > 0.0 && t_final.is_finite() && steps >= 1;
        let grid = TimeGrid { t_final, steps };
        if !ok || grid.tau() >= 1.0 {
            return Err(StepError::InvalidGrid { t_final, steps });
        }
        Ok(grid)
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn tau(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    /// Node `t_n = n tau`.
    pub fn node(&self, n: usize) -> f64 {
        self.tau() * n as f64
    }
}

/// Options of the nonlinear per-step solver.
#[derive(Clone, Copy, Debug)]
pub struct SolverOpts {
    /// Residual max-norm tolerance.
    pub tol: f64,
    /// Iteration budget per method (Newton and, if enabled, Picard).
    pub max_iters: usize,
    /// Armijo backtracking with halving factors, at most 30 halvings.
    pub damping: bool,
    /// Retry with the frozen-coefficient matrix when Newton stagnates.
    pub fallback_picard: bool,
}

impl Default for SolverOpts {
    fn default() -> SolverOpts {
        SolverOpts {
            tol: 1e-10,
            max_iters: 100,
            damping: true,
            fallback_picard: true,
        }
    }
}

/// Per-step record: accepted iterations only, so the residual norms decrease
/// strictly.
#[derive(Clone, Debug)]
pub struct StepReport {
    pub iterations: usize,
    pub residual_norms: Vec<f64>,
    pub damping_factors: Vec<f64>,
    pub fallback_used: bool,
}

/// States `u^0 ... u^N` with the per-step solver reports.
#[derive(Clone, Debug)]
pub struct DiscreteTrajectory {
    grid: TimeGrid,
    states: Vec<FemFunction>,
    reports: Vec<StepReport>,
}

impl DiscreteTrajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn states(&self) -> &[FemFunction] {
        &self.states
    }

    pub fn state(&self, n: usize) -> &FemFunction {
        &self.states[n]
    }

    pub fn final_state(&self) -> &FemFunction {
        self.states.last().expect("trajectory holds u^0..u^N")
    }

    pub fn reports(&self) -> &[StepReport] {
        &self.reports
    }

    pub fn space(&self) -> &Arc<FemSpace> {
        self.states[0].space()
    }
}

#[derive(Debug)]
pub struct NonConvergence {
    /// Filled by the time loop with the failing step index.
    pub step: Option<usize>,
    pub last_iterate: FemFunction,
    pub last_residual: f64,
    pub report: StepReport,
}

#[derive(Debug)]
pub enum StepError {
    InvalidGrid { t_final: f64, steps: usize },
    NonConvergence(Box<NonConvergence>),
    Fem(FemError),
}

impl core::fmt::Display for StepError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            StepError::InvalidGrid { t_final, steps } => write!(
                f,
                "invalid time grid: T = {t_final}, N = {steps} (need T > 0, N >= 1, tau < 1)"
            ),
            StepError::NonConvergence(nc) => match nc.step {
                Some(n) => write!(
                    f,
                    "nonlinear solver did not converge at step {n} \
                     (residual {} after {} iterations)",
                    nc.last_residual, nc.report.iterations
                ),
                None => write!(
                    f,
                    "nonlinear solver did not converge (residual {} after {} iterations)",
                    nc.last_residual, nc.report.iterations
                ),
            },
            StepError::Fem(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for StepError {}

impl From<FemError> for StepError {
    fn from(e: FemError) -> StepError {
        StepError::Fem(e)
    }
}

fn linf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(real::abs(x)))
}

/// One backward Euler step starting the iteration at `u_prev`.
pub fn solve_step(
    spec: &ProblemSpec,
    u_prev: &FemFunction,
    tau: f64,
    t_n: f64,
    opts: &SolverOpts,
) -> Result<(FemFunction, StepReport), StepError> {
    solve_step_from(spec, u_prev, u_prev.clone(), tau, t_n, opts)
}

/// One backward Euler step with an explicit initial iterate (used by the
/// uniqueness probe).
pub fn solve_step_from(
    spec: &ProblemSpec,
    u_prev: &FemFunction,
    guess: FemFunction,
    tau: f64,
    t_n: f64,
    opts: &SolverOpts,
) -> Result<(FemFunction, StepReport), StepError> {
    let mut u = guess;
    let mut residual = assemble_residual(spec, &u, u_prev, tau, t_n)?;
    let mut rnorm = linf(&residual);
    let mut report = StepReport {
        iterations: 0,
        residual_norms: alloc::vec![rnorm],
        damping_factors: Vec::new(),
        fallback_used: false,
    };
    if rnorm <= opts.tol {
        return Ok((u, report));
    }
    let mut picard = false;
    let mut iters_in_phase = 0usize;
    loop {
        if iters_in_phase >= opts.max_iters {
            if !picard && opts.fallback_picard {
                picard = true;
                report.fallback_used = true;
                iters_in_phase = 0;
                continue;
            }
            return Err(StepError::NonConvergence(Box::new(NonConvergence {
                step: None,
                last_iterate: u,
                last_residual: rnorm,
                report,
            })));
        }
        let matrix = if picard {
            assemble_picard_matrix(spec, &u, tau)?
        } else {
            assemble_jacobian(spec, &u, tau)?
        };
        let neg_r: Vec<f64> = residual.iter().map(|v| -v).collect();
        let delta = match matrix.lu_solve(&neg_r) {
            Ok(d) => d,
            Err(e) => {
                if !picard && opts.fallback_picard {
                    picard = true;
                    report.fallback_used = true;
                    iters_in_phase = 0;
                    continue;
                }
                return Err(StepError::Fem(FemError::Linear(e)));
            }
        };
        let mut accepted = None;
        let mut alpha = 1.0f64;
        let tries = if opts.damping { 31 } else { 1 };
        for _ in 0..tries {
            let mut trial = u.clone();
            trial.axpy(alpha, &delta);
            match assemble_residual(spec, &trial, u_prev, tau, t_n) {
                Ok(r_trial) => {
                    let n_trial = linf(&r_trial);
                    if n_trial.is_finite() && n_trial < rnorm * (1.0 - 1e-4 * alpha) {
                        accepted = Some((trial, r_trial, n_trial, alpha));
                        break;
                    }
                }
                // overshoots into non-finite territory: shrink the step
                Err(FemError::AssemblyNan { .. }) => {}
                Err(e) => return Err(StepError::Fem(e)),
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, r_trial, n_trial, a)) => {
                u = trial;
                residual = r_trial;
                rnorm = n_trial;
                report.iterations += 1;
                report.residual_norms.push(rnorm);
                report.damping_factors.push(a);
                iters_in_phase += 1;
                if rnorm <= opts.tol {
                    return Ok((u, report));
                }
            }
            None => {
                if !picard && opts.fallback_picard {
                    picard = true;
                    report.fallback_used = true;
                    iters_in_phase = 0;
                    continue;
                }
                return Err(StepError::NonConvergence(Box::new(NonConvergence {
                    step: None,
                    last_iterate: u,
                    last_residual: rnorm,
                    report,
                })));
            }
        }
    }
}

/// Initial state of a run: restrict the problem's initial datum onto the
/// space, or start from a given field.
pub enum InitialState {
    FromInitialData,
    Field(FemFunction),
}

/// Runs the scheme over the whole grid: `u^0` from the initial datum, then
/// one `solve_step` per node. Deterministic for a fixed configuration.
pub fn run(
    spec: &ProblemSpec,
    space: &Arc<FemSpace>,
    grid: &TimeGrid,
    init: InitialState,
    opts: &SolverOpts,
) -> Result<DiscreteTrajectory, StepError> {
    let u0 = match init {
        InitialState::FromInitialData => space.restrict(|x| spec.initial.eval(x), 1e-9)?,
        InitialState::Field(f) => {
            if !Arc::ptr_eq(f.space(), space) {
                return Err(StepError::Fem(FemError::SpaceMismatch));
            }
            f
        }
    };
    let mut states = alloc::vec![u0];
    let mut reports = Vec::with_capacity(grid.steps());
    for n in 1..=grid.steps() {
        match solve_step(spec, &states[n - 1], grid.tau(), grid.node(n), opts) {
            Ok((u, report)) => {
                states.push(u);
                reports.push(report);
            }
            Err(StepError::NonConvergence(mut nc)) => {
                nc.step = Some(n);
                return Err(StepError::NonConvergence(nc));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(DiscreteTrajectory {
        grid: *grid,
        states,
        reports,
    })
}

/// Solves the same step from several initial iterates and returns the largest
/// pairwise L2 distance between the solutions. For a well-posed step this
/// stays within `10 * opts.tol`, witnessing that the discrete solution does
/// not depend on the iteration path.
pub fn uniqueness_probe(
    spec: &ProblemSpec,
    u_prev: &FemFunction,
    tau: f64,
    t_n: f64,
    guesses: &[FemFunction],
    opts: &SolverOpts,
) -> Result<f64, StepError> {
    let mut solutions = Vec::with_capacity(guesses.len());
    for g in guesses {
        let (u, _) = solve_step_from(spec, u_prev, g.clone(), tau, t_n, opts)?;
        solutions.push(u);
    }
    let mut max_dist = 0.0f64;
    for i in 0..solutions.len() {
        for j in (i + 1)..solutions.len() {
            max_dist = max_dist.max(solutions[i].l2_distance(&solutions[j]));
        }
    }
    Ok(max_dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::library;
    use crate::problem::{Initial, Source};

    #[test]
    fn grid_rejects_tau_of_one_or_more() {
        assert!(TimeGrid::new(2.0, 2).is_err());
        assert!(TimeGrid::new(1.0, 1).is_err());
        assert!(TimeGrid::new(0.5, 1).is_ok());
        assert!(TimeGrid::new(-1.0, 4).is_err());
    }

    #[test]
    fn heat_step_returns_closed_form_in_one_iteration() {
        let spec = library::heat_limit();
        let space = crate::fem::FemSpace::build(1, 2).unwrap();
        let u_prev = space.function_from_coeffs(vec![1.0]).unwrap();
        let opts = SolverOpts::default();
        for tau in [0.1, 0.05, 0.01] {
            let (u, report) = solve_step(&spec, &u_prev, tau, tau, &opts).unwrap();
            let expect = 1.0 / (1.0 + 12.0 * tau);
            assert!(
                (u.coeffs()[0] - expect).abs() < 1e-12,
                "tau={tau}: {} vs {expect}",
                u.coeffs()[0]
            );
            assert_eq!(report.iterations, 1, "linear problem solves in one step");
        }
    }

    #[test]
    fn scaled_b_step_returns_closed_form() {
        let spec = library::heat_limit_scaled_b();
        let space = crate::fem::FemSpace::build(1, 2).unwrap();
        let u_prev = space.function_from_coeffs(vec![1.0]).unwrap();
        let (u, _) = solve_step(&spec, &u_prev, 0.1, 0.1, &SolverOpts::default()).unwrap();
        assert!((u.coeffs()[0] - 1.0 / 1.8).abs() < 1e-12);
    }

    #[test]
    fn zero_data_needs_zero_iterations() {
        let spec = library::heat_limit().with_initial(Initial::Zero);
        let space = crate::fem::FemSpace::build(1, 4).unwrap();
        let u_prev = space.zero_function();
        let (u, report) = solve_step(&spec, &u_prev, 0.1, 0.1, &SolverOpts::default()).unwrap();
        assert!(u.coeffs().iter().all(|&c| c == 0.0));
        assert_eq!(report.iterations, 0);
    }

    #[test]
    fn two_step_run_matches_geometric_decay() {
        // single interior node with hat initial datum: u^n = (1 + 12 tau)^{-n}
        let spec = library::heat_limit().with_initial(Initial::Hat { dim: 1 });
        let space = crate::fem::FemSpace::build(1, 2).unwrap();
        let grid = TimeGrid::new(0.1, 2).unwrap();
        let traj = run(
            &spec,
            &space,
            &grid,
            InitialState::FromInitialData,
            &SolverOpts::default(),
        )
        .unwrap();
        assert_eq!(traj.states().len(), 3);
        // (1 + 12 * 0.05)^{-2} = 1.6^{-2} = 0.390625 exactly
        assert!((traj.final_state().coeffs()[0] - 0.390625).abs() < 1e-12);
    }

    #[test]
    fn single_step_grid_reduces_to_solve_step() {
        let spec = library::heat_limit();
        let space = crate::fem::FemSpace::build(1, 8).unwrap();
        let grid = TimeGrid::new(0.25, 1).unwrap();
        let traj = run(
            &spec,
            &space,
            &grid,
            InitialState::FromInitialData,
            &SolverOpts::default(),
        )
        .unwrap();
        let u0 = space
            .restrict(|x| crate::real::sin(core::f64::consts::PI * x[0]), 1e-9)
            .unwrap();
        let (u1, _) = solve_step(&spec, &u0, 0.25, 0.25, &SolverOpts::default()).unwrap();
        assert_eq!(traj.final_state().coeffs(), u1.coeffs());
    }

    #[test]
    fn decay_is_monotone_without_source() {
        let spec = library::heat_limit();
        let space = crate::fem::FemSpace::build(1, 16).unwrap();
        let grid = TimeGrid::new(0.8, 16).unwrap();
        let traj = run(
            &spec,
            &space,
            &grid,
            InitialState::FromInitialData,
            &SolverOpts::default(),
        )
        .unwrap();
        let mut prev = f64::INFINITY;
        for s in traj.states() {
            let n = s.l2_norm();
            assert!(n <= prev + 1e-14);
            prev = n;
        }
    }

    #[test]
    fn runs_are_bitwise_deterministic() {
        let spec = library::p_laplacian();
        let space = crate::fem::FemSpace::build(1, 16).unwrap();
        let grid = TimeGrid::new(0.5, 8).unwrap();
        let a = run(&spec, &space, &grid, InitialState::FromInitialData, &SolverOpts::default())
            .unwrap();
        let b = run(&spec, &space, &grid, InitialState::FromInitialData, &SolverOpts::default())
            .unwrap();
        for (ua, ub) in a.states().iter().zip(b.states()) {
            for (ca, cb) in ua.coeffs().iter().zip(ub.coeffs()) {
                assert_eq!(ca.to_bits(), cb.to_bits());
            }
        }
    }

    #[test]
    fn accepted_residual_norms_decrease_strictly() {
        let spec = library::p_laplacian().with_source(Source::Constant { value: 1.0 });
        let space = crate::fem::FemSpace::build(1, 16).unwrap();
        let u_prev = space
            .restrict(|x| 2.0 * crate::real::sin(core::f64::consts::PI * x[0]), 1e-9)
            .unwrap();
        let (_, report) = solve_step(&spec, &u_prev, 0.05, 0.05, &SolverOpts::default()).unwrap();
        assert!(report.iterations >= 2, "problem should be genuinely nonlinear");
        for w in report.residual_norms.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn exhausted_budget_reports_nonconvergence_with_step() {
        let spec = library::p_laplacian().with_source(Source::Constant { value: 5.0 });
        let space = crate::fem::FemSpace::build(1, 16).unwrap();
        let grid = TimeGrid::new(0.4, 2).unwrap();
        let opts = SolverOpts {
            max_iters: 1,
            damping: false,
            fallback_picard: false,
            ..SolverOpts::default()
        };
        match run(&spec, &space, &grid, InitialState::FromInitialData, &opts) {
            Err(StepError::NonConvergence(nc)) => {
                assert_eq!(nc.step, Some(1));
                assert!(nc.last_residual > opts.tol);
                assert_eq!(nc.last_iterate.coeffs().len(), space.n_dofs());
            }
            other => panic!("expected nonconvergence, got {other:?}"),
        }
    }

    #[test]
    fn linear_models_need_one_newton_iteration_from_any_guess() {
        let spec = library::heat_limit();
        let space = crate::fem::FemSpace::build(1, 8).unwrap();
        let u_prev = space
            .restrict(|x| crate::real::sin(core::f64::consts::PI * x[0]), 1e-9)
            .unwrap();
        let far = space
            .restrict(|x| 50.0 * x[0] * (1.0 - x[0]), 1e-9)
            .unwrap();
        for guess in [space.zero_function(), far] {
            let (_, report) =
                solve_step_from(&spec, &u_prev, guess, 0.1, 0.1, &SolverOpts::default()).unwrap();
            assert_eq!(report.iterations, 1);
            assert_eq!(report.damping_factors, vec![1.0]);
        }
    }

    #[test]
    fn uniqueness_probe_on_linear_model_is_tight() {
        let spec = library::heat_limit();
        let space = crate::fem::FemSpace::build(1, 8).unwrap();
        let u_prev = space
            .restrict(|x| crate::real::sin(core::f64::consts::PI * x[0]), 1e-9)
            .unwrap();
        let mut shifted = u_prev.clone();
        for c in shifted.coeffs_mut() {
            *c += 0.5;
        }
        let guesses = vec![space.zero_function(), u_prev.clone(), shifted];
        let d = uniqueness_probe(&spec, &u_prev, 0.1, 0.1, &guesses, &SolverOpts::default())
            .unwrap();
        assert!(d <= 1e-12, "distance {d}");
    }
}
