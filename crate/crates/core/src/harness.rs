//! Verification harness: manufactured solutions, temporal and spatial
//! convergence studies, a brute-force oracle for tiny steps and a
//! finite-difference Jacobian check.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::fem::{
    assemble_residual, FemError, FemFunction, FemSpace, QuadratureRule,
};
use crate::problem::{library, Initial, ProblemSpec, Source};
use crate::real;
use crate::stepper::{self, InitialState, SolverOpts, StepError, TimeGrid};

#[derive(Debug)]
pub enum HarnessError {
    Precondition(&'static str),
    /// The coordinate search could not bracket a root.
    OracleFailure { what: &'static str },
    /// The fixed spatial mesh contributes more than 10% of the coarsest
    /// temporal error, so a temporal fit would be polluted.
    SpatialResolutionTooCoarse {
        estimated_spatial: f64,
        coarsest_temporal: f64,
    },
    Step(StepError),
    Fem(FemError),
}

impl core::fmt::Display for HarnessError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            HarnessError::Precondition(what) => write!(f, "precondition violated: {what}"),
            HarnessError::OracleFailure { what } => write!(f, "oracle failure: {what}"),
            HarnessError::SpatialResolutionTooCoarse {
                estimated_spatial,
                coarsest_temporal,
            } => write!(
                f,
                "spatial error ~{estimated_spatial} exceeds 10% of the coarsest temporal \
                 error {coarsest_temporal}; refine the mesh"
            ),
            HarnessError::Step(e) => write!(f, "{e}"),
            HarnessError::Fem(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for HarnessError {}

impl From<StepError> for HarnessError {
    fn from(e: StepError) -> HarnessError {
        HarnessError::Step(e)
    }
}

impl From<FemError> for HarnessError {
    fn from(e: FemError) -> HarnessError {
        HarnessError::Fem(e)
    }
}

type ExactFn = dyn Fn(&[f64; 2], f64) -> f64 + Send + Sync;

/// A problem instance together with its known exact solution; the source term
/// is chosen so that the exact solution solves the equation.
#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: &'static str,
    pub dim: usize,
    pub t_final: f64,
    pub spec: ProblemSpec,
    pub exact: Arc<ExactFn>,
}

impl ManufacturedCase {
    pub fn exact_at(&self, x: &[f64; 2], t: f64) -> f64 {
        (self.exact)(x, t)
    }
}

/// Decaying sine on the heat-limit model: `u = exp(-t) sin(pi x1) [sin(pi x2)]`
/// with the induced source `(d pi^2 - 1) u`.
pub fn heat_exp_sine(dim: usize) -> ManufacturedCase {
    let pi = core::f64::consts::PI;
    let amp = dim as f64 * pi * pi - 1.0;
    let spec = library::heat_limit()
        .with_source(Source::DecaySine {
            amp,
            rate: 1.0,
            dim,
        })
        .with_initial(Initial::SinePi { dim });
    let exact: Arc<ExactFn> = Arc::new(move |x: &[f64; 2], t: f64| {
        let mut v = real::exp(-t) * real::sin(pi * x[0]);
        if dim == 2 {
            v *= real::sin(pi * x[1]);
        }
        v
    });
    ManufacturedCase {
        name: if dim == 1 {
            "heat-exp-sine-1d"
        } else {
            "heat-exp-sine-2d"
        },
        dim,
        t_final: 1.0,
        spec,
        exact,
    }
}

/// Stationary parabola `u = x (1 - x)` with constant source 2 on the heat
/// limit: the time derivative vanishes identically, so temporal refinement
/// produces no error signal (the degenerate-study path).
pub fn stationary_parabola() -> ManufacturedCase {
    let spec = library::heat_limit()
        .with_source(Source::Constant { value: 2.0 })
        .with_initial(Initial::Parabola);
    ManufacturedCase {
        name: "stationary-parabola",
        dim: 1,
        t_final: 0.5,
        spec,
        exact: Arc::new(|x: &[f64; 2], _t: f64| x[0] * (1.0 - x[0])),
    }
}

/// The zero solution: exactly representable in every space, so both studies
/// report errors at rounding level.
pub fn zero_case() -> ManufacturedCase {
    let spec = library::heat_limit().with_initial(Initial::Zero);
    ManufacturedCase {
        name: "zero",
        dim: 1,
        t_final: 0.5,
        spec,
        exact: Arc::new(|_x: &[f64; 2], _t: f64| 0.0),
    }
}

/// Registry of the shipped cases (the names the CLI accepts).
pub fn case_by_name(name: &str) -> Option<ManufacturedCase> {
    match name {
        "heat-exp-sine-1d" => Some(heat_exp_sine(1)),
        "heat-exp-sine-2d" => Some(heat_exp_sine(2)),
        "stationary-parabola" => Some(stationary_parabola()),
        "zero" => Some(zero_case()),
        _ => None,
    }
}

/// L1 and L2 norms of `exact - u` over the mesh, by quadrature.
pub fn error_norms(
    u: &FemFunction,
    exact: impl Fn(&[f64; 2]) -> f64,
    quad: &QuadratureRule,
) -> (f64, f64) {
    let mesh = u.space().mesh();
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    for c in 0..mesh.n_cells() {
        let measure = mesh.cell_geom(c).measure;
        for (bary, w) in quad.iter() {
            let x = mesh.point_in_cell(c, bary);
            let d = exact(&x) - u.value_in_cell(c, bary);
            l1 += w * measure * real::abs(d);
            l2 += w * measure * d * d;
        }
    }
    (l1, real::sqrt(l2))
}

fn error_quadrature(dim: usize) -> QuadratureRule {
    match dim {
        1 => QuadratureRule::gauss_segment(8),
        _ => QuadratureRule::triangle_degree5().refined(1),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StudyKind {
    Temporal,
    Spatial,
}

#[derive(Clone, Copy, Debug)]
pub struct StudyRow {
    pub level: usize,
    /// `tau` for temporal studies, `h_max` for spatial ones.
    pub tau_or_h: f64,
    pub err_l1: f64,
    pub err_l2: f64,
    /// Pairwise observed order against the previous level.
    pub rate: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct SpatialCheck {
    pub estimated_spatial: f64,
    pub coarsest_temporal: f64,
}

/// Result of a refinement study. `fitted_order` is the least-squares slope of
/// `log err_L1` against `log (tau or h)`; it is absent when the study is
/// degenerate (no error signal to fit).
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub kind: StudyKind,
    pub case_name: &'static str,
    pub rows: Vec<StudyRow>,
    pub fitted_order: Option<f64>,
    pub degenerate: bool,
    pub spatial_check: Option<SpatialCheck>,
}

/// Least-squares slope of `ln e` against `ln x`.
pub fn fit_order(xs: &[f64], es: &[f64]) -> Option<f64> {
    if xs.len() != es.len() || xs.len() < 2 {
        return None;
    }
    if es.iter().any(|&e| e <= 0.0) || xs.iter().any(|&x| x <= 0.0) {
        return None;
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|&x| real::ln(x)).collect();
    let le: Vec<f64> = es.iter().map(|&e| real::ln(e)).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let me = le.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, e) in lx.iter().zip(&le) {
        num += (x - mx) * (e - me);
        den += (x - mx) * (x - mx);
    }
    (den > 0.0).then(|| num / den)
}

fn run_case(
    case: &ManufacturedCase,
    m: usize,
    n_steps: usize,
    opts: &SolverOpts,
) -> Result<(f64, f64), HarnessError> {
    let space = FemSpace::build(case.dim, m)?;
    let grid = TimeGrid::new(case.t_final, n_steps)?;
    let traj = stepper::run(&case.spec, &space, &grid, InitialState::FromInitialData, opts)?;
    let t_final = case.t_final;
    let exact = Arc::clone(&case.exact);
    let quad = error_quadrature(case.dim);
    Ok(error_norms(
        traj.final_state(),
        |x| exact(x, t_final),
        &quad,
    ))
}

fn degenerate(errors: &[f64]) -> bool {
    let max_e = errors.iter().fold(0.0f64, |m, &e| m.max(e));
    let min_e = errors.iter().fold(f64::INFINITY, |m, &e| m.min(e));
    max_e < 1e-13 || (max_e - min_e) <= 1e-3 * max_e
}

fn build_rows(params: &[f64], errs: &[(f64, f64)]) -> Vec<StudyRow> {
    let mut rows = Vec::with_capacity(params.len());
    for (k, (&p, &(l1, l2))) in params.iter().zip(errs).enumerate() {
        let rate = if k > 0 && errs[k - 1].0 > 0.0 && l1 > 0.0 {
            Some(real::ln(errs[k - 1].0 / l1) / real::ln(params[k - 1] / p))
        } else {
            None
        };
        rows.push(StudyRow {
            level: k,
            tau_or_h: p,
            err_l1: l1,
            err_l2: l2,
            rate,
        });
    }
    rows
}

/// Temporal refinement on a fixed fine mesh: measures the final-time L1 error
/// against the exact solution for every `N` in `n_list` and fits the order.
/// An extra spatial refinement of the coarsest run verifies that the fixed
/// mesh contributes no more than 10% of the coarsest temporal error.
pub fn temporal_order_study(
    case: &ManufacturedCase,
    m: usize,
    n_list: &[usize],
    opts: &SolverOpts,
) -> Result<ConvergenceReport, HarnessError> {
    if n_list.len() < 3 {
        return Err(HarnessError::Precondition(
            "temporal study needs at least 3 step counts",
        ));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HarnessError::Precondition(
            "step counts must be strictly increasing",
        ));
    }
    let mut errs = Vec::with_capacity(n_list.len());
    let mut taus = Vec::with_capacity(n_list.len());
    for &n in n_list {
        errs.push(run_case(case, m, n, opts)?);
        taus.push(case.t_final / n as f64);
    }
    let l1s: Vec<f64> = errs.iter().map(|e| e.0).collect();
    let rows = build_rows(&taus, &errs);
    if degenerate(&l1s) {
        return Ok(ConvergenceReport {
            kind: StudyKind::Temporal,
            case_name: case.name,
            rows,
            fitted_order: None,
            degenerate: true,
            spatial_check: None,
        });
    }
    let (coarse_l1, _) = errs[0];
    let (refined_l1, _) = run_case(case, 2 * m, n_list[0], opts)?;
    let estimated_spatial = real::abs(coarse_l1 - refined_l1);
    if estimated_spatial > 0.1 * coarse_l1 {
        return Err(HarnessError::SpatialResolutionTooCoarse {
            estimated_spatial,
            coarsest_temporal: coarse_l1,
        });
    }
    Ok(ConvergenceReport {
        kind: StudyKind::Temporal,
        case_name: case.name,
        rows,
        fitted_order: fit_order(&taus, &l1s),
        degenerate: false,
        spatial_check: Some(SpatialCheck {
            estimated_spatial,
            coarsest_temporal: coarse_l1,
        }),
    })
}

/// Spatial refinement with a fixed fine time grid. Exploratory: no order is
/// contracted, the report records what was observed.
pub fn spatial_refinement_study(
    case: &ManufacturedCase,
    n_fixed: usize,
    m_list: &[usize],
    opts: &SolverOpts,
) -> Result<ConvergenceReport, HarnessError> {
    if m_list.len() < 3 {
        return Err(HarnessError::Precondition(
            "spatial study needs at least 3 resolutions",
        ));
    }
    if m_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HarnessError::Precondition(
            "resolutions must be strictly increasing",
        ));
    }
    let mut errs = Vec::with_capacity(m_list.len());
    let mut hs = Vec::with_capacity(m_list.len());
    for &m in m_list {
        errs.push(run_case(case, m, n_fixed, opts)?);
        let space = FemSpace::build(case.dim, m)?;
        hs.push(space.mesh().h_max());
    }
    let l1s: Vec<f64> = errs.iter().map(|e| e.0).collect();
    let rows = build_rows(&hs, &errs);
    let is_degenerate = degenerate(&l1s);
    Ok(ConvergenceReport {
        kind: StudyKind::Spatial,
        case_name: case.name,
        rows,
        fitted_order: if is_degenerate {
            None
        } else {
            fit_order(&hs, &l1s)
        },
        degenerate: is_degenerate,
        spatial_check: None,
    })
}

/// Brute-force solution of one backward Euler step for spaces with at most
/// three unknowns: a dense scan of the coefficient box around `u_prev`
/// followed by cyclic coordinate bisection on the residual components.
/// Shares nothing with the Newton path except the residual definition.
pub fn brute_force_oracle(
    spec: &ProblemSpec,
    space: &Arc<FemSpace>,
    u_prev: &FemFunction,
    tau: f64,
    t_n: f64,
    grid_resolution: usize,
) -> Result<FemFunction, HarnessError> {
    let n = space.n_dofs();
    if n == 0 || n > 3 {
        return Err(HarnessError::Precondition(
            "oracle handles 1 to 3 unknowns",
        ));
    }
    if grid_resolution < 3 {
        return Err(HarnessError::Precondition(
            "grid resolution must be at least 3",
        ));
    }
    let center: Vec<f64> = u_prev.coeffs().to_vec();
    let width = 2.0 + 4.0 * center.iter().fold(0.0f64, |m, &c| m.max(real::abs(c)));
    let residual_of = |coeffs: &[f64]| -> Result<Vec<f64>, HarnessError> {
        let u = space
            .function_from_coeffs(coeffs.to_vec())
            .map_err(HarnessError::Fem)?;
        Ok(assemble_residual(spec, &u, u_prev, tau, t_n)?)
    };
    // dense scan
    let mut best = center.clone();
    let mut best_norm = f64::INFINITY;
    let mut idx = alloc::vec![0usize; n];
    let points = grid_resolution;
    loop {
        let coeffs: Vec<f64> = (0..n)
            .map(|d| center[d] - width + 2.0 * width * idx[d] as f64 / (points - 1) as f64)
            .collect();
        if let Ok(r) = residual_of(&coeffs) {
            let norm = r.iter().fold(0.0f64, |m, &v| m.max(real::abs(v)));
            if norm < best_norm {
                best_norm = norm;
                best = coeffs;
            }
        }
        // odometer increment
        let mut d = 0;
        loop {
            idx[d] += 1;
            if idx[d] < points {
                break;
            }
            idx[d] = 0;
            d += 1;
            if d == n {
                break;
            }
        }
        if d == n {
            break;
        }
    }
    // cyclic coordinate bisection: residual component i is increasing in its
    // own coefficient (mass and diffusion diagonals are positive)
    let lo_hi = |coeffs: &[f64], d: usize| -> Result<Option<(f64, f64)>, HarnessError> {
        let mut lo = center[d] - width;
        let mut hi = center[d] + width;
        let at = |v: f64, coeffs: &[f64]| -> Result<f64, HarnessError> {
            let mut c = coeffs.to_vec();
            c[d] = v;
            Ok(residual_of(&c)?[d])
        };
        let r_lo = at(lo, coeffs)?;
        let r_hi = at(hi, coeffs)?;
        if r_lo > 0.0 || r_hi < 0.0 {
            // widen once before giving up
            lo = center[d] - 4.0 * width;
            hi = center[d] + 4.0 * width;
            let r_lo = at(lo, coeffs)?;
            let r_hi = at(hi, coeffs)?;
            if r_lo > 0.0 || r_hi < 0.0 {
                return Ok(None);
            }
        }
        Ok(Some((lo, hi)))
    };
    let mut coeffs = best;
    for _sweep in 0..500 {
        for d in 0..n {
            let Some((mut lo, mut hi)) = lo_hi(&coeffs, d)? else {
                return Err(HarnessError::OracleFailure {
                    what: "no sign change along a coordinate",
                });
            };
            for _ in 0..100 {
                if hi - lo <= 1e-15 * hi.abs().max(lo.abs()).max(1.0) {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let mut c = coeffs.clone();
                c[d] = mid;
                let r = residual_of(&c)?[d];
                if r > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            coeffs[d] = 0.5 * (lo + hi);
        }
        let r = residual_of(&coeffs)?;
        let norm = r.iter().fold(0.0f64, |m, &v| m.max(real::abs(v)));
        if norm <= 1e-12 {
            return space.function_from_coeffs(coeffs).map_err(HarnessError::Fem);
        }
    }
    Err(HarnessError::OracleFailure {
        what: "coordinate sweeps did not reach tolerance",
    })
}

/// Central finite-difference Jacobian of the step residual (dense); the
/// reference the assembled Jacobian is compared against.
pub fn finite_difference_jacobian(
    spec: &ProblemSpec,
    u: &FemFunction,
    u_prev: &FemFunction,
    tau: f64,
    t_n: f64,
) -> Result<Vec<Vec<f64>>, HarnessError> {
    let space = u.space();
    let n = space.n_dofs();
    let mut jac = alloc::vec![alloc::vec![0.0f64; n]; n];
    for j in 0..n {
        let h = 1e-6 * (1.0 + real::abs(u.coeffs()[j]));
        let mut up = u.clone();
        up.coeffs_mut()[j] += h;
        let mut um = u.clone();
        um.coeffs_mut()[j] -= h;
        let rp = assemble_residual(spec, &up, u_prev, tau, t_n)?;
        let rm = assemble_residual(spec, &um, u_prev, tau, t_n)?;
        for i in 0..n {
            jac[i][j] = (rp[i] - rm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}
