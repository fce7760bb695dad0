//! Post-processing of computed trajectories: the per-step energy ledger with
//! its a priori bound, piecewise-in-time interpolants, Steklov averages and a
//! modular Poincare probe.
//!
//! Everything here is pure read-only analysis of an immutable trajectory.

use alloc::vec::Vec;

use crate::fem::{FemFunction, FieldView, QuadratureRule};
use crate::musielak::{self, MusielakError, MusielakFunction};
use crate::problem::ProblemSpec;
use crate::real;
use crate::stepper::DiscreteTrajectory;

#[derive(Clone, Debug)]
pub enum DiagnosticsError {
    /// The dissipation margin `2 tau (nu b0 - 2 b1 nu0)` is not positive.
    StructureViolation { margin: f64 },
    /// Epsilon of the energy bound must lie in (0, 1).
    InvalidEpsilon { eps: f64 },
    /// Time outside `[0, T]`.
    DomainError { t: f64, t_final: f64 },
    /// The probed field has no gradient anywhere.
    ZeroGradient,
    /// No lambda in the scanned grid satisfied the modular inequality.
    ProbeFailure { max_lambda: f64 },
    Musielak(MusielakError),
}

impl core::fmt::Display for DiagnosticsError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            DiagnosticsError::StructureViolation { margin } => write!(
                f,
                "energy margin {margin} is not positive (configuration violates nu > 4 nu0)"
            ),
            DiagnosticsError::InvalidEpsilon { eps } => {
                write!(f, "epsilon must lie in (0, 1), got {eps}")
            }
            DiagnosticsError::DomainError { t, t_final } => {
                write!(f, "time {t} outside [0, {t_final}]")
            }
            DiagnosticsError::ZeroGradient => {
                write!(f, "field has vanishing gradient; probe undefined")
            }
            DiagnosticsError::ProbeFailure { max_lambda } => {
                write!(f, "no lambda up to {max_lambda} satisfies the modular inequality")
            }
            DiagnosticsError::Musielak(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for DiagnosticsError {}

impl From<MusielakError> for DiagnosticsError {
    fn from(e: MusielakError) -> DiagnosticsError {
        DiagnosticsError::Musielak(e)
    }
}

/// One row of the energy ledger at step `n`.
#[derive(Clone, Copy, Debug)]
pub struct LedgerRow {
    pub n: usize,
    pub t: f64,
    /// `|| b(u^n) ||_{L2}^2`
    pub b_norm_sq: f64,
    /// `|| b(u^n) - b(u^{n-1}) ||_{L2}^2`
    pub jump_sq: f64,
    /// `integral phi(x, |grad u^n|) dx`
    pub modular: f64,
    /// `integral |f(., t_n)| |b(u^n)| dx`
    pub data_term: f64,
    /// `b_norm_sq + sum jumps + margin * sum modulars` up to this step
    pub lhs_cum: f64,
    /// The bound: `eps^{-2} ||f||^2 + eps^2 max_j ||b(u^j)||^2 + ||b(u^0)||^2`
    pub rhs: f64,
    pub pass: bool,
}

/// Energy audit of a trajectory: per-row inequality checks plus the summed
/// increment bound.
#[derive(Clone, Debug)]
pub struct EnergyAudit {
    pub rows: Vec<LedgerRow>,
    /// `2 tau (nu b0 - 2 b1 nu0)`
    pub margin: f64,
    /// Right-endpoint approximation `tau sum_n ||f(., t_n)||_{L2}` of the
    /// `L1(0,T; L2)` norm of the data.
    pub f_l1_l2: f64,
    pub b0_norm_sq: f64,
    pub max_b_norm_sq: f64,
    pub epsilon: f64,
    /// Measured `sum_n || u^n - u^{n-1} ||_{L2}`: the smallest constant for
    /// which the increment bound holds on this run.
    pub c4: f64,
    /// `b0 sum ||u^n - u^{n-1}|| <= sum ||b(u^n) - b(u^{n-1})||` observed.
    pub increment_chain_holds: bool,
    pub verdict: bool,
}

/// Checks the pre-constant energy inequality for every step of the
/// trajectory, with the space's own quadrature rule.
pub fn energy_audit(
    traj: &DiscreteTrajectory,
    spec: &ProblemSpec,
    eps: f64,
) -> Result<EnergyAudit, DiagnosticsError> {
    let quad = traj.space().quadrature().clone();
    energy_audit_with_quadrature(traj, spec, eps, &quad)
}

/// [`energy_audit`] with an explicit quadrature rule (used to check that the
/// audit is robust under quadrature refinement).
pub fn energy_audit_with_quadrature(
    traj: &DiscreteTrajectory,
    spec: &ProblemSpec,
    eps: f64,
    quad: &QuadratureRule,
) -> Result<EnergyAudit, DiagnosticsError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(DiagnosticsError::InvalidEpsilon { eps });
    }
    let grid = traj.grid();
    let tau = grid.tau();
    let margin = spec.energy_margin(tau);
    if margin <= 0.0 {
        return Err(DiagnosticsError::StructureViolation { margin });
    }
    let mesh = traj.space().mesh();
    let n_steps = grid.steps();

    // || b(u^n) ||^2 for n = 0..N
    let b_norm_sq: Vec<f64> = traj
        .states()
        .iter()
        .map(|u| {
            integrate(mesh, quad, |c, bary, _x| {
                let v = spec.b.eval(u.value_in_cell(c, bary));
                v * v
            })
        })
        .collect();
    let b0_norm_sq = b_norm_sq[0];
    let max_b_norm_sq = b_norm_sq[1..]
        .iter()
        .fold(0.0f64, |m, &v| m.max(v));

    let mut f_l1_l2 = 0.0;
    for n in 1..=n_steps {
        let t_n = grid.node(n);
        let f_sq = integrate(mesh, quad, |c, bary, x| {
            let _ = (c, bary);
            let v = spec.source.eval(&x, t_n);
            v * v
        });
        f_l1_l2 += tau * real::sqrt(f_sq);
    }
    let rhs = f_l1_l2 * f_l1_l2 / (eps * eps) + eps * eps * max_b_norm_sq + b0_norm_sq;

    let mut rows = Vec::with_capacity(n_steps);
    let mut jump_cum = 0.0;
    let mut modular_cum = 0.0;
    let mut c4 = 0.0;
    let mut b_jump_l2_sum = 0.0;
    let mut all_pass = true;
    for n in 1..=n_steps {
        let u = traj.state(n);
        let u_prev = traj.state(n - 1);
        let jump_sq = integrate(mesh, quad, |c, bary, _x| {
            let d = spec.b.eval(u.value_in_cell(c, bary)) - spec.b.eval(u_prev.value_in_cell(c, bary));
            d * d
        });
        let grads = crate::fem::gradient_values(u);
        let modular = musielak::modular(&spec.phi, mesh, FieldView::PerCell(&grads), quad)?;
        let t_n = grid.node(n);
        let data_term = integrate(mesh, quad, |c, bary, x| {
            real::abs(spec.source.eval(&x, t_n)) * real::abs(spec.b.eval(u.value_in_cell(c, bary)))
        });
        jump_cum += jump_sq;
        modular_cum += modular;
        b_jump_l2_sum += real::sqrt(jump_sq);
        c4 += u.l2_distance(u_prev);
        let lhs_cum = b_norm_sq[n] + jump_cum + margin * modular_cum;
        let pass = lhs_cum <= rhs * (1.0 + 1e-12) + 1e-12;
        all_pass &= pass;
        rows.push(LedgerRow {
            n,
            t: t_n,
            b_norm_sq: b_norm_sq[n],
            jump_sq,
            modular,
            data_term,
            lhs_cum,
            rhs,
            pass,
        });
    }
    let increment_chain_holds = spec.constants.b0 * c4 <= b_jump_l2_sum * (1.0 + 1e-9) + 1e-12;
    Ok(EnergyAudit {
        rows,
        margin,
        f_l1_l2,
        b0_norm_sq,
        max_b_norm_sq,
        epsilon: eps,
        c4,
        increment_chain_holds,
        verdict: all_pass && increment_chain_holds,
    })
}

fn integrate(
    mesh: &crate::fem::Mesh,
    quad: &QuadratureRule,
    f: impl Fn(usize, &[f64; 3], [f64; 2]) -> f64,
) -> f64 {
    let mut acc = 0.0;
    for c in 0..mesh.n_cells() {
        let measure = mesh.cell_geom(c).measure;
        for (bary, w) in quad.iter() {
            let x = mesh.point_in_cell(c, bary);
            acc += w * measure * f(c, bary, x);
        }
    }
    acc
}

/// Piecewise interpolants of a trajectory in time:
///
/// * `hat`: the linear spline through the knot values `b(u^n)`,
/// * `bar`: the piecewise constant prolongation `u(t) = u^n` on
///   `(t_{n-1}, t_n]` with `bar(0) = u^1`,
/// * `bar_f`: the matching piecewise constant data `f(., t_n)`.
pub struct Interpolants<'a> {
    traj: &'a DiscreteTrajectory,
    spec: &'a ProblemSpec,
}

pub fn build_interpolants<'a>(
    traj: &'a DiscreteTrajectory,
    spec: &'a ProblemSpec,
) -> Interpolants<'a> {
    Interpolants { traj, spec }
}

impl<'a> Interpolants<'a> {
    pub fn trajectory(&self) -> &'a DiscreteTrajectory {
        self.traj
    }

    fn check_time(&self, t: f64) -> Result<(), DiagnosticsError> {
        let t_final = self.traj.grid().t_final();
        if !(0.0..=t_final * (1.0 + 1e-12)).contains(&t) {
            return Err(DiagnosticsError::DomainError { t, t_final });
        }
        Ok(())
    }

    /// Interval index `n >= 1` and local coordinate `theta in [0, 1]` with
    /// `t = (1 - theta) t_{n-1} + theta t_n`.
    pub fn segment_of(&self, t: f64) -> Result<(usize, f64), DiagnosticsError> {
        self.check_time(t)?;
        let grid = self.traj.grid();
        let tau = grid.tau();
        let mut n = (t / tau) as usize + 1;
        n = n.clamp(1, grid.steps());
        if t <= grid.node(n - 1) && n > 1 {
            n -= 1;
        }
        let theta = ((t - grid.node(n - 1)) / tau).clamp(0.0, 1.0);
        Ok((n, theta))
    }

    /// Value of the linear-in-time spline through `b(u^n)` at `(t, x)` where
    /// `x` is a barycentric point of `cell`.
    pub fn hat_value(&self, t: f64, cell: usize, bary: &[f64; 3]) -> Result<f64, DiagnosticsError> {
        let (n, theta) = self.segment_of(t)?;
        let b_prev = self.spec.b.eval(self.traj.state(n - 1).value_in_cell(cell, bary));
        let b_next = self.spec.b.eval(self.traj.state(n).value_in_cell(cell, bary));
        Ok((1.0 - theta) * b_prev + theta * b_next)
    }

    /// The piecewise constant state: `u^n` for `t` in `(t_{n-1}, t_n]`, and
    /// `u^1` at `t = 0`.
    pub fn bar_state(&self, t: f64) -> Result<&'a FemFunction, DiagnosticsError> {
        self.check_time(t)?;
        let grid = self.traj.grid();
        let tau = grid.tau();
        // right-continuous convention: t in (t_{n-1}, t_n] maps to n
        let mut n = if t <= 0.0 {
            1
        } else {
            let k = real::ceil(t / tau) as usize;
            k.max(1)
        };
        n = n.min(grid.steps());
        Ok(self.traj.state(n))
    }

    /// Time node the piecewise constant data interpolant uses at `t`.
    pub fn bar_source_node(&self, t: f64) -> Result<f64, DiagnosticsError> {
        self.check_time(t)?;
        let grid = self.traj.grid();
        let tau = grid.tau();
        let n = if t <= 0.0 {
            1
        } else {
            (real::ceil(t / tau) as usize).clamp(1, grid.steps())
        };
        Ok(grid.node(n))
    }

    /// `|| b(bar u) - hat u ||^2_{L2(Q)}` measured by quadrature in time
    /// (2-point Gauss per slab, exact for the quadratic integrand) and the
    /// space rule of the trajectory.
    pub fn gap_sq_l2q(&self) -> f64 {
        let grid = self.traj.grid();
        let tau = grid.tau();
        let mesh = self.traj.space().mesh();
        let quad = self.traj.space().quadrature();
        let g1 = 0.5 - 0.5 / real::sqrt(3.0);
        let g2 = 0.5 + 0.5 / real::sqrt(3.0);
        let mut acc = 0.0;
        for n in 1..=grid.steps() {
            let u = self.traj.state(n);
            let u_prev = self.traj.state(n - 1);
            for theta in [g1, g2] {
                let weight_t = 0.5 * tau;
                let slab = integrate(mesh, quad, |c, bary, _x| {
                    let b_next = self.spec.b.eval(u.value_in_cell(c, bary));
                    let b_prev = self.spec.b.eval(u_prev.value_in_cell(c, bary));
                    let hat = (1.0 - theta) * b_prev + theta * b_next;
                    let d = b_next - hat;
                    d * d
                });
                acc += weight_t * slab;
            }
        }
        acc
    }

    /// The telescoped form `(tau / 3) sum_n || b(u^n) - b(u^{n-1}) ||^2` the
    /// gap must equal.
    pub fn jump_sum_identity(&self) -> f64 {
        let grid = self.traj.grid();
        let mesh = self.traj.space().mesh();
        let quad = self.traj.space().quadrature();
        let mut acc = 0.0;
        for n in 1..=grid.steps() {
            let u = self.traj.state(n);
            let u_prev = self.traj.state(n - 1);
            acc += integrate(mesh, quad, |c, bary, _x| {
                let d = self.spec.b.eval(u.value_in_cell(c, bary))
                    - self.spec.b.eval(u_prev.value_in_cell(c, bary));
                d * d
            });
        }
        acc * grid.tau() / 3.0
    }
}

/// Centered time average of the `hat` spline over `[t - h, t + h]`, with the
/// spline extended by zero outside `[0, T]`. The result is a fixed linear
/// combination of the knot fields `b(u^n)`; piecewise-linear integration is
/// trapezoid-exact.
#[derive(Clone, Debug)]
pub struct SteklovAverage {
    /// Weight of `b(u^n)` per knot `n = 0..=N`.
    pub knot_weights: Vec<f64>,
}

pub fn steklov_average(interp: &Interpolants<'_>, h: f64, t: f64) -> SteklovAverage {
    assert!(h > 0.0, "averaging window must be positive");
    let grid = interp.traj.grid();
    let tau = grid.tau();
    let n_steps = grid.steps();
    let mut knot_weights = alloc::vec![0.0f64; n_steps + 1];
    let a = t - h;
    let b = t + h;
    for n in 1..=n_steps {
        let lo = grid.node(n - 1);
        let hi = grid.node(n);
        let c = a.max(lo);
        let d = b.min(hi);
        if d <= c {
            continue;
        }
        let theta_mid = ((0.5 * (c + d)) - lo) / tau;
        let len = d - c;
        knot_weights[n - 1] += len * (1.0 - theta_mid) / (2.0 * h);
        knot_weights[n] += len * theta_mid / (2.0 * h);
    }
    SteklovAverage { knot_weights }
}

impl SteklovAverage {
    /// Evaluates the averaged field at a barycentric point of `cell`.
    pub fn value(&self, interp: &Interpolants<'_>, cell: usize, bary: &[f64; 3]) -> f64 {
        let mut acc = 0.0;
        for (n, &w) in self.knot_weights.iter().enumerate() {
            if w != 0.0 {
                acc += w
                    * interp
                        .spec
                        .b
                        .eval(interp.traj.state(n).value_in_cell(cell, bary));
            }
        }
        acc
    }
}

/// Scans `lambda_grid` (ascending) and returns the first `lambda` with
/// `modular(phi, |u|) <= modular(phi, lambda |grad u|)`. The result is an
/// empirical constant for this field, not a proof.
pub fn poincare_probe(
    phi: &MusielakFunction,
    u: &FemFunction,
    lambda_grid: &[f64],
) -> Result<f64, DiagnosticsError> {
    let mesh = u.space().mesh();
    let quad = u.space().quadrature();
    let grads = crate::fem::gradient_values(u);
    if grads.iter().all(|&g| g == 0.0) {
        return Err(DiagnosticsError::ZeroGradient);
    }
    let nodal = u.to_nodal();
    let lhs = musielak::modular(phi, mesh, FieldView::Nodal(nodal.values()), quad)?;
    let mut max_lambda = 0.0f64;
    for &lambda in lambda_grid {
        max_lambda = max_lambda.max(lambda);
        let rhs = musielak::modular_scaled(phi, mesh, FieldView::PerCell(&grads), lambda, quad)?;
        if lhs <= rhs * (1.0 + 1e-12) {
            return Ok(lambda);
        }
    }
    Err(DiagnosticsError::ProbeFailure { max_lambda })
}

/// Doubling grid `start * 2^k`, `k = 0..count`, the default scan range for
/// [`poincare_probe`].
pub fn doubling_lambda_grid(start: f64, count: usize) -> Vec<f64> {
    let mut grid = Vec::with_capacity(count);
    let mut v = start;
    for _ in 0..count {
        grid.push(v);
        v *= 2.0;
    }
    grid
}
