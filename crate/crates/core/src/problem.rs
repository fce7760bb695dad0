//! Problem data for the parabolic equation `d/dt b(u) - div(a(grad u) + K(u)) = f`:
//! the maps `(b, a, K, f, u0)`, their structure constants, and sampling
//! validators for the growth, monotonicity and coercivity assumptions.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::musielak::{self, AffineExponent, MusielakError, MusielakFunction};
use crate::real;

/// Regularization width used inside the p-Laplacian Jacobian (the residual is
/// left exact).
pub const GRADIENT_REGULARIZATION: f64 = 1e-10;

const MAX_RECORDED_VIOLATIONS: usize = 8;

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;
type VectorOfScalarFn = dyn Fn(f64) -> [f64; 2] + Send + Sync;
type StressFn = dyn Fn(&[f64; 2], [f64; 2]) -> [f64; 2] + Send + Sync;
type StressJacFn = dyn Fn(&[f64; 2], [f64; 2]) -> [[f64; 2]; 2] + Send + Sync;
type SpaceTimeFn = dyn Fn(&[f64; 2], f64) -> f64 + Send + Sync;
type SpaceFn = dyn Fn(&[f64; 2]) -> f64 + Send + Sync;

/// Strictly increasing time-derivative nonlinearity `b` with `b(0) = 0`.
#[derive(Clone)]
pub enum BField {
    /// `b(s) = slope * s`
    Linear { slope: f64 },
    /// `b(s) = slope * s + amp * sin(s)`
    LinearSine { slope: f64, amp: f64 },
    Custom {
        eval: Arc<ScalarFn>,
        deriv: Arc<ScalarFn>,
    },
}

impl BField {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            BField::Linear { slope } => slope * s,
            BField::LinearSine { slope, amp } => slope * s + amp * real::sin(s),
            BField::Custom { eval, .. } => eval(s),
        }
    }

    pub fn deriv(&self, s: f64) -> f64 {
        match self {
            BField::Linear { slope } => *slope,
            BField::LinearSine { slope, amp } => slope + amp * real::cos(s),
            BField::Custom { deriv, .. } => deriv(s),
        }
    }
}

/// Diffusion stress `a(x, xi)`.
#[derive(Clone)]
pub enum Stress {
    /// `a(x, xi) = xi` (linear diffusion)
    Gradient,
    /// `a(x, xi) = |xi|^{p(x)-2} xi`
    PLaplacian { exponent: AffineExponent },
    Custom {
        eval: Arc<StressFn>,
        jacobian: Arc<StressJacFn>,
    },
}

impl Stress {
    pub fn eval(&self, x: &[f64; 2], xi: [f64; 2]) -> [f64; 2] {
        match self {
            Stress::Gradient => xi,
            Stress::PLaplacian { exponent } => {
                let n = real::hypot(xi[0], xi[1]);
                if n == 0.0 {
                    return [0.0, 0.0];
                }
                let c = real::pow(n, exponent.eval(x) - 2.0);
                [c * xi[0], c * xi[1]]
            }
            Stress::Custom { eval, .. } => eval(x, xi),
        }
    }

    /// Jacobian with respect to `xi`; the p-Laplacian branch replaces `|xi|`
    /// by `sqrt(|xi|^2 + eps^2)` so Newton sees bounded derivatives at
    /// vanishing gradients.
    pub fn jacobian(&self, x: &[f64; 2], xi: [f64; 2]) -> [[f64; 2]; 2] {
        match self {
            Stress::Gradient => [[1.0, 0.0], [0.0, 1.0]],
            Stress::PLaplacian { exponent } => {
                let p = exponent.eval(x);
                let eps = GRADIENT_REGULARIZATION;
                let s2 = xi[0] * xi[0] + xi[1] * xi[1] + eps * eps;
                let s = real::sqrt(s2);
                let c = real::pow(s, p - 2.0);
                let d = (p - 2.0) * real::pow(s, p - 4.0);
                [
                    [c + d * xi[0] * xi[0], d * xi[0] * xi[1]],
                    [d * xi[1] * xi[0], c + d * xi[1] * xi[1]],
                ]
            }
            Stress::Custom { jacobian, .. } => jacobian(x, xi),
        }
    }
}

/// Convection term `K(s)` mapping a scalar state to a flux vector.
#[derive(Clone)]
pub enum Convection {
    Zero,
    /// `K(s) = coef * s * e1`
    LinearE1 { coef: f64 },
    Custom {
        eval: Arc<VectorOfScalarFn>,
        deriv: Arc<VectorOfScalarFn>,
    },
}

impl Convection {
    pub fn eval(&self, s: f64) -> [f64; 2] {
        match self {
            Convection::Zero => [0.0, 0.0],
            Convection::LinearE1 { coef } => [coef * s, 0.0],
            Convection::Custom { eval, .. } => eval(s),
        }
    }

    pub fn deriv(&self, s: f64) -> [f64; 2] {
        match self {
            Convection::Zero => [0.0, 0.0],
            Convection::LinearE1 { coef } => [*coef, 0.0],
            Convection::Custom { deriv, .. } => deriv(s),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Convection::Zero)
    }
}

/// Source term `f(x, t)`, evaluated pointwise at quadrature points of the
/// time slice `t_n` exactly as the scheme prescribes.
#[derive(Clone)]
pub enum Source {
    Zero,
    Constant { value: f64 },
    /// `amp * exp(-rate t) * sin(pi x1) [* sin(pi x2)]`
    DecaySine { amp: f64, rate: f64, dim: usize },
    Custom(Arc<SpaceTimeFn>),
}

impl Source {
    pub fn eval(&self, x: &[f64; 2], t: f64) -> f64 {
        match self {
            Source::Zero => 0.0,
            Source::Constant { value } => *value,
            Source::DecaySine { amp, rate, dim } => {
                let mut v = amp * real::exp(-rate * t) * real::sin(core::f64::consts::PI * x[0]);
                if *dim == 2 {
                    v *= real::sin(core::f64::consts::PI * x[1]);
                }
                v
            }
            Source::Custom(f) => f(x, t),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Source::Zero)
    }
}

/// Initial datum `u0(x)`; must vanish on the boundary.
#[derive(Clone)]
pub enum Initial {
    Zero,
    /// `sin(pi x1) [* sin(pi x2)]`
    SinePi { dim: usize },
    /// Piecewise linear peak of height one at the domain center.
    Hat { dim: usize },
    /// `x (1 - x)` in one dimension.
    Parabola,
    Custom(Arc<SpaceFn>),
}

impl Initial {
    pub fn eval(&self, x: &[f64; 2]) -> f64 {
        match self {
            Initial::Zero => 0.0,
            Initial::SinePi { dim } => {
                let mut v = real::sin(core::f64::consts::PI * x[0]);
                if *dim == 2 {
                    v *= real::sin(core::f64::consts::PI * x[1]);
                }
                v
            }
            Initial::Hat { dim } => {
                let hat = |c: f64| (1.0 - real::abs(2.0 * c - 1.0)).max(0.0);
                let mut v = hat(x[0]);
                if *dim == 2 {
                    v *= hat(x[1]);
                }
                v
            }
            Initial::Parabola => x[0] * (1.0 - x[0]),
            Initial::Custom(f) => f(x),
        }
    }
}

/// Structure constants of a problem instance. `b1 = 2 b0` always; the
/// dissipation margin requires `nu > 4 nu0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constants {
    pub b0: f64,
    pub nu: f64,
    pub nu0: f64,
    pub nu1: f64,
    pub lambda: f64,
}

impl Constants {
    pub fn b1(&self) -> f64 {
        2.0 * self.b0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemError {
    /// A structure constant is outside its admissible range.
    InvalidConstant { name: &'static str, value: f64 },
    /// `nu <= 4 nu0`: the energy dissipation margin is not positive.
    StructureViolation { nu: f64, nu0: f64 },
    /// Truncation levels must be positive.
    InvalidTruncationLevel { k: f64 },
}

impl core::fmt::Display for ProblemError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ProblemError::InvalidConstant { name, value } => {
                write!(f, "constant {name} = {value} is outside its admissible range")
            }
            ProblemError::StructureViolation { nu, nu0 } => {
                write!(
                    f,
                    "structure violation: coercivity nu = {nu} must exceed 4 nu0 = {} \
                     for the energy margin to be positive",
                    4.0 * nu0
                )
            }
            ProblemError::InvalidTruncationLevel { k } => {
                write!(f, "truncation level must be positive, got {k}")
            }
        }
    }
}

impl core::error::Error for ProblemError {}

/// One parabolic problem instance: the maps, their Musielak function and the
/// structure constants. Immutable after construction and shareable across
/// threads.
#[derive(Clone)]
pub struct ProblemSpec {
    pub b: BField,
    pub stress: Stress,
    pub convection: Convection,
    pub source: Source,
    pub initial: Initial,
    pub phi: MusielakFunction,
    pub constants: Constants,
}

impl ProblemSpec {
    /// Validates positivity of the constants and the margin `nu > 4 nu0`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        b: BField,
        stress: Stress,
        convection: Convection,
        source: Source,
        initial: Initial,
        phi: MusielakFunction,
        constants: Constants,
    ) -> Result<ProblemSpec, ProblemError> {
        for (name, value, strict) in [
            ("b0", constants.b0, true),
            ("nu", constants.nu, true),
            ("nu0", constants.nu0, true),
            ("nu1", constants.nu1, false),
            ("lambda", constants.lambda, true),
        ] {
            let ok = value.is_finite() && if strict { value > 0.0 } else { value >= 0.0 };
            if !ok {
                return Err(ProblemError::InvalidConstant { name, value });
            }
        }
        if constants.nu <= 4.0 * constants.nu0 {
            return Err(ProblemError::StructureViolation {
                nu: constants.nu,
                nu0: constants.nu0,
            });
        }
        Ok(Self::new_unchecked(
            b, stress, convection, source, initial, phi, constants,
        ))
    }

    /// Skips the constant checks; intended for experiments that deliberately
    /// break the structure assumptions.
    #[allow(clippy::too_many_arguments)]
    pub fn new_unchecked(
        b: BField,
        stress: Stress,
        convection: Convection,
        source: Source,
        initial: Initial,
        phi: MusielakFunction,
        constants: Constants,
    ) -> ProblemSpec {
        ProblemSpec {
            b,
            stress,
            convection,
            source,
            initial,
            phi,
            constants,
        }
    }

    pub fn with_source(mut self, source: Source) -> ProblemSpec {
        self.source = source;
        self
    }

    pub fn with_initial(mut self, initial: Initial) -> ProblemSpec {
        self.initial = initial;
        self
    }

    /// Energy margin `2 tau (nu b0 - 2 b1 nu0)`; positive whenever
    /// `nu > 4 nu0`.
    pub fn energy_margin(&self, tau: f64) -> f64 {
        let c = &self.constants;
        2.0 * tau * (c.nu * c.b0 - 2.0 * c.b1() * c.nu0)
    }
}

/// Clamp to `[-k, k]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncation {
    level: f64,
}

impl Truncation {
    pub fn new(k: f64) -> Result<Truncation, ProblemError> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(ProblemError::InvalidTruncationLevel { k });
        }
        Ok(Truncation { level: k })
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn apply(&self, r: f64) -> f64 {
        r.max(-self.level).min(self.level)
    }
}

// --- validators -------------------------------------------------------------

fn push_violation(violations: &mut Vec<String>, text: String) {
    if violations.len() < MAX_RECORDED_VIOLATIONS {
        violations.push(text);
    }
}

/// Report of the `b` validation: `b(0) = 0` and `b0 < b'(s) < b1` on every
/// sample (checked analytically and by centered differences, with slack
/// `1e-12` since strict inequalities cannot be certified from samples).
#[derive(Clone, Debug)]
pub struct BValidation {
    pub passed: bool,
    pub b_at_zero: f64,
    pub deriv_min: f64,
    pub deriv_max: f64,
    pub samples_checked: usize,
    pub violations: Vec<String>,
}

pub fn validate_b(spec: &ProblemSpec, s_samples: &[f64]) -> BValidation {
    let tol = 1e-12;
    let b0 = spec.constants.b0;
    let b1 = spec.constants.b1();
    let mut violations = Vec::new();
    let b_at_zero = spec.b.eval(0.0);
    if real::abs(b_at_zero) > tol {
        push_violation(&mut violations, format!("b(0) = {b_at_zero}, expected 0"));
    }
    let mut deriv_min = f64::INFINITY;
    let mut deriv_max = f64::NEG_INFINITY;
    for &s in s_samples {
        let h = 1e-6 * (1.0 + real::abs(s));
        let fd = (spec.b.eval(s + h) - spec.b.eval(s - h)) / (2.0 * h);
        let an = spec.b.deriv(s);
        for (kind, d) in [("analytic", an), ("finite-difference", fd)] {
            deriv_min = deriv_min.min(d);
            deriv_max = deriv_max.max(d);
            // finite differencing carries O(h^2) truncation noise
            let slack = if kind == "analytic" { tol } else { 1e-6 };
            if !(d > b0 - slack && d < b1 + slack) {
                push_violation(
                    &mut violations,
                    format!("{kind} derivative b'({s}) = {d} outside ({b0}, {b1})"),
                );
            }
        }
    }
    BValidation {
        passed: violations.is_empty(),
        b_at_zero,
        deriv_min,
        deriv_max,
        samples_checked: s_samples.len(),
        violations,
    }
}

/// Report of the stress validation: growth `|a(x,xi)| <= conj^{-1}(phi(x,|xi|))`,
/// strict monotonicity on sample pairs, coercivity `a(x,xi).xi >= nu phi(x,|xi|)`.
#[derive(Clone, Debug)]
pub struct StressValidation {
    pub passed: bool,
    pub growth_failures: usize,
    pub monotonicity_failures: usize,
    pub coercivity_failures: usize,
    /// Minimum of `a(x,xi).xi - nu phi(x,|xi|)` over the samples.
    pub min_coercivity_slack: f64,
    pub samples_checked: usize,
    pub violations: Vec<String>,
}

pub fn validate_stress(
    spec: &ProblemSpec,
    xi_samples: &[[f64; 2]],
    x_samples: &[[f64; 2]],
) -> Result<StressValidation, MusielakError> {
    if x_samples.is_empty() {
        return Err(MusielakError::InvalidInput("x_samples must be non-empty"));
    }
    let nu = spec.constants.nu;
    let mut violations = Vec::new();
    let mut growth_failures = 0usize;
    let mut monotonicity_failures = 0usize;
    let mut coercivity_failures = 0usize;
    let mut min_slack = f64::INFINITY;
    for (k, &xi) in xi_samples.iter().enumerate() {
        let x = x_samples[k % x_samples.len()];
        let a = spec.stress.eval(&x, xi);
        let a_norm = real::hypot(a[0], a[1]);
        let xi_norm = real::hypot(xi[0], xi[1]);
        let phi_val = spec.phi.eval(&x, xi_norm);
        let bound = musielak::conjugate_inverse(&spec.phi, &x, phi_val)?;
        if a_norm > bound * (1.0 + 1e-9) + 1e-12 {
            growth_failures += 1;
            push_violation(
                &mut violations,
                format!("growth fails at x={x:?}, xi={xi:?}: |a| = {a_norm} > {bound}"),
            );
        }
        let dot = a[0] * xi[0] + a[1] * xi[1];
        let slack = dot - nu * phi_val;
        min_slack = min_slack.min(slack);
        if slack < -1e-9 * (1.0 + real::abs(dot)) {
            coercivity_failures += 1;
            push_violation(
                &mut violations,
                format!(
                    "coercivity a(x,xi).xi >= nu phi(x,|xi|) fails at x={x:?}, xi={xi:?}: \
                     {dot} < {}",
                    nu * phi_val
                ),
            );
        }
    }
    for (k, pair) in xi_samples.chunks_exact(2).enumerate() {
        let (xi, xj) = (pair[0], pair[1]);
        if xi == xj {
            continue;
        }
        let x = x_samples[k % x_samples.len()];
        let ai = spec.stress.eval(&x, xi);
        let aj = spec.stress.eval(&x, xj);
        let dot = (ai[0] - aj[0]) * (xi[0] - xj[0]) + (ai[1] - aj[1]) * (xi[1] - xj[1]);
        if dot <= 0.0 {
            monotonicity_failures += 1;
            push_violation(
                &mut violations,
                format!("monotonicity fails at x={x:?}, xi={xi:?}, xi*={xj:?}: {dot} <= 0"),
            );
        }
    }
    Ok(StressValidation {
        passed: violations.is_empty(),
        growth_failures,
        monotonicity_failures,
        coercivity_failures,
        min_coercivity_slack: min_slack,
        samples_checked: xi_samples.len(),
        violations,
    })
}

/// Report of the convection validation: growth
/// `|K(s)| <= nu0 conj^{-1}(phi(x, |s|/lambda))` and the Lipschitz bound
/// `|K(s) - K(s')| <= nu1 |s - s'|`; records the tightest admissible
/// constants observed.
#[derive(Clone, Debug)]
pub struct ConvectionValidation {
    pub passed: bool,
    pub growth_failures: usize,
    pub lipschitz_failures: usize,
    /// Smallest `nu0` that would satisfy the growth bound on these samples.
    pub tightest_nu0: f64,
    /// Smallest `nu1` that would satisfy the Lipschitz bound.
    pub tightest_nu1: f64,
    pub samples_checked: usize,
    pub violations: Vec<String>,
}

pub fn validate_convection(
    spec: &ProblemSpec,
    s_samples: &[f64],
    x_samples: &[[f64; 2]],
) -> Result<ConvectionValidation, MusielakError> {
    if x_samples.is_empty() {
        return Err(MusielakError::InvalidInput("x_samples must be non-empty"));
    }
    let nu0 = spec.constants.nu0;
    let nu1 = spec.constants.nu1;
    let lambda = spec.constants.lambda;
    let mut violations = Vec::new();
    let mut growth_failures = 0usize;
    let mut lipschitz_failures = 0usize;
    let mut tightest_nu0 = 0.0f64;
    let mut tightest_nu1 = 0.0f64;
    for (k, &s) in s_samples.iter().enumerate() {
        let x = x_samples[k % x_samples.len()];
        let kv = spec.convection.eval(s);
        let k_norm = real::hypot(kv[0], kv[1]);
        if k_norm == 0.0 {
            continue;
        }
        let phi_val = spec.phi.eval(&x, real::abs(s) / lambda);
        let bound_unit = musielak::conjugate_inverse(&spec.phi, &x, phi_val)?;
        if bound_unit > 0.0 {
            tightest_nu0 = tightest_nu0.max(k_norm / bound_unit);
        } else if k_norm > 1e-12 {
            // K does not vanish where the bound does
            growth_failures += 1;
            push_violation(
                &mut violations,
                format!("convection growth fails at s={s}: |K| = {k_norm}, bound 0"),
            );
            continue;
        }
        if k_norm > nu0 * bound_unit * (1.0 + 1e-9) + 1e-12 {
            growth_failures += 1;
            push_violation(
                &mut violations,
                format!(
                    "convection growth |K(s)| <= nu0 conj_inv(phi(x,|s|/lambda)) fails at \
                     s={s}, x={x:?}: {k_norm} > {}",
                    nu0 * bound_unit
                ),
            );
        }
    }
    for pair in s_samples.chunks_exact(2) {
        let (s, sp) = (pair[0], pair[1]);
        if s == sp {
            continue;
        }
        let ks = spec.convection.eval(s);
        let ksp = spec.convection.eval(sp);
        let diff = real::hypot(ks[0] - ksp[0], ks[1] - ksp[1]);
        let quotient = diff / real::abs(s - sp);
        tightest_nu1 = tightest_nu1.max(quotient);
        if quotient > nu1 * (1.0 + 1e-9) + 1e-12 {
            lipschitz_failures += 1;
            push_violation(
                &mut violations,
                format!(
                    "Lipschitz bound |K(s)-K(s')| <= nu1 |s-s'| fails at s={s}, s'={sp}: \
                     quotient {quotient} > nu1 = {nu1}"
                ),
            );
        }
    }
    Ok(ConvectionValidation {
        passed: violations.is_empty(),
        growth_failures,
        lipschitz_failures,
        tightest_nu0,
        tightest_nu1,
        samples_checked: s_samples.len(),
        violations,
    })
}

/// The shipped model library. All models pass the three validators with the
/// documented constants.
pub mod library {
    use super::*;

    /// Linear diffusion with `b(s) = s`: `a(xi) = xi`, `phi(t) = t^2 / 2`
    /// (coercivity constant 2), no convection.
    pub fn heat_limit() -> ProblemSpec {
        ProblemSpec::new(
            BField::Linear { slope: 1.0 },
            Stress::Gradient,
            Convection::Zero,
            Source::Zero,
            Initial::SinePi { dim: 1 },
            MusielakFunction::power_scaled(2.0, 0.5).expect("valid exponent"),
            Constants {
                b0: 0.75,
                nu: 2.0,
                nu0: 0.25,
                nu1: 0.0,
                lambda: 1.0,
            },
        )
        .expect("heat limit constants are consistent")
    }

    /// Heat limit with `b(s) = 1.5 s` (scaled time derivative).
    pub fn heat_limit_scaled_b() -> ProblemSpec {
        ProblemSpec::new(
            BField::Linear { slope: 1.5 },
            Stress::Gradient,
            Convection::Zero,
            Source::Zero,
            Initial::SinePi { dim: 1 },
            MusielakFunction::power_scaled(2.0, 0.5).expect("valid exponent"),
            Constants {
                b0: 1.0,
                nu: 2.0,
                nu0: 0.25,
                nu1: 0.0,
                lambda: 1.0,
            },
        )
        .expect("constants are consistent")
    }

    /// Variable-exponent diffusion `a(x, xi) = |xi|^{p(x)-2} xi` with
    /// `p(x) = 2 + x/2`, `phi(x,t) = t^{p(x)}` (coercivity constant 1) and a
    /// mildly nonlinear `b(s) = 1.5 s + 0.2 sin s`.
    pub fn p_laplacian() -> ProblemSpec {
        let exponent = AffineExponent {
            p0: 2.0,
            p1: 0.5,
            p2: 0.0,
        };
        ProblemSpec::new(
            BField::LinearSine {
                slope: 1.5,
                amp: 0.2,
            },
            Stress::PLaplacian { exponent },
            Convection::Zero,
            Source::Zero,
            Initial::SinePi { dim: 1 },
            MusielakFunction::variable_power(exponent).expect("valid exponent"),
            Constants {
                b0: 1.0,
                nu: 1.0,
                nu0: 0.1,
                nu1: 0.0,
                lambda: 1.0,
            },
        )
        .expect("constants are consistent")
    }

    /// Linear diffusion plus the Lipschitz convection `K(s) = 0.2 s e1` and
    /// `b(s) = 1.5 s`.
    pub fn lipschitz_convection() -> ProblemSpec {
        ProblemSpec::new(
            BField::Linear { slope: 1.5 },
            Stress::Gradient,
            Convection::LinearE1 { coef: 0.2 },
            Source::Zero,
            Initial::SinePi { dim: 1 },
            MusielakFunction::power_scaled(2.0, 0.5).expect("valid exponent"),
            Constants {
                b0: 1.0,
                nu: 2.0,
                nu0: 0.25,
                nu1: 0.2,
                lambda: 1.0,
            },
        )
        .expect("constants are consistent")
    }

    /// All shipped models with their names.
    pub fn all() -> Vec<(&'static str, ProblemSpec)> {
        alloc::vec![
            ("heat-limit", heat_limit()),
            ("p-laplacian", p_laplacian()),
            ("lipschitz-convection", lipschitz_convection()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()
    }

    fn x_samples(n: usize) -> Vec<[f64; 2]> {
        (0..n).map(|i| [(i as f64 + 0.5) / n as f64, 0.0]).collect()
    }

    #[test]
    fn truncate_matches_clamp_formula() {
        let t = Truncation::new(2.0).unwrap();
        assert_eq!(t.apply(5.0), 2.0);
        assert_eq!(t.apply(-3.0), -2.0);
        assert_eq!(t.apply(1.0), 1.0);
        assert!(Truncation::new(0.0).is_err());
    }

    #[test]
    fn truncate_is_lipschitz_and_idempotent_on_many_samples() {
        let t = Truncation::new(3.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut prev: f64 = rng.random_range(-100.0..100.0);
        for _ in 0..100_000 {
            let r: f64 = rng.random_range(-100.0..100.0);
            let tr = t.apply(r);
            assert!(tr.abs() <= 3.5);
            assert_eq!(t.apply(tr), tr, "idempotent");
            assert!((tr - t.apply(prev)).abs() <= (r - prev).abs() + 1e-15, "1-Lipschitz");
            prev = r;
        }
    }

    #[test]
    fn constants_reject_broken_margin() {
        let bad = ProblemSpec::new(
            BField::Linear { slope: 1.0 },
            Stress::Gradient,
            Convection::Zero,
            Source::Zero,
            Initial::Zero,
            MusielakFunction::power_scaled(2.0, 0.5).unwrap(),
            Constants {
                b0: 0.75,
                nu: 1.0,
                nu0: 0.25,
                nu1: 0.0,
                lambda: 1.0,
            },
        );
        assert!(matches!(bad, Err(ProblemError::StructureViolation { .. })));
        let neg = ProblemSpec::new(
            BField::Linear { slope: 1.0 },
            Stress::Gradient,
            Convection::Zero,
            Source::Zero,
            Initial::Zero,
            MusielakFunction::power_scaled(2.0, 0.5).unwrap(),
            Constants {
                b0: -1.0,
                nu: 2.0,
                nu0: 0.25,
                nu1: 0.0,
                lambda: 1.0,
            },
        );
        assert!(matches!(neg, Err(ProblemError::InvalidConstant { name: "b0", .. })));
    }

    #[test]
    fn validate_b_passes_linear_slope_inside_band() {
        let spec = library::heat_limit_scaled_b();
        let report = validate_b(&spec, &linspace(-100.0, 100.0, 1001));
        assert!(report.passed, "{:?}", report.violations);
        assert!((report.deriv_min - 1.5).abs() < 1e-9);
        assert!((report.deriv_max - 1.5).abs() < 1e-9);
    }

    #[test]
    fn validate_b_passes_sine_perturbation() {
        let spec = library::p_laplacian();
        let report = validate_b(&spec, &linspace(-100.0, 100.0, 2001));
        assert!(report.passed, "{:?}", report.violations);
        assert!(report.deriv_min > 1.29 && report.deriv_max < 1.71);
    }

    #[test]
    fn validate_b_fails_for_quadratic() {
        let spec = ProblemSpec::new_unchecked(
            BField::Custom {
                eval: alloc::sync::Arc::new(|s| s * s),
                deriv: alloc::sync::Arc::new(|s| 2.0 * s),
            },
            Stress::Gradient,
            Convection::Zero,
            Source::Zero,
            Initial::Zero,
            MusielakFunction::power_scaled(2.0, 0.5).unwrap(),
            Constants {
                b0: 1.0,
                nu: 2.0,
                nu0: 0.25,
                nu1: 0.0,
                lambda: 1.0,
            },
        );
        let report = validate_b(&spec, &linspace(-100.0, 100.0, 1001));
        assert!(!report.passed);
        assert!(report.deriv_min < 1.0);
    }

    fn ball_samples(n: usize, radius: f64, seed: u64) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|k| {
                let r: f64 = if k % 2 == 0 {
                    rng.random_range(0.0..radius)
                } else {
                    // log-uniform towards small magnitudes
                    let e: f64 = rng.random_range(-6.0..0.0);
                    radius * crate::real::pow(10.0, e)
                };
                let angle: f64 = rng.random_range(0.0..core::f64::consts::TAU);
                [r * crate::real::cos(angle), r * crate::real::sin(angle)]
            })
            .collect()
    }

    #[test]
    fn validate_stress_linear_diffusion_has_coercivity_two() {
        let spec = library::heat_limit();
        let report =
            validate_stress(&spec, &ball_samples(500, 100.0, 3), &x_samples(50)).unwrap();
        assert!(report.passed, "{:?}", report.violations);
        // a(xi).xi = |xi|^2 = 2 phi: equality up to rounding
        assert!(report.min_coercivity_slack.abs() < 1e-6);
    }

    #[test]
    fn validate_stress_p_laplacian_passes_with_unit_margin() {
        let spec = library::p_laplacian();
        let report =
            validate_stress(&spec, &ball_samples(300, 50.0, 4), &x_samples(20)).unwrap();
        assert!(report.passed, "{:?}", report.violations);
        assert!(report.min_coercivity_slack > -1e-9);
    }

    #[test]
    fn validate_stress_rejects_reversed_field() {
        let spec = ProblemSpec::new_unchecked(
            BField::Linear { slope: 1.0 },
            Stress::Custom {
                eval: alloc::sync::Arc::new(|_x, xi| [-xi[0], -xi[1]]),
                jacobian: alloc::sync::Arc::new(|_x, _xi| [[-1.0, 0.0], [0.0, -1.0]]),
            },
            Convection::Zero,
            Source::Zero,
            Initial::Zero,
            MusielakFunction::power_scaled(2.0, 0.5).unwrap(),
            Constants {
                b0: 0.75,
                nu: 2.0,
                nu0: 0.25,
                nu1: 0.0,
                lambda: 1.0,
            },
        );
        let report =
            validate_stress(&spec, &ball_samples(100, 10.0, 5), &x_samples(10)).unwrap();
        assert!(!report.passed);
        assert!(report.monotonicity_failures > 0);
        assert!(report.coercivity_failures > 0);
    }

    #[test]
    fn validate_convection_linear_is_tight() {
        let spec = library::lipschitz_convection();
        let report =
            validate_convection(&spec, &linspace(-100.0, 100.0, 801), &x_samples(40)).unwrap();
        assert!(report.passed, "{:?}", report.violations);
        assert!((report.tightest_nu0 - 0.2).abs() < 1e-6, "{}", report.tightest_nu0);
        assert!((report.tightest_nu1 - 0.2).abs() < 1e-9);
    }

    #[test]
    fn validate_convection_fails_when_coefficient_exceeds_nu0() {
        let mut spec = library::lipschitz_convection();
        spec.convection = Convection::LinearE1 { coef: 0.3 };
        spec.constants.nu1 = 0.3;
        let report =
            validate_convection(&spec, &linspace(-50.0, 50.0, 401), &x_samples(20)).unwrap();
        assert!(!report.passed);
        assert!(report.growth_failures > 0, "0.3 > nu0 = 0.25");
    }

    #[test]
    fn validate_convection_zero_term_passes_with_zero_lipschitz() {
        let spec = library::heat_limit();
        let report =
            validate_convection(&spec, &linspace(-100.0, 100.0, 501), &x_samples(10)).unwrap();
        assert!(report.passed);
        assert_eq!(report.tightest_nu1, 0.0);
        assert_eq!(report.tightest_nu0, 0.0);
    }

    #[test]
    fn validate_convection_quadratic_is_not_lipschitz() {
        let spec = ProblemSpec::new_unchecked(
            BField::Linear { slope: 1.0 },
            Stress::Gradient,
            Convection::Custom {
                eval: alloc::sync::Arc::new(|s| [s * s, 0.0]),
                deriv: alloc::sync::Arc::new(|s| [2.0 * s, 0.0]),
            },
            Source::Zero,
            Initial::Zero,
            MusielakFunction::power_scaled(2.0, 0.5).unwrap(),
            Constants {
                b0: 0.75,
                nu: 2.0,
                nu0: 0.25,
                nu1: 1.0,
                lambda: 1.0,
            },
        );
        let report =
            validate_convection(&spec, &linspace(-100.0, 100.0, 1001), &x_samples(10)).unwrap();
        assert!(!report.passed);
        assert!(report.lipschitz_failures > 0);
        assert!(report.tightest_nu1 > 100.0);
    }

    #[test]
    fn shipped_models_pass_all_validators() {
        for (name, spec) in library::all() {
            let rb = validate_b(&spec, &linspace(-100.0, 100.0, 1001));
            assert!(rb.passed, "{name} b: {:?}", rb.violations);
            let rs = validate_stress(&spec, &ball_samples(400, 100.0, 17), &x_samples(25))
                .unwrap();
            assert!(rs.passed, "{name} stress: {:?}", rs.violations);
            let rk = validate_convection(&spec, &linspace(-100.0, 100.0, 801), &x_samples(25))
                .unwrap();
            assert!(rk.passed, "{name} convection: {:?}", rk.violations);
        }
    }

    #[test]
    fn stress_monotonicity_never_degenerate_for_separated_pairs() {
        let spec = library::p_laplacian();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..2000 {
            let x = [rng.random_range(0.0..1.0), 0.0];
            let xi = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
            let mut xj = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
            let d = crate::real::hypot(xi[0] - xj[0], xi[1] - xj[1]);
            if d < 1e-8 {
                xj[0] += 1e-4;
            }
            let ai = spec.stress.eval(&x, xi);
            let aj = spec.stress.eval(&x, xj);
            let dot = (ai[0] - aj[0]) * (xi[0] - xj[0]) + (ai[1] - aj[1]) * (xi[1] - xj[1]);
            assert!(dot > 0.0, "xi={xi:?} xj={xj:?}");
        }
    }

    proptest! {
        #[test]
        fn truncation_properties(k in 0.1..10.0f64, r in -1e6..1e6f64, s in -1e6..1e6f64) {
            let t = Truncation::new(k).unwrap();
            prop_assert!(t.apply(r).abs() <= k);
            prop_assert!((t.apply(r) - t.apply(s)).abs() <= (r - s).abs());
            prop_assert_eq!(t.apply(t.apply(r)), t.apply(r));
            if r.abs() <= k {
                prop_assert_eq!(t.apply(r), r);
            }
        }
    }
}
