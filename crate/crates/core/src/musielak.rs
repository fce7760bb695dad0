//! Generalized Orlicz (Musielak) functions and the associated functionals:
//! modulars, Luxemburg norms, Young conjugates and doubling diagnostics.
//!
//! A Musielak function `phi(x, t)` is, for every point `x` of the domain, an
//! N-function in `t`: convex, non-decreasing, vanishing at zero, sublinear at
//! zero and superlinear at infinity. The constant-exponent power
//! `c * t^p` and the variable-exponent power `t^{p(x)}` are the shipped
//! representatives; arbitrary closures are accepted for experiments.
//!
//! Conjugates are always computed numerically (closed forms for powers exist
//! and are used as test oracles only). All routines are pure functions of
//! immutable inputs and safe to call from many threads.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::fem::{FieldView, Mesh, QuadratureRule, RefDomain};
use crate::real;

/// Upper limit for bracket expansions in the conjugate sup and in the
/// Luxemburg bisection.
const MAX_DOUBLINGS: u32 = 200;
/// Adaptive search ceiling for the conjugate maximizer.
const CONJUGATE_T_MAX: f64 = 1.099511627776e12; // 2^40

pub type PointFn = dyn Fn(&[f64; 2], f64) -> f64 + Send + Sync;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineExponent {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
}

impl AffineExponent {
    pub fn constant(p: f64) -> AffineExponent {
        AffineExponent {
            p0: p,
            p1: 0.0,
            p2: 0.0,
        }
    }

    pub fn eval(&self, x: &[f64; 2]) -> f64 {
        self.p0 + self.p1 * x[0] + self.p2 * x[1]
    }

    /// Range of the exponent over the unit domain (affine, so attained at
    /// corners).
    pub fn range_on_unit_domain(&self) -> (f64, f64) {
        let corners = [
            [0.0, 0.0],
            [1.0, 0.0],
            [0.0, 1.0],
            [1.0, 1.0],
        ];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for c in corners {
            let p = self.eval(&c);
            lo = lo.min(p);
            hi = hi.max(p);
        }
        (lo, hi)
    }
}

#[derive(Clone)]
enum PhiKind {
    Power {
        p: f64,
        scale: f64,
    },
    VariablePower {
        exponent: AffineExponent,
        scale: f64,
    },
    Custom {
        label: &'static str,
        eval: Arc<PointFn>,
        deriv: Option<Arc<PointFn>>,
    },
}

/// Evaluable Musielak function `phi(x, t)` with optional `t`-derivative.
#[derive(Clone)]
pub struct MusielakFunction {
    kind: PhiKind,
}

impl core::fmt::Debug for MusielakFunction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "MusielakFunction({})", self.describe())
    }
}

impl MusielakFunction {
    /// Constant-exponent power `t^p`, `p >= 1`.
    pub fn power(p: f64) -> Result<MusielakFunction, MusielakError> {
        Self::power_scaled(p, 1.0)
    }

    /// Scaled power `scale * t^p`.
    pub fn power_scaled(p: f64, scale: f64) -> Result<MusielakFunction, MusielakError> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(MusielakError::InvalidExponent { p_min: p });
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(MusielakError::InvalidInput("scale must be positive"));
        }
        Ok(MusielakFunction {
            kind: PhiKind::Power { p, scale },
        })
    }

    /// Variable-exponent power `t^{p(x)}` with affine `p`. Requires
    /// `1 < p^- <= p^+ < infinity` on the unit domain.
    pub fn variable_power(exponent: AffineExponent) -> Result<MusielakFunction, MusielakError> {
        Self::variable_power_scaled(exponent, 1.0)
    }

    pub fn variable_power_scaled(
        exponent: AffineExponent,
        scale: f64,
    ) -> Result<MusielakFunction, MusielakError> {
        let (p_min, p_max) = exponent.range_on_unit_domain();
        if !(p_min > 1.0) || !p_max.is_finite() {
            return Err(MusielakError::InvalidExponent { p_min });
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(MusielakError::InvalidInput("scale must be positive"));
        }
        Ok(MusielakFunction {
            kind: PhiKind::VariablePower { exponent, scale },
        })
    }

    /// Arbitrary evaluable function; the caller is responsible for the
    /// N-function properties (use [`nfunction_probe`] to spot-check them).
    pub fn custom(
        label: &'static str,
        eval: Arc<PointFn>,
        deriv: Option<Arc<PointFn>>,
    ) -> MusielakFunction {
        MusielakFunction {
            kind: PhiKind::Custom { label, eval, deriv },
        }
    }

    pub fn eval(&self, x: &[f64; 2], t: f64) -> f64 {
        match &self.kind {
            PhiKind::Power { p, scale } => scale * real::pow(t, *p),
            PhiKind::VariablePower { exponent, scale } => scale * real::pow(t, exponent.eval(x)),
            PhiKind::Custom { eval, .. } => eval(x, t),
        }
    }

    /// Derivative in `t` when available.
    pub fn deriv_t(&self, x: &[f64; 2], t: f64) -> Option<f64> {
        match &self.kind {
            PhiKind::Power { p, scale } => Some(scale * p * real::pow(t, p - 1.0)),
            PhiKind::VariablePower { exponent, scale } => {
                let p = exponent.eval(x);
                Some(scale * p * real::pow(t, p - 1.0))
            }
            PhiKind::Custom { deriv, .. } => deriv.as_ref().map(|d| d(x, t)),
        }
    }

    /// Exponent at `x` for the power kinds.
    pub fn exponent_at(&self, x: &[f64; 2]) -> Option<f64> {
        match &self.kind {
            PhiKind::Power { p, .. } => Some(*p),
            PhiKind::VariablePower { exponent, .. } => Some(exponent.eval(x)),
            PhiKind::Custom { .. } => None,
        }
    }

    pub fn is_variable_exponent(&self) -> bool {
        matches!(self.kind, PhiKind::VariablePower { .. })
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            PhiKind::Power { p, scale } => format!("{scale} * t^{p}"),
            PhiKind::VariablePower { exponent, scale } => format!(
                "{scale} * t^({} + {} x1 + {} x2)",
                exponent.p0, exponent.p1, exponent.p2
            ),
            PhiKind::Custom { label, .. } => String::from(*label),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MusielakError {
    /// Non-finite value of `phi` while integrating the given cell.
    DivergentModular { cell: usize },
    /// The Luxemburg bracket kept growing past the doubling limit.
    UnboundedNorm,
    /// The conjugate objective is unbounded (the function is not superlinear
    /// at this point / slope).
    ConjugateInfinite { s: f64 },
    /// Exponent outside the admissible range.
    InvalidExponent { p_min: f64 },
    InvalidInput(&'static str),
}

impl core::fmt::Display for MusielakError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MusielakError::DivergentModular { cell } => {
                write!(f, "modular integrand is non-finite on cell {cell}")
            }
            MusielakError::UnboundedNorm => {
                write!(f, "Luxemburg bracket exceeded {MAX_DOUBLINGS} doublings")
            }
            MusielakError::ConjugateInfinite { s } => {
                write!(
                    f,
                    "Young conjugate unbounded at slope {s} (function not superlinear)"
                )
            }
            MusielakError::InvalidExponent { p_min } => {
                write!(f, "exponent must satisfy p > 1 (got minimum {p_min})")
            }
            MusielakError::InvalidInput(what) => write!(f, "invalid input: {what}"),
        }
    }
}

impl core::error::Error for MusielakError {}

/// Integral of `phi(x, |u(x)|)` over the mesh.
///
/// P1 fields are split at interior sign changes (1D) and graded towards
/// zeros of `u` so that non-integer exponents are integrated on panels where
/// the integrand is smooth; for polynomial `phi` the rule's exactness degree
/// applies unchanged.
pub fn modular(
    phi: &MusielakFunction,
    mesh: &Mesh,
    field: FieldView<'_>,
    quad: &QuadratureRule,
) -> Result<f64, MusielakError> {
    modular_scaled(phi, mesh, field, 1.0, quad)
}

/// Same as [`modular`] with the field multiplied by `scale` (used by the
/// Luxemburg bisection with `scale = 1/lambda`).
pub fn modular_scaled(
    phi: &MusielakFunction,
    mesh: &Mesh,
    field: FieldView<'_>,
    scale: f64,
    quad: &QuadratureRule,
) -> Result<f64, MusielakError> {
    let expected = match mesh.dim() {
        1 => RefDomain::Segment,
        _ => RefDomain::Triangle,
    };
    if quad.domain() != expected {
        return Err(MusielakError::InvalidInput(
            "quadrature rule does not match the mesh dimension",
        ));
    }
    if quad.degree() < 2 {
        return Err(MusielakError::InvalidInput("quadrature order must be >= 2"));
    }
    let mut total = 0.0;
    for c in 0..mesh.n_cells() {
        let geom = mesh.cell_geom(c);
        let cell_total = match field {
            FieldView::PerCell(vals) => {
                let t = real::abs(scale * vals[c]);
                let mut acc = 0.0;
                for (bary, w) in quad.iter() {
                    let x = mesh.point_in_cell(c, bary);
                    acc += w * phi.eval(&x, t);
                }
                acc * geom.measure
            }
            FieldView::Nodal(vals) => match mesh.dim() {
                1 => {
                    let va = scale * vals[geom.verts[0]];
                    let vb = scale * vals[geom.verts[1]];
                    segment_modular(phi, &geom.coords[0], &geom.coords[1], va, vb, quad)
                        * geom.measure
                }
                _ => {
                    let mut acc = 0.0;
                    for (bary, w) in quad.iter() {
                        let x = mesh.point_in_cell(c, bary);
                        let mut u = 0.0;
                        for i in 0..geom.nv {
                            u += bary[i] * vals[geom.verts[i]];
                        }
                        acc += w * phi.eval(&x, real::abs(scale * u));
                    }
                    acc * geom.measure
                }
            },
        };
        if !cell_total.is_finite() {
            return Err(MusielakError::DivergentModular { cell: c });
        }
        total += cell_total;
    }
    Ok(total)
}

/// Mean value of `phi(x, |u|)` over one segment with `u` linear between `va`
/// and `vb` (the caller multiplies by the segment length). Splits at the sign
/// change and grades geometrically towards endpoints where `u` vanishes.
fn segment_modular(
    phi: &MusielakFunction,
    a: &[f64; 2],
    b: &[f64; 2],
    va: f64,
    vb: f64,
    quad: &QuadratureRule,
) -> f64 {
    let scale_ref = real::abs(va).max(real::abs(vb));
    if scale_ref == 0.0 {
        // u vanishes identically; phi(x, 0) = 0 for admissible functions but
        // evaluate anyway so pathological inputs are caught by the caller.
        let mut acc = 0.0;
        for (bary, w) in quad.iter() {
            let x = point_on_segment(a, b, bary[1]);
            acc += w * phi.eval(&x, 0.0);
        }
        return acc;
    }
    let mut acc = 0.0;
    if va * vb < 0.0 {
        let split = va / (va - vb);
        acc += segment_piece(phi, a, b, va, vb, 0.0, split, quad);
        acc += segment_piece(phi, a, b, va, vb, split, 1.0, quad);
    } else {
        acc += segment_piece(phi, a, b, va, vb, 0.0, 1.0, quad);
    }
    acc
}

/// Integrates `phi(x, |u|)` over the sub-segment `theta in [lo, hi]` in the
/// reference coordinate of the segment, relative to the full segment measure.
#[allow(clippy::too_many_arguments)]
fn segment_piece(
    phi: &MusielakFunction,
    a: &[f64; 2],
    b: &[f64; 2],
    va: f64,
    vb: f64,
    lo: f64,
    hi: f64,
    quad: &QuadratureRule,
) -> f64 {
    let value = |theta: f64| va + (vb - va) * theta;
    let scale_ref = real::abs(va).max(real::abs(vb));
    let zero_at_lo = real::abs(value(lo)) <= 1e-14 * scale_ref;
    let zero_at_hi = real::abs(value(hi)) <= 1e-14 * scale_ref;
    let mut panels: Vec<(f64, f64)> = Vec::new();
    if zero_at_lo && !zero_at_hi {
        graded_panels(lo, hi, false, &mut panels);
    } else if zero_at_hi && !zero_at_lo {
        graded_panels(lo, hi, true, &mut panels);
    } else {
        panels.push((lo, hi));
    }
    let mut acc = 0.0;
    for (p_lo, p_hi) in panels {
        let len = p_hi - p_lo;
        for (bary, w) in quad.iter() {
            let theta = p_lo + bary[1] * len;
            let x = point_on_segment(a, b, theta);
            acc += w * len * phi.eval(&x, real::abs(value(theta)));
        }
    }
    acc
}

/// Four geometrically graded panels accumulating towards the endpoint where
/// the integrand loses smoothness.
fn graded_panels(lo: f64, hi: f64, towards_hi: bool, out: &mut Vec<(f64, f64)>) {
    let len = hi - lo;
    let mut cuts = [0.0f64; 5];
    cuts[0] = 0.0;
    let mut frac = 1.0 / 64.0;
    for c in cuts.iter_mut().take(4).skip(1) {
        *c = frac;
        frac *= 4.0;
    }
    cuts[4] = 1.0;
    for k in 0..4 {
        let (f0, f1) = if towards_hi {
            (1.0 - cuts[k + 1], 1.0 - cuts[k])
        } else {
            (cuts[k], cuts[k + 1])
        };
        out.push((lo + f0 * len, lo + f1 * len));
    }
}

fn point_on_segment(a: &[f64; 2], b: &[f64; 2], theta: f64) -> [f64; 2] {
    [
        a[0] + (b[0] - a[0]) * theta,
        a[1] + (b[1] - a[1]) * theta,
    ]
}

/// Luxemburg norm `inf { lambda > 0 : modular(u / lambda) <= 1 }` computed by
/// bracket expansion and bisection to relative width `tol`.
pub fn luxemburg_norm(
    phi: &MusielakFunction,
    mesh: &Mesh,
    field: FieldView<'_>,
    quad: &QuadratureRule,
    tol: f64,
) -> Result<f64, MusielakError> {
    if !(tol > 0.0) {
        return Err(MusielakError::InvalidInput("tolerance must be positive"));
    }
    let zero = match field {
        FieldView::Nodal(v) => v.iter().all(|&x| x == 0.0),
        FieldView::PerCell(v) => v.iter().all(|&x| x == 0.0),
    };
    if zero {
        return Ok(0.0);
    }
    let modular_at = |lambda: f64| modular_scaled(phi, mesh, field, 1.0 / lambda, quad);
    let mut lo;
    let mut hi;
    if modular_at(1.0)? <= 1.0 {
        hi = 1.0;
        lo = 0.5;
        let mut n = 0;
        while modular_at(lo)? <= 1.0 {
            hi = lo;
            lo *= 0.5;
            n += 1;
            if n > MAX_DOUBLINGS {
                // modular stays below one for arbitrarily small lambda
                return Ok(0.0);
            }
        }
    } else {
        lo = 1.0;
        hi = 2.0;
        let mut n = 0;
        while modular_at(hi)? > 1.0 {
            lo = hi;
            hi *= 2.0;
            n += 1;
            if n > MAX_DOUBLINGS {
                return Err(MusielakError::UnboundedNorm);
            }
        }
    }
    while (hi - lo) / hi > tol {
        let mid = 0.5 * (lo + hi);
        if modular_at(mid)? <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Young conjugate `sup_{t >= 0} (s t - phi(x, t))` by bracketed ternary
/// search on the concave objective, refined through the stationarity
/// condition `d phi / d t = s` when the derivative is available.
pub fn young_conjugate(
    phi: &MusielakFunction,
    x: &[f64; 2],
    s: f64,
) -> Result<f64, MusielakError> {
    if !(s >= 0.0) {
        return Err(MusielakError::InvalidInput("slope s must be >= 0"));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let g = |t: f64| s * t - phi.eval(x, t);
    let mut hi = 1.0;
    while g(2.0 * hi) > g(hi) {
        hi *= 2.0;
        if hi > CONJUGATE_T_MAX {
            return Err(MusielakError::ConjugateInfinite { s });
        }
    }
    hi *= 2.0;
    let mut lo = 0.0;
    let mut a = lo;
    let mut b = hi;
    for _ in 0..150 {
        if b - a <= 1e-13 * b {
            break;
        }
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if g(m1) < g(m2) {
            a = m1;
        } else {
            b = m2;
        }
    }
    let t_star = 0.5 * (a + b);
    let mut best = g(t_star).max(0.0);
    // refine via the stationarity equation when the slope is available
    if phi.deriv_t(x, 0.0).is_some() {
        let slope = |t: f64| phi.deriv_t(x, t).unwrap_or(f64::INFINITY);
        lo = 0.0;
        let mut hi2 = hi;
        if slope(hi2) >= s {
            for _ in 0..120 {
                if hi2 - lo <= 1e-14 * hi2 {
                    break;
                }
                let mid = 0.5 * (lo + hi2);
                if slope(mid) < s {
                    lo = mid;
                } else {
                    hi2 = mid;
                }
            }
            best = best.max(g(0.5 * (lo + hi2)));
        }
    }
    if !best.is_finite() {
        return Err(MusielakError::ConjugateInfinite { s });
    }
    Ok(best)
}

/// Inverse of the conjugate in its second argument: the `sigma >= 0` with
/// `conjugate(x, sigma) = y`, found by bracketing and bisection.
pub fn conjugate_inverse(
    phi: &MusielakFunction,
    x: &[f64; 2],
    y: f64,
) -> Result<f64, MusielakError> {
    if !(y >= 0.0) {
        return Err(MusielakError::InvalidInput("conjugate values are >= 0"));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut n = 0;
    while young_conjugate(phi, x, hi)? < y {
        lo = hi;
        hi *= 2.0;
        n += 1;
        if n > MAX_DOUBLINGS {
            return Err(MusielakError::UnboundedNorm);
        }
    }
    for _ in 0..100 {
        if hi - lo <= 1e-13 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if young_conjugate(phi, x, mid)? < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The conjugate as a function (numeric at every evaluation). Points where
/// the conjugate is infinite evaluate to `f64::INFINITY` so downstream
/// integrals report divergence.
pub fn conjugate_function(phi: &MusielakFunction) -> MusielakFunction {
    let inner = phi.clone();
    MusielakFunction::custom(
        "young-conjugate",
        Arc::new(move |x: &[f64; 2], s: f64| {
            young_conjugate(&inner, x, s).unwrap_or(f64::INFINITY)
        }),
        None,
    )
}

/// Residual `phi(x, s) + conjugate(x, t) - s t` of the Young inequality;
/// non-negative up to solver tolerance for admissible functions.
pub fn young_inequality_check(
    phi: &MusielakFunction,
    x: &[f64; 2],
    s: f64,
    t: f64,
) -> Result<f64, MusielakError> {
    if !(s >= 0.0 && t >= 0.0) {
        return Err(MusielakError::InvalidInput("s and t must be >= 0"));
    }
    Ok(phi.eval(x, s) + young_conjugate(phi, x, t)? - s * t)
}

/// Doubling diagnostic: estimates `sup phi(x, 2t) / (phi(x, t) + 1)` on the
/// sample set and flags growth across the top two decades of the grid.
///
/// The underlying condition is asymptotic, so this is a sampled heuristic:
/// `satisfied = false` is evidence, not proof, and the estimate is relative
/// to the convention `h(x) = 1` in the additive slack.
#[derive(Clone, Copy, Debug)]
pub struct Delta2Report {
    pub satisfied: bool,
    pub c_estimate: f64,
    pub sup_top_decade: f64,
    pub sup_prev_decade: f64,
}

pub fn delta2_probe(
    phi: &MusielakFunction,
    t_grid: &[f64],
    x_samples: &[[f64; 2]],
) -> Delta2Report {
    let t_max = t_grid.iter().fold(0.0f64, |m, &t| m.max(t));
    let mut c_estimate = 0.0f64;
    let mut sup_top = 0.0f64;
    let mut sup_prev = 0.0f64;
    let mut finite = true;
    for &t in t_grid {
        for x in x_samples {
            let ratio = phi.eval(x, 2.0 * t) / (phi.eval(x, t) + 1.0);
            if !ratio.is_finite() {
                finite = false;
                c_estimate = f64::INFINITY;
                continue;
            }
            c_estimate = c_estimate.max(ratio);
            if t > t_max / 10.0 {
                sup_top = sup_top.max(ratio);
            } else if t > t_max / 100.0 {
                sup_prev = sup_prev.max(ratio);
            }
        }
    }
    let satisfied = finite && sup_top <= sup_prev * 1.05 + 1e-9;
    Delta2Report {
        satisfied,
        c_estimate,
        sup_top_decade: sup_top,
        sup_prev_decade: sup_prev,
    }
}

/// Dyadic grid `2^min_exp ..= 2^max_exp`.
pub fn dyadic_grid(min_exp: i32, max_exp: i32) -> Vec<f64> {
    (min_exp..=max_exp)
        .map(|k| real::pow(2.0, k as f64))
        .collect()
}

/// Sampled N-function diagnostics: vanishing at zero, monotonicity, convexity
/// (through divided differences) and the slope ratios `phi(x, t) / t` at the
/// grid ends.
#[derive(Clone, Copy, Debug)]
pub struct NFunctionReport {
    pub zero_at_origin: bool,
    pub nondecreasing: bool,
    pub convex: bool,
    pub slope_at_small_t: f64,
    pub slope_at_large_t: f64,
}

impl NFunctionReport {
    pub fn sublinear_at_zero(&self) -> bool {
        self.slope_at_small_t < 1e-2
    }

    pub fn superlinear_at_infinity(&self) -> bool {
        self.slope_at_large_t > 1e2
    }

    pub fn looks_like_nfunction(&self) -> bool {
        self.zero_at_origin
            && self.nondecreasing
            && self.convex
            && self.sublinear_at_zero()
            && self.superlinear_at_infinity()
    }
}

pub fn nfunction_probe(
    phi: &MusielakFunction,
    x_samples: &[[f64; 2]],
    t_grid: &[f64],
) -> NFunctionReport {
    let mut zero_at_origin = true;
    let mut nondecreasing = true;
    let mut convex = true;
    let mut slope_small = f64::INFINITY;
    let mut slope_large = 0.0f64;
    for x in x_samples {
        if real::abs(phi.eval(x, 0.0)) > 1e-12 {
            zero_at_origin = false;
        }
        let vals: Vec<f64> = t_grid.iter().map(|&t| phi.eval(x, t)).collect();
        for w in vals.windows(2) {
            if w[1] < w[0] - 1e-12 * real::abs(w[0]).max(1.0) {
                nondecreasing = false;
            }
        }
        for k in 1..t_grid.len().saturating_sub(1) {
            let s_left = (vals[k] - vals[k - 1]) / (t_grid[k] - t_grid[k - 1]);
            let s_right = (vals[k + 1] - vals[k]) / (t_grid[k + 1] - t_grid[k]);
            let scale = real::abs(s_left).max(real::abs(s_right)).max(1e-300);
            if s_right < s_left - 1e-9 * scale {
                convex = false;
            }
        }
        if let (Some(&t0), Some(&t1)) = (t_grid.first(), t_grid.last()) {
            slope_small = slope_small.min(phi.eval(x, t0) / t0);
            slope_large = slope_large.max(phi.eval(x, t1) / t1);
        }
    }
    NFunctionReport {
        zero_at_origin,
        nondecreasing,
        convex,
        slope_at_small_t: slope_small,
        slope_at_large_t: slope_large,
    }
}

/// Sampled log-Hoelder modulus for variable exponents: the smallest `A` with
/// `|p(x) - p(y)| <= A / log(1/|x - y|)` over the given close pairs. Returns
/// `None` for constant-exponent or custom functions.
pub fn log_holder_estimate(
    phi: &MusielakFunction,
    pairs: &[([f64; 2], [f64; 2])],
) -> Option<f64> {
    if !phi.is_variable_exponent() {
        return None;
    }
    let mut a_max = 0.0f64;
    for (x, y) in pairs {
        let d = real::hypot(x[0] - y[0], x[1] - y[1]);
        if d <= 0.0 || d > 0.5 {
            continue;
        }
        let px = phi.exponent_at(x)?;
        let py = phi.exponent_at(y)?;
        a_max = a_max.max(real::abs(px - py) * real::ln(1.0 / d));
    }
    Some(a_max)
}
