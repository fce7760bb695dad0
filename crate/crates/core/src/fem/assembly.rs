//! Assembly of the backward Euler residual and its linearizations.
//!
//! One step of the scheme seeks `u` with
//!
//! ```text
//! integral[ (b(u) - b(u_prev))/tau v + a(x, grad u).grad v + K(u).grad v ] dx
//!     = integral[ f(x, t_n) v ] dx        for all test functions v
//! ```
//!
//! Per-cell contributions are independent; with the `parallel` feature they
//! are computed concurrently and combined by an ordered reduction, so results
//! are bitwise identical for any worker count.

use alloc::sync::Arc;
use alloc::vec::Vec;

use super::field::FemFunction;
use super::linalg::SparseMatrix;
use super::FemError;
use crate::problem::ProblemSpec;

#[cfg(feature = "parallel")]
fn map_cells<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_cells<T>(n: usize, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..n).map(f).collect()
}

fn check_shared_space(u: &FemFunction, u_prev: &FemFunction) -> Result<(), FemError> {
    if !Arc::ptr_eq(u.space(), u_prev.space()) {
        return Err(FemError::SpaceMismatch);
    }
    Ok(())
}

/// Gradient magnitude of a P1 field on every cell (piecewise constant).
pub fn gradient_values(u: &FemFunction) -> Vec<f64> {
    let mesh = u.space().mesh();
    (0..mesh.n_cells())
        .map(|c| {
            let g = u.gradient_in_cell(c);
            crate::real::hypot(g[0], g[1])
        })
        .collect()
}

/// Residual vector of the scheme at state `u`; the zero vector identifies the
/// discrete solution at `t_n`.
pub fn assemble_residual(
    spec: &ProblemSpec,
    u: &FemFunction,
    u_prev: &FemFunction,
    tau: f64,
    t_n: f64,
) -> Result<Vec<f64>, FemError> {
    check_shared_space(u, u_prev)?;
    assert!(tau > 0.0, "time step must be positive");
    let space = u.space();
    let mesh = space.mesh();
    let quad = space.quadrature();
    let locals = map_cells(mesh.n_cells(), |c| {
        let geom = mesh.cell_geom(c);
        let grad_u = u.gradient_in_cell(c);
        let mut local = [0.0f64; 3];
        for (bary, w) in quad.iter() {
            let x = mesh.point_in_cell(c, bary);
            let mut uq = 0.0;
            let mut upq = 0.0;
            for i in 0..geom.nv {
                uq += bary[i] * u.vertex_value(geom.verts[i]);
                upq += bary[i] * u_prev.vertex_value(geom.verts[i]);
            }
            let bt = (spec.b.eval(uq) - spec.b.eval(upq)) / tau;
            let fq = spec.source.eval(&x, t_n);
            let aq = spec.stress.eval(&x, grad_u);
            let kq = spec.convection.eval(uq);
            let scale = w * geom.measure;
            for i in 0..geom.nv {
                let g = geom.grads[i];
                local[i] += scale
                    * (bt * bary[i] + aq[0] * g[0] + aq[1] * g[1] + kq[0] * g[0] + kq[1] * g[1]
                        - fq * bary[i]);
            }
        }
        local
    });
    let mut residual = alloc::vec![0.0f64; space.n_dofs()];
    for (c, local) in locals.iter().enumerate() {
        let geom = mesh.cell_geom(c);
        if !local.iter().take(geom.nv).all(|v| v.is_finite()) {
            return Err(FemError::AssemblyNan { cell: c });
        }
        for i in 0..geom.nv {
            if let Some(dof) = space.dof_of_vertex(geom.verts[i]) {
                residual[dof] += local[i];
            }
        }
    }
    Ok(residual)
}

#[derive(Clone, Copy)]
enum DiffusionLinearization {
    /// Exact stress Jacobian (regularized for the p-Laplacian).
    Newton,
    /// Scalar secant diffusivity `a(grad u).grad u / |grad u|^2`, the frozen
    /// coefficient matrix used by the Picard fallback.
    FrozenSecant,
}

fn assemble_matrix(
    spec: &ProblemSpec,
    u: &FemFunction,
    tau: f64,
    kind: DiffusionLinearization,
) -> Result<SparseMatrix, FemError> {
    assert!(tau > 0.0, "time step must be positive");
    let space = u.space();
    let mesh = space.mesh();
    let quad = space.quadrature();
    let locals = map_cells(mesh.n_cells(), |c| {
        let geom = mesh.cell_geom(c);
        let grad_u = u.gradient_in_cell(c);
        let mut local = [[0.0f64; 3]; 3];
        for (bary, w) in quad.iter() {
            let x = mesh.point_in_cell(c, bary);
            let mut uq = 0.0;
            for i in 0..geom.nv {
                uq += bary[i] * u.vertex_value(geom.verts[i]);
            }
            let bp = spec.b.deriv(uq) / tau;
            let kd = spec.convection.deriv(uq);
            let scale = w * geom.measure;
            // flux = D grad(trial), with D the chosen linearization
            let d = match kind {
                DiffusionLinearization::Newton => spec.stress.jacobian(&x, grad_u),
                DiffusionLinearization::FrozenSecant => {
                    let a = spec.stress.eval(&x, grad_u);
                    let eps = crate::problem::GRADIENT_REGULARIZATION;
                    let n2 = grad_u[0] * grad_u[0] + grad_u[1] * grad_u[1] + eps * eps;
                    let mu = (a[0] * grad_u[0] + a[1] * grad_u[1]) / n2;
                    [[mu, 0.0], [0.0, mu]]
                }
            };
            for j in 0..geom.nv {
                let gj = geom.grads[j];
                let flux = [
                    d[0][0] * gj[0] + d[0][1] * gj[1],
                    d[1][0] * gj[0] + d[1][1] * gj[1],
                ];
                for i in 0..geom.nv {
                    let gi = geom.grads[i];
                    local[i][j] += scale
                        * (bp * bary[j] * bary[i]
                            + flux[0] * gi[0]
                            + flux[1] * gi[1]
                            + (kd[0] * gi[0] + kd[1] * gi[1]) * bary[j]);
                }
            }
        }
        local
    });
    let mut triplets = Vec::new();
    for (c, local) in locals.iter().enumerate() {
        let geom = mesh.cell_geom(c);
        for i in 0..geom.nv {
            let Some(di) = space.dof_of_vertex(geom.verts[i]) else {
                continue;
            };
            for j in 0..geom.nv {
                let v = local[i][j];
                if !v.is_finite() {
                    return Err(FemError::AssemblyNan { cell: c });
                }
                if let Some(dj) = space.dof_of_vertex(geom.verts[j]) {
                    triplets.push((di, dj, v));
                }
            }
        }
    }
    Ok(SparseMatrix::from_triplets(space.n_dofs(), &triplets))
}

/// Jacobian of [`assemble_residual`] with respect to the coefficients of `u`:
/// `b'(u)/tau` mass block, stress Jacobian diffusion block and the convection
/// derivative coupling. Symmetric when the convection vanishes and the stress
/// Jacobian is symmetric.
pub fn assemble_jacobian(
    spec: &ProblemSpec,
    u: &FemFunction,
    tau: f64,
) -> Result<SparseMatrix, FemError> {
    assemble_matrix(spec, u, tau, DiffusionLinearization::Newton)
}

/// Linearized iteration matrix with the diffusion coefficient frozen at the
/// current gradient (used for the Picard fallback of the stepper); its root
/// coincides with the Newton root since only the operator, not the residual,
/// changes.
pub fn assemble_picard_matrix(
    spec: &ProblemSpec,
    u: &FemFunction,
    tau: f64,
) -> Result<SparseMatrix, FemError> {
    assemble_matrix(spec, u, tau, DiffusionLinearization::FrozenSecant)
}
