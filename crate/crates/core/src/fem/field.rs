//! P1 spaces with homogeneous Dirichlet boundary and piecewise linear fields.

use alloc::sync::Arc;
use alloc::vec::Vec;

use super::mesh::Mesh;
use super::quadrature::QuadratureRule;
use super::FemError;
use crate::real;

const NO_DOF: usize = usize::MAX;

/// Conforming P1 space on a [`Mesh`] with zero trace on the boundary.
/// Degrees of freedom are the interior vertices in vertex order.
#[derive(Clone, Debug)]
pub struct FemSpace {
    mesh: Mesh,
    dof_of_vertex: Vec<usize>,
    vertex_of_dof: Vec<usize>,
    quad: QuadratureRule,
}

impl FemSpace {
    pub fn new(mesh: Mesh) -> FemSpace {
        let quad = QuadratureRule::default_for_dim(mesh.dim());
        Self::with_quadrature(mesh, quad)
    }

    pub fn with_quadrature(mesh: Mesh, quad: QuadratureRule) -> FemSpace {
        let mut dof_of_vertex = alloc::vec![NO_DOF; mesh.n_vertices()];
        let mut vertex_of_dof = Vec::new();
        for v in 0..mesh.n_vertices() {
            if !mesh.is_boundary(v) {
                dof_of_vertex[v] = vertex_of_dof.len();
                vertex_of_dof.push(v);
            }
        }
        FemSpace {
            mesh,
            dof_of_vertex,
            vertex_of_dof,
            quad,
        }
    }

    /// Builds the mesh and wraps the space into an `Arc` in one go.
    pub fn build(dim: usize, m: usize) -> Result<Arc<FemSpace>, FemError> {
        Ok(Arc::new(FemSpace::new(Mesh::unit(dim, m)?)))
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quad
    }

    pub fn n_dofs(&self) -> usize {
        self.vertex_of_dof.len()
    }

    pub fn dof_of_vertex(&self, v: usize) -> Option<usize> {
        let d = self.dof_of_vertex[v];
        (d != NO_DOF).then_some(d)
    }

    pub fn vertex_of_dof(&self, dof: usize) -> usize {
        self.vertex_of_dof[dof]
    }

    pub fn zero_function(self: &Arc<Self>) -> FemFunction {
        FemFunction {
            space: Arc::clone(self),
            coeffs: alloc::vec![0.0; self.n_dofs()],
        }
    }

    pub fn function_from_coeffs(
        self: &Arc<Self>,
        coeffs: Vec<f64>,
    ) -> Result<FemFunction, FemError> {
        if coeffs.len() != self.n_dofs() {
            return Err(FemError::CoefficientLength {
                expected: self.n_dofs(),
                got: coeffs.len(),
            });
        }
        Ok(FemFunction {
            space: Arc::clone(self),
            coeffs,
        })
    }

    /// Nodal interpolation (the restriction operator onto the space): the
    /// coefficient at every interior vertex is the point value of `v`.
    /// Rejects functions whose boundary values exceed `trace_tol`.
    pub fn restrict(
        self: &Arc<Self>,
        v: impl Fn(&[f64; 2]) -> f64,
        trace_tol: f64,
    ) -> Result<FemFunction, FemError> {
        for b in self.mesh.boundary_vertices() {
            let val = v(&self.mesh.vertex(b));
            if real::abs(val) > trace_tol {
                return Err(FemError::TraceViolation {
                    vertex: b,
                    value: val,
                });
            }
        }
        let coeffs = self
            .vertex_of_dof
            .iter()
            .map(|&vert| v(&self.mesh.vertex(vert)))
            .collect();
        Ok(FemFunction {
            space: Arc::clone(self),
            coeffs,
        })
    }
}

/// P1 field with homogeneous Dirichlet data: one coefficient per interior
/// vertex, zero on boundary vertices.
#[derive(Clone, Debug)]
pub struct FemFunction {
    space: Arc<FemSpace>,
    coeffs: Vec<f64>,
}

impl FemFunction {
    pub fn space(&self) -> &Arc<FemSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Value at a vertex (zero on the boundary by convention).
    pub fn vertex_value(&self, v: usize) -> f64 {
        match self.space.dof_of_vertex(v) {
            Some(d) => self.coeffs[d],
            None => 0.0,
        }
    }

    /// Value at a barycentric point of cell `c`.
    pub fn value_in_cell(&self, c: usize, bary: &[f64; 3]) -> f64 {
        let ids = self.space.mesh().cell(c);
        ids.iter()
            .enumerate()
            .map(|(i, &v)| bary[i] * self.vertex_value(v))
            .sum()
    }

    /// Gradient on cell `c` (constant for P1).
    pub fn gradient_in_cell(&self, c: usize) -> [f64; 2] {
        let geom = self.space.mesh().cell_geom(c);
        let mut g = [0.0, 0.0];
        for i in 0..geom.nv {
            let val = self.vertex_value(geom.verts[i]);
            g[0] += val * geom.grads[i][0];
            g[1] += val * geom.grads[i][1];
        }
        g
    }

    /// Per-vertex values including the boundary zeros.
    pub fn to_nodal(&self) -> NodalField {
        NodalField {
            values: (0..self.space.mesh().n_vertices())
                .map(|v| self.vertex_value(v))
                .collect(),
        }
    }

    /// `self += alpha * dir` on the coefficient vector.
    pub fn axpy(&mut self, alpha: f64, dir: &[f64]) {
        for (c, d) in self.coeffs.iter_mut().zip(dir) {
            *c += alpha * d;
        }
    }

    /// L2 norm over the domain, computed with the space quadrature (exact for
    /// P1 fields since the rules integrate quadratics).
    pub fn l2_norm(&self) -> f64 {
        real::sqrt(self.l2_inner(self))
    }

    pub fn l2_distance(&self, other: &FemFunction) -> f64 {
        let mesh = self.space.mesh();
        let quad = self.space.quadrature();
        let mut acc = 0.0;
        for c in 0..mesh.n_cells() {
            let measure = mesh.cell_geom(c).measure;
            for (bary, w) in quad.iter() {
                let d = self.value_in_cell(c, bary) - other.value_in_cell(c, bary);
                acc += w * measure * d * d;
            }
        }
        real::sqrt(acc)
    }

    fn l2_inner(&self, other: &FemFunction) -> f64 {
        let mesh = self.space.mesh();
        let quad = self.space.quadrature();
        let mut acc = 0.0;
        for c in 0..mesh.n_cells() {
            let measure = mesh.cell_geom(c).measure;
            for (bary, w) in quad.iter() {
                acc += w * measure * self.value_in_cell(c, bary) * other.value_in_cell(c, bary);
            }
        }
        acc
    }
}

/// Plain per-vertex values without a boundary constraint; the field type the
/// modular and norm routines operate on.
#[derive(Clone, Debug)]
pub struct NodalField {
    values: Vec<f64>,
}

impl NodalField {
    pub fn from_values(values: Vec<f64>) -> NodalField {
        NodalField { values }
    }

    pub fn constant(mesh: &Mesh, value: f64) -> NodalField {
        NodalField {
            values: alloc::vec![value; mesh.n_vertices()],
        }
    }

    pub fn interpolate(mesh: &Mesh, f: impl Fn(&[f64; 2]) -> f64) -> NodalField {
        NodalField {
            values: (0..mesh.n_vertices()).map(|v| f(&mesh.vertex(v))).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// View of a piecewise polynomial scalar field used by modular integrals:
/// either P1 (per-vertex values) or piecewise constant (one value per cell).
#[derive(Clone, Copy, Debug)]
pub enum FieldView<'a> {
    Nodal(&'a [f64]),
    PerCell(&'a [f64]),
}
