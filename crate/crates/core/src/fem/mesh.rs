//! Simplicial meshes of the unit interval and unit square.

use alloc::vec::Vec;

use super::FemError;
use crate::real;

/// Conforming simplicial mesh with marked boundary vertices.
///
/// 1D meshes partition `(0,1)` uniformly; 2D meshes triangulate the unit
/// square by splitting each of `m x m` squares along the same diagonal, which
/// keeps refinements nested when `m` doubles.
#[derive(Clone, Debug)]
pub struct Mesh {
    dim: usize,
    resolution: usize,
    vertices: Vec<[f64; 2]>,
    /// Flattened connectivity, `dim + 1` vertex ids per cell.
    cells: Vec<usize>,
    boundary: Vec<bool>,
    h_max: f64,
}

/// Per-cell geometry: vertex ids, coordinates, P1 basis gradients and the
/// cell measure (length or area).
#[derive(Clone, Copy, Debug)]
pub struct CellGeom {
    pub nv: usize,
    pub verts: [usize; 3],
    pub coords: [[f64; 2]; 3],
    pub grads: [[f64; 2]; 3],
    pub measure: f64,
}

impl Mesh {
    /// Uniform mesh of the unit domain: `dim = 1` partitions `(0,1)` into `m`
    /// segments, `dim = 2` triangulates the unit square into `2 m^2`
    /// triangles.
    pub fn unit(dim: usize, m: usize) -> Result<Mesh, FemError> {
        if m < 2 {
            return Err(FemError::InvalidResolution { m });
        }
        match dim {
            1 => Ok(Self::interval(m)),
            2 => Ok(Self::square(m)),
            _ => Err(FemError::UnsupportedDimension { dim }),
        }
    }

    fn interval(m: usize) -> Mesh {
        let h = 1.0 / m as f64;
        let vertices: Vec<[f64; 2]> = (0..=m).map(|i| [i as f64 * h, 0.0]).collect();
        let mut cells = Vec::with_capacity(2 * m);
        for i in 0..m {
            cells.push(i);
            cells.push(i + 1);
        }
        let mut boundary = alloc::vec![false; m + 1];
        boundary[0] = true;
        boundary[m] = true;
        Mesh {
            dim: 1,
            resolution: m,
            vertices,
            cells,
            boundary,
            h_max: h,
        }
    }

    fn square(m: usize) -> Mesh {
        let h = 1.0 / m as f64;
        let stride = m + 1;
        let mut vertices = Vec::with_capacity(stride * stride);
        let mut boundary = Vec::with_capacity(stride * stride);
        for j in 0..=m {
            for i in 0..=m {
                vertices.push([i as f64 * h, j as f64 * h]);
                boundary.push(i == 0 || i == m || j == 0 || j == m);
            }
        }
        let mut cells = Vec::with_capacity(6 * m * m);
        for j in 0..m {
            for i in 0..m {
                let v00 = j * stride + i;
                let v10 = v00 + 1;
                let v01 = v00 + stride;
                let v11 = v01 + 1;
                // Both triangles oriented counterclockwise.
                cells.extend_from_slice(&[v00, v10, v11]);
                cells.extend_from_slice(&[v00, v11, v01]);
            }
        }
        Mesh {
            dim: 2,
            resolution: m,
            vertices,
            cells,
            boundary,
            h_max: h * real::sqrt(2.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Resolution parameter `m` the mesh was built with.
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn vertex(&self, v: usize) -> [f64; 2] {
        self.vertices[v]
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let nv = self.dim + 1;
        &self.cells[c * nv..(c + 1) * nv]
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_vertices()).filter(|&v| self.boundary[v])
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    /// Geometry of cell `c`: coordinates, basis gradients and measure.
    pub fn cell_geom(&self, c: usize) -> CellGeom {
        let ids = self.cell(c);
        match self.dim {
            1 => {
                let a = self.vertices[ids[0]];
                let b = self.vertices[ids[1]];
                let len = b[0] - a[0];
                CellGeom {
                    nv: 2,
                    verts: [ids[0], ids[1], usize::MAX],
                    coords: [a, b, [0.0, 0.0]],
                    grads: [[-1.0 / len, 0.0], [1.0 / len, 0.0], [0.0, 0.0]],
                    measure: real::abs(len),
                }
            }
            2 => {
                let p0 = self.vertices[ids[0]];
                let p1 = self.vertices[ids[1]];
                let p2 = self.vertices[ids[2]];
                let e1 = [p1[0] - p0[0], p1[1] - p0[1]];
                let e2 = [p2[0] - p0[0], p2[1] - p0[1]];
                let det = e1[0] * e2[1] - e1[1] * e2[0];
                let area = 0.5 * real::abs(det);
                // grad lambda_i = J^{-T} grad_ref lambda_i with
                // grad_ref = {(-1,-1), (1,0), (0,1)}.
                let inv = 1.0 / det;
                let g1 = [e2[1] * inv, -e2[0] * inv];
                let g2 = [-e1[1] * inv, e1[0] * inv];
                let g0 = [-g1[0] - g2[0], -g1[1] - g2[1]];
                CellGeom {
                    nv: 3,
                    verts: [ids[0], ids[1], ids[2]],
                    coords: [p0, p1, p2],
                    grads: [g0, g1, g2],
                    measure: area,
                }
            }
            _ => unreachable!("mesh dimension is validated at construction"),
        }
    }

    /// Physical coordinates of a barycentric point inside cell `c`.
    pub fn point_in_cell(&self, c: usize, bary: &[f64; 3]) -> [f64; 2] {
        let ids = self.cell(c);
        let mut x = [0.0, 0.0];
        for (i, &v) in ids.iter().enumerate() {
            let p = self.vertices[v];
            x[0] += bary[i] * p[0];
            x[1] += bary[i] * p[1];
        }
        x
    }
}
