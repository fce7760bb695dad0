//! Spatial discretization: meshes, P1 spaces with zero boundary trace,
//! quadrature, residual/Jacobian assembly and the banded direct solver.

mod assembly;
mod field;
mod linalg;
mod mesh;
mod quadrature;

pub use assembly::{
    assemble_jacobian, assemble_picard_matrix, assemble_residual, gradient_values,
};
pub use field::{FemFunction, FemSpace, FieldView, NodalField};
pub use linalg::{BandedLu, LinalgError, SparseMatrix};
pub use mesh::{CellGeom, Mesh};
pub use quadrature::{QuadratureRule, RefDomain};

#[derive(Clone, Debug, PartialEq)]
pub enum FemError {
    /// Meshes need a resolution of at least two cells per direction.
    InvalidResolution { m: usize },
    UnsupportedDimension { dim: usize },
    /// A function restricted onto the space has a nonzero boundary value.
    TraceViolation { vertex: usize, value: f64 },
    /// Non-finite integrand during assembly.
    AssemblyNan { cell: usize },
    /// Two fields on different spaces were combined.
    SpaceMismatch,
    CoefficientLength { expected: usize, got: usize },
    Linear(LinalgError),
}

impl core::fmt::Display for FemError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FemError::InvalidResolution { m } => {
                write!(f, "mesh resolution must be at least 2, got {m}")
            }
            FemError::UnsupportedDimension { dim } => {
                write!(f, "only dimensions 1 and 2 are supported, got {dim}")
            }
            FemError::TraceViolation { vertex, value } => {
                write!(
                    f,
                    "restricted function is nonzero ({value}) at boundary vertex {vertex}"
                )
            }
            FemError::AssemblyNan { cell } => {
                write!(f, "non-finite integrand while assembling cell {cell}")
            }
            FemError::SpaceMismatch => write!(f, "fields live on different spaces"),
            FemError::CoefficientLength { expected, got } => {
                write!(f, "coefficient vector has length {got}, expected {expected}")
            }
            FemError::Linear(e) => write!(f, "linear solve failed: {e}"),
        }
    }
}

impl core::error::Error for FemError {}

impl From<LinalgError> for FemError {
    fn from(e: LinalgError) -> FemError {
        FemError::Linear(e)
    }
}
