//! Uniform meshes, continuous Lagrange spaces, quadrature and assembly.

mod assembly;
mod banded;
mod coeffs;
mod mesh;
mod quadrature;
mod space;

pub use assembly::{assemble_coupling, assemble_cross_mass, assemble_form, assemble_mass, assemble_stiffness, Factor};
pub use banded::BandedMatrix;
pub use coeffs::{
    broken_derivative_load, evaluate, interpolate, l2_project, load_vector, transcendental_rule, transfer, Coeffs,
    Projector,
};
pub use mesh::UniformMesh;
pub use quadrature::{points_for_degree, quadrature_for, QuadratureRule};
pub use space::{BasisTable, BoundaryVariant, FemSpace, LagrangeBasis, MAX_DEGREE};
