//! Assembly of the constant matrices of the Galerkin schemes.

use super::banded::BandedMatrix;
use super::quadrature::QuadratureRule;
use super::space::FemSpace;
use crate::{Error, Result};

/// Which factor of a bilinear form is differentiated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    Value,
    Derivative,
}

/// Matrix of `∫ a(φ_i) b(ψ_j) dx` with `φ_i` from `rows`, `ψ_j` from `cols`,
/// where `a`/`b` are the basis functions or their derivatives.
pub fn assemble_form(rows: &FemSpace, cols: &FemSpace, row: Factor, col: Factor) -> Result<BandedMatrix> {
    if !rows.compatible(cols) {
        return Err(Error::config(
            "bilinear form needs spaces on the same mesh with the same degree",
        ));
    }
    let r = rows.degree();
    // integrand degree is at most 2r
    let table = rows.table(&QuadratureRule::exact_for(2 * r));
    let mut m = BandedMatrix::zeros(rows, cols);
    let nl = r + 1;
    let mut local = vec![0.0; nl * nl];
    for cell in 0..rows.mesh().n_cells() {
        local.iter_mut().for_each(|v| *v = 0.0);
        for q in 0..table.n_points() {
            let w = table.weights()[q];
            let a = match row {
                Factor::Value => table.phi(q),
                Factor::Derivative => table.dphi(q),
            };
            let b = match col {
                Factor::Value => table.phi(q),
                Factor::Derivative => table.dphi(q),
            };
            for k in 0..nl {
                for l in 0..nl {
                    local[k * nl + l] += a[k] * b[l] * w;
                }
            }
        }
        for k in 0..nl {
            let Some(i) = rows.local_dof(cell, k) else { continue };
            for l in 0..nl {
                if let Some(j) = cols.local_dof(cell, l) {
                    m.add(i, j, local[k * nl + l]);
                }
            }
        }
    }
    Ok(m)
}

/// Mass matrix `(φ_i, φ_j)`.
pub fn assemble_mass(space: &FemSpace) -> BandedMatrix {
    assemble_form(space, space, Factor::Value, Factor::Value).expect("space is compatible with itself")
}

/// Mass matrix between two spaces, `(φ_i, ψ_j)`.
pub fn assemble_cross_mass(rows: &FemSpace, cols: &FemSpace) -> Result<BandedMatrix> {
    assemble_form(rows, cols, Factor::Value, Factor::Value)
}

/// Stiffness matrix `(φ_i′, φ_j′)`.
pub fn assemble_stiffness(space: &FemSpace) -> BandedMatrix {
    assemble_form(space, space, Factor::Derivative, Factor::Derivative).expect("space is compatible with itself")
}

/// Derivative coupling `G[i][j] = (χ_i′, ψ_j)` with `χ` from `rows`.
pub fn assemble_coupling(rows: &FemSpace, cols: &FemSpace) -> Result<BandedMatrix> {
    assemble_form(rows, cols, Factor::Derivative, Factor::Value)
}
