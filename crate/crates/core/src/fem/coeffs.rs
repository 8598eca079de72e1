use std::sync::Arc;

use super::assembly::assemble_mass;
use super::quadrature::{quadrature_for, QuadratureRule};
use super::space::FemSpace;
use crate::linalg::{factor, FactoredOperator};
use crate::{Error, Result};

/// One finite element function: a space and its nodal coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Coeffs {
    space: Arc<FemSpace>,
    values: Vec<f64>,
}

impl Coeffs {
    pub fn new(space: Arc<FemSpace>, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.dof_count() {
            return Err(Error::usage(format!(
                "{} coefficients for a space with {} DOFs",
                values.len(),
                space.dof_count()
            )));
        }
        Ok(Self { space, values })
    }

    pub fn zeros(space: Arc<FemSpace>) -> Self {
        let values = vec![0.0; space.dof_count()];
        Self { space, values }
    }

    pub fn space(&self) -> &Arc<FemSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value and derivative at `x`; see [`evaluate`].
    pub fn evaluate(&self, x: f64) -> Result<(f64, f64)> {
        evaluate(&self.space, &self.values, x)
    }
}

/// Value and derivative of the function with coefficients `values` at `x`.
///
/// At an interior vertex the derivative is taken from the left cell; at `a`
/// from the first cell. Periodic spaces wrap `x` into `[a, b)` first.
pub fn evaluate(space: &FemSpace, values: &[f64], x: f64) -> Result<(f64, f64)> {
    let mesh = space.mesh();
    let x = if space.is_periodic() {
        mesh.wrap(x)
    } else if x < mesh.a() || x > mesh.b() || x.is_nan() {
        return Err(Error::Domain {
            x,
            a: mesh.a(),
            b: mesh.b(),
        });
    } else {
        x
    };
    let (cell, xi) = mesh.locate(x);
    let nl = space.degree() + 1;
    let mut c = [0.0; super::MAX_DEGREE + 1];
    let mut phi = [0.0; super::MAX_DEGREE + 1];
    let mut dphi = [0.0; super::MAX_DEGREE + 1];
    space.gather(values, cell, &mut c[..nl]);
    space.basis().values(xi, &mut phi[..nl]);
    space.basis().derivatives(xi, &mut dphi[..nl]);
    let mut v = 0.0;
    let mut d = 0.0;
    for k in 0..nl {
        v += c[k] * phi[k];
        d += c[k] * dphi[k];
    }
    Ok((v, d / mesh.dx()))
}

/// Rule used for loads with non-polynomial integrands.
pub fn transcendental_rule(degree: usize) -> QuadratureRule {
    QuadratureRule::gauss_legendre((2 * degree + 2).max(6))
}

/// `load_i = ∫ f φ_i dx` by cellwise quadrature with `rule`.
pub fn load_vector(space: &FemSpace, rule: &QuadratureRule, mut f: impl FnMut(f64) -> f64) -> Vec<f64> {
    let table = space.table(rule);
    let mesh = space.mesh();
    let nl = space.degree() + 1;
    let mut load = vec![0.0; space.dof_count()];
    for cell in 0..mesh.n_cells() {
        let x0 = mesh.vertex(cell);
        for q in 0..table.n_points() {
            let fx = f(x0 + table.points()[q] * mesh.dx()) * table.weights()[q];
            let phi = table.phi(q);
            for k in 0..nl {
                if let Some(i) = space.local_dof(cell, k) {
                    load[i] += fx * phi[k];
                }
            }
        }
    }
    load
}

/// Load `(∂_x F, ψ_j)` of the broken derivative of `F ∈ from` against the
/// basis of `to`, integrated exactly.
pub fn broken_derivative_load(from: &FemSpace, values: &[f64], to: &FemSpace) -> Result<Vec<f64>> {
    if !from.compatible(to) {
        return Err(Error::config("derivative transfer needs matching mesh and degree"));
    }
    let r = from.degree();
    let table = from.table(&quadrature_for(2 * r - 1));
    let nl = r + 1;
    let mut c = vec![0.0; nl];
    let mut load = vec![0.0; to.dof_count()];
    for cell in 0..from.mesh().n_cells() {
        from.gather(values, cell, &mut c);
        for q in 0..table.n_points() {
            let d: f64 = c.iter().zip(table.dphi(q)).map(|(a, b)| a * b).sum();
            let w = d * table.weights()[q];
            for (k, p) in table.phi(q).iter().enumerate() {
                if let Some(j) = to.local_dof(cell, k) {
                    load[j] += w * p;
                }
            }
        }
    }
    Ok(load)
}

/// L² projection onto one space, with the mass matrix factored once.
#[derive(Debug, Clone)]
pub struct Projector {
    space: Arc<FemSpace>,
    mass: FactoredOperator,
}

impl Projector {
    pub fn new(space: Arc<FemSpace>) -> Result<Self> {
        let mass = factor(&assemble_mass(&space))?;
        Ok(Self { space, mass })
    }

    pub fn space(&self) -> &Arc<FemSpace> {
        &self.space
    }

    /// Solves `M c = load`.
    pub fn solve_load(&self, load: &[f64]) -> Result<Vec<f64>> {
        self.mass.solve(load)
    }

    pub fn project(&self, f: impl FnMut(f64) -> f64) -> Result<Vec<f64>> {
        let load = load_vector(&self.space, &transcendental_rule(self.space.degree()), f);
        self.mass.solve(&load)
    }

    /// Projection of the broken derivative of `values ∈ from`.
    pub fn project_derivative(&self, from: &FemSpace, values: &[f64]) -> Result<Vec<f64>> {
        let load = broken_derivative_load(from, values, &self.space)?;
        self.mass.solve(&load)
    }
}

/// `P f`, the L² projection of `f` onto `space`.
pub fn l2_project(space: &FemSpace, f: impl FnMut(f64) -> f64) -> Result<Vec<f64>> {
    let load = load_vector(space, &transcendental_rule(space.degree()), f);
    factor(&assemble_mass(space))?.solve(&load)
}

/// Nodal interpolant of `f`.
pub fn interpolate(space: &FemSpace, f: impl FnMut(f64) -> f64) -> Vec<f64> {
    space.node_coords().iter().copied().map(f).collect()
}

/// Nodal interpolation of `values ∈ from` into `to` (any degree, same interval).
pub fn transfer(from: &FemSpace, values: &[f64], to: &FemSpace) -> Result<Vec<f64>> {
    let (m, n) = (from.mesh(), to.mesh());
    let tol = 1e-12 * m.length();
    if (m.a() - n.a()).abs() > tol || (m.b() - n.b()).abs() > tol {
        return Err(Error::config("transfer between different intervals"));
    }
    to.node_coords()
        .iter()
        .map(|&x| evaluate(from, values, x.clamp(m.a(), m.b())).map(|(v, _)| v))
        .collect()
}
