use std::fmt;
use std::str::FromStr;

use super::mesh::UniformMesh;
use super::quadrature::QuadratureRule;
use crate::{Error, Result};

/// Highest supported element degree.
pub const MAX_DEGREE: usize = 4;

/// Endpoint treatment of a Lagrange space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryVariant {
    /// All of 𝓟^r.
    Free,
    /// 𝓟^r_0: both endpoint values fixed to zero (those DOFs are removed).
    ZeroEndpoint,
    /// 𝓟^r_p: the two endpoint DOFs are identified.
    Periodic,
}

impl fmt::Display for BoundaryVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryVariant::Free => "free",
            BoundaryVariant::ZeroEndpoint => "zero",
            BoundaryVariant::Periodic => "periodic",
        })
    }
}

impl FromStr for BoundaryVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(Self::Free),
            "zero" => Ok(Self::ZeroEndpoint),
            "periodic" => Ok(Self::Periodic),
            _ => Err(Error::config(format!("unknown boundary variant '{s}'"))),
        }
    }
}

/// Lagrange basis of degree `r` on `[0, 1]` with equispaced nodes `k/r`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeBasis {
    degree: usize,
    nodes: Vec<f64>,
    denoms: Vec<f64>,
}

impl LagrangeBasis {
    pub fn new(degree: usize) -> Self {
        assert!((1..=MAX_DEGREE).contains(&degree));
        let nodes: Vec<f64> = (0..=degree).map(|k| k as f64 / degree as f64).collect();
        let denoms = (0..=degree)
            .map(|k| (0..=degree).filter(|&m| m != k).map(|m| nodes[k] - nodes[m]).product())
            .collect();
        Self { degree, nodes, denoms }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_local(&self) -> usize {
        self.degree + 1
    }

    /// Values `φ_k(ξ)` for every local node `k`.
    pub fn values(&self, xi: f64, out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate().take(self.n_local()) {
            let mut p = 1.0;
            for (m, &xm) in self.nodes.iter().enumerate() {
                if m != k {
                    p *= xi - xm;
                }
            }
            *o = p / self.denoms[k];
        }
    }

    /// Reference derivatives `dφ_k/dξ`.
    pub fn derivatives(&self, xi: f64, out: &mut [f64]) {
        let n = self.n_local();
        for (k, o) in out.iter_mut().enumerate().take(n) {
            let mut s = 0.0;
            for l in 0..n {
                if l == k {
                    continue;
                }
                let mut p = 1.0;
                for (m, &xm) in self.nodes.iter().enumerate() {
                    if m != k && m != l {
                        p *= xi - xm;
                    }
                }
                s += p;
            }
            *o = s / self.denoms[k];
        }
    }
}

/// Continuous Lagrange finite element space on a uniform mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct FemSpace {
    mesh: UniformMesh,
    degree: usize,
    bc: BoundaryVariant,
    dof_count: usize,
    node_coords: Vec<f64>,
    basis: LagrangeBasis,
}

impl FemSpace {
    pub fn new(mesh: UniformMesh, degree: usize, bc: BoundaryVariant) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&degree) {
            return Err(Error::config(format!(
                "element degree must be in 1..={MAX_DEGREE}, got {degree}"
            )));
        }
        let n_nodes = degree * mesh.n_cells() + 1;
        let dof_count = match bc {
            BoundaryVariant::Free => n_nodes,
            BoundaryVariant::ZeroEndpoint => n_nodes - 2,
            BoundaryVariant::Periodic => n_nodes - 1,
        };
        let offset = usize::from(bc == BoundaryVariant::ZeroEndpoint);
        let node_coords = (0..dof_count)
            .map(|i| global_node_coord(&mesh, degree, i + offset))
            .collect();
        Ok(Self {
            mesh,
            degree,
            bc,
            dof_count,
            node_coords,
            basis: LagrangeBasis::new(degree),
        })
    }

    /// Convenience constructor from raw mesh parameters.
    pub fn build(a: f64, b: f64, n_cells: usize, degree: usize, bc: BoundaryVariant) -> Result<Self> {
        Self::new(UniformMesh::new(a, b, n_cells)?, degree, bc)
    }

    /// Same mesh and degree, different endpoint treatment.
    pub fn with_bc(&self, bc: BoundaryVariant) -> Self {
        Self::new(self.mesh.clone(), self.degree, bc).expect("valid space stays valid")
    }

    pub fn mesh(&self) -> &UniformMesh {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn bc(&self) -> BoundaryVariant {
        self.bc
    }

    pub fn dof_count(&self) -> usize {
        self.dof_count
    }

    pub fn node_coords(&self) -> &[f64] {
        &self.node_coords
    }

    pub fn basis(&self) -> &LagrangeBasis {
        &self.basis
    }

    pub fn is_periodic(&self) -> bool {
        self.bc == BoundaryVariant::Periodic
    }

    /// Number of global nodes `r·N + 1`, counting both endpoints.
    pub fn global_node_count(&self) -> usize {
        self.degree * self.mesh.n_cells() + 1
    }

    /// DOF living on global node `g`, if any.
    pub fn dof_of_node(&self, g: usize) -> Option<usize> {
        let last = self.global_node_count() - 1;
        match self.bc {
            BoundaryVariant::Free => Some(g),
            BoundaryVariant::ZeroEndpoint => (g != 0 && g != last).then(|| g - 1),
            BoundaryVariant::Periodic => Some(if g == last { 0 } else { g }),
        }
    }

    /// Position of DOF `i` along the chain of global nodes.
    pub fn node_of_dof(&self, i: usize) -> usize {
        match self.bc {
            BoundaryVariant::ZeroEndpoint => i + 1,
            _ => i,
        }
    }

    /// Global DOF of local node `k` in `cell`.
    #[inline]
    pub fn local_dof(&self, cell: usize, k: usize) -> Option<usize> {
        self.dof_of_node(cell * self.degree + k)
    }

    /// Spaces over the same mesh with the same degree.
    pub fn compatible(&self, other: &FemSpace) -> bool {
        self.degree == other.degree && self.mesh.same_as(&other.mesh)
    }

    /// Tabulated basis values at the points of `rule`.
    pub fn table(&self, rule: &QuadratureRule) -> BasisTable {
        BasisTable::new(&self.basis, rule, self.mesh.dx())
    }

    /// Local coefficients of cell `cell` (missing DOFs read as zero).
    #[inline]
    pub fn gather(&self, values: &[f64], cell: usize, out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate().take(self.degree + 1) {
            *o = self.local_dof(cell, k).map_or(0.0, |i| values[i]);
        }
    }
}

fn global_node_coord(mesh: &UniformMesh, degree: usize, g: usize) -> f64 {
    let cell = g / degree;
    let k = g % degree;
    if k == 0 {
        mesh.vertex(cell)
    } else {
        mesh.vertex(cell) + mesh.dx() * k as f64 / degree as f64
    }
}

/// Basis values and physical derivatives at the points of one rule, plus the
/// physical weights `w_q·dx`.
#[derive(Debug, Clone)]
pub struct BasisTable {
    n_local: usize,
    n_points: usize,
    /// `phi[q * n_local + k]`
    phi: Vec<f64>,
    /// physical derivative, same layout
    dphi: Vec<f64>,
    weights: Vec<f64>,
    points: Vec<f64>,
}

impl BasisTable {
    fn new(basis: &LagrangeBasis, rule: &QuadratureRule, dx: f64) -> Self {
        let nl = basis.n_local();
        let nq = rule.n_points();
        let mut phi = vec![0.0; nq * nl];
        let mut dphi = vec![0.0; nq * nl];
        for (q, &xi) in rule.nodes().iter().enumerate() {
            basis.values(xi, &mut phi[q * nl..(q + 1) * nl]);
            basis.derivatives(xi, &mut dphi[q * nl..(q + 1) * nl]);
            // partition of unity to the last bit: constants must stay in
            // the kernel of the derivative forms
            let row = &mut phi[q * nl..(q + 1) * nl];
            let e = row.iter().sum::<f64>() - 1.0;
            row.iter_mut().for_each(|p| *p -= e / nl as f64);
            let row = &mut dphi[q * nl..(q + 1) * nl];
            row.iter_mut().for_each(|d| *d /= dx);
            let e = row.iter().sum::<f64>();
            row.iter_mut().for_each(|p| *p -= e / nl as f64);
        }
        Self {
            n_local: nl,
            n_points: nq,
            phi,
            dphi,
            weights: rule.weights().iter().map(|w| w * dx).collect(),
            points: rule.nodes().to_vec(),
        }
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_local(&self) -> usize {
        self.n_local
    }

    #[inline]
    pub fn phi(&self, q: usize) -> &[f64] {
        &self.phi[q * self.n_local..(q + 1) * self.n_local]
    }

    #[inline]
    pub fn dphi(&self, q: usize) -> &[f64] {
        &self.dphi[q * self.n_local..(q + 1) * self.n_local]
    }

    /// Physical weights (already scaled by the cell width).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Reference coordinates of the points in `[0, 1]`.
    pub fn points(&self) -> &[f64] {
        &self.points
    }
}
