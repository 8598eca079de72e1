//! Right-hand sides of the semidiscrete schemes.
//!
//! The conservative scheme is the mixed Galerkin formulation: besides
//! `H ≈ η` and `U ≈ u` it carries `W ≈ η_x` and `V ≈ u_x`, and each time
//! derivative comes out of a 2×2 saddle-point solve
//!
//! ```text
//! (Ḣ, χ) + (Ẇ, χ′)/6 = (f̃, χ′) + (F_η, χ)      f̃ = P[(1+H)U]
//! (Ẇ, ζ)             = (Ḣ′, ζ)
//! (U̇, ψ) + (V̇, ψ′)/6 = (g̃, ψ′) + (F_u, ψ)      g̃ = P[U²/2 + H]
//! (V̇, ξ)             = (U̇′, ξ)
//! ```
//!
//! The standard scheme solves `(M + S/6)Ḣ = ((1+H)U, χ′) + (F_η, χ)` and the
//! analogue for `U` directly; its `W`, `V` slopes are projections of the
//! derivatives of `Ḣ`, `U̇` so the state layout is shared.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::fem::{
    assemble_coupling, assemble_mass, assemble_stiffness, load_vector, quadrature_for, transcendental_rule,
    BandedMatrix, BasisTable, BoundaryVariant, FemSpace, Projector, QuadratureRule, UniformMesh, MAX_DEGREE,
};
use crate::functionals::{self, Field, InvariantRecord};
use crate::linalg::{factor, FactoredOperator, SaddleOperator};
use crate::{Error, Result};

/// Boundary conditions of the initial-boundary value problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    Periodic,
    /// Solid walls: `η_x = u = 0` at both ends.
    Reflective,
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Periodic => "periodic",
            Self::Reflective => "reflective",
        })
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "periodic" => Ok(Self::Periodic),
            "reflective" => Ok(Self::Reflective),
            other => Err(Error::config(format!(
                "unknown boundary condition '{other}' (expected periodic or reflective)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Conservative,
    Standard,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Conservative => "conservative",
            Self::Standard => "standard",
        })
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "conservative" => Ok(Self::Conservative),
            "standard" => Ok(Self::Standard),
            other => Err(Error::config(format!(
                "unknown scheme '{other}' (expected conservative or standard)"
            ))),
        }
    }
}

/// Source terms `F_η(x, t)`, `F_u(x, t)` of a non-homogeneous problem.
pub trait Forcing: Send + Sync {
    fn eta(&self, x: f64, t: f64) -> f64;
    fn u(&self, x: f64, t: f64) -> f64;
}

/// The four spaces of `(H, W, U, V)`.
#[derive(Debug, Clone)]
pub struct MixedSpaces {
    pub h: Arc<FemSpace>,
    pub w: Arc<FemSpace>,
    pub u: Arc<FemSpace>,
    pub v: Arc<FemSpace>,
    bc: BoundaryCondition,
}

impl MixedSpaces {
    pub fn new(mesh: UniformMesh, degree: usize, bc: BoundaryCondition) -> Result<Self> {
        let (hb, ub) = match bc {
            BoundaryCondition::Periodic => (BoundaryVariant::Periodic, BoundaryVariant::Periodic),
            BoundaryCondition::Reflective => (BoundaryVariant::Free, BoundaryVariant::ZeroEndpoint),
        };
        let h = Arc::new(FemSpace::new(mesh, degree, hb)?);
        let u = if hb == ub { h.clone() } else { Arc::new(h.with_bc(ub)) };
        Ok(Self {
            w: u.clone(),
            v: h.clone(),
            h,
            u,
            bc,
        })
    }

    pub fn build(a: f64, b: f64, n_cells: usize, degree: usize, bc: BoundaryCondition) -> Result<Self> {
        Self::new(UniformMesh::new(a, b, n_cells)?, degree, bc)
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn degree(&self) -> usize {
        self.h.degree()
    }

    pub fn mesh(&self) -> &UniformMesh {
        self.h.mesh()
    }
}

/// `(H, W, U, V)` at time `t`. Also used for slopes and RK directions.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedState {
    pub h: Vec<f64>,
    pub w: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
}

impl MixedState {
    pub fn zeros(spaces: &MixedSpaces) -> Self {
        Self {
            h: vec![0.0; spaces.h.dof_count()],
            w: vec![0.0; spaces.w.dof_count()],
            u: vec![0.0; spaces.u.dof_count()],
            v: vec![0.0; spaces.v.dof_count()],
            t: 0.0,
        }
    }

    /// L² projections of `η, η_x, u, u_x` onto their spaces.
    pub fn project(
        spaces: &MixedSpaces,
        t: f64,
        eta: impl Fn(f64) -> f64,
        eta_x: impl Fn(f64) -> f64,
        u: impl Fn(f64) -> f64,
        u_x: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        Ok(Self {
            h: crate::fem::l2_project(&spaces.h, eta)?,
            w: crate::fem::l2_project(&spaces.w, eta_x)?,
            u: crate::fem::l2_project(&spaces.u, u)?,
            v: crate::fem::l2_project(&spaces.v, u_x)?,
            t,
        })
    }

    /// `self += a·x` on all four fields (time untouched).
    pub fn axpy(&mut self, a: f64, x: &Self) {
        for (s, o) in [
            (&mut self.h, &x.h),
            (&mut self.w, &x.w),
            (&mut self.u, &x.u),
            (&mut self.v, &x.v),
        ] {
            s.iter_mut().zip(o).for_each(|(p, q)| *p += a * q);
        }
    }

    pub fn scale(&mut self, a: f64) {
        for s in [&mut self.h, &mut self.w, &mut self.u, &mut self.v] {
            s.iter_mut().for_each(|p| *p *= a);
        }
    }

    pub fn is_finite(&self) -> bool {
        [&self.h, &self.w, &self.u, &self.v]
            .iter()
            .all(|s| s.iter().all(|x| x.is_finite()))
    }

    pub fn invariants(&self, spaces: &MixedSpaces) -> Result<InvariantRecord> {
        functionals::invariants(Field::new(&spaces.h, &self.h), Field::new(&spaces.u, &self.u), self.t)
    }
}

enum Operators {
    Conservative {
        eta: FactoredOperator,
        vel: FactoredOperator,
        /// `(χ_i′, ψ_j)`, rows over the H space, columns over the U space.
        g_hu: BandedMatrix,
        /// `(ψ_i′, χ_j)`.
        g_uh: BandedMatrix,
        proj_u: Projector,
        proj_h: Projector,
    },
    Standard {
        eta: FactoredOperator,
        vel: FactoredOperator,
        proj_w: Projector,
        proj_v: Projector,
    },
}

/// Assembled and factored operators of one scheme on one set of spaces.
pub struct SemidiscOperator {
    spaces: MixedSpaces,
    scheme: SchemeKind,
    ops: Operators,
    forcing: Option<Arc<dyn Forcing>>,
    table: BasisTable,
    forcing_rule: QuadratureRule,
}

impl fmt::Debug for SemidiscOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemidiscOperator")
            .field("scheme", &self.scheme)
            .field("bc", &self.spaces.bc)
            .field("degree", &self.spaces.degree())
            .field("n_cells", &self.spaces.mesh().n_cells())
            .field("forced", &self.forcing.is_some())
            .finish()
    }
}

impl SemidiscOperator {
    pub fn setup(spaces: MixedSpaces, scheme: SchemeKind, forcing: Option<Arc<dyn Forcing>>) -> Result<Self> {
        let ops = match scheme {
            SchemeKind::Conservative => Operators::Conservative {
                eta: factor(&SaddleOperator::new(&spaces.h, &spaces.w)?)?,
                vel: factor(&SaddleOperator::new(&spaces.u, &spaces.v)?)?,
                g_hu: assemble_coupling(&spaces.h, &spaces.u)?,
                g_uh: assemble_coupling(&spaces.u, &spaces.h)?,
                proj_u: Projector::new(spaces.u.clone())?,
                proj_h: Projector::new(spaces.h.clone())?,
            },
            SchemeKind::Standard => {
                let op = |s: &FemSpace| assemble_mass(s).add_scaled(&assemble_stiffness(s), 1.0 / 6.0);
                Operators::Standard {
                    eta: factor(&op(&spaces.h))?,
                    vel: factor(&op(&spaces.u))?,
                    proj_w: Projector::new(spaces.w.clone())?,
                    proj_v: Projector::new(spaces.v.clone())?,
                }
            }
        };
        let r = spaces.degree();
        Ok(Self {
            table: spaces.h.table(&quadrature_for(3 * r)),
            forcing_rule: transcendental_rule(r),
            spaces,
            scheme,
            ops,
            forcing,
        })
    }

    pub fn spaces(&self) -> &MixedSpaces {
        &self.spaces
    }

    pub fn scheme(&self) -> SchemeKind {
        self.scheme
    }

    pub fn is_forced(&self) -> bool {
        self.forcing.is_some()
    }

    /// Slopes `(Ḣ, Ẇ, U̇, V̇)` at `state`; the returned time is `state.t`.
    pub fn rhs(&self, state: &MixedState) -> Result<MixedState> {
        let sp = &self.spaces;
        let t = state.t;
        let (mut fh, mut fu) = match &self.forcing {
            Some(f) => (
                load_vector(&sp.h, &self.forcing_rule, |x| f.eta(x, t)),
                load_vector(&sp.u, &self.forcing_rule, |x| f.u(x, t)),
            ),
            None => (vec![0.0; sp.h.dof_count()], vec![0.0; sp.u.dof_count()]),
        };
        match &self.ops {
            Operators::Conservative {
                eta,
                vel,
                g_hu,
                g_uh,
                proj_u,
                proj_h,
            } => {
                let f_tilde = proj_u.solve_load(&self.nonlinear_load(state, &sp.u, false, |h, u| (1.0 + h) * u))?;
                let g_tilde = proj_h.solve_load(&self.nonlinear_load(state, &sp.h, false, |h, u| 0.5 * u * u + h))?;
                add_into(&mut fh, &g_hu.matvec(&f_tilde));
                add_into(&mut fu, &g_uh.matvec(&g_tilde));
                let (h_dot, w_dot) = saddle_solve(eta, fh, sp.w.dof_count())?;
                let (u_dot, v_dot) = saddle_solve(vel, fu, sp.v.dof_count())?;
                Ok(MixedState {
                    h: h_dot,
                    w: w_dot,
                    u: u_dot,
                    v: v_dot,
                    t,
                })
            }
            Operators::Standard {
                eta,
                vel,
                proj_w,
                proj_v,
            } => {
                add_into(&mut fh, &self.nonlinear_load(state, &sp.h, true, |h, u| (1.0 + h) * u));
                add_into(
                    &mut fu,
                    &self.nonlinear_load(state, &sp.u, true, |h, u| 0.5 * u * u + h),
                );
                let h_dot = eta.solve(&fh)?;
                let u_dot = vel.solve(&fu)?;
                Ok(MixedState {
                    w: proj_w.project_derivative(&sp.h, &h_dot)?,
                    v: proj_v.project_derivative(&sp.u, &u_dot)?,
                    h: h_dot,
                    u: u_dot,
                    t,
                })
            }
        }
    }

    /// `∫ f(H, U) φ_i` (or `φ_i′` when `derivative`) over the basis of `target`.
    fn nonlinear_load(
        &self,
        state: &MixedState,
        target: &FemSpace,
        derivative: bool,
        f: impl Fn(f64, f64) -> f64,
    ) -> Vec<f64> {
        let sp = &self.spaces;
        let nl = sp.degree() + 1;
        let tb = &self.table;
        let mut ch = [0.0; MAX_DEGREE + 1];
        let mut cu = [0.0; MAX_DEGREE + 1];
        let mut load = vec![0.0; target.dof_count()];
        for cell in 0..sp.mesh().n_cells() {
            sp.h.gather(&state.h, cell, &mut ch[..nl]);
            sp.u.gather(&state.u, cell, &mut cu[..nl]);
            for q in 0..tb.n_points() {
                let phi = tb.phi(q);
                let hq: f64 = ch[..nl].iter().zip(phi).map(|(a, b)| a * b).sum();
                let uq: f64 = cu[..nl].iter().zip(phi).map(|(a, b)| a * b).sum();
                let val = f(hq, uq) * tb.weights()[q];
                let test = if derivative { tb.dphi(q) } else { phi };
                for k in 0..nl {
                    if let Some(i) = target.local_dof(cell, k) {
                        load[i] += val * test[k];
                    }
                }
            }
        }
        load
    }
}

fn add_into(a: &mut [f64], b: &[f64]) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
}

fn saddle_solve(op: &FactoredOperator, first: Vec<f64>, n_second: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let n_first = first.len();
    let mut rhs = first;
    rhs.resize(n_first + n_second, 0.0);
    let mut x = op.solve(&rhs)?;
    let second = x.split_off(n_first);
    Ok((x, second))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::fem::l2_project;

    fn sech2(x: f64) -> f64 {
        1.0 / x.cosh().powi(2)
    }

    fn pulse_state(spaces: &MixedSpaces, shift: f64) -> MixedState {
        MixedState::project(
            spaces,
            0.0,
            |x| 0.4 * sech2(x - shift),
            |x| -0.8 * sech2(x - shift) * (x - shift).tanh(),
            |x| 0.3 * sech2(x - shift + 0.5),
            |x| -0.6 * sech2(x - shift + 0.5) * (x - shift + 0.5).tanh(),
        )
        .unwrap()
    }

    fn integral(space: &FemSpace, v: &[f64]) -> f64 {
        assemble_mass(space).matvec(v).iter().sum()
    }

    #[test]
    fn parse_and_display() {
        for bc in [BoundaryCondition::Periodic, BoundaryCondition::Reflective] {
            assert_eq!(bc.to_string().parse::<BoundaryCondition>().unwrap(), bc);
        }
        for s in [SchemeKind::Conservative, SchemeKind::Standard] {
            assert_eq!(s.to_string().parse::<SchemeKind>().unwrap(), s);
        }
        assert!("dirichlet".parse::<BoundaryCondition>().is_err());
    }

    #[test]
    fn zero_and_constant_states_are_steady() {
        for bc in [BoundaryCondition::Periodic, BoundaryCondition::Reflective] {
            for scheme in [SchemeKind::Conservative, SchemeKind::Standard] {
                let sp = MixedSpaces::build(0.0, 1.0, 8, 2, bc).unwrap();
                let op = SemidiscOperator::setup(sp.clone(), scheme, None).unwrap();
                let z = MixedState::zeros(&sp);
                assert_eq!(op.rhs(&z).unwrap(), z);
                let mut c = MixedState::zeros(&sp);
                c.h.iter_mut().for_each(|v| *v = 0.7);
                let d = op.rhs(&c).unwrap();
                let m = [&d.h, &d.w, &d.u, &d.v]
                    .iter()
                    .flat_map(|s| s.iter())
                    .fold(0.0f64, |a, b| a.max(b.abs()));
                assert!(m < 1e-12, "{bc} {scheme}: {m}");
            }
        }
    }

    #[test]
    fn standard_operator_on_constants() {
        let s = FemSpace::build(0.0, 1.0, 6, 1, BoundaryVariant::Free).unwrap();
        let op = assemble_mass(&s).add_scaled(&assemble_stiffness(&s), 1.0 / 6.0);
        let ones = vec![2.0; s.dof_count()];
        let a = op.matvec(&ones);
        let b = assemble_mass(&s).matvec(&ones);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn slopes_conserve_mass_energy_momentum() {
        for bc in [BoundaryCondition::Periodic, BoundaryCondition::Reflective] {
            for r in 1..=4 {
                let sp = MixedSpaces::build(-10.0, 10.0, 40, r, bc).unwrap();
                let op = SemidiscOperator::setup(sp.clone(), SchemeKind::Conservative, None).unwrap();
                let y = pulse_state(&sp, 1.0);
                let d = op.rhs(&y).unwrap();
                assert!(integral(&sp.h, &d.h).abs() < 1e-12, "mass slope {bc} r={r}");
                if bc == BoundaryCondition::Periodic {
                    assert!(integral(&sp.u, &d.u).abs() < 1e-12, "momentum slope r={r}");
                }
                let c = functionals::relaxation_coefficients(
                    Field::new(&sp.h, &y.h),
                    Field::new(&sp.u, &y.u),
                    Field::new(&sp.h, &d.h),
                    Field::new(&sp.u, &d.u),
                )
                .unwrap();
                let scale = c.b.abs().max(1.0);
                assert!(c.gamma.abs() < 1e-11 * scale, "energy slope {bc} r={r}: {}", c.gamma);
            }
        }
    }

    #[test]
    fn standard_slopes_conserve_mass() {
        for bc in [BoundaryCondition::Periodic, BoundaryCondition::Reflective] {
            let sp = MixedSpaces::build(-10.0, 10.0, 40, 2, bc).unwrap();
            let op = SemidiscOperator::setup(sp.clone(), SchemeKind::Standard, None).unwrap();
            let d = op.rhs(&pulse_state(&sp, 0.0)).unwrap();
            assert!(integral(&sp.h, &d.h).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_consistency_of_auxiliary_slopes() {
        for bc in [BoundaryCondition::Periodic, BoundaryCondition::Reflective] {
            let sp = MixedSpaces::build(-10.0, 10.0, 30, 3, bc).unwrap();
            let op = SemidiscOperator::setup(sp.clone(), SchemeKind::Conservative, None).unwrap();
            let d = op.rhs(&pulse_state(&sp, -0.5)).unwrap();
            let pw = Projector::new(sp.w.clone())
                .unwrap()
                .project_derivative(&sp.h, &d.h)
                .unwrap();
            let pv = Projector::new(sp.v.clone())
                .unwrap()
                .project_derivative(&sp.u, &d.u)
                .unwrap();
            let err = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(err(&d.w, &pw) < 1e-11);
            assert!(err(&d.v, &pv) < 1e-11);
        }
    }

    #[test]
    fn schemes_agree_as_mesh_refines() {
        let gap = |n: usize| {
            let sp = MixedSpaces::build(-10.0, 10.0, n, 1, BoundaryCondition::Periodic).unwrap();
            let y = pulse_state(&sp, 0.0);
            let a = SemidiscOperator::setup(sp.clone(), SchemeKind::Conservative, None)
                .unwrap()
                .rhs(&y)
                .unwrap();
            let b = SemidiscOperator::setup(sp.clone(), SchemeKind::Standard, None)
                .unwrap()
                .rhs(&y)
                .unwrap();
            let diff: Vec<f64> = a.h.iter().zip(&b.h).map(|(x, y)| x - y).collect();
            let m = assemble_mass(&sp.h).matvec(&diff);
            diff.iter().zip(&m).map(|(x, y)| x * y).sum::<f64>().sqrt()
        };
        let (g1, g2) = (gap(100), gap(200));
        assert!(g2 < g1, "{g1} {g2}");
    }

    #[test]
    fn setup_is_deterministic() {
        let sp = MixedSpaces::build(0.0, 1.0, 8, 1, BoundaryCondition::Periodic).unwrap();
        let y = pulse_state(&sp, 0.5);
        let a = SemidiscOperator::setup(sp.clone(), SchemeKind::Conservative, None).unwrap();
        let b = SemidiscOperator::setup(sp, SchemeKind::Conservative, None).unwrap();
        assert_eq!(a.rhs(&y).unwrap(), b.rhs(&y).unwrap());
    }

    struct Const;

    impl Forcing for Const {
        fn eta(&self, _: f64, _: f64) -> f64 {
            1.0
        }
        fn u(&self, _: f64, _: f64) -> f64 {
            0.0
        }
    }

    #[test]
    fn constant_forcing_raises_eta_uniformly() {
        let sp = MixedSpaces::build(0.0, 1.0, 8, 2, BoundaryCondition::Periodic).unwrap();
        let op = SemidiscOperator::setup(sp.clone(), SchemeKind::Conservative, Some(Arc::new(Const))).unwrap();
        let d = op.rhs(&MixedState::zeros(&sp)).unwrap();
        assert!(d.h.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(d.w.iter().all(|v| v.abs() < 1e-11));
        let _ = l2_project(&sp.h, |x| x).unwrap();
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn energy_slope_vanishes_for_random_states(
            r in 1usize..=3,
            periodic in any::<bool>(),
            seed in proptest::collection::vec(-0.3f64..0.3, 23),
        ) {
            let bc = if periodic { BoundaryCondition::Periodic } else { BoundaryCondition::Reflective };
            let sp = MixedSpaces::build(0.0, 3.0, 9, r, bc).unwrap();
            let op = SemidiscOperator::setup(sp.clone(), SchemeKind::Conservative, None).unwrap();
            let mut y = MixedState::zeros(&sp);
            for (i, v) in y.h.iter_mut().enumerate() { *v = seed[i % seed.len()]; }
            for (i, v) in y.u.iter_mut().enumerate() { *v = seed[(i + 5) % seed.len()]; }
            let d = op.rhs(&y).unwrap();
            let c = functionals::relaxation_coefficients(
                Field::new(&sp.h, &y.h), Field::new(&sp.u, &y.u),
                Field::new(&sp.h, &d.h), Field::new(&sp.u, &d.u),
            ).unwrap();
            prop_assert!(c.gamma.abs() < 1e-11 * c.b.abs().max(1.0), "Γ = {}", c.gamma);
        }
    }
}
