//! Mass, momentum, impulse and energy of a discrete state, and the
//! coefficients of the cubic energy polynomial used by relaxation.
//!
//! With g = D = 1,
//!
//! ```text
//! 𝓜 = ∫ η,   𝓘 = ∫ u,   𝓗 = ∫ η u + η_x u_x / 6,   𝓔 = ½ ∫ η² + (1+η) u²
//! ```
//!
//! Every integrand is a polynomial of degree ≤ 3r on each cell and is
//! integrated exactly.

use crate::fem::{quadrature_for, BasisTable, FemSpace, MAX_DEGREE};
use crate::{Error, Result};

/// A finite element function by reference.
#[derive(Debug, Clone, Copy)]
pub struct Field<'a> {
    pub space: &'a FemSpace,
    pub values: &'a [f64],
}

impl<'a> Field<'a> {
    pub fn new(space: &'a FemSpace, values: &'a [f64]) -> Self {
        debug_assert_eq!(space.dof_count(), values.len());
        Self { space, values }
    }
}

/// The four invariants at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InvariantRecord {
    pub t: f64,
    pub mass: f64,
    pub momentum: f64,
    pub impulse: f64,
    pub energy: f64,
}

/// Cubic coefficients with `𝓔(y + τd) − 𝓔(y) = ½(Γτ + Bτ² + Aτ³)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RelaxationCoefficients {
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
}

/// Walks the cells and hands the values (and broken derivatives) of each
/// field at every quadrature point to `f(weight, values, derivatives)`.
fn sweep<const N: usize>(fields: [Field<'_>; N], mut f: impl FnMut(f64, &[f64; N], &[f64; N])) -> Result<()> {
    let first = fields[0].space;
    for fl in &fields[1..] {
        if !fl.space.compatible(first) {
            return Err(Error::usage("fields live on different meshes or degrees"));
        }
    }
    for fl in &fields {
        if fl.values.len() != fl.space.dof_count() {
            return Err(Error::usage("coefficient vector does not match its space"));
        }
    }
    let r = first.degree();
    let table: BasisTable = first.table(&quadrature_for(3 * r));
    let nl = r + 1;
    let mut local = [[0.0; MAX_DEGREE + 1]; N];
    let mut vals = [0.0; N];
    let mut ders = [0.0; N];
    for cell in 0..first.mesh().n_cells() {
        for (k, fl) in fields.iter().enumerate() {
            fl.space.gather(fl.values, cell, &mut local[k][..nl]);
        }
        for q in 0..table.n_points() {
            let (phi, dphi) = (table.phi(q), table.dphi(q));
            for k in 0..N {
                let c = &local[k][..nl];
                vals[k] = c.iter().zip(phi).map(|(a, b)| a * b).sum();
                ders[k] = c.iter().zip(dphi).map(|(a, b)| a * b).sum();
            }
            f(table.weights()[q], &vals, &ders);
        }
    }
    Ok(())
}

/// Invariants of `(H, U)`; the impulse uses the broken derivatives.
pub fn invariants(h: Field<'_>, u: Field<'_>, t: f64) -> Result<InvariantRecord> {
    let mut rec = InvariantRecord {
        t,
        ..Default::default()
    };
    sweep([h, u], |w, v, d| {
        let (eta, vel) = (v[0], v[1]);
        rec.mass += w * eta;
        rec.momentum += w * vel;
        rec.impulse += w * (eta * vel + d[0] * d[1] / 6.0);
        rec.energy += w * 0.5 * (eta * eta + (1.0 + eta) * vel * vel);
    })?;
    Ok(rec)
}

/// Energy alone.
pub fn energy(h: Field<'_>, u: Field<'_>) -> Result<f64> {
    let mut e = 0.0;
    sweep([h, u], |w, v, _| e += w * (v[0] * v[0] + (1.0 + v[0]) * v[1] * v[1]))?;
    Ok(0.5 * e)
}

/// `A = ∫ dη du²`, `B = ∫ dη² + (1+H) du² + 2U dη du`,
/// `Γ = ∫ (2H + U²) dη + 2U(1+H) du`.
pub fn relaxation_coefficients(
    h: Field<'_>,
    u: Field<'_>,
    d_eta: Field<'_>,
    d_u: Field<'_>,
) -> Result<RelaxationCoefficients> {
    let mut c = RelaxationCoefficients::default();
    sweep([h, u, d_eta, d_u], |w, v, _| {
        let [eta, vel, de, du] = *v;
        c.a += w * de * du * du;
        c.b += w * (de * de + (1.0 + eta) * du * du + 2.0 * vel * de * du);
        c.gamma += w * ((2.0 * eta + vel * vel) * de + 2.0 * vel * (1.0 + eta) * du);
    })?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::fem::BoundaryVariant;

    fn spaces(r: usize) -> (FemSpace, FemSpace) {
        let h = FemSpace::build(-1.0, 2.0, 7, r, BoundaryVariant::Free).unwrap();
        let u = h.with_bc(BoundaryVariant::ZeroEndpoint);
        (h, u)
    }

    #[test]
    fn zero_state() {
        let (hs, us) = spaces(2);
        let h = vec![0.0; hs.dof_count()];
        let u = vec![0.0; us.dof_count()];
        let rec = invariants(Field::new(&hs, &h), Field::new(&us, &u), 0.0).unwrap();
        assert_eq!(rec, InvariantRecord::default());
        let c = relaxation_coefficients(
            Field::new(&hs, &h),
            Field::new(&us, &u),
            Field::new(&hs, &h),
            Field::new(&us, &u),
        )
        .unwrap();
        assert_eq!(c, RelaxationCoefficients::default());
    }

    #[test]
    fn pure_eta_direction() {
        let (hs, us) = spaces(3);
        let h = vec![0.0; hs.dof_count()];
        let u = vec![0.0; us.dof_count()];
        let d: Vec<f64> = (0..hs.dof_count()).map(|i| (i as f64 * 0.7).sin()).collect();
        let c = relaxation_coefficients(
            Field::new(&hs, &h),
            Field::new(&us, &u),
            Field::new(&hs, &d),
            Field::new(&us, &u),
        )
        .unwrap();
        let e = energy(Field::new(&hs, &d), Field::new(&us, &u)).unwrap();
        assert_eq!(c.a, 0.0);
        assert_eq!(c.gamma, 0.0);
        assert!((c.b - 2.0 * e).abs() < 1e-14);
    }

    #[test]
    fn constant_fields() {
        let (hs, _) = spaces(1);
        let h = vec![0.5; hs.dof_count()];
        let u = vec![2.0; hs.dof_count()];
        let rec = invariants(Field::new(&hs, &h), Field::new(&hs, &u), 1.5).unwrap();
        assert!((rec.mass - 1.5).abs() < 1e-14);
        assert!((rec.momentum - 6.0).abs() < 1e-14);
        assert!((rec.impulse - 3.0).abs() < 1e-14);
        assert!((rec.energy - 0.5 * 3.0 * (0.25 + 1.5 * 4.0)).abs() < 1e-13);
        assert_eq!(rec.t, 1.5);
    }

    #[test]
    fn mismatched_meshes_rejected() {
        let (hs, _) = spaces(1);
        let other = FemSpace::build(-1.0, 2.0, 8, 1, BoundaryVariant::Free).unwrap();
        let h = vec![0.0; hs.dof_count()];
        let u = vec![0.0; other.dof_count()];
        assert!(matches!(
            invariants(Field::new(&hs, &h), Field::new(&other, &u), 0.0),
            Err(Error::Usage(_))
        ));
    }

    fn vecs(n: usize, seed: &[f64], scale: f64, shift: usize) -> Vec<f64> {
        (0..n).map(|i| scale * seed[(i + shift) % seed.len()]).collect()
    }

    proptest! {
        #[test]
        fn energy_cubic_identity(
            r in 1usize..=4,
            seed in proptest::collection::vec(-1.0f64..1.0, 31),
            gammas in proptest::collection::vec(-2.0f64..2.0, 20),
        ) {
            let (hs, us) = spaces(r);
            let (nh, nu) = (hs.dof_count(), us.dof_count());
            let h = vecs(nh, &seed, 0.3, 0);
            let u = vecs(nu, &seed, 0.5, 3);
            let de = vecs(nh, &seed, 1.0, 7);
            let du = vecs(nu, &seed, 0.8, 13);
            let c = relaxation_coefficients(
                Field::new(&hs, &h), Field::new(&us, &u), Field::new(&hs, &de), Field::new(&us, &du),
            ).unwrap();
            let e0 = energy(Field::new(&hs, &h), Field::new(&us, &u)).unwrap();
            for &tau in &gammas {
                let h1: Vec<f64> = h.iter().zip(&de).map(|(a, b)| a + tau * b).collect();
                let u1: Vec<f64> = u.iter().zip(&du).map(|(a, b)| a + tau * b).collect();
                let e1 = energy(Field::new(&hs, &h1), Field::new(&us, &u1)).unwrap();
                let cubic = 0.5 * (c.gamma * tau + c.b * tau * tau + c.a * tau * tau * tau);
                let scale = e0.abs().max(e1.abs()).max(1.0);
                prop_assert!(((e1 - e0) - cubic).abs() <= 1e-12 * scale, "{} vs {}", e1 - e0, cubic);
            }
        }

        #[test]
        fn mass_and_momentum_linear(
            seed in proptest::collection::vec(-1.0f64..1.0, 17),
            alpha in -3.0f64..3.0,
            beta in -3.0f64..3.0,
        ) {
            let (hs, us) = spaces(2);
            let (nh, nu) = (hs.dof_count(), us.dof_count());
            let h1 = vecs(nh, &seed, 1.0, 0);
            let h2 = vecs(nh, &seed, 1.0, 5);
            let u1 = vecs(nu, &seed, 1.0, 2);
            let u2 = vecs(nu, &seed, 1.0, 9);
            let hc: Vec<f64> = h1.iter().zip(&h2).map(|(a, b)| alpha * a + beta * b).collect();
            let uc: Vec<f64> = u1.iter().zip(&u2).map(|(a, b)| alpha * a + beta * b).collect();
            let inv = |h: &[f64], u: &[f64]| invariants(Field::new(&hs, h), Field::new(&us, u), 0.0).unwrap();
            let (r1, r2, rc) = (inv(&h1, &u1), inv(&h2, &u2), inv(&hc, &uc));
            prop_assert!((rc.mass - alpha * r1.mass - beta * r2.mass).abs() < 1e-12);
            prop_assert!((rc.momentum - alpha * r1.momentum - beta * r2.momentum).abs() < 1e-12);
        }
    }
}
