//! Initial data: the closed-form travelling wave, manufactured solutions for
//! the convergence studies, and Petviashvili-generated solitary waves.

use crate::fem::{
    assemble_cross_mass, assemble_mass, assemble_stiffness, l2_project, quadrature_for, transfer, Coeffs, FemSpace,
    Projector,
};
use crate::linalg::{factor, BlockOperator};
use crate::semidisc::{BoundaryCondition, Forcing, MixedSpaces, MixedState};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Direction of the closed-form travelling wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Right,
    Left,
}

const WAVE_K: f64 = 0.948_683_298_050_513_8; // 3/√10

/// `(η, η_x, u, u_x)` of the exact (unphysical) travelling wave at
/// `ξ = x ∓ 5t/2`.
pub fn exact_travelling_wave_full(x: f64, t: f64, dir: Direction) -> [f64; 4] {
    let xi = match dir {
        Direction::Right => x - 2.5 * t,
        Direction::Left => x + 2.5 * t,
    };
    let th = (WAVE_K * xi).tanh();
    let s = 1.0 - th * th; // sech²
    let ds = -2.0 * WAVE_K * s * th;
    [
        3.75 * (2.0 * s - 3.0 * s * s),
        3.75 * (2.0 - 6.0 * s) * ds,
        7.5 * s,
        7.5 * ds,
    ]
}

/// `(η, u)` of the exact travelling wave.
pub fn exact_travelling_wave(x: f64, t: f64, dir: Direction) -> (f64, f64) {
    let [e, _, u, _] = exact_travelling_wave_full(x, t, dir);
    (e, u)
}

/// Closed-form solutions with forcing, on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManufacturedCase {
    /// `η = e^{2t} cos πx`, `u = e^t x sin πx`; satisfies `η_x = u = 0` at both ends.
    Reflective,
    /// `η = e^t sin 2π(x − 2t)`, `u = e^{t/2} sin 2π(x − t/2)`.
    Periodic,
}

/// Values of a manufactured solution and its derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub eta: f64,
    pub eta_x: f64,
    pub eta_t: f64,
    pub eta_xxt: f64,
    pub u: f64,
    pub u_x: f64,
    pub u_t: f64,
    pub u_xxt: f64,
}

impl ManufacturedCase {
    pub fn for_bc(bc: BoundaryCondition) -> Self {
        match bc {
            BoundaryCondition::Reflective => Self::Reflective,
            BoundaryCondition::Periodic => Self::Periodic,
        }
    }

    pub fn bc(&self) -> BoundaryCondition {
        match self {
            Self::Reflective => BoundaryCondition::Reflective,
            Self::Periodic => BoundaryCondition::Periodic,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    pub fn eta(&self, x: f64, t: f64) -> f64 {
        self.jet(x, t).eta
    }

    pub fn u(&self, x: f64, t: f64) -> f64 {
        self.jet(x, t).u
    }

    /// Hand-derived derivatives used for the forcing.
    pub fn jet(&self, x: f64, t: f64) -> Jet {
        match self {
            Self::Reflective => {
                let (e2, e1) = ((2.0 * t).exp(), t.exp());
                let (s, c) = (PI * x).sin_cos();
                let u_xx = e1 * (2.0 * PI * c - PI * PI * x * s);
                Jet {
                    eta: e2 * c,
                    eta_x: -PI * e2 * s,
                    eta_t: 2.0 * e2 * c,
                    eta_xxt: -2.0 * PI * PI * e2 * c,
                    u: e1 * x * s,
                    u_x: e1 * (s + PI * x * c),
                    u_t: e1 * x * s,
                    u_xxt: u_xx,
                }
            }
            Self::Periodic => {
                let (e1, eh) = (t.exp(), (0.5 * t).exp());
                let (st, ct) = (2.0 * PI * (x - 2.0 * t)).sin_cos();
                let (sp, cp) = (2.0 * PI * (x - 0.5 * t)).sin_cos();
                let k2 = 4.0 * PI * PI;
                let eta_t = e1 * (st - 4.0 * PI * ct);
                let u_t = eh * (0.5 * sp - PI * cp);
                Jet {
                    eta: e1 * st,
                    eta_x: 2.0 * PI * e1 * ct,
                    eta_t,
                    eta_xxt: -k2 * eta_t,
                    u: eh * sp,
                    u_x: 2.0 * PI * eh * cp,
                    u_t,
                    u_xxt: -k2 * u_t,
                }
            }
        }
    }

    /// Initial state by L² projection of the exact fields.
    pub fn initial_state(&self, spaces: &MixedSpaces) -> Result<MixedState> {
        MixedState::project(
            spaces,
            0.0,
            |x| self.jet(x, 0.0).eta,
            |x| self.jet(x, 0.0).eta_x,
            |x| self.jet(x, 0.0).u,
            |x| self.jet(x, 0.0).u_x,
        )
    }
}

impl Forcing for ManufacturedCase {
    fn eta(&self, x: f64, t: f64) -> f64 {
        let j = self.jet(x, t);
        j.eta_t + j.eta_x * j.u + (1.0 + j.eta) * j.u_x - j.eta_xxt / 6.0
    }

    fn u(&self, x: f64, t: f64) -> f64 {
        let j = self.jet(x, t);
        j.u_t + j.eta_x + j.u * j.u_x - j.u_xxt / 6.0
    }
}

/// Settings of the Petviashvili iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PetviashviliConfig {
    pub c_s: f64,
    /// Centre of the initial guess.
    pub center: f64,
    /// Stabilizing exponent γ.
    pub exponent: f64,
    /// Stopping tolerance δ on the normalised residual.
    pub tol: f64,
    pub max_iter: usize,
}

impl PetviashviliConfig {
    pub fn new(c_s: f64) -> Self {
        Self {
            c_s,
            center: 0.0,
            exponent: 2.0,
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

/// `A sech²(λξ)` with `A = c² − 1`, `λ = √(3A/4)`, and `u = cη/(1+η)`.
pub fn petviashvili_initial_guess(c_s: f64) -> Result<impl Fn(f64) -> (f64, f64)> {
    if !(c_s > 1.0) || !c_s.is_finite() {
        return Err(Error::config(format!("solitary waves need c_s > 1, got {c_s}")));
    }
    let a = c_s * c_s - 1.0;
    let lambda = (0.75 * a).sqrt();
    Ok(move |xi: f64| {
        let eta = a / (lambda * xi).cosh().powi(2);
        (eta, c_s * eta / (1.0 + eta))
    })
}

/// A discrete solitary wave with its projected derivatives.
#[derive(Debug, Clone)]
pub struct TravellingWave {
    pub c_s: f64,
    pub center: f64,
    pub amplitude: f64,
    pub spaces: MixedSpaces,
    /// `(η, η_x, u, u_x)` as `(h, w, u, v)`.
    pub fields: MixedState,
    pub residual_history: Vec<f64>,
}

/// How a wave is moved to another element degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveTransfer {
    Interpolate,
    Project,
}

impl std::str::FromStr for WaveTransfer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "interpolate" => Ok(Self::Interpolate),
            "project" => Ok(Self::Project),
            other => Err(Error::config(format!("unknown wave transfer '{other}'"))),
        }
    }
}

impl std::fmt::Display for WaveTransfer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Interpolate => "interpolate",
            Self::Project => "project",
        })
    }
}

impl TravellingWave {
    pub fn eta(&self) -> Coeffs {
        Coeffs::new(self.spaces.h.clone(), self.fields.h.clone()).expect("sizes match")
    }

    pub fn eta_x(&self) -> Coeffs {
        Coeffs::new(self.spaces.w.clone(), self.fields.w.clone()).expect("sizes match")
    }

    pub fn u(&self) -> Coeffs {
        Coeffs::new(self.spaces.u.clone(), self.fields.u.clone()).expect("sizes match")
    }

    pub fn u_x(&self) -> Coeffs {
        Coeffs::new(self.spaces.v.clone(), self.fields.v.clone()).expect("sizes match")
    }

    pub fn iterations(&self) -> usize {
        self.residual_history.len().saturating_sub(1)
    }

    /// The wave as an initial state on `target` (same interval).
    pub fn to_state(&self, target: &MixedSpaces, mode: WaveTransfer) -> Result<MixedState> {
        let src = &self.spaces;
        let same = target.degree() == src.degree() && target.mesh().same_as(src.mesh()) && target.bc() == src.bc();
        if same {
            return Ok(self.fields.clone());
        }
        let f = &self.fields;
        let mut st = match mode {
            WaveTransfer::Interpolate => MixedState {
                h: transfer(&src.h, &f.h, &target.h)?,
                w: transfer(&src.w, &f.w, &target.w)?,
                u: transfer(&src.u, &f.u, &target.u)?,
                v: transfer(&src.v, &f.v, &target.v)?,
                t: 0.0,
            },
            WaveTransfer::Project => {
                let ev = |s: &FemSpace, v: &[f64], x: f64| {
                    let m = s.mesh();
                    crate::fem::evaluate(s, v, x.clamp(m.a(), m.b())).map_or(0.0, |p| p.0)
                };
                MixedState {
                    h: l2_project(&target.h, |x| ev(&src.h, &f.h, x))?,
                    w: l2_project(&target.w, |x| ev(&src.w, &f.w, x))?,
                    u: l2_project(&target.u, |x| ev(&src.u, &f.u, x))?,
                    v: l2_project(&target.v, |x| ev(&src.v, &f.v, x))?,
                    t: 0.0,
                }
            }
        };
        st.t = 0.0;
        Ok(st)
    }
}

/// Galerkin Petviashvili iteration for a solitary wave of speed `c_s` on
/// `spaces` (periodic pair, or free `η` with zero-endpoint `u`).
pub fn petviashvili_solve(spaces: &MixedSpaces, cfg: &PetviashviliConfig) -> Result<TravellingWave> {
    let guess = petviashvili_initial_guess(cfg.c_s)?;
    let c = cfg.c_s;
    let (hs, us) = (&spaces.h, &spaces.u);
    let op_h = assemble_mass(hs)
        .add_scaled(&assemble_stiffness(hs), 1.0 / 6.0)
        .scaled(c);
    let op_u = assemble_mass(us)
        .add_scaled(&assemble_stiffness(us), 1.0 / 6.0)
        .scaled(c);
    let m_hu = assemble_cross_mass(hs, us)?.scaled(-1.0);
    let m_uh = assemble_cross_mass(us, hs)?.scaled(-1.0);
    let l = BlockOperator::new(op_h, m_hu, m_uh, op_u)?;
    let lf = factor(&l)?;
    let (mh, mu) = (assemble_mass(hs), assemble_mass(us));
    let nh = hs.dof_count();

    let center = cfg.center;
    let mut w = l2_project(hs, |x| guess(x - center).0)?;
    w.extend(l2_project(us, |x| guess(x - center).1)?);

    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let (eta, u) = w.split_at(nh);
        let n = nonlinearity(hs, us, eta, u);
        let lw = l.apply(&w);
        let lww = dot(&lw, &w);
        let nw = dot(&n, &w);
        let norm = (dot(&mh.matvec(eta), eta) + dot(&mu.matvec(u), u)).sqrt();
        let residual = (lww - nw).abs() / norm;
        history.push(residual);
        if residual < cfg.tol {
            break;
        }
        if !residual.is_finite() || iterations >= cfg.max_iter {
            return Err(Error::NonConvergence {
                iterations,
                last: residual,
                history,
            });
        }
        if nw.abs() < 1e-14 {
            return Err(Error::Degenerate { denominator: nw });
        }
        let m = (lww / nw).powf(cfg.exponent);
        let rhs: Vec<f64> = n.iter().map(|v| m * v).collect();
        w = lf.solve(&rhs)?;
        iterations += 1;
    }

    let (eta, u) = w.split_at(nh);
    let pw = Projector::new(spaces.w.clone())?;
    let pv = Projector::new(spaces.v.clone())?;
    let fields = MixedState {
        w: pw.project_derivative(hs, eta)?,
        v: pv.project_derivative(us, u)?,
        h: eta.to_vec(),
        u: u.to_vec(),
        t: 0.0,
    };
    let amplitude = crate::diagnostics::peak_value(hs, &fields.h)?;
    Ok(TravellingWave {
        c_s: c,
        center,
        amplitude,
        spaces: spaces.clone(),
        fields,
        residual_history: history,
    })
}

/// Weak-form residual `max_i |(𝓛w − 𝓝(w), χ_i)|` of a computed wave, scaled
/// like the stopping criterion.
pub fn petviashvili_residual(wave: &TravellingWave) -> Result<f64> {
    let sp = &wave.spaces;
    let (hs, us) = (&sp.h, &sp.u);
    let c = wave.c_s;
    let (eta, u) = (&wave.fields.h, &wave.fields.u);
    let mut r = assemble_mass(hs)
        .add_scaled(&assemble_stiffness(hs), 1.0 / 6.0)
        .matvec(eta);
    r.iter_mut().for_each(|v| *v *= c);
    let x = assemble_cross_mass(hs, us)?.matvec(u);
    r.iter_mut().zip(&x).for_each(|(a, b)| *a -= b);
    let mut s = assemble_mass(us)
        .add_scaled(&assemble_stiffness(us), 1.0 / 6.0)
        .matvec(u);
    s.iter_mut().for_each(|v| *v *= c);
    let x = assemble_cross_mass(us, hs)?.matvec(eta);
    s.iter_mut().zip(&x).for_each(|(a, b)| *a -= b);
    r.extend(s);
    let n = nonlinearity(hs, us, eta, u);
    Ok(r.iter().zip(&n).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Stacked load `((ηu, φ_i), (u²/2, χ_i))`.
fn nonlinearity(hs: &FemSpace, us: &FemSpace, eta: &[f64], u: &[f64]) -> Vec<f64> {
    let r = hs.degree();
    let tb = hs.table(&quadrature_for(3 * r));
    let nl = r + 1;
    let mut ce = vec![0.0; nl];
    let mut cu = vec![0.0; nl];
    let mut out = vec![0.0; hs.dof_count() + us.dof_count()];
    let nh = hs.dof_count();
    for cell in 0..hs.mesh().n_cells() {
        hs.gather(eta, cell, &mut ce);
        us.gather(u, cell, &mut cu);
        for q in 0..tb.n_points() {
            let phi = tb.phi(q);
            let e: f64 = ce.iter().zip(phi).map(|(a, b)| a * b).sum();
            let v: f64 = cu.iter().zip(phi).map(|(a, b)| a * b).sum();
            let w = tb.weights()[q];
            for k in 0..nl {
                if let Some(i) = hs.local_dof(cell, k) {
                    out[i] += w * e * v * phi[k];
                }
                if let Some(j) = us.local_dof(cell, k) {
                    out[nh + j] += w * 0.5 * v * v * phi[k];
                }
            }
        }
    }
    out
}

/// Sum of several waves on common spaces (fields added pointwise).
pub fn superpose(waves: &[MixedState]) -> Result<MixedState> {
    let mut it = waves.iter();
    let mut acc = it.next().ok_or_else(|| Error::config("nothing to superpose"))?.clone();
    for w in it {
        if w.h.len() != acc.h.len() || w.u.len() != acc.u.len() {
            return Err(Error::config("superposed waves live on different spaces"));
        }
        acc.axpy(1.0, w);
    }
    Ok(acc)
}

/// Spaces of another degree on the mesh and boundary conditions of `target`.
pub fn generation_spaces(target: &MixedSpaces, degree: usize) -> Result<MixedSpaces> {
    MixedSpaces::new(target.mesh().clone(), degree, target.bc())
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};

    use super::*;

    #[test]
    fn travelling_wave_values() {
        let (e, u) = exact_travelling_wave(0.0, 0.0, Direction::Right);
        assert!((e + 3.75).abs() < 1e-14 && (u - 7.5).abs() < 1e-14);
        let (e, u) = exact_travelling_wave(60.0, 0.0, Direction::Right);
        assert!(e.abs() < 1e-40 && u.abs() < 1e-20);
        for s in [0.3, -1.7, 4.0] {
            let a = exact_travelling_wave(1.1, 0.4, Direction::Right);
            let b = exact_travelling_wave(1.1 - 2.5 * s, 0.4 - s, Direction::Right);
            assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
        }
        // closed form against the cosh form
        let x: f64 = 0.37;
        let k = 3.0 / 10f64.sqrt();
        let ref_eta = 3.75 * ((3.0 * (0.4f64).sqrt() * x).cosh() - 2.0) / (k * x).cosh().powi(4);
        assert!((exact_travelling_wave(x, 0.0, Direction::Right).0 - ref_eta).abs() < 1e-13);
    }

    #[test]
    fn travelling_wave_derivatives() {
        let h = 1e-6;
        for x in [-2.0, -0.3, 0.8, 3.0] {
            let f = exact_travelling_wave_full(x, 0.0, Direction::Left);
            let p = exact_travelling_wave_full(x + h, 0.0, Direction::Left);
            let m = exact_travelling_wave_full(x - h, 0.0, Direction::Left);
            assert!(((p[0] - m[0]) / (2.0 * h) - f[1]).abs() < 1e-7);
            assert!(((p[2] - m[2]) / (2.0 * h) - f[3]).abs() < 1e-7);
        }
    }

    #[test]
    fn reflective_case_boundary_values() {
        let c = ManufacturedCase::Reflective;
        for x in [0.0, 1.0] {
            let j = c.jet(x, 0.0);
            assert!(j.eta_x.abs() < 1e-14 && j.u.abs() < 1e-15);
        }
        let p = ManufacturedCase::Periodic;
        for x in [0.1, 0.77] {
            assert!((p.eta(x, 0.3) - p.eta(x + 1.0, 0.3)).abs() < 1e-12);
            assert!((p.u(x, 0.3) - p.u(x + 1.0, 0.3)).abs() < 1e-12);
        }
    }

    /// Central difference weights of order 8 for the first and second derivative.
    const D1: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    const D2: [f64; 5] = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];

    fn d1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        D1.iter()
            .enumerate()
            .map(|(k, w)| w * (f(x + (k + 1) as f64 * h) - f(x - (k + 1) as f64 * h)))
            .sum::<f64>()
            / h
    }

    fn d2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        let mut s = D2[0] * f(x);
        for k in 1..5 {
            s += D2[k] * (f(x + k as f64 * h) + f(x - k as f64 * h));
        }
        s / (h * h)
    }

    #[test]
    fn forcing_matches_finite_difference_residual() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
        let h = 1e-2;
        for case in [ManufacturedCase::Reflective, ManufacturedCase::Periodic] {
            let eta = |x: f64, t: f64| case.eta(x, t);
            let u = |x: f64, t: f64| case.u(x, t);
            let mut worst: f64 = 0.0;
            for _ in 0..200 {
                let x = rng.gen_range(0.0..1.0);
                let t = rng.gen_range(0.0..1.0);
                let e_t = d1(|s| eta(x, s), t, h);
                let e_x = d1(|y| eta(y, t), x, h);
                let e_xxt = d1(|s| d2(|y| eta(y, s), x, h), t, h);
                let u_t = d1(|s| u(x, s), t, h);
                let u_x = d1(|y| u(y, t), x, h);
                let u_xxt = d1(|s| d2(|y| u(y, s), x, h), t, h);
                let (ev, uv) = (eta(x, t), u(x, t));
                let fe = e_t + e_x * uv + (1.0 + ev) * u_x - e_xxt / 6.0;
                let fu = u_t + e_x + uv * u_x - u_xxt / 6.0;
                let ge = Forcing::eta(&case, x, t);
                let gu = Forcing::u(&case, x, t);
                worst = worst.max((fe - ge).abs() / ge.abs().max(1.0));
                worst = worst.max((fu - gu).abs() / gu.abs().max(1.0));
            }
            assert!(worst < 1e-6, "{case:?}: {worst}");
        }
    }

    #[test]
    fn initial_guess() {
        let g = petviashvili_initial_guess(1.6f64.sqrt()).unwrap();
        let (e, u) = g(0.0);
        assert!((e - 0.6).abs() < 1e-14);
        assert!(u > 0.0 && e > 0.0);
        assert!(g(-3.0).1.signum() == g(-3.0).0.signum());
        assert!(petviashvili_initial_guess(1.0).is_err());
        assert!(petviashvili_initial_guess(0.5).is_err());
    }

    #[test]
    fn petviashvili_small_periodic() {
        let sp = MixedSpaces::build(-20.0, 20.0, 200, 2, BoundaryCondition::Periodic).unwrap();
        let wave = petviashvili_solve(&sp, &PetviashviliConfig::new(1.6f64.sqrt())).unwrap();
        assert!(*wave.residual_history.last().unwrap() < 1e-10);
        // a coarser quadratic run agrees with a finer cubic one
        let fine = MixedSpaces::build(-20.0, 20.0, 400, 3, BoundaryCondition::Periodic).unwrap();
        let reference = petviashvili_solve(&fine, &PetviashviliConfig::new(1.6f64.sqrt())).unwrap();
        assert!((wave.amplitude - reference.amplitude).abs() < 1e-4);
        assert!(wave.amplitude > 0.0 && wave.amplitude < 0.6);
        assert!(petviashvili_residual(&wave).unwrap() < 1e-9);
        let hist = &wave.residual_history;
        for win in hist[3..].windows(6) {
            assert!(win[5] < win[0], "{hist:?}");
        }
    }

    #[test]
    fn petviashvili_iteration_limit() {
        let sp = MixedSpaces::build(-20.0, 20.0, 100, 1, BoundaryCondition::Periodic).unwrap();
        let mut cfg = PetviashviliConfig::new(1.3);
        cfg.max_iter = 3;
        match petviashvili_solve(&sp, &cfg) {
            Err(Error::NonConvergence {
                iterations, history, ..
            }) => {
                assert_eq!(iterations, 3);
                assert_eq!(history.len(), 4);
            }
            other => panic!("{other:?}"),
        }
    }
}
