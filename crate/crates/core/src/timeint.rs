//! Explicit Runge–Kutta stepping and energy relaxation.
//!
//! A relaxed step moves along the usual RK direction `d = Σ b_i f_i` by
//! `γΔt` instead of `Δt`, with `γ` chosen so that the discrete energy does
//! not change, and advances the clock by `γΔt` as well. Because the energy is
//! cubic, `𝓔(y + τd) − 𝓔(y) = ½τ(Γ + Bτ + Aτ²)` and the non-trivial root
//! near `γ = 1` is found by a secant iteration on the bracketed factor.

use crate::functionals::{self, Field, InvariantRecord, RelaxationCoefficients};
use crate::semidisc::{MixedState, SchemeKind, SemidiscOperator};
use crate::{Error, Result};

/// Explicit Butcher tableau.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    /// Strictly lower triangular, row-major `s × s`.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub order: usize,
}

impl ButcherTableau {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>, order: usize) -> Result<Self> {
        let s = b.len();
        if s == 0 || a.len() != s || c.len() != s || a.iter().any(|row| row.len() != s) {
            return Err(Error::config("tableau dimensions do not agree"));
        }
        for (i, row) in a.iter().enumerate() {
            if row[i..].iter().any(|&v| v != 0.0) {
                return Err(Error::config("tableau is not explicit"));
            }
            if (row.iter().sum::<f64>() - c[i]).abs() > 1e-14 {
                return Err(Error::config(format!("row {i} of A does not sum to c_{i}")));
            }
        }
        if (b.iter().sum::<f64>() - 1.0).abs() > 1e-14 {
            return Err(Error::config("weights b do not sum to 1"));
        }
        Ok(Self { a, b, c, order })
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }
}

/// The classical four-stage, fourth-order method.
pub fn classic_rk4() -> ButcherTableau {
    ButcherTableau {
        a: vec![
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.5, 0.0, 0.0, 0.0],
            vec![0.0, 0.5, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ],
        b: vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
        c: vec![0.0, 0.5, 0.5, 1.0],
        order: 4,
    }
}

/// Forward Euler, handy in tests.
pub fn euler() -> ButcherTableau {
    ButcherTableau {
        a: vec![vec![0.0]],
        b: vec![1.0],
        c: vec![0.0],
        order: 1,
    }
}

/// Vector-like states the RK machinery can combine.
pub trait RkState: Clone {
    /// `self += a·x`.
    fn axpy(&mut self, a: f64, x: &Self);
    /// Zero of the same shape.
    fn zeroed(&self) -> Self;
}

impl RkState for f64 {
    fn axpy(&mut self, a: f64, x: &Self) {
        *self += a * x;
    }
    fn zeroed(&self) -> Self {
        0.0
    }
}

impl RkState for Vec<f64> {
    fn axpy(&mut self, a: f64, x: &Self) {
        self.iter_mut().zip(x).for_each(|(p, q)| *p += a * q);
    }
    fn zeroed(&self) -> Self {
        vec![0.0; self.len()]
    }
}

impl RkState for MixedState {
    fn axpy(&mut self, a: f64, x: &Self) {
        MixedState::axpy(self, a, x);
    }
    fn zeroed(&self) -> Self {
        let mut z = self.clone();
        z.scale(0.0);
        z
    }
}

/// `d = Σ b_i f(t + c_iΔt, y_i)` with the stages built from the unrelaxed
/// `Δt`.
pub fn rk_direction<Y: RkState>(
    mut f: impl FnMut(f64, &Y) -> Result<Y>,
    y: &Y,
    t: f64,
    dt: f64,
    tab: &ButcherTableau,
) -> Result<Y> {
    let s = tab.stages();
    let mut slopes: Vec<Y> = Vec::with_capacity(s);
    for i in 0..s {
        let mut yi = y.clone();
        for (j, k) in slopes.iter().enumerate() {
            let aij = tab.a[i][j];
            if aij != 0.0 {
                yi.axpy(dt * aij, k);
            }
        }
        slopes.push(f(t + tab.c[i] * dt, &yi)?);
    }
    let mut d = y.zeroed();
    for (bi, k) in tab.b.iter().zip(&slopes) {
        d.axpy(*bi, k);
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationConfig {
    pub enabled: bool,
    pub root_tol: f64,
    pub max_secant_iter: usize,
}

impl Default for RelaxationConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            root_tol: 1e-10,
            max_secant_iter: 50,
        }
    }
}

impl RelaxationConfig {
    pub fn disabled() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }
}

/// Root of `Γ + BγΔt + A(γΔt)² = 0` near 1 by the secant method.
///
/// Returns `(γ, iterations)`. The seeds are `γ₀` (the previous step's γ, or
/// 1) and `γ₀ + Δt²`.
pub fn solve_gamma(
    coef: &RelaxationCoefficients,
    dt: f64,
    previous: Option<f64>,
    config: &RelaxationConfig,
    t: f64,
) -> Result<(f64, usize)> {
    let fail = |reason: String| Error::Relaxation { t, reason };
    if coef.a == 0.0 && coef.b == 0.0 && coef.gamma == 0.0 {
        return Err(fail("zero update direction".into()));
    }
    let f = |g: f64| {
        let tau = g * dt;
        coef.gamma + tau * (coef.b + tau * coef.a)
    };
    let mut g0 = previous.unwrap_or(1.0);
    let mut g1 = g0 + dt * dt;
    let mut f0 = f(g0);
    let mut f1 = f(g1);
    let mut iterations = 0;
    while iterations < config.max_secant_iter {
        if f1 == 0.0 {
            break;
        }
        let denom = f1 - f0;
        if denom == 0.0 || !denom.is_finite() {
            return Err(fail(format!("secant iteration stalled at γ = {g1}")));
        }
        let g2 = g1 - f1 * (g1 - g0) / denom;
        iterations += 1;
        let step = (g2 - g1).abs();
        g0 = g1;
        f0 = f1;
        g1 = g2;
        f1 = f(g1);
        if step <= config.root_tol {
            break;
        }
        if iterations == config.max_secant_iter {
            return Err(fail(format!(
                "secant iteration did not converge in {} iterations",
                config.max_secant_iter
            )));
        }
    }
    if !(g1 > 0.5 && g1 < 1.5) {
        return Err(fail(format!("γ = {g1} outside (1/2, 3/2); the time step is too large")));
    }
    Ok((g1, iterations))
}

/// Closed-form roots of `A τ² + B τ + Γ = 0`, as `γ = τ/Δt`. Kept only as a
/// reference for the secant solver; it suffers from cancellation.
pub fn gamma_quadratic(coef: &RelaxationCoefficients, dt: f64) -> Option<f64> {
    let (a, b, c) = (coef.a, coef.b, coef.gamma);
    if a == 0.0 {
        return (b != 0.0).then(|| -c / b / dt);
    }
    let disc = b * b - 4.0 * a * c;
    (disc >= 0.0).then(|| (-b + disc.sqrt()) / (2.0 * a) / dt)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t_new: f64,
    pub gamma: f64,
    pub secant_iterations: usize,
    pub invariants: Option<InvariantRecord>,
}

/// A scheme, a tableau and a relaxation policy.
#[derive(Debug)]
pub struct Integrator<'a> {
    op: &'a SemidiscOperator,
    tableau: ButcherTableau,
    relaxation: RelaxationConfig,
}

impl<'a> Integrator<'a> {
    pub fn new(op: &'a SemidiscOperator, tableau: ButcherTableau, relaxation: RelaxationConfig) -> Result<Self> {
        if relaxation.enabled {
            if op.is_forced() {
                return Err(Error::config(
                    "relaxation needs a homogeneous problem; disable it for forced runs",
                ));
            }
            if op.scheme() == SchemeKind::Standard {
                return Err(Error::config("relaxation is only defined for the conservative scheme"));
            }
        }
        Ok(Self {
            op,
            tableau,
            relaxation,
        })
    }

    pub fn operator(&self) -> &SemidiscOperator {
        self.op
    }

    /// One step of nominal size `dt`. `previous` is the last accepted γ.
    pub fn step(&self, y: &MixedState, dt: f64, previous: Option<f64>) -> Result<(MixedState, StepRecord)> {
        let d = rk_direction(
            |t, s: &MixedState| {
                let mut s = s.clone();
                s.t = t;
                self.op.rhs(&s)
            },
            y,
            y.t,
            dt,
            &self.tableau,
        )?;
        let (gamma, secant_iterations) = if self.relaxation.enabled {
            let sp = self.op.spaces();
            let coef = functionals::relaxation_coefficients(
                Field::new(&sp.h, &y.h),
                Field::new(&sp.u, &y.u),
                Field::new(&sp.h, &d.h),
                Field::new(&sp.u, &d.u),
            )?;
            if coef.a == 0.0 && coef.b == 0.0 && coef.gamma == 0.0 {
                (1.0, 0)
            } else {
                solve_gamma(&coef, dt, previous, &self.relaxation, y.t)?
            }
        } else {
            (1.0, 0)
        };
        let mut next = y.clone();
        next.axpy(gamma * dt, &d);
        next.t = y.t + gamma * dt;
        if !next.is_finite() {
            return Err(Error::NonFinite { t: next.t });
        }
        let rec = StepRecord {
            t_new: next.t,
            gamma,
            secant_iterations,
            invariants: None,
        };
        Ok((next, rec))
    }

    /// Steps until `t ≥ T` (the last step is not shortened). Invariants are
    /// recorded every `stride` steps and after the final one; `observer`
    /// sees every accepted state.
    pub fn integrate(
        &self,
        y0: MixedState,
        t_end: f64,
        dt: f64,
        stride: usize,
        mut observer: impl FnMut(&MixedState, &StepRecord) -> Result<()>,
    ) -> Result<(MixedState, Vec<StepRecord>)> {
        if !(dt > 0.0) {
            return Err(Error::config("time step must be positive"));
        }
        let stride = stride.max(1);
        let sp = self.op.spaces();
        let mut records = vec![StepRecord {
            t_new: y0.t,
            gamma: 1.0,
            secant_iterations: 0,
            invariants: Some(y0.invariants(sp)?),
        }];
        let mut y = y0;
        let mut previous = None;
        let mut n = 0usize;
        while y.t < t_end - 1e-9 * dt {
            let (next, mut rec) = self.step(&y, dt, previous)?;
            n += 1;
            if self.relaxation.enabled {
                previous = Some(rec.gamma);
            }
            let last = next.t >= t_end - 1e-9 * dt;
            if n % stride == 0 || last {
                rec.invariants = Some(next.invariants(sp)?);
            }
            observer(&next, &rec)?;
            records.push(rec);
            y = next;
        }
        Ok((y, records))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semidisc::{BoundaryCondition, MixedSpaces};

    #[test]
    fn rk4_tableau_is_consistent() {
        let t = classic_rk4();
        assert!((t.b.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(ButcherTableau::new(t.a.clone(), t.b.clone(), t.c.clone(), 4).is_ok());
        let mut bad = t.a.clone();
        bad[0][1] = 1.0;
        assert!(ButcherTableau::new(bad, t.b, t.c, 4).is_err());
    }

    #[test]
    fn rk4_one_step_exponential() {
        let d = rk_direction(|_, y: &f64| Ok(*y), &1.0, 0.0, 0.1, &classic_rk4()).unwrap();
        let y1 = 1.0 + 0.1 * d;
        let expect = 1.0 + 0.1 + 0.01 / 2.0 + 0.001 / 6.0 + 0.0001 / 24.0;
        assert!((y1 - expect).abs() < 1e-15);
    }

    #[test]
    fn euler_direction_is_the_slope() {
        let y = vec![1.0, -2.0];
        let d = rk_direction(
            |_, y: &Vec<f64>| Ok(y.iter().map(|v| 3.0 * v).collect()),
            &y,
            0.0,
            0.5,
            &euler(),
        )
        .unwrap();
        assert_eq!(d, vec![3.0, -6.0]);
    }

    #[test]
    fn rk4_order_four() {
        let err = |n: usize| {
            let dt = 1.0 / n as f64;
            let mut y = 1.0;
            for k in 0..n {
                let d = rk_direction(|_, y: &f64| Ok(-*y), &y, k as f64 * dt, dt, &classic_rk4()).unwrap();
                y += dt * d;
            }
            (y - (-1.0f64).exp()).abs()
        };
        let errs: Vec<f64> = [10, 20, 40, 80].iter().map(|&n| err(n)).collect();
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!((rate - 4.0).abs() < 0.1, "rate {rate}");
        }
    }

    #[test]
    fn secant_matches_quadratic_formula() {
        let dt = 0.1;
        // prescribe the root γ* = 1.003 and pick Γ accordingly
        let (a, b) = (0.8, 2.5);
        let tau = 1.003 * dt;
        let coef = RelaxationCoefficients {
            a,
            b,
            gamma: -(b * tau + a * tau * tau),
        };
        let (g, it) = solve_gamma(&coef, dt, None, &RelaxationConfig::default(), 0.0).unwrap();
        let q = gamma_quadratic(&coef, dt).unwrap();
        assert!((g - q).abs() < 1e-10 && (g - 1.003).abs() < 1e-10, "{g} {q}");
        assert!(it > 0);
    }

    #[test]
    fn gamma_outside_window_is_rejected() {
        let dt = 0.1;
        let coef = RelaxationCoefficients {
            a: 0.0,
            b: 1.0,
            gamma: -2.0 * dt,
        };
        assert!(matches!(
            solve_gamma(&coef, dt, None, &RelaxationConfig::default(), 3.0),
            Err(Error::Relaxation { .. })
        ));
    }

    fn pulse(sp: &MixedSpaces) -> MixedState {
        let s = |x: f64| 1.0 / (x.cosh() * x.cosh());
        MixedState::project(
            sp,
            0.0,
            |x| 0.3 * s(x),
            |x| -0.6 * s(x) * x.tanh(),
            |x| 0.3 * s(x),
            |x| -0.6 * s(x) * x.tanh(),
        )
        .unwrap()
    }

    #[test]
    fn relaxed_steps_conserve_energy_and_shift_time() {
        let sp = MixedSpaces::build(-15.0, 15.0, 60, 2, BoundaryCondition::Periodic).unwrap();
        let op = SemidiscOperator::setup(sp.clone(), SchemeKind::Conservative, None).unwrap();
        let int = Integrator::new(&op, classic_rk4(), RelaxationConfig::default()).unwrap();
        let y0 = pulse(&sp);
        let e0 = y0.invariants(&sp).unwrap().energy;
        let (y1, r1) = int.step(&y0, 0.2, None).unwrap();
        let (y2, r2) = int.step(&y1, 0.2, Some(r1.gamma)).unwrap();
        let e2 = y2.invariants(&sp).unwrap().energy;
        assert!((e2 - e0).abs() < 1e-13);
        assert!((y2.t - 0.2 * (r1.gamma + r2.gamma)).abs() < 1e-15);
        assert!(r1.gamma != 1.0);
    }

    #[test]
    fn zero_state_without_relaxation() {
        let sp = MixedSpaces::build(0.0, 1.0, 8, 1, BoundaryCondition::Reflective).unwrap();
        let op = SemidiscOperator::setup(sp.clone(), SchemeKind::Conservative, None).unwrap();
        let int = Integrator::new(&op, classic_rk4(), RelaxationConfig::disabled()).unwrap();
        let (y, rec) = int.step(&MixedState::zeros(&sp), 0.1, None).unwrap();
        assert_eq!(rec.gamma, 1.0);
        assert_eq!(y.t, 0.1);
        let (yf, recs) = int
            .integrate(MixedState::zeros(&sp), 1.0, 0.1, 1, |_, _| Ok(()))
            .unwrap();
        assert!(yf.h.iter().all(|&v| v == 0.0));
        assert_eq!(recs.len(), 11);
        assert!((yf.t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relaxation_with_standard_or_forcing_rejected() {
        let sp = MixedSpaces::build(0.0, 1.0, 8, 1, BoundaryCondition::Periodic).unwrap();
        let op = SemidiscOperator::setup(sp, SchemeKind::Standard, None).unwrap();
        assert!(matches!(
            Integrator::new(&op, classic_rk4(), RelaxationConfig::default()),
            Err(Error::Config(_))
        ));
    }
}
