//! Acceptance criteria with pinned tolerances.
//!
//! Every criterion is a [`GateReport`] made of numeric [`Check`]s. Runs shared
//! between criteria are computed once per [`Suite`].

use std::fmt;
use std::sync::OnceLock;

use crate::diagnostics::{ErrorReport, RateRow};
use crate::experiments::{
    run_collision, run_convergence_study, run_exact_wave_study, run_reflection, run_solitary_propagation,
    CollisionConfig, ConvergenceConfig, ExactWaveConfig, ExactWaveStudy, ReflectionConfig, SolitaryConfig,
    SolitaryResult, WavesResult, REFINEMENT_DX,
};
use crate::fem::{assemble_mass, interpolate, l2_project, BoundaryVariant, FemSpace, QuadratureRule};
use crate::functionals::{energy, relaxation_coefficients, Field};
use crate::linalg::factor;
use crate::semidisc::{BoundaryCondition, Forcing, MixedSpaces, SchemeKind};
use crate::timeint::{classic_rk4, rk_direction};
use crate::waves::{petviashvili_solve, ManufacturedCase, PetviashviliConfig, TravellingWave};

/// Accepted range of a measured value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    /// `|v − target| ≤ rel·|target|`.
    Relative {
        target: f64,
        rel: f64,
    },
    /// `target/factor ≤ v ≤ target·factor`.
    Factor {
        target: f64,
        factor: f64,
    },
    /// `lo ≤ v ≤ hi`.
    Range {
        lo: f64,
        hi: f64,
    },
    /// `lo < v < hi`.
    Open {
        lo: f64,
        hi: f64,
    },
    AtMost(f64),
    AtLeast(f64),
}

impl Bound {
    pub fn holds(&self, v: f64) -> bool {
        if !v.is_finite() {
            return false;
        }
        match *self {
            Self::Relative { target, rel } => (v - target).abs() <= rel * target.abs(),
            Self::Factor { target, factor } => v >= target / factor && v <= target * factor,
            Self::Range { lo, hi } => v >= lo && v <= hi,
            Self::Open { lo, hi } => v > lo && v < hi,
            Self::AtMost(hi) => v <= hi,
            Self::AtLeast(lo) => v >= lo,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Relative { target, rel } => write!(f, "{target:.4e} ± {}%", rel * 100.0),
            Self::Factor { target, factor } => write!(f, "{target:.4e} within ×{factor}"),
            Self::Range { lo, hi } => write!(f, "[{lo}, {hi}]"),
            Self::Open { lo, hi } => write!(f, "({lo:e}, {hi:e})"),
            Self::AtMost(hi) => write!(f, "≤ {hi:e}"),
            Self::AtLeast(lo) => write!(f, "≥ {lo}"),
        }
    }
}

/// One measured number against its bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub bound: Bound,
    pub pass: bool,
    /// Set for reference values this implementation does not reproduce; the
    /// check still reports FAIL.
    pub known_deviation: Option<&'static str>,
}

impl Check {
    pub fn new(label: impl Into<String>, measured: f64, bound: Bound) -> Self {
        Self {
            label: label.into(),
            measured,
            pass: bound.holds(measured),
            bound,
            known_deviation: None,
        }
    }

    fn known(mut self, why: &'static str) -> Self {
        self.known_deviation = Some(why);
        self
    }
}

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct GateReport {
    pub id: &'static str,
    pub title: &'static str,
    pub checks: Vec<Check>,
    /// A run that could not complete.
    pub error: Option<String>,
}

impl GateReport {
    fn new(id: &'static str, title: &'static str) -> Self {
        Self {
            id,
            title,
            checks: Vec::new(),
            error: None,
        }
    }

    fn failed(id: &'static str, title: &'static str, error: String) -> Self {
        Self {
            error: Some(error),
            ..Self::new(id, title)
        }
    }

    fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.pass)
    }

    /// True when every failing check is a documented deviation.
    pub fn passed_except_known(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.pass || c.known_deviation.is_some())
    }

    /// `PASS|FAIL <id> <title>: label=value [bound] ...` on one line.
    pub fn line(&self) -> String {
        let mut s = format!(
            "{} criterion {} {}:",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.title
        );
        if let Some(e) = &self.error {
            s.push_str(&format!(" error: {e}"));
        }
        for c in &self.checks {
            s.push_str(&format!(
                " | {}={:.4e} [{}] {}",
                c.label,
                c.measured,
                c.bound,
                if c.pass { "ok" } else { "FAIL" }
            ));
            if let (false, Some(why)) = (c.pass, c.known_deviation) {
                s.push_str(&format!(" (known: {why})"));
            }
        }
        s
    }
}

type Shared<T> = OnceLock<Result<T, String>>;

fn shared<T>(cell: &Shared<T>, f: impl FnOnce() -> crate::Result<T>) -> Result<&T, String> {
    cell.get_or_init(|| f().map_err(|e| e.to_string()))
        .as_ref()
        .map_err(Clone::clone)
}

/// Runs shared between criteria, computed on first use.
#[derive(Debug, Default)]
pub struct Suite {
    /// Worker threads for the refinement studies.
    pub jobs: usize,
    reflective: [Shared<ErrorReport>; 3],
    periodic: [Shared<ErrorReport>; 3],
    exact_wave: Shared<ExactWaveStudy>,
    solitary: [Shared<SolitaryResult>; 3],
    standard: Shared<SolitaryResult>,
    standard_fine: Shared<SolitaryResult>,
    half_step: Shared<SolitaryResult>,
    reflection: Shared<WavesResult>,
    collision: Shared<WavesResult>,
    petviashvili: Shared<TravellingWave>,
    petviashvili_sqrt: Shared<TravellingWave>,
}

const R1_CONVERGENCE: &str = "reference error lies below the P1 best-approximation bound; not reproducible";
const AMPLITUDE: &str = "converged discrete wave has amplitude 0.582 for this speed";

impl Suite {
    pub fn new(jobs: usize) -> Self {
        Self {
            jobs: jobs.max(1),
            ..Self::default()
        }
    }

    pub fn convergence(&self, bc: BoundaryCondition, degree: usize) -> Result<&ErrorReport, String> {
        let cells = match bc {
            BoundaryCondition::Reflective => &self.reflective,
            BoundaryCondition::Periodic => &self.periodic,
        };
        let cell = cells.get(degree.wrapping_sub(1)).ok_or("degree outside 1..=3")?;
        shared(cell, || {
            let mut cfg = ConvergenceConfig::new(bc, SchemeKind::Conservative, degree, &REFINEMENT_DX);
            cfg.jobs = self.jobs;
            run_convergence_study(&cfg)
        })
    }

    pub fn exact_wave(&self) -> Result<&ExactWaveStudy, String> {
        shared(&self.exact_wave, || {
            let mut cfg = ExactWaveConfig::new(3, &[0.2, 0.1, 0.05]);
            cfg.jobs = self.jobs;
            run_exact_wave_study(&cfg)
        })
    }

    /// Conservative relaxed solitary run, `Δx = Δt = 0.1`, `T = 100`.
    pub fn solitary(&self, degree: usize) -> Result<&SolitaryResult, String> {
        let cell = self
            .solitary
            .get(degree.wrapping_sub(1))
            .ok_or("degree outside 1..=3")?;
        shared(cell, || {
            run_solitary_propagation(&SolitaryConfig::standard_case(degree, SchemeKind::Conservative))
        })
    }

    /// Standard scheme, `r = 1`, at `Δx = Δt = 0.1` or `0.05`.
    pub fn standard(&self, fine: bool) -> Result<&SolitaryResult, String> {
        let cell = if fine { &self.standard_fine } else { &self.standard };
        shared(cell, || {
            let mut cfg = SolitaryConfig::standard_case(1, SchemeKind::Standard);
            if fine {
                cfg.dx = 0.05;
                cfg.time.dt = 0.05;
            }
            run_solitary_propagation(&cfg)
        })
    }

    /// As `solitary(1)` with `Δt = 0.05`.
    pub fn half_step(&self) -> Result<&SolitaryResult, String> {
        shared(&self.half_step, || {
            let mut cfg = SolitaryConfig::standard_case(1, SchemeKind::Conservative);
            cfg.time.dt = 0.05;
            run_solitary_propagation(&cfg)
        })
    }

    pub fn reflection(&self) -> Result<&WavesResult, String> {
        shared(&self.reflection, || run_reflection(&ReflectionConfig::default()))
    }

    pub fn collision(&self) -> Result<&WavesResult, String> {
        shared(&self.collision, || run_collision(&CollisionConfig::default()))
    }

    /// `c_s = 1.6` on `[−40, 40]` (or `√1.6` on `[−20, 20]`), `r = 3`, `Δx = 0.1`.
    pub fn petviashvili(&self, sqrt_speed: bool) -> Result<&TravellingWave, String> {
        let cell = if sqrt_speed {
            &self.petviashvili_sqrt
        } else {
            &self.petviashvili
        };
        shared(cell, || {
            let (c, l) = if sqrt_speed { (1.6f64.sqrt(), 20.0) } else { (1.6, 40.0) };
            let sp = MixedSpaces::build(-l, l, (20.0 * l) as usize, 3, BoundaryCondition::Periodic)?;
            petviashvili_solve(&sp, &PetviashviliConfig::new(c))
        })
    }
}

fn rate(rows: &[RateRow], pick: impl Fn(&RateRow) -> Option<f64>) -> f64 {
    rows.last().and_then(pick).unwrap_or(f64::NAN)
}

macro_rules! gate {
    ($id:expr, $title:expr, $body:expr) => {{
        let body = || -> Result<GateReport, String> {
            let mut g = GateReport::new($id, $title);
            #[allow(clippy::redundant_closure_call)]
            ($body)(&mut g)?;
            Ok(g)
        };
        body().unwrap_or_else(|e| GateReport::failed($id, $title, e))
    }};
}

/// Reflective convergence of the linear and cubic elements.
pub fn criterion_1(s: &Suite) -> GateReport {
    gate!("1", "reflective convergence", |g: &mut GateReport| {
        let r1 = s.convergence(BoundaryCondition::Reflective, 1)?;
        let r3 = s.convergence(BoundaryCondition::Reflective, 3)?;
        let (q1, q3) = (
            r1.rates().map_err(|e| e.to_string())?,
            r3.rates().map_err(|e| e.to_string())?,
        );
        g.push(
            Check::new(
                "r1 E0[H](0.1)",
                r1.rows[0].e0_h,
                Bound::Relative {
                    target: 5.595e-2,
                    rel: 0.02,
                },
            )
            .known(R1_CONVERGENCE),
        );
        g.push(Check::new(
            "r1 R0[H]",
            rate(&q1, |r| r.r0_h),
            Bound::Range { lo: 1.95, hi: 2.05 },
        ));
        g.push(Check::new(
            "r3 E0[H](0.1)",
            r3.rows[0].e0_h,
            Bound::Relative {
                target: 7.335e-5,
                rel: 0.02,
            },
        ));
        g.push(Check::new(
            "r3 R0[H]",
            rate(&q3, |r| r.r0_h),
            Bound::Range { lo: 3.9, hi: 4.1 },
        ));
        Ok::<(), String>(())
    })
}

/// Suboptimal even degree, superconvergent odd degree.
pub fn criterion_2(s: &Suite) -> GateReport {
    gate!("2", "even/odd dichotomy", |g: &mut GateReport| {
        let q2 = s
            .convergence(BoundaryCondition::Reflective, 2)?
            .rates()
            .map_err(|e| e.to_string())?;
        let q3 = s
            .convergence(BoundaryCondition::Reflective, 3)?
            .rates()
            .map_err(|e| e.to_string())?;
        g.push(Check::new(
            "r2 R0[H]",
            rate(&q2, |r| r.r0_h),
            Bound::Range { lo: 1.9, hi: 2.1 },
        ));
        g.push(Check::new(
            "r2 R0[U]",
            rate(&q2, |r| r.r0_u),
            Bound::Range { lo: 1.9, hi: 2.1 },
        ));
        g.push(Check::new(
            "r2 R1[H]",
            rate(&q2, |r| r.r1_h),
            Bound::Range { lo: 0.9, hi: 1.1 },
        ));
        g.push(Check::new(
            "r2 R1[U]",
            rate(&q2, |r| r.r1_u),
            Bound::Range { lo: 0.9, hi: 1.1 },
        ));
        g.push(Check::new(
            "r3 tR1[H]",
            rate(&q3, |r| r.tr1_h),
            Bound::Range { lo: 3.9, hi: 4.1 },
        ));
        Ok::<(), String>(())
    })
}

/// Periodic convergence.
pub fn criterion_3(s: &Suite) -> GateReport {
    gate!("3", "periodic convergence", |g: &mut GateReport| {
        let r1 = s.convergence(BoundaryCondition::Periodic, 1)?;
        let q3 = s
            .convergence(BoundaryCondition::Periodic, 3)?
            .rates()
            .map_err(|e| e.to_string())?;
        g.push(
            Check::new(
                "r1 E0[H](0.1)",
                r1.rows[0].e0_h,
                Bound::Relative {
                    target: 6.310e-2,
                    rel: 0.02,
                },
            )
            .known(R1_CONVERGENCE),
        );
        g.push(Check::new(
            "r3 R0[H]",
            rate(&q3, |r| r.r0_h),
            Bound::Range { lo: 3.9, hi: 4.1 },
        ));
        g.push(Check::new(
            "r3 R0[U]",
            rate(&q3, |r| r.r0_u),
            Bound::Range { lo: 3.9, hi: 4.1 },
        ));
        g.push(Check::new(
            "r3 tR1[H]",
            rate(&q3, |r| r.tr1_h),
            Bound::Range { lo: 3.9, hi: 4.1 },
        ));
        Ok::<(), String>(())
    })
}

/// The closed-form travelling wave on a periodic interval.
pub fn criterion_4(s: &Suite) -> GateReport {
    gate!("4", "exact travelling wave", |g: &mut GateReport| {
        let st = s.exact_wave()?;
        let q = st.report.rates().map_err(|e| e.to_string())?;
        let worst = st.report.rows.iter().map(|r| r.e0_h.max(r.e0_u)).fold(0.0, f64::max);
        g.push(Check::new("max E0", worst, Bound::AtMost(1.0)));
        g.push(Check::new(
            "r3 R0[H]",
            rate(&q, |r| r.r0_h),
            Bound::Range { lo: 3.9, hi: 4.1 },
        ));
        g.push(Check::new(
            "r3 R0[U]",
            rate(&q, |r| r.r0_u),
            Bound::Range { lo: 3.9, hi: 4.1 },
        ));
        Ok::<(), String>(())
    })
}

/// Discrete conservation with relaxation.
pub fn criterion_5(s: &Suite) -> GateReport {
    gate!("5", "exact conservation", |g: &mut GateReport| {
        let d = s.solitary(1)?.evolution.drift;
        g.push(Check::new("solitary E_M", d.mass, Bound::AtMost(1e-13)));
        g.push(Check::new("solitary E_I", d.momentum, Bound::AtMost(1e-13)));
        g.push(Check::new("solitary E_E", d.energy, Bound::AtMost(1e-13)));
        let d = s.reflection()?.evolution.drift;
        g.push(Check::new("reflection E_M", d.mass, Bound::AtMost(1e-12)));
        g.push(Check::new("reflection E_E", d.energy, Bound::AtMost(1e-12)));
        Ok::<(), String>(())
    })
}

/// Energy drift of the standard scheme.
pub fn criterion_6(s: &Suite) -> GateReport {
    gate!("6", "standard-scheme energy drift", |g: &mut GateReport| {
        let coarse = s.standard(false)?.evolution.drift.energy;
        let fine = s.standard(true)?.evolution.drift.energy;
        g.push(Check::new(
            "E_E(0.1)",
            coarse,
            Bound::Factor {
                target: 2.2332e-5,
                factor: 3.0,
            },
        ));
        g.push(Check::new("E_E(0.1)/E_E(0.05)", coarse / fine, Bound::AtLeast(8.0)));
        Ok::<(), String>(())
    })
}

/// Mean of `γ − 1` over the steps of a run.
pub fn mean_gamma_excess(r: &SolitaryResult) -> f64 {
    let steps = &r.evolution.invariants[1..];
    steps.iter().map(|s| s.gamma - 1.0).sum::<f64>() / steps.len().max(1) as f64
}

/// Size and step dependence of the relaxation parameter.
pub fn criterion_7(s: &Suite) -> GateReport {
    gate!("7", "relaxation parameter", |g: &mut GateReport| {
        let r = s.solitary(1)?;
        let h = s.half_step()?;
        let band = Bound::Open { lo: 1e-7, hi: 1e-4 };
        g.push(Check::new("min γ−1", r.evolution.gamma.min, band));
        g.push(Check::new("max γ−1", r.evolution.gamma.max, band));
        g.push(Check::new(
            "mean γ−1",
            mean_gamma_excess(r),
            Bound::Factor {
                target: 5.47e-6,
                factor: 3.0,
            },
        ));
        g.push(Check::new(
            "max|γ−1| ratio dt/2",
            r.evolution.gamma.max_abs() / h.evolution.gamma.max_abs(),
            Bound::Range { lo: 4.0, hi: 16.0 },
        ));
        Ok::<(), String>(())
    })
}

/// Petviashvili convergence and amplitude.
pub fn criterion_8(s: &Suite) -> GateReport {
    gate!("8", "Petviashvili iteration", |g: &mut GateReport| {
        let w = s.petviashvili(false)?;
        g.push(Check::new("iterations", w.iterations() as f64, Bound::AtMost(60.0)));
        let last = w.residual_history.last().copied().unwrap_or(f64::NAN);
        g.push(Check::new("residual", last, Bound::AtMost(1e-10)));
        let w = s.petviashvili(true)?;
        g.push(Check::new("amplitude(√1.6)", w.amplitude, Bound::Range { lo: 0.5899, hi: 0.5939 }).known(AMPLITUDE));
        Ok::<(), String>(())
    })
}

/// Wave-tracking errors of the solitary run.
pub fn criterion_9(s: &Suite) -> GateReport {
    gate!("9", "wave-tracking errors", |g: &mut GateReport| {
        let (amp, _, shape) = s.solitary(3)?.mean_errors(80.0, 100.0).ok_or("no tracking records")?;
        g.push(Check::new(
            "r3 E_amp",
            amp,
            Bound::Factor {
                target: 8.1121e-6,
                factor: 3.0,
            },
        ));
        g.push(Check::new(
            "r3 E_shape",
            shape,
            Bound::Factor {
                target: 9.0861e-6,
                factor: 3.0,
            },
        ));
        let (_, phase, _) = s.solitary(1)?.mean_errors(80.0, 100.0).ok_or("no tracking records")?;
        g.push(Check::new(
            "r1 E_phase",
            phase,
            Bound::Factor {
                target: 2.4913e-2,
                factor: 3.0,
            },
        ));
        Ok::<(), String>(())
    })
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Spot checks of the algebraic properties the schemes rely on.
pub fn criterion_10(_: &Suite) -> GateReport {
    gate!("10", "property checks", |g: &mut GateReport| {
        let e = |err: crate::Error| err.to_string();
        let sp = |r: usize, v: BoundaryVariant| FemSpace::build(0.0, 2.0, 9, r, v).map_err(e);

        // energy along a direction is exactly the cubic with the relaxation coefficients
        let mut worst: f64 = 0.0;
        for r in 1..=4 {
            let (hs, us) = (sp(r, BoundaryVariant::Free)?, sp(r, BoundaryVariant::ZeroEndpoint)?);
            let h = interpolate(&hs, |x| 0.3 * (2.0 * x).sin());
            let u = interpolate(&us, |x| x * (2.0 - x));
            let dh = interpolate(&hs, |x| (3.0 * x).cos());
            let du = interpolate(&us, |x| (x * std::f64::consts::PI).sin());
            let c = relaxation_coefficients(
                Field::new(&hs, &h),
                Field::new(&us, &u),
                Field::new(&hs, &dh),
                Field::new(&us, &du),
            )
            .map_err(e)?;
            let e0 = energy(Field::new(&hs, &h), Field::new(&us, &u)).map_err(e)?;
            for tau in [0.1, -0.37, 1.3] {
                let ht: Vec<f64> = h.iter().zip(&dh).map(|(a, b)| a + tau * b).collect();
                let ut: Vec<f64> = u.iter().zip(&du).map(|(a, b)| a + tau * b).collect();
                let et = energy(Field::new(&hs, &ht), Field::new(&us, &ut)).map_err(e)?;
                let cubic = 0.5 * tau * (c.gamma + tau * (c.b + tau * c.a));
                worst = worst.max((et - e0 - cubic).abs() / e0.abs().max(et.abs()).max(1.0));
            }
        }
        g.push(Check::new("energy cubic identity", worst, Bound::AtMost(1e-12)));

        // projecting an element of the space returns it
        let mut worst: f64 = 0.0;
        for r in 1..=4 {
            for v in [
                BoundaryVariant::Free,
                BoundaryVariant::ZeroEndpoint,
                BoundaryVariant::Periodic,
            ] {
                let s = sp(r, v)?;
                let c = l2_project(&s, |x| (std::f64::consts::PI * x).sin() + 0.2).map_err(e)?;
                let again =
                    l2_project(&s, |x| crate::fem::evaluate(&s, &c, x).map(|p| p.0).unwrap_or(f64::NAN)).map_err(e)?;
                worst = worst.max(max_abs_diff(&c, &again));
            }
        }
        g.push(Check::new("projection idempotence", worst, Bound::AtMost(1e-11)));

        // n Gauss points integrate degree 2n − 1 exactly
        let mut worst: f64 = 0.0;
        for n in 1..=8 {
            let q = QuadratureRule::gauss_legendre(n);
            let p = (2 * n - 1) as i32;
            let exact = (2.0f64.powi(p + 1) - (-1.0f64).powi(p + 1)) / (p + 1) as f64;
            worst = worst.max((q.integrate(-1.0, 2.0, |x| x.powi(p)) - exact).abs() / exact.abs());
        }
        g.push(Check::new("quadrature exactness", worst, Bound::AtMost(1e-13)));

        // mass-matrix multiply then solve
        let mut worst: f64 = 0.0;
        for r in 1..=4 {
            for v in [
                BoundaryVariant::Free,
                BoundaryVariant::ZeroEndpoint,
                BoundaryVariant::Periodic,
            ] {
                let s = sp(r, v)?;
                let m = assemble_mass(&s);
                let x: Vec<f64> = (0..s.dof_count()).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
                let back = factor(&m).map_err(e)?.solve(&m.matvec(&x)).map_err(e)?;
                worst = worst.max(max_abs_diff(&x, &back));
            }
        }
        g.push(Check::new("multiply-then-solve", worst, Bound::AtMost(1e-11)));

        // classical RK4 on y' = −y
        let err = |n: usize| -> Result<f64, String> {
            let dt = 1.0 / n as f64;
            let mut y = 1.0;
            for k in 0..n {
                y += dt * rk_direction(|_, y: &f64| Ok(-*y), &y, k as f64 * dt, dt, &classic_rk4()).map_err(e)?;
            }
            Ok((y - (-1.0f64).exp()).abs())
        };
        g.push(Check::new(
            "RK4 order",
            (err(20)? / err(40)?).log2(),
            Bound::Range { lo: 3.9, hi: 4.1 },
        ));

        // forcing against an eighth-order finite-difference residual
        const D1: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
        const D2: [f64; 5] = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
        let h = 1e-2;
        let d1 = |f: &dyn Fn(f64) -> f64, x: f64| {
            (1..5)
                .map(|k| D1[k - 1] * (f(x + k as f64 * h) - f(x - k as f64 * h)))
                .sum::<f64>()
                / h
        };
        let d2 = |f: &dyn Fn(f64) -> f64, x: f64| {
            (D2[0] * f(x)
                + (1..5)
                    .map(|k| D2[k] * (f(x + k as f64 * h) + f(x - k as f64 * h)))
                    .sum::<f64>())
                / (h * h)
        };
        let mut worst: f64 = 0.0;
        for case in [ManufacturedCase::Reflective, ManufacturedCase::Periodic] {
            for i in 0..200 {
                // a low-discrepancy walk over [0, 1]²
                let x = (i as f64 * 0.618_033_988_749_895).fract();
                let t = (i as f64 * 0.754_877_666_246_693).fract();
                let eta = |y: f64, s: f64| case.eta(y, s);
                let u = |y: f64, s: f64| case.u(y, s);
                let e_t = d1(&|s| eta(x, s), t);
                let e_x = d1(&|y| eta(y, t), x);
                let e_xxt = d1(&|s| d2(&|y| eta(y, s), x), t);
                let u_t = d1(&|s| u(x, s), t);
                let u_x = d1(&|y| u(y, t), x);
                let u_xxt = d1(&|s| d2(&|y| u(y, s), x), t);
                let (ev, uv) = (eta(x, t), u(x, t));
                let fe = e_t + e_x * uv + (1.0 + ev) * u_x - e_xxt / 6.0;
                let fu = u_t + e_x + uv * u_x - u_xxt / 6.0;
                let (ge, gu) = (Forcing::eta(&case, x, t), Forcing::u(&case, x, t));
                worst = worst.max((fe - ge).abs() / ge.abs().max(1.0));
                worst = worst.max((fu - gu).abs() / gu.abs().max(1.0));
            }
        }
        g.push(Check::new("forcing oracle", worst, Bound::AtMost(1e-6)));
        Ok::<(), String>(())
    })
}

/// Energy drift of the conservative scheme to `T = 1000`. Slow.
pub fn long_run(_: &Suite) -> GateReport {
    gate!("T1000", "long-time energy conservation", |g: &mut GateReport| {
        let mut cfg = SolitaryConfig::standard_case(1, SchemeKind::Conservative);
        cfg.time.t_end = 1000.0;
        cfg.time.stride = 10;
        cfg.track_stride = 100;
        let r = run_solitary_propagation(&cfg).map_err(|e| e.to_string())?;
        g.push(Check::new("E_E", r.evolution.drift.energy, Bound::AtMost(1e-13)));
        Ok::<(), String>(())
    })
}

/// Collision sanity: invariants of the two-wave run stay put.
pub fn collision(s: &Suite) -> GateReport {
    gate!("collision", "two-wave collision", |g: &mut GateReport| {
        let ev = &s.collision()?.evolution;
        g.push(Check::new("E_M", ev.drift.mass, Bound::AtMost(1e-12)));
        g.push(Check::new("E_E", ev.drift.energy, Bound::AtMost(1e-12)));
        let band = Bound::Open { lo: 1e-7, hi: 1e-3 };
        g.push(Check::new("min γ−1", ev.gamma.min, band));
        g.push(Check::new("max γ−1", ev.gamma.max, band));
        Ok::<(), String>(())
    })
}

/// The numbered criteria in order, plus the slow run on request.
pub fn run_all(s: &Suite, slow: bool) -> Vec<GateReport> {
    let mut out: Vec<GateReport> = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
    ]
    .iter()
    .map(|f| f(s))
    .collect();
    if slow {
        out.push(collision(s));
        out.push(long_run(s));
    }
    out
}
