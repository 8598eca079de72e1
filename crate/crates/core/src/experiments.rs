//! Scripted studies: manufactured-solution convergence, the exact travelling
//! wave, solitary propagation, overtaking collision and wall reflection.
//!
//! Every function here is deterministic for a given config.

use std::sync::Arc;

use crate::diagnostics::{
    drift_report, expected_conserved, modified_h1_error, norm_error, Conserved, DriftReport, ErrorReport, ErrorRow,
    WaveTrackRecord, WaveTracker,
};
use crate::fem::UniformMesh;
use crate::functionals::InvariantRecord;
use crate::semidisc::{BoundaryCondition, Forcing, MixedSpaces, MixedState, SchemeKind, SemidiscOperator};
use crate::timeint::{classic_rk4, Integrator, RelaxationConfig};
use crate::waves::{
    exact_travelling_wave_full, generation_spaces, petviashvili_solve, superpose, Direction, ManufacturedCase,
    PetviashviliConfig, TravellingWave, WaveTransfer,
};
use crate::{Error, Result};

/// Refinement levels of the convergence tables.
pub const REFINEMENT_DX: [f64; 5] = [0.1, 0.05, 0.02, 0.01, 0.005];

/// Runs independent jobs on up to `threads` worker threads; results come
/// back in input order.
pub fn run_jobs<T, F>(jobs: Vec<F>, threads: usize) -> Vec<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    let threads = threads.max(1);
    if threads == 1 || jobs.len() <= 1 {
        return jobs.into_iter().map(|j| j()).collect();
    }
    let n = jobs.len();
    let queue = std::sync::Mutex::new(jobs.into_iter().enumerate().collect::<Vec<_>>());
    let results = std::sync::Mutex::new((0..n).map(|_| None).collect::<Vec<Option<T>>>());
    std::thread::scope(|s| {
        for _ in 0..threads.min(n) {
            s.spawn(|| loop {
                let job = queue.lock().unwrap().pop();
                match job {
                    Some((i, f)) => {
                        let r = f();
                        results.lock().unwrap()[i] = Some(r);
                    }
                    None => break,
                }
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

/// Number of cells of spacing `dx` on `[a, b]`; the spacing must divide the
/// interval.
pub fn cells_for(a: f64, b: f64, dx: f64) -> Result<usize> {
    let n = UniformMesh::with_spacing(a, b, dx)?.n_cells();
    if (n as f64 * dx - (b - a)).abs() > 1e-9 * (b - a) {
        return Err(Error::config(format!("spacing {dx} does not divide [{a}, {b}]")));
    }
    Ok(n)
}

/// Minimum and maximum of `γ − 1` over the accepted steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaStats {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Default for GammaStats {
    fn default() -> Self {
        Self {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            steps: 0,
        }
    }
}

impl GammaStats {
    fn push(&mut self, gamma: f64) {
        self.min = self.min.min(gamma - 1.0);
        self.max = self.max.max(gamma - 1.0);
        self.steps += 1;
    }

    /// Largest `|γ − 1|`.
    pub fn max_abs(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.min.abs().max(self.max.abs())
        }
    }
}

/// Invariants at a recorded time with the γ of the step that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InvariantSample {
    pub invariants: InvariantRecord,
    pub gamma: f64,
}

/// Nodal samples of `H` and `U` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub eta: Vec<f64>,
    pub u: Vec<f64>,
}

impl Snapshot {
    /// Values at the Lagrange nodes (constrained nodes read as zero).
    pub fn sample(spaces: &MixedSpaces, state: &MixedState) -> Self {
        let m = spaces.mesh();
        let n = spaces.h.global_node_count();
        let node = |s: &crate::fem::FemSpace, v: &[f64], g: usize| s.dof_of_node(g).map_or(0.0, |i| v[i]);
        Self {
            t: state.t,
            x: (0..n)
                .map(|g| m.a() + g as f64 * m.dx() / spaces.degree() as f64)
                .collect(),
            eta: (0..n).map(|g| node(&spaces.h, &state.h, g)).collect(),
            u: (0..n).map(|g| node(&spaces.u, &state.u, g)).collect(),
        }
    }
}

/// Everything a time-dependent run produces besides its final state.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub final_state: MixedState,
    pub invariants: Vec<InvariantSample>,
    pub gamma: GammaStats,
    pub drift: DriftReport,
    pub conserved: Conserved,
    pub snapshots: Vec<Snapshot>,
}

/// Settings shared by the homogeneous runs.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSettings {
    pub dt: f64,
    pub t_end: f64,
    pub relax: bool,
    /// Invariants are recorded every `stride` steps and at the end.
    pub stride: usize,
    /// Requested snapshot times; each is taken at the nearest step.
    pub snapshots: Vec<f64>,
}

fn integrate_homogeneous(
    op: &SemidiscOperator,
    y0: MixedState,
    ts: &TimeSettings,
    mut observer: impl FnMut(&MixedState) -> Result<()>,
) -> Result<Evolution> {
    let relaxation = if ts.relax {
        RelaxationConfig::default()
    } else {
        RelaxationConfig::disabled()
    };
    let integ = Integrator::new(op, classic_rk4(), relaxation)?;
    let sp = op.spaces();
    let mut wanted: Vec<f64> = ts.snapshots.clone();
    wanted.sort_by(f64::total_cmp);
    wanted.dedup();
    let mut snapshots = Vec::new();
    let mut next_snap = 0;
    // a snapshot time is resolved once a step passes it: compare the two
    // states on either side and keep the closer one
    let mut prev: Option<MixedState> = None;
    let take = |prev: &Option<MixedState>, cur: &MixedState, snaps: &mut Vec<Snapshot>, k: &mut usize| -> Result<()> {
        while *k < wanted.len() && cur.t >= wanted[*k] {
            let pick = match prev {
                Some(p) if (wanted[*k] - p.t).abs() <= (cur.t - wanted[*k]).abs() => p,
                _ => cur,
            };
            snaps.push(Snapshot::sample(sp, pick));
            *k += 1;
        }
        Ok(())
    };
    take(&None, &y0, &mut snapshots, &mut next_snap)?;
    let mut gamma = GammaStats::default();
    let t_end = ts.t_end;
    let (final_state, records) = integ.integrate(y0.clone(), t_end, ts.dt, ts.stride, |y, rec| {
        if ts.relax {
            gamma.push(rec.gamma);
        }
        take(&prev, y, &mut snapshots, &mut next_snap)?;
        observer(y)?;
        prev = Some(y.clone());
        Ok(())
    })?;
    if next_snap < wanted.len() {
        snapshots.push(Snapshot::sample(sp, &final_state));
    }
    let invariants: Vec<InvariantSample> = records
        .iter()
        .filter_map(|r| {
            r.invariants.map(|inv| InvariantSample {
                invariants: inv,
                gamma: r.gamma,
            })
        })
        .collect();
    let series: Vec<InvariantRecord> = invariants.iter().map(|s| s.invariants).collect();
    Ok(Evolution {
        final_state,
        drift: drift_report(&series)?,
        conserved: expected_conserved(sp.bc(), op.scheme(), ts.relax),
        invariants,
        gamma,
        snapshots,
    })
}

/// A manufactured-solution refinement study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    pub bc: BoundaryCondition,
    pub scheme: SchemeKind,
    pub degree: usize,
    pub dxs: Vec<f64>,
    /// `Δt = dt_ratio · Δx`.
    pub dt_ratio: f64,
    pub t_end: f64,
    pub jobs: usize,
}

impl ConvergenceConfig {
    pub fn new(bc: BoundaryCondition, scheme: SchemeKind, degree: usize, dxs: &[f64]) -> Self {
        Self {
            bc,
            scheme,
            degree,
            dxs: dxs.to_vec(),
            dt_ratio: 0.1,
            t_end: 1.0,
            jobs: 1,
        }
    }
}

/// Errors of a computed state against `(η, η_x, u, u_x)` at the state's time.
pub fn error_row(spaces: &MixedSpaces, y: &MixedState, exact: &dyn Fn(f64, f64) -> [f64; 4]) -> ErrorRow {
    let t = y.t;
    let f = |k: usize| move |x: f64| exact(x, t)[k];
    ErrorRow {
        dx: spaces.mesh().dx(),
        e0_h: norm_error(&spaces.h, &y.h, f(0), f(1), 0),
        e0_u: norm_error(&spaces.u, &y.u, f(2), f(3), 0),
        e1_h: norm_error(&spaces.h, &y.h, f(0), f(1), 1),
        e1_u: norm_error(&spaces.u, &y.u, f(2), f(3), 1),
        te1_h: modified_h1_error(&spaces.h, &y.h, &spaces.w, &y.w, f(0), f(1)),
        te1_u: modified_h1_error(&spaces.u, &y.u, &spaces.v, &y.v, f(2), f(3)),
    }
}

fn convergence_level(cfg: &ConvergenceConfig, dx: f64) -> Result<ErrorRow> {
    let case = ManufacturedCase::for_bc(cfg.bc);
    let (a, b) = case.domain();
    let spaces = MixedSpaces::build(a, b, cells_for(a, b, dx)?, cfg.degree, cfg.bc)?;
    let forcing: Arc<dyn Forcing> = Arc::new(case);
    let op = SemidiscOperator::setup(spaces.clone(), cfg.scheme, Some(forcing))?;
    let integ = Integrator::new(&op, classic_rk4(), RelaxationConfig::disabled())?;
    let y0 = case.initial_state(&spaces)?;
    let (y, _) = integ.integrate(y0, cfg.t_end, cfg.dt_ratio * dx, usize::MAX, |_, _| Ok(()))?;
    let exact = |x: f64, t: f64| {
        let j = case.jet(x, t);
        [j.eta, j.eta_x, j.u, j.u_x]
    };
    Ok(error_row(&spaces, &y, &exact))
}

/// One error row per `Δx`; rates come from [`ErrorReport::rates`].
pub fn run_convergence_study(cfg: &ConvergenceConfig) -> Result<ErrorReport> {
    if cfg.dxs.is_empty() {
        return Err(Error::config("empty dx list"));
    }
    let jobs: Vec<_> = cfg.dxs.iter().map(|&dx| move || convergence_level(cfg, dx)).collect();
    let rows = run_jobs(jobs, cfg.jobs).into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ErrorReport { rows })
}

/// Periodic run of the closed-form travelling wave.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactWaveConfig {
    pub degree: usize,
    pub dxs: Vec<f64>,
    pub dt_ratio: f64,
    pub t_end: f64,
    pub domain: (f64, f64),
    pub relax: bool,
    pub jobs: usize,
}

impl ExactWaveConfig {
    pub fn new(degree: usize, dxs: &[f64]) -> Self {
        Self {
            degree,
            dxs: dxs.to_vec(),
            dt_ratio: 0.1,
            t_end: 10.0,
            domain: (-20.0, 20.0),
            relax: true,
            jobs: 1,
        }
    }
}

/// Error rows and invariant drift per level.
#[derive(Debug, Clone)]
pub struct ExactWaveStudy {
    pub report: ErrorReport,
    pub drifts: Vec<DriftReport>,
    pub gammas: Vec<GammaStats>,
}

fn exact_wave_level(cfg: &ExactWaveConfig, dx: f64) -> Result<(ErrorRow, DriftReport, GammaStats)> {
    let (a, b) = cfg.domain;
    let spaces = MixedSpaces::build(a, b, cells_for(a, b, dx)?, cfg.degree, BoundaryCondition::Periodic)?;
    let mesh = spaces.mesh().clone();
    let exact = move |x: f64, t: f64| {
        // the pulse is followed through the periodic boundary
        let xi = mesh.wrap(x - 2.5 * t);
        exact_travelling_wave_full(xi, 0.0, Direction::Right)
    };
    let y0 = MixedState::project(
        &spaces,
        0.0,
        |x| exact(x, 0.0)[0],
        |x| exact(x, 0.0)[1],
        |x| exact(x, 0.0)[2],
        |x| exact(x, 0.0)[3],
    )?;
    let op = SemidiscOperator::setup(spaces.clone(), SchemeKind::Conservative, None)?;
    let ts = TimeSettings {
        dt: cfg.dt_ratio * dx,
        t_end: cfg.t_end,
        relax: cfg.relax,
        stride: 1,
        snapshots: Vec::new(),
    };
    let ev = integrate_homogeneous(&op, y0, &ts, |_| Ok(()))?;
    Ok((error_row(&spaces, &ev.final_state, &exact), ev.drift, ev.gamma))
}

pub fn run_exact_wave_study(cfg: &ExactWaveConfig) -> Result<ExactWaveStudy> {
    if cfg.dxs.is_empty() {
        return Err(Error::config("empty dx list"));
    }
    let jobs: Vec<_> = cfg.dxs.iter().map(|&dx| move || exact_wave_level(cfg, dx)).collect();
    let mut study = ExactWaveStudy {
        report: ErrorReport::default(),
        drifts: Vec::new(),
        gammas: Vec::new(),
    };
    for r in run_jobs(jobs, cfg.jobs) {
        let (row, d, g) = r?;
        study.report.rows.push(row);
        study.drifts.push(d);
        study.gammas.push(g);
    }
    Ok(study)
}

/// Where the initial solitary waves come from.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveSource {
    /// Degree of the elements used by the Petviashvili iteration.
    pub generation_degree: usize,
    pub transfer: WaveTransfer,
    pub petviashvili_tol: f64,
    pub petviashvili_max_iter: usize,
}

impl Default for WaveSource {
    fn default() -> Self {
        Self {
            generation_degree: 3,
            transfer: WaveTransfer::Project,
            petviashvili_tol: 1e-10,
            petviashvili_max_iter: 200,
        }
    }
}

impl WaveSource {
    /// Generates a wave of speed `c_s` centred at `center` on the mesh of
    /// `target` and moves it onto `target`.
    pub fn initial_wave(&self, target: &MixedSpaces, c_s: f64, center: f64) -> Result<(TravellingWave, MixedState)> {
        let gen = generation_spaces(target, self.generation_degree)?;
        let mut pc = PetviashviliConfig::new(c_s);
        pc.center = center;
        pc.tol = self.petviashvili_tol;
        pc.max_iter = self.petviashvili_max_iter;
        let wave = petviashvili_solve(&gen, &pc)?;
        let state = wave.to_state(target, self.transfer)?;
        Ok((wave, state))
    }
}

/// A single solitary wave on a periodic interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitaryConfig {
    pub c_s: f64,
    pub domain: (f64, f64),
    pub x0: f64,
    pub degree: usize,
    pub dx: f64,
    pub time: TimeSettings,
    pub scheme: SchemeKind,
    pub source: WaveSource,
    /// Wave-tracking errors are recorded every `track_stride` steps.
    pub track_stride: usize,
    /// No tracking records before this time (the peak is still followed).
    pub track_from: f64,
}

impl SolitaryConfig {
    /// `c_s = √1.6` on `[−20, 20]`, `Δx = Δt = 0.1`, `T = 100`.
    pub fn standard_case(degree: usize, scheme: SchemeKind) -> Self {
        Self {
            c_s: 1.6f64.sqrt(),
            domain: (-20.0, 20.0),
            x0: 0.0,
            degree,
            dx: 0.1,
            time: TimeSettings {
                dt: 0.1,
                t_end: 100.0,
                relax: scheme == SchemeKind::Conservative,
                stride: 1,
                snapshots: Vec::new(),
            },
            scheme,
            source: WaveSource::default(),
            track_stride: 1,
            track_from: 0.0,
        }
    }

    /// The hump experiment: `[−150, 150]` with the wave starting at `−120`.
    pub fn long_domain(degree: usize, scheme: SchemeKind) -> Self {
        let mut c = Self::standard_case(degree, scheme);
        c.domain = (-150.0, 150.0);
        c.x0 = -120.0;
        c.time.t_end = 200.0;
        c.time.snapshots = vec![0.0, 100.0, 200.0];
        c
    }
}

#[derive(Debug, Clone)]
pub struct SolitaryResult {
    pub amplitude: f64,
    pub petviashvili_iterations: usize,
    pub track: Vec<WaveTrackRecord>,
    pub evolution: Evolution,
}

impl SolitaryResult {
    /// Means of `(E_amp, E_phase, E_shape)` over records with `t ∈ [t0, t1]`.
    pub fn mean_errors(&self, t0: f64, t1: f64) -> Option<(f64, f64, f64)> {
        let sel: Vec<_> = self.track.iter().filter(|r| r.t >= t0 && r.t <= t1).collect();
        if sel.is_empty() {
            return None;
        }
        let n = sel.len() as f64;
        Some((
            sel.iter().map(|r| r.e_amp).sum::<f64>() / n,
            sel.iter().map(|r| r.e_phase).sum::<f64>() / n,
            sel.iter().map(|r| r.e_shape).sum::<f64>() / n,
        ))
    }
}

pub fn run_solitary_propagation(cfg: &SolitaryConfig) -> Result<SolitaryResult> {
    let (a, b) = cfg.domain;
    let spaces = MixedSpaces::build(a, b, cells_for(a, b, cfg.dx)?, cfg.degree, BoundaryCondition::Periodic)?;
    let (wave, y0) = cfg.source.initial_wave(&spaces, cfg.c_s, cfg.x0)?;
    run_solitary_from(cfg, &spaces, &wave, y0)
}

/// As [`run_solitary_propagation`] with a given wave (for instance one read
/// from a file) already moved onto `spaces`.
pub fn run_solitary_from(
    cfg: &SolitaryConfig,
    spaces: &MixedSpaces,
    wave: &TravellingWave,
    y0: MixedState,
) -> Result<SolitaryResult> {
    let op = SemidiscOperator::setup(spaces.clone(), cfg.scheme, None)?;
    let mut tracker = WaveTracker::new(&spaces.h, &y0.h, cfg.c_s, y0.t)?;
    let mut track = vec![tracker.record(&y0.h, y0.t)?];
    let stride = cfg.track_stride.max(1);
    let mut n = 0usize;
    let last = cfg.time.t_end - 1e-9 * cfg.time.dt;
    let evolution = integrate_homogeneous(&op, y0, &cfg.time, |y| {
        n += 1;
        if (n % stride == 0 || y.t >= last) && y.t >= cfg.track_from {
            track.push(tracker.record(&y.h, y.t)?);
        }
        Ok(())
    })?;
    Ok(SolitaryResult {
        amplitude: wave.amplitude,
        petviashvili_iterations: wave.iterations(),
        track,
        evolution,
    })
}

/// Several solitary waves superposed on one periodic interval.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionConfig {
    /// `(c_s, centre)` per wave.
    pub waves: Vec<(f64, f64)>,
    pub domain: (f64, f64),
    pub degree: usize,
    pub dx: f64,
    pub time: TimeSettings,
    pub source: WaveSource,
}

impl Default for CollisionConfig {
    /// Speeds 1.6 and 1.2 with the faster wave 25 units behind, on
    /// `[−50, 150]`, up to `T = 600`.
    fn default() -> Self {
        Self {
            waves: vec![(1.6, -25.0), (1.2, 0.0)],
            domain: (-50.0, 150.0),
            degree: 1,
            dx: 0.1,
            time: TimeSettings {
                dt: 0.1,
                t_end: 600.0,
                relax: true,
                stride: 10,
                snapshots: vec![0.0, 140.01, 240.01, 465.02],
            },
            source: WaveSource::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WavesResult {
    pub amplitudes: Vec<f64>,
    pub evolution: Evolution,
}

pub fn run_collision(cfg: &CollisionConfig) -> Result<WavesResult> {
    if cfg.waves.is_empty() {
        return Err(Error::config("collision needs at least one wave"));
    }
    let (a, b) = cfg.domain;
    let spaces = MixedSpaces::build(a, b, cells_for(a, b, cfg.dx)?, cfg.degree, BoundaryCondition::Periodic)?;
    let mut states = Vec::new();
    let mut amplitudes = Vec::new();
    for &(c, x0) in &cfg.waves {
        let (w, s) = cfg.source.initial_wave(&spaces, c, x0)?;
        amplitudes.push(w.amplitude);
        states.push(s);
    }
    let y0 = superpose(&states)?;
    let op = SemidiscOperator::setup(spaces, SchemeKind::Conservative, None)?;
    let evolution = integrate_homogeneous(&op, y0, &cfg.time, |_| Ok(()))?;
    Ok(WavesResult { amplitudes, evolution })
}

/// A solitary wave running into the wall at the right end.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionConfig {
    pub c_s: f64,
    pub x0: f64,
    pub domain: (f64, f64),
    pub degree: usize,
    pub dx: f64,
    pub time: TimeSettings,
    pub source: WaveSource,
}

impl Default for ReflectionConfig {
    /// `c_s = 1.6` from the centre of `[−40, 40]`, `T = 50`.
    fn default() -> Self {
        Self {
            c_s: 1.6,
            x0: 0.0,
            domain: (-40.0, 40.0),
            degree: 1,
            dx: 0.1,
            time: TimeSettings {
                dt: 0.1,
                t_end: 50.0,
                relax: true,
                stride: 10,
                snapshots: vec![0.0, 12.5, 25.0, 37.5, 50.0],
            },
            source: WaveSource::default(),
        }
    }
}

pub fn run_reflection(cfg: &ReflectionConfig) -> Result<WavesResult> {
    let (a, b) = cfg.domain;
    let spaces = MixedSpaces::build(
        a,
        b,
        cells_for(a, b, cfg.dx)?,
        cfg.degree,
        BoundaryCondition::Reflective,
    )?;
    let (w, y0) = cfg.source.initial_wave(&spaces, cfg.c_s, cfg.x0)?;
    let op = SemidiscOperator::setup(spaces, SchemeKind::Conservative, None)?;
    let evolution = integrate_homogeneous(&op, y0, &cfg.time, |_| Ok(()))?;
    Ok(WavesResult {
        amplitudes: vec![w.amplitude],
        evolution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jobs_keep_order() {
        let jobs: Vec<_> = (0..7).map(|i| move || i * i).collect();
        assert_eq!(run_jobs(jobs, 3), vec![0, 1, 4, 9, 16, 25, 36]);
        let jobs: Vec<_> = (0..3).map(|i| move || i).collect();
        assert_eq!(run_jobs(jobs, 1), vec![0, 1, 2]);
    }

    #[test]
    fn cells_need_a_dividing_spacing() {
        assert_eq!(cells_for(-20.0, 20.0, 0.1).unwrap(), 400);
        assert!(cells_for(0.0, 1.0, 0.3).is_err());
    }

    #[test]
    fn single_level_has_no_rates() {
        let cfg = ConvergenceConfig::new(BoundaryCondition::Periodic, SchemeKind::Conservative, 1, &[0.1]);
        let rep = run_convergence_study(&cfg).unwrap();
        assert_eq!(rep.rows.len(), 1);
        assert!(rep.rates().unwrap().is_empty());
        assert!(rep.rows[0].e0_h > 0.0 && rep.rows[0].e0_h < 0.1, "{:?}", rep.rows[0]);
    }

    #[test]
    fn reflective_cubic_first_level() {
        let cfg = ConvergenceConfig::new(BoundaryCondition::Reflective, SchemeKind::Conservative, 3, &[0.1]);
        let rep = run_convergence_study(&cfg).unwrap();
        assert!((rep.rows[0].e0_h / 7.335e-5 - 1.0).abs() < 0.02, "{:?}", rep.rows[0]);
    }

    #[test]
    fn parallel_study_is_bitwise_serial() {
        let mut cfg = ConvergenceConfig::new(BoundaryCondition::Reflective, SchemeKind::Standard, 2, &[0.1, 0.05]);
        let a = run_convergence_study(&cfg).unwrap();
        cfg.jobs = 2;
        let b = run_convergence_study(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn snapshots_pick_nearest_step() {
        let mut cfg = ReflectionConfig::default();
        cfg.domain = (-20.0, 20.0);
        cfg.dx = 0.2;
        cfg.time.dt = 0.2;
        cfg.time.t_end = 1.0;
        cfg.time.snapshots = vec![0.5, 0.0, 2.0];
        let r = run_reflection(&cfg).unwrap();
        let ts: Vec<f64> = r.evolution.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(ts.len(), 3);
        assert_eq!(ts[0], 0.0);
        assert!((ts[1] - 0.4).abs() < 1e-3 || (ts[1] - 0.6).abs() < 1e-3, "{ts:?}");
        assert!((ts[2] - r.evolution.final_state.t).abs() < 1e-15);
        let s = &r.evolution.snapshots[1];
        assert_eq!(s.x.len(), s.eta.len());
        // wall condition on u
        assert_eq!(s.u[0], 0.0);
        assert_eq!(*s.u.last().unwrap(), 0.0);
    }

    #[test]
    fn one_wave_collision_is_solitary_propagation() {
        let mut cc = CollisionConfig::default();
        cc.waves = vec![(1.6f64.sqrt(), 0.0)];
        cc.domain = (-20.0, 20.0);
        cc.dx = 0.2;
        cc.time.dt = 0.2;
        cc.time.t_end = 2.0;
        cc.time.stride = 1;
        cc.time.snapshots.clear();
        let c = run_collision(&cc).unwrap();
        let mut sc = SolitaryConfig::standard_case(1, SchemeKind::Conservative);
        sc.dx = 0.2;
        sc.time = cc.time.clone();
        let s = run_solitary_propagation(&sc).unwrap();
        assert_eq!(c.evolution.final_state, s.evolution.final_state);
        assert_eq!(c.evolution.drift, s.evolution.drift);
    }
}
