//! Error norms, convergence rates, solitary-wave tracking and invariant
//! drift.

use crate::fem::{evaluate, quadrature_for, FemSpace, QuadratureRule, MAX_DEGREE};
use crate::functionals::InvariantRecord;
use crate::semidisc::{BoundaryCondition, SchemeKind};
use crate::{Error, Result};

/// `‖F − f‖₀` (`s = 0`) or `(‖F − f‖₀² + ‖F′ − f′‖₀²)^{1/2}` (`s = 1`) with
/// `F′` the broken derivative; cellwise Gauss rule exact to degree `2r + 6`.
pub fn norm_error(
    space: &FemSpace,
    values: &[f64],
    exact: impl Fn(f64) -> f64,
    exact_deriv: impl Fn(f64) -> f64,
    s: u8,
) -> f64 {
    let (e0, e1) = error_parts(space, values, &exact, &exact_deriv, s >= 1);
    if s == 0 {
        e0.sqrt()
    } else {
        (e0 + e1).sqrt()
    }
}

/// Squared L² errors of the values and (optionally) of the derivatives.
fn error_parts(
    space: &FemSpace,
    values: &[f64],
    exact: &dyn Fn(f64) -> f64,
    exact_deriv: &dyn Fn(f64) -> f64,
    with_deriv: bool,
) -> (f64, f64) {
    let r = space.degree();
    let table = space.table(&quadrature_for(2 * r + 6));
    let mesh = space.mesh();
    let nl = r + 1;
    let mut c = [0.0; MAX_DEGREE + 1];
    let (mut e0, mut e1) = (0.0, 0.0);
    for cell in 0..mesh.n_cells() {
        space.gather(values, cell, &mut c[..nl]);
        let x0 = mesh.vertex(cell);
        for q in 0..table.n_points() {
            let x = x0 + table.points()[q] * mesh.dx();
            let w = table.weights()[q];
            let v: f64 = c[..nl].iter().zip(table.phi(q)).map(|(a, b)| a * b).sum();
            e0 += w * (v - exact(x)).powi(2);
            if with_deriv {
                let d: f64 = c[..nl].iter().zip(table.dphi(q)).map(|(a, b)| a * b).sum();
                e1 += w * (d - exact_deriv(x)).powi(2);
            }
        }
    }
    (e0, e1)
}

/// `(‖H − η‖² + ‖W − η_x‖²)^{1/2}` with `W` the auxiliary derivative field.
pub fn modified_h1_error(
    h_space: &FemSpace,
    h: &[f64],
    w_space: &FemSpace,
    w: &[f64],
    exact: impl Fn(f64) -> f64,
    exact_deriv: impl Fn(f64) -> f64,
) -> f64 {
    let a = norm_error(h_space, h, exact, |_| 0.0, 0);
    let b = norm_error(w_space, w, exact_deriv, |_| 0.0, 0);
    (a * a + b * b).sqrt()
}

/// `ln(e_{k−1}/e_k) / ln(dx_{k−1}/dx_k)` for consecutive pairs; `None` when
/// an error is not positive.
pub fn convergence_rates(errors: &[f64], dxs: &[f64]) -> Result<Vec<Option<f64>>> {
    if errors.len() != dxs.len() {
        return Err(Error::usage("errors and dx lists differ in length"));
    }
    if dxs.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::usage("dx list must be strictly decreasing"));
    }
    Ok(errors
        .windows(2)
        .zip(dxs.windows(2))
        .map(|(e, d)| (e[0] > 0.0 && e[1] > 0.0).then(|| (e[0] / e[1]).ln() / (d[0] / d[1]).ln()))
        .collect())
}

/// Errors of one refinement level.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorRow {
    pub dx: f64,
    pub e0_h: f64,
    pub e0_u: f64,
    pub e1_h: f64,
    pub e1_u: f64,
    pub te1_h: f64,
    pub te1_u: f64,
}

/// Errors of a refinement study with rates between consecutive rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorReport {
    pub rows: Vec<ErrorRow>,
}

/// Rates of the seven error columns for one pair of rows.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RateRow {
    pub r0_h: Option<f64>,
    pub r0_u: Option<f64>,
    pub r1_h: Option<f64>,
    pub r1_u: Option<f64>,
    pub tr1_h: Option<f64>,
    pub tr1_u: Option<f64>,
}

impl ErrorReport {
    /// `rates()[k]` compares rows `k` and `k + 1`.
    pub fn rates(&self) -> Result<Vec<RateRow>> {
        let dxs: Vec<f64> = self.rows.iter().map(|r| r.dx).collect();
        let col = |f: fn(&ErrorRow) -> f64| -> Result<Vec<Option<f64>>> {
            convergence_rates(&self.rows.iter().map(f).collect::<Vec<_>>(), &dxs)
        };
        let (a, b, c, d, e, f) = (
            col(|r| r.e0_h)?,
            col(|r| r.e0_u)?,
            col(|r| r.e1_h)?,
            col(|r| r.e1_u)?,
            col(|r| r.te1_h)?,
            col(|r| r.te1_u)?,
        );
        Ok((0..a.len())
            .map(|k| RateRow {
                r0_h: a[k],
                r0_u: b[k],
                r1_h: c[k],
                r1_u: d[k],
                tr1_h: e[k],
                tr1_u: f[k],
            })
            .collect())
    }
}

/// Spacing of the Lagrange nodes.
fn node_spacing(space: &FemSpace) -> f64 {
    space.mesh().dx() / space.degree() as f64
}

fn derivative(space: &FemSpace, values: &[f64], x: f64) -> Result<f64> {
    evaluate(space, values, x).map(|p| p.1)
}

/// Bisection for a sign change of `H′` from `+` to `−` in `[lo, hi]`.
fn bisect_derivative(space: &FemSpace, values: &[f64], mut lo: f64, mut hi: f64, tol: f64) -> Result<Option<f64>> {
    let (dl, dh) = (derivative(space, values, lo)?, derivative(space, values, hi)?);
    if !(dl > 0.0 && dh < 0.0) {
        return Ok(None);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if derivative(space, values, mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Node of largest value among those within `[lo, hi]` (coordinates may
/// leave the interval for periodic spaces).
fn nodal_argmax(space: &FemSpace, values: &[f64], lo: f64, hi: f64) -> Option<f64> {
    let mesh = space.mesh();
    let h = node_spacing(space);
    let first = ((lo - mesh.a()) / h).ceil() as i64;
    let last = ((hi - mesh.a()) / h).floor() as i64;
    let n_nodes = space.global_node_count() as i64;
    let mut best: Option<(f64, f64)> = None;
    for g in first..=last {
        let (node, x) = if space.is_periodic() {
            (g.rem_euclid(n_nodes - 1), mesh.a() + g as f64 * h)
        } else if (0..n_nodes).contains(&g) {
            (g, mesh.a() + g as f64 * h)
        } else {
            continue;
        };
        let v = space.dof_of_node(node as usize).map_or(0.0, |i| values[i]);
        if best.map_or(true, |(bv, _)| v > bv) {
            best = Some((v, x));
        }
    }
    best.map(|(_, x)| x)
}

/// Location of the maximum of `H` inside `center ± window/2`. Linear elements
/// return the best node; higher degrees bisect on `H′` to `1e-10`.
pub fn track_peak(space: &FemSpace, values: &[f64], center: f64, window: f64) -> Result<f64> {
    let (lo, hi) = (center - 0.5 * window, center + 0.5 * window);
    let node = nodal_argmax(space, values, lo, hi).ok_or(Error::TrackingLost { lo, hi })?;
    let wrap = |x: f64| if space.is_periodic() { space.mesh().wrap(x) } else { x };
    if space.degree() == 1 {
        return Ok(wrap(node));
    }
    let h = node_spacing(space);
    let clamp = |x: f64| {
        if space.is_periodic() {
            x
        } else {
            x.clamp(space.mesh().a(), space.mesh().b())
        }
    };
    if let Some(x) = bisect_derivative(space, values, clamp(node - h), clamp(node + h), 1e-10)? {
        return Ok(wrap(x));
    }
    match bisect_derivative(space, values, clamp(lo), clamp(hi), 1e-10)? {
        Some(x) => Ok(wrap(x)),
        None => Err(Error::TrackingLost { lo, hi }),
    }
}

/// Largest value of `H` over the whole interval.
pub fn peak_value(space: &FemSpace, values: &[f64]) -> Result<f64> {
    let mesh = space.mesh();
    let x = nodal_argmax(space, values, mesh.a(), mesh.b()).ok_or(Error::TrackingLost {
        lo: mesh.a(),
        hi: mesh.b(),
    })?;
    let x = if space.degree() == 1 {
        x
    } else {
        track_peak(space, values, x, 2.0 * mesh.dx()).unwrap_or(x)
    };
    Ok(evaluate(space, values, x)?.0)
}

/// Amplitude, phase and shape errors at one time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WaveTrackRecord {
    pub t: f64,
    pub x_star: f64,
    pub amplitude: f64,
    pub e_amp: f64,
    pub e_phase: f64,
    pub e_shape: f64,
}

/// Follows a solitary pulse of speed `c_s` starting from the profile `h0`.
#[derive(Debug, Clone)]
pub struct WaveTracker {
    space: FemSpace,
    h0: Vec<f64>,
    c_s: f64,
    x0: f64,
    t0: f64,
    amp0: f64,
    norm0: f64,
    rule: QuadratureRule,
    last: Option<(f64, f64)>,
}

impl WaveTracker {
    pub fn new(space: &FemSpace, h0: &[f64], c_s: f64, t0: f64) -> Result<Self> {
        let mesh = space.mesh();
        let x0 = nodal_argmax(space, h0, mesh.a(), mesh.b()).ok_or(Error::TrackingLost {
            lo: mesh.a(),
            hi: mesh.b(),
        })?;
        let x0 = track_peak(space, h0, x0, 2.0 * mesh.dx())?;
        let amp0 = evaluate(space, h0, x0)?.0;
        let mut t = Self {
            space: space.clone(),
            h0: h0.to_vec(),
            c_s,
            x0,
            t0,
            amp0,
            norm0: 0.0,
            rule: QuadratureRule::gauss_legendre(3),
            last: None,
        };
        t.norm0 = t.plain_norm();
        Ok(t)
    }

    pub fn initial_peak(&self) -> (f64, f64) {
        (self.x0, self.amp0)
    }

    fn plain_norm(&self) -> f64 {
        let mesh = self.space.mesh();
        let mut s = 0.0;
        for cell in 0..mesh.n_cells() {
            let x0 = mesh.vertex(cell);
            for (xi, w) in self.rule.nodes().iter().zip(self.rule.weights()) {
                let v = evaluate(&self.space, &self.h0, x0 + xi * mesh.dx()).map_or(0.0, |p| p.0);
                s += w * mesh.dx() * v * v;
            }
        }
        s.sqrt()
    }

    /// Reference profile translated by `shift`, with its derivative.
    fn reference(&self, x: f64) -> (f64, f64) {
        let m = self.space.mesh();
        if self.space.is_periodic() || (m.a()..=m.b()).contains(&x) {
            evaluate(&self.space, &self.h0, x).unwrap_or((0.0, 0.0))
        } else {
            (0.0, 0.0)
        }
    }

    /// `ζ²(s) = ‖H − H₀(· − c s)‖²` (3-point Gauss per cell).
    fn shape_distance(&self, h: &[f64], s: f64) -> Result<f64> {
        Ok(self.shape_terms(h, s)?.0)
    }

    /// `ζ²(s)` and `dζ²/ds`.
    fn shape_terms(&self, h: &[f64], s: f64) -> Result<(f64, f64)> {
        let mesh = self.space.mesh();
        let shift = self.c_s * s;
        let (mut z, mut dz) = (0.0, 0.0);
        for cell in 0..mesh.n_cells() {
            let x0 = mesh.vertex(cell);
            for (xi, w) in self.rule.nodes().iter().zip(self.rule.weights()) {
                let x = x0 + xi * mesh.dx();
                let hv = evaluate(&self.space, h, x)?.0;
                let (rv, rd) = self.reference(x - shift);
                let diff = hv - rv;
                let w = w * mesh.dx();
                z += w * diff * diff;
                dz += 2.0 * w * diff * self.c_s * rd;
            }
        }
        Ok((z, dz))
    }

    /// Minimizer of `ζ²` over `t ± 10Δx/c`.
    fn best_shift(&self, h: &[f64], t: f64) -> Result<f64> {
        let half = 10.0 * self.space.mesh().dx() / self.c_s.abs();
        let (mut lo, mut hi) = (t - half, t + half);
        let tol = 1e-10;
        let dl = self.shape_terms(h, lo)?.1;
        let dh = self.shape_terms(h, hi)?.1;
        if dl < 0.0 && dh > 0.0 {
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if self.shape_terms(h, mid)?.1 < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        // golden section when the derivative does not bracket a minimum
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut a = lo + (1.0 - g) * (hi - lo);
        let mut b = lo + g * (hi - lo);
        let mut fa = self.shape_distance(h, a)?;
        let mut fb = self.shape_distance(h, b)?;
        while hi - lo > tol {
            if fa < fb {
                hi = b;
                b = a;
                fb = fa;
                a = lo + (1.0 - g) * (hi - lo);
                fa = self.shape_distance(h, a)?;
            } else {
                lo = a;
                a = b;
                fa = fb;
                b = lo + g * (hi - lo);
                fb = self.shape_distance(h, b)?;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    fn wrapped_distance(&self, a: f64, b: f64) -> f64 {
        let d = a - b;
        if self.space.is_periodic() {
            let l = self.space.mesh().length();
            let m = d.rem_euclid(l);
            m.min(l - m)
        } else {
            d.abs()
        }
    }

    /// Errors of `h` at time `t`. The tracking window (length `10Δx`) is
    /// centred at the previous peak advanced by `c_s` times the elapsed time.
    pub fn record(&mut self, h: &[f64], t: f64) -> Result<WaveTrackRecord> {
        let mesh = self.space.mesh();
        let center = match self.last {
            Some((x, tl)) => x + self.c_s * (t - tl),
            None => self.x0 + self.c_s * (t - self.t0),
        };
        let center = if self.space.is_periodic() {
            mesh.wrap(center)
        } else {
            center
        };
        let x_star = track_peak(&self.space, h, center, 10.0 * mesh.dx())?;
        self.last = Some((x_star, t));
        let amplitude = evaluate(&self.space, h, x_star)?.0;
        let elapsed = t - self.t0;
        let s = self.best_shift(h, elapsed)?;
        let zeta = self.shape_distance(h, s)?.max(0.0).sqrt();
        Ok(WaveTrackRecord {
            t,
            x_star,
            amplitude,
            e_amp: (amplitude - self.amp0).abs() / self.amp0.abs(),
            e_phase: self.wrapped_distance(x_star, self.x0 + self.c_s * elapsed),
            e_shape: zeta / self.norm0,
        })
    }
}

/// `E_K = max_n |K(tⁿ) − K(t⁰)|` for the four invariants.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DriftReport {
    pub mass: f64,
    pub momentum: f64,
    pub impulse: f64,
    pub energy: f64,
}

/// Which invariants the discrete scheme preserves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conserved {
    pub mass: bool,
    pub momentum: bool,
    pub impulse: bool,
    pub energy: bool,
}

pub fn expected_conserved(bc: BoundaryCondition, scheme: SchemeKind, relaxed: bool) -> Conserved {
    let periodic = bc == BoundaryCondition::Periodic;
    Conserved {
        mass: true,
        momentum: periodic,
        impulse: periodic && scheme == SchemeKind::Standard,
        energy: scheme == SchemeKind::Conservative && relaxed,
    }
}

pub fn drift_report(series: &[InvariantRecord]) -> Result<DriftReport> {
    let first = series.first().ok_or_else(|| Error::usage("empty invariant series"))?;
    let mut d = DriftReport::default();
    for r in series {
        d.mass = d.mass.max((r.mass - first.mass).abs());
        d.momentum = d.momentum.max((r.momentum - first.momentum).abs());
        d.impulse = d.impulse.max((r.impulse - first.impulse).abs());
        d.energy = d.energy.max((r.energy - first.energy).abs());
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{interpolate, l2_project, BoundaryVariant};

    #[test]
    fn norm_error_basics() {
        let s = FemSpace::build(0.0, 1.0, 10, 2, BoundaryVariant::Free).unwrap();
        let c = interpolate(&s, |x| x * x);
        assert!(norm_error(&s, &c, |x| x * x, |x| 2.0 * x, 1) < 1e-13);
        let z = vec![0.0; s.dof_count()];
        assert!((norm_error(&s, &z, |_| 1.0, |_| 0.0, 0) - 1.0).abs() < 1e-14);
        assert!((norm_error(&s, &z, |x| x, |_| 1.0, 1) - (1.0f64 / 3.0 + 1.0).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn modified_error_reduces_to_projection() {
        let s = FemSpace::build(0.0, 1.0, 8, 1, BoundaryVariant::Periodic).unwrap();
        let f = |x: f64| (2.0 * std::f64::consts::PI * x).sin();
        let fx = |x: f64| 2.0 * std::f64::consts::PI * (2.0 * std::f64::consts::PI * x).cos();
        let h = l2_project(&s, f).unwrap();
        let w = l2_project(&s, fx).unwrap();
        let e = modified_h1_error(&s, &h, &s, &w, f, fx);
        let p = norm_error(&s, &w, fx, |_| 0.0, 0);
        let q = norm_error(&s, &h, f, |_| 0.0, 0);
        assert!((e * e - p * p - q * q).abs() < 1e-14);
    }

    #[test]
    fn rates() {
        let r = convergence_rates(&[5.595e-2, 1.378e-2], &[0.1, 0.05]).unwrap();
        assert!((r[0].unwrap() - 2.021).abs() < 1e-3);
        let r = convergence_rates(&[1.0, 1.0], &[0.1, 0.05]).unwrap();
        assert_eq!(r[0], Some(0.0));
        let r = convergence_rates(&[1.0, 0.0625], &[0.2, 0.1]).unwrap();
        assert!((r[0].unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(convergence_rates(&[1.0, 0.0], &[0.2, 0.1]).unwrap()[0], None);
        assert!(convergence_rates(&[1.0], &[0.1]).unwrap().is_empty());
        assert!(convergence_rates(&[1.0, 2.0], &[0.1, 0.2]).is_err());
    }

    fn pulse_space(r: usize, bc: BoundaryVariant) -> FemSpace {
        FemSpace::build(-10.0, 10.0, 200, r, bc).unwrap()
    }

    #[test]
    fn peak_of_symmetric_and_shifted_pulse() {
        for bc in [BoundaryVariant::Free, BoundaryVariant::Periodic] {
            let s = FemSpace::build(-10.0, 10.0, 1000, 3, bc).unwrap();
            let c = interpolate(&s, |x| 1.0 / (x - 0.3).cosh().powi(2));
            let x = track_peak(&s, &c, 0.0, 1.0).unwrap();
            let c0 = interpolate(&s, |x| 1.0 / x.cosh().powi(2));
            let x0 = track_peak(&s, &c0, 0.2, 1.0).unwrap();
            assert!(x0.abs() < 1e-6, "{x0}");
            assert!((x - 0.3).abs() < 1e-6, "{x}");
        }
        let s = pulse_space(1, BoundaryVariant::Periodic);
        let c = interpolate(&s, |x| 1.0 / (x - 0.33).cosh().powi(2));
        assert!((track_peak(&s, &c, 0.0, 1.0).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn peak_lost() {
        let s = pulse_space(2, BoundaryVariant::Free);
        let c = interpolate(&s, |x| x);
        assert!(matches!(track_peak(&s, &c, 0.0, 1.0), Err(Error::TrackingLost { .. })));
    }

    #[test]
    fn tracker_starts_at_zero_and_follows_translation() {
        let s = pulse_space(3, BoundaryVariant::Periodic);
        let prof = |x: f64| 0.5 / (0.8 * x).cosh().powi(2);
        let h0 = l2_project(&s, prof).unwrap();
        let mut tr = WaveTracker::new(&s, &h0, 1.2, 0.0).unwrap();
        let r0 = tr.record(&h0, 0.0).unwrap();
        assert!(r0.e_amp < 1e-14 && r0.e_phase < 1e-9 && r0.e_shape < 1e-9, "{r0:?}");
        // exact translation by c·t, projected
        let t = 0.5;
        let h1 = l2_project(&s, |x| prof(x - 1.2 * t - 0.01)).unwrap();
        let r1 = tr.record(&h1, t).unwrap();
        assert!((r1.e_phase - 0.01).abs() < 1e-4, "{r1:?}");
        assert!(r1.e_shape < 1e-3);
        // optimality of the returned shift
        let sbest = tr.best_shift(&h1, t).unwrap();
        let z = tr.shape_distance(&h1, sbest).unwrap();
        assert!(z <= tr.shape_distance(&h1, sbest + 1e-9).unwrap() + 1e-18);
        assert!(z <= tr.shape_distance(&h1, sbest - 1e-9).unwrap() + 1e-18);
    }

    #[test]
    fn drift() {
        let rec = InvariantRecord {
            t: 0.0,
            mass: 1.0,
            momentum: 2.0,
            impulse: 3.0,
            energy: 4.0,
        };
        assert_eq!(drift_report(&[rec, rec, rec]).unwrap(), DriftReport::default());
        let mut r2 = rec;
        r2.energy += 1e-3;
        assert!((drift_report(&[rec, r2]).unwrap().energy - 1e-3).abs() < 1e-15);
        assert!(drift_report(&[]).is_err());
        let c = expected_conserved(BoundaryCondition::Reflective, SchemeKind::Conservative, true);
        assert!(c.mass && c.energy && !c.momentum && !c.impulse);
    }
}
