//! Failure measures for truncated series: divergence from the reference,
//! drift of the first integral, and self-crossing of the phase curve.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{closed_orbit_check_with_period, estimate_period, integrate, IntegratorConfig};
use crate::methods::{approximate_series, MethodKind};
use crate::model::{invariant_residual, ModelParams};
use crate::series::InitialValueProblem;
use crate::trajectory::{linspace, Trajectory};

/// Default relative deviation at which a series counts as diverged.
pub const DEFAULT_DELTA: f64 = 1.0;
/// Default closure distance for the orbit check.
pub const DEFAULT_CLOSURE_EPS: f64 = 1e-6;
/// Samples over `[0, 1.5 T]` used for the orbit-closure check.
const CLOSURE_SAMPLES: usize = 1501;

/// First grid time where
/// `max(|x_a - x_r|, |y_a - y_r|) / (1 + max(|x_r|, |y_r|)) > delta`.
pub fn divergence_time(approx: &Trajectory, reference: &Trajectory, delta: f64) -> Result<Option<f64>> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be > 0, got {delta}")));
    }
    if approx.len() != reference.len() || approx.times().zip(reference.times()).any(|(a, r)| a != r) {
        return Err(Error::InvalidArgument("trajectories are not sampled on the same grid".into()));
    }
    Ok(approx
        .samples()
        .iter()
        .zip(reference.samples())
        .find(|(a, r)| {
            let dev = (a.x - r.x).abs().max((a.y - r.y).abs());
            dev / (1.0 + r.x.abs().max(r.y.abs())) > delta
        })
        .map(|(a, _)| a.t))
}

/// A crossing between polyline segments `i` and `j` (`j >= i + 2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfIntersection {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
}

type Point = (f64, f64);

fn cross(u: Point, v: Point) -> f64 {
    u.0 * v.1 - u.1 * v.0
}

/// Intersection of segments `[p, p + r]` and `[q, q + s]`, if any.
/// Collinear overlaps count; the returned point is the start of the overlap.
fn segment_intersection(p: Point, p2: Point, q: Point, q2: Point) -> Option<Point> {
    let r = (p2.0 - p.0, p2.1 - p.1);
    let s = (q2.0 - q.0, q2.1 - q.1);
    let qp = (q.0 - p.0, q.1 - p.1);
    let denom = cross(r, s);
    if denom == 0.0 {
        if cross(qp, r) != 0.0 {
            return None;
        }
        // Collinear: project onto r (or s when r is degenerate).
        let dir = if r != (0.0, 0.0) { r } else { s };
        let len2 = dir.0 * dir.0 + dir.1 * dir.1;
        if len2 == 0.0 {
            return (p == q).then_some(p);
        }
        let proj = |pt: Point| ((pt.0 - p.0) * dir.0 + (pt.1 - p.1) * dir.1) / len2;
        let (a0, a1) = if r != (0.0, 0.0) { (0.0, 1.0) } else { sorted(proj(p), proj(p2)) };
        let (b0, b1) = sorted(proj(q), proj(q2));
        let lo = a0.max(b0);
        if lo > a1.min(b1) {
            return None;
        }
        return Some((p.0 + lo * dir.0, p.1 + lo * dir.1));
    }
    let t = cross(qp, s) / denom;
    let u = cross(qp, r) / denom;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then_some((p.0 + t * r.0, p.1 + t * r.1))
}

fn sorted(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// First crossing, lexicographic in `(i, j)`, of the polyline through the
/// points. Adjacent segments never count, and neither does the pair formed
/// by the first and last segment, so a closed loop is not reported.
pub fn polyline_self_intersection(points: &[Point]) -> Result<Option<SelfIntersection>> {
    if points.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "self-intersection needs at least 4 samples, got {}",
            points.len()
        )));
    }
    let n_seg = points.len() - 1;
    for i in 0..n_seg {
        for j in (i + 2)..n_seg {
            if i == 0 && j == n_seg - 1 {
                continue;
            }
            if let Some((x, y)) = segment_intersection(points[i], points[i + 1], points[j], points[j + 1]) {
                return Ok(Some(SelfIntersection { i, j, x, y }));
            }
        }
    }
    Ok(None)
}

/// Self-intersection of a trajectory's phase-plane polyline.
pub fn self_intersection(traj: &Trajectory) -> Result<Option<SelfIntersection>> {
    polyline_self_intersection(&traj.points())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftSummary {
    /// Max `|C(sample) - C(first sample)|` over samples in the open quadrant.
    pub max_drift: f64,
    /// Samples skipped because a coordinate was not strictly positive.
    pub excluded: usize,
}

pub fn conservation_drift(traj: &Trajectory, p: &ModelParams) -> Result<DriftSummary> {
    let s0 = traj.first().state();
    if !s0.is_strictly_positive() {
        return Err(Error::Domain(format!(
            "first sample ({}, {}) is not strictly positive",
            s0.x, s0.y
        )));
    }
    let mut summary = DriftSummary {
        max_drift: 0.0,
        excluded: 0,
    };
    for s in traj.samples() {
        let state = s.state();
        if !state.is_strictly_positive() {
            summary.excluded += 1;
            continue;
        }
        let r = invariant_residual(p, &state, &s0)?;
        summary.max_drift = summary.max_drift.max(r.abs());
    }
    Ok(summary)
}

/// Inputs of a method-versus-reference comparison.
#[derive(Debug, Clone)]
pub struct FailureRequest {
    pub label: String,
    pub ivp: InitialValueProblem,
    pub method: MethodKind,
    pub order: usize,
    pub points: usize,
    pub cfg: IntegratorConfig,
    pub delta: f64,
    pub closure_eps: f64,
}

impl FailureRequest {
    pub fn new(label: impl Into<String>, ivp: InitialValueProblem, method: MethodKind, order: usize) -> Self {
        Self {
            label: label.into(),
            ivp,
            method,
            order,
            points: 2001,
            cfg: IntegratorConfig::default(),
            delta: DEFAULT_DELTA,
            closure_eps: DEFAULT_CLOSURE_EPS,
        }
    }
}

/// Every failure measure for one method and problem. Serializes to the
/// documented report schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub preset: String,
    pub method: MethodKind,
    pub order: usize,
    pub t_end: f64,
    pub divergence_time: Option<f64>,
    pub max_invariant_drift_ref: f64,
    pub max_invariant_drift_approx: f64,
    pub self_intersection: Option<SelfIntersection>,
    pub closed_orbit_ref: bool,
    pub closed_orbit_approx: bool,
    pub period_estimate: Option<f64>,
}

/// Trajectories behind a [`DiagnosticsReport`], on the report's time grid.
#[derive(Debug, Clone)]
pub struct FailureRun {
    pub report: DiagnosticsReport,
    pub reference: Trajectory,
    pub approx: Trajectory,
}

fn period_or_none(ivp: &InitialValueProblem, cfg: &IntegratorConfig) -> Result<Option<f64>> {
    match estimate_period(ivp, cfg) {
        Ok(t) => Ok(Some(t)),
        Err(Error::PeriodNotFound { .. } | Error::Domain(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Orbit closure of the reference and of the approximant over `[0, 1.5 T]`.
/// The grid places a sample exactly at `T`.
fn closure_checks(req: &FailureRequest, period: f64) -> Result<(bool, bool)> {
    let horizon = 1.5 * period;
    let grid = linspace(0.0, horizon, CLOSURE_SAMPLES);
    let reference = integrate(&req.ivp.with_t_end(horizon)?, &req.cfg, &grid)?;
    let closed_ref = closed_orbit_check_with_period(&reference, period, req.closure_eps)?;
    let series = approximate_series(req.method, &req.ivp, req.order);
    let closed_approx = match series.sample(&grid) {
        Ok(approx) => closed_orbit_check_with_period(&approx, period, req.closure_eps)?,
        // Overflowing values are as far from closing as it gets.
        Err(Error::NonFinite(_)) => false,
        Err(e) => return Err(e),
    };
    Ok((closed_ref, closed_approx))
}

/// Runs the method and the reference and fills every report field.
pub fn failure_report(req: &FailureRequest) -> Result<FailureRun> {
    if req.points < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 grid points, got {}", req.points)));
    }
    let grid = linspace(0.0, req.ivp.t_end, req.points);

    let (approx, reference) = std::thread::scope(|scope| {
        let approx = scope.spawn(|| approximate_series(req.method, &req.ivp, req.order).sample(&grid));
        let reference = integrate(&req.ivp, &req.cfg, &grid);
        (approx.join().expect("series evaluation panicked"), reference)
    });
    let (approx, reference) = (approx?, reference?);

    let divergence = divergence_time(&approx, &reference, req.delta)?;
    let (drift_ref, drift_approx) = if req.ivp.initial.is_strictly_positive() {
        (
            conservation_drift(&reference, &req.ivp.params)?.max_drift,
            conservation_drift(&approx, &req.ivp.params)?.max_drift,
        )
    } else {
        (0.0, 0.0)
    };
    let crossing = if approx.len() >= 4 { self_intersection(&approx)? } else { None };

    let period = period_or_none(&req.ivp, &req.cfg)?;
    let (closed_ref, closed_approx) = match period {
        Some(t) => closure_checks(req, t)?,
        None => (false, false),
    };

    let report = DiagnosticsReport {
        preset: req.label.clone(),
        method: req.method,
        order: req.order,
        t_end: req.ivp.t_end,
        divergence_time: divergence,
        max_invariant_drift_ref: drift_ref,
        max_invariant_drift_approx: drift_approx,
        self_intersection: crossing,
        closed_orbit_ref: closed_ref,
        closed_orbit_approx: closed_approx,
        period_estimate: period,
    };
    Ok(FailureRun {
        report,
        reference,
        approx,
    })
}
