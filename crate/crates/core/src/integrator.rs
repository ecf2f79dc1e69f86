//! Reference solutions from an adaptive Dormand-Prince 5(4) pair.
//!
//! The stepper is generic over fixed-size states. It uses the classic
//! coefficients with the embedded fourth-order error estimate, a PI step-size
//! controller, and the fourth-order continuous extension, so a trajectory can
//! be sampled anywhere inside a step without constraining the step size.
//!
//! Lotka-Volterra orbits with strictly positive populations are integrated in
//! logarithmic coordinates `u = ln x`, `v = ln y`:
//!
//! ```text
//! du/dt = a - b e^v,   dv/dt = -c + d e^u
//! ```
//!
//! Populations that dip to `1e-120` along an orbit keep full relative
//! accuracy this way, and positivity holds by construction. States on an
//! axis use the original coordinates. No projection onto the first integral
//! is performed.

use crate::error::{Error, Result};
use crate::model::{vector_field_unchecked, ModelParams, PopulationState};
use crate::series::InitialValueProblem;
use crate::trajectory::{validate_grid, Sample, Trajectory};

/// Tolerances and step limits of the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// `None` picks the first step from the local curvature.
    pub initial_step: Option<f64>,
    pub max_steps: usize,
    /// Attach first-integral residuals to the returned trajectory.
    pub record_residuals: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 1.0,
            initial_step: None,
            max_steps: 1_000_000,
            record_residuals: false,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, tol) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(Error::InvalidArgument(format!("{name} must lie in (0, 1), got {tol}")));
            }
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidArgument(format!("max_step must be > 0, got {}", self.max_step)));
        }
        if let Some(h) = self.initial_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidArgument(format!("initial_step must be > 0, got {h}")));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidArgument("max_steps must be > 0".into()));
        }
        Ok(())
    }
}

/// Right-hand side `dy/dt = f(t, y)` of an autonomous or non-autonomous system.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N];
}

impl<const N: usize, F> OdeSystem<N> for F
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N] {
        self(t, y)
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Continuous extension.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const MIN_SCALE: f64 = 0.2;
const MAX_SCALE: f64 = 5.0;
const PI_BETA: f64 = 0.04;
/// Steps shorter than this fraction of the integration span count as underflow.
const UNDERFLOW_FRACTION: f64 = 1e-14;

/// Interpolant over one accepted step.
#[derive(Debug, Clone, Copy)]
pub struct DenseSegment<const N: usize> {
    pub t_start: f64,
    pub h: f64,
    cont: [[f64; N]; 5],
}

impl<const N: usize> DenseSegment<N> {
    pub fn t_end(&self) -> f64 {
        self.t_start + self.h
    }

    pub fn y_start(&self) -> [f64; N] {
        self.cont[0]
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t_start) / self.h;
        let theta1 = 1.0 - theta;
        let c = &self.cont;
        std::array::from_fn(|i| {
            c[0][i] + theta * (c[1][i] + theta1 * (c[2][i] + theta * (c[3][i] + theta1 * c[4][i])))
        })
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(w, k)| w * k[i]).sum::<f64>())
}

/// Adaptive Dormand-Prince stepper from `t0` to `t_final`.
pub struct Dopri5<S, const N: usize> {
    system: S,
    cfg: IntegratorConfig,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    t_final: f64,
    min_step: f64,
    prev_err: f64,
    rejected_last: bool,
    steps: usize,
}

impl<S: OdeSystem<N>, const N: usize> Dopri5<S, N> {
    pub fn new(system: S, t0: f64, y0: [f64; N], t_final: f64, cfg: IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        if !(t_final > t0) {
            return Err(Error::InvalidArgument(format!("integration end {t_final} must exceed start {t0}")));
        }
        if y0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("initial state".into()));
        }
        let k1 = system.rhs(t0, &y0);
        let mut stepper = Self {
            system,
            cfg,
            t: t0,
            y: y0,
            k1,
            h: 0.0,
            t_final,
            min_step: UNDERFLOW_FRACTION * (t_final - t0),
            prev_err: 1e-4,
            rejected_last: false,
            steps: 0,
        };
        stepper.h = match cfg.initial_step {
            Some(h) => h.min(cfg.max_step),
            None => stepper.initial_step(),
        };
        Ok(stepper)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> [f64; N] {
        self.y
    }

    fn weight(&self, a: f64, b: f64) -> f64 {
        self.cfg.abs_tol + self.cfg.rel_tol * a.abs().max(b.abs())
    }

    /// Curvature-based starting step.
    fn initial_step(&self) -> f64 {
        let sk: [f64; N] = std::array::from_fn(|i| self.weight(self.y[i], 0.0));
        let dnf: f64 = (0..N).map(|i| (self.k1[i] / sk[i]).powi(2)).sum();
        let dny: f64 = (0..N).map(|i| (self.y[i] / sk[i]).powi(2)).sum();
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            0.01 * (dny / dnf).sqrt()
        };
        h = h.min(self.cfg.max_step).min(self.t_final - self.t);
        let y1 = axpy(&self.y, h, &[(1.0, &self.k1)]);
        let f1 = self.system.rhs(self.t + h, &y1);
        let der2 = (0..N).map(|i| ((f1[i] - self.k1[i]) / sk[i]).powi(2)).sum::<f64>().sqrt() / h;
        let der12 = der2.abs().max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 {
            (h * 1e-3).max(1e-6)
        } else {
            (0.01 / der12).powf(1.0 / 5.0)
        };
        (100.0 * h).min(h1).min(self.cfg.max_step)
    }

    /// Advances one accepted step; `None` once `t_final` has been reached.
    pub fn step(&mut self) -> Result<Option<DenseSegment<N>>> {
        if self.t >= self.t_final {
            return Ok(None);
        }
        loop {
            if self.steps >= self.cfg.max_steps {
                return Err(Error::TooManySteps {
                    t: self.t,
                    max_steps: self.cfg.max_steps,
                });
            }
            self.steps += 1;

            let mut h = self.h.min(self.cfg.max_step);
            let mut last = false;
            if self.t + 1.01 * h >= self.t_final {
                h = self.t_final - self.t;
                last = true;
            }
            if h < self.min_step {
                return Err(Error::StepUnderflow { t: self.t, h });
            }

            let (t, y, k1) = (self.t, self.y, self.k1);
            let f = &self.system;
            let k2 = f.rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
            let k3 = f.rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f.rhs(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f.rhs(t + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let y6 = axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
            let t_new = if last { self.t_final } else { t + h };
            let k6 = f.rhs(t_new, &y6);
            let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            if y_new.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence { t: t + h });
            }
            let k7 = f.rhs(t_new, &y_new);

            let err_vec = axpy(&[0.0; N], h, &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)]);
            let err = ((0..N)
                .map(|i| (err_vec[i] / self.weight(y[i], y_new[i])).powi(2))
                .sum::<f64>()
                / N as f64)
                .sqrt();
            if !err.is_finite() {
                return Err(Error::Divergence { t: t + h });
            }

            // PI controller; the scale is the reciprocal of hnew / h.
            let expo = 0.2 - PI_BETA * 0.75;
            let err_pow = err.powf(expo);
            let inv_scale = (err_pow / self.prev_err.powf(PI_BETA) / SAFETY).clamp(1.0 / MAX_SCALE, 1.0 / MIN_SCALE);
            if err <= 1.0 {
                self.prev_err = err.max(1e-4);
                let mut h_next = (h / inv_scale).min(self.cfg.max_step);
                if self.rejected_last {
                    h_next = h_next.min(h);
                }
                self.rejected_last = false;

                let diff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
                let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - diff[i]);
                let cont = [
                    y,
                    diff,
                    bspl,
                    std::array::from_fn(|i| diff[i] - h * k7[i] - bspl[i]),
                    axpy(&[0.0; N], h, &[(D1, &k1), (D3, &k3), (D4, &k4), (D5, &k5), (D6, &k6), (D7, &k7)]),
                ];
                let segment = DenseSegment { t_start: t, h: t_new - t, cont };

                self.t = t_new;
                self.y = y_new;
                self.k1 = k7;
                self.h = h_next;
                return Ok(Some(segment));
            }
            self.h = h / (1.0 / MIN_SCALE).min(err_pow / SAFETY);
            self.rejected_last = true;
        }
    }
}

// --- Lotka-Volterra reference solutions --------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Coordinates {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy)]
struct LvSystem {
    p: ModelParams,
    coords: Coordinates,
}

impl LvSystem {
    fn for_state(p: ModelParams, s: &PopulationState) -> Self {
        let coords = if s.is_strictly_positive() {
            Coordinates::Log
        } else {
            Coordinates::Linear
        };
        Self { p, coords }
    }

    fn encode(&self, s: &PopulationState) -> [f64; 2] {
        match self.coords {
            Coordinates::Log => [s.x.ln(), s.y.ln()],
            Coordinates::Linear => [s.x, s.y],
        }
    }

    fn decode(&self, z: &[f64; 2]) -> (f64, f64) {
        match self.coords {
            Coordinates::Log => (z[0].exp(), z[1].exp()),
            Coordinates::Linear => (z[0], z[1]),
        }
    }
}

impl OdeSystem<2> for LvSystem {
    fn rhs(&self, _t: f64, z: &[f64; 2]) -> [f64; 2] {
        let p = &self.p;
        match self.coords {
            Coordinates::Log => [p.a() - p.b() * z[1].exp(), -p.c() + p.d() * z[0].exp()],
            Coordinates::Linear => {
                let (fx, fy) = vector_field_unchecked(p, z[0], z[1]);
                [fx, fy]
            }
        }
    }
}

fn stepper(ivp: &InitialValueProblem, cfg: &IntegratorConfig, t_final: f64) -> Result<(LvSystem, Dopri5<LvSystem, 2>)> {
    let system = LvSystem::for_state(ivp.params, &ivp.initial);
    let z0 = system.encode(&ivp.initial);
    Ok((system, Dopri5::new(system, 0.0, z0, t_final, *cfg)?))
}

fn finish(samples: Vec<Sample>, ivp: &InitialValueProblem, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let traj = Trajectory::new(samples)?;
    if cfg.record_residuals {
        traj.with_residuals(&ivp.params)
    } else {
        Ok(traj)
    }
}

fn check_residual_request(ivp: &InitialValueProblem, cfg: &IntegratorConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.record_residuals && !ivp.initial.is_strictly_positive() {
        return Err(Error::Domain("residuals need strictly positive initial populations".into()));
    }
    Ok(())
}

/// Reference trajectory sampled exactly at the grid points through the
/// continuous extension.
pub fn integrate(ivp: &InitialValueProblem, cfg: &IntegratorConfig, grid: &[f64]) -> Result<Trajectory> {
    check_residual_request(ivp, cfg)?;
    validate_grid(grid)?;
    let t_last = grid[grid.len() - 1];
    if t_last > ivp.t_end {
        return Err(Error::InvalidArgument(format!(
            "grid ends at {t_last}, past the horizon {}",
            ivp.t_end
        )));
    }
    let initial = Sample {
        t: 0.0,
        x: ivp.initial.x,
        y: ivp.initial.y,
    };
    let mut samples = Vec::with_capacity(grid.len());
    let mut pending = grid.iter().copied().peekable();
    if pending.peek() == Some(&0.0) {
        samples.push(initial);
        pending.next();
    }
    if pending.peek().is_none() {
        return finish(samples, ivp, cfg);
    }
    let (system, mut run) = stepper(ivp, cfg, t_last)?;
    while let Some(segment) = run.step()? {
        let seg_end = segment.t_end();
        while let Some(&t) = pending.peek() {
            if t > seg_end {
                break;
            }
            let (x, y) = system.decode(&segment.eval(t));
            samples.push(Sample { t, x, y });
            pending.next();
        }
    }
    finish(samples, ivp, cfg)
}

/// Reference trajectory at the accepted step boundaries on `[0, t_end]`.
pub fn integrate_steps(ivp: &InitialValueProblem, cfg: &IntegratorConfig) -> Result<Trajectory> {
    check_residual_request(ivp, cfg)?;
    let (system, mut run) = stepper(ivp, cfg, ivp.t_end)?;
    let mut samples = vec![Sample {
        t: 0.0,
        x: ivp.initial.x,
        y: ivp.initial.y,
    }];
    while run.step()?.is_some() {
        let (x, y) = system.decode(&run.y());
        samples.push(Sample { t: run.t(), x, y });
    }
    finish(samples, ivp, cfg)
}

/// Time limit for the period search, `100 / sqrt(a c)`.
pub fn period_search_horizon(p: &ModelParams) -> f64 {
    100.0 / (p.a() * p.c()).sqrt()
}

const SECTION_SUBDIVISIONS: usize = 8;
const PERIOD_TOL: f64 = 1e-10;

/// First return time to the section through the initial state.
///
/// The section is the line `y = y0` crossed in the same direction as at
/// `t = 0`. When the initial predator velocity vanishes (the state sits on
/// the line `x = c/d`) the line `x = x0` is used instead. The crossing time
/// is polished by bisection on the continuous extension.
pub fn estimate_period(ivp: &InitialValueProblem, cfg: &IntegratorConfig) -> Result<f64> {
    cfg.validate()?;
    let p = &ivp.params;
    let s0 = ivp.initial;
    let Some(center) = p.center() else {
        return Err(Error::Domain("the decoupled model has no periodic orbits".into()));
    };
    if !s0.is_strictly_positive() {
        return Err(Error::Domain("period estimation needs strictly positive populations".into()));
    }
    if s0 == center {
        return Err(Error::Domain("the initial state is the center: no orbit to time".into()));
    }

    let system = LvSystem::for_state(*p, &s0);
    let z0 = system.encode(&s0);
    let v0 = system.rhs(0.0, &z0);
    let component = if v0[1] != 0.0 { 1 } else { 0 };
    let direction = v0[component].signum();
    if direction == 0.0 {
        return Err(Error::Domain("the initial state is a fixed point".into()));
    }
    let g = |z: &[f64; 2]| direction * (z[component] - z0[component]);

    let horizon = period_search_horizon(p);
    let mut run = Dopri5::new(system, 0.0, z0, horizon, *cfg)?;
    while let Some(segment) = run.step()? {
        let mut t_prev = segment.t_start;
        let mut g_prev = g(&segment.eval(t_prev));
        for k in 1..=SECTION_SUBDIVISIONS {
            let t = segment.t_start + segment.h * k as f64 / SECTION_SUBDIVISIONS as f64;
            let g_t = g(&segment.eval(t));
            if g_prev < 0.0 && g_t >= 0.0 {
                let (mut lo, mut hi) = (t_prev, t);
                while hi - lo > PERIOD_TOL {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if g(&segment.eval(mid)) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return Ok(0.5 * (lo + hi));
            }
            t_prev = t;
            g_prev = g_t;
        }
    }
    Err(Error::PeriodNotFound { horizon })
}

/// Distance from `q` to the segment `[a, b]`.
pub(crate) fn point_segment_distance(q: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let s = if len2 > 0.0 {
        (((q.0 - a.0) * dx + (q.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (q.0 - (a.0 + s * dx)).hypot(q.1 - (a.1 + s * dy))
}

/// True when the trajectory, restricted to `[0.5 T, 1.5 T]`, passes within
/// `eps` of its first sample (distance to the polyline through the samples).
pub fn closed_orbit_check_with_period(traj: &Trajectory, period: f64, eps: f64) -> Result<bool> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::InvalidArgument(format!("period must be > 0, got {period}")));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be > 0, got {eps}")));
    }
    if traj.last().t < period {
        return Err(Error::InvalidArgument(format!(
            "trajectory ends at {} before one period ({period})",
            traj.last().t
        )));
    }
    let start = (traj.first().x, traj.first().y);
    let window = traj.window(0.5 * period, 1.5 * period);
    let best = match window {
        [] => f64::INFINITY,
        [only] => (only.x - start.0).hypot(only.y - start.1),
        _ => window
            .windows(2)
            .map(|w| point_segment_distance(start, (w[0].x, w[0].y), (w[1].x, w[1].y)))
            .fold(f64::INFINITY, f64::min),
    };
    Ok(best < eps)
}

/// [`closed_orbit_check_with_period`] with the period taken from
/// [`estimate_period`] at default settings.
pub fn closed_orbit_check(traj: &Trajectory, ivp: &InitialValueProblem, eps: f64) -> Result<bool> {
    let period = estimate_period(ivp, &IntegratorConfig::default())?;
    closed_orbit_check_with_period(traj, period, eps)
}
