//! Truncated time-power series of the solution about `t = 0`.
//!
//! Substituting `x = sum X[n] t^n`, `y = sum Y[n] t^n` into the model and
//! matching powers of `t` gives
//!
//! ```text
//! (n+1) X[n+1] =  a X[n] - b sum_{k=0..n} X[k] Y[n-k]
//! (n+1) Y[n+1] = -c Y[n] + d sum_{k=0..n} X[k] Y[n-k]
//! ```

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelParams, PopulationState};
use crate::trajectory::{validate_grid, Sample, Trajectory};

/// Truncation order used when a caller does not pick one.
pub const DEFAULT_ORDER: usize = 10;

/// Coefficients below this magnitude are treated as zero by the radius estimate.
const NEGLIGIBLE_COEFF: f64 = 1e-300;

/// Model, initial populations and time horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InitialValueProblem {
    pub params: ModelParams,
    pub initial: PopulationState,
    pub t_end: f64,
}

impl InitialValueProblem {
    pub fn new(params: ModelParams, initial: PopulationState, t_end: f64) -> Result<Self> {
        let initial = PopulationState::new(initial.x, initial.y)?;
        if !t_end.is_finite() {
            return Err(Error::NonFinite(format!("t_end = {t_end}")));
        }
        if t_end <= 0.0 {
            return Err(Error::InvalidArgument(format!("t_end must be > 0, got {t_end}")));
        }
        Ok(Self {
            params,
            initial,
            t_end,
        })
    }

    pub fn with_t_end(&self, t_end: f64) -> Result<Self> {
        Self::new(self.params, self.initial, t_end)
    }
}

/// Coefficients `X[0..=N]`, `Y[0..=N]` of the truncated series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesSolution {
    x_coeffs: Vec<f64>,
    y_coeffs: Vec<f64>,
}

/// Estimated radius of convergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusEstimate {
    Finite(f64),
    /// Top-half coefficients vanish: the series looks entire.
    Unbounded,
}

impl SeriesSolution {
    /// Wraps raw coefficient arrays; both must be non-empty and of equal length.
    pub fn from_coefficients(x_coeffs: Vec<f64>, y_coeffs: Vec<f64>) -> Result<Self> {
        if x_coeffs.is_empty() || x_coeffs.len() != y_coeffs.len() {
            return Err(Error::InvalidArgument(format!(
                "coefficient arrays must be non-empty and equal in length ({} vs {})",
                x_coeffs.len(),
                y_coeffs.len()
            )));
        }
        Ok(Self { x_coeffs, y_coeffs })
    }

    pub fn order(&self) -> usize {
        self.x_coeffs.len() - 1
    }

    pub fn x_coeffs(&self) -> &[f64] {
        &self.x_coeffs
    }

    pub fn y_coeffs(&self) -> &[f64] {
        &self.y_coeffs
    }

    /// Horner evaluation of both polynomials. Components may be negative.
    pub fn evaluate(&self, t: f64) -> (f64, f64) {
        (horner(&self.x_coeffs, t), horner(&self.y_coeffs, t))
    }

    /// One sample per grid point.
    pub fn sample(&self, grid: &[f64]) -> Result<Trajectory> {
        validate_grid(grid)?;
        let samples = grid
            .iter()
            .map(|&t| {
                let (x, y) = self.evaluate(t);
                Sample { t, x, y }
            })
            .collect();
        Trajectory::new(samples)
    }

    /// Root-test estimate of the convergence radius: the reciprocal of the
    /// largest `|c_n|^(1/n)` over the top half of the available orders, taken
    /// across both components.
    pub fn radius_estimate(&self) -> Result<RadiusEstimate> {
        let n_max = self.order();
        if n_max < 5 {
            return Err(Error::InvalidArgument(format!(
                "radius estimate needs order >= 5, got {n_max}"
            )));
        }
        let lo = n_max.div_ceil(2);
        let root = (lo..=n_max)
            .flat_map(|n| [(n, self.x_coeffs[n]), (n, self.y_coeffs[n])])
            .filter(|(_, c)| c.abs() >= NEGLIGIBLE_COEFF)
            .map(|(n, c)| c.abs().powf(1.0 / n as f64))
            .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |m| m.max(r))));
        Ok(match root {
            Some(r) => RadiusEstimate::Finite(1.0 / r),
            None => RadiusEstimate::Unbounded,
        })
    }

    /// Largest `|coefficient of t^n|` of `dX/dt - aX + bXY` (and the `Y`
    /// analogue) over `n < N`, divided by `1 + |largest term|` for that power.
    pub fn substitution_residual(&self, p: &ModelParams) -> f64 {
        let n_max = self.order();
        let mut worst = 0.0f64;
        for n in 0..n_max {
            let conv: f64 = (0..=n).map(|k| self.x_coeffs[k] * self.y_coeffs[n - k]).sum();
            let dx = (n + 1) as f64 * self.x_coeffs[n + 1];
            let dy = (n + 1) as f64 * self.y_coeffs[n + 1];
            let rx = dx - p.a() * self.x_coeffs[n] + p.b() * conv;
            let ry = dy + p.c() * self.y_coeffs[n] - p.d() * conv;
            let sx = 1.0 + dx.abs().max((p.a() * self.x_coeffs[n]).abs()).max((p.b() * conv).abs());
            let sy = 1.0 + dy.abs().max((p.c() * self.y_coeffs[n]).abs()).max((p.d() * conv).abs());
            worst = worst.max(rx.abs() / sx).max(ry.abs() / sy);
        }
        worst
    }
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

/// Neumaier's compensated sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Cauchy product `sum_{k=0..n} x[k] y[n-k]`, accumulated in order `k = 0..n`.
pub(crate) fn cauchy_term(x: &[f64], y: &[f64], n: usize) -> f64 {
    let mut acc = CompensatedSum::default();
    for k in 0..=n {
        acc.add(x[k] * y[n - k]);
    }
    acc.total()
}

/// Taylor coefficients through order `order`.
///
/// The first-order pair is the vector field at the initial state,
/// `x0 (a - b y0)` and `y0 (d x0 - c)`; higher orders follow the recurrence.
pub fn taylor_coefficients(ivp: &InitialValueProblem, order: usize) -> SeriesSolution {
    let p = &ivp.params;
    let (x0, y0) = (ivp.initial.x, ivp.initial.y);
    let mut x = Vec::with_capacity(order + 1);
    let mut y = Vec::with_capacity(order + 1);
    x.push(x0);
    y.push(y0);
    if order >= 1 {
        x.push(x0 * (p.a() - p.b() * y0));
        y.push(y0 * (p.d() * x0 - p.c()));
    }
    for n in 1..order {
        let conv = cauchy_term(&x, &y, n);
        let k = (n + 1) as f64;
        x.push((p.a() * x[n] - p.b() * conv) / k);
        y.push((-p.c() * y[n] + p.d() * conv) / k);
    }
    SeriesSolution {
        x_coeffs: x,
        y_coeffs: y,
    }
}

#[cfg(test)]
pub(crate) mod oracle {
    //! Symbolic Lie-derivative oracle: the n-th time derivative of `x` is
    //! `L^n x` with `L = f . grad`, applied to polynomials in `(x, y)`.

    use std::collections::BTreeMap;

    use crate::model::ModelParams;

    type Bivariate = BTreeMap<(u32, u32), f64>;

    fn lie(p: &ModelParams, poly: &Bivariate) -> Bivariate {
        let mut out = Bivariate::new();
        let mut put = |key, v: f64| *out.entry(key).or_insert(0.0) += v;
        for (&(i, j), &c) in poly {
            // d/dt x^i y^j = i x^i y^j (a - b y) - j x^i y^j (c - d x)
            if i > 0 {
                put((i, j), c * i as f64 * p.a());
                put((i, j + 1), -c * i as f64 * p.b());
            }
            if j > 0 {
                put((i, j), -c * j as f64 * p.c());
                put((i + 1, j), c * j as f64 * p.d());
            }
        }
        out
    }

    fn eval(poly: &Bivariate, x: f64, y: f64) -> f64 {
        poly.iter()
            .map(|(&(i, j), &c)| c * x.powi(i as i32) * y.powi(j as i32))
            .sum()
    }

    /// `(X[n], Y[n])` for `n = 0..=order` by repeated symbolic differentiation.
    pub fn coefficients(p: &ModelParams, x0: f64, y0: f64, order: usize) -> (Vec<f64>, Vec<f64>) {
        let mut dx = Bivariate::from([((1, 0), 1.0)]);
        let mut dy = Bivariate::from([((0, 1), 1.0)]);
        let mut factorial = 1.0;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for n in 0..=order {
            if n > 0 {
                factorial *= n as f64;
                dx = lie(p, &dx);
                dy = lie(p, &dy);
            }
            xs.push(eval(&dx, x0, y0) / factorial);
            ys.push(eval(&dy, x0, y0) / factorial);
        }
        (xs, ys)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::linspace;
    use proptest::prelude::*;

    fn ivp(a: f64, b: f64, c: f64, d: f64, x0: f64, y0: f64) -> InitialValueProblem {
        let p = ModelParams::new(a, b, c, d).unwrap();
        InitialValueProblem::new(p, PopulationState::new(x0, y0).unwrap(), 10.0).unwrap()
    }

    fn case_i() -> InitialValueProblem {
        ivp(1.0, 1.0, 0.1, 1.0, 14.0, 18.0)
    }

    fn case_v() -> InitialValueProblem {
        ivp(1.0, 1.0, 1.0, 1.0, 3.0, 2.0)
    }

    fn decoupled() -> InitialValueProblem {
        let p = ModelParams::decoupled(1.0, 1.0).unwrap();
        InitialValueProblem::new(p, PopulationState::new(1.0, 1.0).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn ivp_validation() {
        let p = ModelParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let s = PopulationState::new(1.0, 1.0).unwrap();
        assert!(InitialValueProblem::new(p, s, 0.0).is_err());
        assert!(InitialValueProblem::new(p, s, f64::INFINITY).is_err());
        let bad = PopulationState { x: -1.0, y: 1.0 };
        assert!(InitialValueProblem::new(p, bad, 1.0).is_err());
    }

    #[test]
    fn first_order_case_i() {
        let s = taylor_coefficients(&case_i(), 1);
        assert_eq!(s.order(), 1);
        assert_eq!(s.x_coeffs(), &[14.0, 14.0 * (1.0 - 1.0 * 18.0)]);
        assert_eq!(s.x_coeffs()[1], -238.0);
        assert_eq!(s.y_coeffs()[1], 18.0 * (1.0 * 14.0 - 0.1));
        assert!((s.y_coeffs()[1] - 250.2).abs() < 1e-12);
    }

    #[test]
    fn second_order_case_v() {
        let s = taylor_coefficients(&case_v(), 2);
        assert_eq!(s.x_coeffs(), &[3.0, -3.0, -4.5]);
        assert_eq!(s.y_coeffs(), &[2.0, 4.0, 1.0]);
        let (ox, oy) = oracle::coefficients(&case_v().params, 3.0, 2.0, 2);
        assert_eq!(ox, vec![3.0, -3.0, -4.5]);
        assert_eq!(oy, vec![2.0, 4.0, 1.0]);
    }

    #[test]
    fn matches_symbolic_oracle_through_order_16() {
        for problem in [case_i(), case_v(), ivp(2.0, 0.5, 1.5, 0.25, 0.7, 3.1)] {
            let s = taylor_coefficients(&problem, 16);
            let (ox, oy) = oracle::coefficients(&problem.params, problem.initial.x, problem.initial.y, 16);
            for n in 0..=16 {
                let ex = (s.x_coeffs()[n] - ox[n]).abs() / (1.0 + ox[n].abs());
                let ey = (s.y_coeffs()[n] - oy[n]).abs() / (1.0 + oy[n].abs());
                assert!(ex < 1e-11 && ey < 1e-11, "order {n}: {ex:e} {ey:e}");
            }
        }
    }

    #[test]
    fn decoupled_series_is_exponential() {
        let s = taylor_coefficients(&decoupled(), 4);
        let fact = [1.0, 1.0, 2.0, 6.0, 24.0];
        for n in 0..=4 {
            assert!((s.x_coeffs()[n] - 1.0 / fact[n]).abs() < 1e-15);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((s.y_coeffs()[n] - sign / fact[n]).abs() < 1e-15);
        }
    }

    #[test]
    fn decoupled_matches_closed_form_through_order_20() {
        let p = ModelParams::decoupled(1.7, 0.6).unwrap();
        let problem = InitialValueProblem::new(p, PopulationState::new(2.5, 4.0).unwrap(), 1.0).unwrap();
        let s = taylor_coefficients(&problem, 20);
        let mut fact = 1.0;
        for n in 0..=20 {
            if n > 0 {
                fact *= n as f64;
            }
            let ex = 2.5 * 1.7f64.powi(n as i32) / fact;
            let ey = 4.0 * (-0.6f64).powi(n as i32) / fact;
            assert!((s.x_coeffs()[n] - ex).abs() <= 1e-14 * ex.abs());
            assert!((s.y_coeffs()[n] - ey).abs() <= 1e-14 * ey.abs());
        }
    }

    #[test]
    fn evaluate_examples() {
        let s = taylor_coefficients(&case_v(), 2);
        assert_eq!(s.evaluate(0.0), (3.0, 2.0));
        assert_eq!(s.evaluate(1.0), (-4.5, 7.0));
        let e = taylor_coefficients(&decoupled(), 4);
        assert!((e.evaluate(1.0).0 - 2.708333).abs() < 1e-6);
    }

    #[test]
    fn sample_examples() {
        let s = taylor_coefficients(&case_v(), 2);
        let tr = s.sample(&[0.0]).unwrap();
        assert_eq!(tr.samples(), &[Sample { t: 0.0, x: 3.0, y: 2.0 }]);
        let tr = s.sample(&[0.0, 1.0]).unwrap();
        assert_eq!(tr.samples()[1], Sample { t: 1.0, x: -4.5, y: 7.0 });
        let tr = s.sample(&linspace(0.0, 10.0, 1001)).unwrap();
        assert_eq!(tr.len(), 1001);
        assert!(tr.samples().windows(2).all(|w| w[0].t < w[1].t));
        assert!(s.sample(&[]).is_err());
        assert!(s.sample(&[1.0, 0.5]).is_err());
    }

    #[test]
    fn radius_of_geometric_series() {
        let x: Vec<f64> = (0..=20).map(|n| 2f64.powi(n)).collect();
        let s = SeriesSolution::from_coefficients(x, vec![0.0; 21]).unwrap();
        let RadiusEstimate::Finite(r) = s.radius_estimate().unwrap() else {
            panic!("expected a finite radius");
        };
        assert!((r - 0.5).abs() < 0.05);
    }

    #[test]
    fn radius_of_entire_series() {
        // 1/n! decays faster than any geometric sequence, so the estimate
        // keeps growing with the order.
        let radius = |order| match taylor_coefficients(&decoupled(), order).radius_estimate().unwrap() {
            RadiusEstimate::Unbounded => f64::INFINITY,
            RadiusEstimate::Finite(r) => r,
        };
        let (r20, r40) = (radius(20), radius(40));
        assert!(r20 > 4.0, "radius {r20}");
        assert!(r40 > 1.5 * r20, "radius {r40}");
        let zeros = SeriesSolution::from_coefficients(vec![1.0; 1].into_iter().chain(vec![0.0; 10]).collect(), vec![0.0; 11]).unwrap();
        assert_eq!(zeros.radius_estimate().unwrap(), RadiusEstimate::Unbounded);
    }

    #[test]
    fn radius_needs_order_five() {
        let s = taylor_coefficients(&case_v(), 4);
        assert!(matches!(s.radius_estimate(), Err(Error::InvalidArgument(_))));
    }

    /// Order-200 root test over orders 100..=200, computed in test code.
    fn radius_oracle(problem: &InitialValueProblem) -> f64 {
        let p = &problem.params;
        let (mut x, mut y) = (vec![problem.initial.x], vec![problem.initial.y]);
        for n in 0..200 {
            let conv: f64 = (0..=n).map(|k| x[k] * y[n - k]).sum();
            x.push((p.a() * x[n] - p.b() * conv) / (n + 1) as f64);
            y.push((-p.c() * y[n] + p.d() * conv) / (n + 1) as f64);
        }
        let root = (100..=200)
            .map(|n| x[n].abs().max(y[n].abs()).powf(1.0 / n as f64))
            .fold(0.0, f64::max);
        1.0 / root
    }

    #[test]
    fn radius_case_v_order_40() {
        let RadiusEstimate::Finite(r) = taylor_coefficients(&case_v(), 40).radius_estimate().unwrap() else {
            panic!("expected a finite radius");
        };
        let oracle = radius_oracle(&case_v());
        assert!((oracle - 0.7306).abs() < 1e-3, "oracle {oracle}");
        assert!((r - oracle).abs() / oracle < 0.1);
        // Regression value from the order-40 estimate.
        assert!((r - CASE_V_RADIUS_ORDER_40).abs() < 1e-9, "radius {r}");
    }

    const CASE_V_RADIUS_ORDER_40: f64 = 0.707745840409744;

    fn arb_ivp() -> impl Strategy<Value = InitialValueProblem> {
        (0.1f64..3.0, 0.1f64..3.0, 0.1f64..3.0, 0.1f64..3.0, 0.1f64..5.0, 0.1f64..5.0)
            .prop_map(|(a, b, c, d, x0, y0)| ivp(a, b, c, d, x0, y0))
    }

    proptest! {
        #[test]
        fn series_satisfies_the_model(problem in arb_ivp(), order in 1usize..25) {
            let s = taylor_coefficients(&problem, order);
            prop_assert_eq!(s.x_coeffs().len(), order + 1);
            prop_assert_eq!(s.x_coeffs()[0], problem.initial.x);
            prop_assert_eq!(s.y_coeffs()[0], problem.initial.y);
            prop_assert!(s.substitution_residual(&problem.params) <= 1e-12);
        }

        #[test]
        fn value_at_zero_is_exact(problem in arb_ivp(), order in 0usize..25) {
            let s = taylor_coefficients(&problem, order);
            prop_assert_eq!(s.evaluate(0.0), (problem.initial.x, problem.initial.y));
        }
    }
}
