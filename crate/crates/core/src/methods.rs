//! Adomian decomposition, homotopy perturbation and variational iteration
//! applied to the prey-predator model.
//!
//! Each scheme is carried out on explicit polynomials in `t`; none of them
//! calls the Taylor recurrence. For this model all three reproduce the
//! time-power series, which [`methods_agree`] measures.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::series::{taylor_coefficients, InitialValueProblem, SeriesSolution};

/// Hard ceiling on the degree of a variational iterate.
pub const VIM_MAX_DEGREE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    Taylor,
    Adomian,
    Hpm,
    Vim,
}

impl MethodKind {
    pub const ALL: [MethodKind; 4] = [Self::Taylor, Self::Adomian, Self::Hpm, Self::Vim];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Taylor => "taylor",
            Self::Adomian => "adomian",
            Self::Hpm => "hpm",
            Self::Vim => "vim",
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method `{s}` (taylor|adomian|hpm|vim)")))
    }
}

/// A pair of polynomial approximants `(x(t), y(t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyPair {
    pub x: Polynomial,
    pub y: Polynomial,
}

impl PolyPair {
    fn constant(x0: f64, y0: f64) -> Self {
        Self {
            x: Polynomial::constant(x0),
            y: Polynomial::constant(y0),
        }
    }

    /// Re-expresses the pair as a series of the given order (zero padded).
    pub fn to_series(&self, order: usize) -> SeriesSolution {
        let pad = |p: &Polynomial| (0..=order).map(|n| p.coeff(n)).collect();
        SeriesSolution::from_coefficients(pad(&self.x), pad(&self.y))
            .expect("padded arrays share a non-zero length")
    }

    pub fn degree(&self) -> usize {
        self.x.degree().unwrap_or(0).max(self.y.degree().unwrap_or(0))
    }
}

/// Successive approximants of an iterative scheme, iterate 0 first.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateSequence {
    pub method: MethodKind,
    pub iterates: Vec<PolyPair>,
}

// --- Adomian decomposition -------------------------------------------------

/// Adomian polynomial `A_n` of the bilinear nonlinearity `x y` for the
/// components `u_0, u_1, ...` and `v_0, v_1, ...`.
///
/// `A_n = (1/n!) d^n/dl^n [(sum l^k u_k)(sum l^k v_k)]` at `l = 0`, which for
/// a product collapses to `sum_{k=0..n} u_k v_{n-k}`.
pub fn adomian_polynomial(u: &[Polynomial], v: &[Polynomial], n: usize) -> Polynomial {
    (0..=n).fold(Polynomial::zero(), |acc, k| &acc + &(&u[k] * &v[n - k]))
}

/// Components `(u_n, v_n)` for `n = 0..=order` of the decomposition
/// `x = sum u_n`, `y = sum v_n`, with
/// `u_{n+1} = int_0^t (a u_n - b A_n)` and `v_{n+1} = int_0^t (-c v_n + d A_n)`.
pub fn adomian_components(ivp: &InitialValueProblem, order: usize) -> Vec<PolyPair> {
    let p = &ivp.params;
    let mut u = vec![Polynomial::constant(ivp.initial.x)];
    let mut v = vec![Polynomial::constant(ivp.initial.y)];
    for n in 0..order {
        let a_n = adomian_polynomial(&u, &v, n);
        let du = &u[n].scale(p.a()) - &a_n.scale(p.b());
        let dv = &a_n.scale(p.d()) - &v[n].scale(p.c());
        u.push(du.integral());
        v.push(dv.integral());
    }
    u.into_iter()
        .zip(v)
        .map(|(x, y)| PolyPair { x, y })
        .collect()
}

/// Sum of the first `order + 1` Adomian components.
pub fn adomian_series(ivp: &InitialValueProblem, order: usize) -> SeriesSolution {
    let total = adomian_components(ivp, order)
        .into_iter()
        .fold(PolyPair::constant(0.0, 0.0), |acc, c| PolyPair {
            x: &acc.x + &c.x,
            y: &acc.y + &c.y,
        });
    total.to_series(order)
}

// --- Homotopy perturbation -------------------------------------------------

/// Terms of the homotopy expansion `x = sum p^n x_n`, `y = sum p^n y_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HpmExpansion {
    pub x_terms: Vec<Polynomial>,
    pub y_terms: Vec<Polynomial>,
}

/// Coefficient of `p^n` in the product of two truncated `p`-series whose
/// coefficients are polynomials in `t`.
fn p_series_product_coeff(f: &[Polynomial], g: &[Polynomial], n: usize) -> Polynomial {
    let mut out = Polynomial::zero();
    for (i, fi) in f.iter().enumerate().take(n + 1) {
        if let Some(gj) = g.get(n - i) {
            out = &out + &(fi * gj);
        }
    }
    out
}

/// Solves the homotopy
///
/// ```text
/// dX/dt - p X (a - b Y) = 0,   dY/dt + p Y (c - d X) = 0,   X(0) = x0, Y(0) = y0
/// ```
///
/// order by order in `p`, with linear operator `d/dt` and initial guess
/// `(x0, y0)`. Setting `p = 1` recovers the model.
pub fn hpm_expansion(ivp: &InitialValueProblem, order: usize) -> HpmExpansion {
    let p = &ivp.params;
    // p^0: dx_0/dt = 0 with the initial values carried entirely by x_0.
    let mut xs = vec![Polynomial::constant(ivp.initial.x)];
    let mut ys = vec![Polynomial::constant(ivp.initial.y)];
    for n in 0..order {
        // p^{n+1}: dx_{n+1}/dt = [X (a - bY)]_n, dy_{n+1}/dt = -[Y (c - dX)]_n,
        // x_{n+1}(0) = y_{n+1}(0) = 0.
        let xy_n = p_series_product_coeff(&xs, &ys, n);
        let rhs_x = &xs[n].scale(p.a()) - &xy_n.scale(p.b());
        let rhs_y = &xy_n.scale(p.d()) - &ys[n].scale(p.c());
        xs.push(rhs_x.integral());
        ys.push(rhs_y.integral());
    }
    HpmExpansion {
        x_terms: xs,
        y_terms: ys,
    }
}

impl HpmExpansion {
    pub fn order(&self) -> usize {
        self.x_terms.len() - 1
    }

    /// Value of the expansion at `p = 1`.
    pub fn at_unit_parameter(&self) -> SeriesSolution {
        let sum = |terms: &[Polynomial]| terms.iter().fold(Polynomial::zero(), |acc, t| &acc + t);
        PolyPair {
            x: sum(&self.x_terms),
            y: sum(&self.y_terms),
        }
        .to_series(self.order())
    }

    /// Largest scaled residual of the order-`n` homotopy equations
    /// `dx_{n+1}/dt - a x_n + b [XY]_n = 0` (and the `y` analogue) plus the
    /// initial conditions, over all stored orders.
    pub fn cascade_residual(&self, ivp: &InitialValueProblem) -> f64 {
        let p = &ivp.params;
        let mut worst = (self.x_terms[0].eval(0.0) - ivp.initial.x)
            .abs()
            .max((self.y_terms[0].eval(0.0) - ivp.initial.y).abs());
        worst = worst.max(self.x_terms[0].derivative().coeffs().iter().fold(0.0, |m, c| m.max(c.abs())));
        for n in 0..self.order() {
            let xy_n = p_series_product_coeff(&self.x_terms, &self.y_terms, n);
            let rx = &(&self.x_terms[n + 1].derivative() - &self.x_terms[n].scale(p.a())) + &xy_n.scale(p.b());
            let ry = &(&self.y_terms[n + 1].derivative() + &self.y_terms[n].scale(p.c())) - &xy_n.scale(p.d());
            let scale = 1.0
                + self.x_terms[n + 1].coeffs().iter().chain(self.y_terms[n + 1].coeffs()).fold(0.0f64, |m, c| m.max(c.abs()))
                    * (n + 1) as f64;
            for c in rx.coeffs().iter().chain(ry.coeffs()) {
                worst = worst.max(c.abs() / scale);
            }
            worst = worst
                .max(self.x_terms[n + 1].eval(0.0).abs())
                .max(self.y_terms[n + 1].eval(0.0).abs());
        }
        worst
    }
}

/// Homotopy-perturbation series of the given order, evaluated at `p = 1`.
pub fn hpm_series(ivp: &InitialValueProblem, order: usize) -> SeriesSolution {
    hpm_expansion(ivp, order).at_unit_parameter()
}

// --- Variational iteration -------------------------------------------------

/// Degree kept for variational iterate `k`.
pub fn vim_degree_cap(k: usize) -> usize {
    (2 * k).min(VIM_MAX_DEGREE)
}

/// Iterates of the correction functional with multiplier `-1`:
///
/// ```text
/// x_{k+1}(t) = x_k(t) - int_0^t [x_k'(s) - x_k(s) (a - b y_k(s))] ds
/// y_{k+1}(t) = y_k(t) - int_0^t [y_k'(s) + y_k(s) (c - d x_k(s))] ds
/// ```
///
/// starting from the constant pair. Iterate `k` keeps terms up to degree
/// [`vim_degree_cap`]`(k)`.
pub fn vim_iterates(ivp: &InitialValueProblem, iterations: usize) -> IterateSequence {
    let p = &ivp.params;
    let mut iterates = vec![PolyPair::constant(ivp.initial.x, ivp.initial.y)];
    for k in 0..iterations {
        let cap = vim_degree_cap(k + 1);
        let PolyPair { x, y } = &iterates[k];
        // The integrand is integrated once, so products are needed to cap - 1.
        let xy = x.mul_truncated(y, cap.saturating_sub(1));
        let growth_x = &x.scale(p.a()) - &xy.scale(p.b());
        let decay_y = &y.scale(p.c()) - &xy.scale(p.d());
        let corr_x = (&x.derivative() - &growth_x).integral();
        let corr_y = (&y.derivative() + &decay_y).integral();
        let next = PolyPair {
            x: (x - &corr_x).truncated(cap),
            y: (y - &corr_y).truncated(cap),
        };
        iterates.push(next);
    }
    IterateSequence {
        method: MethodKind::Vim,
        iterates,
    }
}

/// Variational iterate `iterations`, kept at its full (capped) degree.
pub fn vim_series(ivp: &InitialValueProblem, iterations: usize) -> SeriesSolution {
    let seq = vim_iterates(ivp, iterations);
    let last = seq.iterates.last().expect("iterate 0 is always present");
    last.to_series(last.degree().max(iterations))
}

/// The polynomial approximant a method produces at the given order
/// (truncation order, or iteration count for variational iteration).
pub fn approximate_series(method: MethodKind, ivp: &InitialValueProblem, order: usize) -> SeriesSolution {
    match method {
        MethodKind::Taylor => taylor_coefficients(ivp, order),
        MethodKind::Adomian => adomian_series(ivp, order),
        MethodKind::Hpm => hpm_series(ivp, order),
        MethodKind::Vim => vim_series(ivp, order),
    }
}

// --- Equivalence -------------------------------------------------------------

/// Max over `n <= N` of `|coeff_method - coeff_taylor| / (1 + |coeff_taylor|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgreementReport {
    pub order: usize,
    pub adomian: f64,
    pub hpm: f64,
    pub vim: f64,
}

impl AgreementReport {
    pub fn max_deviation(&self) -> f64 {
        self.adomian.max(self.hpm).max(self.vim)
    }
}

/// Coefficient-wise deviation of `candidate` from `reference` through `order`.
pub fn relative_deviation(candidate: &SeriesSolution, reference: &SeriesSolution, order: usize) -> f64 {
    let coeff = |v: &[f64], n: usize| v.get(n).copied().unwrap_or(0.0);
    (0..=order)
        .flat_map(|n| {
            [
                (coeff(candidate.x_coeffs(), n), coeff(reference.x_coeffs(), n)),
                (coeff(candidate.y_coeffs(), n), coeff(reference.y_coeffs(), n)),
            ]
        })
        .map(|(c, r)| (c - r).abs() / (1.0 + r.abs()))
        .fold(0.0, f64::max)
}

pub fn methods_agree(ivp: &InitialValueProblem, order: usize) -> Result<AgreementReport> {
    if order < 1 {
        return Err(Error::InvalidArgument("agreement check needs order >= 1".into()));
    }
    let taylor = taylor_coefficients(ivp, order);
    let vim = vim_iterates(ivp, order);
    let vim_last = vim.iterates.last().expect("iterate 0 is always present");
    Ok(AgreementReport {
        order,
        adomian: relative_deviation(&adomian_series(ivp, order), &taylor, order),
        hpm: relative_deviation(&hpm_series(ivp, order), &taylor, order),
        vim: relative_deviation(&vim_last.to_series(order), &taylor, order),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelParams, PopulationState};
    use crate::series::oracle;

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
    fn method_names_round_trip() {
        for m in MethodKind::ALL {
            assert_eq!(m.as_str().parse::<MethodKind>().unwrap(), m);
        }
        assert!("padé".parse::<MethodKind>().is_err());
    }

    #[test]
    fn adomian_polynomials_are_cauchy_products() {
        let comps = adomian_components(&case_v(), 3);
        let u: Vec<_> = comps.iter().map(|c| c.x.clone()).collect();
        let v: Vec<_> = comps.iter().map(|c| c.y.clone()).collect();
        assert_eq!(adomian_polynomial(&u, &v, 0), Polynomial::constant(6.0));
        // A_1 = u0 v1 + u1 v0 = 3 (4t) + (-3t) 2 = 6t
        let a1 = adomian_polynomial(&u, &v, 1);
        assert_eq!(a1.as_monomial(), Some((1, 6.0)));
        let xs: Vec<f64> = u.iter().map(|p| p.as_monomial().map_or(0.0, |m| m.1)).collect();
        let ys: Vec<f64> = v.iter().map(|p| p.as_monomial().map_or(0.0, |m| m.1)).collect();
        for n in 0..=3 {
            let conv: f64 = (0..=n).map(|k| xs[k] * ys[n - k]).sum();
            assert_eq!(adomian_polynomial(&u, &v, n).coeff(n), conv);
        }
    }

    #[test]
    fn adomian_components_are_monomials_matching_taylor() {
        for problem in [case_i(), case_v()] {
            let comps = adomian_components(&problem, 12);
            let taylor = taylor_coefficients(&problem, 12);
            for (n, c) in comps.iter().enumerate() {
                for (poly, want) in [(&c.x, taylor.x_coeffs()[n]), (&c.y, taylor.y_coeffs()[n])] {
                    if want == 0.0 {
                        assert_eq!(poly.degree(), None);
                        continue;
                    }
                    let (deg, coeff) = poly.as_monomial().expect("component is a monomial");
                    assert_eq!(deg, n);
                    assert!((coeff - want).abs() <= 1e-12 * (1.0 + want.abs()));
                }
            }
        }
    }

    #[test]
    fn adomian_case_v_order_2() {
        let s = adomian_series(&case_v(), 2);
        assert_eq!(s.x_coeffs(), &[3.0, -3.0, -4.5]);
        assert_eq!(s.y_coeffs(), &[2.0, 4.0, 1.0]);
    }

    #[test]
    fn adomian_decoupled_is_exponential() {
        let s = adomian_series(&decoupled(), 5);
        let mut fact = 1.0;
        for n in 0..=5 {
            if n > 0 {
                fact *= n as f64;
            }
            assert!((s.x_coeffs()[n] - 1.0 / fact).abs() < 1e-15);
        }
    }

    #[test]
    fn hpm_first_order_case_i() {
        let s = hpm_series(&case_i(), 1);
        assert_eq!(s.x_coeffs(), &[14.0, -238.0]);
        assert!((s.y_coeffs()[1] - 250.2).abs() < 1e-12);
        let s0 = hpm_series(&case_i(), 0);
        assert_eq!(s0.x_coeffs(), &[14.0]);
        assert_eq!(s0.y_coeffs(), &[18.0]);
    }

    #[test]
    fn hpm_case_v_order_6_matches_oracle() {
        let s = hpm_series(&case_v(), 6);
        let (ox, oy) = oracle::coefficients(&case_v().params, 3.0, 2.0, 6);
        for n in 0..=6 {
            assert!((s.x_coeffs()[n] - ox[n]).abs() <= 1e-12 * (1.0 + ox[n].abs()));
            assert!((s.y_coeffs()[n] - oy[n]).abs() <= 1e-12 * (1.0 + oy[n].abs()));
        }
    }

    #[test]
    fn hpm_terms_solve_the_cascade() {
        for problem in [case_i(), case_v(), decoupled()] {
            let e = hpm_expansion(&problem, 15);
            assert!(e.cascade_residual(&problem) <= 1e-12, "{}", e.cascade_residual(&problem));
        }
    }

    #[test]
    fn vim_first_iterate_case_v() {
        let seq = vim_iterates(&case_v(), 1);
        assert_eq!(seq.method, MethodKind::Vim);
        assert_eq!(seq.iterates.len(), 2);
        assert_eq!(seq.iterates[0], PolyPair::constant(3.0, 2.0));
        assert_eq!(seq.iterates[1].x.coeffs(), &[3.0, -3.0]);
        assert_eq!(seq.iterates[1].y.coeffs(), &[2.0, 4.0]);
        let zero = vim_iterates(&case_v(), 0);
        assert_eq!(zero.iterates, vec![PolyPair::constant(3.0, 2.0)]);
    }

    #[test]
    fn vim_iterates_agree_through_their_order() {
        for problem in [case_i(), case_v()] {
            let seq = vim_iterates(&problem, 8);
            let taylor = taylor_coefficients(&problem, 8);
            for (k, it) in seq.iterates.iter().enumerate() {
                let dev = relative_deviation(&it.to_series(k), &taylor, k);
                assert!(dev <= 1e-12, "iterate {k}: {dev:e}");
                assert!(it.degree() <= vim_degree_cap(k));
            }
        }
    }

    #[test]
    fn vim_case_v_iterate_4() {
        let seq = vim_iterates(&case_v(), 4);
        let (ox, oy) = oracle::coefficients(&case_v().params, 3.0, 2.0, 4);
        let it = &seq.iterates[4];
        for n in 0..=4 {
            assert!((it.x.coeff(n) - ox[n]).abs() <= 1e-12 * (1.0 + ox[n].abs()));
            assert!((it.y.coeff(n) - oy[n]).abs() <= 1e-12 * (1.0 + oy[n].abs()));
        }
        // Beyond degree 4 the iterate carries extra terms.
        assert!(it.degree() > 4);
    }

    #[test]
    fn vim_degree_is_capped() {
        assert_eq!(vim_degree_cap(3), 6);
        assert_eq!(vim_degree_cap(40), VIM_MAX_DEGREE);
        let seq = vim_iterates(&case_v(), 40);
        assert!(seq.iterates.iter().all(|it| it.degree() <= VIM_MAX_DEGREE));
    }

    #[test]
    fn all_methods_start_at_the_initial_state() {
        for m in MethodKind::ALL {
            for problem in [case_i(), case_v()] {
                let s = approximate_series(m, &problem, 7);
                assert_eq!(s.evaluate(0.0), (problem.initial.x, problem.initial.y), "{m}");
            }
        }
    }

    #[test]
    fn agreement_examples() {
        let r = methods_agree(&case_v(), 10).unwrap();
        assert!(r.max_deviation() <= 1e-12, "{r:?}");
        let r = methods_agree(&case_i(), 10).unwrap();
        assert!(r.max_deviation() <= 1e-10, "{r:?}");
        let r = methods_agree(&decoupled(), 10).unwrap();
        assert!(r.max_deviation() <= 1e-14, "{r:?}");
        assert!(methods_agree(&case_v(), 0).is_err());
    }
}
