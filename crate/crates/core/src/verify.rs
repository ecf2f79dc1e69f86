//! End-to-end self-check over the bundled presets.
//!
//! Each check compares the crate's numerics against a closed form, an
//! independent derivation, or a property the exact dynamics must have, and
//! reports pass or fail with a short detail string.

use std::fmt::Write;

use crate::diagnostics::{conservation_drift, divergence_time, self_intersection};
use crate::integrator::{closed_orbit_check_with_period, estimate_period, integrate, IntegratorConfig};
use crate::methods::{adomian_series, hpm_series, relative_deviation, vim_iterates};
use crate::model::{ModelParams, PopulationState};
use crate::preset::{preset, CasePreset};
use crate::series::{taylor_coefficients, InitialValueProblem, SeriesSolution};
use crate::trajectory::linspace;

pub type TaylorFn = fn(&InitialValueProblem, usize) -> SeriesSolution;

pub const DEFAULT_ORDERS: [usize; 5] = [4, 8, 12, 16, 20];
const EQUIVALENCE_MAX_ORDER: usize = 20;
const WINDOW: f64 = 10.0;
const GRID_POINTS: usize = 2001;
const CONSERVATION_TOL: f64 = 1e-8;
const CLOSURE_EPS: f64 = 1e-6;
const DRIFT_RATIO_MIN: f64 = 1e3;

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Orders swept by the divergence check.
    pub orders: Vec<usize>,
    /// Series builder under test; the Taylor recurrence unless a test swaps it.
    pub taylor: TaylorFn,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            orders: DEFAULT_ORDERS.to_vec(),
            taylor: taylor_coefficients,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub scope: String,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn table(&self) -> String {
        let name_w = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let scope_w = self.checks.iter().map(|c| c.scope.len()).max().unwrap_or(5).max(5);
        let mut out = String::new();
        let _ = writeln!(out, "{:<scope_w$}  {:<name_w$}  {:<6}  detail", "scope", "check", "result");
        for c in &self.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{:<scope_w$}  {:<name_w$}  {:<6}  {}", c.scope, c.name, verdict, c.detail);
        }
        out
    }
}

struct Checks {
    scope: String,
    results: Vec<CheckResult>,
}

impl Checks {
    fn new(scope: &str) -> Self {
        Self {
            scope: scope.to_string(),
            results: Vec::new(),
        }
    }

    fn record(&mut self, name: &'static str, outcome: crate::Result<(bool, String)>) {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        self.results.push(CheckResult {
            scope: self.scope.clone(),
            name,
            passed,
            detail,
        });
    }
}

fn first_order(ivp: &InitialValueProblem, taylor: TaylorFn) -> (bool, String) {
    let s = taylor(ivp, 1);
    let p = &ivp.params;
    let (x0, y0) = (ivp.initial.x, ivp.initial.y);
    let want = (x0 * (p.a() - p.b() * y0), y0 * (p.d() * x0 - p.c()));
    let got = (s.x_coeffs()[1], s.y_coeffs()[1]);
    let ok = got.0.to_bits() == want.0.to_bits() && got.1.to_bits() == want.1.to_bits();
    (ok, format!("X1 = {}, Y1 = {}", got.0, got.1))
}

fn equivalence_tol(name: &str, order: usize) -> f64 {
    if name == "case-I" && order > 15 {
        1e-10
    } else {
        1e-12
    }
}

fn method_equivalence(preset: &CasePreset, taylor: TaylorFn) -> (bool, String) {
    let ivp = preset.ivp();
    let vim = vim_iterates(&ivp, EQUIVALENCE_MAX_ORDER);
    let mut worst = 0.0f64;
    let mut ok = true;
    for n in 1..=EQUIVALENCE_MAX_ORDER {
        let reference = taylor(&ivp, n);
        let tol = equivalence_tol(preset.name, n);
        let devs = [
            relative_deviation(&adomian_series(&ivp, n), &reference, n),
            relative_deviation(&hpm_series(&ivp, n), &reference, n),
            relative_deviation(&vim.iterates[n].to_series(n), &reference, n),
        ];
        for d in devs {
            worst = worst.max(d);
            ok &= d <= tol;
        }
    }
    (ok, format!("max relative deviation {worst:.3e} over orders 1..={EQUIVALENCE_MAX_ORDER}"))
}

fn substitution(ivp: &InitialValueProblem, taylor: TaylorFn) -> (bool, String) {
    let r = taylor(ivp, EQUIVALENCE_MAX_ORDER).substitution_residual(&ivp.params);
    (r <= 1e-12, format!("scaled residual {r:.3e}"))
}

fn conservation(preset: &CasePreset, horizon: f64) -> crate::Result<(bool, String)> {
    let ivp = preset.ivp_until(horizon)?;
    let r = integrate(&ivp, &IntegratorConfig::default(), &linspace(0.0, horizon, 5001))?;
    let drift = conservation_drift(&r, &ivp.params)?.max_drift;
    Ok((drift <= CONSERVATION_TOL, format!("max |C(t) - C(0)| = {drift:.3e} on [0, {horizon}]")))
}

fn divergence_sweep(preset: &CasePreset, orders: &[usize], taylor: TaylorFn) -> crate::Result<(bool, String)> {
    let ivp = preset.ivp_until(WINDOW)?;
    let grid = linspace(0.0, WINDOW, GRID_POINTS);
    let reference = integrate(&ivp, &IntegratorConfig::default(), &grid)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for &n in orders {
        let approx = taylor(&ivp, n).sample(&grid)?;
        let t = divergence_time(&approx, &reference, 1.0)?;
        ok &= t.is_some_and(|t| t < WINDOW);
        parts.push(match t {
            Some(t) => format!("N={n}: {t}"),
            None => format!("N={n}: none"),
        });
    }
    Ok((ok, parts.join(", ")))
}

fn orbit_closure(preset: &CasePreset) -> crate::Result<(bool, String)> {
    let ivp = preset.ivp();
    let period = estimate_period(&ivp, &IntegratorConfig::default())?;
    let horizon = 1.2 * period;
    // 1201 points put a sample exactly at the period.
    let grid = linspace(0.0, horizon, 1201);
    let r = integrate(&ivp.with_t_end(horizon)?, &IntegratorConfig::default(), &grid)?;
    let closed = closed_orbit_check_with_period(&r, period, CLOSURE_EPS)?;
    let one = integrate(&ivp.with_t_end(period)?, &IntegratorConfig::default(), &linspace(0.0, period, GRID_POINTS))?;
    let simple = self_intersection(&one)?.is_none();
    Ok((closed && simple, format!("T* = {period:.9}, closes: {closed}, simple over one period: {simple}")))
}

fn series_crossing(preset: &CasePreset, taylor: TaylorFn) -> crate::Result<(bool, String)> {
    let ivp = preset.ivp_until(WINDOW)?;
    let approx = taylor(&ivp, preset.default_order).sample(&linspace(0.0, WINDOW, GRID_POINTS))?;
    Ok(match self_intersection(&approx)? {
        Some(hit) => (true, format!("order {}: segments {} and {} cross at ({:.6}, {:.6})", preset.default_order, hit.i, hit.j, hit.x, hit.y)),
        None => (false, format!("order {}: no crossing", preset.default_order)),
    })
}

fn drift_ratio(preset: &CasePreset, taylor: TaylorFn) -> crate::Result<(bool, String)> {
    let ivp = preset.ivp_until(3.0)?;
    let grid = linspace(0.0, 3.0, 601);
    let reference = integrate(&ivp, &IntegratorConfig::default(), &grid)?;
    let approx = taylor(&ivp, preset.default_order).sample(&grid)?;
    let d_ref = conservation_drift(&reference, &ivp.params)?.max_drift;
    let d_approx = conservation_drift(&approx, &ivp.params)?.max_drift;
    Ok((
        d_approx > DRIFT_RATIO_MIN * d_ref,
        format!("series drift {d_approx:.3e} vs reference {d_ref:.3e}"),
    ))
}

fn linearized_period() -> crate::Result<(bool, String)> {
    let p = ModelParams::new(1.0, 1.0, 1.0, 1.0)?;
    let ivp = InitialValueProblem::new(p, PopulationState::new(1.0 + 1e-4, 1.0)?, 1.0)?;
    let t = estimate_period(&ivp, &IntegratorConfig::default())?;
    let tau = std::f64::consts::TAU;
    Ok(((t - tau).abs() < 1e-3, format!("T = {t:.9} vs 2 pi = {tau:.9}")))
}

fn decoupled_oracle(taylor: TaylorFn) -> crate::Result<(bool, String)> {
    let preset = preset("decoupled")?;
    let ivp = preset.ivp_until(1.0)?;
    let (a, c) = (ivp.params.a(), ivp.params.c());
    let (x0, y0) = (ivp.initial.x, ivp.initial.y);
    let r = integrate(&ivp, &IntegratorConfig::default(), &[0.0, 1.0])?;
    let end_err = (r.last().x - x0 * a.exp()).abs().max((r.last().y - y0 * (-c).exp()).abs());
    let s = taylor(&ivp, 20);
    let mut coeff_err = 0.0f64;
    let mut fact = 1.0;
    for n in 0..=20 {
        if n > 0 {
            fact *= n as f64;
        }
        let want = x0 * a.powi(n as i32) / fact;
        coeff_err = coeff_err.max((s.x_coeffs()[n] - want).abs() / want.abs());
    }
    Ok((
        end_err <= 1e-9 && coeff_err <= 1e-14,
        format!("endpoint error {end_err:.3e}, coefficient error {coeff_err:.3e}"),
    ))
}

fn preset_checks(name: &str, opts: &VerifyOptions) -> Vec<CheckResult> {
    let mut checks = Checks::new(name);
    let preset = match preset(name) {
        Ok(p) => p,
        Err(e) => {
            checks.record("preset", Err(e));
            return checks.results;
        }
    };
    let ivp = preset.ivp();
    checks.record("first-order closed form", Ok(first_order(&ivp, opts.taylor)));
    checks.record("series satisfies the model", Ok(substitution(&ivp, opts.taylor)));
    checks.record("method equivalence", Ok(method_equivalence(&preset, opts.taylor)));
    let horizon = if name == "case-V" { 50.0 } else { WINDOW };
    checks.record("reference conservation", conservation(&preset, horizon));
    checks.record("series divergence", divergence_sweep(&preset, &opts.orders, opts.taylor));
    if name == "case-V" {
        checks.record("reference orbit closes", orbit_closure(&preset));
        checks.record("series self-intersection", series_crossing(&preset, opts.taylor));
        checks.record("series drift ratio", drift_ratio(&preset, opts.taylor));
    }
    checks.results
}

/// Runs every check; case-I and case-V run on separate threads.
pub fn run_checks(opts: &VerifyOptions) -> VerifyReport {
    let (case_i, case_v) = std::thread::scope(|scope| {
        let case_i = scope.spawn(|| preset_checks("case-I", opts));
        let case_v = preset_checks("case-V", opts);
        (case_i.join().expect("case-I checks panicked"), case_v)
    });
    let mut general = Checks::new("general");
    general.record("linearized period", linearized_period());
    general.record("decoupled oracle", decoupled_oracle(opts.taylor));

    let mut checks = case_i;
    checks.extend(case_v);
    checks.extend(general.results);
    VerifyReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        let report = run_checks(&VerifyOptions::default());
        assert!(report.all_passed(), "{}", report.table());
        assert!(report.checks.len() >= 13);
    }

    /// The Taylor recurrence with the sign of the predation term flipped.
    fn mutated(ivp: &InitialValueProblem, order: usize) -> SeriesSolution {
        let p = &ivp.params;
        let (mut x, mut y) = (vec![ivp.initial.x], vec![ivp.initial.y]);
        for n in 0..order {
            let conv: f64 = (0..=n).map(|k| x[k] * y[n - k]).sum();
            x.push((p.a() * x[n] + p.b() * conv) / (n + 1) as f64);
            y.push((-p.c() * y[n] + p.d() * conv) / (n + 1) as f64);
        }
        SeriesSolution::from_coefficients(x, y).unwrap()
    }

    #[test]
    fn sign_flip_is_caught() {
        let opts = VerifyOptions {
            taylor: mutated,
            ..VerifyOptions::default()
        };
        let report = run_checks(&opts);
        assert!(!report.all_passed());
        let failed: Vec<_> = report.failures().map(|c| c.name).collect();
        assert!(failed.contains(&"method equivalence"), "{failed:?}");
        assert!(failed.contains(&"first-order closed form"), "{failed:?}");
    }

    #[test]
    fn table_names_every_check() {
        let report = VerifyReport {
            checks: vec![CheckResult {
                scope: "case-V".into(),
                name: "demo",
                passed: false,
                detail: "detail".into(),
            }],
        };
        let table = report.table();
        assert!(table.contains("demo") && table.contains("FAIL"));
    }
}
