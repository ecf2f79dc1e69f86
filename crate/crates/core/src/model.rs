//! The prey-predator vector field, its linearization, and the first integral.
//!
//! ```text
//! dx/dt =  x (a - b y)
//! dy/dt = -y (c - d x)
//! ```
//!
//! The model has a saddle at the origin and a center at `(c/d, a/b)`. Every
//! orbit in the open positive quadrant is a level curve of
//! `C(x, y) = c ln x + a ln y - d x - b y`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real parts below this magnitude count as zero when classifying a center.
pub const CENTER_REAL_PART_TOL: f64 = 1e-12;

/// The four rates of the model.
///
/// Coupled models require all four rates to be strictly positive. The
/// decoupled variant (`b = d = 0`) exists only as an analytic sanity case:
/// both populations then evolve as independent exponentials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

fn check_rate(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFinite(format!("rate {name} = {value}")));
    }
    if value <= 0.0 {
        return Err(Error::Domain(format!("rate {name} must be > 0, got {value}")));
    }
    Ok(())
}

impl ModelParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        check_rate("a", a)?;
        check_rate("b", b)?;
        check_rate("c", c)?;
        check_rate("d", d)?;
        Ok(Self { a, b, c, d })
    }

    /// Prey growth `a` and predator death `c` with no interaction (`b = d = 0`).
    pub fn decoupled(a: f64, c: f64) -> Result<Self> {
        check_rate("a", a)?;
        check_rate("c", c)?;
        Ok(Self { a, b: 0.0, c, d: 0.0 })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn is_coupled(&self) -> bool {
        self.b > 0.0 && self.d > 0.0
    }

    /// Location of the center `(c/d, a/b)`; `None` for the decoupled variant.
    pub fn center(&self) -> Option<PopulationState> {
        self.is_coupled().then(|| PopulationState {
            x: self.c / self.d,
            y: self.a / self.b,
        })
    }
}

/// A point `(x, y)` of the phase plane: prey `x`, predators `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationState {
    pub x: f64,
    pub y: f64,
}

impl PopulationState {
    /// Validated constructor: both coordinates finite and non-negative.
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let s = Self { x, y };
        s.ensure_finite()?;
        if x < 0.0 || y < 0.0 {
            return Err(Error::Domain(format!("populations must be >= 0, got ({x}, {y})")));
        }
        Ok(s)
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.x > 0.0 && self.y > 0.0
    }

    fn ensure_finite(&self) -> Result<()> {
        if self.x.is_finite() && self.y.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(format!("state ({}, {})", self.x, self.y)))
        }
    }
}

/// Right-hand side `(x (a - b y), -y (c - d x))`.
pub fn vector_field(p: &ModelParams, s: &PopulationState) -> Result<(f64, f64)> {
    s.ensure_finite()?;
    Ok(vector_field_unchecked(p, s.x, s.y))
}

#[inline]
pub(crate) fn vector_field_unchecked(p: &ModelParams, x: f64, y: f64) -> (f64, f64) {
    (x * (p.a - p.b * y), -y * (p.c - p.d * x))
}

/// Row-major Jacobian `[[a - b y, -b x], [d y, d x - c]]`.
pub fn jacobian(p: &ModelParams, s: &PopulationState) -> Result<[[f64; 2]; 2]> {
    s.ensure_finite()?;
    Ok([
        [p.a - p.b * s.y, -p.b * s.x],
        [p.d * s.y, p.d * s.x - p.c],
    ])
}

/// Eigenvalues of a real 2x2 matrix from its trace and determinant.
///
/// Real pairs are returned in descending order; complex pairs with the
/// positive imaginary part first.
pub fn eigenvalues_2x2(m: &[[f64; 2]; 2]) -> [Complex64; 2] {
    let half_trace = 0.5 * (m[0][0] + m[1][1]);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = half_trace * half_trace - det;
    if disc >= 0.0 {
        let root = disc.sqrt();
        // Avoid cancellation in the smaller root.
        let big = if half_trace >= 0.0 { half_trace + root } else { half_trace - root };
        let small = if big != 0.0 { det / big } else { 0.0 };
        let (hi, lo) = if big >= small { (big, small) } else { (small, big) };
        [Complex64::new(hi, 0.0), Complex64::new(lo, 0.0)]
    } else {
        let im = (-disc).sqrt();
        [Complex64::new(half_trace, im), Complex64::new(half_trace, -im)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedPointKind {
    Saddle,
    Center,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport {
    pub location: PopulationState,
    pub kind: FixedPointKind,
    pub eigenvalues: [Complex64; 2],
}

/// Classifies a fixed point from its eigenvalues; `None` for node, focus,
/// or degenerate cases, which this model never produces.
pub fn classify(eigenvalues: &[Complex64; 2]) -> Option<FixedPointKind> {
    let [l1, l2] = eigenvalues;
    let both_real = l1.im == 0.0 && l2.im == 0.0;
    if both_real && l1.re * l2.re < 0.0 {
        return Some(FixedPointKind::Saddle);
    }
    let conjugate = l1.im != 0.0 && l1.im == -l2.im && l1.re == l2.re;
    if conjugate && l1.re.abs() < CENTER_REAL_PART_TOL {
        return Some(FixedPointKind::Center);
    }
    None
}

/// The saddle at the origin and the center at `(c/d, a/b)`.
pub fn fixed_points(p: &ModelParams) -> Result<Vec<FixedPointReport>> {
    let center = p.center().ok_or_else(|| {
        Error::Domain("the decoupled model has no interior fixed point".to_string())
    })?;
    let origin = PopulationState { x: 0.0, y: 0.0 };
    [origin, center]
        .into_iter()
        .map(|location| {
            let eigenvalues = eigenvalues_2x2(&jacobian(p, &location)?);
            let kind = classify(&eigenvalues).ok_or_else(|| {
                Error::Domain(format!(
                    "fixed point at ({}, {}) is neither saddle nor center",
                    location.x, location.y
                ))
            })?;
            Ok(FixedPointReport {
                location,
                kind,
                eigenvalues,
            })
        })
        .collect()
}

/// First integral `C(x, y) = c ln x + a ln y - d x - b y`.
///
/// Written with separate logarithms rather than `ln(x^c y^a)` so large
/// populations do not overflow.
pub fn conserved_quantity(p: &ModelParams, s: &PopulationState) -> Result<f64> {
    s.ensure_finite()?;
    if s.x <= 0.0 || s.y <= 0.0 {
        return Err(Error::Domain(format!(
            "first integral needs x > 0 and y > 0, got ({}, {})",
            s.x, s.y
        )));
    }
    Ok(p.c * s.x.ln() + p.a * s.y.ln() - p.d * s.x - p.b * s.y)
}

/// `C(s) - C(s0)`: zero along the exact orbit through `s0`.
pub fn invariant_residual(p: &ModelParams, s: &PopulationState, s0: &PopulationState) -> Result<f64> {
    Ok(conserved_quantity(p, s)? - conserved_quantity(p, s0)?)
}

/// Gradient of the first integral, `(c/x - d, a/y - b)`.
pub fn conserved_gradient(p: &ModelParams, s: &PopulationState) -> Result<(f64, f64)> {
    conserved_quantity(p, s)?;
    Ok((p.c / s.x - p.d, p.a / s.y - p.b))
}
