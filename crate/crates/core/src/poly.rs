//! Dense real polynomials in `t`, coefficients in ascending degree.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn monomial(coeff: f64, degree: usize) -> Self {
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[degree] = coeff;
        Self { coeffs }
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coefficient of `t^n`, zero past the stored length.
    pub fn coeff(&self, n: usize) -> f64 {
        self.coeffs.get(n).copied().unwrap_or(0.0)
    }

    /// Highest degree with a non-zero coefficient; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0.0)
    }

    /// Single non-zero term `(degree, coefficient)`, if the polynomial is a monomial.
    pub fn as_monomial(&self) -> Option<(usize, f64)> {
        let mut nonzero = self.coeffs.iter().enumerate().filter(|(_, &c)| c != 0.0);
        let first = nonzero.next();
        match (first, nonzero.next()) {
            (Some((n, &c)), None) => Some((n, c)),
            _ => None,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| k * c).collect(),
        }
    }

    pub fn derivative(&self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(n, &c)| n as f64 * c)
                .collect(),
        }
    }

    /// Antiderivative vanishing at `t = 0`.
    pub fn integral(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        coeffs.extend(self.coeffs.iter().enumerate().map(|(n, &c)| c / (n + 1) as f64));
        Self { coeffs }
    }

    /// Drops every term above `max_degree`.
    pub fn truncated(mut self, max_degree: usize) -> Self {
        self.coeffs.truncate(max_degree + 1);
        self
    }

    /// Product keeping terms up to `max_degree` only.
    pub fn mul_truncated(&self, other: &Self, max_degree: usize) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::zero();
        }
        let len = (self.coeffs.len() + other.coeffs.len() - 1).min(max_degree + 1);
        let mut coeffs = vec![0.0; len];
        for (i, &a) in self.coeffs.iter().enumerate().take(len) {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate().take(len - i) {
                coeffs[i + j] += a * b;
            }
        }
        Self { coeffs }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self {
            coeffs: (0..len).map(|n| f(self.coeff(n), other.coeff(n))).collect(),
        }
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.mul_truncated(rhs, usize::MAX - 1)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let p = Polynomial::from_coeffs(vec![1.0, 2.0]);
        let q = Polynomial::from_coeffs(vec![0.0, 1.0, 3.0]);
        assert_eq!((&p + &q).coeffs(), &[1.0, 3.0, 3.0]);
        assert_eq!((&p - &q).coeffs(), &[1.0, 1.0, -3.0]);
        assert_eq!((&p * &q).coeffs(), &[0.0, 1.0, 5.0, 6.0]);
        assert_eq!(p.mul_truncated(&q, 1).coeffs(), &[0.0, 1.0]);
        assert_eq!((-&p).coeffs(), &[-1.0, -2.0]);
    }

    #[test]
    fn calculus() {
        let p = Polynomial::from_coeffs(vec![1.0, 2.0, 3.0]);
        assert_eq!(p.derivative().coeffs(), &[2.0, 6.0]);
        assert_eq!(p.integral().coeffs(), &[0.0, 1.0, 1.0, 1.0]);
        assert_eq!(p.integral().derivative(), p);
        assert_eq!(p.eval(2.0), 1.0 + 4.0 + 12.0);
    }

    #[test]
    fn degree_and_monomials() {
        assert_eq!(Polynomial::zero().degree(), None);
        assert_eq!(Polynomial::from_coeffs(vec![1.0, 0.0, 0.0]).degree(), Some(0));
        assert_eq!(Polynomial::monomial(2.5, 3).as_monomial(), Some((3, 2.5)));
        assert_eq!(Polynomial::from_coeffs(vec![1.0, 1.0]).as_monomial(), None);
        assert_eq!(Polynomial::zero().as_monomial(), None);
    }
}
