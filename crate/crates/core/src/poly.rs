//! Real polynomials in one variable, used as potential terms.

use crate::error::{ensure_finite, Result};

/// Polynomial with ascending coefficients: `coeffs[k]` multiplies `x^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial from ascending coefficients. Rejects non-finite
    /// entries; an empty slice is the zero polynomial.
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Result<Self> {
        let coeffs = coeffs.into();
        for &c in &coeffs {
            ensure_finite("coefficient", c)?;
        }
        Ok(Polynomial { coeffs })
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    /// 0.5 * k * x^2.
    pub fn harmonic(k: f64) -> Result<Self> {
        Polynomial::new(vec![0.0, 0.0, 0.5 * k])
    }

    /// (lambda / 3) * x^3, whose negative gradient is the force -lambda x^2.
    pub fn cubic_force(lambda: f64) -> Result<Self> {
        Polynomial::new(vec![0.0, 0.0, 0.0, lambda / 3.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree after trimming trailing zeros; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Derivative value at `x`, computed exactly from the coefficients.
    pub fn eval_deriv(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * x + k as f64 * c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_derivative() {
        let p = Polynomial::new(vec![1.0, -2.0, 0.0, 4.0]).unwrap();
        // 1 - 2x + 4x^3 at x = 2 -> 1 - 4 + 32 = 29
        assert_eq!(p.eval(2.0), 29.0);
        // -2 + 12x^2 at x = 2 -> 46
        assert_eq!(p.eval_deriv(2.0), 46.0);
        assert_eq!(p.degree(), Some(3));
    }

    #[test]
    fn zero_polynomial() {
        let z = Polynomial::zero();
        assert!(z.is_zero());
        assert_eq!(z.eval(3.0), 0.0);
        assert_eq!(z.eval_deriv(3.0), 0.0);
        let padded = Polynomial::new(vec![0.0, 0.0]).unwrap();
        assert!(padded.is_zero());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Polynomial::new(vec![f64::NAN]).is_err());
        assert!(Polynomial::new(vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn named_forms() {
        let h = Polynomial::harmonic(2.0).unwrap();
        assert_eq!(h.eval(3.0), 9.0);
        assert_eq!(h.eval_deriv(3.0), 6.0);
        let c = Polynomial::cubic_force(0.3).unwrap();
        assert!((c.eval_deriv(2.0) - 1.2).abs() < 1e-15);
    }
}
