//! Quadrature rules: Gauss-Hermite nodes/weights for Gaussian-weighted
//! expectations, composite Simpson for box integrals, and polynomial
//! extrapolation to a zero step size.

use crate::error::{ensure_positive, Error, Result};

/// Controls for expectation-value quadrature.
///
/// `order` is the number of Gauss-Hermite points per dimension; `sigma_span`
/// is the half-width, in combined sigmas, used by grid-based fallback rules
/// (a Gaussian tail beyond 8 sigmas is below 1e-14).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub order: usize,
    pub sigma_span: f64,
}

impl QuadratureSpec {
    pub const DEFAULT_ORDER: usize = 40;
    pub const DEFAULT_SIGMA_SPAN: f64 = 8.0;

    pub fn new(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::invalid(
                "order",
                format!("must be >= 2, got {order}"),
            ));
        }
        Ok(QuadratureSpec {
            order,
            sigma_span: Self::DEFAULT_SIGMA_SPAN,
        })
    }

    pub fn with_sigma_span(mut self, span: f64) -> Result<Self> {
        ensure_positive("sigma_span", span)?;
        self.sigma_span = span;
        Ok(self)
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            order: Self::DEFAULT_ORDER,
            sigma_span: Self::DEFAULT_SIGMA_SPAN,
        }
    }
}

/// Orthonormal Hermite values (h_n(x), h_{n-1}(x)) for weight exp(-x^2).
fn orthonormal_hermite_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p1 = std::f64::consts::PI.powf(-0.25);
    let mut p2 = 0.0;
    for k in 0..n {
        let p3 = p2;
        p2 = p1;
        let kf = k as f64;
        p1 = x * (2.0 / (kf + 1.0)).sqrt() * p2 - (kf / (kf + 1.0)).sqrt() * p3;
    }
    (p1, p2)
}

/// Nodes and weights of the n-point Gauss-Hermite rule:
/// integral of f(x) exp(-x^2) dx ~= sum w_i f(x_i).
///
/// Roots are found by Newton iteration on the orthonormal recurrence,
/// seeded from the largest root outward-in; weights come from the
/// derivative identity h_n'(x) = sqrt(2n) h_{n-1}(x).
pub fn gauss_hermite(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if order < 2 {
        return Err(Error::invalid(
            "order",
            format!("must be >= 2, got {order}"),
        ));
    }
    const MAX_NEWTON: usize = 100;
    let n = order;
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);

    let mut z = 0.0_f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut converged = false;
        for _ in 0..MAX_NEWTON {
            let (p1, p2) = orthonormal_hermite_pair(n, z);
            let pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * (1.0 + z.abs()) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::QuadratureNotConverged {
                order,
                delta: f64::NAN,
                tol: 1e-15,
            });
        }
        let (_, p2) = orthonormal_hermite_pair(n, z);
        let pp = (2.0 * nf).sqrt() * p2;
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        let w = 2.0 / (pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Ok((nodes, weights))
}

/// Composite Simpson rule on [lo, hi] with at least `panels` panels
/// (rounded up to an even count).
pub fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize) -> f64 {
    let n = panels.max(2) + panels % 2;
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo) + f(hi);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + k as f64 * h);
    }
    acc * h / 3.0
}

/// Tensor Simpson rule over a rectangle.
pub fn simpson_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    xlo: f64,
    xhi: f64,
    ylo: f64,
    yhi: f64,
    panels: usize,
) -> f64 {
    simpson(|x| simpson(|y| f(x, y), ylo, yhi, panels), xlo, xhi, panels)
}

/// Neville extrapolation of `(x_i, v_i)` samples to x = 0. Used with
/// x = eps^2 to strip the leading quadratic term of a concentration sweep.
pub fn extrapolate_to_zero(points: &[(f64, f64)]) -> f64 {
    assert!(!points.is_empty(), "extrapolate_to_zero needs samples");
    let xs: Vec<f64> = points.iter().map(|&(x, _)| x).collect();
    let mut v: Vec<f64> = points.iter().map(|&(_, y)| y).collect();
    for k in 1..v.len() {
        for i in 0..v.len() - k {
            v[i] = v[i + 1] + (v[i + 1] - v[i]) * xs[i + k] / (xs[i] - xs[i + k]);
        }
    }
    v[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn hermite_weights_integrate_monomials() {
        for order in [2, 5, 11, 40, 80] {
            let (x, w) = gauss_hermite(order).unwrap();
            let total: f64 = w.iter().sum();
            assert_relative_eq!(total, PI.sqrt(), max_relative = 1e-13);
            let m2: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi * xi).sum();
            assert_relative_eq!(m2, PI.sqrt() / 2.0, max_relative = 1e-12);
            if order >= 3 {
                // An n-point rule is exact only through degree 2n - 1.
                let m4: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(4)).sum();
                assert_relative_eq!(m4, 0.75 * PI.sqrt(), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn hermite_nodes_are_symmetric_and_sorted() {
        let (x, _) = gauss_hermite(40).unwrap();
        for i in 0..x.len() {
            assert_relative_eq!(x[i], -x[x.len() - 1 - i], epsilon = 1e-14);
        }
        for i in 1..x.len() {
            assert!(x[i] < x[i - 1]);
        }
    }

    #[test]
    fn rejects_tiny_order() {
        assert!(gauss_hermite(1).is_err());
        assert!(QuadratureSpec::new(1).is_err());
    }

    #[test]
    fn simpson_matches_gaussian_integral() {
        let v = simpson(|x| (-x * x).exp(), -8.0, 8.0, 400);
        assert_relative_eq!(v, PI.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn extrapolation_strips_quadratic_terms() {
        // v(x) = 3 + 2x + 5x^2 sampled at three points -> exactly 3 at 0.
        let f = |x: f64| 3.0 + 2.0 * x + 5.0 * x * x;
        let pts: Vec<(f64, f64)> = [0.04, 0.01, 0.0025].iter().map(|&x| (x, f(x))).collect();
        assert_relative_eq!(extrapolate_to_zero(&pts), 3.0, max_relative = 1e-12);
    }
}
