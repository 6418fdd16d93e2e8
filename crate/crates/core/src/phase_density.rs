//! The Gaussian phase-space density family and its free-motion closed forms.
//!
//! Width convention: `a` and `b` are exponential-scale widths, i.e. the
//! density is proportional to exp(-(q-q0)^2/a^2) exp(-(p-p0)^2/b^2). They
//! are NOT standard deviations: Var(q) = a^2/2 and Var(p) = b^2/2. This is
//! the single easiest convention to get wrong in this crate.

use std::f64::consts::PI;

use crate::error::{ensure_finite, ensure_positive, Result};

/// Normalized Gaussian density on the (q, p) plane, centered at (q0, p0)
/// with exponential-scale widths a (position) and b (momentum).
///
/// Point masses are not representable: construction requires a > 0, b > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    q0: f64,
    p0: f64,
    a: f64,
    b: f64,
}

impl GaussianState {
    pub fn new(q0: f64, p0: f64, a: f64, b: f64) -> Result<Self> {
        ensure_finite("q0", q0)?;
        ensure_finite("p0", p0)?;
        ensure_positive("a", a)?;
        ensure_positive("b", b)?;
        Ok(GaussianState { q0, p0, a, b })
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Density value (1/(pi a b)) exp(-(q-q0)^2/a^2) exp(-(p-p0)^2/b^2).
    /// Strictly positive everywhere.
    pub fn density_at(&self, q: f64, p: f64) -> f64 {
        let dq = (q - self.q0) / self.a;
        let dp = (p - self.p0) / self.b;
        (-dq * dq - dp * dp).exp() / (PI * self.a * self.b)
    }

    /// Exact free-motion evolution: rho(q, p, t) = rho0(q - p t / m, p).
    /// At t = 0 this is `density_at`.
    pub fn free_evolved_density(&self, m: f64, t: f64, q: f64, p: f64) -> Result<f64> {
        ensure_positive("m", m)?;
        ensure_finite("t", t)?;
        Ok(self.density_at(q - p * t / m, p))
    }

    /// Coordinate distribution of the freely evolved density: a Gaussian
    /// centered at q0 + p0 t / m with squared width a^2 + b^2 t^2 / m^2.
    pub fn free_coordinate_marginal(&self, m: f64, t: f64) -> Result<Marginal> {
        ensure_positive("m", m)?;
        ensure_finite("t", t)?;
        let center = self.q0 + self.p0 * t / m;
        let width = (self.a * self.a + (self.b * t / m).powi(2)).sqrt();
        Ok(Marginal {
            kind: MarginalKind::Coordinate,
            shape: MarginalShape::Gaussian { center, width },
        })
    }

    /// Momentum distribution of free motion: time independent, centered at
    /// p0 with width b.
    pub fn free_momentum_marginal(&self) -> Marginal {
        Marginal {
            kind: MarginalKind::Momentum,
            shape: MarginalShape::Gaussian {
                center: self.p0,
                width: self.b,
            },
        }
    }

    /// Mean and dispersion of free motion at time t:
    /// mean_q = q0 + p0 t / m, mean_p = p0,
    /// Var(q) = (a^2 + b^2 t^2 / m^2) / 2, Var(p) = b^2 / 2.
    pub fn free_moments(&self, m: f64, t: f64) -> Result<MomentReport> {
        ensure_positive("m", m)?;
        ensure_finite("t", t)?;
        Ok(MomentReport {
            t,
            mean_q: self.q0 + self.p0 * t / m,
            mean_p: self.p0,
            var_q: 0.5 * (self.a * self.a + (self.b * t / m).powi(2)),
            var_p: 0.5 * self.b * self.b,
            normalization: 1.0,
        })
    }
}

/// Which variable a marginal distribution describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginalKind {
    Coordinate,
    Momentum,
    /// Distribution of |p| on p > 0.
    AbsoluteMomentum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum MarginalShape {
    /// (1/(sqrt(pi) w)) exp(-(x-c)^2/w^2) on the whole line.
    Gaussian { center: f64, width: f64 },
    /// Two mirrored Gaussians folded onto x > 0:
    /// (1/(sqrt(pi) w)) [exp(-(x-c)^2/w^2) + exp(-(x+c)^2/w^2)].
    Folded { center: f64, width: f64 },
}

/// Closed-form one-dimensional marginal. Carries the distribution family
/// and its parameters, so values are exact at any point; no grid is stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marginal {
    kind: MarginalKind,
    shape: MarginalShape,
}

impl Marginal {
    pub(crate) fn folded_abs_momentum(center: f64, width: f64) -> Marginal {
        Marginal {
            kind: MarginalKind::AbsoluteMomentum,
            shape: MarginalShape::Folded { center, width },
        }
    }

    pub fn kind(&self) -> MarginalKind {
        self.kind
    }

    /// Center of the underlying Gaussian family.
    pub fn center(&self) -> f64 {
        match self.shape {
            MarginalShape::Gaussian { center, .. } | MarginalShape::Folded { center, .. } => center,
        }
    }

    /// Exponential-scale width of the underlying Gaussian family.
    pub fn width(&self) -> f64 {
        match self.shape {
            MarginalShape::Gaussian { width, .. } | MarginalShape::Folded { width, .. } => width,
        }
    }

    /// Marginal density value. Folded marginals are only meaningful on
    /// x > 0, where the two image terms integrate to 1.
    pub fn value(&self, x: f64) -> f64 {
        match self.shape {
            MarginalShape::Gaussian { center, width } => {
                let u = (x - center) / width;
                (-u * u).exp() / (PI.sqrt() * width)
            }
            MarginalShape::Folded { center, width } => {
                let u = (x - center) / width;
                let v = (x + center) / width;
                ((-u * u).exp() + (-v * v).exp()) / (PI.sqrt() * width)
            }
        }
    }
}

/// Mean, dispersion, and normalization of a density at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub t: f64,
    pub mean_q: f64,
    pub mean_p: f64,
    pub var_q: f64,
    pub var_p: f64,
    pub normalization: f64,
}
