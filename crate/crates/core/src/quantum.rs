//! Quantum counterparts for comparison with the classical densities.
//!
//! Everything here is built from the closed-form free Gaussian packet and
//! image sums of it; no grid PDE solver is involved. The bridge results:
//!
//! - the packet's coordinate density spreads with squared width
//!   a^2 + hbar^2 t^2 / (a^2 m^2), which matches the classical free
//!   coordinate marginal exactly when a^2 b^2 = hbar^2;
//! - under the same width condition the packet's Wigner function equals
//!   the classical joint density at every (q, p, t);
//! - on the unit interval, an alternating image sum of packets vanishes at
//!   both walls, and its smoothed coordinate density approaches the
//!   classical reflected marginal as hbar decreases.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::box_dynamics::{self, BoxState};
use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::phase_density::GaussianState;

/// Momentum span, in packet momentum widths hbar/a, covered by the image
/// truncation rule; mirrors the classical rule.
const TRUNCATION_MOMENTUM_SPAN: f64 = 6.0;

/// Relative slack when deciding whether a^2 b^2 = hbar^2 holds.
const COINCIDENCE_CONDITION_TOL: f64 = 1e-12;

/// Free Gaussian wave packet: initial coordinate density of width `a`
/// centered at `x0`, mean momentum `p0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumPacket {
    x0: f64,
    p0: f64,
    a: f64,
    hbar: f64,
    m: f64,
}

impl QuantumPacket {
    pub fn new(x0: f64, p0: f64, a: f64, hbar: f64, m: f64) -> Result<Self> {
        ensure_finite("x0", x0)?;
        ensure_finite("p0", p0)?;
        ensure_positive("a", a)?;
        ensure_positive("hbar", hbar)?;
        ensure_positive("m", m)?;
        Ok(QuantumPacket { x0, p0, a, hbar, m })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// Squared coordinate width at time t: a^2 + hbar^2 t^2 / (a^2 m^2).
    pub fn squared_width(&self, t: f64) -> f64 {
        self.a * self.a + (self.hbar * t / (self.a * self.m)).powi(2)
    }

    /// Coordinate density |psi(x, t)|^2: a normalized Gaussian centered at
    /// x0 + p0 t / m with squared width `squared_width(t)`.
    pub fn density(&self, x: f64, t: f64) -> f64 {
        let w2 = self.squared_width(t);
        let shift = x - self.x0 - self.p0 * t / self.m;
        (-shift * shift / w2).exp() / (PI * w2).sqrt()
    }

    /// Complex amplitude of the freely evolving packet, in the standard
    /// propagator phase convention. Only |psi|^2 is ever asserted against;
    /// the global phase is internal.
    pub fn amplitude(&self, x: f64, t: f64) -> Complex64 {
        let tau = self.hbar * t / (self.m * self.a * self.a);
        let z = Complex64::new(1.0, tau);
        let pref = (PI * self.a * self.a).powf(-0.25) / z.sqrt();
        let shift = x - self.x0 - self.p0 * t / self.m;
        let gauss = -shift * shift / (2.0 * self.a * self.a) * z.inv();
        let phase = (self.p0 * (x - self.x0) - self.p0 * self.p0 * t / (2.0 * self.m)) / self.hbar;
        pref * (gauss + Complex64::new(0.0, phase)).exp()
    }
}

/// Result of comparing the quantum coordinate density against the
/// classical free coordinate marginal on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceReport {
    /// Whether a^2 b^2 = hbar^2 held for the supplied parameters.
    pub condition_holds: bool,
    /// |a^2 b^2 - hbar^2|.
    pub condition_residual: f64,
    /// Max |quantum density - classical marginal| over the grids. Zero to
    /// roundoff when the condition holds; reported either way.
    pub max_abs_diff: f64,
}

/// Compares |psi|^2 of the packet built from `gauss` (x0 = q0, same a)
/// with the classical free coordinate marginal over the given time and
/// coordinate grids. A violated width condition flags the report instead
/// of erroring: the difference is still measured.
pub fn coincidence_check(
    gauss: &GaussianState,
    m: f64,
    hbar: f64,
    t_grid: &[f64],
    x_grid: &[f64],
) -> Result<CoincidenceReport> {
    ensure_positive("hbar", hbar)?;
    if t_grid.is_empty() || x_grid.is_empty() {
        return Err(Error::invalid(
            "grid",
            "time and coordinate grids must be non-empty",
        ));
    }
    let packet = QuantumPacket::new(gauss.q0(), gauss.p0(), gauss.a(), hbar, m)?;
    let ab = gauss.a() * gauss.b();
    let condition_residual = (ab * ab - hbar * hbar).abs();
    let condition_holds =
        condition_residual <= COINCIDENCE_CONDITION_TOL * (hbar * hbar).max(ab * ab);

    let mut max_abs_diff = 0.0f64;
    for &t in t_grid {
        let marginal = gauss.free_coordinate_marginal(m, t)?;
        for &x in x_grid {
            ensure_finite("x", x)?;
            let diff = (packet.density(x, t) - marginal.value(x)).abs();
            max_abs_diff = max_abs_diff.max(diff);
        }
    }
    Ok(CoincidenceReport {
        condition_holds,
        condition_residual,
        max_abs_diff,
    })
}

/// Wigner function of the free Gaussian packet, in closed form:
/// (1/(pi hbar)) exp(-(q - pt/m - x0)^2/a^2) exp(-a^2 (p - p0)^2/hbar^2).
///
/// This is the classical joint Gaussian density with momentum width
/// b = hbar / a, transported by the free flow; the identity holds at all
/// (q, p, t), not just in a limit.
pub fn wigner_gaussian(packet: &QuantumPacket, q: f64, p: f64, t: f64) -> f64 {
    let u = (q - p * t / packet.m - packet.x0) / packet.a;
    let v = (p - packet.p0) * packet.a / packet.hbar;
    (-u * u - v * v).exp() / (PI * packet.hbar)
}

/// Smallest image truncation covering packet spreading up to time t; the
/// packet's momentum scale is hbar / a.
pub fn required_truncation(packet: &QuantumPacket, t: f64) -> Result<usize> {
    ensure_finite("t", t)?;
    if t < 0.0 {
        return Err(Error::invalid("t", format!("must be >= 0, got {t}")));
    }
    let momentum_width = packet.hbar / packet.a;
    let reach = packet.x0.abs()
        + (packet.p0.abs() + TRUNCATION_MOMENTUM_SPAN * momentum_width) * t / packet.m;
    Ok((reach / 2.0).ceil() as usize + 2)
}

/// Wavefunction on [0, 1] with vanishing ends, built by the alternating
/// image sum phi(x, t) = sum_n [psi(x + 2n, t) - psi(-x + 2n, t)].
/// phi(0, t) cancels exactly; phi(1, t) cancels up to the truncation tail.
pub fn box_wavefunction(
    packet: &QuantumPacket,
    x: f64,
    t: f64,
    truncation: usize,
) -> Result<Complex64> {
    ensure_finite("x", x)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid("x", format!("must lie in [0, 1], got {x}")));
    }
    if !(0.0 < packet.x0 && packet.x0 < 1.0) {
        return Err(Error::invalid(
            "x0",
            format!("must lie strictly inside (0, 1), got {}", packet.x0),
        ));
    }
    let required = required_truncation(packet, t)?;
    if truncation < required {
        return Err(Error::TruncationTooSmall {
            required,
            given: truncation,
        });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for k in (1..=truncation as i64).rev() {
        for n in [k, -k] {
            let shift = 2.0 * n as f64;
            acc += packet.amplitude(x + shift, t) - packet.amplitude(-x + shift, t);
        }
    }
    acc += packet.amplitude(x, t) - packet.amplitude(-x, t);
    Ok(acc)
}

/// Norm of the boxed wavefunction: integral over [0, 1] of |phi|^2 by
/// composite Simpson with the given panel count. Constant in t up to the
/// truncation tail and grid error.
pub fn box_norm(packet: &QuantumPacket, t: f64, truncation: usize, panels: usize) -> Result<f64> {
    // Probe once so truncation and domain errors surface before the sweep.
    box_wavefunction(packet, 0.5, t, truncation)?;
    Ok(crate::quadrature::simpson(
        |x| {
            box_wavefunction(packet, x, t, truncation)
                .expect("domain checked")
                .norm_sqr()
        },
        0.0,
        1.0,
        panels,
    ))
}

/// Gaussian smoothing of grid samples: convolution with the normalized
/// kernel exp(-(x/s)^2)/(sqrt(pi) s), truncated to the grid's support and
/// integrated with trapezoid weights. The same operator must be applied to
/// both sides of any comparison.
pub fn gaussian_smooth(values: &[f64], xs: &[f64], width: f64) -> Vec<f64> {
    assert_eq!(values.len(), xs.len());
    assert!(values.len() >= 2);
    let dx = xs[1] - xs[0];
    let norm = 1.0 / (PI.sqrt() * width);
    let mut out = Vec::with_capacity(values.len());
    for &x in xs {
        let mut acc = 0.0;
        for (j, (&y, &v)) in xs.iter().zip(values).enumerate() {
            let k = (-((x - y) / width).powi(2)).exp();
            let w = if j == 0 || j == xs.len() - 1 {
                0.5
            } else {
                1.0
            };
            acc += w * k * v;
        }
        out.push(acc * dx * norm);
    }
    out
}

/// Smoothed-L1 comparison between the boxed packet density |phi|^2 and the
/// classical reflected coordinate marginal with matched momentum width
/// b = hbar / a, for a family of packets with strictly decreasing hbar.
///
/// Returns one L1 distance per packet, evaluated on a uniform grid of
/// `grid_points` nodes over [0, 1] after smoothing both densities with the
/// same Gaussian kernel. Distances are expected to shrink as hbar does.
pub fn semiclassical_compare(
    packets: &[QuantumPacket],
    t: f64,
    smoothing: f64,
    grid_points: usize,
) -> Result<Vec<f64>> {
    ensure_positive("smoothing", smoothing)?;
    ensure_finite("t", t)?;
    if packets.is_empty() {
        return Err(Error::invalid("packets", "need at least one packet"));
    }
    if packets.windows(2).any(|w| w[1].hbar >= w[0].hbar) {
        return Err(Error::invalid(
            "packets",
            "hbar values must be strictly decreasing",
        ));
    }
    if grid_points < 16 {
        return Err(Error::invalid(
            "grid_points",
            "need at least 16 grid points",
        ));
    }

    let xs: Vec<f64> = (0..grid_points)
        .map(|k| k as f64 / (grid_points - 1) as f64)
        .collect();
    let dx = xs[1] - xs[0];

    let mut distances = Vec::with_capacity(packets.len());
    for packet in packets {
        let b = packet.hbar / packet.a;
        let classical = GaussianState::new(packet.x0, packet.p0, packet.a, b)?;
        let box_state = BoxState::with_auto_truncation(classical, packet.m, t)?;
        let truncation = required_truncation(packet, t)?.max(box_state.truncation());

        let mut quantum = Vec::with_capacity(grid_points);
        let mut reference = Vec::with_capacity(grid_points);
        for &x in &xs {
            quantum.push(box_wavefunction(packet, x, t, truncation)?.norm_sqr());
            reference.push(box_dynamics::box_coordinate_marginal(&box_state, t, x)?);
        }
        let sq = gaussian_smooth(&quantum, &xs, smoothing);
        let sr = gaussian_smooth(&reference, &xs, smoothing);

        let mut l1 = 0.0;
        for j in 0..grid_points {
            let w = if j == 0 || j == grid_points - 1 {
                0.5
            } else {
                1.0
            };
            l1 += w * (sq[j] - sr[j]).abs();
        }
        distances.push(l1 * dx);
    }
    Ok(distances)
}

/// Discrete distribution over values of one auxiliary parameter (potential
/// shape, interval length, a physical constant, ...) expressing how
/// uncertain that parameter is. Weights are non-negative and sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextualEnsemble {
    parameter_name: String,
    samples: Vec<f64>,
    weights: Vec<f64>,
}

impl ContextualEnsemble {
    pub fn new(
        parameter_name: impl Into<String>,
        samples: Vec<f64>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("samples", "must be non-empty"));
        }
        if samples.len() != weights.len() {
            return Err(Error::invalid(
                "weights",
                format!("{} weights for {} samples", weights.len(), samples.len()),
            ));
        }
        let mut total = 0.0;
        for &w in &weights {
            ensure_finite("weight", w)?;
            if w < 0.0 {
                return Err(Error::invalid("weight", format!("must be >= 0, got {w}")));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "weights",
                format!("must sum to 1 within 1e-12, got {total}"),
            ));
        }
        for &s in &samples {
            ensure_finite("sample", s)?;
        }
        Ok(ContextualEnsemble {
            parameter_name: parameter_name.into(),
            samples,
            weights,
        })
    }

    /// Equal-weight ensemble over the given samples.
    pub fn uniform(parameter_name: impl Into<String>, samples: Vec<f64>) -> Result<Self> {
        let n = samples.len();
        if n == 0 {
            return Err(Error::invalid("samples", "must be non-empty"));
        }
        let weights = vec![1.0 / n as f64; n];
        ContextualEnsemble::new(parameter_name, samples, weights)
    }

    pub fn parameter_name(&self) -> &str {
        &self.parameter_name
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Weighted average of one observable value per ensemble sample.
pub fn contextual_average(values: &[f64], ensemble: &ContextualEnsemble) -> Result<f64> {
    if values.len() != ensemble.len() {
        return Err(Error::invalid(
            "values",
            format!("{} values for {} samples", values.len(), ensemble.len()),
        ));
    }
    Ok(values
        .iter()
        .zip(ensemble.weights())
        .map(|(v, w)| v * w)
        .sum())
}
