//! Free classical particle on [0, 1] with reflecting ends.
//!
//! The density is a truncated image sum: mirrored copies of the free-space
//! Gaussian solution placed so that the flux through both walls cancels.
//! Momentum integrals of image terms are Gaussians and coordinate integrals
//! are error functions, so both marginals are evaluated in closed form per
//! term; the only numerical knobs are the truncation index and any grid a
//! caller chooses to sample on.
//!
//! Long-time behaviour: the coordinate marginal flattens to 1 on [0, 1],
//! and the |p| distribution equals the two-sided Gaussian law
//! (1/(sqrt(pi) b)) [exp(-(p-p0)^2/b^2) + exp(-(p+p0)^2/b^2)] because free
//! flight plus elastic reflection never changes |p|.

use std::f64::consts::PI;

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::phase_density::{GaussianState, Marginal};

/// Momentum span, in widths b, that the truncation rule guarantees to
/// cover; the Gaussian mass beyond 6 widths is below 1e-12.
const TRUNCATION_MOMENTUM_SPAN: f64 = 6.0;

/// Gaussian initial data confined to the unit interval, with the image
/// truncation to use: the sum runs over n = -N..N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxState {
    gaussian: GaussianState,
    m: f64,
    truncation: usize,
}

impl BoxState {
    pub fn new(gaussian: GaussianState, m: f64, truncation: usize) -> Result<Self> {
        ensure_positive("m", m)?;
        if !(0.0 < gaussian.q0() && gaussian.q0() < 1.0) {
            return Err(Error::invalid(
                "q0",
                format!("must lie strictly inside (0, 1), got {}", gaussian.q0()),
            ));
        }
        if truncation == 0 {
            return Err(Error::invalid("truncation", "must be >= 1"));
        }
        Ok(BoxState {
            gaussian,
            m,
            truncation,
        })
    }

    /// Picks the truncation needed for times up to `t_max`.
    pub fn with_auto_truncation(gaussian: GaussianState, m: f64, t_max: f64) -> Result<Self> {
        let n = required_truncation(&gaussian, m, t_max)?;
        BoxState::new(gaussian, m, n)
    }

    pub fn gaussian(&self) -> &GaussianState {
        &self.gaussian
    }

    pub fn mass(&self) -> f64 {
        self.m
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    fn check_time_and_truncation(&self, t: f64) -> Result<()> {
        ensure_finite("t", t)?;
        if t < 0.0 {
            return Err(Error::invalid("t", format!("must be >= 0, got {t}")));
        }
        let required = required_truncation(&self.gaussian, self.m, t)?;
        if self.truncation < required {
            return Err(Error::TruncationTooSmall {
                required,
                given: self.truncation,
            });
        }
        Ok(())
    }
}

/// Smallest truncation N that keeps the image tail mass below 1e-12 for
/// times up to t: images must cover drift |q0| + (|p0| + 6 b) t / m.
pub fn required_truncation(gaussian: &GaussianState, m: f64, t: f64) -> Result<usize> {
    ensure_positive("m", m)?;
    ensure_finite("t", t)?;
    if t < 0.0 {
        return Err(Error::invalid("t", format!("must be >= 0, got {t}")));
    }
    let reach = gaussian.q0().abs()
        + (gaussian.p0().abs() + TRUNCATION_MOMENTUM_SPAN * gaussian.b()) * t / m;
    Ok((reach / 2.0).ceil() as usize + 2)
}

/// Iterates image indices from the largest |n| inward (N, -N, ..., 0) so
/// that small terms accumulate before large ones.
fn image_indices(n_max: usize) -> impl Iterator<Item = i64> {
    (1..=n_max as i64)
        .rev()
        .flat_map(|k| [k, -k])
        .chain(std::iter::once(0))
}

/// Phase-space density of the reflected evolution at (q, p, t): the image
/// sum of free solutions rho0(q - pt/m + 2n, p) + rho0(-q + pt/m + 2n, -p).
pub fn box_density(state: &BoxState, q: f64, p: f64, t: f64) -> Result<f64> {
    ensure_finite("q", q)?;
    ensure_finite("p", p)?;
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid("q", format!("must lie in [0, 1], got {q}")));
    }
    state.check_time_and_truncation(t)?;
    let g = &state.gaussian;
    let drift = p * t / state.m;
    let mut acc = 0.0;
    for n in image_indices(state.truncation) {
        let shift = 2.0 * n as f64;
        acc += g.density_at(q - drift + shift, p);
        acc += g.density_at(-q + drift + shift, -p);
    }
    Ok(acc)
}

/// Coordinate marginal of the reflected evolution at (q, t). Momentum
/// integrals of the image terms are exact, leaving a reflected sum of
/// Gaussians of squared width a^2 + b^2 t^2 / m^2 centered at q0 + p0 t / m.
/// Flattens pointwise to 1 as that width outgrows the interval.
pub fn box_coordinate_marginal(state: &BoxState, t: f64, q: f64) -> Result<f64> {
    ensure_finite("q", q)?;
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid("q", format!("must lie in [0, 1], got {q}")));
    }
    state.check_time_and_truncation(t)?;
    let (center, width) = evolved_center_width(state, t);
    let norm = 1.0 / (PI.sqrt() * width);
    let mut acc = 0.0;
    for n in image_indices(state.truncation) {
        let shift = 2.0 * n as f64;
        let u = (q + shift - center) / width;
        let v = (-q + shift - center) / width;
        acc += (-u * u).exp() + (-v * v).exp();
    }
    Ok(acc * norm)
}

/// Distribution of |p| at time t for p > 0:
/// rho_a(p, t) = rho_m(p, t) + rho_m(-p, t), where rho_m integrates the
/// density over the interval; coordinate integrals of the image terms are
/// evaluated with error functions.
///
/// Elastic reflection preserves |p|, so this equals its long-time limit
/// (see [`LimitingDistributions`]) up to the truncation tail at every t.
pub fn box_abs_momentum_marginal(state: &BoxState, t: f64, p: f64) -> Result<f64> {
    ensure_finite("p", p)?;
    if p <= 0.0 {
        return Err(Error::invalid("p", format!("must be > 0, got {p}")));
    }
    state.check_time_and_truncation(t)?;
    Ok(signed_momentum_marginal(state, t, p) + signed_momentum_marginal(state, t, -p))
}

/// rho_m(p, t) = integral over [0, 1] of the box density at momentum p.
fn signed_momentum_marginal(state: &BoxState, t: f64, p: f64) -> f64 {
    let g = state.gaussian();
    let (a, b) = (g.a(), g.b());
    let drift = p * t / state.m;
    let gauss_minus = (-((p - g.p0()) / b).powi(2)).exp();
    let gauss_plus = (-((p + g.p0()) / b).powi(2)).exp();

    // Interval mass of a width-a Gaussian centered at mu.
    let window = |mu: f64| 0.5 * (libm::erf((1.0 - mu) / a) + libm::erf(mu / a));

    let mut direct = 0.0;
    let mut mirrored = 0.0;
    for n in image_indices(state.truncation) {
        let shift = 2.0 * n as f64;
        direct += window(g.q0() + drift - shift);
        mirrored += window(drift + shift - g.q0());
    }
    (gauss_minus * direct + gauss_plus * mirrored) / (PI.sqrt() * b)
}

/// Total probability mass of the truncated image sum on [0, 1] x R at time
/// t, in closed form (the interval integrals telescope across images).
/// Equals 1 up to the truncation tail.
pub fn box_mass(state: &BoxState, t: f64) -> Result<f64> {
    state.check_time_and_truncation(t)?;
    let (center, width) = evolved_center_width(state, t);
    let edge = (2 * state.truncation + 1) as f64;
    Ok(0.5 * (libm::erf((edge - center) / width) - libm::erf((-edge - center) / width)))
}

fn evolved_center_width(state: &BoxState, t: f64) -> (f64, f64) {
    let g = state.gaussian();
    let center = g.q0() + g.p0() * t / state.m;
    let width = (g.a() * g.a() + (g.b() * t / state.m).powi(2)).sqrt();
    (center, width)
}

/// The two long-time laws of the reflected evolution: the coordinate
/// marginal tends pointwise to the constant 1 on [0, 1], and the |p|
/// distribution to a two-sided Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitingDistributions {
    momentum_abs: Marginal,
}

impl LimitingDistributions {
    pub fn for_state(state: &BoxState) -> Self {
        LimitingDistributions {
            momentum_abs: Marginal::folded_abs_momentum(
                state.gaussian().p0(),
                state.gaussian().b(),
            ),
        }
    }

    /// The flat coordinate limit on [0, 1].
    pub fn coordinate_limit(&self) -> f64 {
        1.0
    }

    /// (1/(sqrt(pi) b)) [exp(-(p-p0)^2/b^2) + exp(-(p+p0)^2/b^2)] for p > 0.
    pub fn momentum_abs_limit(&self, p: f64) -> f64 {
        self.momentum_abs.value(p)
    }

    pub fn momentum_abs_marginal(&self) -> &Marginal {
        &self.momentum_abs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::simpson;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn reference_state(t_max: f64) -> BoxState {
        let g = GaussianState::new(0.5, 0.0, 0.1, 1.0).unwrap();
        BoxState::with_auto_truncation(g, 1.0, t_max).unwrap()
    }

    #[test]
    fn truncation_rule_values() {
        let g = GaussianState::new(0.5, 0.0, 0.1, 1.0).unwrap();
        assert!(required_truncation(&g, 1.0, 0.0).unwrap() <= 3);
        assert_eq!(required_truncation(&g, 1.0, 50.0).unwrap(), 153);
        let mut last = 0;
        for k in 0..10 {
            let n = required_truncation(&g, 1.0, k as f64 * 3.0).unwrap();
            assert!(n >= last);
            last = n;
        }
        assert!(required_truncation(&g, 1.0, -1.0).is_err());
    }

    #[test]
    fn state_validation() {
        let inside = GaussianState::new(0.5, 0.0, 0.1, 1.0).unwrap();
        assert!(BoxState::new(inside, 0.0, 5).is_err());
        assert!(BoxState::new(inside, 1.0, 0).is_err());
        let outside = GaussianState::new(1.5, 0.0, 0.1, 1.0).unwrap();
        let err = BoxState::new(outside, 1.0, 5).unwrap_err();
        assert!(err.is_validation());
    }

    #[test]
    fn insufficient_truncation_names_the_required_index() {
        let g = GaussianState::new(0.5, 0.0, 0.1, 1.0).unwrap();
        let state = BoxState::new(g, 1.0, 3).unwrap();
        match box_density(&state, 0.5, 0.0, 50.0).unwrap_err() {
            Error::TruncationTooSmall { required, given } => {
                assert_eq!(required, 153);
                assert_eq!(given, 3);
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn density_rejects_points_outside_the_interval() {
        let state = reference_state(1.0);
        assert!(box_density(&state, -0.1, 0.0, 0.0).is_err());
        assert!(box_density(&state, 1.1, 0.0, 0.0).is_err());
        assert!(box_density(&state, 0.5, 0.0, -2.0).is_err());
    }

    #[test]
    fn initial_density_matches_free_gaussian_in_the_interior() {
        let state = reference_state(1.0);
        let g = state.gaussian();
        for &(q, p) in &[(0.5, 0.0), (0.4, 1.2), (0.62, -0.8)] {
            let boxed = box_density(&state, q, p, 0.0).unwrap();
            assert_abs_diff_eq!(boxed, g.density_at(q, p), epsilon = 1e-12);
        }
    }

    #[test]
    fn density_is_mirror_symmetric_for_centered_data() {
        let state = reference_state(10.0);
        for &(q, p, t) in &[(0.3, 0.7, 2.0), (0.1, -1.3, 7.5), (0.9, 0.2, 0.4)] {
            let lhs = box_density(&state, q, p, t).unwrap();
            let rhs = box_density(&state, 1.0 - q, -p, t).unwrap();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn mass_is_conserved() {
        let state = reference_state(50.0);
        for t in [0.0, 1.0, 10.0, 50.0] {
            assert_abs_diff_eq!(box_mass(&state, t).unwrap(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn closed_form_mass_matches_grid_integration() {
        let state = reference_state(10.0);
        let t = 10.0;
        let grid_mass = simpson(
            |q| box_coordinate_marginal(&state, t, q).unwrap(),
            0.0,
            1.0,
            512,
        );
        assert_abs_diff_eq!(grid_mass, box_mass(&state, t).unwrap(), epsilon = 1e-10);
    }

    #[test]
    fn coordinate_marginal_integrates_momentum_out() {
        // Cross-check the closed-form p-integral against direct quadrature.
        // Each image is a bump of momentum width a/t, so the grid must be
        // finer than that.
        let state = reference_state(5.0);
        let t = 3.0;
        for q in [0.2, 0.5, 0.8] {
            let direct = simpson(|p| box_density(&state, q, p, t).unwrap(), -9.0, 9.0, 6000);
            let closed = box_coordinate_marginal(&state, t, q).unwrap();
            assert_abs_diff_eq!(direct, closed, epsilon = 1e-10);
        }
    }

    #[test]
    fn early_marginal_is_a_bump_late_marginal_is_flat() {
        let state = reference_state(50.0);
        let at0 = box_coordinate_marginal(&state, 0.0, 0.5).unwrap();
        assert_relative_eq!(at0, 1.0 / (PI.sqrt() * 0.1), max_relative = 1e-10);

        let mut sup = 0.0f64;
        for k in 0..=512 {
            let q = k as f64 / 512.0;
            let dev = (box_coordinate_marginal(&state, 50.0, q).unwrap() - 1.0).abs();
            sup = sup.max(dev);
        }
        assert!(sup < 1e-6, "sup deviation {sup}");
    }

    #[test]
    fn uniformization_is_monotone_over_the_reference_times() {
        let state = reference_state(50.0);
        let sup_dev = |t: f64| {
            (0..=512)
                .map(|k| {
                    let q = k as f64 / 512.0;
                    (box_coordinate_marginal(&state, t, q).unwrap() - 1.0).abs()
                })
                .fold(0.0f64, f64::max)
        };
        let devs: Vec<f64> = [5.0, 10.0, 20.0, 50.0]
            .iter()
            .map(|&t| sup_dev(t))
            .collect();
        // The wrapped width b t / m already dwarfs the interval at t = 5, so
        // every deviation here is summation roundoff; allow that much slack.
        for w in devs.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "deviations {devs:?}");
        }
        assert!(devs[3] < 1e-6);
    }

    #[test]
    fn abs_momentum_marginal_requires_positive_momentum() {
        let state = reference_state(1.0);
        assert!(box_abs_momentum_marginal(&state, 1.0, 0.0).is_err());
        assert!(box_abs_momentum_marginal(&state, 1.0, -0.5).is_err());
    }

    #[test]
    fn abs_momentum_marginal_matches_its_limit_everywhere() {
        // |p| is invariant under free flight with elastic reflection, so the
        // marginal sits on its limit law at all times, not only t -> inf.
        let g = GaussianState::new(0.5, 1.0, 0.1, 1.0).unwrap();
        let state = BoxState::with_auto_truncation(g, 1.0, 50.0).unwrap();
        let limit = LimitingDistributions::for_state(&state);
        for t in [0.0, 0.3, 5.0, 50.0] {
            let mut linf = 0.0f64;
            for k in 1..=512 {
                let p = 5.0 * k as f64 / 512.0;
                let v = box_abs_momentum_marginal(&state, t, p).unwrap();
                linf = linf.max((v - limit.momentum_abs_limit(p)).abs());
            }
            assert!(linf < 1e-6, "t={t}: Linf {linf}");
        }
    }

    #[test]
    fn limit_values_and_normalization() {
        let g = GaussianState::new(0.5, 1.0, 0.1, 1.0).unwrap();
        let state = BoxState::with_auto_truncation(g, 1.0, 1.0).unwrap();
        let limit = LimitingDistributions::for_state(&state);
        assert_eq!(limit.coordinate_limit(), 1.0);
        let expected = (1.0 + (-4.0f64).exp()) / PI.sqrt();
        assert_relative_eq!(
            limit.momentum_abs_limit(1.0),
            expected,
            max_relative = 1e-12
        );
        let mass = simpson(|p| limit.momentum_abs_limit(p), 1e-12, 12.0, 2000);
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-9);

        // Centered momentum collapses the two terms onto a half-Gaussian.
        let centered = GaussianState::new(0.5, 0.0, 0.1, 1.0).unwrap();
        let state0 = BoxState::with_auto_truncation(centered, 1.0, 1.0).unwrap();
        let l0 = LimitingDistributions::for_state(&state0);
        assert_relative_eq!(
            l0.momentum_abs_limit(0.7),
            2.0 / PI.sqrt() * (-0.49f64).exp(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn kinetic_weight_of_abs_momentum_is_time_invariant() {
        let g = GaussianState::new(0.5, 1.0, 0.1, 1.0).unwrap();
        let state = BoxState::with_auto_truncation(g, 1.0, 20.0).unwrap();
        let second_moment = |t: f64| {
            simpson(
                |p| p * p * box_abs_momentum_marginal(&state, t, p).unwrap(),
                1e-12,
                12.0,
                2000,
            )
        };
        let reference = second_moment(0.0);
        for t in [0.5, 3.0, 20.0] {
            assert_abs_diff_eq!(second_moment(t), reference, epsilon = 1e-8);
        }
    }
}
