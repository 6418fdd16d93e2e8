//! Corrections to Newtonian dynamics for the cubic-force system.
//!
//! The system is dq/dt = p, dp/dt = -lambda q^2 with unit mass. A point
//! trajectory gives the Newtonian reference q_newton(t). Under Gaussian
//! initial data of width eps around (q0, p0), the mean position picks up a
//! leading correction -(lambda/4) eps^2 t^2 relative to that reference;
//! everything here computes, cross-checks, or isolates that correction.
//!
//! The correction is never expanded symbolically: `numeric_mean_q` is a
//! plain quadrature of the flowed observable, and sweeps in eps are
//! extrapolated in eps^2 instead.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::flow::{
    expectation, flow, validate_decreasing_epsilons, FlowControls, HamiltonianSpec, PhasePoint,
};
use crate::phase_density::GaussianState;
use crate::quadrature::{extrapolate_to_zero, QuadratureSpec};

/// Largest concentration width the small-parameter claims are validated for.
pub const REGIME_MAX_EPSILON: f64 = 0.2;
/// Largest |lambda| q0^2 t^2 the small-parameter claims are validated for.
pub const REGIME_MAX_FORCE_SCALE: f64 = 0.01;

/// Unit-mass system with force -lambda q^2 started from (q0, p0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicForceSystem {
    pub lambda: f64,
    pub q0: f64,
    pub p0: f64,
}

impl CubicForceSystem {
    pub fn new(lambda: f64, q0: f64, p0: f64) -> Result<Self> {
        ensure_finite("lambda", lambda)?;
        ensure_finite("q0", q0)?;
        ensure_finite("p0", p0)?;
        Ok(CubicForceSystem { lambda, q0, p0 })
    }

    pub fn hamiltonian(&self) -> HamiltonianSpec {
        HamiltonianSpec::cubic_force(self.lambda).expect("finite lambda")
    }

    pub fn initial_point(&self) -> PhasePoint {
        PhasePoint::one_dim(self.q0, self.p0).expect("finite initial data")
    }

    /// True when (eps, t) sit inside the validated small-parameter regime.
    pub fn in_validated_regime(&self, epsilon: f64, t: f64) -> bool {
        epsilon <= REGIME_MAX_EPSILON
            && (self.lambda * self.q0 * self.q0 * t * t).abs() <= REGIME_MAX_FORCE_SCALE
    }
}

/// Newtonian reference position: the solution of d2q/dt2 = -lambda q^2 from
/// (q0, p0), integrated to the engine's drift bound. For small t it matches
/// the series q0 + p0 t - (lambda/2) q0^2 t^2 through second order.
pub fn newton_trajectory(sys: &CubicForceSystem, t: f64, controls: &FlowControls) -> Result<f64> {
    let r = flow(&sys.hamiltonian(), &sys.initial_point(), t, controls)?;
    Ok(r.endpoint.q()[0])
}

/// Closed-form leading correction -(lambda/4) eps^2 t^2 to the mean position.
pub fn series_correction(sys: &CubicForceSystem, epsilon: f64, t: f64) -> Result<f64> {
    ensure_positive("epsilon", epsilon)?;
    ensure_finite("t", t)?;
    Ok(-0.25 * sys.lambda * epsilon * epsilon * t * t)
}

/// Mean position at time t under the concentrated Gaussian initial density
/// with widths a = b = eps around (q0, p0), via flow-and-quadrature. This
/// is the brute-force side against which the series correction is checked.
pub fn numeric_mean_q(
    sys: &CubicForceSystem,
    epsilon: f64,
    t: f64,
    quad: &QuadratureSpec,
    controls: &FlowControls,
) -> Result<f64> {
    ensure_positive("epsilon", epsilon)?;
    let state = GaussianState::new(sys.q0, sys.p0, epsilon, epsilon)?;
    expectation(
        |x: &PhasePoint| x.q()[0],
        &state,
        &sys.hamiltonian(),
        t,
        quad,
        controls,
    )
}

/// Numeric-versus-series comparison of the mean-position correction at one
/// concentration width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionReport {
    pub t: f64,
    pub epsilon: f64,
    pub mean_q_numeric: f64,
    pub q_newton: f64,
    /// mean_q_numeric - q_newton.
    pub correction_numeric: f64,
    /// -(lambda/4) eps^2 t^2.
    pub correction_series: f64,
    /// |correction_numeric - correction_series| / |correction_series|, or
    /// the absolute gap when the series term is exactly zero (lambda = 0).
    pub relative_gap: f64,
    /// False when (eps, t) fall outside the validated small-parameter
    /// regime; reported, not an error.
    pub in_validated_regime: bool,
}

/// A correction sweep over decreasing eps plus its eps^2 extrapolation.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionStudy {
    pub reports: Vec<CorrectionReport>,
    /// correction_numeric / eps^2 extrapolated to eps = 0.
    pub extrapolated_ratio: f64,
    /// The closed-form limit -(lambda/4) t^2 of that ratio.
    pub limit_ratio: f64,
}

/// Runs `numeric_mean_q` across a decreasing eps sweep and extrapolates
/// correction/eps^2 to eps = 0, where it approaches -(lambda/4) t^2.
pub fn correction_study(
    sys: &CubicForceSystem,
    epsilons: &[f64],
    t: f64,
    quad: &QuadratureSpec,
    controls: &FlowControls,
) -> Result<CorrectionStudy> {
    validate_decreasing_epsilons(epsilons)?;
    ensure_finite("t", t)?;
    let q_newton = newton_trajectory(sys, t, controls)?;

    let mut reports = Vec::with_capacity(epsilons.len());
    let mut ratio_points = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let mean = numeric_mean_q(sys, eps, t, quad, controls)?;
        let numeric = mean - q_newton;
        let series = series_correction(sys, eps, t)?;
        let relative_gap = if series != 0.0 {
            ((numeric - series) / series).abs()
        } else {
            numeric.abs()
        };
        reports.push(CorrectionReport {
            t,
            epsilon: eps,
            mean_q_numeric: mean,
            q_newton,
            correction_numeric: numeric,
            correction_series: series,
            relative_gap,
            in_validated_regime: sys.in_validated_regime(eps, t),
        });
        ratio_points.push((eps * eps, numeric / (eps * eps)));
    }
    Ok(CorrectionStudy {
        reports,
        extrapolated_ratio: extrapolate_to_zero(&ratio_points),
        limit_ratio: -0.25 * sys.lambda * t * t,
    })
}

/// Residual of the mean-value force law |m d2<q>/dt2 - <F(q)>| with
/// F = -dV/dq, the time derivative taken by a second central difference of
/// step `fd_step` and both sides evaluated by quadrature.
///
/// For free and harmonic systems the force is linear and the law holds
/// exactly, leaving only difference and quadrature error.
pub fn ehrenfest_residual(
    h: &HamiltonianSpec,
    state: &GaussianState,
    t: f64,
    fd_step: f64,
    quad: &QuadratureSpec,
    controls: &FlowControls,
) -> Result<f64> {
    ensure_positive("fd_step", fd_step)?;
    ensure_finite("t", t)?;
    let mean_q = |s: f64| expectation(|x: &PhasePoint| x.q()[0], state, h, s, quad, controls);
    let plus = mean_q(t + fd_step)?;
    let mid = mean_q(t)?;
    let minus = mean_q(t - fd_step)?;
    let accel = (plus - 2.0 * mid + minus) / (fd_step * fd_step);

    let mean_force = expectation(
        |x: &PhasePoint| -h.potential_gradient(0, x.q()[0]),
        state,
        h,
        t,
        quad,
        controls,
    )?;
    Ok((h.mass(0) * accel - mean_force).abs())
}

/// Seeded Monte Carlo estimate of the mean position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Monte Carlo cross-check of `numeric_mean_q`: samples the Gaussian
/// initial density, flows each sample, and averages the position.
///
/// The free-motion displacement q + p t is used as a control variate (its
/// mean is exactly q0 + p0 t), which removes the dominant linear spread and
/// leaves only the nonlinear residual in the variance. The seed fixes the
/// sample stream, so estimates are reproducible.
pub fn mc_mean_q(
    sys: &CubicForceSystem,
    epsilon: f64,
    t: f64,
    samples: usize,
    seed: u64,
    controls: &FlowControls,
) -> Result<McEstimate> {
    ensure_positive("epsilon", epsilon)?;
    ensure_finite("t", t)?;
    if samples < 2 {
        return Err(Error::invalid("samples", "need at least 2 samples"));
    }
    let h = sys.hamiltonian();
    let sigma = epsilon / std::f64::consts::SQRT_2;
    let normal = Normal::new(0.0, sigma).expect("positive sigma");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Welford accumulation of the control-variate residual q_t - (q + p t).
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for k in 0..samples {
        let q = sys.q0 + normal.sample(&mut rng);
        let p = sys.p0 + normal.sample(&mut rng);
        let start = PhasePoint::one_dim(q, p)?;
        let end = flow(&h, &start, t, controls)?.endpoint;
        let residual = end.q()[0] - (q + p * t);
        let delta = residual - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (residual - mean);
    }
    let var = m2 / (samples - 1) as f64;
    Ok(McEstimate {
        mean: mean + sys.q0 + sys.p0 * t,
        std_error: (var / samples as f64).sqrt(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    /// Frozen from an independent high-order integration (RK4, halved-step
    /// agreement < 1e-10); see also the oracle in tests/oracles.rs.
    const Q_AT_HALF: f64 = 0.9875518670918113;

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn controls() -> FlowControls {
        FlowControls::default()
    }

    #[test]
    fn newton_trajectory_free_limit_is_linear() {
        let sys = CubicForceSystem::new(0.0, 0.3, 0.8).unwrap();
        let q = newton_trajectory(&sys, 2.0, &controls()).unwrap();
        assert_eq!(q, 0.3 + 0.8 * 2.0);
    }

    #[test]
    fn newton_trajectory_matches_series_and_frozen_value() {
        let sys = CubicForceSystem::new(0.1, 1.0, 0.0).unwrap();
        let q = newton_trajectory(&sys, 0.5, &controls()).unwrap();
        let series = 1.0 - 0.5 * 0.1 * 0.25;
        assert_abs_diff_eq!(q, series, epsilon = 3e-4);
        assert_abs_diff_eq!(q, Q_AT_HALF, epsilon = 1e-8);
    }

    #[test]
    fn series_correction_values() {
        let sys = CubicForceSystem::new(0.1, 1.0, 0.0).unwrap();
        assert_eq!(
            series_correction(&CubicForceSystem::new(0.0, 1.0, 0.0).unwrap(), 0.2, 1.0).unwrap(),
            0.0
        );
        assert_relative_eq!(
            series_correction(&sys, 0.2, 1.0).unwrap(),
            -0.001,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            series_correction(&sys, 0.05, 0.1).unwrap(),
            -6.25e-7,
            max_relative = 1e-12
        );
        assert!(series_correction(&sys, 0.0, 1.0).is_err());
        assert!(series_correction(&sys, -0.1, 1.0).is_err());
    }

    #[test]
    fn numeric_mean_is_exact_for_free_motion() {
        let sys = CubicForceSystem::new(0.0, 0.4, 0.9).unwrap();
        for eps in [0.3, 0.1] {
            let m = numeric_mean_q(&sys, eps, 2.0, &quad(), &controls()).unwrap();
            assert_abs_diff_eq!(m, 0.4 + 0.9 * 2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn numeric_mean_reproduces_the_correction() {
        let sys = CubicForceSystem::new(0.1, 1.0, 0.0).unwrap();
        let (eps, t) = (0.1, 0.1);
        let m = numeric_mean_q(&sys, eps, t, &quad(), &controls()).unwrap();
        let qn = newton_trajectory(&sys, t, &controls()).unwrap();
        let series = series_correction(&sys, eps, t).unwrap();
        let gap = ((m - qn) - series).abs();
        assert!(
            gap <= 0.02 * series.abs(),
            "numeric correction {} vs series {series}",
            m - qn
        );
    }

    #[test]
    fn concentration_limit_recovers_newton() {
        let sys = CubicForceSystem::new(0.1, 1.0, 0.0).unwrap();
        let t = 0.1;
        let qn = newton_trajectory(&sys, t, &controls()).unwrap();
        let mut errors = Vec::new();
        for eps in [0.2, 0.1, 0.05] {
            let m = numeric_mean_q(&sys, eps, t, &quad(), &controls()).unwrap();
            errors.push((m - qn).abs());
        }
        // Quadratic decay: halving eps divides the error by about four.
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 4.0).abs() < 0.4, "decay ratio {ratio}");
        }
    }

    #[test]
    fn correction_study_extrapolates_to_the_limit_ratio() {
        let sys = CubicForceSystem::new(0.1, 1.0, 0.0).unwrap();
        let study = correction_study(&sys, &[0.2, 0.1, 0.05], 0.1, &quad(), &controls()).unwrap();
        assert_eq!(study.reports.len(), 3);
        assert_relative_eq!(study.limit_ratio, -2.5e-4, max_relative = 1e-15);
        let rel = ((study.extrapolated_ratio - study.limit_ratio) / study.limit_ratio).abs();
        assert!(rel <= 0.02, "extrapolated ratio off by {rel}");
        for r in &study.reports {
            assert!(r.in_validated_regime);
            assert!(
                r.correction_numeric < 0.0,
                "positive coupling pulls the mean down"
            );
        }
    }

    #[test]
    fn quadratic_potentials_leave_the_mean_on_the_point_trajectory() {
        // Linear force: the flow is linear in (q, p), so the Gaussian mean
        // rides the flowed center exactly and the correction vanishes
        // whatever the concentration width.
        let quad = quad();
        let controls = controls();
        let h = HamiltonianSpec::harmonic(1.0, 1.3).unwrap();
        let (q0, p0, t) = (0.8, -0.4, 1.7);
        let point = flow(&h, &PhasePoint::one_dim(q0, p0).unwrap(), t, &controls)
            .unwrap()
            .endpoint;
        for eps in [0.3, 0.1] {
            let state = GaussianState::new(q0, p0, eps, eps).unwrap();
            let mean =
                expectation(|x: &PhasePoint| x.q()[0], &state, &h, t, &quad, &controls).unwrap();
            assert_abs_diff_eq!(mean, point.q()[0], epsilon = 1e-9);
        }
    }

    #[test]
    fn correction_study_is_trivial_without_coupling() {
        let sys = CubicForceSystem::new(0.0, 0.5, 0.2).unwrap();
        let study = correction_study(&sys, &[0.2, 0.1], 1.0, &quad(), &controls()).unwrap();
        for r in &study.reports {
            assert_abs_diff_eq!(r.correction_numeric, 0.0, epsilon = 1e-9);
            assert_eq!(r.correction_series, 0.0);
        }
        assert_eq!(study.limit_ratio, 0.0);
    }

    #[test]
    fn out_of_regime_sweeps_are_flagged_not_rejected() {
        // |lambda| q0^2 t^2 = 0.1 and eps = 0.5 both exceed the validated
        // regime, but the computation itself stays well-posed.
        let sys = CubicForceSystem::new(0.1, 1.0, 0.0).unwrap();
        let study = correction_study(&sys, &[0.5, 0.4], 1.0, &quad(), &controls()).unwrap();
        assert!(study.reports.iter().all(|r| !r.in_validated_regime));
    }

    #[test]
    fn ehrenfest_identity_by_force_class() {
        let quad = quad();
        let controls = controls();

        let state = GaussianState::new(0.2, 0.4, 1.0, 1.0).unwrap();
        let free = HamiltonianSpec::free(1.0).unwrap();
        let r = ehrenfest_residual(&free, &state, 1.0, 1e-3, &quad, &controls).unwrap();
        assert!(r <= 1e-8, "free residual {r}");

        let harmonic = HamiltonianSpec::harmonic(1.0, 1.0).unwrap();
        let r = ehrenfest_residual(&harmonic, &state, 1.0, 1e-3, &quad, &controls).unwrap();
        assert!(r <= 1e-6, "harmonic residual {r}");

        let sys = CubicForceSystem::new(0.1, 1.0, 0.0).unwrap();
        let concentrated = GaussianState::new(1.0, 0.0, 0.1, 0.1).unwrap();
        let r = ehrenfest_residual(
            &sys.hamiltonian(),
            &concentrated,
            0.1,
            1e-3,
            &quad,
            &controls,
        )
        .unwrap();
        assert!(r <= 1e-4, "cubic residual {r}");
    }

    #[test]
    fn monte_carlo_agrees_with_quadrature() {
        let sys = CubicForceSystem::new(0.1, 1.0, 0.0).unwrap();
        let (eps, t) = (0.1, 0.1);
        let mc = mc_mean_q(&sys, eps, t, 400_000, 7, &controls()).unwrap();
        let quad_mean = numeric_mean_q(&sys, eps, t, &quad(), &controls()).unwrap();
        assert!(
            (mc.mean - quad_mean).abs() <= 5.0 * mc.std_error,
            "MC {} vs quadrature {} (SE {})",
            mc.mean,
            quad_mean,
            mc.std_error
        );
        // The control variate leaves the estimator sharp enough to resolve
        // the correction scale itself.
        assert!(mc.std_error < 5e-7);
    }

    #[test]
    fn monte_carlo_is_reproducible_for_a_fixed_seed() {
        let sys = CubicForceSystem::new(0.1, 1.0, 0.0).unwrap();
        let a = mc_mean_q(&sys, 0.1, 0.1, 2_000, 42, &controls()).unwrap();
        let b = mc_mean_q(&sys, 0.1, 0.1, 2_000, 42, &controls()).unwrap();
        assert_eq!(a, b);
        let c = mc_mean_q(&sys, 0.1, 0.1, 2_000, 43, &controls()).unwrap();
        assert_ne!(a.mean, c.mean);
    }
}
