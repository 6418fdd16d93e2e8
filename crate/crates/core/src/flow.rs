//! Hamiltonian flow on flat 2N-dimensional phase space and everything the
//! transport picture needs from it: the pullback solution of the continuity
//! equation, Gauss-Hermite expectation values, the point-concentration
//! limit, and a finite-difference check of the transport identity
//! d(rho)/dt = {H, rho}.
//!
//! The integrator is fixed-step Stormer-Verlet. It is time symmetric, so a
//! backward run with negated step retraces a forward run to roundoff; the
//! pullback and reversibility guarantees rely on that. Free and harmonic
//! potentials take exact closed-form paths instead.

use std::f64::consts::PI;

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::phase_density::GaussianState;
use crate::poly::Polynomial;
use crate::quadrature::{gauss_hermite, QuadratureSpec};

/// Relative tolerance for the order-doubling convergence check inside
/// [`expectation`].
pub const EXPECTATION_CONVERGENCE_TOL: f64 = 1e-9;

/// Errors below this floor are treated as exactly converged when fitting a
/// convergence order; a slope through roundoff noise is meaningless.
const ORDER_FIT_FLOOR: f64 = 1e-13;

/// A point (q, p) in 2N-dimensional phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    q: Vec<f64>,
    p: Vec<f64>,
}

impl PhasePoint {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.is_empty() || q.len() != p.len() {
            return Err(Error::invalid(
                "phase point",
                format!(
                    "q and p must have equal nonzero length, got {} and {}",
                    q.len(),
                    p.len()
                ),
            ));
        }
        for &v in q.iter().chain(p.iter()) {
            ensure_finite("phase point entry", v)?;
        }
        Ok(PhasePoint { q, p })
    }

    /// Single-particle point on the (q, p) plane.
    pub fn one_dim(q: f64, p: f64) -> Result<Self> {
        PhasePoint::new(vec![q], vec![p])
    }

    pub(crate) fn unchecked(q: Vec<f64>, p: Vec<f64>) -> Self {
        PhasePoint { q, p }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }
}

/// Masses plus a separable polynomial potential: H = sum p_i^2 / (2 m_i) + sum V_i(q_i).
///
/// Gradients are evaluated exactly from the coefficients, so the force is
/// never approximated.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    masses: Vec<f64>,
    potentials: Vec<Polynomial>,
}

impl HamiltonianSpec {
    pub fn new(masses: Vec<f64>, potentials: Vec<Polynomial>) -> Result<Self> {
        if masses.is_empty() || masses.len() != potentials.len() {
            return Err(Error::invalid(
                "masses",
                "need one mass and one potential per degree of freedom",
            ));
        }
        for &m in &masses {
            ensure_positive("mass", m)?;
        }
        Ok(HamiltonianSpec { masses, potentials })
    }

    /// Free particle on the line: V = 0.
    pub fn free(mass: f64) -> Result<Self> {
        HamiltonianSpec::new(vec![mass], vec![Polynomial::zero()])
    }

    /// V = 0.5 k q^2 on the line.
    pub fn harmonic(mass: f64, k: f64) -> Result<Self> {
        HamiltonianSpec::new(vec![mass], vec![Polynomial::harmonic(k)?])
    }

    /// Unit-mass system with force -lambda q^2, i.e. V = (lambda/3) q^3.
    pub fn cubic_force(lambda: f64) -> Result<Self> {
        HamiltonianSpec::new(vec![1.0], vec![Polynomial::cubic_force(lambda)?])
    }

    pub fn dim(&self) -> usize {
        self.masses.len()
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn potential(&self, i: usize) -> &Polynomial {
        &self.potentials[i]
    }

    /// dV_i/dq at the given coordinate.
    pub fn potential_gradient(&self, i: usize, q: f64) -> f64 {
        self.potentials[i].eval_deriv(q)
    }

    pub fn energy(&self, x: &PhasePoint) -> f64 {
        let mut h = 0.0;
        for i in 0..self.dim() {
            h += 0.5 * x.p[i] * x.p[i] / self.masses[i] + self.potentials[i].eval(x.q[i]);
        }
        h
    }

    /// Exact flow when every degree of freedom is free or a stiff-positive
    /// harmonic term. Covers V = const and V = const + 0.5 k q^2 with k > 0.
    fn analytic_flow(&self, x: &PhasePoint, t: f64) -> Option<PhasePoint> {
        #[derive(Clone, Copy)]
        enum Kind {
            Free,
            Harmonic(f64),
        }
        let mut kinds = Vec::with_capacity(self.dim());
        for pot in &self.potentials {
            match pot.degree() {
                None | Some(0) => kinds.push(Kind::Free),
                Some(2) => {
                    let c = pot.coeffs();
                    if c[1] == 0.0 && c[2] > 0.0 {
                        kinds.push(Kind::Harmonic(2.0 * c[2]));
                    } else {
                        return None;
                    }
                }
                _ => return None,
            }
        }
        let mut q = x.q.clone();
        let mut p = x.p.clone();
        for i in 0..self.dim() {
            let m = self.masses[i];
            match kinds[i] {
                Kind::Free => q[i] += p[i] * t / m,
                Kind::Harmonic(k) => {
                    let w = (k / m).sqrt();
                    let (s, c) = (w * t).sin_cos();
                    let (qi, pi) = (q[i], p[i]);
                    q[i] = qi * c + pi / (m * w) * s;
                    p[i] = pi * c - m * w * qi * s;
                }
            }
        }
        Some(PhasePoint::unchecked(q, p))
    }
}

/// Step-size policy for the flow map. Step count starts at |t| / base_step
/// and doubles until the energy drift |H(end) - H(start)| meets
/// `drift_bound`, at most `max_refinements` times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowControls {
    pub drift_bound: f64,
    pub base_step: f64,
    pub max_refinements: u32,
}

impl Default for FlowControls {
    fn default() -> Self {
        FlowControls {
            drift_bound: 1e-8,
            base_step: 5e-4,
            max_refinements: 8,
        }
    }
}

/// Endpoint of a flow run plus the accuracy actually achieved.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub endpoint: PhasePoint,
    /// |H(endpoint) - H(start)|; zero to roundoff on the closed-form paths.
    pub energy_drift: f64,
    /// Verlet steps taken; 0 when a closed-form path or t = 0 was used.
    pub steps_used: usize,
}

fn verlet(h: &HamiltonianSpec, x0: &PhasePoint, t: f64, steps: usize) -> PhasePoint {
    let dim = h.dim();
    let dt = t / steps as f64;
    let mut q = x0.q.clone();
    let mut p = x0.p.clone();
    for _ in 0..steps {
        for i in 0..dim {
            p[i] -= 0.5 * dt * h.potential_gradient(i, q[i]);
        }
        for i in 0..dim {
            q[i] += dt * p[i] / h.masses[i];
        }
        for i in 0..dim {
            p[i] -= 0.5 * dt * h.potential_gradient(i, q[i]);
        }
    }
    PhasePoint::unchecked(q, p)
}

/// Flow map phi_t: integrates Hamilton's equations dq/dt = dH/dp,
/// dp/dt = -dH/dq from `x0` for time `t` (negative t runs backward).
pub fn flow(
    h: &HamiltonianSpec,
    x0: &PhasePoint,
    t: f64,
    controls: &FlowControls,
) -> Result<FlowResult> {
    ensure_finite("t", t)?;
    if x0.dim() != h.dim() {
        return Err(Error::invalid(
            "phase point",
            format!(
                "dimension {} does not match system dimension {}",
                x0.dim(),
                h.dim()
            ),
        ));
    }
    if t == 0.0 {
        return Ok(FlowResult {
            endpoint: x0.clone(),
            energy_drift: 0.0,
            steps_used: 0,
        });
    }
    let e0 = h.energy(x0);
    if let Some(endpoint) = h.analytic_flow(x0, t) {
        let drift = (h.energy(&endpoint) - e0).abs();
        return Ok(FlowResult {
            endpoint,
            energy_drift: drift,
            steps_used: 0,
        });
    }

    let base_steps = (t.abs() / controls.base_step).ceil().max(1.0) as usize;
    let mut achieved = f64::INFINITY;
    let mut steps = base_steps;
    for refinement in 0..=controls.max_refinements {
        steps = base_steps << refinement;
        let endpoint = verlet(h, x0, t, steps);
        let drift = (h.energy(&endpoint) - e0).abs();
        if drift <= controls.drift_bound {
            return Ok(FlowResult {
                endpoint,
                energy_drift: drift,
                steps_used: steps,
            });
        }
        achieved = achieved.min(drift);
    }
    Err(Error::DriftBoundExceeded {
        achieved,
        bound: controls.drift_bound,
        steps,
    })
}

/// Transport solution at (x, t): the initial density evaluated at the
/// backward image, rho0(phi_{-t}(x)). For V = 0 this reproduces the
/// closed-form free evolution exactly.
pub fn pullback_density<D>(
    rho0: D,
    h: &HamiltonianSpec,
    x: &PhasePoint,
    t: f64,
    controls: &FlowControls,
) -> Result<f64>
where
    D: Fn(&PhasePoint) -> f64,
{
    let back = flow(h, x, -t, controls)?;
    Ok(rho0(&back.endpoint))
}

fn gauss_hermite_expectation<F>(
    f: &F,
    rho0: &GaussianState,
    h: &HamiltonianSpec,
    t: f64,
    order: usize,
    controls: &FlowControls,
) -> Result<f64>
where
    F: Fn(&PhasePoint) -> f64,
{
    let (nodes, weights) = gauss_hermite(order)?;
    // Standardize to the initial Gaussian: q = q0 + a u, p = p0 + b v turns
    // the expectation into a tensor integral against exp(-u^2-v^2).
    let mut acc = 0.0;
    for (i, &u) in nodes.iter().enumerate() {
        let q = rho0.q0() + rho0.a() * u;
        let mut row = 0.0;
        for (j, &v) in nodes.iter().enumerate() {
            let p = rho0.p0() + rho0.b() * v;
            let start = PhasePoint::unchecked(vec![q], vec![p]);
            let end = flow(h, &start, t, controls)?.endpoint;
            row += weights[j] * f(&end);
        }
        acc += weights[i] * row;
    }
    Ok(acc / PI)
}

/// Expectation of an observable at time t under a Gaussian initial density:
/// the integral of f(phi_t(q, p)) rho0(q, p) dq dp, evaluated by tensor
/// Gauss-Hermite quadrature in the standardized initial variables.
///
/// The result is checked by doubling the order; if that moves the value by
/// more than [`EXPECTATION_CONVERGENCE_TOL`] (relative to max(1, |value|))
/// the run fails rather than returning an unconverged number. The returned
/// value is the doubled-order estimate.
pub fn expectation<F>(
    f: F,
    rho0: &GaussianState,
    h: &HamiltonianSpec,
    t: f64,
    quad: &QuadratureSpec,
    controls: &FlowControls,
) -> Result<f64>
where
    F: Fn(&PhasePoint) -> f64,
{
    ensure_finite("t", t)?;
    if h.dim() != 1 {
        return Err(Error::invalid(
            "hamiltonian",
            "expectation against a planar Gaussian needs a one-dimensional system",
        ));
    }
    let coarse = gauss_hermite_expectation(&f, rho0, h, t, quad.order, controls)?;
    let fine = gauss_hermite_expectation(&f, rho0, h, t, quad.order * 2, controls)?;
    let delta = (fine - coarse).abs();
    let tol = EXPECTATION_CONVERGENCE_TOL * fine.abs().max(1.0);
    if delta > tol {
        return Err(Error::QuadratureNotConverged {
            order: quad.order,
            delta,
            tol,
        });
    }
    Ok(fine)
}

/// Outcome of a concentration sweep: expectations under Gaussians of width
/// eps around a point, compared with the observable on the flowed point.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaLimitReport {
    pub epsilons: Vec<f64>,
    /// Expectation value for each eps.
    pub values: Vec<f64>,
    /// |value - reference| for each eps.
    pub errors: Vec<f64>,
    /// The observable evaluated on the flowed point itself.
    pub reference: f64,
    /// Least-squares slope of log(error) against log(eps); `None` when any
    /// error sits at the roundoff floor (a linear flow kills the leading
    /// eps^2 term and the slope becomes noise).
    pub fitted_order: Option<f64>,
}

/// Concentration sweep: evaluates the expectation for Gaussian initial data
/// of widths a = b = eps around (q0, p0) and reports convergence to
/// f(phi_t(q0, p0)) as eps decreases. The leading error is quadratic in eps.
#[allow(clippy::too_many_arguments)]
pub fn delta_limit_probe<F>(
    f: F,
    h: &HamiltonianSpec,
    q0: f64,
    p0: f64,
    t: f64,
    epsilons: &[f64],
    quad: &QuadratureSpec,
    controls: &FlowControls,
) -> Result<DeltaLimitReport>
where
    F: Fn(&PhasePoint) -> f64,
{
    validate_decreasing_epsilons(epsilons)?;
    let point = PhasePoint::one_dim(q0, p0)?;
    let reference = f(&flow(h, &point, t, controls)?.endpoint);

    let mut values = Vec::with_capacity(epsilons.len());
    let mut errors = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let state = GaussianState::new(q0, p0, eps, eps)?;
        let v = expectation(&f, &state, h, t, quad, controls)?;
        values.push(v);
        errors.push((v - reference).abs());
    }

    let fitted_order = if errors.iter().all(|&e| e > ORDER_FIT_FLOOR) {
        Some(log_log_slope(epsilons, &errors))
    } else {
        None
    };

    Ok(DeltaLimitReport {
        epsilons: epsilons.to_vec(),
        values,
        errors,
        reference,
        fitted_order,
    })
}

pub(crate) fn validate_decreasing_epsilons(epsilons: &[f64]) -> Result<()> {
    if epsilons.is_empty() {
        return Err(Error::invalid("epsilons", "need at least one value"));
    }
    for &e in epsilons {
        ensure_positive("epsilon", e)?;
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("epsilons", "must be strictly decreasing"));
    }
    Ok(())
}

fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Residual |d(rho)/dt - {H, rho}| of the transport identity at (x, t),
/// with all derivatives taken by central differences of step `fd_step` on
/// the pullback solution. Small for smooth densities; bounded by the
/// finite-difference truncation for exact flows.
pub fn liouville_residual<D>(
    rho0: D,
    h: &HamiltonianSpec,
    x: &PhasePoint,
    t: f64,
    fd_step: f64,
    controls: &FlowControls,
) -> Result<f64>
where
    D: Fn(&PhasePoint) -> f64,
{
    ensure_positive("fd_step", fd_step)?;
    if x.dim() != h.dim() {
        return Err(Error::invalid("phase point", "dimension mismatch"));
    }
    let rho = |y: &PhasePoint, s: f64| pullback_density(&rho0, h, y, s, controls);

    let d_dt = (rho(x, t + fd_step)? - rho(x, t - fd_step)?) / (2.0 * fd_step);

    let mut bracket = 0.0;
    for i in 0..h.dim() {
        let mut shifted = x.clone();
        shifted.q[i] = x.q[i] + fd_step;
        let rq_plus = rho(&shifted, t)?;
        shifted.q[i] = x.q[i] - fd_step;
        let rq_minus = rho(&shifted, t)?;
        shifted.q[i] = x.q[i];

        shifted.p[i] = x.p[i] + fd_step;
        let rp_plus = rho(&shifted, t)?;
        shifted.p[i] = x.p[i] - fd_step;
        let rp_minus = rho(&shifted, t)?;

        let drho_dq = (rq_plus - rq_minus) / (2.0 * fd_step);
        let drho_dp = (rp_plus - rp_minus) / (2.0 * fd_step);
        // {H, rho} = sum_i dH/dq_i drho/dp_i - dH/dp_i drho/dq_i
        bracket += h.potential_gradient(i, x.q[i]) * drho_dp - x.p[i] / h.mass(i) * drho_dq;
    }
    Ok((d_dt - bracket).abs())
}
