//! The five named scenarios. Each produces a table plus extra report
//! fields and records every achieved tolerance against its bound.

use liouville::box_dynamics::{
    box_abs_momentum_marginal, box_coordinate_marginal, box_mass, required_truncation, BoxState,
    LimitingDistributions,
};
use liouville::corrections::{correction_study, CubicForceSystem};
use liouville::flow::{flow, PhasePoint};
use liouville::quadrature::simpson;
use liouville::quantum::{
    self, box_norm, box_wavefunction, coincidence_check, semiclassical_compare, wigner_gaussian,
    QuantumPacket,
};
use liouville::{
    Error, FlowControls, GaussianState, HamiltonianSpec, Polynomial, QuadratureSpec, Result,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{Map, Value};

use crate::config::{Scenario, ScenarioConfig};
use crate::report::{Cell, ScenarioOutput, ToleranceCheck};

const NORMALIZATION_BOUND: f64 = 1e-6;
const BOX_MASS_BOUND: f64 = 1e-9;
const WALL_AMPLITUDE_BOUND: f64 = 1e-8;
const NORM_SPREAD_BOUND: f64 = 1e-6;
const WIGNER_IDENTITY_BOUND: f64 = 1e-10;
const SEMICLASSICAL_SMOOTHING: f64 = 0.05;
const GRID_POINTS: usize = 512;

pub fn run(config: &ScenarioConfig) -> Result<ScenarioOutput> {
    match config.scenario {
        Scenario::Free => run_free(config),
        Scenario::Box => run_box(config),
        Scenario::Correction => run_correction(config),
        Scenario::Quantum => run_quantum(config),
        Scenario::Flow => run_flow(config),
    }
}

fn float_array(values: impl IntoIterator<Item = f64>) -> Value {
    Value::Array(values.into_iter().map(|v| v.into()).collect())
}

/// Mass of the freely evolved density by iterated quadrature. The inner
/// coordinate integral is windowed onto the sheared support strip (the
/// density at fixed p is a width-a bump around q0 + p t / m), clipped to
/// the sigma box, so large times stay resolvable.
fn free_mass(state: &GaussianState, m: f64, t: f64, span: f64) -> Result<f64> {
    let rep = state.free_moments(m, t)?;
    let sq = span * rep.var_q.sqrt();
    let sp = span * rep.var_p.sqrt();
    let (qlo, qhi) = (rep.mean_q - sq, rep.mean_q + sq);
    Ok(simpson(
        |p| {
            let center = state.q0() + p * t / m;
            let lo = (center - 9.0 * state.a()).max(qlo);
            let hi = (center + 9.0 * state.a()).min(qhi);
            if lo >= hi {
                return 0.0;
            }
            simpson(
                |q| state.free_evolved_density(m, t, q, p).expect("validated"),
                lo,
                hi,
                240,
            )
        },
        rep.mean_p - sp,
        rep.mean_p + sp,
        400,
    ))
}

fn run_free(config: &ScenarioConfig) -> Result<ScenarioOutput> {
    let state = GaussianState::new(config.q0, config.p0, config.a, config.b)?;
    let quad = QuadratureSpec::new(config.order)?;

    let mut rows = Vec::new();
    let mut worst_mass_dev = 0.0f64;
    for &t in &config.times {
        let rep = state.free_moments(config.mass, t)?;
        let mass = free_mass(&state, config.mass, t, quad.sigma_span)?;
        worst_mass_dev = worst_mass_dev.max((mass - 1.0).abs());
        rows.push(vec![
            Cell::Float(t),
            Cell::Float(rep.mean_q),
            Cell::Float(rep.mean_p),
            Cell::Float(rep.var_q),
            Cell::Float(rep.var_p),
        ]);
    }

    Ok(ScenarioOutput {
        columns: vec!["t", "mean_q", "mean_p", "var_q", "var_p"],
        rows,
        extra: Map::new(),
        checks: vec![ToleranceCheck {
            name: "normalization_dev",
            achieved: worst_mass_dev,
            bound: NORMALIZATION_BOUND,
        }],
    })
}

fn run_box(config: &ScenarioConfig) -> Result<ScenarioOutput> {
    let gaussian = GaussianState::new(config.q0, config.p0, config.a, config.b)?;
    let t_max = config.times.iter().cloned().fold(0.0f64, f64::max);
    let truncation = match config.trunc {
        Some(n) => n,
        None => required_truncation(&gaussian, config.mass, t_max)?,
    };
    let state = BoxState::new(gaussian, config.mass, truncation)?;
    let limit = LimitingDistributions::for_state(&state);

    let mut rows = Vec::new();
    let mut worst_mass_dev = 0.0f64;
    for &t in &config.times {
        let mut sup_dev = 0.0f64;
        for k in 0..=GRID_POINTS {
            let q = k as f64 / GRID_POINTS as f64;
            sup_dev = sup_dev.max((box_coordinate_marginal(&state, t, q)? - 1.0).abs());
        }
        let p_span = 5.0 * state.gaussian().b().max(state.gaussian().p0().abs());
        let mut maxwell_linf = 0.0f64;
        for k in 1..=GRID_POINTS {
            let p = p_span * k as f64 / GRID_POINTS as f64;
            let diff =
                (box_abs_momentum_marginal(&state, t, p)? - limit.momentum_abs_limit(p)).abs();
            maxwell_linf = maxwell_linf.max(diff);
        }
        let mass = box_mass(&state, t)?;
        worst_mass_dev = worst_mass_dev.max((mass - 1.0).abs());
        rows.push(vec![
            Cell::Float(t),
            Cell::Float(sup_dev),
            Cell::Float(maxwell_linf),
            Cell::Float(mass),
        ]);
    }

    let mut extra = Map::new();
    extra.insert("truncation_used".into(), (truncation as u64).into());

    Ok(ScenarioOutput {
        columns: vec!["t", "sup_dev_uniform", "maxwell_linf", "interval_mass"],
        rows,
        extra,
        checks: vec![ToleranceCheck {
            name: "box_mass_dev",
            achieved: worst_mass_dev,
            bound: BOX_MASS_BOUND,
        }],
    })
}

fn run_correction(config: &ScenarioConfig) -> Result<ScenarioOutput> {
    let sys = CubicForceSystem::new(config.lambda, config.q0, config.p0)?;
    let quad = QuadratureSpec::new(config.order)?;
    let controls = FlowControls::default();

    let mut rows = Vec::new();
    let mut extrapolated = Vec::new();
    let mut limits = Vec::new();
    for &t in &config.times {
        let study = correction_study(&sys, &config.epsilons, t, &quad, &controls)?;
        for r in &study.reports {
            rows.push(vec![
                Cell::Float(r.t),
                Cell::Float(r.epsilon),
                Cell::Float(r.mean_q_numeric),
                Cell::Float(r.q_newton),
                Cell::Float(r.correction_numeric),
                Cell::Float(r.correction_series),
                Cell::Float(r.relative_gap),
                Cell::Bool(r.in_validated_regime),
            ]);
        }
        extrapolated.push(study.extrapolated_ratio);
        limits.push(study.limit_ratio);
    }

    let mut extra = Map::new();
    extra.insert("extrapolated_ratio".into(), float_array(extrapolated));
    extra.insert("limit_ratio".into(), float_array(limits));

    Ok(ScenarioOutput {
        columns: vec![
            "t",
            "epsilon",
            "mean_q_numeric",
            "q_newton",
            "correction_numeric",
            "correction_series",
            "relative_gap",
            "in_regime",
        ],
        rows,
        extra,
        checks: vec![],
    })
}

fn run_quantum(config: &ScenarioConfig) -> Result<ScenarioOutput> {
    let gaussian = GaussianState::new(config.q0, config.p0, config.a, config.b)?;
    let packet = QuantumPacket::new(config.q0, config.p0, config.a, config.hbar, config.mass)?;
    let t_max = config.times.iter().cloned().fold(0.0f64, f64::max);

    // Coordinate grid wide enough for the fattest of the two densities.
    let w_classical = gaussian
        .free_coordinate_marginal(config.mass, t_max)?
        .width();
    let w_quantum = packet.squared_width(t_max).sqrt();
    let w = w_classical.max(w_quantum).max(gaussian.a());
    let centers: Vec<f64> = config
        .times
        .iter()
        .map(|&t| config.q0 + config.p0 * t / config.mass)
        .collect();
    let c_lo = centers.iter().cloned().fold(f64::INFINITY, f64::min) - 6.0 * w;
    let c_hi = centers.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 6.0 * w;
    let x_grid: Vec<f64> = (0..256)
        .map(|k| c_lo + (c_hi - c_lo) * k as f64 / 255.0)
        .collect();

    let truncation = match config.trunc {
        Some(n) => n,
        None => quantum::required_truncation(&packet, t_max)?,
    };

    let mut rows = Vec::new();
    let mut worst_wall = 0.0f64;
    let mut norms = Vec::new();
    for &t in &config.times {
        let coin = coincidence_check(&gaussian, config.mass, config.hbar, &[t], &x_grid)?;
        let wall0 = box_wavefunction(&packet, 0.0, t, truncation)?.norm();
        let wall1 = box_wavefunction(&packet, 1.0, t, truncation)?.norm();
        let wall = wall0.max(wall1);
        worst_wall = worst_wall.max(wall);
        let norm = box_norm(&packet, t, truncation, 2000)?;
        norms.push(norm);
        rows.push(vec![
            Cell::Float(t),
            Cell::Float(coin.max_abs_diff),
            Cell::Float(wall),
            Cell::Float(norm),
        ]);
    }
    let norm_spread = norms
        .iter()
        .map(|n| (n - norms[0]).abs())
        .fold(0.0f64, f64::max);

    // Joint-distribution identity at seeded random probe points, against
    // the matched classical density (momentum width hbar / a).
    let matched = GaussianState::new(config.q0, config.p0, config.a, config.hbar / config.a)?;
    // Probe points ride the sheared support (q near x0 + p t / m), where
    // both densities are of order one rather than deep in the tails.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let b_eff = config.hbar / config.a;
    let mut wigner_max = 0.0f64;
    for _ in 0..100 {
        let p = config.p0 + rng.gen_range(-3.0 * b_eff..3.0 * b_eff);
        let t = rng.gen_range(0.0..t_max.max(1e-6));
        let q = config.q0 + p * t / config.mass + rng.gen_range(-2.0 * config.a..2.0 * config.a);
        let diff = (wigner_gaussian(&packet, q, p, t)
            - matched.free_evolved_density(config.mass, t, q, p)?)
        .abs();
        wigner_max = wigner_max.max(diff);
    }

    // Semiclassical sweep: halve hbar twice, compare on the interval at
    // the latest requested time.
    let sweep: Vec<QuantumPacket> = [1.0, 0.5, 0.25]
        .iter()
        .map(|&f| QuantumPacket::new(config.q0, config.p0, config.a, config.hbar * f, config.mass))
        .collect::<Result<_>>()?;
    let semiclassical = semiclassical_compare(&sweep, t_max, SEMICLASSICAL_SMOOTHING, GRID_POINTS)?;

    let coin_all = coincidence_check(&gaussian, config.mass, config.hbar, &config.times, &x_grid)?;
    let mut extra = Map::new();
    extra.insert(
        "coincidence_condition_holds".into(),
        coin_all.condition_holds.into(),
    );
    extra.insert(
        "coincidence_condition_residual".into(),
        coin_all.condition_residual.into(),
    );
    extra.insert("wigner_max_diff".into(), wigner_max.into());
    extra.insert(
        "semiclassical_hbar".into(),
        float_array(sweep.iter().map(|p| p.hbar())),
    );
    extra.insert("semiclassical_l1".into(), float_array(semiclassical));
    extra.insert("truncation_used".into(), (truncation as u64).into());

    Ok(ScenarioOutput {
        columns: vec!["t", "coincidence_max_diff", "wall_amplitude", "norm"],
        rows,
        extra,
        checks: vec![
            ToleranceCheck {
                name: "wall_amplitude",
                achieved: worst_wall,
                bound: WALL_AMPLITUDE_BOUND,
            },
            ToleranceCheck {
                name: "norm_spread",
                achieved: norm_spread,
                bound: NORM_SPREAD_BOUND,
            },
            ToleranceCheck {
                name: "wigner_identity",
                achieved: wigner_max,
                bound: WIGNER_IDENTITY_BOUND,
            },
        ],
    })
}

fn run_flow(config: &ScenarioConfig) -> Result<ScenarioOutput> {
    let h = if config.lambda != 0.0 {
        HamiltonianSpec::new(
            vec![config.mass],
            vec![Polynomial::cubic_force(config.lambda)?],
        )?
    } else {
        HamiltonianSpec::free(config.mass)?
    };
    let x0 = PhasePoint::one_dim(config.q0, config.p0)?;
    let controls = FlowControls::default();

    let mut rows = Vec::new();
    let mut worst_drift = 0.0f64;
    for &t in &config.times {
        let r = flow(&h, &x0, t, &controls)?;
        worst_drift = worst_drift.max(r.energy_drift);
        rows.push(vec![
            Cell::Float(t),
            Cell::Float(r.endpoint.q()[0]),
            Cell::Float(r.endpoint.p()[0]),
            Cell::Float(h.energy(&r.endpoint)),
            Cell::Float(r.energy_drift),
            Cell::Int(r.steps_used as u64),
        ]);
    }

    Ok(ScenarioOutput {
        columns: vec!["t", "q", "p", "energy", "energy_drift", "steps"],
        rows,
        extra: Map::new(),
        checks: vec![ToleranceCheck {
            name: "energy_drift",
            achieved: worst_drift,
            bound: controls.drift_bound,
        }],
    })
}

/// Maps core errors onto the process exit code contract: validation
/// failures exit 1, numerical failures exit 2.
pub fn exit_code_for(error: &Error) -> i32 {
    if error.is_validation() {
        1
    } else {
        2
    }
}
