//! Configuration: command-line flags, optional TOML file, defaults, and
//! validation. Flags override file values; both fall back to documented
//! defaults (mass 1, hbar 1, quadrature order 40).

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Deserialize;

/// Environment variable overriding the default output directory.
pub const OUT_DIR_ENV: &str = "LIOUVILLE_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Free,
    Box,
    Correction,
    Quantum,
    Flow,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Free => "free",
            Scenario::Box => "box",
            Scenario::Correction => "correction",
            Scenario::Quantum => "quantum",
            Scenario::Flow => "flow",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }

    fn parse_key(value: &str) -> Result<Self, String> {
        match value {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("invalid format: expected csv or json, got {other}")),
        }
    }
}

/// Flags shared by every scenario.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Position center (box scenarios need 0 < q0 < 1)
    #[arg(long, allow_negative_numbers = true)]
    pub q0: Option<f64>,
    /// Momentum center
    #[arg(long, allow_negative_numbers = true)]
    pub p0: Option<f64>,
    /// Position width (exponential scale, not a standard deviation)
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Momentum width (exponential scale)
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Particle mass
    #[arg(long, allow_negative_numbers = true)]
    pub mass: Option<f64>,
    /// Cubic-force coupling (force = -lambda q^2); 0 means free motion
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Quantum scale for the quantum scenario
    #[arg(long, allow_negative_numbers = true)]
    pub hbar: Option<f64>,
    /// Comma-separated times
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub t: Option<Vec<f64>>,
    /// Comma-separated concentration widths, strictly decreasing
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub eps: Option<Vec<f64>>,
    /// Gauss-Hermite points per dimension
    #[arg(long)]
    pub order: Option<usize>,
    /// Image-series truncation override (default: derived from t)
    #[arg(long)]
    pub trunc: Option<usize>,
    /// Seed for randomized probe points
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file path (default: <scenario>.<format> in the output dir)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// TOML file with the same keys; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// TOML file contents; unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    q0: Option<f64>,
    p0: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    mass: Option<f64>,
    lambda: Option<f64>,
    hbar: Option<f64>,
    t: Option<Vec<f64>>,
    eps: Option<Vec<f64>>,
    order: Option<usize>,
    trunc: Option<usize>,
    fd_step: Option<f64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<String>,
}

/// Fully resolved, validated run description.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub q0: f64,
    pub p0: f64,
    pub a: f64,
    pub b: f64,
    pub mass: f64,
    pub lambda: f64,
    pub hbar: f64,
    pub times: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub order: usize,
    pub trunc: Option<usize>,
    pub fd_step: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub format: OutputFormat,
}

fn require_positive(name: &'static str, value: f64) -> Result<f64, String> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(format!(
            "invalid {name}: must be a positive finite number, got {value}"
        ))
    }
}

fn require_finite(name: &'static str, value: f64) -> Result<f64, String> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("invalid {name}: must be finite, got {value}"))
    }
}

impl ScenarioConfig {
    /// Merges flags over file values over defaults and validates every
    /// field, naming the offending key on failure.
    pub fn resolve(scenario: Scenario, args: &CommonArgs) -> Result<Self, String> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("invalid config: cannot read {}: {e}", path.display()))?;
                toml::from_str::<FileConfig>(&text).map_err(|e| format!("invalid config: {e}"))?
            }
            None => FileConfig::default(),
        };

        let format = match (&args.format, &file.format) {
            (Some(f), _) => *f,
            (None, Some(s)) => OutputFormat::parse_key(s)?,
            (None, None) => OutputFormat::Csv,
        };

        let q0 = require_finite("q0", args.q0.or(file.q0).unwrap_or(0.5))?;
        let p0 = require_finite("p0", args.p0.or(file.p0).unwrap_or(0.0))?;
        let a = require_positive("a", args.a.or(file.a).unwrap_or(1.0))?;
        let b = require_positive("b", args.b.or(file.b).unwrap_or(1.0))?;
        let mass = require_positive("mass", args.mass.or(file.mass).unwrap_or(1.0))?;
        let lambda = require_finite("lambda", args.lambda.or(file.lambda).unwrap_or(0.0))?;
        let hbar = require_positive("hbar", args.hbar.or(file.hbar).unwrap_or(1.0))?;
        let fd_step = require_positive("fd_step", file.fd_step.unwrap_or(1e-3))?;

        let times = args
            .t
            .clone()
            .or(file.t)
            .unwrap_or_else(|| vec![0.0, 1.0, 2.0, 5.0]);
        if times.is_empty() {
            return Err("invalid t: need at least one time".into());
        }
        for &t in &times {
            require_finite("t", t)?;
        }
        if matches!(scenario, Scenario::Box | Scenario::Quantum) {
            if let Some(&t) = times.iter().find(|&&t| t < 0.0) {
                return Err(format!(
                    "invalid t: reflected evolution needs t >= 0, got {t}"
                ));
            }
            if !(0.0 < q0 && q0 < 1.0) {
                return Err(format!(
                    "invalid q0: the interval scenarios need 0 < q0 < 1, got {q0}"
                ));
            }
        }

        let epsilons = args
            .eps
            .clone()
            .or(file.eps)
            .unwrap_or_else(|| vec![0.2, 0.1, 0.05]);
        if scenario == Scenario::Correction {
            if epsilons.is_empty() {
                return Err("invalid eps: need at least one width".into());
            }
            for &e in &epsilons {
                if !(e.is_finite() && e > 0.0) {
                    return Err(format!("invalid eps: widths must be positive, got {e}"));
                }
            }
            if epsilons.windows(2).any(|w| w[1] >= w[0]) {
                return Err("invalid eps: widths must be strictly decreasing".into());
            }
        }

        let order = args.order.or(file.order).unwrap_or(40);
        if order < 2 {
            return Err(format!("invalid order: must be >= 2, got {order}"));
        }
        let trunc = args.trunc.or(file.trunc);
        if trunc == Some(0) {
            return Err("invalid trunc: must be >= 1".into());
        }
        let seed = args.seed.or(file.seed).unwrap_or(0);

        let out = match args.out.clone().or(file.out) {
            Some(path) => path,
            None => {
                let dir = std::env::var_os(OUT_DIR_ENV)
                    .map(PathBuf::from)
                    .unwrap_or_else(|| PathBuf::from("."));
                dir.join(format!("{}.{}", scenario.name(), format.extension()))
            }
        };

        Ok(ScenarioConfig {
            scenario,
            q0,
            p0,
            a,
            b,
            mass,
            lambda,
            hbar,
            times,
            epsilons,
            order,
            trunc,
            fd_step,
            seed,
            out,
            format,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_documented_values() {
        let cfg = ScenarioConfig::resolve(Scenario::Free, &CommonArgs::default()).unwrap();
        assert_eq!(cfg.mass, 1.0);
        assert_eq!(cfg.hbar, 1.0);
        assert_eq!(cfg.order, 40);
        assert_eq!(cfg.times, vec![0.0, 1.0, 2.0, 5.0]);
        assert_eq!(cfg.format, OutputFormat::Csv);
    }

    #[test]
    fn negative_width_names_the_key() {
        let args = CommonArgs {
            a: Some(-1.0),
            ..Default::default()
        };
        let err = ScenarioConfig::resolve(Scenario::Free, &args).unwrap_err();
        assert!(err.contains("a"), "message was: {err}");
    }

    #[test]
    fn interval_scenarios_constrain_q0() {
        let args = CommonArgs {
            q0: Some(1.5),
            ..Default::default()
        };
        assert!(ScenarioConfig::resolve(Scenario::Free, &args).is_ok());
        let err = ScenarioConfig::resolve(Scenario::Box, &args).unwrap_err();
        assert!(err.contains("q0"));
    }

    #[test]
    fn correction_requires_decreasing_eps() {
        let args = CommonArgs {
            eps: Some(vec![0.1, 0.2]),
            ..Default::default()
        };
        assert!(ScenarioConfig::resolve(Scenario::Correction, &args).is_err());
    }
}
