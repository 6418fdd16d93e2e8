//! Deterministic output assembly: a column table for CSV, a flat JSON
//! object, and the achieved-versus-bound tolerance records.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{Map, Value};

use crate::config::{OutputFormat, ScenarioConfig};

/// One table cell. Floats are printed with 17 significant digits so the
/// text round-trips to the exact f64.
#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
        }
    }
}

/// An achieved accuracy compared against its configured bound.
#[derive(Debug, Clone)]
pub struct ToleranceCheck {
    pub name: &'static str,
    pub achieved: f64,
    pub bound: f64,
}

impl ToleranceCheck {
    pub fn passed(&self) -> bool {
        self.achieved <= self.bound
    }
}

/// Everything a scenario produces: the CSV table, extra JSON fields beyond
/// the table columns, and the tolerance records.
pub struct ScenarioOutput {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub extra: Map<String, Value>,
    pub checks: Vec<ToleranceCheck>,
}

fn float_array(values: impl IntoIterator<Item = f64>) -> Value {
    Value::Array(values.into_iter().map(|v| v.into()).collect())
}

/// Flat JSON object: resolved configuration echo, one array per table
/// column, the scenario's extra fields, and achieved/bound pairs per
/// tolerance. Keys are emitted in sorted order, so output is byte stable.
pub fn to_json(config: &ScenarioConfig, output: &ScenarioOutput) -> Value {
    let mut map = Map::new();
    map.insert("scenario".into(), config.scenario.name().into());
    map.insert("q0".into(), config.q0.into());
    map.insert("p0".into(), config.p0.into());
    map.insert("a".into(), config.a.into());
    map.insert("b".into(), config.b.into());
    map.insert("mass".into(), config.mass.into());
    map.insert("lambda".into(), config.lambda.into());
    map.insert("hbar".into(), config.hbar.into());
    map.insert("order".into(), (config.order as u64).into());
    map.insert(
        "trunc".into(),
        match config.trunc {
            Some(n) => (n as u64).into(),
            None => Value::Null,
        },
    );
    map.insert("fd_step".into(), config.fd_step.into());
    map.insert("seed".into(), config.seed.into());
    map.insert("times".into(), float_array(config.times.iter().copied()));
    map.insert(
        "epsilons".into(),
        float_array(config.epsilons.iter().copied()),
    );

    for (i, column) in output.columns.iter().enumerate() {
        let values: Vec<Value> = output
            .rows
            .iter()
            .map(|row| match row[i] {
                Cell::Float(v) => v.into(),
                Cell::Int(v) => v.into(),
                Cell::Bool(v) => v.into(),
            })
            .collect();
        map.insert((*column).into(), Value::Array(values));
    }
    for (k, v) in &output.extra {
        map.insert(k.clone(), v.clone());
    }
    for check in &output.checks {
        map.insert(
            format!("tolerance_{}_achieved", check.name),
            check.achieved.into(),
        );
        map.insert(
            format!("tolerance_{}_bound", check.name),
            check.bound.into(),
        );
    }
    Value::Object(map)
}

pub fn render_csv(output: &ScenarioOutput) -> String {
    let mut text = output.columns.join(",");
    text.push('\n');
    for row in &output.rows {
        let rendered: Vec<String> = row.iter().map(Cell::render).collect();
        let _ = writeln!(text, "{}", rendered.join(","));
    }
    text
}

/// Writes the emitted file for the configured format and returns its text.
pub fn write_output(
    config: &ScenarioConfig,
    output: &ScenarioOutput,
    path: &Path,
) -> std::io::Result<()> {
    let text = match config.format {
        OutputFormat::Csv => render_csv(output),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&to_json(config, output)).expect("valid JSON");
            s.push('\n');
            s
        }
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, text)
}
