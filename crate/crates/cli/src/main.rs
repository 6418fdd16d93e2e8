//! Command-line front end: named scenarios over the phase-space density
//! engine, emitting deterministic CSV or JSON.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure (including
//! any achieved tolerance above its bound).

mod config;
mod report;
mod scenarios;

use std::process::exit;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;

use config::{CommonArgs, Scenario, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "liouville",
    version,
    about = "Phase-space density evolution scenarios: free spreading, a reflecting box, \
             corrections to the Newtonian mean, quantum comparisons, and raw flows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand)]
enum Command {
    /// Free-motion moments: mean drift and dispersion growth
    Free(CommonArgs),
    /// Particle on [0, 1] with reflecting ends: uniformization and the
    /// two-sided momentum law
    Box(CommonArgs),
    /// Mean-trajectory corrections for the cubic-force system
    Correction(CommonArgs),
    /// Quantum packet comparisons: width-condition coincidence, the joint
    /// distribution identity, the boxed packet, and a semiclassical sweep
    Quantum(CommonArgs),
    /// Hamiltonian flow of a single point with drift diagnostics
    Flow(CommonArgs),
}

impl Command {
    fn split(&self) -> (Scenario, &CommonArgs) {
        match self {
            Command::Free(a) => (Scenario::Free, a),
            Command::Box(a) => (Scenario::Box, a),
            Command::Correction(a) => (Scenario::Correction, a),
            Command::Quantum(a) => (Scenario::Quantum, a),
            Command::Flow(a) => (Scenario::Flow, a),
        }
    }
}

fn print_summary(cfg: &ScenarioConfig, output: &report::ScenarioOutput, elapsed_s: f64) {
    println!("scenario        {}", cfg.scenario.name());
    println!("q0              {}", cfg.q0);
    println!("p0              {}", cfg.p0);
    println!("a               {}", cfg.a);
    println!("b               {}", cfg.b);
    println!("mass            {}", cfg.mass);
    println!("lambda          {}", cfg.lambda);
    println!("hbar            {}", cfg.hbar);
    println!("order           {}", cfg.order);
    match cfg.trunc {
        Some(n) => println!("trunc           {n}"),
        None => println!("trunc           auto"),
    }
    println!("fd_step         {}", cfg.fd_step);
    println!("seed            {}", cfg.seed);
    println!(
        "t               {}",
        cfg.times
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(",")
    );
    println!(
        "eps             {}",
        cfg.epsilons
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(",")
    );
    println!("wrote           {}", cfg.out.display());
    for check in &output.checks {
        println!(
            "tolerance       {} achieved {:.3e} bound {:.3e} {}",
            check.name,
            check.achieved,
            check.bound,
            if check.passed() { "OK" } else { "FAIL" }
        );
    }
    println!("wall_time_s     {elapsed_s:.3}");
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            exit(code);
        }
    };
    let (scenario, args) = cli.command.split();
    let cfg = match ScenarioConfig::resolve(scenario, args) {
        Ok(cfg) => cfg,
        Err(message) => {
            eprintln!("error: {message}");
            exit(1);
        }
    };

    let started = Instant::now();
    let output = match scenarios::run(&cfg) {
        Ok(output) => output,
        Err(e) => {
            eprintln!("error: {e}");
            exit(scenarios::exit_code_for(&e));
        }
    };
    if let Err(e) = report::write_output(&cfg, &output, &cfg.out) {
        eprintln!("error: cannot write {}: {e}", cfg.out.display());
        exit(2);
    }
    print_summary(&cfg, &output, started.elapsed().as_secs_f64());
    if output.checks.iter().any(|c| !c.passed()) {
        exit(2);
    }
}
