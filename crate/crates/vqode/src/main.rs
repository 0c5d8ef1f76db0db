//! Thin command-line entry point: `run <config>`, `verify`, and
//! `budget <config>`.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use vqode::complexity::{hl_budget, ki_budget, sato_budget};
use vqode::config::{RunConfig, SolverSetupOwnedAny};
use vqode::problems::{DifferentialEquation, PoissonBc};
use vqode::report::{emit_report, execute};
use vqode::training::Algorithm;
use vqode::VqodeError;

/// Variational quantum ODE solver with Lagrange polynomial encoding.
#[derive(Parser)]
#[command(name = "vqode", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute all seeds of a configured experiment and write reports.
    Run {
        /// Path to the TOML run configuration.
        config: PathBuf,
        /// Replace the config's seed list with a single seed.
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Run the built-in property suite (encoding identities, gradient
    /// checks, reference-solution checks).
    Verify,
    /// Print the closed-form circuit/gate budget for a configuration,
    /// without any simulation.
    Budget {
        /// Path to the TOML run configuration.
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                VqodeError::Config(_) => ExitCode::from(2),
                VqodeError::Diverged { .. } => ExitCode::from(3),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn out_dir_override(configured: &str) -> String {
    std::env::var("VQODE_OUT_DIR").unwrap_or_else(|_| configured.to_string())
}

fn dispatch() -> Result<ExitCode, VqodeError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, seed_override } => {
            let mut cfg = RunConfig::from_path(&config)?;
            if let Some(seed) = seed_override {
                cfg.seeds = vec![seed];
            }
            let prepared = cfg.prepare()?;
            let out_dir = PathBuf::from(out_dir_override(&prepared.out_dir));
            let started = Instant::now();
            let report = execute(&prepared)?;
            let elapsed = started.elapsed();
            let files = emit_report(&report, &out_dir)?;
            println!("run {} finished in {:.1?}", report.label, elapsed);
            for s in &report.seeds {
                println!(
                    "seed {}: iterations={} de_eval={:.6e} bc_eval={:.6e}",
                    s.seed,
                    s.trace.iterations(),
                    s.de_eval,
                    s.bc_eval
                );
            }
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify => {
            let checks = vqode::verify::run_all(true);
            if checks.iter().all(|c| c.passed) {
                println!("all checks passed");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("some checks FAILED");
                Ok(ExitCode::from(1))
            }
        }
        Command::Budget { config } => {
            let cfg = RunConfig::from_path(&config)?;
            let prepared = cfg.prepare()?;
            match &prepared.setup {
                SolverSetupOwnedAny::Dmss(s) => {
                    let budget = match s.algorithm {
                        Algorithm::HadamardLagrange => hl_budget(
                            s.nodes.len(),
                            s.nodes.len() + 1,
                            s.structure,
                            s.problem.terms(),
                        ),
                        Algorithm::KyriienkoInspired => ki_budget(
                            s.ki_qubits,
                            s.ki_layers,
                            s.nodes.len(),
                            s.problem.terms(),
                        ),
                    };
                    println!("circuits/iteration: {}", budget.circuits_per_iteration);
                    println!("basic gates/iteration: {}", budget.basic_gates_per_iteration);
                    println!(
                        "gates per circuit (f / df / d2f): {} / {} / {}",
                        budget.gates_f_circuit, budget.gates_df_circuit, budget.gates_d2f_circuit
                    );
                }
                SolverSetupOwnedAny::Poisson(s) => {
                    let budget = hl_budget(
                        s.nodes.len(),
                        s.nodes.len() + 1,
                        s.structure,
                        s.problem.terms(),
                    );
                    println!("circuits/iteration: {}", budget.circuits_per_iteration);
                    println!("basic gates/iteration: {}", budget.basic_gates_per_iteration);
                    let n_obs = match s.problem.bc {
                        PoissonBc::Periodic => 3,
                        PoissonBc::Dirichlet => 4,
                        PoissonBc::Neumann => 5,
                    };
                    let sato = sato_budget(n_obs, 5, 5, 8, 1);
                    println!(
                        "comparison discretized-solver budget: circuits/iteration {} gates/iteration {}",
                        sato.circuits_per_iteration, sato.basic_gates_per_iteration
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
