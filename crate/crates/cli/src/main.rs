//! `consensus-lab` — experiment runner for classical/quantum consensus
//! dynamics and gossip algorithms.
//!
//! Exit codes: 0 on success, 1 when a verification criterion or a runtime
//! invariant fails, 2 on input errors (bad config, bad graph file, bad
//! arguments).

mod config;
mod runner;

use clap::{Parser, Subcommand};
use consensus_core::acceptance::{self, AcceptanceOptions};
use consensus_core::Graph;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    /// Unusable input: config, graph file, parameters. Exit code 2.
    Input(String),
    /// Failure while running: violated invariant, I/O. Exit code 1.
    Run(String),
}

#[derive(Parser)]
#[command(
    name = "consensus-lab",
    version,
    about = "Consensus dynamics laboratory: entropy trajectories, gossip chains, verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a key=value config file (or a
    /// previously written manifest JSON).
    Run {
        /// Path to the config file.
        config: PathBuf,
    },
    /// Run the full acceptance suite and print a pass/fail table.
    Verify,
    /// Inspect an edge-list graph file: degrees, connectivity, spectrum,
    /// pair-selection probabilities.
    GraphInfo {
        /// Path to the edge-list file.
        edgelist: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => cmd_run(&config),
        Command::Verify => cmd_verify(),
        Command::GraphInfo { edgelist } => cmd_graph_info(&edgelist),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn cmd_run(path: &Path) -> Result<ExitCode, CliError> {
    let resolved = config::load(path)?;
    runner::run(&resolved)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify() -> Result<ExitCode, CliError> {
    let results = acceptance::run_all(&AcceptanceOptions::default());
    let mut all_pass = true;
    println!("{:-<78}", "");
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!(
            "[{status}] {} {:<40} {:>7.2}s / {:>4.0}s",
            r.id, r.name, r.seconds, r.budget_seconds
        );
        if !r.passed {
            println!("       {}", r.details);
            all_pass = false;
        }
    }
    println!("{:-<78}", "");
    if all_pass {
        println!("all {} criteria passed", results.len());
        Ok(ExitCode::SUCCESS)
    } else {
        println!("FAILURES present");
        Ok(ExitCode::from(1))
    }
}

fn cmd_graph_info(path: &Path) -> Result<ExitCode, CliError> {
    let g = Graph::from_edge_list_path(path).map_err(|e| CliError::Input(e.to_string()))?;
    println!("nodes: {}", g.node_count());
    println!("edges: {}", g.edge_count());
    let edges: Vec<String> = g
        .edges()
        .iter()
        .map(|&(i, j)| format!("{{{},{}}}", i + 1, j + 1))
        .collect();
    println!("edge list: {}", edges.join(" "));
    let degrees: Vec<String> = (0..g.node_count())
        .map(|i| format!("{}:{}", i + 1, g.degree(i)))
        .collect();
    println!("degrees: {}", degrees.join(" "));
    println!("connected: {}", if g.is_connected() { "yes" } else { "no" });
    let eig: Vec<String> = g
        .laplacian()
        .eigenvalues()
        .iter()
        .map(|l| format!("{l:.6}"))
        .collect();
    println!("laplacian eigenvalues: {}", eig.join(" "));
    match g.pair_distribution() {
        Ok(q) => {
            let probs: Vec<String> = q
                .probs()
                .iter()
                .map(|&((i, j), p)| format!("{{{},{}}}={p:.6}", i + 1, j + 1))
                .collect();
            println!("pair probabilities: {}", probs.join(" "));
        }
        Err(e) => println!("pair probabilities: unavailable ({e})"),
    }
    Ok(ExitCode::SUCCESS)
}
