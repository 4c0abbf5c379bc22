//! Experiment execution and output writing. Every run produces a manifest
//! JSON echoing the fully resolved configuration; re-running from the
//! manifest reproduces the output files byte for byte. Files are written
//! atomically (temp file + rename).

use crate::config::{Experiment, ResolvedConfig};
use crate::CliError;
use consensus_core::classical;
use consensus_core::entropy::DiscreteDist;
use consensus_core::gossip::{self, Algorithm, GossipConfig, JointPmf};
use consensus_core::quantum;
use consensus_core::Graph;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Environment variable overriding the output directory (default: the
/// current directory).
pub const OUTDIR_ENV: &str = "CONSENSUS_LAB_OUTDIR";

fn run_err(e: impl std::fmt::Display) -> CliError {
    CliError::Run(e.to_string())
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Run(format!("writing {}: {e}", path.display()))
}

pub fn output_dir() -> PathBuf {
    std::env::var_os(OUTDIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Atomic write: temp file in the target directory, then rename.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    std::fs::write(&tmp, contents).map_err(|e| io_err(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| io_err(path, e))?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    experiment: &'a str,
    config: &'a BTreeMap<String, String>,
    outputs: &'a [String],
}

fn gnuplot_script(csv: &str, ylabel: &str, columns: &[(usize, &str)], logscale: bool) -> String {
    let mut s = String::from("# gnuplot convenience script\nset datafile separator \",\"\nset key autotitle columnhead\n");
    s.push_str("set xlabel \"t\"\n");
    s.push_str(&format!("set ylabel \"{ylabel}\"\n"));
    if logscale {
        s.push_str("set logscale y\n");
    }
    let plots: Vec<String> = columns
        .iter()
        .map(|(col, title)| format!("\"{csv}\" using 1:{col} with lines title \"{title}\""))
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", ")));
    s
}

fn warn_if_disconnected(graph: &Graph) {
    if !graph.is_connected() {
        eprintln!("warning: graph is disconnected; consensus limits differ per component");
    }
}

/// Executes the experiment, writes its outputs and the manifest, and prints
/// the produced file names.
pub fn run(config: &ResolvedConfig) -> Result<(), CliError> {
    let dir = output_dir();
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Run(format!("creating {}: {e}", dir.display())))?;
    let prefix = &config.prefix;

    // (file name, contents) pairs, written after the experiment succeeds.
    let mut outputs: Vec<(String, String)> = Vec::new();

    match &config.experiment {
        Experiment::ClassicalFlow {
            graph,
            sigma2,
            grid,
        } => {
            warn_if_disconnected(graph);
            let traj =
                classical::differential_entropy_trajectory(graph, *sigma2, grid).map_err(run_err)?;
            let csv = format!("{prefix}_trajectory.csv");
            outputs.push((csv.clone(), traj.to_csv()));
            outputs.push((
                format!("{prefix}_plot.gp"),
                gnuplot_script(&csv, "bits", &[(2, "h joint"), (3, "h marginal")], false),
            ));
        }
        Experiment::QuantumFlow {
            graph,
            ket,
            grid,
            step,
        } => {
            warn_if_disconnected(graph);
            let rho0 = quantum::qstate_from_kets(ket).map_err(|e| CliError::Input(e.to_string()))?;
            let traj = quantum::integrate_quantum(graph, &rho0, grid, *step).map_err(run_err)?;
            let min_step = traj.min_entropy_step();
            if min_step < -1e-8 {
                return Err(CliError::Run(format!(
                    "invariant violated: von Neumann entropy decreased by {:.3e} between samples",
                    -min_step
                )));
            }
            let csv = format!("{prefix}_trajectory.csv");
            outputs.push((csv.clone(), traj.to_csv()));
            outputs.push((
                format!("{prefix}_plot.gp"),
                gnuplot_script(&csv, "bits", &[(2, "S")], false),
            ));
        }
        Experiment::BernoulliReport { n, p } => {
            let report = classical::bernoulli_limit_report(*n, *p)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let json = serde_json::to_string_pretty(&report).map_err(run_err)?;
            outputs.push((format!("{prefix}_report.json"), json + "\n"));
        }
        Experiment::GossipMc {
            graph,
            algorithm,
            beta,
            seed,
            horizon,
            trials,
            init,
        } => {
            warn_if_disconnected(graph);
            let cfg = GossipConfig::new(graph.clone(), *beta, *seed, *horizon)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let report =
                gossip::run_monte_carlo(&cfg, *algorithm, init, *trials).map_err(run_err)?;
            if *algorithm == Algorithm::A2 {
                let support = report.support.clone().unwrap_or_default();
                let hist = report.per_k[*horizon]
                    .node_histograms
                    .as_ref()
                    .expect("A2 reports histograms");
                for (node, freqs) in hist.iter().enumerate() {
                    let mut csv = String::from("value,frequency\n");
                    for (v, f) in support.iter().zip(freqs) {
                        csv.push_str(&format!("{v},{f:.12e}\n"));
                    }
                    outputs.push((format!("{prefix}_hist_node{}.csv", node + 1), csv));
                }
            }
            let json = serde_json::to_string_pretty(&report).map_err(run_err)?;
            outputs.push((format!("{prefix}_stats.json"), json + "\n"));
        }
        Experiment::GossipExact {
            graph,
            x0,
            beta,
            horizon,
        } => {
            warn_if_disconnected(graph);
            let cfg = GossipConfig::new(graph.clone(), *beta, 0, *horizon)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let x0 = nalgebra::DVector::from_row_slice(x0);
            let n = graph.node_count();
            let support = gossip::value_support(&x0);
            let chain = gossip::single_particle_matrix(&cfg).map_err(run_err)?;
            let m0: Vec<DiscreteDist> = (0..n)
                .map(|i| {
                    let slot = support
                        .iter()
                        .position(|&v| v.to_bits() == x0[i].to_bits())
                        .expect("initial value is in its own support");
                    DiscreteDist::delta(slot, support.len()).expect("valid point mass")
                })
                .collect();

            let mut f = JointPmf::delta(graph, &x0).map_err(|e| CliError::Input(e.to_string()))?;
            let mut marginal_csv = String::from("k,node,value,p_joint_operator,p_chain_mixture\n");
            let mut entropy_csv = String::from("k,joint_entropy_bits\n");
            let mut max_route_dev = 0.0f64;
            for k in 0..=*horizon {
                let by_chain = gossip::marginal_evolution(&chain, &m0, k).map_err(run_err)?;
                for node in 0..n {
                    let by_pmf = f.marginal(node, &support).map_err(run_err)?;
                    for ((value, a), b) in support
                        .iter()
                        .zip(by_pmf.probs())
                        .zip(by_chain[node].probs())
                    {
                        max_route_dev = max_route_dev.max((a - b).abs());
                        marginal_csv.push_str(&format!(
                            "{k},{},{value},{a:.12e},{b:.12e}\n",
                            node + 1
                        ));
                    }
                }
                entropy_csv.push_str(&format!(
                    "{k},{}\n",
                    f.joint_entropy().map_err(run_err)?.csv_field()
                ));
                f = f.step(&cfg).map_err(run_err)?;
            }
            if max_route_dev > 1e-12 {
                return Err(CliError::Run(format!(
                    "invariant violated: joint-operator and chain-mixture marginals diverge by {max_route_dev:.3e}"
                )));
            }
            outputs.push((format!("{prefix}_marginals.csv"), marginal_csv));
            outputs.push((format!("{prefix}_joint_entropy.csv"), entropy_csv));
        }
        Experiment::Ergodicity { graph, beta, k_max } => {
            warn_if_disconnected(graph);
            let cfg = GossipConfig::new(graph.clone(), *beta, 0, *k_max)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let chain = gossip::single_particle_matrix(&cfg).map_err(run_err)?;
            let report = gossip::ergodicity_report(&chain, *k_max).map_err(run_err)?;
            if !report.exponential_bound_holds {
                return Err(CliError::Run(
                    "invariant violated: chain distances exceed the fitted exponential envelope"
                        .to_string(),
                ));
            }
            let mut csv = String::from("k,distance,envelope\n");
            for (idx, d) in report.distances.iter().enumerate() {
                let k = idx + 1;
                let envelope = if report.slem > 0.0 {
                    report.fitted_c * report.slem.powi(k as i32)
                } else {
                    0.0
                };
                csv.push_str(&format!("{k},{d:.12e},{envelope:.12e}\n"));
            }
            let csv_name = format!("{prefix}_mixing.csv");
            outputs.push((csv_name.clone(), csv));
            outputs.push((
                format!("{prefix}_summary.json"),
                serde_json::to_string_pretty(&report).map_err(run_err)? + "\n",
            ));
            outputs.push((
                format!("{prefix}_plot.gp"),
                gnuplot_script(&csv_name, "max-norm distance", &[(2, "d_k"), (3, "envelope")], true),
            ));
        }
    }

    let mut names: Vec<String> = outputs.iter().map(|(n, _)| n.clone()).collect();
    let manifest_name = format!("{prefix}_manifest.json");
    names.push(manifest_name.clone());

    for (name, contents) in &outputs {
        write_atomic(&dir.join(name), contents)?;
    }
    let manifest = Manifest {
        tool: "consensus-lab",
        version: env!("CARGO_PKG_VERSION"),
        experiment: &config.kind,
        config: &config.echo,
        outputs: &names,
    };
    write_atomic(
        &dir.join(&manifest_name),
        &(serde_json::to_string_pretty(&manifest).map_err(run_err)? + "\n"),
    )?;

    for name in &names {
        println!("{}", dir.join(name).display());
    }
    Ok(())
}
