//! Simulation laboratory for classical and quantum consensus dynamics and
//! gossip algorithms, with entropy trajectories as the main observable.
//!
//! The crate covers three related settings on a connected undirected graph:
//!
//! - **Classical consensus flow** (`classical`): `dX/dt = -L X` with random
//!   initial node values; Gaussian states propagate in closed form and their
//!   differential entropy never increases.
//! - **Quantum consensus flow** (`quantum`): `d rho/dt = sum (U rho U' - rho)`
//!   over edge swap operators; the von Neumann entropy never decreases, and
//!   the limit is the permutation symmetrization of the initial state.
//! - **Gossip algorithms** (`gossip`): discrete-time pairwise updates with
//!   deterministic or random coefficients, classical and quantum variants,
//!   their induced single-particle Markov chain, exact distribution
//!   evolution, and a seeded Monte Carlo engine.
//!
//! The `acceptance` module packages the verification suite run both by
//! `cargo test` and by the CLI `verify` command.
//!
//! ## Quick start
//!
//! ```
//! use consensus_core::{classical, quantum, Graph};
//!
//! let g = Graph::default_four_node();
//!
//! // Classical: differential entropy decreases linearly at rate tr(L) log2(e).
//! let grid = classical::uniform_grid(0.0, 0.5, 3.0);
//! let traj = classical::differential_entropy_trajectory(&g, 1.0, &grid)?;
//! assert!(traj.max_entropy_step() <= 1e-9);
//!
//! // Quantum: von Neumann entropy rises toward the symmetrized limit.
//! let rho0 = quantum::qstate_from_kets("01+-")?;
//! let traj = quantum::integrate_quantum(&g, &rho0, &[2.0, 10.0], 0.01)?;
//! assert!(traj.min_entropy_step() >= -1e-8);
//! let limit = quantum::symmetrized_limit(&rho0, 4)?;
//! assert!(traj.final_state().max_diff(&limit) < 1e-3);
//! # Ok::<(), consensus_core::Error>(())
//! ```

pub mod acceptance;
pub mod classical;
pub mod entropy;
pub mod error;
pub mod gossip;
pub mod graph;
pub mod linalg;
pub mod quantum;

pub use error::{Error, Result};
pub use graph::{Graph, Laplacian, PairDistribution};
