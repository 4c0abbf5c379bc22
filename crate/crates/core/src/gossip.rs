//! Discrete-time gossip algorithms and their exact distribution dynamics.
//!
//! Per tick one random edge is drawn (uniform node, then uniform neighbor)
//! and only the selected pair updates. Classical variants act on a real
//! state vector, quantum variants conjugate the network density matrix by
//! the pair swap:
//!
//! - `A1` — both nodes move to their average (deterministic coefficients);
//! - `A1'` — both nodes copy one endpoint chosen by a coin `b`;
//! - `A2` — the pair swaps values when `b = 0`, holds when `b = 1`;
//! - `AQ1` — `rho <- rho/2 + U rho U'/2`;
//! - `AQ2` — `rho <- rho` or `U rho U'` depending on `b`.
//!
//! The label dynamics of `A2` induce a symmetric doubly stochastic
//! single-particle transition matrix `P`; marginals evolve as mixtures
//! `p_k^i = sum_s (P^k)_{s,i} p_0^s`, and the joint distribution evolves by
//! the edge-averaged swap/hold operator. The two routes are independent
//! implementations that must agree, and the Monte Carlo engine provides the
//! sampled third route.

use crate::entropy::{self, DiscreteDist, EntropyValue};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{self, RealSymMatrix};
use crate::quantum::{DensityMatrix, SwapOperator};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashMap;

/// Joint-distribution support is the permutation orbit of the initial
/// vector, at most `N!`; capped here.
pub const MAX_JOINT_NODES: usize = 6;

/// Configuration of a gossip process: interaction graph, hold probability
/// `beta` (the mean of the Bernoulli coefficients), RNG seed, and step
/// horizon. `beta` must lie strictly inside `(0, 1)`: at the endpoints the
/// value chain loses aperiodicity or irreducibility and the marginal
/// dynamics no longer mix.
#[derive(Debug, Clone)]
pub struct GossipConfig {
    graph: Graph,
    beta: f64,
    seed: u64,
    horizon: usize,
}

impl GossipConfig {
    pub fn new(graph: Graph, beta: f64, seed: u64, horizon: usize) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::OutOfRange {
                name: "beta",
                value: beta,
                range: "(0, 1)",
            });
        }
        Ok(Self {
            graph,
            beta,
            seed,
            horizon,
        })
    }

    /// Default coin bias 1/2.
    pub fn with_default_beta(graph: Graph, seed: u64, horizon: usize) -> Result<Self> {
        Self::new(graph, 0.5, seed, horizon)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }
}

/// Gossip update rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Classical, deterministic averaging coefficients.
    A1,
    /// Classical, random coefficients (both nodes copy one endpoint).
    A1Prime,
    /// Classical, random swapping.
    A2,
    /// Quantum, deterministic coefficients.
    Aq1,
    /// Quantum, random swapping.
    Aq2,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Algorithm::A1 => "A1",
            Algorithm::A1Prime => "A1'",
            Algorithm::A2 => "A2",
            Algorithm::Aq1 => "AQ1",
            Algorithm::Aq2 => "AQ2",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A1" => Ok(Algorithm::A1),
            "A1'" | "A1p" | "A1prime" => Ok(Algorithm::A1Prime),
            "A2" => Ok(Algorithm::A2),
            "AQ1" => Ok(Algorithm::Aq1),
            "AQ2" => Ok(Algorithm::Aq2),
            other => Err(Error::Parse {
                line: 0,
                msg: format!("unknown algorithm '{other}' (expected A1, A1', A2, AQ1, AQ2)"),
            }),
        }
    }
}

/// Independent per-trial random stream: ChaCha8 keyed by the config seed,
/// with the trial index as the stream id. Trials are order-independent and
/// safe to run in parallel.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Two-stage pair draw implemented literally: a node uniformly among `N`,
/// then a uniform neighbor. Returns a 0-based `(min, max)` edge.
///
/// Requires every node to have a neighbor (validated by the callers that
/// own a [`GossipConfig`]).
pub fn sample_pair(g: &Graph, rng: &mut impl Rng) -> (usize, usize) {
    let i = rng.random_range(0..g.node_count());
    let nbrs = g.neighbors(i);
    let j = nbrs[rng.random_range(0..nbrs.len())];
    (i.min(j), i.max(j))
}

/// Classical gossip state: value vector plus step index.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalGossipState {
    pub x: DVector<f64>,
    pub k: usize,
}

impl ClassicalGossipState {
    pub fn new(x: DVector<f64>) -> Self {
        Self { x, k: 0 }
    }

    /// Whether all entries are exactly equal.
    pub fn is_consensus(&self) -> bool {
        self.x.iter().all(|&v| v == self.x[0])
    }

    /// Euclidean distance to the average-consensus vector.
    pub fn disagreement(&self) -> f64 {
        let avg = self.x.mean();
        self.x.iter().map(|&v| (v - avg) * (v - avg)).sum::<f64>().sqrt()
    }
}

/// Deterministic-coefficient update: both endpoints move to their average.
pub fn step_a1(state: &mut ClassicalGossipState, pair: (usize, usize)) {
    let avg = 0.5 * (state.x[pair.0] + state.x[pair.1]);
    state.x[pair.0] = avg;
    state.x[pair.1] = avg;
    state.k += 1;
}

/// Random-coefficient update: both endpoints copy `x_i` when `b` is set,
/// `x_j` otherwise.
pub fn step_a1_prime(state: &mut ClassicalGossipState, pair: (usize, usize), b: bool) {
    let v = if b { state.x[pair.0] } else { state.x[pair.1] };
    state.x[pair.0] = v;
    state.x[pair.1] = v;
    state.k += 1;
}

/// Random-swapping update: hold when `b` is set, exchange otherwise.
pub fn step_a2(state: &mut ClassicalGossipState, pair: (usize, usize), b: bool) {
    if !b {
        state.x.swap_rows(pair.0, pair.1);
    }
    state.k += 1;
}

/// Quantum gossip state: density matrix plus step index.
#[derive(Debug, Clone)]
pub struct QuantumGossipState {
    pub rho: DensityMatrix,
    pub k: usize,
}

impl QuantumGossipState {
    pub fn new(rho: DensityMatrix) -> Self {
        Self { rho, k: 0 }
    }
}

/// Deterministic-coefficient quantum update:
/// `rho <- rho/2 + U rho U'/2`.
pub fn step_aq1(state: &QuantumGossipState, swap: &SwapOperator) -> Result<QuantumGossipState> {
    let half = Complex64::new(0.5, 0.0);
    let mixed = state.rho.raw() * half + swap.conjugate(state.rho.raw()) * half;
    Ok(QuantumGossipState {
        rho: DensityMatrix::from_raw(mixed)?,
        k: state.k + 1,
    })
}

/// Random-swapping quantum update: identity when `b` is set, conjugation by
/// the pair swap otherwise. Either branch is unitary, so the spectrum of
/// `rho` is untouched.
pub fn step_aq2(
    state: &QuantumGossipState,
    swap: &SwapOperator,
    b: bool,
) -> Result<QuantumGossipState> {
    let rho = if b {
        state.rho.clone()
    } else {
        DensityMatrix::from_raw(swap.conjugate(state.rho.raw()))?
    };
    Ok(QuantumGossipState {
        rho,
        k: state.k + 1,
    })
}

/// Single-particle transition matrix of the label dynamics under `A2`:
/// `P = I - sum_edges q_ij (1-beta) (e_i - e_j)(e_i - e_j)^T`.
/// Symmetric, doubly stochastic and nonnegative for every valid config.
#[derive(Debug, Clone)]
pub struct SingleParticleChain {
    p: DMatrix<f64>,
}

impl SingleParticleChain {
    /// Wraps an arbitrary matrix without validation; used by negative
    /// controls that deliberately break the chain invariants.
    pub fn from_matrix_unchecked(p: DMatrix<f64>) -> Self {
        Self { p }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    pub fn is_symmetric_doubly_stochastic(&self, tol: f64) -> bool {
        let n = self.n();
        for i in 0..n {
            let mut row = 0.0;
            let mut col = 0.0;
            for j in 0..n {
                if self.p[(i, j)] < -tol || (self.p[(i, j)] - self.p[(j, i)]).abs() > tol {
                    return false;
                }
                row += self.p[(i, j)];
                col += self.p[(j, i)];
            }
            if (row - 1.0).abs() > tol || (col - 1.0).abs() > tol {
                return false;
            }
        }
        true
    }

    /// `P^k` by repeated multiplication.
    pub fn power(&self, k: usize) -> DMatrix<f64> {
        let n = self.n();
        let mut out = DMatrix::<f64>::identity(n, n);
        for _ in 0..k {
            out = &out * &self.p;
        }
        out
    }

    /// Second-largest eigenvalue modulus.
    pub fn slem(&self) -> Result<f64> {
        let sym = RealSymMatrix::new(self.p.clone())?;
        let (w, _) = linalg::eig_sym(&sym)?;
        let n = w.len();
        if n == 1 {
            return Ok(0.0);
        }
        // Largest eigenvalue of a doubly stochastic matrix is 1; the rest
        // determine the mixing rate.
        Ok(w[n - 2].abs().max(w[0].abs()))
    }
}

/// Builds the single-particle chain from the pair distribution and hold
/// probability of a config.
pub fn single_particle_matrix(cfg: &GossipConfig) -> Result<SingleParticleChain> {
    let q = cfg.graph().pair_distribution()?;
    let n = cfg.graph().node_count();
    let swap_scale = 1.0 - cfg.beta();
    let mut p = DMatrix::<f64>::identity(n, n);
    for &((i, j), qij) in q.probs() {
        let w = qij * swap_scale;
        p[(i, i)] -= w;
        p[(j, j)] -= w;
        p[(i, j)] += w;
        p[(j, i)] += w;
    }
    let chain = SingleParticleChain { p };
    if !chain.is_symmetric_doubly_stochastic(1e-12) {
        return Err(Error::Invariant(
            "single-particle matrix is not symmetric doubly stochastic".into(),
        ));
    }
    Ok(chain)
}

/// Pushes per-node marginal distributions forward `k` steps:
/// `p_k^i = sum_s (P^k)_{s,i} p_0^s`.
///
/// All marginals must share one finite support (equal lengths here; the
/// caller owns the value list).
pub fn marginal_evolution(
    chain: &SingleParticleChain,
    marginals0: &[DiscreteDist],
    k: usize,
) -> Result<Vec<DiscreteDist>> {
    let n = chain.n();
    if marginals0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: marginals0.len(),
        });
    }
    let support = marginals0[0].len();
    if marginals0.iter().any(|m| m.len() != support) {
        return Err(Error::DimensionMismatch {
            expected: support,
            got: marginals0.iter().map(|m| m.len()).find(|&l| l != support).unwrap_or(0),
        });
    }
    let pk = chain.power(k);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut probs = vec![0.0f64; support];
        for s in 0..n {
            let w = pk[(s, i)];
            for (v, p0) in marginals0[s].probs().iter().enumerate() {
                probs[v] += w * p0;
            }
        }
        out.push(DiscreteDist::new(probs)?);
    }
    Ok(out)
}

/// Sorted distinct values of a vector, for use as a shared marginal
/// support. Values are compared bit-exactly: gossip dynamics only copy and
/// swap entries, never recompute them.
pub fn value_support(x: &DVector<f64>) -> Vec<f64> {
    let mut vals: Vec<f64> = x.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals.dedup_by(|a, b| a.to_bits() == b.to_bits());
    vals
}

fn state_key(x: &DVector<f64>) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

/// Joint probability mass function over the orbit of an initial vector
/// under edge transpositions. The support is built lazily by breadth-first
/// closure, so repeated initial values yield an orbit smaller than `N!`.
#[derive(Debug, Clone)]
pub struct JointPmf {
    support: Vec<DVector<f64>>,
    probs: Vec<f64>,
    index: HashMap<Vec<u64>, usize>,
}

impl JointPmf {
    /// Point mass on `x0`, with the support closed under the graph's edge
    /// transpositions.
    pub fn delta(g: &Graph, x0: &DVector<f64>) -> Result<Self> {
        let n = g.node_count();
        if x0.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x0.len(),
            });
        }
        if n > MAX_JOINT_NODES {
            return Err(Error::TooLarge {
                what: "nodes",
                n,
                max: MAX_JOINT_NODES,
            });
        }
        let mut support = vec![x0.clone()];
        let mut index = HashMap::from([(state_key(x0), 0usize)]);
        let mut frontier = vec![0usize];
        while let Some(s) = frontier.pop() {
            for &(i, j) in g.edges() {
                let mut next = support[s].clone();
                next.swap_rows(i, j);
                let key = state_key(&next);
                if let std::collections::hash_map::Entry::Vacant(slot) = index.entry(key) {
                    slot.insert(support.len());
                    frontier.push(support.len());
                    support.push(next);
                }
            }
        }
        let mut probs = vec![0.0; support.len()];
        probs[0] = 1.0;
        Ok(Self {
            support,
            probs,
            index,
        })
    }

    pub fn support(&self) -> &[DVector<f64>] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob_of(&self, x: &DVector<f64>) -> f64 {
        self.index
            .get(&state_key(x))
            .map_or(0.0, |&i| self.probs[i])
    }

    fn swapped_index(&self, state: usize, pair: (usize, usize)) -> usize {
        let mut next = self.support[state].clone();
        next.swap_rows(pair.0, pair.1);
        self.index[&state_key(&next)]
    }

    /// One tick of the edge-averaged evolution operator
    /// `T = sum_edges q_ij (beta Id + (1-beta) Swap_ij)`.
    pub fn step(&self, cfg: &GossipConfig) -> Result<JointPmf> {
        let q = cfg.graph().pair_distribution()?;
        let beta = cfg.beta();
        let mut probs = vec![0.0f64; self.support.len()];
        for &(edge, qij) in q.probs() {
            for (s, out) in probs.iter_mut().enumerate() {
                let swapped = self.swapped_index(s, edge);
                *out += qij * (beta * self.probs[s] + (1.0 - beta) * self.probs[swapped]);
            }
        }
        Ok(JointPmf {
            support: self.support.clone(),
            probs,
            index: self.index.clone(),
        })
    }

    /// Conditional update for one selected pair:
    /// `f <- beta f + (1-beta) f o swap_ij`.
    pub fn pair_step(&self, pair: (usize, usize), beta: f64) -> JointPmf {
        let mut probs = vec![0.0f64; self.support.len()];
        for (s, out) in probs.iter_mut().enumerate() {
            let swapped = self.swapped_index(s, pair);
            *out = beta * self.probs[s] + (1.0 - beta) * self.probs[swapped];
        }
        JointPmf {
            support: self.support.clone(),
            probs,
            index: self.index.clone(),
        }
    }

    /// Marginal distribution of one node over a shared value support.
    pub fn marginal(&self, node: usize, support_values: &[f64]) -> Result<DiscreteDist> {
        let mut probs = vec![0.0f64; support_values.len()];
        for (state, &p) in self.support.iter().zip(&self.probs) {
            let v = state[node];
            let slot = support_values
                .iter()
                .position(|&u| u.to_bits() == v.to_bits())
                .ok_or_else(|| {
                    Error::Invariant(format!("state value {v} missing from the support list"))
                })?;
            probs[slot] += p;
        }
        DiscreteDist::new(probs)
    }

    /// Shannon entropy of the joint distribution, bits.
    pub fn joint_entropy(&self) -> Result<EntropyValue> {
        Ok(entropy::shannon(&DiscreteDist::new(self.probs.clone())?))
    }
}

/// Per-step aggregates of a Monte Carlo run; fields are populated according
/// to the algorithm.
#[derive(Debug, Clone, Serialize)]
pub struct McStepStats {
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disagreement_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consensus_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy_mean_bits: Option<f64>,
    /// Per node, per support value: empirical frequency.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node_histograms: Option<Vec<Vec<f64>>>,
}

/// Reduced statistics of a seeded Monte Carlo run.
#[derive(Debug, Clone, Serialize)]
pub struct McReport {
    pub algorithm: String,
    pub seed: u64,
    pub trials: usize,
    pub horizon: usize,
    /// Value support for histograms (classical swap dynamics).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<f64>>,
    pub per_k: Vec<McStepStats>,
}

/// Initial state for a Monte Carlo run.
#[derive(Debug, Clone)]
pub enum McInit {
    Classical(DVector<f64>),
    Quantum(DensityMatrix),
}

/// Runs `trials` independent trajectories of the chosen algorithm and
/// reduces them to per-step statistics:
///
/// - `A1`: mean disagreement from the average-consensus vector;
/// - `A1'`: fraction of trials that have reached exact consensus (a CDF of
///   the hit time);
/// - `A2`: per-node empirical value histograms;
/// - `AQ1`/`AQ2`: mean von Neumann entropy.
///
/// Output is deterministic given the config (trial `t` draws from stream
/// `t` of the seeded generator, independent of execution order).
pub fn run_monte_carlo(
    cfg: &GossipConfig,
    algorithm: Algorithm,
    init: &McInit,
    trials: usize,
) -> Result<McReport> {
    cfg.graph().pair_distribution()?; // rejects isolated nodes up front
    match (algorithm, init) {
        (Algorithm::A1 | Algorithm::A1Prime | Algorithm::A2, McInit::Classical(x0)) => {
            run_classical_mc(cfg, algorithm, x0, trials)
        }
        (Algorithm::Aq1 | Algorithm::Aq2, McInit::Quantum(rho0)) => {
            run_quantum_mc(cfg, algorithm, rho0, trials)
        }
        _ => Err(Error::Invariant(format!(
            "algorithm {algorithm} does not accept the provided initial state"
        ))),
    }
}

fn run_classical_mc(
    cfg: &GossipConfig,
    algorithm: Algorithm,
    x0: &DVector<f64>,
    trials: usize,
) -> Result<McReport> {
    let n = cfg.graph().node_count();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    let horizon = cfg.horizon();
    let support = value_support(x0);
    let value_slot: HashMap<u64, usize> = support
        .iter()
        .enumerate()
        .map(|(s, &v)| (v.to_bits(), s))
        .collect();

    let mut disagreement = vec![0.0f64; horizon + 1];
    let mut consensus = vec![0usize; horizon + 1];
    let mut hist = vec![vec![vec![0u64; support.len()]; n]; horizon + 1];

    for trial in 0..trials {
        let mut rng = trial_rng(cfg.seed(), trial as u64);
        let mut state = ClassicalGossipState::new(x0.clone());
        for k in 0..=horizon {
            if k > 0 {
                let pair = sample_pair(cfg.graph(), &mut rng);
                match algorithm {
                    Algorithm::A1 => step_a1(&mut state, pair),
                    Algorithm::A1Prime => {
                        let b = rng.random_bool(cfg.beta());
                        step_a1_prime(&mut state, pair, b);
                    }
                    Algorithm::A2 => {
                        let b = rng.random_bool(cfg.beta());
                        step_a2(&mut state, pair, b);
                    }
                    _ => unreachable!(),
                }
            }
            match algorithm {
                Algorithm::A1 => disagreement[k] += state.disagreement(),
                Algorithm::A1Prime => consensus[k] += usize::from(state.is_consensus()),
                Algorithm::A2 => {
                    for i in 0..n {
                        hist[k][i][value_slot[&state.x[i].to_bits()]] += 1;
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    let per_k = (0..=horizon)
        .map(|k| McStepStats {
            k,
            disagreement_mean: (algorithm == Algorithm::A1)
                .then(|| disagreement[k] / trials as f64),
            consensus_fraction: (algorithm == Algorithm::A1Prime)
                .then(|| consensus[k] as f64 / trials as f64),
            entropy_mean_bits: None,
            node_histograms: (algorithm == Algorithm::A2).then(|| {
                hist[k]
                    .iter()
                    .map(|node| node.iter().map(|&c| c as f64 / trials as f64).collect())
                    .collect()
            }),
        })
        .collect();

    Ok(McReport {
        algorithm: algorithm.to_string(),
        seed: cfg.seed(),
        trials,
        horizon,
        support: (algorithm == Algorithm::A2).then_some(support),
        per_k,
    })
}

fn run_quantum_mc(
    cfg: &GossipConfig,
    algorithm: Algorithm,
    rho0: &DensityMatrix,
    trials: usize,
) -> Result<McReport> {
    let n = cfg.graph().node_count();
    if rho0.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rho0.n_qubits(),
        });
    }
    let horizon = cfg.horizon();
    let swaps: HashMap<(usize, usize), SwapOperator> = cfg
        .graph()
        .edges()
        .iter()
        .map(|&(i, j)| Ok(((i, j), SwapOperator::new(n, i + 1, j + 1)?)))
        .collect::<Result<_>>()?;

    let mut entropy_sum = vec![0.0f64; horizon + 1];
    for trial in 0..trials {
        let mut rng = trial_rng(cfg.seed(), trial as u64);
        let mut state = QuantumGossipState::new(rho0.clone());
        for (k, acc) in entropy_sum.iter_mut().enumerate() {
            if k > 0 {
                let pair = sample_pair(cfg.graph(), &mut rng);
                let swap = &swaps[&pair];
                state = match algorithm {
                    Algorithm::Aq1 => step_aq1(&state, swap)?,
                    Algorithm::Aq2 => {
                        let b = rng.random_bool(cfg.beta());
                        step_aq2(&state, swap, b)?
                    }
                    _ => unreachable!(),
                };
            }
            *acc += state.rho.entropy()?.bits();
        }
    }

    let per_k = (0..=horizon)
        .map(|k| McStepStats {
            k,
            disagreement_mean: None,
            consensus_fraction: None,
            entropy_mean_bits: Some(entropy_sum[k] / trials as f64),
            node_histograms: None,
        })
        .collect();

    Ok(McReport {
        algorithm: algorithm.to_string(),
        seed: cfg.seed(),
        trials,
        horizon,
        support: None,
        per_k,
    })
}

/// Mixing diagnostics of the single-particle chain: the second-largest
/// eigenvalue modulus and the max-norm distances `d_k = ||P^k - 11^T/N||`.
#[derive(Debug, Clone, Serialize)]
pub struct ErgodicityReport {
    pub slem: f64,
    /// `d_k` for `k = 1..=k_max`.
    pub distances: Vec<f64>,
    /// Smallest `C` with `d_k <= C slem^k` over the horizon (0 when the
    /// chain projects in one step).
    pub fitted_c: f64,
    /// `slem < 1` and the fitted bound holds with per-step slack 1e-8.
    pub exponential_bound_holds: bool,
}

pub fn ergodicity_report(chain: &SingleParticleChain, k_max: usize) -> Result<ErgodicityReport> {
    let n = chain.n();
    let slem = chain.slem()?;
    let uniform = DMatrix::<f64>::from_element(n, n, 1.0 / n as f64);
    let mut distances = Vec::with_capacity(k_max);
    let mut pk = DMatrix::<f64>::identity(n, n);
    for _ in 1..=k_max {
        pk = &pk * chain.matrix();
        distances.push((&pk - &uniform).amax());
    }
    let (fitted_c, holds) = if slem < 1e-13 {
        (0.0, distances.iter().all(|&d| d <= 1e-8))
    } else {
        let c = distances
            .iter()
            .enumerate()
            .map(|(idx, &d)| d / slem.powi(idx as i32 + 1))
            .fold(0.0f64, f64::max);
        let ok = slem < 1.0
            && distances
                .iter()
                .enumerate()
                .all(|(idx, &d)| d <= c * slem.powi(idx as i32 + 1) + 1e-8);
        (c, ok)
    };
    Ok(ErgodicityReport {
        slem,
        distances,
        fitted_c,
        exponential_bound_holds: holds,
    })
}
