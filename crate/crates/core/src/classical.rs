//! Continuous-time classical consensus flow `dX/dt = -L X`.
//!
//! For a Gaussian initial state the solution `X(t) = e^{-tL} X(0)` stays
//! Gaussian, so propagation is exact through the matrix exponential — there
//! is no ODE stepping and no step-size question. The differential-entropy
//! trajectory is evaluated in the Laplacian eigenbasis, in log space, so it
//! matches the closed form `h(0) - t tr(L) log2(e)` to near machine
//! precision on any horizon without underflow.

use crate::entropy::{self, EntropyValue};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{self, RealSymMatrix};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::f64::consts::LOG2_E;

/// Gaussian law of the node-state vector: mean and covariance.
#[derive(Debug, Clone)]
pub struct GaussianState {
    pub mean: DVector<f64>,
    pub cov: RealSymMatrix,
}

impl GaussianState {
    pub fn new(mean: DVector<f64>, cov: RealSymMatrix) -> Result<Self> {
        if mean.len() != cov.dim() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                got: cov.dim(),
            });
        }
        let (w, _) = linalg::eig_sym(&cov)?;
        if w[0] < -linalg::PSD_TOL {
            return Err(Error::NegativeEigenvalue(w[0]));
        }
        Ok(Self { mean, cov })
    }

    /// i.i.d. state: common mean `mu` and covariance `sigma2 I`.
    pub fn iid(n: usize, mu: f64, sigma2: f64) -> Result<Self> {
        if sigma2 < 0.0 {
            return Err(Error::OutOfRange {
                name: "sigma2",
                value: sigma2,
                range: ">= 0",
            });
        }
        Self::new(
            DVector::from_element(n, mu),
            RealSymMatrix::from_diagonal(&vec![sigma2; n])?,
        )
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Exact propagation of a Gaussian state to time `t`:
/// mean `e^{-tL} mu`, covariance `e^{-tL} Sigma e^{-tL}`.
pub fn propagate_gaussian(g: &Graph, init: &GaussianState, t: f64) -> Result<GaussianState> {
    if t < 0.0 {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            range: ">= 0",
        });
    }
    if init.dim() != g.node_count() {
        return Err(Error::DimensionMismatch {
            expected: g.node_count(),
            got: init.dim(),
        });
    }
    let minus_l = RealSymMatrix::new(-g.laplacian().matrix())?;
    let e = linalg::expm_sym(&minus_l, t)?;
    let mean = e.as_matrix() * &init.mean;
    let cov = RealSymMatrix::new(e.as_matrix() * init.cov.as_matrix() * e.as_matrix())?;
    GaussianState::new(mean, cov)
}

/// Time-indexed differential-entropy samples of the consensus flow.
#[derive(Debug, Clone, Serialize)]
pub struct ClassicalTrajectory {
    pub times: Vec<f64>,
    /// Joint differential entropy of the network state, bits.
    pub joint_entropies: Vec<EntropyValue>,
    /// Average per-node marginal differential entropy, bits. Equals the
    /// joint-per-node value at t = 0 and the degenerate-limit marginal
    /// `0.5 log2(2 pi e sigma^2 / N)` as t grows.
    pub marginal_entropies: Vec<EntropyValue>,
    #[serde(skip)]
    pub states: Option<Vec<GaussianState>>,
}

impl ClassicalTrajectory {
    /// CSV rendering with header `t,h_joint_bits,h_marginal_bits`;
    /// the degenerate sentinel renders as `-inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,h_joint_bits,h_marginal_bits\n");
        for i in 0..self.times.len() {
            out.push_str(&format!(
                "{:.6},{},{}\n",
                self.times[i],
                self.joint_entropies[i].csv_field(),
                self.marginal_entropies[i].csv_field()
            ));
        }
        out
    }

    /// Largest increase between consecutive joint-entropy samples
    /// (non-positive when the trajectory is monotone non-increasing).
    pub fn max_entropy_step(&self) -> f64 {
        self.joint_entropies
            .windows(2)
            .map(|w| w[1].bits() - w[0].bits())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::OutOfRange {
            name: "grid",
            value: 0.0,
            range: "non-empty",
        });
    }
    if grid[0] < 0.0 {
        return Err(Error::OutOfRange {
            name: "grid[0]",
            value: grid[0],
            range: ">= 0",
        });
    }
    for w in grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::OutOfRange {
                name: "grid",
                value: w[1],
                range: "strictly increasing",
            });
        }
    }
    Ok(())
}

/// Uniform sample grid `start, start+step, ..., <= stop` (inclusive within
/// half a step).
pub fn uniform_grid(start: f64, step: f64, stop: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 0.5).floor() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}

/// Differential-entropy trajectory of the consensus flow started from an
/// i.i.d. Gaussian state with variance `sigma2`.
///
/// The joint entropy is evaluated from the Laplacian spectrum in log space:
/// `h(t) = (N/2) log2(2 pi e sigma2) - t log2(e) sum(lambda_i)`, which keeps
/// every sample finite and equal to the closed form. The marginal column
/// averages the per-node entropies `0.5 log2(2 pi e Sigma_ii(t))`.
///
/// A disconnected graph is accepted (the entropy is still non-increasing,
/// only the limit differs); callers may warn via [`Graph::is_connected`].
pub fn differential_entropy_trajectory(
    g: &Graph,
    sigma2: f64,
    grid: &[f64],
) -> Result<ClassicalTrajectory> {
    if sigma2 <= 0.0 {
        return Err(Error::OutOfRange {
            name: "sigma2",
            value: sigma2,
            range: "> 0",
        });
    }
    validate_grid(grid)?;
    let n = g.node_count();
    let lap = g.laplacian();
    let (lambda, v) = linalg::eig_sym(lap.as_sym())?;
    let eig_sum: f64 = lambda.iter().sum();
    let h0 = n as f64 / 2.0 * (entropy::log2_two_pi_e() + sigma2.log2());

    let mut joint = Vec::with_capacity(grid.len());
    let mut marginal = Vec::with_capacity(grid.len());
    let mut states = Vec::with_capacity(grid.len());
    for &t in grid {
        joint.push(EntropyValue::Bits(h0 - t * eig_sum * LOG2_E));

        // Sigma(t) = sigma2 e^{-2tL}; diagonal entries stay away from zero,
        // no underflow concern here.
        let decay: Vec<f64> = lambda.iter().map(|&l| (-2.0 * t * l).exp()).collect();
        let cov = DMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| sigma2 * decay[k] * v[(i, k)] * v[(j, k)])
                .sum::<f64>()
        });
        let mut acc = 0.0;
        for i in 0..n {
            acc += entropy::gaussian_scalar_entropy(cov[(i, i)])?.bits();
        }
        marginal.push(EntropyValue::Bits(acc / n as f64));
        states.push(GaussianState::new(
            DVector::zeros(n),
            RealSymMatrix::new(cov)?,
        )?);
    }

    let traj = ClassicalTrajectory {
        times: grid.to_vec(),
        joint_entropies: joint,
        marginal_entropies: marginal,
        states: Some(states),
    };
    if traj.max_entropy_step() > 1e-9 {
        return Err(Error::Invariant(format!(
            "differential entropy increased by {:.3e} between samples",
            traj.max_entropy_step()
        )));
    }
    Ok(traj)
}

/// Entropy bookkeeping for i.i.d. Bernoulli initial values: the initial
/// joint entropy, and the exact and asymptotic entropy of the binomial
/// consensus limit.
#[derive(Debug, Clone, Serialize)]
pub struct BernoulliLimitReport {
    pub n: usize,
    pub p: f64,
    pub h0_bits: f64,
    pub h_inf_exact_bits: f64,
    pub h_inf_asymptotic_bits: f64,
    /// Whether the limit entropy is strictly below the initial entropy.
    pub entropy_decreased: bool,
}

pub fn bernoulli_limit_report(n: usize, p: f64) -> Result<BernoulliLimitReport> {
    let h0 = entropy::bernoulli_network_entropy(n, p)?.bits();
    let exact = entropy::binomial_entropy_exact(n, p)?.bits();
    let asym = entropy::binomial_entropy_asymptotic(n, p)?.bits();
    Ok(BernoulliLimitReport {
        n,
        p,
        h0_bits: h0,
        h_inf_exact_bits: exact,
        h_inf_asymptotic_bits: asym,
        entropy_decreased: exact < h0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2() -> Graph {
        Graph::new(2, &[(1, 2)]).unwrap()
    }

    #[test]
    fn propagate_at_zero_is_identity() {
        let g = Graph::default_four_node();
        let init = GaussianState::iid(4, 0.7, 1.3).unwrap();
        let out = propagate_gaussian(&g, &init, 0.0).unwrap();
        assert!((out.mean.clone() - &init.mean).amax() < 1e-12);
        assert!((out.cov.as_matrix() - init.cov.as_matrix()).amax() < 1e-12);
    }

    #[test]
    fn propagate_rejects_negative_time() {
        let g = k2();
        let init = GaussianState::iid(2, 0.0, 1.0).unwrap();
        assert!(propagate_gaussian(&g, &init, -0.1).is_err());
    }

    #[test]
    fn gaussian_state_rejects_non_psd_covariance() {
        let cov = RealSymMatrix::from_diagonal(&[1.0, -0.2]).unwrap();
        assert!(GaussianState::new(DVector::zeros(2), cov).is_err());
    }

    #[test]
    fn propagate_k2_closed_form() {
        // Hand-diagonalized single edge: e^{-tL} = [[a, b], [b, a]] with
        // a = (1+e^{-2t})/2, b = (1-e^{-2t})/2; covariance = e^{-2tL}.
        let g = k2();
        let init = GaussianState::iid(2, 0.0, 1.0).unwrap();
        let t = 0.6;
        let out = propagate_gaussian(&g, &init, t).unwrap();
        let a = 0.5 * (1.0 + (-4.0 * t).exp());
        let b = 0.5 * (1.0 - (-4.0 * t).exp());
        assert!((out.cov.as_matrix()[(0, 0)] - a).abs() < 1e-12);
        assert!((out.cov.as_matrix()[(0, 1)] - b).abs() < 1e-12);
    }

    #[test]
    fn propagate_long_horizon_reaches_consensus_limit() {
        let g = Graph::default_four_node();
        let mean0 = DVector::from_row_slice(&[1.0, 2.0, 3.0, 6.0]);
        let init = GaussianState::new(
            mean0.clone(),
            RealSymMatrix::from_diagonal(&[1.0; 4]).unwrap(),
        )
        .unwrap();
        let out = propagate_gaussian(&g, &init, 50.0).unwrap();
        let avg = mean0.mean();
        for i in 0..4 {
            assert!((out.mean[i] - avg).abs() < 1e-10);
            for j in 0..4 {
                assert!((out.cov.as_matrix()[(i, j)] - 0.25).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn propagation_preserves_mean_average() {
        let g = Graph::default_four_node();
        let mean0 = DVector::from_row_slice(&[0.3, -1.2, 2.5, 0.4]);
        let init = GaussianState::new(
            mean0.clone(),
            RealSymMatrix::from_diagonal(&[2.0; 4]).unwrap(),
        )
        .unwrap();
        for &t in &[0.1, 1.0, 7.5] {
            let out = propagate_gaussian(&g, &init, t).unwrap();
            assert!((out.mean.mean() - mean0.mean()).abs() < 1e-10);
        }
    }

    #[test]
    fn covariance_limit_bounded_by_fiedler_rate() {
        let g = Graph::default_four_node();
        let sigma2 = 1.7;
        let n = g.node_count();
        let lambda2 = g.laplacian().fiedler_value();
        let init = GaussianState::iid(n, 0.0, sigma2).unwrap();
        for &t in &[0.5, 1.0, 2.0, 4.0] {
            let out = propagate_gaussian(&g, &init, t).unwrap();
            let mut max_dev = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    let dev = (out.cov.as_matrix()[(i, j)] - sigma2 / n as f64).abs();
                    max_dev = max_dev.max(dev);
                }
            }
            assert!(max_dev <= sigma2 * (-2.0 * lambda2 * t).exp() * n as f64);
        }
    }

    #[test]
    fn trajectory_single_sample_matches_initial_entropy() {
        let g = Graph::default_four_node();
        let traj = differential_entropy_trajectory(&g, 1.0, &[0.0]).unwrap();
        let want = 2.0 * (2.0 * std::f64::consts::PI * std::f64::consts::E).log2();
        assert!((traj.joint_entropies[0].bits() - want).abs() < 1e-12);
        assert!((traj.marginal_entropies[0].bits() - want / 4.0).abs() < 1e-12);
    }

    #[test]
    fn trajectory_slope_is_trace_times_log2e() {
        let g = Graph::default_four_node();
        let grid = uniform_grid(0.0, 0.1, 5.0);
        let traj = differential_entropy_trajectory(&g, 1.0, &grid).unwrap();
        let tr = g.laplacian().trace();
        for w in traj.joint_entropies.windows(2) {
            let slope = (w[1].bits() - w[0].bits()) / 0.1;
            assert!((slope + tr * LOG2_E).abs() < 1e-8);
        }
    }

    #[test]
    fn trajectory_matches_generic_covariance_entropy_at_small_times() {
        // Two routes to the same number: the spectral log-space evaluation
        // and the generic covariance log-determinant path.
        let g = Graph::default_four_node();
        let sigma2 = 0.8;
        let grid = [0.0, 0.2, 0.5, 1.0];
        let traj = differential_entropy_trajectory(&g, sigma2, &grid).unwrap();
        let init = GaussianState::iid(4, 0.0, sigma2).unwrap();
        let snapshots = traj.states.as_ref().unwrap();
        for (i, &t) in grid.iter().enumerate() {
            let state = propagate_gaussian(&g, &init, t).unwrap();
            let generic = entropy::gaussian_differential_entropy(&state.cov)
                .unwrap()
                .bits();
            assert!((generic - traj.joint_entropies[i].bits()).abs() < 1e-8);
            let dev = (snapshots[i].cov.as_matrix() - state.cov.as_matrix()).amax();
            assert!(dev < 1e-12);
        }
    }

    #[test]
    fn trajectory_marginal_approaches_degenerate_limit() {
        let g = Graph::default_four_node();
        let sigma2 = 1.0;
        let traj = differential_entropy_trajectory(&g, sigma2, &[0.0, 30.0]).unwrap();
        let want = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * sigma2 / 4.0).log2();
        assert!((traj.marginal_entropies[1].bits() - want).abs() < 1e-9);
    }

    #[test]
    fn trajectory_is_monotone_on_disconnected_graph_too() {
        let g = Graph::new(4, &[(1, 2), (3, 4)]).unwrap();
        assert!(!g.is_connected());
        let grid = uniform_grid(0.0, 0.25, 3.0);
        let traj = differential_entropy_trajectory(&g, 1.0, &grid).unwrap();
        assert!(traj.max_entropy_step() <= 1e-9);
    }

    #[test]
    fn trajectory_csv_shape() {
        let g = k2();
        let traj = differential_entropy_trajectory(&g, 1.0, &[0.0, 0.5]).unwrap();
        let csv = traj.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,h_joint_bits,h_marginal_bits");
        assert_eq!(lines.count(), 2);
    }

    #[test]
    fn csv_renders_neg_inf_sentinel() {
        let traj = ClassicalTrajectory {
            times: vec![0.0],
            joint_entropies: vec![EntropyValue::NegInf],
            marginal_entropies: vec![EntropyValue::Bits(1.0)],
            states: None,
        };
        assert!(traj.to_csv().contains(",-inf,"));
    }

    #[test]
    fn bernoulli_report_values() {
        let r = bernoulli_limit_report(4, 0.5).unwrap();
        assert!((r.h0_bits - 4.0).abs() < 1e-12);
        // Oracle: direct 5-term sum over (1,4,6,4,1)/16.
        let direct: f64 = [1.0f64, 4.0, 6.0, 4.0, 1.0]
            .iter()
            .map(|c| {
                let b = c / 16.0;
                -b * b.log2()
            })
            .sum();
        assert!((r.h_inf_exact_bits - direct).abs() < 1e-12);
        assert!(r.entropy_decreased);

        let single = bernoulli_limit_report(1, 0.5).unwrap();
        assert!((single.h0_bits - 1.0).abs() < 1e-12);
        assert!((single.h_inf_exact_bits - 1.0).abs() < 1e-12);
        assert!(!single.entropy_decreased);

        let big = bernoulli_limit_report(100, 0.3).unwrap();
        let asym_expect =
            0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * 21.0).log2();
        assert!((big.h_inf_asymptotic_bits - asym_expect).abs() < 1e-12);
        assert!(big.h_inf_exact_bits < big.h0_bits / 10.0);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_connected_graph() -> impl Strategy<Value = Graph> {
            (2usize..=8, any::<u64>()).prop_map(|(n, seed)| {
                crate::acceptance::random_connected_graph(n, seed)
            })
        }

        /// Strictly increasing nonnegative grid with irregular spacing.
        fn arb_grid() -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(0.01f64..1.5, 1..12).prop_map(|steps| {
                let mut t = 0.0;
                let mut grid = vec![0.0];
                for s in steps {
                    t += s;
                    grid.push(t);
                }
                grid
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn entropy_trajectory_never_increases(
                g in arb_connected_graph(),
                sigma2 in 0.25f64..4.0,
                grid in arb_grid(),
            ) {
                let traj = differential_entropy_trajectory(&g, sigma2, &grid).unwrap();
                prop_assert!(traj.max_entropy_step() <= 1e-9);
            }

            #[test]
            fn trajectory_matches_closed_form(
                g in arb_connected_graph(),
                sigma2 in 0.25f64..4.0,
            ) {
                let grid = uniform_grid(0.0, 0.5, 5.0);
                let traj = differential_entropy_trajectory(&g, sigma2, &grid).unwrap();
                let n = g.node_count() as f64;
                let h0 = n / 2.0
                    * (2.0 * std::f64::consts::PI * std::f64::consts::E * sigma2).log2();
                let tr = g.laplacian().trace();
                for (i, &t) in grid.iter().enumerate() {
                    let want = h0 - t * tr * LOG2_E;
                    prop_assert!((traj.joint_entropies[i].bits() - want).abs() < 1e-8);
                }
            }
        }
    }
}
