//! Continuous-time quantum consensus flow
//! `d rho/dt = sum_{{j,k} in E} (U_jk rho U_jk' - rho)` over the swap
//! operators of an interaction graph, plus the permutation-symmetrized
//! limit and a certificate that the flow stays inside the convex hull of
//! the permutation orbit of any earlier state.
//!
//! Qubit labels are 1-based in the public API (matching the rest of the
//! crate's I/O convention); qubit 1 is the most significant bit of the
//! computational-basis index.

use crate::entropy::{self, EntropyValue};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{self, HermitianMatrix, RealSymMatrix, PSD_TOL};
use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

type CMatrix = DMatrix<Complex64>;
type CVector = DVector<Complex64>;

/// Hard cap on the permutation enumeration (N! terms on 2^N x 2^N
/// matrices).
pub const MAX_SYMMETRIZE_QUBITS: usize = 6;
/// Cap for the convex-mixture certificate (N! columns in the solve).
pub const MAX_MIXTURE_QUBITS: usize = 4;
/// Cap for the vectorized-generator exact propagator (4^N x 4^N dense).
pub const MAX_SUPEROP_QUBITS: usize = 3;
/// Default RK4 step.
pub const DEFAULT_STEP: f64 = 0.01;
/// Per-step pre-correction trace drift above which integration aborts.
pub const DRIFT_BOUND: f64 = 1e-8;

/// Density matrix of an `n`-qubit network: Hermitian, unit trace, PSD
/// within tolerance.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: HermitianMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let dim = matrix.dim();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: dim.next_power_of_two().max(2),
                got: dim,
            });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > linalg::TRACE_TOL || trace.im.abs() > linalg::TRACE_TOL {
            return Err(Error::TraceNotOne(trace.re));
        }
        let spectrum = linalg::eigvals_hermitian(&matrix)?;
        if spectrum[0] < -PSD_TOL {
            return Err(Error::NegativeEigenvalue(spectrum[0]));
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            matrix,
        })
    }

    pub fn from_raw(m: CMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn raw(&self) -> &CMatrix {
        self.matrix.as_matrix()
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> Result<EntropyValue> {
        entropy::von_neumann(&self.matrix)
    }

    /// Eigenvalues in ascending order.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        linalg::eigvals_hermitian(&self.matrix)
    }

    /// Largest absolute entry-wise difference to another state.
    pub fn max_diff(&self, other: &DensityMatrix) -> f64 {
        let mut dev = 0.0f64;
        let (a, b) = (self.raw(), other.raw());
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                dev = dev.max((a[(i, j)] - b[(i, j)]).norm());
            }
        }
        dev
    }
}

fn check_qubit_count(dim_qubits: usize, graph_nodes: usize) -> Result<()> {
    if dim_qubits != graph_nodes {
        return Err(Error::DimensionMismatch {
            expected: graph_nodes,
            got: dim_qubits,
        });
    }
    Ok(())
}

/// Conjugation `U rho U'` for a basis-permutation unitary given as an index
/// map `p` with `U|m> = |p(m)>`. Pure index shuffling, no arithmetic.
fn conjugate_by_basis_map(map: &[usize], rho: &CMatrix) -> CMatrix {
    let d = rho.nrows();
    let mut out = CMatrix::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            out[(map[a], map[b])] = rho[(a, b)];
        }
    }
    out
}

fn permutation_matrix(map: &[usize]) -> DMatrix<f64> {
    let d = map.len();
    let mut m = DMatrix::zeros(d, d);
    for (src, &dst) in map.iter().enumerate() {
        m[(dst, src)] = 1.0;
    }
    m
}

/// Swap operator `U_jk` exchanging the tensor factors of qubits `j` and `k`
/// (1-based); a real 0/1 permutation matrix on the computational basis,
/// unitary and involutive.
#[derive(Debug, Clone)]
pub struct SwapOperator {
    n_qubits: usize,
    pair: (usize, usize),
    map: Vec<usize>,
}

impl SwapOperator {
    pub fn new(n_qubits: usize, j: usize, k: usize) -> Result<Self> {
        if j == k || j == 0 || k == 0 || j > n_qubits || k > n_qubits {
            return Err(Error::BadQubitPair(j, k, n_qubits));
        }
        let (j, k) = (j.min(k), j.max(k));
        let dim = 1usize << n_qubits;
        let (bj, bk) = (n_qubits - j, n_qubits - k);
        let map = (0..dim)
            .map(|m| {
                let x = (m >> bj) & 1;
                let y = (m >> bk) & 1;
                (m & !(1 << bj) & !(1 << bk)) | (y << bj) | (x << bk)
            })
            .collect();
        Ok(Self {
            n_qubits,
            pair: (j, k),
            map,
        })
    }

    /// The swapped qubit pair, 1-based.
    pub fn pair(&self) -> (usize, usize) {
        self.pair
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Image of a basis index under the swap.
    pub fn apply_index(&self, m: usize) -> usize {
        self.map[m]
    }

    /// Dense 0/1 matrix representation.
    pub fn matrix(&self) -> DMatrix<f64> {
        permutation_matrix(&self.map)
    }

    /// `U rho U'`.
    pub fn conjugate(&self, rho: &CMatrix) -> CMatrix {
        conjugate_by_basis_map(&self.map, rho)
    }
}

/// Convenience constructor matching the operation vocabulary of the crate.
pub fn swap_operator(n_qubits: usize, j: usize, k: usize) -> Result<SwapOperator> {
    SwapOperator::new(n_qubits, j, k)
}

/// Unitary representation of a permutation of qubit positions: the content
/// of qubit `i` moves to position `perm[i]` (0-based here; display is
/// 1-based elsewhere). Satisfies `U_pi U_sigma = U_{pi o sigma}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationOperator {
    n_qubits: usize,
    perm: Vec<usize>,
    map: Vec<usize>,
}

impl PermutationOperator {
    pub fn new(n_qubits: usize, perm: Vec<usize>) -> Result<Self> {
        if perm.len() != n_qubits {
            return Err(Error::DimensionMismatch {
                expected: n_qubits,
                got: perm.len(),
            });
        }
        let mut seen = vec![false; n_qubits];
        for &p in &perm {
            if p >= n_qubits || seen[p] {
                return Err(Error::Invariant(format!(
                    "not a permutation of 0..{n_qubits}: {perm:?}"
                )));
            }
            seen[p] = true;
        }
        let dim = 1usize << n_qubits;
        let map = (0..dim)
            .map(|m| {
                let mut out = 0usize;
                for (i, &target) in perm.iter().enumerate() {
                    let bit = (m >> (n_qubits - 1 - i)) & 1;
                    out |= bit << (n_qubits - 1 - target);
                }
                out
            })
            .collect();
        Ok(Self {
            n_qubits,
            perm,
            map,
        })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::new(n_qubits, (0..n_qubits).collect()).expect("identity is a permutation")
    }

    pub fn qubit_map(&self) -> &[usize] {
        &self.perm
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p)
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        permutation_matrix(&self.map)
    }

    pub fn conjugate(&self, rho: &CMatrix) -> CMatrix {
        conjugate_by_basis_map(&self.map, rho)
    }

    /// Composition `self o other` (apply `other` first).
    pub fn compose(&self, other: &PermutationOperator) -> Result<PermutationOperator> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: other.n_qubits,
            });
        }
        let perm = (0..self.n_qubits)
            .map(|i| self.perm[other.perm[i]])
            .collect();
        PermutationOperator::new(self.n_qubits, perm)
    }
}

/// All `n!` permutation operators, lexicographic, identity first.
pub fn all_permutation_operators(n_qubits: usize) -> Result<Vec<PermutationOperator>> {
    if n_qubits > MAX_SYMMETRIZE_QUBITS {
        return Err(Error::TooLarge {
            what: "qubits",
            n: n_qubits,
            max: MAX_SYMMETRIZE_QUBITS,
        });
    }
    (0..n_qubits)
        .permutations(n_qubits)
        .map(|p| PermutationOperator::new(n_qubits, p))
        .collect()
}

/// Pure product state from a ket string over `{0, 1, +, -}`, one character
/// per qubit, e.g. `"01+-"`.
pub fn qstate_from_kets(kets: &str) -> Result<DensityMatrix> {
    if kets.is_empty() {
        return Err(Error::OutOfRange {
            name: "ket",
            value: 0.0,
            range: "at least one qubit",
        });
    }
    let mut amp: CVector = CVector::from_element(1, Complex64::new(1.0, 0.0));
    for c in kets.chars() {
        let factor: [f64; 2] = match c {
            '0' => [1.0, 0.0],
            '1' => [0.0, 1.0],
            '+' => [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
            '-' => [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
            other => return Err(Error::UnknownKet(other)),
        };
        let mut next = CVector::zeros(amp.len() * 2);
        for (i, a) in amp.iter().enumerate() {
            next[2 * i] = a * factor[0];
            next[2 * i + 1] = a * factor[1];
        }
        amp = next;
    }
    let rho = &amp * amp.adjoint();
    DensityMatrix::from_raw(rho)
}

/// Right-hand side of the consensus flow,
/// `sum_swaps (U rho U' - rho)`, on raw matrices.
fn flow_rhs(swaps: &[SwapOperator], rho: &CMatrix) -> CMatrix {
    let mut out = rho * Complex64::new(-(swaps.len() as f64), 0.0);
    for s in swaps {
        out += s.conjugate(rho);
    }
    out
}

/// `d rho/dt` of the consensus flow at a given state. Exposed so the
/// fixed-point property of the symmetrized limit can be checked directly.
pub fn flow_derivative(g: &Graph, rho: &DensityMatrix) -> Result<CMatrix> {
    check_qubit_count(rho.n_qubits(), g.node_count())?;
    let swaps = edge_swaps(g)?;
    Ok(flow_rhs(&swaps, rho.raw()))
}

fn edge_swaps(g: &Graph) -> Result<Vec<SwapOperator>> {
    g.edges()
        .iter()
        .map(|&(i, j)| SwapOperator::new(g.node_count(), i + 1, j + 1))
        .collect()
}

/// One sample of an integrated quantum trajectory.
#[derive(Debug, Clone)]
pub struct QuantumSample {
    pub t: f64,
    pub state: DensityMatrix,
    pub entropy: EntropyValue,
    /// Largest pre-correction trace drift of any step since the previous
    /// sample.
    pub max_step_drift: f64,
}

#[derive(Debug, Clone)]
pub struct QuantumTrajectory {
    pub samples: Vec<QuantumSample>,
}

impl QuantumTrajectory {
    /// CSV rendering with header `t,S_bits,trace_drift`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,S_bits,trace_drift\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{:.6},{},{:.3e}\n",
                s.t,
                s.entropy.csv_field(),
                s.max_step_drift
            ));
        }
        out
    }

    /// Smallest increment between consecutive entropy samples (negative if
    /// the trajectory ever decreases).
    pub fn min_entropy_step(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| w[1].entropy.bits() - w[0].entropy.bits())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_drift(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.max_step_drift)
            .fold(0.0, f64::max)
    }

    pub fn final_state(&self) -> &DensityMatrix {
        &self.samples.last().expect("non-empty trajectory").state
    }
}

fn rk4_step(swaps: &[SwapOperator], rho: &CMatrix, h: f64) -> CMatrix {
    let half = Complex64::new(h / 2.0, 0.0);
    let sixth = Complex64::new(h / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    let k1 = flow_rhs(swaps, rho);
    let k2 = flow_rhs(swaps, &(rho + &k1 * half));
    let k3 = flow_rhs(swaps, &(rho + &k2 * half));
    let k4 = flow_rhs(swaps, &(rho + &k3 * Complex64::new(h, 0.0)));
    rho + (k1 + k2 * two + k3 * two + k4) * sixth
}

/// Fixed-step RK4 integration of the consensus flow, sampled at the given
/// increasing time grid.
///
/// After every step the state is re-Hermitized (`(rho + rho')/2`) and its
/// trace renormalized; if the pre-correction trace drift of a step exceeds
/// [`DRIFT_BOUND`] the integration aborts with an error advising a smaller
/// step.
pub fn integrate_quantum(
    g: &Graph,
    rho0: &DensityMatrix,
    grid: &[f64],
    step: f64,
) -> Result<QuantumTrajectory> {
    check_qubit_count(rho0.n_qubits(), g.node_count())?;
    if step <= 0.0 {
        return Err(Error::OutOfRange {
            name: "step",
            value: step,
            range: "> 0",
        });
    }
    crate::classical::validate_grid(grid)?;

    let swaps = edge_swaps(g)?;
    let mut rho = rho0.raw().clone();
    let mut t_cur = 0.0f64;
    let mut samples = Vec::with_capacity(grid.len());

    for &target in grid {
        let mut max_drift = 0.0f64;
        let span = target - t_cur;
        let n_full = (span / step + 1e-9).floor() as usize;
        let remainder = span - n_full as f64 * step;
        let mut advance = |h: f64, rho: &mut CMatrix| -> Result<()> {
            let next = rk4_step(&swaps, rho, h);
            let trace = next.trace();
            let drift = (trace.re - 1.0).abs().max(trace.im.abs());
            if drift > DRIFT_BOUND {
                return Err(Error::StepTooLarge {
                    drift,
                    bound: DRIFT_BOUND,
                });
            }
            max_drift = max_drift.max(drift);
            let herm = (&next + next.adjoint()) * Complex64::new(0.5, 0.0);
            let tr = herm.trace().re;
            *rho = herm / Complex64::new(tr, 0.0);
            Ok(())
        };
        for _ in 0..n_full {
            advance(step, &mut rho)?;
        }
        if remainder > 1e-12 {
            advance(remainder, &mut rho)?;
        }
        t_cur = target;

        let state = DensityMatrix::from_raw(rho.clone())?;
        let entropy = state.entropy()?;
        samples.push(QuantumSample {
            t: target,
            state,
            entropy,
            max_step_drift: max_drift,
        });
    }
    Ok(QuantumTrajectory { samples })
}

/// Uniform average of `rho0` over all `n!` permutation conjugations — the
/// consensus limit of the flow. The result is verified invariant under
/// every pairwise swap within 1e-10.
pub fn symmetrized_limit(rho0: &DensityMatrix, n_qubits: usize) -> Result<DensityMatrix> {
    check_qubit_count(rho0.n_qubits(), n_qubits)?;
    let perms = all_permutation_operators(n_qubits)?;
    let dim = rho0.dim();
    let mut acc = CMatrix::zeros(dim, dim);
    for p in &perms {
        acc += p.conjugate(rho0.raw());
    }
    acc /= Complex64::new(perms.len() as f64, 0.0);
    let result = DensityMatrix::from_raw(acc)?;

    for j in 1..=n_qubits {
        for k in (j + 1)..=n_qubits {
            let swap = SwapOperator::new(n_qubits, j, k)?;
            let conj = swap.conjugate(result.raw());
            let mut dev = 0.0f64;
            for a in 0..dim {
                for b in 0..dim {
                    dev = dev.max((conj[(a, b)] - result.raw()[(a, b)]).norm());
                }
            }
            if dev > 1e-10 {
                return Err(Error::Invariant(format!(
                    "symmetrized state moves under swap ({j},{k}) by {dev:.3e}"
                )));
            }
        }
    }
    Ok(result)
}

/// Certificate that a target state lies in the convex hull of the
/// permutation orbit of a base state.
#[derive(Debug, Clone)]
pub struct MixtureCertificate {
    /// Weights aligned with [`all_permutation_operators`] order (identity
    /// first).
    pub weights: Vec<f64>,
    /// Frobenius norm of `sum_k w_k U_k rho U_k' - target`.
    pub residual: f64,
    pub weight_sum: f64,
    /// Residual below 1e-6 with weights in `[0,1]` summing to 1 within
    /// 1e-8.
    pub certified: bool,
}

/// Soft weight on the sum-to-one row appended to the nonnegative
/// least-squares system.
const SUM_ROW_WEIGHT: f64 = 10.0;

/// Expresses `target` as a nonnegative mixture of permutation conjugations
/// of `base`, by nonnegative least squares over the orbit.
pub fn certify_permutation_mixture(
    base: &DensityMatrix,
    target: &DensityMatrix,
) -> Result<MixtureCertificate> {
    let n_qubits = base.n_qubits();
    if n_qubits > MAX_MIXTURE_QUBITS {
        return Err(Error::TooLarge {
            what: "qubits",
            n: n_qubits,
            max: MAX_MIXTURE_QUBITS,
        });
    }
    if target.dim() != base.dim() {
        return Err(Error::DimensionMismatch {
            expected: base.dim(),
            got: target.dim(),
        });
    }
    let perms = all_permutation_operators(n_qubits)?;
    let d = base.dim();
    let rows = 2 * d * d + 1;
    let cols = perms.len();

    let orbit: Vec<CMatrix> = perms.iter().map(|p| p.conjugate(base.raw())).collect();
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    for (c, sigma) in orbit.iter().enumerate() {
        for i in 0..d {
            for j in 0..d {
                a[(i * d + j, c)] = sigma[(i, j)].re;
                a[(d * d + i * d + j, c)] = sigma[(i, j)].im;
            }
        }
        a[(rows - 1, c)] = SUM_ROW_WEIGHT;
    }
    let mut b = DVector::<f64>::zeros(rows);
    for i in 0..d {
        for j in 0..d {
            b[i * d + j] = target.raw()[(i, j)].re;
            b[d * d + i * d + j] = target.raw()[(i, j)].im;
        }
    }
    b[rows - 1] = SUM_ROW_WEIGHT;

    let x = linalg::nnls(&a, &b);
    let weights: Vec<f64> = x.iter().copied().collect();
    let weight_sum: f64 = weights.iter().sum();

    let mut mix = CMatrix::zeros(d, d);
    for (w, sigma) in weights.iter().zip(&orbit) {
        mix += sigma * Complex64::new(*w, 0.0);
    }
    let residual = (&mix - target.raw()).norm();
    let certified = residual < 1e-6
        && weights.iter().all(|&w| (-1e-12..=1.0 + 1e-8).contains(&w))
        && (weight_sum - 1.0).abs() <= 1e-8;

    Ok(MixtureCertificate {
        weights,
        residual,
        weight_sum,
        certified,
    })
}

/// Integrates the flow to `s` and `s + eps` and certifies that the later
/// state is a convex mixture of permutation conjugations of the earlier
/// one. A failed certificate flags the integration, not the mixture
/// property itself.
pub fn mixture_decomposition_check(
    g: &Graph,
    rho0: &DensityMatrix,
    s: f64,
    eps: f64,
) -> Result<MixtureCertificate> {
    if s < 0.0 || eps < 0.0 {
        return Err(Error::OutOfRange {
            name: "s/eps",
            value: s.min(eps),
            range: ">= 0",
        });
    }
    let rho_s = if s == 0.0 {
        rho0.clone()
    } else {
        integrate_quantum(g, rho0, &[s], DEFAULT_STEP)?
            .final_state()
            .clone()
    };
    let rho_later = if eps == 0.0 {
        rho_s.clone()
    } else {
        integrate_quantum(g, &rho_s, &[eps], DEFAULT_STEP)?
            .final_state()
            .clone()
    };
    certify_permutation_mixture(&rho_s, &rho_later)
}

/// Exact propagation through the vectorized generator: stacks `rho` as a
/// column vector, builds the `4^N x 4^N` generator of the flow, and applies
/// its matrix exponential via the symmetric eigendecomposition. Serves as
/// the integration reference for small networks.
pub fn propagate_superoperator(g: &Graph, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    check_qubit_count(rho0.n_qubits(), g.node_count())?;
    if rho0.n_qubits() > MAX_SUPEROP_QUBITS {
        return Err(Error::TooLarge {
            what: "qubits",
            n: rho0.n_qubits(),
            max: MAX_SUPEROP_QUBITS,
        });
    }
    if t < 0.0 {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            range: ">= 0",
        });
    }
    let swaps = edge_swaps(g)?;
    let d = rho0.dim();
    let dd = d * d;

    // Column-major stacking: vec index a + d*b holds rho[(a, b)]. Each swap
    // contributes the permutation (a, b) -> (p(a), p(b)), an involution, so
    // the generator is real symmetric.
    let mut gen = DMatrix::<f64>::zeros(dd, dd);
    for s in &swaps {
        for a in 0..d {
            for b in 0..d {
                let src = a + d * b;
                let dst = s.apply_index(a) + d * s.apply_index(b);
                gen[(dst, src)] += 1.0;
                gen[(src, src)] -= 1.0;
            }
        }
    }
    let gen = RealSymMatrix::new(gen)?;
    let expm = linalg::expm_sym(&gen, t)?;

    let mut vec_re = DVector::<f64>::zeros(dd);
    let mut vec_im = DVector::<f64>::zeros(dd);
    for a in 0..d {
        for b in 0..d {
            vec_re[a + d * b] = rho0.raw()[(a, b)].re;
            vec_im[a + d * b] = rho0.raw()[(a, b)].im;
        }
    }
    let out_re = expm.as_matrix() * vec_re;
    let out_im = expm.as_matrix() * vec_im;
    let mut rho = CMatrix::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            rho[(a, b)] = Complex64::new(out_re[a + d * b], out_im[a + d * b]);
        }
    }
    let herm = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let tr = herm.trace().re;
    DensityMatrix::from_raw(herm / Complex64::new(tr, 0.0))
}
