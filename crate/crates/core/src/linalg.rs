//! Dense symmetric/Hermitian linear algebra used throughout the crate:
//! eigendecomposition, matrix exponentials of symmetric matrices, and
//! base-2 log-determinants.
//!
//! Backed by nalgebra's self-adjoint eigensolver; the contracts here are the
//! post-conditions, not the method.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Eigenvalues with magnitude at or below this are treated as exactly zero
/// in entropy and log-determinant computations.
pub const EIG_CLIP: f64 = 1e-12;

/// Eigenvalues are allowed to dip this far below zero before a matrix is
/// rejected as non-PSD (density-matrix spectra drift slightly negative).
pub const PSD_TOL: f64 = 1e-10;

/// Maximum allowed deviation from Hermitian symmetry on construction.
pub const HERM_TOL: f64 = 1e-12;

/// Maximum allowed deviation of a density-matrix trace from one.
pub const TRACE_TOL: f64 = 1e-9;

/// Real symmetric matrix; construction symmetrizes `(A + A^T)/2` and rejects
/// non-finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSymMatrix {
    m: DMatrix<f64>,
}

impl RealSymMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare(m.nrows(), m.ncols()));
        }
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if !m[(i, j)].is_finite() {
                    return Err(Error::NonFinite(i, j));
                }
            }
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(Self { m: sym })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: DMatrix::identity(n, n),
        }
    }

    /// Diagonal matrix with the given entries.
    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_row_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }
}

/// Complex matrix verified Hermitian within [`HERM_TOL`]; stores `(A+A†)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    m: DMatrix<Complex64>,
}

impl HermitianMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare(m.nrows(), m.ncols()));
        }
        let mut dev = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let e = m[(i, j)];
                if !e.re.is_finite() || !e.im.is_finite() {
                    return Err(Error::NonFinite(i, j));
                }
                dev = dev.max((e - m[(j, i)].conj()).norm());
            }
        }
        if dev > HERM_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(Self { m: herm })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }
}

/// Base-2 log-determinant; `NegInf` signals a (numerically) singular matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogDet {
    Finite(f64),
    NegInf,
}

/// Eigendecomposition of a real symmetric matrix.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as columns, so `A = V diag(w) V^T`.
pub fn eig_sym(a: &RealSymMatrix) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.dim();
    let eig = a.m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        vectors.column_mut(col).copy_from(&eig.eigenvectors.column(src));
    }
    Ok((eigenvalues, vectors))
}

/// Matrix exponential `e^{tA}` of a symmetric matrix via its spectrum.
///
/// `t = 0` returns the exact identity.
pub fn expm_sym(a: &RealSymMatrix, t: f64) -> Result<RealSymMatrix> {
    if t == 0.0 {
        return Ok(RealSymMatrix::identity(a.dim()));
    }
    let (w, v) = eig_sym(a)?;
    let exp_diag = DMatrix::from_diagonal(&DVector::from_iterator(
        w.len(),
        w.iter().map(|&l| (t * l).exp()),
    ));
    let m = &v * exp_diag * v.transpose();
    RealSymMatrix::new(m)
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub fn eigvals_hermitian(a: &HermitianMatrix) -> Result<Vec<f64>> {
    let eig = a.m.clone().symmetric_eigen();
    let mut w: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    w.sort_by(f64::total_cmp);
    Ok(w)
}

/// Base-2 log-determinant of a PSD symmetric matrix.
///
/// Eigenvalues at or below [`EIG_CLIP`] count as zero and yield
/// [`LogDet::NegInf`]; eigenvalues below `-`[`PSD_TOL`] are an error.
pub fn log_det_sym(a: &RealSymMatrix) -> Result<LogDet> {
    let (w, _) = eig_sym(a)?;
    log_det_from_eigenvalues(&w)
}

/// Log-determinant from a precomputed spectrum, with the same clip rule.
pub fn log_det_from_eigenvalues(w: &[f64]) -> Result<LogDet> {
    let mut sum = 0.0;
    for &l in w {
        if l < -PSD_TOL {
            return Err(Error::NegativeEigenvalue(l));
        }
        if l <= EIG_CLIP {
            return Ok(LogDet::NegInf);
        }
        sum += l.log2();
    }
    Ok(LogDet::Finite(sum))
}

/// Nonnegative least squares `min ||Ax - b||` s.t. `x >= 0` (Lawson-Hanson
/// active set). Inner unconstrained solves use SVD, which tolerates the
/// duplicate columns that show up when a state is invariant under some
/// permutations.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-12 * (1.0 + b.norm());
    let max_outer = 3 * n + 10;

    for _ in 0..max_outer {
        let residual = b - a * &x;
        let grad = a.transpose() * residual;
        let candidate = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| grad[i].total_cmp(&grad[j]));
        let Some(j_star) = candidate else { break };
        if grad[j_star] <= tol {
            break;
        }
        passive[j_star] = true;

        loop {
            let cols: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let sub = a.select_columns(cols.iter());
            let z_sub = sub
                .svd(true, true)
                .solve(b, 1e-12)
                .expect("SVD least-squares solve");
            let mut z = DVector::<f64>::zeros(n);
            for (k, &j) in cols.iter().enumerate() {
                z[j] = z_sub[k];
            }
            if cols.iter().all(|&j| z[j] > tol) {
                x = z;
                break;
            }
            // Step toward z until the first passive coordinate hits zero.
            let mut alpha = f64::INFINITY;
            for &j in &cols {
                if z[j] <= tol {
                    let denom = x[j] - z[j];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            let alpha = alpha.clamp(0.0, 1.0);
            x = &x + alpha * (&z - &x);
            for &j in &cols {
                if x[j] <= tol {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(data: &[&[f64]]) -> RealSymMatrix {
        let n = data.len();
        RealSymMatrix::new(DMatrix::from_fn(n, n, |i, j| data[i][j])).unwrap()
    }

    #[test]
    fn eig_identity() {
        let (w, _) = eig_sym(&RealSymMatrix::identity(3)).unwrap();
        for l in w {
            assert!((l - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eig_triangle_laplacian() {
        // K3 Laplacian spectrum is {0, 3, 3}.
        let a = sym(&[&[2.0, -1.0, -1.0], &[-1.0, 2.0, -1.0], &[-1.0, -1.0, 2.0]]);
        let (w, _) = eig_sym(&a).unwrap();
        let expect = [0.0, 3.0, 3.0];
        for (got, want) in w.iter().zip(expect) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn eig_diagonal() {
        let a = RealSymMatrix::from_diagonal(&[2.0, 5.0]).unwrap();
        let (w, v) = eig_sym(&a).unwrap();
        assert!((w[0] - 2.0).abs() < 1e-12 && (w[1] - 5.0).abs() < 1e-12);
        for col in 0..2 {
            let c = v.column(col);
            assert!((c.norm() - 1.0).abs() < 1e-12);
            assert!(c.iter().filter(|&&e| e.abs() > 1e-9).count() == 1);
        }
    }

    #[test]
    fn eig_rejects_non_finite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, f64::NAN, f64::NAN, 1.0]);
        assert!(matches!(
            RealSymMatrix::new(m).unwrap_err(),
            Error::NonFinite(0, 1)
        ));
    }

    #[test]
    fn expm_at_zero_is_identity() {
        let a = sym(&[&[0.3, -0.7], &[-0.7, 1.1]]);
        let e = expm_sym(&a, 0.0).unwrap();
        assert_eq!(e.as_matrix(), RealSymMatrix::identity(2).as_matrix());
    }

    #[test]
    fn expm_k2_closed_form() {
        // e^{-tL} for the single-edge Laplacian, diagonalized by hand.
        let minus_l = sym(&[&[-1.0, 1.0], &[1.0, -1.0]]);
        for &t in &[0.1, 0.5, 1.0, 3.0] {
            let e = expm_sym(&minus_l, t).unwrap();
            let a = 0.5 * (1.0 + (-2.0 * t).exp());
            let b = 0.5 * (1.0 - (-2.0 * t).exp());
            assert!((e.as_matrix()[(0, 0)] - a).abs() < 1e-12);
            assert!((e.as_matrix()[(0, 1)] - b).abs() < 1e-12);
            assert!((e.as_matrix()[(1, 1)] - a).abs() < 1e-12);
        }
    }

    #[test]
    fn expm_determinant_trace_identity() {
        let a = sym(&[&[0.2, 0.4, -0.1], &[0.4, -0.3, 0.6], &[-0.1, 0.6, 0.9]]);
        let t = 0.8;
        let det = expm_sym(&a, t).unwrap().as_matrix().determinant();
        let want = (t * a.as_matrix().trace()).exp();
        assert!((det - want).abs() < 1e-9 * want.abs().max(1.0));
    }

    #[test]
    fn hermitian_eigvals_examples() {
        let c = |re: f64| Complex64::new(re, 0.0);
        // I/4
        let quarter = HermitianMatrix::new(DMatrix::from_diagonal(
            &DVector::from_element(4, c(0.25)),
        ))
        .unwrap();
        for l in eigvals_hermitian(&quarter).unwrap() {
            assert!((l - 0.25).abs() < 1e-12);
        }
        // |0><0|
        let ket0 = HermitianMatrix::new(DMatrix::from_diagonal(&DVector::from_row_slice(&[
            c(1.0),
            c(0.0),
        ])))
        .unwrap();
        let w = eigvals_hermitian(&ket0).unwrap();
        assert!((w[0]).abs() < 1e-12 && (w[1] - 1.0).abs() < 1e-12);
        // (|01><01| + |10><10|)/2
        let mixed = HermitianMatrix::new(DMatrix::from_diagonal(&DVector::from_row_slice(&[
            c(0.0),
            c(0.5),
            c(0.5),
            c(0.0),
        ])))
        .unwrap();
        let w = eigvals_hermitian(&mixed).unwrap();
        assert!(w[0].abs() < 1e-12 && w[1].abs() < 1e-12);
        assert!((w[2] - 0.5).abs() < 1e-12 && (w[3] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hermitian_eigvals_sum_to_trace() {
        let m = DMatrix::from_row_slice(3, 3, &[
            Complex64::new(0.7, 0.0),
            Complex64::new(0.2, 0.5),
            Complex64::new(-0.1, -0.3),
            Complex64::new(0.2, -0.5),
            Complex64::new(-0.4, 0.0),
            Complex64::new(0.6, 0.1),
            Complex64::new(-0.1, 0.3),
            Complex64::new(0.6, -0.1),
            Complex64::new(1.2, 0.0),
        ]);
        let h = HermitianMatrix::new(m).unwrap();
        let w = eigvals_hermitian(&h).unwrap();
        let sum: f64 = w.iter().sum();
        assert!((sum - h.trace().re).abs() < 1e-9);
    }

    #[test]
    fn hermitian_rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.5, 0.2),
            Complex64::new(0.5, 0.2), // should be the conjugate
            Complex64::new(1.0, 0.0),
        ]);
        assert!(matches!(
            HermitianMatrix::new(m).unwrap_err(),
            Error::NotHermitian(_)
        ));
    }

    #[test]
    fn log_det_examples() {
        assert_eq!(
            log_det_sym(&RealSymMatrix::identity(5)).unwrap(),
            LogDet::Finite(0.0)
        );
        let d22 = RealSymMatrix::from_diagonal(&[2.0, 2.0]).unwrap();
        match log_det_sym(&d22).unwrap() {
            LogDet::Finite(v) => assert!((v - 2.0).abs() < 1e-12),
            LogDet::NegInf => panic!("finite expected"),
        }
        let singular = RealSymMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        assert_eq!(log_det_sym(&singular).unwrap(), LogDet::NegInf);
        let negative = RealSymMatrix::from_diagonal(&[1.0, -0.5]).unwrap();
        assert!(matches!(
            log_det_sym(&negative).unwrap_err(),
            Error::NegativeEigenvalue(_)
        ));
    }

    #[test]
    fn log_det_of_expm_matches_trace_route() {
        // det(e^{-2tL}) = e^{-2t tr L}, so the two log-det routes must agree.
        let l = sym(&[&[2.0, -1.0, -1.0], &[-1.0, 2.0, -1.0], &[-1.0, -1.0, 2.0]]);
        let t = 0.7;
        let minus_2tl = RealSymMatrix::new(l.as_matrix() * (-2.0 * t)).unwrap();
        let e = expm_sym(&minus_2tl, 1.0).unwrap();
        let got = match log_det_sym(&e).unwrap() {
            LogDet::Finite(v) => v,
            LogDet::NegInf => panic!("finite expected"),
        };
        let want = -2.0 * t * l.as_matrix().trace() * std::f64::consts::LOG2_E;
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    }

    #[test]
    fn nnls_recovers_nonnegative_solution() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let x_true = DVector::from_row_slice(&[0.3, 0.7]);
        let b = &a * &x_true;
        let x = nnls(&a, &b);
        assert!((x - x_true).norm() < 1e-9);
    }

    #[test]
    fn nnls_clamps_negative_components() {
        // Unconstrained solution would need a negative coefficient.
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let b = DVector::from_row_slice(&[1.0, -0.5]);
        let x = nnls(&a, &b);
        assert!(x.iter().all(|&v| v >= 0.0));
        let res = (&a * &x - &b).norm();
        // Best nonnegative fit: x = (0.25, 0), residual sqrt(2)/2... verified
        // against a grid search below.
        let mut best = f64::INFINITY;
        for i in 0..=200 {
            for j in 0..=200 {
                let cand = DVector::from_row_slice(&[i as f64 / 100.0, j as f64 / 100.0]);
                best = best.min((&a * cand - &b).norm());
            }
        }
        assert!(res <= best + 1e-6);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_sym(max_n: usize) -> impl Strategy<Value = RealSymMatrix> {
            (2usize..=max_n)
                .prop_flat_map(|n| {
                    prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| {
                        RealSymMatrix::new(DMatrix::from_vec(n, n, v)).unwrap()
                    })
                })
        }

        proptest! {
            #[test]
            fn eig_reconstructs(a in arb_sym(8)) {
                let (w, v) = eig_sym(&a).unwrap();
                let n = a.dim();
                let lam = DMatrix::from_diagonal(&DVector::from_vec(w));
                let rec = &v * lam * v.transpose();
                let scale = a.as_matrix().amax().max(1.0);
                prop_assert!((rec - a.as_matrix()).amax() <= 1e-9 * scale);
                let gram = v.transpose() * &v;
                prop_assert!((gram - DMatrix::<f64>::identity(n, n)).amax() <= 1e-9);
            }

            #[test]
            fn eig_sum_matches_trace(a in arb_sym(8)) {
                let (w, _) = eig_sym(&a).unwrap();
                let sum: f64 = w.iter().sum();
                prop_assert!((sum - a.as_matrix().trace()).abs() < 1e-9);
            }

            #[test]
            fn expm_semigroup(a in arb_sym(8), s in 0.0f64..1.0, t in 0.0f64..1.0) {
                let est = expm_sym(&a, s + t).unwrap();
                let prod = expm_sym(&a, s).unwrap().as_matrix()
                    * expm_sym(&a, t).unwrap().as_matrix();
                prop_assert!((est.as_matrix() - prod).amax() < 1e-8);
            }

            #[test]
            fn nnls_is_nonnegative_and_no_worse_than_truth(
                rows in 2usize..6,
                cols in 1usize..5,
                seed_a in prop::collection::vec(-1.0f64..1.0, 36),
                seed_x in prop::collection::vec(0.0f64..1.0, 6),
            ) {
                let a = DMatrix::from_fn(rows, cols, |i, j| seed_a[i * cols + j]);
                let x_true = DVector::from_fn(cols, |j, _| seed_x[j]);
                let b = &a * &x_true;
                let x = nnls(&a, &b);
                prop_assert!(x.iter().all(|&v| v >= 0.0));
                prop_assert!((&a * &x - &b).norm() <= 1e-8 + 1e-8 * b.norm());
            }
        }
    }
}
