//! Entropy functionals: Shannon entropy of discrete distributions, exact and
//! asymptotic binomial entropy, Gaussian differential entropy from a
//! covariance matrix, and von Neumann entropy of a density matrix.
//!
//! All logarithms are base 2. The convention `0 log 0 = 0` applies
//! everywhere.

use crate::error::{Error, Result};
use crate::linalg::{
    self, HermitianMatrix, LogDet, RealSymMatrix, EIG_CLIP, PSD_TOL, TRACE_TOL,
};
use serde::{Serialize, Serializer};
use std::f64::consts::{LOG2_E, PI};

/// log2(2*pi*e), the additive constant of Gaussian differential entropy.
pub(crate) fn log2_two_pi_e() -> f64 {
    (2.0 * PI * std::f64::consts::E).log2()
}

/// An entropy in bits. Differential entropy of a degenerate Gaussian is the
/// explicit `NegInf` sentinel rather than a floating `-inf` that could leak
/// through arithmetic; trajectory writers render it as the string `-inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntropyValue {
    Bits(f64),
    NegInf,
}

impl EntropyValue {
    /// Numeric value, mapping the sentinel to `f64::NEG_INFINITY` for
    /// comparisons and plotting.
    pub fn bits(&self) -> f64 {
        match self {
            EntropyValue::Bits(b) => *b,
            EntropyValue::NegInf => f64::NEG_INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, EntropyValue::Bits(_))
    }

    /// Field rendering for CSV output: plain decimal, or `-inf`.
    pub fn csv_field(&self) -> String {
        match self {
            EntropyValue::Bits(b) => format!("{b:.12e}"),
            EntropyValue::NegInf => "-inf".to_string(),
        }
    }
}

impl std::fmt::Display for EntropyValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EntropyValue::Bits(b) => write!(f, "{b}"),
            EntropyValue::NegInf => write!(f, "-inf"),
        }
    }
}

impl Serialize for EntropyValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            EntropyValue::Bits(b) => s.serialize_f64(*b),
            EntropyValue::NegInf => s.serialize_str("-inf"),
        }
    }
}

/// A finite probability distribution: nonnegative entries summing to one
/// within 1e-12. Entries in `[-1e-12, 0)` are clamped to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist {
    probs: Vec<f64>,
}

impl DiscreteDist {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let mut clean = probs;
        for p in &mut clean {
            if *p < 0.0 {
                if *p < -1e-12 {
                    return Err(Error::NegativeProbability(*p));
                }
                *p = 0.0;
            }
        }
        let sum: f64 = clean.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Unnormalized(sum));
        }
        Ok(Self { probs: clean })
    }

    /// Point mass on index `i` over a support of the given size.
    pub fn delta(i: usize, size: usize) -> Result<Self> {
        if i >= size {
            return Err(Error::DimensionMismatch {
                expected: size,
                got: i,
            });
        }
        let mut probs = vec![0.0; size];
        probs[i] = 1.0;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Shannon entropy `-sum p log2 p` of a discrete distribution, in bits.
pub fn shannon(d: &DiscreteDist) -> EntropyValue {
    let h = d
        .probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    EntropyValue::Bits(h)
}

fn check_open_unit(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            range: "(0, 1)",
        });
    }
    Ok(())
}

/// Binary entropy of `p` in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    check_open_unit(p)?;
    Ok(-p * p.log2() - (1.0 - p) * (1.0 - p).log2())
}

/// Joint entropy of `n` i.i.d. Bernoulli(p) node values: `n` times the
/// binary entropy of `p`.
pub fn bernoulli_network_entropy(n: usize, p: f64) -> Result<EntropyValue> {
    if n == 0 {
        return Err(Error::OutOfRange {
            name: "n",
            value: 0.0,
            range: ">= 1",
        });
    }
    Ok(EntropyValue::Bits(n as f64 * binary_entropy(p)?))
}

/// Exact entropy of the Binomial(n, p) distribution, in bits.
///
/// Evaluated with log-space binomial coefficients so it is stable for `n`
/// up to 1e4 and beyond; terms that underflow contribute zero.
pub fn binomial_entropy_exact(n: usize, p: f64) -> Result<EntropyValue> {
    check_open_unit(p)?;
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut log_choose = 0.0f64; // ln C(n, 0)
    let mut h = 0.0f64;
    for k in 0..=n {
        let log_b = log_choose + k as f64 * lp + (n - k) as f64 * lq;
        let b = log_b.exp();
        if b > 0.0 {
            h -= b * (log_b * LOG2_E);
        }
        if k < n {
            log_choose += ((n - k) as f64).ln() - ((k + 1) as f64).ln();
        }
    }
    Ok(EntropyValue::Bits(h))
}

/// Gaussian approximation to the binomial entropy:
/// `0.5 log2(2 pi e n p (1-p))`.
pub fn binomial_entropy_asymptotic(n: usize, p: f64) -> Result<EntropyValue> {
    check_open_unit(p)?;
    Ok(EntropyValue::Bits(
        0.5 * (log2_two_pi_e() + (n as f64 * p * (1.0 - p)).log2()),
    ))
}

/// Differential entropy of a multivariate Gaussian with the given covariance:
/// `0.5 log2((2 pi e)^n det cov)`.
///
/// Covariance eigenvalues at or below the clip threshold yield the `NegInf`
/// sentinel (degenerate Gaussian); eigenvalues below `-1e-10` are an error.
pub fn gaussian_differential_entropy(cov: &RealSymMatrix) -> Result<EntropyValue> {
    let n = cov.dim() as f64;
    match linalg::log_det_sym(cov)? {
        LogDet::Finite(ld) => Ok(EntropyValue::Bits(0.5 * (n * log2_two_pi_e() + ld))),
        LogDet::NegInf => Ok(EntropyValue::NegInf),
    }
}

/// Differential entropy of a scalar Gaussian with the given variance; this
/// is the per-node marginal path, kept separate from the joint entropy.
pub fn gaussian_scalar_entropy(variance: f64) -> Result<EntropyValue> {
    if variance < -PSD_TOL {
        return Err(Error::NegativeEigenvalue(variance));
    }
    if variance <= EIG_CLIP {
        return Ok(EntropyValue::NegInf);
    }
    Ok(EntropyValue::Bits(
        0.5 * (log2_two_pi_e() + variance.log2()),
    ))
}

/// Von Neumann entropy `-tr(rho log2 rho)` of a density matrix, in bits.
///
/// Requires unit trace within 1e-9 and a spectrum no lower than `-1e-10`;
/// eigenvalues under the clip threshold contribute zero.
pub fn von_neumann(rho: &HermitianMatrix) -> Result<EntropyValue> {
    let trace = rho.trace();
    if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
        return Err(Error::TraceNotOne(trace.re));
    }
    let w = linalg::eigvals_hermitian(rho)?;
    let mut h = 0.0;
    for &l in &w {
        if l < -PSD_TOL {
            return Err(Error::NegativeEigenvalue(l));
        }
        if l > EIG_CLIP {
            h -= l * l.log2();
        }
    }
    Ok(EntropyValue::Bits(h.max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use num_complex::Complex64;

    fn dist(p: &[f64]) -> DiscreteDist {
        DiscreteDist::new(p.to_vec()).unwrap()
    }

    #[test]
    fn shannon_values() {
        assert!((shannon(&dist(&[0.5, 0.5])).bits() - 1.0).abs() < 1e-12);
        assert_eq!(shannon(&dist(&[1.0, 0.0, 0.0])).bits(), 0.0);
        assert!((shannon(&dist(&[0.25; 4])).bits() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn shannon_rejects_unnormalized() {
        assert!(matches!(
            DiscreteDist::new(vec![0.5, 0.4]).unwrap_err(),
            Error::Unnormalized(_)
        ));
    }

    #[test]
    fn bernoulli_network_values() {
        assert!((bernoulli_network_entropy(4, 0.5).unwrap().bits() - 4.0).abs() < 1e-12);
        assert!((bernoulli_network_entropy(1, 0.5).unwrap().bits() - 1.0).abs() < 1e-12);
        // Binary entropy evaluated independently here.
        let hb = -(0.3f64.log2()) * 0.3 - (0.7f64.log2()) * 0.7;
        assert!((bernoulli_network_entropy(10, 0.3).unwrap().bits() - 10.0 * hb).abs() < 1e-12);
        assert!(bernoulli_network_entropy(4, 0.0).is_err());
        assert!(bernoulli_network_entropy(4, 1.0).is_err());
    }

    #[test]
    fn binomial_exact_small_cases() {
        assert!((binomial_entropy_exact(1, 0.5).unwrap().bits() - 1.0).abs() < 1e-12);
        // Binomial(2, 1/2) = (1/4, 1/2, 1/4), entropy 1.5 by direct sum.
        assert!((binomial_entropy_exact(2, 0.5).unwrap().bits() - 1.5).abs() < 1e-12);
        // Binomial(4, 1/2): frozen from the direct 5-term sum over
        // (1,4,6,4,1)/16.
        let direct: f64 = [1.0f64, 4.0, 6.0, 4.0, 1.0]
            .iter()
            .map(|c| {
                let b = c / 16.0;
                -b * b.log2()
            })
            .sum();
        assert!((binomial_entropy_exact(4, 0.5).unwrap().bits() - direct).abs() < 1e-12);
        assert!((direct - 2.0306390622295662).abs() < 1e-12);
    }

    #[test]
    fn binomial_exact_tracks_asymptotic() {
        let exact = binomial_entropy_exact(100, 0.3).unwrap().bits();
        let asym = binomial_entropy_asymptotic(100, 0.3).unwrap().bits();
        assert!((exact - asym).abs() < 0.01);
    }

    #[test]
    fn binomial_exact_stable_at_large_n() {
        let v = binomial_entropy_exact(10_000, 0.3).unwrap().bits();
        assert!(v.is_finite());
        let asym = binomial_entropy_asymptotic(10_000, 0.3).unwrap().bits();
        assert!((v - asym).abs() < 1e-4);
    }

    #[test]
    fn binomial_asymptotic_values() {
        let got = binomial_entropy_asymptotic(100, 0.5).unwrap().bits();
        let want = 0.5 * (2.0 * PI * std::f64::consts::E * 25.0).log2();
        assert!((got - want).abs() < 1e-12);
        // Closer at n = 200 than at n = 50 (exact sum is the oracle).
        let diff = |n: usize| {
            (binomial_entropy_exact(n, 0.3).unwrap().bits()
                - binomial_entropy_asymptotic(n, 0.3).unwrap().bits())
            .abs()
        };
        assert!(diff(200) < diff(50));
        // Symmetric in p <-> 1-p.
        let a = binomial_entropy_asymptotic(77, 0.3).unwrap().bits();
        let b = binomial_entropy_asymptotic(77, 0.7).unwrap().bits();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn binomial_gap_shrinks_with_bounded_scaled_error() {
        let mut prev_scaled = f64::INFINITY;
        for &n in &[250usize, 500, 1000, 2000] {
            let d = (binomial_entropy_exact(n, 0.3).unwrap().bits()
                - binomial_entropy_asymptotic(n, 0.3).unwrap().bits())
            .abs();
            let scaled = n as f64 * d;
            assert!(scaled < 1.0, "n*|diff| = {scaled} at n = {n}");
            assert!(scaled < prev_scaled * 1.10);
            prev_scaled = scaled;
        }
    }

    #[test]
    fn gaussian_entropy_values() {
        let unit = RealSymMatrix::from_diagonal(&[1.0]).unwrap();
        let got = gaussian_differential_entropy(&unit).unwrap().bits();
        assert!((got - 2.047095585180641).abs() < 1e-12);

        // sigma^2 I_N gives (N/2) log2(2 pi e sigma^2).
        let n = 5;
        let s2 = 2.3;
        let cov = RealSymMatrix::from_diagonal(&vec![s2; n]).unwrap();
        let got = gaussian_differential_entropy(&cov).unwrap().bits();
        let want = n as f64 / 2.0 * (2.0 * PI * std::f64::consts::E * s2).log2();
        assert!((got - want).abs() < 1e-10);
    }

    #[test]
    fn gaussian_entropy_degenerate_and_invalid() {
        let rank_deficient = RealSymMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        assert_eq!(
            gaussian_differential_entropy(&rank_deficient).unwrap(),
            EntropyValue::NegInf
        );
        let non_psd = RealSymMatrix::from_diagonal(&[1.0, -0.3]).unwrap();
        assert!(gaussian_differential_entropy(&non_psd).is_err());
    }

    #[test]
    fn scalar_marginal_entropy() {
        let got = gaussian_scalar_entropy(1.0).unwrap().bits();
        assert!((got - 2.047095585180641).abs() < 1e-12);
        assert_eq!(gaussian_scalar_entropy(0.0).unwrap(), EntropyValue::NegInf);
    }

    fn qdiag(d: &[f64]) -> HermitianMatrix {
        HermitianMatrix::new(DMatrix::from_diagonal(&DVector::from_iterator(
            d.len(),
            d.iter().map(|&x| Complex64::new(x, 0.0)),
        )))
        .unwrap()
    }

    #[test]
    fn von_neumann_values() {
        // Pure state.
        assert_eq!(von_neumann(&qdiag(&[1.0, 0.0])).unwrap().bits(), 0.0);
        // Maximally mixed on 3 qubits.
        let d = 8;
        let mixed = qdiag(&vec![1.0 / d as f64; d]);
        assert!((von_neumann(&mixed).unwrap().bits() - 3.0).abs() < 1e-12);
        // (|01><01| + |10><10|)/2 has spectrum (1/2, 1/2, 0, 0).
        let half = qdiag(&[0.0, 0.5, 0.5, 0.0]);
        assert!((von_neumann(&half).unwrap().bits() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn von_neumann_rejects_bad_inputs() {
        assert!(matches!(
            von_neumann(&qdiag(&[0.7, 0.7])).unwrap_err(),
            Error::TraceNotOne(_)
        ));
        assert!(matches!(
            von_neumann(&qdiag(&[1.5, -0.5])).unwrap_err(),
            Error::NegativeEigenvalue(_)
        ));
    }

    #[test]
    fn entropy_value_rendering() {
        assert_eq!(EntropyValue::NegInf.csv_field(), "-inf");
        assert_eq!(EntropyValue::NegInf.to_string(), "-inf");
        assert!(EntropyValue::Bits(1.25).csv_field().starts_with("1.25"));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_dist(max_len: usize) -> impl Strategy<Value = DiscreteDist> {
            prop::collection::vec(0.01f64..1.0, 1..=max_len).prop_map(|raw| {
                let s: f64 = raw.iter().sum();
                DiscreteDist::new(raw.iter().map(|&x| x / s).collect()).unwrap()
            })
        }

        /// Random density matrix via a random Hermitian squared and
        /// normalized.
        fn arb_density(dim: usize) -> impl Strategy<Value = HermitianMatrix> {
            prop::collection::vec(-1.0f64..1.0, 2 * dim * dim).prop_map(move |v| {
                let a = DMatrix::from_fn(dim, dim, |i, j| {
                    Complex64::new(v[i * dim + j], v[dim * dim + i * dim + j])
                });
                let psd = &a * a.adjoint();
                let tr = psd.trace().re;
                HermitianMatrix::new(psd / Complex64::new(tr, 0.0)).unwrap()
            })
        }

        proptest! {
            #[test]
            fn shannon_is_permutation_invariant(d in arb_dist(8), swap in any::<(usize, usize)>()) {
                let mut p = d.probs().to_vec();
                let (a, b) = (swap.0 % p.len(), swap.1 % p.len());
                p.swap(a, b);
                let permuted = DiscreteDist::new(p).unwrap();
                prop_assert!((shannon(&d).bits() - shannon(&permuted).bits()).abs() < 1e-12);
            }

            #[test]
            fn shannon_bounded_by_log_support(d in arb_dist(8)) {
                let h = shannon(&d).bits();
                prop_assert!(h >= 0.0);
                prop_assert!(h <= (d.len() as f64).log2() + 1e-12);
            }

            #[test]
            fn von_neumann_concave(
                rho1 in arb_density(8),
                rho2 in arb_density(8),
                lambda in 0.0f64..1.0,
            ) {
                let mix = HermitianMatrix::new(
                    rho1.as_matrix() * Complex64::new(lambda, 0.0)
                        + rho2.as_matrix() * Complex64::new(1.0 - lambda, 0.0),
                ).unwrap();
                let s_mix = von_neumann(&mix).unwrap().bits();
                let s1 = von_neumann(&rho1).unwrap().bits();
                let s2 = von_neumann(&rho2).unwrap().bits();
                prop_assert!(s_mix >= lambda * s1 + (1.0 - lambda) * s2 - 1e-9);
            }

            #[test]
            fn von_neumann_unitary_invariant(rho in arb_density(4), seed in prop::collection::vec(-1.0f64..1.0, 32)) {
                // Haar-ish unitary from the QR factorization of a random
                // complex matrix.
                let dim = 4;
                let a = DMatrix::from_fn(dim, dim, |i, j| {
                    Complex64::new(seed[i * dim + j], seed[dim * dim + i * dim + j])
                });
                let qr = a.qr();
                let u = qr.q();
                let conj = &u * rho.as_matrix() * u.adjoint();
                let rotated = HermitianMatrix::new(conj).unwrap();
                let s0 = von_neumann(&rho).unwrap().bits();
                let s1 = von_neumann(&rotated).unwrap().bits();
                prop_assert!((s0 - s1).abs() < 1e-9);
            }
        }
    }
}
