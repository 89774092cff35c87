//! Extremality tests for channels, and a channel that is extremal among
//! unital channels while being a genuine 4-term mixture.
//!
//! A channel with linearly independent Kraus operators {A_k} is extremal in
//! the set of all channels iff {A_k^dag A_l} is linearly independent, and
//! extremal in the unital set iff {A_k^dag A_l (+) A_l A_k^dag} is. The first
//! criterion caps the Kraus number at d, the second at sqrt(2) d — and the
//! gap is realized: [`exceptional_channel`] has d = 3 and N = 4, so it cannot
//! be extremal among all channels, yet its doubled product family has full
//! rank 16.

use crate::channel::{choi_to_kraus, ChoiState, KrausChannel};
use crate::linalg::{c, eigh, CMatrix, C64};
use crate::{Error, Result};
use serde::Serialize;

/// Outcome of [`extremality_test`].
#[derive(Debug, Clone, Serialize)]
pub struct ExtremalityReport {
    /// Number of Kraus operators N.
    pub n_kraus: usize,
    /// Rank of the span of {A_k^dag A_l}; extremal in all channels iff N^2.
    pub rank_full: usize,
    /// Rank of the span of {A_k^dag A_l (+) A_l A_k^dag}; extremal in the
    /// unital set iff N^2.
    pub rank_unital: usize,
    pub extremal_in_all: bool,
    pub extremal_in_unital: bool,
    /// Smallest Gram eigenvalue of the product family, quantifying how far
    /// the linear-independence decision is from the threshold.
    pub min_gram_full: f64,
    /// Same for the doubled family.
    pub min_gram_unital: f64,
}

// Gram matrix of a family of vectors, conjugate-linear in the first slot.
fn gram(vectors: &[Vec<C64>]) -> CMatrix {
    let n = vectors.len();
    CMatrix::from_fn(n, n, |i, j| {
        vectors[i]
            .iter()
            .zip(&vectors[j])
            .map(|(a, b)| a.conj() * b)
            .sum()
    })
}

// Eigenvalues above tol times the largest count toward the rank.
fn rank_and_min(g: &CMatrix, tol: f64) -> (usize, f64) {
    let values = eigh(g).expect("gram matrices are square").values;
    let largest = values.last().copied().unwrap_or(0.0).max(0.0);
    let cut = tol * largest;
    let rank = values.iter().filter(|&&v| v > cut).count();
    (rank, values.first().copied().unwrap_or(0.0))
}

/// Decide extremality of a channel in the set of all channels and in the set
/// of unital channels, from the Gram ranks of the Kraus product families.
///
/// The Kraus operators themselves must be linearly independent — a degenerate
/// set makes both criteria vacuously fail regardless of the channel, so it is
/// rejected; reduce such a set first by a round trip through the dual state.
/// `tol` is the relative eigenvalue threshold for all rank decisions.
pub fn extremality_test(ch: &KrausChannel, tol: f64) -> Result<ExtremalityReport> {
    let n = ch.n_kraus();
    let kraus_vecs: Vec<Vec<C64>> =
        ch.kraus().iter().map(|a| a.data.clone()).collect();
    let (kraus_rank, _) = rank_and_min(&gram(&kraus_vecs), tol);
    if kraus_rank < n {
        return Err(Error::Unsupported(format!(
            "Kraus operators are linearly dependent (rank {kraus_rank} of \
             {n}); reduce the representation through the dual state first"
        )));
    }

    let mut products = Vec::with_capacity(n * n);
    let mut doubled = Vec::with_capacity(n * n);
    for k in 0..n {
        for l in 0..n {
            let a_k = &ch.kraus()[k];
            let a_l = &ch.kraus()[l];
            let left = &a_k.dagger() * a_l;
            let right = a_l * &a_k.dagger();
            let mut both = left.data.clone();
            both.extend_from_slice(&right.data);
            products.push(left.data);
            doubled.push(both);
        }
    }
    let (rank_full, min_gram_full) = rank_and_min(&gram(&products), tol);
    let (rank_unital, min_gram_unital) = rank_and_min(&gram(&doubled), tol);
    Ok(ExtremalityReport {
        n_kraus: n,
        rank_full,
        rank_unital,
        extremal_in_all: rank_full == n * n,
        extremal_in_unital: rank_unital == n * n,
        min_gram_full,
        min_gram_unital,
    })
}

// Real roots of a cubic, ascending. Bracketing on a grid inside the Cauchy
// bound, bisection, then a few Newton steps to polish.
fn cubic_real_roots(coeffs: [f64; 4]) -> Vec<f64> {
    let [a3, a2, a1, a0] = coeffs;
    assert!(a3 != 0.0, "leading coefficient must be nonzero");
    let p = |x: f64| ((a3 * x + a2) * x + a1) * x + a0;
    let dp = |x: f64| (3.0 * a3 * x + 2.0 * a2) * x + a1;
    let bound = 1.0 + (a2.abs().max(a1.abs()).max(a0.abs())) / a3.abs();
    let steps = 8192;
    let mut roots = Vec::new();
    let mut prev_x = -bound;
    let mut prev_v = p(prev_x);
    for i in 1..=steps {
        let x = -bound + 2.0 * bound * i as f64 / steps as f64;
        let v = p(x);
        if prev_v == 0.0 {
            roots.push(prev_x);
        } else if prev_v * v < 0.0 {
            let (mut lo, mut hi) = (prev_x, x);
            let (mut flo, _) = (prev_v, v);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = p(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if flo * fm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            let mut r = 0.5 * (lo + hi);
            for _ in 0..5 {
                let d = dp(r);
                if d.abs() > 1e-300 {
                    r -= p(r) / d;
                }
            }
            roots.push(r);
        }
        prev_x = x;
        prev_v = v;
    }
    roots.sort_by(f64::total_cmp);
    roots
}

fn cubic_root(coeffs: [f64; 4], index: usize) -> f64 {
    let roots = cubic_real_roots(coeffs);
    assert!(
        roots.len() > index,
        "cubic has {} real roots, wanted index {index}",
        roots.len()
    );
    roots[index]
}

/// The four coefficients of the X matrix: three designated real roots of
/// cubics plus the rational 1/6, approximately (0.21821, -0.14937, 1/6,
/// 0.18595). Exposed for the tests that pin them.
pub fn exceptional_coefficients() -> [f64; 4] {
    let mu1 = cubic_root([3.0, -66.0, 312.0, -356.0], 0).sqrt() / 6.0;
    let mu2 = cubic_root([2592.0, 432.0, 0.0, -1.0], 0);
    let mu3 = 1.0 / 6.0;
    let mu4 = cubic_root([18.0, 0.0, -6.0, 1.0], 1);
    [mu1, mu2, mu3, mu4]
}

// The six orthonormal vectors spanning the orthogonal complement of the
// span of |kk>: symmetric then antisymmetric combinations of |jk>, |kj>.
fn symmetry_adapted_basis() -> Vec<Vec<C64>> {
    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    let mut basis = Vec::with_capacity(6);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for &(j, k) in &pairs {
        let mut v = vec![c(0.0, 0.0); 9];
        v[3 * j + k] = c(s, 0.0);
        v[3 * k + j] = c(s, 0.0);
        basis.push(v);
    }
    for &(j, k) in &pairs {
        // 1/(sqrt(2) i) = -i/sqrt(2)
        let mut v = vec![c(0.0, 0.0); 9];
        v[3 * j + k] = c(0.0, -s);
        v[3 * k + j] = c(0.0, s);
        basis.push(v);
    }
    basis
}

/// The Hermitian 6x6 coefficient matrix X(mu) of the dual-state ansatz.
pub fn exceptional_x_matrix(mu: [f64; 4]) -> CMatrix {
    let [m1, m2, m3, m4] = mu;
    let o = c(0.0, 0.0);
    let h = c(0.5, 0.0);
    let i1 = c(0.0, m1);
    let i3 = c(0.0, m3);
    let i4 = c(0.0, m4);
    let rows = [
        vec![h, o, -i1, i3, i4, o],
        vec![o, h, -i1, -i4, c(-2.0 * m3, -m3), o],
        vec![i1, i1, h, o, o, c(2.0 * m2, m3)],
        vec![-i3, i4, o, h, o, -i1],
        vec![-i4, c(-2.0 * m3, m3), o, o, h, i1],
        vec![o, o, c(2.0 * m2, -m3), i1, -i1, h],
    ];
    CMatrix::from_rows(&rows).scale(c(1.0 / 3.0, 0.0))
}

/// Dual state of the exceptional channel: sum_ij x_ij |psi_i><psi_j| on
/// C^3 (x) C^3. Positive semidefinite with rank 4, and doubly normalized, so
/// it is the dual state of a unital trace-preserving channel.
pub fn exceptional_choi() -> ChoiState {
    let x = exceptional_x_matrix(exceptional_coefficients());
    let basis = symmetry_adapted_basis();
    let rho = CMatrix::from_fn(9, 9, |a, b| {
        let mut sum = c(0.0, 0.0);
        for i in 0..6 {
            for j in 0..6 {
                sum += basis[i][a] * x[(i, j)] * basis[j][b].conj();
            }
        }
        sum
    });
    ChoiState::new(3, rho).expect("9x9 by construction")
}

/// A unital channel on dimension 3 with 4 Kraus operators that is extremal
/// among unital channels but, having more Kraus operators than the dimension,
/// cannot be extremal among all channels.
pub fn exceptional_channel() -> KrausChannel {
    choi_to_kraus(&exceptional_choi(), 1e-10)
        .expect("the fixed dual state is positive semidefinite")
}
