//! Separation witnesses built from the flip operator.
//!
//! W = (1 (x) B) F (1 (x) B^dag) + w 1 is Hermitian, and whenever its
//! expectation on every unitary-conjugation dual state is non-negative, a
//! negative expectation tr[W rho_T] certifies that the channel T lies outside
//! the closed convex hull of unitary channels. On the dual state of U the
//! flip part evaluates to (1/d) tr[B^dag U B^T conj(U)] = (1/d) tr[A conj(A)]
//! with A = B^dag U, so the sharpest admissible constant is the negated
//! fixed-singular-value minimum of the optimize module, divided by d. The
//! numeric oracle here revalidates that constant end to end.

use crate::channel::ChoiState;
use crate::linalg::{c, flip_operator, haar_unitary, kron, svd, CMatrix};
use crate::optimize::min_tr_a_abar;
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A flip-ansatz witness on C^d (x) C^d.
#[derive(Debug, Clone)]
pub struct Witness {
    /// Local dimension.
    pub d: usize,
    /// The B parameter of the ansatz.
    pub b: CMatrix,
    /// Additive constant: the smallest w making the witness non-negative on
    /// every unitary-conjugation dual state.
    pub w: f64,
    /// (1 (x) B) F (1 (x) B^dag) + w 1.
    pub matrix: CMatrix,
}

/// The sharpest constant w(B) for the flip ansatz, from the singular values
/// of B: (1/d)(2 sum sigma_{2i-1} sigma_{2i}) for even d, minus sigma_d^2
/// inside the bracket for odd d. Errors on unsorted or negative values and on
/// a length mismatch with d.
pub fn tight_constant(singular_values: &[f64], d: usize) -> Result<f64> {
    if singular_values.len() != d {
        return Err(Error::EntryLength {
            expected: d,
            got: singular_values.len(),
        });
    }
    let (min_value, _) = min_tr_a_abar(singular_values)?;
    Ok(-min_value / d as f64)
}

/// Assemble the witness for a given square B, with the tight constant.
pub fn flip_witness(b: &CMatrix) -> Result<Witness> {
    if !b.is_square() {
        return Err(Error::Dimension(format!(
            "B must be square, got {}x{}",
            b.rows, b.cols
        )));
    }
    let d = b.rows;
    let w = tight_constant(&svd(b).sigma, d)?;
    let one_b = kron(&CMatrix::identity(d), b);
    let mut matrix = &(&one_b * &flip_operator(d)) * &one_b.dagger();
    for i in 0..d * d {
        matrix[(i, i)] += c(w, 0.0);
    }
    Ok(Witness {
        d,
        b: b.clone(),
        w,
        matrix,
    })
}

/// tr[W rho]; a negative value certifies that the channel behind `rho` is not
/// a mixture of unitary conjugations.
pub fn evaluate(wit: &Witness, rho: &ChoiState) -> Result<f64> {
    if rho.d() != wit.d {
        return Err(Error::Dimension(format!(
            "witness acts on dimension {}, state has dimension {}",
            wit.d,
            rho.d()
        )));
    }
    Ok((&wit.matrix * rho.rho()).trace().re)
}

/// Multi-start numerical minimum of (1/d) tr[B^dag U B^T conj(U)] over the
/// unitary group: an upper bound on the true minimum -w(B), used to validate
/// [`tight_constant`] against transcription errors. Restart k is seeded with
/// seed+k; at least one trial always runs.
pub fn min_tr_b_ubar_oracle(b: &CMatrix, trials: usize, seed: u64) -> Result<f64> {
    if !b.is_square() || b.rows == 0 {
        return Err(Error::Dimension(format!(
            "B must be square and non-empty, got {}x{}",
            b.rows, b.cols
        )));
    }
    let d = b.rows;
    let dim = d as f64;
    let b_t = b.transpose();
    let b_dag = b.dagger();
    let f = |u: &CMatrix| {
        (&(&b_dag * u) * &(&b_t * &u.conj())).trace().re / dim
    };
    // first-order change along U(t) = exp(itZ)U is tr[Z i(Q - Q^dag)]/d with
    // Q = U B^T conj(U) B^dag
    let grad = |u: &CMatrix| {
        let q = &(u * &b_t) * &(&u.conj() * &b_dag);
        (&q - &q.dagger()).scale(c(0.0, 1.0 / dim))
    };
    let mut best = f64::INFINITY;
    for idx in 0..trials.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(idx as u64));
        let start = haar_unitary(d, &mut rng);
        let out =
            crate::optimize::descend_unitary(start, &f, &grad, 1500, 1e-9);
        best = best.min(out.value);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigh, ZERO};

    #[test]
    fn tight_constant_pinned_values() {
        let w = tight_constant(&[1.0, 1.0, 1.0], 3).unwrap();
        assert!((w - 1.0 / 3.0).abs() < 1e-15);
        let w = tight_constant(&[1.0, 1.0, 1.0, 1.0], 4).unwrap();
        assert!((w - 1.0).abs() < 1e-15);
        let w = tight_constant(&[2.0, 1.0, 0.0], 3).unwrap();
        assert!((w - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tight_constant_input_validation() {
        assert!(matches!(
            tight_constant(&[1.0, 2.0], 2),
            Err(Error::Unsorted)
        ));
        assert!(matches!(
            tight_constant(&[1.0, 1.0], 3),
            Err(Error::EntryLength { .. })
        ));
    }

    #[test]
    fn zero_b_degenerates_to_the_zero_witness() {
        let wit = flip_witness(&CMatrix::zeros(3, 3)).unwrap();
        assert_eq!(wit.w, 0.0);
        assert_eq!(wit.matrix.max_abs(), 0.0);
    }

    #[test]
    fn witness_matrix_is_hermitian_and_matches_the_ansatz() {
        let b = CMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.0, 1.0)],
            vec![ZERO, c(2.0, 0.0)],
        ]);
        let wit = flip_witness(&b).unwrap();
        assert!(wit.matrix.hermitian_defect() < 1e-14);
        let one_b = kron(&CMatrix::identity(2), &b);
        let core = &(&one_b * &flip_operator(2)) * &one_b.dagger();
        let shift = (&wit.matrix - &core)[(0, 0)];
        assert!((shift.re - wit.w).abs() < 1e-14 && shift.im.abs() < 1e-16);
    }

    #[test]
    fn even_dimensional_identity_witness_is_positive() {
        // F + 1 >= 0: the flip has eigenvalues +-1, so nothing is detected.
        let wit = flip_witness(&CMatrix::identity(4)).unwrap();
        assert!((wit.w - 1.0).abs() < 1e-12);
        let lowest = eigh(&wit.matrix).unwrap().values[0];
        assert!(lowest > -1e-12, "lowest eigenvalue {lowest}");
    }

    #[test]
    fn non_square_b_is_rejected() {
        assert!(matches!(
            flip_witness(&CMatrix::zeros(2, 3)),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            min_tr_b_ubar_oracle(&CMatrix::zeros(2, 3), 1, 0),
            Err(Error::Dimension(_))
        ));
    }
}
