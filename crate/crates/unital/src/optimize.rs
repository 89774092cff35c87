//! Minimization of tr[A conj(A)] at fixed singular values — closed forms plus
//! the first-order minimizer on the unitary group that cross-checks them.
//!
//! The closed forms: over all A with prescribed singular values, the minimum of
//! tr[A conj(A)] is -2*sum sigma_{2i-1} sigma_{2i} (plus sigma_d^2 for odd d),
//! attained on a direct sum of 2x2 blocks. More generally every attainable
//! value of tr[A conj(A)] with A conj(A) Hermitian is a signed pairing of the
//! singular values, and [`attainable_tr_a_abar`] realizes any such pairing.
//!
//! The numerical route parametrizes unitaries as U = exp(iX), X Hermitian, and
//! runs gradient descent with a backtracking line search from seeded Haar
//! starting points. It reproduces the closed forms and extends to the two
//! partial-transpose objectives that have no closed form.

use crate::linalg::{
    c, eigh, haar_unitary, partial_transpose, svd, CMatrix, Subsystem, C64,
};
use crate::{covariant, Error, Result, DEFAULT_TOL};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Default number of restarts for [`manifold_minimize`].
pub const DEFAULT_RESTARTS: usize = 50;
/// Default iteration cap per restart.
pub const DEFAULT_MAX_ITER: usize = 2000;
/// Default stopping threshold on the max-abs norm of the Riemannian gradient.
pub const DEFAULT_GRAD_TOL: f64 = 1e-7;

fn check_sigma(sigma: &[f64]) -> Result<()> {
    if sigma.is_empty() {
        return Err(Error::Dimension(
            "need at least one singular value".into(),
        ));
    }
    for (i, &s) in sigma.iter().enumerate() {
        if s < 0.0 {
            return Err(Error::OutOfRange {
                name: "sigma",
                value: s,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        if i > 0 && sigma[i - 1] < s {
            return Err(Error::Unsorted);
        }
    }
    Ok(())
}

/// Minimum of tr[A conj(A)] over all A with the given singular values
/// (non-increasing, non-negative), together with a minimizer.
///
/// The value is -2*sum_{i} sigma_{2i-1} sigma_{2i}, plus sigma_d^2 when d is
/// odd; the minimizer pairs adjacent singular values in antisymmetric-looking
/// 2x2 blocks [[0, -s2], [s1, 0]] (the odd leftover sits on the diagonal).
pub fn min_tr_a_abar(sigma: &[f64]) -> Result<(f64, CMatrix)> {
    check_sigma(sigma)?;
    let d = sigma.len();
    let mut a = CMatrix::zeros(d, d);
    let mut value = 0.0;
    for i in 0..d / 2 {
        a[(2 * i, 2 * i + 1)] = c(-sigma[2 * i + 1], 0.0);
        a[(2 * i + 1, 2 * i)] = c(sigma[2 * i], 0.0);
        value -= 2.0 * sigma[2 * i] * sigma[2 * i + 1];
    }
    if d % 2 == 1 {
        a[(d - 1, d - 1)] = c(sigma[d - 1], 0.0);
        value += sigma[d - 1] * sigma[d - 1];
    }
    Ok((value, a))
}

/// Realize one attainable value of tr[A conj(A)] at fixed singular values.
///
/// `tau` permutes the singular values (0-indexed), the first `r` of them are
/// consumed pairwise by 2x2 blocks whose pair product enters the trace with
/// sign -1 where `rho_signs` is true, and the remaining d-r sit on the
/// diagonal, contributing their squares:
///
///   value = 2 * sum_i (+-1) sigma_{tau(2i)} sigma_{tau(2i+1)}
///         + sum_{i >= r} sigma_{tau(i)}^2.
///
/// `r` must be even and at most d; `rho_signs` must have length r/2. The
/// returned matrix has exactly the prescribed singular values.
pub fn attainable_tr_a_abar(
    sigma: &[f64],
    tau: &[usize],
    r: usize,
    rho_signs: &[bool],
) -> Result<(f64, CMatrix)> {
    check_sigma(sigma)?;
    let d = sigma.len();
    if r % 2 == 1 || r > d {
        return Err(Error::OutOfRange {
            name: "r",
            value: r as f64,
            lo: 0.0,
            hi: d as f64,
        });
    }
    if tau.len() != d {
        return Err(Error::Dimension(format!(
            "tau must be a permutation of 0..{d}, got length {}",
            tau.len()
        )));
    }
    let mut seen = vec![false; d];
    for &t in tau {
        if t >= d || seen[t] {
            return Err(Error::Dimension(format!(
                "tau must be a permutation of 0..{d}"
            )));
        }
        seen[t] = true;
    }
    if rho_signs.len() != r / 2 {
        return Err(Error::Dimension(format!(
            "need {} signs for {} paired singular values, got {}",
            r / 2,
            r,
            rho_signs.len()
        )));
    }
    let mut a = CMatrix::zeros(d, d);
    let mut value = 0.0;
    for i in 0..r / 2 {
        let s_first = sigma[tau[2 * i]];
        let s_second = sigma[tau[2 * i + 1]];
        let sign = if rho_signs[i] { -1.0 } else { 1.0 };
        a[(2 * i, 2 * i + 1)] = c(sign * s_second, 0.0);
        a[(2 * i + 1, 2 * i)] = c(s_first, 0.0);
        value += 2.0 * sign * s_first * s_second;
    }
    for i in r..d {
        let s = sigma[tau[i]];
        a[(i, i)] = c(s, 0.0);
        value += s * s;
    }
    Ok((value, a))
}

/// Largest attainable |tr U| over unitaries with tr[U conj(U)]/d = x, for odd
/// d: the value d*m(x) together with a unitary attaining it.
pub fn max_abs_trace_given_x(x: f64, d: usize) -> Result<(f64, CMatrix)> {
    let m = covariant::m_curve(x, d)?;
    let u = covariant::max_trace_unitary(x, d)?;
    Ok((m * d as f64, u))
}

/// Both sides of the U(2) identity ||U_s||_1 = sqrt(tr[U conj(U)] + 2), where
/// U_s = (U + U^T)/2. Errors on non-unitary or wrongly sized input.
pub fn u2_symmetric_trace_norm_identity(u: &CMatrix) -> Result<(f64, f64)> {
    if u.rows != 2 || u.cols != 2 {
        return Err(Error::Dimension(format!(
            "expected a 2x2 unitary, got {}x{}",
            u.rows, u.cols
        )));
    }
    let defect = u.unitary_defect();
    if defect > DEFAULT_TOL {
        return Err(Error::MatrixProperty {
            property: "unitary",
            defect,
            tol: DEFAULT_TOL,
        });
    }
    let us = (u + &u.transpose()).scale(c(0.5, 0.0));
    let lhs: f64 = svd(&us).sigma.iter().sum();
    // tr[U conj(U)] is real on U(2); the +2 shift can round below zero when
    // the trace sits at its minimum -2.
    let shifted = (u * &u.conj()).trace().re + 2.0;
    Ok((lhs, shifted.max(0.0).sqrt()))
}

/// Objective for [`manifold_minimize`], always normalized by the total
/// dimension so unitaries score in [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// tr[U conj(U)^{T2}]/(d*big_d) over U(d*big_d); the partial transpose
    /// acts on the second, big_d-dimensional factor.
    TrUUbarT2 { d: usize, big_d: usize },
    /// tr[U_s conj(U_s)^{T2}]/(d1*d2) with U_s = (U + U^T)/2 over U(d1*d2).
    TrUsymPt { d1: usize, d2: usize },
}

impl Objective {
    fn factors(&self) -> (usize, usize) {
        match *self {
            Objective::TrUUbarT2 { d, big_d } => (d, big_d),
            Objective::TrUsymPt { d1, d2 } => (d1, d2),
        }
    }

    /// Size of the unitary being optimized.
    pub fn dim(&self) -> usize {
        let (d1, d2) = self.factors();
        d1 * d2
    }

    fn validate(&self) -> Result<()> {
        let (d1, d2) = self.factors();
        for (name, v) in [("d1", d1), ("d2", d2)] {
            if v < 1 {
                return Err(Error::OutOfRange {
                    name,
                    value: v as f64,
                    lo: 1.0,
                    hi: f64::INFINITY,
                });
            }
        }
        Ok(())
    }

    /// The matrix whose Hermiticity encodes first-order optimality: U times
    /// the partially transposed conjugate of U (or of its symmetrization).
    ///
    /// For the symmetric objective, conj(U_s)^{T2} is itself symmetric, so
    /// tr[U_s conj(U_s)^{T2}] = tr[U conj(U_s)^{T2}] and the same matrix
    /// serves value, gradient, and stationarity at once.
    fn condition_matrix(&self, u: &CMatrix) -> CMatrix {
        let (d1, d2) = self.factors();
        let target = match self {
            Objective::TrUUbarT2 { .. } => u.conj(),
            Objective::TrUsymPt { .. } => {
                (u + &u.transpose()).scale(c(0.5, 0.0)).conj()
            }
        };
        let pt = partial_transpose(&target, d1, d2, Subsystem::Second)
            .expect("condition matrix factors match the unitary size");
        u * &pt
    }

    /// Objective value at a unitary.
    pub fn value(&self, u: &CMatrix) -> f64 {
        self.condition_matrix(u).trace().re / self.dim() as f64
    }

    /// Riemannian gradient at U in the parametrization U(t) = exp(i t Z) U:
    /// the Hermitian G with d/dt f = tr[Z G], namely i(K - K^dag)/dim.
    pub fn gradient(&self, u: &CMatrix) -> CMatrix {
        let k = self.condition_matrix(u);
        (&k - &k.dagger()).scale(c(0.0, 1.0 / self.dim() as f64))
    }

    /// Hermiticity defect of the condition matrix; zero exactly at
    /// stationary points.
    pub fn stationarity_residual(&self, u: &CMatrix) -> f64 {
        self.condition_matrix(u).hermitian_defect()
    }
}

/// Outcome of [`manifold_minimize`].
#[derive(Debug, Clone)]
pub struct OptimizeResult {
    /// Best objective value found across all restarts.
    pub value: f64,
    /// Unitary attaining `value` (re-unitarized to machine precision).
    pub minimizer: CMatrix,
    /// Number of restarts actually run.
    pub restarts_used: usize,
    /// Hermiticity defect of the first-order condition at the minimizer.
    pub stationarity_residual: f64,
    /// False when the best restart exhausted its iteration budget before the
    /// gradient dropped below tolerance; the result is still the best found.
    pub converged: bool,
}

pub(crate) struct DescentOutcome {
    pub value: f64,
    pub point: CMatrix,
    pub converged: bool,
}

/// Nearest unitary in Frobenius norm: the polar factor U V^dag of the SVD.
pub(crate) fn polar_unitary(m: &CMatrix) -> CMatrix {
    let dec = svd(m);
    &dec.u * &dec.v.dagger()
}

// exp(-i eta G) from a cached eigendecomposition of G, so the line search can
// retry step sizes without re-diagonalizing.
fn exp_step(values: &[f64], vectors: &CMatrix, eta: f64) -> CMatrix {
    let n = values.len();
    let mut scaled = vectors.clone();
    for j in 0..n {
        let phase = C64::from_polar(1.0, -eta * values[j]);
        for i in 0..n {
            scaled[(i, j)] *= phase;
        }
    }
    &scaled * &vectors.dagger()
}

/// Gradient descent on the unitary group: steps U <- exp(-i eta G) U with G
/// the Hermitian gradient reported by `grad`, eta chosen by backtracking from
/// an adaptively grown trial step. Stops when the gradient max-norm falls
/// below `tol`, when no step length yields sufficient decrease, or at
/// `max_iter`. The returned point is re-unitarized.
pub(crate) fn descend_unitary(
    start: CMatrix,
    f: &dyn Fn(&CMatrix) -> f64,
    grad: &dyn Fn(&CMatrix) -> CMatrix,
    max_iter: usize,
    tol: f64,
) -> DescentOutcome {
    const ARMIJO: f64 = 1e-4;
    let mut u = start;
    let mut fu = f(&u);
    let mut trial_step = 0.5;
    let mut converged = false;
    for _ in 0..max_iter {
        let g = grad(&u);
        if g.max_abs() < tol {
            converged = true;
            break;
        }
        let gsq = g.fro_norm().powi(2);
        let dec = eigh(&g).expect("gradient is square");
        let mut eta = trial_step;
        let mut accepted = false;
        // 60 halvings reach eta ~ 1e-18; below that the step is numerically
        // zero and the iterate is as stationary as the arithmetic allows.
        for _ in 0..60 {
            let u_try = &exp_step(&dec.values, &dec.vectors, eta) * &u;
            let f_try = f(&u_try);
            if f_try < fu - ARMIJO * eta * gsq {
                u = u_try;
                fu = f_try;
                trial_step = (eta * 2.0).min(8.0);
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let point = polar_unitary(&u);
    let value = f(&point);
    let grad_norm = grad(&point).max_abs();
    DescentOutcome {
        value,
        point,
        converged: converged || grad_norm < tol,
    }
}

/// Minimize `objective` over the unitary group from `restarts` Haar-random
/// starting points (seeded as seed, seed+1, ...; at least one always runs).
/// Restarts are independent; the best value wins, ties going to the lowest
/// restart index. Never errors on non-convergence — the flag on the result
/// reports it.
pub fn manifold_minimize(
    objective: Objective,
    restarts: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<OptimizeResult> {
    objective.validate()?;
    let n = objective.dim();
    let runs = restarts.max(1);
    let mut best: Option<DescentOutcome> = None;
    for idx in 0..runs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(idx as u64));
        let start = haar_unitary(n, &mut rng);
        let out = descend_unitary(
            start,
            &|u| objective.value(u),
            &|u| objective.gradient(u),
            max_iter,
            tol,
        );
        if best.as_ref().is_none_or(|b| out.value < b.value) {
            best = Some(out);
        }
    }
    let b = best.expect("at least one restart runs");
    Ok(OptimizeResult {
        value: b.value,
        stationarity_residual: objective.stationarity_residual(&b.point),
        minimizer: b.point,
        restarts_used: runs,
        converged: b.converged,
    })
}

fn diag_block(w: &CMatrix, which: usize, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| w[(which * d + i, which * d + j)])
}

fn two_block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let d = a.rows;
    CMatrix::from_fn(2 * d, 2 * d, |i, j| match (i / d, j / d) {
        (0, 0) => a[(i, j)],
        (1, 1) => b[(i - d, j - d)],
        _ => c(0.0, 0.0),
    })
}

/// Numerical minimum of tr[A conj(A)] at fixed singular values, found by
/// descending over the two unitary factors of A = U diag(sigma) V^dag. Serves
/// as the independent check that [`min_tr_a_abar`] cannot be beaten. Returns
/// the best value and the matrix A attaining it.
pub fn min_tr_a_abar_numeric(
    sigma: &[f64],
    restarts: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<(f64, CMatrix)> {
    check_sigma(sigma)?;
    let d = sigma.len();
    let sig = sigma.to_vec();
    // The pair (U, V) rides as one block-diagonal point in U(2d); the descent
    // core then moves both factors in a single exponential step.
    let assemble = move |w: &CMatrix| -> CMatrix {
        let mut ud = diag_block(w, 0, d);
        for j in 0..d {
            for i in 0..d {
                ud[(i, j)] *= sig[j];
            }
        }
        &ud * &diag_block(w, 1, d).dagger()
    };
    let f = |w: &CMatrix| {
        let a = assemble(w);
        (&a * &a.conj()).trace().re
    };
    let grad = |w: &CMatrix| {
        let a = assemble(w);
        let abar = a.conj();
        let m = &a * &abar; // A conj(A); perturbing U
        let mp = &abar * &a; // conj(A) A; perturbing V
        let gu = (&m - &m.dagger()).scale(c(0.0, 1.0));
        let gv = (&mp - &mp.dagger()).scale(c(0.0, -1.0));
        two_block_diag(&gu, &gv)
    };
    let runs = restarts.max(1);
    let mut best: Option<DescentOutcome> = None;
    for idx in 0..runs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(idx as u64));
        let start = two_block_diag(
            &haar_unitary(d, &mut rng),
            &haar_unitary(d, &mut rng),
        );
        let out = descend_unitary(start, &f, &grad, max_iter, tol);
        if best.as_ref().is_none_or(|b| out.value < b.value) {
            best = Some(out);
        }
    }
    let b = best.expect("at least one restart runs");
    Ok((b.value, assemble(&b.point)))
}
