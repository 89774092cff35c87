//! Dense complex-matrix primitives shared by every module: tensor products,
//! partial trace and partial transpose over a fixed product basis, SVD, Takagi
//! factorization of complex-symmetric matrices, the unitary exponential of a
//! Hermitian matrix, and the structural operators F (flip) and the maximally
//! entangled projector.
//!
//! `CMatrix` is a row-major dense matrix of complex doubles. The product basis
//! is always the ordered computational basis |1,1>, |1,2>, ..., |d1,d2>: the
//! pair (i, k) sits at index i*d2 + k. Heavy kernels (Hermitian
//! eigendecomposition, SVD, QR) are delegated to nalgebra behind this module's
//! interface; everything else is written out directly.

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, DEFAULT_TOL};

pub type C64 = Complex<f64>;

/// Complex literal helper.
pub const fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub const ZERO: C64 = c(0.0, 0.0);
pub const ONE: C64 = c(1.0, 0.0);
pub const I: C64 = c(0.0, 1.0);

/// Which tensor factor an operation acts on, for a space C^d1 (x) C^d2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

// --- core matrix type ---------------------------------------------------

/// Dense row-major complex matrix; entry (i, j) is `data[i*cols + j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

/// On-disk form: {"rows", "cols", "re", "im"} with row-major real/imag parts.
#[derive(Serialize, Deserialize, Clone)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl TryFrom<RawMatrix> for CMatrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        let expected = raw
            .rows
            .checked_mul(raw.cols)
            .ok_or(Error::EntryLength {
                expected: usize::MAX,
                got: 0,
            })?;
        if raw.re.len() != expected {
            return Err(Error::EntryLength {
                expected,
                got: raw.re.len(),
            });
        }
        if raw.im.len() != expected {
            return Err(Error::EntryLength {
                expected,
                got: raw.im.len(),
            });
        }
        let data = raw
            .re
            .iter()
            .zip(&raw.im)
            .map(|(&re, &im)| c(re, im))
            .collect();
        Ok(CMatrix {
            rows: raw.rows,
            cols: raw.cols,
            data,
        })
    }
}

impl From<CMatrix> for RawMatrix {
    fn from(m: CMatrix) -> Self {
        RawMatrix {
            rows: m.rows,
            cols: m.cols,
            re: m.data.iter().map(|z| z.re).collect(),
            im: m.data.iter().map(|z| z.im).collect(),
        }
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Builds a matrix from nested row slices of (re, im) pairs.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let cols = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == cols));
        CMatrix {
            rows: r,
            cols,
            data: rows.concat(),
        }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn dagger(&self) -> Self {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square(), "trace needs a square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry magnitude (max norm).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// ||M - M^dag||_max; 0 for Hermitian matrices.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut d: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        d
    }

    /// ||M - M^T||_max; 0 for complex-symmetric matrices.
    pub fn symmetric_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut d: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                d = d.max((self[(i, j)] - self[(j, i)]).norm());
            }
        }
        d
    }

    /// ||M^dag M - 1||_max; 0 for unitary matrices.
    pub fn unitary_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let gram = &self.dagger() * self;
        let mut d: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let target = if i == j { ONE } else { ZERO };
                d = d.max((gram[(i, j)] - target).norm());
            }
        }
        d
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.symmetric_defect() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitary_defect() <= tol
    }

    /// Hermitian within tol and smallest eigenvalue >= -tol.
    pub fn is_psd(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        let eig = eigh(self).expect("square by hermiticity check");
        eig.values.first().map_or(true, |&lo| lo >= -tol)
    }

    /// (M + M^dag)/2, for scrubbing rounding off numerically Hermitian input.
    pub fn hermitized(&self) -> Self {
        assert!(self.is_square());
        CMatrix::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("matrix serialization cannot fail")
    }
}

impl std::ops::Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl std::ops::Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl std::ops::Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

// --- tensor-product structure -------------------------------------------

/// Kronecker product: (a (x) b)[(i*rb + k), (j*cb + l)] = a[i,j] * b[k,l].
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

fn check_product_dims(m: &CMatrix, d1: usize, d2: usize) -> Result<()> {
    let n = d1 * d2;
    if m.rows != n || m.cols != n {
        return Err(Error::Dimension(format!(
            "expected a {n}x{n} matrix on C^{d1} (x) C^{d2}, got {}x{}",
            m.rows, m.cols
        )));
    }
    Ok(())
}

/// Traces out the given subsystem; the result lives on the other factor.
pub fn partial_trace(m: &CMatrix, d1: usize, d2: usize, sub: Subsystem) -> Result<CMatrix> {
    check_product_dims(m, d1, d2)?;
    match sub {
        Subsystem::First => {
            let mut out = CMatrix::zeros(d2, d2);
            for k in 0..d2 {
                for l in 0..d2 {
                    out[(k, l)] = (0..d1).map(|i| m[(i * d2 + k, i * d2 + l)]).sum();
                }
            }
            Ok(out)
        }
        Subsystem::Second => {
            let mut out = CMatrix::zeros(d1, d1);
            for i in 0..d1 {
                for j in 0..d1 {
                    out[(i, j)] = (0..d2).map(|k| m[(i * d2 + k, j * d2 + k)]).sum();
                }
            }
            Ok(out)
        }
    }
}

/// Linear extension of (A (x) B)^{T1} = A^T (x) B and (A (x) B)^{T2} = A (x) B^T.
pub fn partial_transpose(m: &CMatrix, d1: usize, d2: usize, sub: Subsystem) -> Result<CMatrix> {
    check_product_dims(m, d1, d2)?;
    let n = d1 * d2;
    let mut out = CMatrix::zeros(n, n);
    for i in 0..d1 {
        for k in 0..d2 {
            for j in 0..d1 {
                for l in 0..d2 {
                    let (r, c) = match sub {
                        Subsystem::First => (j * d2 + k, i * d2 + l),
                        Subsystem::Second => (i * d2 + l, j * d2 + k),
                    };
                    out[(r, c)] = m[(i * d2 + k, j * d2 + l)];
                }
            }
        }
    }
    Ok(out)
}

/// Flip (swap) operator F|k,l> = |l,k> on C^d (x) C^d; F^2 = 1, F^T = F, tr F = d.
pub fn flip_operator(d: usize) -> CMatrix {
    let mut f = CMatrix::zeros(d * d, d * d);
    for k in 0..d {
        for l in 0..d {
            f[(l * d + k, k * d + l)] = ONE;
        }
    }
    f
}

/// Rank-1 projector onto the maximally entangled state (1/sqrt d) sum_j |j,j>.
pub fn omega_projector(d: usize) -> CMatrix {
    let mut p = CMatrix::zeros(d * d, d * d);
    let w = c(1.0 / d as f64, 0.0);
    for j in 0..d {
        for k in 0..d {
            p[(j * d + j, k * d + k)] = w;
        }
    }
    p
}

// --- nalgebra-backed kernels ----------------------------------------------

fn to_na(m: &CMatrix) -> nalgebra::DMatrix<C64> {
    nalgebra::DMatrix::from_fn(m.rows, m.cols, |i, j| m[(i, j)])
}

fn from_na(m: &nalgebra::DMatrix<C64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EighResult {
    /// Eigenvalues sorted ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: CMatrix,
}

/// Hermitian eigendecomposition, eigenvalues ascending. The input is
/// symmetrized as (M + M^dag)/2 first, so rounding-level defects are harmless;
/// callers that must reject non-Hermitian input check the defect themselves.
pub fn eigh(m: &CMatrix) -> Result<EighResult> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let h = m.hermitized();
    let se = to_na(&h).symmetric_eigen();
    let n = m.rows;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| se.eigenvectors[(i, order[j])]);
    Ok(EighResult { values, vectors })
}

/// Singular value decomposition m = u diag(sigma) v^dag.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: CMatrix,
    /// Singular values sorted non-increasing.
    pub sigma: Vec<f64>,
    pub v: CMatrix,
}

impl SvdResult {
    /// u diag(sigma) v^dag.
    pub fn reconstruct(&self) -> CMatrix {
        let r = self.sigma.len();
        let mut ud = self.u.clone();
        for j in 0..r {
            for i in 0..ud.rows {
                ud[(i, j)] *= self.sigma[j];
            }
        }
        &ud * &self.v.dagger()
    }
}

/// Thin SVD with singular values sorted non-increasing.
pub fn svd(m: &CMatrix) -> SvdResult {
    let dec = to_na(m).svd(true, true);
    let u = dec.u.expect("u requested");
    let v_t = dec.v_t.expect("v_t requested");
    let r = dec.singular_values.len();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    let sigma: Vec<f64> = order.iter().map(|&k| dec.singular_values[k]).collect();
    let u = CMatrix::from_fn(u.nrows(), r, |i, j| u[(i, order[j])]);
    // v_t = v^dag, so v's columns are v_t's conjugated rows.
    let v = CMatrix::from_fn(v_t.ncols(), r, |i, j| v_t[(order[j], i)].conj());
    SvdResult { u, sigma, v }
}

/// Takagi factorization a = v diag(sigma) v^T of a complex-symmetric matrix.
#[derive(Debug, Clone)]
pub struct TakagiResult {
    pub v: CMatrix,
    /// Non-negative, sorted non-increasing.
    pub sigma: Vec<f64>,
}

impl TakagiResult {
    /// v diag(sigma) v^T.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.sigma.len();
        let mut vd = self.v.clone();
        for j in 0..n {
            for i in 0..vd.rows {
                vd[(i, j)] *= self.sigma[j];
            }
        }
        &vd * &self.v.transpose()
    }
}

/// Takagi factorization of a complex-symmetric matrix.
///
/// Uses the real symmetric embedding M = [[X, Y], [Y, -X]] of a = X + iY:
/// every eigenpair (sigma, [p; q]) of M with sigma >= 0 gives a Takagi pair
/// a conj(v) = sigma v with v = p + iq, and the spectrum of M is symmetric
/// about zero. Degenerate positive sigma come out orthonormal automatically;
/// the zero modes are re-orthonormalized over C.
pub fn takagi(a: &CMatrix) -> Result<TakagiResult> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "Takagi needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    let defect = a.symmetric_defect();
    if defect > DEFAULT_TOL {
        return Err(Error::MatrixProperty {
            property: "complex-symmetric",
            defect,
            tol: DEFAULT_TOL,
        });
    }
    let d = a.rows;
    let m = nalgebra::DMatrix::<f64>::from_fn(2 * d, 2 * d, |i, j| {
        let (bi, ii) = (i / d, i % d);
        let (bj, jj) = (j / d, j % d);
        let z = a[(ii, jj)];
        match (bi, bj) {
            (0, 0) => z.re,
            (0, 1) | (1, 0) => z.im,
            _ => -z.re,
        }
    });
    let se = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..2 * d).collect();
    order.sort_by(|&x, &y| se.eigenvalues[y].total_cmp(&se.eigenvalues[x]));

    let complex_vec = |k: usize| -> Vec<C64> {
        (0..d)
            .map(|i| c(se.eigenvectors[(i, k)], se.eigenvectors[(d + i, k)]))
            .collect()
    };

    let sigma_max = se.eigenvalues[order[0]].max(0.0);
    let ztol = 1e-12 * sigma_max.max(1.0);
    let mut sigma = Vec::with_capacity(d);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    for &k in order.iter().take(d) {
        let lam = se.eigenvalues[k];
        if lam > ztol {
            sigma.push(lam);
            cols.push(complex_vec(k));
        }
    }
    // Zero modes: the real kernel double-counts each complex direction (v and
    // iv), so pick an orthonormal complex basis by pivoted Gram-Schmidt over
    // all near-zero eigenvectors.
    let deficit = d - cols.len();
    if deficit > 0 {
        let mut accepted = 0usize;
        for &k in &order {
            if accepted == deficit {
                break;
            }
            if se.eigenvalues[k].abs() > ztol {
                continue;
            }
            let mut v = complex_vec(k);
            // positive modes are orthogonal to the kernel already; projecting
            // against every accepted column costs nothing and is safer
            for prev in &cols {
                let ip: C64 = prev.iter().zip(&v).map(|(p, x)| p.conj() * x).sum();
                for (x, p) in v.iter_mut().zip(prev) {
                    *x -= ip * p;
                }
            }
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                for x in v.iter_mut() {
                    *x /= norm;
                }
                sigma.push(0.0);
                cols.push(v);
                accepted += 1;
            }
        }
        if cols.len() != d {
            return Err(Error::Unsupported(
                "Takagi kernel basis extraction failed".into(),
            ));
        }
    }
    let v = CMatrix::from_fn(d, d, |i, j| cols[j][i]);
    Ok(TakagiResult { v, sigma })
}

/// exp(iX) for Hermitian X, computed through the eigendecomposition; the
/// result is unitary to machine precision.
pub fn unitary_from_hermitian(x: &CMatrix) -> Result<CMatrix> {
    let defect = x.hermitian_defect();
    if !x.is_square() || defect > DEFAULT_TOL {
        return Err(Error::MatrixProperty {
            property: "Hermitian",
            defect,
            tol: DEFAULT_TOL,
        });
    }
    let eig = eigh(x)?;
    let n = x.rows;
    // V diag(e^{i lambda}) V^dag
    let mut vp = eig.vectors.clone();
    for j in 0..n {
        let phase = c(eig.values[j].cos(), eig.values[j].sin());
        for i in 0..n {
            vp[(i, j)] *= phase;
        }
    }
    Ok(&vp * &eig.vectors.dagger())
}

/// Haar-random unitary: QR of a complex Gaussian matrix with the R diagonal
/// phase-normalized.
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    let g = nalgebra::DMatrix::<C64>::from_fn(d, d, |_, _| {
        let (a, b) = gauss_pair(rng);
        c(a, b).scale(std::f64::consts::FRAC_1_SQRT_2)
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = from_na(&q);
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            ONE
        };
        for i in 0..d {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Least-squares solve min ||A x - b||_2 with A given by real columns.
pub(crate) fn lstsq_real(columns: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let rows = b.len();
    assert!(columns.iter().all(|col| col.len() == rows));
    let a = nalgebra::DMatrix::<f64>::from_fn(rows, columns.len(), |i, j| columns[j][i]);
    let rhs = nalgebra::DVector::<f64>::from_row_slice(b);
    let dec = a.svd(true, true);
    let x = dec
        .solve(&rhs, 1e-12)
        .expect("svd computed with u and v_t");
    x.iter().copied().collect()
}

/// One Box-Muller pair of independent standard normals.
fn gauss_pair(rng: &mut impl Rng) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    let t = 2.0 * std::f64::consts::PI * u2;
    (r * t.cos(), r * t.sin())
}
