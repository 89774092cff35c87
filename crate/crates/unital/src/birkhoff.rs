//! Two constructions that give a mixture-of-unitaries decomposition to
//! covariant channels lying outside the single-copy unitary hull.
//!
//! Tensoring a channel with a second copy of itself enlarges the symmetry
//! group, and the joint dual state is then tracked by just two expectation
//! values (f, f12) of the pair flips. For d = 3 an explicit one-parameter
//! family of unitaries traces out a curve of extreme points of the unitary
//! hull in that plane, and the covariant family re-enters the hull for
//! noise strengths up to `epsilon_star`.
//!
//! Tensoring with a completely depolarizing partner instead collapses the
//! bookkeeping to a single flip expectation. Unitaries built from purely
//! imaginary Hermitian quaternion matrices certify that the reachable
//! floor drops from -1 + 2/d to -1 + 2/d^2 for two-dimensional partners.

use std::ops::Mul;

use serde::Serialize;

use crate::channel::ChoiState;
use crate::covariant::covariant_family;
use crate::linalg::{c, flip_operator, kron, CMatrix, C64, ONE, ZERO};
use crate::optimize::Objective;
use crate::{Error, Result, DEFAULT_TOL};

/// Expectations of the two pair flips on a two-copy dual state:
/// f = <(1 x Flip + Flip x 1)/2>, f12 = <Flip x Flip>.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoCopyCoords {
    pub f: f64,
    pub f12: f64,
}

/// Curve endpoint data: the coordinates of the covariant family fall on
/// the parabola (x, x^2); the unitary hull is bounded by `theta_curve`.
const CURVE_F_LO: f64 = -23.0 / 27.0;
const CURVE_F_HI: f64 = 1.0 / 27.0;
const F12_FLOOR: f64 = -7.0 / 9.0;

fn flip_expectation(state: &ChoiState) -> f64 {
    // tr[rho Flip] = sum_{k,l} rho[(k,l),(l,k)] without materializing Flip.
    let d = state.d();
    let rho = state.rho();
    let mut acc = ZERO;
    for k in 0..d {
        for l in 0..d {
            acc += rho.data[(k * d + l) * d * d + (l * d + k)];
        }
    }
    acc.re
}

/// Coordinates of the product dual state rho_a x rho_b. The pair flips act
/// factor-wise, so f is the mean and f12 the product of the single-copy
/// flip expectations.
pub fn two_copy_coords_of_state(
    rho_a: &ChoiState,
    rho_b: &ChoiState,
) -> Result<TwoCopyCoords> {
    if rho_a.d() != rho_b.d() {
        return Err(Error::Dimension(format!(
            "factor dimensions differ: {} vs {}",
            rho_a.d(),
            rho_b.d()
        )));
    }
    let xa = flip_expectation(rho_a);
    let xb = flip_expectation(rho_b);
    Ok(TwoCopyCoords {
        f: 0.5 * (xa + xb),
        f12: xa * xb,
    })
}

fn square_side(n: usize) -> Option<usize> {
    let d = (n as f64).sqrt().round() as usize;
    (d * d == n).then_some(d)
}

/// Coordinates of the unitary channel X -> U X U^dag with U acting on the
/// joint d*d-dimensional space: f12 = tr[U conj(U)]/d^2 and
/// f = tr[U_s conj(U_s)^{T2}]/d^2 with U_s = (U + U^T)/2.
pub fn two_copy_coords_of_unitary(u: &CMatrix) -> Result<TwoCopyCoords> {
    if !u.is_square() {
        return Err(Error::Dimension(format!(
            "unitary must be square, got {}x{}",
            u.rows, u.cols
        )));
    }
    let d = square_side(u.rows).ok_or_else(|| {
        Error::Dimension(format!("side {} is not a product of two equal factors", u.rows))
    })?;
    let defect = u.unitary_defect();
    if defect > DEFAULT_TOL {
        return Err(Error::MatrixProperty {
            property: "unitary",
            defect,
            tol: DEFAULT_TOL,
        });
    }
    let dim = (d * d) as f64;
    Ok(TwoCopyCoords {
        f: Objective::TrUsymPt { d1: d, d2: d }.value(u),
        f12: (u * &u.conj()).trace().re / dim,
    })
}

/// Relabel a dual state of a channel on H x K from the channel ordering
/// (in_H in_K, out_H out_K) to the pair ordering (in_H out_H, in_K out_K),
/// so that per-factor flips become plain Kronecker factors.
fn split_channel_choi(rho: &CMatrix, d: usize, big_d: usize) -> CMatrix {
    let n = d * big_d * d * big_d;
    let pair = |idx: usize| -> usize {
        let a_k = idx % big_d;
        let rest = idx / big_d;
        let a_h = rest % d;
        let rest = rest / d;
        let j_k = rest % big_d;
        let j_h = rest / big_d;
        ((j_h * d + a_h) * big_d + j_k) * big_d + a_k
    };
    let mut out = CMatrix::zeros(n, n);
    for r in 0..n {
        let pr = pair(r);
        for col in 0..n {
            out.data[pr * n + pair(col)] = rho.data[r * n + col];
        }
    }
    out
}

/// Coordinates read directly off the full dual state of a channel on the
/// doubled space, by relabeling tensor factors and contracting against the
/// materialized flip operators. Slower than the factor-wise and unitary
/// routes; kept as an independent cross-check of both.
pub fn two_copy_coords_of_channel_choi(state: &ChoiState) -> Result<TwoCopyCoords> {
    let d = square_side(state.d()).ok_or_else(|| {
        Error::Dimension(format!(
            "channel dimension {} is not a product of two equal factors",
            state.d()
        ))
    })?;
    let rho = split_channel_choi(state.rho(), d, d);
    let flip = flip_operator(d);
    let id = CMatrix::identity(d * d);
    let f1 = (&rho * &kron(&flip, &id)).trace().re;
    let f2 = (&rho * &kron(&id, &flip)).trace().re;
    let f12 = (&rho * &kron(&flip, &flip)).trace().re;
    Ok(TwoCopyCoords {
        f: 0.5 * (f1 + f2),
        f12,
    })
}

/// Coordinates of the one-parameter unitary family for d = 3:
/// ((-(8/3)(cos t + 1)^2 + 3)/9, (16 cos^2 t - 7)/9) for t in [0, pi/2].
pub fn theta_curve(theta: f64) -> Result<TwoCopyCoords> {
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(Error::OutOfRange {
            name: "theta",
            value: theta,
            lo: 0.0,
            hi: std::f64::consts::FRAC_PI_2,
        });
    }
    let ct = theta.cos();
    Ok(TwoCopyCoords {
        f: (-(8.0 / 3.0) * (ct + 1.0) * (ct + 1.0) + 3.0) / 9.0,
        f12: (16.0 * ct * ct - 7.0) / 9.0,
    })
}

/// The fixed 9x9 unitary frame of the one-parameter construction. It does
/// not depend on the rotation angle; conjugating the rotation-block matrix
/// by it produces unitaries sitting exactly on `theta_curve`.
pub fn theta_frame() -> CMatrix {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let s3 = 1.0 / 3.0_f64.sqrt();
    let s6 = 1.0 / 6.0_f64.sqrt();
    let q38 = 0.375_f64.sqrt();
    let h2 = 0.5 * s2;
    let h6 = 0.5 * s6;
    let mut v = CMatrix::zeros(9, 9);
    let entries: [(usize, usize, C64); 25] = [
        (0, 1, c(0.0, s2)),
        (0, 2, c(0.0, -h6)),
        (0, 4, c(0.0, -h2)),
        (0, 8, c(s3, 0.0)),
        (1, 0, c(0.0, s2)),
        (1, 2, c(-q38, 0.0)),
        (1, 4, c(h2, 0.0)),
        (2, 5, c(s2, 0.0)),
        (2, 7, c(0.0, s2)),
        (3, 0, c(0.0, s2)),
        (3, 2, c(q38, 0.0)),
        (3, 4, c(-h2, 0.0)),
        (4, 2, c(0.0, s6)),
        (4, 4, c(0.0, s2)),
        (4, 8, c(s3, 0.0)),
        (5, 3, c(s2, 0.0)),
        (5, 6, c(0.0, s2)),
        (6, 5, c(-s2, 0.0)),
        (6, 7, c(0.0, s2)),
        (7, 3, c(-s2, 0.0)),
        (7, 6, c(0.0, s2)),
        (8, 1, c(0.0, -s2)),
        (8, 2, c(0.0, -h6)),
        (8, 4, c(0.0, -h2)),
        (8, 8, c(s3, 0.0)),
    ];
    for (r, col, z) in entries {
        v.data[r * 9 + col] = z;
    }
    v
}

/// U(theta) = V D(theta) V^T with D four rotation blocks and a trailing 1.
/// Unitary for every real angle; for theta in [0, pi/2] its coordinates
/// realize `theta_curve(theta)`.
pub fn theta_construction(theta: f64) -> CMatrix {
    let (sin, cos) = theta.sin_cos();
    let mut d = CMatrix::zeros(9, 9);
    for b in 0..4 {
        d.data[(2 * b) * 9 + 2 * b] = c(cos, 0.0);
        d.data[(2 * b) * 9 + 2 * b + 1] = c(-sin, 0.0);
        d.data[(2 * b + 1) * 9 + 2 * b] = c(sin, 0.0);
        d.data[(2 * b + 1) * 9 + 2 * b + 1] = c(cos, 0.0);
    }
    d.data[8 * 9 + 8] = ONE;
    let v = theta_frame();
    &(&v * &d) * &v.transpose()
}

/// Quadratic-form matrix of a unitary frame for the symmetrized objective:
/// writing the columns v_i = sum_k |k> x x_ik with x_ik in the second
/// factor, g_ij = tr[s_ij^2]/(d1 d2) where s_ij[k,l] = <x_ik, x_jl>.
/// For any singular-value vector s, <s, G s> = tr[A conj(A)^{T2}]/(d1 d2)
/// with A = V diag(s) V^T.
pub fn gram_g(v: &CMatrix, d1: usize, d2: usize) -> Result<CMatrix> {
    let n = d1 * d2;
    if !v.is_square() || v.rows != n {
        return Err(Error::Dimension(format!(
            "frame must be {n}x{n} for factors {d1} x {d2}, got {}x{}",
            v.rows, v.cols
        )));
    }
    let defect = v.unitary_defect();
    if defect > DEFAULT_TOL {
        return Err(Error::MatrixProperty {
            property: "unitary",
            defect,
            tol: DEFAULT_TOL,
        });
    }
    // s_ij[k,l] = <x_ik, x_jl> = sum_m conj(v[k d2 + m, i]) v[l d2 + m, j]
    let overlap = |i: usize, j: usize, k: usize, l: usize| -> C64 {
        (0..d2)
            .map(|m| v.data[(k * d2 + m) * n + i].conj() * v.data[(l * d2 + m) * n + j])
            .sum()
    };
    Ok(CMatrix::from_fn(n, n, |i, j| {
        let mut tr_sq = ZERO;
        for k in 0..d1 {
            for l in 0..d1 {
                tr_sq += overlap(i, j, k, l) * overlap(i, j, l, k);
            }
        }
        tr_sq / n as f64
    }))
}

/// Largest noise strength epsilon for which the d = 3 covariant family,
/// tensored with itself, still lands in the two-copy unitary hull:
/// (2/3)(4 - 3 sqrt(2) - sqrt(3) + sqrt(6)), within 3.1e-4 of 1/sqrt(10).
pub fn epsilon_star() -> f64 {
    (2.0 / 3.0) * (4.0 - 3.0 * 2.0_f64.sqrt() - 3.0_f64.sqrt() + 6.0_f64.sqrt())
}

/// Lower boundary of the two-copy unitary hull over f in [-23/27, 1/27]:
/// the f12 value of the curve point with first coordinate f.
pub fn curve_f12_floor(f: f64) -> Result<f64> {
    if !(CURVE_F_LO - DEFAULT_TOL..=CURVE_F_HI + DEFAULT_TOL).contains(&f) {
        return Err(Error::OutOfRange {
            name: "f",
            value: f,
            lo: CURVE_F_LO,
            hi: CURVE_F_HI,
        });
    }
    // invert f = (-(8/3)(c+1)^2 + 3)/9 for c = cos(theta) in [0, 1]
    let ct = ((9.0 - 27.0 * f) / 8.0).max(0.0).sqrt() - 1.0;
    Ok((16.0 * ct * ct - 7.0) / 9.0)
}

/// Membership of a coordinate pair in the two-copy unitary hull (d = 3):
/// the convex hull of `theta_curve` and the vertices (1, 1), (1/9, -7/9).
/// Boundary points within 1e-9 count as inside.
pub fn two_copy_membership(coords: TwoCopyCoords) -> bool {
    const TOL: f64 = 1e-9;
    let TwoCopyCoords { f, f12 } = coords;
    if f12 > 1.0 + TOL || f12 < F12_FLOOR - TOL || f < CURVE_F_LO - TOL {
        return false;
    }
    if f12 < 2.0 * f - 1.0 - TOL {
        return false;
    }
    if f < CURVE_F_HI {
        let floor = curve_f12_floor(f.max(CURVE_F_LO))
            .expect("clamped to the curve domain");
        if f12 < floor - TOL {
            return false;
        }
    }
    true
}

/// Quaternion x0 + x1 i + x2 j + x3 k over the reals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub x0: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(x0: f64, x1: f64, x2: f64, x3: f64) -> Self {
        Quaternion { x0, x1, x2, x3 }
    }

    pub fn re(&self) -> f64 {
        self.x0
    }

    /// Quaternion conjugate: negates the three imaginary components.
    pub fn conjugate(&self) -> Quaternion {
        Quaternion::new(self.x0, -self.x1, -self.x2, -self.x3)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x0 * self.x0 + self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, t: f64) -> Quaternion {
        Quaternion::new(t * self.x0, t * self.x1, t * self.x2, t * self.x3)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    // Hamilton product: ij = k, jk = i, ki = j.
    fn mul(self, q: Quaternion) -> Quaternion {
        let p = self;
        Quaternion::new(
            p.x0 * q.x0 - p.x1 * q.x1 - p.x2 * q.x2 - p.x3 * q.x3,
            p.x0 * q.x1 + p.x1 * q.x0 + p.x2 * q.x3 - p.x3 * q.x2,
            p.x0 * q.x2 - p.x1 * q.x3 + p.x2 * q.x0 + p.x3 * q.x1,
            p.x0 * q.x3 + p.x1 * q.x2 - p.x2 * q.x1 + p.x3 * q.x0,
        )
    }
}

impl std::ops::Add for Quaternion {
    type Output = Quaternion;

    fn add(self, q: Quaternion) -> Quaternion {
        Quaternion::new(
            self.x0 + q.x0,
            self.x1 + q.x1,
            self.x2 + q.x2,
            self.x3 + q.x3,
        )
    }
}

/// 2x2 complex image of a quaternion under i -> i sigma_z, j -> i sigma_y,
/// k -> i sigma_x; conjugation becomes the Hermitian adjoint and the norm
/// the square root of the determinant.
pub fn quaternion_embed(q: Quaternion) -> CMatrix {
    let mut m = CMatrix::zeros(2, 2);
    m.data[0] = c(q.x0, q.x1);
    m.data[1] = c(q.x2, q.x3);
    m.data[2] = c(-q.x2, q.x3);
    m.data[3] = c(q.x0, -q.x1);
    m
}

/// Square matrix over the quaternions, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct QuaternionMatrix {
    pub d: usize,
    pub entries: Vec<Quaternion>,
}

impl QuaternionMatrix {
    pub fn new(d: usize, entries: Vec<Quaternion>) -> Result<Self> {
        if entries.len() != d * d {
            return Err(Error::EntryLength {
                expected: d * d,
                got: entries.len(),
            });
        }
        Ok(QuaternionMatrix { d, entries })
    }

    pub fn at(&self, i: usize, j: usize) -> Quaternion {
        self.entries[i * self.d + j]
    }

    /// Quaternion adjoint: transpose with entry-wise conjugation.
    pub fn dagger(&self) -> QuaternionMatrix {
        let d = self.d;
        QuaternionMatrix {
            d,
            entries: (0..d * d)
                .map(|n| self.entries[(n % d) * d + n / d].conjugate())
                .collect(),
        }
    }

    /// Entry-wise conjugation without transposition; its complex image is
    /// the conjugated embedding partially transposed on the 2x2 blocks.
    pub fn conjugate_entries(&self) -> QuaternionMatrix {
        QuaternionMatrix {
            d: self.d,
            entries: self.entries.iter().map(|q| q.conjugate()).collect(),
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let h = self.dagger();
        self.entries
            .iter()
            .zip(&h.entries)
            .all(|(a, b)| (*a + b.scale(-1.0)).norm() <= tol)
    }
}

impl Mul for &QuaternionMatrix {
    type Output = QuaternionMatrix;

    fn mul(self, rhs: &QuaternionMatrix) -> QuaternionMatrix {
        assert_eq!(self.d, rhs.d, "quaternion matrix dimensions must match");
        let d = self.d;
        let entries = (0..d * d)
            .map(|n| {
                let (i, j) = (n / d, n % d);
                (0..d).fold(Quaternion::ZERO, |acc, k| {
                    acc + self.at(i, k) * rhs.at(k, j)
                })
            })
            .collect();
        QuaternionMatrix { d, entries }
    }
}

/// Complex 2d x 2d image of a quaternion matrix: each entry becomes its
/// 2x2 embedding, the quaternion index being the slow one.
pub fn quatmat_embed(a: &QuaternionMatrix) -> CMatrix {
    let d = a.d;
    CMatrix::from_fn(2 * d, 2 * d, |r, col| {
        let block = quaternion_embed(a.at(r / 2, col / 2));
        block.data[(r % 2) * 2 + col % 2]
    })
}

/// The purely imaginary Hermitian quaternion matrix A with
/// A^2 + 2A - (d^2 - 1) = 0 behind `quaternion_certificate`. Known for
/// d = 3 and d = 5.
pub fn quaternion_certificate_matrix(d: usize) -> Result<QuaternionMatrix> {
    let (o, i, j, k) = (
        Quaternion::ZERO,
        Quaternion::I,
        Quaternion::J,
        Quaternion::K,
    );
    match d {
        3 => {
            let entries = [
                o,
                i.scale(-2.0),
                j.scale(2.0),
                i.scale(2.0),
                o,
                k.scale(-2.0),
                j.scale(-2.0),
                k.scale(2.0),
                o,
            ];
            QuaternionMatrix::new(3, entries.to_vec())
        }
        5 => {
            let s12 = 12.0_f64.sqrt();
            let entries = [
                o,
                i.scale(-2.0),
                j.scale(-s12),
                k.scale(2.0),
                j.scale(-2.0),
                i.scale(2.0),
                o,
                o,
                j.scale(-2.0),
                k.scale(4.0),
                j.scale(s12),
                o,
                o,
                i.scale(-s12),
                o,
                k.scale(-2.0),
                j.scale(2.0),
                i.scale(s12),
                o,
                i.scale(-2.0),
                j.scale(2.0),
                k.scale(-4.0),
                o,
                i.scale(2.0),
                o,
            ];
            QuaternionMatrix::new(5, entries.to_vec())
        }
        _ => Err(Error::Unsupported(format!(
            "no quaternion model known for d = {d}; supported: 3, 5"
        ))),
    }
}

/// Unitary on a d x 2 system reaching the depolarizing-supplement floor:
/// U = (1 + A)/d in the complex embedding of the quaternion model A. The
/// result is verified Hermitian, unitary, and to satisfy
/// tr[U conj(U)^{T2}]/(2d) = -1 + 2/d^2, all within 1e-10.
pub fn quaternion_certificate(d: usize) -> Result<CMatrix> {
    const TOL: f64 = 1e-10;
    let a_hat = quatmat_embed(&quaternion_certificate_matrix(d)?);
    let u = (&CMatrix::identity(2 * d) + &a_hat).scale(c(1.0 / d as f64, 0.0));
    for (property, defect) in [
        ("hermitian", u.hermitian_defect()),
        ("unitary", u.unitary_defect()),
    ] {
        if defect > TOL {
            return Err(Error::MatrixProperty {
                property,
                defect,
                tol: TOL,
            });
        }
    }
    let df = d as f64;
    let floor_defect = (y_expectation(&u, d, 2)? - (-1.0 + 2.0 / (df * df))).abs();
    if floor_defect > TOL {
        return Err(Error::MatrixProperty {
            property: "floor expectation",
            defect: floor_defect,
            tol: TOL,
        });
    }
    Ok(u)
}

/// Flip expectation of the dual state of the unitary channel U on a
/// d x big_d system: tr[U conj(U)^{T2}]/(d big_d), the partial transpose
/// acting on the big_d-dimensional partner factor.
pub fn y_expectation(u: &CMatrix, d: usize, big_d: usize) -> Result<f64> {
    if !u.is_square() || u.rows != d * big_d {
        return Err(Error::Dimension(format!(
            "expected a {0}x{0} matrix for factors {d} x {big_d}, got {1}x{2}",
            d * big_d,
            u.rows,
            u.cols
        )));
    }
    Ok(Objective::TrUUbarT2 { d, big_d }.value(u))
}

/// `y_expectation` read off a materialized dual state of a channel on the
/// d x big_d system, by relabeling tensor factors and contracting against
/// Flip x 1. Independent cross-check of the trace formula.
pub fn y_expectation_of_channel_choi(
    state: &ChoiState,
    d: usize,
    big_d: usize,
) -> Result<f64> {
    if state.d() != d * big_d {
        return Err(Error::Dimension(format!(
            "channel dimension {} does not factor as {d} x {big_d}",
            state.d()
        )));
    }
    let rho = split_channel_choi(state.rho(), d, big_d);
    let y = kron(&flip_operator(d), &CMatrix::identity(big_d * big_d));
    Ok((&rho * &y).trace().re)
}

/// Flip expectation of the covariant family member tensored with the
/// completely depolarizing channel: the partner factor integrates out, so
/// the value is tr[rho_T Flip] = -1 + 2/d - epsilon for any partner size.
pub fn depolarizing_y_expectation(d: usize, epsilon: f64) -> Result<f64> {
    Ok(flip_expectation(&covariant_family(d, epsilon)?))
}

/// Whether the covariant family member at noise epsilon, tensored with a
/// big_d-dimensional completely depolarizing partner, is certified to be a
/// mixture of unitary channels: for big_d = 2 the quaternion construction
/// establishes the floor -1 + 2/d^2, hit exactly at epsilon = 2(d-1)/d^2.
/// Larger partners have only numerical evidence and are not decided here.
pub fn depolarizing_restores_birkhoff(
    d: usize,
    big_d: usize,
    epsilon: f64,
) -> Result<bool> {
    if big_d != 2 {
        return Err(Error::Unsupported(format!(
            "certified interval is known for two-dimensional partners only, got big_d = {big_d}"
        )));
    }
    let df = d as f64;
    let y = depolarizing_y_expectation(d, epsilon)?;
    Ok(y >= -1.0 + 2.0 / (df * df) - DEFAULT_TOL)
}
