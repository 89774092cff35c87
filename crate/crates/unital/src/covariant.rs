//! Calculus for channels covariant under conjugation by real orthogonal
//! matrices. Their dual states live in the abelian commutant spanned by
//! {1, F, Fhat}, so each is a point in a two-dimensional coordinate plane
//! (<F>, <Fhat>). This module provides the twirl onto that plane, the exact
//! region corresponding to mixtures of unitary channels (a triangle for even
//! d, a curved region for odd d), constructive boundary unitaries, and the
//! closed-form negativity — the minimal negative weight needed to reach a
//! state by an affine combination of mixtures of unitary channels.

use serde::Serialize;

use crate::channel::ChoiState;
use crate::linalg::{c, flip_operator, omega_projector, CMatrix};
use crate::{Error, Result, DEFAULT_TOL};

/// Point in the commutant plane: x = tr[rho F], y = tr[rho Fhat].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovariantCoords {
    pub x: f64,
    pub y: f64,
}

/// Convex weights on the three extremal covariant states: rho_0 (ideal
/// channel, coords (1,d)), rho_1 (antisymmetric, coords (-1,0)) and rho_2
/// (symmetric-traceless, coords (1,0)).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CovariantState {
    pub d: usize,
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
}

impl CovariantState {
    pub fn new(d: usize, q0: f64, q1: f64, q2: f64) -> Result<Self> {
        for (name, q) in [("q0", q0), ("q1", q1), ("q2", q2)] {
            if !(-DEFAULT_TOL..=1.0 + DEFAULT_TOL).contains(&q) {
                return Err(Error::OutOfRange {
                    name,
                    value: q,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        let sum = q0 + q1 + q2;
        if (sum - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::OutOfRange {
                name: "q0+q1+q2",
                value: sum,
                lo: 1.0,
                hi: 1.0,
            });
        }
        Ok(CovariantState { d, q0, q1, q2 })
    }

    /// Inverse of `coords`: q1 = (1-x)/2, q0 = y/d, q2 the remainder.
    pub fn from_coords(d: usize, coords: CovariantCoords) -> Result<Self> {
        let q0 = coords.y / d as f64;
        let q1 = (1.0 - coords.x) / 2.0;
        CovariantState::new(d, q0, q1, 1.0 - q0 - q1)
    }

    pub fn coords(&self) -> CovariantCoords {
        CovariantCoords {
            x: self.q0 - self.q1 + self.q2,
            y: self.d as f64 * self.q0,
        }
    }

    /// The d^2 x d^2 density matrix sum_i q_i P_i / tr[P_i].
    pub fn choi(&self) -> ChoiState {
        let d = self.d;
        let [p0, p1, p2] = commutant_projectors(d);
        let df = d as f64;
        let t1 = df * (df - 1.0) / 2.0;
        let t2 = df * (df + 1.0) / 2.0 - 1.0;
        let rho = &(&p0.scale(c(self.q0, 0.0)) + &p1.scale(c(self.q1 / t1, 0.0)))
            + &p2.scale(c(self.q2 / t2, 0.0));
        ChoiState::new(d, rho).expect("square by construction")
    }
}

/// Minimal projections spanning the commutant: P0 = |Omega><Omega|,
/// P1 = (1-F)/2 (antisymmetric), P2 = (1+F)/2 - P0.
pub fn commutant_projectors(d: usize) -> [CMatrix; 3] {
    let f = flip_operator(d);
    let p0 = omega_projector(d);
    let id = CMatrix::identity(d * d);
    let p1 = (&id - &f).scale(c(0.5, 0.0));
    let p2 = &(&id + &f).scale(c(0.5, 0.0)) - &p0;
    [p0, p1, p2]
}

/// Projects a dual state onto the commutant: q_i = tr[rho P_i]. The result
/// fully determines the twirled state and is idempotent on covariant input.
pub fn twirl(rho: &ChoiState) -> Result<CovariantState> {
    let d = rho.d();
    let [p0, p1, p2] = commutant_projectors(d);
    let q = |p: &CMatrix| (p * rho.rho()).trace().re;
    CovariantState::new(d, q(&p0).max(0.0), q(&p1).max(0.0), q(&p2).max(0.0))
}

/// Coordinates of the dual state of a unitary conjugation:
/// (tr[U conj(U)]/d, |tr U|^2/d).
pub fn coords_of_unitary(u: &CMatrix) -> Result<CovariantCoords> {
    let defect = u.unitary_defect();
    if defect > DEFAULT_TOL {
        return Err(Error::MatrixProperty {
            property: "unitary",
            defect,
            tol: DEFAULT_TOL,
        });
    }
    let d = u.rows as f64;
    let x = (u * &u.conj()).trace().re / d;
    let y = u.trace().norm_sqr() / d;
    Ok(CovariantCoords { x, y })
}

fn require_odd(d: usize) -> Result<()> {
    if d % 2 == 0 || d < 3 {
        return Err(Error::Unsupported(format!(
            "defined for odd dimension >= 3, got d = {d}"
        )));
    }
    Ok(())
}

/// Largest attainable |tr U|/d over unitaries with tr[U conj(U)]/d = x
/// (odd d): m(x) = sqrt[(1 - 1/d)(1 - 2/d + x)/2] + 1/d.
pub fn m_curve(x: f64, d: usize) -> Result<f64> {
    require_odd(d)?;
    let df = d as f64;
    let lo = -1.0 + 2.0 / df;
    if !(lo - DEFAULT_TOL..=1.0 + DEFAULT_TOL).contains(&x) {
        return Err(Error::OutOfRange {
            name: "x",
            value: x,
            lo,
            hi: 1.0,
        });
    }
    let x = x.clamp(lo, 1.0);
    // the radicand can round to -1e-16 at the left endpoint
    let radicand = (0.5 * (1.0 - 1.0 / df) * (1.0 - 2.0 / df + x)).max(0.0);
    Ok(radicand.sqrt() + 1.0 / df)
}

/// The unitary attaining m(x) for odd d: (d-1)/2 rotation blocks
/// [[alpha, beta], [-beta, alpha]] with alpha = d/(d-1) * (m(x) - 1/d),
/// padded by a single 1.
pub fn max_trace_unitary(x: f64, d: usize) -> Result<CMatrix> {
    let m = m_curve(x, d)?;
    let df = d as f64;
    let alpha = (df / (df - 1.0) * (m - 1.0 / df)).clamp(0.0, 1.0);
    let beta = (1.0 - alpha * alpha).sqrt();
    let mut u = CMatrix::zeros(d, d);
    for b in 0..(d - 1) / 2 {
        u[(2 * b, 2 * b)] = c(alpha, 0.0);
        u[(2 * b, 2 * b + 1)] = c(beta, 0.0);
        u[(2 * b + 1, 2 * b)] = c(-beta, 0.0);
        u[(2 * b + 1, 2 * b + 1)] = c(alpha, 0.0);
    }
    u[(d - 1, d - 1)] = c(1.0, 0.0);
    Ok(u)
}

/// Membership tolerance for the region tests: boundary points count as inside.
const MEMBER_TOL: f64 = 1e-9;

/// Whether the coordinate point corresponds to a mixture of unitary
/// channels. Even d: the whole covariant triangle qualifies. Odd d: the
/// convex region bounded below by the segment from (-1+2/d, 0) to (1, 0) and
/// above by the concave curve y = d m(x)^2.
pub fn membership_in_u(coords: CovariantCoords, d: usize) -> bool {
    let df = d as f64;
    let CovariantCoords { x, y } = coords;
    if d % 2 == 0 {
        // triangle with vertices (1, d), (-1, 0), (1, 0)
        return x <= 1.0 + MEMBER_TOL
            && y >= -MEMBER_TOL
            && y <= df * (x + 1.0) / 2.0 + MEMBER_TOL;
    }
    let lo = -1.0 + 2.0 / df;
    if x < lo - MEMBER_TOL || x > 1.0 + MEMBER_TOL || y < -MEMBER_TOL {
        return false;
    }
    let m = m_curve(x.clamp(lo, 1.0), d).expect("x clamped into range");
    y <= df * m * m + MEMBER_TOL
}

/// Negativity of a covariant state for odd d: zero on members, otherwise the
/// two-case closed form in q = q0/q1 obtained by scaling the member-region
/// boundary about rho_2.
pub fn negativity(state: &CovariantState) -> Result<f64> {
    require_odd(state.d)?;
    if membership_in_u(state.coords(), state.d) {
        return Ok(0.0);
    }
    let df = state.d as f64;
    let (q0, q1) = (state.q0, state.q1);
    if q1 <= 1e-12 {
        // cannot happen for genuine non-members; guard against bad input
        return Err(Error::Unsupported(
            "non-member state with q1 = 0 is outside the covariant simplex".into(),
        ));
    }
    let q = q0 / q1;
    let val = if q > 1.0 / (df * (df - 1.0)) {
        let root = (q * q + (df - 2.0) / (df - 1.0) * q).sqrt();
        (df - 1.0 + (df + 2.0 / (df - 2.0)) * q - 2.0 * (df - 1.0) / (df - 2.0) * root) * q1
            / (df - 2.0)
            - 1.0
    } else {
        df / (df - 1.0) * q1 - 1.0
    };
    Ok(val.max(0.0))
}

// --- the epsilon/delta family ----------------------------------------------

/// One-parameter family interpolating from the boundary of the mixture
/// region (epsilon = 0) to the antisymmetric state rho_1 (epsilon = 2/d):
/// rho = (1 - 1/d + eps/2) rho_1 + (1/d - eps/2) rho_+, where rho_+ is the
/// normalized symmetric projector. Satisfies tr[rho F] = -1 + 2/d - eps.
pub fn covariant_family(d: usize, epsilon: f64) -> Result<ChoiState> {
    require_odd(d)?;
    let df = d as f64;
    if !(0.0..=2.0 / df + 1e-12).contains(&epsilon) {
        return Err(Error::OutOfRange {
            name: "epsilon",
            value: epsilon,
            lo: 0.0,
            hi: 2.0 / df,
        });
    }
    let w_minus = 1.0 - 1.0 / df + epsilon / 2.0;
    let w_plus = 1.0 / df - epsilon / 2.0;
    let n = d * d;
    let f = flip_operator(d);
    let id = CMatrix::identity(n);
    let p_minus = (&id - &f).scale(c(0.5, 0.0));
    let p_plus = (&id + &f).scale(c(0.5, 0.0));
    let rho_minus = p_minus.scale(c(1.0 / (df * (df - 1.0) / 2.0), 0.0));
    let rho_plus = p_plus.scale(c(1.0 / (df * (df + 1.0) / 2.0), 0.0));
    let rho = &rho_minus.scale(c(w_minus, 0.0)) + &rho_plus.scale(c(w_plus, 0.0));
    ChoiState::new(d, rho)
}

/// The same family in its delta form rho = (1+delta)/d^2 1 - (delta/d) F,
/// valid for delta in [1/(d+1), 1/(d-1)].
pub fn covariant_family_delta(d: usize, delta: f64) -> Result<ChoiState> {
    covariant_family(d, epsilon_from_delta(d, delta))
}

/// The family resolved into simplex weights instead of a density matrix:
/// q1 = 1 - 1/d + eps/2 and the symmetric remainder split as dictated by
/// rho_+ = (P0 + P2)/(d(d+1)/2). Exact at the endpoints (no twirl rounding).
pub fn covariant_family_state(d: usize, epsilon: f64) -> Result<CovariantState> {
    require_odd(d)?;
    let df = d as f64;
    if !(0.0..=2.0 / df + 1e-12).contains(&epsilon) {
        return Err(Error::OutOfRange {
            name: "epsilon",
            value: epsilon,
            lo: 0.0,
            hi: 2.0 / df,
        });
    }
    let w_plus = 1.0 / df - epsilon / 2.0;
    let q1 = 1.0 - 1.0 / df + epsilon / 2.0;
    let q0 = w_plus * 2.0 / (df * (df + 1.0));
    CovariantState::new(d, q0, q1, 1.0 - q0 - q1)
}

/// Conversion between the two parametrizations:
/// eps = (d-1)((d+1) delta - 1)/d.
pub fn epsilon_from_delta(d: usize, delta: f64) -> f64 {
    let df = d as f64;
    (df - 1.0) * ((df + 1.0) * delta - 1.0) / df
}

// --- linear-program oracle ---------------------------------------------------

/// Number of boundary-curve samples used by the oracle.
pub const LP_BOUNDARY_SAMPLES: usize = 2000;

/// Independent check of `negativity` by brute force: minimize the negative
/// weight alpha_n over decompositions rho = alpha_p sigma_p - alpha_n sigma_n
/// with sigma_{p,n} in the discretized member region. Oracle only — the
/// closed form is the product; this guards it.
pub fn negativity_lp_oracle(state: &CovariantState, samples: usize) -> Result<f64> {
    require_odd(state.d)?;
    let d = state.d;
    let df = d as f64;
    let lo = -1.0 + 2.0 / df;
    // extreme points: base corners plus the curve. Sample x along a square-root
    // schedule so that m(x) (and hence the curve) is traversed smoothly in t.
    let mut points: Vec<(f64, f64)> = vec![(lo, 0.0), (1.0, 0.0)];
    let width = 1.0 - lo;
    for i in 0..=samples {
        let t = i as f64 / samples as f64;
        let x = lo + width * t * t;
        let m = m_curve(x, d)?;
        points.push((x, df * m * m));
    }
    let target = state.coords();
    // variables: beta_j >= 0 (positive part), gamma_j >= 0 (negative part)
    // constraints: sum_j beta_j p_j - sum_j gamma_j p_j = target (2 rows)
    //              sum_j beta_j - sum_j gamma_j = 1 (trace row)
    // objective: minimize sum_j gamma_j
    let mut columns = Vec::with_capacity(2 * points.len());
    let mut costs = Vec::with_capacity(2 * points.len());
    for &(x, y) in &points {
        columns.push([x, y, 1.0]);
        costs.push(0.0);
    }
    for &(x, y) in &points {
        columns.push([-x, -y, -1.0]);
        costs.push(1.0);
    }
    simplex_min(&columns, &costs, [target.x, target.y, 1.0])
}

/// Two-phase revised simplex for min c.z subject to A z = b, z >= 0, with
/// exactly three equality rows. Bland's rule, so it cannot cycle.
fn simplex_min(columns: &[[f64; 3]], costs: &[f64], b: [f64; 3]) -> Result<f64> {
    const EPS: f64 = 1e-11;
    let n = columns.len();
    // phase 1: artificial identity basis on sign-corrected b
    let mut sign = [1.0; 3];
    let mut b1 = b;
    for i in 0..3 {
        if b1[i] < 0.0 {
            sign[i] = -1.0;
            b1[i] = -b1[i];
        }
    }
    let flipped: Vec<[f64; 3]> = columns
        .iter()
        .map(|col| [sign[0] * col[0], sign[1] * col[1], sign[2] * col[2]])
        .collect();
    // basis holds column indices; n..n+3 are artificials
    let mut basis = [n, n + 1, n + 2];
    let mut binv = [[0.0; 3]; 3];
    for (i, row) in binv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut xb = b1;
    let col_of = |j: usize| -> [f64; 3] {
        if j < n {
            flipped[j]
        } else {
            let mut e = [0.0; 3];
            e[j - n] = 1.0;
            e
        }
    };
    let run_phase = |basis: &mut [usize; 3],
                         binv: &mut [[f64; 3]; 3],
                         xb: &mut [f64; 3],
                         cost_fn: &dyn Fn(usize) -> f64,
                         allow_artificial: bool|
     -> Result<()> {
        for _ in 0..200_000 {
            // y = c_B B^-1
            let cb = [cost_fn(basis[0]), cost_fn(basis[1]), cost_fn(basis[2])];
            let y = [
                cb[0] * binv[0][0] + cb[1] * binv[1][0] + cb[2] * binv[2][0],
                cb[0] * binv[0][1] + cb[1] * binv[1][1] + cb[2] * binv[2][1],
                cb[0] * binv[0][2] + cb[1] * binv[1][2] + cb[2] * binv[2][2],
            ];
            // Bland: first improving column
            let limit = if allow_artificial { n + 3 } else { n };
            let mut entering = None;
            for j in 0..limit {
                if basis.contains(&j) {
                    continue;
                }
                let a = col_of(j);
                let r = cost_fn(j) - (y[0] * a[0] + y[1] * a[1] + y[2] * a[2]);
                if r < -EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else {
                return Ok(());
            };
            let a = col_of(j);
            let u = [
                binv[0][0] * a[0] + binv[0][1] * a[1] + binv[0][2] * a[2],
                binv[1][0] * a[0] + binv[1][1] * a[1] + binv[1][2] * a[2],
                binv[2][0] * a[0] + binv[2][1] * a[1] + binv[2][2] * a[2],
            ];
            // ratio test, ties broken towards the smallest basis index
            let mut leave: Option<usize> = None;
            let mut best = f64::INFINITY;
            for i in 0..3 {
                if u[i] > EPS {
                    let ratio = xb[i] / u[i];
                    let better = ratio < best - EPS
                        || (ratio < best + EPS
                            && leave.is_some_and(|l| basis[i] < basis[l]));
                    if better {
                        best = ratio;
                        leave = Some(i);
                    }
                }
            }
            let Some(r) = leave else {
                return Err(Error::Unsupported("unbounded linear program".into()));
            };
            // pivot: update B^-1 and xb
            let piv = u[r];
            for k in 0..3 {
                binv[r][k] /= piv;
            }
            xb[r] /= piv;
            for i in 0..3 {
                if i != r {
                    let factor = u[i];
                    for k in 0..3 {
                        binv[i][k] -= factor * binv[r][k];
                    }
                    xb[i] -= factor * xb[r];
                }
            }
            basis[r] = j;
        }
        Err(Error::Unsupported("simplex iteration limit".into()))
    };

    // phase 1 minimizes the artificial mass
    let phase1_cost = |j: usize| if j >= n { 1.0 } else { 0.0 };
    run_phase(&mut basis, &mut binv, &mut xb, &phase1_cost, true)?;
    let artificial_mass: f64 = (0..3)
        .filter(|&i| basis[i] >= n)
        .map(|i| xb[i])
        .sum();
    if artificial_mass > 1e-7 {
        return Err(Error::Unsupported(
            "infeasible linear program: point outside the covariant simplex".into(),
        ));
    }
    // phase 2 with the true costs; artificials may idle in the basis at zero
    let phase2_cost = |j: usize| if j < n { costs[j] } else { 0.0 };
    run_phase(&mut basis, &mut binv, &mut xb, &phase2_cost, false)?;
    Ok((0..3)
        .map(|i| phase2_cost(basis[i]) * xb[i])
        .sum::<f64>()
        .max(0.0))
}
