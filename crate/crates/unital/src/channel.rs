//! Channel representations and conversions: Kraus form, the dual (Choi) state,
//! and the Hilbert-Schmidt superoperator, plus the two constructive
//! decompositions available for every unital channel — the exact two-term
//! splitting of the superoperator into unitaries on Hilbert-Schmidt space, and
//! an affine combination of unitary conjugations.
//!
//! Operators are vectorized row-major: vec(X)[i*d + j] = X[i, j], so
//! conjugation rho -> A rho A^dag becomes the matrix A (x) conj(A).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{
    c, eigh, haar_unitary, kron, lstsq_real, partial_trace, svd, CMatrix,
    Subsystem, ONE,
};
use crate::{Error, Result, DEFAULT_TOL};

// --- Kraus form -----------------------------------------------------------

/// A completely positive map given by Kraus operators A_i; trace-preserving
/// when sum A_i^dag A_i = 1 and unital when sum A_i A_i^dag = 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawChannel", into = "RawChannel")]
pub struct KrausChannel {
    d: usize,
    kraus: Vec<CMatrix>,
}

#[derive(Serialize, Deserialize, Clone)]
struct RawChannel {
    d: usize,
    kraus: Vec<CMatrix>,
}

impl TryFrom<RawChannel> for KrausChannel {
    type Error = Error;

    fn try_from(raw: RawChannel) -> Result<Self> {
        KrausChannel::new(raw.d, raw.kraus)
    }
}

impl From<KrausChannel> for RawChannel {
    fn from(ch: KrausChannel) -> Self {
        RawChannel {
            d: ch.d,
            kraus: ch.kraus,
        }
    }
}

impl KrausChannel {
    pub fn new(d: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension("channel dimension must be positive".into()));
        }
        if kraus.is_empty() {
            return Err(Error::Dimension("at least one Kraus operator required".into()));
        }
        if let Some(bad) = kraus.iter().find(|a| a.rows != d || a.cols != d) {
            return Err(Error::Dimension(format!(
                "Kraus operator is {}x{}, expected {d}x{d}",
                bad.rows, bad.cols
            )));
        }
        Ok(KrausChannel { d, kraus })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn n_kraus(&self) -> usize {
        self.kraus.len()
    }

    /// T(x) = sum_i A_i x A_i^dag.
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        assert_eq!((x.rows, x.cols), (self.d, self.d));
        let mut out = CMatrix::zeros(self.d, self.d);
        for a in &self.kraus {
            out = &out + &(&(a * x) * &a.dagger());
        }
        out
    }

    /// ||sum A_i^dag A_i - 1||_max.
    pub fn tp_defect(&self) -> f64 {
        let mut s = CMatrix::zeros(self.d, self.d);
        for a in &self.kraus {
            s = &s + &(&a.dagger() * a);
        }
        (&s - &CMatrix::identity(self.d)).max_abs()
    }

    /// ||sum A_i A_i^dag - 1||_max.
    pub fn unital_defect(&self) -> f64 {
        let mut s = CMatrix::zeros(self.d, self.d);
        for a in &self.kraus {
            s = &s + &(a * &a.dagger());
        }
        (&s - &CMatrix::identity(self.d)).max_abs()
    }

    pub fn is_tp(&self, tol: f64) -> bool {
        self.tp_defect() <= tol
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.unital_defect() <= tol
    }

    /// Complete positivity is built into the representation.
    pub fn is_cp(&self, _tol: f64) -> bool {
        true
    }

    /// Matrix of the map on vectorized operators: sum_i A_i (x) conj(A_i).
    pub fn superoperator(&self) -> Superoperator {
        let n = self.d * self.d;
        let mut t_hat = CMatrix::zeros(n, n);
        for a in &self.kraus {
            t_hat = &t_hat + &kron(a, &a.conj());
        }
        Superoperator { d: self.d, t_hat }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("channel serialization cannot fail")
    }
}

// --- dual state -----------------------------------------------------------

/// The dual density operator rho_T = (id (x) T)|Omega><Omega| on C^d (x) C^d;
/// the first factor is the reference system, the second carries the output.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawChoi", into = "RawChoi")]
pub struct ChoiState {
    d: usize,
    rho: CMatrix,
}

#[derive(Serialize, Deserialize, Clone)]
struct RawChoi {
    d: usize,
    rho: CMatrix,
}

impl TryFrom<RawChoi> for ChoiState {
    type Error = Error;

    fn try_from(raw: RawChoi) -> Result<Self> {
        ChoiState::new(raw.d, raw.rho)
    }
}

impl From<ChoiState> for RawChoi {
    fn from(s: ChoiState) -> Self {
        RawChoi { d: s.d, rho: s.rho }
    }
}

impl ChoiState {
    pub fn new(d: usize, rho: CMatrix) -> Result<Self> {
        let n = d * d;
        if d == 0 || rho.rows != n || rho.cols != n {
            return Err(Error::Dimension(format!(
                "dual state of a dimension-{d} channel must be {n}x{n}, got {}x{}",
                rho.rows, rho.cols
            )));
        }
        Ok(ChoiState { d, rho })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    /// ||tr_2 rho - 1/d||_max: zero exactly when the channel is trace-preserving.
    pub fn tp_defect(&self) -> f64 {
        let r = partial_trace(&self.rho, self.d, self.d, Subsystem::Second)
            .expect("shape enforced at construction");
        (&r - &CMatrix::identity(self.d).scale(c(1.0 / self.d as f64, 0.0))).max_abs()
    }

    /// ||tr_1 rho - 1/d||_max: zero exactly when the channel is unital.
    pub fn unital_defect(&self) -> f64 {
        let r = partial_trace(&self.rho, self.d, self.d, Subsystem::First)
            .expect("shape enforced at construction");
        (&r - &CMatrix::identity(self.d).scale(c(1.0 / self.d as f64, 0.0))).max_abs()
    }

    pub fn is_tp(&self, tol: f64) -> bool {
        self.tp_defect() <= tol
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.unital_defect() <= tol
    }

    /// Complete positivity of the channel = positivity of the dual state.
    pub fn is_cp(&self, tol: f64) -> bool {
        self.rho.is_psd(tol)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("state serialization cannot fail")
    }
}

// --- superoperator ----------------------------------------------------------

/// T-hat, the d^2 x d^2 matrix of the channel on Hilbert-Schmidt space. For
/// unital trace-preserving channels this is an operator-norm contraction.
#[derive(Debug, Clone)]
pub struct Superoperator {
    pub d: usize,
    pub t_hat: CMatrix,
}

impl Superoperator {
    /// Applies the map to a d x d operator through vectorization.
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let d = self.d;
        assert_eq!((x.rows, x.cols), (d, d));
        let xv = CMatrix {
            rows: d * d,
            cols: 1,
            data: x.data.clone(),
        };
        let yv = &self.t_hat * &xv;
        CMatrix {
            rows: d,
            cols: d,
            data: yv.data,
        }
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        svd(&self.t_hat).sigma.first().copied().unwrap_or(0.0)
    }
}

// --- mixtures and affine combinations --------------------------------------

/// Convex combination of unitary conjugations, the Birkhoff-like subset of
/// unital channels.
#[derive(Debug, Clone)]
pub struct MixtureOfUnitaries {
    weights: Vec<f64>,
    unitaries: Vec<CMatrix>,
}

impl MixtureOfUnitaries {
    pub fn new(weights: Vec<f64>, unitaries: Vec<CMatrix>) -> Result<Self> {
        if weights.is_empty() || weights.len() != unitaries.len() {
            return Err(Error::Dimension(format!(
                "{} weights vs {} unitaries",
                weights.len(),
                unitaries.len()
            )));
        }
        if let Some(&w) = weights.iter().find(|&&w| w <= 0.0) {
            return Err(Error::OutOfRange {
                name: "weight",
                value: w,
                lo: 0.0,
                hi: 1.0,
            });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::OutOfRange {
                name: "weight sum",
                value: total,
                lo: 1.0,
                hi: 1.0,
            });
        }
        let d = unitaries[0].rows;
        for u in &unitaries {
            let defect = u.unitary_defect();
            if u.rows != d || u.cols != d {
                return Err(Error::Dimension("mixed unitaries of unequal size".into()));
            }
            if defect > DEFAULT_TOL {
                return Err(Error::MatrixProperty {
                    property: "unitary",
                    defect,
                    tol: DEFAULT_TOL,
                });
            }
        }
        Ok(MixtureOfUnitaries { weights, unitaries })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn unitaries(&self) -> &[CMatrix] {
        &self.unitaries
    }

    /// Kraus form with A_i = sqrt(w_i) U_i.
    pub fn to_kraus(&self) -> KrausChannel {
        let d = self.unitaries[0].rows;
        let kraus = self
            .weights
            .iter()
            .zip(&self.unitaries)
            .map(|(&w, u)| u.scale(c(w.sqrt(), 0.0)))
            .collect();
        KrausChannel::new(d, kraus).expect("shapes validated at construction")
    }
}

/// Affine combination sum_i lambda_i U_i . U_i^dag with real coefficients
/// summing to one; coefficients may be negative.
#[derive(Debug, Clone)]
pub struct AffineUnitaryCombo {
    pub coefficients: Vec<f64>,
    pub unitaries: Vec<CMatrix>,
}

impl AffineUnitaryCombo {
    /// sum_i lambda_i U_i (x) conj(U_i).
    pub fn superoperator(&self) -> Superoperator {
        let d = self.unitaries[0].rows;
        let mut t_hat = CMatrix::zeros(d * d, d * d);
        for (&lam, u) in self.coefficients.iter().zip(&self.unitaries) {
            t_hat = &t_hat + &kron(u, &u.conj()).scale(c(lam, 0.0));
        }
        Superoperator { d, t_hat }
    }
}

/// Exact two-term representation of a Hilbert-Schmidt contraction as an
/// average of two unitaries on Hilbert-Schmidt space.
#[derive(Debug, Clone)]
pub struct HsContraction {
    pub weights: [f64; 2],
    pub hs_unitaries: [CMatrix; 2],
}

impl HsContraction {
    pub fn reconstruct(&self) -> CMatrix {
        &self.hs_unitaries[0].scale(c(self.weights[0], 0.0))
            + &self.hs_unitaries[1].scale(c(self.weights[1], 0.0))
    }
}

// --- conversions -----------------------------------------------------------

/// Dual state of a Kraus channel: rho = (1/d) sum_i w_i w_i^dag where
/// w_i[j*d + a] = A_i[a, j]. Inputs that are not trace-preserving still map
/// through the same linear formula.
pub fn kraus_to_choi(ch: &KrausChannel) -> ChoiState {
    let d = ch.d;
    let n = d * d;
    let mut rho = CMatrix::zeros(n, n);
    for a in &ch.kraus {
        let w: Vec<_> = (0..n).map(|r| a[(r % d, r / d)]).collect();
        for r in 0..n {
            for s in 0..n {
                rho[(r, s)] += w[r] * w[s].conj();
            }
        }
    }
    ChoiState::new(d, rho.scale(c(1.0 / d as f64, 0.0))).expect("square by construction")
}

/// Inverse duality: eigendecompose rho and turn each eigenvector with
/// eigenvalue above rank_tol (relative to the largest) into a Kraus operator.
/// Fails if rho has an eigenvalue below -rank_tol, i.e. is not CP.
pub fn choi_to_kraus(state: &ChoiState, rank_tol: f64) -> Result<KrausChannel> {
    let d = state.d;
    let eig = eigh(&state.rho)?;
    let scale = eig.values.last().copied().unwrap_or(0.0).max(rank_tol);
    let cut = rank_tol * scale;
    if let Some(&lam) = eig.values.iter().find(|&&lam| lam < -cut) {
        return Err(Error::MatrixProperty {
            property: "positive semidefinite",
            defect: -lam,
            tol: cut,
        });
    }
    let mut kraus = Vec::new();
    for (k, &lam) in eig.values.iter().enumerate().rev() {
        if lam <= cut {
            break;
        }
        let col = eig.vectors.col(k);
        let factor = (d as f64 * lam).sqrt();
        kraus.push(CMatrix::from_fn(d, d, |a, j| {
            col[j * d + a] * factor
        }));
    }
    KrausChannel::new(d, kraus)
}

/// Default eigenvalue cutoff for `choi_to_kraus`.
pub const RANK_TOL: f64 = 1e-10;

/// Splits a Hilbert-Schmidt contraction t into (W+ + W-)/2 with both terms
/// unitary on Hilbert-Schmidt space: from the SVD t = U D V^dag take
/// W± = U (D ± i sqrt(1 - D^2)) V^dag.
pub fn hs_contraction_decomposition(t: &Superoperator) -> Result<HsContraction> {
    let dec = svd(&t.t_hat);
    let top = dec.sigma.first().copied().unwrap_or(0.0);
    if top > 1.0 + DEFAULT_TOL {
        return Err(Error::MatrixProperty {
            property: "Hilbert-Schmidt contraction",
            defect: top - 1.0,
            tol: DEFAULT_TOL,
        });
    }
    let n = t.t_hat.rows;
    let build = |sign: f64| -> CMatrix {
        let mut ud = dec.u.clone();
        for (j, &s) in dec.sigma.iter().enumerate() {
            let s = s.min(1.0);
            let z = c(s, sign * (1.0 - s * s).sqrt());
            for i in 0..n {
                ud[(i, j)] *= z;
            }
        }
        &ud * &dec.v.dagger()
    };
    Ok(HsContraction {
        weights: [0.5, 0.5],
        hs_unitaries: [build(1.0), build(-1.0)],
    })
}

/// Expresses a unital channel as an affine combination of unitary
/// conjugations. Draws `generator_count - 1` Haar-random conjugations plus the
/// identity conjugation, solves for real coefficients by least squares with
/// the affine constraint eliminated, and resamples (up to 5 times) if the
/// sampled family fails to reach residual 1e-8. Requires
/// generator_count >= (d^2-1)^2 + 2, the generic affine dimension plus one.
pub fn affine_unitary_decomposition(
    ch: &KrausChannel,
    generator_count: usize,
    seed: u64,
) -> Result<AffineUnitaryCombo> {
    const RESIDUAL_TOL: f64 = 1e-8;
    const MAX_RETRIES: usize = 5;
    let d = ch.d;
    let n = d * d;
    let min_gen = (n - 1) * (n - 1) + 2;
    if generator_count < min_gen {
        return Err(Error::OutOfRange {
            name: "generator_count",
            value: generator_count as f64,
            lo: min_gen as f64,
            hi: f64::INFINITY,
        });
    }
    let t_hat = ch.superoperator().t_hat;
    let target = &t_hat - &CMatrix::identity(n);
    let b: Vec<f64> = target
        .data
        .iter()
        .flat_map(|z| [z.re, z.im])
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for retry in 0..=MAX_RETRIES {
        let unitaries: Vec<CMatrix> = (0..generator_count - 1)
            .map(|_| haar_unitary(d, &mut rng))
            .collect();
        let columns: Vec<Vec<f64>> = unitaries
            .iter()
            .map(|u| {
                let hat = &kron(u, &u.conj()) - &CMatrix::identity(n);
                hat.data.iter().flat_map(|z| [z.re, z.im]).collect()
            })
            .collect();
        let lambda = lstsq_real(&columns, &b);
        // residual of the full superoperator equation
        let mut recon = CMatrix::identity(n);
        for (lam, u) in lambda.iter().zip(&unitaries) {
            let hat = &kron(u, &u.conj()) - &CMatrix::identity(n);
            recon = &recon + &hat.scale(c(*lam, 0.0));
        }
        let residual = (&recon - &t_hat).max_abs();
        if residual < RESIDUAL_TOL {
            let lam_id = 1.0 - lambda.iter().sum::<f64>();
            let mut coefficients = lambda;
            coefficients.push(lam_id);
            let mut unitaries = unitaries;
            unitaries.push(CMatrix::identity(d));
            return Ok(AffineUnitaryCombo {
                coefficients,
                unitaries,
            });
        }
        if retry == MAX_RETRIES {
            return Err(Error::RankDeficient {
                retries: MAX_RETRIES,
            });
        }
    }
    unreachable!("loop returns or errors on the last retry")
}

/// Traceless Hermitian basis of embedded Pauli matrices: sigma_x over pairs
/// j < k, then sigma_y over the same pairs, then the d-1 stepwise sigma_z
/// terms |j><j| - |j+1><j+1|. Spans the traceless Hermitian space but is not
/// orthogonal.
pub fn pauli_basis(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in j + 1..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = ONE;
            m[(k, j)] = ONE;
            out.push(m);
        }
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = c(0.0, -1.0);
            m[(k, j)] = c(0.0, 1.0);
            out.push(m);
        }
    }
    for j in 0..d - 1 {
        let mut m = CMatrix::zeros(d, d);
        m[(j, j)] = ONE;
        m[(j + 1, j + 1)] = -ONE;
        out.push(m);
    }
    out
}

/// T(rho) = (tr[rho] 1 - rho^T)/(d - 1), the unital channel dual to the
/// normalized antisymmetric projector. Kraus operators
/// (|j><k| - |k><j|)/sqrt(d-1) over pairs j < k.
pub fn werner_holevo(d: usize) -> Result<KrausChannel> {
    if d < 2 {
        return Err(Error::OutOfRange {
            name: "d",
            value: d as f64,
            lo: 2.0,
            hi: f64::INFINITY,
        });
    }
    let norm = c(1.0 / ((d - 1) as f64).sqrt(), 0.0);
    let mut kraus = Vec::with_capacity(d * (d - 1) / 2);
    for j in 0..d {
        for k in j + 1..d {
            let mut a = CMatrix::zeros(d, d);
            a[(j, k)] = norm;
            a[(k, j)] = -norm;
            kraus.push(a);
        }
    }
    KrausChannel::new(d, kraus)
}

/// T(rho) = tr[rho] 1/d, dual state 1/d^2. Kraus operators E_jk/sqrt(d).
pub fn completely_depolarizing(d: usize) -> KrausChannel {
    let norm = c(1.0 / (d as f64).sqrt(), 0.0);
    let mut kraus = Vec::with_capacity(d * d);
    for j in 0..d {
        for k in 0..d {
            let mut a = CMatrix::zeros(d, d);
            a[(j, k)] = norm;
            kraus.push(a);
        }
    }
    KrausChannel::new(d, kraus).expect("valid by construction")
}

/// Identity channel: single Kraus operator 1.
pub fn identity_channel(d: usize) -> KrausChannel {
    KrausChannel::new(d, vec![CMatrix::identity(d)]).expect("valid by construction")
}
