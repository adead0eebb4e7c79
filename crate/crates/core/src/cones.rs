//! Matrix cones over `V = M_k` with the diagonal algebra `A = D_k` acting.
//!
//! An element of `M_n(M_k)` is an `nk × nk` Hermitian matrix whose `(i, j)`
//! block is `X_ij`. A diagonal tuple `C = (D_1, …, D_n)` acts by
//! `C* X C = Σ_ij D_i* X_ij D_j`, and the max cone is generated by the
//! block matrices `(D_i x D_j*)_ij` with `x ∈ V⁺`.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{
    psd_check, rank_one_decompose, Complex, ComplexMatrix, HermitianMatrix, LinalgError, PsdVerdict,
    DEFAULT_PSD_TOL,
};
use crate::random::{gaussian_vector, gue, trial_rng, unit_vector, wishart};

/// Largest `n·k` accepted by [`verify_pmn`].
pub const MAX_PMN_DIM: usize = 64;
/// Relative threshold below which a sampled `C* X C` value counts as negative.
pub const CMIN_VIOLATION_TOL: f64 = 1e-10;
/// Relative reconstruction error allowed for a max-cone certificate.
pub const CERTIFICATE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConeError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("n and k must be positive")]
    ZeroDimension,
    #[error("matrix has dimension {found}, expected n·k = {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("n·k = {nk} exceeds the limit {MAX_PMN_DIM}")]
    TooLarge { nk: usize },
    #[error("no cone generators given")]
    NoGenerators,
    #[error("generator {index} is not PSD (minimum eigenvalue {min_eig:e})")]
    GeneratorNotPsd { index: usize, min_eig: f64 },
}

/// Hermitian element of `M_n(M_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockElement {
    n: usize,
    k: usize,
    x: HermitianMatrix,
}

impl BlockElement {
    pub fn new(n: usize, k: usize, x: HermitianMatrix) -> Result<Self, ConeError> {
        if n == 0 || k == 0 {
            return Err(ConeError::ZeroDimension);
        }
        if x.dim() != n * k {
            return Err(ConeError::DimensionMismatch {
                expected: n * k,
                found: x.dim(),
            });
        }
        Ok(Self { n, k, x })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.x
    }

    pub fn block(&self, i: usize, j: usize) -> ComplexMatrix {
        self.x.as_matrix().block(i * self.k, j * self.k, self.k, self.k)
    }

    /// `Re (C* X C η, η)`.
    pub fn compress(&self, c: &DiagonalTuple, eta: &[Complex]) -> f64 {
        self.x.quadratic_form(&c.apply(eta))
    }
}

/// `C = (diag(d_1), …, diag(d_n))` with each `d_i ∈ ℂ^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalTuple {
    pub n: usize,
    pub k: usize,
    pub diags: Vec<Vec<Complex>>,
}

impl DiagonalTuple {
    pub fn new(diags: Vec<Vec<Complex>>) -> Result<Self, ConeError> {
        let n = diags.len();
        let k = diags.first().map_or(0, Vec::len);
        if n == 0 || k == 0 {
            return Err(ConeError::ZeroDimension);
        }
        if let Some(bad) = diags.iter().find(|d| d.len() != k) {
            return Err(ConeError::DimensionMismatch {
                expected: k,
                found: bad.len(),
            });
        }
        Ok(Self { n, k, diags })
    }

    /// Splits a vector of length `n·k` into consecutive diagonals.
    pub fn from_vector(n: usize, k: usize, v: &[Complex]) -> Result<Self, ConeError> {
        if v.len() != n * k {
            return Err(ConeError::DimensionMismatch {
                expected: n * k,
                found: v.len(),
            });
        }
        Self::new(v.chunks(k).map(<[Complex]>::to_vec).collect())
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            diags: (0..n).map(|_| gaussian_vector(rng, k)).collect(),
        }
    }

    /// `(D_1 η, …, D_n η)` stacked.
    pub fn apply(&self, eta: &[Complex]) -> Vec<Complex> {
        self.diags
            .iter()
            .flat_map(|d| d.iter().zip(eta).map(|(a, b)| a * b))
            .collect()
    }

    pub fn diag_matrix(&self, i: usize) -> ComplexMatrix {
        let d = &self.diags[i];
        ComplexMatrix::from_fn(self.k, self.k, |r, c| if r == c { d[r] } else { Complex::new(0.0, 0.0) })
    }

    /// `(D_p x D_q*)_{p,q}`.
    pub fn conjugate(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let k = self.k;
        ComplexMatrix::from_fn(self.n * k, self.n * k, |r, c| {
            let (p, a) = (r / k, r % k);
            let (q, b) = (c / k, c % k);
            self.diags[p][a] * x[(a, b)] * self.diags[q][b].conj()
        })
    }
}

/// Turns a vector `ξ ∈ ℂ^{nk}` into `(C, η)` with `C η = ξ`.
pub fn tuple_for_vector(n: usize, k: usize, xi: &[Complex]) -> Result<(DiagonalTuple, Vec<Complex>), ConeError> {
    let r = (k as f64).sqrt();
    let scaled: Vec<Complex> = xi.iter().map(|z| z * r).collect();
    let c = DiagonalTuple::from_vector(n, k, &scaled)?;
    Ok((c, vec![Complex::new(1.0 / r, 0.0); k]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DmaxCertificate {
    pub n: usize,
    pub k: usize,
    /// `(D, x)` pairs contributing `(D_p x D_q*)_{p,q}`.
    pub summands: Vec<(DiagonalTuple, HermitianMatrix)>,
}

impl DmaxCertificate {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let dim = self.n * self.k;
        self.summands
            .iter()
            .fold(ComplexMatrix::zeros(dim, dim), |acc, (d, x)| &acc + &d.conjugate(x.as_matrix()))
    }

    /// `‖Σ − X‖_F / max(1, ‖X‖_F)`.
    pub fn reconstruction_error(&self, x: &BlockElement) -> f64 {
        (&self.reconstruct() - x.matrix().as_matrix()).frobenius_norm() / x.matrix().scale()
    }

    pub fn cores_positive(&self) -> bool {
        self.summands
            .iter()
            .all(|(_, core)| psd_check(core, 0.0).is_ok_and(|v| v.is_positive()))
    }

    pub fn is_valid_for(&self, x: &BlockElement) -> bool {
        self.n == x.n && self.k == x.k && self.cores_positive() && self.reconstruction_error(x) <= CERTIFICATE_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CminSample {
    NoViolation { trials: usize },
    Violation { c: DiagonalTuple, eta: Vec<Complex>, value: f64 },
}

impl CminSample {
    pub fn is_violation(&self) -> bool {
        matches!(self, CminSample::Violation { .. })
    }
}

/// Searches for a diagonal tuple with `(C* X C η, η) < 0`.
pub fn cmin_member(x: &BlockElement, trials: usize, seed: u64) -> CminSample {
    let threshold = CMIN_VIOLATION_TOL * x.matrix().scale();
    for t in 0..trials as u64 {
        let mut rng = trial_rng(seed, t);
        let c = DiagonalTuple::random(&mut rng, x.n, x.k);
        let eta = unit_vector(&mut rng, x.k);
        let xi = c.apply(&eta);
        let weight: f64 = xi.iter().map(|z| z.norm_sqr()).sum();
        let value = x.matrix().quadratic_form(&xi);
        if value < -threshold * weight {
            return CminSample::Violation { c, eta, value };
        }
    }
    CminSample::NoViolation { trials }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CminExact {
    Member { min_eig: f64 },
    NotMember { min_eig: f64, witness: Vec<Complex> },
}

impl CminExact {
    pub fn is_member(&self) -> bool {
        matches!(self, CminExact::Member { .. })
    }
}

/// Min-cone membership; for `V = M_k`, `A = D_k` it coincides with PSD.
pub fn cmin_member_exact(x: &BlockElement) -> Result<CminExact, ConeError> {
    Ok(match psd_check(x.matrix(), DEFAULT_PSD_TOL)? {
        PsdVerdict::Positive { min_eig } => CminExact::Member { min_eig },
        PsdVerdict::Indefinite { min_eig, witness } => CminExact::NotMember { min_eig, witness },
    })
}

/// Writes a PSD `X` as `Σ_j (D_p J D_q*)` with `D_p = diag(R_j restricted to block p)`.
pub fn dmax_decompose(x: &BlockElement) -> Result<DmaxCertificate, ConeError> {
    let parts = rank_one_decompose(x.matrix(), DEFAULT_PSD_TOL)?;
    let core = HermitianMatrix::new(ComplexMatrix::ones(x.k, x.k))?;
    let summands = parts
        .iter()
        .map(|r| Ok((DiagonalTuple::from_vector(x.n, x.k, r)?, core.clone())))
        .collect::<Result<_, ConeError>>()?;
    Ok(DmaxCertificate {
        n: x.n,
        k: x.k,
        summands,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PmnReport {
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub breaches: usize,
    pub max_err: f64,
    pub members: usize,
}

impl PmnReport {
    pub fn passed(&self) -> bool {
        self.breaches == 0
    }
}

/// Sampled members used for the soundness cross-check inside [`verify_pmn`].
const PMN_SAMPLES: usize = 8;

fn pmn_draw(seed: u64, t: u64, dim: usize) -> HermitianMatrix {
    let mut rng = trial_rng(seed, t);
    match t % 3 {
        0 => gue(&mut rng, dim),
        1 => {
            let rank = rng.random_range(1..=dim);
            wishart(&mut rng, dim, rank)
        }
        _ => gue(&mut rng, dim).shifted(2.0 * (dim as f64).sqrt()),
    }
}

fn pmn_trial(x: &BlockElement, seed: u64, t: u64, report: &mut PmnReport) -> Result<bool, ConeError> {
    let psd = psd_check(x.matrix(), DEFAULT_PSD_TOL)?.is_positive();
    let exact = cmin_member_exact(x)?;
    let cert = match dmax_decompose(x) {
        Ok(c) => {
            let err = c.reconstruction_error(x);
            report.max_err = report.max_err.max(err);
            c.is_valid_for(x)
        }
        Err(ConeError::Linalg(LinalgError::NotPsd { .. })) => false,
        Err(e) => return Err(e),
    };
    if psd != exact.is_member() || psd != cert {
        return Ok(false);
    }
    match exact {
        CminExact::Member { .. } => {
            report.members += 1;
            Ok(!cmin_member(x, PMN_SAMPLES, seed ^ (t << 20)).is_violation())
        }
        CminExact::NotMember { witness, .. } => {
            let (c, eta) = tuple_for_vector(x.n, x.k, &witness)?;
            Ok(x.compress(&c, &eta) < 0.0)
        }
    }
}

/// Checks on random draws that PSD, min-cone membership and a valid max-cone
/// certificate always coincide.
///
/// Draw `t` is a GUE matrix (`t ≡ 0 mod 3`), a Wishart matrix of random rank
/// (`t ≡ 1`), or a GUE matrix shifted by `2·√(nk)` (`t ≡ 2`), which lands near
/// the PSD boundary.
pub fn verify_pmn(n: usize, k: usize, trials: usize, seed: u64) -> Result<PmnReport, ConeError> {
    if n == 0 || k == 0 {
        return Err(ConeError::ZeroDimension);
    }
    if n * k > MAX_PMN_DIM {
        return Err(ConeError::TooLarge { nk: n * k });
    }
    let mut report = PmnReport {
        n,
        k,
        trials,
        breaches: 0,
        max_err: 0.0,
        members: 0,
    };
    for t in 0..trials as u64 {
        let x = BlockElement::new(n, k, pmn_draw(seed, t, n * k))?;
        if !pmn_trial(&x, seed, t, &mut report)? {
            report.breaches += 1;
        }
    }
    Ok(report)
}

/// Random elements of the max cone generated by `generators`.
///
/// Each output is `Σ_j w_j (D_p g_j D_q*)_{p,q}` with between 1 and `n`
/// summands, uniform weights in `[0, 1)`, generators drawn uniformly and
/// Gaussian diagonal tuples.
pub fn dmax_sample(generators: &[HermitianMatrix], n: usize, count: usize, seed: u64) -> Result<Vec<BlockElement>, ConeError> {
    let first = generators.first().ok_or(ConeError::NoGenerators)?;
    let k = first.dim();
    if n == 0 {
        return Err(ConeError::ZeroDimension);
    }
    for (index, g) in generators.iter().enumerate() {
        if g.dim() != k {
            return Err(ConeError::DimensionMismatch {
                expected: k,
                found: g.dim(),
            });
        }
        if let PsdVerdict::Indefinite { min_eig, .. } = psd_check(g, DEFAULT_PSD_TOL)? {
            return Err(ConeError::GeneratorNotPsd { index, min_eig });
        }
    }
    (0..count as u64)
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let terms = rng.random_range(1..=n);
            let mut acc = ComplexMatrix::zeros(n * k, n * k);
            for _ in 0..terms {
                let g = &generators[rng.random_range(0..generators.len())];
                let w: f64 = rng.random();
                let d = DiagonalTuple::random(&mut rng, n, k);
                acc = &acc + &d.conjugate(g.as_matrix()).scale(Complex::new(w, 0.0));
            }
            BlockElement::new(n, k, HermitianMatrix::new(acc)?)
        })
        .collect()
}
