//! Two-sided factorizations `φ(x, y) = Σ_i A_i(x) B_i(y)` of full block
//! multipliers, the norm bounds they give, and finite positivity checks.

use thiserror::Error;

use crate::completion::{ampliate, GramFactorization};
use crate::linalg::{
    eigh, psd_check, unit_scale, ComplexMatrix, HermitianMatrix, LinalgError, PsdVerdict, DEFAULT_PSD_TOL,
};
use crate::multiplier::{assemble_full, schur_apply, BlockMultiplier, MultiplierError, ScalarKernel};
use crate::random::{random_matrix, trial_rng, wishart};

/// Singular values at or below this fraction of `‖Φ‖_F` are dropped.
pub const SVD_TOL: f64 = 1e-12;
/// Relative reconstruction error tolerated by [`TwoSidedFactorization::is_valid_for`].
pub const FACTOR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Multiplier(#[from] MultiplierError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedFactorization {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    /// `a[i][x] = A_i(x)`.
    pub a: Vec<Vec<ComplexMatrix>>,
    /// `b[i][y] = B_i(y)`.
    pub b: Vec<Vec<ComplexMatrix>>,
    /// `max_x ‖Σ_i A_i(x) A_i(x)*‖^{1/2}`.
    pub row_bound: f64,
    /// `max_y ‖Σ_i B_i(y)* B_i(y)‖^{1/2}`.
    pub col_bound: f64,
    /// Set when `B_i(y) = A_i(y)*`.
    pub symmetric: bool,
}

impl TwoSidedFactorization {
    fn from_factors(n: usize, d: usize, left: &ComplexMatrix, right: &ComplexMatrix, symmetric: bool) -> Result<Self, LinalgError> {
        let r = left.cols();
        let m = r.div_ceil(d);
        let mut l = ComplexMatrix::zeros(n * d, m * d);
        l.set_block(0, 0, left);
        let mut rt = ComplexMatrix::zeros(m * d, n * d);
        rt.set_block(0, 0, right);
        let a = (0..m).map(|i| (0..n).map(|x| l.block(x * d, i * d, d, d)).collect()).collect();
        let b = (0..m).map(|i| (0..n).map(|y| rt.block(i * d, y * d, d, d)).collect()).collect();
        let mut row_bound = 0.0f64;
        let mut col_bound = 0.0f64;
        for x in 0..n {
            row_bound = row_bound.max(l.block(x * d, 0, d, m * d).operator_norm()?);
            col_bound = col_bound.max(rt.block(0, x * d, m * d, d).operator_norm()?);
        }
        Ok(Self {
            n,
            d,
            m,
            a,
            b,
            row_bound,
            col_bound,
            symmetric,
        })
    }

    /// `Σ_i A_i(x) B_i(y)`.
    pub fn reconstruct(&self, x: usize, y: usize) -> ComplexMatrix {
        (0..self.m).fold(ComplexMatrix::zeros(self.d, self.d), |acc, i| &acc + &(&self.a[i][x] * &self.b[i][y]))
    }

    pub fn reconstruct_all(&self) -> ComplexMatrix {
        let d = self.d;
        let mut out = ComplexMatrix::zeros(self.n * d, self.n * d);
        for x in 0..self.n {
            for y in 0..self.n {
                out.set_block(x * d, y * d, &self.reconstruct(x, y));
            }
        }
        out
    }

    /// `‖Φ − Σ A_i B_i‖_F / max(1, ‖Φ‖_F)`.
    pub fn reconstruction_error(&self, phi: &BlockMultiplier) -> f64 {
        let m = assemble_full(phi);
        (&self.reconstruct_all() - m.as_matrix()).frobenius_norm() / m.scale()
    }

    pub fn is_valid_for(&self, phi: &BlockMultiplier) -> bool {
        self.n == phi.n() && self.d == phi.d() && self.reconstruction_error(phi) <= FACTOR_TOL
    }
}

impl From<GramFactorization> for TwoSidedFactorization {
    fn from(g: GramFactorization) -> Self {
        let b = g
            .factors
            .iter()
            .map(|row| row.iter().map(ComplexMatrix::adjoint).collect())
            .collect();
        let bound = g.row_bound.sqrt();
        Self {
            n: g.n,
            d: g.d,
            m: g.m,
            a: g.factors,
            b,
            row_bound: bound,
            col_bound: bound,
            symmetric: true,
        }
    }
}

/// Left and right singular factors `UΣ^{1/2}` and `Σ^{1/2}V*` of `Φ` from
/// the eigendecomposition of `[[0, Φ], [Φ*, 0]]`.
fn balanced_svd(phi: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix), LinalgError> {
    let n = phi.rows();
    let mut doubled = ComplexMatrix::zeros(2 * n, 2 * n);
    doubled.set_block(0, n, phi);
    doubled.set_block(n, 0, &phi.adjoint());
    let eig = eigh(&HermitianMatrix::new(doubled)?)?;
    let cutoff = SVD_TOL * phi.frobenius_norm();
    // Each σ > 0 has eigenvector (u; v)/√2 with Φ = Σ σ u v*.
    let keep: Vec<usize> = (0..2 * n).rev().filter(|&j| eig.values[j] > cutoff).collect();
    let mut left = ComplexMatrix::zeros(n, keep.len());
    let mut right = ComplexMatrix::zeros(keep.len(), n);
    for (c, &j) in keep.iter().enumerate() {
        let w = (2.0 * eig.values[j]).sqrt();
        for r in 0..n {
            left[(r, c)] = eig.vectors[(r, j)] * w;
            right[(c, r)] = eig.vectors[(n + r, j)].conj() * w;
        }
    }
    Ok((left, right))
}

/// Symmetric Gram factorization when `Φ` is PSD, balanced SVD split otherwise.
pub fn factorize(phi: &BlockMultiplier) -> Result<TwoSidedFactorization, EngineError> {
    let assembled = assemble_full(phi);
    if psd_check(&assembled, DEFAULT_PSD_TOL)?.is_positive() {
        let g = GramFactorization::from_psd(phi.n(), phi.d(), &assembled, DEFAULT_PSD_TOL)?;
        return Ok(g.into());
    }
    let (left, right) = balanced_svd(assembled.as_matrix())?;
    Ok(TwoSidedFactorization::from_factors(phi.n(), phi.d(), &left, &right, false)?)
}

/// `row_bound · col_bound`, an upper bound for the cb norm of `S_φ`.
pub fn cb_norm_upper(fac: &TwoSidedFactorization) -> f64 {
    fac.row_bound * fac.col_bound
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormBounds {
    /// `max ‖S_φ(T)‖ / ‖T‖` over the probes.
    pub lower: f64,
    pub upper: f64,
    pub probes: usize,
}

/// Ratio `‖S_φ(T)‖ / ‖T‖`.
pub fn norm_ratio(phi: &BlockMultiplier, t: &ScalarKernel) -> Result<f64, EngineError> {
    let denom = t.entries().operator_norm()?;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(schur_apply(phi, t)?.operator_norm()? / denom)
}

/// Sampled lower bound from `T = I`, `T = J` and `trials` complex Gaussian `T`,
/// paired with the factorization upper bound. For positive multipliers the
/// upper bound is attained at `T = I`, so the two can differ by rounding in
/// either direction.
pub fn norm_bounds(phi: &BlockMultiplier, fac: &TwoSidedFactorization, trials: usize, seed: u64) -> Result<NormBounds, EngineError> {
    let n = phi.n();
    let mut probes = vec![ScalarKernel::identity(n), ScalarKernel::ones(n)];
    for t in 0..trials as u64 {
        probes.push(ScalarKernel::new(random_matrix(&mut trial_rng(seed, t), n, n))?);
    }
    let mut lower = 0.0f64;
    for p in &probes {
        lower = lower.max(norm_ratio(phi, p)?);
    }
    Ok(NormBounds {
        lower,
        upper: cb_norm_upper(fac),
        probes: probes.len(),
    })
}

/// Verdicts of the four positivity conditions on a full multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    /// (a) assembled matrix PSD.
    pub assembled_psd: bool,
    pub assembled_min_eig: f64,
    /// (b) every probed PSD kernel maps to a PSD kernel.
    pub kernels_positive: bool,
    /// `S_φ(J)` is not PSD.
    pub j_falsifier: bool,
    /// Points `x` where `S_φ(e_x e_x*)` is not PSD.
    pub basis_falsifiers: Vec<usize>,
    /// Random kernel trial that first failed, if any.
    pub random_falsifier: Option<u64>,
    pub kernel_probes: usize,
    /// (c) ampliations up to `max_ampliation` preserve positivity.
    pub ampliations_positive: bool,
    pub max_ampliation: usize,
    /// (d) a symmetric Gram factorization exists and reconstructs.
    pub gram_exists: bool,
    pub gram_error: Option<f64>,
}

impl EquivalenceReport {
    pub fn verdicts(&self) -> [bool; 4] {
        [
            self.assembled_psd,
            self.kernels_positive,
            self.ampliations_positive,
            self.gram_exists,
        ]
    }

    /// `agreement()[i][j]` is true when verdicts `i` and `j` coincide.
    pub fn agreement(&self) -> [[bool; 4]; 4] {
        let v = self.verdicts();
        std::array::from_fn(|i| std::array::from_fn(|j| v[i] == v[j]))
    }

    pub fn all_agree(&self) -> bool {
        let v = self.verdicts();
        v.iter().all(|&b| b == v[0])
    }
}

fn maps_to_psd(phi: &BlockMultiplier, k: &ScalarKernel) -> Result<bool, EngineError> {
    let out = HermitianMatrix::new(schur_apply(phi, k)?)?;
    Ok(psd_check(&out, DEFAULT_PSD_TOL)?.is_positive())
}

/// Runs the four checks. Random kernels are Wishart draws of rank cycling
/// through `1..=n`; each ampliation level uses `J` and `⌈trials/10⌉` random
/// kernels.
pub fn positivity_equivalences(
    phi: &BlockMultiplier,
    trials: usize,
    max_ampliation: usize,
    seed: u64,
) -> Result<EquivalenceReport, EngineError> {
    let n = phi.n();
    let assembled = assemble_full(phi);
    let verdict = psd_check(&assembled, DEFAULT_PSD_TOL)?;

    let j_falsifier = !maps_to_psd(phi, &ScalarKernel::ones(n))?;
    let mut basis_falsifiers = Vec::new();
    for x in 0..n {
        if !maps_to_psd(phi, &ScalarKernel::basis(n, x, x))? {
            basis_falsifiers.push(x);
        }
    }
    let mut kernel_probes = 1 + n;
    let mut random_falsifier = None;
    if !j_falsifier && basis_falsifiers.is_empty() {
        for t in 0..trials as u64 {
            kernel_probes += 1;
            let k = wishart(&mut trial_rng(seed, t), n, 1 + t as usize % n);
            if !maps_to_psd(phi, &ScalarKernel::new(k.into_matrix())?)? {
                random_falsifier = Some(t);
                break;
            }
        }
    }
    let kernels_positive = !j_falsifier && basis_falsifiers.is_empty() && random_falsifier.is_none();

    let mut ampliations_positive = true;
    let per_level = trials.div_ceil(10);
    'levels: for m in 1..=max_ampliation {
        let amp = ampliate(phi, m);
        if !maps_to_psd(&amp, &ScalarKernel::ones(m * n))? {
            ampliations_positive = false;
            break;
        }
        for t in 0..per_level as u64 {
            let k = wishart(&mut trial_rng(seed.wrapping_add(m as u64), t), m * n, 1 + t as usize % (m * n));
            if !maps_to_psd(&amp, &ScalarKernel::new(k.into_matrix())?)? {
                ampliations_positive = false;
                break 'levels;
            }
        }
    }

    let (gram_exists, gram_error) = match GramFactorization::from_psd(n, phi.d(), &assembled, DEFAULT_PSD_TOL) {
        Ok(g) => {
            let err = (&g.reconstruct_all() - assembled.as_matrix()).frobenius_norm() / unit_scale(assembled.frobenius_norm());
            (err <= FACTOR_TOL, Some(err))
        }
        Err(LinalgError::NotPsd { .. }) => (false, None),
        Err(e) => return Err(e.into()),
    };

    Ok(EquivalenceReport {
        assembled_psd: matches!(verdict, PsdVerdict::Positive { .. }),
        assembled_min_eig: verdict.min_eig(),
        kernels_positive,
        j_falsifier,
        basis_falsifiers,
        random_falsifier,
        kernel_probes,
        ampliations_positive,
        max_ampliation,
        gram_exists,
        gram_error,
    })
}
