//! Positive completion of partially defined multipliers on chordal patterns.
//!
//! Missing pairs are filled one at a time along the order produced by
//! [`completion_steps`]. Each new entry joins two cliques `C₁`, `C₂` adjacent
//! in the current clique tree, and with `S = C₁ ∩ C₂` receives
//!
//! ```text
//! ψ(x, y) = [ψ(x, s)]_{s∈S} · [ψ(s, t)]⁺_{s,t∈S} · [ψ(s, y)]_{s∈S}
//! ```
//!
//! which keeps the new clique `S ∪ {x, y}` positive. Specified blocks are
//! never touched.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::linalg::{
    eigh, gram_factor, pseudo_inverse, psd_check, unit_scale, Complex, ComplexMatrix, HermitianMatrix,
    LinalgError, PsdVerdict,
};
use crate::multiplier::{
    admissible_chordal, assemble_full, schur_apply, Admissibility, BlockMultiplier, MultiplierError,
    PartialBlockMultiplier, ScalarKernel,
};
use crate::pattern::{completion_steps, fill_in, is_chordal, Chordality, Pattern, PatternError};
use crate::random::{trial_rng, wishart};

/// Relative tolerance of the final global PSD check.
pub const COMPLETION_PSD_TOL: f64 = 1e-8;
/// Eigenvalues of a separator block below this fraction of its norm are
/// treated as zero in the pseudo-inverse.
pub const SEPARATOR_PINV_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompletionError {
    #[error(transparent)]
    Multiplier(#[from] MultiplierError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("pattern is not chordal (chordless cycle {cycle:?})")]
    NotChordal { cycle: Vec<usize> },
    #[error("multiplier is not admissible: clique {clique:?} has minimum eigenvalue {min_eig:e}")]
    NotAdmissible { clique: Vec<usize>, min_eig: f64 },
    #[error("values chosen for fill-in pairs are not admissible: clique {clique:?} has minimum eigenvalue {min_eig:e}")]
    FillInRejected { clique: Vec<usize>, min_eig: f64 },
    #[error("completed matrix failed the final PSD check (minimum eigenvalue {min_eig:e})")]
    CompletionFailure { min_eig: f64 },
}

impl From<PatternError> for CompletionError {
    fn from(e: PatternError) -> Self {
        match e {
            PatternError::NotChordal { cycle } => CompletionError::NotChordal { cycle },
            other => CompletionError::Multiplier(other.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilledEntry {
    pub x: usize,
    pub y: usize,
    pub block: ComplexMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionResult {
    pub psi: BlockMultiplier,
    /// Filled pairs `x < y` in the order they were produced.
    pub filled: Vec<FilledEntry>,
    /// Smallest eigenvalue of the assembled completion.
    pub min_eig: f64,
}

fn ensure_chordal(p: &Pattern) -> Result<(), CompletionError> {
    match is_chordal(p) {
        Chordality::Chordal { .. } => Ok(()),
        Chordality::NotChordal { cycle } => Err(CompletionError::NotChordal { cycle }),
    }
}

/// `B C⁺ D` for the pair `(x, y)` across separator `sep`.
fn fill_value(
    blocks: &BTreeMap<(usize, usize), ComplexMatrix>,
    d: usize,
    x: usize,
    y: usize,
    sep: &[usize],
) -> Result<ComplexMatrix, CompletionError> {
    if sep.is_empty() {
        return Ok(ComplexMatrix::zeros(d, d));
    }
    let k = sep.len() * d;
    let mut b = ComplexMatrix::zeros(d, k);
    let mut c = ComplexMatrix::zeros(k, k);
    let mut dm = ComplexMatrix::zeros(k, d);
    for (i, &s) in sep.iter().enumerate() {
        b.set_block(0, i * d, &blocks[&(x, s)]);
        dm.set_block(i * d, 0, &blocks[&(s, y)]);
        for (j, &t) in sep.iter().enumerate() {
            c.set_block(i * d, j * d, &blocks[&(s, t)]);
        }
    }
    let c_pinv = pseudo_inverse(&HermitianMatrix::new(c)?, SEPARATOR_PINV_TOL)?;
    Ok(&(&b * c_pinv.as_matrix()) * &dm)
}

/// Positive extension of an admissible multiplier on a chordal pattern.
///
/// `tol` is the relative tolerance of the clique-wise admissibility check.
pub fn complete(phi: &PartialBlockMultiplier, tol: f64) -> Result<CompletionResult, CompletionError> {
    ensure_chordal(phi.pattern())?;
    if let Admissibility::Rejected { clique, min_eig } = admissible_chordal(phi, tol)? {
        return Err(CompletionError::NotAdmissible { clique, min_eig });
    }
    let d = phi.d();
    let n = phi.n();
    let mut blocks = phi.blocks().clone();
    let mut filled = Vec::new();
    for step in completion_steps(phi.pattern())? {
        let value = fill_value(&blocks, d, step.x, step.y, &step.separator)?;
        blocks.insert((step.y, step.x), value.adjoint());
        blocks.insert((step.x, step.y), value.clone());
        filled.push(FilledEntry {
            x: step.x,
            y: step.y,
            block: value,
        });
    }
    let psi = BlockMultiplier::new(PartialBlockMultiplier::from_parts_unchecked(
        Pattern::full(n),
        d,
        blocks,
    ))?;
    let min_eig = match psd_check(&assemble_full(&psi), COMPLETION_PSD_TOL)? {
        PsdVerdict::Positive { min_eig } => min_eig,
        PsdVerdict::Indefinite { min_eig, .. } => return Err(CompletionError::CompletionFailure { min_eig }),
    };
    Ok(CompletionResult { psi, filled, min_eig })
}

/// Completion of a multiplier on an arbitrary pattern by way of a chordal
/// supergraph.
#[derive(Debug, Clone, PartialEq)]
pub struct FillInCompletion {
    pub result: CompletionResult,
    /// Pairs added by [`fill_in`]; their values come from a first completion
    /// pass over a chordal subpattern.
    pub added: Vec<(usize, usize)>,
}

/// Largest chordal subpattern reachable by adding edges in lexicographic order.
pub fn greedy_chordal_subpattern(p: &Pattern) -> Pattern {
    let mut sub = Pattern::diagonal(p.n());
    for (x, y) in p.edges() {
        let candidate = sub.with_edge(x, y);
        if is_chordal(&candidate).is_chordal() {
            sub = candidate;
        }
    }
    sub
}

fn sub_multiplier(phi: &PartialBlockMultiplier, p: &Pattern) -> Result<PartialBlockMultiplier, CompletionError> {
    let given = p
        .pairs()
        .into_iter()
        .filter(|&(x, y)| x <= y)
        .map(|(x, y)| ((x, y), phi.block(x, y).expect("subpattern pair").clone()))
        .collect();
    Ok(PartialBlockMultiplier::new(p.clone(), phi.d(), given)?)
}

/// Heuristic route for non-chordal patterns.
///
/// 1. Extend `κ` to a chordal `κ′` with [`fill_in`].
/// 2. Complete `φ` restricted to [`greedy_chordal_subpattern`]`(κ)` and read
///    off values on `κ′ \ κ`.
/// 3. Complete the resulting multiplier on `κ′`.
///
/// Step 3 fails with [`CompletionError::FillInRejected`] when the borrowed
/// values are not clique-wise positive on `κ′`; that does not prove that no
/// positive extension exists.
pub fn complete_with_fill_in(phi: &PartialBlockMultiplier, tol: f64) -> Result<FillInCompletion, CompletionError> {
    let (chordal, added) = fill_in(phi.pattern());
    if added.is_empty() {
        return Ok(FillInCompletion {
            result: complete(phi, tol)?,
            added,
        });
    }
    let base = greedy_chordal_subpattern(phi.pattern());
    let first = complete(&sub_multiplier(phi, &base)?, tol)?;

    let mut given: BTreeMap<(usize, usize), ComplexMatrix> = phi
        .blocks()
        .iter()
        .filter(|((x, y), _)| x <= y)
        .map(|(&k, b)| (k, b.clone()))
        .collect();
    for &(x, y) in &added {
        given.insert((x, y), first.psi.block(x, y).clone());
    }
    let extended = PartialBlockMultiplier::new(chordal, phi.d(), given)?;
    let second = match complete(&extended, tol) {
        Err(CompletionError::NotAdmissible { clique, min_eig }) => {
            return Err(CompletionError::FillInRejected { clique, min_eig })
        }
        other => other?,
    };
    let mut filled: Vec<FilledEntry> = added
        .iter()
        .map(|&(x, y)| FilledEntry {
            x,
            y,
            block: second.psi.block(x, y).clone(),
        })
        .collect();
    filled.extend(second.filled);
    Ok(FillInCompletion {
        result: CompletionResult {
            psi: second.psi,
            filled,
            min_eig: second.min_eig,
        },
        added,
    })
}

/// `ψ(x, y) = Σ_i A_i(x) A_i(y)*` with every `A_i(x)` a `d × d` block.
#[derive(Debug, Clone, PartialEq)]
pub struct GramFactorization {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    /// `factors[i][x] = A_i(x)`.
    pub factors: Vec<Vec<ComplexMatrix>>,
    /// `max_x ‖Σ_i A_i(x) A_i(x)*‖`.
    pub row_bound: f64,
}

impl GramFactorization {
    /// Factors an `nd × nd` PSD matrix. Gram columns are grouped into
    /// `m = ⌈r/d⌉` block columns, zero-padded to width `d`.
    pub fn from_psd(n: usize, d: usize, m: &HermitianMatrix, tol: f64) -> Result<Self, LinalgError> {
        if m.dim() != n * d {
            return Err(LinalgError::ShapeMismatch {
                expected: (n * d, n * d),
                found: (m.dim(), m.dim()),
            });
        }
        let g = gram_factor(m, tol)?;
        let count = g.cols().div_ceil(d);
        let mut padded = ComplexMatrix::zeros(n * d, count * d);
        padded.set_block(0, 0, &g);
        let factors: Vec<Vec<ComplexMatrix>> = (0..count)
            .map(|i| (0..n).map(|x| padded.block(x * d, i * d, d, d)).collect())
            .collect();
        let mut fac = Self {
            n,
            d,
            m: count,
            factors,
            row_bound: 0.0,
        };
        fac.row_bound = fac.compute_row_bound()?;
        Ok(fac)
    }

    pub fn factor(&self, i: usize, x: usize) -> &ComplexMatrix {
        &self.factors[i][x]
    }

    /// `Σ_i A_i(x) A_i(y)*`.
    pub fn reconstruct(&self, x: usize, y: usize) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.d, self.d);
        for row in &self.factors {
            out = &out + &(&row[x] * &row[y].adjoint());
        }
        out
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

    fn compute_row_bound(&self) -> Result<f64, LinalgError> {
        let mut best = 0.0f64;
        for x in 0..self.n {
            best = best.max(self.reconstruct(x, x).operator_norm()?);
        }
        Ok(best)
    }
}

/// Gram factorization of a completed multiplier. `tol` is passed to the
/// underlying PSD factorization.
pub fn gram_factorize(res: &CompletionResult, tol: f64) -> Result<GramFactorization, LinalgError> {
    let psi = &res.psi;
    GramFactorization::from_psd(psi.n(), psi.d(), &assemble_full(psi), tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmpliationCheck {
    pub m: usize,
    pub kernels: usize,
    pub min_eig: f64,
    pub passed: bool,
}

/// Outcome of [`verify_extension`]; never an error, failures are listed.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionReport {
    pub restriction_exact: bool,
    pub assembled_psd: bool,
    pub assembled_min_eig: f64,
    pub kernel_trials: usize,
    pub kernel_failures: usize,
    pub ampliations: Vec<AmpliationCheck>,
    pub failures: Vec<String>,
}

impl ExtensionReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Ampliation multiplier on `m` disjoint copies of `X`: `ψ⁽ᵐ⁾((i,x),(j,y)) = ψ(x,y)`.
pub fn ampliate(psi: &BlockMultiplier, m: usize) -> BlockMultiplier {
    let n = psi.n();
    BlockMultiplier::from_fn(m * n, psi.d(), |p, q| psi.block(p % n, q % n).clone())
        .expect("ampliation of a valid multiplier is valid")
}

fn psd_min_eig(m: ComplexMatrix) -> Result<(bool, f64), LinalgError> {
    let h = HermitianMatrix::new(m)?;
    let v = psd_check(&h, COMPLETION_PSD_TOL)?;
    Ok((v.is_positive(), v.min_eig()))
}

/// Largest ampliation level checked by [`verify_extension`].
pub const MAX_AMPLIATION: usize = 3;

/// Checks that `ψ` extends `φ` and certifies complete positivity of `S_φ`:
/// (a) exact restriction, (b) PSD assembly, (c) `trials` random PSD kernels
/// map to PSD outputs, (d) the same for ampliations `m ≤ 3`.
pub fn verify_extension(phi: &PartialBlockMultiplier, psi: &BlockMultiplier, trials: usize, seed: u64) -> ExtensionReport {
    let mut report = ExtensionReport {
        restriction_exact: false,
        assembled_psd: false,
        assembled_min_eig: f64::NAN,
        kernel_trials: 0,
        kernel_failures: 0,
        ampliations: Vec::new(),
        failures: Vec::new(),
    };
    if phi.n() != psi.n() || phi.d() != psi.d() {
        report.failures.push(format!(
            "shape mismatch: φ has (n, d) = ({}, {}), ψ has ({}, {})",
            phi.n(),
            phi.d(),
            psi.n(),
            psi.d()
        ));
        return report;
    }
    let mismatched: Vec<(usize, usize)> = phi
        .blocks()
        .iter()
        .filter(|(&(x, y), b)| psi.block(x, y) != *b)
        .map(|(&k, _)| k)
        .collect();
    report.restriction_exact = mismatched.is_empty();
    if !mismatched.is_empty() {
        report.failures.push(format!("ψ differs from φ on {mismatched:?}"));
    }

    match psd_min_eig(assemble_full(psi).into_matrix()) {
        Ok((ok, min_eig)) => {
            report.assembled_psd = ok;
            report.assembled_min_eig = min_eig;
            if !ok {
                report.failures.push(format!("assembled ψ is not PSD (minimum eigenvalue {min_eig:e})"));
            }
        }
        Err(e) => report.failures.push(format!("assembled ψ: {e}")),
    }

    let n = psi.n();
    for t in 0..trials as u64 {
        let mut rng = trial_rng(seed, t);
        let rank = 1 + (t as usize % n);
        let kernel = ScalarKernel::new(wishart(&mut rng, n, rank).into_matrix()).expect("square");
        report.kernel_trials += 1;
        let ok = schur_apply(psi, &kernel)
            .map_err(|e| e.to_string())
            .and_then(|out| psd_min_eig(out).map_err(|e| e.to_string()));
        match ok {
            Ok((true, _)) => {}
            Ok((false, min_eig)) => {
                report.kernel_failures += 1;
                report
                    .failures
                    .push(format!("kernel trial {t}: output minimum eigenvalue {min_eig:e}"));
            }
            Err(e) => {
                report.kernel_failures += 1;
                report.failures.push(format!("kernel trial {t}: {e}"));
            }
        }
    }

    let amp_trials = trials.div_ceil(10).max(1);
    for m in 1..=MAX_AMPLIATION {
        let amp = ampliate(psi, m);
        let mut check = AmpliationCheck {
            m,
            kernels: 0,
            min_eig: f64::INFINITY,
            passed: true,
        };
        let mut kernels = vec![ScalarKernel::ones(m * n)];
        for t in 0..amp_trials as u64 {
            let mut rng = trial_rng(seed ^ 0xA11F_u64.wrapping_mul(m as u64), t);
            kernels.push(ScalarKernel::new(wishart(&mut rng, m * n, 1 + t as usize % (m * n)).into_matrix()).expect("square"));
        }
        for kernel in kernels {
            check.kernels += 1;
            match schur_apply(&amp, &kernel).map_err(|e| e.to_string()).and_then(|o| psd_min_eig(o).map_err(|e| e.to_string())) {
                Ok((ok, min_eig)) => {
                    check.min_eig = check.min_eig.min(min_eig);
                    check.passed &= ok;
                }
                Err(e) => {
                    check.passed = false;
                    report.failures.push(format!("ampliation {m}: {e}"));
                }
            }
        }
        if !check.passed {
            report
                .failures
                .push(format!("ampliation {m}: minimum eigenvalue {:e}", check.min_eig));
        }
        report.ampliations.push(check);
    }
    report
}

/// Grid resolution for [`counterexample_c4`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    /// Real grid spacing over `[-radius, radius]²`.
    pub step: f64,
    pub radius: f64,
    /// Phases per entry in the complex sweep.
    pub phases: usize,
    /// Modulus spacing over `[0, radius]` in the complex sweep.
    pub modulus_step: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            step: 0.01,
            radius: 1.0,
            phases: 36,
            modulus_step: 0.1,
        }
    }
}

/// Summary of the four-cycle obstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct C4Demonstration {
    pub config: GridConfig,
    /// `(x, y, φ(x, y))` for the four cycle edges.
    pub edge_values: Vec<(usize, usize, f64)>,
    /// Minimum eigenvalue of each `2 × 2` edge block.
    pub edge_block_min_eigs: Vec<f64>,
    pub real_grid_points: usize,
    /// Largest minimum eigenvalue over the real grid, and where.
    pub real_max_min_eig: f64,
    pub real_argmax: (f64, f64),
    pub complex_grid_points: usize,
    pub complex_max_min_eig: f64,
    pub complex_argmax: (Complex, Complex),
    /// `-max(real_max_min_eig, complex_max_min_eig)`.
    pub epsilon: f64,
    pub certified: bool,
}

fn c4_matrix(a: Complex, b: Complex) -> HermitianMatrix {
    let one = Complex::new(1.0, 0.0);
    let mut m = ComplexMatrix::from_real(
        4,
        4,
        &[
            1.0, 1.0, 0.0, -1.0, //
            1.0, 1.0, 1.0, 0.0, //
            0.0, 1.0, 1.0, 1.0, //
            -1.0, 0.0, 1.0, 1.0,
        ],
    )
    .expect("finite");
    m[(0, 2)] = a;
    m[(2, 0)] = a.conj();
    m[(1, 3)] = b;
    m[(3, 1)] = b.conj();
    debug_assert_eq!(m[(0, 0)], one);
    HermitianMatrix::new(m).expect("Hermitian by construction")
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step).round() as usize;
    (0..=count).map(|i| lo + i as f64 * step).collect()
}

/// The four-cycle with edge data `(1, 1, 1, -1)`: every edge block is PSD
/// but no choice of the two chords makes the whole matrix PSD.
pub fn counterexample_c4(config: GridConfig) -> Result<C4Demonstration, LinalgError> {
    let edge_values = vec![(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, -1.0)];
    let mut edge_block_min_eigs = Vec::new();
    for &(_, _, v) in &edge_values {
        let block = HermitianMatrix::from_real(2, &[1.0, v, v, 1.0])?;
        edge_block_min_eigs.push(eigh(&block)?.min());
    }

    let reals = grid(-config.radius, config.radius, config.step);
    let mut real_max = f64::NEG_INFINITY;
    let mut real_argmax = (0.0, 0.0);
    for &a in &reals {
        for &b in &reals {
            let e = eigh(&c4_matrix(Complex::new(a, 0.0), Complex::new(b, 0.0)))?.min();
            if e > real_max {
                real_max = e;
                real_argmax = (a, b);
            }
        }
    }

    let moduli = grid(0.0, config.radius, config.modulus_step);
    let points: Vec<Complex> = moduli
        .iter()
        .flat_map(|&r| {
            (0..config.phases).map(move |k| Complex::from_polar(r, k as f64 * std::f64::consts::TAU / config.phases as f64))
        })
        .collect();
    let mut complex_max = f64::NEG_INFINITY;
    let mut complex_argmax = (Complex::new(0.0, 0.0), Complex::new(0.0, 0.0));
    for &a in &points {
        for &b in &points {
            let e = eigh(&c4_matrix(a, b))?.min();
            if e > complex_max {
                complex_max = e;
                complex_argmax = (a, b);
            }
        }
    }

    let epsilon = -real_max.max(complex_max);
    let edges_psd = edge_block_min_eigs.iter().all(|&e| e >= -1e-12);
    Ok(C4Demonstration {
        config,
        edge_values,
        edge_block_min_eigs,
        real_grid_points: reals.len() * reals.len(),
        real_max_min_eig: real_max,
        real_argmax,
        complex_grid_points: points.len() * points.len(),
        complex_max_min_eig: complex_max,
        complex_argmax,
        epsilon,
        certified: edges_psd && epsilon > 0.0,
    })
}

/// Relative reconstruction error `‖Ψ - Σ A_i A_i*‖_F / max(1, ‖Ψ‖_F)`.
pub fn gram_reconstruction_error(psi: &BlockMultiplier, fac: &GramFactorization) -> f64 {
    let assembled = assemble_full(psi);
    (&fac.reconstruct_all() - assembled.as_matrix()).frobenius_norm() / unit_scale(assembled.frobenius_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiplier::restrict;
    use crate::random::{random_matrix, trial_rng};

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    fn path_phi(e01: f64, e12: f64) -> PartialBlockMultiplier {
        PartialBlockMultiplier::scalar(Pattern::path(3), |x, y| match (x, y) {
            (0, 1) => c(e01),
            (1, 2) => c(e12),
            _ => c(1.0),
        })
        .unwrap()
    }

    #[test]
    fn path_completion_fills_product() {
        let phi = path_phi(0.9, 0.9);
        let res = complete(&phi, 1e-9).unwrap();
        assert_eq!(res.filled.len(), 1);
        assert_eq!((res.filled[0].x, res.filled[0].y), (0, 2));
        assert!((res.filled[0].block[(0, 0)] - c(0.81)).norm() < 1e-14);
        // Oracle: spectrum of [[1,.9,.81],[.9,1,.9],[.81,.9,1]].
        let oracle = HermitianMatrix::from_real(3, &[1.0, 0.9, 0.81, 0.9, 1.0, 0.9, 0.81, 0.9, 1.0]).unwrap();
        let eig = eigh(&oracle).unwrap();
        assert!(eig.min() >= 0.0);
        assert!((res.min_eig - eig.min()).abs() < 1e-12);
    }

    #[test]
    fn full_pattern_needs_no_fill() {
        let w = wishart(&mut trial_rng(1, 0), 6, 6);
        let psi = BlockMultiplier::from_assembled(3, 2, w.as_matrix()).unwrap();
        let res = complete(psi.as_partial(), 1e-9).unwrap();
        assert!(res.filled.is_empty());
        assert_eq!(res.psi, psi);
    }

    #[test]
    fn tight_path_forces_rank_one_completion() {
        let res = complete(&path_phi(1.0, 1.0), 1e-9).unwrap();
        assert_eq!(res.filled[0].block[(0, 0)], c(1.0));
        let assembled = assemble_full(&res.psi);
        assert_eq!(assembled.as_matrix(), &ComplexMatrix::ones(3, 3));
    }

    #[test]
    fn completion_errors() {
        assert!(matches!(
            complete(&path_phi(1.5, 0.9), 1e-9),
            Err(CompletionError::NotAdmissible { ref clique, .. }) if clique == &vec![0, 1]
        ));
        let c4 = PartialBlockMultiplier::scalar(Pattern::cycle(4), |x, y| if x == y { c(1.0) } else { c(0.1) }).unwrap();
        assert_eq!(
            complete(&c4, 1e-9),
            Err(CompletionError::NotChordal {
                cycle: vec![0, 1, 2, 3]
            })
        );
    }

    #[test]
    fn disconnected_components_fill_with_zero() {
        let p = Pattern::from_edges(4, &[(0, 1), (2, 3)]);
        let phi = PartialBlockMultiplier::scalar(p, |x, y| if x == y { c(2.0) } else { c(1.0) }).unwrap();
        let res = complete(&phi, 1e-9).unwrap();
        assert_eq!(res.filled.len(), 4);
        assert!(res.filled.iter().all(|f| f.block.is_zero()));
    }

    #[test]
    fn gram_factorize_examples() {
        let ones = BlockMultiplier::from_fn(2, 1, |_, _| ComplexMatrix::ones(1, 1)).unwrap();
        let res = complete(ones.as_partial(), 1e-9).unwrap();
        let fac = gram_factorize(&res, 1e-8).unwrap();
        assert_eq!(fac.m, 1);
        for x in 0..2 {
            assert!((fac.factor(0, x)[(0, 0)].norm() - 1.0).abs() < 1e-14);
        }
        assert!((fac.row_bound - 1.0).abs() < 1e-14);

        let id = BlockMultiplier::identity(3, 2);
        let res = complete(id.as_partial(), 1e-9).unwrap();
        let fac = gram_factorize(&res, 1e-8).unwrap();
        assert_eq!(fac.m, 3);
        // each A_i is supported on a single point, and those points are distinct
        let mut support: Vec<usize> = (0..3)
            .map(|i| {
                let live: Vec<usize> = (0..3).filter(|&x| !fac.factor(i, x).is_zero()).collect();
                assert_eq!(live.len(), 1, "A_{i}");
                live[0]
            })
            .collect();
        support.sort();
        assert_eq!(support, vec![0, 1, 2]);

        let res = complete(&path_phi(0.9, 0.9), 1e-9).unwrap();
        let fac = gram_factorize(&res, 1e-8).unwrap();
        assert!((fac.reconstruct(0, 2)[(0, 0)] - c(0.81)).norm() < 1e-12);
        assert!(gram_reconstruction_error(&res.psi, &fac) < 1e-12);
    }

    #[test]
    fn gram_factors_are_zero_padded_to_block_width() {
        // rank 3 with d = 2 → m = 2, last block column half zero
        let g = random_matrix(&mut trial_rng(8, 0), 6, 3);
        let h = HermitianMatrix::gram(&g).unwrap();
        let fac = GramFactorization::from_psd(3, 2, &h, 1e-9).unwrap();
        assert_eq!(fac.m, 2);
        for x in 0..3 {
            assert_eq!(fac.factor(1, x).column(1), vec![c(0.0); 2]);
        }
        assert!((&fac.reconstruct_all() - h.as_matrix()).frobenius_norm() < 1e-12 * h.frobenius_norm());
    }

    #[test]
    fn verify_extension_examples() {
        let phi = path_phi(0.9, 0.9);
        let res = complete(&phi, 1e-9).unwrap();
        let report = verify_extension(&phi, &res.psi, 200, 5);
        assert!(report.passed(), "{:?}", report.failures);
        assert_eq!(report.kernel_trials, 200);
        assert_eq!(report.ampliations.len(), 3);

        let tampered = BlockMultiplier::from_fn(3, 1, |x, y| {
            let b = res.psi.block(x, y).clone();
            if (x, y) == (0, 2) || (x, y) == (2, 0) {
                &b + &ComplexMatrix::from_real(1, 1, &[10.0]).unwrap()
            } else {
                b
            }
        })
        .unwrap();
        let report = verify_extension(&phi, &tampered, 20, 5);
        assert!(report.restriction_exact);
        assert!(!report.assembled_psd);
        assert!(!report.passed());

        let fac = gram_factorize(&res, 1e-8).unwrap();
        let rebuilt = BlockMultiplier::from_assembled(3, 1, &fac.reconstruct_all()).unwrap();
        let report = verify_extension(&restrict(&rebuilt, phi.pattern()).unwrap(), &rebuilt, 50, 6);
        assert!(report.passed(), "{:?}", report.failures);
    }

    #[test]
    fn verify_extension_reports_restriction_drift() {
        let phi = path_phi(0.9, 0.9);
        let res = complete(&phi, 1e-9).unwrap();
        let other = path_phi(0.8, 0.9);
        let report = verify_extension(&other, &res.psi, 5, 0);
        assert!(!report.restriction_exact);
        assert!(!report.passed());
        let report = verify_extension(&other, &BlockMultiplier::identity(2, 1), 5, 0);
        assert!(!report.passed());
    }

    #[test]
    fn round_trip_completion_of_restricted_gram_matrices() {
        for seed in 0..60u64 {
            let mut rng = trial_rng(seed, 0);
            let n = 2 + seed as usize % 9;
            let d = 1 + seed as usize % 3;
            let rank = 1 + seed as usize % (n * d);
            let big = wishart(&mut rng, n * d, rank);
            let full = BlockMultiplier::from_assembled(n, d, big.as_matrix()).unwrap();
            let bits: Vec<bool> = (0..n * n).map(|i| (seed.wrapping_mul(2654435761) >> (i % 31)) & 1 == 1).collect();
            let mut edges = Vec::new();
            for x in 0..n {
                for y in (x + 1)..n {
                    if bits[x * n + y] {
                        edges.push((x, y));
                    }
                }
            }
            let (pattern, _) = fill_in(&Pattern::from_edges(n, &edges));
            let phi = restrict(&full, &pattern).unwrap();
            let res = complete(&phi, 1e-9).unwrap();
            assert!(res.min_eig >= -1e-8 * big.frobenius_norm(), "seed {seed}: {}", res.min_eig);
            for (&(x, y), b) in phi.blocks() {
                assert_eq!(res.psi.block(x, y), b);
            }
            let fac = gram_factorize(&res, 1e-8).unwrap();
            assert!(gram_reconstruction_error(&res.psi, &fac) <= 1e-7);
        }
    }

    #[test]
    fn fill_in_route_completes_diagonally_dominant_cycle() {
        let phi = PartialBlockMultiplier::scalar(Pattern::cycle(5), |x, y| if x == y { c(1.0) } else { c(0.2) }).unwrap();
        let out = complete_with_fill_in(&phi, 1e-9).unwrap();
        assert_eq!(out.added.len(), 2);
        assert_eq!(out.result.filled.len(), Pattern::cycle(5).missing_edges().len());
        let report = verify_extension(&phi, &out.result.psi, 100, 3);
        assert!(report.passed(), "{:?}", report.failures);
    }

    #[test]
    fn fill_in_route_keeps_rank_one_data_consistent() {
        let phi = PartialBlockMultiplier::scalar(Pattern::cycle(4), |_, _| c(1.0)).unwrap();
        let out = complete_with_fill_in(&phi, 1e-9).unwrap();
        let err = (assemble_full(&out.result.psi).as_matrix() - &ComplexMatrix::ones(4, 4)).max_abs();
        assert!(err < 1e-12, "{err:e}");
    }

    #[test]
    fn fill_in_route_rejects_the_four_cycle_obstruction() {
        let phi = PartialBlockMultiplier::scalar(Pattern::cycle(4), |x, y| match (x.min(y), x.max(y)) {
            (0, 3) => c(-1.0),
            _ => c(1.0),
        })
        .unwrap();
        assert!(matches!(
            complete_with_fill_in(&phi, 1e-9),
            Err(CompletionError::FillInRejected { .. })
        ));
    }

    #[test]
    fn greedy_subpattern_is_chordal_and_contained() {
        for n in 4..8 {
            let p = Pattern::cycle(n);
            let sub = greedy_chordal_subpattern(&p);
            assert!(is_chordal(&sub).is_chordal());
            assert!(sub.is_subpattern_of(&p));
            assert_eq!(sub.num_edges(), n - 1);
        }
    }

    #[test]
    fn four_cycle_has_no_positive_completion() {
        let demo = counterexample_c4(GridConfig {
            step: 0.05,
            modulus_step: 0.25,
            phases: 12,
            ..GridConfig::default()
        })
        .unwrap();
        assert!(demo.certified);
        assert!(demo.edge_block_min_eigs.iter().all(|&e| e.abs() < 1e-14));
        assert!(demo.real_max_min_eig < 0.0 && demo.complex_max_min_eig < 0.0);
        assert_eq!(demo.real_grid_points, 41 * 41);
        assert_eq!(demo.complex_grid_points, (5 * 12) * (5 * 12));
    }

    #[test]
    fn ampliation_assembles_to_kronecker_with_ones() {
        let w = wishart(&mut trial_rng(4, 0), 4, 2);
        let psi = BlockMultiplier::from_assembled(2, 2, w.as_matrix()).unwrap();
        let amp = ampliate(&psi, 3);
        let expect = ComplexMatrix::ones(3, 3).kron(w.as_matrix());
        assert_eq!(assemble_full(&amp).as_matrix(), &expect);
    }
}
