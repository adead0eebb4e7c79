//! Block-valued Schur multipliers on finite index sets.
//!
//! A multiplier assigns a `d × d` block to every pair of a [`Pattern`] and
//! acts on scalar kernels entrywise: `(φ·k)(x, y) = k(x, y) φ(x, y)`.

use std::collections::BTreeMap;

use rand::Rng;
use thiserror::Error;

use crate::linalg::{psd_check, Complex, ComplexMatrix, HermitianMatrix, LinalgError, PsdVerdict};
use crate::pattern::{clique_tree, Pattern, PatternError};
use crate::random::{gaussian_vector, trial_rng};

/// Allowed deviation between `φ(y, x)` and `φ(x, y)*` when both are supplied.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MultiplierError {
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("block dimension must be at least 1")]
    ZeroBlockDim,
    #[error("block ({x}, {y}) has shape {found:?}, expected {d}x{d}")]
    BlockShape {
        x: usize,
        y: usize,
        d: usize,
        found: (usize, usize),
    },
    #[error("block ({x}, {y}) lies outside the pattern")]
    OutsidePattern { x: usize, y: usize },
    #[error("no block given for pattern pair ({x}, {y})")]
    MissingBlock { x: usize, y: usize },
    #[error("blocks ({x}, {y}) and ({y}, {x}) are not adjoint (deviation {deviation:e})")]
    NotAdjoint { x: usize, y: usize, deviation: f64 },
    #[error("entry ({x}, {y}) is unspecified")]
    UnspecifiedEntry { x: usize, y: usize },
    #[error("dimension mismatch: expected n = {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("multiplier is only partially defined; a full pattern is required")]
    NotFull,
}

/// `φ : κ → M_d`, defined exactly on the pairs of its pattern.
///
/// Stored blocks satisfy `φ(y, x) = φ(x, y)*` exactly: the block with
/// `x < y` is kept as given and its mirror is its adjoint. Diagonal blocks
/// are symmetrized.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialBlockMultiplier {
    pattern: Pattern,
    d: usize,
    blocks: BTreeMap<(usize, usize), ComplexMatrix>,
}

impl PartialBlockMultiplier {
    /// Accepts blocks on any orientation of each pattern pair. When both
    /// orientations are given they must agree up to [`SYMMETRY_TOL`].
    pub fn new(
        pattern: Pattern,
        d: usize,
        given: BTreeMap<(usize, usize), ComplexMatrix>,
    ) -> Result<Self, MultiplierError> {
        if d == 0 {
            return Err(MultiplierError::ZeroBlockDim);
        }
        for (&(x, y), b) in &given {
            if !pattern.contains(x, y) {
                return Err(MultiplierError::OutsidePattern { x, y });
            }
            if b.shape() != (d, d) {
                return Err(MultiplierError::BlockShape {
                    x,
                    y,
                    d,
                    found: b.shape(),
                });
            }
            b.check_finite()?;
        }
        let mut blocks = BTreeMap::new();
        for (x, y) in pattern.pairs() {
            if x > y {
                continue;
            }
            let upper = given.get(&(x, y));
            let lower = given.get(&(y, x));
            let canonical = match (upper, lower) {
                (Some(u), Some(l)) => {
                    let deviation = (u - &l.adjoint()).frobenius_norm();
                    if deviation > SYMMETRY_TOL * u.frobenius_norm().max(1.0) {
                        return Err(MultiplierError::NotAdjoint { x, y, deviation });
                    }
                    u.clone()
                }
                (Some(u), None) => u.clone(),
                (None, Some(l)) => l.adjoint(),
                (None, None) => return Err(MultiplierError::MissingBlock { x, y }),
            };
            if x == y {
                let h = HermitianMatrix::new(canonical).map_err(|e| match e {
                    LinalgError::NotHermitian { deviation } => {
                        MultiplierError::NotAdjoint { x, y, deviation }
                    }
                    other => other.into(),
                })?;
                if h.correction() > SYMMETRY_TOL * h.scale() {
                    return Err(MultiplierError::NotAdjoint {
                        x,
                        y,
                        deviation: h.correction(),
                    });
                }
                blocks.insert((x, x), h.into_matrix());
            } else {
                blocks.insert((y, x), canonical.adjoint());
                blocks.insert((x, y), canonical);
            }
        }
        Ok(Self { pattern, d, blocks })
    }

    /// Evaluates `f` on pairs `x ≤ y` of the pattern.
    pub fn from_fn(
        pattern: Pattern,
        d: usize,
        mut f: impl FnMut(usize, usize) -> ComplexMatrix,
    ) -> Result<Self, MultiplierError> {
        let given = pattern
            .pairs()
            .into_iter()
            .filter(|&(x, y)| x <= y)
            .map(|(x, y)| ((x, y), f(x, y)))
            .collect();
        Self::new(pattern, d, given)
    }

    /// Scalar (`d = 1`) multiplier.
    pub fn scalar(pattern: Pattern, mut f: impl FnMut(usize, usize) -> Complex) -> Result<Self, MultiplierError> {
        Self::from_fn(pattern, 1, |x, y| ComplexMatrix::from_fn(1, 1, |_, _| f(x, y)))
    }

    pub fn n(&self) -> usize {
        self.pattern.n()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    pub fn block(&self, x: usize, y: usize) -> Option<&ComplexMatrix> {
        self.blocks.get(&(x, y))
    }

    /// All stored blocks keyed by ordered pair.
    pub fn blocks(&self) -> &BTreeMap<(usize, usize), ComplexMatrix> {
        &self.blocks
    }

    pub fn is_full(&self) -> bool {
        self.pattern.is_full()
    }

    /// `[φ(x, y)]_{x, y ∈ idx}`; every pair must be specified.
    pub fn principal_block(&self, idx: &[usize]) -> Result<HermitianMatrix, MultiplierError> {
        let d = self.d;
        let mut m = ComplexMatrix::zeros(idx.len() * d, idx.len() * d);
        for (i, &x) in idx.iter().enumerate() {
            for (j, &y) in idx.iter().enumerate() {
                let b = self.block(x, y).ok_or(MultiplierError::UnspecifiedEntry { x, y })?;
                m.set_block(i * d, j * d, b);
            }
        }
        Ok(HermitianMatrix::new(m)?)
    }

    /// Assembles a multiplier from blocks already known to be complete and
    /// exactly adjoint-symmetric on `pattern`.
    pub(crate) fn from_parts_unchecked(
        pattern: Pattern,
        d: usize,
        blocks: BTreeMap<(usize, usize), ComplexMatrix>,
    ) -> Self {
        debug_assert_eq!(blocks.len(), pattern.pairs().len());
        Self { pattern, d, blocks }
    }
}

/// A multiplier defined on all of `X × X`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMultiplier(PartialBlockMultiplier);

impl BlockMultiplier {
    pub fn new(partial: PartialBlockMultiplier) -> Result<Self, MultiplierError> {
        if partial.is_full() {
            Ok(Self(partial))
        } else {
            Err(MultiplierError::NotFull)
        }
    }

    pub fn from_fn(n: usize, d: usize, f: impl FnMut(usize, usize) -> ComplexMatrix) -> Result<Self, MultiplierError> {
        Self::new(PartialBlockMultiplier::from_fn(Pattern::full(n), d, f)?)
    }

    /// Splits an `nd × nd` matrix into `d × d` blocks.
    pub fn from_assembled(n: usize, d: usize, m: &ComplexMatrix) -> Result<Self, MultiplierError> {
        if m.shape() != (n * d, n * d) {
            return Err(MultiplierError::DimensionMismatch {
                expected: n * d,
                found: m.rows(),
            });
        }
        Self::from_fn(n, d, |x, y| m.block(x * d, y * d, d, d))
    }

    /// `φ(x, y) = δ_{xy} I_d`.
    pub fn identity(n: usize, d: usize) -> Self {
        Self::from_fn(n, d, |x, y| {
            if x == y {
                ComplexMatrix::identity(d)
            } else {
                ComplexMatrix::zeros(d, d)
            }
        })
        .expect("identity multiplier is valid")
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn d(&self) -> usize {
        self.0.d
    }

    pub fn block(&self, x: usize, y: usize) -> &ComplexMatrix {
        &self.0.blocks[&(x, y)]
    }

    pub fn as_partial(&self) -> &PartialBlockMultiplier {
        &self.0
    }

    pub fn into_partial(self) -> PartialBlockMultiplier {
        self.0
    }
}

/// Scalar kernel `k ∈ M_n`, acting as an integral operator on `ℂ^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarKernel {
    entries: ComplexMatrix,
}

impl ScalarKernel {
    pub fn new(entries: ComplexMatrix) -> Result<Self, MultiplierError> {
        if !entries.is_square() {
            return Err(LinalgError::NotSquare {
                rows: entries.rows(),
                cols: entries.cols(),
            }
            .into());
        }
        entries.check_finite()?;
        Ok(Self { entries })
    }

    /// The all-ones kernel `J`.
    pub fn ones(n: usize) -> Self {
        Self {
            entries: ComplexMatrix::ones(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            entries: ComplexMatrix::identity(n),
        }
    }

    /// `e_x e_y*`.
    pub fn basis(n: usize, x: usize, y: usize) -> Self {
        let mut entries = ComplexMatrix::zeros(n, n);
        entries[(x, y)] = Complex::new(1.0, 0.0);
        Self { entries }
    }

    /// `g g*`.
    pub fn outer(g: &[Complex]) -> Self {
        Self {
            entries: ComplexMatrix::outer(g),
        }
    }

    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &ComplexMatrix {
        &self.entries
    }

    pub fn get(&self, x: usize, y: usize) -> Complex {
        self.entries[(x, y)]
    }

    /// Whether every nonzero entry lies on a pair of `p`.
    pub fn is_supported_in(&self, p: &Pattern) -> bool {
        let n = self.n();
        (0..n).all(|x| (0..n).all(|y| p.contains(x, y) || self.get(x, y) == Complex::new(0.0, 0.0)))
    }
}

/// Treatment of pairs outside the pattern when assembling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnspecifiedFill {
    Zero,
    Fail,
}

/// The `nd × nd` block matrix `[φ(x, y)]`.
pub fn assemble(phi: &PartialBlockMultiplier, fill: UnspecifiedFill) -> Result<HermitianMatrix, MultiplierError> {
    let (n, d) = (phi.n(), phi.d());
    let mut m = ComplexMatrix::zeros(n * d, n * d);
    for x in 0..n {
        for y in 0..n {
            match (phi.block(x, y), fill) {
                (Some(b), _) => m.set_block(x * d, y * d, b),
                (None, UnspecifiedFill::Zero) => {}
                (None, UnspecifiedFill::Fail) => return Err(MultiplierError::UnspecifiedEntry { x, y }),
            }
        }
    }
    Ok(HermitianMatrix::new(m)?)
}

/// Assembled matrix of a full multiplier.
pub fn assemble_full(phi: &BlockMultiplier) -> HermitianMatrix {
    assemble(phi.as_partial(), UnspecifiedFill::Fail).expect("full multipliers assemble")
}

fn apply_blocks(phi: &PartialBlockMultiplier, k: &ScalarKernel) -> Result<ComplexMatrix, MultiplierError> {
    if k.n() != phi.n() {
        return Err(MultiplierError::DimensionMismatch {
            expected: phi.n(),
            found: k.n(),
        });
    }
    let (n, d) = (phi.n(), phi.d());
    let mut out = ComplexMatrix::zeros(n * d, n * d);
    for (&(x, y), b) in phi.blocks() {
        let kxy = k.get(x, y);
        for i in 0..d {
            for j in 0..d {
                out[(x * d + i, y * d + j)] = kxy * b[(i, j)];
            }
        }
    }
    Ok(out)
}

/// `S_φ(k)`: block `(x, y)` is `k(x, y) φ(x, y)`.
pub fn schur_apply(phi: &BlockMultiplier, k: &ScalarKernel) -> Result<ComplexMatrix, MultiplierError> {
    apply_blocks(phi.as_partial(), k)
}

/// `S_φ(k)` with unspecified blocks read as zero. Meaningful for kernels
/// supported in the pattern.
pub fn schur_apply_masked(phi: &PartialBlockMultiplier, k: &ScalarKernel) -> Result<ComplexMatrix, MultiplierError> {
    apply_blocks(phi, k)
}

/// Copies `ψ` on the pairs of `p`.
pub fn restrict(psi: &BlockMultiplier, p: &Pattern) -> Result<PartialBlockMultiplier, MultiplierError> {
    if p.n() != psi.n() {
        return Err(MultiplierError::DimensionMismatch {
            expected: psi.n(),
            found: p.n(),
        });
    }
    let blocks = p
        .pairs()
        .into_iter()
        .map(|(x, y)| ((x, y), psi.block(x, y).clone()))
        .collect();
    Ok(PartialBlockMultiplier {
        pattern: p.clone(),
        d: psi.d(),
        blocks,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Admissibility {
    Admissible,
    /// First maximal clique whose block matrix is not PSD.
    Rejected { clique: Vec<usize>, min_eig: f64 },
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Admissibility::Admissible)
    }
}

/// Exact admissibility test on a chordal pattern: every maximal-clique block
/// matrix must be PSD.
pub fn admissible_chordal(phi: &PartialBlockMultiplier, tol: f64) -> Result<Admissibility, MultiplierError> {
    let tree = clique_tree(phi.pattern())?;
    for clique in tree.cliques {
        let block = phi.principal_block(&clique)?;
        if let PsdVerdict::Indefinite { min_eig, .. } = psd_check(&block, tol)? {
            return Ok(Admissibility::Rejected { clique, min_eig });
        }
    }
    Ok(Admissibility::Admissible)
}

/// Where a sampled kernel came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KernelProbe {
    /// `e_x e_x*`.
    Basis(usize),
    /// `χ_β χ_β*` for a maximal clique `β` of a greedy clique cover.
    CliqueIndicator(Vec<usize>),
    /// Random sum of clique-supported rank-one kernels, by trial index.
    Random(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SampledAdmissibility {
    NoViolationFound { probes: usize },
    Violation {
        kernel: ScalarKernel,
        probe: KernelProbe,
        min_eig: f64,
    },
}

impl SampledAdmissibility {
    pub fn found_violation(&self) -> bool {
        matches!(self, SampledAdmissibility::Violation { .. })
    }
}

/// Greedy cover of the pattern by maximal cliques, lowest indices first.
pub fn greedy_clique_cover(p: &Pattern) -> Vec<Vec<usize>> {
    let n = p.n();
    let mut covered = std::collections::BTreeSet::new();
    let mut cliques: Vec<Vec<usize>> = Vec::new();
    let mut seeds: Vec<(usize, usize)> = p.edges();
    seeds.extend((0..n).filter(|&x| p.degree(x) == 0).map(|x| (x, x)));
    for (x, y) in seeds {
        if covered.contains(&(x, y)) {
            continue;
        }
        let mut clique = vec![x];
        if y != x {
            clique.push(y);
        }
        for z in 0..n {
            if !clique.contains(&z) && clique.iter().all(|&c| p.contains(c, z)) {
                clique.push(z);
            }
        }
        clique.sort_unstable();
        for &a in &clique {
            for &b in &clique {
                if a <= b {
                    covered.insert((a, b));
                }
            }
        }
        cliques.push(clique);
    }
    cliques
}

fn random_clique<R: Rng>(p: &Pattern, rng: &mut R) -> Vec<usize> {
    let start = rng.random_range(0..p.n());
    let mut clique = vec![start];
    let mut candidates: Vec<usize> = p.neighbors(start).iter().copied().collect();
    while !candidates.is_empty() && rng.random_bool(0.75) {
        let c = candidates.swap_remove(rng.random_range(0..candidates.len()));
        candidates.retain(|&z| p.contains(c, z));
        clique.push(c);
    }
    clique.sort_unstable();
    clique
}

/// Kernel for random trial `t`: a sum of one to three terms `g g*`, each `g`
/// Gaussian on a random clique of `p`.
pub fn random_clique_kernel(p: &Pattern, seed: u64, t: u64) -> ScalarKernel {
    let mut rng = trial_rng(seed, t);
    let n = p.n();
    let terms = rng.random_range(1..=3);
    let mut k = ComplexMatrix::zeros(n, n);
    for _ in 0..terms {
        let clique = random_clique(p, &mut rng);
        let coeffs = gaussian_vector(&mut rng, clique.len());
        let mut g = vec![Complex::new(0.0, 0.0); n];
        for (&v, c) in clique.iter().zip(coeffs) {
            g[v] = c;
        }
        k = &k + &ComplexMatrix::outer(&g);
    }
    ScalarKernel { entries: k }
}

/// Falsification search for admissibility on an arbitrary pattern.
///
/// Probes, in order: every `e_x e_x*`, the indicator kernel of every clique
/// in a greedy clique cover, then `trials` random clique-supported kernels.
/// PSD kernels supported on `κ` that are not sums of clique-supported ones
/// are never produced, so a clean run is not a proof.
pub fn admissible_sampled(
    phi: &PartialBlockMultiplier,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<SampledAdmissibility, MultiplierError> {
    let n = phi.n();
    let p = phi.pattern();
    let mut probes = 0;
    let mut check = |kernel: ScalarKernel, probe: KernelProbe| -> Result<Option<SampledAdmissibility>, MultiplierError> {
        probes += 1;
        let out = HermitianMatrix::new(schur_apply_masked(phi, &kernel)?)?;
        Ok(match psd_check(&out, tol)? {
            PsdVerdict::Positive { .. } => None,
            PsdVerdict::Indefinite { min_eig, .. } => Some(SampledAdmissibility::Violation {
                kernel,
                probe,
                min_eig,
            }),
        })
    };
    for x in 0..n {
        if let Some(v) = check(ScalarKernel::basis(n, x, x), KernelProbe::Basis(x))? {
            return Ok(v);
        }
    }
    for clique in greedy_clique_cover(p) {
        let mut g = vec![Complex::new(0.0, 0.0); n];
        for &v in &clique {
            g[v] = Complex::new(1.0, 0.0);
        }
        if let Some(v) = check(ScalarKernel::outer(&g), KernelProbe::CliqueIndicator(clique))? {
            return Ok(v);
        }
    }
    for t in 0..trials as u64 {
        if let Some(v) = check(random_clique_kernel(p, seed, t), KernelProbe::Random(t))? {
            return Ok(v);
        }
    }
    Ok(SampledAdmissibility::NoViolationFound { probes })
}
