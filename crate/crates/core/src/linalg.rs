//! Dense complex linear algebra kernel.
//!
//! Everything in the crate reduces to questions about small dense Hermitian
//! matrices: is this block matrix positive, what is its spectrum, how do we
//! split it as a Gram product. The single numerical workhorse is a cyclic
//! Jacobi eigensolver for complex Hermitian input.
//!
//! Tolerances are relative. A PSD verdict with tolerance `tol` accepts
//! `λ_min ≥ -tol · max(1, ‖M‖_F)`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type Complex = Complex64;

/// Relative accuracy target of [`eigh`].
pub const EIG_TOL: f64 = 1e-12;
/// Sweep budget of the Jacobi iteration.
pub const MAX_SWEEPS: usize = 100;
/// Default relative tolerance for PSD verdicts.
pub const DEFAULT_PSD_TOL: f64 = 1e-9;
/// Asymmetry above which [`HermitianMatrix::new`] rejects rather than symmetrizes.
pub const MAX_ASYMMETRY: f64 = 1e-6;

// Sweeps stop early once the off-diagonal mass is this small relative to ‖M‖_F.
const SWEEP_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("Jacobi iteration did not converge in {sweeps} sweeps (off-diagonal mass {off_diagonal:e})")]
    NonConvergence { sweeps: usize, off_diagonal: f64 },
    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is too far from Hermitian (‖M - M*‖_F = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("tolerance must be non-negative, got {0}")]
    InvalidTolerance(f64),
    #[error("matrix has zero dimension")]
    Empty,
}

/// `max(1, x)`, the scale every relative tolerance is measured against.
#[inline]
pub fn unit_scale(norm: f64) -> f64 {
    norm.max(1.0)
}

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(1.0, 0.0);
        }
        m
    }

    /// `rows × cols` matrix with every entry equal to one.
    pub fn ones(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(1.0, 0.0); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data, rejecting wrong lengths and non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::ShapeMismatch {
                expected: (rows, cols),
                found: (data.len(), 1),
            });
        }
        let m = Self { rows, cols, data };
        m.check_finite()?;
        Ok(m)
    }

    /// Real row-major data.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self, LinalgError> {
        Self::from_vec(rows, cols, data.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    pub fn from_rows(rows: &[Vec<Complex>]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(LinalgError::ShapeMismatch {
                    expected: (r, c),
                    found: (r, row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_vec(r, c, data)
    }

    pub fn column_vector(v: &[Complex]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    /// `v v*`.
    pub fn outer(v: &[Complex]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn check_finite(&self) -> Result<(), LinalgError> {
        match self.data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            Some(p) => Err(LinalgError::NonFinite {
                row: p / self.cols.max(1),
                col: p % self.cols.max(1),
            }),
            None => Ok(()),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Rectangular block starting at `(row, col)`.
    pub fn block(&self, row: usize, col: usize, height: usize, width: usize) -> Self {
        Self::from_fn(height, width, |i, j| self[(row + i, col + j)])
    }

    pub fn set_block(&mut self, row: usize, col: usize, block: &ComplexMatrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(row + i, col + j)] = block[(i, j)];
            }
        }
    }

    /// Submatrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &ComplexMatrix) -> Self {
        let (r, c) = other.shape();
        Self::from_fn(self.rows * r, self.cols * c, |i, j| {
            self[(i / r, j / c)] * other[(i % r, j % c)]
        })
    }

    /// Entrywise product.
    pub fn hadamard(&self, other: &ComplexMatrix) -> Self {
        assert_eq!(self.shape(), other.shape(), "hadamard: shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn mul_vec(&self, v: &[Complex]) -> Vec<Complex> {
        assert_eq!(self.cols, v.len(), "mul_vec: shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Spectral norm, computed from the eigenvalues of the smaller Gram product.
    pub fn operator_norm(&self) -> Result<f64, LinalgError> {
        if self.data.is_empty() || self.is_zero() {
            return Ok(0.0);
        }
        let gram = if self.rows <= self.cols {
            self * &self.adjoint()
        } else {
            &self.adjoint() * self
        };
        let h = HermitianMatrix::new(gram)?;
        let eig = eigh(&h)?;
        Ok(eig.max().max(0.0).sqrt())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul: shape mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let rhs_row = rhs.row(k);
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "add: shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "sub: shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Square complex matrix with exact conjugate symmetry.
///
/// The constructor symmetrizes small asymmetries via `(M + M*)/2` and keeps
/// the Frobenius norm of the applied correction. Diagonal imaginary parts are
/// exactly zero.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: ComplexMatrix,
    correction: f64,
}

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self, LinalgError> {
        if !m.is_square() {
            return Err(LinalgError::NotSquare {
                rows: m.rows,
                cols: m.cols,
            });
        }
        if m.rows == 0 {
            return Err(LinalgError::Empty);
        }
        m.check_finite()?;
        let n = m.rows;
        let mut deviation = 0.0;
        for i in 0..n {
            for j in 0..n {
                deviation += (m[(i, j)] - m[(j, i)].conj()).norm_sqr();
            }
        }
        let deviation = deviation.sqrt();
        if deviation > MAX_ASYMMETRY * unit_scale(m.frobenius_norm()) {
            return Err(LinalgError::NotHermitian { deviation });
        }
        let mut h = m.clone();
        for i in 0..n {
            h[(i, i)] = Complex::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        let correction = (&h - &m).frobenius_norm();
        Ok(Self {
            inner: h,
            correction,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: ComplexMatrix::identity(n),
            correction: 0.0,
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            inner: ComplexMatrix::zeros(n, n),
            correction: 0.0,
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = ComplexMatrix::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex::new(v, 0.0);
        }
        Self {
            inner: m,
            correction: 0.0,
        }
    }

    /// Real symmetric matrix from row-major data.
    pub fn from_real(n: usize, data: &[f64]) -> Result<Self, LinalgError> {
        Self::new(ComplexMatrix::from_real(n, n, data)?)
    }

    /// `G G*`.
    pub fn gram(g: &ComplexMatrix) -> Result<Self, LinalgError> {
        Self::new(g * &g.adjoint())
    }

    /// `v v*`.
    pub fn outer(v: &[Complex]) -> Result<Self, LinalgError> {
        Self::new(ComplexMatrix::outer(v))
    }

    pub fn dim(&self) -> usize {
        self.inner.rows
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.inner
    }

    /// Frobenius norm of the correction applied by the constructor.
    pub fn correction(&self) -> f64 {
        self.correction
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }

    /// `max(1, ‖M‖_F)`.
    pub fn scale(&self) -> f64 {
        unit_scale(self.frobenius_norm())
    }

    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        Self {
            inner: self.inner.select(idx, idx),
            correction: 0.0,
        }
    }

    /// Adds `s · I`.
    pub fn shifted(&self, s: f64) -> Self {
        let mut m = self.inner.clone();
        for i in 0..m.rows {
            m[(i, i)].re += s;
        }
        Self {
            inner: m,
            correction: 0.0,
        }
    }

    /// Real quadratic form `(M v, v)`.
    pub fn quadratic_form(&self, v: &[Complex]) -> f64 {
        let mv = self.inner.mul_vec(v);
        mv.iter().zip(v).map(|(a, b)| a * b.conj()).sum::<Complex>().re
    }
}

impl Index<(usize, usize)> for HermitianMatrix {
    type Output = Complex;

    fn index(&self, idx: (usize, usize)) -> &Complex {
        &self.inner[idx]
    }
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hermitian{:?}", self.inner)
    }
}

/// Spectral decomposition `M = V diag(values) V*` with ascending values.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn vector(&self, i: usize) -> Vec<Complex> {
        self.vectors.column(i)
    }

    /// `Σ λ_i v_i v_i*`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.vectors.rows();
        let mut out = ComplexMatrix::zeros(n, n);
        for (i, &lambda) in self.values.iter().enumerate() {
            let v = self.vector(i);
            for r in 0..n {
                let a = v[r] * lambda;
                for c in 0..n {
                    out[(r, c)] += a * v[c].conj();
                }
            }
        }
        out
    }

    /// Largest `‖M v_i - λ_i v_i‖₂` over all pairs.
    pub fn max_residual(&self, m: &HermitianMatrix) -> f64 {
        (0..self.values.len())
            .map(|i| {
                let v = self.vector(i);
                let mv = m.as_matrix().mul_vec(&v);
                mv.iter()
                    .zip(&v)
                    .map(|(a, b)| (a - b * self.values[i]).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `‖V*V - I‖_F`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = &self.vectors.adjoint() * &self.vectors;
        (&g - &ComplexMatrix::identity(g.rows())).frobenius_norm()
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Full eigendecomposition by cyclic Jacobi rotations.
pub fn eigh(m: &HermitianMatrix) -> Result<EigenDecomposition, LinalgError> {
    let n = m.dim();
    let mut a = m.as_matrix().clone();
    let mut v = ComplexMatrix::identity(n);
    let norm = a.frobenius_norm();

    let mut sweeps = 0;
    let mut off = off_diagonal_norm(&a);
    while off > SWEEP_FLOOR * norm && sweeps < MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                if rotate(&mut a, &mut v, p, q, norm) {
                    rotated = true;
                }
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&a);
        if !rotated {
            break;
        }
    }
    if off > EIG_TOL * norm {
        return Err(LinalgError::NonConvergence {
            sweeps,
            off_diagonal: off,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(EigenDecomposition { values, vectors })
}

/// One complex Jacobi rotation annihilating `a[p][q]`. Returns false when skipped.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, norm: f64) -> bool {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 || mag < 1e-18 * norm {
        return false;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let phase = apq / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta >= 0.0 {
        1.0 / (theta + theta.hypot(1.0))
    } else {
        -1.0 / (-theta + theta.hypot(1.0))
    };
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;
    let s_e = phase * s;
    let s_ec = phase.conj() * s;

    let n = a.rows();
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[(r, p)];
        let arq = a[(r, q)];
        let new_rp = arp * c - s_ec * arq;
        let new_rq = s_e * arp + arq * c;
        a[(r, p)] = new_rp;
        a[(p, r)] = new_rp.conj();
        a[(r, q)] = new_rq;
        a[(q, r)] = new_rq.conj();
    }
    a[(p, p)] = Complex::new(app - t * mag, 0.0);
    a[(q, q)] = Complex::new(aqq + t * mag, 0.0);
    a[(p, q)] = Complex::new(0.0, 0.0);
    a[(q, p)] = Complex::new(0.0, 0.0);

    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = vrp * c - s_ec * vrq;
        v[(r, q)] = s_e * vrp + vrq * c;
    }
    true
}

#[derive(Clone, Debug, PartialEq)]
pub enum PsdVerdict {
    Positive {
        min_eig: f64,
    },
    /// `witness` is a unit eigenvector for `min_eig`.
    Indefinite {
        min_eig: f64,
        witness: Vec<Complex>,
    },
}

impl PsdVerdict {
    pub fn is_positive(&self) -> bool {
        matches!(self, PsdVerdict::Positive { .. })
    }

    pub fn min_eig(&self) -> f64 {
        match self {
            PsdVerdict::Positive { min_eig } | PsdVerdict::Indefinite { min_eig, .. } => *min_eig,
        }
    }
}

fn check_tol(tol: f64) -> Result<(), LinalgError> {
    if tol >= 0.0 {
        Ok(())
    } else {
        Err(LinalgError::InvalidTolerance(tol))
    }
}

fn verdict_from(eig: &EigenDecomposition, m: &HermitianMatrix, tol: f64) -> PsdVerdict {
    let min_eig = eig.min();
    if min_eig >= -tol * m.scale() {
        PsdVerdict::Positive { min_eig }
    } else {
        PsdVerdict::Indefinite {
            min_eig,
            witness: eig.vector(0),
        }
    }
}

/// Positive semidefiniteness test relative to `max(1, ‖M‖_F)`.
pub fn psd_check(m: &HermitianMatrix, tol: f64) -> Result<PsdVerdict, LinalgError> {
    check_tol(tol)?;
    let eig = eigh(m)?;
    Ok(verdict_from(&eig, m, tol))
}

/// Scaled eigenvectors `√λ_j v_j` for every `λ_j > tol · ‖M‖_F`.
fn positive_parts(m: &HermitianMatrix, tol: f64) -> Result<Vec<Vec<Complex>>, LinalgError> {
    check_tol(tol)?;
    let eig = eigh(m)?;
    if let PsdVerdict::Indefinite { min_eig, .. } = verdict_from(&eig, m, tol) {
        return Err(LinalgError::NotPsd { min_eig });
    }
    let cutoff = tol * m.frobenius_norm();
    // Largest eigenvalue first.
    Ok((0..eig.values.len())
        .rev()
        .filter(|&i| eig.values[i] > cutoff)
        .map(|i| {
            let r = eig.values[i].sqrt();
            eig.vector(i).into_iter().map(|z| z * r).collect()
        })
        .collect())
}

/// `G` with `M = G G*`; one column per retained eigenvalue.
pub fn gram_factor(m: &HermitianMatrix, tol: f64) -> Result<ComplexMatrix, LinalgError> {
    let parts = positive_parts(m, tol)?;
    let n = m.dim();
    Ok(ComplexMatrix::from_fn(n, parts.len(), |i, j| parts[j][i]))
}

/// Vectors `R_j` with `M = Σ R_j R_j*`, largest weight first.
pub fn rank_one_decompose(m: &HermitianMatrix, tol: f64) -> Result<Vec<Vec<Complex>>, LinalgError> {
    positive_parts(m, tol)
}

/// Moore–Penrose inverse; eigenvalues with `|λ| ≤ tol · ‖M‖_F` are treated as zero.
pub fn pseudo_inverse(m: &HermitianMatrix, tol: f64) -> Result<HermitianMatrix, LinalgError> {
    check_tol(tol)?;
    let eig = eigh(m)?;
    let cutoff = tol * m.frobenius_norm();
    let n = m.dim();
    let mut out = ComplexMatrix::zeros(n, n);
    for (i, &lambda) in eig.values.iter().enumerate() {
        if lambda.abs() <= cutoff {
            continue;
        }
        let v = eig.vector(i);
        let inv = 1.0 / lambda;
        for r in 0..n {
            let a = v[r] * inv;
            for c in 0..n {
                out[(r, c)] += a * v[c].conj();
            }
        }
    }
    HermitianMatrix::new(out)
}
