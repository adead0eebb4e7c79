//! JSON wire formats. Complex numbers are `[re, im]` arrays and matrices are
//! row-major arrays of rows.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::completion::{CompletionResult, FilledEntry, GramFactorization};
use crate::linalg::{Complex, ComplexMatrix, LinalgError};
use crate::multiplier::{BlockMultiplier, MultiplierError, PartialBlockMultiplier, ScalarKernel};
use crate::pattern::{validate_positivity_domain, Pattern, PatternError};
use crate::schur_engine::TwoSidedFactorization;

pub type WireComplex = [f64; 2];
pub type WireMatrix = Vec<Vec<WireComplex>>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WireError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("{context}: {message}")]
    Shape { context: String, message: String },
    #[error("pair ({x}, {y}) is listed more than once")]
    Duplicate { x: usize, y: usize },
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Multiplier(#[from] MultiplierError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl From<serde_json::Error> for WireError {
    fn from(e: serde_json::Error) -> Self {
        WireError::Json(e.to_string())
    }
}

fn shape(context: impl Into<String>, message: impl Into<String>) -> WireError {
    WireError::Shape {
        context: context.into(),
        message: message.into(),
    }
}

pub fn matrix_to_wire(m: &ComplexMatrix) -> WireMatrix {
    (0..m.rows()).map(|r| m.row(r).iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn matrix_from_wire(w: &WireMatrix, context: &str) -> Result<ComplexMatrix, WireError> {
    let rows: Vec<Vec<Complex>> = w
        .iter()
        .map(|row| row.iter().map(|&[re, im]| Complex::new(re, im)).collect())
        .collect();
    if rows.is_empty() || rows[0].is_empty() {
        return Err(shape(context, "matrix is empty"));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != rows[0].len()) {
        return Err(shape(
            context,
            format!("row {i} has {} entries, row 0 has {}", rows[i].len(), rows[0].len()),
        ));
    }
    let m = ComplexMatrix::from_rows(&rows)?;
    m.check_finite()?;
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternWire {
    pub n: usize,
    pub pairs: Vec<(usize, usize)>,
}

impl PatternWire {
    pub fn from_pattern(p: &Pattern) -> Self {
        Self {
            n: p.n(),
            pairs: p.pairs(),
        }
    }

    /// Strict: the listed pairs must already form a positivity domain.
    pub fn to_pattern(&self) -> Result<Pattern, WireError> {
        Ok(validate_positivity_domain(self.n, &self.pairs)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockWire {
    pub x: usize,
    pub y: usize,
    pub block: WireMatrix,
}

impl BlockWire {
    fn new(x: usize, y: usize, block: &ComplexMatrix) -> Self {
        Self {
            x,
            y,
            block: matrix_to_wire(block),
        }
    }

    fn matrix(&self) -> Result<ComplexMatrix, WireError> {
        matrix_from_wire(&self.block, &format!("block ({}, {})", self.x, self.y))
    }
}

/// One entry per unordered pair; the mirror block is the adjoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierWire {
    pub n: usize,
    pub d: usize,
    pub pairs: Vec<BlockWire>,
}

impl MultiplierWire {
    pub fn from_multiplier(phi: &PartialBlockMultiplier) -> Self {
        Self {
            n: phi.n(),
            d: phi.d(),
            pairs: phi
                .blocks()
                .iter()
                .filter(|((x, y), _)| x <= y)
                .map(|(&(x, y), b)| BlockWire::new(x, y, b))
                .collect(),
        }
    }

    /// The pattern is the listed pairs together with their mirrors. Every
    /// diagonal pair must be listed.
    pub fn to_multiplier(&self) -> Result<PartialBlockMultiplier, WireError> {
        let mut given = BTreeMap::new();
        let mut raw = Vec::new();
        for b in &self.pairs {
            let (lo, hi) = (b.x.min(b.y), b.x.max(b.y));
            if given.keys().any(|&(x, y): &(usize, usize)| (x.min(y), x.max(y)) == (lo, hi)) {
                return Err(WireError::Duplicate { x: lo, y: hi });
            }
            raw.push((b.x, b.y));
            raw.push((b.y, b.x));
            given.insert((b.x, b.y), b.matrix()?);
        }
        let pattern = validate_positivity_domain(self.n, &raw)?;
        Ok(PartialBlockMultiplier::new(pattern, self.d, given)?)
    }

    pub fn to_full(&self) -> Result<BlockMultiplier, WireError> {
        Ok(BlockMultiplier::new(self.to_multiplier()?)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionWire {
    #[serde(flatten)]
    pub multiplier: MultiplierWire,
    pub filled: Vec<BlockWire>,
    pub min_eig: f64,
    /// Pairs added to reach a chordal pattern, when that route was taken.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fill_in: Vec<(usize, usize)>,
}

impl CompletionWire {
    pub fn from_result(res: &CompletionResult, fill_in: &[(usize, usize)]) -> Self {
        Self {
            multiplier: MultiplierWire::from_multiplier(res.psi.as_partial()),
            filled: res.filled.iter().map(|f| BlockWire::new(f.x, f.y, &f.block)).collect(),
            min_eig: res.min_eig,
            fill_in: fill_in.to_vec(),
        }
    }

    pub fn to_result(&self) -> Result<(CompletionResult, Vec<(usize, usize)>), WireError> {
        let psi = self.multiplier.to_full()?;
        let filled = self
            .filled
            .iter()
            .map(|b| {
                Ok(FilledEntry {
                    x: b.x,
                    y: b.y,
                    block: b.matrix()?,
                })
            })
            .collect::<Result<_, WireError>>()?;
        Ok((
            CompletionResult {
                psi,
                filled,
                min_eig: self.min_eig,
            },
            self.fill_in.clone(),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeftFactorWire {
    pub i: usize,
    pub x: usize,
    pub block: WireMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RightFactorWire {
    pub i: usize,
    pub y: usize,
    pub block: WireMatrix,
}

fn left_table(t: &[Vec<ComplexMatrix>]) -> Vec<LeftFactorWire> {
    t.iter()
        .enumerate()
        .flat_map(|(i, row)| {
            row.iter().enumerate().map(move |(x, b)| LeftFactorWire {
                i,
                x,
                block: matrix_to_wire(b),
            })
        })
        .collect()
}

fn right_table(t: &[Vec<ComplexMatrix>]) -> Vec<RightFactorWire> {
    t.iter()
        .enumerate()
        .flat_map(|(i, row)| {
            row.iter().enumerate().map(move |(y, b)| RightFactorWire {
                i,
                y,
                block: matrix_to_wire(b),
            })
        })
        .collect()
}

/// Rebuilds `table[i][x]` from `(i, x, block)` triples covering `m × n` exactly once.
fn read_table<'a>(
    entries: impl Iterator<Item = (usize, usize, &'a WireMatrix)>,
    m: usize,
    n: usize,
    d: usize,
    name: &str,
) -> Result<Vec<Vec<ComplexMatrix>>, WireError> {
    let mut slots: Vec<Vec<Option<ComplexMatrix>>> = vec![vec![None; n]; m];
    for (i, x, w) in entries {
        let context = format!("{name}[{i}][{x}]");
        if i >= m || x >= n {
            return Err(shape(context, format!("index outside {m} x {n}")));
        }
        let b = matrix_from_wire(w, &context)?;
        if b.shape() != (d, d) {
            return Err(shape(context, format!("expected {d}x{d}, found {:?}", b.shape())));
        }
        if slots[i][x].replace(b).is_some() {
            return Err(shape(context, "listed more than once"));
        }
    }
    slots
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            row.into_iter()
                .enumerate()
                .map(|(x, b)| b.ok_or_else(|| shape(format!("{name}[{i}][{x}]"), "missing")))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramWire {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    #[serde(rename = "A")]
    pub a: Vec<LeftFactorWire>,
    pub row_bound: f64,
}

impl GramWire {
    pub fn from_factorization(g: &GramFactorization) -> Self {
        Self {
            n: g.n,
            d: g.d,
            m: g.m,
            a: left_table(&g.factors),
            row_bound: g.row_bound,
        }
    }

    pub fn to_factorization(&self) -> Result<GramFactorization, WireError> {
        let factors = read_table(self.a.iter().map(|e| (e.i, e.x, &e.block)), self.m, self.n, self.d, "A")?;
        Ok(GramFactorization {
            n: self.n,
            d: self.d,
            m: self.m,
            factors,
            row_bound: self.row_bound,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoSidedWire {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    #[serde(rename = "A")]
    pub a: Vec<LeftFactorWire>,
    #[serde(rename = "B")]
    pub b: Vec<RightFactorWire>,
    pub row_bound: f64,
    pub col_bound: f64,
    pub cb_norm_upper: f64,
    pub symmetric: bool,
}

impl TwoSidedWire {
    pub fn from_factorization(f: &TwoSidedFactorization) -> Self {
        Self {
            n: f.n,
            d: f.d,
            m: f.m,
            a: left_table(&f.a),
            b: right_table(&f.b),
            row_bound: f.row_bound,
            col_bound: f.col_bound,
            cb_norm_upper: f.row_bound * f.col_bound,
            symmetric: f.symmetric,
        }
    }

    pub fn to_factorization(&self) -> Result<TwoSidedFactorization, WireError> {
        let a = read_table(self.a.iter().map(|e| (e.i, e.x, &e.block)), self.m, self.n, self.d, "A")?;
        let b = read_table(self.b.iter().map(|e| (e.i, e.y, &e.block)), self.m, self.n, self.d, "B")?;
        Ok(TwoSidedFactorization {
            n: self.n,
            d: self.d,
            m: self.m,
            a,
            b,
            row_bound: self.row_bound,
            col_bound: self.col_bound,
            symmetric: self.symmetric,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelWire {
    pub n: usize,
    pub entries: WireMatrix,
}

impl KernelWire {
    pub fn from_kernel(k: &ScalarKernel) -> Self {
        Self {
            n: k.n(),
            entries: matrix_to_wire(k.entries()),
        }
    }

    pub fn to_kernel(&self) -> Result<ScalarKernel, WireError> {
        let m = matrix_from_wire(&self.entries, "entries")?;
        if m.shape() != (self.n, self.n) {
            return Err(shape("entries", format!("expected {0}x{0}, found {1:?}", self.n, m.shape())));
        }
        Ok(ScalarKernel::new(m)?)
    }
}

/// Dense matrix payload, used for outputs of the Schur action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixWire {
    pub rows: usize,
    pub cols: usize,
    pub entries: WireMatrix,
}

impl MatrixWire {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            entries: matrix_to_wire(m),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix, WireError> {
        let m = matrix_from_wire(&self.entries, "entries")?;
        if m.shape() != (self.rows, self.cols) {
            return Err(shape(
                "entries",
                format!("expected {}x{}, found {:?}", self.rows, self.cols, m.shape()),
            ));
        }
        Ok(m)
    }
}
