//! Positive completion, factorization and cone computations for block Schur
//! multipliers on finite pattern graphs.

pub mod completion;
pub mod cones;
pub mod json;
pub mod linalg;
pub mod multiplier;
pub mod pattern;
pub mod random;
pub mod schur_engine;
