//! JSON reports emitted by the subcommands. Every type reads back what it writes.

use serde::{Deserialize, Serialize};

use schurmult::completion::{C4Demonstration, ExtensionReport};
use schurmult::json::{CompletionWire, MatrixWire, TwoSidedWire, WireComplex};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChordalReport {
    pub n: usize,
    pub chordal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elimination_order: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cliques: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdmissibilityMethod {
    /// Exact clique test on a chordal pattern.
    Cliques,
    /// Falsification search on a non-chordal pattern.
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub method: AdmissibilityMethod,
    /// False for a clean sampled run, which is not a proof.
    pub exact: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clique: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_eig: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmpliationWire {
    pub m: usize,
    pub kernels: usize,
    pub min_eig: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationWire {
    pub passed: bool,
    pub restriction_exact: bool,
    pub assembled_psd: bool,
    pub assembled_min_eig: Option<f64>,
    pub kernel_trials: usize,
    pub kernel_failures: usize,
    pub ampliations: Vec<AmpliationWire>,
    pub failures: Vec<String>,
}

impl From<&ExtensionReport> for VerificationWire {
    fn from(r: &ExtensionReport) -> Self {
        Self {
            passed: r.passed(),
            restriction_exact: r.restriction_exact,
            assembled_psd: r.assembled_psd,
            assembled_min_eig: r.assembled_min_eig.is_finite().then_some(r.assembled_min_eig),
            kernel_trials: r.kernel_trials,
            kernel_failures: r.kernel_failures,
            ampliations: r
                .ampliations
                .iter()
                .map(|a| AmpliationWire {
                    m: a.m,
                    kernels: a.kernels,
                    min_eig: a.min_eig,
                    passed: a.passed,
                })
                .collect(),
            failures: r.failures.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompleteReport {
    #[serde(flatten)]
    pub completion: CompletionWire,
    pub verification: VerificationWire,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizeReport {
    #[serde(flatten)]
    pub factorization: TwoSidedWire,
    pub cb_norm_lower: f64,
    pub reconstruction_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplyReport {
    #[serde(flatten)]
    pub result: MatrixWire,
    /// Smallest eigenvalue when the output is Hermitian.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_eig: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeWire {
    pub x: usize,
    pub y: usize,
    pub value: f64,
    pub block_min_eig: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub certified: bool,
    pub epsilon: f64,
    pub edges: Vec<EdgeWire>,
    pub step: f64,
    pub radius: f64,
    pub phases: usize,
    pub modulus_step: f64,
    pub real_grid_points: usize,
    pub real_max_min_eig: f64,
    pub real_argmax: [f64; 2],
    pub complex_grid_points: usize,
    pub complex_max_min_eig: f64,
    pub complex_argmax: [WireComplex; 2],
}

impl From<&C4Demonstration> for CounterexampleReport {
    fn from(d: &C4Demonstration) -> Self {
        let (a, b) = d.complex_argmax;
        Self {
            certified: d.certified,
            epsilon: d.epsilon,
            edges: d
                .edge_values
                .iter()
                .zip(&d.edge_block_min_eigs)
                .map(|(&(x, y, value), &block_min_eig)| EdgeWire {
                    x,
                    y,
                    value,
                    block_min_eig,
                })
                .collect(),
            step: d.config.step,
            radius: d.config.radius,
            phases: d.config.phases,
            modulus_step: d.config.modulus_step,
            real_grid_points: d.real_grid_points,
            real_max_min_eig: d.real_max_min_eig,
            real_argmax: [d.real_argmax.0, d.real_argmax.1],
            complex_grid_points: d.complex_grid_points,
            complex_max_min_eig: d.complex_max_min_eig,
            complex_argmax: [[a.re, a.im], [b.re, b.im]],
        }
    }
}
