//! Machine-readable reports.
//!
//! Reports contain no timestamps or host details: identical inputs and
//! tolerances reproduce byte-identical output, which the test suite
//! checks.

use crate::io::{Cplx, MatrixRepr};
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Serialize)]
pub struct Report {
    pub tool: ToolInfo,
    pub instance: InstanceInfo,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fi_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solvability: Option<SolvabilityInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub defects: Option<DefectInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<SolutionRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<ChecksRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<SampleOut>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<CoefficientOut>>,
    pub verdict: &'static str,
    pub failures: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Serialize)]
pub struct InstanceInfo {
    /// SHA-256 of the problem file bytes.
    pub digest: String,
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct SolvabilityInfo {
    pub solvable: bool,
    pub min_eigenvalue: f64,
    pub rank: usize,
}

#[derive(Debug, Serialize)]
pub struct DefectInfo {
    pub mu: usize,
    pub nu: usize,
}

#[derive(Debug, Serialize)]
pub struct SolutionRecord {
    /// "central" or a description of the supplied parameter.
    pub parameter: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct ChecksRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fmi: Option<GridCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fmi_prime: Option<GridCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contractivity: Option<GridCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interpolation_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks_bound: Option<KsBound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extension_vs_lft: Option<f64>,
    pub skipped: Vec<String>,
}

/// Worst margin of a check over an evaluation grid.
#[derive(Debug, Serialize)]
pub struct GridCheck {
    pub nodes: usize,
    /// Most negative FMI eigenvalue, or worst norm excess for
    /// contractivity; sign convention: nonnegative is clean.
    pub worst: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct KsBound {
    /// Worst value of quadrature norm minus D(x,x) over basis vectors.
    pub worst_margin: f64,
    pub regularized_nodes: usize,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct SampleOut {
    pub at: Cplx,
    pub value: MatrixRepr,
}

#[derive(Debug, Serialize)]
pub struct CoefficientOut {
    pub at: Cplx,
    pub s11: MatrixRepr,
    pub s12: MatrixRepr,
    pub s21: MatrixRepr,
    pub s22: MatrixRepr,
}
