//! Numerical engine for matrix-valued Schur-class interpolation problems.
//!
//! The crate solves Nevanlinna–Pick and Sarason interpolation problems by
//! reducing them to a common abstract form: a quintuple `(X, T, D, E, M)`
//! linked by the fundamental identity
//!
//! ```text
//! D(x,y) - D(Tx,Ty) = <Ex,Ey> - <Mx,My>
//! ```
//!
//! From validated data the engine builds an isometric colligation `V`,
//! computes its defect spaces, and evaluates the coefficient matrix `S(ζ)`
//! whose linear-fractional transform over Schur-class parameters describes
//! every solution (the Arov–Grossman parametrization). An independent
//! verification layer checks candidate solutions against Potapov's
//! fundamental matrix inequality, the interpolation conditions, and
//! model-space norm bounds.
//!
//! Module map:
//! - [`matrix`]: dense complex linear algebra (PSD tests, Gram factors,
//!   pseudo-square-root solves, defect quadratics).
//! - [`problem`]: interpolation data and the fundamental identity.
//! - [`colligation`]: the isometry `V`, defect spaces, coupling operator,
//!   unitary extensions, and Schur parameters.
//! - [`scattering`]: scattering functions, coefficient blocks, the
//!   linear-fractional solution map, and the functional-model embedding.
//! - [`verification`]: FMI checks, the `F_s` transform, quadrature norms,
//!   and interpolation-condition residuals.

pub mod colligation;
pub mod matrix;
pub mod problem;
pub mod scattering;
pub mod verification;

pub use matrix::{CMatrix, CVector};

/// Tolerance bundle shared across the pipeline.
///
/// All comparisons in the crate trace back to one of these named values,
/// so a report that records the bundle pins down every verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Relative Hermitian-deviation bound before symmetrization is refused.
    pub herm_tol: f64,
    /// Relative Frobenius bound on Gram factorization residuals.
    pub fact_tol: f64,
    /// Relative eigenvalue floor for positive-semidefinite classification.
    pub psd_tol: f64,
    /// Relative eigenvalue cutoff for numerical rank decisions.
    pub rank_tol: f64,
    /// Residual bound for pseudo-square-root solves and quadratic expansions.
    pub res_tol: f64,
    /// Relative bound on the fundamental identity residual.
    pub fi_tol: f64,
    /// Commutation residual bound for Sarason operators.
    pub comm_tol: f64,
    /// Unitarity deviation bound for assembled operators.
    pub unit_tol: f64,
    /// Residual bound for isometry action and extension agreement.
    pub map_tol: f64,
    /// Slack allowed on contractivity of evaluated solutions.
    pub eval_tol: f64,
    /// Reciprocal condition-number floor for linear-fractional inversions.
    pub inv_tol: f64,
    /// Proximity bound to the spectrum of `T` for resolvent evaluations.
    pub spec_tol: f64,
    /// Bound for the Herglotz diagnostic (real-part positivity, dual gap).
    pub herg_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm_tol: 1e-10,
            fact_tol: 1e-10,
            psd_tol: 1e-10,
            rank_tol: 1e-10,
            res_tol: 1e-8,
            fi_tol: 1e-10,
            comm_tol: 1e-8,
            unit_tol: 1e-8,
            map_tol: 1e-8,
            eval_tol: 1e-8,
            inv_tol: 1e-10,
            spec_tol: 1e-8,
            herg_tol: 1e-8,
        }
    }
}

impl Tolerances {
    /// Set a tolerance by its field name. Used by CLI overrides.
    pub fn set_by_name(&mut self, name: &str, value: f64) -> Result<(), String> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(format!("tolerance {name} must be finite and nonnegative"));
        }
        match name {
            "herm_tol" => self.herm_tol = value,
            "fact_tol" => self.fact_tol = value,
            "psd_tol" => self.psd_tol = value,
            "rank_tol" => self.rank_tol = value,
            "res_tol" => self.res_tol = value,
            "fi_tol" => self.fi_tol = value,
            "comm_tol" => self.comm_tol = value,
            "unit_tol" => self.unit_tol = value,
            "map_tol" => self.map_tol = value,
            "eval_tol" => self.eval_tol = value,
            "inv_tol" => self.inv_tol = value,
            "spec_tol" => self.spec_tol = value,
            "herg_tol" => self.herg_tol = value,
            _ => return Err(format!("unknown tolerance name: {name}")),
        }
        Ok(())
    }

    /// Names and current values, in a fixed order. Used by reports.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("herm_tol", self.herm_tol),
            ("fact_tol", self.fact_tol),
            ("psd_tol", self.psd_tol),
            ("rank_tol", self.rank_tol),
            ("res_tol", self.res_tol),
            ("fi_tol", self.fi_tol),
            ("comm_tol", self.comm_tol),
            ("unit_tol", self.unit_tol),
            ("map_tol", self.map_tol),
            ("eval_tol", self.eval_tol),
            ("inv_tol", self.inv_tol),
            ("spec_tol", self.spec_tol),
            ("herg_tol", self.herg_tol),
        ]
    }
}
