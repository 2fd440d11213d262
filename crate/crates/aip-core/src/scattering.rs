//! Scattering functions and the linear-fractional solution map.
//!
//! For a partitioned unitary `U` with internal space `H` and external
//! channels, the scattering function is
//!
//! ```text
//! s(ζ) = P_out U (I - ζ P_H U)^{-1} |_in = D + ζ C (I - ζ A)^{-1} B
//! ```
//!
//! Evaluating the coupling operator gives the coefficient matrix `S(ζ)`
//! whose blocks feed the transform
//!
//! ```text
//! s(ζ) = s12(ζ) + s11(ζ) ε(ζ) [I - s21(ζ) ε(ζ)]^{-1} s22(ζ)
//! ```
//!
//! over Schur-class parameters `ε : M_V -> N_V`; evaluating a concrete
//! unitary extension gives the same function directly, which is the
//! cross-check the test suite leans on.

use crate::colligation::{DefectSpaces, PartitionedUnitary, SchurParameter};
use crate::matrix::{ordered_svd, spectral_norm, CMatrix, CVector, KernelError};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum ScatteringError {
    #[error("evaluation point lies outside the open unit disk (|ζ| = {modulus})")]
    OutsideDisk { modulus: f64 },
    #[error("resolvent solve failed; the operator is not a contraction on its internal space")]
    ResolventSingular,
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error("linear-fractional map near-singular: reciprocal condition {rcond:.3e} below {tol:.3e}")]
    NearSingularLft { rcond: f64, tol: f64 },
    #[error("candidate has no sample within {tol:.3e} of ζ = {at}")]
    NotSampled { at: Complex64, tol: f64 },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

fn check_disk(zeta: Complex64) -> Result<(), ScatteringError> {
    let modulus = zeta.norm();
    if modulus >= 1.0 {
        return Err(ScatteringError::OutsideDisk { modulus });
    }
    Ok(())
}

/// Transfer function `D + ζ C (I - ζ A)^{-1} B` of a state-space block
/// quadruple.
fn transfer(
    a: &CMatrix,
    b: &CMatrix,
    c: &CMatrix,
    d: &CMatrix,
    zeta: Complex64,
) -> Result<CMatrix, ScatteringError> {
    let h = a.nrows();
    if h == 0 {
        return Ok(d.clone());
    }
    let resolvent_arg = CMatrix::identity(h, h) - a * zeta;
    let lu = resolvent_arg.lu();
    let x = lu.solve(b).ok_or(ScatteringError::ResolventSingular)?;
    Ok(d + (c * x) * zeta)
}

/// Scattering function of a partitioned unitary at a point of the disk,
/// restricted to the external channels (padding grounded on input,
/// discarded on output).
pub fn scattering_eval(
    u: &PartitionedUnitary,
    zeta: Complex64,
) -> Result<CMatrix, ScatteringError> {
    check_disk(zeta)?;
    transfer(&u.block_a(), &u.block_b(), &u.block_c(), &u.block_d(), zeta)
}

/// The coefficient matrix split into its four blocks at a disk point.
///
/// Rows are grouped `(L', M_V)`, columns `(L, N_V)`:
/// `s11 : N_V -> L'`, `s12 : L -> L'`, `s21 : N_V -> M_V`, `s22 : L -> M_V`.
#[derive(Debug, Clone)]
pub struct CoefficientBlocks {
    pub s11: CMatrix,
    pub s12: CMatrix,
    pub s21: CMatrix,
    pub s22: CMatrix,
    pub at: Complex64,
}

impl CoefficientBlocks {
    /// Reassemble the full `(q+mu) x (p+nu)` scattering value.
    pub fn full(&self) -> CMatrix {
        let q = self.s12.nrows();
        let mu = self.s22.nrows();
        let p = self.s12.ncols();
        let nu = self.s11.ncols();
        let mut out = CMatrix::zeros(q + mu, p + nu);
        out.view_mut((0, 0), (q, p)).copy_from(&self.s12);
        out.view_mut((0, p), (q, nu)).copy_from(&self.s11);
        out.view_mut((q, 0), (mu, p)).copy_from(&self.s22);
        out.view_mut((q, p), (mu, nu)).copy_from(&self.s21);
        out
    }
}

/// Evaluate the coupling operator and split the result by channel role.
pub fn coefficient_matrix(
    coupling: &PartitionedUnitary,
    ds: &DefectSpaces,
    zeta: Complex64,
) -> Result<CoefficientBlocks, ScatteringError> {
    let (mu, nu) = (ds.mu(), ds.nu());
    if coupling.in_dim() < nu || coupling.out_dim() < mu {
        return Err(ScatteringError::DimensionMismatch {
            expected: format!("coupling with at least {nu} inputs and {mu} outputs"),
            found: format!("{} inputs, {} outputs", coupling.in_dim(), coupling.out_dim()),
        });
    }
    let p = coupling.in_dim() - nu;
    let q = coupling.out_dim() - mu;
    let full = scattering_eval(coupling, zeta)?;
    Ok(CoefficientBlocks {
        s12: full.view((0, 0), (q, p)).into_owned(),
        s11: full.view((0, p), (q, nu)).into_owned(),
        s22: full.view((q, 0), (mu, p)).into_owned(),
        s21: full.view((q, p), (mu, nu)).into_owned(),
        at: zeta,
    })
}

/// Apply the linear-fractional map at a parameter value `ε(ζ)` (nu x mu):
/// `s12 + s11 ε (I - s21 ε)^{-1} s22`.
pub fn lft_apply(
    blocks: &CoefficientBlocks,
    eps_val: &CMatrix,
    inv_tol: f64,
) -> Result<CMatrix, ScatteringError> {
    let mu = blocks.s22.nrows();
    let nu = blocks.s11.ncols();
    if eps_val.nrows() != nu || eps_val.ncols() != mu {
        return Err(ScatteringError::DimensionMismatch {
            expected: format!("{nu}x{mu} parameter value"),
            found: format!("{}x{}", eps_val.nrows(), eps_val.ncols()),
        });
    }
    if mu == 0 || nu == 0 {
        return Ok(blocks.s12.clone());
    }
    let norm = spectral_norm(eps_val);
    if norm > 1.0 + 1e-8 {
        return Err(ScatteringError::Kernel(KernelError::NotContraction { norm }));
    }
    let core = CMatrix::identity(mu, mu) - &blocks.s21 * eps_val;
    let svd = ordered_svd(&core);
    let smax = svd.singular_values.first().copied().unwrap_or(0.0);
    let smin = svd.singular_values.last().copied().unwrap_or(0.0);
    let rcond = if smax > 0.0 { smin / smax } else { 0.0 };
    if rcond < inv_tol {
        return Err(ScatteringError::NearSingularLft {
            rcond,
            tol: inv_tol,
        });
    }
    let inv_s22 = core
        .lu()
        .solve(&blocks.s22)
        .ok_or(ScatteringError::ResolventSingular)?;
    Ok(&blocks.s12 + &blocks.s11 * eps_val * inv_s22)
}

/// Functional-model embedding of an internal vector `h`:
///
/// ```text
/// (Gh)+(ζ) = C (I - ζ A)^{-1} h
/// (Gh)-(ζ) = conj(ζ) B* (I - conj(ζ) A*)^{-1} h
/// ```
///
/// so `(Gh)-` vanishes at the origin.
pub fn model_embedding_eval(
    u: &PartitionedUnitary,
    h: &CVector,
    zeta: Complex64,
) -> Result<(CVector, CVector), ScatteringError> {
    check_disk(zeta)?;
    let dim = u.internal_dim();
    if h.len() != dim {
        return Err(ScatteringError::DimensionMismatch {
            expected: format!("internal vector of length {dim}"),
            found: format!("length {}", h.len()),
        });
    }
    if dim == 0 {
        return Ok((CVector::zeros(u.out_dim()), CVector::zeros(u.in_dim())));
    }
    let a = u.block_a();
    let resolvent = CMatrix::identity(dim, dim) - &a * zeta;
    let x = resolvent
        .lu()
        .solve(h)
        .ok_or(ScatteringError::ResolventSingular)?;
    let plus = u.block_c() * x;
    let resolvent_adj = CMatrix::identity(dim, dim) - a.adjoint() * zeta.conj();
    let y = resolvent_adj
        .lu()
        .solve(h)
        .ok_or(ScatteringError::ResolventSingular)?;
    let minus = (u.block_b().adjoint() * y) * zeta.conj();
    Ok((plus, minus))
}

/// A contractive (not necessarily unitary) state-space realization.
/// Its transfer function is Schur class because the block matrix is a
/// contraction.
#[derive(Debug, Clone)]
pub struct ContractiveRealization {
    a: CMatrix,
    b: CMatrix,
    c: CMatrix,
    d: CMatrix,
}

impl ContractiveRealization {
    pub fn new(
        a: CMatrix,
        b: CMatrix,
        c: CMatrix,
        d: CMatrix,
        eval_tol: f64,
    ) -> Result<Self, ScatteringError> {
        let h = a.nrows();
        if a.ncols() != h || b.nrows() != h || c.ncols() != h {
            return Err(ScatteringError::DimensionMismatch {
                expected: "conformable state-space blocks".into(),
                found: format!(
                    "A {}x{}, B {}x{}, C {}x{}, D {}x{}",
                    a.nrows(),
                    a.ncols(),
                    b.nrows(),
                    b.ncols(),
                    c.nrows(),
                    c.ncols(),
                    d.nrows(),
                    d.ncols()
                ),
            });
        }
        if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(ScatteringError::DimensionMismatch {
                expected: format!("D of size {}x{}", c.nrows(), b.ncols()),
                found: format!("{}x{}", d.nrows(), d.ncols()),
            });
        }
        let mut block = CMatrix::zeros(h + c.nrows(), h + b.ncols());
        block.view_mut((0, 0), (h, h)).copy_from(&a);
        block.view_mut((0, h), (h, b.ncols())).copy_from(&b);
        block.view_mut((h, 0), (c.nrows(), h)).copy_from(&c);
        block
            .view_mut((h, h), (c.nrows(), b.ncols()))
            .copy_from(&d);
        let norm = spectral_norm(&block);
        if norm > 1.0 + eval_tol {
            return Err(ScatteringError::Kernel(KernelError::NotContraction { norm }));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn eval(&self, zeta: Complex64) -> Result<CMatrix, ScatteringError> {
        check_disk(zeta)?;
        transfer(&self.a, &self.b, &self.c, &self.d, zeta)
    }

    pub fn out_dim(&self) -> usize {
        self.c.nrows()
    }
    pub fn in_dim(&self) -> usize {
        self.b.ncols()
    }
}

/// A solution of the interpolation problem in evaluable form.
///
/// Solver output is either a concrete unitary extension or the coupling
/// operator paired with a parameter (the linear-fractional route, which is
/// the canonical one). The remaining variants carry externally supplied
/// candidates for verification.
#[derive(Debug, Clone)]
pub enum SolutionEvaluator {
    Extension(PartitionedUnitary),
    Coefficients {
        coupling: PartitionedUnitary,
        ds: DefectSpaces,
        parameter: SchurParameter,
        inv_tol: f64,
    },
    Constant(CMatrix),
    Realization(ContractiveRealization),
    Samples {
        points: Vec<Complex64>,
        values: Vec<CMatrix>,
        match_tol: f64,
    },
}

impl SolutionEvaluator {
    /// Evaluate `s(ζ)` (q x p) at a point of the open disk.
    pub fn eval(&self, zeta: Complex64) -> Result<CMatrix, ScatteringError> {
        match self {
            SolutionEvaluator::Extension(u) => scattering_eval(u, zeta),
            SolutionEvaluator::Coefficients {
                coupling,
                ds,
                parameter,
                inv_tol,
            } => {
                let blocks = coefficient_matrix(coupling, ds, zeta)?;
                let eps_val = parameter.eval(zeta)?;
                lft_apply(&blocks, &eps_val, *inv_tol)
            }
            SolutionEvaluator::Constant(m) => {
                check_disk(zeta)?;
                Ok(m.clone())
            }
            SolutionEvaluator::Realization(r) => r.eval(zeta),
            SolutionEvaluator::Samples {
                points,
                values,
                match_tol,
            } => {
                check_disk(zeta)?;
                for (z, v) in points.iter().zip(values.iter()) {
                    if (z - zeta).norm() <= *match_tol {
                        return Ok(v.clone());
                    }
                }
                Err(ScatteringError::NotSampled {
                    at: zeta,
                    tol: *match_tol,
                })
            }
        }
    }

    /// Output and input dimensions `(q, p)`.
    pub fn dims(&self) -> (usize, usize) {
        match self {
            SolutionEvaluator::Extension(u) => (u.out_dim(), u.in_dim()),
            SolutionEvaluator::Coefficients { coupling, ds, .. } => (
                coupling.out_dim() - ds.mu(),
                coupling.in_dim() - ds.nu(),
            ),
            SolutionEvaluator::Constant(m) => (m.nrows(), m.ncols()),
            SolutionEvaluator::Realization(r) => (r.out_dim(), r.in_dim()),
            SolutionEvaluator::Samples { values, .. } => values
                .first()
                .map(|v| (v.nrows(), v.ncols()))
                .unwrap_or((0, 0)),
        }
    }
}
