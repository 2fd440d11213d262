//! Dense complex linear algebra kernel.
//!
//! Everything downstream reduces to a handful of primitives on Hermitian
//! matrices and contractions: PSD classification, Gram factorization,
//! pseudo-square-root solves (`g = A^[-1/2] h` restricted to the range),
//! and the defect quadratic `<[[I,s],[s*,I]]^[-1] f, f>` evaluated through
//! its two equivalent expansions. All decompositions go through a
//! deterministic Hermitian eigendecomposition rather than Cholesky because
//! the forms arriving here are routinely rank-deficient.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Default relative eigenvalue cutoff for rank decisions when an operation
/// does not receive an explicit one.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Default relative Hermitian-deviation bound.
pub const DEFAULT_HERM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum KernelError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian: relative deviation {deviation:.3e} exceeds {tol:.3e}")]
    NotHermitian { deviation: f64, tol: f64 },
    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPsd { min_eigenvalue: f64 },
    #[error(
        "vector is outside the range of the square root: relative residual {residual:.3e} exceeds {tol:.3e}"
    )]
    OutOfRange { residual: f64, tol: f64 },
    #[error("quadratic expansions disagree: {left:.6e} vs {right:.6e}")]
    ExpansionMismatch { left: f64, right: f64 },
    #[error("operator is not a contraction: norm {norm}")]
    NotContraction { norm: f64 },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: String, found: String },
}

/// Outcome of a positive-semidefiniteness test.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdReport {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    /// Number of eigenvalues above the rank cutoff.
    pub rank: usize,
}

/// Eigendecomposition of a Hermitian matrix with a fixed ordering and
/// phase convention, so identical inputs give bit-identical output.
///
/// Eigenvalues are sorted descending, ties broken by the original solver
/// index; each eigenvector is rotated so its largest-modulus entry is
/// positive real.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    /// Matching eigenvectors as columns.
    pub vectors: CMatrix,
}

fn all_finite(a: &CMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Rotate a column so its largest-modulus entry becomes positive real.
fn normalize_column_phase(col: &mut nalgebra::DVectorViewMut<Complex64>) {
    let mut best = 0usize;
    let mut best_mod = 0.0f64;
    for (i, z) in col.iter().enumerate() {
        let m = z.norm_sqr();
        if m > best_mod {
            best_mod = m;
            best = i;
        }
    }
    if best_mod == 0.0 {
        return;
    }
    let z = col[best];
    let phase = z / z.norm();
    let rot = phase.conj();
    for entry in col.iter_mut() {
        *entry *= rot;
    }
}

/// Hermitian eigendecomposition with deterministic ordering and phases.
/// The input is symmetrized first; use [`hermitian_deviation`] to decide
/// whether symmetrization is legitimate.
pub fn hermitian_eigen(a: &CMatrix) -> HermitianEigen {
    let n = a.nrows();
    if n == 0 {
        return HermitianEigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let sym = (a + a.adjoint()).scale(0.5);
    let se = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        se.eigenvalues[j]
            .partial_cmp(&se.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).copy_from(&se.eigenvectors.column(src));
        normalize_column_phase(&mut vectors.column_mut(dst));
    }
    HermitianEigen { values, vectors }
}

/// Relative Frobenius deviation of `a` from its Hermitian part.
pub fn hermitian_deviation(a: &CMatrix) -> f64 {
    let scale = a.norm().max(1.0);
    (a - a.adjoint()).norm() / scale
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(a: &CMatrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |acc, &s| acc.max(s))
}

fn require_square_hermitian(a: &CMatrix, herm_tol: f64) -> Result<(), KernelError> {
    if a.nrows() != a.ncols() {
        return Err(KernelError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if !all_finite(a) {
        return Err(KernelError::NonFinite);
    }
    let deviation = hermitian_deviation(a);
    if deviation > herm_tol {
        return Err(KernelError::NotHermitian {
            deviation,
            tol: herm_tol,
        });
    }
    Ok(())
}

/// Classify a Hermitian matrix as positive semidefinite.
///
/// `is_psd` holds when the minimal eigenvalue is at least
/// `-psd_tol * max(spectral scale, 1)`; eigenvalues inside that band count
/// as zero, so boundary-degenerate matrices classify as PSD with reduced
/// rank.
pub fn psd_check(a: &CMatrix, psd_tol: f64) -> Result<PsdReport, KernelError> {
    require_square_hermitian(a, DEFAULT_HERM_TOL)?;
    if a.nrows() == 0 {
        return Ok(PsdReport {
            is_psd: true,
            min_eigenvalue: 0.0,
            rank: 0,
        });
    }
    let eig = hermitian_eigen(a);
    let min_eigenvalue = *eig.values.last().expect("nonempty");
    let max_eigenvalue = eig.values[0];
    let scale = eig
        .values
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()))
        .max(1.0);
    let is_psd = min_eigenvalue >= -psd_tol * scale;
    let rank_cutoff = psd_tol * max_eigenvalue.max(0.0).max(1.0);
    let rank = eig.values.iter().filter(|&&v| v > rank_cutoff).count();
    Ok(PsdReport {
        is_psd,
        min_eigenvalue,
        rank,
    })
}

/// Gram factor of a Hermitian PSD matrix: a full-row-rank `F` (r x n) with
/// `F* F = D`, rows forming an orthonormal coordinate system for the range,
/// so `<F x1, F x2> = D(x1, x2)`.
pub fn gram_factor(d: &CMatrix, rank_tol: f64) -> Result<CMatrix, KernelError> {
    require_square_hermitian(d, DEFAULT_HERM_TOL)?;
    let n = d.nrows();
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let eig = hermitian_eigen(d);
    let max_eigenvalue = eig.values[0];
    let scale = eig
        .values
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()))
        .max(1.0);
    let min_eigenvalue = *eig.values.last().expect("nonempty");
    if min_eigenvalue < -rank_tol * scale {
        return Err(KernelError::NotPsd {
            min_eigenvalue,
        });
    }
    let cutoff = rank_tol * max_eigenvalue.max(0.0).max(1.0);
    let r = eig.values.iter().filter(|&&v| v > cutoff).count();
    let mut f = CMatrix::zeros(r, n);
    for i in 0..r {
        let s = eig.values[i].sqrt();
        let u = eig.vectors.column(i);
        for j in 0..n {
            f[(i, j)] = u[j].conj() * s;
        }
    }
    Ok(f)
}

/// Hermitian PSD square root with rank truncation.
pub fn psd_sqrt(a: &CMatrix, rank_tol: f64) -> Result<CMatrix, KernelError> {
    require_square_hermitian(a, DEFAULT_HERM_TOL)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let eig = hermitian_eigen(a);
    let max_eigenvalue = eig.values[0];
    let scale = eig
        .values
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()))
        .max(1.0);
    let min_eigenvalue = *eig.values.last().expect("nonempty");
    if min_eigenvalue < -rank_tol * scale {
        return Err(KernelError::NotPsd { min_eigenvalue });
    }
    let cutoff = rank_tol * max_eigenvalue.max(0.0).max(1.0);
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        if eig.values[i] <= cutoff {
            continue;
        }
        let s = Complex64::new(eig.values[i].sqrt(), 0.0);
        let u = eig.vectors.column(i);
        for p in 0..n {
            for q in 0..n {
                out[(p, q)] += u[p] * s * u[q].conj();
            }
        }
    }
    Ok(out)
}

/// Detailed result of a pseudo-square-root solve.
#[derive(Debug, Clone)]
pub struct PseudoSolve {
    /// The unique minimal-norm `g` supported on the range of `A`.
    pub solution: CVector,
    /// `|sqrt(A) g - h| / max(|h|, tiny)`.
    pub relative_residual: f64,
    /// Eigenvalues treated as zero by the rank cutoff.
    pub truncated_dims: usize,
}

/// Pseudo-square-root solve without a residual gate.
///
/// Returns `g` orthogonal to the kernel of `A` minimizing `|sqrt(A) g - h0|`,
/// along with the residual so the caller can decide whether `h0` genuinely
/// lies in the range of `sqrt(A)`.
pub fn pseudo_sqrt_solve_unchecked(
    a: &CMatrix,
    h0: &CVector,
    rank_tol: f64,
) -> Result<PseudoSolve, KernelError> {
    require_square_hermitian(a, DEFAULT_HERM_TOL)?;
    let n = a.nrows();
    if h0.len() != n {
        return Err(KernelError::DimensionMismatch {
            expected: format!("vector of length {n}"),
            found: format!("length {}", h0.len()),
        });
    }
    if n == 0 {
        return Ok(PseudoSolve {
            solution: CVector::zeros(0),
            relative_residual: 0.0,
            truncated_dims: 0,
        });
    }
    let eig = hermitian_eigen(a);
    let max_eigenvalue = eig.values[0];
    let scale = eig
        .values
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()))
        .max(1.0);
    let min_eigenvalue = *eig.values.last().expect("nonempty");
    if min_eigenvalue < -rank_tol * scale {
        return Err(KernelError::NotPsd { min_eigenvalue });
    }
    let cutoff = rank_tol * max_eigenvalue.max(0.0).max(1.0);
    let mut g = CVector::zeros(n);
    let mut projected = CVector::zeros(n);
    let mut truncated_dims = 0usize;
    for i in 0..n {
        let u = eig.vectors.column(i);
        if eig.values[i] <= cutoff {
            truncated_dims += 1;
            continue;
        }
        // coefficient of h0 along u
        let c: Complex64 = u.iter().zip(h0.iter()).map(|(ui, hi)| ui.conj() * hi).sum();
        let s = eig.values[i].sqrt();
        for j in 0..n {
            g[j] += u[j] * (c / s);
            projected[j] += u[j] * c;
        }
    }
    let h_norm = h0.norm();
    let relative_residual = if h_norm == 0.0 {
        0.0
    } else {
        (projected - h0).norm() / h_norm
    };
    Ok(PseudoSolve {
        solution: g,
        relative_residual,
        truncated_dims,
    })
}

/// Solve `sqrt(A) g = h0` for the unique `g` orthogonal to the kernel of
/// `A`, failing when `h0` is not in the range of `sqrt(A)` within `res_tol`.
pub fn pseudo_sqrt_solve(
    a: &CMatrix,
    h0: &CVector,
    res_tol: f64,
) -> Result<CVector, KernelError> {
    let solve = pseudo_sqrt_solve_unchecked(a, h0, DEFAULT_RANK_TOL)?;
    if solve.relative_residual > res_tol {
        return Err(KernelError::OutOfRange {
            residual: solve.relative_residual,
            tol: res_tol,
        });
    }
    Ok(solve.solution)
}

/// Detailed defect quadratic evaluation.
#[derive(Debug, Clone)]
pub struct DefectQuadratic {
    /// Value from the `(I - s*s)` expansion.
    pub value: f64,
    /// Value from the `(I - s s*)` expansion.
    pub alternate: f64,
    /// Worst pseudo-solve residual across both expansions.
    pub max_residual: f64,
    /// Whether the rank cutoff truncated any direction carrying the data.
    pub floor_active: bool,
}

/// Evaluate `<[[I,s],[s*,I]]^[-1] (l' ⊕ l), (l' ⊕ l)>` through both
/// equivalent expansions without gating on residuals. Used by quadrature,
/// which wants a value plus diagnostics at every node.
pub fn defect_quadratic_unchecked(
    s: &CMatrix,
    l_prime: &CVector,
    l: &CVector,
    rank_tol: f64,
    res_tol: f64,
) -> Result<DefectQuadratic, KernelError> {
    let (q, p) = (s.nrows(), s.ncols());
    if l_prime.len() != q || l.len() != p {
        return Err(KernelError::DimensionMismatch {
            expected: format!("l' of length {q}, l of length {p}"),
            found: format!("l' of length {}, l of length {}", l_prime.len(), l.len()),
        });
    }
    let norm = spectral_norm(s);
    if norm > 1.0 + res_tol {
        return Err(KernelError::NotContraction { norm });
    }
    // Expansion via I - s*s: |l'|^2 + <(I-s*s)^[-1](l - s*l'), l - s*l'>
    let defect_p = CMatrix::identity(p, p) - s.adjoint() * s;
    let rhs_p = l - s.adjoint() * l_prime;
    let solve_p = pseudo_sqrt_solve_unchecked(&defect_p, &rhs_p, rank_tol)?;
    let value = l_prime.norm_squared() + solve_p.solution.norm_squared();

    // Expansion via I - s s*: |l|^2 + <(I-ss*)^[-1](l' - s l), l' - s l>
    let defect_q = CMatrix::identity(q, q) - s * s.adjoint();
    let rhs_q = l_prime - s * l;
    let solve_q = pseudo_sqrt_solve_unchecked(&defect_q, &rhs_q, rank_tol)?;
    let alternate = l.norm_squared() + solve_q.solution.norm_squared();

    Ok(DefectQuadratic {
        value,
        alternate,
        max_residual: solve_p.relative_residual.max(solve_q.relative_residual),
        floor_active: (solve_p.truncated_dims > 0 && solve_p.relative_residual > 0.0)
            || (solve_q.truncated_dims > 0 && solve_q.relative_residual > 0.0),
    })
}

/// Defect quadratic with domain and cross-expansion gating.
///
/// Fails when `l' ⊕ l` is outside the domain of the inverted block defect
/// (pseudo-solve residual beyond `res_tol`) or when the two expansions
/// disagree beyond `res_tol`.
pub fn defect_quadratic(
    s: &CMatrix,
    l_prime: &CVector,
    l: &CVector,
    res_tol: f64,
) -> Result<f64, KernelError> {
    let dq = defect_quadratic_unchecked(s, l_prime, l, DEFAULT_RANK_TOL, res_tol)?;
    if dq.max_residual > res_tol {
        return Err(KernelError::OutOfRange {
            residual: dq.max_residual,
            tol: res_tol,
        });
    }
    let scale = dq.value.abs().max(dq.alternate.abs()).max(1.0);
    if (dq.value - dq.alternate).abs() > res_tol * scale {
        return Err(KernelError::ExpansionMismatch {
            left: dq.value,
            right: dq.alternate,
        });
    }
    Ok(dq.value)
}

/// Singular value decomposition with deterministic ordering and phases.
///
/// Columns of `u` and `v` are paired; singular values descend, ties keep
/// the solver order, and each `u` column carries the positive-real-entry
/// phase convention (the matching `v` column is counter-rotated so
/// `u Σ v*` still reproduces the input).
#[derive(Debug, Clone)]
pub struct OrderedSvd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

pub fn ordered_svd(a: &CMatrix) -> OrderedSvd {
    let (m, n) = (a.nrows(), a.ncols());
    let k = m.min(n);
    if k == 0 {
        return OrderedSvd {
            u: CMatrix::zeros(m, 0),
            singular_values: Vec::new(),
            v: CMatrix::zeros(n, 0),
        };
    }
    let svd = a.clone().svd(true, true);
    let u_raw = svd.u.expect("svd with u");
    let vt_raw = svd.v_t.expect("svd with v_t");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut u = CMatrix::zeros(m, k);
    let mut v = CMatrix::zeros(n, k);
    for (dst, &src) in order.iter().enumerate() {
        u.column_mut(dst).copy_from(&u_raw.column(src));
        for j in 0..n {
            v[(j, dst)] = vt_raw[(src, j)].conj();
        }
        // Shared phase rotation keeps u sigma v* intact.
        let mut best = 0usize;
        let mut best_mod = 0.0f64;
        for (i, z) in u.column(dst).iter().enumerate() {
            let mnorm = z.norm_sqr();
            if mnorm > best_mod {
                best_mod = mnorm;
                best = i;
            }
        }
        if best_mod > 0.0 {
            let z = u[(best, dst)];
            let rot = (z / z.norm()).conj();
            for entry in u.column_mut(dst).iter_mut() {
                *entry *= rot;
            }
            for entry in v.column_mut(dst).iter_mut() {
                *entry *= rot;
            }
        }
    }
    OrderedSvd {
        u,
        singular_values,
        v,
    }
}

/// Numerical rank from an ordered singular value list.
pub fn svd_rank(singular_values: &[f64], rank_tol: f64) -> usize {
    let scale = singular_values.first().copied().unwrap_or(0.0).max(1.0);
    singular_values
        .iter()
        .filter(|&&s| s > rank_tol * scale)
        .count()
}

/// Deterministic orthonormal basis of the orthogonal complement of the
/// column span of `basis` inside the ambient space of its rows.
///
/// `basis` must have orthonormal columns. The complement comes from the
/// eigendecomposition of the complementary projector, inheriting the
/// kernel-wide ordering and phase conventions.
pub fn orthonormal_complement(basis: &CMatrix) -> CMatrix {
    let m = basis.nrows();
    let k = basis.ncols();
    debug_assert!(k <= m);
    let want = m - k;
    if want == 0 {
        return CMatrix::zeros(m, 0);
    }
    if k == 0 {
        return CMatrix::identity(m, m);
    }
    let projector = CMatrix::identity(m, m) - basis * basis.adjoint();
    let eig = hermitian_eigen(&projector);
    let mut out = CMatrix::zeros(m, want);
    for i in 0..want {
        debug_assert!(eig.values[i] > 0.5, "complement eigenvalue {}", eig.values[i]);
        out.column_mut(i).copy_from(&eig.vectors.column(i));
    }
    out
}

/// Random unitary matrix (QR of a complex Gaussian sample, phases fixed by
/// the sign of the R diagonal). Deterministic for a fixed RNG stream.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let g = CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(standard_normal(rng), standard_normal(rng))
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut out = q;
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let rot = d / d.norm();
            for entry in out.column_mut(j).iter_mut() {
                *entry *= rot;
            }
        }
    }
    out
}

/// Standard normal sample via Box-Muller.
fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Random contraction with spectral norm at most `max_norm`.
pub fn random_contraction<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    max_norm: f64,
    rng: &mut R,
) -> CMatrix {
    let g = CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(standard_normal(rng), standard_normal(rng))
    });
    let norm = spectral_norm(&g);
    if norm == 0.0 {
        return g;
    }
    g.scale(max_norm / norm.max(max_norm))
}
