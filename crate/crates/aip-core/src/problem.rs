//! Interpolation data and the fundamental identity.
//!
//! The abstract data is a quintuple `(X, T, D, E, M)` over a
//! finite-dimensional space `X`, with `D` Hermitian PSD and the pieces
//! linked by
//!
//! ```text
//! D(x,y) - D(Tx,Ty) = <Ex,Ey> - <Mx,My>       (fundamental identity)
//! ```
//!
//! Two builders produce such data: the Nevanlinna–Pick builder, where `D`
//! is the block Pick matrix of the nodes, and the Sarason builder, where
//! `X` is the model space of a finite Blaschke product carrying a
//! contraction commuting with the compressed shift.

use crate::matrix::{
    gram_factor, hermitian_deviation, psd_check, spectral_norm, CMatrix, CVector, KernelError,
    PsdReport,
};
use crate::Tolerances;
use num_complex::Complex64;
use thiserror::Error;

/// Two nodes closer than this are treated as coincident.
const POINT_SEPARATION: f64 = 1e-12;

/// Desk-scale guards: the engine targets dense direct methods.
pub const MAX_CARRIER_DIM: usize = 64;
pub const MAX_CHANNEL_DIM: usize = 16;

#[derive(Debug, Clone, Error)]
pub enum ProblemError {
    #[error("interpolation data must contain at least one node")]
    EmptyData,
    #[error("data too large for dense methods: {0}")]
    TooLarge(String),
    #[error("node {index} lies outside the open unit disk (|ζ| = {modulus})")]
    PointOutsideDisk { index: usize, modulus: f64 },
    #[error("nodes {i} and {j} coincide")]
    CoincidentPoints { i: usize, j: usize },
    #[error("value at node {index} is not contractive (norm {norm})")]
    ValueNotContractive { index: usize, norm: f64 },
    #[error("inconsistent dimensions: {0}")]
    Shape(String),
    #[error("Blaschke zeros {i} and {j} coincide")]
    RepeatedZeros { i: usize, j: usize },
    #[error("Blaschke zero {index} lies outside the open unit disk (|a| = {modulus})")]
    ZeroOutsideDisk { index: usize, modulus: f64 },
    #[error("W does not commute with the compressed shift (relative residual {residual:.3e})")]
    NotCommuting { residual: f64 },
    #[error("W is not contractive in the model-space metric (min eigenvalue {min_eigenvalue:.3e})")]
    NotContractiveInMetric { min_eigenvalue: f64 },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Validated abstract interpolation data.
///
/// Immutable after construction; `D` is stored symmetrized. Construction
/// checks shapes, finiteness, and hermiticity but not the fundamental
/// identity itself — that is what [`validate_fi`] reports, so a front end
/// can show the residual instead of refusing to load a file.
#[derive(Debug, Clone)]
pub struct AipData {
    n: usize,
    p: usize,
    q: usize,
    t: CMatrix,
    d: CMatrix,
    e: CMatrix,
    m: CMatrix,
}

impl AipData {
    pub fn new(
        t: CMatrix,
        d: CMatrix,
        e: CMatrix,
        m: CMatrix,
        tol: &Tolerances,
    ) -> Result<Self, ProblemError> {
        let n = t.nrows();
        if t.ncols() != n {
            return Err(ProblemError::Shape(format!(
                "T must be square, got {}x{}",
                t.nrows(),
                t.ncols()
            )));
        }
        if d.nrows() != n || d.ncols() != n {
            return Err(ProblemError::Shape(format!(
                "D must be {n}x{n}, got {}x{}",
                d.nrows(),
                d.ncols()
            )));
        }
        if e.ncols() != n {
            return Err(ProblemError::Shape(format!(
                "E must have {n} columns, got {}",
                e.ncols()
            )));
        }
        if m.ncols() != n {
            return Err(ProblemError::Shape(format!(
                "M must have {n} columns, got {}",
                m.ncols()
            )));
        }
        for (name, mat) in [("T", &t), ("D", &d), ("E", &e), ("M", &m)] {
            if !mat.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Err(ProblemError::Shape(format!("{name} has non-finite entries")));
            }
        }
        if n > MAX_CARRIER_DIM {
            return Err(ProblemError::TooLarge(format!(
                "carrier dimension {n} exceeds {MAX_CARRIER_DIM}"
            )));
        }
        if e.nrows() > MAX_CHANNEL_DIM || m.nrows() > MAX_CHANNEL_DIM {
            return Err(ProblemError::TooLarge(format!(
                "channel dimensions {}x{} exceed {MAX_CHANNEL_DIM}",
                e.nrows(),
                m.nrows()
            )));
        }
        let deviation = hermitian_deviation(&d);
        if deviation > tol.herm_tol {
            return Err(ProblemError::Kernel(KernelError::NotHermitian {
                deviation,
                tol: tol.herm_tol,
            }));
        }
        let d = (&d + d.adjoint()).scale(0.5);
        Ok(Self {
            n,
            p: e.nrows(),
            q: m.nrows(),
            t,
            d,
            e,
            m,
        })
    }

    /// Dimension of the carrier space `X`.
    pub fn n(&self) -> usize {
        self.n
    }
    /// Dimension of the input space `L`.
    pub fn p(&self) -> usize {
        self.p
    }
    /// Dimension of the output space `L'`.
    pub fn q(&self) -> usize {
        self.q
    }
    pub fn t(&self) -> &CMatrix {
        &self.t
    }
    pub fn d(&self) -> &CMatrix {
        &self.d
    }
    pub fn e(&self) -> &CMatrix {
        &self.e
    }
    pub fn m(&self) -> &CMatrix {
        &self.m
    }

    /// Gram factor of `D` at the bundled rank tolerance.
    pub fn gram_factor(&self, tol: &Tolerances) -> Result<CMatrix, KernelError> {
        gram_factor(&self.d, tol.rank_tol)
    }
}

/// Relative residual of the fundamental identity:
/// `|D - T*DT - E*E + M*M|_F / max(1, |D|_F)`.
pub fn validate_fi(data: &AipData) -> f64 {
    let residual = &data.d - data.t.adjoint() * &data.d * &data.t
        - data.e.adjoint() * &data.e
        + data.m.adjoint() * &data.m;
    residual.norm() / data.d.norm().max(1.0)
}

/// Solvability test: `D >= 0` is necessary and sufficient for the
/// underlying interpolation problem to admit solutions.
pub fn solvability(data: &AipData, psd_tol: f64) -> Result<PsdReport, KernelError> {
    psd_check(&data.d, psd_tol)
}

/// Nevanlinna–Pick interpolation data: nodes inside the disk and
/// contractive target values.
#[derive(Debug, Clone)]
pub struct NevanlinnaPickData {
    points: Vec<Complex64>,
    values: Vec<CMatrix>,
    p: usize,
    q: usize,
}

impl NevanlinnaPickData {
    pub fn new(points: Vec<Complex64>, values: Vec<CMatrix>) -> Result<Self, ProblemError> {
        if points.is_empty() {
            return Err(ProblemError::EmptyData);
        }
        if points.len() != values.len() {
            return Err(ProblemError::Shape(format!(
                "{} nodes but {} values",
                points.len(),
                values.len()
            )));
        }
        for (index, z) in points.iter().enumerate() {
            let modulus = z.norm();
            if modulus.is_nan() || modulus >= 1.0 {
                return Err(ProblemError::PointOutsideDisk { index, modulus });
            }
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if (points[i] - points[j]).norm() < POINT_SEPARATION {
                    return Err(ProblemError::CoincidentPoints { i, j });
                }
            }
        }
        let q = values[0].nrows();
        let p = values[0].ncols();
        for (index, v) in values.iter().enumerate() {
            if v.nrows() != q || v.ncols() != p {
                return Err(ProblemError::Shape(format!(
                    "value {index} is {}x{}, expected {q}x{p}",
                    v.nrows(),
                    v.ncols()
                )));
            }
            let norm = spectral_norm(v);
            if norm > 1.0 + 1e-10 {
                return Err(ProblemError::ValueNotContractive { index, norm });
            }
        }
        Ok(Self {
            points,
            values,
            p,
            q,
        })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }
    pub fn values(&self) -> &[CMatrix] {
        &self.values
    }
    pub fn p(&self) -> usize {
        self.p
    }
    pub fn q(&self) -> usize {
        self.q
    }
}

/// Build abstract data from Nevanlinna–Pick nodes.
///
/// `X = L^k` stacked blockwise: `T` is block-diagonal with `ζ_k I`, `E` a
/// row of identities, `M` the row of target values, and `D` the block Pick
/// matrix with `(j,k)` block `(I - s_j* s_k) / (1 - conj(ζ_j) ζ_k)`.
pub fn build_nevanlinna_pick(data: &NevanlinnaPickData) -> Result<AipData, ProblemError> {
    let k = data.points.len();
    let (p, q) = (data.p, data.q);
    let n = k * p;
    let mut t = CMatrix::zeros(n, n);
    let mut e = CMatrix::zeros(p, n);
    let mut m = CMatrix::zeros(q, n);
    for (blk, z) in data.points.iter().enumerate() {
        for i in 0..p {
            t[(blk * p + i, blk * p + i)] = *z;
            e[(i, blk * p + i)] = Complex64::new(1.0, 0.0);
        }
        for r in 0..q {
            for c in 0..p {
                m[(r, blk * p + c)] = data.values[blk][(r, c)];
            }
        }
    }
    // Upper-triangular blocks computed once and mirrored, so the Pick
    // matrix is Hermitian exactly as constructed.
    let mut d = CMatrix::zeros(n, n);
    for j in 0..k {
        for kk in j..k {
            let denom = Complex64::new(1.0, 0.0) - data.points[j].conj() * data.points[kk];
            let block =
                (CMatrix::identity(p, p) - data.values[j].adjoint() * &data.values[kk]) / denom;
            for r in 0..p {
                for c in 0..p {
                    d[(j * p + r, kk * p + c)] = block[(r, c)];
                    if kk != j {
                        d[(kk * p + c, j * p + r)] = block[(r, c)].conj();
                    }
                }
            }
        }
    }
    AipData::new(t, d, e, m, &Tolerances::default())
}

/// The operator the Sarason problem interpolates, either as an explicit
/// matrix in the kernel-coefficient coordinates or as a polynomial in the
/// compressed shift (which commutes by construction).
#[derive(Debug, Clone)]
pub enum SarasonOperator {
    Matrix(CMatrix),
    /// Coefficients `c_0 + c_1 T + c_2 T^2 + ...`.
    PolynomialInShift(Vec<Complex64>),
}

/// Sarason interpolation data: a finite Blaschke product with distinct
/// zeros and a contraction commuting with the compressed shift.
#[derive(Debug, Clone)]
pub struct SarasonData {
    zeros: Vec<Complex64>,
    w: SarasonOperator,
}

impl SarasonData {
    pub fn new(zeros: Vec<Complex64>, w: SarasonOperator) -> Result<Self, ProblemError> {
        if zeros.is_empty() {
            return Err(ProblemError::EmptyData);
        }
        for (index, a) in zeros.iter().enumerate() {
            let modulus = a.norm();
            if modulus.is_nan() || modulus >= 1.0 {
                return Err(ProblemError::ZeroOutsideDisk { index, modulus });
            }
        }
        for i in 0..zeros.len() {
            for j in (i + 1)..zeros.len() {
                if (zeros[i] - zeros[j]).norm() < POINT_SEPARATION {
                    return Err(ProblemError::RepeatedZeros { i, j });
                }
            }
        }
        if let SarasonOperator::Matrix(mat) = &w {
            let n = zeros.len();
            if mat.nrows() != n || mat.ncols() != n {
                return Err(ProblemError::Shape(format!(
                    "W must be {n}x{n}, got {}x{}",
                    mat.nrows(),
                    mat.ncols()
                )));
            }
        }
        Ok(Self { zeros, w })
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn operator(&self) -> &SarasonOperator {
        &self.w
    }

    /// Gram matrix of the Cauchy kernels at the zeros:
    /// `G_ij = 1 / (1 - conj(a_j) a_i)`.
    pub fn gram(&self) -> CMatrix {
        let n = self.zeros.len();
        CMatrix::from_fn(n, n, |i, j| {
            (Complex64::new(1.0, 0.0) - self.zeros[j].conj() * self.zeros[i]).inv()
        })
    }

    /// Compressed shift in the kernel-coefficient coordinates. The adjoint
    /// shift is diagonal with entries `conj(a_i)` on the kernel basis, so
    /// `T = G^{-1} diag(a) G`.
    pub fn shift_matrix(&self) -> CMatrix {
        let g = self.gram();
        let diag = CMatrix::from_diagonal(&CVector::from_vec(self.zeros.clone()));
        let rhs = diag * &g;
        g.lu().solve(&rhs).expect("Gram matrix of distinct zeros is invertible")
    }

    /// The Blaschke product `θ(ζ) = Π (ζ - a_i) / (1 - conj(a_i) ζ)`.
    pub fn theta_at(&self, zeta: Complex64) -> Complex64 {
        self.zeros.iter().fold(Complex64::new(1.0, 0.0), |acc, a| {
            acc * (zeta - a) / (Complex64::new(1.0, 0.0) - a.conj() * zeta)
        })
    }

    /// Values of `e_* = [θ(t) - θ(0)] / t` at the zeros. For every zero
    /// (including a zero at the origin, where the singularity is removable)
    /// the value collapses to `Π_{j≠i} (-a_j)`.
    pub fn e_star_values(&self) -> CVector {
        let n = self.zeros.len();
        CVector::from_fn(n, |i, _| {
            self.zeros
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .fold(Complex64::new(1.0, 0.0), |acc, (_, a)| acc * (-a))
        })
    }

    /// The interpolated operator as a matrix in kernel-coefficient
    /// coordinates.
    pub fn w_matrix(&self) -> CMatrix {
        match &self.w {
            SarasonOperator::Matrix(mat) => mat.clone(),
            SarasonOperator::PolynomialInShift(coeffs) => {
                let n = self.zeros.len();
                let t = self.shift_matrix();
                let mut acc = CMatrix::zeros(n, n);
                for c in coeffs.iter().rev() {
                    acc *= &t;
                    for i in 0..n {
                        acc[(i, i)] += c;
                    }
                }
                acc
            }
        }
    }
}

/// Build abstract data from Sarason data.
///
/// `X` is the model space of the Blaschke product in kernel-coefficient
/// coordinates with Gram matrix `G`; adjoints below are `G`-adjoints. With
/// `e` the coefficient vector of `e_*`, the pieces are `E = e^H G` (which
/// collapses to the conjugated values of `e_*` at the zeros), `M = E W`,
/// and `D = G - W^H G W`.
pub fn build_sarason(data: &SarasonData, tol: &Tolerances) -> Result<AipData, ProblemError> {
    let n = data.zeros().len();
    let g = data.gram();
    let t = data.shift_matrix();
    let w = data.w_matrix();
    if w.nrows() != n || w.ncols() != n {
        return Err(ProblemError::Shape(format!(
            "W must be {n}x{n}, got {}x{}",
            w.nrows(),
            w.ncols()
        )));
    }

    let commutator = (&w * &t) - (&t * &w);
    let scale = (w.norm() * t.norm()).max(1.0);
    let comm_residual = commutator.norm() / scale;
    if comm_residual > tol.comm_tol {
        return Err(ProblemError::NotCommuting {
            residual: comm_residual,
        });
    }

    let d = &g - w.adjoint() * &g * &w;
    let d = (&d + d.adjoint()).scale(0.5);
    let report = psd_check(&d, tol.psd_tol)?;
    if !report.is_psd {
        return Err(ProblemError::NotContractiveInMetric {
            min_eigenvalue: report.min_eigenvalue,
        });
    }

    // E = e^H G = v^H where v are the e_* values at the zeros, because the
    // coefficient vector is e = G^{-1} v.
    let v = data.e_star_values();
    let e = CMatrix::from_fn(1, n, |_, j| v[j].conj());
    let m = &e * &w;

    AipData::new(t, d, e, m, tol)
}
