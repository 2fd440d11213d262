//! Independent verification of candidate solutions.
//!
//! Nothing here reuses the solver's construction: the checks are assembled
//! straight from the data and the candidate evaluator, so they can catch
//! bugs anywhere in the pipeline.
//!
//! - `fmi_check` / `fmi_prime_check`: pointwise positivity of the
//!   fundamental matrix inequality in its two equivalent forms.
//! - `f_transform_eval`: the transform `F_s x` into the model space of
//!   pairs, with its resolvent formulas.
//! - `identity18_residual`: the boundary recurrence tying `F_s T` to
//!   multiplication by the boundary variable.
//! - `ks_norm_quadrature`: circle quadrature of the defect-inverse
//!   quadratic, whose supremum over radii is the model-space norm.
//! - `herglotz_diagnostic`: the positive-real-part functional and its dual
//!   representation.
//! - `interpolation_check`: raw interpolation-condition residuals.

use crate::matrix::{
    defect_quadratic_unchecked, ordered_svd, psd_check, psd_sqrt, spectral_norm, CMatrix,
    CVector, KernelError, PsdReport,
};
use crate::problem::{AipData, NevanlinnaPickData, SarasonData};
use crate::scattering::{ScatteringError, SolutionEvaluator};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum VerificationError {
    #[error("evaluation point lies outside the open unit disk (|ζ| = {modulus})")]
    OutsideDisk { modulus: f64 },
    #[error("ζ = {at} is within {sigma_min:.3e} of the spectrum of T")]
    SpectrumProximity { at: Complex64, sigma_min: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid quadrature specification: {0}")]
    InvalidQuadrature(String),
    #[error("dual representations disagree: gap {gap:.3e} exceeds {tol:.3e}")]
    DualFormMismatch { gap: f64, tol: f64 },
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

fn check_disk(zeta: Complex64) -> Result<(), VerificationError> {
    let modulus = zeta.norm();
    if modulus >= 1.0 {
        return Err(VerificationError::OutsideDisk { modulus });
    }
    Ok(())
}

fn check_dims(data: &AipData, s_eval: &SolutionEvaluator) -> Result<(), VerificationError> {
    let (q, p) = s_eval.dims();
    if q != data.q() || p != data.p() {
        return Err(VerificationError::Shape(format!(
            "candidate maps {p} -> {q}, data expects {} -> {}",
            data.p(),
            data.q()
        )));
    }
    Ok(())
}

/// Fundamental matrix inequality at a fixed disk point: positivity of
///
/// ```text
/// [ (I - ζ̄T)* D (I - ζ̄T)    (E - s(ζ)*M)*          ]
/// [ (E - s(ζ)*M)             (I - s(ζ)*s(ζ))/(1-|ζ|²) ]
/// ```
///
/// quantified over all of `X ⊕ L`.
pub fn fmi_check(
    data: &AipData,
    s_eval: &SolutionEvaluator,
    zeta: Complex64,
    psd_tol: f64,
) -> Result<PsdReport, VerificationError> {
    check_disk(zeta)?;
    check_dims(data, s_eval)?;
    let (n, p) = (data.n(), data.p());
    let s = s_eval.eval(zeta)?;
    let shifted = CMatrix::identity(n, n) - data.t() * zeta.conj();
    let a11 = shifted.adjoint() * data.d() * &shifted;
    let g21 = data.e() - s.adjoint() * data.m();
    let a22 = (CMatrix::identity(p, p) - s.adjoint() * &s) / Complex64::new(1.0 - zeta.norm_sqr(), 0.0);
    let mut block = CMatrix::zeros(n + p, n + p);
    block.view_mut((0, 0), (n, n)).copy_from(&a11);
    block.view_mut((n, 0), (p, n)).copy_from(&g21);
    block.view_mut((0, n), (n, p)).copy_from(&g21.adjoint());
    block.view_mut((n, n), (p, p)).copy_from(&a22);
    Ok(psd_check(&block, psd_tol)?)
}

/// The mirrored form of the inequality, quantified over `X ⊕ L'`:
///
/// ```text
/// [ (ζI - T)* D (ζI - T)    (s(ζ)E - M)*           ]
/// [ (s(ζ)E - M)             (I - s(ζ)s(ζ)*)/(1-|ζ|²) ]
/// ```
///
/// Equivalent to `fmi_check` whenever the data satisfies the fundamental
/// identity; the equivalence is exercised as a property.
pub fn fmi_prime_check(
    data: &AipData,
    s_eval: &SolutionEvaluator,
    zeta: Complex64,
    psd_tol: f64,
) -> Result<PsdReport, VerificationError> {
    check_disk(zeta)?;
    check_dims(data, s_eval)?;
    let (n, q) = (data.n(), data.q());
    let s = s_eval.eval(zeta)?;
    let shifted = CMatrix::identity(n, n) * zeta - data.t();
    let a11 = shifted.adjoint() * data.d() * &shifted;
    let g21 = &s * data.e() - data.m();
    let a22 = (CMatrix::identity(q, q) - &s * s.adjoint()) / Complex64::new(1.0 - zeta.norm_sqr(), 0.0);
    let mut block = CMatrix::zeros(n + q, n + q);
    block.view_mut((0, 0), (n, n)).copy_from(&a11);
    block.view_mut((n, 0), (q, n)).copy_from(&g21);
    block.view_mut((0, n), (n, q)).copy_from(&g21.adjoint());
    block.view_mut((n, n), (q, q)).copy_from(&a22);
    Ok(psd_check(&block, psd_tol)?)
}

/// Value of the transform `F_s x` at a disk point.
#[derive(Debug, Clone)]
pub struct FsValue {
    /// `(F_s x)+(ζ) = (s(ζ)E - M)(ζI - T)^{-1} x`, a vector in `L'`.
    pub plus: CVector,
    /// `(F_s x)-(ζ) = ζ̄ (E - s(ζ)*M)(I - ζ̄T)^{-1} x`, a vector in `L`.
    pub minus: CVector,
    pub at: Complex64,
}

fn resolvent_solve(
    mat: &CMatrix,
    x: &CVector,
    at: Complex64,
    spec_tol: f64,
) -> Result<CVector, VerificationError> {
    let svd = ordered_svd(mat);
    let sigma_min = svd.singular_values.last().copied().unwrap_or(0.0);
    if sigma_min < spec_tol {
        return Err(VerificationError::SpectrumProximity { at, sigma_min });
    }
    mat.clone()
        .lu()
        .solve(x)
        .ok_or(VerificationError::SpectrumProximity {
            at,
            sigma_min: 0.0,
        })
}

/// Evaluate `F_s x` at `ζ`. Points within `spec_tol` of the spectrum of
/// `T` (or of the reflected spectrum for the minus component) are
/// rejected so the caller can pick another node.
pub fn f_transform_eval(
    data: &AipData,
    s_eval: &SolutionEvaluator,
    x: &CVector,
    zeta: Complex64,
    spec_tol: f64,
) -> Result<FsValue, VerificationError> {
    check_disk(zeta)?;
    check_dims(data, s_eval)?;
    let n = data.n();
    if x.len() != n {
        return Err(VerificationError::Shape(format!(
            "x has length {}, expected {n}",
            x.len()
        )));
    }
    let s = s_eval.eval(zeta)?;
    let forward = CMatrix::identity(n, n) * zeta - data.t();
    let y = resolvent_solve(&forward, x, zeta, spec_tol)?;
    let plus = &s * (data.e() * &y) - data.m() * &y;
    let backward = CMatrix::identity(n, n) - data.t() * zeta.conj();
    let z = resolvent_solve(&backward, x, zeta, spec_tol)?;
    let minus = ((data.e() * &z) - s.adjoint() * (data.m() * &z)) * zeta.conj();
    Ok(FsValue {
        plus,
        minus,
        at: zeta,
    })
}

/// Residual of the boundary recurrence
///
/// ```text
/// (F_s Tx)(t) = t (F_s x)(t) - [[I, s(t)], [s*(t), I]] (-Mx ⊕ Ex)
/// ```
///
/// evaluated at an interior point `|t| = r < 1`. The recurrence holds on
/// the boundary; at interior points the minus component carries the exact
/// correction `(1/t̄ - t)(F_s x)-(t)`, which is `O(1-r)` for model-space
/// members. `residual` is the raw recurrence defect, `interior_bias` the
/// norm of that correction, and `corrected` the defect with the correction
/// removed.
#[derive(Debug, Clone)]
pub struct Identity18 {
    pub residual: f64,
    pub interior_bias: f64,
    pub corrected: f64,
}

pub fn identity18_residual(
    data: &AipData,
    s_eval: &SolutionEvaluator,
    x: &CVector,
    t: Complex64,
    spec_tol: f64,
) -> Result<Identity18, VerificationError> {
    let fx = f_transform_eval(data, s_eval, x, t, spec_tol)?;
    let tx = data.t() * x;
    let ftx = f_transform_eval(data, s_eval, &tx, t, spec_tol)?;
    let s = s_eval.eval(t)?;
    let mx = data.m() * x;
    let ex = data.e() * x;
    // [[I, s],[s*, I]] (-Mx ⊕ Ex)
    let corr_plus = -&mx + &s * &ex;
    let corr_minus = s.adjoint() * (-&mx) + &ex;

    let res_plus = &ftx.plus - &fx.plus * t + corr_plus;
    let res_minus = &ftx.minus - &fx.minus * t + corr_minus;
    let residual = (res_plus.norm_squared() + res_minus.norm_squared()).sqrt();

    let bias_factor = t.conj().inv() - t;
    let bias_vec = &fx.minus * bias_factor;
    let interior_bias = bias_vec.norm();
    let corrected_minus = res_minus - bias_vec;
    let corrected = (res_plus.norm_squared() + corrected_minus.norm_squared()).sqrt();

    Ok(Identity18 {
        residual,
        interior_bias,
        corrected,
    })
}

/// Circle quadrature specification for model-space norms.
#[derive(Debug, Clone)]
pub struct QuadratureSpec {
    /// Strictly increasing radii in (0, 1).
    pub radii: Vec<f64>,
    pub nodes_per_circle: usize,
    /// Eigenvalue floor for the regularized defect pseudo-inverse.
    pub reg_floor: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            radii: vec![0.9, 0.99, 0.999],
            nodes_per_circle: 256,
            reg_floor: 1e-12,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), VerificationError> {
        if self.nodes_per_circle < 16 {
            return Err(VerificationError::InvalidQuadrature(
                "at least 16 nodes per circle required".into(),
            ));
        }
        if self.radii.is_empty() {
            return Err(VerificationError::InvalidQuadrature(
                "at least one radius required".into(),
            ));
        }
        for w in self.radii.windows(2) {
            if w[1] <= w[0] {
                return Err(VerificationError::InvalidQuadrature(
                    "radii must be strictly increasing".into(),
                ));
            }
        }
        if self
            .radii
            .iter()
            .any(|r| !(r.is_finite() && *r > 0.0 && *r < 1.0))
        {
            return Err(VerificationError::InvalidQuadrature(
                "radii must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }

    /// Quadrature node on the circle of radius `r`. Angles are offset by
    /// half a step so nodes never land on the positive real axis, where
    /// test data tends to park interpolation nodes.
    pub fn node(&self, r: f64, k: usize) -> Complex64 {
        let ang = std::f64::consts::TAU * (k as f64 + 0.5) / self.nodes_per_circle as f64;
        Complex64::from_polar(r, ang)
    }
}

/// Quadrature estimate of a model-space norm.
#[derive(Debug, Clone)]
pub struct KsNormReport {
    /// Maximum circle average over the requested radii.
    pub value: f64,
    /// Circle averages per radius.
    pub per_radius: Vec<(f64, f64)>,
    /// Nodes where the defect pseudo-inverse truncated mass carried by `f`.
    pub regularized_nodes: usize,
    /// Nodes skipped because `f` could not be evaluated (spectrum hits).
    pub skipped_nodes: usize,
    /// Nodes where the quadratic was undefined beyond tolerance; a nonzero
    /// count reports non-membership of `f` in the model space.
    pub domain_failures: usize,
}

impl KsNormReport {
    pub fn is_member(&self) -> bool {
        self.domain_failures == 0
    }
}

/// Estimate the model-space norm `sup_r ∫ <[[I,s],[s*,I]]^[-1] f, f> dm`
/// of a pair-valued function by trapezoidal quadrature over circles.
///
/// Trapezoid on a periodic analytic integrand is spectrally accurate; the
/// supremum over the radius list realizes the monotone limit toward the
/// boundary.
pub fn ks_norm_quadrature<F>(
    s_eval: &SolutionEvaluator,
    f: F,
    spec: &QuadratureSpec,
    res_tol: f64,
) -> Result<KsNormReport, VerificationError>
where
    F: Fn(Complex64) -> Result<(CVector, CVector), VerificationError>,
{
    spec.validate()?;
    let mut per_radius = Vec::with_capacity(spec.radii.len());
    let mut regularized_nodes = 0usize;
    let mut skipped_nodes = 0usize;
    let mut domain_failures = 0usize;
    for &r in &spec.radii {
        let mut total = 0.0f64;
        let mut used = 0usize;
        for k in 0..spec.nodes_per_circle {
            let zeta = spec.node(r, k);
            let (plus, minus) = match f(zeta) {
                Ok(pair) => pair,
                Err(VerificationError::SpectrumProximity { .. }) => {
                    skipped_nodes += 1;
                    continue;
                }
                Err(other) => return Err(other),
            };
            let s = s_eval.eval(zeta)?;
            let dq = defect_quadratic_unchecked(&s, &plus, &minus, spec.reg_floor, res_tol)?;
            if dq.max_residual > res_tol {
                domain_failures += 1;
            }
            if dq.floor_active {
                regularized_nodes += 1;
            }
            total += dq.value;
            used += 1;
        }
        let average = if used > 0 { total / used as f64 } else { 0.0 };
        per_radius.push((r, average));
    }
    let value = per_radius
        .iter()
        .fold(0.0f64, |acc, &(_, v)| acc.max(v));
    Ok(KsNormReport {
        value,
        per_radius,
        regularized_nodes,
        skipped_nodes,
        domain_failures,
    })
}

/// The positive-real diagnostic functional and its dual representation.
#[derive(Debug, Clone)]
pub struct HerglotzReport {
    /// `P_ζ(x,x)` through the primal formula.
    pub value: Complex64,
    /// The dual formula, when the forward resolvent exists at `ζ`.
    pub dual: Option<Complex64>,
    /// Gap between the two representations.
    pub dual_gap: Option<f64>,
}

/// Evaluate
///
/// ```text
/// P_ζ(x,x) = ½ D(x, (I + ζ̄T)(I - ζ̄T)^{-1} x)
///            - ζ <(F_s x)+(ζ), M (I - ζ̄T)^{-1} x>
/// ```
///
/// together with its dual form through the forward resolvent. The real
/// part is nonnegative for solutions, `P_0(x,x) = ½ D(x,x)` always, and
/// the two forms agree identically for data satisfying the fundamental
/// identity — a gap beyond tolerance is reported as an error because it
/// signals corrupted data rather than a failed candidate.
pub fn herglotz_diagnostic(
    data: &AipData,
    s_eval: &SolutionEvaluator,
    x: &CVector,
    zeta: Complex64,
    tol: &crate::Tolerances,
) -> Result<HerglotzReport, VerificationError> {
    check_disk(zeta)?;
    check_dims(data, s_eval)?;
    let n = data.n();
    if x.len() != n {
        return Err(VerificationError::Shape(format!(
            "x has length {}, expected {n}",
            x.len()
        )));
    }
    let backward = CMatrix::identity(n, n) - data.t() * zeta.conj();
    let z = resolvent_solve(&backward, x, zeta, tol.spec_tol)?;
    // (I + ζ̄T)(I - ζ̄T)^{-1} x = z + ζ̄ T z
    let cayley = &z + (data.t() * &z) * zeta.conj();
    let dx = data.d() * x;
    // D(x, cayley x) = (cayley)^H D x
    let first: Complex64 = cayley
        .iter()
        .zip(dx.iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    // The transform contributes through a factor ζ, so at the origin the
    // value is ½ D(x,x) with no resolvent needed.
    let (value, fx_minus) = if zeta.norm() == 0.0 {
        (first * 0.5, CVector::zeros(data.p()))
    } else {
        let fx = f_transform_eval(data, s_eval, x, zeta, tol.spec_tol)?;
        let mz = data.m() * &z;
        let inner: Complex64 = mz
            .iter()
            .zip(fx.plus.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        (first * 0.5 - zeta * inner, fx.minus)
    };

    // Dual: ½ D((T + ζI)(T - ζI)^{-1} x, x) + <E(ζI - T)^{-1} x, (F_s x)->
    let forward = CMatrix::identity(n, n) * zeta - data.t();
    let dual = match resolvent_solve(&forward, x, zeta, tol.spec_tol) {
        Ok(y) => {
            // (T + ζI)(T - ζI)^{-1} x = -(T y + ζ y)
            let w = (data.t() * &y + &y * zeta) * Complex64::new(-1.0, 0.0);
            let dw = data.d() * &w;
            let first_dual: Complex64 =
                x.iter().zip(dw.iter()).map(|(a, b)| a.conj() * b).sum();
            let ey = data.e() * &y;
            let second_dual: Complex64 = fx_minus
                .iter()
                .zip(ey.iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            Some(first_dual * 0.5 + second_dual)
        }
        Err(VerificationError::SpectrumProximity { .. }) => None,
        Err(other) => return Err(other),
    };
    let dual_gap = dual.map(|d| (d - value).norm());
    if let Some(gap) = dual_gap {
        let scale = value.norm().max(1.0);
        if gap > tol.herg_tol * scale {
            return Err(VerificationError::DualFormMismatch {
                gap,
                tol: tol.herg_tol * scale,
            });
        }
    }
    Ok(HerglotzReport {
        value,
        dual,
        dual_gap,
    })
}

/// The original problem a candidate is checked against.
#[derive(Debug, Clone, Copy)]
pub enum InterpolationProblem<'a> {
    NevanlinnaPick(&'a NevanlinnaPickData),
    Sarason(&'a SarasonData),
}

/// Residual of the raw interpolation conditions.
///
/// Nevanlinna–Pick: `max_k |s(ζ_k) - s_k|` in spectral norm. Sarason: the
/// compression of the candidate to the model space is reconstructed by
/// Cauchy-kernel quadrature and compared to `W` in the model-space metric.
pub fn interpolation_check(
    problem: &InterpolationProblem<'_>,
    s_eval: &SolutionEvaluator,
) -> Result<f64, VerificationError> {
    match problem {
        InterpolationProblem::NevanlinnaPick(np) => {
            let (q, p) = s_eval.dims();
            if q != np.q() || p != np.p() {
                return Err(VerificationError::Shape(format!(
                    "candidate maps {p} -> {q}, data expects {} -> {}",
                    np.p(),
                    np.q()
                )));
            }
            let mut worst = 0.0f64;
            for (z, target) in np.points().iter().zip(np.values().iter()) {
                let s = s_eval.eval(*z)?;
                worst = worst.max(spectral_norm(&(s - target)));
            }
            Ok(worst)
        }
        InterpolationProblem::Sarason(sar) => {
            let (q, p) = s_eval.dims();
            if (q, p) != (1, 1) {
                return Err(VerificationError::Shape(format!(
                    "Sarason candidates are scalar, got {q}x{p}"
                )));
            }
            let w_target = sar.w_matrix();
            let g = sar.gram();
            let w_recon = sarason_compression(sar, s_eval)?;
            // Operator norm in the model-space metric:
            // |X|_G = |G^{1/2} X G^{-1/2}|.
            let g_half = psd_sqrt(&g, 1e-12)?;
            let diff = &w_recon - &w_target;
            let left = &g_half * diff;
            let lu = g_half.clone().lu();
            let solved = lu
                .solve(&left.adjoint())
                .ok_or_else(|| VerificationError::Shape("Gram matrix is singular".into()))?;
            Ok(spectral_norm(&solved.adjoint()))
        }
    }
}

/// Reconstruct the model-space compression of a scalar candidate by
/// Cauchy-kernel quadrature: the compression acts as
/// `G^{-1} diag(w(a_i)) G` in kernel-coefficient coordinates, with the
/// values `w(a_i)` recovered from a circle of samples.
///
/// The radius and node count are chosen so both the radial decay and the
/// kernel decay suppress trapezoid aliasing below 1e-12; zeros too close
/// to the sampling circle are rejected.
pub fn sarason_compression(
    sar: &SarasonData,
    s_eval: &SolutionEvaluator,
) -> Result<CMatrix, VerificationError> {
    let zeros = sar.zeros();
    let max_zero = zeros.iter().fold(0.0f64, |acc, a| acc.max(a.norm()));
    let radius = 0.9f64.max((1.0 + max_zero) / 2.0);
    if max_zero > 0.92 * radius {
        return Err(VerificationError::InvalidQuadrature(format!(
            "Blaschke zero of modulus {max_zero} too close to the sampling radius {radius}"
        )));
    }
    // Aliasing decays like max(radius, max_zero/radius)^N.
    let decay = radius.max(max_zero / radius);
    let target = 1e-12f64;
    let mut nodes = 256usize;
    while nodes < 8192 && decay.powi(nodes as i32) > target {
        nodes *= 2;
    }
    if decay.powi(nodes as i32) > 1e-9 {
        return Err(VerificationError::InvalidQuadrature(format!(
            "cannot reach quadrature accuracy at radius {radius} with {nodes} nodes"
        )));
    }

    let n = zeros.len();
    let mut values = CVector::zeros(n);
    for k in 0..nodes {
        let ang = std::f64::consts::TAU * (k as f64 + 0.5) / nodes as f64;
        let t = Complex64::from_polar(radius, ang);
        let s = s_eval.eval(t)?;
        let w_t = s[(0, 0)];
        for (i, a) in zeros.iter().enumerate() {
            values[i] += w_t * t / (t - a);
        }
    }
    values /= Complex64::new(nodes as f64, 0.0);

    let g = sar.gram();
    let diag = CMatrix::from_diagonal(&values);
    let rhs = diag * &g;
    g.lu()
        .solve(&rhs)
        .ok_or_else(|| VerificationError::Shape("Gram matrix is singular".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colligation::{
        build_colligation, coupling_unitary, defect_spaces, unitary_extension, SchurParameter,
    };
    use crate::problem::{
        build_nevanlinna_pick, build_sarason, NevanlinnaPickData, SarasonOperator,
    };
    use crate::scattering::scattering_eval;
    use crate::Tolerances;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar(v: f64) -> CMatrix {
        CMatrix::from_element(1, 1, c(v, 0.0))
    }

    fn golden_a() -> AipData {
        let np = NevanlinnaPickData::new(vec![c(0.0, 0.0)], vec![scalar(0.0)]).unwrap();
        build_nevanlinna_pick(&np).unwrap()
    }

    fn golden_b() -> AipData {
        let np = NevanlinnaPickData::new(
            vec![c(0.0, 0.0), c(0.5, 0.0)],
            vec![scalar(0.0), scalar(0.5)],
        )
        .unwrap();
        build_nevanlinna_pick(&np).unwrap()
    }

    fn unique_solution_b() -> SolutionEvaluator {
        let tol = Tolerances::default();
        let data = golden_b();
        let col = build_colligation(&data, &tol).unwrap();
        let ds = defect_spaces(&col);
        let coupling = coupling_unitary(&col, &ds, &tol).unwrap();
        let parameter = SchurParameter::zero(ds.mu(), ds.nu(), &tol).unwrap();
        SolutionEvaluator::Coefficients {
            coupling,
            ds,
            parameter,
            inv_tol: tol.inv_tol,
        }
    }

    fn grid(radius: f64, count: usize) -> Vec<Complex64> {
        (0..count)
            .map(|k| {
                Complex64::from_polar(
                    radius,
                    std::f64::consts::TAU * (k as f64 + 0.5) / count as f64,
                )
            })
            .collect()
    }

    #[test]
    fn fmi_holds_for_zero_solution_of_golden_a() {
        let data = golden_a();
        let s = SolutionEvaluator::Constant(scalar(0.0));
        for zeta in grid(0.3, 8).into_iter().chain(grid(0.8, 8)) {
            let report = fmi_check(&data, &s, zeta, 1e-10).unwrap();
            assert!(report.is_psd, "FMI fails at {zeta}");
            let report_p = fmi_prime_check(&data, &s, zeta, 1e-10).unwrap();
            assert!(report_p.is_psd, "FMI' fails at {zeta}");
        }
    }

    #[test]
    fn fmi_rejects_wrong_constant() {
        // s ≡ 0.5 violates s(0) = 0; positivity must fail somewhere
        // (for this instance: exactly inside |ζ| < 0.5).
        let data = golden_a();
        let s = SolutionEvaluator::Constant(scalar(0.5));
        let mut failures = 0;
        for zeta in grid(0.3, 8) {
            let report = fmi_check(&data, &s, zeta, 1e-10).unwrap();
            let report_p = fmi_prime_check(&data, &s, zeta, 1e-10).unwrap();
            assert_eq!(report.is_psd, report_p.is_psd, "verdicts differ at {zeta}");
            if !report.is_psd {
                failures += 1;
            }
        }
        assert!(failures > 0, "FMI should fail inside the small radius");
    }

    #[test]
    fn fmi_equivalence_on_nonsolutions() {
        let data = golden_b();
        for (value, radius) in [(0.3, 0.4), (0.9, 0.7), (-0.2, 0.55)] {
            let s = SolutionEvaluator::Constant(scalar(value));
            for zeta in grid(radius, 10) {
                let a = fmi_check(&data, &s, zeta, 1e-10).unwrap();
                let b = fmi_prime_check(&data, &s, zeta, 1e-10).unwrap();
                assert_eq!(a.is_psd, b.is_psd, "verdicts differ at {zeta}");
            }
        }
    }

    #[test]
    fn f_transform_minus_vanishes_at_origin() {
        let data = golden_b();
        let s = unique_solution_b();
        let x = CVector::from_vec(vec![c(1.0, 0.0), c(-0.3, 0.2)]);
        let v = f_transform_eval(&data, &s, &x, c(0.3, 0.1), 1e-8).unwrap();
        assert!(v.at == c(0.3, 0.1));
        let at_zero = f_transform_eval(&data, &s, &x, c(0.0, 0.0), 1e-8);
        // ζ = 0 is an eigenvalue of T here, so the forward resolvent is
        // rejected; use the one-node instance for the origin case.
        assert!(matches!(
            at_zero,
            Err(VerificationError::SpectrumProximity { .. })
        ));

        let data_a = golden_a();
        let s_a = SolutionEvaluator::Constant(scalar(0.0));
        // T = 0: the forward resolvent at ζ=0 is singular as well; pick a
        // point away from zero and check the ζ̄ factor kills minus at 0
        // via a nonzero-T instance instead.
        let x1 = CVector::from_vec(vec![c(1.0, 0.0)]);
        let v = f_transform_eval(&data_a, &s_a, &x1, c(0.4, 0.0), 1e-8).unwrap();
        assert!(v.minus.norm() > 0.0);
        let _ = data_a;
    }

    #[test]
    fn f_transform_zero_vector() {
        let data = golden_b();
        let s = unique_solution_b();
        let x = CVector::zeros(2);
        let v = f_transform_eval(&data, &s, &x, c(0.2, 0.4), 1e-8).unwrap();
        assert!(v.plus.norm() == 0.0 && v.minus.norm() == 0.0);
    }

    #[test]
    fn eigenvector_rigidity() {
        // At an eigenvalue ζ0 of T with eigenvector x0, any solution
        // satisfies s(ζ0) E x0 = M x0.
        let data = golden_b();
        let s = unique_solution_b();
        let zeta0 = c(0.5, 0.0);
        let x0 = CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        let sval = s.eval(zeta0).unwrap();
        let lhs = &sval * (data.e() * &x0);
        let rhs = data.m() * &x0;
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn identity18_zero_vector() {
        let data = golden_b();
        let s = unique_solution_b();
        let x = CVector::zeros(2);
        let t = Complex64::from_polar(1.0 - 1e-4, 1.1);
        let rep = identity18_residual(&data, &s, &x, t, 1e-8).unwrap();
        assert_eq!(rep.residual, 0.0);
        assert_eq!(rep.corrected, 0.0);
    }

    #[test]
    fn identity18_exact_after_bias_correction() {
        // For rational solutions the recurrence is exact once the interior
        // correction is removed; the raw residual equals the bias.
        let tol = Tolerances::default();
        let data = golden_a();
        let col = build_colligation(&data, &tol).unwrap();
        let ds = defect_spaces(&col);
        let coupling = coupling_unitary(&col, &ds, &tol).unwrap();
        let parameter =
            SchurParameter::constant(&CMatrix::from_element(1, 1, c(0.6, 0.0)), &tol).unwrap();
        let s = SolutionEvaluator::Coefficients {
            coupling,
            ds,
            parameter,
            inv_tol: tol.inv_tol,
        };
        let x = CVector::from_vec(vec![c(1.0, 0.0)]);
        let t = Complex64::from_polar(1.0 - 1e-4, 0.7);
        let rep = identity18_residual(&data, &s, &x, t, 1e-8).unwrap();
        assert!(rep.corrected <= 1e-6, "corrected residual {}", rep.corrected);
        assert!(
            (rep.residual - rep.interior_bias).abs() <= 1e-8,
            "raw residual {} vs bias {}",
            rep.residual,
            rep.interior_bias
        );
        // The bias scale is O(1-r).
        assert!(rep.residual < 1e-3);
    }

    #[test]
    fn identity18_residual_vanishes_toward_boundary() {
        // The raw recurrence defect for a solver output decays like 1 - r.
        let data = golden_b();
        let s = unique_solution_b();
        let x = CVector::from_vec(vec![c(0.7, 0.0), c(0.3, -0.2)]);
        let mut previous = f64::INFINITY;
        for (k, r) in [0.9, 0.99, 0.999, 0.9999].into_iter().enumerate() {
            let t = Complex64::from_polar(r, 1.3);
            let rep = identity18_residual(&data, &s, &x, t, 1e-8).unwrap();
            assert!(
                rep.residual < previous,
                "residual must shrink toward the boundary"
            );
            // Roughly linear in 1 - r.
            assert!(rep.residual <= 10.0 * (1.0 - r), "step {k}: {}", rep.residual);
            previous = rep.residual;
        }
    }

    #[test]
    fn f_transform_minus_vanishes_at_origin_for_invertible_shift() {
        let np = NevanlinnaPickData::new(
            vec![c(0.3, 0.0), c(-0.4, 0.1)],
            vec![scalar(0.1), scalar(-0.2)],
        )
        .unwrap();
        let data = build_nevanlinna_pick(&np).unwrap();
        let tol = Tolerances::default();
        let col = build_colligation(&data, &tol).unwrap();
        let ds = defect_spaces(&col);
        let coupling = coupling_unitary(&col, &ds, &tol).unwrap();
        let s = SolutionEvaluator::Coefficients {
            coupling,
            ds,
            parameter: SchurParameter::zero(1, 1, &tol).unwrap(),
            inv_tol: tol.inv_tol,
        };
        let x = CVector::from_vec(vec![c(1.0, 0.5), c(-0.2, 0.3)]);
        let v = f_transform_eval(&data, &s, &x, c(0.0, 0.0), 1e-8).unwrap();
        assert!(v.minus.norm() == 0.0, "conjugate factor must kill minus at 0");
        assert!(v.plus.norm() > 0.0);
    }

    #[test]
    fn herglotz_zero_vector_is_zero() {
        let data = golden_b();
        let s = unique_solution_b();
        let tol = Tolerances::default();
        let x = CVector::zeros(2);
        let rep = herglotz_diagnostic(&data, &s, &x, c(0.3, 0.2), &tol).unwrap();
        assert_eq!(rep.value, c(0.0, 0.0));
    }

    #[test]
    fn ks_norm_zero_function() {
        let s = SolutionEvaluator::Constant(scalar(0.0));
        let spec = QuadratureSpec::default();
        let report = ks_norm_quadrature(
            &s,
            |_| Ok((CVector::zeros(1), CVector::zeros(1))),
            &spec,
            1e-8,
        )
        .unwrap();
        assert_eq!(report.value, 0.0);
        assert!(report.is_member());
    }

    #[test]
    fn ks_norm_identity_defect_is_plain_h2_norm() {
        // s ≡ 0 turns the quadratic into |f+|² + |f-|².
        let s = SolutionEvaluator::Constant(scalar(0.0));
        let spec = QuadratureSpec::default();
        let c1 = c(0.7, 0.1);
        let c2 = c(-0.2, 0.5);
        let report = ks_norm_quadrature(
            &s,
            |zeta| {
                Ok((
                    CVector::from_element(1, c1),
                    CVector::from_element(1, zeta.conj() * c2),
                ))
            },
            &spec,
            1e-8,
        )
        .unwrap();
        let r_max: f64 = 0.999;
        let expected = c1.norm_sqr() + r_max * r_max * c2.norm_sqr();
        assert!((report.value - expected).abs() < 1e-12);
        // Monotone in the radius, as the supremum structure demands.
        for w in report.per_radius.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-12);
        }
    }

    #[test]
    fn theorem_norm_bound_on_unique_solution() {
        // <F_s x, F_s x> ≤ D(x,x) for every basis vector.
        let data = golden_b();
        let s = unique_solution_b();
        let spec = QuadratureSpec::default();
        for j in 0..data.n() {
            let x = CVector::from_fn(data.n(), |i, _| {
                if i == j {
                    c(1.0, 0.0)
                } else {
                    c(0.0, 0.0)
                }
            });
            let report = ks_norm_quadrature(
                &s,
                |zeta| {
                    let v = f_transform_eval(&data, &s, &x, zeta, 1e-8)?;
                    Ok((v.plus, v.minus))
                },
                &spec,
                1e-8,
            )
            .unwrap();
            let dxx = (data.d() * &x)
                .iter()
                .zip(x.iter())
                .map(|(a, b)| (b.conj() * a).re)
                .sum::<f64>();
            assert!(
                report.value <= dxx + 1e-6,
                "norm bound violated: {} > {}",
                report.value,
                dxx
            );
            assert!(report.is_member());
            // The circle averages realize a supremum: non-decreasing in r
            // within quadrature error.
            for w in report.per_radius.windows(2) {
                assert!(w[1].1 >= w[0].1 - 1e-6, "per-radius values {:?}", report.per_radius);
            }
        }
    }

    #[test]
    fn herglotz_at_origin_is_half_d() {
        let data = golden_b();
        let s = unique_solution_b();
        let tol = Tolerances::default();
        let x = CVector::from_vec(vec![c(0.8, 0.1), c(-0.4, 0.3)]);
        // ζ = 0 hits the spectrum of T for this instance (forward resolvent
        // only matters for the dual); the primal needs (I - ζ̄T)^{-1} which
        // is fine at 0. The dual form is skipped there.
        let rep = herglotz_diagnostic(&data, &s, &x, c(0.0, 0.0), &tol).unwrap();
        let dxx: Complex64 = (data.d() * &x)
            .iter()
            .zip(x.iter())
            .map(|(a, b)| b.conj() * a)
            .sum();
        assert!((rep.value - dxx * 0.5).norm() < 1e-12);
    }

    #[test]
    fn herglotz_positive_and_dual_consistent() {
        let data = golden_b();
        let s = unique_solution_b();
        let tol = Tolerances::default();
        let x = CVector::from_vec(vec![c(1.0, 0.0), c(0.2, -0.6)]);
        for zeta in grid(0.7, 12) {
            let rep = herglotz_diagnostic(&data, &s, &x, zeta, &tol).unwrap();
            assert!(rep.value.re >= -1e-8, "Re P = {} at {zeta}", rep.value.re);
            if let Some(gap) = rep.dual_gap {
                assert!(gap <= 1e-8 * rep.value.norm().max(1.0));
            }
        }
    }

    #[test]
    fn interpolation_check_np() {
        let np = NevanlinnaPickData::new(
            vec![c(0.0, 0.0), c(0.5, 0.0)],
            vec![scalar(0.0), scalar(0.5)],
        )
        .unwrap();
        let s = unique_solution_b();
        let resid =
            interpolation_check(&InterpolationProblem::NevanlinnaPick(&np), &s).unwrap();
        assert!(resid <= 1e-8, "residual {resid}");
        let bad = SolutionEvaluator::Constant(scalar(0.25));
        let resid_bad =
            interpolation_check(&InterpolationProblem::NevanlinnaPick(&np), &bad).unwrap();
        assert!(resid_bad > 0.2);
    }

    #[test]
    fn sarason_reconstruction_of_shift_polynomial() {
        // Candidate w(ζ) = c ζ compresses to c T; the quadrature
        // reconstruction must recover it.
        let tol = Tolerances::default();
        let sar = crate::problem::SarasonData::new(
            vec![c(0.0, 0.0), c(0.5, 0.0)],
            SarasonOperator::PolynomialInShift(vec![c(0.0, 0.0), c(0.3, 0.0)]),
        )
        .unwrap();
        let _ = build_sarason(&sar, &tol).unwrap();
        let w_eval = SolutionEvaluator::Realization(
            crate::scattering::ContractiveRealization::new(
                CMatrix::zeros(1, 1),
                CMatrix::from_element(1, 1, c(1.0, 0.0)),
                CMatrix::from_element(1, 1, c(0.3, 0.0)),
                CMatrix::zeros(1, 1),
                1e-8,
            )
            .unwrap(),
        );
        let resid = interpolation_check(&InterpolationProblem::Sarason(&sar), &w_eval).unwrap();
        assert!(resid <= 1e-9, "residual {resid}");
    }

    #[test]
    fn extension_solutions_pass_fmi_everywhere() {
        let tol = Tolerances::default();
        let data = golden_a();
        let col = build_colligation(&data, &tol).unwrap();
        let ds = defect_spaces(&col);
        let eps = SchurParameter::constant(&scalar(0.5), &tol).unwrap();
        let ext = unitary_extension(&col, &ds, &eps, &tol).unwrap();
        let s = SolutionEvaluator::Extension(ext.clone());
        for zeta in grid(0.4, 6).into_iter().chain(grid(0.9, 6)) {
            let rep = fmi_check(&data, &s, zeta, 1e-10).unwrap();
            assert!(rep.is_psd, "FMI fails at {zeta}");
        }
        // Cross-check scattering value: s(ζ) = 0.5 ζ.
        let z = c(0.3, 0.2);
        let sval = scattering_eval(&ext, z).unwrap();
        assert!((sval[(0, 0)] - z * 0.5).norm() < 1e-10);
    }
}
