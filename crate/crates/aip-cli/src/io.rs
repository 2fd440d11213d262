//! Problem, parameter, and candidate file formats.
//!
//! Everything is JSON with complex numbers as two-element `[re, im]`
//! arrays and matrices as row-major arrays of rows. Schema problems
//! (malformed JSON, ragged matrices, missing fields) are format errors;
//! mathematically invalid data (non-contractive values, boundary nodes)
//! surfaces later as math errors, so the front end can report them with
//! context.

use aip_core::colligation::{PartitionedUnitary, SchurParameter};
use aip_core::matrix::CMatrix;
use aip_core::problem::{NevanlinnaPickData, SarasonData, SarasonOperator};
use aip_core::scattering::{ContractiveRealization, SolutionEvaluator};
use aip_core::Tolerances;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type Cplx = [f64; 2];
pub type MatrixRepr = Vec<Vec<Cplx>>;

pub fn to_complex(c: Cplx) -> Complex64 {
    Complex64::new(c[0], c[1])
}

pub fn from_complex(z: Complex64) -> Cplx {
    [z.re, z.im]
}

pub fn parse_matrix(repr: &MatrixRepr, what: &str) -> Result<CMatrix, String> {
    let rows = repr.len();
    let cols = repr.first().map(|r| r.len()).unwrap_or(0);
    for (i, row) in repr.iter().enumerate() {
        if row.len() != cols {
            return Err(format!(
                "{what}: row {i} has {} entries, expected {cols} (matrix must be rectangular)",
                row.len()
            ));
        }
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| to_complex(repr[i][j])))
}

pub fn emit_matrix(m: &CMatrix) -> MatrixRepr {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| from_complex(m[(i, j)])).collect())
        .collect()
}

/// A problem instance on disk.
#[derive(Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemFile {
    NevanlinnaPick {
        points: Vec<Cplx>,
        values: Vec<MatrixRepr>,
    },
    Sarason {
        zeros: Vec<Cplx>,
        w: SarasonRepr,
    },
    RawAip {
        t: MatrixRepr,
        d: MatrixRepr,
        e: MatrixRepr,
        m: MatrixRepr,
    },
}

impl ProblemFile {
    pub fn kind(&self) -> &'static str {
        match self {
            ProblemFile::NevanlinnaPick { .. } => "nevanlinna_pick",
            ProblemFile::Sarason { .. } => "sarason",
            ProblemFile::RawAip { .. } => "raw_aip",
        }
    }
}

/// The Sarason operator: an explicit matrix in the kernel-coefficient
/// coordinates, or a polynomial in the compressed shift.
#[derive(Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum SarasonRepr {
    Matrix { matrix: MatrixRepr },
    Polynomial { polynomial: Vec<Cplx> },
}

/// A Schur-class parameter on disk.
#[derive(Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum EpsilonFile {
    /// Constant contraction (nu x mu).
    Constant { constant: MatrixRepr },
    /// Explicit unitary realization with padded channels.
    Realization { realization: RealizationRepr },
    /// Seeded random unitary realization.
    Random { random: RandomEpsilon },
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RealizationRepr {
    pub state_dim: usize,
    pub in_dim: usize,
    pub out_dim: usize,
    pub matrix: MatrixRepr,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RandomEpsilon {
    pub state_dim: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// A candidate solution for `verify`.
#[derive(Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum CandidateFile {
    /// Constant function.
    Constant { constant: MatrixRepr },
    /// Contractive state-space realization, evaluable anywhere on the disk.
    Realization { realization: StateSpaceRepr },
    /// Grid samples; checks run at the sampled points only.
    Samples { samples: Vec<SampleRepr> },
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpaceRepr {
    pub a: MatrixRepr,
    pub b: MatrixRepr,
    pub c: MatrixRepr,
    pub d: MatrixRepr,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRepr {
    pub at: Cplx,
    pub value: MatrixRepr,
}

/// Parsed problem, ready for the engine.
pub enum Problem {
    NevanlinnaPick(NevanlinnaPickData),
    Sarason(SarasonData),
    Raw {
        t: CMatrix,
        d: CMatrix,
        e: CMatrix,
        m: CMatrix,
    },
}

/// Build engine-level data from a parsed file. Shape problems are format
/// errors; everything else is math.
pub fn realize_problem(file: &ProblemFile) -> Result<Result<Problem, String>, String> {
    match file {
        ProblemFile::NevanlinnaPick { points, values } => {
            let pts: Vec<Complex64> = points.iter().map(|c| to_complex(*c)).collect();
            let mut vals = Vec::with_capacity(values.len());
            for (i, v) in values.iter().enumerate() {
                vals.push(parse_matrix(v, &format!("values[{i}]"))?);
            }
            Ok(NevanlinnaPickData::new(pts, vals)
                .map(Problem::NevanlinnaPick)
                .map_err(|e| e.to_string()))
        }
        ProblemFile::Sarason { zeros, w } => {
            let zs: Vec<Complex64> = zeros.iter().map(|c| to_complex(*c)).collect();
            let op = match w {
                SarasonRepr::Matrix { matrix } => {
                    SarasonOperator::Matrix(parse_matrix(matrix, "w.matrix")?)
                }
                SarasonRepr::Polynomial { polynomial } => SarasonOperator::PolynomialInShift(
                    polynomial.iter().map(|c| to_complex(*c)).collect(),
                ),
            };
            Ok(SarasonData::new(zs, op)
                .map(Problem::Sarason)
                .map_err(|e| e.to_string()))
        }
        ProblemFile::RawAip { t, d, e, m } => {
            let t = parse_matrix(t, "t")?;
            let d = parse_matrix(d, "d")?;
            let e = parse_matrix(e, "e")?;
            let m = parse_matrix(m, "m")?;
            Ok(Ok(Problem::Raw { t, d, e, m }))
        }
    }
}

/// Build a Schur parameter from a parsed file. The seed argument is the
/// `--seed` flag, used when the file requests a random parameter without
/// its own seed.
pub fn realize_epsilon(
    file: &EpsilonFile,
    mu: usize,
    nu: usize,
    cli_seed: Option<u64>,
    tol: &Tolerances,
) -> Result<Result<(SchurParameter, String), String>, String> {
    match file {
        EpsilonFile::Constant { constant } => {
            let k = parse_matrix(constant, "constant")?;
            if k.nrows() != nu || k.ncols() != mu {
                return Ok(Err(format!(
                    "parameter must be {nu}x{mu} for this instance, got {}x{}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            Ok(SchurParameter::constant(&k, tol)
                .map(|p| (p, "constant".to_string()))
                .map_err(|e| e.to_string()))
        }
        EpsilonFile::Realization { realization } => {
            let m = parse_matrix(&realization.matrix, "realization.matrix")?;
            if realization.in_dim != mu || realization.out_dim != nu {
                return Ok(Err(format!(
                    "parameter must map {mu} -> {nu} for this instance, got {} -> {}",
                    realization.in_dim, realization.out_dim
                )));
            }
            Ok(PartitionedUnitary::new(
                m,
                realization.state_dim,
                realization.in_dim,
                realization.out_dim,
                tol.unit_tol,
            )
            .map(|pu| {
                (
                    SchurParameter::from_realization(pu),
                    format!("realization(state_dim={})", realization.state_dim),
                )
            })
            .map_err(|e| e.to_string()))
        }
        EpsilonFile::Random { random } => {
            let seed = random.seed.or(cli_seed).unwrap_or(0);
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
            Ok(
                SchurParameter::random(random.state_dim, mu, nu, &mut rng, tol)
                    .map(|p| {
                        (
                            p,
                            format!("random(state_dim={}, seed={seed})", random.state_dim),
                        )
                    })
                    .map_err(|e| e.to_string()),
            )
        }
    }
}

/// Build a candidate evaluator from a parsed file.
pub fn realize_candidate(
    file: &CandidateFile,
    spec_tol: f64,
    eval_tol: f64,
) -> Result<Result<(SolutionEvaluator, &'static str), String>, String> {
    match file {
        CandidateFile::Constant { constant } => {
            let m = parse_matrix(constant, "constant")?;
            Ok(Ok((SolutionEvaluator::Constant(m), "constant")))
        }
        CandidateFile::Realization { realization } => {
            let a = parse_matrix(&realization.a, "realization.a")?;
            let b = parse_matrix(&realization.b, "realization.b")?;
            let c = parse_matrix(&realization.c, "realization.c")?;
            let d = parse_matrix(&realization.d, "realization.d")?;
            Ok(ContractiveRealization::new(a, b, c, d, eval_tol)
                .map(|r| (SolutionEvaluator::Realization(r), "realization"))
                .map_err(|e| e.to_string()))
        }
        CandidateFile::Samples { samples } => {
            if samples.is_empty() {
                return Err("samples candidate must contain at least one sample".into());
            }
            let mut points = Vec::with_capacity(samples.len());
            let mut values = Vec::with_capacity(samples.len());
            let (q, p) = {
                let first = parse_matrix(&samples[0].value, "samples[0].value")?;
                (first.nrows(), first.ncols())
            };
            for (i, s) in samples.iter().enumerate() {
                let v = parse_matrix(&s.value, &format!("samples[{i}].value"))?;
                if v.nrows() != q || v.ncols() != p {
                    return Err(format!(
                        "samples[{i}].value is {}x{}, expected {q}x{p}",
                        v.nrows(),
                        v.ncols()
                    ));
                }
                points.push(to_complex(s.at));
                values.push(v);
            }
            Ok(Ok((
                SolutionEvaluator::Samples {
                    points,
                    values,
                    match_tol: spec_tol,
                },
                "samples",
            )))
        }
    }
}

