//! Batch front end: parse problem files, run check/solve/verify/coeffs
//! pipelines, and emit machine-readable JSON reports on stdout.
//!
//! Exit codes: 0 all checks pass, 1 mathematically invalid data or failed
//! checks, 2 malformed input. Environment variables `AIP_TOL`,
//! `AIP_GRID_NODES`, `AIP_RADII`, and `AIP_SEED` mirror the corresponding
//! flags; flags win when both are present.

mod io;
mod report;

use aip_core::colligation::{
    build_colligation, coupling_unitary, defect_spaces, unitary_extension, Colligation,
    DefectSpaces, PartitionedUnitary, SchurParameter,
};
use aip_core::matrix::{spectral_norm, CVector};
use aip_core::problem::{
    build_nevanlinna_pick, build_sarason, solvability, validate_fi, AipData, ProblemError,
};
use aip_core::scattering::{
    coefficient_matrix, lft_apply, scattering_eval, ScatteringError, SolutionEvaluator,
};
use aip_core::verification::{
    f_transform_eval, fmi_check, fmi_prime_check, interpolation_check, ks_norm_quadrature,
    InterpolationProblem, QuadratureSpec, VerificationError,
};
use aip_core::Tolerances;
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use report::*;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Quadrature-error allowance on the model-space norm bound.
const KS_BOUND_MARGIN: f64 = 1e-6;
/// Absolute floor on FMI eigenvalues for the pass verdict.
const FMI_EIG_FLOOR: f64 = 1e-8;

#[derive(Parser)]
#[command(
    name = "aip",
    version,
    about = "Schur-class interpolation: check, solve, and verify Nevanlinna-Pick and Sarason problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
struct CommonOpts {
    /// Tolerance override, NAME=VALUE (repeatable). Names match the
    /// tolerance table in the report.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Nodes per circle for evaluation grids.
    #[arg(long)]
    grid_nodes: Option<usize>,
    /// Comma-separated grid radii in (0, 1).
    #[arg(long)]
    radii: Option<String>,
    /// Seed for randomized parameters.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a problem file: fundamental identity and solvability.
    Check {
        file: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Solve the problem and emit grid samples plus a verification record.
    Solve {
        file: PathBuf,
        /// Use the central solution (zero parameter). Default.
        #[arg(long, conflicts_with = "epsilon")]
        central: bool,
        /// Schur parameter file.
        #[arg(long, value_name = "FILE")]
        epsilon: Option<PathBuf>,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Verify an externally supplied candidate solution.
    Verify {
        file: PathBuf,
        candidate: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Dump the coefficient matrix blocks on a grid.
    Coeffs {
        file: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
}

enum CliFailure {
    /// Unreadable or schema-invalid input: exit 2, message on stderr.
    Format(String),
    /// Mathematically invalid data or failed checks: exit 1 with report.
    Math(Box<Report>),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Check { file, opts } => run_check(&file, &opts),
        Command::Solve {
            file,
            central: _,
            epsilon,
            opts,
        } => run_solve(&file, epsilon.as_deref(), &opts),
        Command::Verify {
            file,
            candidate,
            opts,
        } => run_verify(&file, &candidate, &opts),
        Command::Coeffs { file, opts } => run_coeffs(&file, &opts),
    };
    match outcome {
        Ok(report) => {
            print_report(&report);
            if report.verdict == "pass" {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliFailure::Format(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliFailure::Math(report)) => {
            print_report(&report);
            ExitCode::from(1)
        }
    }
}

/// Reports are built fully, then written in one call.
fn print_report(report: &Report) {
    let body = serde_json::to_string_pretty(report).expect("report serialization");
    println!("{body}");
}

fn format_err<E: std::fmt::Display>(e: E) -> CliFailure {
    CliFailure::Format(e.to_string())
}

struct GridOpts {
    nodes: usize,
    radii: Vec<f64>,
    seed: Option<u64>,
}

fn env_var(name: &str) -> Option<String> {
    std::env::var(name).ok().filter(|s| !s.is_empty())
}

fn parse_tolerances(opts: &CommonOpts) -> Result<Tolerances, CliFailure> {
    let mut tol = Tolerances::default();
    let mut pairs: Vec<String> = Vec::new();
    if let Some(env) = env_var("AIP_TOL") {
        pairs.extend(env.split(',').map(|s| s.trim().to_string()));
    }
    pairs.extend(opts.tol.iter().cloned());
    for pair in pairs {
        let (name, value) = pair
            .split_once('=')
            .ok_or_else(|| CliFailure::Format(format!("--tol expects NAME=VALUE, got {pair}")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| CliFailure::Format(format!("invalid tolerance value in {pair}")))?;
        tol.set_by_name(name.trim(), value).map_err(format_err)?;
    }
    Ok(tol)
}

fn parse_grid(opts: &CommonOpts) -> Result<GridOpts, CliFailure> {
    let nodes_str = opts
        .grid_nodes
        .map(|n| n.to_string())
        .or_else(|| env_var("AIP_GRID_NODES"));
    let nodes = match nodes_str {
        Some(s) => s
            .parse::<usize>()
            .map_err(|_| CliFailure::Format(format!("invalid grid node count: {s}")))?,
        None => 64,
    };
    if nodes < 4 {
        return Err(CliFailure::Format("grid needs at least 4 nodes".into()));
    }
    let radii_str = opts.radii.clone().or_else(|| env_var("AIP_RADII"));
    let radii = match radii_str {
        Some(s) => {
            let mut r: Vec<f64> = Vec::new();
            for piece in s.split(',') {
                let v: f64 = piece
                    .trim()
                    .parse()
                    .map_err(|_| CliFailure::Format(format!("invalid radius: {piece}")))?;
                if !(v > 0.0 && v < 1.0) {
                    return Err(CliFailure::Format(format!(
                        "radii must lie in (0, 1), got {v}"
                    )));
                }
                r.push(v);
            }
            r.sort_by(|a, b| a.partial_cmp(b).unwrap());
            r.dedup();
            if r.is_empty() {
                return Err(CliFailure::Format("at least one radius required".into()));
            }
            r
        }
        None => vec![0.5, 0.9],
    };
    let seed = match opts
        .seed
        .map(|s| s.to_string())
        .or_else(|| env_var("AIP_SEED"))
    {
        Some(s) => Some(
            s.parse::<u64>()
                .map_err(|_| CliFailure::Format(format!("invalid seed: {s}")))?,
        ),
        None => None,
    };
    Ok(GridOpts { nodes, radii, seed })
}

fn grid_points(radii: &[f64], nodes: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(radii.len() * nodes);
    for &r in radii {
        for k in 0..nodes {
            let ang = std::f64::consts::TAU * (k as f64 + 0.5) / nodes as f64;
            out.push(Complex64::from_polar(r, ang));
        }
    }
    out
}

/// Everything loaded and validated up to the fundamental identity gate.
struct Loaded {
    problem: io::Problem,
    data: AipData,
    report: Report,
    tol: Tolerances,
}

fn load(file: &Path, opts: &CommonOpts) -> Result<Loaded, CliFailure> {
    let tol = parse_tolerances(opts)?;
    let bytes = std::fs::read(file)
        .map_err(|e| CliFailure::Format(format!("cannot read {}: {e}", file.display())))?;
    let parsed: io::ProblemFile = serde_json::from_slice(&bytes)
        .map_err(|e| CliFailure::Format(format!("{}: {e}", file.display())))?;
    let digest = hex_digest(&bytes);
    let kind = parsed.kind();

    let mut report = Report {
        tool: ToolInfo {
            name: "aip",
            version: env!("CARGO_PKG_VERSION"),
        },
        instance: InstanceInfo {
            digest,
            kind,
            n: None,
            p: None,
            q: None,
        },
        tolerances: tolerance_map(&tol),
        fi_residual: None,
        solvability: None,
        defects: None,
        solution: None,
        checks: None,
        samples: None,
        coefficients: None,
        verdict: "fail",
        failures: Vec::new(),
    };

    let problem = match io::realize_problem(&parsed).map_err(CliFailure::Format)? {
        Ok(p) => p,
        Err(math) => {
            report.failures.push(math);
            return Err(CliFailure::Math(Box::new(report)));
        }
    };

    let data = match &problem {
        io::Problem::NevanlinnaPick(np) => build_nevanlinna_pick(np),
        io::Problem::Sarason(sar) => build_sarason(sar, &tol),
        io::Problem::Raw { t, d, e, m } => {
            AipData::new(t.clone(), d.clone(), e.clone(), m.clone(), &tol)
        }
    };
    let data = match data {
        Ok(d) => d,
        Err(ProblemError::Shape(msg)) => {
            // Inconsistent shapes are schema problems, not math.
            return Err(CliFailure::Format(msg));
        }
        Err(math) => {
            report.failures.push(math.to_string());
            return Err(CliFailure::Math(Box::new(report)));
        }
    };
    report.instance.n = Some(data.n());
    report.instance.p = Some(data.p());
    report.instance.q = Some(data.q());
    Ok(Loaded {
        problem,
        data,
        report,
        tol,
    })
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

fn tolerance_map(tol: &Tolerances) -> BTreeMap<String, f64> {
    tol.entries()
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

/// FI and solvability; pushes failures into the report.
fn gate(loaded: &mut Loaded) -> bool {
    let fi = validate_fi(&loaded.data);
    loaded.report.fi_residual = Some(fi);
    let mut ok = true;
    if fi > loaded.tol.fi_tol {
        loaded.report.failures.push(format!(
            "fundamental identity residual {fi:.3e} exceeds fi_tol {:.3e}",
            loaded.tol.fi_tol
        ));
        ok = false;
    }
    match solvability(&loaded.data, loaded.tol.psd_tol) {
        Ok(psd) => {
            loaded.report.solvability = Some(SolvabilityInfo {
                solvable: psd.is_psd,
                min_eigenvalue: psd.min_eigenvalue,
                rank: psd.rank,
            });
            if !psd.is_psd {
                loaded.report.failures.push(format!(
                    "data is not solvable: min eigenvalue {:.6e}",
                    psd.min_eigenvalue
                ));
                ok = false;
            }
        }
        Err(e) => {
            loaded.report.failures.push(e.to_string());
            ok = false;
        }
    }
    ok
}

struct Assembled {
    col: Colligation,
    ds: DefectSpaces,
    coupling: PartitionedUnitary,
}

fn assemble(loaded: &mut Loaded) -> Result<Assembled, ()> {
    let col = match build_colligation(&loaded.data, &loaded.tol) {
        Ok(c) => c,
        Err(e) => {
            loaded.report.failures.push(e.to_string());
            return Err(());
        }
    };
    let ds = defect_spaces(&col);
    loaded.report.defects = Some(DefectInfo {
        mu: ds.mu(),
        nu: ds.nu(),
    });
    let coupling = match coupling_unitary(&col, &ds, &loaded.tol) {
        Ok(c) => c,
        Err(e) => {
            loaded.report.failures.push(e.to_string());
            return Err(());
        }
    };
    Ok(Assembled { col, ds, coupling })
}

fn run_check(file: &Path, opts: &CommonOpts) -> Result<Report, CliFailure> {
    let mut loaded = load(file, opts)?;
    let ok = gate(&mut loaded);
    if ok {
        // Defect dimensions are part of the check report when available.
        let _ = assemble(&mut loaded);
    }
    let pass = ok && loaded.report.failures.is_empty();
    loaded.report.verdict = if pass { "pass" } else { "fail" };
    Ok(loaded.report)
}

fn run_coeffs(file: &Path, opts: &CommonOpts) -> Result<Report, CliFailure> {
    let grid = parse_grid(opts)?;
    let mut loaded = load(file, opts)?;
    if !gate(&mut loaded) {
        return Err(CliFailure::Math(Box::new(loaded.report)));
    }
    let Ok(assembled) = assemble(&mut loaded) else {
        return Err(CliFailure::Math(Box::new(loaded.report)));
    };
    let mut out = Vec::new();
    for zeta in grid_points(&grid.radii, grid.nodes) {
        match coefficient_matrix(&assembled.coupling, &assembled.ds, zeta) {
            Ok(blocks) => out.push(CoefficientOut {
                at: io::from_complex(zeta),
                s11: io::emit_matrix(&blocks.s11),
                s12: io::emit_matrix(&blocks.s12),
                s21: io::emit_matrix(&blocks.s21),
                s22: io::emit_matrix(&blocks.s22),
            }),
            Err(e) => {
                loaded.report.failures.push(format!("at ζ = {zeta}: {e}"));
            }
        }
    }
    loaded.report.coefficients = Some(out);
    loaded.report.verdict = if loaded.report.failures.is_empty() {
        "pass"
    } else {
        "fail"
    };
    Ok(loaded.report)
}

fn run_solve(
    file: &Path,
    epsilon: Option<&Path>,
    opts: &CommonOpts,
) -> Result<Report, CliFailure> {
    let grid = parse_grid(opts)?;
    let mut loaded = load(file, opts)?;
    if !gate(&mut loaded) {
        return Err(CliFailure::Math(Box::new(loaded.report)));
    }
    let Ok(assembled) = assemble(&mut loaded) else {
        return Err(CliFailure::Math(Box::new(loaded.report)));
    };
    let (mu, nu) = (assembled.ds.mu(), assembled.ds.nu());

    let (parameter, description) = match epsilon {
        None => match SchurParameter::zero(mu, nu, &loaded.tol) {
            Ok(p) => (p, "central".to_string()),
            Err(e) => {
                loaded.report.failures.push(e.to_string());
                return Err(CliFailure::Math(Box::new(loaded.report)));
            }
        },
        Some(path) => {
            let bytes = std::fs::read(path).map_err(|e| {
                CliFailure::Format(format!("cannot read {}: {e}", path.display()))
            })?;
            let parsed: io::EpsilonFile = serde_json::from_slice(&bytes)
                .map_err(|e| CliFailure::Format(format!("{}: {e}", path.display())))?;
            match io::realize_epsilon(&parsed, mu, nu, grid.seed, &loaded.tol)
                .map_err(CliFailure::Format)?
            {
                Ok(pair) => pair,
                Err(math) => {
                    loaded.report.failures.push(math);
                    return Err(CliFailure::Math(Box::new(loaded.report)));
                }
            }
        }
    };
    loaded.report.solution = Some(SolutionRecord {
        parameter: description,
        seed: grid.seed,
    });

    let solution = SolutionEvaluator::Coefficients {
        coupling: assembled.coupling.clone(),
        ds: assembled.ds.clone(),
        parameter: parameter.clone(),
        inv_tol: loaded.tol.inv_tol,
    };

    // Grid samples.
    let mut samples = Vec::new();
    for zeta in grid_points(&grid.radii, grid.nodes) {
        match solution.eval(zeta) {
            Ok(v) => samples.push(SampleOut {
                at: io::from_complex(zeta),
                value: io::emit_matrix(&v),
            }),
            Err(e) => loaded
                .report
                .failures
                .push(format!("evaluation failed at ζ = {zeta}: {e}")),
        }
    }
    loaded.report.samples = Some(samples);

    // Verification record, including the extension cross-check.
    let extension =
        match unitary_extension(&assembled.col, &assembled.ds, &parameter, &loaded.tol) {
            Ok(ext) => Some(ext),
            Err(e) => {
                loaded.report.failures.push(e.to_string());
                None
            }
        };
    let checks = run_checks(
        &mut loaded,
        &solution,
        extension.as_ref().map(|ext| (ext, &assembled)),
        &grid.radii,
    );
    let pass = checks_pass(&checks) && loaded.report.failures.is_empty();
    loaded.report.checks = Some(checks);
    loaded.report.verdict = if pass { "pass" } else { "fail" };
    Ok(loaded.report)
}

fn run_verify(file: &Path, candidate: &Path, opts: &CommonOpts) -> Result<Report, CliFailure> {
    let grid = parse_grid(opts)?;
    let mut loaded = load(file, opts)?;
    if !gate(&mut loaded) {
        return Err(CliFailure::Math(Box::new(loaded.report)));
    }
    let bytes = std::fs::read(candidate).map_err(|e| {
        CliFailure::Format(format!("cannot read {}: {e}", candidate.display()))
    })?;
    let parsed: io::CandidateFile = serde_json::from_slice(&bytes)
        .map_err(|e| CliFailure::Format(format!("{}: {e}", candidate.display())))?;
    let (evaluator, label) =
        match io::realize_candidate(&parsed, loaded.tol.spec_tol, loaded.tol.eval_tol)
            .map_err(CliFailure::Format)?
        {
            Ok(pair) => pair,
            Err(math) => {
                loaded.report.failures.push(math);
                return Err(CliFailure::Math(Box::new(loaded.report)));
            }
        };
    let (q, p) = evaluator.dims();
    if (q, p) != (loaded.data.q(), loaded.data.p()) {
        loaded.report.failures.push(format!(
            "candidate maps {p} -> {q}, data expects {} -> {}",
            loaded.data.p(),
            loaded.data.q()
        ));
        return Err(CliFailure::Math(Box::new(loaded.report)));
    }
    loaded.report.solution = Some(SolutionRecord {
        parameter: format!("candidate:{label}"),
        seed: None,
    });
    let checks = run_checks(&mut loaded, &evaluator, None, &grid.radii);
    let pass = checks_pass(&checks) && loaded.report.failures.is_empty();
    loaded.report.checks = Some(checks);
    loaded.report.verdict = if pass { "pass" } else { "fail" };
    Ok(loaded.report)
}

fn checks_pass(checks: &ChecksRecord) -> bool {
    let grid_ok = |c: &Option<GridCheck>| c.as_ref().map(|g| g.pass).unwrap_or(false);
    grid_ok(&checks.fmi)
        && grid_ok(&checks.fmi_prime)
        && checks
            .contractivity
            .as_ref()
            .map(|g| g.pass)
            .unwrap_or(true)
        && checks
            .ks_bound
            .as_ref()
            .map(|k| k.pass)
            .unwrap_or(true)
}

/// Run the verification battery for one candidate. Checks that cannot run
/// for the given evaluator kind are recorded in `skipped`. Hard failures
/// (violated bounds) are appended to the report failures.
fn run_checks(
    loaded: &mut Loaded,
    evaluator: &SolutionEvaluator,
    extension: Option<(&PartitionedUnitary, &Assembled)>,
    radii: &[f64],
) -> ChecksRecord {
    let tol = loaded.tol.clone();
    let data = loaded.data.clone();
    let mut skipped = Vec::new();

    // Evaluation nodes: sample points for sampled candidates, otherwise a
    // 16-node grid per radius. Interior radii are added so violations
    // confined to a small disk are not missed.
    let nodes: Vec<Complex64> = match evaluator {
        SolutionEvaluator::Samples { points, .. } => {
            points.iter().copied().filter(|z| z.norm() < 1.0).collect()
        }
        _ => {
            let mut check_radii = vec![0.2, 0.35];
            check_radii.extend_from_slice(radii);
            check_radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
            check_radii.dedup();
            grid_points(&check_radii, 16)
        }
    };

    let mut fmi_worst = 0.0f64;
    let mut fmi_prime_worst = 0.0f64;
    let mut fmi_pass = true;
    let mut fmi_prime_pass = true;
    let mut contr_worst = 0.0f64;
    let mut used_nodes = 0usize;
    for &zeta in &nodes {
        match (
            fmi_check(&data, evaluator, zeta, tol.psd_tol),
            fmi_prime_check(&data, evaluator, zeta, tol.psd_tol),
        ) {
            (Ok(a), Ok(b)) => {
                used_nodes += 1;
                fmi_worst = fmi_worst.max(-a.min_eigenvalue);
                fmi_prime_worst = fmi_prime_worst.max(-b.min_eigenvalue);
                if a.min_eigenvalue < -FMI_EIG_FLOOR {
                    fmi_pass = false;
                }
                if b.min_eigenvalue < -FMI_EIG_FLOOR {
                    fmi_prime_pass = false;
                }
            }
            (Err(e), _) | (_, Err(e)) => {
                loaded
                    .report
                    .failures
                    .push(format!("FMI evaluation failed at ζ = {zeta}: {e}"));
                fmi_pass = false;
                fmi_prime_pass = false;
            }
        }
        if let Ok(v) = evaluator.eval(zeta) {
            contr_worst = contr_worst.max((spectral_norm(&v) - 1.0).max(0.0));
        }
    }
    if !fmi_pass {
        loaded.report.failures.push(format!(
            "fundamental matrix inequality violated: worst eigenvalue deficit {fmi_worst:.3e}"
        ));
    }
    if !fmi_prime_pass {
        loaded.report.failures.push(format!(
            "mirrored matrix inequality violated: worst eigenvalue deficit {fmi_prime_worst:.3e}"
        ));
    }
    let contr_pass = contr_worst <= tol.eval_tol;
    if !contr_pass {
        loaded.report.failures.push(format!(
            "candidate is not contractive on the grid: worst excess {contr_worst:.3e}"
        ));
    }

    // Interpolation conditions.
    let interpolation_residual = match &loaded.problem {
        io::Problem::NevanlinnaPick(np) => {
            match interpolation_check(&InterpolationProblem::NevanlinnaPick(np), evaluator) {
                Ok(r) => {
                    if r > tol.res_tol {
                        loaded
                            .report
                            .failures
                            .push(format!("interpolation residual {r:.3e}"));
                    }
                    Some(r)
                }
                Err(VerificationError::Scattering(ScatteringError::NotSampled { .. })) => {
                    loaded
                        .report
                        .failures
                        .push("candidate samples do not cover the interpolation nodes".into());
                    None
                }
                Err(e) => {
                    loaded.report.failures.push(e.to_string());
                    None
                }
            }
        }
        io::Problem::Sarason(sar) => {
            if matches!(evaluator, SolutionEvaluator::Samples { .. }) {
                skipped.push(
                    "interpolation check needs a disk-evaluable candidate (samples given)"
                        .to_string(),
                );
                None
            } else {
                match interpolation_check(&InterpolationProblem::Sarason(sar), evaluator) {
                    Ok(r) => {
                        if r > KS_BOUND_MARGIN {
                            loaded
                                .report
                                .failures
                                .push(format!("model-space projection residual {r:.3e}"));
                        }
                        Some(r)
                    }
                    Err(e) => {
                        loaded.report.failures.push(e.to_string());
                        None
                    }
                }
            }
        }
        io::Problem::Raw { .. } => {
            skipped.push("interpolation check undefined for raw data".to_string());
            None
        }
    };

    // Model-space norm bound for all basis vectors.
    let ks_bound = if matches!(evaluator, SolutionEvaluator::Samples { .. }) {
        skipped.push("model-space norm bound needs a disk-evaluable candidate".to_string());
        None
    } else {
        let spec = QuadratureSpec::default();
        let mut worst_margin = f64::NEG_INFINITY;
        let mut regularized = 0usize;
        let mut pass = true;
        for j in 0..data.n() {
            let x = CVector::from_fn(data.n(), |i, _| {
                if i == j {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let result = ks_norm_quadrature(
                evaluator,
                |zeta| {
                    let v = f_transform_eval(&data, evaluator, &x, zeta, tol.spec_tol)?;
                    Ok((v.plus, v.minus))
                },
                &spec,
                tol.res_tol,
            );
            match result {
                Ok(rep) => {
                    let dxx = (data.d() * &x)
                        .iter()
                        .zip(x.iter())
                        .map(|(a, b)| (b.conj() * a).re)
                        .sum::<f64>();
                    let margin = rep.value - dxx;
                    worst_margin = worst_margin.max(margin);
                    regularized += rep.regularized_nodes;
                    if margin > KS_BOUND_MARGIN || !rep.is_member() {
                        pass = false;
                    }
                }
                Err(e) => {
                    loaded
                        .report
                        .failures
                        .push(format!("norm-bound quadrature failed: {e}"));
                    pass = false;
                }
            }
        }
        if !pass {
            loaded.report.failures.push(format!(
                "model-space norm bound violated: worst margin {worst_margin:+.3e}"
            ));
        }
        Some(KsBound {
            worst_margin,
            regularized_nodes: regularized,
            pass,
        })
    };

    // Extension cross-check when the solution came from a parameter.
    let extension_vs_lft = extension.map(|(ext, assembled)| {
        let mut worst = 0.0f64;
        if let SolutionEvaluator::Coefficients { parameter, .. } = evaluator {
            for zeta in grid_points(radii, 8) {
                let via_ext = scattering_eval(ext, zeta);
                let blocks = coefficient_matrix(&assembled.coupling, &assembled.ds, zeta);
                if let (Ok(a), Ok(b)) = (via_ext, blocks) {
                    if let Ok(eps_val) = parameter.eval(zeta) {
                        if let Ok(via_lft) = lft_apply(&b, &eps_val, tol.inv_tol) {
                            worst = worst.max((a - via_lft).norm());
                        }
                    }
                }
            }
        }
        if worst > tol.res_tol {
            loaded.report.failures.push(format!(
                "extension and linear-fractional routes disagree by {worst:.3e}"
            ));
        }
        worst
    });

    ChecksRecord {
        fmi: Some(GridCheck {
            nodes: used_nodes,
            worst: fmi_worst,
            pass: fmi_pass,
        }),
        fmi_prime: Some(GridCheck {
            nodes: used_nodes,
            worst: fmi_prime_worst,
            pass: fmi_prime_pass,
        }),
        contractivity: Some(GridCheck {
            nodes: nodes.len(),
            worst: contr_worst,
            pass: contr_pass,
        }),
        interpolation_residual,
        ks_bound,
        extension_vs_lft,
        skipped,
    }
}
