//! Command-line front end: factorizations with JSON certificates, finite
//! ring exploration, and certificate replay.
//!
//! Exit codes: 0 success, 1 replay mismatch, 2 parse errors, 3 precondition
//! violations, 4 retries exhausted, 5 enumeration budget exceeded.

use clap::{Parser, Subcommand};
use commlab::cert::{self, CertFile};
use commlab::error::AlgebraError;
use commlab::factor;
use commlab::freealg;
use commlab::imagelab::{self, EnumerationMode, FiniteRingSpec};
use commlab::matrix::Matrix;
use commlab::scalar::{Scalar, ScalarDomain};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "commlab", version, about = "Commutator factorizations and polynomial-image exploration over division rings")]
struct Cli {
    /// Seed for all randomized retry steering.
    #[arg(long, global = true, env = "COMMLAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Float-domain comparison tolerance.
    #[arg(long, global = true, env = "COMMLAB_TOLERANCE", default_value_t = 1e-9)]
    tolerance: f64,
    /// Enumeration budget (substitution tuples).
    #[arg(long, global = true, default_value_t = 1u128 << 28)]
    budget: u128,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Output format: json or text.
    #[arg(long, global = true, default_value = "json")]
    format: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factorization certificates.
    Factor {
        #[command(subcommand)]
        op: FactorOp,
    },
    /// Finite-ring polynomial image exploration.
    Explore {
        #[command(subcommand)]
        op: ExploreOp,
    },
    /// Replay a certificate file.
    Verify { path: PathBuf },
}

#[derive(Subcommand)]
enum FactorOp {
    /// Product of two additive commutators over a field.
    TwoComm {
        /// Prime field size; rationals when omitted.
        #[arg(long)]
        field: Option<u64>,
        /// Matrix, rows ';'-separated, entries ','-separated.
        matrix: String,
    },
    /// Product of two additive commutators by the corner recursion.
    Qgtn {
        #[arg(long)]
        exact: bool,
        matrix: String,
    },
    /// Product of two additive commutators over the quaternions.
    QuatComm {
        #[arg(long)]
        exact: bool,
        matrix: String,
    },
    /// Skew-involution multiplicative commutators for SL_n(H).
    Skew { matrix: String },
    /// Difference of two special linear matrices.
    SlDiff {
        /// Domain: gf:p, rat, or quat-f64.
        #[arg(long, default_value = "rat")]
        domain: String,
        matrix: String,
    },
    /// Difference of two unit-norm quaternions.
    QuatDiff { scalar: String },
    /// The three explicit 2x2 product splittings.
    Waring2 {
        #[arg(long, default_value = "quat-rat")]
        domain: String,
        matrix: String,
    },
}

#[derive(Subcommand)]
enum ExploreOp {
    /// Image of a polynomial with its closures.
    Image {
        #[arg(long)]
        ring: String,
        poly: String,
    },
    /// The dichotomy classification on M_2(GF(2)).
    Dichotomy {
        #[arg(long)]
        ring: String,
        poly: String,
    },
    /// Polynomial-commutator span against the commutator span.
    Pcomm {
        #[arg(long)]
        ring: String,
        /// Univariate polynomial like "x^2" or "x^3+2*x".
        #[arg(long)]
        p: String,
    },
    /// Sum-length profile of a polynomial image's k-fold products.
    Sumlen {
        #[arg(long)]
        ring: String,
        #[arg(long, default_value_t = 2)]
        k: usize,
        poly: String,
    },
    /// Exhaustive low-degree polynomial sweep (CSV).
    Sweep {
        #[arg(long, default_value = "2x2@2")]
        ring: String,
        #[arg(long, default_value_t = 3)]
        max_deg: usize,
        #[arg(long, default_value_t = 2)]
        nvars: usize,
    },
}

#[derive(Serialize)]
struct RunConfig {
    seed: u64,
    tolerance: f64,
    budget: u128,
    format: String,
}

#[derive(Serialize)]
struct CertificateDocument {
    config: RunConfig,
    residual: f64,
    certificate: CertFile,
}

#[derive(Serialize)]
struct ReportDocument<T: Serialize> {
    config: RunConfig,
    report: T,
}

fn exit_code_for(err: &AlgebraError) -> u8 {
    use AlgebraError::*;
    match err {
        NormResidual { .. } => 1,
        SyntaxError { .. } | UnknownVariable { .. } | DomainMismatch(_) | ShapeMismatch(_)
        | BadCertificate(_) => 2,
        RetryExhausted { .. } => 4,
        BudgetExceeded { .. } => 5,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn run(cli: &Cli) -> Result<(), AlgebraError> {
    let config = RunConfig {
        seed: cli.seed,
        tolerance: cli.tolerance,
        budget: cli.budget,
        format: cli.format.clone(),
    };
    match &cli.command {
        Command::Factor { op } => run_factor(cli, &config, op),
        Command::Explore { op } => run_explore(cli, &config, op),
        Command::Verify { path } => run_verify(cli, path),
    }
}

fn quat_domain(cli: &Cli, exact: bool) -> ScalarDomain {
    if exact {
        ScalarDomain::QuaternionRational
    } else {
        ScalarDomain::QuaternionFloat(cli.tolerance)
    }
}

fn run_factor(cli: &Cli, config: &RunConfig, op: &FactorOp) -> Result<(), AlgebraError> {
    let (cert, tolerance) = match op {
        FactorOp::TwoComm { field, matrix } => {
            let domain = match field {
                Some(p) => ScalarDomain::prime_field(*p)?,
                None => ScalarDomain::Rational,
            };
            let a = Matrix::parse(matrix, domain)?;
            (factor::two_commutators_field(&a, cli.seed)?, 0.0)
        }
        FactorOp::Qgtn { exact, matrix } => {
            let domain = quat_domain(cli, *exact);
            let a = Matrix::parse(matrix, domain)?;
            let tol = if *exact { 0.0 } else { 1e-6 };
            (factor::q_gt_n_recursion(&a, cli.seed)?, tol)
        }
        FactorOp::QuatComm { exact, matrix } => {
            let domain = quat_domain(cli, *exact);
            let a = Matrix::parse(matrix, domain)?;
            let tol = if *exact { 0.0 } else { 1e-6 };
            (factor::two_commutators_quaternion(&a, cli.seed)?, tol)
        }
        FactorOp::Skew { matrix } => {
            let domain = ScalarDomain::QuaternionFloat(cli.tolerance);
            let a = Matrix::parse(matrix, domain)?;
            (factor::skew_commutators_sl(&a, cli.seed)?, 1e-6)
        }
        FactorOp::SlDiff { domain, matrix } => {
            let domain = ScalarDomain::parse(domain)?;
            let a = Matrix::parse(matrix, domain)?;
            let tol = if domain.is_exact() { 0.0 } else { 1e-6 };
            (factor::sl_difference(&a, cli.seed)?, tol)
        }
        FactorOp::QuatDiff { scalar } => {
            let domain = ScalarDomain::QuaternionFloat(cli.tolerance);
            let q = Scalar::parse(scalar, domain)?;
            let (u, v) = commlab::scalar::quat_diff_unit_norms(&q)?;
            let cert = factor::FactorizationCertificate {
                kind: "quat-diff-unit-norms".into(),
                input: Matrix::scalar_matrix(1, &q),
                parts: vec![
                    factor::Part::literal(Matrix::scalar_matrix(1, &u))
                        .with_flag(factor::PartFlag::SpecialLinear),
                    factor::Part::literal(Matrix::scalar_matrix(1, &v))
                        .with_flag(factor::PartFlag::SpecialLinear),
                ],
                replay_rule: factor::ReplayRule::Difference,
                seed: cli.seed,
            };
            (cert, 1e-9)
        }
        FactorOp::Waring2 { domain, matrix } => {
            let domain = ScalarDomain::parse(domain)?;
            let a = Matrix::parse(matrix, domain)?;
            let split = factor::waring_split_2x2(&a)?;
            let tol = if domain.is_exact() { 0.0 } else { 1e-6 };
            (split.certificate, tol)
        }
    };
    let residual = cert.verify(if tolerance == 0.0 { 1e-12 } else { tolerance })?;
    let file = cert::factorization_to_file(&cert, tolerance.max(1e-12));
    if cli.format == "text" {
        let mut lines = format!(
            "{}: {}x{} over {}, {} parts, residual {residual:.3e}\n",
            file.kind,
            cert.input.rows(),
            cert.input.cols(),
            file.domain,
            cert.parts.len()
        );
        for (idx, part) in cert.parts.iter().enumerate() {
            lines.push_str(&format!(
                "  part {idx}: {:?} with {} operands\n",
                part.tag,
                part.operands.len()
            ));
        }
        emit(cli, &lines)
    } else {
        let doc = CertificateDocument {
            config: RunConfig {
                seed: config.seed,
                tolerance: config.tolerance,
                budget: config.budget,
                format: config.format.clone(),
            },
            residual,
            certificate: file,
        };
        emit(cli, &serde_json::to_string_pretty(&doc).expect("serializable"))
    }
}

/// Parses a univariate polynomial like "x^3 + 2*x - 1" into ascending
/// coefficients.
fn parse_univariate(text: &str) -> Result<Vec<i64>, AlgebraError> {
    let mut coeffs: Vec<i64> = Vec::new();
    let mut set = |deg: usize, c: i64| {
        if coeffs.len() <= deg {
            coeffs.resize(deg + 1, 0);
        }
        coeffs[deg] += c;
    };
    let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let err = |msg: &str| AlgebraError::SyntaxError {
        offset: 0,
        message: format!("{msg} in univariate polynomial {text:?}"),
    };
    let mut rest = cleaned.as_str();
    let mut sign = 1i64;
    if let Some(r) = rest.strip_prefix('-') {
        sign = -1;
        rest = r;
    } else if let Some(r) = rest.strip_prefix('+') {
        rest = r;
    }
    while !rest.is_empty() {
        let end = rest
            .char_indices()
            .find(|(i, c)| *i > 0 && (*c == '+' || *c == '-'))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        let term = &rest[..end];
        // term := [int '*'] 'x' ['^' int] | int
        let (coeff, tail) = if let Some(star) = term.find('*') {
            let c: i64 = term[..star].parse().map_err(|_| err("bad coefficient"))?;
            (c, &term[star + 1..])
        } else if term.starts_with('x') {
            (1i64, term)
        } else {
            let c: i64 = term.parse().map_err(|_| err("bad constant"))?;
            set(0, sign * c);
            rest = &rest[end..];
            if let Some(r) = rest.strip_prefix('+') {
                rest = r;
                sign = 1;
            } else if let Some(r) = rest.strip_prefix('-') {
                rest = r;
                sign = -1;
            }
            continue;
        };
        let deg = if tail == "x" {
            1usize
        } else if let Some(e) = tail.strip_prefix("x^") {
            e.parse().map_err(|_| err("bad exponent"))?
        } else {
            return Err(err("expected x or x^k"));
        };
        set(deg, sign * coeff);
        rest = &rest[end..];
        if let Some(r) = rest.strip_prefix('+') {
            rest = r;
            sign = 1;
        } else if let Some(r) = rest.strip_prefix('-') {
            rest = r;
            sign = -1;
        }
    }
    if coeffs.is_empty() {
        return Err(err("empty polynomial"));
    }
    Ok(coeffs)
}

fn run_explore(cli: &Cli, config: &RunConfig, op: &ExploreOp) -> Result<(), AlgebraError> {
    match op {
        ExploreOp::Image { ring, poly } => {
            let mut spec = FiniteRingSpec::parse(ring)?;
            spec.budget = cli.budget;
            let domain = ScalarDomain::prime_field(spec.p)?;
            let f = freealg::parse_poly(poly, domain)?;
            let report =
                imagelab::image_report(&f, &spec, EnumerationMode::SampleOnOverflow(cli.seed))?;
            emit_report(cli, config, &report)
        }
        ExploreOp::Dichotomy { ring, poly } => {
            let spec = FiniteRingSpec::parse(ring)?;
            if spec.n != 2 || spec.p != 2 {
                return Err(AlgebraError::DomainMismatch(
                    "the dichotomy classification runs on 2x2@2".into(),
                ));
            }
            let domain = ScalarDomain::prime_field(2)?;
            let f = freealg::parse_poly(poly, domain)?;
            let report = imagelab::check_m2f2_dichotomies(&f)?;
            emit_report(cli, config, &report)
        }
        ExploreOp::Pcomm { ring, p } => {
            let mut spec = FiniteRingSpec::parse(ring)?;
            spec.budget = cli.budget;
            let coeffs = parse_univariate(p)?;
            let report = imagelab::p_commutator_set_check(&coeffs, &spec)?;
            emit_report(cli, config, &report)
        }
        ExploreOp::Sumlen { ring, k, poly } => {
            let mut spec = FiniteRingSpec::parse(ring)?;
            spec.budget = cli.budget;
            let domain = ScalarDomain::prime_field(spec.p)?;
            let f = freealg::parse_poly(poly, domain)?;
            let fr = imagelab::FiniteRing::new(spec)?;
            let (image, exhaustive) =
                imagelab::image_set(&fr, &f, &spec, EnumerationMode::ExhaustiveOnly)?;
            let (reaches, minimal_n) = imagelab::sum_length_profile(&fr, &image, *k);
            #[derive(Serialize)]
            struct SumLenReport {
                poly: String,
                ring: String,
                k: usize,
                exhaustive: bool,
                reaches_ring: bool,
                minimal_n: usize,
            }
            let report = SumLenReport {
                poly: f.to_string(),
                ring: spec.label(),
                k: *k,
                exhaustive,
                reaches_ring: reaches,
                minimal_n,
            };
            emit_report(cli, config, &report)
        }
        ExploreOp::Sweep {
            ring,
            max_deg,
            nvars,
        } => {
            let spec = FiniteRingSpec::parse(ring)?;
            if spec.n != 2 || spec.p != 2 {
                return Err(AlgebraError::DomainMismatch(
                    "the exhaustive sweep runs on 2x2@2".into(),
                ));
            }
            let reports = imagelab::sweep_m2f2_reports(*nvars, *max_deg)?;
            emit(cli, &imagelab::sweep_csv(&reports))
        }
    }
}

fn run_verify(cli: &Cli, path: &PathBuf) -> Result<(), AlgebraError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AlgebraError::BadCertificate(format!("cannot read {path:?}: {e}")))?;
    // accept both bare certificates and wrapped documents
    let file: CertFile = match cert::from_json(&text) {
        Ok(f) => f,
        Err(_) => {
            #[derive(serde::Deserialize)]
            struct Wrapped {
                certificate: CertFile,
            }
            let wrapped: Wrapped = serde_json::from_str(&text)
                .map_err(|e| AlgebraError::BadCertificate(e.to_string()))?;
            wrapped.certificate
        }
    };
    let residual = cert::replay_file(&file)?;
    emit(
        cli,
        &format!("ok: {} replays with residual {residual:.3e}\n", file.kind),
    )
}

fn emit_report<T: Serialize>(cli: &Cli, config: &RunConfig, report: &T) -> Result<(), AlgebraError> {
    if cli.format == "text" {
        emit(cli, &format!("{}\n", serde_json::to_string(report).unwrap()))
    } else {
        let doc = ReportDocument {
            config: RunConfig {
                seed: config.seed,
                tolerance: config.tolerance,
                budget: config.budget,
                format: config.format.clone(),
            },
            report,
        };
        emit(cli, &serde_json::to_string_pretty(&doc).unwrap())
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), AlgebraError> {
    match &cli.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| AlgebraError::BadCertificate(format!("cannot write {path:?}: {e}"))),
        None => {
            use std::io::Write;
            // tolerate a closed pipe (e.g. piping into head)
            let _ = writeln!(std::io::stdout(), "{text}");
            Ok(())
        }
    }
}
