//! JSON certificates: self-contained witnesses that replay without any
//! state from the producing run.
//!
//! Matrices serialize as arrays of rows of scalar strings (the CLI scalar
//! syntax), so certificates are human-readable and the float domain
//! round-trips exactly through the shortest-representation formatter.

use crate::error::{AlgebraError, Result};
use crate::factor::{FactorizationCertificate, Part, PartFlag, PartTag, ReplayRule};
use crate::canonical::SimilarityCertificate;
use crate::matrix::Matrix;
use crate::scalar::{Scalar, ScalarDomain};
use serde::{Deserialize, Serialize};

pub const FACTORIZATION_SCHEMA: &str = "factorization-v1";
pub const SIMILARITY_SCHEMA: &str = "similarity-v1";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartJson {
    pub tag: String,
    #[serde(default)]
    pub flags: Vec<String>,
    pub operands: Vec<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertFile {
    pub schema: String,
    pub kind: String,
    pub domain: String,
    pub seed: u64,
    pub tolerance: f64,
    pub input: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub replay_rule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub parts: Option<Vec<PartJson>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub conjugator: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub canonical: Option<Vec<Vec<String>>>,
}

pub fn matrix_to_rows(m: &Matrix) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m[(i, j)].to_string()).collect())
        .collect()
}

pub fn matrix_from_rows(rows: &[Vec<String>], domain: ScalarDomain) -> Result<Matrix> {
    let parsed: Result<Vec<Vec<Scalar>>> = rows
        .iter()
        .map(|row| row.iter().map(|s| Scalar::parse(s, domain)).collect())
        .collect();
    Matrix::from_rows(domain, parsed?)
}

fn tag_to_str(tag: PartTag) -> &'static str {
    match tag {
        PartTag::Commutator => "commutator",
        PartTag::MultCommutator => "mult-commutator",
        PartTag::Literal => "literal",
    }
}

fn tag_from_str(s: &str) -> Result<PartTag> {
    match s {
        "commutator" => Ok(PartTag::Commutator),
        "mult-commutator" => Ok(PartTag::MultCommutator),
        "literal" => Ok(PartTag::Literal),
        other => Err(AlgebraError::BadCertificate(format!("unknown part tag {other:?}"))),
    }
}

fn flag_to_str(flag: PartFlag) -> &'static str {
    match flag {
        PartFlag::Invertible => "invertible",
        PartFlag::SkewOperands => "skew-operands",
        PartFlag::SpecialLinear => "special-linear",
    }
}

fn flag_from_str(s: &str) -> Result<PartFlag> {
    match s {
        "invertible" => Ok(PartFlag::Invertible),
        "skew-operands" => Ok(PartFlag::SkewOperands),
        "special-linear" => Ok(PartFlag::SpecialLinear),
        other => Err(AlgebraError::BadCertificate(format!("unknown flag {other:?}"))),
    }
}

fn rule_to_str(rule: ReplayRule) -> &'static str {
    match rule {
        ReplayRule::Product => "product",
        ReplayRule::Difference => "difference",
        ReplayRule::ProductPairDifference => "product-pair-difference",
    }
}

fn rule_from_str(s: &str) -> Result<ReplayRule> {
    match s {
        "product" => Ok(ReplayRule::Product),
        "difference" => Ok(ReplayRule::Difference),
        "product-pair-difference" => Ok(ReplayRule::ProductPairDifference),
        other => Err(AlgebraError::BadCertificate(format!("unknown replay rule {other:?}"))),
    }
}

/// Serializes a factorization certificate with its verification tolerance.
pub fn factorization_to_file(cert: &FactorizationCertificate, tolerance: f64) -> CertFile {
    CertFile {
        schema: FACTORIZATION_SCHEMA.into(),
        kind: cert.kind.clone(),
        domain: cert.input.domain().to_string(),
        seed: cert.seed,
        tolerance,
        input: matrix_to_rows(&cert.input),
        replay_rule: Some(rule_to_str(cert.replay_rule).into()),
        parts: Some(
            cert.parts
                .iter()
                .map(|p| PartJson {
                    tag: tag_to_str(p.tag).into(),
                    flags: p.flags.iter().map(|f| flag_to_str(*f).to_string()).collect(),
                    operands: p.operands.iter().map(matrix_to_rows).collect(),
                })
                .collect(),
        ),
        conjugator: None,
        canonical: None,
    }
}

pub fn similarity_to_file(cert: &SimilarityCertificate, tolerance: f64) -> CertFile {
    CertFile {
        schema: SIMILARITY_SCHEMA.into(),
        kind: cert.kind.clone(),
        domain: cert.input.domain().to_string(),
        seed: 0,
        tolerance,
        input: matrix_to_rows(&cert.input),
        replay_rule: None,
        parts: None,
        conjugator: Some(matrix_to_rows(&cert.conjugator)),
        canonical: Some(matrix_to_rows(&cert.canonical)),
    }
}

/// Rebuilds the in-memory factorization certificate from a file.
pub fn factorization_from_file(file: &CertFile) -> Result<FactorizationCertificate> {
    let domain = ScalarDomain::parse(&file.domain)?;
    let input = matrix_from_rows(&file.input, domain)?;
    let rule = rule_from_str(
        file.replay_rule
            .as_deref()
            .ok_or_else(|| AlgebraError::BadCertificate("missing replay rule".into()))?,
    )?;
    let parts_json = file
        .parts
        .as_ref()
        .ok_or_else(|| AlgebraError::BadCertificate("missing parts".into()))?;
    let mut parts = Vec::with_capacity(parts_json.len());
    for pj in parts_json {
        let tag = tag_from_str(&pj.tag)?;
        let operands: Result<Vec<Matrix>> = pj
            .operands
            .iter()
            .map(|rows| matrix_from_rows(rows, domain))
            .collect();
        let mut part = Part {
            tag,
            operands: operands?,
            flags: vec![],
        };
        for f in &pj.flags {
            part.flags.push(flag_from_str(f)?);
        }
        parts.push(part);
    }
    Ok(FactorizationCertificate {
        kind: file.kind.clone(),
        input,
        parts,
        replay_rule: rule,
        seed: file.seed,
    })
}

/// Replays a certificate file from nothing but its own contents and returns
/// the replay residual. Factorizations recombine their parts by the stored
/// rule; similarity certificates recompute the conjugation.
pub fn replay_file(file: &CertFile) -> Result<f64> {
    match file.schema.as_str() {
        FACTORIZATION_SCHEMA => {
            let cert = factorization_from_file(file)?;
            cert.verify(file.tolerance)
        }
        SIMILARITY_SCHEMA => {
            let domain = ScalarDomain::parse(&file.domain)?;
            let input = matrix_from_rows(&file.input, domain)?;
            let conjugator = matrix_from_rows(
                file.conjugator
                    .as_ref()
                    .ok_or_else(|| AlgebraError::BadCertificate("missing conjugator".into()))?,
                domain,
            )?;
            let canonical = matrix_from_rows(
                file.canonical
                    .as_ref()
                    .ok_or_else(|| AlgebraError::BadCertificate("missing canonical".into()))?,
                domain,
            )?;
            let cert = SimilarityCertificate::new(&file.kind, input, conjugator, canonical);
            cert.verify()
        }
        other => Err(AlgebraError::BadCertificate(format!("unknown schema {other:?}"))),
    }
}

pub fn to_json(file: &CertFile) -> String {
    serde_json::to_string_pretty(file).expect("certificate serializes")
}

pub fn from_json(text: &str) -> Result<CertFile> {
    serde_json::from_str(text).map_err(|e| AlgebraError::BadCertificate(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::two_commutators_field;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn factorization_roundtrip() {
        let d = ScalarDomain::prime_field(5).unwrap();
        let mut rng = StdRng::seed_from_u64(2);
        let a = Matrix::random_gf(&mut rng, d, 2);
        let cert = two_commutators_field(&a, 9).unwrap();
        let file = factorization_to_file(&cert, 1e-6);
        let json = to_json(&file);
        let parsed = from_json(&json).unwrap();
        let residual = replay_file(&parsed).unwrap();
        assert_eq!(residual, 0.0);
        // determinism: serializing again is byte-identical
        assert_eq!(json, to_json(&parsed));
    }

    #[test]
    fn tampering_is_detected() {
        let d = ScalarDomain::prime_field(5).unwrap();
        let mut rng = StdRng::seed_from_u64(3);
        let a = Matrix::random_gf(&mut rng, d, 2);
        let cert = two_commutators_field(&a, 9).unwrap();
        let mut file = factorization_to_file(&cert, 1e-6);
        // perturb one operand entry
        file.parts.as_mut().unwrap()[0].operands[0][0][0] = "3".into();
        let outcome = replay_file(&file);
        assert!(outcome.is_err(), "tampered certificate must fail");
    }

    #[test]
    fn float_matrices_roundtrip_exactly() {
        let mut rng = StdRng::seed_from_u64(5);
        let a = Matrix::random_quat_f64(&mut rng, 3);
        let rows = matrix_to_rows(&a);
        let b = matrix_from_rows(&rows, a.domain()).unwrap();
        assert_eq!(a, b, "shortest-roundtrip formatting is exact");
    }

    #[test]
    fn similarity_roundtrip() {
        let q = ScalarDomain::Rational;
        let a = Matrix::from_i64(q, &[&[1, 1], &[0, 1]]);
        let cert = crate::canonical::rowen_form(&a).unwrap();
        let file = similarity_to_file(&cert, 0.0);
        let json = to_json(&file);
        let parsed = from_json(&json).unwrap();
        assert_eq!(replay_file(&parsed).unwrap(), 0.0);
    }
}
