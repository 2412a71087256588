use std::collections::BTreeSet;

use num_rational::BigRational;
use serde_json::{json, Value};

use super::constraint::Constraint;
use super::margin::{check_c1, MarginReport, MarginTerm};
use super::scan::{scan, ScanOptions, Violation};
use crate::dyadic::{cube_count, cube_of_point};
use crate::error::{Error, Result};
use crate::point::{FinitePointSet, PointSetDoc};
use crate::scalar::parse_rational;

/// A level-n configuration with one point per dyadic cube, its certified
/// margin and the constraint it avoids.
#[derive(Debug, Clone, PartialEq)]
pub struct AvoidanceCertificate {
    pub level: u32,
    pub dim: usize,
    pub seed: u64,
    pub constraint: Constraint,
    pub tau: f64,
    pub gamma: FinitePointSet,
    pub margin: MarginReport,
    /// Tuples scanned by the exact check at generation time.
    pub tuples_checked: u64,
}

impl AvoidanceCertificate {
    pub fn epsilon(&self) -> &BigRational {
        &self.margin.epsilon
    }

    pub fn to_json(&self) -> String {
        let m = &self.margin;
        let v = json!({
            "level": self.level,
            "dim": self.dim,
            "seed": self.seed,
            "constraint": self.constraint.to_json(),
            "tau": self.tau,
            "margin": m.epsilon.to_string(),
            "margin_float": m.epsilon_f64(),
            "gamma": self.gamma.to_doc(),
            "verification": {
                "boundary_term": m.boundary_term.to_string(),
                "terms": m.terms,
                "min_pair_gap": m.min_pair_gap,
                "min_tuple_gap": m.min_tuple_gap,
                "tiny_margin": m.tiny,
                "tuples_checked": self.tuples_checked,
                "exact_scan_clean": true,
            }
        });
        serde_json::to_string_pretty(&v).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<AvoidanceCertificate> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("certificate JSON: {e}")))?;
        let field = |name: &str| v.get(name).ok_or_else(|| Error::Invalid(format!("certificate field {name:?} missing")));
        let level = field("level")?.as_u64().ok_or_else(|| Error::Invalid("level".into()))? as u32;
        let dim = field("dim")?.as_u64().ok_or_else(|| Error::Invalid("dim".into()))? as usize;
        let seed = field("seed")?.as_u64().unwrap_or(0);
        let constraint = Constraint::from_json(field("constraint")?)?;
        let tau = field("tau")?.as_f64().unwrap_or(0.0);
        let epsilon = parse_rational(field("margin")?.as_str().ok_or_else(|| Error::Invalid("margin".into()))?)?;
        let doc: PointSetDoc =
            serde_json::from_value(field("gamma")?.clone()).map_err(|e| Error::Invalid(format!("gamma: {e}")))?;
        let gamma = doc.into_set()?;
        let ver = field("verification")?;
        let boundary_term = ver
            .get("boundary_term")
            .and_then(Value::as_str)
            .map(parse_rational)
            .transpose()?
            .unwrap_or_else(|| epsilon.clone());
        let terms: Vec<MarginTerm> = ver
            .get("terms")
            .map(|t| serde_json::from_value(t.clone()))
            .transpose()
            .map_err(|e| Error::Invalid(format!("terms: {e}")))?
            .unwrap_or_default();
        let margin = MarginReport {
            epsilon,
            boundary_term,
            terms,
            min_pair_gap: ver.get("min_pair_gap").and_then(Value::as_f64).unwrap_or(0.0),
            min_tuple_gap: ver.get("min_tuple_gap").and_then(Value::as_f64),
            tiny: ver.get("tiny_margin").and_then(Value::as_bool).unwrap_or(false),
        };
        let tuples_checked = ver.get("tuples_checked").and_then(Value::as_u64).unwrap_or(0);
        Ok(AvoidanceCertificate { level, dim, seed, constraint, tau, gamma, margin, tuples_checked })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    /// Points are in bijection with the level-n cubes.
    pub one_per_cube: bool,
    /// First point whose cube boundary is within `eps`, if any.
    pub c1_failure: Option<usize>,
    pub violation: Option<Violation>,
    pub tuples: u64,
}

impl VerifyReport {
    pub fn clean(&self) -> bool {
        self.one_per_cube && self.c1_failure.is_none() && self.violation.is_none()
    }
}

/// Re-runs the cube bijection, the exact C1 check and the exhaustive
/// violation scan on a certificate.
pub fn verify_certificate(cert: &AvoidanceCertificate, tol: f64, jobs: usize) -> Result<VerifyReport> {
    let gamma = &cert.gamma;
    if gamma.dim() != cert.dim {
        return Err(Error::DimensionMismatch { expected: cert.dim, found: gamma.dim() });
    }
    let mut cubes = BTreeSet::new();
    let mut interior = true;
    for p in gamma.points() {
        if !p.in_unit_cube() {
            interior = false;
            break;
        }
        cubes.insert(cube_of_point(p, cert.level)?);
    }
    let one_per_cube =
        interior && cubes.len() == gamma.len() && gamma.len() as u128 == cube_count(cert.level, cert.dim);
    let c1_failure = if interior { check_c1(gamma, cert.level, &cert.margin.epsilon)? } else { Some(0) };
    let report = scan(gamma, &cert.constraint, ScanOptions { tol, jobs, min_gap: false })?;
    Ok(VerifyReport { one_per_cube, c1_failure, violation: report.violation, tuples: report.tuples })
}
