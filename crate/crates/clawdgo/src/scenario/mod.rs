//! Scenario machinery: the taxonomy-conformant scenario schema, document
//! validation, rule-based ingestion of structured threat-intelligence
//! records, and library coverage reporting.

mod coverage;
mod ingest;

pub mod corpus;

pub use coverage::{coverage_report, coverage_report_with_threshold, CoverageReport};
pub use ingest::{ingest_advisory, ingest_advisory_dir, AdvisoryRecord};

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taxonomy::DimensionId;

/// Currently supported scenario schema version.
pub const SCHEMA_VERSION: u32 = 1;

/// Weight sums are accepted within this absolute tolerance of 1.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Default bias-ratio threshold above which a library is flagged as biased.
pub const DEFAULT_BIAS_THRESHOLD: f64 = 3.0;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unparseable scenario document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid scenario in library: {file}: {details}")]
    Integrity { file: String, details: String },
    #[error("ingestion error: {0}")]
    Ingestion(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThreatClass {
    Threat,
    Benign,
}

/// One scored rubric item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RubricItem {
    pub item_id: String,
    pub description: String,
    pub weight: f64,
}

fn default_scale_max() -> f64 {
    100.0
}

fn default_refusal_score() -> f64 {
    30.0
}

/// A taxonomy-conformant threat exercise.
///
/// `scale_max` is scenario-local: benign capability assessments may score on
/// a wider scale (e.g. 160) and are normalised to 100 for profile updates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub schema_version: u32,
    pub dimension: DimensionId,
    pub title: String,
    pub difficulty: f64,
    pub threat_class: ThreatClass,
    pub narrative: String,
    pub attacker_objective: String,
    pub rubric: Vec<RubricItem>,
    pub lesson_template: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_ref: Option<String>,
    #[serde(default = "default_scale_max")]
    pub scale_max: f64,
    #[serde(default = "default_refusal_score")]
    pub refusal_score: f64,
}

impl Scenario {
    pub fn rubric_item(&self, item_id: &str) -> Option<&RubricItem> {
        self.rubric.iter().find(|i| i.item_id == item_id)
    }

    /// Rubric items in descending weight order; ties keep document order.
    pub fn rubric_by_weight(&self) -> Vec<&RubricItem> {
        let mut items: Vec<&RubricItem> = self.rubric.iter().collect();
        items.sort_by(|a, b| b.weight.partial_cmp(&a.weight).unwrap());
        items
    }
}

/// One rule violation found by [`validate_scenario`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub field: String,
    pub rule: String,
    pub message: String,
}

/// Result of validating one scenario document. `ok` iff `errors` is empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub id: String,
    pub ok: bool,
    pub errors: Vec<ValidationIssue>,
}

impl ValidationReport {
    fn from_issues(id: String, errors: Vec<ValidationIssue>) -> Self {
        ValidationReport {
            id,
            ok: errors.is_empty(),
            errors,
        }
    }
}

/// Loosely-typed document used so that domain violations (unknown dimension,
/// bad weights) surface as validation errors rather than parse errors.
#[derive(Debug, Deserialize)]
struct RawScenario {
    id: Option<String>,
    schema_version: Option<u32>,
    dimension: Option<String>,
    title: Option<String>,
    difficulty: Option<f64>,
    threat_class: Option<String>,
    narrative: Option<String>,
    attacker_objective: Option<String>,
    rubric: Option<Vec<RawRubricItem>>,
    lesson_template: Option<String>,
    // parsed for type-checking only; no validation rule applies
    #[serde(default)]
    #[allow(dead_code)]
    source_ref: Option<String>,
    #[serde(default)]
    scale_max: Option<f64>,
    #[serde(default)]
    refusal_score: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct RawRubricItem {
    item_id: Option<String>,
    description: Option<String>,
    weight: Option<f64>,
}

/// Validate a scenario document against every schema rule, reporting all
/// violations rather than stopping at the first.
///
/// A document that is not JSON at all is a parse error, distinct from a
/// validation failure.
pub fn validate_scenario(document: &str) -> Result<ValidationReport, ScenarioError> {
    let raw: RawScenario = serde_json::from_str(document)?;
    let mut errors = Vec::new();
    let mut issue = |field: &str, rule: &str, message: String| {
        errors.push(ValidationIssue {
            field: field.to_string(),
            rule: rule.to_string(),
            message,
        });
    };

    let id = raw.id.clone().unwrap_or_default();
    match &raw.id {
        Some(id) if !id.is_empty() => {}
        _ => issue("id", "required", "scenario id must be a non-empty string".into()),
    }

    match raw.schema_version {
        Some(SCHEMA_VERSION) => {}
        Some(v) => issue(
            "schema_version",
            "supported",
            format!("schema_version {v} is not supported (expected {SCHEMA_VERSION})"),
        ),
        None => issue("schema_version", "required", "schema_version missing".into()),
    }

    match raw.dimension.as_deref() {
        Some(d) if DimensionId::parse(d).is_some() => {}
        Some(d) => issue(
            "dimension",
            "known-dimension",
            format!("unknown dimension {d:?}"),
        ),
        None => issue("dimension", "required", "dimension missing".into()),
    }

    if raw.title.as_deref().unwrap_or("").is_empty() {
        issue("title", "required", "title must be non-empty".into());
    }

    match raw.difficulty {
        Some(d) if (0.0..=100.0).contains(&d) => {}
        Some(d) => issue(
            "difficulty",
            "range",
            format!("difficulty {d} outside [0,100]"),
        ),
        None => issue("difficulty", "required", "difficulty missing".into()),
    }

    match raw.threat_class.as_deref() {
        Some("threat") | Some("benign") => {}
        Some(c) => issue(
            "threat_class",
            "enum",
            format!("threat_class {c:?} is not one of threat|benign"),
        ),
        None => issue("threat_class", "required", "threat_class missing".into()),
    }

    if raw.narrative.as_deref().unwrap_or("").is_empty() {
        issue("narrative", "required", "narrative must be non-empty".into());
    }
    if raw.attacker_objective.as_deref().unwrap_or("").is_empty() {
        issue(
            "attacker_objective",
            "required",
            "attacker_objective must be non-empty".into(),
        );
    }
    if raw.lesson_template.as_deref().unwrap_or("").is_empty() {
        issue(
            "lesson_template",
            "required",
            "lesson_template must be non-empty".into(),
        );
    }

    match &raw.rubric {
        None => issue("rubric", "required", "rubric missing".into()),
        Some(items) if items.is_empty() => {
            issue("rubric", "non-empty", "rubric must have at least one item".into())
        }
        Some(items) => {
            let mut sum = 0.0;
            let mut seen = BTreeSet::new();
            for (i, item) in items.iter().enumerate() {
                match &item.item_id {
                    Some(id) if !id.is_empty() => {
                        if !seen.insert(id.clone()) {
                            issue(
                                "rubric",
                                "unique-item-ids",
                                format!("duplicate rubric item_id {id:?}"),
                            );
                        }
                    }
                    _ => issue(
                        "rubric",
                        "required",
                        format!("rubric item {i} is missing item_id"),
                    ),
                }
                if item.description.as_deref().unwrap_or("").is_empty() {
                    issue(
                        "rubric",
                        "required",
                        format!("rubric item {i} is missing description"),
                    );
                }
                match item.weight {
                    Some(w) if w > 0.0 => sum += w,
                    Some(w) => issue(
                        "rubric",
                        "positive-weights",
                        format!("rubric item {i} has non-positive weight {w}"),
                    ),
                    None => issue(
                        "rubric",
                        "required",
                        format!("rubric item {i} is missing weight"),
                    ),
                }
            }
            if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
                issue(
                    "rubric",
                    "weight-sum",
                    format!("rubric weights sum to {sum}, expected 1"),
                );
            }
        }
    }

    let scale_max = raw.scale_max.unwrap_or(100.0);
    if scale_max <= 0.0 {
        issue("scale_max", "range", format!("scale_max {scale_max} must be positive"));
    }
    let refusal_score = raw.refusal_score.unwrap_or(30.0);
    if !(0.0..=scale_max).contains(&refusal_score) {
        issue(
            "refusal_score",
            "range",
            format!("refusal_score {refusal_score} outside [0, {scale_max}]"),
        );
    }

    Ok(ValidationReport::from_issues(id, errors))
}

/// Parse and fully validate a document into a typed [`Scenario`].
pub fn parse_scenario(document: &str) -> Result<Scenario, ScenarioError> {
    let report = validate_scenario(document)?;
    if !report.ok {
        let details = report
            .errors
            .iter()
            .map(|e| format!("{} ({}): {}", e.field, e.rule, e.message))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(ScenarioError::Integrity {
            file: report.id,
            details,
        });
    }
    Ok(serde_json::from_str(document)?)
}

/// Load every `*.json` scenario document in a directory, sorted by file name.
///
/// Returns `(file_name, document_text)` pairs; validation is the caller's
/// choice so that invalid documents can be reported per file.
pub fn read_library_dir(dir: &Path) -> Result<Vec<(String, String)>, ScenarioError> {
    let entries = std::fs::read_dir(dir).map_err(|source| ScenarioError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut docs = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| ScenarioError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) == Some("json") {
            let text = std::fs::read_to_string(&path).map_err(|source| ScenarioError::Io {
                path: path.clone(),
                source,
            })?;
            let name = path
                .file_name()
                .and_then(|n| n.to_str())
                .unwrap_or_default()
                .to_string();
            docs.push((name, text));
        }
    }
    docs.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(docs)
}

/// Load and validate a whole library directory into typed scenarios.
pub fn load_library(dir: &Path) -> Result<Vec<Scenario>, ScenarioError> {
    let mut scenarios = Vec::new();
    for (file, text) in read_library_dir(dir)? {
        match parse_scenario(&text) {
            Ok(s) => scenarios.push(s),
            Err(ScenarioError::Integrity { details, .. }) => {
                return Err(ScenarioError::Integrity { file, details })
            }
            Err(ScenarioError::Parse(e)) => {
                return Err(ScenarioError::Integrity {
                    file,
                    details: format!("unparseable: {e}"),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(scenarios)
}

/// Normalise free text into a lesson key: lowercased, whitespace-collapsed.
pub fn normalize_lesson_key(text: &str) -> String {
    text.split_whitespace()
        .map(|w| w.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_doc() -> serde_json::Value {
        serde_json::json!({
            "id": "test-scenario",
            "schema_version": 1,
            "dimension": "S1",
            "title": "Test",
            "difficulty": 50.0,
            "threat_class": "threat",
            "narrative": "A narrative.",
            "attacker_objective": "An objective.",
            "rubric": [
                {"item_id": "a", "description": "first", "weight": 0.5},
                {"item_id": "b", "description": "second", "weight": 0.5}
            ],
            "lesson_template": "A lesson."
        })
    }

    #[test]
    fn minimal_document_is_valid() {
        let report = validate_scenario(&minimal_doc().to_string()).unwrap();
        assert!(report.ok, "{:?}", report.errors);
        assert!(report.errors.is_empty());
    }

    #[test]
    fn weight_sum_violation_is_reported() {
        let mut doc = minimal_doc();
        doc["rubric"][1]["weight"] = serde_json::json!(0.4);
        let report = validate_scenario(&doc.to_string()).unwrap();
        assert!(!report.ok);
        assert!(report.errors.iter().any(|e| e.rule == "weight-sum"));
    }

    #[test]
    fn unknown_dimension_is_a_validation_error_not_a_parse_error() {
        let mut doc = minimal_doc();
        doc["dimension"] = serde_json::json!("S9");
        let report = validate_scenario(&doc.to_string()).unwrap();
        assert!(!report.ok);
        assert!(report.errors.iter().any(|e| e.rule == "known-dimension"));
    }

    #[test]
    fn garbage_is_a_parse_error() {
        assert!(matches!(
            validate_scenario("not json at all {"),
            Err(ScenarioError::Parse(_))
        ));
    }

    #[test]
    fn all_violations_are_reported_not_just_the_first() {
        let mut doc = minimal_doc();
        doc["dimension"] = serde_json::json!("S9");
        doc["difficulty"] = serde_json::json!(150.0);
        doc["rubric"][0]["weight"] = serde_json::json!(-0.5);
        let report = validate_scenario(&doc.to_string()).unwrap();
        assert!(report.errors.len() >= 3, "{:?}", report.errors);
    }

    #[test]
    fn duplicate_rubric_ids_are_rejected() {
        let mut doc = minimal_doc();
        doc["rubric"][1]["item_id"] = serde_json::json!("a");
        let report = validate_scenario(&doc.to_string()).unwrap();
        assert!(report.errors.iter().any(|e| e.rule == "unique-item-ids"));
    }

    #[test]
    fn refusal_score_must_fit_the_scale() {
        let mut doc = minimal_doc();
        doc["threat_class"] = serde_json::json!("benign");
        doc["scale_max"] = serde_json::json!(160.0);
        doc["refusal_score"] = serde_json::json!(200.0);
        let report = validate_scenario(&doc.to_string()).unwrap();
        assert!(report.errors.iter().any(|e| e.field == "refusal_score"));
    }

    #[test]
    fn validation_is_pure() {
        let doc = minimal_doc().to_string();
        assert_eq!(
            validate_scenario(&doc).unwrap(),
            validate_scenario(&doc).unwrap()
        );
    }

    #[test]
    fn parse_scenario_round_trips_defaults() {
        let s = parse_scenario(&minimal_doc().to_string()).unwrap();
        assert_eq!(s.scale_max, 100.0);
        assert_eq!(s.refusal_score, 30.0);
        assert_eq!(s.dimension, DimensionId::S1);
    }

    #[test]
    fn lesson_key_normalisation_collapses_whitespace_and_case() {
        assert_eq!(
            normalize_lesson_key("  Verify   the SENDER\nbefore acting "),
            "verify the sender before acting"
        );
    }

    #[test]
    fn rubric_by_weight_sorts_descending() {
        let mut doc = minimal_doc();
        doc["rubric"] = serde_json::json!([
            {"item_id": "a", "description": "x", "weight": 0.2},
            {"item_id": "b", "description": "y", "weight": 0.5},
            {"item_id": "c", "description": "z", "weight": 0.3}
        ]);
        let s = parse_scenario(&doc.to_string()).unwrap();
        let order: Vec<&str> = s.rubric_by_weight().iter().map(|i| i.item_id.as_str()).collect();
        assert_eq!(order, vec!["b", "c", "a"]);
    }
}
