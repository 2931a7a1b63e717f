//! Four-layer persistent memory: distilled axioms (L0), the per-dimension
//! skill profile (L1), the hash-chained append-only episode log (L2), and
//! the scenario library (L3), plus the axiom promotion/decay lifecycle.
//!
//! # State directory layout
//!
//! ```text
//! <state>/
//! ├── axioms.json     # L0 axioms + lifecycle bookkeeping + expected log head
//! ├── profile.json    # L1 skill profile
//! ├── episodes.log    # L2, one hash-chained record per line
//! ├── scenarios/      # L3, one scenario document per file
//! ├── soul.md         # rendered axiom export (view, not source of truth)
//! └── .lock           # advisory single-writer lock
//! ```

mod acp;
mod log;
mod store;

pub use acp::{AcpEvent, AcpPolicy};
pub use log::{
    verify_chain, AdminEventKind, AdminRecord, ChainDigest, ChainVerification, Episode,
    EpisodeDraft, EpisodeLog, LogRecord, LOG_HEADER,
};
pub use store::{MemoryStore, StateSnapshot, AXIOMS_FILE, LOCK_FILE, LOG_FILE, PROFILE_FILE, SCENARIOS_DIR, SOUL_FILE};

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taxonomy::DimensionId;

/// Hard cap on the number of distilled axioms held at any time.
pub const AXIOM_CAP: usize = 10;

#[derive(Debug, Error)]
pub enum MemoryError {
    #[error("storage error on {path}: {source}")]
    Storage {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("not found: {0}")]
    NotFound(PathBuf),
    #[error("state directory is locked: {0}")]
    Locked(PathBuf),
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("format error: {0}")]
    Format(String),
}

impl MemoryError {
    fn storage(path: &std::path::Path, source: std::io::Error) -> MemoryError {
        MemoryError::Storage {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// L1: the 12-dimension score vector plus training-intensity bookkeeping.
///
/// Every dimension is always present; scores live on a 0-100 scale; `tau`
/// (total completed sessions) always equals the sum of the per-dimension
/// session counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct SkillProfile {
    scores: BTreeMap<DimensionId, f64>,
    tau: u64,
    per_dim_sessions: BTreeMap<DimensionId, u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawProfile {
    scores: BTreeMap<DimensionId, f64>,
    tau: u64,
    per_dim_sessions: BTreeMap<DimensionId, u64>,
}

impl From<SkillProfile> for RawProfile {
    fn from(p: SkillProfile) -> RawProfile {
        RawProfile {
            scores: p.scores,
            tau: p.tau,
            per_dim_sessions: p.per_dim_sessions,
        }
    }
}

impl TryFrom<RawProfile> for SkillProfile {
    type Error = String;

    fn try_from(raw: RawProfile) -> Result<SkillProfile, String> {
        SkillProfile::from_parts(raw.scores, raw.per_dim_sessions).map_err(|e| e.to_string())
    }
}

impl SkillProfile {
    /// All dimensions at `score`, zero sessions.
    pub fn uniform(score: f64) -> SkillProfile {
        let score = score.clamp(0.0, 100.0);
        SkillProfile {
            scores: DimensionId::ALL.iter().map(|d| (*d, score)).collect(),
            tau: 0,
            per_dim_sessions: DimensionId::ALL.iter().map(|d| (*d, 0)).collect(),
        }
    }

    /// Build a profile from explicit parts, checking every invariant.
    pub fn from_parts(
        scores: BTreeMap<DimensionId, f64>,
        per_dim_sessions: BTreeMap<DimensionId, u64>,
    ) -> Result<SkillProfile, MemoryError> {
        for d in DimensionId::ALL {
            let score = scores.get(&d).ok_or_else(|| {
                MemoryError::ContractViolation(format!("profile is missing dimension {d}"))
            })?;
            if !(0.0..=100.0).contains(score) {
                return Err(MemoryError::ContractViolation(format!(
                    "score {score} for {d} outside [0,100]"
                )));
            }
            if !per_dim_sessions.contains_key(&d) {
                return Err(MemoryError::ContractViolation(format!(
                    "per_dim_sessions is missing dimension {d}"
                )));
            }
        }
        if scores.len() != 12 || per_dim_sessions.len() != 12 {
            return Err(MemoryError::ContractViolation(
                "profile must cover exactly the 12 dimensions".into(),
            ));
        }
        let tau = per_dim_sessions.values().sum();
        Ok(SkillProfile {
            scores,
            tau,
            per_dim_sessions,
        })
    }

    pub fn score(&self, d: DimensionId) -> f64 {
        self.scores[&d]
    }

    pub fn scores(&self) -> &BTreeMap<DimensionId, f64> {
        &self.scores
    }

    /// Total completed training sessions (training intensity).
    pub fn tau(&self) -> u64 {
        self.tau
    }

    pub fn per_dim_sessions(&self) -> &BTreeMap<DimensionId, u64> {
        &self.per_dim_sessions
    }

    pub fn mean(&self) -> f64 {
        self.scores.values().sum::<f64>() / 12.0
    }

    /// Minimum score with its dimension (canonical order breaks ties).
    pub fn min_entry(&self) -> (DimensionId, f64) {
        let mut best = (DimensionId::S1, f64::INFINITY);
        for d in DimensionId::ALL {
            let s = self.scores[&d];
            if s < best.1 {
                best = (d, s);
            }
        }
        best
    }

    /// Record one completed session on `d`, replacing its score (clamped to
    /// the 0-100 scale) and advancing the session counters.
    pub fn record_session(&mut self, d: DimensionId, new_score: f64) {
        self.scores.insert(d, new_score.clamp(0.0, 100.0));
        *self.per_dim_sessions.get_mut(&d).unwrap() += 1;
        self.tau += 1;
    }
}

/// L0: one distilled security lesson.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axiom {
    /// Opaque identifier, derived from the lesson key digest.
    pub id: String,
    /// The lesson statement (normalized lesson-key text).
    pub statement: String,
    pub dimensions: BTreeSet<DimensionId>,
    pub confidence: f64,
    pub reinforcements: u64,
    pub created_at: u64,
    pub last_reinforced_at: u64,
}

impl Axiom {
    /// Opaque id for a lesson key: a short digest prefix.
    pub fn id_for_lesson(lesson_key: &str) -> String {
        let digest = ChainDigest::of(&[lesson_key.as_bytes()]);
        format!("ax-{}", &digest.to_hex()[..12])
    }
}

/// Render the axiom store as a human-readable document: header plus one
/// entry per axiom, ordered by descending confidence then id.
pub fn render_soul(axioms: &[Axiom]) -> String {
    let mut sorted: Vec<&Axiom> = axioms.iter().collect();
    sorted.sort_by(|a, b| {
        b.confidence
            .partial_cmp(&a.confidence)
            .unwrap()
            .then_with(|| a.id.cmp(&b.id))
    });
    let mut out = String::from("# Distilled security axioms\n\n");
    out.push_str(&format!("{} axiom(s).\n", sorted.len()));
    for axiom in sorted {
        let dims = axiom
            .dimensions
            .iter()
            .map(|d| d.as_str())
            .collect::<Vec<_>>()
            .join(", ");
        out.push_str(&format!(
            "\n## {} (confidence {:.2})\n\n- statement: {}\n- dimensions: {}\n- reinforcements: {}\n- created at session {}, last reinforced at session {}\n",
            axiom.id,
            axiom.confidence,
            axiom.statement,
            dims,
            axiom.reinforcements,
            axiom.created_at,
            axiom.last_reinforced_at,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_profile_holds_all_twelve_dimensions() {
        let p = SkillProfile::uniform(50.0);
        assert_eq!(p.scores().len(), 12);
        assert_eq!(p.tau(), 0);
        assert_eq!(p.mean(), 50.0);
    }

    #[test]
    fn from_parts_rejects_missing_dimensions_and_bad_scores() {
        let mut scores: BTreeMap<DimensionId, f64> =
            DimensionId::ALL.iter().map(|d| (*d, 50.0)).collect();
        let sessions: BTreeMap<DimensionId, u64> =
            DimensionId::ALL.iter().map(|d| (*d, 0)).collect();
        scores.remove(&DimensionId::E4);
        assert!(SkillProfile::from_parts(scores.clone(), sessions.clone()).is_err());
        scores.insert(DimensionId::E4, 101.0);
        assert!(SkillProfile::from_parts(scores, sessions).is_err());
    }

    #[test]
    fn tau_always_equals_session_sum() {
        let mut p = SkillProfile::uniform(50.0);
        p.record_session(DimensionId::S1, 60.0);
        p.record_session(DimensionId::S1, 70.0);
        p.record_session(DimensionId::E3, 55.0);
        assert_eq!(p.tau(), 3);
        assert_eq!(p.per_dim_sessions().values().sum::<u64>(), p.tau());
        assert_eq!(p.score(DimensionId::S1), 70.0);
    }

    #[test]
    fn record_session_clamps_scores() {
        let mut p = SkillProfile::uniform(50.0);
        p.record_session(DimensionId::S1, 120.0);
        assert_eq!(p.score(DimensionId::S1), 100.0);
        p.record_session(DimensionId::S1, -3.0);
        assert_eq!(p.score(DimensionId::S1), 0.0);
    }

    #[test]
    fn profile_serde_round_trip_preserves_structure() {
        let mut p = SkillProfile::uniform(72.5);
        p.record_session(DimensionId::O4, 81.25);
        let json = serde_json::to_string(&p).unwrap();
        let back: SkillProfile = serde_json::from_str(&json).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn profile_deserialization_enforces_invariants() {
        let bad = r#"{"scores":{"S1":150.0},"tau":0,"per_dim_sessions":{}}"#;
        assert!(serde_json::from_str::<SkillProfile>(bad).is_err());
    }

    #[test]
    fn soul_renders_descending_confidence() {
        let ax = |id: &str, conf: f64| Axiom {
            id: id.into(),
            statement: format!("lesson {id}"),
            dimensions: [DimensionId::S1].into_iter().collect(),
            confidence: conf,
            reinforcements: 0,
            created_at: 1,
            last_reinforced_at: 1,
        };
        let doc = render_soul(&[ax("ax-low", 0.5), ax("ax-high", 0.9)]);
        let high = doc.find("ax-high").unwrap();
        let low = doc.find("ax-low").unwrap();
        assert!(high < low);
        assert!(doc.starts_with("# Distilled security axioms"));
    }

    #[test]
    fn empty_soul_has_header_and_zero_entries() {
        let doc = render_soul(&[]);
        assert!(doc.contains("0 axiom(s)."));
        assert!(!doc.contains("##"));
    }

    #[test]
    fn a_full_store_renders_exactly_ten_entries() {
        let axioms: Vec<Axiom> = (0..super::AXIOM_CAP)
            .map(|i| Axiom {
                id: format!("ax-{i:02}"),
                statement: format!("lesson {i}"),
                dimensions: [DimensionId::S1].into_iter().collect(),
                confidence: 0.4 + i as f64 * 0.05,
                reinforcements: 0,
                created_at: 1,
                last_reinforced_at: 1,
            })
            .collect();
        let doc = render_soul(&axioms);
        assert!(doc.contains("10 axiom(s)."));
        assert_eq!(doc.matches("## ").count(), 10);
    }

    #[test]
    fn axiom_ids_are_stable_digests() {
        let a = Axiom::id_for_lesson("verify the sender");
        let b = Axiom::id_for_lesson("verify the sender");
        let c = Axiom::id_for_lesson("verify the recipient");
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.starts_with("ax-"));
    }

    #[test]
    fn min_entry_breaks_ties_canonically() {
        let p = SkillProfile::uniform(50.0);
        assert_eq!(p.min_entry().0, DimensionId::S1);
    }
}
