//! Deterministic replay backend: stored role outputs, replayed verbatim by
//! scenario id. Used as test fixtures for the session engine.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::scenario::Scenario;

use super::{
    AgentBackend, AttackPayload, AttackSpec, BackendError, DefenseContext, DefenseResponse,
    Evaluation,
};

/// One stored attack/defense/evaluation triple. Field names mirror the
/// episode record; `scenario` is optional and only needed when the replay
/// backend must also serve the attacker role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub scenario_id: String,
    pub attack_summary: String,
    pub defense: DefenseResponse,
    pub defense_summary: String,
    pub evaluation: Evaluation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
}

/// Replays stored responses verbatim; unknown scenario ids are not found.
#[derive(Debug, Clone, Default)]
pub struct ReplayBackend {
    transcripts: BTreeMap<String, Transcript>,
}

impl ReplayBackend {
    pub fn new(transcripts: impl IntoIterator<Item = Transcript>) -> ReplayBackend {
        ReplayBackend {
            transcripts: transcripts
                .into_iter()
                .map(|t| (t.scenario_id.clone(), t))
                .collect(),
        }
    }

    /// Parse transcripts from `(id, document)` pairs.
    pub fn from_documents(docs: &[(&str, &str)]) -> Result<ReplayBackend, BackendError> {
        let mut transcripts = Vec::new();
        for (id, text) in docs {
            let t: Transcript = serde_json::from_str(text)
                .map_err(|e| BackendError::InvalidConfig(format!("transcript {id}: {e}")))?;
            transcripts.push(t);
        }
        Ok(ReplayBackend::new(transcripts))
    }

    /// Load every `*.json` transcript in a directory.
    pub fn from_dir(dir: &Path) -> Result<ReplayBackend, BackendError> {
        let entries = std::fs::read_dir(dir)
            .map_err(|e| BackendError::NotFound(format!("{}: {e}", dir.display())))?;
        let mut transcripts = Vec::new();
        for entry in entries {
            let path = entry
                .map_err(|e| BackendError::NotFound(format!("{}: {e}", dir.display())))?
                .path();
            if path.extension().and_then(|e| e.to_str()) == Some("json") {
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| BackendError::NotFound(format!("{}: {e}", path.display())))?;
                let t: Transcript = serde_json::from_str(&text).map_err(|e| {
                    BackendError::InvalidConfig(format!("{}: {e}", path.display()))
                })?;
                transcripts.push(t);
            }
        }
        Ok(ReplayBackend::new(transcripts))
    }

    /// The transcripts bundled with the crate (the two flagship cases).
    pub fn bundled() -> ReplayBackend {
        ReplayBackend::from_documents(crate::scenario::corpus::bundled_transcripts())
            .expect("bundled transcripts are valid")
    }

    pub fn transcript(&self, scenario_id: &str) -> Option<&Transcript> {
        self.transcripts.get(scenario_id)
    }

    fn lookup(&self, scenario_id: &str) -> Result<&Transcript, BackendError> {
        self.transcripts
            .get(scenario_id)
            .ok_or_else(|| BackendError::NotFound(format!("no transcript for {scenario_id:?}")))
    }
}

impl AgentBackend for ReplayBackend {
    fn attack(&mut self, spec: &AttackSpec) -> Result<AttackPayload, BackendError> {
        self.transcripts
            .values()
            .find_map(|t| {
                let scenario = t.scenario.clone()?;
                (scenario.dimension == spec.dimension).then_some(AttackPayload {
                    narrative: t.attack_summary.clone(),
                    scenario,
                })
            })
            .ok_or_else(|| {
                BackendError::NotFound(format!(
                    "no stored scenario for dimension {}",
                    spec.dimension
                ))
            })
    }

    fn defend(
        &mut self,
        scenario: &Scenario,
        _ctx: &DefenseContext<'_>,
    ) -> Result<DefenseResponse, BackendError> {
        Ok(self.lookup(&scenario.id)?.defense.clone())
    }

    fn evaluate(
        &mut self,
        scenario: &Scenario,
        _defense: &DefenseResponse,
    ) -> Result<Evaluation, BackendError> {
        Ok(self.lookup(&scenario.id)?.evaluation.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::corpus;

    fn scenario(id: &str) -> Scenario {
        corpus::bundled_corpus()
            .unwrap()
            .into_iter()
            .find(|s| s.id == id)
            .unwrap()
    }

    #[test]
    fn bundled_s3_transcript_scores_95() {
        let mut backend = ReplayBackend::bundled();
        let s = scenario("s3-skill-update-developer-id-hijack");
        let profile = crate::fixtures::seed_profile();
        let ctx = DefenseContext { profile: &profile, axioms: &[] };
        let defense = backend.defend(&s, &ctx).unwrap();
        let eval = backend.evaluate(&s, &defense).unwrap();
        assert_eq!(eval.score, 95.0);
        // replayed score equals 100x the credited weight sum
        assert!((eval.per_item.values().sum::<f64>() * 100.0 - 95.0).abs() < 1e-9);
    }

    #[test]
    fn bundled_o2_transcript_scores_98() {
        let mut backend = ReplayBackend::bundled();
        let s = scenario("o2-cfo-wire-authority-urgency");
        let profile = crate::fixtures::seed_profile();
        let ctx = DefenseContext { profile: &profile, axioms: &[] };
        let defense = backend.defend(&s, &ctx).unwrap();
        let eval = backend.evaluate(&s, &defense).unwrap();
        assert_eq!(eval.score, 98.0);
        assert!(!defense.refused);
    }

    #[test]
    fn unknown_scenario_id_is_not_found() {
        let mut backend = ReplayBackend::bundled();
        let mut s = scenario("o2-cfo-wire-authority-urgency");
        s.id = "zzz".into();
        let profile = crate::fixtures::seed_profile();
        let ctx = DefenseContext { profile: &profile, axioms: &[] };
        assert!(matches!(
            backend.defend(&s, &ctx),
            Err(BackendError::NotFound(_))
        ));
    }

    #[test]
    fn replay_is_bit_deterministic() {
        let mut a = ReplayBackend::bundled();
        let mut b = ReplayBackend::bundled();
        let s = scenario("s3-skill-update-developer-id-hijack");
        let profile = crate::fixtures::seed_profile();
        let ctx = DefenseContext { profile: &profile, axioms: &[] };
        for _ in 0..3 {
            assert_eq!(a.defend(&s, &ctx).unwrap(), b.defend(&s, &ctx).unwrap());
        }
    }

    #[test]
    fn transcripts_round_trip_through_files() {
        let dir = tempfile::tempdir().unwrap();
        for (id, text) in corpus::bundled_transcripts() {
            std::fs::write(dir.path().join(format!("{id}.json")), text).unwrap();
        }
        let backend = ReplayBackend::from_dir(dir.path()).unwrap();
        assert!(backend.transcript("s3-skill-update-developer-id-hijack").is_some());
        assert!(backend.transcript("o2-cfo-wire-authority-urgency").is_some());
    }
}
