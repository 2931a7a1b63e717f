//! Axiom lifecycle: promotion of repeated high-scoring lessons into durable
//! axioms, confidence decay for unreinforced axioms, and deprecation below
//! the confidence floor.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::log::Episode;
use super::{Axiom, MemoryError, AXIOM_CAP};

/// Promotion/decay thresholds. The numbers are configurable; the cap is
/// fixed at [`AXIOM_CAP`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcpPolicy {
    /// Minimum evaluator score for an episode to count toward promotion.
    pub promote_score_min: f64,
    /// Qualifying repetitions of the same lesson required to promote.
    pub repetition_min: u64,
    /// Confidence assigned to a freshly created axiom.
    pub confidence_init: f64,
    /// Confidence gained per reinforcement (capped at 1).
    pub confidence_step: f64,
    /// Per-session multiplicative decay applied to unreinforced axioms.
    pub decay_rate: f64,
    /// Axioms falling below this confidence are deprecated.
    pub deprecate_below: f64,
}

impl Default for AcpPolicy {
    fn default() -> Self {
        AcpPolicy {
            promote_score_min: 90.0,
            repetition_min: 3,
            confidence_init: 0.5,
            confidence_step: 0.2,
            decay_rate: 0.02,
            deprecate_below: 0.3,
        }
    }
}

impl AcpPolicy {
    pub fn validate(&self) -> Result<(), MemoryError> {
        if !(0.0..=1.0).contains(&self.confidence_init)
            || self.deprecate_below < 0.0
            || self.deprecate_below >= self.confidence_init
        {
            return Err(MemoryError::ContractViolation(
                "require 0 <= deprecate_below < confidence_init <= 1".into(),
            ));
        }
        if self.repetition_min < 1 {
            return Err(MemoryError::ContractViolation("repetition_min must be >= 1".into()));
        }
        if self.confidence_step < 0.0 || self.decay_rate < 0.0 || self.decay_rate > 1.0 {
            return Err(MemoryError::ContractViolation(
                "confidence_step must be >= 0 and decay_rate in [0,1]".into(),
            ));
        }
        Ok(())
    }
}

/// One axiom lifecycle event; every event is also appended to the episode
/// log as an administrative record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum AcpEvent {
    Created {
        axiom_id: String,
        lesson_key: String,
        confidence: f64,
    },
    Reinforced {
        axiom_id: String,
        confidence: f64,
    },
    Evicted {
        axiom_id: String,
        confidence: f64,
    },
    Deprecated {
        axiom_id: String,
        confidence: f64,
    },
}

impl AcpEvent {
    pub fn axiom_id(&self) -> &str {
        match self {
            AcpEvent::Created { axiom_id, .. }
            | AcpEvent::Reinforced { axiom_id, .. }
            | AcpEvent::Evicted { axiom_id, .. }
            | AcpEvent::Deprecated { axiom_id, .. } => axiom_id,
        }
    }
}

/// Promotion pass over `recent` episodes: lessons are grouped by key, and a
/// lesson with at least `repetition_min` episodes scoring at or above
/// `promote_score_min` is promoted (created, or reinforced if its axiom
/// already exists). Creation beyond the cap evicts the lowest-confidence
/// axiom (ties: least recently reinforced, then id).
pub(super) fn promote(
    axioms: &mut Vec<Axiom>,
    policy: &AcpPolicy,
    recent: &[Episode],
) -> Result<Vec<AcpEvent>, MemoryError> {
    policy.validate()?;
    let mut groups: BTreeMap<&str, Vec<&Episode>> = BTreeMap::new();
    for episode in recent {
        if episode.evaluator_score >= policy.promote_score_min {
            groups.entry(&episode.lesson_key).or_default().push(episode);
        }
    }

    let mut events = Vec::new();
    for (lesson_key, episodes) in groups {
        if (episodes.len() as u64) < policy.repetition_min {
            continue;
        }
        let latest_session = episodes.iter().map(|e| e.session_index).max().unwrap();
        let axiom_id = Axiom::id_for_lesson(lesson_key);

        if let Some(existing) = axioms.iter_mut().find(|a| a.id == axiom_id) {
            existing.confidence = (existing.confidence + policy.confidence_step).min(1.0);
            existing.reinforcements += 1;
            existing.last_reinforced_at = latest_session;
            events.push(AcpEvent::Reinforced {
                axiom_id,
                confidence: existing.confidence,
            });
            continue;
        }

        if axioms.len() >= AXIOM_CAP {
            let victim_idx = axioms
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    a.confidence
                        .partial_cmp(&b.confidence)
                        .unwrap()
                        .then_with(|| a.last_reinforced_at.cmp(&b.last_reinforced_at))
                        .then_with(|| a.id.cmp(&b.id))
                })
                .map(|(i, _)| i)
                .unwrap();
            let victim = axioms.remove(victim_idx);
            events.push(AcpEvent::Evicted {
                axiom_id: victim.id,
                confidence: victim.confidence,
            });
        }

        let dimensions = episodes.iter().map(|e| e.dimension).collect();
        axioms.push(Axiom {
            id: axiom_id.clone(),
            statement: lesson_key.to_string(),
            dimensions,
            confidence: policy.confidence_init,
            reinforcements: 0,
            created_at: latest_session,
            last_reinforced_at: latest_session,
        });
        events.push(AcpEvent::Created {
            axiom_id,
            lesson_key: lesson_key.to_string(),
            confidence: policy.confidence_init,
        });
    }
    Ok(events)
}

/// Decay pass: every axiom not reinforced at `current_session` loses a
/// `decay_rate` fraction of its confidence; axioms falling below the floor
/// are removed.
pub(super) fn decay(
    axioms: &mut Vec<Axiom>,
    policy: &AcpPolicy,
    current_session: u64,
) -> Result<Vec<AcpEvent>, MemoryError> {
    policy.validate()?;
    let mut events = Vec::new();
    for axiom in axioms.iter_mut() {
        if axiom.last_reinforced_at < current_session {
            axiom.confidence *= 1.0 - policy.decay_rate;
        }
    }
    axioms.retain(|axiom| {
        if axiom.confidence < policy.deprecate_below {
            events.push(AcpEvent::Deprecated {
                axiom_id: axiom.id.clone(),
                confidence: axiom.confidence,
            });
            false
        } else {
            true
        }
    });
    Ok(events)
}
