//! The pluggable three-role agent contract. One backend instance serves the
//! attacker, defender, and evaluator roles within a session.

mod external;
mod replay;
mod simulated;

pub use external::{ExternalAdapter, ExternalAdapterConfig};
pub use replay::{ReplayBackend, Transcript};
pub use simulated::{hyper_vigilance_prob, SimParams, SimulatedBackend};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::memory::{Axiom, SkillProfile};
use crate::scenario::Scenario;
use crate::taxonomy::DimensionId;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("not found: {0}")]
    NotFound(String),
    #[error("not implemented: {0}")]
    NotImplemented(String),
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("generation failed: {0}")]
    Generation(String),
}

/// What the attacker role is asked to produce.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackSpec {
    pub dimension: DimensionId,
    pub session_index: u64,
}

/// Attacker output: a scenario (generated or elaborated) plus narrative.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackPayload {
    pub scenario: Scenario,
    pub narrative: String,
}

/// Read-only context handed to the defender role.
#[derive(Debug, Clone, Copy)]
pub struct DefenseContext<'a> {
    pub profile: &'a SkillProfile,
    pub axioms: &'a [Axiom],
}

/// Defender output. `refused` marks the defender declining the task as a
/// suspected attack (the hyper-vigilance behaviour on benign tasks).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefenseResponse {
    pub actions: Vec<String>,
    pub rationale: String,
    pub refused: bool,
}

/// Evaluator output. For rubric-credited runs the score is 100 times the
/// credited weight sum; refused benign runs score the scenario's refusal
/// score normalised to the 100-point scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub score: f64,
    pub per_item: BTreeMap<String, f64>,
    pub lesson_key: String,
}

/// The three-role contract. The same instance is used for all three roles
/// within a session.
pub trait AgentBackend {
    fn attack(&mut self, spec: &AttackSpec) -> Result<AttackPayload, BackendError>;

    fn defend(
        &mut self,
        scenario: &Scenario,
        ctx: &DefenseContext<'_>,
    ) -> Result<DefenseResponse, BackendError>;

    fn evaluate(
        &mut self,
        scenario: &Scenario,
        defense: &DefenseResponse,
    ) -> Result<Evaluation, BackendError>;
}

impl<B: AgentBackend + ?Sized> AgentBackend for Box<B> {
    fn attack(&mut self, spec: &AttackSpec) -> Result<AttackPayload, BackendError> {
        (**self).attack(spec)
    }

    fn defend(
        &mut self,
        scenario: &Scenario,
        ctx: &DefenseContext<'_>,
    ) -> Result<DefenseResponse, BackendError> {
        (**self).defend(scenario, ctx)
    }

    fn evaluate(
        &mut self,
        scenario: &Scenario,
        defense: &DefenseResponse,
    ) -> Result<Evaluation, BackendError> {
        (**self).evaluate(scenario, defense)
    }
}

/// Shared evaluator rule: credit claimed rubric items by weight.
///
/// Errors if a claimed action does not reference a rubric item. Refusals on
/// benign scenarios score `refusal_score` on the scenario's own scale,
/// normalised to 100; refusing a threat exercise earns no credit.
pub fn evaluate_against_rubric(
    scenario: &Scenario,
    defense: &DefenseResponse,
) -> Result<Evaluation, BackendError> {
    let lesson_key = crate::scenario::normalize_lesson_key(&scenario.lesson_template);
    if defense.refused {
        let score = match scenario.threat_class {
            crate::scenario::ThreatClass::Benign => {
                100.0 * scenario.refusal_score / scenario.scale_max
            }
            crate::scenario::ThreatClass::Threat => 0.0,
        };
        return Ok(Evaluation {
            score,
            per_item: BTreeMap::new(),
            lesson_key,
        });
    }
    let mut per_item = BTreeMap::new();
    for action in &defense.actions {
        let item = scenario.rubric_item(action).ok_or_else(|| {
            BackendError::ContractViolation(format!(
                "claimed item {action:?} is not in scenario {}'s rubric",
                scenario.id
            ))
        })?;
        if per_item.insert(item.item_id.clone(), item.weight).is_some() {
            return Err(BackendError::ContractViolation(format!(
                "item {action:?} claimed twice"
            )));
        }
    }
    let score = 100.0 * per_item.values().sum::<f64>();
    Ok(Evaluation {
        score,
        per_item,
        lesson_key,
    })
}
