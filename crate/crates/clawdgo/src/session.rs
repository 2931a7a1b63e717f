//! The per-session training loop and multi-session campaigns.
//!
//! One session runs: select dimension → acquire scenario (library first,
//! generation as opt-in fallback) → defend → evaluate → profile update →
//! episode append → axiom promotion and decay. Campaigns run sessions
//! sequentially and support memory-preserving or cold-start semantics.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{AgentBackend, AttackSpec, BackendError, DefenseContext};
use crate::memory::{
    AcpEvent, AcpPolicy, AdminEventKind, EpisodeDraft, MemoryError, MemoryStore, SkillProfile,
};
use crate::scenario::{validate_scenario, Scenario};
use crate::scheduler::{seeded_stream, select_dimension, stream_ids, Policy, SchedulerState};
use crate::taxonomy::DimensionId;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Memory(#[from] MemoryError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("no scenario available for dimension {dimension} and generation is disabled")]
    EmptyLibrary { dimension: DimensionId },
    #[error("generated scenario failed validation: {0}")]
    InvalidGenerated(String),
    #[error("invalid session configuration: {0}")]
    Config(String),
}

/// Which layers a cold-start campaign resets before every session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColdStart {
    Off,
    /// Reset the skill profile only.
    Profile,
    /// Reset the skill profile and the axiom store.
    All,
}

impl ColdStart {
    pub fn parse_flag(s: &str) -> Option<ColdStart> {
        match s {
            "profile" => Some(ColdStart::Profile),
            "all" => Some(ColdStart::All),
            _ => None,
        }
    }

    pub fn is_on(self) -> bool {
        self != ColdStart::Off
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub policy: Policy,
    /// Profile gain rate when the evaluator score exceeds the current skill.
    pub update_alpha: f64,
    /// Profile loss rate when the evaluator score falls below it.
    pub update_beta: f64,
    pub acp: AcpPolicy,
    pub cold_start: ColdStart,
    /// Allow the backend to generate scenarios when the library has none
    /// for the selected dimension. Off by default for reproducibility.
    pub allow_generate: bool,
    pub seed: u64,
}

impl SessionConfig {
    pub fn new(policy: Policy, seed: u64) -> SessionConfig {
        SessionConfig {
            policy,
            update_alpha: 0.35,
            update_beta: 0.10,
            acp: AcpPolicy::default(),
            cold_start: ColdStart::Off,
            allow_generate: false,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SessionError> {
        if !(self.update_beta > 0.0
            && self.update_beta <= self.update_alpha
            && self.update_alpha <= 1.0)
        {
            return Err(SessionError::Config(
                "require 0 < update_beta <= update_alpha <= 1".into(),
            ));
        }
        if let Policy::FixationProne { p_fix } = self.policy {
            if !(0.0..=1.0).contains(&p_fix) {
                return Err(SessionError::Config("p_fix must lie in [0,1]".into()));
            }
        }
        self.acp.validate()?;
        Ok(())
    }
}

/// Asymmetric exponential-moving-average profile update: gains move the
/// score by `alpha` toward the evaluator score, losses by `beta`; only the
/// trained dimension changes, and its session counter advances.
pub fn update_profile(
    profile: &SkillProfile,
    dimension: DimensionId,
    evaluator_score: f64,
    config: &SessionConfig,
) -> Result<SkillProfile, SessionError> {
    if !(0.0..=100.0).contains(&evaluator_score) {
        return Err(SessionError::Config(format!(
            "evaluator score {evaluator_score} outside [0,100]"
        )));
    }
    let s = profile.score(dimension);
    let rate = if evaluator_score >= s {
        config.update_alpha
    } else {
        config.update_beta
    };
    let updated = s + rate * (evaluator_score - s);
    let mut next = profile.clone();
    next.record_session(dimension, updated);
    Ok(next)
}

/// One completed session, as reported to the operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionOutcome {
    pub session_index: u64,
    pub dimension: DimensionId,
    pub scenario_id: String,
    pub evaluator_score: f64,
    pub profile_mean_after: f64,
    pub promotions: u64,
    pub deprecations: u64,
}

/// A campaign's ordered outcomes plus summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub outcomes: Vec<SessionOutcome>,
    pub initial_mean: f64,
    pub final_mean: f64,
    pub dims_trained: BTreeSet<DimensionId>,
}

impl Trajectory {
    pub fn delta(&self) -> f64 {
        self.final_mean - self.initial_mean
    }
}

/// A campaign aborted mid-way keeps the partial trajectory.
#[derive(Debug, Error)]
#[error("campaign aborted after {} session(s): {source}", partial.outcomes.len())]
pub struct CampaignAborted {
    pub partial: Trajectory,
    #[source]
    pub source: SessionError,
}

/// Session engine bound to one store and one backend instance. The scenario
/// library is loaded once at construction; generated scenarios are appended
/// to both the cache and the store.
pub struct Campaign<'a, B: AgentBackend> {
    store: &'a mut MemoryStore,
    backend: &'a mut B,
    config: SessionConfig,
    sched: SchedulerState,
    sampler: ChaCha8Rng,
    library: Vec<Scenario>,
}

impl<'a, B: AgentBackend> Campaign<'a, B> {
    pub fn new(
        store: &'a mut MemoryStore,
        backend: &'a mut B,
        config: SessionConfig,
    ) -> Result<Campaign<'a, B>, SessionError> {
        config.validate()?;
        let sched = SchedulerState::new(config.seed);
        let sampler = seeded_stream(config.seed, stream_ids::SAMPLER);
        let mut library = store.load_library()?;
        library.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(Campaign {
            store,
            backend,
            config,
            sched,
            sampler,
            library,
        })
    }

    pub fn store(&self) -> &MemoryStore {
        self.store
    }

    /// Acquire a scenario for `dimension`: sample uniformly from the library
    /// matches, or fall back to backend generation when allowed.
    fn acquire_scenario(
        &mut self,
        dimension: DimensionId,
        session_index: u64,
    ) -> Result<(Scenario, String), SessionError> {
        let matches: Vec<&Scenario> = self
            .library
            .iter()
            .filter(|s| s.dimension == dimension)
            .collect();
        if !matches.is_empty() {
            let idx = self.sampler.random_range(0..matches.len());
            let scenario = matches[idx].clone();
            let summary = format!("sampled from library: {}", scenario.title);
            return Ok((scenario, summary));
        }
        if !self.config.allow_generate {
            return Err(SessionError::EmptyLibrary { dimension });
        }
        let payload = self.backend.attack(&AttackSpec {
            dimension,
            session_index,
        })?;
        let doc = serde_json::to_string(&payload.scenario)
            .map_err(|e| SessionError::InvalidGenerated(e.to_string()))?;
        let report = validate_scenario(&doc).map_err(|e| {
            SessionError::InvalidGenerated(format!("generated document unparseable: {e}"))
        })?;
        if !report.ok {
            let detail = report
                .errors
                .iter()
                .map(|e| format!("{} ({})", e.field, e.rule))
                .collect::<Vec<_>>()
                .join(", ");
            self.store.record_admin(
                session_index,
                AdminEventKind::GenerationRejected,
                &payload.scenario.id,
                &detail,
            )?;
            return Err(SessionError::InvalidGenerated(detail));
        }
        self.store.store_scenario(&payload.scenario)?;
        let idx = self
            .library
            .binary_search_by(|s| s.id.cmp(&payload.scenario.id))
            .unwrap_or_else(|i| i);
        self.library.insert(idx, payload.scenario.clone());
        Ok((payload.scenario, payload.narrative))
    }

    /// Run exactly one session and persist the resulting state.
    pub fn run_session(&mut self) -> Result<SessionOutcome, SessionError> {
        let session_index = self.store.log().episode_count() + 1;
        let dimension = select_dimension(self.store.profile(), self.config.policy, &mut self.sched);
        let (scenario, attack_summary) = self.acquire_scenario(dimension, session_index)?;

        let defense = {
            let ctx = DefenseContext {
                profile: self.store.profile(),
                axioms: self.store.axioms(),
            };
            self.backend.defend(&scenario, &ctx)?
        };
        let evaluation = self.backend.evaluate(&scenario, &defense)?;

        let updated = update_profile(
            self.store.profile(),
            dimension,
            evaluation.score,
            &self.config,
        )?;
        self.store.set_profile(updated);

        let episode = self.store.append_episode(EpisodeDraft {
            session_index,
            dimension,
            scenario_id: scenario.id.clone(),
            attack_summary,
            defense_summary: defense.rationale.clone(),
            evaluator_score: evaluation.score,
            lesson_key: evaluation.lesson_key.clone(),
        })?;

        let lesson_group: Vec<_> = self
            .store
            .log()
            .episodes()
            .filter(|e| e.lesson_key == episode.lesson_key)
            .cloned()
            .collect();
        let promo_events = self.store.acp_promote(&self.config.acp, &lesson_group)?;
        let promotions = promo_events
            .iter()
            .filter(|e| matches!(e, AcpEvent::Created { .. } | AcpEvent::Reinforced { .. }))
            .count() as u64;
        let decay_events = self.store.acp_decay(&self.config.acp, session_index)?;
        let deprecations = decay_events
            .iter()
            .filter(|e| matches!(e, AcpEvent::Deprecated { .. }))
            .count() as u64;

        self.store.save()?;
        Ok(SessionOutcome {
            session_index,
            dimension,
            scenario_id: scenario.id,
            evaluator_score: evaluation.score,
            profile_mean_after: self.store.profile().mean(),
            promotions,
            deprecations,
        })
    }

    /// Run `n_sessions` sessions sequentially. Cold-start modes reset the
    /// configured layers to the campaign's initial snapshot before each
    /// session and persist only the log's growth.
    pub fn run_campaign(&mut self, n_sessions: u64) -> Result<Trajectory, CampaignAborted> {
        let empty = |mean: f64| Trajectory {
            outcomes: Vec::new(),
            initial_mean: mean,
            final_mean: mean,
            dims_trained: BTreeSet::new(),
        };
        if n_sessions == 0 {
            return Err(CampaignAborted {
                partial: empty(self.store.profile().mean()),
                source: SessionError::Config("a campaign needs at least one session".into()),
            });
        }
        let snapshot = self.store.snapshot();
        let initial_mean = snapshot.profile.mean();
        let mut outcomes: Vec<SessionOutcome> = Vec::new();

        let mut abort: Option<SessionError> = None;
        for _ in 0..n_sessions {
            match self.config.cold_start {
                ColdStart::Off => {}
                ColdStart::Profile => self.store.restore_profile(&snapshot),
                ColdStart::All => self.store.restore(&snapshot),
            }
            match self.run_session() {
                Ok(outcome) => outcomes.push(outcome),
                Err(e) => {
                    abort = Some(e);
                    break;
                }
            }
        }

        if self.config.cold_start.is_on() {
            // Cold-start persists the log only: the resettable layers go
            // back to the initial snapshot.
            match self.config.cold_start {
                ColdStart::Profile => self.store.restore_profile(&snapshot),
                _ => self.store.restore(&snapshot),
            }
            if let Err(e) = self.store.save() {
                abort.get_or_insert(SessionError::Memory(e));
            }
        }

        let final_mean = outcomes
            .last()
            .map(|o| o.profile_mean_after)
            .unwrap_or(initial_mean);
        let trajectory = Trajectory {
            dims_trained: outcomes.iter().map(|o| o.dimension).collect(),
            initial_mean,
            final_mean,
            outcomes,
        };
        match abort {
            None => Ok(trajectory),
            Some(source) => Err(CampaignAborted {
                partial: trajectory,
                source,
            }),
        }
    }
}
