//! Scripted, seeded study reproductions with explicit pass thresholds,
//! emitting comparison tables in the summary style (condition, starting
//! mean, final mean, delta, dimensions trained).
//!
//! Results are directional: the thresholds encode the minimum effect sizes
//! the claims imply, not exact score values.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{SimParams, SimulatedBackend};
use crate::fixtures;
use crate::memory::{MemoryError, MemoryStore};
use crate::sacp::{self, SacpError};
use crate::scenario::{corpus, coverage_report, validate_scenario, ScenarioError};
use crate::scheduler::Policy;
use crate::session::{Campaign, CampaignAborted, ColdStart, SessionConfig, SessionError, Trajectory};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Memory(#[from] MemoryError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Sacp(#[from] SacpError),
    #[error("campaign aborted: {0}")]
    Aborted(String),
    #[error("scratch directory: {0}")]
    Scratch(std::io::Error),
}

impl From<CampaignAborted> for ExperimentError {
    fn from(e: CampaignAborted) -> Self {
        ExperimentError::Aborted(e.to_string())
    }
}

/// Saturation bar for the memory-preserving arm: every dimension at or
/// above this score.
pub const SATURATION_MIN_SCORE: f64 = 95.0;

/// Cap on extra weakest-first sessions run to reach saturation.
pub const MAX_SATURATION_SESSIONS: u64 = 64;

/// One table row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub label: String,
    pub initial_mean: f64,
    pub final_mean: f64,
    pub delta: f64,
    /// Dimensions trained; absent where the condition does not track it.
    pub dims_trained: Option<u64>,
}

impl ConditionRow {
    fn from_trajectory(label: &str, t: &Trajectory) -> ConditionRow {
        ConditionRow {
            label: label.to_string(),
            initial_mean: t.initial_mean,
            final_mean: t.final_mean,
            delta: t.delta(),
            dims_trained: Some(t.dims_trained.len() as u64),
        }
    }
}

/// A reproducible study report: `(id, seed)` fully determines it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub id: String,
    pub conditions: Vec<ConditionRow>,
    pub seeds: Vec<u64>,
    pub pass: bool,
    pub details: Vec<String>,
}

/// Pass thresholds for the curriculum comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rq1Thresholds {
    /// Weakest-first delta must beat the fixation delta by at least this.
    pub min_delta_gap: f64,
    /// Minimum dimensions the weakest-first arm must train.
    pub min_dims: u64,
    /// Weakest-first must train at least this many more dimensions.
    pub min_dims_gap: u64,
}

impl Default for Rq1Thresholds {
    fn default() -> Self {
        Rq1Thresholds {
            min_delta_gap: 3.0,
            min_dims: 10,
            min_dims_gap: 2,
        }
    }
}

pub fn rq1_pass(weakest: &Trajectory, fixation: &Trajectory, t: &Rq1Thresholds) -> bool {
    let dims_wf = weakest.dims_trained.len() as u64;
    let dims_fix = fixation.dims_trained.len() as u64;
    weakest.delta() >= fixation.delta() + t.min_delta_gap
        && dims_wf >= t.min_dims
        && dims_wf >= dims_fix + t.min_dims_gap
}

/// Pass thresholds for the memory ablation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rq2Thresholds {
    /// Maximum absolute mean drift over the memory-preserving follow-on.
    pub max_memory_drift: f64,
    /// Minimum final-mean gap between the memory and cold-start arms.
    pub min_gap: f64,
}

impl Default for Rq2Thresholds {
    fn default() -> Self {
        Rq2Thresholds {
            max_memory_drift: 1.0,
            min_gap: 8.0,
        }
    }
}

pub fn rq2_pass(memory: &Trajectory, cold: &Trajectory, t: &Rq2Thresholds) -> bool {
    memory.delta().abs() <= t.max_memory_drift
        && memory.final_mean - cold.final_mean >= t.min_gap
}

/// Pass thresholds for the over-training demonstration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rq4Thresholds {
    pub refusal_frequency_min: f64,
    pub refusal_frequency_max: f64,
    pub bias_ratio_min: f64,
}

impl Default for Rq4Thresholds {
    fn default() -> Self {
        Rq4Thresholds {
            refusal_frequency_min: 0.35,
            refusal_frequency_max: 0.60,
            bias_ratio_min: 6.0,
        }
    }
}

fn scratch_state(root: &Path) -> Result<MemoryStore, ExperimentError> {
    let mut store = MemoryStore::init(root)?;
    fixtures::install_seed_fixture(&mut store)?;
    Ok(store)
}

fn run_arm(
    root: &Path,
    policy: Policy,
    seed: u64,
    sessions: u64,
    cold_start: ColdStart,
) -> Result<Trajectory, ExperimentError> {
    let mut store = scratch_state(root)?;
    let mut backend = SimulatedBackend::with_defaults(seed);
    let mut config = SessionConfig::new(policy, seed);
    config.cold_start = cold_start;
    let mut campaign = Campaign::new(&mut store, &mut backend, config)?;
    Ok(campaign.run_campaign(sessions)?)
}

/// Longest run of consecutive selections of a single dimension.
fn longest_fixation_run(t: &Trajectory) -> u64 {
    let mut best = 0u64;
    let mut run = 0u64;
    let mut last = None;
    for outcome in &t.outcomes {
        if Some(outcome.dimension) == last {
            run += 1;
        } else {
            run = 1;
            last = Some(outcome.dimension);
        }
        best = best.max(run);
    }
    best
}

/// Curriculum comparison: 16-session weakest-first vs 16-session
/// fixation-prone from identical state snapshots and the same seed.
pub fn run_rq1(seed: u64) -> Result<ExperimentReport, ExperimentError> {
    run_rq1_with(seed, &Rq1Thresholds::default())
}

pub fn run_rq1_with(seed: u64, t: &Rq1Thresholds) -> Result<ExperimentReport, ExperimentError> {
    let scratch = tempfile::tempdir().map_err(ExperimentError::Scratch)?;
    let weakest = run_arm(&scratch.path().join("wf"), Policy::WeakestFirst, seed, 16, ColdStart::Off)?;
    let fixation = run_arm(
        &scratch.path().join("fix"),
        Policy::fixation_default(),
        seed,
        16,
        ColdStart::Off,
    )?;
    let pass = rq1_pass(&weakest, &fixation, t);
    Ok(ExperimentReport {
        id: "rq1".into(),
        conditions: vec![
            ConditionRow::from_trajectory("weakest-first (16 sessions)", &weakest),
            ConditionRow::from_trajectory("fixation-prone (16 sessions)", &fixation),
        ],
        seeds: vec![seed],
        pass,
        details: vec![format!(
            "longest consecutive same-dimension run under fixation: {}",
            longest_fixation_run(&fixation)
        )],
    })
}

/// Memory ablation: the weakest-first arm is continued from its RQ1 state
/// until the profile saturates (all scores >= 95), then a 5-session
/// memory-preserving follow-on runs; the cold-start arm resets profile and
/// axioms before each of its 5 sessions.
pub fn run_rq2(seed: u64) -> Result<ExperimentReport, ExperimentError> {
    run_rq2_with(seed, &Rq2Thresholds::default())
}

pub fn run_rq2_with(seed: u64, t: &Rq2Thresholds) -> Result<ExperimentReport, ExperimentError> {
    let scratch = tempfile::tempdir().map_err(ExperimentError::Scratch)?;

    // memory arm: 16-session weakest-first, continued to saturation
    let mut store = scratch_state(&scratch.path().join("mem"))?;
    let mut backend = SimulatedBackend::with_defaults(seed);
    let config = SessionConfig::new(Policy::WeakestFirst, seed);
    let mut campaign = Campaign::new(&mut store, &mut backend, config)?;
    campaign.run_campaign(16)?;
    let mut extra = 0u64;
    while campaign.store().profile().min_entry().1 < SATURATION_MIN_SCORE
        && extra < MAX_SATURATION_SESSIONS
    {
        campaign.run_session()?;
        extra += 1;
    }
    let memory = campaign.run_campaign(5)?;

    // cold-start arm: 5 sessions, full reset before each
    let cold = run_arm(
        &scratch.path().join("cold"),
        Policy::WeakestFirst,
        seed,
        5,
        ColdStart::All,
    )?;

    let pass = rq2_pass(&memory, &cold, t);
    let gap = memory.final_mean - cold.final_mean;
    Ok(ExperimentReport {
        id: "rq2".into(),
        conditions: vec![
            {
                let mut row = ConditionRow::from_trajectory("memory-preserving (5 sessions)", &memory);
                row.dims_trained = None;
                row
            },
            ConditionRow::from_trajectory("cold-start ablation (5 sessions)", &cold),
        ],
        seeds: vec![seed],
        pass,
        details: vec![
            format!("saturation sessions after the 16-session arm: {extra}"),
            format!("final-mean gap: {gap:.2}"),
        ],
    })
}

/// Corpus conformance: exactly 32 bundled scenarios, all valid, all 12
/// dimensions covered.
pub fn run_rq3() -> Result<ExperimentReport, ExperimentError> {
    let docs = corpus::bundled_corpus_documents();
    let mut valid = 0usize;
    for (_, text) in docs {
        if validate_scenario(text)?.ok {
            valid += 1;
        }
    }
    let parsed = corpus::bundled_corpus()?;
    let coverage = coverage_report(&parsed);
    let covered = 12 - coverage.uncovered.len();
    let pass = docs.len() == 32 && valid == 32 && coverage.uncovered.is_empty();
    Ok(ExperimentReport {
        id: "rq3".into(),
        conditions: vec![],
        seeds: vec![],
        pass,
        details: vec![
            format!("{valid}/{} scenarios valid", docs.len()),
            format!("{covered}/12 dimensions covered"),
        ],
    })
}

/// Over-training demonstration: refusal frequency of a benign assessment at
/// intensity 63 against the refusal model, plus the corpus attention-bias
/// report.
pub fn run_rq4(seed: u64) -> Result<ExperimentReport, ExperimentError> {
    run_rq4_with(seed, &Rq4Thresholds::default())
}

pub fn run_rq4_with(seed: u64, t: &Rq4Thresholds) -> Result<ExperimentReport, ExperimentError> {
    let scenario = corpus::benign_assessment();
    let report = sacp::hyper_vigilance_demo_simulated(
        63,
        &SimParams::default(),
        &scenario,
        seed,
        sacp::HV_DEMO_RUNS,
    )?;
    let parsed = corpus::bundled_corpus()?;
    let coverage = coverage_report(&parsed);
    let frequency_ok = report.refusal_frequency >= t.refusal_frequency_min
        && report.refusal_frequency <= t.refusal_frequency_max;
    let display_ok = report.refused_display == "30/160";
    let bias_ok = coverage.bias_ratio >= t.bias_ratio_min && coverage.biased;
    let pass = frequency_ok && display_ok && bias_ok;
    Ok(ExperimentReport {
        id: "rq4".into(),
        conditions: vec![],
        seeds: vec![seed],
        pass,
        details: vec![
            format!(
                "refusal frequency {:.3} (model {:.3}) over {} runs at intensity {}",
                report.refusal_frequency, report.expected_frequency, report.runs, report.tau
            ),
            format!("refused runs score {}", report.refused_display),
            format!(
                "corpus bias ratio {:.1}{}",
                coverage.bias_ratio,
                if coverage.biased { " BIASED" } else { "" }
            ),
        ],
    })
}

/// Run one experiment by id.
pub fn run(id: &str, seed: u64) -> Result<ExperimentReport, ExperimentError> {
    match id {
        "rq1" => run_rq1(seed),
        "rq2" => run_rq2(seed),
        "rq3" => run_rq3(),
        "rq4" => run_rq4(seed),
        other => Err(ExperimentError::Aborted(format!(
            "unknown experiment {other:?} (expected rq1|rq2|rq3|rq4)"
        ))),
    }
}

/// Human-readable rendering: a summary-style table plus detail lines.
pub fn render_human(report: &ExperimentReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "experiment {} — {}\n",
        report.id,
        if report.pass { "PASS" } else { "FAIL" }
    ));
    if !report.conditions.is_empty() {
        out.push_str(&format!(
            "{:<34} {:>6} {:>6} {:>7} {:>5}\n",
            "condition", "s0", "sf", "delta", "dims"
        ));
        for row in &report.conditions {
            let dims = row
                .dims_trained
                .map(|d| d.to_string())
                .unwrap_or_else(|| "---".into());
            out.push_str(&format!(
                "{:<34} {:>6.1} {:>6.1} {:>+7.1} {:>5}\n",
                row.label, row.initial_mean, row.final_mean, row.delta, dims
            ));
        }
    }
    for line in &report.details {
        out.push_str(&format!("- {line}\n"));
    }
    out
}

/// Machine-readable rendering: one self-describing record per line.
pub fn render_records(report: &ExperimentReport) -> String {
    let mut out = String::new();
    for row in &report.conditions {
        let mut value = serde_json::to_value(row).expect("row serializes");
        value
            .as_object_mut()
            .unwrap()
            .insert("record".into(), serde_json::json!("condition"));
        out.push_str(&format!("{value}\n"));
    }
    let summary = serde_json::json!({
        "record": "experiment",
        "id": report.id,
        "seeds": report.seeds,
        "pass": report.pass,
        "details": report.details,
    });
    out.push_str(&format!("{summary}\n"));
    out
}

/// Collect the dimensions trained across a set of rows (diagnostics).
pub fn dims_union(rows: &[Trajectory]) -> BTreeSet<crate::taxonomy::DimensionId> {
    rows.iter().flat_map(|t| t.dims_trained.iter().copied()).collect()
}
