//! Endogenous security-awareness training for autonomous agents.
//!
//! The crate implements a deterministic, desk-scale training stack:
//!
//! - [`taxonomy`] — the fixed three-layer, twelve-dimension awareness
//!   registry.
//! - [`scheduler`] — weakest-first curriculum selection plus uniform-random
//!   and fixation-prone baselines.
//! - [`backend`] — the pluggable attacker/defender/evaluator contract with a
//!   parametric simulated agent, a deterministic replay backend, and a stub
//!   external adapter.
//! - [`session`] — the per-session training loop and multi-session campaigns
//!   with memory-preserving or cold-start semantics.
//! - [`memory`] — four-layer persistent memory: axioms, skill profile,
//!   hash-chained episode log, scenario library.
//! - [`scenario`] — scenario schema validation, advisory ingestion, coverage
//!   reporting, and the bundled 32-scenario corpus.
//! - [`sacp`] — precision/recall calibration curves, F1 optimisation, and
//!   the hyper-vigilance demonstration.
//! - [`experiments`] — seeded reproduction campaigns with pass/fail
//!   thresholds.
//! - [`cli`] — the operator command surface behind the `clawdgo` binary.
//!
//! # Runnable examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --example train_campaign        # weakest-first training run
//! cargo run --example scheduler_policies    # policy comparison
//! cargo run --example memory_lifecycle      # axiom promotion and decay
//! cargo run --example audit_log             # hash-chain tamper detection
//! cargo run --example scenario_validation   # corpus validation + coverage
//! cargo run --example ingest_advisories    # threat-intel ingestion
//! cargo run --example calibration           # recall/precision curves
//! cargo run --example hyper_vigilance       # over-training refusal demo
//! cargo run --example replay_session        # deterministic replay backend
//! cargo run --example experiments_all       # the full seeded study suite
//! ```

pub mod backend;
pub mod cli;
pub mod experiments;
pub mod fixtures;
pub mod memory;
pub mod sacp;
pub mod scenario;
pub mod scheduler;
pub mod session;
pub mod taxonomy;

pub use backend::{AgentBackend, ReplayBackend, SimParams, SimulatedBackend};
pub use memory::{AcpPolicy, MemoryStore, SkillProfile};
pub use scenario::{Scenario, ValidationReport};
pub use scheduler::Policy;
pub use session::{Campaign, SessionConfig, SessionOutcome, Trajectory};
pub use taxonomy::{DimensionId, LayerId};
