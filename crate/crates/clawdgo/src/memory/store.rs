//! The state-directory store: single-writer, file-backed persistence for
//! all four memory layers.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::scenario::{self, Scenario};
use crate::taxonomy::DimensionId;

use super::acp;
use super::log::{
    AdminEventKind, ChainDigest, ChainVerification, Episode, EpisodeDraft, EpisodeLog,
};
use super::{AcpEvent, AcpPolicy, Axiom, MemoryError, SkillProfile, AXIOM_CAP};

pub const AXIOMS_FILE: &str = "axioms.json";
pub const PROFILE_FILE: &str = "profile.json";
pub const LOG_FILE: &str = "episodes.log";
pub const SCENARIOS_DIR: &str = "scenarios";
pub const SOUL_FILE: &str = "soul.md";
pub const LOCK_FILE: &str = ".lock";

/// Advisory single-writer lock: a `.lock` file created exclusively and
/// removed on drop. A stale lock after a crash must be removed by hand.
#[derive(Debug)]
struct StateLock {
    path: PathBuf,
}

impl StateLock {
    fn acquire(dir: &Path) -> Result<StateLock, MemoryError> {
        let path = dir.join(LOCK_FILE);
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(StateLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(MemoryError::Locked(dir.to_path_buf()))
            }
            Err(source) => Err(MemoryError::storage(&path, source)),
        }
    }
}

impl Drop for StateLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// The L0 store document: axioms plus lifecycle bookkeeping and the
/// expected log head, which pins the chain against wholesale rewrites.
#[derive(Debug, Serialize, Deserialize)]
struct AxiomStoreDoc {
    axioms: Vec<Axiom>,
    last_decay_session: u64,
    log_head: ChainDigest,
}

/// Copy of the resettable layers (L0 + L1), used by cold-start campaigns.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSnapshot {
    pub profile: SkillProfile,
    pub axioms: Vec<Axiom>,
    pub last_decay_session: u64,
}

/// An open state directory holding all four memory layers. Writers hold the
/// advisory lock; read-only opens (snapshot inspection) do not.
#[derive(Debug)]
pub struct MemoryStore {
    root: PathBuf,
    _lock: Option<StateLock>,
    profile: SkillProfile,
    axioms: Vec<Axiom>,
    last_decay_session: u64,
    log: EpisodeLog,
}

impl MemoryStore {
    /// Create a fresh state directory. The target must be absent or empty.
    pub fn init(root: &Path) -> Result<MemoryStore, MemoryError> {
        if root.exists() {
            let mut entries =
                fs::read_dir(root).map_err(|source| MemoryError::storage(root, source))?;
            if entries.next().is_some() {
                return Err(MemoryError::ContractViolation(format!(
                    "state directory {} is not empty",
                    root.display()
                )));
            }
        } else {
            fs::create_dir_all(root).map_err(|source| MemoryError::storage(root, source))?;
        }
        fs::create_dir_all(root.join(SCENARIOS_DIR))
            .map_err(|source| MemoryError::storage(root, source))?;
        let lock = StateLock::acquire(root)?;
        let log = EpisodeLog::create(&root.join(LOG_FILE))?;
        let mut store = MemoryStore {
            root: root.to_path_buf(),
            _lock: Some(lock),
            profile: SkillProfile::uniform(50.0),
            axioms: Vec::new(),
            last_decay_session: 0,
            log,
        };
        store.save()?;
        Ok(store)
    }

    /// Open an existing state directory for writing, verifying the episode
    /// chain and the stored log head before accepting it.
    pub fn open(root: &Path) -> Result<MemoryStore, MemoryError> {
        if !root.is_dir() {
            return Err(MemoryError::NotFound(root.to_path_buf()));
        }
        let lock = StateLock::acquire(root)?;
        Self::open_inner(root, Some(lock))
    }

    /// Open a persisted snapshot without taking the writer lock. Callers
    /// must not mutate through a read-only store.
    pub fn open_read_only(root: &Path) -> Result<MemoryStore, MemoryError> {
        if !root.is_dir() {
            return Err(MemoryError::NotFound(root.to_path_buf()));
        }
        Self::open_inner(root, None)
    }

    fn open_inner(root: &Path, lock: Option<StateLock>) -> Result<MemoryStore, MemoryError> {
        let log = EpisodeLog::open(&root.join(LOG_FILE))?;
        let profile: SkillProfile = read_json(&root.join(PROFILE_FILE))?;
        let doc: AxiomStoreDoc = read_json(&root.join(AXIOMS_FILE))?;
        if doc.axioms.len() > AXIOM_CAP {
            return Err(MemoryError::Integrity(format!(
                "axiom store holds {} axioms, cap is {AXIOM_CAP}",
                doc.axioms.len()
            )));
        }
        if doc.log_head != log.head() {
            return Err(MemoryError::Integrity(format!(
                "log head mismatch: store expects {}, log is at {}",
                doc.log_head,
                log.head()
            )));
        }
        Ok(MemoryStore {
            root: root.to_path_buf(),
            _lock: lock,
            profile,
            axioms: doc.axioms,
            last_decay_session: doc.last_decay_session,
            log,
        })
    }

    /// Persist the profile, axiom store, and the rendered soul document.
    /// The episode log is already durable: every append writes through.
    pub fn save(&mut self) -> Result<(), MemoryError> {
        write_json(&self.root.join(PROFILE_FILE), &self.profile)?;
        let doc = AxiomStoreDoc {
            axioms: self.axioms.clone(),
            last_decay_session: self.last_decay_session,
            log_head: self.log.head(),
        };
        write_json(&self.root.join(AXIOMS_FILE), &doc)?;
        let soul = super::render_soul(&self.axioms);
        fs::write(self.root.join(SOUL_FILE), soul)
            .map_err(|source| MemoryError::storage(&self.root.join(SOUL_FILE), source))?;
        Ok(())
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn profile(&self) -> &SkillProfile {
        &self.profile
    }

    pub fn profile_mut(&mut self) -> &mut SkillProfile {
        &mut self.profile
    }

    pub fn set_profile(&mut self, profile: SkillProfile) {
        self.profile = profile;
    }

    pub fn axioms(&self) -> &[Axiom] {
        &self.axioms
    }

    pub fn log(&self) -> &EpisodeLog {
        &self.log
    }

    pub fn log_head(&self) -> ChainDigest {
        self.log.head()
    }

    pub fn library_dir(&self) -> PathBuf {
        self.root.join(SCENARIOS_DIR)
    }

    pub fn last_decay_session(&self) -> u64 {
        self.last_decay_session
    }

    /// Append one training episode (L2 write-through).
    pub fn append_episode(&mut self, draft: EpisodeDraft) -> Result<Episode, MemoryError> {
        self.log.append_episode(draft)
    }

    /// Append one administrative record directly (e.g. a rejected scenario
    /// generation).
    pub fn record_admin(
        &mut self,
        session: u64,
        kind: AdminEventKind,
        subject: &str,
        detail: &str,
    ) -> Result<(), MemoryError> {
        self.log.append_admin(session, kind, subject, detail)?;
        Ok(())
    }

    /// Promotion pass; every event is mirrored into L2 as an administrative
    /// record.
    pub fn acp_promote(
        &mut self,
        policy: &AcpPolicy,
        recent: &[Episode],
    ) -> Result<Vec<AcpEvent>, MemoryError> {
        let session = recent.iter().map(|e| e.session_index).max().unwrap_or(0);
        let events = acp::promote(&mut self.axioms, policy, recent)?;
        self.record_events(session, &events)?;
        Ok(events)
    }

    /// Decay pass, applied at most once per session index: repeated calls
    /// with the same `current_session` are no-ops.
    pub fn acp_decay(
        &mut self,
        policy: &AcpPolicy,
        current_session: u64,
    ) -> Result<Vec<AcpEvent>, MemoryError> {
        if current_session <= self.last_decay_session {
            return Ok(Vec::new());
        }
        let events = acp::decay(&mut self.axioms, policy, current_session)?;
        self.last_decay_session = current_session;
        self.record_events(current_session, &events)?;
        Ok(events)
    }

    fn record_events(&mut self, session: u64, events: &[AcpEvent]) -> Result<(), MemoryError> {
        for event in events {
            let (kind, detail) = match event {
                AcpEvent::Created { lesson_key, confidence, .. } => (
                    AdminEventKind::AxiomCreated,
                    format!("lesson {lesson_key:?} promoted at confidence {confidence}"),
                ),
                AcpEvent::Reinforced { confidence, .. } => (
                    AdminEventKind::AxiomReinforced,
                    format!("confidence raised to {confidence}"),
                ),
                AcpEvent::Evicted { confidence, .. } => (
                    AdminEventKind::AxiomEvicted,
                    format!("evicted at confidence {confidence} to respect the cap"),
                ),
                AcpEvent::Deprecated { confidence, .. } => (
                    AdminEventKind::AxiomDeprecated,
                    format!("deprecated at confidence {confidence}"),
                ),
            };
            self.log.append_admin(session, kind, event.axiom_id(), &detail)?;
        }
        Ok(())
    }

    /// Copy of the resettable layers.
    pub fn snapshot(&self) -> StateSnapshot {
        StateSnapshot {
            profile: self.profile.clone(),
            axioms: self.axioms.clone(),
            last_decay_session: self.last_decay_session,
        }
    }

    /// Restore L0 + L1 from a snapshot; the episode log keeps recording.
    pub fn restore(&mut self, snapshot: &StateSnapshot) {
        self.profile = snapshot.profile.clone();
        self.axioms = snapshot.axioms.clone();
        self.last_decay_session = snapshot.last_decay_session;
    }

    /// Restore only the profile (L1) from a snapshot.
    pub fn restore_profile(&mut self, snapshot: &StateSnapshot) {
        self.profile = snapshot.profile.clone();
    }

    /// Write a scenario document into the library (L3).
    pub fn store_scenario(&mut self, scenario: &Scenario) -> Result<PathBuf, MemoryError> {
        let path = self.library_dir().join(format!("{}.json", scenario.id));
        let text = serde_json::to_string_pretty(scenario)
            .map_err(|e| MemoryError::Format(e.to_string()))?;
        fs::write(&path, format!("{text}\n"))
            .map_err(|source| MemoryError::storage(&path, source))?;
        Ok(path)
    }

    /// Write a raw scenario document (used to install bundled corpora
    /// byte-for-byte).
    pub fn store_scenario_document(
        &mut self,
        file_name: &str,
        text: &str,
    ) -> Result<PathBuf, MemoryError> {
        let path = self.library_dir().join(file_name);
        fs::write(&path, text).map_err(|source| MemoryError::storage(&path, source))?;
        Ok(path)
    }

    /// Load and validate the whole library.
    pub fn load_library(&self) -> Result<Vec<Scenario>, MemoryError> {
        scenario::load_library(&self.library_dir())
            .map_err(|e| MemoryError::Integrity(e.to_string()))
    }

    /// Library scenarios for one dimension, sorted by id.
    pub fn scenarios_for(&self, dimension: DimensionId) -> Result<Vec<Scenario>, MemoryError> {
        let mut matches: Vec<Scenario> = self
            .load_library()?
            .into_iter()
            .filter(|s| s.dimension == dimension)
            .collect();
        matches.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(matches)
    }

    /// Verify the on-disk chain of this store's log.
    pub fn verify(&self) -> Result<ChainVerification, MemoryError> {
        super::log::verify_chain(&self.root.join(LOG_FILE))
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, MemoryError> {
    if !path.exists() {
        return Err(MemoryError::NotFound(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|source| MemoryError::storage(path, source))?;
    serde_json::from_str(&text)
        .map_err(|e| MemoryError::Format(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), MemoryError> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| MemoryError::Format(e.to_string()))?;
    fs::write(path, format!("{text}\n")).map_err(|source| MemoryError::storage(path, source))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draft(i: u64, lesson: &str, score: f64) -> EpisodeDraft {
        EpisodeDraft {
            session_index: i,
            dimension: DimensionId::S3,
            scenario_id: "sc".into(),
            attack_summary: "a".into(),
            defense_summary: "d".into(),
            evaluator_score: score,
            lesson_key: lesson.into(),
        }
    }

    #[test]
    fn init_creates_the_full_layout() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("state");
        let _store = MemoryStore::init(&root).unwrap();
        for name in [AXIOMS_FILE, PROFILE_FILE, LOG_FILE, SOUL_FILE, LOCK_FILE] {
            assert!(root.join(name).exists(), "{name}");
        }
        assert!(root.join(SCENARIOS_DIR).is_dir());
    }

    #[test]
    fn init_refuses_a_non_empty_directory() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("state");
        fs::create_dir_all(&root).unwrap();
        fs::write(root.join("existing"), "x").unwrap();
        assert!(matches!(
            MemoryStore::init(&root),
            Err(MemoryError::ContractViolation(_))
        ));
    }

    #[test]
    fn save_then_load_round_trips_a_fresh_state() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("state");
        let snapshot = {
            let mut store = MemoryStore::init(&root).unwrap();
            store.save().unwrap();
            store.snapshot()
        };
        let store = MemoryStore::open(&root).unwrap();
        assert_eq!(store.snapshot(), snapshot);
        assert_eq!(store.log().records().len(), 0);
    }

    #[test]
    fn save_then_load_round_trips_a_mutated_state() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("state");
        let (snapshot, records) = {
            let mut store = MemoryStore::init(&root).unwrap();
            store.profile_mut().record_session(DimensionId::E3, 77.5);
            for i in 1..=3 {
                store.append_episode(draft(i, "verify provenance", 95.0)).unwrap();
            }
            let eps: Vec<Episode> = store.log().episodes().cloned().collect();
            store.acp_promote(&AcpPolicy::default(), &eps).unwrap();
            store.acp_decay(&AcpPolicy::default(), 3).unwrap();
            store.save().unwrap();
            (store.snapshot(), store.log().records().to_vec())
        };
        let store = MemoryStore::open(&root).unwrap();
        assert_eq!(store.snapshot(), snapshot);
        assert_eq!(store.log().records(), &records[..]);
        assert_eq!(store.axioms().len(), 1);
    }

    #[test]
    fn open_refuses_a_tampered_log() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("state");
        {
            let mut store = MemoryStore::init(&root).unwrap();
            store.append_episode(draft(1, "lesson", 90.0)).unwrap();
            store.append_episode(draft(2, "lesson", 91.0)).unwrap();
            store.save().unwrap();
        }
        let log_path = root.join(LOG_FILE);
        let mut bytes = fs::read(&log_path).unwrap();
        let pos = bytes.len() - 20;
        bytes[pos] ^= 0x01;
        fs::write(&log_path, &bytes).unwrap();
        assert!(matches!(
            MemoryStore::open(&root),
            Err(MemoryError::Integrity(_))
        ));
    }

    #[test]
    fn open_refuses_a_rewritten_chain_via_the_stored_head() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("state");
        {
            let mut store = MemoryStore::init(&root).unwrap();
            store.append_episode(draft(1, "lesson", 90.0)).unwrap();
            store.save().unwrap();
        }
        // Rebuild the log from scratch with different content but a valid
        // internal chain. The stored head no longer matches.
        let log_path = root.join(LOG_FILE);
        fs::remove_file(&log_path).unwrap();
        let mut log = EpisodeLog::create(&log_path).unwrap();
        log.append_episode(draft(1, "different lesson", 40.0)).unwrap();
        assert!(matches!(
            MemoryStore::open(&root),
            Err(MemoryError::Integrity(_))
        ));
    }

    #[test]
    fn second_writer_fails_fast() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("state");
        let store = MemoryStore::init(&root).unwrap();
        assert!(matches!(
            MemoryStore::open(&root),
            Err(MemoryError::Locked(_))
        ));
        drop(store);
        assert!(MemoryStore::open(&root).is_ok());
    }

    #[test]
    fn readers_are_not_blocked_by_the_writer_lock() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("state");
        let writer = MemoryStore::init(&root).unwrap();
        let reader = MemoryStore::open_read_only(&root).unwrap();
        assert_eq!(reader.profile(), writer.profile());
        drop(writer);
        // the reader dropping must not remove a lock it never held
        let again = MemoryStore::open(&root);
        assert!(again.is_ok());
        drop(reader);
    }

    #[test]
    fn decay_is_idempotent_within_a_session() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("state");
        let mut store = MemoryStore::init(&root).unwrap();
        for i in 1..=3 {
            store.append_episode(draft(i, "lesson", 95.0)).unwrap();
        }
        let eps: Vec<Episode> = store.log().episodes().cloned().collect();
        store.acp_promote(&AcpPolicy::default(), &eps).unwrap();
        // Axiom reinforced at session 3; decay at session 4 applies once.
        store.acp_decay(&AcpPolicy::default(), 4).unwrap();
        let conf = store.axioms()[0].confidence;
        store.acp_decay(&AcpPolicy::default(), 4).unwrap();
        assert_eq!(store.axioms()[0].confidence, conf);
        store.acp_decay(&AcpPolicy::default(), 5).unwrap();
        assert!(store.axioms()[0].confidence < conf);
    }

    #[test]
    fn promotion_events_are_mirrored_into_the_log() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("state");
        let mut store = MemoryStore::init(&root).unwrap();
        for i in 1..=3 {
            store.append_episode(draft(i, "lesson", 95.0)).unwrap();
        }
        let eps: Vec<Episode> = store.log().episodes().cloned().collect();
        store.acp_promote(&AcpPolicy::default(), &eps).unwrap();
        let admin_count = store
            .log()
            .records()
            .iter()
            .filter(|r| matches!(r, crate::memory::LogRecord::Admin(_)))
            .count();
        assert_eq!(admin_count, 1);
        assert!(store.verify().unwrap().is_ok());
    }

    #[test]
    fn scenario_library_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("state");
        let mut store = MemoryStore::init(&root).unwrap();
        let docs = crate::scenario::corpus::bundled_corpus_documents();
        for (name, text) in docs {
            store.store_scenario_document(name, text).unwrap();
        }
        let library = store.load_library().unwrap();
        assert_eq!(library.len(), 32);
        let s3 = store.scenarios_for(DimensionId::S3).unwrap();
        assert_eq!(s3.len(), 5);
        assert!(s3.windows(2).all(|w| w[0].id < w[1].id));
    }
}
