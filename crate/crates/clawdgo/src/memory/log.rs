//! Append-only, hash-chained episode log (L2).
//!
//! One canonically-serialized record per line (field-name-sorted keys,
//! minimal whitespace, UTF-8, LF terminators) after a fixed header line that
//! names the digest algorithm. Each record's hash covers the previous
//! record's hash plus the record body, so any rewrite of history breaks
//! verification.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::taxonomy::DimensionId;

use super::MemoryError;

/// Fixed header line (without the terminating LF).
pub const LOG_HEADER: &str = r#"{"digest":"sha-256","format":"clawdgo-episode-log","version":1}"#;

/// 32-byte SHA-256 digest, hex-encoded in documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChainDigest([u8; 32]);

impl ChainDigest {
    pub const ZERO: ChainDigest = ChainDigest([0u8; 32]);

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Option<ChainDigest> {
        let bytes = hex::decode(s).ok()?;
        let arr: [u8; 32] = bytes.try_into().ok()?;
        Some(ChainDigest(arr))
    }

    pub fn of(parts: &[&[u8]]) -> ChainDigest {
        let mut hasher = Sha256::new();
        for part in parts {
            hasher.update(part);
        }
        ChainDigest(hasher.finalize().into())
    }
}

impl std::fmt::Display for ChainDigest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for ChainDigest {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for ChainDigest {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        ChainDigest::from_hex(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("invalid digest {s:?}")))
    }
}

/// One completed training session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub session_index: u64,
    pub dimension: DimensionId,
    pub scenario_id: String,
    pub attack_summary: String,
    pub defense_summary: String,
    pub evaluator_score: f64,
    pub lesson_key: String,
    pub prev_hash: ChainDigest,
    pub record_hash: ChainDigest,
}

/// Episode fields supplied by the session engine; hashes are computed on
/// append.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeDraft {
    pub session_index: u64,
    pub dimension: DimensionId,
    pub scenario_id: String,
    pub attack_summary: String,
    pub defense_summary: String,
    pub evaluator_score: f64,
    pub lesson_key: String,
}

/// Event kinds recorded as administrative log entries: axiom lifecycle
/// events plus rejected scenario generations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdminEventKind {
    AxiomCreated,
    AxiomReinforced,
    AxiomEvicted,
    AxiomDeprecated,
    GenerationRejected,
}

/// Administrative record sharing the episode chain: axiom promotions,
/// evictions, deprecations, and rejected-generation notes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdminRecord {
    pub session_index: u64,
    pub event: AdminEventKind,
    pub axiom_id: String,
    pub detail: String,
    pub prev_hash: ChainDigest,
    pub record_hash: ChainDigest,
}

/// One line of the log. Training episodes and administrative records share
/// the hash chain; the episode count only counts training sessions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogRecord {
    Episode(Episode),
    Admin(AdminRecord),
}

impl LogRecord {
    pub fn prev_hash(&self) -> ChainDigest {
        match self {
            LogRecord::Episode(e) => e.prev_hash,
            LogRecord::Admin(a) => a.prev_hash,
        }
    }

    pub fn record_hash(&self) -> ChainDigest {
        match self {
            LogRecord::Episode(e) => e.record_hash,
            LogRecord::Admin(a) => a.record_hash,
        }
    }

    pub fn session_index(&self) -> u64 {
        match self {
            LogRecord::Episode(e) => e.session_index,
            LogRecord::Admin(a) => a.session_index,
        }
    }

    fn with_hashes(mut self, prev: ChainDigest, record: ChainDigest) -> LogRecord {
        match &mut self {
            LogRecord::Episode(e) => {
                e.prev_hash = prev;
                e.record_hash = record;
            }
            LogRecord::Admin(a) => {
                a.prev_hash = prev;
                a.record_hash = record;
            }
        }
        self
    }
}

/// Canonical serialization: field-name-sorted, minimal-whitespace JSON.
/// Routed through `serde_json::Value`, whose object representation sorts
/// keys.
fn canonical_json(record: &LogRecord) -> Result<serde_json::Value, MemoryError> {
    serde_json::to_value(record).map_err(|e| MemoryError::Format(e.to_string()))
}

/// Hash input is the canonical serialization of the record minus
/// `record_hash`, prefixed by the raw previous digest bytes.
fn compute_record_hash(prev: ChainDigest, record: &LogRecord) -> Result<ChainDigest, MemoryError> {
    let mut value = canonical_json(record)?;
    value
        .as_object_mut()
        .expect("log records serialize to objects")
        .remove("record_hash");
    let body = value.to_string();
    Ok(ChainDigest::of(&[prev.as_bytes(), body.as_bytes()]))
}

fn canonical_line(record: &LogRecord) -> Result<String, MemoryError> {
    Ok(canonical_json(record)?.to_string())
}

/// Result of verifying a log file. Record indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainVerification {
    Ok { records: u64 },
    CorruptHeader,
    BadRecord { index: u64 },
}

impl ChainVerification {
    pub fn is_ok(&self) -> bool {
        matches!(self, ChainVerification::Ok { .. })
    }

    pub fn first_bad_index(&self) -> Option<u64> {
        match self {
            ChainVerification::BadRecord { index } => Some(*index),
            _ => None,
        }
    }
}

/// Recompute every record hash in a log file and report the first record
/// where recomputation (or parsing, or chain linkage) fails.
pub fn verify_chain(path: &Path) -> Result<ChainVerification, MemoryError> {
    let bytes = std::fs::read(path).map_err(|source| MemoryError::storage(path, source))?;
    Ok(verify_chain_bytes(&bytes))
}

fn verify_chain_bytes(bytes: &[u8]) -> ChainVerification {
    let mut lines = bytes.split(|b| *b == b'\n');
    match lines.next() {
        Some(header) if header == LOG_HEADER.as_bytes() => {}
        _ => return ChainVerification::CorruptHeader,
    }
    let mut prev = ChainDigest::ZERO;
    let mut index = 0u64;
    for line in lines {
        if line.is_empty() {
            // Terminator after the final LF; any later content would be a
            // fresh (possibly bad) record, and split yields it separately.
            continue;
        }
        index += 1;
        let record: LogRecord = match serde_json::from_slice(line) {
            Ok(r) => r,
            Err(_) => return ChainVerification::BadRecord { index },
        };
        if record.prev_hash() != prev {
            return ChainVerification::BadRecord { index };
        }
        match compute_record_hash(prev, &record) {
            Ok(h) if h == record.record_hash() => {}
            _ => return ChainVerification::BadRecord { index },
        }
        prev = record.record_hash();
    }
    ChainVerification::Ok { records: index }
}

/// The L2 store: an append-only file plus the in-memory record list.
#[derive(Debug)]
pub struct EpisodeLog {
    path: PathBuf,
    records: Vec<LogRecord>,
    head: ChainDigest,
    episode_count: u64,
}

impl PartialEq for EpisodeLog {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records
    }
}

impl EpisodeLog {
    /// Create a fresh log file containing only the header line.
    pub fn create(path: &Path) -> Result<EpisodeLog, MemoryError> {
        if path.exists() {
            return Err(MemoryError::ContractViolation(format!(
                "log file {} already exists",
                path.display()
            )));
        }
        std::fs::write(path, format!("{LOG_HEADER}\n"))
            .map_err(|source| MemoryError::storage(path, source))?;
        Ok(EpisodeLog {
            path: path.to_path_buf(),
            records: Vec::new(),
            head: ChainDigest::ZERO,
            episode_count: 0,
        })
    }

    /// Open and fully verify an existing log file.
    pub fn open(path: &Path) -> Result<EpisodeLog, MemoryError> {
        if !path.exists() {
            return Err(MemoryError::NotFound(path.to_path_buf()));
        }
        match verify_chain(path)? {
            ChainVerification::Ok { .. } => {}
            ChainVerification::CorruptHeader => {
                return Err(MemoryError::Integrity(format!(
                    "{}: corrupt log header",
                    path.display()
                )))
            }
            ChainVerification::BadRecord { index } => {
                return Err(MemoryError::Integrity(format!(
                    "{}: chain verification failed at record {index}",
                    path.display()
                )))
            }
        }
        let text =
            std::fs::read_to_string(path).map_err(|source| MemoryError::storage(path, source))?;
        let mut records = Vec::new();
        for line in text.lines().skip(1) {
            if line.is_empty() {
                continue;
            }
            let record: LogRecord =
                serde_json::from_str(line).map_err(|e| MemoryError::Format(e.to_string()))?;
            records.push(record);
        }
        let head = records
            .last()
            .map(|r| r.record_hash())
            .unwrap_or(ChainDigest::ZERO);
        let episode_count = records
            .iter()
            .filter(|r| matches!(r, LogRecord::Episode(_)))
            .count() as u64;
        Ok(EpisodeLog {
            path: path.to_path_buf(),
            records,
            head,
            episode_count,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Digest of the latest record; all-zero when the log is empty.
    pub fn head(&self) -> ChainDigest {
        self.head
    }

    /// Number of training episodes (administrative records excluded).
    pub fn episode_count(&self) -> u64 {
        self.episode_count
    }

    pub fn records(&self) -> &[LogRecord] {
        &self.records
    }

    pub fn episodes(&self) -> impl Iterator<Item = &Episode> {
        self.records.iter().filter_map(|r| match r {
            LogRecord::Episode(e) => Some(e),
            LogRecord::Admin(_) => None,
        })
    }

    /// Append one training episode. The draft's `session_index` must be
    /// exactly one past the previous maximum.
    pub fn append_episode(&mut self, draft: EpisodeDraft) -> Result<Episode, MemoryError> {
        if draft.session_index != self.episode_count + 1 {
            return Err(MemoryError::ContractViolation(format!(
                "non-monotonic session_index {} (expected {})",
                draft.session_index,
                self.episode_count + 1
            )));
        }
        if !(0.0..=100.0).contains(&draft.evaluator_score) {
            return Err(MemoryError::ContractViolation(format!(
                "evaluator_score {} outside [0,100]",
                draft.evaluator_score
            )));
        }
        let record = LogRecord::Episode(Episode {
            session_index: draft.session_index,
            dimension: draft.dimension,
            scenario_id: draft.scenario_id,
            attack_summary: draft.attack_summary,
            defense_summary: draft.defense_summary,
            evaluator_score: draft.evaluator_score,
            lesson_key: draft.lesson_key,
            prev_hash: ChainDigest::ZERO,
            record_hash: ChainDigest::ZERO,
        });
        let record = self.seal_and_write(record)?;
        self.episode_count += 1;
        match record {
            LogRecord::Episode(e) => Ok(e),
            LogRecord::Admin(_) => unreachable!(),
        }
    }

    /// Append one administrative record.
    pub fn append_admin(
        &mut self,
        session_index: u64,
        event: AdminEventKind,
        axiom_id: &str,
        detail: &str,
    ) -> Result<AdminRecord, MemoryError> {
        let record = LogRecord::Admin(AdminRecord {
            session_index,
            event,
            axiom_id: axiom_id.to_string(),
            detail: detail.to_string(),
            prev_hash: ChainDigest::ZERO,
            record_hash: ChainDigest::ZERO,
        });
        match self.seal_and_write(record)? {
            LogRecord::Admin(a) => Ok(a),
            LogRecord::Episode(_) => unreachable!(),
        }
    }

    fn seal_and_write(&mut self, record: LogRecord) -> Result<LogRecord, MemoryError> {
        let prev = self.head;
        // Hash over the record with prev_hash already in place.
        let staged = record.with_hashes(prev, ChainDigest::ZERO);
        let hash = compute_record_hash(prev, &staged)?;
        let sealed = staged.with_hashes(prev, hash);
        let line = canonical_line(&sealed)?;
        let mut file = OpenOptions::new()
            .append(true)
            .open(&self.path)
            .map_err(|source| MemoryError::storage(&self.path, source))?;
        file.write_all(line.as_bytes())
            .and_then(|_| file.write_all(b"\n"))
            .map_err(|source| MemoryError::storage(&self.path, source))?;
        self.head = hash;
        self.records.push(sealed.clone());
        Ok(sealed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draft(i: u64) -> EpisodeDraft {
        EpisodeDraft {
            session_index: i,
            dimension: DimensionId::S1,
            scenario_id: format!("sc-{i}"),
            attack_summary: "probe".into(),
            defense_summary: "held".into(),
            evaluator_score: 88.0,
            lesson_key: "k1".into(),
        }
    }

    #[test]
    fn first_episode_chains_from_the_zero_digest() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("episodes.log");
        let mut log = EpisodeLog::create(&path).unwrap();
        let e = log.append_episode(draft(1)).unwrap();
        assert_eq!(e.prev_hash, ChainDigest::ZERO);
        assert!(verify_chain(&path).unwrap().is_ok());
    }

    #[test]
    fn hand_computed_hashes_match_a_two_episode_fixture() {
        // Independent oracle: the canonical line is written out literally and
        // hashed with sha2 directly, without going through the log's own
        // serialization helpers.
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("episodes.log");
        let mut log = EpisodeLog::create(&path).unwrap();
        let e1 = log.append_episode(draft(1)).unwrap();

        let zero_hex = "0".repeat(64);
        let body1 = format!(
            r#"{{"attack_summary":"probe","defense_summary":"held","dimension":"S1","evaluator_score":88.0,"kind":"episode","lesson_key":"k1","prev_hash":"{zero_hex}","scenario_id":"sc-1","session_index":1}}"#
        );
        let mut hasher = Sha256::new();
        hasher.update([0u8; 32]);
        hasher.update(body1.as_bytes());
        let expected1: [u8; 32] = hasher.finalize().into();
        assert_eq!(e1.record_hash.as_bytes(), &expected1);

        let e2 = log.append_episode(draft(2)).unwrap();
        let prev_hex = hex::encode(expected1);
        let body2 = format!(
            r#"{{"attack_summary":"probe","defense_summary":"held","dimension":"S1","evaluator_score":88.0,"kind":"episode","lesson_key":"k1","prev_hash":"{prev_hex}","scenario_id":"sc-2","session_index":2}}"#
        );
        let mut hasher = Sha256::new();
        hasher.update(expected1);
        hasher.update(body2.as_bytes());
        let expected2: [u8; 32] = hasher.finalize().into();
        assert_eq!(e2.record_hash.as_bytes(), &expected2);
        assert_eq!(e2.prev_hash.as_bytes(), &expected1);
    }

    #[test]
    fn empty_log_verifies_ok() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("episodes.log");
        EpisodeLog::create(&path).unwrap();
        assert_eq!(verify_chain(&path).unwrap(), ChainVerification::Ok { records: 0 });
    }

    #[test]
    fn untampered_sixteen_episode_log_verifies_ok() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("episodes.log");
        let mut log = EpisodeLog::create(&path).unwrap();
        for i in 1..=16 {
            log.append_episode(draft(i)).unwrap();
        }
        assert_eq!(
            verify_chain(&path).unwrap(),
            ChainVerification::Ok { records: 16 }
        );
    }

    #[test]
    fn tampering_with_record_five_reports_index_five() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("episodes.log");
        let mut log = EpisodeLog::create(&path).unwrap();
        for i in 1..=8 {
            log.append_episode(draft(i)).unwrap();
        }
        let text = std::fs::read_to_string(&path).unwrap();
        let mutated: Vec<String> = text
            .lines()
            .enumerate()
            .map(|(i, line)| {
                // line 0 is the header, so record 5 is line 5
                if i == 5 {
                    line.replace("\"evaluator_score\":88.0", "\"evaluator_score\":89.0")
                } else {
                    line.to_string()
                }
            })
            .collect();
        std::fs::write(&path, format!("{}\n", mutated.join("\n"))).unwrap();
        assert_eq!(
            verify_chain(&path).unwrap(),
            ChainVerification::BadRecord { index: 5 }
        );
    }

    #[test]
    fn mutating_any_byte_of_episode_one_reports_index_one() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("episodes.log");
        let mut log = EpisodeLog::create(&path).unwrap();
        log.append_episode(draft(1)).unwrap();
        log.append_episode(draft(2)).unwrap();
        let clean = std::fs::read(&path).unwrap();
        let header_len = LOG_HEADER.len() + 1;
        let line1_end = header_len
            + clean[header_len..]
                .iter()
                .position(|b| *b == b'\n')
                .unwrap();
        for offset in header_len..line1_end {
            let mut bytes = clean.clone();
            bytes[offset] ^= 0x01;
            std::fs::write(&path, &bytes).unwrap();
            let v = verify_chain(&path).unwrap();
            assert_eq!(
                v,
                ChainVerification::BadRecord { index: 1 },
                "offset {offset}"
            );
        }
    }

    #[test]
    fn header_tampering_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("episodes.log");
        EpisodeLog::create(&path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[2] ^= 0x01;
        std::fs::write(&path, &bytes).unwrap();
        assert_eq!(verify_chain(&path).unwrap(), ChainVerification::CorruptHeader);
    }

    #[test]
    fn non_monotonic_session_index_is_a_contract_violation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("episodes.log");
        let mut log = EpisodeLog::create(&path).unwrap();
        log.append_episode(draft(1)).unwrap();
        let err = log.append_episode(draft(3)).unwrap_err();
        assert!(matches!(err, MemoryError::ContractViolation(_)));
    }

    #[test]
    fn admin_records_share_the_chain_but_not_the_episode_count() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("episodes.log");
        let mut log = EpisodeLog::create(&path).unwrap();
        log.append_episode(draft(1)).unwrap();
        log.append_admin(1, AdminEventKind::AxiomCreated, "ax-1", "created").unwrap();
        log.append_episode(draft(2)).unwrap();
        assert_eq!(log.episode_count(), 2);
        assert_eq!(log.records().len(), 3);
        assert!(verify_chain(&path).unwrap().is_ok());
    }

    #[test]
    fn reopen_restores_records_and_head() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("episodes.log");
        let mut log = EpisodeLog::create(&path).unwrap();
        for i in 1..=4 {
            log.append_episode(draft(i)).unwrap();
        }
        let reopened = EpisodeLog::open(&path).unwrap();
        assert_eq!(reopened.records(), log.records());
        assert_eq!(reopened.head(), log.head());
        assert_eq!(reopened.episode_count(), 4);
    }

    #[test]
    fn append_preserves_earlier_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("episodes.log");
        let mut log = EpisodeLog::create(&path).unwrap();
        log.append_episode(draft(1)).unwrap();
        let before = std::fs::read(&path).unwrap();
        log.append_episode(draft(2)).unwrap();
        let after = std::fs::read(&path).unwrap();
        assert_eq!(&after[..before.len()], &before[..]);
    }
}
