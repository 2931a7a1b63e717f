//! The hash-chained episode log as an audit trail: append records, verify
//! the chain, then demonstrate that any single-byte tampering is caught and
//! located.

use clawdgo::memory::{verify_chain, EpisodeDraft, MemoryStore, LOG_FILE};
use clawdgo::taxonomy::DimensionId;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let root = dir.path().join("state");
    let log_path = root.join(LOG_FILE);
    {
        let mut store = MemoryStore::init(&root)?;
        for i in 1..=8u64 {
            store.append_episode(EpisodeDraft {
                session_index: i,
                dimension: DimensionId::ALL[(i % 12) as usize],
                scenario_id: format!("exercise-{i}"),
                attack_summary: "simulated attack".into(),
                defense_summary: "simulated defense".into(),
                evaluator_score: 80.0 + i as f64,
                lesson_key: "audit demo lesson".into(),
            })?;
        }
        store.save()?;
        println!("appended 8 episodes; head {}", store.log_head());
    }

    println!("clean verification: {:?}", verify_chain(&log_path)?);

    // flip one byte inside record 5 and watch verification localise it
    let clean = std::fs::read(&log_path)?;
    let mut line = 0usize;
    let mut tampered = clean.clone();
    for (i, b) in clean.iter().enumerate() {
        if *b == b'\n' {
            line += 1;
        } else if line == 5 && *b == b'8' {
            tampered[i] = b'9';
            println!("flipping byte {i} (a score digit inside record 5)");
            break;
        }
    }
    std::fs::write(&log_path, &tampered)?;
    println!("tampered verification: {:?}", verify_chain(&log_path)?);
    assert!(MemoryStore::open(&root).is_err(), "a tampered state must refuse to load");
    println!("store open refused the tampered log, as it should");

    std::fs::write(&log_path, &clean)?;
    println!("restored verification: {:?}", verify_chain(&log_path)?);
    Ok(())
}
