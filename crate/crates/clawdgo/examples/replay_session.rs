//! Deterministic replay: the bundled flagship transcripts (a supply-chain
//! hijack spotted via a publisher-identity change, and an executive-wire
//! fraud spotted via its authority-urgency-bypass pattern) are replayed
//! through the full session engine.

use std::collections::BTreeMap;

use clawdgo::backend::ReplayBackend;
use clawdgo::memory::{MemoryStore, SkillProfile};
use clawdgo::scenario::corpus;
use clawdgo::scheduler::Policy;
use clawdgo::session::{Campaign, SessionConfig};
use clawdgo::taxonomy::DimensionId;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let backend = ReplayBackend::bundled();
    for (id, _) in corpus::bundled_transcripts() {
        let t = backend.transcript(id).unwrap();
        println!("transcript {id}:");
        println!("  attack:  {}", t.attack_summary);
        println!("  defense: {}", t.defense_summary);
        println!("  score:   {}\n", t.evaluation.score);
    }

    // drive one replayed session: make S3 the weakest dimension and give
    // the library only the flagship supply-chain case
    let dir = tempfile::tempdir()?;
    let mut store = MemoryStore::init(&dir.path().join("state"))?;
    let mut scores: BTreeMap<DimensionId, f64> =
        DimensionId::ALL.iter().map(|d| (*d, 90.0)).collect();
    scores.insert(DimensionId::S3, 40.0);
    let sessions = DimensionId::ALL.iter().map(|d| (*d, 0)).collect();
    store.set_profile(SkillProfile::from_parts(scores, sessions)?);
    let flagship = corpus::bundled_corpus()?
        .into_iter()
        .find(|s| s.id == "s3-skill-update-developer-id-hijack")
        .unwrap();
    store.store_scenario(&flagship)?;
    store.save()?;

    let mut backend = ReplayBackend::bundled();
    let config = SessionConfig::new(Policy::WeakestFirst, 1);
    let mut campaign = Campaign::new(&mut store, &mut backend, config)?;
    let outcome = campaign.run_session()?;
    println!(
        "replayed session {}: dimension {}, scenario {}, evaluator score {}",
        outcome.session_index, outcome.dimension, outcome.scenario_id, outcome.evaluator_score
    );
    let episode = store.log().episodes().next().unwrap();
    println!(
        "episode log records the same score ({}) under lesson {:?}",
        episode.evaluator_score, episode.lesson_key
    );
    Ok(())
}
