//! The axiom lifecycle end to end: repeated high-scoring lessons promote
//! into axioms, reinforcement raises confidence, unreinforced axioms decay,
//! and the cap evicts the weakest entry. Ends with the rendered soul
//! document.

use clawdgo::memory::{render_soul, AcpPolicy, EpisodeDraft, MemoryStore};
use clawdgo::taxonomy::DimensionId;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mut store = MemoryStore::init(&dir.path().join("state"))?;
    let policy = AcpPolicy::default();
    println!("policy: {policy:?}\n");

    // three high-scoring repetitions of the same lesson promote an axiom
    let mut session = 0u64;
    let mut train = |store: &mut MemoryStore, lesson: &str, dim: DimensionId, score: f64| {
        session += 1;
        store
            .append_episode(EpisodeDraft {
                session_index: session,
                dimension: dim,
                scenario_id: format!("demo-{session}"),
                attack_summary: "attack".into(),
                defense_summary: "defense".into(),
                evaluator_score: score,
                lesson_key: lesson.into(),
            })
            .unwrap();
        let group: Vec<_> = store
            .log()
            .episodes()
            .filter(|e| e.lesson_key == lesson)
            .cloned()
            .collect();
        let events = store.acp_promote(&policy, &group).unwrap();
        let decayed = store.acp_decay(&policy, session).unwrap();
        for e in events.iter().chain(&decayed) {
            println!("session {session}: {e:?}");
        }
    };

    for _ in 0..3 {
        train(&mut store, "verify provenance before trusting updates", DimensionId::S3, 95.0);
    }
    for _ in 0..4 {
        train(&mut store, "verify payment requests through an official channel", DimensionId::O2, 92.0);
    }
    println!(
        "\nafter promotion: {} axiom(s), confidences {:?}",
        store.axioms().len(),
        store.axioms().iter().map(|a| a.confidence).collect::<Vec<_>>()
    );

    // sessions that never touch the first lesson decay it toward the floor
    for _ in 0..30 {
        train(&mut store, "an unrelated lesson", DimensionId::E1, 50.0);
    }
    println!(
        "\nafter 30 unrelated sessions: {} axiom(s) remain",
        store.axioms().len()
    );

    store.save()?;
    println!("\n--- soul.md ---\n{}", render_soul(store.axioms()));
    Ok(())
}
