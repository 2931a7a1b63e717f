//! A full weakest-first training campaign from the bundled seed profile:
//! 16 sessions over the 32-scenario library, printing a per-session trace
//! and a summary table row.

use clawdgo::backend::SimulatedBackend;
use clawdgo::fixtures;
use clawdgo::memory::MemoryStore;
use clawdgo::scheduler::Policy;
use clawdgo::session::{Campaign, SessionConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mut store = MemoryStore::init(&dir.path().join("state"))?;
    fixtures::install_seed_fixture(&mut store)?;
    println!(
        "initial profile: mean {:.2}, weakest {:?}",
        store.profile().mean(),
        store.profile().min_entry()
    );

    let seed = 1;
    let mut backend = SimulatedBackend::with_defaults(seed);
    let config = SessionConfig::new(Policy::WeakestFirst, seed);
    let mut campaign = Campaign::new(&mut store, &mut backend, config)?;
    let trajectory = campaign.run_campaign(16)?;

    println!("\n sess dim  scenario                                  score    mean");
    for o in &trajectory.outcomes {
        println!(
            " s{:03} {:<4} {:<40} {:>6.2}  {:>6.2}",
            o.session_index, o.dimension.to_string(), o.scenario_id, o.evaluator_score, o.profile_mean_after
        );
    }
    println!(
        "\ncondition                      s0     sf   delta  dims\nweakest-first (16 sessions)  {:>5.1}  {:>5.1}  {:>+5.1}  {:>4}",
        trajectory.initial_mean,
        trajectory.final_mean,
        trajectory.delta(),
        trajectory.dims_trained.len()
    );
    println!(
        "\naxioms distilled: {}; episode log length: {}",
        store.axioms().len(),
        store.log().episode_count()
    );
    Ok(())
}
