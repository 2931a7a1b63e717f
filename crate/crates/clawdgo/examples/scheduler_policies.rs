//! Side-by-side look at the three selection policies over the bundled seed
//! profile: the weakest-first curriculum, a true uniform-random baseline,
//! and the fixation-prone model that keeps re-selecting its last choice.

use std::collections::BTreeMap;

use clawdgo::fixtures;
use clawdgo::scheduler::{select_dimension, Policy, SchedulerState};
use clawdgo::taxonomy::DimensionId;

fn main() {
    let profile = fixtures::seed_profile();
    println!(
        "profile minimum: {:?} (weakest cluster E3=70, O4=71, S3=73)\n",
        profile.min_entry()
    );

    for policy in [
        Policy::WeakestFirst,
        Policy::UniformRandom,
        Policy::fixation_default(),
    ] {
        let mut sched = SchedulerState::new(7);
        let picks: Vec<DimensionId> = (0..16)
            .map(|_| select_dimension(&profile, policy, &mut sched))
            .collect();
        let line: Vec<String> = picks.iter().map(|d| d.to_string()).collect();
        println!("{:<14} {}", policy.flag_name(), line.join(" "));
    }

    // draw frequencies under uniform selection
    let mut sched = SchedulerState::new(42);
    let mut counts: BTreeMap<DimensionId, u32> = BTreeMap::new();
    for _ in 0..12_000 {
        let d = select_dimension(&profile, Policy::UniformRandom, &mut sched);
        *counts.entry(d).or_default() += 1;
    }
    println!("\nuniform draw counts over 12000 selections (expected 1000 each):");
    for (d, n) in counts {
        println!("  {d}: {n}");
    }
}
