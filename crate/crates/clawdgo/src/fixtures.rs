//! Bundled reference fixtures: the seed skill profile used by the training
//! demonstrations and a saturated profile for the hyper-vigilance study.

use std::collections::BTreeMap;

use crate::memory::{MemoryError, MemoryStore, SkillProfile};
use crate::scenario::corpus;
use crate::taxonomy::DimensionId;

/// Name accepted by `init --seed-fixture`.
pub const SEED_FIXTURE_NAME: &str = "paper";

/// The bundled seed profile: 47 prior sessions, mean exactly 80.9, with the
/// weak cluster E3=70, O4=71, S3=73. The remaining nine scores are authored
/// so the twelve sum to 970.8.
pub fn seed_profile() -> SkillProfile {
    use DimensionId::*;
    let scores: BTreeMap<DimensionId, f64> = [
        (S1, 82.5),
        (S2, 82.6),
        (S3, 73.0),
        (S4, 82.7),
        (O1, 82.8),
        (O2, 82.9),
        (O3, 83.0),
        (O4, 71.0),
        (E1, 83.1),
        (E2, 83.2),
        (E3, 70.0),
        (E4, 94.0),
    ]
    .into_iter()
    .collect();
    let sessions: BTreeMap<DimensionId, u64> = [
        (S1, 4),
        (S2, 4),
        (S3, 3),
        (S4, 4),
        (O1, 4),
        (O2, 4),
        (O3, 4),
        (O4, 3),
        (E1, 5),
        (E2, 4),
        (E3, 3),
        (E4, 5),
    ]
    .into_iter()
    .collect();
    SkillProfile::from_parts(scores, sessions).expect("seed fixture is well-formed")
}

/// A saturated profile at a given training intensity, used by the
/// hyper-vigilance demonstration (`tau` spread over the dimensions).
pub fn saturated_profile(tau: u64) -> SkillProfile {
    let mut profile = SkillProfile::uniform(96.0);
    for i in 0..tau {
        let d = DimensionId::ALL[(i % 12) as usize];
        profile.record_session(d, (profile.score(d) + 0.5).min(97.5));
    }
    profile
}

/// Install the seed profile and the bundled 32-scenario corpus into a
/// freshly initialised store.
pub fn install_seed_fixture(store: &mut MemoryStore) -> Result<(), MemoryError> {
    store.set_profile(seed_profile());
    for (name, text) in corpus::bundled_corpus_documents() {
        store.store_scenario_document(name, text)?;
    }
    store.save()
}
