//! The bundled 32-scenario exercise corpus and the standalone fixtures
//! (benign capability assessment, replay transcripts), embedded as the
//! exact documents that ship with the crate.

use super::{parse_scenario, Scenario, ScenarioError};

/// `(file_name, document_text)` for every bundled corpus scenario.
pub fn bundled_corpus_documents() -> &'static [(&'static str, &'static str)] {
    macro_rules! doc {
        ($name:literal) => {
            ($name, include_str!(concat!("../../assets/corpus/", $name)))
        };
    }
    static DOCS: [(&str, &str); 32] = [
        doc!("e1-dataset-to-personal-drive.json"),
        doc!("e1-retention-purge-skip.json"),
        doc!("e2-unlicensed-data-training.json"),
        doc!("e3-after-hours-staging.json"),
        doc!("e3-bulk-export-after-notice.json"),
        doc!("e3-self-privilege-expansion.json"),
        doc!("e4-ransom-note-triage.json"),
        doc!("o1-calendar-invite-bait.json"),
        doc!("o1-invoice-lure-forward.json"),
        doc!("o1-it-reset-distribution.json"),
        doc!("o2-cfo-wire-authority-urgency.json"),
        doc!("o2-helpdesk-pretext-call.json"),
        doc!("o2-vendor-bank-change.json"),
        doc!("o3-contact-graph-survey.json"),
        doc!("o4-admin-panel-default-creds.json"),
        doc!("o4-debug-bind-all-interfaces.json"),
        doc!("o4-firewall-disable-unblock.json"),
        doc!("o4-reverse-tunnel-to-db.json"),
        doc!("o4-upnp-telemetry-mapping.json"),
        doc!("o4-world-readable-share.json"),
        doc!("s1-hidden-comment-directive.json"),
        doc!("s1-ticket-footer-override.json"),
        doc!("s1-translation-payload.json"),
        doc!("s2-forged-session-recap.json"),
        doc!("s2-unsolicited-memory-note.json"),
        doc!("s3-mirror-checksum-mismatch.json"),
        doc!("s3-post-install-script.json"),
        doc!("s3-security-patch-ssh-grab.json"),
        doc!("s3-skill-update-developer-id-hijack.json"),
        doc!("s3-typosquat-package.json"),
        doc!("s4-readonly-key-escalation.json"),
        doc!("s4-token-in-debug-log.json"),
    ];
    &DOCS
}

/// Parse the bundled corpus into typed scenarios.
pub fn bundled_corpus() -> Result<Vec<Scenario>, ScenarioError> {
    bundled_corpus_documents()
        .iter()
        .map(|(_, text)| parse_scenario(text))
        .collect()
}

/// The benign capability-assessment fixture (160-point scale) used by the
/// hyper-vigilance demonstration. Not part of the training corpus.
pub fn benign_assessment_document() -> &'static str {
    include_str!("../../assets/fixtures/benign-capability-assessment.json")
}

pub fn benign_assessment() -> Scenario {
    parse_scenario(benign_assessment_document()).expect("bundled benign fixture is valid")
}

/// Bundled replay transcripts, one per flagship scenario.
pub fn bundled_transcripts() -> &'static [(&'static str, &'static str)] {
    static DOCS: [(&str, &str); 2] = [
        (
            "s3-skill-update-developer-id-hijack",
            include_str!("../../assets/fixtures/transcripts/s3-skill-update-developer-id-hijack.json"),
        ),
        (
            "o2-cfo-wire-authority-urgency",
            include_str!("../../assets/fixtures/transcripts/o2-cfo-wire-authority-urgency.json"),
        ),
    ];
    &DOCS
}
