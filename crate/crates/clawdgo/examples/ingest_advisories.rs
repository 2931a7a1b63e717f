//! Rule-based ingestion of structured threat-intelligence records into
//! schema-valid scenarios: the fixed type→dimension table, the linear
//! severity→difficulty map, and equal-weight rubric synthesis.

use clawdgo::scenario::{ingest_advisory, ingest_advisory_dir, validate_scenario, AdvisoryRecord};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let records = vec![
        AdvisoryRecord {
            kind: "cve".into(),
            severity: 8.8,
            title: "Token leakage through the gateway debug endpoint".into(),
            summary: "A crafted request exposes live session tokens to unauthenticated callers."
                .into(),
            recommended_actions: vec![
                "Upgrade to the patched release".into(),
                "Rotate all exposed tokens".into(),
                "Restrict the gateway to trusted networks".into(),
                "Audit access logs for exploitation".into(),
            ],
            id: Some("ADV-2026-0001".into()),
        },
        AdvisoryRecord {
            kind: "bec".into(),
            severity: 6.5,
            title: "Executive impersonation demanding urgent wire transfers".into(),
            summary: "Finance teams report spoofed executive accounts pushing confidential payment requests that bypass approval flows.".into(),
            recommended_actions: vec![
                "Verify payment requests through a known channel".into(),
                "Enforce the approval workflow without exceptions".into(),
                "Report impersonation attempts to security".into(),
            ],
            id: Some("BEC-IR-2026-0042".into()),
        },
        AdvisoryRecord {
            kind: "exposure".into(),
            severity: 7.2,
            title: "Agent control panels reachable from the internet".into(),
            summary: "Scanning shows thousands of agent admin panels exposed without authentication.".into(),
            recommended_actions: vec![
                "Bind control panels to loopback or management networks".into(),
                "Require authentication on every administrative surface".into(),
                "Inventory exposed services regularly".into(),
            ],
            id: None,
        },
    ];

    for record in &records {
        let scenario = ingest_advisory(record)?;
        println!(
            "{} (severity {}) -> {} [{}], difficulty {:.1}",
            record.kind, record.severity, scenario.id, scenario.dimension, scenario.difficulty
        );
        for item in &scenario.rubric {
            println!("    {:<28} weight {:.4}", item.item_id, item.weight);
        }
        let report = validate_scenario(&serde_json::to_string(&scenario)?)?;
        println!("    validates: {}\n", report.ok);
    }

    // batch ingestion reads a directory of records
    let dir = tempfile::tempdir()?;
    for (i, record) in records.iter().enumerate() {
        std::fs::write(
            dir.path().join(format!("advisory-{i}.json")),
            serde_json::to_string_pretty(record)?,
        )?;
    }
    let batch = ingest_advisory_dir(dir.path())?;
    println!("batch ingestion produced {} scenarios from {:?}\n", batch.len(), dir.path());

    // unknown advisory types are refused
    let weather = AdvisoryRecord {
        kind: "weather".into(),
        severity: 1.0,
        title: "Heavy rain".into(),
        summary: "Not a security record.".into(),
        recommended_actions: vec!["n/a".into(); 3],
        id: None,
    };
    println!("weather record -> {:?}", ingest_advisory(&weather).err().unwrap().to_string());
    Ok(())
}
