//! Run the full seeded study suite (curriculum comparison, memory
//! ablation, corpus conformance, over-training demonstration) and print
//! each report.

use clawdgo::experiments;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = 1;
    for id in ["rq1", "rq2", "rq3", "rq4"] {
        let report = experiments::run(id, seed)?;
        print!("{}", experiments::render_human(&report));
        println!();
    }
    Ok(())
}
