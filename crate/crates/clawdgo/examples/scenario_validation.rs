//! Schema validation over the bundled 32-scenario corpus, a look at one
//! deliberately broken document, and the per-dimension coverage report with
//! its attention-bias flag.

use clawdgo::scenario::{corpus, coverage_report, validate_scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let docs = corpus::bundled_corpus_documents();
    let mut valid = 0;
    for (name, text) in docs {
        let report = validate_scenario(text)?;
        if report.ok {
            valid += 1;
        } else {
            println!("{name}: {:?}", report.errors);
        }
    }
    println!("{valid}/{} corpus documents valid", docs.len());

    // break a copy and watch the validator enumerate every violation
    let broken = docs[0]
        .1
        .replace("\"dimension\": \"E1\"", "\"dimension\": \"S9\"")
        .replace("\"weight\": 0.6", "\"weight\": 0.7");
    let report = validate_scenario(&broken)?;
    println!("\nbroken copy of {}:", docs[0].0);
    for issue in &report.errors {
        println!("  {} ({}): {}", issue.field, issue.rule, issue.message);
    }

    let library = corpus::bundled_corpus()?;
    let coverage = coverage_report(&library);
    println!("\nper-dimension coverage:");
    for (dim, count) in &coverage.counts {
        println!("  {dim}: {count} {}", "#".repeat(*count as usize));
    }
    println!(
        "bias ratio {:.1} (threshold {:.1}) -> {}",
        coverage.bias_ratio,
        coverage.bias_threshold,
        if coverage.biased { "BIASED" } else { "balanced" }
    );
    Ok(())
}
