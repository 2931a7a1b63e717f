//! The over-training refusal demonstration: a heavily trained agent starts
//! refusing a perfectly legitimate capability assessment, scoring the
//! refusal floor on the assessment's own 160-point scale.

use clawdgo::backend::{hyper_vigilance_prob, SimParams};
use clawdgo::sacp::{hyper_vigilance_demo_simulated, HV_DEMO_RUNS};
use clawdgo::scenario::corpus;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = SimParams::default();
    let scenario = corpus::benign_assessment();
    println!(
        "benign fixture: {} (scale {}, refusal floor {})\n",
        scenario.title, scenario.scale_max, scenario.refusal_score
    );

    println!("{:>6} {:>12} {:>12} {:>10}", "tau", "model", "observed", "refusals");
    for tau in [0u64, 30, 45, 55, 63, 80] {
        let report = hyper_vigilance_demo_simulated(tau, &params, &scenario, 4242, HV_DEMO_RUNS)?;
        println!(
            "{:>6} {:>12.4} {:>12.4} {:>10}",
            tau,
            hyper_vigilance_prob(tau, &params),
            report.refusal_frequency,
            report.refusals
        );
    }

    let report = hyper_vigilance_demo_simulated(63, &params, &scenario, 4242, HV_DEMO_RUNS)?;
    println!(
        "\nat intensity 63: {} of {} runs refused the assessment as a suspected \
         prompt-injection attempt,\neach scoring {} — direct utility loss from over-training.",
        report.refusals, report.runs, report.refused_display
    );
    println!(
        "accepted runs averaged {:.1}/100 ({:.0} on the {}-point scale).",
        report.accepted_mean_score,
        report.accepted_mean_score * scenario.scale_max / 100.0,
        scenario.scale_max
    );
    Ok(())
}
