//! The recall/precision calibration tradeoff: evaluate the demonstration
//! curves on a grid, locate the F1-optimal training intensity, and refit
//! the parametric families from synthetic trial records.

use clawdgo::sacp::{
    calibration_grid, estimate_curves, f1_at, sparkline, tau_star, CalibrationCurve, TrialRecord,
};
use clawdgo::scenario::ThreatClass;
use clawdgo::scheduler::seeded_stream;
use rand::Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let curve = CalibrationCurve::demo_default();
    let grid = calibration_grid(&curve, 100.0, 5.0)?;
    println!("{:>6} {:>10} {:>8} {:>8}", "tau", "precision", "recall", "f1");
    for point in &grid {
        println!(
            "{:>6.0} {:>10.3} {:>8.3} {:>8.3}",
            point.tau, point.precision, point.recall, point.f1
        );
    }

    let fine = calibration_grid(&curve, 100.0, 1.0)?;
    println!("\nprecision {}", sparkline(&fine.iter().map(|g| g.precision).collect::<Vec<_>>()));
    println!("recall    {}", sparkline(&fine.iter().map(|g| g.recall).collect::<Vec<_>>()));
    println!("f1        {}", sparkline(&fine.iter().map(|g| g.f1).collect::<Vec<_>>()));

    let (star, f1_max) = tau_star(&curve, 100.0, 0.5)?;
    println!("\ntau* = {star} with f1 = {f1_max:.4}");
    println!(
        "training 20 sessions past tau* drops f1 to {:.4}",
        f1_at(curve.precision(star + 20.0), curve.recall(star + 20.0))
    );

    // estimate the curves back from seeded synthetic trials (1:4
    // threat:benign so the implied false-positive rate stays below 1)
    let mut rng = seeded_stream(99, 1);
    let mut trials = Vec::new();
    for tau in (0..=100u64).step_by(5) {
        let r = curve.recall(tau as f64);
        let p = curve.precision(tau as f64);
        let fp = (r * 400.0 * (1.0 - p)) / (p * 1600.0);
        for _ in 0..400 {
            trials.push(TrialRecord { tau, task_class: ThreatClass::Threat, flagged: rng.random::<f64>() < r });
        }
        for _ in 0..1600 {
            trials.push(TrialRecord { tau, task_class: ThreatClass::Benign, flagged: rng.random::<f64>() < fp });
        }
    }
    let estimate = estimate_curves(&trials, 5)?;
    let (r0, r_inf, tau_r, p_hi, p_lo, tau_p, w_p) = estimate.fitted.params();
    println!(
        "\nrefit from {} trials: r0 {r0:.3}, r_inf {r_inf:.3}, tau_r {tau_r:.1}, p_hi {p_hi:.3}, p_lo {p_lo:.3}, tau_p {tau_p:.1}, w_p {w_p:.1}",
        trials.len()
    );
    println!("(true knee sits at tau_p = 45)");
    Ok(())
}
