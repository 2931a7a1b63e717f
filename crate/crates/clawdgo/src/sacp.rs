//! Calibration toolkit for the recall/precision tradeoff in training
//! intensity: parametric curves, F1 optimisation over a grid, empirical
//! curve estimation from trial records, and the hyper-vigilance
//! demonstration.
//!
//! Recall follows a saturating exponential and precision a logistic decay —
//! the minimal smooth families that are monotone and carry a degradation
//! knee. Training intensity `tau` counts completed sessions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{
    hyper_vigilance_prob, AgentBackend, BackendError, DefenseContext, SimParams, SimulatedBackend,
};
use crate::memory::SkillProfile;
use crate::scenario::{Scenario, ThreatClass};

#[derive(Debug, Error)]
pub enum SacpError {
    #[error("invalid calibration curve: {0}")]
    InvalidCurve(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("estimation error for the {curve} curve: {reason}")]
    Estimation { curve: String, reason: String },
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Parametric recall/precision model in training intensity.
///
/// `R(tau) = r_inf - (r_inf - r0) * exp(-tau / tau_r)` is non-decreasing;
/// `P(tau) = p_lo + (p_hi - p_lo) * sigmoid(-(tau - tau_p) / w_p)` is
/// non-increasing; both stay in [0,1] for valid parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCurve", into = "RawCurve")]
pub struct CalibrationCurve {
    r0: f64,
    r_inf: f64,
    tau_r: f64,
    p_hi: f64,
    p_lo: f64,
    tau_p: f64,
    w_p: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawCurve {
    r0: f64,
    r_inf: f64,
    tau_r: f64,
    p_hi: f64,
    p_lo: f64,
    tau_p: f64,
    w_p: f64,
}

impl From<CalibrationCurve> for RawCurve {
    fn from(c: CalibrationCurve) -> RawCurve {
        RawCurve {
            r0: c.r0,
            r_inf: c.r_inf,
            tau_r: c.tau_r,
            p_hi: c.p_hi,
            p_lo: c.p_lo,
            tau_p: c.tau_p,
            w_p: c.w_p,
        }
    }
}

impl TryFrom<RawCurve> for CalibrationCurve {
    type Error = String;

    fn try_from(raw: RawCurve) -> Result<CalibrationCurve, String> {
        CalibrationCurve::new(raw.r0, raw.r_inf, raw.tau_r, raw.p_hi, raw.p_lo, raw.tau_p, raw.w_p)
            .map_err(|e| e.to_string())
    }
}

impl CalibrationCurve {
    pub fn new(
        r0: f64,
        r_inf: f64,
        tau_r: f64,
        p_hi: f64,
        p_lo: f64,
        tau_p: f64,
        w_p: f64,
    ) -> Result<CalibrationCurve, SacpError> {
        if !(0.0..=1.0).contains(&r0) || !(r0..=1.0).contains(&r_inf) {
            return Err(SacpError::InvalidCurve(format!(
                "require 0 <= r0 <= r_inf <= 1, got r0={r0}, r_inf={r_inf}"
            )));
        }
        if !(0.0..=1.0).contains(&p_hi) || !(0.0..=p_hi).contains(&p_lo) {
            return Err(SacpError::InvalidCurve(format!(
                "require 0 <= p_lo <= p_hi <= 1, got p_lo={p_lo}, p_hi={p_hi}"
            )));
        }
        if tau_r <= 0.0 || tau_p <= 0.0 || w_p <= 0.0 {
            return Err(SacpError::InvalidCurve(
                "tau_r, tau_p, and w_p must be positive".into(),
            ));
        }
        Ok(CalibrationCurve {
            r0,
            r_inf,
            tau_r,
            p_hi,
            p_lo,
            tau_p,
            w_p,
        })
    }

    /// The illustrative demonstration curve used by the CLI default.
    pub fn demo_default() -> CalibrationCurve {
        CalibrationCurve::new(0.4, 0.98, 12.0, 0.95, 0.35, 45.0, 8.0)
            .expect("demo constants are valid")
    }

    pub fn recall(&self, tau: f64) -> f64 {
        self.r_inf - (self.r_inf - self.r0) * (-tau / self.tau_r).exp()
    }

    pub fn precision(&self, tau: f64) -> f64 {
        self.p_lo + (self.p_hi - self.p_lo) * logistic(-(tau - self.tau_p) / self.w_p)
    }

    pub fn params(&self) -> (f64, f64, f64, f64, f64, f64, f64) {
        (self.r0, self.r_inf, self.tau_r, self.p_hi, self.p_lo, self.tau_p, self.w_p)
    }
}

/// Harmonic mean of precision and recall; 0 when both vanish.
pub fn f1_at(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// One grid row of the calibration report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub tau: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Evaluate the curve on the grid `{0, step, 2*step, ..., tau_max}`.
pub fn calibration_grid(
    curve: &CalibrationCurve,
    tau_max: f64,
    step: f64,
) -> Result<Vec<GridPoint>, SacpError> {
    if tau_max <= 0.0 || step <= 0.0 {
        return Err(SacpError::InvalidInput("tau_max and step must be positive".into()));
    }
    let mut grid = Vec::new();
    let mut k = 0u64;
    loop {
        let tau = k as f64 * step;
        if tau > tau_max {
            break;
        }
        let precision = curve.precision(tau);
        let recall = curve.recall(tau);
        grid.push(GridPoint {
            tau,
            precision,
            recall,
            f1: f1_at(precision, recall),
        });
        k += 1;
    }
    if grid.last().map(|g| g.tau) != Some(tau_max) {
        let precision = curve.precision(tau_max);
        let recall = curve.recall(tau_max);
        grid.push(GridPoint {
            tau: tau_max,
            precision,
            recall,
            f1: f1_at(precision, recall),
        });
    }
    Ok(grid)
}

/// Grid search for the F1-optimal training intensity. Ties resolve to the
/// smallest grid point; the returned maximum is exactly
/// `f1_at(P(tau_star), R(tau_star))`.
pub fn tau_star(
    curve: &CalibrationCurve,
    tau_max: f64,
    step: f64,
) -> Result<(f64, f64), SacpError> {
    let grid = calibration_grid(curve, tau_max, step)?;
    let mut best = &grid[0];
    for point in &grid[1..] {
        if point.f1 > best.f1 {
            best = point;
        }
    }
    Ok((best.tau, best.f1))
}

/// One observed trial: did the agent raise a threat flag on a task of the
/// given class at training intensity `tau`?
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub tau: u64,
    pub task_class: ThreatClass,
    pub flagged: bool,
}

/// One empirical curve point (bin mean intensity, estimated value).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalPoint {
    pub tau: f64,
    pub value: f64,
}

/// Empirical points plus the fitted parametric curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveEstimate {
    pub recall_points: Vec<EmpiricalPoint>,
    pub precision_points: Vec<EmpiricalPoint>,
    pub fitted: CalibrationCurve,
}

#[derive(Default)]
struct Bin {
    tau_sum: u64,
    trials: u64,
    threats: u64,
    flagged_threats: u64,
    benign: u64,
    flags: u64,
}

/// Bin trials by intensity and fit both parametric families by
/// coarse-to-fine grid search on the squared residuals.
///
/// A bin yields a recall point when it saw at least one threat, and a
/// precision point when it saw at least one flag and at least one benign
/// task (without negatives the precision estimate carries no information).
pub fn estimate_curves(
    trials: &[TrialRecord],
    bin_width: u64,
) -> Result<CurveEstimate, SacpError> {
    if trials.is_empty() {
        return Err(SacpError::InvalidInput("no trials supplied".into()));
    }
    if bin_width == 0 {
        return Err(SacpError::InvalidInput("bin_width must be >= 1".into()));
    }
    let mut bins: BTreeMap<u64, Bin> = BTreeMap::new();
    for trial in trials {
        let bin = bins.entry(trial.tau / bin_width).or_default();
        bin.tau_sum += trial.tau;
        bin.trials += 1;
        match trial.task_class {
            ThreatClass::Threat => {
                bin.threats += 1;
                if trial.flagged {
                    bin.flagged_threats += 1;
                    bin.flags += 1;
                }
            }
            ThreatClass::Benign => {
                bin.benign += 1;
                if trial.flagged {
                    bin.flags += 1;
                }
            }
        }
    }

    let mut recall_points = Vec::new();
    let mut precision_points = Vec::new();
    for bin in bins.values() {
        let tau = bin.tau_sum as f64 / bin.trials as f64;
        if bin.threats > 0 {
            recall_points.push(EmpiricalPoint {
                tau,
                value: bin.flagged_threats as f64 / bin.threats as f64,
            });
        }
        if bin.flags > 0 && bin.benign > 0 {
            precision_points.push(EmpiricalPoint {
                tau,
                value: bin.flagged_threats as f64 / bin.flags as f64,
            });
        }
    }
    if recall_points.is_empty() {
        return Err(SacpError::Estimation {
            curve: "recall".into(),
            reason: "no bin contains a threat task".into(),
        });
    }
    if precision_points.is_empty() {
        return Err(SacpError::Estimation {
            curve: "precision".into(),
            reason: "no bin contains both a flag and a benign task".into(),
        });
    }

    let tau_hi = recall_points
        .iter()
        .chain(&precision_points)
        .map(|p| p.tau)
        .fold(1.0f64, f64::max);

    let (r0, r_inf, tau_r) = fit_recall(&recall_points, tau_hi);
    let (p_hi, p_lo, tau_p, w_p) = fit_precision(&precision_points, tau_hi);
    let fitted = CalibrationCurve::new(r0, r_inf, tau_r, p_hi, p_lo, tau_p, w_p)?;
    Ok(CurveEstimate {
        recall_points,
        precision_points,
        fitted,
    })
}

fn grid_around(center: f64, half_width: f64, lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let a = (center - half_width).max(lo);
    let b = (center + half_width).min(hi);
    (0..points)
        .map(|i| a + (b - a) * i as f64 / (points - 1) as f64)
        .collect()
}

fn sse(points: &[EmpiricalPoint], f: impl Fn(f64) -> f64) -> f64 {
    points
        .iter()
        .map(|p| {
            let d = f(p.tau) - p.value;
            d * d
        })
        .sum()
}

fn fit_recall(points: &[EmpiricalPoint], tau_hi: f64) -> (f64, f64, f64) {
    const POINTS: usize = 9;
    let mut best = (0.0, 1.0, tau_hi / 4.0);
    let mut best_err = f64::INFINITY;
    let mut ranges = ((0.5, 0.0, 1.0), (0.5, 0.0, 1.0), (tau_hi / 2.0, 1e-3, tau_hi));
    let mut centers = (0.5, 0.5, tau_hi / 2.0);
    for _round in 0..4 {
        for r0 in grid_around(centers.0, ranges.0 .0, ranges.0 .1, ranges.0 .2, POINTS) {
            for r_inf in grid_around(centers.1, ranges.1 .0, ranges.1 .1, ranges.1 .2, POINTS) {
                if r_inf < r0 {
                    continue;
                }
                for tau_r in
                    grid_around(centers.2, ranges.2 .0, ranges.2 .1, ranges.2 .2, POINTS)
                {
                    let err = sse(points, |t| r_inf - (r_inf - r0) * (-t / tau_r).exp());
                    if err < best_err {
                        best_err = err;
                        best = (r0, r_inf, tau_r);
                    }
                }
            }
        }
        centers = best;
        ranges.0 .0 /= 3.0;
        ranges.1 .0 /= 3.0;
        ranges.2 .0 /= 3.0;
    }
    best
}

fn fit_precision(points: &[EmpiricalPoint], tau_hi: f64) -> (f64, f64, f64, f64) {
    const POINTS: usize = 9;
    let mut best = (1.0, 0.0, tau_hi / 2.0, tau_hi / 8.0);
    let mut best_err = f64::INFINITY;
    let mut half = (0.5, 0.5, tau_hi / 2.0, tau_hi / 4.0);
    let mut centers = (0.5, 0.5, tau_hi / 2.0, tau_hi / 4.0);
    for _round in 0..4 {
        for p_hi in grid_around(centers.0, half.0, 0.0, 1.0, POINTS) {
            for p_lo in grid_around(centers.1, half.1, 0.0, 1.0, POINTS) {
                if p_lo > p_hi {
                    continue;
                }
                for tau_p in grid_around(centers.2, half.2, 1e-3, tau_hi, POINTS) {
                    for w_p in grid_around(centers.3, half.3, 1e-3, tau_hi / 2.0, POINTS) {
                        let err = sse(points, |t| {
                            p_lo + (p_hi - p_lo) * logistic(-(t - tau_p) / w_p)
                        });
                        if err < best_err {
                            best_err = err;
                            best = (p_hi, p_lo, tau_p, w_p);
                        }
                    }
                }
            }
        }
        centers = best;
        half.0 /= 3.0;
        half.1 /= 3.0;
        half.2 /= 3.0;
        half.3 /= 3.0;
    }
    best
}

/// Monospace sparkline of a value series on [0,1].
pub fn sparkline(values: &[f64]) -> String {
    const BLOCKS: [char; 8] = ['\u{2581}', '\u{2582}', '\u{2583}', '\u{2584}', '\u{2585}', '\u{2586}', '\u{2587}', '\u{2588}'];
    values
        .iter()
        .map(|v| {
            let idx = (v.clamp(0.0, 1.0) * 7.0).round() as usize;
            BLOCKS[idx]
        })
        .collect()
}

fn trim_number(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// Outcome of the over-training refusal demonstration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperVigilanceReport {
    pub tau: u64,
    pub runs: u64,
    pub refusals: u64,
    pub refusal_frequency: f64,
    /// The model's refusal probability at this intensity.
    pub expected_frequency: f64,
    /// Raw score a refused run earns on the scenario's own scale.
    pub refused_raw_score: f64,
    pub scale_max: f64,
    /// Rendering of the refused score on its scale, e.g. `30/160`.
    pub refused_display: String,
    /// Mean normalised score over accepted (non-refused) runs.
    pub accepted_mean_score: f64,
}

/// Default number of defend/evaluate runs for the demonstration.
pub const HV_DEMO_RUNS: u64 = 1000;

/// Run the defend/evaluate pair `runs` times against a benign scenario at
/// the profile's training intensity and report the refusal behaviour.
pub fn hyper_vigilance_demo<B: AgentBackend>(
    backend: &mut B,
    profile: &SkillProfile,
    scenario: &Scenario,
    runs: u64,
) -> Result<HyperVigilanceReport, SacpError> {
    hyper_vigilance_demo_expecting(
        backend,
        profile,
        scenario,
        runs,
        f64::NAN, // filled by the simulated-backend wrapper
    )
}

fn hyper_vigilance_demo_expecting<B: AgentBackend>(
    backend: &mut B,
    profile: &SkillProfile,
    scenario: &Scenario,
    runs: u64,
    expected_frequency: f64,
) -> Result<HyperVigilanceReport, SacpError> {
    if scenario.threat_class != ThreatClass::Benign {
        return Err(SacpError::ContractViolation(format!(
            "scenario {} is not benign",
            scenario.id
        )));
    }
    if runs == 0 {
        return Err(SacpError::InvalidInput("runs must be >= 1".into()));
    }
    let mut refusals = 0u64;
    let mut refused_raw = scenario.refusal_score;
    let mut accepted_sum = 0.0;
    let mut accepted = 0u64;
    for _ in 0..runs {
        let ctx = DefenseContext {
            profile,
            axioms: &[],
        };
        let defense = backend.defend(scenario, &ctx)?;
        let evaluation = backend.evaluate(scenario, &defense)?;
        if defense.refused {
            refusals += 1;
            refused_raw = evaluation.score * scenario.scale_max / 100.0;
        } else {
            accepted_sum += evaluation.score;
            accepted += 1;
        }
    }
    Ok(HyperVigilanceReport {
        tau: profile.tau(),
        runs,
        refusals,
        refusal_frequency: refusals as f64 / runs as f64,
        expected_frequency,
        refused_raw_score: refused_raw,
        scale_max: scenario.scale_max,
        refused_display: format!(
            "{}/{}",
            trim_number(refused_raw),
            trim_number(scenario.scale_max)
        ),
        accepted_mean_score: if accepted > 0 {
            accepted_sum / accepted as f64
        } else {
            0.0
        },
    })
}

/// The demonstration against the default simulated agent at intensity
/// `tau`, using the bundled saturated profile.
pub fn hyper_vigilance_demo_simulated(
    tau: u64,
    params: &SimParams,
    scenario: &Scenario,
    seed: u64,
    runs: u64,
) -> Result<HyperVigilanceReport, SacpError> {
    let profile = crate::fixtures::saturated_profile(tau);
    let mut backend = SimulatedBackend::new(*params, seed)?;
    let expected = hyper_vigilance_prob(tau, params);
    hyper_vigilance_demo_expecting(&mut backend, &profile, scenario, runs, expected)
}
