//! Per-dimension coverage counting over a scenario library, with a bias
//! ratio that surfaces self-reinforcing attention imbalances.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Scenario, DEFAULT_BIAS_THRESHOLD};
use crate::taxonomy::DimensionId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub counts: BTreeMap<DimensionId, u64>,
    pub max_count: u64,
    pub min_count: u64,
    /// max/min, with min treated as 1 when any dimension has zero coverage.
    pub bias_ratio: f64,
    pub biased: bool,
    pub bias_threshold: f64,
    pub zero_coverage: bool,
    pub uncovered: BTreeSet<DimensionId>,
}

/// Coverage with the default bias threshold.
pub fn coverage_report(library: &[Scenario]) -> CoverageReport {
    coverage_report_with_threshold(library, DEFAULT_BIAS_THRESHOLD)
}

pub fn coverage_report_with_threshold(library: &[Scenario], threshold: f64) -> CoverageReport {
    let mut counts: BTreeMap<DimensionId, u64> = DimensionId::ALL.iter().map(|d| (*d, 0)).collect();
    for scenario in library {
        *counts.get_mut(&scenario.dimension).unwrap() += 1;
    }
    let max_count = counts.values().copied().max().unwrap_or(0);
    let min_count = counts.values().copied().min().unwrap_or(0);
    let uncovered: BTreeSet<DimensionId> = counts
        .iter()
        .filter(|(_, n)| **n == 0)
        .map(|(d, _)| *d)
        .collect();
    let zero_coverage = !uncovered.is_empty();
    let denom = if zero_coverage { 1 } else { min_count };
    let bias_ratio = if max_count == 0 {
        0.0
    } else {
        max_count as f64 / denom as f64
    };
    CoverageReport {
        counts,
        max_count,
        min_count,
        bias_ratio,
        biased: bias_ratio >= threshold,
        bias_threshold: threshold,
        zero_coverage,
        uncovered,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{RubricItem, ThreatClass, SCHEMA_VERSION};

    fn scenario_for(dim: DimensionId, n: usize) -> Scenario {
        Scenario {
            id: format!("{}-{n}", dim.as_str().to_lowercase()),
            schema_version: SCHEMA_VERSION,
            dimension: dim,
            title: format!("{dim} exercise {n}"),
            difficulty: 50.0,
            threat_class: ThreatClass::Threat,
            narrative: "n".into(),
            attacker_objective: "o".into(),
            rubric: vec![RubricItem {
                item_id: "r1".into(),
                description: "d".into(),
                weight: 1.0,
            }],
            lesson_template: "l".into(),
            source_ref: None,
            scale_max: 100.0,
            refusal_score: 30.0,
        }
    }

    fn library_with_counts(counts: &[(DimensionId, usize)]) -> Vec<Scenario> {
        let mut lib = Vec::new();
        for (dim, n) in counts {
            for i in 0..*n {
                lib.push(scenario_for(*dim, i));
            }
        }
        lib
    }

    #[test]
    fn biased_library_reports_six_to_one() {
        use DimensionId::*;
        let lib = library_with_counts(&[
            (S1, 3),
            (S2, 2),
            (S3, 5),
            (S4, 2),
            (O1, 3),
            (O2, 3),
            (O3, 1),
            (O4, 6),
            (E1, 2),
            (E2, 1),
            (E3, 3),
            (E4, 1),
        ]);
        let report = coverage_report(&lib);
        assert_eq!(report.bias_ratio, 6.0);
        assert!(report.biased);
        assert!(!report.zero_coverage);
        assert!(report.uncovered.is_empty());
        assert_eq!(report.counts.values().sum::<u64>() as usize, lib.len());
    }

    #[test]
    fn uniform_library_is_unbiased() {
        let lib: Vec<Scenario> = DimensionId::ALL.iter().map(|d| scenario_for(*d, 0)).collect();
        let report = coverage_report(&lib);
        assert_eq!(report.bias_ratio, 1.0);
        assert!(!report.biased);
        assert!(report.uncovered.is_empty());
    }

    #[test]
    fn missing_layer_raises_zero_coverage_flag() {
        use DimensionId::*;
        let lib = library_with_counts(&[
            (S1, 1),
            (S2, 1),
            (S3, 1),
            (S4, 1),
            (O1, 1),
            (O2, 1),
            (O3, 1),
            (O4, 1),
        ]);
        let report = coverage_report(&lib);
        assert!(report.zero_coverage);
        assert_eq!(
            report.uncovered.iter().copied().collect::<Vec<_>>(),
            vec![E1, E2, E3, E4]
        );
        // min treated as 1 for the ratio
        assert_eq!(report.bias_ratio, 1.0);
    }

    #[test]
    fn counts_are_permutation_invariant() {
        use DimensionId::*;
        let mut lib = library_with_counts(&[(S1, 2), (O4, 3), (E2, 1)]);
        let before = coverage_report(&lib);
        lib.reverse();
        let after = coverage_report(&lib);
        assert_eq!(before, after);
    }

    #[test]
    fn empty_library_has_zero_ratio() {
        let report = coverage_report(&[]);
        assert_eq!(report.bias_ratio, 0.0);
        assert_eq!(report.uncovered.len(), 12);
    }
}
