//! Cohen-Macaulayness survey over the subgroup conjugacy classes of `S_n`.

use serde::Serialize;

use crate::bases::{cm_report, CmReport};
use crate::permgrp::{subgroup_classes, GroupError, PermutationGroup, DEFAULT_GROUP_CAP};

#[derive(Debug, Clone, Copy)]
pub struct SurveyConfig {
    pub cap: usize,
    pub include_topology: bool,
}

impl Default for SurveyConfig {
    fn default() -> Self {
        SurveyConfig {
            cap: DEFAULT_GROUP_CAP,
            include_topology: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SurveyReport {
    pub degree: usize,
    pub num_classes: usize,
    pub classes: Vec<CmReport>,
    pub all_agree: bool,
}

/// Conjugacy class representatives of the subgroups of `S_n`, in canonical
/// order; exposed so callers can parallelize over them.
pub fn survey_classes(n: usize, config: &SurveyConfig) -> Result<Vec<PermutationGroup>, GroupError> {
    subgroup_classes(n, config.cap)
}

/// Runs the Cohen-Macaulayness report on every subgroup conjugacy class of
/// `S_n` and summarizes whether the algebraic verdicts match the
/// reflection-rotation prediction throughout.
pub fn survey(n: usize, config: &SurveyConfig) -> Result<SurveyReport, GroupError> {
    let classes = survey_classes(n, config)?;
    let reports: Vec<CmReport> = classes
        .iter()
        .map(|g| cm_report(g, config.include_topology))
        .collect();
    let all_agree = reports.iter().all(|r| r.agree);
    Ok(SurveyReport {
        degree: n,
        num_classes: reports.len(),
        classes: reports,
        all_agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survey_degree_3() {
        let report = survey(3, &SurveyConfig::default()).unwrap();
        assert_eq!(report.num_classes, 4);
        assert!(report.all_agree);
        // Every subgroup of S_3 is generated by reflections and rotations.
        assert!(report.classes.iter().all(|r| r.grr_index == 1));
    }

    #[test]
    fn survey_degree_4() {
        let report = survey(4, &SurveyConfig::default()).unwrap();
        assert_eq!(report.num_classes, 11);
        assert!(report.all_agree);
        let non_rr: Vec<&CmReport> = report
            .classes
            .iter()
            .filter(|r| r.grr_index > 1)
            .collect();
        // Only the cyclic C_4 fails to be reflection-rotation generated.
        assert_eq!(non_rr.len(), 1);
        assert_eq!(non_rr[0].order, 4);
        assert_eq!(non_rr[0].grr_index, 2);
        assert!(!non_rr[0].algebraic[&2].cm);
    }
}
