//! Aggregation of scored trials and surveys into an efficiency /
//! effectiveness / satisfaction report.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::error::Result;
use crate::experiment::{
    efficacy_score, find_task, score_trial, Complexity, Instrument, InterfaceVariant,
    SurveyResponse, TaskSpec, TrialLog,
};
use crate::stats::{
    accuracy, ci95, intervals_overlap, likert_summary, proportion_ci95, summarize,
    t_test_one_tailed, Accuracy, LikertItem, SampleSummary, TestInput, TestMode, TestResult,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredTrial {
    #[serde(flatten)]
    pub trial: TrialLog,
    pub correct: bool,
    pub duration_s: u64,
}

/// Catalog used by each arm of the study.
#[derive(Debug, Clone, Copy)]
pub struct VariantCatalogs<'a> {
    pub typical: &'a Catalog,
    pub visualization: &'a Catalog,
}

impl<'a> VariantCatalogs<'a> {
    pub fn get(&self, v: InterfaceVariant) -> &'a Catalog {
        match v {
            InterfaceVariant::Typical => self.typical,
            InterfaceVariant::Visualization => self.visualization,
        }
    }
}

pub fn score_all(
    tasks: &[TaskSpec],
    catalogs: VariantCatalogs<'_>,
    trials: &[TrialLog],
) -> Result<Vec<ScoredTrial>> {
    trials
        .iter()
        .map(|t| {
            let task = find_task(tasks, &t.task_id)?;
            let s = score_trial(catalogs.get(t.interface_variant), task, t)?;
            Ok(ScoredTrial {
                trial: t.clone(),
                correct: s.correct,
                duration_s: s.duration_s,
            })
        })
        .collect()
}

pub fn scores_csv(scored: &[ScoredTrial]) -> String {
    let mut out =
        String::from("participant_id,interface_variant,task_id,answer,correct,duration_s\n");
    for s in scored {
        let variant = match s.trial.interface_variant {
            InterfaceVariant::Typical => "typical",
            InterfaceVariant::Visualization => "visualization",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.trial.participant_id,
            variant,
            s.trial.task_id,
            s.trial.answer.as_deref().unwrap_or(""),
            s.correct,
            s.duration_s
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantTaskStats {
    pub attempts: u64,
    pub correct: u64,
    pub mean_time_s: Option<f64>,
    pub time_ci95: Option<(f64, f64)>,
    pub success_ci95: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRow {
    pub task_id: String,
    pub complexity: Complexity,
    pub typical: VariantTaskStats,
    pub visualization: VariantTaskStats,
    pub time_intervals_overlap: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantTotals {
    pub participants: u64,
    /// Per-participant total time across tasks.
    pub total_time: Option<SampleSummary<f64>>,
    pub total_time_ci95: Option<(f64, f64)>,
    pub accuracy: Option<Accuracy>,
    pub accuracy_percent: Option<String>,
    /// Interval over per-task success proportions.
    pub success_rate_ci95: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsabilityReport {
    pub tasks: Vec<TaskRow>,
    pub typical: VariantTotals,
    pub visualization: VariantTotals,
    /// H1: typical total time > visualization total time.
    pub efficiency_welch: Option<TestResult<f64>>,
    pub efficiency_paired: Option<TestResult<f64>>,
    pub effectiveness_intervals_overlap: Option<bool>,
    /// Only claimed when the success-rate intervals are disjoint.
    pub effectiveness_difference_claimed: bool,
    pub satisfaction: Vec<LikertItem>,
    pub efficacy: Option<SampleSummary<f64>>,
    pub notes: Vec<String>,
}

fn task_stats(trials: &[&ScoredTrial]) -> VariantTaskStats {
    let attempts = trials.len() as u64;
    let correct = trials.iter().filter(|t| t.correct).count() as u64;
    let times: Vec<f64> = trials.iter().map(|t| t.duration_s as f64).collect();
    let summary = summarize(&times).ok();
    VariantTaskStats {
        attempts,
        correct,
        mean_time_s: summary.map(|s| s.mean),
        time_ci95: summary.and_then(|s| ci95(&s).ok()),
        success_ci95: proportion_ci95(correct, attempts).ok(),
    }
}

pub fn build_report(
    tasks: &[TaskSpec],
    scored: &[ScoredTrial],
    surveys: &[SurveyResponse],
) -> Result<UsabilityReport> {
    let analysed: Vec<&TaskSpec> = tasks.iter().filter(|t| !t.practice).collect();
    let analysed_ids: BTreeSet<&str> = analysed.iter().map(|t| t.id.as_str()).collect();
    let relevant: Vec<&ScoredTrial> = scored
        .iter()
        .filter(|s| analysed_ids.contains(s.trial.task_id.as_str()))
        .collect();
    let mut notes = Vec::new();

    let rows: Vec<TaskRow> = analysed
        .iter()
        .map(|task| {
            let of = |v: InterfaceVariant| -> Vec<&ScoredTrial> {
                relevant
                    .iter()
                    .copied()
                    .filter(|s| s.trial.task_id == task.id && s.trial.interface_variant == v)
                    .collect()
            };
            let typical = task_stats(&of(InterfaceVariant::Typical));
            let visualization = task_stats(&of(InterfaceVariant::Visualization));
            let time_intervals_overlap = match (typical.time_ci95, visualization.time_ci95) {
                (Some(a), Some(b)) => Some(intervals_overlap(a, b)),
                _ => None,
            };
            TaskRow {
                task_id: task.id.clone(),
                complexity: task.complexity(),
                typical,
                visualization,
                time_intervals_overlap,
            }
        })
        .collect();

    let totals_for = |v: InterfaceVariant| -> BTreeMap<&str, f64> {
        let mut totals = BTreeMap::new();
        for s in relevant.iter().filter(|s| s.trial.interface_variant == v) {
            *totals.entry(s.trial.participant_id.as_str()).or_insert(0.0) += s.duration_s as f64;
        }
        totals
    };
    let typical_totals = totals_for(InterfaceVariant::Typical);
    let vis_totals = totals_for(InterfaceVariant::Visualization);

    let variant_totals = |v: InterfaceVariant, totals: &BTreeMap<&str, f64>| -> VariantTotals {
        let samples: Vec<f64> = totals.values().copied().collect();
        let total_time = summarize(&samples).ok();
        let participants = totals.len() as u64;
        let counts: Vec<u64> = rows
            .iter()
            .map(|r| match v {
                InterfaceVariant::Typical => r.typical.correct,
                InterfaceVariant::Visualization => r.visualization.correct,
            })
            .collect();
        let acc = accuracy(&counts, participants, rows.len() as u64).ok();
        let rates: Vec<f64> = counts
            .iter()
            .map(|&c| c as f64 / participants.max(1) as f64)
            .collect();
        VariantTotals {
            participants,
            total_time_ci95: total_time.as_ref().and_then(|s| ci95(s).ok()),
            total_time,
            accuracy_percent: acc.map(|a| a.formatted()),
            accuracy: acc,
            success_rate_ci95: summarize(&rates).ok().and_then(|s| ci95(&s).ok()),
        }
    };
    let typical = variant_totals(InterfaceVariant::Typical, &typical_totals);
    let visualization = variant_totals(InterfaceVariant::Visualization, &vis_totals);

    let a: Vec<f64> = typical_totals.values().copied().collect();
    let b: Vec<f64> = vis_totals.values().copied().collect();
    let efficiency_welch =
        t_test_one_tailed(TestInput::Raw(&a), TestInput::Raw(&b), TestMode::Welch).ok();
    let both: Vec<&str> = typical_totals
        .keys()
        .filter(|p| vis_totals.contains_key(*p))
        .copied()
        .collect();
    let pa: Vec<f64> = both.iter().map(|p| typical_totals[p]).collect();
    let pb: Vec<f64> = both.iter().map(|p| vis_totals[p]).collect();
    let efficiency_paired =
        t_test_one_tailed(TestInput::Raw(&pa), TestInput::Raw(&pb), TestMode::Paired).ok();
    if efficiency_welch.is_none() {
        notes.push("efficiency test skipped: fewer than two participants in an arm".into());
    }

    let effectiveness_intervals_overlap =
        match (typical.success_rate_ci95, visualization.success_rate_ci95) {
            (Some(x), Some(y)) => Some(intervals_overlap(x, y)),
            _ => None,
        };

    let satisfaction_rs: Vec<SurveyResponse> = surveys
        .iter()
        .filter(|s| s.instrument == Instrument::Satisfaction)
        .cloned()
        .collect();
    let satisfaction = if satisfaction_rs.is_empty() {
        Vec::new()
    } else {
        likert_summary(&satisfaction_rs)?
    };
    let efficacy_scores: Vec<f64> = surveys
        .iter()
        .filter(|s| s.instrument == Instrument::Efficacy)
        .map(efficacy_score)
        .collect::<Result<_>>()?;
    let efficacy = summarize(&efficacy_scores).ok();

    Ok(UsabilityReport {
        tasks: rows,
        typical,
        visualization,
        efficiency_welch,
        efficiency_paired,
        effectiveness_difference_claimed: effectiveness_intervals_overlap == Some(false),
        effectiveness_intervals_overlap,
        satisfaction,
        efficacy,
        notes,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.2}")).unwrap_or_default()
}

/// Per-task table: mean times and success counts per arm.
pub fn usability_csv(report: &UsabilityReport) -> String {
    let mut out = String::from(
        "task,complexity,mean_time_typical_s,mean_time_visualization_s,successes_typical,successes_visualization\n",
    );
    for r in &report.tasks {
        let complexity = match r.complexity {
            Complexity::Simple => "simple",
            Complexity::Complex => "complex",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.task_id,
            complexity,
            opt(r.typical.mean_time_s),
            opt(r.visualization.mean_time_s),
            r.typical.correct,
            r.visualization.correct
        );
    }
    out
}

pub fn likert_csv(items: &[LikertItem]) -> String {
    let mut out = String::from("question,agree,responses,agree_percent,disagree_percent\n");
    for i in items {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            i.question, i.agree, i.responses, i.agree_percent, i.disagree_percent
        );
    }
    out
}
