//! Published results of the original usability study, and their re-derivation
//! through this crate's statistics.
//!
//! Only the aggregate figures were published, so reproduction is limited to
//! arithmetic that follows from them. Any place where the published aggregate
//! disagrees with the value derived from the published per-task data is listed
//! as a [`Discrepancy`] rather than silently adopted.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::stats::{
    accuracy, ci95, intervals_overlap, proportion_ci95, summarize, t_test_one_tailed, Accuracy,
    SampleSummary, TestInput, TestMode, TestResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PublishedTaskRow {
    pub task_id: &'static str,
    pub mean_time_typical_s: f64,
    pub mean_time_visualization_s: f64,
    pub successes_typical: u64,
    pub successes_visualization: u64,
}

pub const PARTICIPANTS: u64 = 30;

pub const TASK_ROWS: [PublishedTaskRow; 4] = [
    PublishedTaskRow {
        task_id: "ST01",
        mean_time_typical_s: 52.0,
        mean_time_visualization_s: 51.0,
        successes_typical: 28,
        successes_visualization: 28,
    },
    PublishedTaskRow {
        task_id: "CT01",
        mean_time_typical_s: 73.0,
        mean_time_visualization_s: 59.0,
        successes_typical: 15,
        successes_visualization: 18,
    },
    PublishedTaskRow {
        task_id: "CT02",
        mean_time_typical_s: 94.0,
        mean_time_visualization_s: 53.0,
        successes_typical: 18,
        successes_visualization: 22,
    },
    PublishedTaskRow {
        task_id: "CT03",
        mean_time_typical_s: 64.0,
        mean_time_visualization_s: 43.0,
        successes_typical: 21,
        successes_visualization: 27,
    },
];

/// Mean and s.d. of per-participant total time (seconds).
pub const TOTAL_TIME_TYPICAL: (f64, f64) = (283.43, 90.31);
pub const TOTAL_TIME_VISUALIZATION: (f64, f64) = (205.83, 85.83);
pub const REPORTED_P_VALUE: f64 = 0.002;
pub const REPORTED_ACCURACY_TYPICAL: &str = "68.33%";
pub const REPORTED_ACCURACY_VISUALIZATION: &str = "78.30%";
/// Net computer-efficacy score: mean and s.d.
pub const REPORTED_EFFICACY: (f64, f64) = (0.55, 0.01);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub quantity: String,
    pub reported: String,
    pub derived: String,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reproduction {
    pub typical_accuracy: Accuracy,
    pub visualization_accuracy: Accuracy,
    pub typical_accuracy_percent: String,
    pub visualization_accuracy_percent: String,
    /// Sum of per-task mean times per arm.
    pub task_time_sum_typical_s: f64,
    pub task_time_sum_visualization_s: f64,
    pub efficiency_welch: TestResult<f64>,
    pub efficiency_ci95_typical: (f64, f64),
    pub efficiency_ci95_visualization: (f64, f64),
    pub efficiency_intervals_overlap: bool,
    /// t-based intervals over the four per-task success proportions.
    pub success_rate_ci95_typical: (f64, f64),
    pub success_rate_ci95_visualization: (f64, f64),
    pub effectiveness_intervals_overlap: bool,
    /// Per task: Wilson intervals of the two arms and whether they overlap.
    pub task_success_intervals: Vec<(String, (f64, f64), (f64, f64), bool)>,
    /// A difference in effectiveness is only claimed when intervals are disjoint.
    pub effectiveness_difference_claimed: bool,
    pub discrepancies: Vec<Discrepancy>,
}

pub fn reproduce() -> Result<Reproduction> {
    let tasks = TASK_ROWS.len() as u64;
    let typical_counts: Vec<u64> = TASK_ROWS.iter().map(|r| r.successes_typical).collect();
    let vis_counts: Vec<u64> = TASK_ROWS
        .iter()
        .map(|r| r.successes_visualization)
        .collect();
    let typical_accuracy = accuracy(&typical_counts, PARTICIPANTS, tasks)?;
    let visualization_accuracy = accuracy(&vis_counts, PARTICIPANTS, tasks)?;

    let typical = SampleSummary::from_moments(
        PARTICIPANTS as usize,
        TOTAL_TIME_TYPICAL.0,
        TOTAL_TIME_TYPICAL.1,
    );
    let vis = SampleSummary::from_moments(
        PARTICIPANTS as usize,
        TOTAL_TIME_VISUALIZATION.0,
        TOTAL_TIME_VISUALIZATION.1,
    );
    let efficiency_welch = t_test_one_tailed(
        TestInput::Summary(typical),
        TestInput::Summary(vis),
        TestMode::Welch,
    )?;
    let efficiency_ci95_typical = ci95(&typical)?;
    let efficiency_ci95_visualization = ci95(&vis)?;

    let rates = |counts: &[u64]| -> Vec<f64> {
        counts
            .iter()
            .map(|&c| c as f64 / PARTICIPANTS as f64)
            .collect()
    };
    let success_rate_ci95_typical = ci95(&summarize(&rates(&typical_counts))?)?;
    let success_rate_ci95_visualization = ci95(&summarize(&rates(&vis_counts))?)?;
    let effectiveness_intervals_overlap =
        intervals_overlap(success_rate_ci95_typical, success_rate_ci95_visualization);

    let task_success_intervals = TASK_ROWS
        .iter()
        .map(|r| {
            let a = proportion_ci95(r.successes_typical, PARTICIPANTS)?;
            let b = proportion_ci95(r.successes_visualization, PARTICIPANTS)?;
            Ok((r.task_id.to_string(), a, b, intervals_overlap(a, b)))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut discrepancies = Vec::new();
    for (label, reported, derived) in [
        (
            "typical accuracy",
            REPORTED_ACCURACY_TYPICAL,
            typical_accuracy,
        ),
        (
            "visualization accuracy",
            REPORTED_ACCURACY_VISUALIZATION,
            visualization_accuracy,
        ),
    ] {
        let formatted = derived.formatted();
        if formatted != reported {
            discrepancies.push(Discrepancy {
                quantity: label.to_string(),
                reported: reported.to_string(),
                derived: formatted.clone(),
                note: format!(
                    "per-task success counts give {}/{} = {formatted}; the count-derived value is used",
                    derived.correct, derived.attempts
                ),
            });
        }
    }

    Ok(Reproduction {
        typical_accuracy_percent: typical_accuracy.formatted(),
        visualization_accuracy_percent: visualization_accuracy.formatted(),
        typical_accuracy,
        visualization_accuracy,
        task_time_sum_typical_s: TASK_ROWS.iter().map(|r| r.mean_time_typical_s).sum(),
        task_time_sum_visualization_s: TASK_ROWS.iter().map(|r| r.mean_time_visualization_s).sum(),
        efficiency_welch,
        efficiency_intervals_overlap: intervals_overlap(
            efficiency_ci95_typical,
            efficiency_ci95_visualization,
        ),
        efficiency_ci95_typical,
        efficiency_ci95_visualization,
        success_rate_ci95_typical,
        success_rate_ci95_visualization,
        effectiveness_difference_claimed: !effectiveness_intervals_overlap,
        effectiveness_intervals_overlap,
        task_success_intervals,
        discrepancies,
    })
}
