//! Study tasks, answer-correctness oracle, trial scoring, survey scoring and
//! counterbalanced ordering.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::clock::Timestamp;
use crate::error::{Error, Result};
use crate::filter::{apply_filter, FilterSpec, NumericRange};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "attribute", rename_all = "snake_case")]
pub enum Objective {
    Any,
    Argmin(String),
    Argmax(String),
}

impl Objective {
    pub fn attribute(&self) -> Option<&str> {
        match self {
            Objective::Any => None,
            Objective::Argmin(a) | Objective::Argmax(a) => Some(a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Complexity {
    Simple,
    Complex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: String,
    pub description: String,
    pub constraints: FilterSpec,
    pub objective: Objective,
    /// Warm-up tasks are excluded from analysis.
    #[serde(default)]
    pub practice: bool,
}

impl TaskSpec {
    /// Distinct attributes referenced by constraints and objective.
    pub fn referenced_attributes(&self) -> BTreeSet<&str> {
        self.constraints
            .attributes()
            .chain(self.objective.attribute())
            .collect()
    }

    /// Simple when at most two attributes are involved.
    pub fn complexity(&self) -> Complexity {
        if self.referenced_attributes().len() <= 2 {
            Complexity::Simple
        } else {
            Complexity::Complex
        }
    }
}

/// The four study tasks plus the two warm-up tasks, thresholds as worded.
pub fn canonical_tasks() -> Vec<TaskSpec> {
    let task = |id: &str, description: &str, constraints, objective, practice| TaskSpec {
        id: id.into(),
        description: description.into(),
        constraints,
        objective,
        practice,
    };
    vec![
        task(
            "TR01",
            "Find an iPhone with the lowest price",
            FilterSpec::new().with_values("brand", ["Apple"]),
            Objective::Argmin("price".into()),
            true,
        ),
        task(
            "TR02",
            "Find the highest priced Samsung phone with 6GB RAM",
            FilterSpec::new()
                .with_values("brand", ["Samsung"])
                .with_range("ram", NumericRange::exactly(6.0)),
            Objective::Argmax("price".into()),
            true,
        ),
        task(
            "ST01",
            "Find a smartphone having battery capacity greater than 2000mAh",
            FilterSpec::new().with_range("battery", NumericRange::greater_than(2000.0)),
            Objective::Any,
            false,
        ),
        task(
            "CT01",
            "Find the lowest priced Android smartphone with at least 4GB RAM and camera above 20Mp",
            FilterSpec::new()
                .with_values("os", ["Android"])
                .with_range("ram", NumericRange::at_least(4.0))
                .with_range("camera", NumericRange::greater_than(20.0)),
            Objective::Argmin("price".into()),
            false,
        ),
        task(
            "CT02",
            "Find Samsung smartphone of type either Note or Edge that has the highest MP camera",
            FilterSpec::new()
                .with_values("brand", ["Samsung"])
                .with_values("model_line", ["Note", "Edge"]),
            Objective::Argmax("camera".into()),
            false,
        ),
        task(
            "CT03",
            "Find a smartphone that has: RAM greater than 3 GB, camera greater than 16MP, and battery more than 3000mAh",
            FilterSpec::new()
                .with_range("ram", NumericRange::greater_than(3.0))
                .with_range("camera", NumericRange::greater_than(16.0))
                .with_range("battery", NumericRange::greater_than(3000.0)),
            Objective::Any,
            false,
        ),
    ]
}

pub fn load_tasks(text: &str) -> Result<Vec<TaskSpec>> {
    serde_json::from_str(text).map_err(|e| Error::MalformedInput(e.to_string()))
}

pub fn find_task<'t>(tasks: &'t [TaskSpec], id: &str) -> Result<&'t TaskSpec> {
    tasks
        .iter()
        .find(|t| t.id == id)
        .ok_or_else(|| Error::UnknownTask(id.to_string()))
}

/// Every product that counts as a correct answer: all constraint-satisfying
/// products for `Any`, otherwise the full tie set of optima. Catalog order.
pub fn correct_answer_set(catalog: &Catalog, task: &TaskSpec) -> Result<Vec<String>> {
    let satisfying = apply_filter(catalog, &task.constraints)?;
    let (attr_id, maximize) = match &task.objective {
        Objective::Any => return Ok(satisfying),
        Objective::Argmin(a) => (a, false),
        Objective::Argmax(a) => (a, true),
    };
    let attr = catalog.attribute(attr_id)?;
    if !attr.kind.is_comparable() {
        return Err(Error::NonComparableAttribute(attr_id.clone()));
    }
    let scored: Vec<(String, f64)> = satisfying
        .into_iter()
        .filter_map(|id| {
            let p = catalog.product(&id).ok()?;
            let v = catalog.axis_value(p, attr)?;
            Some((id, if maximize { v } else { -v }))
        })
        .collect();
    let Some(best) = scored.iter().map(|(_, v)| *v).reduce(f64::max) else {
        return Ok(Vec::new());
    };
    Ok(scored
        .into_iter()
        .filter(|(_, v)| *v == best)
        .map(|(id, _)| id)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterfaceVariant {
    Typical,
    Visualization,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialLog {
    pub participant_id: String,
    pub interface_variant: InterfaceVariant,
    pub task_id: String,
    pub start_ts: Timestamp,
    #[serde(default)]
    pub end_ts: Option<Timestamp>,
    #[serde(default)]
    pub answer: Option<String>,
    /// Participant gave up; scored as incorrect.
    #[serde(default)]
    pub abandoned: bool,
    #[serde(default)]
    pub session_id: Option<String>,
}

impl TrialLog {
    /// Elapsed milliseconds, if finished.
    pub fn elapsed_ms(&self) -> Option<u64> {
        self.end_ts.map(|e| e.saturating_sub(self.start_ts))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialScore {
    pub correct: bool,
    /// Whole seconds, rounded half up.
    pub duration_s: u64,
}

pub fn score_trial(catalog: &Catalog, task: &TaskSpec, trial: &TrialLog) -> Result<TrialScore> {
    if trial.task_id != task.id {
        return Err(Error::MalformedInput(format!(
            "trial is for task {} but scored against {}",
            trial.task_id, task.id
        )));
    }
    let end = trial
        .end_ts
        .ok_or_else(|| Error::IncompleteTrial("no end timestamp".into()))?;
    if end < trial.start_ts {
        return Err(Error::IncompleteTrial("ends before it starts".into()));
    }
    if trial.answer.is_none() && !trial.abandoned {
        return Err(Error::IncompleteTrial("no answer and not abandoned".into()));
    }
    let correct = match (&trial.answer, trial.abandoned) {
        (Some(answer), false) => correct_answer_set(catalog, task)?.contains(answer),
        _ => false,
    };
    Ok(TrialScore {
        correct,
        duration_s: (end - trial.start_ts + 500) / 1000,
    })
}

pub fn read_trials_jsonl(text: &str) -> Result<Vec<TrialLog>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| Error::MalformedInput(e.to_string())))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Instrument {
    Satisfaction,
    Efficacy,
}

impl std::fmt::Display for Instrument {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Instrument::Satisfaction => "satisfaction",
            Instrument::Efficacy => "efficacy",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LikertAnswer {
    Agree,
    Neutral,
    Disagree,
}

impl LikertAnswer {
    pub fn score(self) -> i32 {
        match self {
            LikertAnswer::Agree => 1,
            LikertAnswer::Neutral => 0,
            LikertAnswer::Disagree => -1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyResponse {
    pub participant_id: String,
    pub instrument: Instrument,
    pub answers: Vec<LikertAnswer>,
}

impl SurveyResponse {
    /// The satisfaction survey is two-point: no neutral answers.
    pub fn validate(&self) -> Result<()> {
        if self.instrument == Instrument::Satisfaction
            && self.answers.contains(&LikertAnswer::Neutral)
        {
            return Err(Error::MalformedInput(format!(
                "satisfaction response from {} contains Neutral",
                self.participant_id
            )));
        }
        Ok(())
    }
}

/// Net efficacy: mean of Agree = 1, Neutral = 0, Disagree = -1.
pub fn efficacy_score(response: &SurveyResponse) -> Result<f64> {
    if response.instrument != Instrument::Efficacy {
        return Err(Error::WrongInstrument {
            expected: Instrument::Efficacy.to_string(),
            found: response.instrument.to_string(),
        });
    }
    if response.answers.is_empty() {
        return Err(Error::EmptyAnswers);
    }
    let total: i32 = response.answers.iter().map(|a| a.score()).sum();
    Ok(f64::from(total) / response.answers.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantOrder {
    TypicalFirst,
    VisualizationFirst,
}

impl VariantOrder {
    pub fn sequence(self) -> [InterfaceVariant; 2] {
        match self {
            VariantOrder::TypicalFirst => {
                [InterfaceVariant::Typical, InterfaceVariant::Visualization]
            }
            VariantOrder::VisualizationFirst => {
                [InterfaceVariant::Visualization, InterfaceVariant::Typical]
            }
        }
    }
}

/// Counterbalance: a seeded shuffle, then the first ⌈n/2⌉ start on the
/// typical interface.
pub fn assign_ordering(
    participants: &[String],
    seed: u64,
) -> Result<BTreeMap<String, VariantOrder>> {
    if participants.is_empty() {
        return Err(Error::EmptySample);
    }
    let distinct: BTreeSet<&String> = participants.iter().collect();
    if distinct.len() != participants.len() {
        return Err(Error::MalformedInput("duplicate participant ids".into()));
    }
    let mut shuffled: Vec<&String> = participants.iter().collect();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let typical = participants.len().div_ceil(2);
    Ok(shuffled
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let order = if i < typical {
                VariantOrder::TypicalFirst
            } else {
                VariantOrder::VisualizationFirst
            };
            (p.clone(), order)
        })
        .collect())
}
