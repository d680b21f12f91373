//! Usability analytics: sample summaries, Student-t intervals and one-tailed
//! tests, exact accuracy ratios and Likert agreement.
//!
//! The continuous routines are generic over [`num_traits::Float`]; counts and
//! accuracy are kept as exact rationals until formatting.

pub mod student_t;

use num_rational::Ratio;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{Instrument, LikertAnswer, SurveyResponse};
use student_t::lit;
pub use student_t::{regularized_incomplete_beta, t_cdf, t_quantile, t_sf};

/// Significance level used for every test.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary<F> {
    pub n: usize,
    pub mean: F,
    /// Sample standard deviation (n - 1 denominator); absent for n = 1.
    pub sd: Option<F>,
}

impl<F: Float> SampleSummary<F> {
    /// Summary from already-published moments.
    pub fn from_moments(n: usize, mean: F, sd: F) -> Self {
        SampleSummary {
            n,
            mean,
            sd: Some(sd),
        }
    }

    pub fn sd(&self) -> Result<F> {
        self.sd.ok_or(Error::InsufficientN {
            needed: 2,
            got: self.n,
        })
    }

    pub fn variance(&self) -> Result<F> {
        self.sd().map(|s| s * s)
    }

    pub fn standard_error(&self) -> Result<F> {
        Ok(self.sd()? / lit::<F>(self.n as f64).sqrt())
    }
}

/// Two-pass mean and sample standard deviation.
pub fn summarize<F: Float>(samples: &[F]) -> Result<SampleSummary<F>> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = lit::<F>(samples.len() as f64);
    let naive = samples.iter().fold(F::zero(), |acc, &x| acc + x) / n;
    // correction term removes most of the rounding left by the first pass
    let resid = samples.iter().fold(F::zero(), |acc, &x| acc + (x - naive)) / n;
    let mean = naive + resid;
    let sd = if samples.len() < 2 {
        None
    } else {
        let ss = samples.iter().fold(F::zero(), |acc, &x| {
            let d = x - mean;
            acc + d * d
        });
        Some((ss / (n - F::one())).sqrt())
    };
    Ok(SampleSummary {
        n: samples.len(),
        mean,
        sd,
    })
}

/// `mean ± t(n-1, (1+level)/2) · sd/√n`.
pub fn confidence_interval<F: Float>(s: &SampleSummary<F>, level: F) -> Result<(F, F)> {
    if s.n < 2 {
        return Err(Error::InsufficientN {
            needed: 2,
            got: s.n,
        });
    }
    let df = lit::<F>((s.n - 1) as f64);
    let q = t_quantile((F::one() + level) / lit::<F>(2.0), df);
    let half_width = q * s.standard_error()?;
    Ok((s.mean - half_width, s.mean + half_width))
}

pub fn ci95<F: Float>(s: &SampleSummary<F>) -> Result<(F, F)> {
    confidence_interval(s, lit::<F>(0.95))
}

pub fn intervals_overlap<F: Float>(a: (F, F), b: (F, F)) -> bool {
    a.0 <= b.1 && b.0 <= a.1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMode {
    Welch,
    Pooled,
    Paired,
}

#[derive(Debug, Clone, Copy)]
pub enum TestInput<'a, F> {
    Summary(SampleSummary<F>),
    Raw(&'a [F]),
}

impl<F: Float> TestInput<'_, F> {
    fn summary(&self) -> Result<SampleSummary<F>> {
        match self {
            TestInput::Summary(s) => Ok(*s),
            TestInput::Raw(xs) => summarize(xs),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult<F> {
    pub t: F,
    pub df: F,
    /// `P(T >= t)` under H0, testing H1: mean(a) > mean(b).
    pub p_one_tailed: F,
    pub alpha: F,
    pub reject: bool,
}

fn finish<F: Float>(diff: F, se: F, df: F) -> TestResult<F> {
    let t = if se > F::zero() {
        diff / se
    } else if diff == F::zero() {
        F::zero()
    } else {
        diff.signum() * F::infinity()
    };
    let p = t_sf(t, df);
    let alpha = lit::<F>(ALPHA);
    TestResult {
        t,
        df,
        p_one_tailed: p,
        alpha,
        reject: p < alpha,
    }
}

/// One-tailed t-test of H1: mean(a) > mean(b).
pub fn t_test_one_tailed<F: Float>(
    a: TestInput<'_, F>,
    b: TestInput<'_, F>,
    mode: TestMode,
) -> Result<TestResult<F>> {
    if mode == TestMode::Paired {
        let (TestInput::Raw(xs), TestInput::Raw(ys)) = (a, b) else {
            return Err(Error::ModeMismatch("paired test needs raw samples".into()));
        };
        if xs.len() != ys.len() {
            return Err(Error::ModeMismatch(format!(
                "paired samples differ in length ({} vs {})",
                xs.len(),
                ys.len()
            )));
        }
        let diffs: Vec<F> = xs.iter().zip(ys.iter()).map(|(&x, &y)| x - y).collect();
        let d = summarize(&diffs)?;
        if d.n < 2 {
            return Err(Error::InsufficientN {
                needed: 2,
                got: d.n,
            });
        }
        return Ok(finish(d.mean, d.standard_error()?, lit((d.n - 1) as f64)));
    }

    let sa = a.summary()?;
    let sb = b.summary()?;
    for s in [&sa, &sb] {
        if s.n < 2 {
            return Err(Error::InsufficientN {
                needed: 2,
                got: s.n,
            });
        }
    }
    let (na, nb) = (lit::<F>(sa.n as f64), lit::<F>(sb.n as f64));
    let (va, vb) = (sa.variance()?, sb.variance()?);
    let one = F::one();
    let diff = sa.mean - sb.mean;
    match mode {
        TestMode::Welch => {
            let (ea, eb) = (va / na, vb / nb);
            let se = (ea + eb).sqrt();
            let denom = ea * ea / (na - one) + eb * eb / (nb - one);
            let df = if denom > F::zero() {
                (ea + eb) * (ea + eb) / denom
            } else {
                na + nb - lit(2.0)
            };
            Ok(finish(diff, se, df))
        }
        TestMode::Pooled => {
            let df = na + nb - lit(2.0);
            let pooled = ((na - one) * va + (nb - one) * vb) / df;
            let se = (pooled * (one / na + one / nb)).sqrt();
            Ok(finish(diff, se, df))
        }
        TestMode::Paired => unreachable!(),
    }
}

/// Correct answers over attempts, exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Accuracy {
    pub correct: u64,
    pub attempts: u64,
}

impl Accuracy {
    pub fn ratio(&self) -> Ratio<u64> {
        Ratio::new(self.correct, self.attempts)
    }

    pub fn percent(&self) -> Ratio<u64> {
        self.ratio() * 100
    }

    pub fn percent_f64(&self) -> f64 {
        100.0 * self.correct as f64 / self.attempts as f64
    }

    /// Percentage with two decimals, rounded half up from the exact value.
    pub fn formatted(&self) -> String {
        format!(
            "{}%",
            round_half_up_fixed(100 * self.correct, self.attempts, 2)
        )
    }
}

/// `num/den` rounded half up to `places` decimals, rendered exactly.
pub fn round_half_up_fixed(num: u64, den: u64, places: u32) -> String {
    let scale = 10u128.pow(places);
    let (num, den) = (num as u128, den as u128);
    let scaled = (2 * num * scale + den) / (2 * den);
    if places == 0 {
        return scaled.to_string();
    }
    format!(
        "{}.{:0width$}",
        scaled / scale,
        scaled % scale,
        width = places as usize
    )
}

/// `100 · Σcounts / (participants · tasks)`.
pub fn accuracy(correct_counts: &[u64], participants: u64, tasks: u64) -> Result<Accuracy> {
    if correct_counts.len() as u64 != tasks {
        return Err(Error::MalformedInput(format!(
            "{} per-task counts for {tasks} tasks",
            correct_counts.len()
        )));
    }
    if participants == 0 || tasks == 0 {
        return Err(Error::InsufficientN { needed: 1, got: 0 });
    }
    if let Some(&count) = correct_counts.iter().find(|&&c| c > participants) {
        return Err(Error::CountExceedsN {
            count,
            participants,
        });
    }
    Ok(Accuracy {
        correct: correct_counts.iter().sum(),
        attempts: participants * tasks,
    })
}

/// Wilson score interval for a binomial proportion at 95%.
pub fn proportion_ci95(successes: u64, n: u64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::InsufficientN { needed: 1, got: 0 });
    }
    if successes > n {
        return Err(Error::CountExceedsN {
            count: successes,
            participants: n,
        });
    }
    let z = 1.959_963_984_540_054;
    let nf = n as f64;
    let p = successes as f64 / nf;
    let denom = 1.0 + z * z / nf;
    let centre = (p + z * z / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
    Ok(((centre - half).max(0.0), (centre + half).min(1.0)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LikertItem {
    /// 1-based question number.
    pub question: usize,
    pub agree: u64,
    pub responses: u64,
    /// Whole percent, rounded half up.
    pub agree_percent: u64,
    pub disagree_percent: u64,
}

/// Share of respondents agreeing with each satisfaction question.
pub fn likert_summary(responses: &[SurveyResponse]) -> Result<Vec<LikertItem>> {
    let first = responses.first().ok_or(Error::EmptySample)?;
    let questions = first.answers.len();
    if responses
        .iter()
        .any(|r| r.instrument != Instrument::Satisfaction || r.answers.len() != questions)
    {
        return Err(Error::MixedInstruments);
    }
    for r in responses {
        r.validate()?;
    }
    let total = responses.len() as u64;
    Ok((0..questions)
        .map(|q| {
            let agree = responses
                .iter()
                .filter(|r| r.answers[q] == LikertAnswer::Agree)
                .count() as u64;
            let agree_percent = (200 * agree + total) / (2 * total);
            LikertItem {
                question: q + 1,
                agree,
                responses: total,
                agree_percent,
                disagree_percent: 100 - agree_percent,
            }
        })
        .collect())
}
