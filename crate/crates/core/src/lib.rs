//! Progressive shortlisting of multi-attribute products.
//!
//! The pipeline runs in four stages over one [`Catalog`]: a hierarchical
//! attribute wheel narrows the catalog ([`wheel`], [`filter`]), a two-axis
//! scatter view with Pareto highlighting feeds a compare bucket
//! ([`comparative`]), products can be inspected in detail ([`product_view`]),
//! and the shortlisted products are compared side by side ([`chart`]). A
//! [`session`] ties the stages together as an event-sourced state machine.
//!
//! [`experiment`], [`stats`], [`report`] and [`reference`] cover the usability
//! study built around the pipeline: task oracles, trial scoring, t-tests and
//! confidence intervals.
//!
//! Statistical routines are generic over [`num_traits::Float`]; the aliases
//! below fix them to `f64` or `f32`.

pub mod bundled;
pub mod catalog;
pub mod chart;
pub mod clock;
pub mod comparative;
pub mod error;
pub mod experiment;
pub mod filter;
pub mod generator;
pub mod product_view;
pub mod reference;
pub mod report;
pub mod session;
pub mod stats;
pub mod wheel;

pub use catalog::{
    attribute_range, load_catalog, load_catalog_path, AttrKind, AttributeDef, Catalog, Product,
    Value,
};
pub use chart::{build_chart, comparison_table, ComparisonChart, ComparisonTable};
pub use comparative::{dominant_set, scatter_projection, CompareBucket, ScatterProjection};
pub use error::{Error, Result};
pub use experiment::{correct_answer_set, score_trial, TaskSpec, TrialLog};
pub use filter::{apply_filter, Clause, FilterSpec, NumericRange};
pub use product_view::{product_detail, ProductDetail};
pub use session::{Session, SessionContext, SessionStore, Stage};
pub use wheel::{build_wheel, WheelNode, WheelState, WheelTree};

pub type SampleSummary64 = stats::SampleSummary<f64>;
pub type SampleSummary32 = stats::SampleSummary<f32>;
pub type TestResult64 = stats::TestResult<f64>;
pub type TestResult32 = stats::TestResult<f32>;
