//! Sample catalogs and the task set shipped with the crate.
//!
//! Both catalogs are plain generator output: `generate_catalog(1, 100,
//! "baseline-A")` and `generate_catalog(2, 100, "visualization-B")`.

use crate::catalog::{load_catalog_str, Catalog};
use crate::experiment::{load_tasks, TaskSpec};

pub const BASELINE_TAG: &str = "baseline-A";
pub const VISUALIZATION_TAG: &str = "visualization-B";
pub const BASELINE_SEED: u64 = 1;
pub const VISUALIZATION_SEED: u64 = 2;
pub const CATALOG_SIZE: usize = 100;

pub const BASELINE_JSON: &str = include_str!("../data/catalog-baseline-A.json");
pub const VISUALIZATION_JSON: &str = include_str!("../data/catalog-visualization-B.json");
pub const TASKS_JSON: &str = include_str!("../data/tasks.json");

pub fn baseline_catalog() -> Catalog {
    load_catalog_str(BASELINE_JSON).expect("bundled baseline catalog is valid")
}

pub fn visualization_catalog() -> Catalog {
    load_catalog_str(VISUALIZATION_JSON).expect("bundled visualization catalog is valid")
}

pub fn tasks() -> Vec<TaskSpec> {
    load_tasks(TASKS_JSON).expect("bundled task set is valid")
}
