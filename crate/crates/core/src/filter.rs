//! Conjunctive/disjunctive attribute filters and their evaluation.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::catalog::{AttrKind, AttributeDef, Bucket, Catalog, Product, Value};
use crate::error::{Error, Result};

/// Numeric interval with optional, independently inclusive/exclusive bounds.
/// A missing bound is infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericRange {
    #[serde(default)]
    pub lo: Option<f64>,
    #[serde(default = "yes")]
    pub lo_inclusive: bool,
    #[serde(default)]
    pub hi: Option<f64>,
    #[serde(default = "yes")]
    pub hi_inclusive: bool,
}

fn yes() -> bool {
    true
}

impl NumericRange {
    pub const UNBOUNDED: NumericRange = NumericRange {
        lo: None,
        lo_inclusive: true,
        hi: None,
        hi_inclusive: true,
    };

    /// "greater than x", "above x"
    pub fn greater_than(x: f64) -> Self {
        NumericRange {
            lo: Some(x),
            lo_inclusive: false,
            ..Self::UNBOUNDED
        }
    }

    /// "at least x"
    pub fn at_least(x: f64) -> Self {
        NumericRange {
            lo: Some(x),
            ..Self::UNBOUNDED
        }
    }

    pub fn less_than(x: f64) -> Self {
        NumericRange {
            hi: Some(x),
            hi_inclusive: false,
            ..Self::UNBOUNDED
        }
    }

    pub fn at_most(x: f64) -> Self {
        NumericRange {
            hi: Some(x),
            ..Self::UNBOUNDED
        }
    }

    pub fn exactly(x: f64) -> Self {
        NumericRange {
            lo: Some(x),
            hi: Some(x),
            ..Self::UNBOUNDED
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        let above = match self.lo {
            None => true,
            Some(lo) if self.lo_inclusive => v >= lo,
            Some(lo) => v > lo,
        };
        let below = match self.hi {
            None => true,
            Some(hi) if self.hi_inclusive => v <= hi,
            Some(hi) => v < hi,
        };
        above && below
    }

    fn check(&self, attribute: &str) -> Result<()> {
        let bad = |reason: &str| Error::InvalidClause {
            attribute: attribute.to_string(),
            reason: reason.to_string(),
        };
        if self.lo.is_some_and(f64::is_nan) || self.hi.is_some_and(f64::is_nan) {
            return Err(bad("NaN bound"));
        }
        if let (Some(lo), Some(hi)) = (self.lo, self.hi) {
            if lo > hi {
                return Err(bad("lo exceeds hi"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    /// Any of these labels. For a quantitative attribute the labels name
    /// schema buckets.
    Values(BTreeSet<String>),
    Range(NumericRange),
}

/// At most one clause per attribute; clauses conjoin.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FilterSpec {
    #[serde(default)]
    pub clauses: BTreeMap<String, Clause>,
}

impl FilterSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn with_values<I, S>(mut self, attr: &str, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.clauses.insert(
            attr.to_string(),
            Clause::Values(labels.into_iter().map(Into::into).collect()),
        );
        self
    }

    pub fn with_range(mut self, attr: &str, range: NumericRange) -> Self {
        self.clauses.insert(attr.to_string(), Clause::Range(range));
        self
    }

    pub fn attributes(&self) -> impl Iterator<Item = &str> {
        self.clauses.keys().map(String::as_str)
    }

    /// Checks every clause against the catalog schema.
    pub fn validate(&self, catalog: &Catalog) -> Result<()> {
        self.compile(catalog).map(|_| ())
    }

    fn compile<'c>(&self, catalog: &'c Catalog) -> Result<Vec<Compiled<'c>>> {
        self.clauses
            .iter()
            .map(|(attr_id, clause)| compile_clause(catalog.attribute(attr_id)?, clause))
            .collect()
    }
}

enum Compiled<'c> {
    Labels(&'c str, BTreeSet<String>),
    Buckets(&'c str, Vec<&'c Bucket>),
    Range(&'c str, NumericRange),
}

fn compile_clause<'c>(attr: &'c AttributeDef, clause: &Clause) -> Result<Compiled<'c>> {
    let bad = |reason: &str| Error::InvalidClause {
        attribute: attr.id.clone(),
        reason: reason.to_string(),
    };
    match clause {
        Clause::Values(labels) => {
            if labels.is_empty() {
                return Err(bad("empty value set"));
            }
            let unknown = |l: &String| Error::UnknownLabel {
                attribute: attr.id.clone(),
                label: l.clone(),
            };
            if attr.kind == AttrKind::Quantitative {
                let buckets = labels
                    .iter()
                    .map(|l| {
                        attr.buckets
                            .iter()
                            .find(|b| &b.label == l)
                            .ok_or_else(|| unknown(l))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Compiled::Buckets(&attr.id, buckets))
            } else {
                if let Some(l) = labels.iter().find(|l| attr.label_position(l).is_none()) {
                    return Err(unknown(l));
                }
                Ok(Compiled::Labels(&attr.id, labels.clone()))
            }
        }
        Clause::Range(range) => {
            if attr.kind != AttrKind::Quantitative {
                return Err(bad("numeric range on a label attribute"));
            }
            range.check(&attr.id)?;
            Ok(Compiled::Range(&attr.id, *range))
        }
    }
}

impl Compiled<'_> {
    fn matches(&self, p: &Product) -> bool {
        match self {
            Compiled::Labels(id, set) => {
                matches!(p.values.get(*id), Some(Value::Label(l)) if set.contains(l))
            }
            Compiled::Buckets(id, buckets) => match p.values.get(*id) {
                Some(Value::Number(v)) => buckets.iter().any(|b| b.contains(*v)),
                _ => false,
            },
            Compiled::Range(id, range) => match p.values.get(*id) {
                Some(Value::Number(v)) => range.contains(*v),
                _ => false,
            },
        }
    }
}

/// Ids of products satisfying every clause, in catalog order. Products missing
/// a constrained attribute never match.
pub fn apply_filter(catalog: &Catalog, spec: &FilterSpec) -> Result<Vec<String>> {
    let compiled = spec.compile(catalog)?;
    Ok(catalog
        .products()
        .iter()
        .filter(|p| compiled.iter().all(|c| c.matches(p)))
        .map(|p| p.id.clone())
        .collect())
}
