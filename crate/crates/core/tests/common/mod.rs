//! Independent reference implementations and generators shared by the
//! integration suites. Nothing here calls into the code under test beyond
//! reading catalog data.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use shortlist_core::catalog::Direction;
use shortlist_core::{
    AttrKind, AttributeDef, Catalog, Clause, FilterSpec, NumericRange, Product, Value,
};

pub fn golden_path(variant: &str, task: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{variant}-{task}.txt"))
}

pub fn read_golden(variant: &str, task: &str) -> Vec<String> {
    std::fs::read_to_string(golden_path(variant, task))
        .expect("golden file")
        .lines()
        .map(str::to_string)
        .collect()
}

fn in_range(r: &NumericRange, v: f64) -> bool {
    let lo_ok =
        r.lo.map_or(true, |lo| if r.lo_inclusive { v >= lo } else { v > lo });
    let hi_ok =
        r.hi.map_or(true, |hi| if r.hi_inclusive { v <= hi } else { v < hi });
    lo_ok && hi_ok
}

fn clause_holds(attr: &AttributeDef, clause: &Clause, value: &Value) -> bool {
    match (clause, value) {
        (Clause::Values(labels), Value::Label(l)) => labels.contains(l),
        (Clause::Values(labels), Value::Number(n)) => attr
            .buckets
            .iter()
            .filter(|b| labels.contains(&b.label))
            .any(|b| b.lo.map_or(true, |lo| *n >= lo) && b.hi.map_or(true, |hi| *n < hi)),
        (Clause::Range(r), Value::Number(n)) => in_range(r, *n),
        (Clause::Range(_), Value::Label(_)) => false,
    }
}

/// Linear scan: a product passes when it carries every constrained
/// attribute and satisfies each clause.
pub fn oracle_filter(catalog: &Catalog, spec: &FilterSpec) -> BTreeSet<String> {
    catalog
        .products()
        .iter()
        .filter(|p| {
            spec.clauses.iter().all(|(attr_id, clause)| {
                let attr = catalog.schema().iter().find(|a| &a.id == attr_id).unwrap();
                p.values
                    .get(attr_id)
                    .is_some_and(|v| clause_holds(attr, clause, v))
            })
        })
        .map(|p| p.id.clone())
        .collect()
}

/// Direction-normalised coordinate: larger is better.
pub fn oriented(attr: &AttributeDef, p: &Product) -> Option<f64> {
    let raw = match p.values.get(&attr.id)? {
        Value::Number(n) => *n,
        Value::Label(l) => (attr.allowed_values.as_ref()?.iter().position(|x| x == l)? + 1) as f64,
    };
    Some(if attr.direction == Direction::LowerBetter {
        -raw
    } else {
        raw
    })
}

/// O(n²) Pareto front by the textbook definition.
pub fn brute_dominant(catalog: &Catalog, ids: &[String], attrs: &[String]) -> BTreeSet<String> {
    let defs: Vec<&AttributeDef> = attrs
        .iter()
        .map(|a| catalog.schema().iter().find(|d| &d.id == a).unwrap())
        .collect();
    let rows: Vec<(String, Vec<f64>)> = ids
        .iter()
        .filter_map(|id| {
            let p = catalog.products().iter().find(|p| &p.id == id).unwrap();
            let row: Option<Vec<f64>> = defs.iter().map(|d| oriented(d, p)).collect();
            row.map(|r| (id.clone(), r))
        })
        .collect();
    rows.iter()
        .filter(|(_, a)| {
            !rows.iter().any(|(_, b)| {
                b.iter().zip(a).all(|(x, y)| x >= y) && b.iter().zip(a).any(|(x, y)| x > y)
            })
        })
        .map(|(id, _)| id.clone())
        .collect()
}

pub fn comparable(catalog: &Catalog) -> Vec<String> {
    catalog
        .schema()
        .iter()
        .filter(|a| a.kind != AttrKind::Categorical)
        .map(|a| a.id.clone())
        .collect()
}

fn observed_numbers(catalog: &Catalog, attr: &str) -> Vec<f64> {
    catalog
        .products()
        .iter()
        .filter_map(|p| match p.values.get(attr) {
            Some(Value::Number(n)) => Some(*n),
            _ => None,
        })
        .collect()
}

fn random_range<R: Rng>(rng: &mut R, seen: &[f64]) -> NumericRange {
    let pick = |rng: &mut R| -> f64 {
        let v = *seen.choose(rng).unwrap();
        match rng.gen_range(0..3) {
            0 => v,
            1 => v + rng.gen_range(-1.0..1.0),
            _ => v * rng.gen_range(0.5..1.5),
        }
    };
    let mut lo = rng.gen_bool(0.7).then(|| pick(rng));
    let mut hi = rng.gen_bool(0.7).then(|| pick(rng));
    if let (Some(a), Some(b)) = (lo, hi) {
        if a > b {
            lo = Some(b);
            hi = Some(a);
        }
    }
    NumericRange {
        lo,
        lo_inclusive: rng.gen_bool(0.5),
        hi,
        hi_inclusive: rng.gen_bool(0.5),
    }
}

/// A valid filter over up to four attributes.
pub fn random_spec<R: Rng>(rng: &mut R, catalog: &Catalog) -> FilterSpec {
    let mut spec = FilterSpec::new();
    let n = rng.gen_range(0..=4);
    let attrs: Vec<&AttributeDef> = catalog.schema().choose_multiple(rng, n).collect();
    for attr in attrs {
        let clause = match attr.kind {
            AttrKind::Quantitative if !attr.buckets.is_empty() && rng.gen_bool(0.4) => {
                let k = rng.gen_range(1..=attr.buckets.len());
                Clause::Values(
                    attr.buckets
                        .choose_multiple(rng, k)
                        .map(|b| b.label.clone())
                        .collect(),
                )
            }
            AttrKind::Quantitative => {
                Clause::Range(random_range(rng, &observed_numbers(catalog, &attr.id)))
            }
            _ => {
                let labels = attr.allowed_values.as_deref().unwrap_or_default();
                let k = rng.gen_range(1..=labels.len());
                Clause::Values(labels.choose_multiple(rng, k).cloned().collect())
            }
        };
        spec.clauses.insert(attr.id.clone(), clause);
    }
    spec
}

/// Strictly increasing map chosen at random, suitable for positive inputs.
pub fn random_monotone<R: Rng>(rng: &mut R, scale: f64) -> impl Fn(f64) -> f64 {
    let kind = rng.gen_range(0..5);
    let a = rng.gen_range(0.01..100.0);
    let b = rng.gen_range(-1000.0..1000.0);
    move |x: f64| match kind {
        0 => a * x + b,
        1 => (x / scale).powi(3) * a + b,
        2 => (x / scale).exp() * a,
        3 => (x + 1.0).ln() * a + b,
        _ => x.sqrt() * a - b,
    }
}

/// Same catalog with every quantitative value passed through `f(attr)`.
pub fn rescaled(catalog: &Catalog, f: &dyn Fn(&str, f64) -> f64) -> Catalog {
    let products = catalog
        .products()
        .iter()
        .map(|p| {
            let mut p = p.clone();
            for (k, v) in p.values.iter_mut() {
                if let Value::Number(n) = v {
                    *n = f(k, *n);
                }
            }
            p
        })
        .collect();
    let mut schema = catalog.schema().to_vec();
    for a in &mut schema {
        a.buckets.clear();
    }
    Catalog::new(catalog.variant_tag(), schema, products).expect("rescaled catalog stays valid")
}
