//! Two-axis scatter projection of the filtered set, Pareto dominance over
//! chosen attributes, and the compare bucket.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::catalog::{AttrKind, AttributeDef, Catalog, Direction};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Corner {
    TopRight,
    TopLeft,
    BottomRight,
    BottomLeft,
}

impl Corner {
    fn from_directions(x: Direction, y: Direction) -> Self {
        let right = x != Direction::LowerBetter;
        let top = y != Direction::LowerBetter;
        match (right, top) {
            (true, true) => Corner::TopRight,
            (false, true) => Corner::TopLeft,
            (true, false) => Corner::BottomRight,
            (false, false) => Corner::BottomLeft,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub product_id: String,
    pub x: f64,
    pub y: f64,
    pub in_bucket: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterProjection {
    pub x_attr: String,
    pub y_attr: String,
    pub points: Vec<ScatterPoint>,
    /// `None` when no filtered product carries both attributes.
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    pub preferred_corner: Corner,
}

fn comparable<'c>(catalog: &'c Catalog, id: &str) -> Result<&'c AttributeDef> {
    let attr = catalog.attribute(id)?;
    if !attr.kind.is_comparable() {
        return Err(Error::NonComparableAttribute(id.to_string()));
    }
    Ok(attr)
}

fn bounds(vals: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    vals.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// One point per filtered product that carries both attributes. Ordinal
/// labels project to their 1-based position.
pub fn scatter_projection(
    catalog: &Catalog,
    filtered: &[String],
    bucket: &[String],
    x_attr: &str,
    y_attr: &str,
) -> Result<ScatterProjection> {
    let x = comparable(catalog, x_attr)?;
    let y = comparable(catalog, y_attr)?;
    if x_attr == y_attr {
        return Err(Error::SameAttribute(x_attr.to_string()));
    }
    let mut points = Vec::new();
    for id in filtered {
        let p = catalog.product(id)?;
        if let (Some(px), Some(py)) = (catalog.axis_value(p, x), catalog.axis_value(p, y)) {
            points.push(ScatterPoint {
                product_id: id.clone(),
                x: px,
                y: py,
                in_bucket: bucket.contains(id),
            });
        }
    }
    Ok(ScatterProjection {
        x_attr: x_attr.to_string(),
        y_attr: y_attr.to_string(),
        x_range: bounds(points.iter().map(|p| p.x)),
        y_range: bounds(points.iter().map(|p| p.y)),
        points,
        preferred_corner: Corner::from_directions(x.direction, y.direction),
    })
}

/// `a` dominates `b`: at least as large everywhere and strictly larger once.
pub fn dominates<T: PartialOrd>(a: &[T], b: &[T]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Less) | None => return false,
            Some(Ordering::Greater) => strict = true,
            Some(Ordering::Equal) => {}
        }
    }
    strict
}

/// Indices of the Pareto-maximal rows (larger is better in every column),
/// ascending.
///
/// Sort-filter skyline: rows are visited in lexicographically descending
/// order, so any dominator of a row is visited before it, and each row only
/// needs checking against the skyline found so far.
pub fn pareto_maximal<F: Float>(rows: &[Vec<F>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| {
        for (x, y) in rows[b].iter().zip(&rows[a]) {
            match x.partial_cmp(y).unwrap_or(Ordering::Equal) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        a.cmp(&b)
    });
    let mut skyline: Vec<usize> = Vec::new();
    for i in order {
        if !skyline.iter().any(|&s| dominates(&rows[s], &rows[i])) {
            skyline.push(i);
        }
    }
    skyline.sort_unstable();
    skyline
}

/// Products not dominated by any other over `attrs`, after negating
/// lower-is-better attributes. Products missing any of the attributes are
/// left out. Result is in input order.
pub fn dominant_set(
    catalog: &Catalog,
    filtered: &[String],
    attrs: &[String],
) -> Result<Vec<String>> {
    if attrs.is_empty() {
        return Err(Error::EmptyAttrs);
    }
    let defs = attrs
        .iter()
        .map(|a| comparable(catalog, a))
        .collect::<Result<Vec<_>>>()?;
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    for id in filtered {
        let p = catalog.product(id)?;
        let row: Option<Vec<f64>> = defs
            .iter()
            .map(|d| {
                catalog.axis_value(p, d).map(|v| match d.direction {
                    Direction::LowerBetter => -v,
                    _ => v,
                })
            })
            .collect();
        if let Some(row) = row {
            ids.push(id.clone());
            rows.push(row);
        }
    }
    Ok(pareto_maximal(&rows)
        .into_iter()
        .map(|i| ids[i].clone())
        .collect())
}

pub const DEFAULT_BUCKET_CAP: usize = 4;

/// Ordered shortlist of products picked for detailed comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompareBucket {
    cap: usize,
    items: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BucketChange {
    Added,
    Removed,
}

impl Default for CompareBucket {
    fn default() -> Self {
        Self::with_cap(DEFAULT_BUCKET_CAP)
    }
}

impl CompareBucket {
    pub fn with_cap(cap: usize) -> Self {
        CompareBucket {
            cap,
            items: Vec::new(),
        }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Members in insertion order; position is the colour index.
    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.items.iter().any(|i| i == id)
    }

    /// Remove `id` if present, otherwise add it. Additions must come from the
    /// current filtered set and respect the cap.
    pub fn toggle(&mut self, id: &str, filtered: &[String]) -> Result<BucketChange> {
        if let Some(pos) = self.items.iter().position(|i| i == id) {
            self.items.remove(pos);
            return Ok(BucketChange::Removed);
        }
        if !filtered.iter().any(|f| f == id) {
            return Err(Error::NotInFilteredSet(id.to_string()));
        }
        if self.items.len() >= self.cap {
            return Err(Error::BucketFull(self.cap));
        }
        self.items.push(id.to_string());
        Ok(BucketChange::Added)
    }
}

/// Attributes that can be placed on a scatter axis or chart.
pub fn comparable_attributes(catalog: &Catalog) -> Vec<String> {
    catalog
        .schema()
        .iter()
        .filter(|a| a.kind != AttrKind::Categorical)
        .map(|a| a.id.clone())
        .collect()
}

/// Set-valued view used by callers that do not care about order.
pub fn dominant_ids(
    catalog: &Catalog,
    filtered: &[String],
    attrs: &[String],
) -> Result<BTreeSet<String>> {
    Ok(dominant_set(catalog, filtered, attrs)?
        .into_iter()
        .collect())
}
