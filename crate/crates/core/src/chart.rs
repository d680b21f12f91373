//! Final-stage comparison: per-attribute rectangles whose height encodes raw
//! magnitude, plus the baseline raw-value comparison table.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::catalog::{AttrKind, Catalog, Value};
use crate::error::{Error, Result};
use crate::product_view::format_value;

/// Colours indexed by bucket insertion order.
pub const PALETTE: [&str; 8] = [
    "#f28e2b", // orange
    "#4e79a7", // blue
    "#59a14f", // green
    "#e15759", // red
    "#b07aa1", // purple
    "#76b7b2", // teal
    "#edc948", // yellow
    "#9c755f", // brown
];

pub fn color_for(index: usize) -> &'static str {
    PALETTE[index % PALETTE.len()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartProduct {
    pub product_id: String,
    pub color_index: usize,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub product_id: String,
    pub raw_value: Value,
    /// In (0, 1]; the largest value of the attribute has height exactly 1.
    pub height: f64,
    /// Competition rank by ascending value (1 = smallest; ties share a rank).
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeRow {
    pub attribute: String,
    /// One cell per product, in bucket order.
    pub cells: Vec<Cell>,
    /// Product ids by ascending value; ties keep bucket order.
    pub ascending_order: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonChart {
    pub products: Vec<ChartProduct>,
    pub attributes: Vec<AttributeRow>,
}

impl ComparisonChart {
    pub fn row(&self, attr: &str) -> Option<&AttributeRow> {
        self.attributes.iter().find(|r| r.attribute == attr)
    }
}

/// Map values onto heights proportional to the maximum.
///
/// Positive data is scaled as `v / max`. If any value is non-positive the data
/// is first shifted by `δ - min` with `δ = (max - min) / n` (or 1 when all
/// values are equal) so the smallest maps to a positive height; the shift
/// scales with the data so rescaling stays invisible.
pub fn proportional_heights(values: &[f64]) -> Vec<f64> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min > 0.0 {
        return values.iter().map(|v| v / max).collect();
    }
    if max == min {
        return vec![1.0; values.len()];
    }
    let delta = (max - min) / values.len() as f64;
    let top = max - min + delta;
    values.iter().map(|v| (v - min + delta) / top).collect()
}

/// Competition ranks for ascending order.
fn ranks(values: &[f64]) -> Vec<usize> {
    values
        .iter()
        .map(|v| 1 + values.iter().filter(|w| *w < v).count())
        .collect()
}

pub fn build_chart(
    catalog: &Catalog,
    bucket: &[String],
    attrs: &[String],
) -> Result<ComparisonChart> {
    if bucket.is_empty() {
        return Err(Error::EmptyBucket);
    }
    if attrs.is_empty() {
        return Err(Error::EmptyAttrs);
    }
    let products: Vec<_> = bucket
        .iter()
        .map(|id| catalog.product(id))
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(attrs.len());
    for attr_id in attrs {
        let attr = catalog.attribute(attr_id)?;
        if attr.kind == AttrKind::Categorical {
            return Err(Error::NonComparableAttribute(attr_id.clone()));
        }
        let mut raw = Vec::with_capacity(products.len());
        let mut mapped = Vec::with_capacity(products.len());
        for p in &products {
            let missing = || Error::MissingValue {
                product: p.id.clone(),
                attribute: attr_id.clone(),
            };
            mapped.push(catalog.axis_value(p, attr).ok_or_else(missing)?);
            raw.push(p.values[attr_id].clone());
        }
        let heights = proportional_heights(&mapped);
        let rank = ranks(&mapped);
        let mut order: Vec<usize> = (0..products.len()).collect();
        order.sort_by(|&a, &b| mapped[a].total_cmp(&mapped[b]));
        rows.push(AttributeRow {
            attribute: attr_id.clone(),
            cells: products
                .iter()
                .zip(raw)
                .enumerate()
                .map(|(i, (p, raw_value))| Cell {
                    product_id: p.id.clone(),
                    raw_value,
                    height: heights[i],
                    rank: rank[i],
                })
                .collect(),
            ascending_order: order.into_iter().map(|i| products[i].id.clone()).collect(),
        });
    }

    Ok(ComparisonChart {
        products: bucket
            .iter()
            .enumerate()
            .map(|(i, id)| ChartProduct {
                product_id: id.clone(),
                color_index: i,
                color: color_for(i).to_string(),
            })
            .collect(),
        attributes: rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableProduct {
    pub product_id: String,
    pub name: String,
    pub image_refs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub attribute: String,
    pub display_name: String,
    /// Formatted value per product, `None` where the listing is silent.
    pub values: Vec<Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableGroup {
    pub heading: String,
    pub rows: Vec<TableRow>,
}

/// Grouped raw-value table served to the baseline (non-visual) interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub products: Vec<TableProduct>,
    pub groups: Vec<TableGroup>,
}

pub fn comparison_table(catalog: &Catalog, bucket: &[String]) -> Result<ComparisonTable> {
    if bucket.is_empty() {
        return Err(Error::EmptyBucket);
    }
    let products: Vec<_> = bucket
        .iter()
        .map(|id| catalog.product(id))
        .collect::<Result<_>>()?;
    let mut groups: Vec<TableGroup> = Vec::new();
    let mut slot: BTreeMap<String, usize> = BTreeMap::new();
    for attr in catalog.schema() {
        let heading = attr.group.clone().unwrap_or_else(|| "General".to_string());
        let idx = *slot.entry(heading.clone()).or_insert_with(|| {
            groups.push(TableGroup {
                heading: heading.clone(),
                rows: vec![],
            });
            groups.len() - 1
        });
        groups[idx].rows.push(TableRow {
            attribute: attr.id.clone(),
            display_name: attr.display_name.clone(),
            values: products
                .iter()
                .map(|p| p.values.get(&attr.id).map(|v| format_value(attr, v)))
                .collect(),
        });
    }
    Ok(ComparisonTable {
        products: products
            .iter()
            .map(|p| TableProduct {
                product_id: p.id.clone(),
                name: p.name.clone(),
                image_refs: p.image_refs.clone(),
            })
            .collect(),
        groups,
    })
}
