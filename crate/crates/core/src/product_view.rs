use serde::{Deserialize, Serialize};

use crate::catalog::{AttributeDef, Catalog, Product, Value};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecRow {
    pub attribute: String,
    pub display_name: String,
    pub value: String,
}

/// Everything shown when a scatter point is opened.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductDetail {
    pub product: Product,
    pub spec_rows: Vec<SpecRow>,
    pub image_refs: Vec<String>,
}

/// `"4 GB"` for quantitative values with a unit, the raw label otherwise.
pub fn format_value(attr: &AttributeDef, value: &Value) -> String {
    match (value, &attr.unit) {
        (Value::Number(n), Some(unit)) => format!("{n} {unit}"),
        (Value::Number(n), None) => n.to_string(),
        (Value::Label(l), _) => l.clone(),
    }
}

pub fn product_detail(catalog: &Catalog, product_id: &str) -> Result<ProductDetail> {
    let product = catalog.product(product_id)?;
    let spec_rows = catalog
        .schema()
        .iter()
        .filter_map(|attr| {
            product.values.get(&attr.id).map(|v| SpecRow {
                attribute: attr.id.clone(),
                display_name: attr.display_name.clone(),
                value: format_value(attr, v),
            })
        })
        .collect();
    Ok(ProductDetail {
        image_refs: product.image_refs.clone(),
        product: product.clone(),
        spec_rows,
    })
}
