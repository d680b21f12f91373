//! Multi-attribute product catalog: schema, products, validation and loading.
//!
//! A catalog is immutable once loaded. Product order in the source file is the
//! canonical order used for every downstream tie-break.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttrKind {
    Quantitative,
    Ordinal,
    Categorical,
}

impl AttrKind {
    /// Quantitative and ordinal attributes can be placed on an axis.
    pub fn is_comparable(self) -> bool {
        !matches!(self, AttrKind::Categorical)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherBetter,
    LowerBetter,
    #[default]
    Neutral,
}

/// A labelled numeric interval `[lo, hi)` used to expose a quantitative
/// attribute as discrete wheel segments. Missing bounds are unbounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
}

impl Bucket {
    pub fn contains(&self, v: f64) -> bool {
        self.lo.is_none_or(|lo| v >= lo) && self.hi.is_none_or(|hi| v < hi)
    }
}

/// Values of another attribute nested under one value of this attribute
/// (model lines under a brand).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubGroup {
    pub value: String,
    pub subvalues: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubGrouping {
    /// Attribute whose labels appear as subvalues.
    pub attribute: String,
    pub groups: Vec<SubGroup>,
}

impl SubGrouping {
    pub fn subvalues_of(&self, value: &str) -> &[String] {
        self.groups
            .iter()
            .find(|g| g.value == value)
            .map(|g| g.subvalues.as_slice())
            .unwrap_or(&[])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeDef {
    pub id: String,
    pub display_name: String,
    pub kind: AttrKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed_values: Option<Vec<String>>,
    #[serde(default)]
    pub direction: Direction,
    /// Section heading used by the comparison table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub buckets: Vec<Bucket>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgroups: Option<SubGrouping>,
}

impl AttributeDef {
    pub fn labels(&self) -> &[String] {
        self.allowed_values.as_deref().unwrap_or(&[])
    }

    /// 1-based position of `label` in `allowed_values`.
    pub fn label_position(&self, label: &str) -> Option<usize> {
        self.labels().iter().position(|l| l == label).map(|i| i + 1)
    }
}

/// A product attribute value: a number for quantitative attributes, a label
/// otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Label(String),
}

impl Value {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(n) => Some(*n),
            Value::Label(_) => None,
        }
    }

    pub fn as_label(&self) -> Option<&str> {
        match self {
            Value::Label(l) => Some(l),
            Value::Number(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Product {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub image_refs: Vec<String>,
    pub values: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CatalogFile {
    variant_tag: String,
    schema: Vec<AttributeDef>,
    products: Vec<Product>,
}

/// A validated catalog. Construct with [`Catalog::new`] or [`load_catalog`].
#[derive(Debug, Clone)]
pub struct Catalog {
    variant_tag: String,
    schema: Vec<AttributeDef>,
    products: Vec<Product>,
    attr_index: HashMap<String, usize>,
    product_index: HashMap<String, usize>,
}

impl PartialEq for Catalog {
    fn eq(&self, other: &Self) -> bool {
        self.variant_tag == other.variant_tag
            && self.schema == other.schema
            && self.products == other.products
    }
}

impl Catalog {
    pub fn new(
        variant_tag: impl Into<String>,
        schema: Vec<AttributeDef>,
        products: Vec<Product>,
    ) -> Result<Self> {
        let variant_tag = variant_tag.into();
        if variant_tag.trim().is_empty() {
            return Err(Error::InvalidSchema("variant_tag must be non-empty".into()));
        }
        let attr_index = validate_schema(&schema)?;
        let mut product_index = HashMap::with_capacity(products.len());
        for (i, p) in products.iter().enumerate() {
            if product_index.insert(p.id.clone(), i).is_some() {
                return Err(Error::SchemaViolation {
                    product: p.id.clone(),
                    attribute: String::new(),
                    reason: "duplicate product id".into(),
                });
            }
            validate_product(&schema, &attr_index, p)?;
        }
        Ok(Catalog {
            variant_tag,
            schema,
            products,
            attr_index,
            product_index,
        })
    }

    pub fn variant_tag(&self) -> &str {
        &self.variant_tag
    }

    pub fn schema(&self) -> &[AttributeDef] {
        &self.schema
    }

    pub fn products(&self) -> &[Product] {
        &self.products
    }

    pub fn len(&self) -> usize {
        self.products.len()
    }

    pub fn is_empty(&self) -> bool {
        self.products.is_empty()
    }

    pub fn attribute(&self, id: &str) -> Result<&AttributeDef> {
        self.attr_index
            .get(id)
            .map(|&i| &self.schema[i])
            .ok_or_else(|| Error::UnknownAttribute(id.to_string()))
    }

    /// Schema position of an attribute.
    pub fn attribute_position(&self, id: &str) -> Option<usize> {
        self.attr_index.get(id).copied()
    }

    pub fn product(&self, id: &str) -> Result<&Product> {
        self.product_index
            .get(id)
            .map(|&i| &self.products[i])
            .ok_or_else(|| Error::UnknownProduct(id.to_string()))
    }

    /// Catalog position of a product, the canonical tie-break key.
    pub fn product_position(&self, id: &str) -> Option<usize> {
        self.product_index.get(id).copied()
    }

    pub fn all_ids(&self) -> Vec<String> {
        self.products.iter().map(|p| p.id.clone()).collect()
    }

    /// Value of a comparable attribute projected onto the real line: the
    /// number itself for quantitative attributes, the 1-based label position
    /// for ordinal ones. `None` when the product does not carry the attribute.
    pub fn axis_value(&self, product: &Product, attr: &AttributeDef) -> Option<f64> {
        match (attr.kind, product.values.get(&attr.id)?) {
            (AttrKind::Quantitative, Value::Number(n)) => Some(*n),
            (AttrKind::Ordinal, Value::Label(l)) => attr.label_position(l).map(|p| p as f64),
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        let file = CatalogFile {
            variant_tag: self.variant_tag.clone(),
            schema: self.schema.clone(),
            products: self.products.clone(),
        };
        serde_json::to_string_pretty(&file).expect("catalog serializes")
    }
}

impl Serialize for Catalog {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct View<'a> {
            variant_tag: &'a str,
            schema: &'a [AttributeDef],
            products: &'a [Product],
        }
        View {
            variant_tag: &self.variant_tag,
            schema: &self.schema,
            products: &self.products,
        }
        .serialize(s)
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidSchema(msg)
}

fn validate_schema(schema: &[AttributeDef]) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(schema.len());
    for (i, a) in schema.iter().enumerate() {
        if a.id.is_empty() {
            return Err(invalid("attribute id must be non-empty".into()));
        }
        if index.insert(a.id.clone(), i).is_some() {
            return Err(invalid(format!("duplicate attribute id `{}`", a.id)));
        }
        match (a.kind, &a.allowed_values) {
            (AttrKind::Quantitative, Some(_)) => {
                return Err(invalid(format!(
                    "quantitative attribute `{}` must not declare allowed_values",
                    a.id
                )))
            }
            (AttrKind::Ordinal | AttrKind::Categorical, None) => {
                return Err(invalid(format!(
                    "attribute `{}` needs allowed_values",
                    a.id
                )))
            }
            (_, Some(values)) => {
                if values.is_empty() {
                    return Err(invalid(format!(
                        "attribute `{}` has empty allowed_values",
                        a.id
                    )));
                }
                let mut seen = HashSet::new();
                if let Some(dup) = values.iter().find(|v| !seen.insert(v.as_str())) {
                    return Err(invalid(format!(
                        "attribute `{}` repeats label `{dup}`",
                        a.id
                    )));
                }
            }
            (AttrKind::Quantitative, None) => {}
        }
        validate_buckets(a)?;
    }

    let mut targets = HashSet::new();
    for a in schema {
        let Some(sub) = &a.subgroups else { continue };
        if a.kind == AttrKind::Quantitative {
            return Err(invalid(format!(
                "quantitative attribute `{}` cannot have subgroups",
                a.id
            )));
        }
        let target = index
            .get(&sub.attribute)
            .map(|&i| &schema[i])
            .ok_or_else(|| {
                invalid(format!(
                    "subgroup target `{}` is not in the schema",
                    sub.attribute
                ))
            })?;
        if target.id == a.id || target.kind == AttrKind::Quantitative || target.subgroups.is_some()
        {
            return Err(invalid(format!(
                "`{}` is not a valid subgroup target for `{}`",
                target.id, a.id
            )));
        }
        if !targets.insert(target.id.clone()) {
            return Err(invalid(format!(
                "`{}` is nested under two attributes",
                target.id
            )));
        }
        let mut claimed = HashSet::new();
        let mut parents = HashSet::new();
        for g in &sub.groups {
            if a.label_position(&g.value).is_none() {
                return Err(invalid(format!(
                    "subgroup parent `{}` not a value of `{}`",
                    g.value, a.id
                )));
            }
            if !parents.insert(g.value.as_str()) {
                return Err(invalid(format!(
                    "subgroup parent `{}` listed twice",
                    g.value
                )));
            }
            for s in &g.subvalues {
                if target.label_position(s).is_none() {
                    return Err(invalid(format!(
                        "subvalue `{s}` not a value of `{}`",
                        target.id
                    )));
                }
                if !claimed.insert(s.as_str()) {
                    return Err(invalid(format!("subvalue `{s}` appears under two parents")));
                }
            }
        }
    }
    Ok(index)
}

fn validate_buckets(a: &AttributeDef) -> Result<()> {
    if a.buckets.is_empty() {
        return Ok(());
    }
    if a.kind != AttrKind::Quantitative {
        return Err(invalid(format!(
            "only quantitative attributes take buckets (`{}`)",
            a.id
        )));
    }
    let mut labels = HashSet::new();
    for b in &a.buckets {
        if !labels.insert(b.label.as_str()) {
            return Err(invalid(format!(
                "bucket `{}` repeated on `{}`",
                b.label, a.id
            )));
        }
        let finite = b.lo.is_none_or(f64::is_finite) && b.hi.is_none_or(f64::is_finite);
        if !finite || matches!((b.lo, b.hi), (Some(lo), Some(hi)) if lo >= hi) {
            return Err(invalid(format!(
                "bucket `{}` on `{}` is empty or non-finite",
                b.label, a.id
            )));
        }
    }
    let mut sorted: Vec<&Bucket> = a.buckets.iter().collect();
    sorted.sort_by(|x, y| {
        x.lo.unwrap_or(f64::NEG_INFINITY)
            .total_cmp(&y.lo.unwrap_or(f64::NEG_INFINITY))
    });
    for pair in sorted.windows(2) {
        let prev_hi = pair[0].hi.unwrap_or(f64::INFINITY);
        let next_lo = pair[1].lo.unwrap_or(f64::NEG_INFINITY);
        if next_lo < prev_hi {
            return Err(invalid(format!(
                "buckets `{}` and `{}` on `{}` overlap",
                pair[0].label, pair[1].label, a.id
            )));
        }
    }
    Ok(())
}

fn validate_product(
    schema: &[AttributeDef],
    index: &HashMap<String, usize>,
    p: &Product,
) -> Result<()> {
    let violation = |attr: &str, reason: String| Error::SchemaViolation {
        product: p.id.clone(),
        attribute: attr.to_string(),
        reason,
    };
    if p.id.is_empty() {
        return Err(violation("", "empty product id".into()));
    }
    for (key, value) in &p.values {
        let Some(&i) = index.get(key) else {
            return Err(violation(key, "attribute not in schema".into()));
        };
        let attr = &schema[i];
        match (attr.kind, value) {
            (AttrKind::Quantitative, Value::Number(n)) if n.is_finite() => {}
            (AttrKind::Quantitative, Value::Number(_)) => {
                return Err(violation(key, "non-finite number".into()))
            }
            (AttrKind::Quantitative, Value::Label(l)) => {
                return Err(violation(key, format!("expected a number, found `{l}`")))
            }
            (_, Value::Label(l)) if attr.label_position(l).is_some() => {}
            (_, Value::Label(l)) => {
                return Err(violation(key, format!("`{l}` is not an allowed value")))
            }
            (_, Value::Number(n)) => {
                return Err(violation(key, format!("expected a label, found {n}")))
            }
        }
    }
    for attr in schema {
        let Some(sub) = &attr.subgroups else { continue };
        let (Some(Value::Label(parent)), Some(Value::Label(child))) =
            (p.values.get(&attr.id), p.values.get(&sub.attribute))
        else {
            continue;
        };
        if !sub.subvalues_of(parent).contains(child) {
            return Err(violation(
                &sub.attribute,
                format!("`{child}` is not listed under {} `{parent}`", attr.id),
            ));
        }
    }
    Ok(())
}

pub fn load_catalog_str(text: &str) -> Result<Catalog> {
    let file: CatalogFile =
        serde_json::from_str(text).map_err(|e| Error::MalformedInput(e.to_string()))?;
    Catalog::new(file.variant_tag, file.schema, file.products)
}

pub fn load_catalog<R: Read>(mut source: R) -> Result<Catalog> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| Error::MalformedInput(e.to_string()))?;
    load_catalog_str(&text)
}

pub fn load_catalog_path(path: impl AsRef<Path>) -> Result<Catalog> {
    let text = std::fs::read_to_string(path)?;
    load_catalog_str(&text)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum AttributeRange {
    Numeric { min: f64, max: f64 },
    Labels(Vec<String>),
}

/// Exact min/max of a quantitative attribute, or the declared label order of
/// an ordinal/categorical one.
pub fn attribute_range(catalog: &Catalog, attr: &str) -> Result<AttributeRange> {
    let def = catalog.attribute(attr)?;
    if def.kind != AttrKind::Quantitative {
        return Ok(AttributeRange::Labels(def.labels().to_vec()));
    }
    let mut values = catalog
        .products()
        .iter()
        .filter_map(|p| p.values.get(attr).and_then(Value::as_number));
    let first = values
        .next()
        .ok_or_else(|| Error::NoData(attr.to_string()))?;
    let (min, max) = values.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v)));
    Ok(AttributeRange::Numeric { min, max })
}
