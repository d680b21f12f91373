//! Dynamic-wheel attribute taxonomy and the filter its selection induces.
//!
//! The tree has up to three levels below the root: attributes, their values
//! (labels or quantitative buckets), and subvalues drawn from a schema-declared
//! sub-grouping (model lines under a brand). Selection is held at exactly one
//! granularity per root-to-leaf path.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::catalog::{AttrKind, Catalog};
use crate::error::{Error, Result};
use crate::filter::{Clause, FilterSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Root,
    Attribute,
    Value,
    Subvalue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WheelNode {
    pub id: String,
    pub label: String,
    pub node_kind: NodeKind,
    /// Attribute this node constrains. Empty for the root.
    pub attr_id: String,
    pub children: Vec<WheelNode>,
}

impl WheelNode {
    pub fn count(&self) -> usize {
        1 + self.children.iter().map(WheelNode::count).sum::<usize>()
    }
}

#[derive(Debug, Clone)]
struct NodeInfo {
    kind: NodeKind,
    label: String,
    /// Ancestor ids, nearest first, root excluded.
    ancestors: Vec<String>,
}

/// Immutable wheel built from a catalog schema, with a lookup index.
#[derive(Debug, Clone)]
pub struct WheelTree {
    root: WheelNode,
    index: HashMap<String, NodeInfo>,
    /// Attribute id -> nested attribute id (brand -> model_line).
    nested: HashMap<String, String>,
}

pub const ROOT_ID: &str = "root";

pub fn build_wheel(catalog: &Catalog) -> WheelTree {
    let schema = catalog.schema();
    let nested_targets: BTreeSet<&str> = schema
        .iter()
        .filter_map(|a| a.subgroups.as_ref().map(|s| s.attribute.as_str()))
        .collect();

    let mut children = Vec::new();
    let mut nested = HashMap::new();
    for attr in schema {
        if nested_targets.contains(attr.id.as_str()) {
            continue;
        }
        let values: Vec<WheelNode> = match attr.kind {
            AttrKind::Quantitative => attr
                .buckets
                .iter()
                .map(|b| {
                    leaf(
                        format!("{}/{}", attr.id, b.label),
                        &b.label,
                        NodeKind::Value,
                        &attr.id,
                    )
                })
                .collect(),
            AttrKind::Ordinal | AttrKind::Categorical => attr
                .labels()
                .iter()
                .map(|label| {
                    let id = format!("{}/{label}", attr.id);
                    let mut node = leaf(id.clone(), label, NodeKind::Value, &attr.id);
                    if let Some(sub) = &attr.subgroups {
                        node.children = sub
                            .subvalues_of(label)
                            .iter()
                            .map(|s| {
                                leaf(format!("{id}/{s}"), s, NodeKind::Subvalue, &sub.attribute)
                            })
                            .collect();
                    }
                    node
                })
                .collect(),
        };
        if let Some(sub) = &attr.subgroups {
            nested.insert(attr.id.clone(), sub.attribute.clone());
        }
        children.push(WheelNode {
            id: attr.id.clone(),
            label: attr.display_name.clone(),
            node_kind: NodeKind::Attribute,
            attr_id: attr.id.clone(),
            children: values,
        });
    }

    let root = WheelNode {
        id: ROOT_ID.into(),
        label: catalog.variant_tag().into(),
        node_kind: NodeKind::Root,
        attr_id: String::new(),
        children,
    };
    let mut index = HashMap::new();
    for child in &root.children {
        index_node(child, &mut Vec::new(), &mut index);
    }
    WheelTree {
        root,
        index,
        nested,
    }
}

fn leaf(id: String, label: &str, kind: NodeKind, attr: &str) -> WheelNode {
    WheelNode {
        id,
        label: label.to_string(),
        node_kind: kind,
        attr_id: attr.to_string(),
        children: vec![],
    }
}

fn index_node(node: &WheelNode, path: &mut Vec<String>, index: &mut HashMap<String, NodeInfo>) {
    let ancestors = path.iter().rev().cloned().collect();
    index.insert(
        node.id.clone(),
        NodeInfo {
            kind: node.node_kind,
            label: node.label.clone(),
            ancestors,
        },
    );
    path.push(node.id.clone());
    for c in &node.children {
        index_node(c, path, index);
    }
    path.pop();
}

impl WheelTree {
    pub fn root(&self) -> &WheelNode {
        &self.root
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &str> {
        self.index.keys().map(String::as_str)
    }

    pub fn kind(&self, id: &str) -> Option<NodeKind> {
        self.index.get(id).map(|n| n.kind)
    }

    fn info(&self, id: &str) -> Result<&NodeInfo> {
        self.index
            .get(id)
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    /// The attribute-level node above (or at) `id`.
    fn top_attribute(&self, id: &str) -> Result<&str> {
        let (own, info) = self
            .index
            .get_key_value(id)
            .ok_or_else(|| Error::UnknownNode(id.to_string()))?;
        Ok(info.ancestors.last().unwrap_or(own))
    }

    fn on_same_path(&self, a: &str, b: &str) -> bool {
        a == b
            || self
                .index
                .get(a)
                .is_some_and(|n| n.ancestors.iter().any(|x| x == b))
            || self
                .index
                .get(b)
                .is_some_and(|n| n.ancestors.iter().any(|x| x == a))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WheelState {
    #[serde(default)]
    pub expanded: BTreeSet<String>,
    #[serde(default)]
    pub selected: BTreeSet<String>,
}

/// Flip `node`'s selection. Selecting displaces any selected ancestor or
/// descendant so each path holds one granularity.
pub fn toggle_select(tree: &WheelTree, state: &WheelState, node: &str) -> Result<WheelState> {
    tree.info(node)?;
    let mut next = state.clone();
    if !next.selected.remove(node) {
        next.selected.retain(|s| !tree.on_same_path(s, node));
        next.selected.insert(node.to_string());
    }
    Ok(next)
}

/// Expansion is presentation state and never affects filtering.
pub fn toggle_expand(tree: &WheelTree, state: &WheelState, node: &str) -> Result<WheelState> {
    tree.info(node)?;
    let mut next = state.clone();
    if !next.expanded.remove(node) {
        next.expanded.insert(node.to_string());
    }
    Ok(next)
}

/// Rebuild a state by toggling each listed node in order from an empty
/// selection.
pub fn selection_from_list<S: AsRef<str>>(tree: &WheelTree, nodes: &[S]) -> Result<WheelState> {
    nodes.iter().try_fold(WheelState::default(), |st, n| {
        toggle_select(tree, &st, n.as_ref())
    })
}

/// Attributes with at least one selected node, in schema order.
pub fn selected_attributes(tree: &WheelTree, state: &WheelState) -> Vec<String> {
    let touched: BTreeSet<&str> = state
        .selected
        .iter()
        .filter_map(|id| tree.top_attribute(id).ok())
        .collect();
    tree.root
        .children
        .iter()
        .filter(|n| touched.contains(n.id.as_str()))
        .map(|n| n.attr_id.clone())
        .collect()
}

/// Translate a selection into a filter: within an attribute the selected
/// values are OR-ed, across attributes the clauses are AND-ed.
///
/// A selected attribute node marks interest without constraining. A selected
/// value whose children carry subvalues means any of them. Selected subvalues
/// constrain the nested attribute, pinning their parent value as well; sibling
/// values selected alongside contribute all of their declared subvalues.
pub fn selected_filter_spec(tree: &WheelTree, state: &WheelState) -> FilterSpec {
    #[derive(Default)]
    struct PerAttr {
        whole: bool,
        values: BTreeSet<String>,
        subvalues: BTreeSet<String>,
    }
    let mut per: BTreeMap<String, PerAttr> = BTreeMap::new();
    for id in &state.selected {
        let Ok(info) = tree.info(id) else { continue };
        let Ok(top) = tree.top_attribute(id) else {
            continue;
        };
        let entry = per.entry(top.to_string()).or_default();
        match info.kind {
            NodeKind::Attribute => entry.whole = true,
            NodeKind::Value => {
                entry.values.insert(info.label.clone());
            }
            NodeKind::Subvalue => {
                entry.subvalues.insert(info.label.clone());
                let parent = &info.ancestors[0];
                entry.values.insert(tree.index[parent].label.clone());
            }
            NodeKind::Root => {}
        }
    }

    let mut spec = FilterSpec::new();
    for (attr, sel) in per {
        if sel.whole || sel.values.is_empty() {
            continue;
        }
        if !sel.subvalues.is_empty() {
            let nested = &tree.nested[&attr];
            let mut lines = sel.subvalues.clone();
            for v in &sel.values {
                let value_id = format!("{attr}/{v}");
                if state.selected.contains(&value_id) {
                    if let Some(node) = find_child(&tree.root, &attr, &value_id) {
                        lines.extend(node.children.iter().map(|c| c.label.clone()));
                    }
                }
            }
            spec.clauses.insert(nested.clone(), Clause::Values(lines));
        }
        spec.clauses.insert(attr, Clause::Values(sel.values));
    }
    spec
}

fn find_child<'t>(root: &'t WheelNode, attr: &str, value_id: &str) -> Option<&'t WheelNode> {
    root.children
        .iter()
        .find(|a| a.id == attr)?
        .children
        .iter()
        .find(|v| v.id == value_id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{AttributeDef, Direction, SubGroup, SubGrouping};
    use crate::filter::apply_filter;
    use crate::generator::generate_catalog;

    fn brand_schema() -> Catalog {
        let brand = AttributeDef {
            id: "brand".into(),
            display_name: "Brand".into(),
            kind: AttrKind::Categorical,
            unit: None,
            allowed_values: Some(vec!["Samsung".into(), "Apple".into()]),
            direction: Direction::Neutral,
            group: None,
            buckets: vec![],
            subgroups: Some(SubGrouping {
                attribute: "line".into(),
                groups: vec![SubGroup {
                    value: "Samsung".into(),
                    subvalues: vec!["Grand".into(), "Edge".into()],
                }],
            }),
        };
        let line = AttributeDef {
            id: "line".into(),
            display_name: "Line".into(),
            kind: AttrKind::Categorical,
            unit: None,
            allowed_values: Some(vec!["Grand".into(), "Edge".into()]),
            direction: Direction::Neutral,
            group: None,
            buckets: vec![],
            subgroups: None,
        };
        Catalog::new("t", vec![brand, line], vec![]).unwrap()
    }

    #[test]
    fn brand_with_nested_lines() {
        let tree = build_wheel(&brand_schema());
        let root = tree.root();
        assert_eq!(root.children.len(), 1);
        let brand = &root.children[0];
        assert_eq!(brand.label, "Brand");
        assert_eq!(brand.children.len(), 2);
        let samsung = &brand.children[0];
        let labels: Vec<_> = samsung.children.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, ["Grand", "Edge"]);
        assert!(samsung
            .children
            .iter()
            .all(|c| c.node_kind == NodeKind::Subvalue));
        assert!(brand.children[1].children.is_empty());
    }

    #[test]
    fn quantitative_only_schema_gets_bucket_nodes() {
        let mut schema = crate::generator::smartphone_schema();
        schema.retain(|a| a.kind == AttrKind::Quantitative);
        let c = Catalog::new("q", schema.clone(), vec![]).unwrap();
        let tree = build_wheel(&c);
        assert_eq!(tree.root().children.len(), schema.len());
        for (node, attr) in tree.root().children.iter().zip(&schema) {
            assert_eq!(node.children.len(), attr.buckets.len());
            assert!(node.children.iter().all(|c| c.node_kind == NodeKind::Value));
        }
    }

    #[test]
    fn ancestor_displaced_by_descendant() {
        let tree = build_wheel(&brand_schema());
        let s = toggle_select(&tree, &WheelState::default(), "brand/Samsung").unwrap();
        let s = toggle_select(&tree, &s, "brand/Samsung/Edge").unwrap();
        assert_eq!(
            s.selected,
            BTreeSet::from(["brand/Samsung/Edge".to_string()])
        );
        let s = toggle_select(&tree, &s, "brand").unwrap();
        assert_eq!(s.selected, BTreeSet::from(["brand".to_string()]));
    }

    #[test]
    fn toggle_twice_restores() {
        let tree = build_wheel(&brand_schema());
        let s0 = WheelState::default();
        let s1 = toggle_select(&tree, &s0, "brand/Apple").unwrap();
        assert_eq!(toggle_select(&tree, &s1, "brand/Apple").unwrap(), s0);
    }

    #[test]
    fn siblings_coexist() {
        let tree = build_wheel(&brand_schema());
        let s = selection_from_list(&tree, &["brand/Samsung", "brand/Apple"]).unwrap();
        assert_eq!(s.selected.len(), 2);
    }

    #[test]
    fn unknown_node() {
        let tree = build_wheel(&brand_schema());
        assert!(matches!(
            toggle_select(&tree, &WheelState::default(), "brand/Nokia"),
            Err(Error::UnknownNode(_))
        ));
    }

    #[test]
    fn empty_selection_is_empty_spec() {
        let tree = build_wheel(&generate_catalog(1, 10, "t"));
        assert!(selected_filter_spec(&tree, &WheelState::default()).is_empty());
    }

    #[test]
    fn note_or_edge() {
        let c = generate_catalog(1, 100, "t");
        let tree = build_wheel(&c);
        let s = selection_from_list(&tree, &["brand/Samsung/Note", "brand/Samsung/Edge"]).unwrap();
        let spec = selected_filter_spec(&tree, &s);
        let expected = FilterSpec::new()
            .with_values("brand", ["Samsung"])
            .with_values("model_line", ["Note", "Edge"]);
        assert_eq!(spec, expected);
    }

    #[test]
    fn brands_and_ram_bucket() {
        let c = generate_catalog(1, 100, "t");
        let tree = build_wheel(&c);
        let s = selection_from_list(&tree, &["brand/Samsung", "brand/Apple", "ram/6GB"]).unwrap();
        let got = apply_filter(&c, &selected_filter_spec(&tree, &s)).unwrap();
        let expected: Vec<_> = c
            .products()
            .iter()
            .filter(|p| {
                let brand = p.values["brand"].as_label().unwrap();
                let ram = p.values["ram"].as_number().unwrap();
                (brand == "Samsung" || brand == "Apple") && (6.0..8.0).contains(&ram)
            })
            .map(|p| p.id.clone())
            .collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn attribute_node_marks_interest_only() {
        let c = generate_catalog(1, 20, "t");
        let tree = build_wheel(&c);
        let s = selection_from_list(&tree, &["camera", "brand/Apple"]).unwrap();
        let spec = selected_filter_spec(&tree, &s);
        assert_eq!(spec.attributes().collect::<Vec<_>>(), ["brand"]);
        assert_eq!(selected_attributes(&tree, &s), ["brand", "camera"]);
    }

    #[test]
    fn expansion_does_not_filter() {
        let c = generate_catalog(1, 20, "t");
        let tree = build_wheel(&c);
        let s = toggle_expand(&tree, &WheelState::default(), "brand").unwrap();
        assert!(s.expanded.contains("brand"));
        assert!(selected_filter_spec(&tree, &s).is_empty());
    }

    #[test]
    fn value_plus_sibling_subvalue() {
        let c = generate_catalog(1, 100, "t");
        let tree = build_wheel(&c);
        let s = selection_from_list(&tree, &["brand/Samsung/Note", "brand/Apple"]).unwrap();
        let got: BTreeSet<_> = apply_filter(&c, &selected_filter_spec(&tree, &s))
            .unwrap()
            .into_iter()
            .collect();
        let expected: BTreeSet<_> = c
            .products()
            .iter()
            .filter(|p| {
                let b = p.values["brand"].as_label().unwrap();
                let l = p.values["model_line"].as_label().unwrap();
                (b == "Samsung" && l == "Note") || b == "Apple"
            })
            .map(|p| p.id.clone())
            .collect();
        assert_eq!(got, expected);
    }
}
