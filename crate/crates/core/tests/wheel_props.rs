mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use shortlist_core::bundled;
use shortlist_core::wheel::{
    selected_filter_spec, toggle_expand, toggle_select, NodeKind, ROOT_ID,
};
use shortlist_core::{apply_filter, build_wheel, Catalog, Value, WheelState, WheelTree};

fn fixture() -> (Catalog, WheelTree, Vec<String>) {
    let catalog = bundled::baseline_catalog();
    let tree = build_wheel(&catalog);
    let mut nodes: Vec<String> = tree
        .node_ids()
        .filter(|n| *n != ROOT_ID)
        .map(str::to_string)
        .collect();
    nodes.sort();
    (catalog, tree, nodes)
}

fn is_ancestor(a: &str, b: &str) -> bool {
    b.len() > a.len() && b.starts_with(a) && b.as_bytes()[a.len()] == b'/'
}

fn run(tree: &WheelTree, nodes: &[String], picks: &[usize]) -> WheelState {
    picks.iter().fold(WheelState::default(), |s, &i| {
        toggle_select(tree, &s, &nodes[i % nodes.len()]).unwrap()
    })
}

fn filtered(catalog: &Catalog, tree: &WheelTree, s: &WheelState) -> BTreeSet<String> {
    apply_filter(catalog, &selected_filter_spec(tree, s))
        .unwrap()
        .into_iter()
        .collect()
}

/// Does the product fall under a value node (`attr/label`)?
fn under_value(catalog: &Catalog, p: &shortlist_core::Product, attr: &str, label: &str) -> bool {
    let def = catalog.attribute(attr).unwrap();
    match p.values.get(attr) {
        Some(Value::Label(l)) => l == label,
        Some(Value::Number(n)) => def.buckets.iter().any(|b| {
            b.label == label && b.lo.map_or(true, |lo| *n >= lo) && b.hi.map_or(true, |hi| *n < hi)
        }),
        None => false,
    }
}

/// Selection semantics from first principles, restricted to selections that
/// never mix a value and a subvalue node of the same attribute.
fn oracle(catalog: &Catalog, s: &WheelState) -> Option<BTreeSet<String>> {
    let mut by_attr: std::collections::BTreeMap<&str, Vec<Vec<&str>>> = Default::default();
    for id in &s.selected {
        let parts: Vec<&str> = id.split('/').collect();
        by_attr
            .entry(parts[0])
            .or_default()
            .push(parts[1..].to_vec());
    }
    let mut keep: BTreeSet<String> = catalog.all_ids().into_iter().collect();
    for (attr, picks) in by_attr {
        if picks.iter().any(|p| p.is_empty()) {
            continue;
        }
        let depths: BTreeSet<usize> = picks.iter().map(Vec::len).collect();
        if depths.len() > 1 {
            return None;
        }
        keep.retain(|id| {
            let p = catalog.product(id).unwrap();
            picks.iter().any(|pick| match pick.as_slice() {
                [v] => under_value(catalog, p, attr, v),
                [v, sub] => {
                    let nested = &catalog
                        .attribute(attr)
                        .unwrap()
                        .subgroups
                        .as_ref()
                        .unwrap()
                        .attribute;
                    under_value(catalog, p, attr, v)
                        && p.values.get(nested) == Some(&Value::Label(sub.to_string()))
                }
                _ => unreachable!(),
            })
        });
    }
    Some(keep)
}

#[test]
fn node_count_matches_schema() {
    let (catalog, tree, _) = fixture();
    let nested: BTreeSet<&str> = catalog
        .schema()
        .iter()
        .filter_map(|a| a.subgroups.as_ref().map(|s| s.attribute.as_str()))
        .collect();
    let mut want = 1;
    for a in catalog
        .schema()
        .iter()
        .filter(|a| !nested.contains(a.id.as_str()))
    {
        want += 1;
        want += if a.buckets.is_empty() {
            a.labels().len()
        } else {
            a.buckets.len()
        };
        if let Some(sub) = &a.subgroups {
            want += sub.groups.iter().map(|g| g.subvalues.len()).sum::<usize>();
        }
    }
    assert_eq!(tree.root().count(), want);
    assert_eq!(
        tree.node_ids().count(),
        want - 1 + usize::from(tree.contains(ROOT_ID))
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn selections_hold_one_granularity_per_path(picks in prop::collection::vec(0usize..500, 0..25)) {
        let (_, tree, nodes) = fixture();
        let s = run(&tree, &nodes, &picks);
        for a in &s.selected {
            for b in &s.selected {
                prop_assert!(!is_ancestor(a, b), "{a} and {b} both selected");
            }
        }
    }

    #[test]
    fn filter_matches_selection_semantics(picks in prop::collection::vec(0usize..500, 0..8)) {
        let (catalog, tree, nodes) = fixture();
        let s = run(&tree, &nodes, &picks);
        if let Some(want) = oracle(&catalog, &s) {
            prop_assert_eq!(filtered(&catalog, &tree, &s), want);
        }
    }

    #[test]
    fn finer_node_narrows(picks in prop::collection::vec(0usize..500, 0..6), which in 0usize..500) {
        let (catalog, tree, nodes) = fixture();
        let s = run(&tree, &nodes, &picks);
        let node = &nodes[which % nodes.len()];
        let children: Vec<&String> = nodes.iter().filter(|n| is_ancestor(node, n) && !n[node.len() + 1..].contains('/')).collect();
        prop_assume!(!children.is_empty());
        // Put the coarse node on its path, then replace it by one child.
        let mut coarse = s.clone();
        coarse.selected.retain(|x| !is_ancestor(x, node) && !is_ancestor(node, x) && x != node);
        coarse.selected.insert(node.clone());
        let fine = toggle_select(&tree, &coarse, children[which % children.len()]).unwrap();
        prop_assert!(filtered(&catalog, &tree, &fine).is_subset(&filtered(&catalog, &tree, &coarse)));
    }

    #[test]
    fn sibling_widens_and_other_attribute_narrows(picks in prop::collection::vec(0usize..500, 0..6), which in 0usize..500) {
        let (catalog, tree, nodes) = fixture();
        let s = run(&tree, &nodes, &picks);
        let node = &nodes[which % nodes.len()];
        prop_assume!(tree.kind(node) == Some(NodeKind::Value) && !s.selected.contains(node));
        let attr = node.split('/').next().unwrap();
        let touched = s.selected.iter().any(|x| x.split('/').next() == Some(attr));
        let blocked = s.selected.iter().any(|x| is_ancestor(x, node) || is_ancestor(node, x));
        prop_assume!(!blocked);
        let same_attr_values_only = s
            .selected
            .iter()
            .filter(|x| x.split('/').next() == Some(attr))
            .all(|x| tree.kind(x) == Some(NodeKind::Value));
        let next = toggle_select(&tree, &s, node).unwrap();
        let before = filtered(&catalog, &tree, &s);
        let after = filtered(&catalog, &tree, &next);
        if !touched {
            prop_assert!(after.is_subset(&before));
        } else if same_attr_values_only {
            prop_assert!(before.is_subset(&after));
        }
    }

    #[test]
    fn double_toggle_only_removes(picks in prop::collection::vec(0usize..500, 0..10), which in 0usize..500) {
        let (_, tree, nodes) = fixture();
        let s = run(&tree, &nodes, &picks);
        let node = &nodes[which % nodes.len()];
        let twice = toggle_select(&tree, &toggle_select(&tree, &s, node).unwrap(), node).unwrap();
        prop_assert!(twice.selected.is_subset(&s.selected) || s.selected.contains(node));
        let displaced = s.selected.iter().any(|x| is_ancestor(x, node) || is_ancestor(node, x));
        if !displaced {
            prop_assert_eq!(twice.selected, s.selected);
        }
    }

    #[test]
    fn expansion_never_filters(picks in prop::collection::vec(0usize..500, 0..6), expand in prop::collection::vec(0usize..500, 0..6)) {
        let (catalog, tree, nodes) = fixture();
        let s = run(&tree, &nodes, &picks);
        let e = expand.iter().fold(s.clone(), |st, &i| toggle_expand(&tree, &st, &nodes[i % nodes.len()]).unwrap());
        prop_assert_eq!(&e.selected, &s.selected);
        prop_assert_eq!(filtered(&catalog, &tree, &e), filtered(&catalog, &tree, &s));
    }
}
