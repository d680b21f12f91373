//! Seeded synthetic smartphone catalog.
//!
//! Output is a pure function of `(seed, count, variant)`. Prices are distinct
//! within a catalog so that lowest-price objectives have a unique optimum.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::{
    AttrKind, AttributeDef, Bucket, Catalog, Direction, Product, SubGroup, SubGrouping, Value,
};

const BRAND_LINES: &[(&str, &[&str])] = &[
    ("Samsung", &["Grand", "Edge", "Note", "Galaxy J"]),
    ("Apple", &["iPhone", "iPhone Plus"]),
    ("Huawei", &["P Series", "Mate"]),
    ("Xiaomi", &["Redmi", "Redmi Note", "Mi"]),
    ("Nokia", &["Nokia X", "Nokia G"]),
];

const RAM_GB: &[f64] = &[2.0, 3.0, 4.0, 6.0, 8.0];
const CAMERA_MP: &[f64] = &[8.0, 12.0, 13.0, 16.0, 20.0, 24.0, 48.0];
const STORAGE: &[&str] = &["16GB", "32GB", "64GB", "128GB", "256GB"];
const SIM: &[&str] = &["Single SIM", "Dual SIM"];

fn bucket(label: &str, lo: Option<f64>, hi: Option<f64>) -> Bucket {
    Bucket {
        label: label.into(),
        lo,
        hi,
    }
}

fn labels(xs: &[&str]) -> Option<Vec<String>> {
    Some(xs.iter().map(|s| s.to_string()).collect())
}

fn attr(id: &str, name: &str, kind: AttrKind, group: &str) -> AttributeDef {
    AttributeDef {
        id: id.into(),
        display_name: name.into(),
        kind,
        unit: None,
        allowed_values: None,
        direction: Direction::Neutral,
        group: Some(group.into()),
        buckets: vec![],
        subgroups: None,
    }
}

/// The ten-attribute smartphone schema shared by every bundled variant.
pub fn smartphone_schema() -> Vec<AttributeDef> {
    let brands: Vec<&str> = BRAND_LINES.iter().map(|(b, _)| *b).collect();
    let lines: Vec<&str> = BRAND_LINES
        .iter()
        .flat_map(|(_, l)| l.iter().copied())
        .collect();
    let general = "General Features";
    let platform = "Platform & Performance";

    let mut brand = attr("brand", "Brand", AttrKind::Categorical, general);
    brand.allowed_values = labels(&brands);
    brand.subgroups = Some(SubGrouping {
        attribute: "model_line".into(),
        groups: BRAND_LINES
            .iter()
            .map(|(b, ls)| SubGroup {
                value: b.to_string(),
                subvalues: ls.iter().map(|s| s.to_string()).collect(),
            })
            .collect(),
    });

    let mut model_line = attr("model_line", "Model Line", AttrKind::Categorical, general);
    model_line.allowed_values = labels(&lines);

    let mut os = attr("os", "Operating System", AttrKind::Categorical, platform);
    os.allowed_values = labels(&["Android", "iOS"]);

    let mut ram = attr("ram", "RAM", AttrKind::Quantitative, platform);
    ram.unit = Some("GB".into());
    ram.direction = Direction::HigherBetter;
    ram.buckets = vec![
        bucket("2GB", None, Some(3.0)),
        bucket("3GB", Some(3.0), Some(4.0)),
        bucket("4GB", Some(4.0), Some(6.0)),
        bucket("6GB", Some(6.0), Some(8.0)),
        bucket("8GB", Some(8.0), None),
    ];

    let mut camera = attr("camera", "Camera", AttrKind::Quantitative, "Camera");
    camera.unit = Some("MP".into());
    camera.direction = Direction::HigherBetter;
    camera.buckets = vec![
        bucket("up to 12MP", None, Some(13.0)),
        bucket("13-16MP", Some(13.0), Some(17.0)),
        bucket("20MP+", Some(17.0), None),
    ];

    let mut battery = attr(
        "battery",
        "Battery Capacity",
        AttrKind::Quantitative,
        general,
    );
    battery.unit = Some("mAh".into());
    battery.direction = Direction::HigherBetter;
    battery.buckets = vec![
        bucket("under 2000mAh", None, Some(2000.0)),
        bucket("2000-2999mAh", Some(2000.0), Some(3000.0)),
        bucket("3000-3999mAh", Some(3000.0), Some(4000.0)),
        bucket("4000mAh+", Some(4000.0), None),
    ];

    let mut price = attr("price", "Price", AttrKind::Quantitative, general);
    price.unit = Some("USD".into());
    price.direction = Direction::LowerBetter;
    price.buckets = vec![
        bucket("under $200", None, Some(200.0)),
        bucket("$200-499", Some(200.0), Some(500.0)),
        bucket("$500-799", Some(500.0), Some(800.0)),
        bucket("$800+", Some(800.0), None),
    ];

    let mut screen = attr(
        "screen_size",
        "Screen Size",
        AttrKind::Quantitative,
        "Display",
    );
    screen.unit = Some("in".into());
    screen.buckets = vec![
        bucket("under 5.5in", None, Some(5.5)),
        bucket("5.5-6.1in", Some(5.5), Some(6.2)),
        bucket("6.2in+", Some(6.2), None),
    ];

    let mut storage = attr("storage", "Storage", AttrKind::Ordinal, platform);
    storage.allowed_values = labels(STORAGE);
    storage.direction = Direction::HigherBetter;

    let mut sim = attr("sim_type", "SIM Type", AttrKind::Categorical, general);
    sim.allowed_values = labels(SIM);

    vec![
        brand, model_line, os, ram, camera, battery, price, screen, storage, sim,
    ]
}

fn variant_suffix(variant: &str) -> String {
    let tail = variant.rsplit('-').next().unwrap_or(variant);
    tail.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_uppercase()
}

/// Deterministically generate `count` smartphones for `variant`.
pub fn generate_catalog(seed: u64, count: usize, variant: &str) -> Catalog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let suffix = variant_suffix(variant);
    let mut prices = HashSet::new();
    let mut products = Vec::with_capacity(count);

    for i in 0..count {
        let (brand, lines) = BRAND_LINES[rng.gen_range(0..BRAND_LINES.len())];
        let line = *lines.choose(&mut rng).expect("lines non-empty");
        let ram = RAM_GB[rng.gen_range(0..RAM_GB.len())];
        let camera = CAMERA_MP[rng.gen_range(0..CAMERA_MP.len())];
        let battery = f64::from(rng.gen_range(15..=50u32) * 100);
        let storage_idx = rng.gen_range(0..STORAGE.len());
        let screen = f64::from(rng.gen_range(47..=69u32)) / 10.0;
        let sim = SIM[rng.gen_range(0..SIM.len())];

        let premium = if brand == "Apple" { 250.0 } else { 0.0 };
        let base = 60.0 + ram * 45.0 + camera * 6.0 + storage_idx as f64 * 40.0 + premium;
        let mut price = (base + rng.gen_range(-60.0..60.0f64)).round().max(79.0) as i64;
        while !prices.insert(price) {
            price += 1;
        }

        let mut values = BTreeMap::new();
        values.insert("brand".to_string(), Value::Label(brand.into()));
        values.insert("model_line".to_string(), Value::Label(line.into()));
        let os = if brand == "Apple" { "iOS" } else { "Android" };
        values.insert("os".to_string(), Value::Label(os.into()));
        values.insert("ram".to_string(), Value::Number(ram));
        values.insert("camera".to_string(), Value::Number(camera));
        values.insert("battery".to_string(), Value::Number(battery));
        values.insert("price".to_string(), Value::Number(price as f64));
        // Real listings are sparse; a few products omit display or storage data.
        if rng.gen_bool(0.95) {
            values.insert("screen_size".to_string(), Value::Number(screen));
        }
        if rng.gen_bool(0.95) {
            values.insert(
                "storage".to_string(),
                Value::Label(STORAGE[storage_idx].into()),
            );
        }
        values.insert("sim_type".to_string(), Value::Label(sim.into()));

        let id = format!("{variant}-{:03}", i + 1);
        products.push(Product {
            name: format!("{brand} {line} {}{suffix}", i + 1),
            image_refs: vec![
                format!("images/{id}.png"),
                format!("icons/{}.svg", brand.to_lowercase()),
            ],
            id,
            values,
        });
    }

    Catalog::new(variant, smartphone_schema(), products).expect("generator emits valid catalogs")
}
