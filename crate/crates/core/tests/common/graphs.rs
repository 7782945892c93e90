//! Seeded random campus graphs for path-search checks.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use stulife_core::map::{Building, BuildingId, CampusMap, Cost, Dimension, MapDocument, PathEdge};

pub const DIMS: [Dimension; 5] = [
    Dimension::Shelter,
    Dimension::Congestion,
    Dimension::Accessibility,
    Dimension::Illumination,
    Dimension::PathType,
];
pub const LEVELS: [&str; 3] = ["Low", "Medium", "High"];

pub struct RandomGraph {
    pub map: CampusMap,
    pub edges: Vec<(usize, usize, u64, BTreeMap<Dimension, String>)>,
    pub penalties: BTreeMap<Dimension, u64>,
    pub n: usize,
}

pub fn node(i: usize) -> String {
    format!("N{i}")
}

pub fn random_graph(rng: &mut ChaCha8Rng) -> RandomGraph {
    let n = rng.random_range(2..=8usize);
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    pairs.shuffle(rng);
    let m = rng.random_range(1..=pairs.len().min(12));
    let dims: Vec<Dimension> = {
        let mut d = DIMS.to_vec();
        d.shuffle(rng);
        d.truncate(rng.random_range(0..=3));
        d
    };
    let penalties: BTreeMap<Dimension, u64> = dims.iter().map(|d| (*d, rng.random_range(1..=4u64) * 1000)).collect();
    let edges: Vec<_> = pairs[..m]
        .iter()
        .map(|&(a, b)| {
            let (a, b) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
            let mut tags = BTreeMap::new();
            for d in &dims {
                if rng.random_bool(0.8) {
                    tags.insert(*d, LEVELS[rng.random_range(0..LEVELS.len())].to_string());
                }
            }
            (a, b, rng.random_range(1..=5u64) * 1000, tags)
        })
        .collect();
    let doc = MapDocument {
        buildings: (0..n)
            .map(|i| Building {
                id: BuildingId::new(node(i)),
                name: format!("Node {i}"),
                aliases: vec![],
                zone: "Z".into(),
                building_type: "T".into(),
                amenities: vec![],
                rooms: vec![],
            })
            .collect(),
        edges: edges
            .iter()
            .map(|(a, b, c, tags)| PathEdge {
                from_building: BuildingId::new(node(*a)),
                to_building: BuildingId::new(node(*b)),
                base_cost: Cost(*c),
                tags: tags.clone(),
            })
            .collect(),
        penalty_magnitudes: penalties.iter().map(|(d, c)| (*d, Cost(*c))).collect(),
        default_start_building: BuildingId::new(node(0)),
        constraint_aliases: BTreeMap::new(),
    };
    RandomGraph {
        map: CampusMap::from_document(doc).expect("generated map is valid"),
        edges,
        penalties,
        n,
    }
}

