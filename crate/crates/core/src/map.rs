//! Static campus geography and constraint-aware route planning.
//!
//! The map is immutable after load. Routes are planned here and executed by
//! [`crate::world::WorldState::walk_to`], which re-validates every hop.

use std::borrow::Borrow;
use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::error::{ToolError, ToolResult};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BuildingId(pub String);

impl BuildingId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BuildingId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for BuildingId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for BuildingId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

/// Route cost in thousandths, so equal-cost comparisons are exact.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cost(pub u64);

impl Cost {
    pub const ZERO: Cost = Cost(0);

    pub fn from_decimal(value: f64) -> Option<Cost> {
        if !value.is_finite() || value < 0.0 {
            return None;
        }
        Some(Cost((value * 1000.0).round() as u64))
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 1000.0
    }
}

impl std::ops::Add for Cost {
    type Output = Cost;

    fn add(self, rhs: Cost) -> Cost {
        Cost(self.0 + rhs.0)
    }
}

impl std::ops::AddAssign for Cost {
    fn add_assign(&mut self, rhs: Cost) {
        self.0 += rhs.0;
    }
}

impl std::iter::Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_f64())
    }
}

impl Serialize for Cost {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Cost {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(deserializer)?;
        Cost::from_decimal(v).ok_or_else(|| serde::de::Error::custom(format!("invalid cost {v}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Room {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub room_number: Option<String>,
    #[serde(default)]
    pub attributes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Building {
    pub id: BuildingId,
    pub name: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    pub zone: String,
    pub building_type: String,
    #[serde(default)]
    pub amenities: Vec<String>,
    #[serde(default)]
    pub rooms: Vec<Room>,
}

/// Closed set of route attributes that constraints can target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Shelter,
    Congestion,
    Accessibility,
    Illumination,
    PathType,
}

impl Dimension {
    pub const ALL: [Dimension; 5] = [
        Dimension::Shelter,
        Dimension::Congestion,
        Dimension::Accessibility,
        Dimension::Illumination,
        Dimension::PathType,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Dimension::Shelter => "shelter",
            Dimension::Congestion => "congestion",
            Dimension::Accessibility => "accessibility",
            Dimension::Illumination => "illumination",
            Dimension::PathType => "path_type",
        }
    }

    pub fn parse(name: &str) -> Option<Dimension> {
        let n = name.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        Self::ALL.into_iter().find(|d| d.name() == n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathEdge {
    #[serde(rename = "from")]
    pub from_building: BuildingId,
    #[serde(rename = "to")]
    pub to_building: BuildingId,
    pub base_cost: Cost,
    #[serde(default)]
    pub tags: BTreeMap<Dimension, String>,
}

/// Requested level per route dimension. An edge whose tag differs from the
/// requested level (or lacks the tag) pays that dimension's penalty.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PathConstraints(pub BTreeMap<Dimension, String>);

impl PathConstraints {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, dim: Dimension, level: impl Into<String>) -> Self {
        self.0.insert(dim, level.into());
        self
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathInfo {
    pub path: Vec<BuildingId>,
    pub total_cost: Cost,
    pub penalty_breakdown: BTreeMap<Dimension, Cost>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("duplicate building id {0}")]
    DuplicateBuilding(BuildingId),
    #[error("edges[{index}] references unknown building {id}")]
    UnknownEdgeEndpoint { index: usize, id: BuildingId },
    #[error("edges[{0}] must have a positive base_cost")]
    NonPositiveCost(usize),
    #[error("edges[{0}] is a self loop")]
    SelfLoop(usize),
    #[error("default_start_building {0} is not a known building")]
    UnknownStart(BuildingId),
    #[error("constraint alias `{0}` maps to an empty constraint set")]
    EmptyAlias(String),
}

/// On-disk shape of the map file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDocument {
    pub buildings: Vec<Building>,
    pub edges: Vec<PathEdge>,
    #[serde(default)]
    pub penalty_magnitudes: BTreeMap<Dimension, Cost>,
    pub default_start_building: BuildingId,
    /// Values accepted under the `avoid` constraint key, e.g. `crowds`.
    #[serde(default)]
    pub constraint_aliases: BTreeMap<String, PathConstraints>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapDocument", into = "MapDocument")]
pub struct CampusMap {
    buildings: BTreeMap<BuildingId, Building>,
    edges: Vec<PathEdge>,
    penalty_magnitudes: BTreeMap<Dimension, Cost>,
    default_start_building: BuildingId,
    constraint_aliases: BTreeMap<String, PathConstraints>,
    adjacency: BTreeMap<BuildingId, Vec<usize>>,
    name_index: BTreeMap<String, Vec<BuildingId>>,
}

fn normalize_name(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

impl TryFrom<MapDocument> for CampusMap {
    type Error = MapError;

    fn try_from(doc: MapDocument) -> Result<Self, MapError> {
        let mut buildings = BTreeMap::new();
        for b in doc.buildings {
            if buildings.contains_key(&b.id) {
                return Err(MapError::DuplicateBuilding(b.id));
            }
            buildings.insert(b.id.clone(), b);
        }
        if !buildings.contains_key(&doc.default_start_building) {
            return Err(MapError::UnknownStart(doc.default_start_building));
        }

        let mut adjacency: BTreeMap<BuildingId, Vec<usize>> =
            buildings.keys().map(|k| (k.clone(), Vec::new())).collect();
        for (index, e) in doc.edges.iter().enumerate() {
            for id in [&e.from_building, &e.to_building] {
                if !buildings.contains_key(id) {
                    return Err(MapError::UnknownEdgeEndpoint {
                        index,
                        id: id.clone(),
                    });
                }
            }
            if e.base_cost == Cost::ZERO {
                return Err(MapError::NonPositiveCost(index));
            }
            if e.from_building == e.to_building {
                return Err(MapError::SelfLoop(index));
            }
            adjacency.get_mut(&e.from_building).unwrap().push(index);
            adjacency.get_mut(&e.to_building).unwrap().push(index);
        }

        for (alias, constraints) in &doc.constraint_aliases {
            if constraints.is_empty() {
                return Err(MapError::EmptyAlias(alias.clone()));
            }
        }

        let mut name_index: BTreeMap<String, Vec<BuildingId>> = BTreeMap::new();
        for b in buildings.values() {
            let mut keys: Vec<String> = std::iter::once(&b.name)
                .chain(b.aliases.iter())
                .map(|n| normalize_name(n))
                .collect();
            keys.sort();
            keys.dedup();
            for key in keys {
                name_index.entry(key).or_default().push(b.id.clone());
            }
        }

        Ok(CampusMap {
            buildings,
            edges: doc.edges,
            penalty_magnitudes: doc.penalty_magnitudes,
            default_start_building: doc.default_start_building,
            constraint_aliases: doc
                .constraint_aliases
                .into_iter()
                .map(|(k, v)| (normalize_name(&k), v))
                .collect(),
            adjacency,
            name_index,
        })
    }
}

impl From<CampusMap> for MapDocument {
    fn from(map: CampusMap) -> Self {
        MapDocument {
            buildings: map.buildings.into_values().collect(),
            edges: map.edges,
            penalty_magnitudes: map.penalty_magnitudes,
            default_start_building: map.default_start_building,
            constraint_aliases: map.constraint_aliases,
        }
    }
}

impl CampusMap {
    pub fn from_document(doc: MapDocument) -> Result<Self, MapError> {
        doc.try_into()
    }

    pub fn default_start_building(&self) -> &BuildingId {
        &self.default_start_building
    }

    pub fn contains(&self, id: &str) -> bool {
        self.buildings.contains_key(id)
    }

    pub fn buildings(&self) -> impl Iterator<Item = &Building> {
        self.buildings.values()
    }

    pub fn edges(&self) -> &[PathEdge] {
        &self.edges
    }

    pub fn penalty_magnitude(&self, dim: Dimension) -> Cost {
        self.penalty_magnitudes.get(&dim).copied().unwrap_or(Cost::ZERO)
    }

    pub fn get_building_details(&self, id: &str) -> ToolResult<&Building> {
        self.buildings
            .get(id)
            .ok_or_else(|| ToolError::NotFound(format!("no building with id `{id}`")))
    }

    /// Exact lookup after case folding and whitespace collapse. An id is
    /// accepted as its own name.
    pub fn find_building_id(&self, name: &str) -> ToolResult<BuildingId> {
        let trimmed = name.trim();
        if let Some(id) = self
            .buildings
            .keys()
            .find(|id| id.as_str().eq_ignore_ascii_case(trimmed))
        {
            return Ok(id.clone());
        }
        match self.name_index.get(&normalize_name(trimmed)).map(Vec::as_slice) {
            Some([only]) => Ok(only.clone()),
            Some(many) if !many.is_empty() => {
                let ids: Vec<&str> = many.iter().map(BuildingId::as_str).collect();
                Err(ToolError::Ambiguous(format!(
                    "`{trimmed}` matches several buildings: {}",
                    ids.join(", ")
                )))
            }
            _ => Err(ToolError::NotFound(format!("no building named `{trimmed}`"))),
        }
    }

    /// Rooms whose name or number matches `query`, optionally restricted to
    /// one building. Results come in building-id order.
    pub fn find_room_location(
        &self,
        query: &str,
        building: Option<&str>,
    ) -> ToolResult<Vec<(&Building, &Room)>> {
        if let Some(b) = building {
            self.get_building_details(b)?;
        }
        let q = normalize_name(query);
        let hits: Vec<(&Building, &Room)> = self
            .buildings
            .values()
            .filter(|b| building.is_none_or(|id| b.id.as_str() == id))
            .flat_map(|b| b.rooms.iter().map(move |r| (b, r)))
            .filter(|(_, r)| {
                normalize_name(&r.name) == q
                    || r.room_number.as_deref().map(normalize_name).as_deref() == Some(q.as_str())
            })
            .collect();
        if hits.is_empty() {
            return Err(ToolError::NotFound(match building {
                Some(b) => format!("no room matching `{query}` in {b}"),
                None => format!("no room matching `{query}`"),
            }));
        }
        Ok(hits)
    }

    /// Buildings matching every supplied filter, in id order.
    pub fn query_buildings_by_property(
        &self,
        zone: Option<&str>,
        building_type: Option<&str>,
        amenity: Option<&str>,
    ) -> ToolResult<Vec<&Building>> {
        if zone.is_none() && building_type.is_none() && amenity.is_none() {
            return Err(ToolError::Usage(
                "provide at least one of zone, building_type or amenity".into(),
            ));
        }
        let eq = |a: &str, b: &str| normalize_name(a) == normalize_name(b);
        Ok(self
            .buildings
            .values()
            .filter(|b| zone.is_none_or(|z| eq(&b.zone, z)))
            .filter(|b| building_type.is_none_or(|t| eq(&b.building_type, t)))
            .filter(|b| amenity.is_none_or(|a| b.amenities.iter().any(|x| eq(x, a))))
            .collect())
    }

    /// Translates raw constraint pairs (dimension names or `avoid` aliases).
    pub fn resolve_constraints<'a, I>(&self, raw: I) -> ToolResult<PathConstraints>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut out = PathConstraints::new();
        for (key, value) in raw {
            if key.trim().eq_ignore_ascii_case("avoid") {
                let alias = self.constraint_aliases.get(&normalize_name(value)).ok_or_else(|| {
                    let known: Vec<&str> = self.constraint_aliases.keys().map(String::as_str).collect();
                    ToolError::Usage(format!(
                        "unknown avoid target `{value}` (known: {})",
                        known.join(", ")
                    ))
                })?;
                out.0.extend(alias.0.iter().map(|(d, l)| (*d, l.clone())));
            } else {
                let dim = Dimension::parse(key).ok_or_else(|| {
                    ToolError::Usage(format!(
                        "unknown constraint `{key}` (expected one of shelter, congestion, accessibility, illumination, path_type, avoid)"
                    ))
                })?;
                out.0.insert(dim, value.trim().to_string());
            }
        }
        Ok(out)
    }

    fn edge_penalties(&self, edge: &PathEdge, constraints: &PathConstraints) -> BTreeMap<Dimension, Cost> {
        constraints
            .0
            .iter()
            .filter(|(dim, level)| {
                edge.tags
                    .get(dim)
                    .is_none_or(|tag| !tag.eq_ignore_ascii_case(level))
            })
            .map(|(dim, _)| (*dim, self.penalty_magnitude(*dim)))
            .collect()
    }

    /// Cost of traversing one edge under `constraints`.
    pub fn edge_cost(&self, edge: &PathEdge, constraints: &PathConstraints) -> Cost {
        edge.base_cost + self.edge_penalties(edge, constraints).into_values().sum()
    }

    /// Cheapest edge joining `a` and `b`, if adjacent.
    fn best_edge(&self, a: &str, b: &str, constraints: &PathConstraints) -> Option<&PathEdge> {
        self.adjacency
            .get(a)?
            .iter()
            .map(|&i| &self.edges[i])
            .filter(|e| {
                (e.from_building.as_str() == a && e.to_building.as_str() == b)
                    || (e.from_building.as_str() == b && e.to_building.as_str() == a)
            })
            .min_by_key(|e| self.edge_cost(e, constraints))
    }

    pub fn are_adjacent(&self, a: &str, b: &str) -> bool {
        self.best_edge(a, b, &PathConstraints::new()).is_some()
    }

    /// Prices an explicit route. Fails if consecutive entries are not adjacent.
    pub fn price_path(&self, path: &[BuildingId], constraints: &PathConstraints) -> ToolResult<PathInfo> {
        let mut total = Cost::ZERO;
        let mut breakdown: BTreeMap<Dimension, Cost> = BTreeMap::new();
        for id in path {
            self.get_building_details(id.as_str())?;
        }
        for hop in path.windows(2) {
            let edge = self
                .best_edge(hop[0].as_str(), hop[1].as_str(), constraints)
                .ok_or_else(|| ToolError::InvalidPath(format!("{} and {} are not connected", hop[0], hop[1])))?;
            total += edge.base_cost;
            for (dim, p) in self.edge_penalties(edge, constraints) {
                total += p;
                *breakdown.entry(dim).or_default() += p;
            }
        }
        Ok(PathInfo {
            path: path.to_vec(),
            total_cost: total,
            penalty_breakdown: breakdown,
        })
    }

    /// Dijkstra over `(cost, id sequence)` labels: minimum total cost, ties
    /// broken by the lexicographically smallest building-id sequence.
    pub fn find_optimal_path(
        &self,
        source: &str,
        target: &str,
        constraints: &PathConstraints,
    ) -> ToolResult<PathInfo> {
        let source = self.get_building_details(source)?.id.clone();
        let target = self.get_building_details(target)?.id.clone();

        let mut best: BTreeMap<BuildingId, (Cost, Vec<BuildingId>)> = BTreeMap::new();
        let mut frontier = BinaryHeap::new();
        best.insert(source.clone(), (Cost::ZERO, vec![source.clone()]));
        frontier.push(Reverse((Cost::ZERO, vec![source.clone()])));

        while let Some(Reverse((cost, path))) = frontier.pop() {
            let node = path.last().expect("labels are never empty").clone();
            if best.get(&node).is_some_and(|b| (b.0, &b.1) < (cost, &path)) {
                continue;
            }
            if node == target {
                return self.price_path(&path, constraints);
            }
            for &ei in &self.adjacency[&node] {
                let edge = &self.edges[ei];
                let next = if edge.from_building == node {
                    &edge.to_building
                } else {
                    &edge.from_building
                };
                if path.contains(next) {
                    continue;
                }
                let next_cost = cost + self.edge_cost(edge, constraints);
                let mut next_path = path.clone();
                next_path.push(next.clone());
                let improves = best
                    .get(next)
                    .is_none_or(|b| (next_cost, &next_path) < (b.0, &b.1));
                if improves {
                    best.insert(next.clone(), (next_cost, next_path.clone()));
                    frontier.push(Reverse((next_cost, next_path)));
                }
            }
        }
        Err(ToolError::NoPath(format!("{source} is not connected to {target}")))
    }

    /// Checks that `path` is a walkable route starting at `current`.
    pub fn validate_walk(&self, current: &BuildingId, path: &[BuildingId]) -> ToolResult<()> {
        let first = path
            .first()
            .ok_or_else(|| ToolError::InvalidPath("path is empty".into()))?;
        for id in path {
            self.get_building_details(id.as_str())?;
        }
        if first != current {
            return Err(ToolError::Precondition(format!(
                "path starts at {first} but you are currently at {current}"
            )));
        }
        for hop in path.windows(2) {
            if !self.are_adjacent(hop[0].as_str(), hop[1].as_str()) {
                return Err(ToolError::InvalidPath(format!(
                    "{} and {} are not directly connected",
                    hop[0], hop[1]
                )));
            }
        }
        Ok(())
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn ids(p: &PathInfo) -> Vec<&str> {
        p.path.iter().map(BuildingId::as_str).collect()
    }

    #[test]
    fn finds_ids_by_name_alias_and_id() {
        let map = small_map();
        assert_eq!(map.find_building_id("Grand Central Library").unwrap().as_str(), "B001");
        assert_eq!(map.find_building_id("  main   LIBRARY ").unwrap().as_str(), "B001");
        assert_eq!(map.find_building_id("B001").unwrap().as_str(), "B001");
        assert!(matches!(map.find_building_id("Atlantis Dome"), Err(ToolError::NotFound(_))));
        // no fuzzy matching
        assert!(map.find_building_id("Grand Central Librar").is_err());
    }

    #[test]
    fn ambiguous_alias_lists_candidates() {
        let mut a = building("B002", "North Cafe");
        a.aliases = vec!["The Cafe".into()];
        let mut b = building("B003", "South Cafe");
        b.aliases = vec!["the cafe".into()];
        let map = CampusMap::from_document(MapDocument {
            buildings: vec![a, b],
            edges: vec![],
            penalty_magnitudes: BTreeMap::new(),
            default_start_building: "B002".into(),
            constraint_aliases: BTreeMap::new(),
        })
        .unwrap();
        match map.find_building_id("The Cafe") {
            Err(ToolError::Ambiguous(msg)) => assert!(msg.contains("B002") && msg.contains("B003")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn two_node_graph() {
        let map = CampusMap::from_document(MapDocument {
            buildings: vec![building("A", "a"), building("B", "b")],
            edges: vec![edge("A", "B", 1.0, &[])],
            penalty_magnitudes: BTreeMap::new(),
            default_start_building: "A".into(),
            constraint_aliases: BTreeMap::new(),
        })
        .unwrap();
        let p = map.find_optimal_path("A", "B", &PathConstraints::new()).unwrap();
        assert_eq!(ids(&p), ["A", "B"]);
        assert_eq!(p.total_cost, Cost(1000));
    }

    #[test]
    fn identity_path_costs_nothing() {
        let map = small_map();
        let p = map.find_optimal_path("B001", "B001", &PathConstraints::new()).unwrap();
        assert_eq!(ids(&p), ["B001"]);
        assert_eq!(p.total_cost, Cost::ZERO);
    }

    #[test]
    fn unknown_and_disconnected() {
        let map = small_map();
        assert!(matches!(
            map.find_optimal_path("B404", "B001", &PathConstraints::new()),
            Err(ToolError::NotFound(_))
        ));
        assert!(matches!(
            map.find_optimal_path("B083", "B099", &PathConstraints::new()),
            Err(ToolError::NoPath(_))
        ));
    }

    #[test]
    fn constraints_reroute_through_sheltered_edges() {
        let map = small_map();
        let plain = map.find_optimal_path("B083", "B001", &PathConstraints::new()).unwrap();
        assert_eq!(ids(&plain), ["B083", "B001"]);
        assert_eq!(plain.total_cost, Cost(4000));

        let avoid = map.resolve_constraints([("avoid", "crowds")]).unwrap();
        let routed = map.find_optimal_path("B083", "B001", &avoid).unwrap();
        assert_eq!(ids(&routed), ["B083", "B014", "B001"]);
        assert_eq!(routed.total_cost, Cost(4500));
        assert!(routed.penalty_breakdown.is_empty());

        // the direct edge carries a congestion penalty under the same constraint
        let direct = map.price_path(&plain.path, &avoid).unwrap();
        assert_eq!(direct.total_cost, Cost(9000));
        assert_eq!(direct.penalty_breakdown[&Dimension::Congestion], Cost(5000));
    }

    #[test]
    fn equal_costs_pick_smallest_id_sequence() {
        let map = CampusMap::from_document(MapDocument {
            buildings: ["S", "M", "K", "T"].iter().map(|i| building(i, i)).collect(),
            edges: vec![
                edge("S", "M", 1.0, &[]),
                edge("M", "T", 1.0, &[]),
                edge("S", "K", 1.0, &[]),
                edge("K", "T", 1.0, &[]),
            ],
            penalty_magnitudes: BTreeMap::new(),
            default_start_building: "S".into(),
            constraint_aliases: BTreeMap::new(),
        })
        .unwrap();
        let p = map.find_optimal_path("S", "T", &PathConstraints::new()).unwrap();
        assert_eq!(ids(&p), ["S", "K", "T"]);
    }

    #[test]
    fn unknown_constraint_key_is_usage_error() {
        let map = small_map();
        assert!(matches!(map.resolve_constraints([("weather", "dry")]), Err(ToolError::Usage(_))));
        assert!(matches!(map.resolve_constraints([("avoid", "ghosts")]), Err(ToolError::Usage(_))));
        let c = map.resolve_constraints([("Path Type", "Paved")]).unwrap();
        assert_eq!(c.0[&Dimension::PathType], "Paved");
    }

    #[test]
    fn property_queries() {
        let map = small_map();
        let coffee: Vec<&str> = map
            .query_buildings_by_property(None, None, Some("Coffee Shop"))
            .unwrap()
            .iter()
            .map(|b| b.id.as_str())
            .collect();
        assert_eq!(coffee, ["B001", "B014"]);
        assert!(matches!(map.query_buildings_by_property(None, None, None), Err(ToolError::Usage(_))));
        let res = map.query_buildings_by_property(Some("residential"), None, None).unwrap();
        assert_eq!(res.len(), 1);
    }

    #[test]
    fn room_lookup_scoped_to_building() {
        let map = small_map();
        let hits = map.find_room_location("Seminar Room 101", Some("B014")).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].0.id.as_str(), "B014");
        assert_eq!(hits[0].1.name, "Seminar Room 101");
        assert_eq!(map.find_room_location("101", None).unwrap().len(), 1);
        assert!(map.find_room_location("Seminar Room 101", Some("B001")).is_err());
    }

    #[test]
    fn walk_validation() {
        let map = small_map();
        let at = BuildingId::new("B083");
        assert!(map.validate_walk(&at, &["B083".into(), "B001".into()]).is_ok());
        assert!(matches!(
            map.validate_walk(&"B001".into(), &["B083".into(), "B001".into()]),
            Err(ToolError::Precondition(msg)) if msg.contains("B083") && msg.contains("B001")
        ));
        assert!(matches!(
            map.validate_walk(&at, &["B083".into(), "B099".into()]),
            Err(ToolError::InvalidPath(_))
        ));
    }

    #[test]
    fn rejects_bad_documents() {
        let doc = MapDocument {
            buildings: vec![building("A", "a")],
            edges: vec![edge("A", "Z", 1.0, &[])],
            penalty_magnitudes: BTreeMap::new(),
            default_start_building: "A".into(),
            constraint_aliases: BTreeMap::new(),
        };
        assert!(matches!(CampusMap::from_document(doc), Err(MapError::UnknownEdgeEndpoint { .. })));
    }

    #[test]
    fn serde_round_trip() {
        let map = small_map();
        let json = serde_json::to_string(&map).unwrap();
        let back: CampusMap = serde_json::from_str(&json).unwrap();
        assert_eq!(back, map);
    }
}
