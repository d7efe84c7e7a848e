//! Data-flow path analysis over an instance graph.
//!
//! Paths follow directed flow instances only; semantic relations are never
//! traversed. A person is a data subject rather than a relay: paths may
//! start or end at a [`EntityType::Person`] but do not pass through one,
//! since a person's outgoing flows carry data about that person. Set
//! [`PathOptions::relay_through_persons`] to lift that restriction.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::error::AnalysisError;
use crate::graph::{FlowInstance, InstanceGraph};
use crate::schema::EntityType;

pub const DEFAULT_MAX_LEN: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PathMode {
    /// Head-to-tail chains of flows.
    #[default]
    Strict,
    /// Chains linked either head-to-tail or by package derivation.
    Lineage,
}

impl std::str::FromStr for PathMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(PathMode::Strict),
            "lineage" => Ok(PathMode::Lineage),
            other => Err(format!(
                "unknown path mode `{other}` (expected strict or lineage)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathOptions {
    pub max_len: usize,
    pub mode: PathMode,
    pub relay_through_persons: bool,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions {
            max_len: DEFAULT_MAX_LEN,
            mode: PathMode::Strict,
            relay_through_persons: false,
        }
    }
}

impl PathOptions {
    pub fn max_len(mut self, max_len: usize) -> Self {
        self.max_len = max_len;
        self
    }

    pub fn mode(mut self, mode: PathMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn relay_through_persons(mut self, relay: bool) -> Self {
        self.relay_through_persons = relay;
        self
    }
}

/// A simple chain of flows: `nodes[k] -> nodes[k + 1]` via `flows[k]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Path {
    pub flows: Vec<String>,
    pub nodes: Vec<String>,
}

impl Path {
    pub fn len(&self) -> usize {
        self.flows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }
}

/// A flow sequence where each step either continues from the previous
/// flow's target or carries a package derived from the previous package.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LineageTrace {
    pub flows: Vec<String>,
    pub packages: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathList {
    Strict(Vec<Path>),
    Lineage(Vec<LineageTrace>),
}

impl PathList {
    pub fn len(&self) -> usize {
        match self {
            PathList::Strict(p) => p.len(),
            PathList::Lineage(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flow id sequences, in result order.
    pub fn flow_sequences(&self) -> Vec<Vec<String>> {
        match self {
            PathList::Strict(p) => p.iter().map(|p| p.flows.clone()).collect(),
            PathList::Lineage(t) => t.iter().map(|t| t.flows.clone()).collect(),
        }
    }
}

/// Ordering key: shorter first, then lexicographic flow-id sequence.
fn order_key(flows: &[String]) -> (usize, &[String]) {
    (flows.len(), flows)
}

struct FlowIndex<'g> {
    types: HashMap<&'g str, EntityType>,
    outgoing: HashMap<&'g str, Vec<&'g FlowInstance>>,
}

impl<'g> FlowIndex<'g> {
    fn new(g: &'g InstanceGraph) -> Self {
        let types = g
            .entities()
            .iter()
            .map(|e| (e.id.as_str(), e.entity_type))
            .collect();
        let mut outgoing: HashMap<&str, Vec<&FlowInstance>> = HashMap::new();
        for f in g.flows() {
            outgoing.entry(f.source.as_str()).or_default().push(f);
        }
        for flows in outgoing.values_mut() {
            flows.sort_by(|a, b| a.id.cmp(&b.id));
        }
        FlowIndex { types, outgoing }
    }

    fn out(&self, node: &str) -> &[&'g FlowInstance] {
        self.outgoing.get(node).map(Vec::as_slice).unwrap_or(&[])
    }

    fn require(&self, id: &str) -> Result<EntityType, AnalysisError> {
        self.types
            .get(id)
            .copied()
            .ok_or_else(|| AnalysisError::UnknownEntity(id.to_string()))
    }

    /// Whether a path may continue out of `node`.
    fn relays(&self, node: &str, relay_through_persons: bool) -> bool {
        relay_through_persons || self.types.get(node) != Some(&EntityType::Person)
    }
}

fn check_query(
    index: &FlowIndex<'_>,
    source: &str,
    sink: &str,
    max_len: usize,
) -> Result<(), AnalysisError> {
    index.require(source)?;
    index.require(sink)?;
    if source == sink {
        return Err(AnalysisError::SameEndpoints(source.to_string()));
    }
    if max_len == 0 {
        return Err(AnalysisError::ZeroMaxLen);
    }
    Ok(())
}

pub fn enumerate_paths(
    g: &InstanceGraph,
    source: &str,
    sink: &str,
    opts: &PathOptions,
) -> Result<PathList, AnalysisError> {
    match opts.mode {
        PathMode::Strict => strict_paths(g, source, sink, opts).map(PathList::Strict),
        PathMode::Lineage => lineage_traces(g, source, sink, opts).map(PathList::Lineage),
    }
}

/// All simple head-to-tail flow chains from `source` to `sink` with at most
/// `opts.max_len` flows, sorted by length and then flow ids.
pub fn strict_paths(
    g: &InstanceGraph,
    source: &str,
    sink: &str,
    opts: &PathOptions,
) -> Result<Vec<Path>, AnalysisError> {
    let index = FlowIndex::new(g);
    check_query(&index, source, sink, opts.max_len)?;

    // Nodes from which the sink is reachable through relaying nodes.
    let mut incoming: HashMap<&str, Vec<&str>> = HashMap::new();
    for f in g.flows() {
        incoming
            .entry(f.target.as_str())
            .or_default()
            .push(f.source.as_str());
    }
    let mut useful: HashSet<&str> = HashSet::new();
    let mut queue = VecDeque::from([sink]);
    while let Some(n) = queue.pop_front() {
        for &pred in incoming.get(n).map(Vec::as_slice).unwrap_or(&[]) {
            if index.relays(pred, opts.relay_through_persons) && useful.insert(pred) {
                queue.push_back(pred);
            }
        }
    }

    let mut search = StrictSearch {
        index: &index,
        sink,
        opts,
        useful: &useful,
        visited: HashSet::from([source]),
        nodes: vec![source],
        flows: Vec::new(),
        found: Vec::new(),
    };
    search.run(source);
    let mut found = search.found;
    found.sort_by(|a, b| order_key(&a.flows).cmp(&order_key(&b.flows)));
    Ok(found)
}

struct StrictSearch<'a, 'g> {
    index: &'a FlowIndex<'g>,
    sink: &'a str,
    opts: &'a PathOptions,
    useful: &'a HashSet<&'g str>,
    visited: HashSet<&'g str>,
    nodes: Vec<&'g str>,
    flows: Vec<&'g str>,
    found: Vec<Path>,
}

impl<'g> StrictSearch<'_, 'g> {
    fn run(&mut self, node: &'g str) {
        for &f in self.index.out(node) {
            let next = f.target.as_str();
            if self.visited.contains(next) {
                continue;
            }
            if next == self.sink {
                let mut nodes: Vec<String> = self.nodes.iter().map(|s| s.to_string()).collect();
                nodes.push(next.to_string());
                let mut flows: Vec<String> = self.flows.iter().map(|s| s.to_string()).collect();
                flows.push(f.id.clone());
                self.found.push(Path { flows, nodes });
                continue;
            }
            if self.flows.len() + 1 >= self.opts.max_len || !self.useful.contains(next) {
                continue;
            }
            self.visited.insert(next);
            self.nodes.push(next);
            self.flows.push(&f.id);
            self.run(next);
            self.flows.pop();
            self.nodes.pop();
            self.visited.remove(next);
        }
    }
}

/// Lineage traces from `source` to `sink`. Consecutive flows `a`, `b` are
/// linked when `b` leaves the entity `a` arrived at, or when `b`'s package
/// is `a`'s package or derives from it. Flows are used at most once and no
/// entity is arrived at twice.
pub fn lineage_traces(
    g: &InstanceGraph,
    source: &str,
    sink: &str,
    opts: &PathOptions,
) -> Result<Vec<LineageTrace>, AnalysisError> {
    let index = FlowIndex::new(g);
    check_query(&index, source, sink, opts.max_len)?;

    // Flows carrying each package or something derived from it.
    let mut carrying: HashMap<&str, Vec<&FlowInstance>> = HashMap::new();
    for p in g.packages() {
        let mut flows: Vec<&FlowInstance> = g
            .flows()
            .iter()
            .filter(|f| g.derives_from(&f.package, &p.id))
            .collect();
        flows.sort_by(|a, b| a.id.cmp(&b.id));
        carrying.insert(p.id.as_str(), flows);
    }

    let mut search = LineageSearch {
        index: &index,
        carrying: &carrying,
        sink,
        opts,
        arrived: HashSet::from([source]),
        trace: Vec::new(),
        found: Vec::new(),
    };
    for &f in index.out(source) {
        search.step(f);
    }
    let mut found = search.found;
    found.sort_by(|a, b| order_key(&a.flows).cmp(&order_key(&b.flows)));
    Ok(found)
}

struct LineageSearch<'a, 'g> {
    index: &'a FlowIndex<'g>,
    carrying: &'a HashMap<&'g str, Vec<&'g FlowInstance>>,
    sink: &'a str,
    opts: &'a PathOptions,
    arrived: HashSet<&'g str>,
    trace: Vec<&'g FlowInstance>,
    found: Vec<LineageTrace>,
}

impl<'g> LineageSearch<'_, 'g> {
    fn step(&mut self, f: &'g FlowInstance) {
        let target = f.target.as_str();
        if self.arrived.contains(target) {
            return;
        }
        self.trace.push(f);
        if target == self.sink {
            self.found.push(LineageTrace {
                flows: self.trace.iter().map(|f| f.id.clone()).collect(),
                packages: self.trace.iter().map(|f| f.package.clone()).collect(),
            });
        } else if self.trace.len() < self.opts.max_len {
            self.arrived.insert(target);
            let mut next: Vec<&'g FlowInstance> = Vec::new();
            if self.index.relays(target, self.opts.relay_through_persons) {
                next.extend(self.index.out(target));
            }
            if let Some(derived) = self.carrying.get(f.package.as_str()) {
                next.extend(derived.iter().copied());
            }
            next.sort_by(|a, b| a.id.cmp(&b.id));
            next.dedup_by(|a, b| a.id == b.id);
            for n in next {
                if !self.trace.iter().any(|used| used.id == n.id) {
                    self.step(n);
                }
            }
            self.arrived.remove(target);
        }
        self.trace.pop();
    }
}

pub fn reachable_from(g: &InstanceGraph, source: &str) -> Result<BTreeSet<String>, AnalysisError> {
    reachable_from_with(g, source, false)
}

/// Entities reachable from `source` along at least one flow; `source`
/// itself is excluded.
pub fn reachable_from_with(
    g: &InstanceGraph,
    source: &str,
    relay_through_persons: bool,
) -> Result<BTreeSet<String>, AnalysisError> {
    let index = FlowIndex::new(g);
    index.require(source)?;
    let mut seen: HashSet<&str> = HashSet::from([source]);
    let mut queue = VecDeque::from([source]);
    while let Some(n) = queue.pop_front() {
        if n != source && !index.relays(n, relay_through_persons) {
            continue;
        }
        for f in index.out(n) {
            if seen.insert(f.target.as_str()) {
                queue.push_back(f.target.as_str());
            }
        }
    }
    seen.remove(source);
    Ok(seen.into_iter().map(str::to_string).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SinkExposure {
    pub id: String,
    #[serde(rename = "type")]
    pub entity_type: EntityType,
    pub paths: Vec<Path>,
    pub packages: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AggregationPoint {
    pub id: String,
    pub path_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExposureReport {
    pub person: String,
    pub sinks: Vec<SinkExposure>,
    pub aggregation_points: Vec<AggregationPoint>,
}

pub fn exposure_report(g: &InstanceGraph, person: &str) -> Result<ExposureReport, AnalysisError> {
    exposure_report_with(g, person, &PathOptions::default())
}

/// Where a person's data can end up: every entity reachable within
/// `opts.max_len` flows, the strict paths to it and the packages on those
/// paths. Entities reached by two or more paths are aggregation points.
pub fn exposure_report_with(
    g: &InstanceGraph,
    person: &str,
    opts: &PathOptions,
) -> Result<ExposureReport, AnalysisError> {
    let index = FlowIndex::new(g);
    let ty = index.require(person)?;
    if ty != EntityType::Person {
        return Err(AnalysisError::NotAPerson {
            id: person.to_string(),
            found: ty,
        });
    }
    if opts.max_len == 0 {
        return Err(AnalysisError::ZeroMaxLen);
    }

    // Every simple path from the person is a path to its last entity.
    let mut by_end: BTreeMap<String, Vec<Path>> = BTreeMap::new();
    let mut stack: Vec<(Vec<&FlowInstance>, Vec<&str>)> = vec![(Vec::new(), vec![person])];
    while let Some((flows, nodes)) = stack.pop() {
        let here = *nodes.last().expect("path has a start node");
        if !flows.is_empty() {
            by_end.entry(here.to_string()).or_default().push(Path {
                flows: flows.iter().map(|f| f.id.clone()).collect(),
                nodes: nodes.iter().map(|n| n.to_string()).collect(),
            });
            if !index.relays(here, opts.relay_through_persons) {
                continue;
            }
        }
        if flows.len() == opts.max_len {
            continue;
        }
        for &f in index.out(here) {
            if nodes.contains(&f.target.as_str()) {
                continue;
            }
            let mut flows = flows.clone();
            let mut nodes = nodes.clone();
            flows.push(f);
            nodes.push(f.target.as_str());
            stack.push((flows, nodes));
        }
    }

    let mut sinks = Vec::new();
    let mut aggregation_points = Vec::new();
    for (id, mut paths) in by_end {
        paths.sort_by(|a, b| order_key(&a.flows).cmp(&order_key(&b.flows)));
        let packages = paths
            .iter()
            .flat_map(|p| &p.flows)
            .filter_map(|fid| g.flow(fid))
            .map(|f| f.package.clone())
            .collect();
        if paths.len() >= 2 {
            aggregation_points.push(AggregationPoint {
                id: id.clone(),
                path_count: paths.len(),
            });
        }
        let entity_type = index.require(&id)?;
        sinks.push(SinkExposure {
            id,
            entity_type,
            paths,
            packages,
        });
    }
    Ok(ExposureReport {
        person: person.to_string(),
        sinks,
        aggregation_points,
    })
}

/// Reference implementation of strict path enumeration used to cross-check
/// [`strict_paths`]. Exhaustive and unpruned; only suitable for small graphs.
pub mod oracle {
    use super::*;

    pub fn brute_force_paths(
        g: &InstanceGraph,
        source: &str,
        sink: &str,
        max_len: usize,
        relay_through_persons: bool,
    ) -> Result<Vec<Path>, AnalysisError> {
        let known = |id: &str| g.entities().iter().any(|e| e.id == id);
        for id in [source, sink] {
            if !known(id) {
                return Err(AnalysisError::UnknownEntity(id.to_string()));
            }
        }
        if source == sink {
            return Err(AnalysisError::SameEndpoints(source.to_string()));
        }
        if max_len == 0 {
            return Err(AnalysisError::ZeroMaxLen);
        }

        let mut all = Vec::new();
        extend(g, max_len, vec![source.to_string()], Vec::new(), &mut all);

        let is_person = |id: &String| {
            g.entities()
                .iter()
                .any(|e| &e.id == id && e.entity_type == EntityType::Person)
        };
        let mut out: Vec<Path> = all
            .into_iter()
            .filter(|p| p.nodes.last().map(String::as_str) == Some(sink))
            .filter(|p| {
                relay_through_persons || !p.nodes[1..p.nodes.len() - 1].iter().any(is_person)
            })
            .collect();
        out.sort_by(|a, b| {
            a.flows
                .len()
                .cmp(&b.flows.len())
                .then_with(|| a.flows.cmp(&b.flows))
        });
        Ok(out)
    }

    fn extend(
        g: &InstanceGraph,
        max_len: usize,
        nodes: Vec<String>,
        flows: Vec<String>,
        all: &mut Vec<Path>,
    ) {
        if !flows.is_empty() {
            all.push(Path {
                flows: flows.clone(),
                nodes: nodes.clone(),
            });
        }
        if flows.len() == max_len {
            return;
        }
        let last = nodes.last().unwrap();
        for f in g.flows() {
            if &f.source == last && !nodes.contains(&f.target) {
                let mut n = nodes.clone();
                n.push(f.target.clone());
                let mut fl = flows.clone();
                fl.push(f.id.clone());
                extend(g, max_len, n, fl, all);
            }
        }
    }
}
