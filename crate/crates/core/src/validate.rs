//! Conformance checking of instance graphs against the type graph.
//!
//! Validation never fails: every problem becomes a [`Violation`] in the
//! returned report, so malformed scenarios can still be inspected in full.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::graph::{check_entity_attributes, AttrValue, InstanceGraph, ATTR_ROLE};
use crate::schema::{EntityType, FlowVerdict, RelationKind, TypeGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    UnknownType,
    EndpointMismatch,
    DirectionViolation,
    MissingPackage,
    DanglingRef,
    DuplicateId,
    RoleMissing,
    PartOfCycle,
    DerivesCycle,
    AttributeMisuse,
    SelfLoop,
    OwnershipLint,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::UnknownType => "UNKNOWN_TYPE",
            ViolationCode::EndpointMismatch => "ENDPOINT_MISMATCH",
            ViolationCode::DirectionViolation => "DIRECTION_VIOLATION",
            ViolationCode::MissingPackage => "MISSING_PACKAGE",
            ViolationCode::DanglingRef => "DANGLING_REF",
            ViolationCode::DuplicateId => "DUPLICATE_ID",
            ViolationCode::RoleMissing => "ROLE_MISSING",
            ViolationCode::PartOfCycle => "PART_OF_CYCLE",
            ViolationCode::DerivesCycle => "DERIVES_CYCLE",
            ViolationCode::AttributeMisuse => "ATTRIBUTE_MISUSE",
            ViolationCode::SelfLoop => "SELF_LOOP",
            ViolationCode::OwnershipLint => "OWNERSHIP_LINT",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            ViolationCode::OwnershipLint => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// Field order matches the JSON report contract.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub severity: Severity,
    pub subject: String,
    pub message: String,
}

impl Violation {
    fn new(code: ViolationCode, subject: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            code,
            severity: code.severity(),
            subject: subject.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub scenario: String,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_conformant(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Warning)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn codes(&self) -> BTreeSet<ViolationCode> {
        self.violations.iter().map(|v| v.code).collect()
    }
}

/// Flow edge types whose direction depends on who owns the device.
const OWNERSHIP_SENSITIVE_EDGES: [u8; 4] = [8, 9, 17, 19];

pub fn validate(schema: &TypeGraph, g: &InstanceGraph) -> ValidationReport {
    let mut out = Vec::new();

    check_duplicates(g, &mut out);

    let mut types: HashMap<&str, EntityType> = HashMap::new();
    for e in g.entities() {
        types.entry(e.id.as_str()).or_insert(e.entity_type);
        if !schema.contains(e.entity_type) || e.entity_type == EntityType::DataPackage {
            out.push(Violation::new(
                ViolationCode::UnknownType,
                &e.id,
                format!(
                    "{} is not an instantiable entity type",
                    e.entity_type.name()
                ),
            ));
        }
        if let Err(err) = check_entity_attributes(&e.id, e.entity_type, &e.attributes) {
            out.push(Violation::new(
                ViolationCode::AttributeMisuse,
                &e.id,
                err.to_string(),
            ));
        }
    }

    let resolve = |subject: &str, end: &str, out: &mut Vec<Violation>| {
        let ty = types.get(end).copied();
        if ty.is_none() {
            out.push(Violation::new(
                ViolationCode::DanglingRef,
                subject,
                format!("reference to unknown entity `{end}`"),
            ));
        }
        ty
    };

    for f in g.flows() {
        let src = resolve(&f.id, &f.source, &mut out);
        let dst = resolve(&f.id, &f.target, &mut out);
        if g.package(&f.package).is_none() {
            out.push(Violation::new(
                ViolationCode::MissingPackage,
                &f.id,
                format!("flow carries unknown package `{}`", f.package),
            ));
        }
        if f.source == f.target {
            out.push(Violation::new(
                ViolationCode::SelfLoop,
                &f.id,
                format!("flow connects `{}` to itself", f.source),
            ));
        }
        let Ok(edge) = schema.flow_edge_type(f.edge_type) else {
            out.push(Violation::new(
                ViolationCode::UnknownType,
                &f.id,
                format!("unknown flow edge type {}", f.edge_type),
            ));
            continue;
        };
        let (Some(src), Some(dst)) = (src, dst) else {
            continue;
        };
        match edge.verdict(src, dst) {
            FlowVerdict::Conforms => {}
            FlowVerdict::Reversed => out.push(Violation::new(
                ViolationCode::DirectionViolation,
                &f.id,
                format!(
                    "{} only flows {} -> {}, but `{}` ({}) -> `{}` ({}) runs backwards",
                    f.edge_type,
                    edge.source.code(),
                    edge.target.code(),
                    f.source,
                    src.code(),
                    f.target,
                    dst.code()
                ),
            )),
            FlowVerdict::Mismatch => out.push(Violation::new(
                ViolationCode::EndpointMismatch,
                &f.id,
                format!(
                    "{} connects {} and {}, not `{}` ({}) and `{}` ({})",
                    f.edge_type,
                    edge.source.code(),
                    edge.target.code(),
                    f.source,
                    src.code(),
                    f.target,
                    dst.code()
                ),
            )),
        }
    }

    for r in g.relations() {
        let src = resolve(&r.id, &r.source, &mut out);
        let dst = resolve(&r.id, &r.target, &mut out);
        let Ok(rel) = schema.relation(r.relation) else {
            out.push(Violation::new(
                ViolationCode::UnknownType,
                &r.id,
                format!("unknown semantic relation `{}`", r.relation),
            ));
            continue;
        };
        if let (Some(src), Some(dst)) = (src, dst) {
            if !rel.admits(src, dst) {
                out.push(Violation::new(
                    ViolationCode::EndpointMismatch,
                    &r.id,
                    format!(
                        "{} does not relate `{}` ({}) to `{}` ({})",
                        r.relation,
                        r.source,
                        src.code(),
                        r.target,
                        dst.code()
                    ),
                ));
            }
        }
        if r.relation == RelationKind::Occupy {
            match r.attributes.get(ATTR_ROLE) {
                Some(AttrValue::Text(role)) if role == "driver" || role == "passenger" => {}
                Some(_) => out.push(Violation::new(
                    ViolationCode::RoleMissing,
                    &r.id,
                    "occupy role must be \"driver\" or \"passenger\"",
                )),
                None => out.push(Violation::new(
                    ViolationCode::RoleMissing,
                    &r.id,
                    "occupy relation has no role",
                )),
            }
        }
    }

    for p in g.packages() {
        for parent in &p.derives_from {
            if g.package(parent).is_none() {
                out.push(Violation::new(
                    ViolationCode::DanglingRef,
                    &p.id,
                    format!("derives from unknown package `{parent}`"),
                ));
            }
        }
    }

    let part_of: Vec<(&str, &str)> = g
        .relations()
        .iter()
        .filter(|r| r.relation == RelationKind::IsPartOf)
        .map(|r| (r.source.as_str(), r.target.as_str()))
        .collect();
    for cycle in cycles(&part_of) {
        out.push(Violation::new(
            ViolationCode::PartOfCycle,
            cycle[0],
            format!("isPartOf cycle through {}", cycle.join(", ")),
        ));
    }

    let derives: Vec<(&str, &str)> = g
        .packages()
        .iter()
        .flat_map(|p| {
            p.derives_from
                .iter()
                .map(move |d| (p.id.as_str(), d.as_str()))
        })
        .collect();
    for cycle in cycles(&derives) {
        out.push(Violation::new(
            ViolationCode::DerivesCycle,
            cycle[0],
            format!("package derivation cycle through {}", cycle.join(", ")),
        ));
    }

    ownership_lints(g, &mut out);

    out.sort_by(|a, b| {
        (a.severity, &a.subject, a.code.as_str(), &a.message).cmp(&(
            b.severity,
            &b.subject,
            b.code.as_str(),
            &b.message,
        ))
    });
    out.dedup();
    ValidationReport {
        scenario: g.name().to_string(),
        violations: out,
    }
}

fn check_duplicates(g: &InstanceGraph, out: &mut Vec<Violation>) {
    let mut report = |kind: &str, ids: Vec<&str>| {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for id in ids {
            *counts.entry(id).or_default() += 1;
        }
        for (id, n) in counts.into_iter().filter(|&(_, n)| n > 1) {
            out.push(Violation::new(
                ViolationCode::DuplicateId,
                id,
                format!("{kind} id declared {n} times"),
            ));
        }
    };
    report(
        "entity",
        g.entities().iter().map(|e| e.id.as_str()).collect(),
    );
    report(
        "relation",
        g.relations().iter().map(|r| r.id.as_str()).collect(),
    );
    report("flow", g.flows().iter().map(|f| f.id.as_str()).collect());
    report(
        "package",
        g.packages().iter().map(|p| p.id.as_str()).collect(),
    );
}

/// Strongly connected groups of a small directed graph that contain a
/// cycle, each returned as a sorted member list.
fn cycles<'a>(edges: &[(&'a str, &'a str)]) -> Vec<Vec<&'a str>> {
    let mut succ: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for &(a, b) in edges {
        succ.entry(a).or_default().insert(b);
        succ.entry(b).or_default();
    }
    let reach = |from: &'a str| -> BTreeSet<&'a str> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<&str> = succ[from].iter().copied().collect();
        while let Some(n) = stack.pop() {
            if seen.insert(n) {
                stack.extend(succ[n].iter().copied());
            }
        }
        seen
    };
    let reachable: BTreeMap<&str, BTreeSet<&str>> = succ.keys().map(|&n| (n, reach(n))).collect();

    let mut assigned = BTreeSet::new();
    let mut groups = Vec::new();
    for (&n, r) in &reachable {
        if assigned.contains(n) || !r.contains(n) {
            continue;
        }
        let group: Vec<&str> = r
            .iter()
            .copied()
            .filter(|m| reachable[m].contains(n))
            .collect();
        assigned.extend(group.iter().copied());
        groups.push(group);
    }
    groups
}

/// Data on ownership-dependent edges should flow from a device toward its
/// owner, never from the owner into the device.
fn ownership_lints(g: &InstanceGraph, out: &mut Vec<Violation>) {
    let owned: BTreeSet<(&str, &str)> = g
        .relations()
        .iter()
        .filter(|r| r.relation == RelationKind::OwnedBy)
        .map(|r| (r.source.as_str(), r.target.as_str()))
        .collect();
    for f in g.flows() {
        if !OWNERSHIP_SENSITIVE_EDGES.contains(&f.edge_type.number()) {
            continue;
        }
        if owned.contains(&(f.target.as_str(), f.source.as_str())) {
            out.push(Violation::new(
                ViolationCode::OwnershipLint,
                &f.id,
                format!(
                    "`{}` is owned by `{}`, but {} sends data from the owner to the device",
                    f.target, f.source, f.edge_type
                ),
            ));
        }
    }
}
