//! The fixed entity-type graph: entity types, subclass edges, semantic
//! relation types and the E1..E21 data-flow edge types.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::Serialize;

use crate::dot;
use crate::error::SchemaError;

/// One of the 14 entity types of the type graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum EntityType {
    Person,
    Vehicle,
    VehicleComponent,
    AdditionalVehicleSensor,
    ChargingFacility,
    CommunicationInfrastructure,
    NetworkInfrastructure,
    RoadSideUnit,
    DigitalAsset,
    DataPackage,
    Organisation,
    GovernmentBody,
    ServiceProvider,
    TrafficMonitoringSensor,
}

impl EntityType {
    pub const ALL: [EntityType; 14] = [
        EntityType::Person,
        EntityType::Vehicle,
        EntityType::VehicleComponent,
        EntityType::AdditionalVehicleSensor,
        EntityType::ChargingFacility,
        EntityType::CommunicationInfrastructure,
        EntityType::NetworkInfrastructure,
        EntityType::RoadSideUnit,
        EntityType::DigitalAsset,
        EntityType::DataPackage,
        EntityType::Organisation,
        EntityType::GovernmentBody,
        EntityType::ServiceProvider,
        EntityType::TrafficMonitoringSensor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EntityType::Person => "Person",
            EntityType::Vehicle => "Vehicle",
            EntityType::VehicleComponent => "VehicleComponent",
            EntityType::AdditionalVehicleSensor => "AdditionalVehicleSensor",
            EntityType::ChargingFacility => "ChargingFacility",
            EntityType::CommunicationInfrastructure => "CommunicationInfrastructure",
            EntityType::NetworkInfrastructure => "NetworkInfrastructure",
            EntityType::RoadSideUnit => "RoadSideUnit",
            EntityType::DigitalAsset => "DigitalAsset",
            EntityType::DataPackage => "DataPackage",
            EntityType::Organisation => "Organisation",
            EntityType::GovernmentBody => "GovernmentBody",
            EntityType::ServiceProvider => "ServiceProvider",
            EntityType::TrafficMonitoringSensor => "TrafficMonitoringSensor",
        }
    }

    /// Short code used in scenario files and diagrams (`P`, `V`, `AVS`, ...).
    pub fn code(self) -> &'static str {
        match self {
            EntityType::Person => "P",
            EntityType::Vehicle => "V",
            EntityType::VehicleComponent => "VC",
            EntityType::AdditionalVehicleSensor => "AVS",
            EntityType::ChargingFacility => "CF",
            EntityType::CommunicationInfrastructure => "CI",
            EntityType::NetworkInfrastructure => "NI",
            EntityType::RoadSideUnit => "RSU",
            EntityType::DigitalAsset => "DA",
            EntityType::DataPackage => "DP",
            EntityType::Organisation => "O",
            EntityType::GovernmentBody => "G",
            EntityType::ServiceProvider => "SP",
            EntityType::TrafficMonitoringSensor => "TMS",
        }
    }

    pub fn from_code(code: &str) -> Option<EntityType> {
        EntityType::ALL.into_iter().find(|t| t.code() == code)
    }

    pub fn from_name(name: &str) -> Option<EntityType> {
        EntityType::ALL.into_iter().find(|t| t.name() == name)
    }

    /// Direct superclass, if any. The hierarchy is a forest of depth one.
    pub fn parent(self) -> Option<EntityType> {
        match self {
            EntityType::GovernmentBody | EntityType::ServiceProvider => {
                Some(EntityType::Organisation)
            }
            EntityType::NetworkInfrastructure | EntityType::RoadSideUnit => {
                Some(EntityType::CommunicationInfrastructure)
            }
            _ => None,
        }
    }

    /// Reflexive subclass test.
    pub fn is_a(self, other: EntityType) -> bool {
        self == other || self.parent() == Some(other)
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for EntityType {
    type Err = SchemaError;

    /// Accepts either the short code or the full name.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EntityType::from_code(s)
            .or_else(|| EntityType::from_name(s))
            .ok_or_else(|| SchemaError::UnknownEntityType(s.to_string()))
    }
}

/// `child` is a subclass of `parent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SubclassEdge {
    pub child: EntityType,
    pub parent: EntityType,
}

/// Names of the non-flow structural relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RelationKind {
    Occupy,
    IsPartOf,
    OwnedBy,
    EquippedWith,
    Communicate,
    ProvideService,
    PartnerWith,
}

impl RelationKind {
    pub const ALL: [RelationKind; 7] = [
        RelationKind::Occupy,
        RelationKind::IsPartOf,
        RelationKind::OwnedBy,
        RelationKind::EquippedWith,
        RelationKind::Communicate,
        RelationKind::ProvideService,
        RelationKind::PartnerWith,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelationKind::Occupy => "occupy",
            RelationKind::IsPartOf => "isPartOf",
            RelationKind::OwnedBy => "ownedBy",
            RelationKind::EquippedWith => "equippedWith",
            RelationKind::Communicate => "communicate",
            RelationKind::ProvideService => "provideService",
            RelationKind::PartnerWith => "partnerWith",
        }
    }

    pub fn from_name(name: &str) -> Option<RelationKind> {
        RelationKind::ALL.into_iter().find(|r| r.name() == name)
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RelationKind {
    type Err = SchemaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelationKind::from_name(s).ok_or_else(|| SchemaError::UnknownRelation(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SemanticRelationType {
    pub kind: RelationKind,
    pub endpoint_pairs: Vec<(EntityType, EntityType)>,
    pub required_attributes: Vec<&'static str>,
}

impl SemanticRelationType {
    /// True if some declared pair admits `(src, dst)` under subclassing.
    pub fn admits(&self, src: EntityType, dst: EntityType) -> bool {
        self.endpoint_pairs
            .iter()
            .any(|&(s, t)| src.is_a(s) && dst.is_a(t))
    }
}

/// Identifier of a data-flow edge type, `E1` through `E21`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlowEdgeId(u8);

impl FlowEdgeId {
    pub const COUNT: u8 = 21;

    pub fn new(n: u8) -> Result<FlowEdgeId, SchemaError> {
        if (1..=Self::COUNT).contains(&n) {
            Ok(FlowEdgeId(n))
        } else {
            Err(SchemaError::UnknownEdgeType(format!("E{n}")))
        }
    }

    pub fn number(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = FlowEdgeId> {
        (1..=Self::COUNT).map(FlowEdgeId)
    }
}

impl fmt::Display for FlowEdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E{}", self.0)
    }
}

impl FromStr for FlowEdgeId {
    type Err = SchemaError;

    /// Parses `E<n>`; uppercase only, no leading zeros.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || SchemaError::UnknownEdgeType(s.to_string());
        let digits = s.strip_prefix('E').ok_or_else(unknown)?;
        if digits.is_empty()
            || digits.starts_with('0')
            || !digits.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(unknown());
        }
        let n: u8 = digits.parse().map_err(|_| unknown())?;
        FlowEdgeId::new(n).map_err(|_| unknown())
    }
}

impl Serialize for FlowEdgeId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Directionality {
    Uni,
    Bi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct FlowEdgeType {
    pub id: FlowEdgeId,
    pub source: EntityType,
    pub target: EntityType,
    pub directionality: Directionality,
}

/// Outcome of checking a directed flow against its edge type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowVerdict {
    Conforms,
    /// Endpoint types fit only in the reverse orientation of a uni edge.
    Reversed,
    /// Endpoint types fit in neither orientation.
    Mismatch,
}

impl FlowEdgeType {
    pub fn verdict(&self, src: EntityType, dst: EntityType) -> FlowVerdict {
        let forward = src.is_a(self.source) && dst.is_a(self.target);
        let backward = src.is_a(self.target) && dst.is_a(self.source);
        match (forward, backward, self.directionality) {
            (true, _, _) => FlowVerdict::Conforms,
            (false, true, Directionality::Bi) => FlowVerdict::Conforms,
            (false, true, Directionality::Uni) => FlowVerdict::Reversed,
            (false, false, _) => FlowVerdict::Mismatch,
        }
    }
}

/// The entity-type graph. Immutable once built; obtain it with
/// [`builtin_schema`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TypeGraph {
    pub entity_types: Vec<EntityType>,
    pub subclass_edges: Vec<SubclassEdge>,
    pub semantic_relations: Vec<SemanticRelationType>,
    pub flow_edge_types: Vec<FlowEdgeType>,
}

pub fn builtin_schema() -> &'static TypeGraph {
    static SCHEMA: OnceLock<TypeGraph> = OnceLock::new();
    SCHEMA.get_or_init(build)
}

fn build() -> TypeGraph {
    use Directionality::{Bi, Uni};
    use EntityType::*;

    let subclass_edges = EntityType::ALL
        .into_iter()
        .filter_map(|child| child.parent().map(|parent| SubclassEdge { child, parent }))
        .collect();

    let rel = |kind, pairs: &[(EntityType, EntityType)], required: &[&'static str]| {
        SemanticRelationType {
            kind,
            endpoint_pairs: pairs.to_vec(),
            required_attributes: required.to_vec(),
        }
    };
    let semantic_relations = vec![
        rel(RelationKind::Occupy, &[(Person, Vehicle)], &["role"]),
        rel(
            RelationKind::IsPartOf,
            &[
                (VehicleComponent, Vehicle),
                (VehicleComponent, VehicleComponent),
            ],
            &[],
        ),
        rel(
            RelationKind::OwnedBy,
            &[
                (DigitalAsset, Organisation),
                (AdditionalVehicleSensor, Person),
                (AdditionalVehicleSensor, Organisation),
                (TrafficMonitoringSensor, Organisation),
                (ChargingFacility, Organisation),
            ],
            &[],
        ),
        rel(
            RelationKind::EquippedWith,
            &[(Vehicle, AdditionalVehicleSensor)],
            &[],
        ),
        rel(
            RelationKind::Communicate,
            &[(DigitalAsset, DigitalAsset)],
            &[],
        ),
        rel(
            RelationKind::ProvideService,
            &[(Organisation, Vehicle)],
            &[],
        ),
        rel(
            RelationKind::PartnerWith,
            &[(Organisation, Organisation)],
            &[],
        ),
    ];

    let table: [(EntityType, EntityType, Directionality); 21] = [
        (Person, Vehicle, Uni),
        (Person, DigitalAsset, Bi),
        (DigitalAsset, Vehicle, Bi),
        (DigitalAsset, Organisation, Uni),
        (DigitalAsset, DigitalAsset, Bi),
        (AdditionalVehicleSensor, Vehicle, Bi),
        (Person, AdditionalVehicleSensor, Uni),
        (AdditionalVehicleSensor, Person, Bi),
        (AdditionalVehicleSensor, Organisation, Bi),
        (Vehicle, VehicleComponent, Bi),
        (VehicleComponent, VehicleComponent, Bi),
        (Vehicle, Vehicle, Bi),
        (Vehicle, CommunicationInfrastructure, Bi),
        (CommunicationInfrastructure, CommunicationInfrastructure, Bi),
        (CommunicationInfrastructure, Organisation, Uni),
        (Vehicle, TrafficMonitoringSensor, Uni),
        (TrafficMonitoringSensor, Organisation, Bi),
        (ChargingFacility, Vehicle, Bi),
        (ChargingFacility, Organisation, Bi),
        (Vehicle, Organisation, Bi),
        (Organisation, Organisation, Bi),
    ];
    let flow_edge_types = FlowEdgeId::all()
        .zip(table)
        .map(|(id, (source, target, directionality))| FlowEdgeType {
            id,
            source,
            target,
            directionality,
        })
        .collect();

    TypeGraph {
        entity_types: EntityType::ALL.to_vec(),
        subclass_edges,
        semantic_relations,
        flow_edge_types,
    }
}

impl TypeGraph {
    pub fn contains(&self, ty: EntityType) -> bool {
        self.entity_types.contains(&ty)
    }

    /// Reflexive subclass test restricted to the registry's subclass edges.
    pub fn is_subtype(&self, child: EntityType, parent: EntityType) -> Result<bool, SchemaError> {
        for ty in [child, parent] {
            if !self.contains(ty) {
                return Err(SchemaError::UnknownEntityType(ty.name().to_string()));
            }
        }
        Ok(child == parent
            || self
                .subclass_edges
                .iter()
                .any(|e| e.child == child && e.parent == parent))
    }

    pub fn flow_edge_type(&self, id: FlowEdgeId) -> Result<&FlowEdgeType, SchemaError> {
        self.flow_edge_types
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| SchemaError::UnknownEdgeType(id.to_string()))
    }

    pub fn relation(&self, kind: RelationKind) -> Result<&SemanticRelationType, SchemaError> {
        self.semantic_relations
            .iter()
            .find(|r| r.kind == kind)
            .ok_or_else(|| SchemaError::UnknownRelation(kind.name().to_string()))
    }

    /// Whether a directed flow `src -> dst` is permitted by `edge`. Bi edge
    /// types accept either orientation.
    pub fn flow_conforms(
        &self,
        edge: FlowEdgeId,
        src: EntityType,
        dst: EntityType,
    ) -> Result<bool, SchemaError> {
        for ty in [src, dst] {
            if !self.contains(ty) {
                return Err(SchemaError::UnknownEntityType(ty.name().to_string()));
            }
        }
        Ok(self.flow_edge_type(edge)?.verdict(src, dst) == FlowVerdict::Conforms)
    }

    /// Renders the type graph as Graphviz DOT. Node and edge statements are
    /// each sorted so the output is byte-stable.
    pub fn to_dot(&self) -> String {
        let mut nodes: Vec<String> = self
            .entity_types
            .iter()
            .map(|t| {
                format!(
                    "{} [label={}];",
                    dot::quote(t.name()),
                    dot::quote(&format!("{} ({})", t.name(), t.code()))
                )
            })
            .collect();
        nodes.sort();

        let mut edges = Vec::new();
        for e in &self.subclass_edges {
            edges.push(format!(
                "{} -> {} [label=\"subClassOf\", style=bold, arrowhead=empty];",
                dot::quote(e.child.name()),
                dot::quote(e.parent.name())
            ));
        }
        for r in &self.semantic_relations {
            for (s, t) in &r.endpoint_pairs {
                edges.push(format!(
                    "{} -> {} [label={}, style=solid];",
                    dot::quote(s.name()),
                    dot::quote(t.name()),
                    dot::quote(r.kind.name())
                ));
            }
        }
        for f in &self.flow_edge_types {
            let dir = match f.directionality {
                Directionality::Uni => "forward",
                Directionality::Bi => "both",
            };
            edges.push(format!(
                "{} -> {} [label={}, style=dashed, dir={dir}];",
                dot::quote(f.source.name()),
                dot::quote(f.target.name()),
                dot::quote(&f.id.to_string())
            ));
        }
        edges.sort();

        dot::digraph("type_graph", &nodes, &edges)
    }

    /// Plain-text table of the registry.
    pub fn to_text(&self) -> String {
        let mut out = String::from("entity types:\n");
        for t in &self.entity_types {
            let parent = t
                .parent()
                .map(|p| format!(" < {}", p.code()))
                .unwrap_or_default();
            out.push_str(&format!("  {:<4} {}{}\n", t.code(), t.name(), parent));
        }
        out.push_str("semantic relations:\n");
        for r in &self.semantic_relations {
            let pairs: Vec<String> = r
                .endpoint_pairs
                .iter()
                .map(|(s, t)| format!("{}->{}", s.code(), t.code()))
                .collect();
            out.push_str(&format!("  {:<15}{}", r.kind.name(), pairs.join(" ")));
            if !r.required_attributes.is_empty() {
                out.push_str(&format!(" (requires {})", r.required_attributes.join(", ")));
            }
            out.push('\n');
        }
        out.push_str("flow edge types:\n");
        for f in &self.flow_edge_types {
            let arrow = match f.directionality {
                Directionality::Uni => "->",
                Directionality::Bi => "<->",
            };
            out.push_str(&format!(
                "  {:<4} {} {} {}\n",
                f.id.to_string(),
                f.source.code(),
                arrow,
                f.target.code()
            ));
        }
        out
    }
}
