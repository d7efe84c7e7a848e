//! Entity-level scenario graphs: entity instances, semantic relations,
//! directed flows and the data packages they carry.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::error::{GraphError, IdKind};
use crate::schema::{EntityType, FlowEdgeId, RelationKind};

pub const ATTR_PRIVACY_PRESERVING: &str = "privacy_preserving";
pub const ATTR_STATIC: &str = "static";
pub const ATTR_DYNAMIC: &str = "dynamic";
pub const ATTR_CATEGORY: &str = "category";
pub const ATTR_LABEL: &str = "label";
pub const ATTR_ROLE: &str = "role";

/// Suggested `category` values for organisations.
pub const ORGANISATION_CATEGORIES: [&str; 7] = [
    "Third party company",
    "Affiliated company",
    "Business partner",
    "Dealer",
    "Government body",
    "Business buyer",
    "Service centre",
];

/// Suffixes produced when a bidirectional exchange is split into two flows.
pub const FORWARD_SUFFIX: &str = ".fwd";
pub const REVERSE_SUFFIX: &str = ".rev";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum AttrValue {
    Bool(bool),
    Text(String),
    List(Vec<String>),
}

impl From<bool> for AttrValue {
    fn from(b: bool) -> Self {
        AttrValue::Bool(b)
    }
}

impl From<&str> for AttrValue {
    fn from(s: &str) -> Self {
        AttrValue::Text(s.to_string())
    }
}

impl From<String> for AttrValue {
    fn from(s: String) -> Self {
        AttrValue::Text(s)
    }
}

impl From<Vec<String>> for AttrValue {
    fn from(v: Vec<String>) -> Self {
        AttrValue::List(v)
    }
}

pub type Attributes = BTreeMap<String, AttrValue>;

/// Builds an attribute map from `(name, value)` pairs.
pub fn attrs<I, K, V>(pairs: I) -> Attributes
where
    I: IntoIterator<Item = (K, V)>,
    K: Into<String>,
    V: Into<AttrValue>,
{
    pairs
        .into_iter()
        .map(|(k, v)| (k.into(), v.into()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntityInstance {
    pub id: String,
    #[serde(rename = "type")]
    pub entity_type: EntityType,
    pub attributes: Attributes,
}

impl EntityInstance {
    pub fn privacy_preserving(&self) -> bool {
        matches!(
            self.attributes.get(ATTR_PRIVACY_PRESERVING),
            Some(AttrValue::Bool(true))
        )
    }

    pub fn label(&self) -> Option<&str> {
        match self.attributes.get(ATTR_LABEL) {
            Some(AttrValue::Text(s)) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DataPackage {
    pub id: String,
    pub description: String,
    pub items: Vec<String>,
    pub derives_from: Vec<String>,
}

impl DataPackage {
    pub fn new(id: impl Into<String>, description: impl Into<String>) -> Self {
        DataPackage {
            id: id.into(),
            description: description.into(),
            items: Vec::new(),
            derives_from: Vec::new(),
        }
    }

    pub fn with_items<I: IntoIterator<Item = S>, S: Into<String>>(mut self, items: I) -> Self {
        self.items = items.into_iter().map(Into::into).collect();
        self
    }

    pub fn deriving_from<I: IntoIterator<Item = S>, S: Into<String>>(mut self, ids: I) -> Self {
        self.derives_from = ids.into_iter().map(Into::into).collect();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SemanticRelationInstance {
    pub id: String,
    pub relation: RelationKind,
    pub source: String,
    pub target: String,
    pub attributes: Attributes,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlowInstance {
    pub id: String,
    pub edge_type: FlowEdgeId,
    pub source: String,
    pub target: String,
    pub package: String,
}

/// An entity-level scenario graph.
///
/// Content is kept in insertion order; equality ignores that order. Graphs
/// built through the mutation methods always have unique ids and resolvable
/// references. [`InstanceGraph::from_parts_unchecked`] exists for input that
/// has not been through the builder and must be checked with
/// [`crate::validate::validate`].
#[derive(Debug, Clone)]
pub struct InstanceGraph {
    name: String,
    entities: Vec<EntityInstance>,
    relations: Vec<SemanticRelationInstance>,
    flows: Vec<FlowInstance>,
    packages: Vec<DataPackage>,
}

/// Raw contents of a graph, as returned by [`InstanceGraph::into_parts`].
#[derive(Debug, Clone, Default)]
pub struct GraphParts {
    pub name: String,
    pub entities: Vec<EntityInstance>,
    pub relations: Vec<SemanticRelationInstance>,
    pub flows: Vec<FlowInstance>,
    pub packages: Vec<DataPackage>,
}

/// ASCII letter followed by letters, digits or underscores.
pub fn is_identifier(s: &str) -> bool {
    let mut bytes = s.bytes();
    matches!(bytes.next(), Some(b) if b.is_ascii_alphabetic())
        && bytes.all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// Flow ids may additionally carry a `.fwd`/`.rev` suffix.
pub fn is_flow_identifier(s: &str) -> bool {
    let base = s
        .strip_suffix(FORWARD_SUFFIX)
        .or_else(|| s.strip_suffix(REVERSE_SUFFIX))
        .unwrap_or(s);
    is_identifier(base)
}

/// Checks the reserved attribute names against an entity's type.
pub fn check_entity_attributes(
    id: &str,
    ty: EntityType,
    attributes: &Attributes,
) -> Result<(), GraphError> {
    let misuse = |attribute: &str, reason: &str| GraphError::AttributeMisuse {
        entity: id.to_string(),
        attribute: attribute.to_string(),
        reason: reason.to_string(),
    };
    for (name, value) in attributes {
        match name.as_str() {
            ATTR_PRIVACY_PRESERVING => {
                if !matches!(value, AttrValue::Bool(_)) {
                    return Err(misuse(name, "expected true or false"));
                }
            }
            ATTR_STATIC | ATTR_DYNAMIC => {
                if !matches!(value, AttrValue::List(_)) {
                    return Err(misuse(name, "expected a list of strings"));
                }
                if !(ty.is_a(EntityType::Vehicle) || ty.is_a(EntityType::VehicleComponent)) {
                    return Err(misuse(
                        name,
                        "only vehicles and vehicle components carry properties",
                    ));
                }
            }
            ATTR_CATEGORY => {
                if !matches!(value, AttrValue::Text(_)) {
                    return Err(misuse(name, "expected a string"));
                }
                if !ty.is_a(EntityType::Organisation) {
                    return Err(misuse(name, "only organisations carry a category"));
                }
            }
            ATTR_LABEL if !matches!(value, AttrValue::Text(_)) => {
                return Err(misuse(name, "expected a string"));
            }
            _ => {}
        }
    }
    Ok(())
}

fn sorted_by_id<T: Clone, F: Fn(&T) -> &str>(items: &[T], key: F) -> Vec<T> {
    let mut v = items.to_vec();
    v.sort_by(|a, b| key(a).cmp(key(b)));
    v
}

impl PartialEq for InstanceGraph {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && sorted_by_id(&self.entities, |e| &e.id) == sorted_by_id(&other.entities, |e| &e.id)
            && sorted_by_id(&self.relations, |r| &r.id) == sorted_by_id(&other.relations, |r| &r.id)
            && sorted_by_id(&self.flows, |f| &f.id) == sorted_by_id(&other.flows, |f| &f.id)
            && sorted_by_id(&self.packages, |p| &p.id) == sorted_by_id(&other.packages, |p| &p.id)
    }
}

impl Eq for InstanceGraph {}

impl InstanceGraph {
    pub fn new(name: impl Into<String>) -> Result<Self, GraphError> {
        let name = name.into();
        if name.is_empty() {
            return Err(GraphError::EmptyName);
        }
        Ok(InstanceGraph {
            name,
            entities: Vec::new(),
            relations: Vec::new(),
            flows: Vec::new(),
            packages: Vec::new(),
        })
    }

    /// Assembles a graph without any checks.
    pub fn from_parts_unchecked(parts: GraphParts) -> Self {
        InstanceGraph {
            name: parts.name,
            entities: parts.entities,
            relations: parts.relations,
            flows: parts.flows,
            packages: parts.packages,
        }
    }

    pub fn into_parts(self) -> GraphParts {
        GraphParts {
            name: self.name,
            entities: self.entities,
            relations: self.relations,
            flows: self.flows,
            packages: self.packages,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn entities(&self) -> &[EntityInstance] {
        &self.entities
    }

    pub fn relations(&self) -> &[SemanticRelationInstance] {
        &self.relations
    }

    pub fn flows(&self) -> &[FlowInstance] {
        &self.flows
    }

    pub fn packages(&self) -> &[DataPackage] {
        &self.packages
    }

    pub fn entity(&self, id: &str) -> Option<&EntityInstance> {
        self.entities.iter().find(|e| e.id == id)
    }

    pub fn relation(&self, id: &str) -> Option<&SemanticRelationInstance> {
        self.relations.iter().find(|r| r.id == id)
    }

    pub fn flow(&self, id: &str) -> Option<&FlowInstance> {
        self.flows.iter().find(|f| f.id == id)
    }

    pub fn package(&self, id: &str) -> Option<&DataPackage> {
        self.packages.iter().find(|p| p.id == id)
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
            && self.relations.is_empty()
            && self.flows.is_empty()
            && self.packages.is_empty()
    }

    pub fn add_entity(
        &mut self,
        id: &str,
        entity_type: EntityType,
        attributes: Attributes,
    ) -> Result<&mut Self, GraphError> {
        if !is_identifier(id) {
            return Err(GraphError::InvalidId {
                kind: IdKind::Entity,
                id: id.to_string(),
            });
        }
        if self.entity(id).is_some() {
            return Err(GraphError::DuplicateId {
                kind: IdKind::Entity,
                id: id.to_string(),
            });
        }
        if entity_type == EntityType::DataPackage {
            return Err(GraphError::NotInstantiable(entity_type));
        }
        check_entity_attributes(id, entity_type, &attributes)?;
        self.entities.push(EntityInstance {
            id: id.to_string(),
            entity_type,
            attributes,
        });
        Ok(self)
    }

    /// Registers a package. Re-registering identical content is a no-op.
    pub fn add_package(&mut self, package: DataPackage) -> Result<&mut Self, GraphError> {
        if !is_identifier(&package.id) {
            return Err(GraphError::InvalidId {
                kind: IdKind::Package,
                id: package.id,
            });
        }
        if let Some(existing) = self.package(&package.id) {
            if *existing == package {
                return Ok(self);
            }
            return Err(GraphError::PackageConflict(package.id));
        }
        // Parents must already exist, so the only cycle a new package can
        // close is a reference to itself.
        for parent in &package.derives_from {
            if *parent == package.id {
                return Err(GraphError::DerivesCycle(package.id.clone()));
            }
            if self.package(parent).is_none() {
                return Err(GraphError::Dangling {
                    kind: IdKind::Package,
                    id: parent.clone(),
                });
            }
        }
        self.packages.push(package);
        Ok(self)
    }

    fn check_flow(&self, id: &str, source: &str, target: &str) -> Result<(), GraphError> {
        if !is_flow_identifier(id) {
            return Err(GraphError::InvalidId {
                kind: IdKind::Flow,
                id: id.to_string(),
            });
        }
        if self.flow(id).is_some() {
            return Err(GraphError::DuplicateId {
                kind: IdKind::Flow,
                id: id.to_string(),
            });
        }
        for end in [source, target] {
            if self.entity(end).is_none() {
                return Err(GraphError::Dangling {
                    kind: IdKind::Entity,
                    id: end.to_string(),
                });
            }
        }
        if source == target {
            return Err(GraphError::SelfLoop(id.to_string()));
        }
        Ok(())
    }

    /// Records a directed flow carrying an already registered package.
    pub fn add_flow(
        &mut self,
        id: &str,
        edge_type: FlowEdgeId,
        source: &str,
        target: &str,
        package: &str,
    ) -> Result<&mut Self, GraphError> {
        self.check_flow(id, source, target)?;
        if self.package(package).is_none() {
            return Err(GraphError::Dangling {
                kind: IdKind::Package,
                id: package.to_string(),
            });
        }
        self.flows.push(FlowInstance {
            id: id.to_string(),
            edge_type,
            source: source.to_string(),
            target: target.to_string(),
            package: package.to_string(),
        });
        Ok(self)
    }

    /// Records a directed flow, registering `package` on the way. Fails
    /// without modifying the graph if either step would fail.
    pub fn add_flow_carrying(
        &mut self,
        id: &str,
        edge_type: FlowEdgeId,
        source: &str,
        target: &str,
        package: DataPackage,
    ) -> Result<&mut Self, GraphError> {
        self.check_flow(id, source, target)?;
        let package_id = package.id.clone();
        self.add_package(package)?;
        self.add_flow(id, edge_type, source, target, &package_id)
    }

    /// Records a two-way exchange as the pair `<id>.fwd` (`left -> right`)
    /// and `<id>.rev` (`right -> left`) sharing one package.
    pub fn add_exchange(
        &mut self,
        id: &str,
        edge_type: FlowEdgeId,
        left: &str,
        right: &str,
        package: &str,
    ) -> Result<&mut Self, GraphError> {
        if !is_identifier(id) {
            return Err(GraphError::InvalidId {
                kind: IdKind::Flow,
                id: id.to_string(),
            });
        }
        let fwd = format!("{id}{FORWARD_SUFFIX}");
        let rev = format!("{id}{REVERSE_SUFFIX}");
        self.check_flow(&fwd, left, right)?;
        self.check_flow(&rev, right, left)?;
        self.add_flow(&fwd, edge_type, left, right, package)?;
        if let Err(e) = self.add_flow(&rev, edge_type, right, left, package) {
            self.flows.pop();
            return Err(e);
        }
        Ok(self)
    }

    pub fn add_semantic_relation(
        &mut self,
        id: &str,
        relation: RelationKind,
        source: &str,
        target: &str,
        attributes: Attributes,
    ) -> Result<&mut Self, GraphError> {
        if !is_identifier(id) {
            return Err(GraphError::InvalidId {
                kind: IdKind::Relation,
                id: id.to_string(),
            });
        }
        if self.relation(id).is_some() {
            return Err(GraphError::DuplicateId {
                kind: IdKind::Relation,
                id: id.to_string(),
            });
        }
        for end in [source, target] {
            if self.entity(end).is_none() {
                return Err(GraphError::Dangling {
                    kind: IdKind::Entity,
                    id: end.to_string(),
                });
            }
        }
        self.relations.push(SemanticRelationInstance {
            id: id.to_string(),
            relation,
            source: source.to_string(),
            target: target.to_string(),
            attributes,
        });
        Ok(self)
    }

    /// Every reference in the graph resolves and ids are unique per kind.
    pub fn check_well_formed(&self) -> Result<(), GraphError> {
        fn unique<'a>(kind: IdKind, ids: impl Iterator<Item = &'a str>) -> Result<(), GraphError> {
            let mut seen = HashSet::new();
            for id in ids {
                if !seen.insert(id) {
                    return Err(GraphError::DuplicateId {
                        kind,
                        id: id.to_string(),
                    });
                }
            }
            Ok(())
        }
        unique(IdKind::Entity, self.entities.iter().map(|e| e.id.as_str()))?;
        unique(
            IdKind::Relation,
            self.relations.iter().map(|r| r.id.as_str()),
        )?;
        unique(IdKind::Flow, self.flows.iter().map(|f| f.id.as_str()))?;
        unique(IdKind::Package, self.packages.iter().map(|p| p.id.as_str()))?;

        let entity = |id: &str| {
            self.entity(id)
                .map(|_| ())
                .ok_or_else(|| GraphError::Dangling {
                    kind: IdKind::Entity,
                    id: id.to_string(),
                })
        };
        let package = |id: &str| {
            self.package(id)
                .map(|_| ())
                .ok_or_else(|| GraphError::Dangling {
                    kind: IdKind::Package,
                    id: id.to_string(),
                })
        };
        for r in &self.relations {
            entity(&r.source)?;
            entity(&r.target)?;
        }
        for f in &self.flows {
            entity(&f.source)?;
            entity(&f.target)?;
            package(&f.package)?;
        }
        for p in &self.packages {
            for parent in &p.derives_from {
                package(parent)?;
            }
        }
        Ok(())
    }

    /// Whether package `descendant` equals `ancestor` or derives from it
    /// through one or more `derives_from` links.
    pub fn derives_from(&self, descendant: &str, ancestor: &str) -> bool {
        let mut stack = vec![descendant];
        let mut seen = HashSet::new();
        while let Some(id) = stack.pop() {
            if id == ancestor {
                return true;
            }
            if !seen.insert(id) {
                continue;
            }
            if let Some(p) = self.package(id) {
                stack.extend(p.derives_from.iter().map(String::as_str));
            }
        }
        false
    }
}
