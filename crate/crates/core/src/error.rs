use thiserror::Error;

use crate::schema::EntityType;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("unknown entity type `{0}`")]
    UnknownEntityType(String),
    #[error("unknown flow edge type `{0}`")]
    UnknownEdgeType(String),
    #[error("unknown semantic relation `{0}`")]
    UnknownRelation(String),
}

/// Namespace an identifier lives in; ids only need to be unique per kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IdKind {
    Entity,
    Relation,
    Flow,
    Package,
}

impl std::fmt::Display for IdKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IdKind::Entity => "entity",
            IdKind::Relation => "relation",
            IdKind::Flow => "flow",
            IdKind::Package => "package",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("scenario name must not be empty")]
    EmptyName,
    #[error("invalid {kind} identifier `{id}`")]
    InvalidId { kind: IdKind, id: String },
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: IdKind, id: String },
    #[error("entity type {0} cannot be instantiated as a graph node; attach data packages to flows instead")]
    NotInstantiable(EntityType),
    #[error("attribute `{attribute}` on `{entity}`: {reason}")]
    AttributeMisuse {
        entity: String,
        attribute: String,
        reason: String,
    },
    #[error("unknown {kind} `{id}`")]
    Dangling { kind: IdKind, id: String },
    #[error("package `{0}` is already registered with different content")]
    PackageConflict(String),
    #[error("package `{0}` would derive from itself")]
    DerivesCycle(String),
    #[error("flow `{0}` connects an entity to itself")]
    SelfLoop(String),
    #[error("malformed graph: {0}")]
    Malformed(String),
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("source and sink must differ (both `{0}`)")]
    SameEndpoints(String),
    #[error("maximum path length must be at least 1")]
    ZeroMaxLen,
    #[error("`{id}` is a {found}, not a Person")]
    NotAPerson { id: String, found: EntityType },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExportError {
    #[error("path highlighting is only available for DOT output")]
    HighlightRequiresDot,
    #[error(transparent)]
    Graph(#[from] GraphError),
}
