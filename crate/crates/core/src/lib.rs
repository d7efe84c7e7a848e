//! Typed graph model of vehicle-centric data sharing.
//!
//! A fixed [`schema::TypeGraph`] describes which entity types exist and
//! which data-flow edge types (`E1`..`E21`) may connect them. Concrete
//! scenarios are [`graph::InstanceGraph`]s, usually written in the `.vdse`
//! scenario language ([`dsl`]). On top of that the crate checks
//! conformance ([`validate`]), enumerates data-flow paths and exposure
//! ([`analysis`]) and renders DOT/JSON output ([`export`]).

pub mod analysis;
pub mod bundled;
mod dot;
pub mod dsl;
pub mod error;
pub mod export;
pub mod graph;
pub mod schema;
pub mod validate;

pub use analysis::{
    enumerate_paths, exposure_report, reachable_from, ExposureReport, LineageTrace, Path, PathList,
    PathMode, PathOptions,
};
pub use error::{AnalysisError, ExportError, GraphError, IdKind, SchemaError};
pub use graph::{AttrValue, Attributes, DataPackage, EntityInstance, FlowInstance, InstanceGraph};
pub use schema::{builtin_schema, EntityType, FlowEdgeId, RelationKind, TypeGraph};
pub use validate::{validate, Severity, ValidationReport, Violation, ViolationCode};
