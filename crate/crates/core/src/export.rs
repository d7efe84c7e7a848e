//! DOT and JSON rendering of graphs, path lists and reports.
//!
//! Field names and key order of the JSON documents are part of the public
//! contract; all output is deterministic for equal inputs.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::analysis::{ExposureReport, LineageTrace, Path, PathList, PathMode};
use crate::dot;
use crate::error::ExportError;
use crate::graph::{AttrValue, InstanceGraph};
use crate::validate::ValidationReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExportFormat {
    #[default]
    Dot,
    Json,
}

#[derive(Debug, Clone, Default)]
pub struct ExportOptions {
    pub format: ExportFormat,
    pub show_packages: bool,
    pub highlight_paths: Vec<Path>,
    pub pretty: bool,
}

const HIGHLIGHT_STYLE: &str = "color=red, penwidth=2";

pub fn export_graph(g: &InstanceGraph, opts: &ExportOptions) -> Result<String, ExportError> {
    match opts.format {
        ExportFormat::Dot => graph_to_dot(g, opts),
        ExportFormat::Json => {
            if !opts.highlight_paths.is_empty() {
                return Err(ExportError::HighlightRequiresDot);
            }
            g.check_well_formed()?;
            Ok(to_json(&graph_document(g), opts.pretty))
        }
    }
}

/// Entities become nodes labeled `id : CODE`, semantic relations solid
/// labeled edges and flows dashed edges labeled with the flow id (and the
/// package id when `show_packages` is set). Packages are never nodes.
pub fn graph_to_dot(g: &InstanceGraph, opts: &ExportOptions) -> Result<String, ExportError> {
    if opts.format != ExportFormat::Dot && !opts.highlight_paths.is_empty() {
        return Err(ExportError::HighlightRequiresDot);
    }
    g.check_well_formed()?;

    let highlighted_flows: HashSet<&str> = opts
        .highlight_paths
        .iter()
        .flat_map(|p| p.flows.iter().map(String::as_str))
        .collect();
    let highlighted_nodes: HashSet<&str> = opts
        .highlight_paths
        .iter()
        .flat_map(|p| p.nodes.iter().map(String::as_str))
        .collect();

    let mut nodes: Vec<String> = g
        .entities()
        .iter()
        .map(|e| {
            let mut label = format!("{} : {}", e.id, e.entity_type.code());
            if let Some(text) = e.label() {
                label.push('\n');
                label.push_str(text);
            }
            let mut attrs = vec![format!("label={}", dot::quote(&label))];
            if e.privacy_preserving() {
                attrs.push("peripheries=2".into());
            }
            if highlighted_nodes.contains(e.id.as_str()) {
                attrs.push(HIGHLIGHT_STYLE.into());
            }
            format!("{} [{}];", dot::quote(&e.id), attrs.join(", "))
        })
        .collect();
    nodes.sort();

    let mut edges = Vec::new();
    for r in g.relations() {
        edges.push(format!(
            "{} -> {} [label={}, style=solid];",
            dot::quote(&r.source),
            dot::quote(&r.target),
            dot::quote(r.relation.name())
        ));
    }
    for f in g.flows() {
        let label = if opts.show_packages {
            format!("{}\n{}", f.id, f.package)
        } else {
            f.id.clone()
        };
        let mut attrs = vec![
            format!("label={}", dot::quote(&label)),
            "style=dashed".into(),
        ];
        if highlighted_flows.contains(f.id.as_str()) {
            attrs.push(HIGHLIGHT_STYLE.into());
        }
        edges.push(format!(
            "{} -> {} [{}];",
            dot::quote(&f.source),
            dot::quote(&f.target),
            attrs.join(", ")
        ));
    }
    edges.sort();

    Ok(dot::digraph(g.name(), &nodes, &edges))
}

fn to_json<T: Serialize>(doc: &T, pretty: bool) -> String {
    let mut s = if pretty {
        serde_json::to_string_pretty(doc)
    } else {
        serde_json::to_string(doc)
    }
    .expect("report documents serialize infallibly");
    if pretty {
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct GraphDocument<'a> {
    scenario: &'a str,
    entities: Vec<EntityDoc<'a>>,
    packages: Vec<PackageDoc<'a>>,
    relations: Vec<RelationDoc<'a>>,
    flows: Vec<FlowDoc<'a>>,
}

#[derive(Serialize)]
struct EntityDoc<'a> {
    id: &'a str,
    #[serde(rename = "type")]
    entity_type: &'static str,
    attributes: &'a std::collections::BTreeMap<String, AttrValue>,
}

#[derive(Serialize)]
struct PackageDoc<'a> {
    id: &'a str,
    description: &'a str,
    items: &'a [String],
    derives: &'a [String],
}

#[derive(Serialize)]
struct RelationDoc<'a> {
    id: &'a str,
    relation: &'static str,
    source: &'a str,
    target: &'a str,
    attributes: &'a std::collections::BTreeMap<String, AttrValue>,
}

#[derive(Serialize)]
struct FlowDoc<'a> {
    id: &'a str,
    edge_type: String,
    source: &'a str,
    target: &'a str,
    package: &'a str,
}

fn graph_document(g: &InstanceGraph) -> GraphDocument<'_> {
    let mut entities: Vec<EntityDoc> = g
        .entities()
        .iter()
        .map(|e| EntityDoc {
            id: &e.id,
            entity_type: e.entity_type.code(),
            attributes: &e.attributes,
        })
        .collect();
    entities.sort_by_key(|e| e.id);
    let mut packages: Vec<PackageDoc> = g
        .packages()
        .iter()
        .map(|p| PackageDoc {
            id: &p.id,
            description: &p.description,
            items: &p.items,
            derives: &p.derives_from,
        })
        .collect();
    packages.sort_by_key(|p| p.id);
    let mut relations: Vec<RelationDoc> = g
        .relations()
        .iter()
        .map(|r| RelationDoc {
            id: &r.id,
            relation: r.relation.name(),
            source: &r.source,
            target: &r.target,
            attributes: &r.attributes,
        })
        .collect();
    relations.sort_by_key(|r| r.id);
    let mut flows: Vec<FlowDoc> = g
        .flows()
        .iter()
        .map(|f| FlowDoc {
            id: &f.id,
            edge_type: f.edge_type.to_string(),
            source: &f.source,
            target: &f.target,
            package: &f.package,
        })
        .collect();
    flows.sort_by_key(|f| f.id);
    GraphDocument {
        scenario: g.name(),
        entities,
        packages,
        relations,
        flows,
    }
}

/// A report that can be rendered as JSON.
pub enum Report<'a> {
    Validation(&'a ValidationReport),
    Exposure(&'a ExposureReport),
}

impl<'a> From<&'a ValidationReport> for Report<'a> {
    fn from(r: &'a ValidationReport) -> Self {
        Report::Validation(r)
    }
}

impl<'a> From<&'a ExposureReport> for Report<'a> {
    fn from(r: &'a ExposureReport) -> Self {
        Report::Exposure(r)
    }
}

#[derive(Serialize)]
struct ExposureDoc<'a> {
    person: &'a str,
    sinks: Vec<SinkDoc<'a>>,
    aggregation_points: Vec<AggregationDoc<'a>>,
}

#[derive(Serialize)]
struct SinkDoc<'a> {
    id: &'a str,
    #[serde(rename = "type")]
    entity_type: &'static str,
    paths: Vec<&'a [String]>,
    packages: &'a BTreeSet<String>,
}

#[derive(Serialize)]
struct AggregationDoc<'a> {
    id: &'a str,
    path_count: usize,
}

/// Compact single-line JSON (or pretty-printed with `pretty`).
pub fn report_to_json<'a>(report: impl Into<Report<'a>>, pretty: bool) -> String {
    match report.into() {
        Report::Validation(r) => to_json(r, pretty),
        Report::Exposure(r) => {
            let doc = ExposureDoc {
                person: &r.person,
                sinks: r
                    .sinks
                    .iter()
                    .map(|s| SinkDoc {
                        id: &s.id,
                        entity_type: s.entity_type.code(),
                        paths: s.paths.iter().map(|p| p.flows.as_slice()).collect(),
                        packages: &s.packages,
                    })
                    .collect(),
                aggregation_points: r
                    .aggregation_points
                    .iter()
                    .map(|a| AggregationDoc {
                        id: &a.id,
                        path_count: a.path_count,
                    })
                    .collect(),
            };
            to_json(&doc, pretty)
        }
    }
}

#[derive(Serialize)]
struct PathsDoc<'a> {
    source: &'a str,
    sink: &'a str,
    mode: PathMode,
    paths: PathsBody<'a>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum PathsBody<'a> {
    Strict(&'a [Path]),
    Lineage(&'a [LineageTrace]),
}

/// `{source, sink, mode, paths}` where each strict path is
/// `{flows, nodes}` and each lineage trace `{flows, packages}`.
pub fn paths_to_json(source: &str, sink: &str, paths: &PathList, pretty: bool) -> String {
    let (mode, body) = match paths {
        PathList::Strict(p) => (PathMode::Strict, PathsBody::Strict(p)),
        PathList::Lineage(t) => (PathMode::Lineage, PathsBody::Lineage(t)),
    };
    to_json(
        &PathsDoc {
            source,
            sink,
            mode,
            paths: body,
        },
        pretty,
    )
}
