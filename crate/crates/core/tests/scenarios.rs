//! Path analyses, validation and export over the two bundled scenarios.

use std::collections::BTreeSet;

use vdse::analysis::{lineage_traces, oracle, strict_paths};
use vdse::export::{self, ExportOptions};
use vdse::graph::{attrs, Attributes, FlowInstance};
use vdse::{
    builtin_schema, bundled, dsl, exposure_report, reachable_from, validate, FlowEdgeId,
    InstanceGraph, PathMode, PathOptions, RelationKind, ViolationCode,
};

fn seqs(g: &InstanceGraph, from: &str, to: &str) -> Vec<Vec<String>> {
    strict_paths(g, from, to, &PathOptions::default())
        .unwrap()
        .into_iter()
        .map(|p| p.flows)
        .collect()
}

fn set(paths: &[&[&str]]) -> BTreeSet<Vec<String>> {
    paths
        .iter()
        .map(|p| p.iter().map(|s| s.to_string()).collect())
        .collect()
}

fn ids(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

#[test]
fn speeding_driver_to_insurer() {
    let g = bundled::speeding();
    let got = seqs(&g, "driver", "insurer");
    assert_eq!(
        got,
        [
            vec!["e1_1", "e20_2"],
            vec!["e1_1", "e20_1", "e21_4"],
            vec!["e1_1", "e6_1", "e9_1"],
            vec!["e1_1", "e16_1", "e17_1", "e21_1", "e21_2", "e21_4"],
        ]
    );
}

#[test]
fn speeding_reachability() {
    let g = bundled::speeding();
    assert_eq!(
        reachable_from(&g, "driver").unwrap(),
        ids(&[
            "car",
            "dvla",
            "insurer",
            "tracker",
            "speed_camera",
            "camera_provider",
            "police"
        ])
    );
}

#[test]
fn speeding_exposure() {
    let g = bundled::speeding();
    let r = exposure_report(&g, "driver").unwrap();
    let insurer = r.sinks.iter().find(|s| s.id == "insurer").unwrap();
    assert_eq!(insurer.paths.len(), 4);
    assert!(r
        .aggregation_points
        .iter()
        .any(|a| a.id == "insurer" && a.path_count == 4));
    let json = export::report_to_json(&r, false);
    let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    let sinks = doc["sinks"].as_array().unwrap();
    let insurer = sinks.iter().find(|s| s["id"] == "insurer").unwrap();
    assert_eq!(insurer["paths"].as_array().unwrap().len(), 4);
    assert_eq!(insurer["type"], "SP");
}

#[test]
fn uber_passenger_and_driver_paths() {
    let g = bundled::uber();
    assert_eq!(
        seqs(&g, "passenger1", "driver")
            .into_iter()
            .collect::<BTreeSet<_>>(),
        set(&[&["e2_3", "e5_1", "e2_2"], &["e7_3", "e8_1"]])
    );
    assert_eq!(
        seqs(&g, "passenger1", "dashcam_cloud"),
        [vec!["e7_3", "e9_1"]]
    );
    assert_eq!(
        seqs(&g, "passenger2", "dashcam_cloud"),
        [vec!["e7_2", "e9_1"]]
    );
    assert_eq!(seqs(&g, "driver", "dashcam_cloud"), [vec!["e7_1", "e9_1"]]);
    assert!(seqs(&g, "passenger1", "uber").contains(&vec!["e2_3".into(), "e4_2".into()]));
}

#[test]
fn uber_driver_to_uber() {
    let g = bundled::uber();
    let got: BTreeSet<Vec<String>> = seqs(&g, "driver", "uber").into_iter().collect();
    assert_eq!(
        got,
        set(&[
            &["e2_1", "e4_1"],
            &["e2_1", "e5_2", "e4_2"],
            &["e1_1", "e3_1.rev", "e4_1"],
            &["e1_1", "e3_1.rev", "e5_2", "e4_2"],
        ])
    );
    let lineage = lineage_traces(
        &g,
        "driver",
        "uber",
        &PathOptions::default().mode(PathMode::Lineage),
    )
    .unwrap();
    let p2 = lineage
        .iter()
        .find(|t| t.flows == ["e1_1", "e2_1", "e4_1"])
        .expect("lineage mode reproduces the provenance-style path");
    assert_eq!(p2.packages, ["DP1_1", "DP2_1", "DP4_1"]);
}

#[test]
fn uber_reachability() {
    let g = bundled::uber();
    assert!(reachable_from(&g, "dashcam_cloud").unwrap().is_empty());
    assert_eq!(
        reachable_from(&g, "passenger2").unwrap(),
        ids(&["dashcam", "driver", "dashcam_cloud"])
    );
}

#[test]
fn uber_exposure_of_passenger1() {
    let g = bundled::uber();
    let r = exposure_report(&g, "passenger1").unwrap();
    assert!(r
        .aggregation_points
        .iter()
        .any(|a| a.id == "driver" && a.path_count == 2));
    for s in &r.sinks {
        assert!(!s.paths.is_empty());
    }
}

#[test]
fn oracle_agrees_on_bundled_scenarios() {
    for g in [bundled::uber(), bundled::speeding()] {
        for a in g.entities() {
            for b in g.entities() {
                if a.id == b.id {
                    continue;
                }
                for relay in [false, true] {
                    let opts = PathOptions::default().relay_through_persons(relay);
                    assert_eq!(
                        strict_paths(&g, &a.id, &b.id, &opts).unwrap(),
                        oracle::brute_force_paths(&g, &a.id, &b.id, opts.max_len, relay).unwrap(),
                        "{} -> {} relay={relay}",
                        a.id,
                        b.id
                    );
                }
            }
        }
    }
}

#[test]
fn bundled_scenarios_validate_cleanly() {
    for g in [bundled::uber(), bundled::speeding()] {
        let r = validate(builtin_schema(), &g);
        assert!(r.is_conformant(), "{}: {:?}", g.name(), r.violations);
    }
}

fn edge(n: u8) -> FlowEdgeId {
    FlowEdgeId::new(n).unwrap()
}

#[test]
fn injected_wrong_endpoint_flow() {
    let mut g = bundled::uber();
    g.add_flow("bad", edge(16), "driver", "dashcam", "DP7_1")
        .unwrap();
    let r = validate(builtin_schema(), &g);
    assert_eq!(
        r.codes().into_iter().collect::<Vec<_>>(),
        [ViolationCode::EndpointMismatch]
    );
    assert_eq!(r.violations[0].subject, "bad");
}

#[test]
fn reversed_speed_camera_flow() {
    let text = bundled::SPEEDING.replace(
        "flow e16_1: E16 car -> speed_camera",
        "flow e16_1: E16 speed_camera -> car",
    );
    let g = dsl::parse(&text).unwrap();
    let r = validate(builtin_schema(), &g);
    assert_eq!(r.violations.len(), 1);
    assert_eq!(r.violations[0].code, ViolationCode::DirectionViolation);
    assert_eq!(r.violations[0].subject, "e16_1");
}

#[test]
fn other_mutations() {
    // missing occupy role
    let text = bundled::UBER.replace(
        "relation driver_in_car: occupy driver -> car {role=\"driver\"}",
        "relation driver_in_car: occupy driver -> car",
    );
    let r = validate(builtin_schema(), &dsl::parse(&text).unwrap());
    assert_eq!(
        r.codes().into_iter().collect::<Vec<_>>(),
        [ViolationCode::RoleMissing]
    );

    // isPartOf cycle
    let mut g = bundled::uber();
    g.add_entity("ecu", vdse::EntityType::VehicleComponent, Attributes::new())
        .unwrap();
    g.add_entity("can", vdse::EntityType::VehicleComponent, Attributes::new())
        .unwrap();
    g.add_semantic_relation(
        "c1",
        RelationKind::IsPartOf,
        "ecu",
        "can",
        Attributes::new(),
    )
    .unwrap();
    g.add_semantic_relation(
        "c2",
        RelationKind::IsPartOf,
        "can",
        "ecu",
        Attributes::new(),
    )
    .unwrap();
    let r = validate(builtin_schema(), &g);
    assert_eq!(
        r.codes().into_iter().collect::<Vec<_>>(),
        [ViolationCode::PartOfCycle]
    );

    // missing package (only reachable for unchecked input)
    let mut parts = bundled::speeding().into_parts();
    parts.flows.push(FlowInstance {
        id: "e20_9".into(),
        edge_type: edge(20),
        source: "car".into(),
        target: "police".into(),
        package: "DP_unknown".into(),
    });
    let r = validate(
        builtin_schema(),
        &InstanceGraph::from_parts_unchecked(parts),
    );
    assert_eq!(
        r.codes().into_iter().collect::<Vec<_>>(),
        [ViolationCode::MissingPackage]
    );

    // derives cycle
    let mut parts = bundled::speeding().into_parts();
    for p in parts.packages.iter_mut() {
        if p.id == "DP1_1" {
            p.derives_from = vec!["DP7_1".into()];
        }
        if p.id == "DP7_1" {
            p.derives_from = vec!["DP1_1".into()];
        }
    }
    let r = validate(
        builtin_schema(),
        &InstanceGraph::from_parts_unchecked(parts),
    );
    assert_eq!(
        r.codes().into_iter().collect::<Vec<_>>(),
        [ViolationCode::DerivesCycle]
    );
}

#[test]
fn ownership_lint_on_bundled_scenario() {
    let mut g = bundled::speeding();
    g.add_flow("e9_2", edge(9), "insurer", "tracker", "DP9_1")
        .unwrap();
    let r = validate(builtin_schema(), &g);
    assert!(!r.has_errors());
    assert_eq!(r.warnings().count(), 1);
}

#[test]
fn uber_dot_export() {
    let g = bundled::uber();
    let dot = export::graph_to_dot(&g, &ExportOptions::default()).unwrap();
    assert!(dot.contains("\"dashcam\" -> \"driver\" [label=\"e8_1\", style=dashed];"));
    assert!(dot.contains("\"driver\" [label=\"driver : P\"];"));
    assert_eq!(
        dot,
        export::graph_to_dot(&g, &ExportOptions::default()).unwrap()
    );

    let with_packages = ExportOptions {
        show_packages: true,
        highlight_paths: strict_paths(&g, "passenger1", "driver", &PathOptions::default()).unwrap(),
        ..Default::default()
    };
    let dot = export::graph_to_dot(&g, &with_packages).unwrap();
    assert!(dot.contains(
        "\"dashcam\" -> \"driver\" [label=\"e8_1\\nDP8_9_1\", style=dashed, color=red, penwidth=2];"
    ));
}

#[test]
fn bundled_round_trips() {
    for (text, g) in [
        (bundled::UBER, bundled::uber()),
        (bundled::SPEEDING, bundled::speeding()),
    ] {
        let canonical = dsl::serialize(&g).unwrap();
        assert_eq!(dsl::parse(&canonical).unwrap(), g);
        assert_eq!(
            dsl::serialize(&dsl::parse(&canonical).unwrap()).unwrap(),
            canonical
        );
        assert_eq!(dsl::parse(text).unwrap(), dsl::parse(&canonical).unwrap());
    }
}

#[test]
fn categories_are_carried() {
    let g = bundled::speeding();
    assert_eq!(
        g.entity("dvla").unwrap().attributes.get("category"),
        attrs([("category", "Government body")]).get("category")
    );
}
