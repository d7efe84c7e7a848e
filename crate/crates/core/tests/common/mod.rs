//! Seeded random scenario graphs for property and oracle tests.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vdse::graph::{attrs, AttrValue, Attributes, DataPackage, GraphParts};
use vdse::{EntityType, FlowEdgeId, InstanceGraph, RelationKind};

pub const NODE_TYPES: [EntityType; 13] = [
    EntityType::Person,
    EntityType::Vehicle,
    EntityType::VehicleComponent,
    EntityType::AdditionalVehicleSensor,
    EntityType::ChargingFacility,
    EntityType::CommunicationInfrastructure,
    EntityType::NetworkInfrastructure,
    EntityType::RoadSideUnit,
    EntityType::DigitalAsset,
    EntityType::Organisation,
    EntityType::GovernmentBody,
    EntityType::ServiceProvider,
    EntityType::TrafficMonitoringSensor,
];

const TEXT_SAMPLES: [&str; 5] = [
    "plain",
    "with \"quotes\"",
    "back\\slash",
    "multi\nline",
    "comma, [bracket]",
];

/// A well-formed graph with at most `max_entities` entities and
/// `max_flows` flows (each `<->` exchange counts as two).
pub fn random_graph(seed: u64, max_entities: usize, max_flows: usize) -> InstanceGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = InstanceGraph::new(format!("random {seed}")).unwrap();

    let n = rng.gen_range(2..=max_entities);
    for i in 0..n {
        let ty = *NODE_TYPES.choose(&mut rng).unwrap();
        let mut a = Attributes::new();
        if rng.gen_bool(0.2) {
            a.insert("privacy_preserving".into(), AttrValue::Bool(rng.gen()));
        }
        if rng.gen_bool(0.2) {
            a.insert(
                "label".into(),
                AttrValue::Text(TEXT_SAMPLES.choose(&mut rng).unwrap().to_string()),
            );
        }
        if (ty == EntityType::Vehicle || ty == EntityType::VehicleComponent) && rng.gen_bool(0.3) {
            a.insert(
                "static".into(),
                AttrValue::List(vec!["VIN".into(), "make".into()]),
            );
        }
        if ty.is_a(EntityType::Organisation) && rng.gen_bool(0.3) {
            a.insert("category".into(), AttrValue::Text("Dealer".into()));
        }
        g.add_entity(&format!("n{i}"), ty, a).unwrap();
    }

    let packages = rng.gen_range(1..=5);
    for i in 0..packages {
        let mut p = DataPackage::new(format!("d{i}"), *TEXT_SAMPLES.choose(&mut rng).unwrap());
        if rng.gen_bool(0.3) {
            p.items = vec!["item a".into(), "item b".into()];
        }
        if i > 0 && rng.gen_bool(0.4) {
            p.derives_from = vec![format!("d{}", rng.gen_range(0..i))];
        }
        g.add_package(p).unwrap();
    }

    let target_flows = rng.gen_range(0..=max_flows);
    let mut made = 0;
    let mut next_id = 0;
    while made < target_flows {
        let s = rng.gen_range(0..n);
        let mut t = rng.gen_range(0..n);
        if s == t {
            t = (t + 1) % n;
        }
        let edge = FlowEdgeId::new(rng.gen_range(1..=21)).unwrap();
        let pkg = format!("d{}", rng.gen_range(0..packages));
        let (src, dst) = (format!("n{s}"), format!("n{t}"));
        if made + 2 <= target_flows && rng.gen_bool(0.15) {
            g.add_exchange(&format!("x{next_id}"), edge, &src, &dst, &pkg)
                .unwrap();
            made += 2;
        } else {
            g.add_flow(&format!("f{next_id}"), edge, &src, &dst, &pkg)
                .unwrap();
            made += 1;
        }
        next_id += 1;
    }

    for i in 0..rng.gen_range(0..4) {
        let s = format!("n{}", rng.gen_range(0..n));
        let t = format!("n{}", rng.gen_range(0..n));
        let kind = *RelationKind::ALL.choose(&mut rng).unwrap();
        let a = if kind == RelationKind::Occupy {
            attrs([("role", "passenger")])
        } else {
            Attributes::new()
        };
        g.add_semantic_relation(&format!("r{i}"), kind, &s, &t, a)
            .unwrap();
    }
    g
}

/// The same graph with entities, relations and flows inserted in a
/// shuffled order. Packages keep their order so derivations stay valid.
pub fn shuffled(g: &InstanceGraph, seed: u64) -> InstanceGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts: GraphParts = g.clone().into_parts();
    parts.entities.shuffle(&mut rng);
    parts.relations.shuffle(&mut rng);
    parts.flows.shuffle(&mut rng);
    InstanceGraph::from_parts_unchecked(parts)
}

/// Every ordered pair of distinct entity ids.
pub fn endpoint_pairs(g: &InstanceGraph) -> Vec<(String, String)> {
    let ids: Vec<&str> = g.entities().iter().map(|e| e.id.as_str()).collect();
    let mut out = Vec::new();
    for a in &ids {
        for b in &ids {
            if a != b {
                out.push((a.to_string(), b.to_string()));
            }
        }
    }
    out
}
