//! Randomised invariants: oracle equivalence, path shape, monotonicity,
//! canonical text round trips and order independence.

mod common;

use std::collections::HashSet;

use proptest::prelude::*;

use vdse::analysis::{oracle, strict_paths, PathOptions};
use vdse::{builtin_schema, dsl, exposure_report, reachable_from, validate, EntityType};

use common::{endpoint_pairs, random_graph, shuffled};

#[test]
fn oracle_equivalence_on_seeded_graphs() {
    for seed in 0..200u64 {
        let g = random_graph(seed, 12, 30);
        for (a, b) in endpoint_pairs(&g) {
            for relay in [false, true] {
                let opts = PathOptions::default()
                    .relay_through_persons(relay)
                    .max_len(6);
                let fast = strict_paths(&g, &a, &b, &opts).unwrap();
                let slow = oracle::brute_force_paths(&g, &a, &b, 6, relay).unwrap();
                assert_eq!(fast, slow, "seed {seed}: {a} -> {b} relay={relay}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn paths_chain_and_are_simple(seed in any::<u64>()) {
        let g = random_graph(seed, 10, 24);
        for (a, b) in endpoint_pairs(&g) {
            for p in strict_paths(&g, &a, &b, &PathOptions::default()).unwrap() {
                prop_assert_eq!(p.nodes.len(), p.flows.len() + 1);
                prop_assert_eq!(&p.nodes[0], &a);
                prop_assert_eq!(p.nodes.last().unwrap(), &b);
                let distinct: HashSet<&String> = p.nodes.iter().collect();
                prop_assert_eq!(distinct.len(), p.nodes.len());
                for (k, fid) in p.flows.iter().enumerate() {
                    let f = g.flow(fid).unwrap();
                    prop_assert_eq!(&f.source, &p.nodes[k]);
                    prop_assert_eq!(&f.target, &p.nodes[k + 1]);
                }
                for n in &p.nodes[1..p.nodes.len() - 1] {
                    prop_assert_ne!(g.entity(n).unwrap().entity_type, EntityType::Person);
                }
            }
        }
    }

    #[test]
    fn max_len_is_monotone(seed in any::<u64>(), k in 1usize..6) {
        let g = random_graph(seed, 8, 20);
        for (a, b) in endpoint_pairs(&g) {
            let short = strict_paths(&g, &a, &b, &PathOptions::default().max_len(k)).unwrap();
            let long = strict_paths(&g, &a, &b, &PathOptions::default().max_len(k + 1)).unwrap();
            let kept: Vec<_> = long.iter().filter(|p| p.len() <= k).cloned().collect();
            prop_assert_eq!(short, kept);
        }
    }

    #[test]
    fn removing_a_flow_never_adds_paths(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let g = random_graph(seed, 8, 20);
        prop_assume!(!g.flows().is_empty());
        let victim = g.flows()[pick.index(g.flows().len())].id.clone();
        let mut parts = g.clone().into_parts();
        parts.flows.retain(|f| f.id != victim);
        let smaller = vdse::InstanceGraph::from_parts_unchecked(parts);
        for (a, b) in endpoint_pairs(&g) {
            let before: HashSet<_> = strict_paths(&g, &a, &b, &PathOptions::default()).unwrap().into_iter().collect();
            let after = strict_paths(&smaller, &a, &b, &PathOptions::default()).unwrap();
            for p in after {
                prop_assert!(before.contains(&p));
                prop_assert!(!p.flows.contains(&victim));
            }
        }
    }

    #[test]
    fn parse_inverts_serialize(seed in any::<u64>()) {
        let g = random_graph(seed, 12, 30);
        let text = dsl::serialize(&g).unwrap();
        let back = dsl::parse(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(dsl::serialize(&back).unwrap(), text);
    }

    #[test]
    fn results_ignore_statement_order(seed in any::<u64>(), shuffle_seed in any::<u64>()) {
        let g = random_graph(seed, 10, 24);
        let h = shuffled(&g, shuffle_seed);
        prop_assert_eq!(&g, &h);
        prop_assert_eq!(dsl::serialize(&g).unwrap(), dsl::serialize(&h).unwrap());
        prop_assert_eq!(validate(builtin_schema(), &g), validate(builtin_schema(), &h));
        for e in g.entities() {
            prop_assert_eq!(reachable_from(&g, &e.id).unwrap(), reachable_from(&h, &e.id).unwrap());
            if e.entity_type == EntityType::Person {
                prop_assert_eq!(exposure_report(&g, &e.id).unwrap(), exposure_report(&h, &e.id).unwrap());
            }
        }
        for (a, b) in endpoint_pairs(&g) {
            prop_assert_eq!(
                strict_paths(&g, &a, &b, &PathOptions::default()).unwrap(),
                strict_paths(&h, &a, &b, &PathOptions::default()).unwrap()
            );
        }
    }

    #[test]
    fn reachability_matches_path_existence(seed in any::<u64>()) {
        let g = random_graph(seed, 8, 20);
        for e in g.entities() {
            let reach = reachable_from(&g, &e.id).unwrap();
            for other in g.entities() {
                if other.id == e.id {
                    continue;
                }
                let has_path = !oracle::brute_force_paths(&g, &e.id, &other.id, g.entities().len(), false)
                    .unwrap()
                    .is_empty();
                prop_assert_eq!(reach.contains(&other.id), has_path);
            }
        }
    }

    #[test]
    fn builder_graphs_never_report_dangling_or_duplicates(seed in any::<u64>()) {
        let g = random_graph(seed, 12, 30);
        let r = validate(builtin_schema(), &g);
        for v in &r.violations {
            prop_assert!(!matches!(
                v.code,
                vdse::ViolationCode::DanglingRef | vdse::ViolationCode::DuplicateId
            ));
        }
    }

    #[test]
    fn parse_errors_point_inside_input(src in "[a-zA-Z0-9 :\\->{}\\[\\]\"=,.#\n]{0,80}") {
        let text = format!("scenario \"t\"\n{src}");
        if let Err(e) = dsl::parse(&text) {
            let lines: Vec<&str> = text.split('\n').collect();
            prop_assert!(e.line >= 1 && e.line <= lines.len());
            prop_assert!(e.column >= 1 && e.column <= lines[e.line - 1].chars().count() + 1);
            prop_assert_eq!(e.snippet.as_str(), lines[e.line - 1]);
        }
    }
}
