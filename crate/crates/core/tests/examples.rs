//! Worked examples checked end to end through the public API.

use std::collections::HashMap;

use treemis::gather::{
    in_space_gather, naive_gather, point_to_root, root_trees_budgeted, ParentMap,
};
use treemis::graph::{graph_stats, load_edge_list, prufer, store_edge_list};
use treemis::mpc::build_system;
use treemis::oracle::{self, subtree_sizes};
use treemis::scalar::floor_words;
use treemis::shatter::{iterated_degree_reduce, shatter, subsample};
use treemis::{
    generate, mis_tree, GatherMode, GenKind, GenSpec, Graph, MpcConfig, NodeStatus, ShatterParams,
    System,
};

fn tree(kind: GenKind, n: usize, seed: u64) -> Graph {
    generate(&GenSpec::new(kind, n, seed)).unwrap()
}

fn roomy(g: &Graph) -> System {
    let mut sys = System::new(1 << 30, 8);
    sys.place(g).unwrap();
    sys
}

#[test]
fn random_tree_placement_fits() {
    let g = tree(GenKind::UniformRandomTree, 1000, 11);
    let cfg = MpcConfig::new(1000, 0.5, GatherMode::Naive, 0);
    assert_eq!(cfg.memory_per_machine(), 253);
    let sys = build_system(&cfg, &g).unwrap();
    let mut load = vec![0u64; sys.machines()];
    for v in g.nodes() {
        load[sys.machine_of(v)] += 1 + g.degree(v) as u64;
    }
    assert!(load.iter().all(|&w| w <= 253));
    assert_eq!(load, sys.resident());
}

#[test]
fn four_node_trees_are_uniform() {
    let mut freq: HashMap<Vec<u32>, u32> = HashMap::new();
    let trials = 16_000;
    for seed in 0..trials {
        let g = tree(GenKind::UniformRandomTree, 4, seed);
        *freq.entry(prufer::encode(&g).unwrap()).or_default() += 1;
    }
    assert_eq!(freq.len(), 16);
    // chi-square with 15 degrees of freedom; 99.9% quantile is 37.7
    let e = trials as f64 / 16.0;
    let chi: f64 = freq.values().map(|&o| (o as f64 - e).powi(2) / e).sum();
    assert!(chi < 37.7, "chi-square {chi}");
}

#[test]
fn edge_list_round_trip() {
    let g = tree(GenKind::UniformRandomTree, 1000, 7);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.txt");
    store_edge_list(&g, &p).unwrap();
    assert_eq!(load_edge_list(&p).unwrap(), g);
}

#[test]
fn nine_node_path_naive() {
    let g = tree(GenKind::Path, 9, 0);
    let mut sys = roomy(&g);
    let out = naive_gather(&g, &[true; 9], &mut sys).unwrap();
    assert!(out.rounds <= 8);
    assert_eq!(out.components.len(), 1);
    assert_eq!(out.components[0].leader, 0);
    assert!(out.components[0].virtual_edges <= 729);
    let oc = oracle::components(&g, &[true; 9]);
    assert_eq!((oc[0].leader, oc[0].diameter), (0, 8));
}

#[test]
fn rooted_path_of_sixteen() {
    let parent: Vec<u32> = (0..17u32).map(|v| v.saturating_sub(1)).collect();
    let pm = ParentMap::from_parents(parent);
    let mut sys = System::new(1 << 12, 2);
    sys.place_weights(&[3; 17]).unwrap();
    let out = point_to_root(&pm, &[3; 17], &mut sys).unwrap();
    assert!(out.rounds <= 5);
    assert!(out.root.iter().all(|&r| r == 0));
}

#[test]
fn hundred_paths_in_space() {
    let g = tree(
        GenKind::ForestOf {
            trees: 100,
            kind: Box::new(GenKind::Path),
        },
        800,
        0,
    );
    let mut sys = roomy(&g);
    let live = vec![true; 800];
    let out = in_space_gather(&g, &live, 7, &mut sys).unwrap();
    assert!(out.rooting.ledger.violations().is_empty());
    for t in 0..100u32 {
        let leaders: Vec<_> = (8 * t..8 * t + 8)
            .map(|v| out.map.leader_of(v).unwrap())
            .collect();
        assert!(leaders.iter().all(|&l| l == leaders[0] && l / 8 == t));
        assert_eq!(out.map.machine_of(8 * t), out.map.machine_of(8 * t + 7));
    }
}

/// A broom whose bristles are small subtrees: with budget `b` every
/// bristle hanging below the handle has `|T(v)| = 1 <= sqrt(b)`, so all of
/// them must leave in phase 0.
#[test]
fn small_subtrees_leave_in_their_phase() {
    let g = tree(
        GenKind::Broom {
            handle: 40,
            bristles: 60,
        },
        100,
        0,
    );
    let d = graph_stats(&g).unwrap().diameter as u64;
    let mut sys = roomy(&g);
    let live = vec![true; 100];
    let r = root_trees_budgeted(&g, &live, d.pow(3), d, &mut sys).unwrap();
    let phase = &r.parents.removal_phase;
    let parent = &r.parents.parent;
    for (i, pb) in r.ledger.phases.iter().enumerate() {
        let keep: Vec<bool> = phase.iter().map(|&p| p as usize >= i).collect();
        let size = subtree_sizes(parent, &keep);
        let limit = floor_words(&pb.budget).isqrt() as usize;
        for v in 0..100 {
            if keep[v] && size[v] <= limit {
                assert_eq!(phase[v] as usize, i, "node {v}, |T(v)| = {}", size[v]);
            }
        }
    }
    assert!(phase[40..].iter().all(|&p| p == 0));
}

#[test]
fn budget_growth_on_shallow_tree() {
    let g = tree(GenKind::BalancedBAry(3), 10_000, 0);
    let d = graph_stats(&g).unwrap().diameter as u64;
    assert!(d <= 40);
    let mut sys = System::new(1 << 40, 64);
    sys.place(&g).unwrap();
    let r = root_trees_budgeted(&g, &vec![true; 10_000], d.pow(3), d, &mut sys).unwrap();
    assert!(r.ledger.violations().is_empty());
    let phases = &r.ledger.phases;
    for w in phases.windows(2) {
        let (b0, b1) = (w[0].budget.clone(), w[1].budget.clone());
        // B1 >= B0^(3/2) / d, squared to stay rational
        let dd = treemis::Budget::from_integer(d.into());
        assert!(b1.clone() * b1 * &dd * &dd >= b0.clone() * &b0 * &b0);
    }
    let loglog = (10_000f64).log2().log2().ceil() as usize;
    assert!(phases.len() <= 2 * loglog + 4, "{} phases", phases.len());
}

#[test]
fn subsample_rate() {
    let live = vec![true; 100_000];
    let hits = subsample(&live, 0.5, 256, 9, 0)
        .iter()
        .filter(|&&s| s)
        .count() as f64;
    let sigma = (100_000.0f64 * (1.0 / 16.0) * (15.0 / 16.0)).sqrt();
    assert!((hits - 6250.0).abs() <= 4.0 * sigma, "{hits}");
}

#[test]
fn broom_degree_strictly_drops() {
    let n = 100_000;
    let g = tree(
        GenKind::Broom {
            handle: n - 1000,
            bristles: 1000,
        },
        n,
        0,
    );
    for seed in 0..5 {
        let mut cfg = MpcConfig::new(n, 0.5, GatherMode::Naive, seed);
        cfg.stop_exponent = 1.0;
        let params = ShatterParams::from_config(&cfg);
        let mut sys = build_system(&cfg, &g).unwrap();
        let mut st = vec![NodeStatus::Undecided; n];
        let trace = iterated_degree_reduce(&g, &mut st, &params, 1, &mut sys).unwrap();
        assert!(!trace.is_empty());
        for it in &trace {
            assert!(it.delta_after < it.delta_before, "{it:?}");
        }
    }
}

#[test]
fn moderate_degree_needs_one_pass() {
    let g = tree(GenKind::UniformRandomTree, 10_000, 4);
    assert!((g.max_degree() as f64) < 10f64);
    let r = mis_tree(&g, &MpcConfig::new(10_000, 0.5, GatherMode::InSpace, 4)).unwrap();
    assert_eq!(r.report.passes.len(), 1);
    assert_eq!(r.report.passes[0].ignored, 0);
    assert!(r.report.verdicts.pass());
}

#[test]
fn tiny_tree_is_mostly_decided_by_shattering() {
    let g = tree(GenKind::UniformRandomTree, 50, 2);
    let cfg = MpcConfig::new(50, 0.5, GatherMode::Naive, 2);
    let mut sys = build_system(&cfg, &g).unwrap();
    let mut st = vec![NodeStatus::Undecided; 50];
    let out = shatter(&g, &mut st, &ShatterParams::from_config(&cfg), 1, &mut sys).unwrap();
    assert!(out.trace.is_empty());
    assert!(out.max_component <= out.guard);
}

#[test]
fn large_random_trees_both_modes() {
    for seed in 0..20 {
        let g = tree(GenKind::UniformRandomTree, 100_000, seed);
        for mode in [GatherMode::Naive, GatherMode::InSpace] {
            let r = mis_tree(&g, &MpcConfig::new(100_000, 0.5, mode, seed)).unwrap();
            assert!(oracle::check_independent(&g, &r.mis));
            assert!(oracle::check_maximal(&g, &r.mis).unwrap());
            assert_eq!(r.report.totals.memory_violations, 0);
        }
    }
}

#[test]
fn greedy_and_oracle_basics() {
    let p4 = tree(GenKind::Path, 4, 0);
    assert_eq!(oracle::greedy_mis(&p4), vec![true, false, true, false]);
    let star = tree(GenKind::Star, 5, 0);
    assert_eq!(
        oracle::greedy_mis(&star),
        vec![true, false, false, false, false]
    );
    assert!(oracle::components(&p4, &[false; 4]).is_empty());
}
