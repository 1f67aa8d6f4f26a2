use proptest::prelude::*;

use treemis::gather::{assign_components, in_space_gather, leader_vector, naive_gather, Component};
use treemis::mpc::{build_system, Inbox, NodeState, Outbox};
use treemis::oracle;
use treemis::rng::mix;
use treemis::shatter::{degree_reduce_step, local_shatter, max_live_degree, measure, subsample};
use treemis::{
    generate, mis_tree, GatherMode, GenKind, GenSpec, Graph, MpcConfig, NodeStatus, ShatterParams,
    System,
};

fn kind_strategy() -> impl Strategy<Value = GenKind> {
    prop_oneof![
        Just(GenKind::UniformRandomTree),
        Just(GenKind::Path),
        Just(GenKind::Star),
        (2usize..6).prop_map(GenKind::BalancedBAry),
        (3usize..40).prop_map(GenKind::StarOfStars),
        (1usize..30).prop_map(|h| GenKind::Broom {
            handle: h,
            bristles: 0
        }),
        (2usize..6).prop_map(|t| GenKind::ForestOf {
            trees: t,
            kind: Box::new(GenKind::UniformRandomTree),
        }),
    ]
}

fn mode_strategy() -> impl Strategy<Value = GatherMode> {
    prop_oneof![Just(GatherMode::Naive), Just(GatherMode::InSpace)]
}

fn build(kind: GenKind, n: usize, seed: u64) -> Graph {
    let kind = match kind {
        GenKind::StarOfStars(f) => GenKind::StarOfStars(f.clamp(1, n.saturating_sub(1).max(1))),
        GenKind::Broom { handle, bristles } => GenKind::Broom {
            handle: handle.min(n),
            bristles,
        },
        GenKind::ForestOf { trees, kind } => GenKind::ForestOf {
            trees: trees.min(n),
            kind,
        },
        k => k,
    };
    generate(&GenSpec::new(kind.fit(n), n, seed)).unwrap()
}

fn statuses_sound(g: &Graph, st: &[NodeStatus]) -> Result<(), String> {
    for (u, v) in g.edges() {
        if st[u as usize] == NodeStatus::InMIS && st[v as usize] == NodeStatus::InMIS {
            return Err(format!("adjacent InMIS nodes {u} and {v}"));
        }
    }
    for v in g.nodes() {
        if st[v as usize] == NodeStatus::Removed
            && !g
                .neighbors(v)
                .iter()
                .any(|&u| st[u as usize] == NodeStatus::InMIS)
        {
            return Err(format!("removed node {v} has no InMIS neighbor"));
        }
    }
    Ok(())
}

fn random_mask(n: usize, seed: u64, keep_of_4: u64) -> Vec<bool> {
    (0..n as u64)
        .map(|v| mix(seed, v) % 4 < keep_of_4)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pipeline_output_is_a_valid_mis(
        kind in kind_strategy(),
        n in 1usize..3000,
        seed in any::<u64>(),
        mode in mode_strategy(),
    ) {
        let g = build(kind, n, seed);
        let r = mis_tree(&g, &MpcConfig::new(n, 0.5, mode, seed)).unwrap();
        prop_assert!(oracle::check_independent(&g, &r.mis));
        prop_assert!(oracle::check_maximal(&g, &r.mis).unwrap());
        prop_assert!(r.status.iter().all(|s| matches!(s, NodeStatus::InMIS | NodeStatus::Removed)));
        statuses_sound(&g, &r.status).map_err(TestCaseError::fail)?;
        let s = r.report.config.s;
        prop_assert_eq!(r.report.totals.memory_violations, 0);
        prop_assert!(r.report.phases.iter().all(|p| p.max_traffic <= s && p.max_resident <= s));
        prop_assert!(r.report.passes.len() as u64 <= r.report.config.pass_cap);
    }

    #[test]
    fn aggressive_schedule_stays_sound(
        n in 200usize..4000,
        fanout in 10usize..60,
        seed in any::<u64>(),
        mode in mode_strategy(),
    ) {
        // few local iterations and a low degree floor: degree reduction and
        // post-shatter gathering both run
        let g = build(GenKind::StarOfStars(fanout), n, seed);
        let mut cfg = MpcConfig::new(n, 1.0, mode, seed);
        cfg.stop_exponent = 1.0;
        cfg.c_gh = 1;
        cfg.c0 = 8;
        let r = mis_tree(&g, &cfg).unwrap();
        prop_assert!(r.report.verdicts.pass(), "{:?}", r.report.verdicts);
        prop_assert_eq!(r.report.totals.budget_violations, 0);
    }

    #[test]
    fn runs_are_deterministic_across_thread_counts(
        kind in kind_strategy(),
        n in 1usize..2000,
        seed in any::<u64>(),
        mode in mode_strategy(),
    ) {
        let g = build(kind, n, seed);
        let cfg = MpcConfig::new(n, 0.5, mode, seed);
        let a = mis_tree(&g, &cfg).unwrap().report.to_json();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| mis_tree(&g, &cfg).unwrap().report.to_json());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn naive_leaders_match_oracle(n in 1usize..1500, seed in any::<u64>(), keep in 1u64..5) {
        let g = build(GenKind::UniformRandomTree, n, seed);
        let live = random_mask(n, seed, keep);
        let mut sys = System::new(1 << 30, 4);
        sys.place(&g).unwrap();
        let out = naive_gather(&g, &live, &mut sys).unwrap();
        let leaders = leader_vector(&out.map);
        let comps = oracle::components(&g, &live);
        prop_assert_eq!(comps.len(), out.map.len());
        for c in &comps {
            for &v in &c.members {
                prop_assert_eq!(leaders[v as usize], c.leader);
            }
        }
        for st in &out.components {
            prop_assert!(st.virtual_edges <= st.size.pow(3));
        }
    }

    #[test]
    fn in_space_roots_match_oracle_components(n in 1usize..500, seed in any::<u64>(), keep in 1u64..5) {
        let g = build(GenKind::UniformRandomTree, n, seed);
        let live = random_mask(n, seed, keep);
        let d = measure(&g, &live).max_diam.max(1);
        let mut sys = System::new(1 << 34, 8);
        sys.place(&g).unwrap();
        let out = in_space_gather(&g, &live, d, &mut sys).unwrap();
        prop_assert!(out.rooting.ledger.violations().is_empty());
        let leaders = leader_vector(&out.map);
        for c in oracle::components(&g, &live) {
            let l = leaders[c.members[0] as usize];
            prop_assert!(c.members.contains(&l));
            for &v in &c.members {
                prop_assert_eq!(leaders[v as usize], l);
                prop_assert_eq!(out.map.machine_of(v), out.map.machine_of(l));
            }
        }
        // every phase removes at least the leaves present at its start
        let phase = &out.rooting.parents.removal_phase;
        for i in 0..out.rooting.ledger.phases.len() as u32 {
            for v in g.nodes().filter(|&v| live[v as usize] && phase[v as usize] >= i) {
                let alive_nbrs = g
                    .neighbors(v)
                    .iter()
                    .filter(|&&u| live[u as usize] && phase[u as usize] >= i)
                    .count();
                if alive_nbrs <= 1 {
                    prop_assert_eq!(phase[v as usize], i);
                }
            }
        }
    }

    #[test]
    fn unsampled_nodes_see_distinct_components(n in 2usize..1000, seed in any::<u64>(), fanout in 2usize..30) {
        let g = build(GenKind::StarOfStars(fanout), n, seed);
        let live = vec![true; n];
        let sampled = subsample(&live, 0.3, g.max_degree() as u64, seed, 0);
        let mut comp = vec![u32::MAX; n];
        for (i, c) in oracle::components(&g, &sampled).iter().enumerate() {
            for &v in &c.members {
                comp[v as usize] = i as u32;
            }
        }
        for v in g.nodes().filter(|&v| !sampled[v as usize]) {
            let mut seen: Vec<u32> = g
                .neighbors(v)
                .iter()
                .filter(|&&u| sampled[u as usize])
                .map(|&u| comp[u as usize])
                .collect();
            let k = seen.len();
            seen.sort_unstable();
            seen.dedup();
            prop_assert_eq!(seen.len(), k);
        }
    }

    #[test]
    fn degree_step_respects_guards(n in 500usize..5000, fanout in 10usize..70, seed in any::<u64>(), mode in mode_strategy()) {
        let g = build(GenKind::StarOfStars(fanout), n, seed);
        let mut cfg = MpcConfig::new(n, 0.5, mode, seed);
        cfg.stop_exponent = 1.0;
        let params = ShatterParams::from_config(&cfg);
        let mut sys = build_system(&cfg, &g).unwrap();
        let mut st = vec![NodeStatus::Undecided; n];
        let d = max_live_degree(&g, &st, &mut sys);
        let rec = degree_reduce_step(&g, &mut st, &params, 0, d, &mut sys).unwrap();
        prop_assert!(rec.max_comp_size <= params.size_guard);
        prop_assert!(rec.max_comp_diam <= params.diam_guard(d));
        prop_assert!(rec.delta_after <= rec.delta_before);
        statuses_sound(&g, &st).map_err(TestCaseError::fail)?;
        let s = sys.memory();
        prop_assert!(sys.stats().iter().all(|r| r.max_traffic <= s && r.max_resident <= s));
    }

    #[test]
    fn local_shatter_keeps_statuses_sound(kind in kind_strategy(), n in 1usize..3000, seed in any::<u64>()) {
        let g = build(kind, n, seed);
        let cfg = MpcConfig::new(n, 0.5, GatherMode::Naive, seed);
        let params = ShatterParams::from_config(&cfg);
        let mut sys = System::new(1 << 24, 4);
        sys.place(&g).unwrap();
        let mut st = vec![NodeStatus::Undecided; n];
        local_shatter(&g, &mut st, &params, seed, &mut sys).unwrap();
        statuses_sound(&g, &st).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn ffd_fits_when_there_is_slack(sizes in prop::collection::vec(1u64..=25, 1..100), m in 4usize..60) {
        let s = 50u64;
        let total: u64 = sizes.iter().sum();
        // every item is at most s/2, so the slack condition is a plain count
        prop_assume!(total <= (m as u64) * (s - sizes.iter().max().unwrap()));
        let n: usize = sizes.len();
        let mut sys = System::new(s, m);
        sys.place_weights(&sizes).unwrap();
        let comps: Vec<Component> = sizes
            .iter()
            .enumerate()
            .map(|(i, &w)| Component { leader: i as u32, members: vec![i as u32], words: w })
            .collect();
        let map = assign_components(n, comps, &sys).unwrap();
        let mut load = vec![0u64; m];
        for (c, machine) in map.components() {
            load[machine] += c.words;
        }
        prop_assert!(load.iter().all(|&w| w <= s));
    }

    #[test]
    fn shuffle_collapses_duplicates(n in 2usize..200, copies in 1usize..5) {
        struct St(u64);
        impl NodeState for St {
            fn resident_words(&self) -> u64 {
                1
            }
        }
        let g = build(GenKind::Star, n, 0);
        let mut sys = System::new(1 << 20, 2);
        sys.place(&g).unwrap();
        let mut states: Vec<St> = (0..n).map(|_| St(0)).collect();
        let stats = sys
            .exec_round(
                &mut states,
                |v, _, out: &mut Outbox<u64>| {
                    if v != 0 {
                        for _ in 0..copies {
                            out.send(0, 7);
                        }
                        out.send(0, 1_000 + v as u64);
                    }
                },
                |_, s, inbox: Inbox<'_, u64>| s.0 = inbox.len() as u64,
            )
            .unwrap();
        prop_assert_eq!(states[0].0, n as u64);
        prop_assert_eq!(stats.max_recv, n as u64);
    }
}
