use proptest::prelude::*;

use congest_mincut::driver::{gamma_sweep, outer_schedule, solve_epsilon_prime, EpsilonSchedule};
use congest_mincut::graph::{generate, GraphModel};
use congest_mincut::mst::{greedy_tree_packing, EdgeLoad};
use congest_mincut::oracle::{brute_force_min_cut, expected_y, stoer_wagner};
use congest_mincut::sim::{Simulator, Topology};
use congest_mincut::tree::build_bfs;
use congest_mincut::{cut_weight, NetworkConfig, Seed, WeightedMultigraph};

fn random_graph(n: usize, extra: usize, w: u64, seed: u64) -> WeightedMultigraph {
    let room = n * (n - 1) / 2 - (n - 1);
    let model = GraphModel::RandomConnected { n, extra_edges: extra.min(room), max_edge_weight: w.min((n * n) as u64) };
    generate(&model, Seed(seed)).unwrap().graph
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stoer_wagner_matches_brute_force(n in 2usize..=10, extra in 0usize..30, w in 1u64..6, seed: u64) {
        let g = random_graph(n, extra, w, seed);
        let sw = stoer_wagner(&g).unwrap();
        let bf = brute_force_min_cut(&g).unwrap();
        prop_assert_eq!(sw.weight, bf.weight);
        prop_assert_eq!(cut_weight(&g, &sw.side).unwrap(), sw.weight);
        prop_assert_eq!(cut_weight(&g, &sw.side.complement()).unwrap(), sw.weight);
    }

    #[test]
    fn expected_y_grows_with_weight_and_shrinks_with_kappa(w in 1u64..200, kappa in 1.0f64..100.0) {
        let y = expected_y(w, kappa);
        prop_assert!((0.0..=1.0).contains(&y));
        prop_assert!(expected_y(w + 1, kappa) >= y);
        prop_assert!(expected_y(w, kappa * 1.5) <= y);
    }

    #[test]
    fn epsilon_prime_solves_its_equation(a in 1e-3f64..=1.0, b in 1e-3f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (x, y) = (solve_epsilon_prime(lo).unwrap(), solve_epsilon_prime(hi).unwrap());
        prop_assert!(x > 0.0 && x <= lo / 4.0);
        prop_assert!(((1.0 + x).powi(3) / (1.0 - x) - (1.0 + lo)).abs() <= 1e-12);
        prop_assert!(x <= y);
    }

    #[test]
    fn sweeps_cover_every_iteration(eps in 0.01f64..=1.0, n in 2usize..5000, w in 1u64..100_000) {
        let sched = EpsilonSchedule::new(eps, n).unwrap();
        let e = sched.epsilon_prime;
        let steps = outer_schedule(n, w, &sched);
        prop_assert_eq!(steps[0].x_lo, 1.0);
        prop_assert!(steps.last().unwrap().x_hi > n as f64 * w as f64);
        for pair in steps.windows(2) {
            prop_assert_eq!(pair[1].x_lo, pair[0].x_hi);
            prop_assert_eq!(pair[1].p * 2.0, pair[0].p);
        }
        for step in &steps {
            let gammas = gamma_sweep(step.x_lo, step.x_hi, e);
            let stop = (1.0 + e) / (1.0 - e) * step.x_hi;
            prop_assert_eq!(gammas[0], step.x_lo);
            prop_assert!(*gammas.last().unwrap() <= stop);
            prop_assert!(gammas.last().unwrap() * (1.0 + e) > stop);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn packing_conserves_load(n in 2usize..40, extra in 0usize..60, w in 1u64..4, k in 1usize..8, seed: u64) {
        let g = random_graph(n, extra, w, seed);
        let topo = Topology::new(&g);
        let mut sim = Simulator::new(&topo, NetworkConfig::for_n(n)).unwrap();
        let (bfs, _) = build_bfs(&mut sim).unwrap();
        let mults: Vec<u64> = g.edges().iter().map(|e| e.w).collect();
        let (packing, _) = greedy_tree_packing(&mut sim, &bfs, &mults, k).unwrap();
        prop_assert_eq!(packing.loads.total(), (k * (n - 1)) as u64);
        let mut replay = EdgeLoad::new(&mults);
        for recs in &packing.records {
            prop_assert_eq!(recs.len(), n - 1);
            replay.add_tree(recs);
        }
        prop_assert_eq!(replay, packing.loads);
    }
}
