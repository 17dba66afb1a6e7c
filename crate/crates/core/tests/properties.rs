use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use evocover::evolution::evolve_instance;
use evocover::exact::{collapsed_rwa_chain_k0, exact_cover_time, ChainOptions};
use evocover::graph::{build_graph, gen_lollipop, gen_random_threshold};
use evocover::walks::{rwa_step_distribution, step_rwa, step_rwd, WalkerState};
use evocover::{EvolutionRule, GraphInstance, HistoryWindow, StartPolicy};

proptest! {
    #[test]
    fn generated_graphs_validate(n in 2usize..30, threshold in 0.0f64..=1.0, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = gen_random_threshold(n, threshold, &mut rng).unwrap();
        let m = g.edge_count();
        prop_assert!(m >= n - 1 && m <= n * (n - 1) / 2);
        for i in 1..n {
            prop_assert!(g.has_edge(i - 1, i));
        }
        prop_assert_eq!(build_graph(n, g.edges()).unwrap(), g);
    }

    #[test]
    fn lollipop_shape(n in 3usize..40, frac in 0.0f64..1.0) {
        let k = 2 + ((n - 3) as f64 * frac) as usize;
        let g = gen_lollipop(n, k).unwrap();
        prop_assert_eq!(g.edge_count(), k * (k - 1) / 2 + (n - k));
        let s = g.degree_stats();
        prop_assert!(s.min_degree >= 1 && s.max_degree < n);
    }

    #[test]
    fn step_distribution_sums_to_one(n in 2usize..12, seed: u64, mask: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = gen_random_threshold(n, 0.5, &mut rng).unwrap();
        let m = g.edge_count();
        let mut inst = GraphInstance::all_dead(m);
        for e in 0..m {
            inst.set_alive(e, mask >> (e % 64) & 1 == 1);
        }
        for v in 0..n {
            let d = rwa_step_distribution(&g, &inst, v);
            prop_assert!((d.total() - 1.0).abs() < 1e-12);
            for &(u, _) in &d.entries {
                prop_assert!(u == v || g.has_edge(u, v));
            }
        }
    }

    #[test]
    fn trajectories_are_monotone(seed: u64, p in 0.05f64..1.0, rwd: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = gen_random_threshold(8, 0.3, &mut rng).unwrap();
        let rule = EvolutionRule::bernoulli(p).unwrap();
        let mut window = HistoryWindow::all_dead(&g, &rule);
        let mut s = WalkerState::new(8, 0);
        for _ in 0..300 {
            let next = evolve_instance(&g, &rule, &window, &mut rng).unwrap();
            window.push(next);
            let before = s.clone();
            if rwd {
                step_rwd(&mut s, &g, window.current(), &mut rng);
            } else {
                step_rwa(&mut s, &g, window.current(), &mut rng);
            }
            prop_assert_eq!(s.steps, before.steps + 1);
            prop_assert!(s.covered.contains(s.position));
            for v in before.covered.iter_ones() {
                prop_assert!(s.covered.contains(v));
            }
        }
    }

    #[test]
    fn reduced_chain_marginalizes_instances(seed: u64, n in 2usize..6, p in 0.1f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = gen_random_threshold(n, 0.4, &mut rng).unwrap();
        prop_assume!(g.edge_count() <= 8);
        let rule = EvolutionRule::bernoulli(p).unwrap();
        let full = exact_cover_time(&g, &rule, StartPolicy::SweepAll, &ChainOptions::default()).unwrap().value;
        let reduced = collapsed_rwa_chain_k0(&g, p, StartPolicy::SweepAll).unwrap();
        prop_assert!((full - reduced).abs() < 1e-9 * full.max(1.0));
    }
}
