use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use evocover::bounds::rwa_k0_bounds;
use evocover::exact::{collapsed_rwa_hitting_times, exact_static_cover_time};
use evocover::graph::{gen_clique, gen_lollipop, gen_path, gen_random_threshold};
use evocover::montecarlo::run_trials;
use evocover::{estimate_cover_time, estimate_static_cover_time, EvolutionRule, ExperimentConfig, StartPolicy, Strategy};

fn within(mean: f64, se: f64, target: f64) -> bool {
    (mean - target).abs() <= 3.0 * se
}

#[test]
fn p2_half_averages_two() {
    let g = gen_path(2).unwrap();
    let cfg = ExperimentConfig::new(EvolutionRule::bernoulli(0.5).unwrap(), Strategy::Rwa)
        .trials(10_000)
        .seed(1);
    let e = estimate_cover_time(&g, &cfg).unwrap();
    assert!(within(e.mean, e.std_error, 2.0), "{e:?}");
}

#[test]
fn k3_static_averages_three() {
    let g = gen_clique(3).unwrap();
    let cfg = ExperimentConfig::new(EvolutionRule::bernoulli(1.0).unwrap(), Strategy::Rwa)
        .trials(10_000)
        .seed(2);
    let e = estimate_cover_time(&g, &cfg).unwrap();
    assert!(within(e.mean, e.std_error, 3.0), "{e:?}");
    let s = estimate_static_cover_time(&g, StartPolicy::Fixed(0), 10_000, 3).unwrap();
    assert!(within(s.mean, s.std_error, 3.0), "{s:?}");
}

#[test]
fn p3_static_from_middle_averages_five() {
    let g = gen_path(3).unwrap();
    let e = estimate_static_cover_time(&g, StartPolicy::Fixed(1), 10_000, 4).unwrap();
    assert!(within(e.mean, e.std_error, 5.0), "{e:?}");
}

#[test]
fn full_liveness_reproduces_static_walk_trial_by_trial() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let g = gen_random_threshold(9, 0.4, &mut rng).unwrap();
    let rwa = ExperimentConfig::new(EvolutionRule::bernoulli(1.0).unwrap(), Strategy::Rwa)
        .trials(500)
        .seed(21);
    let mut srw = rwa.clone();
    srw.strategy = Strategy::Srw;
    assert_eq!(run_trials(&g, &rwa, 3).unwrap(), run_trials(&g, &srw, 3).unwrap());
    let a = estimate_cover_time(&g, &rwa.clone().chaining(false)).unwrap();
    let b = estimate_static_cover_time(&g, StartPolicy::Fixed(0), 500, 21).unwrap();
    assert_eq!(a, b);
}

#[test]
fn standard_error_shrinks_with_root_trials() {
    let g = gen_lollipop(6, 4).unwrap();
    let base = ExperimentConfig::new(EvolutionRule::bernoulli(0.4).unwrap(), Strategy::Rwa).seed(8);
    let small = estimate_cover_time(&g, &base.clone().trials(1_000)).unwrap();
    let large = estimate_cover_time(&g, &base.trials(4_000)).unwrap();
    let ratio = small.std_error / large.std_error;
    assert!((ratio - 2.0).abs() <= 0.2 * 2.0, "ratio {ratio}");
}

#[test]
fn rwa_mean_respects_degree_bounds() {
    // Bounds from the exact static cover time of the same start node.
    for g in [gen_path(4).unwrap(), gen_lollipop(5, 3).unwrap(), gen_clique(4).unwrap()] {
        let stats = g.degree_stats();
        for p in [0.1, 0.3, 0.5, 0.9] {
            let static_from_0 = collapsed_rwa_hitting_times(&g, 1.0, StartPolicy::Fixed(0)).unwrap()[0].1;
            let b = rwa_k0_bounds(static_from_0, p, stats.min_degree, stats.max_degree).unwrap();
            let cfg = ExperimentConfig::new(EvolutionRule::bernoulli(p).unwrap(), Strategy::Rwa)
                .trials(4_000)
                .seed(31);
            let e = estimate_cover_time(&g, &cfg).unwrap();
            assert!(
                e.mean >= b.lower - 3.0 * e.std_error && e.mean <= b.upper + 3.0 * e.std_error,
                "p={p}: {} not in [{}, {}]",
                e.mean,
                b.lower,
                b.upper
            );
        }
    }
    assert!((exact_static_cover_time(&gen_clique(4).unwrap()).unwrap() - 1.0 - 1.5 - 3.0).abs() < 1e-9);
}
