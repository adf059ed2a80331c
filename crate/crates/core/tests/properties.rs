//! Cross-validation of the library against the independent oracles in
//! `common`, plus statistical invariants of the generators.

mod common;

use std::sync::Arc;

use boss_core::{
    boss, confusion, consistent_extension, covariance_from_data, cpdag_equal, d_connected,
    er_dag, find_compelled, sample_sem, BicScore, Dag, GstForest, LocalScore, NoiseFamily,
    OracleScore, Pdag, Permutation, SearchConfig,
};
use common::{dsep_moral, dsep_signature, grow_shrink_direct, mec_cpdag, random_order_dag};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniformly random topological order of `g`.
fn random_topological_order<R: Rng + ?Sized>(g: &Dag, rng: &mut R) -> Vec<usize> {
    let p = g.num_vars();
    let mut missing: Vec<usize> = (0..p).map(|v| g.parents(v).len()).collect();
    let mut ready: Vec<usize> = (0..p).filter(|&v| missing[v] == 0).collect();
    let mut order = Vec::with_capacity(p);
    while !ready.is_empty() {
        let k = rng.gen_range(0..ready.len());
        let v = ready.swap_remove(k);
        order.push(v);
        for &c in g.children(v) {
            missing[c] -= 1;
            if missing[c] == 0 {
                ready.push(c);
            }
        }
    }
    order
}

fn relabel(g: &Pdag, map: &[usize]) -> Pdag {
    let mut out = Pdag::new(g.num_vars());
    for (u, v) in g.directed_edges() {
        out.add_directed(map[u], map[v]).unwrap();
    }
    for (a, b) in g.undirected_edges() {
        out.add_undirected(map[a], map[b]).unwrap();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reachability_d_connection_agrees_with_moralization(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = rng.gen_range(2..=6);
        let prob = rng.gen_range(0.2..0.8);
        let g = random_order_dag(p, prob, &mut rng);
        for x in 0..p {
            for y in x + 1..p {
                for mask in 0u32..(1 << p) {
                    if mask & (1 << x) != 0 || mask & (1 << y) != 0 {
                        continue;
                    }
                    let z: Vec<usize> = (0..p).filter(|&v| mask >> v & 1 == 1).collect();
                    let lib = d_connected(&g, x, y, &z);
                    let oracle = !dsep_moral(&g, x, y, &z);
                    prop_assert_eq!(lib, oracle, "x={} y={} z={:?}", x, y, &z);
                }
            }
        }
    }

    #[test]
    fn compelled_labeling_matches_the_brute_force_class(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = rng.gen_range(2..=5);
        let prob = rng.gen_range(0.2..0.8);
        let g = random_order_dag(p, prob, &mut rng);
        let order = random_topological_order(&g, &mut rng);
        let got = find_compelled(&g, &order).unwrap();
        prop_assert!(cpdag_equal(&got, &mec_cpdag(&g)));
    }

    #[test]
    fn compelled_labeling_is_order_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = rng.gen_range(2..=6);
        let g = random_order_dag(p, 0.5, &mut rng);
        let a = find_compelled(&g, &random_topological_order(&g, &mut rng)).unwrap();
        let b = find_compelled(&g, &random_topological_order(&g, &mut rng)).unwrap();
        prop_assert!(cpdag_equal(&a, &b));
    }

    #[test]
    fn extensions_stay_in_the_class(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = rng.gen_range(2..=6);
        let g = random_order_dag(p, 0.5, &mut rng);
        let class = find_compelled(&g, &g.topological_order()).unwrap();
        let extension = consistent_extension(&class).unwrap();
        // Same skeleton, same d-separations, and re-completing recovers
        // the same class.
        prop_assert_eq!(dsep_signature(&extension), dsep_signature(&g));
        let recompleted =
            find_compelled(&extension, &extension.topological_order()).unwrap();
        prop_assert!(cpdag_equal(&recompleted, &class));
    }

    #[test]
    fn confusion_counts_ignore_variable_labels(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = rng.gen_range(2..=7);
        let truth_dag = random_order_dag(p, 0.4, &mut rng);
        let est_dag = random_order_dag(p, 0.4, &mut rng);
        let truth = find_compelled(&truth_dag, &truth_dag.topological_order()).unwrap();
        let est = find_compelled(&est_dag, &est_dag.topological_order()).unwrap();
        let mut map: Vec<usize> = (0..p).collect();
        map.shuffle(&mut rng);
        let direct = confusion(&truth, &est).unwrap();
        let relabeled = confusion(&relabel(&truth, &map), &relabel(&est, &map)).unwrap();
        prop_assert_eq!(direct, relabeled);
    }

    #[test]
    fn tree_queries_equal_direct_grow_shrink_under_the_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = rng.gen_range(3..=7);
        let g = random_order_dag(p, 0.5, &mut rng);
        let score = Arc::new(OracleScore::new(g));
        let mut forest = GstForest::new(Arc::clone(&score)).unwrap();
        for _ in 0..40 {
            let v = rng.gen_range(0..p);
            let mask: Vec<bool> = (0..p).map(|u| u != v && rng.gen_bool(0.5)).collect();
            let (set_a, score_a) = forest.query(v, &mask).unwrap();
            let (set_b, score_b, _) = grow_shrink_direct(score.as_ref(), v, &mask);
            prop_assert_eq!(&set_a, &set_b);
            prop_assert_eq!(score_a.to_bits(), score_b.to_bits());
        }
    }

    #[test]
    fn tree_queries_equal_direct_grow_shrink_under_bic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = rng.gen_range(3..=8);
        let g = random_order_dag(p, 0.4, &mut rng);
        let (data, _) = sample_sem(&g, 80, NoiseFamily::Gaussian, &mut rng).unwrap();
        let score = Arc::new(BicScore::new(covariance_from_data(&data).unwrap(), 2.0));
        let mut forest = GstForest::new(Arc::clone(&score)).unwrap();
        for _ in 0..30 {
            let v = rng.gen_range(0..p);
            let mask: Vec<bool> = (0..p).map(|u| u != v && rng.gen_bool(0.5)).collect();
            let (set_a, score_a) = forest.query(v, &mask).unwrap();
            let (set_b, score_b, _) = grow_shrink_direct(score.as_ref(), v, &mask);
            prop_assert_eq!(&set_a, &set_b);
            prop_assert_eq!(score_a.to_bits(), score_b.to_bits());
        }
    }
}

#[test]
fn uniform_pair_sampling_passes_a_chi_square_check() {
    let p = 10;
    let num_pairs = p * (p - 1) / 2;
    let order = Permutation::identity(p);
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let draws = 3000usize;
    let edges_per_draw = 5usize;
    let mut counts = vec![0u64; num_pairs];
    for _ in 0..draws {
        let g = er_dag(p, &order, 1.0, &mut rng).unwrap();
        assert_eq!(g.num_edges(), edges_per_draw);
        for (u, v) in g.edges() {
            let (a, b) = (u.min(v), u.max(v));
            let k = a * p - a * (a + 1) / 2 + (b - a - 1);
            counts[k] += 1;
        }
    }
    // Ten buckets of pairs; each pair is equally likely, so expected
    // bucket mass is proportional to bucket size.
    let mut observed = [0.0f64; 10];
    let mut expected = [0.0f64; 10];
    let per_pair = (draws * edges_per_draw) as f64 / num_pairs as f64;
    for (k, &c) in counts.iter().enumerate() {
        let bucket = k * 10 / num_pairs;
        observed[bucket] += c as f64;
        expected[bucket] += per_pair;
    }
    let chi2: f64 = observed
        .iter()
        .zip(&expected)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    // 0.999 quantile of chi-square with 9 degrees of freedom.
    assert!(chi2 < 27.877, "chi-square statistic {chi2}");
}

#[test]
fn sample_covariance_matches_the_implied_covariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let n = 10_000usize;
    for _ in 0..5 {
        let p = rng.gen_range(3..=6);
        let g = random_order_dag(p, 0.5, &mut rng);
        let (data, model) = sample_sem(&g, n, NoiseFamily::Gaussian, &mut rng).unwrap();
        let implied = model.implied_covariance();
        let cov = covariance_from_data(&data).unwrap();
        for i in 0..p {
            for j in 0..p {
                let want = implied[i * p + j];
                let got = cov.entry(i, j);
                // Correlation estimator standard error by the delta
                // method, floored to keep near-unit entries testable.
                let se = ((1.0 - want * want) / (n as f64).sqrt()).max(1e-4);
                assert!(
                    (got - want).abs() <= 5.0 * se,
                    "entry ({i},{j}): sample {got}, implied {want}, allowed {}",
                    5.0 * se
                );
            }
        }
    }
}

#[test]
fn penalty_dominates_for_independent_columns() {
    // For independent standardized columns at n = 1000 and penalty
    // discount 2, adding a parent should usually lower the local score.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let empty = Dag::new(2);
    let mut negative = 0;
    for _ in 0..100 {
        let (data, _) = sample_sem(&empty, 1000, NoiseFamily::Gaussian, &mut rng).unwrap();
        let score = BicScore::new(covariance_from_data(&data).unwrap(), 2.0);
        let with = score.local(0, &[1]).unwrap();
        let without = score.local(0, &[]).unwrap();
        if with - without < 0.0 {
            negative += 1;
        }
    }
    assert!(negative >= 95, "only {negative}/100 draws were penalized");
}

#[test]
fn search_on_sampled_data_is_deterministic() {
    let build = || {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let g = random_order_dag(12, 0.3, &mut rng);
        let (data, _) = sample_sem(&g, 150, NoiseFamily::Gaussian, &mut rng).unwrap();
        let score = Arc::new(BicScore::new(covariance_from_data(&data).unwrap(), 2.0));
        let cfg = SearchConfig {
            num_starts: 3,
            seed: 99,
            use_bes: true,
            ..SearchConfig::default()
        };
        boss(score, &cfg).unwrap()
    };
    let a = build();
    let b = build();
    assert!(cpdag_equal(&a.cpdag, &b.cpdag));
    assert_eq!(a.score.to_bits(), b.score.to_bits());
    assert_eq!(a.stats.score_calls, b.stats.score_calls);
    assert_eq!(a.stats.trajectories, b.stats.trajectories);
}
