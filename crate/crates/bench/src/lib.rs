//! Shared input builders for the criterion benchmarks.

use boss_core::{covariance_from_data, er_dag, sample_sem, BicScore, NoiseFamily, Permutation};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A reproducible BIC score over standardized linear-Gaussian data
/// sampled from a random DAG with the given size and average degree.
pub fn gaussian_bic_instance(
    num_vars: usize,
    sample_size: usize,
    avg_degree: f64,
    seed: u64,
) -> BicScore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = Permutation::random(num_vars, &mut rng);
    let g = er_dag(num_vars, &order, avg_degree, &mut rng).expect("valid benchmark graph");
    let (data, _) = sample_sem(&g, sample_size, NoiseFamily::Gaussian, &mut rng)
        .expect("valid benchmark sample");
    let model = covariance_from_data(&data).expect("non-empty benchmark data");
    BicScore::new(model, 2.0)
}
