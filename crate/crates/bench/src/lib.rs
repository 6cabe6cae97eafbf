//! Shared input builders for the benchmark suite.

use ocslab_core::rng::SplitMix64;
use ocslab_core::FeatureMatrix;

/// Seeded cloud away from the origin; the same shape the trainer sees in
/// practice, sized by the caller.
pub fn offset_cloud(seed: u64, m: usize, dim: usize) -> FeatureMatrix {
    let mut rng = SplitMix64::new(seed);
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..dim).map(|_| 20.0 + rng.next_f64() * 2.0).collect())
        .collect();
    FeatureMatrix::from_rows(&rows).expect("rows are rectangular")
}
