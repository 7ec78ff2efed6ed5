//! Fixed-seed fixtures shared by the benchmarks.

use klbss::semgen::{attach_target, gen_bipartite, sample_dataset, GenParams};
use klbss::{Dataset, IndexSet};

/// Bipartite design with `β = 0.1` on `0..s` and `n` rows.
pub fn bipartite_dataset(d: usize, s: usize, n: usize, seed: u64) -> Dataset {
    let spec = gen_bipartite(d, s, &GenParams::default(), seed).expect("valid generator input");
    let model = attach_target(&spec, &IndexSet::range(0, s), &vec![0.1; s], 1.0).expect("valid support");
    sample_dataset(&model, n, seed ^ 0x5eed).expect("positive n")
}
