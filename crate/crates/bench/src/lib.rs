//! Benchmark fixtures shared by the criterion targets.

use graphonlab::graphon::sample_w_random;
use graphonlab::rng::stream;
use graphonlab::{LabelledGraph, StepGraphon};

/// Three-block graphon used by every benchmark.
pub fn fixture_graphon() -> StepGraphon {
    StepGraphon::from_f64(&[0.2, 0.3, 0.5], &[vec![0.9, 0.1, 0.5], vec![0.1, 0.0, 0.7], vec![0.5, 0.7, 0.25]])
        .expect("valid graphon")
}

/// `G(n, W)` for the fixture graphon at a fixed seed.
pub fn fixture_host(n: usize) -> LabelledGraph {
    sample_w_random(&fixture_graphon(), n, &mut stream(1, 0)).expect("n > 0")
}
