//! Instance fixtures for the criterion benches.

use l1l2::generators::{gen_matrix, gen_truth, GeneratorSpec};
use l1l2::rng::derive_seed;
use l1l2::{Domain, ProblemInstance};

/// Noiseless DCT instance with an `s`-sparse nonnegative truth.
pub fn dct_problem(m: usize, n: usize, f: f64, s: usize, gamma: f64, seed: u64) -> ProblemInstance {
    let a = gen_matrix(&GeneratorSpec::dct(m, n, f, seed)).expect("valid spec");
    let x = gen_truth(n, s, derive_seed(seed, 1)).expect("valid sparsity");
    let b = &a * &x;
    ProblemInstance::new(a, b, gamma, Domain::NonNegative).expect("finite instance")
}
