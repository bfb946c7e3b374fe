//! Seeded instance generators shared by the integration tests.
#![allow(dead_code)]

use catclust::{Alphabet, CategoricalMatrix, Instance, SizeConstraint, Symbol};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Half the time uniform columns, half the time a few planted centers with
/// sparse edits, so both cheap and expensive instances show up.
pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize, sigma: u32) -> CategoricalMatrix {
    let cols: Vec<Vec<Symbol>> = if rng.gen_bool(0.5) {
        (0..n)
            .map(|_| (0..m).map(|_| rng.gen_range(0..sigma)).collect())
            .collect()
    } else {
        let centers: Vec<Vec<Symbol>> = (0..rng.gen_range(1..=3))
            .map(|_| (0..m).map(|_| rng.gen_range(0..sigma)).collect())
            .collect();
        (0..n)
            .map(|_| {
                let mut c = centers[rng.gen_range(0..centers.len())].clone();
                if rng.gen_bool(0.3) {
                    let i = rng.gen_range(0..m);
                    c[i] = rng.gen_range(0..sigma);
                }
                c
            })
            .collect()
    };
    CategoricalMatrix::from_columns(cols).unwrap()
}

pub fn instance(matrix: CategoricalMatrix, sigma: u32, k: usize, budget: u64, constraint: SizeConstraint) -> Instance {
    Instance::new(matrix, Alphabet::new(sigma).unwrap(), k, budget, constraint).unwrap()
}

/// A uniformly random pair `1 <= p <= q <= n`.
pub fn random_window(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let p = rng.gen_range(1..=n);
    let q = rng.gen_range(p..=n);
    (p, q)
}
