mod common;

use std::time::Instant;

use catclust::fpt;
use catclust::oracle::brute_force_partitions;
use catclust::SizeConstraint;
use rand::Rng;

#[test]
fn fpt_matches_brute_force_on_random_instances() {
    let mut rng = common::rng(11);
    let start = Instant::now();
    let mut yes = 0;
    for _ in 0..5000 {
        let n: usize = rng.gen_range(2..=8);
        let m = rng.gen_range(1..=3);
        let sigma = rng.gen_range(2..=3);
        let k = rng.gen_range(1..=3.min(n));
        let budget = rng.gen_range(0..=4);
        let p = rng.gen_range(1..=n / k);
        let q = rng.gen_range(n.div_ceil(k).max(p)..=n);
        let matrix = common::random_matrix(&mut rng, n, m, sigma);
        let inst = common::instance(matrix, sigma, k, budget, SizeConstraint::Capacitated { p, q });
        let expected = brute_force_partitions(&inst).unwrap();
        let got = fpt::solve(&inst).unwrap();
        assert_eq!(got.is_some(), expected.is_some(), "decision differs on {inst:?}");
        if let Some(c) = got {
            yes += 1;
            assert!(c.cost <= budget);
            assert!(c.sizes().iter().all(|s| (p..=q).contains(s)));
        }
    }
    eprintln!("{yes} yes in {:?}", start.elapsed());
}
