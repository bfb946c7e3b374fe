mod common;

use catclust::metric::{cluster_cost, clustering_cost, hamming_distance, majority_median};
use catclust::{CategoricalMatrix, Symbol};
use proptest::prelude::*;
use rand::Rng;

fn all_vectors(sigma: u32, m: usize) -> Vec<Vec<Symbol>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..sigma).map(move |s| {
                    let mut w = v.clone();
                    w.push(s);
                    w
                })
            })
            .collect();
    }
    out
}

fn vec_of(m: usize) -> impl Strategy<Value = Vec<Symbol>> {
    proptest::collection::vec(0u32..3, m)
}

proptest! {
    #[test]
    fn hamming_is_a_metric((a, b, c) in (1usize..6).prop_flat_map(|m| (vec_of(m), vec_of(m), vec_of(m)))) {
        let ab = hamming_distance(&a, &b).unwrap();
        prop_assert_eq!(ab, hamming_distance(&b, &a).unwrap());
        prop_assert_eq!(hamming_distance(&a, &a).unwrap(), 0);
        prop_assert_eq!(ab == 0, a == b);
        let ac = hamming_distance(&a, &c).unwrap();
        let cb = hamming_distance(&c, &b).unwrap();
        prop_assert!(ab <= ac + cb);
    }

    #[test]
    fn majority_beats_every_vector(
        (sigma, cols) in (1usize..=4, 2u32..=3).prop_flat_map(|(m, sigma)| {
            (Just(sigma), proptest::collection::vec(proptest::collection::vec(0..sigma, m), 1..=5))
        })
    ) {
        let m = cols[0].len();
        let median = majority_median(&cols).unwrap();
        let matrix = CategoricalMatrix::from_columns(cols.clone()).unwrap();
        let all: Vec<usize> = (0..cols.len()).collect();
        let best = cluster_cost(&matrix, &all, &median);
        for c in all_vectors(sigma, m) {
            prop_assert!(best <= cluster_cost(&matrix, &all, &c));
        }
    }

    #[test]
    fn cost_ignores_cluster_and_member_order(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let a = common::random_matrix(&mut rng, 6, 3, 3);
        let labels: Vec<usize> = (0..6).map(|_| rng.gen_range(0..3)).collect();
        let mut clusters = vec![Vec::new(); 3];
        for (j, &l) in labels.iter().enumerate() {
            clusters[l].push(j);
        }
        let (cost, _) = clustering_cost(&a, &clusters).unwrap();
        let mut shuffled: Vec<Vec<usize>> = clusters.iter().rev().map(|c| c.iter().rev().copied().collect()).collect();
        shuffled.rotate_left(1);
        prop_assert_eq!(clustering_cost(&a, &shuffled).unwrap().0, cost);
    }
}

#[test]
fn clustering_cost_matches_exhaustive_medians() {
    let mut rng = common::rng(3);
    for _ in 0..50 {
        let a = common::random_matrix(&mut rng, 6, 3, 3);
        let clusters = vec![vec![0, 3], vec![1, 2, 5], vec![4]];
        let (cost, medians) = clustering_cost(&a, &clusters).unwrap();
        let exhaustive: u64 = clusters
            .iter()
            .map(|c| all_vectors(3, 3).iter().map(|v| cluster_cost(&a, c, v)).min().unwrap())
            .sum();
        assert_eq!(cost, exhaustive);
        assert_eq!(medians.len(), 3);
    }
}
