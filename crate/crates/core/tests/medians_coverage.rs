mod common;

use catclust::medians::candidate_medians;
use catclust::metric::{clustering_cost, hamming_distance};
use catclust::oracle::for_each_partition;
use catclust::SizeConstraint;
use rand::Rng;

#[test]
fn every_cheap_clustering_has_its_majority_medians_listed() {
    let mut rng = common::rng(11);
    let mut checked = 0usize;
    for _ in 0..400 {
        let n = rng.gen_range(1..=8);
        let m = rng.gen_range(1..=4);
        let sigma = rng.gen_range(2..=3);
        let budget = rng.gen_range(0..=4u64);
        let a = common::random_matrix(&mut rng, n, m, sigma);
        let cands = candidate_medians(&a, budget);
        for_each_partition(n, 3, &mut |rgs| {
            let k = rgs.iter().max().unwrap() + 1;
            let mut clusters = vec![Vec::new(); k];
            for (j, &b) in rgs.iter().enumerate() {
                clusters[b].push(j);
            }
            let (cost, medians) = clustering_cost(&a, &clusters).unwrap();
            if cost <= budget {
                checked += 1;
                for c in &medians {
                    assert!(cands.contains(c), "median {c:?} missing for {clusters:?} at B={budget}");
                }
            }
            true
        });
    }
    assert!(checked > 1000, "only {checked} cheap clusterings seen");
}

#[test]
fn candidates_grow_with_budget_and_stay_near_columns() {
    let mut rng = common::rng(12);
    for _ in 0..300 {
        let n = rng.gen_range(1..=8);
        let m = rng.gen_range(1..=4);
        let a = common::random_matrix(&mut rng, n, m, 3);
        let mut prev = candidate_medians(&a, 0);
        assert_eq!(prev.len(), catclust::initial_clusters(&a).len());
        for budget in 1..=4u64 {
            let cur = candidate_medians(&a, budget);
            assert!(prev.vectors().iter().all(|v| cur.contains(v)));
            for v in cur.vectors() {
                let nearest = a.columns().map(|c| hamming_distance(v, c).unwrap()).min().unwrap();
                assert!(
                    nearest as u64 <= budget,
                    "{v:?} is {nearest} from every column at B={budget}"
                );
            }
            let sorted = cur.vectors().windows(2).all(|w| w[0] < w[1]);
            assert!(sorted, "candidates must be sorted and distinct");
            prev = cur;
        }
    }
}

#[test]
fn two_pair_example_is_exactly_the_columns() {
    let a = catclust::CategoricalMatrix::from_columns(vec![vec![0, 0], vec![1, 1]]).unwrap();
    let m = candidate_medians(&a, 1);
    assert_eq!(m.vectors(), &[vec![0, 0], vec![1, 1]]);
    // any clustering of cost <= 1 uses these medians
    let inst = common::instance(a, 2, 1, 1, SizeConstraint::Unconstrained);
    assert!(catclust::oracle::brute_force_partitions(&inst).unwrap().is_none());
}
