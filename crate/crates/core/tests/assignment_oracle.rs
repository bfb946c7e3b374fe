mod common;

use catclust::assignment::{assign_with_medians, greedy_assign, min_weight_perfect_matching};
use catclust::metric::cluster_cost;
use catclust::oracle::for_each_partition;
use catclust::{CategoricalMatrix, Symbol};
use rand::Rng;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn hungarian_matches_all_permutations() {
    let mut rng = common::rng(5);
    let perms = permutations(6);
    assert_eq!(perms.len(), 720);
    for _ in 0..200 {
        let forbid = rng.gen_bool(0.5);
        let w: Vec<Vec<Option<u64>>> = (0..6)
            .map(|_| {
                (0..6)
                    .map(|_| {
                        if forbid && rng.gen_bool(0.4) {
                            None
                        } else {
                            Some(rng.gen_range(0..20))
                        }
                    })
                    .collect()
            })
            .collect();
        let best = perms
            .iter()
            .filter_map(|p| p.iter().enumerate().map(|(i, &j)| w[i][j]).sum::<Option<u64>>())
            .min();
        let got = min_weight_perfect_matching(&w).unwrap();
        assert_eq!(got.as_ref().map(|m| m.weight), best);
        if let Some(m) = got {
            let total: u64 = m.assignment.iter().enumerate().map(|(i, &j)| w[i][j].unwrap()).sum();
            assert_eq!(total, m.weight);
        }
    }
}

/// Exhaustive minimum over assignments of columns to the given medians with
/// sizes in `[p, q]`.
fn exhaustive_assignment(a: &CategoricalMatrix, p: usize, q: usize, medians: &[Vec<Symbol>]) -> Option<u64> {
    let k = medians.len();
    let n = a.cols();
    let mut best = None;
    // labelled assignments: every map from columns to medians
    let total = k.pow(n as u32);
    for code in 0..total {
        let mut clusters = vec![Vec::new(); k];
        let mut x = code;
        for j in 0..n {
            clusters[x % k].push(j);
            x /= k;
        }
        if clusters.iter().all(|c| (p..=q).contains(&c.len())) {
            let cost: u64 = clusters.iter().zip(medians).map(|(c, m)| cluster_cost(a, c, m)).sum();
            best = Some(best.map_or(cost, |b: u64| b.min(cost)));
        }
    }
    best
}

#[test]
fn assignment_is_optimal_for_fixed_medians() {
    let mut rng = common::rng(9);
    for _ in 0..200 {
        let n = rng.gen_range(1..=7);
        let k = rng.gen_range(1..=3);
        let a = common::random_matrix(&mut rng, n, 3, 3);
        let medians: Vec<Vec<Symbol>> = (0..k).map(|_| (0..3).map(|_| rng.gen_range(0..3)).collect()).collect();
        let (p, q) = common::random_window(&mut rng, n);
        let got = assign_with_medians(&a, p, q, &medians).unwrap();
        assert_eq!(got.as_ref().map(|c| c.cost), exhaustive_assignment(&a, p, q, &medians));
        if let Some(c) = got {
            assert!(c.sizes().iter().all(|s| (p..=q).contains(s)));
            let recomputed: u64 = c
                .clusters
                .iter()
                .zip(&medians)
                .map(|(c, m)| cluster_cost(&a, c, m))
                .sum();
            assert_eq!(recomputed, c.cost);
            // greedy is a lower bound for any size window
            assert!(greedy_assign(&a, &medians).unwrap().cost <= c.cost);
            // swapping equal medians changes nothing
            let mut twice = medians.clone();
            twice.reverse();
            assert_eq!(assign_with_medians(&a, p, q, &twice).unwrap().unwrap().cost, c.cost);
        }
        let infeasible = k * p > n || k * q < n;
        assert_eq!(infeasible, assign_with_medians(&a, p, q, &medians).unwrap().is_none());
    }
}

#[test]
fn partition_enumeration_covers_exact_block_counts() {
    // S(6, 3) = 90 partitions with exactly three blocks
    let mut exact = 0;
    for_each_partition(6, 3, &mut |rgs| {
        if rgs.iter().max() == Some(&2) {
            exact += 1;
        }
        true
    });
    assert_eq!(exact, 90);
}
