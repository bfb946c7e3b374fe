mod common;

use catclust::combinatorics::{enumerate_template_trees, Coloring, ColoringMode};
use catclust::fpt::{self, colorful_solve, combine_components, solve_t_zero, tree_dp, ComponentTable, FptOptions};
use catclust::medians::candidate_medians;
use catclust::metric::clustering_cost;
use catclust::oracle::{brute_force_partitions, for_each_solution};
use catclust::{
    check_constraint, initial_clusters, intersection_graph, CategoricalMatrix, Instance, SizeConstraint, Symbol,
};
use rand::Rng;

fn capacitated(cols: Vec<Vec<Symbol>>, k: usize, budget: u64, p: usize, q: usize) -> Instance {
    let a = CategoricalMatrix::from_columns(cols).unwrap();
    let sigma = a.max_symbol() + 1;
    common::instance(a, sigma.max(2), k, budget, SizeConstraint::Capacitated { p, q })
}

fn three_one(budget: u64) -> Instance {
    capacitated(vec![vec![0, 0], vec![0, 0], vec![0, 0], vec![1, 1]], 2, budget, 2, 2)
}

fn assert_witness(inst: &Instance, c: &catclust::Clustering) {
    catclust::validate_partition(&c.clusters, inst.n()).unwrap();
    assert_eq!(c.clusters.len(), inst.k);
    assert!(check_constraint(&c.sizes(), &inst.constraint, inst.n()));
    assert_eq!(clustering_cost(&inst.matrix, &c.clusters).unwrap().0, c.cost);
    assert!(c.cost <= inst.budget);
}

#[test]
fn small_examples() {
    let pairs = capacitated(vec![vec![0, 0], vec![0, 0], vec![1, 1], vec![1, 1]], 2, 0, 2, 2);
    let c = fpt::solve(&pairs).unwrap().unwrap();
    assert_eq!(c.clusters, vec![vec![0, 1], vec![2, 3]]);
    assert_eq!(c.cost, 0);

    assert!(fpt::solve(&three_one(1)).unwrap().is_none());
    let c = fpt::solve(&three_one(2)).unwrap().unwrap();
    assert_witness(&three_one(2), &c);
    assert_eq!(c.cost, 2);
    // one cluster inside the big group, one mixed
    let init = initial_clusters(&three_one(2).matrix);
    let g = intersection_graph(&c.clusters, &init);
    let mut degrees: Vec<usize> = (0..2).map(|i| g.cluster_degree(i)).collect();
    degrees.sort();
    assert_eq!(degrees, vec![1, 2]);

    let infeasible = capacitated(vec![vec![0]; 4], 2, 5, 3, 3);
    assert!(fpt::solve(&infeasible).unwrap().is_none());
}

#[test]
fn t_zero_cases() {
    let mut cols = vec![vec![0]; 4];
    cols.extend(vec![vec![1]; 4]);
    let inst = capacitated(cols, 4, 0, 2, 2);
    let c = solve_t_zero(&inst).unwrap().unwrap();
    assert_eq!(c.cost, 0);
    let init = initial_clusters(&inst.matrix);
    assert!((0..c.clusters.len()).all(|i| intersection_graph(&c.clusters, &init).cluster_degree(i) == 1));

    let mut cols = vec![vec![0]; 3];
    cols.extend(vec![vec![1]; 3]);
    assert!(solve_t_zero(&capacitated(cols, 2, 0, 3, 3)).unwrap().is_some());

    let cols = vec![vec![0], vec![0], vec![1], vec![1]];
    assert!(solve_t_zero(&capacitated(cols, 1, 4, 4, 4)).unwrap().is_none());
}

#[test]
fn colorful_examples() {
    let inst = three_one(2);
    let m = candidate_medians(&inst.matrix, inst.budget);
    let rainbow = Coloring::new(vec![0, 1]);
    let c = colorful_solve(&inst, 1, 2, &rainbow, &m).unwrap().unwrap();
    assert_eq!(c.cost, 2);
    assert_witness(&inst, &c);
    let mono = Coloring::new(vec![0, 0]);
    assert!(colorful_solve(&inst, 1, 2, &mono, &m).unwrap().is_none());

    // four distinct singletons in pairs: both clusters are composite
    let inst = capacitated(vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]], 2, 4, 2, 2);
    assert!(brute_force_partitions(&inst).unwrap().is_some());
    let m = candidate_medians(&inst.matrix, inst.budget);
    let fam = catclust::combinatorics::coloring_family(4, 2, &ColoringMode::Exhaustive).unwrap();
    for psi in &fam {
        assert!(colorful_solve(&inst, 1, 2, psi, &m).unwrap().is_none());
    }
    assert!(fpt::solve(&inst).unwrap().is_some());
}

/// Minimum cost over partitions of all columns into `h` clusters with
/// sizes in `[p, q]` where exactly one cluster touches both groups.
fn star_oracle(inst: &Instance, h: usize, p: usize, q: usize) -> Option<u64> {
    let init = initial_clusters(&inst.matrix);
    let mut best = None;
    catclust::oracle::for_each_partition(inst.n(), h, &mut |rgs| {
        let mut blocks = vec![Vec::new(); h];
        for (j, &b) in rgs.iter().enumerate() {
            blocks[b].push(j);
        }
        if blocks.iter().any(|b| b.len() < p || b.len() > q) {
            return true;
        }
        let g = intersection_graph(&blocks, &init);
        if (0..h).filter(|&i| g.cluster_degree(i) == 2).count() != 1 {
            return true;
        }
        let cost = clustering_cost(&inst.matrix, &blocks).unwrap().0;
        if cost <= inst.budget && best.is_none_or(|b| cost < b) {
            best = Some(cost);
        }
        true
    });
    best
}

#[test]
fn star_tree_matches_oracle() {
    let trees = enumerate_template_trees(1, 2);
    assert_eq!(trees.len(), 1);
    let star = &trees[0];
    let mut rng = common::rng(31);
    let mut finite = 0;
    for _ in 0..300 {
        let m = rng.gen_range(1..=3);
        let x: Vec<Symbol> = (0..m).map(|_| rng.gen_range(0..2)).collect();
        let mut y = x.clone();
        y[rng.gen_range(0..m)] ^= 1;
        let (a, b) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let mut cols = vec![x; a];
        cols.extend(vec![y; b]);
        let n = a + b;
        let p = rng.gen_range(1..=n);
        let q = rng.gen_range(p..=n);
        let budget = rng.gen_range(0..=4);
        let inst = capacitated(cols, 3, budget, p, q);
        let medians = candidate_medians(&inst.matrix, budget);
        let psi = Coloring::new(vec![0, 1]);
        for h in 1..=3 {
            let got = tree_dp(&inst, star, 0b11, h, &medians, &psi).unwrap();
            assert_eq!(
                got,
                star_oracle(&inst, h, p, q),
                "h={h} p={p} q={q} B={budget} {:?}",
                inst.matrix
            );
            finite += usize::from(got.is_some());
        }
        assert_eq!(tree_dp(&inst, star, 0b11, 0, &medians, &psi).unwrap(), None);
        assert_eq!(tree_dp(&inst, star, 0b01, 1, &medians, &psi).unwrap(), None);
    }
    assert!(finite > 50, "only {finite} finite entries");
}

#[test]
fn two_by_two_star_example() {
    let inst = capacitated(vec![vec![0, 0], vec![0, 0], vec![1, 1], vec![1, 1]], 2, 4, 2, 2);
    let star = &enumerate_template_trees(1, 2)[0];
    let medians = candidate_medians(&inst.matrix, inst.budget);
    let got = tree_dp(&inst, star, 0b11, 2, &medians, &Coloring::new(vec![0, 1])).unwrap();
    assert_eq!(got, star_oracle(&inst, 2, 2, 2));
}

fn brute_combine(tables: &[ComponentTable], l: usize, k: usize) -> Option<u64> {
    let f = tables.len();
    let mut best: Option<u64> = None;
    let total = f.pow(l as u32);
    for code in 0..total {
        let mut masks = vec![0u32; f];
        let mut c = code;
        for color in 0..l {
            masks[c % f] |= 1 << color;
            c /= f;
        }
        // every composition of k into f positive parts
        let mut hs = vec![1usize; f];
        loop {
            if hs.iter().sum::<usize>() == k {
                let vals: Option<Vec<u64>> = (0..f).map(|i| tables[i].get(masks[i], hs[i])).collect();
                if let Some(v) = vals {
                    let s: u64 = v.iter().sum();
                    best = Some(best.map_or(s, |b| b.min(s)));
                }
            }
            let mut i = 0;
            while i < f && hs[i] == k {
                hs[i] = 1;
                i += 1;
            }
            if i == f {
                break;
            }
            hs[i] += 1;
        }
    }
    best
}

#[test]
fn combination_matches_split_enumeration() {
    let mut rng = common::rng(32);
    for _ in 0..400 {
        let f = rng.gen_range(1..=3);
        let parts: Vec<usize> = (0..f).map(|_| rng.gen_range(2..=3)).collect();
        let l: usize = parts.iter().sum();
        if l > 8 {
            continue;
        }
        let k = rng.gen_range(f..=f + 2);
        let tables: Vec<ComponentTable> = parts
            .iter()
            .map(|&li| {
                let mut t = ComponentTable::new(l, li, k);
                for mask in 0..(1u32 << l) {
                    if mask.count_ones() as usize != li {
                        continue;
                    }
                    for h in 0..=k {
                        if rng.gen_bool(0.6) {
                            t.set(mask, h, Some(rng.gen_range(0..10)));
                        }
                    }
                }
                t
            })
            .collect();
        assert_eq!(
            combine_components(&tables, l, k),
            brute_combine(&tables, l, k),
            "parts {parts:?} k={k}"
        );
    }
}

#[test]
fn forced_split_sums_components() {
    let mut a = ComponentTable::new(4, 2, 2);
    let mut b = ComponentTable::new(4, 2, 2);
    a.set(0b0011, 1, Some(2));
    b.set(0b1100, 1, Some(3));
    assert_eq!(combine_components(&[a.clone(), b], 4, 2), Some(5));
    let mut single = ComponentTable::new(2, 2, 1);
    single.set(0b11, 1, Some(4));
    assert_eq!(combine_components(&[single], 2, 1), Some(4));
}

fn random_capacitated(rng: &mut rand_chacha::ChaCha8Rng) -> Instance {
    let n: usize = rng.gen_range(2..=8);
    let m = rng.gen_range(1..=3);
    let sigma = rng.gen_range(2..=3);
    let k = rng.gen_range(1..=3.min(n));
    let p = rng.gen_range(1..=n / k);
    let q = rng.gen_range(p.max(n.div_ceil(k))..=n);
    let a = common::random_matrix(rng, n, m, sigma);
    common::instance(a, sigma, k, rng.gen_range(0..=4), SizeConstraint::Capacitated { p, q })
}

#[test]
fn acceptance_is_monotone_in_budget() {
    let mut rng = common::rng(33);
    for _ in 0..300 {
        let inst = random_capacitated(&mut rng);
        let mut seen_yes = false;
        for b in 0..=5 {
            let yes = fpt::solve(&inst.with_budget(b)).unwrap().is_some();
            assert!(yes || !seen_yes, "yes at a smaller budget but no at B={b}");
            seen_yes |= yes;
        }
    }
}

#[test]
fn forests_reach_the_optimum() {
    let mut rng = common::rng(34);
    let mut cyclic_seen = 0;
    for _ in 0..300 {
        let inst = random_capacitated(&mut rng);
        let init = initial_clusters(&inst.matrix);
        let (mut best, mut best_forest) = (None::<u64>, None::<u64>);
        for_each_solution(&inst, 12, &mut |c| {
            best = Some(best.map_or(c.cost, |b| b.min(c.cost)));
            if intersection_graph(&c.clusters, &init).is_forest() {
                best_forest = Some(best_forest.map_or(c.cost, |b| b.min(c.cost)));
            } else {
                cyclic_seen += 1;
            }
            true
        })
        .unwrap();
        assert_eq!(best, best_forest);
    }
    assert!(cyclic_seen > 0);
}

#[test]
fn random_colorings_never_accept_no_instances() {
    let mut rng = common::rng(35);
    let (mut yes, mut found) = (0, 0);
    for i in 0..400 {
        let inst = random_capacitated(&mut rng);
        let truth = brute_force_partitions(&inst).unwrap().is_some();
        let opts = FptOptions {
            coloring: ColoringMode::Random { trials: None, seed: i },
            ..FptOptions::default()
        };
        let got = fpt::solve_with(&inst, &opts).unwrap();
        if let Some(c) = &got {
            assert!(truth);
            assert_witness(&inst, c);
        }
        yes += usize::from(truth);
        found += usize::from(got.is_some());
    }
    assert!(found * 100 >= yes * 95, "random mode found {found} of {yes}");
}

#[test]
fn coloring_modes_agree() {
    let mut rng = common::rng(36);
    for _ in 0..200 {
        let inst = random_capacitated(&mut rng);
        let perfect = fpt::solve(&inst).unwrap().is_some();
        let opts = FptOptions {
            coloring: ColoringMode::Exhaustive,
            ..FptOptions::default()
        };
        let exhaustive = fpt::solve_with(&inst, &opts).unwrap();
        assert_eq!(perfect, exhaustive.is_some());
        if let Some(c) = exhaustive {
            assert_witness(&inst, &c);
        }
    }
}
