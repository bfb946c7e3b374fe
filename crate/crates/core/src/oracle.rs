//! Brute-force solvers and the uncrossing transformation.
//!
//! These are slow on purpose and serve as ground truth for the other
//! solvers on small inputs.

use crate::assignment::{assign_with_medians, greedy_assign, greedy_cost};
use crate::error::{Error, Result};
use crate::medians::candidate_medians;
use crate::metric::clustering_cost;
use crate::model::{
    check_constraint, intersection_graph, CategoricalMatrix, Clustering, InitialClustering, Instance, SizeConstraint,
    Symbol,
};

/// Largest `n` that [`brute_force_partitions`] accepts by default.
pub const DEFAULT_PARTITION_CAP: usize = 12;

/// Largest number of median multisets [`brute_force_medians`] tries by
/// default.
pub const DEFAULT_MEDIANS_CAP: u64 = 5_000_000;

/// Calls `visit` with every partition of `0..n` into at most `k` nonempty
/// blocks, as a restricted growth string. Stops early when `visit` returns
/// `false`.
pub fn for_each_partition(n: usize, k: usize, visit: &mut dyn FnMut(&[usize]) -> bool) {
    fn rec(
        i: usize,
        used: usize,
        rgs: &mut Vec<usize>,
        n: usize,
        k: usize,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if i == n {
            return visit(rgs);
        }
        for b in 0..=used.min(k - 1) {
            rgs.push(b);
            let go = rec(i + 1, used.max(b + 1), rgs, n, k, visit);
            rgs.pop();
            if !go {
                return false;
            }
        }
        true
    }
    if k == 0 {
        return;
    }
    let mut rgs = Vec::with_capacity(n);
    rec(0, 0, &mut rgs, n, k, visit);
}

fn blocks_of(rgs: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut blocks = vec![Vec::new(); k];
    for (j, &b) in rgs.iter().enumerate() {
        blocks[b].push(j);
    }
    blocks
}

/// Every clustering of cost at most `B` that satisfies the constraint, in
/// restricted-growth order. Clusters are padded with empty ones up to `k`
/// when the constraint allows it.
pub fn for_each_solution(instance: &Instance, cap: usize, visit: &mut dyn FnMut(Clustering) -> bool) -> Result<()> {
    let n = instance.n();
    if n > cap {
        return Err(Error::Resource(format!(
            "partition enumeration over n={n} columns exceeds the cap of {cap}"
        )));
    }
    let k = instance.k;
    let empties = instance.constraint.allows_empty_clusters();
    let mut failure = None;
    for_each_partition(n, k, &mut |rgs| {
        let blocks = blocks_of(rgs, k);
        let nonempty = blocks.iter().filter(|b| !b.is_empty()).count();
        if nonempty < k && !empties {
            return true;
        }
        let sizes: Vec<usize> = blocks.iter().map(Vec::len).collect();
        if !check_constraint(&sizes, &instance.constraint, n) {
            return true;
        }
        match clustering_cost(&instance.matrix, &blocks) {
            Ok((cost, medians)) if cost <= instance.budget => visit(Clustering {
                clusters: blocks,
                medians,
                cost,
            }),
            Ok(_) => true,
            Err(e) => {
                failure = Some(e);
                false
            }
        }
    });
    failure.map_or(Ok(()), Err)
}

/// Minimum-cost feasible clustering if its cost is at most `B`, by trying
/// every partition. Fails with a resource error for `n` above
/// [`DEFAULT_PARTITION_CAP`].
pub fn brute_force_partitions(instance: &Instance) -> Result<Option<Clustering>> {
    brute_force_partitions_capped(instance, DEFAULT_PARTITION_CAP)
}

pub fn brute_force_partitions_capped(instance: &Instance, cap: usize) -> Result<Option<Clustering>> {
    let mut best: Option<Clustering> = None;
    for_each_solution(instance, cap, &mut |c| {
        if best.as_ref().is_none_or(|b| c.cost < b.cost) {
            best = Some(c);
        }
        true
    })?;
    Ok(best.map(|mut c| {
        c.normalize();
        c
    }))
}

/// Which vectors [`brute_force_medians`] draws medians from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateSource {
    /// The candidate set for the instance's budget.
    Candidates,
    /// Every vector of length `m` over the alphabet.
    AllVectors,
}

pub fn brute_force_medians(instance: &Instance, source: CandidateSource) -> Result<Option<Clustering>> {
    brute_force_medians_capped(instance, source, DEFAULT_MEDIANS_CAP)
}

/// Minimum over all `k`-multisets of candidate medians of the best
/// size-feasible assignment to them, if at most `B`.
///
/// Size windows per constraint: `[p, q]` for capacitated, `[p, p + delta]`
/// and `[p, floor(alpha p)]` for every `p` for the balanced variants, and
/// `n / k` for equal. Unconstrained instances use nearest-median assignment.
pub fn brute_force_medians_capped(
    instance: &Instance,
    source: CandidateSource,
    cap: u64,
) -> Result<Option<Clustering>> {
    let candidates: Vec<Vec<Symbol>> = match source {
        CandidateSource::Candidates => candidate_medians(&instance.matrix, instance.budget).vectors().to_vec(),
        CandidateSource::AllVectors => all_vectors(instance.alphabet.size(), instance.m(), cap)?,
    };
    let k = instance.k;
    let total = multiset_count(candidates.len() as u64, k as u64);
    if total.is_none_or(|t| t > cap) {
        return Err(Error::Resource(format!(
            "{} candidates give more than {cap} median multisets for k={k}",
            candidates.len()
        )));
    }
    let windows = size_windows(&instance.constraint, instance.n(), k);
    if windows.as_ref().is_some_and(|w| w.is_empty()) {
        return Ok(None);
    }

    let mut best: Option<Clustering> = None;
    let mut bound = instance.budget.saturating_add(1);
    let mut idx = vec![0usize; k];
    loop {
        let medians: Vec<Vec<Symbol>> = idx.iter().map(|&i| candidates[i].clone()).collect();
        if greedy_cost(&instance.matrix, &medians) < bound {
            let found = match &windows {
                None => Some(greedy_assign(&instance.matrix, &medians)?),
                Some(ws) => {
                    let mut local: Option<Clustering> = None;
                    for &(p, q) in ws {
                        if let Some(c) = assign_with_medians(&instance.matrix, p, q, &medians)? {
                            if local.as_ref().is_none_or(|l| c.cost < l.cost) {
                                local = Some(c);
                            }
                        }
                    }
                    local
                }
            };
            if let Some(c) = found.filter(|c| c.cost < bound) {
                bound = c.cost;
                best = Some(c);
            }
        }
        // next nondecreasing index tuple
        let Some(pos) = (0..k).rev().find(|&i| idx[i] + 1 < candidates.len()) else {
            break;
        };
        let v = idx[pos] + 1;
        idx[pos..].iter_mut().for_each(|x| *x = v);
    }

    match best {
        Some(c) => {
            let (cost, medians) = clustering_cost(&instance.matrix, &c.clusters)?;
            let mut c = Clustering {
                clusters: c.clusters,
                medians,
                cost,
            };
            c.normalize();
            Ok(Some(c))
        }
        None => Ok(None),
    }
}

fn all_vectors(sigma: u32, m: usize, cap: u64) -> Result<Vec<Vec<Symbol>>> {
    let total = (sigma as u64).checked_pow(m as u32).filter(|&t| t <= cap);
    let Some(total) = total else {
        return Err(Error::Resource(format!(
            "{sigma}^{m} candidate vectors exceed the cap of {cap}"
        )));
    };
    let mut out = Vec::with_capacity(total as usize);
    let mut v = vec![0; m];
    for _ in 0..total {
        out.push(v.clone());
        for x in v.iter_mut().rev() {
            *x += 1;
            if *x < sigma {
                break;
            }
            *x = 0;
        }
    }
    Ok(out)
}

fn multiset_count(c: u64, k: u64) -> Option<u64> {
    // C(c + k - 1, k)
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (c + k - 1 - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Size windows `[p, q]` covering the constraint, or `None` when sizes are
/// free.
fn size_windows(constraint: &SizeConstraint, n: usize, k: usize) -> Option<Vec<(usize, usize)>> {
    match constraint {
        SizeConstraint::Unconstrained => None,
        SizeConstraint::Capacitated { p, q } => Some(vec![(*p, *q)]),
        SizeConstraint::Balanced { delta } => Some((1..=n).map(|p| (p, (p + delta).min(n))).collect()),
        SizeConstraint::FactorBalanced { alpha } => Some(
            (1..=n)
                .map(|p| {
                    let q = (p as u128 * *alpha.numer() as u128 / *alpha.denom() as u128).min(n as u128);
                    (p, q as usize)
                })
                .collect(),
        ),
        SizeConstraint::Equal => Some(if n.is_multiple_of(k) {
            vec![(n / k, n / k)]
        } else {
            vec![]
        }),
    }
}

/// Reshapes a clustering so that its intersection graph with the initial
/// clusters is a forest, keeping every cluster size and not raising the
/// cost.
///
/// Each round takes the first cycle found by depth-first search,
/// `J1 - I1 - J2 - I2 - ... - Jr - Ir - J1`, fixes the current medians and
/// shifts members around the cycle in the direction that does not raise the
/// cost, until one of the cycle's intersections becomes empty.
pub fn uncross(clustering: &Clustering, init: &InitialClustering, matrix: &CategoricalMatrix) -> Result<Clustering> {
    let (_, mut medians) = clustering_cost(matrix, &clustering.clusters)?;
    let mut clusters = clustering.clusters.clone();
    let rep: Vec<&[Symbol]> = (0..init.len()).map(|g| matrix.column(init.representative(g))).collect();
    let d = |c: &[Symbol], g: usize| crate::metric::hamming(c, rep[g]) as i64;

    while let Some(cycle) = find_cycle(&clusters, init) {
        // cycle = [(i_1, j_1, j_2), (i_2, j_2, j_3), ...] with I_{i_h} adjacent
        // to J_{j_h} and J_{j_{h+1}}
        let r = cycle.len();
        let delta_forward: i64 = cycle
            .iter()
            .map(|&(i, ja, jb)| d(&medians[i], ja) - d(&medians[i], jb))
            .sum();
        let delta_backward = -delta_forward;
        assert!(
            delta_forward <= 0 || delta_backward <= 0,
            "one shift direction never raises the cost"
        );

        let members = |clusters: &[Vec<usize>], i: usize, g: usize| -> Vec<usize> {
            clusters[i].iter().copied().filter(|&e| init.group_of(e) == g).collect()
        };
        // forward: I_{i_h} gives up members of J_{j_{h+1}} and receives what
        // I_{i_{h-1}} gave up, which lies in J_{j_h}
        let forward = delta_forward <= 0;
        let leaving: Vec<Vec<usize>> = cycle
            .iter()
            .map(|&(i, ja, jb)| members(&clusters, i, if forward { jb } else { ja }))
            .collect();
        let count = leaving.iter().map(Vec::len).min().unwrap_or(0);
        if count == 0 {
            return Err(Error::Internal("cycle edge without members".into()));
        }
        let moved: Vec<Vec<usize>> = leaving.iter().map(|l| l[..count].to_vec()).collect();
        for h in 0..r {
            let i = cycle[h].0;
            clusters[i].retain(|e| !moved[h].contains(e));
            let from = if forward { (h + r - 1) % r } else { (h + 1) % r };
            clusters[i].extend_from_slice(&moved[from]);
        }
        // medians stay fixed during a round; refresh them for the next one
        medians = clustering_cost(matrix, &clusters)?.1;
    }

    let (cost, medians) = clustering_cost(matrix, &clusters)?;
    for c in &mut clusters {
        c.sort_unstable();
    }
    Ok(Clustering {
        clusters,
        medians,
        cost,
    })
}

/// First cycle of the intersection graph found by depth-first search from
/// the lowest-numbered vertex, as `(cluster, group before, group after)`
/// triples.
fn find_cycle(clusters: &[Vec<usize>], init: &InitialClustering) -> Option<Vec<(usize, usize, usize)>> {
    let graph = intersection_graph(clusters, init);
    let k = clusters.len();
    let total = k + init.len();
    let mut adj = vec![Vec::new(); total];
    for &(i, g) in graph.edges() {
        adj[i].push(k + g);
        adj[k + g].push(i);
    }
    for a in &mut adj {
        a.sort_unstable();
    }

    fn dfs(v: usize, parent: usize, adj: &[Vec<usize>], state: &mut [u8], path: &mut Vec<usize>) -> Option<Vec<usize>> {
        state[v] = 1;
        path.push(v);
        for &w in &adj[v] {
            if w == parent {
                continue;
            }
            if state[w] == 1 {
                let start = path.iter().position(|&x| x == w).unwrap();
                return Some(path[start..].to_vec());
            }
            if state[w] == 0 {
                if let Some(c) = dfs(w, v, adj, state, path) {
                    return Some(c);
                }
            }
        }
        path.pop();
        state[v] = 2;
        None
    }

    let mut state = vec![0u8; total];
    for start in 0..total {
        if state[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        if let Some(mut cyc) = dfs(start, usize::MAX, &adj, &mut state, &mut path) {
            // rotate so the cycle starts at a group vertex
            if cyc[0] < k {
                cyc.rotate_left(1);
            }
            let r = cyc.len() / 2;
            return Some(
                (0..r)
                    .map(|h| (cyc[2 * h + 1], cyc[2 * h] - k, cyc[(2 * h + 2) % cyc.len()] - k))
                    .collect(),
            );
        }
    }
    None
}
