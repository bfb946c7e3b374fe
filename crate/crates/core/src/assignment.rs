//! Size-constrained assignment of columns to fixed medians, reduced to a
//! minimum-weight perfect matching.
//!
//! For `k` medians and bounds `[p, q]` the bipartite graph has `kq` slots on
//! one side: per median, `p` must-fill slots followed by `q - p` optional
//! slots. The other side holds the `n` columns plus `kq - n` zero-weight
//! fillers, which may only occupy optional slots. A perfect matching saturates
//! every must-fill slot, so each cluster gets at least `p` columns, and no
//! cluster can exceed its `q` slots.

use crate::error::{invalid, Result};
use crate::metric::hamming;
use crate::model::{CategoricalMatrix, Clustering, Symbol};

/// A perfect matching given as `row -> column`, with its total weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub assignment: Vec<usize>,
    pub weight: u64,
}

/// Hungarian method with potentials, `O(n^3)`. Returns `row -> col` and the
/// total cost. `cost` is queried lazily so block-structured weights never get
/// materialized.
pub(crate) fn hungarian(n: usize, cost: impl Fn(usize, usize) -> i64) -> (Vec<usize>, i64) {
    if n == 0 {
        return (Vec::new(), 0);
    }
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![inf; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|x| *x = inf);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    let total = assignment.iter().enumerate().map(|(i, &j)| cost(i, j)).sum();
    (assignment, total)
}

/// Minimum-weight perfect matching on a square weight matrix. `None` entries
/// are forbidden pairs. Returns `Ok(None)` when no perfect matching avoids
/// the forbidden pairs.
pub fn min_weight_perfect_matching(weights: &[Vec<Option<u64>>]) -> Result<Option<Matching>> {
    let n = weights.len();
    if let Some(row) = weights.iter().find(|r| r.len() != n) {
        return invalid(format!(
            "weight matrix is not square: {} rows, a row of length {}",
            n,
            row.len()
        ));
    }
    // any matching that uses a forbidden pair weighs more than every feasible one
    let finite_total: u64 = weights.iter().flatten().flatten().sum();
    let sentinel = finite_total + 1;
    let sentinel_i = i64::try_from(sentinel).map_err(|_| crate::Error::InvalidInput("weights too large".into()))?;
    let (assignment, total) = hungarian(n, |i, j| match weights[i][j] {
        Some(w) => w as i64,
        None => sentinel_i,
    });
    if total >= sentinel_i {
        return Ok(None);
    }
    Ok(Some(Matching {
        assignment,
        weight: total as u64,
    }))
}

/// Best clustering with the given medians whose sizes lie in `[p, q]`.
///
/// Cluster `i` uses `medians[i]`; medians are not re-optimized, so the
/// returned cost is measured against them. Returns `Ok(None)` iff
/// `k * p > n` or `k * q < n`.
pub fn assign_with_medians(
    matrix: &CategoricalMatrix,
    p: usize,
    q: usize,
    medians: &[Vec<Symbol>],
) -> Result<Option<Clustering>> {
    let k = medians.len();
    if k == 0 {
        return invalid("at least one median is required");
    }
    if p == 0 || p > q {
        return invalid(format!("size bounds need 1 <= p <= q, got p={p}, q={q}"));
    }
    if let Some(bad) = medians.iter().find(|c| c.len() != matrix.rows()) {
        return invalid(format!(
            "median of length {} for a matrix with {} rows",
            bad.len(),
            matrix.rows()
        ));
    }
    let n = matrix.cols();
    if k * p > n || k * q < n {
        return Ok(None);
    }
    let dist: Vec<Vec<i64>> = medians
        .iter()
        .map(|c| matrix.columns().map(|col| hamming(c, col) as i64).collect())
        .collect();
    let size = k * q;
    let forbidden = (n * matrix.rows()) as i64 + 1;
    // rows: columns then fillers; cols: slot `b * q + r` is slot r of median b
    let (assignment, total) = hungarian(size, |row, slot| {
        let median = slot / q;
        let must_fill = slot % q < p;
        if row < n {
            dist[median][row]
        } else if must_fill {
            forbidden
        } else {
            0
        }
    });
    if total >= forbidden {
        return Err(crate::Error::Internal(
            "size-feasible assignment used a forbidden slot".into(),
        ));
    }
    let mut clusters = vec![Vec::new(); k];
    for (j, &slot) in assignment.iter().take(n).enumerate() {
        clusters[slot / q].push(j);
    }
    Ok(Some(Clustering {
        clusters,
        medians: medians.to_vec(),
        cost: total as u64,
    }))
}

/// Sends every column to its nearest median (lowest index on ties). Optimal
/// when cluster sizes are free; clusters may come out empty.
pub fn greedy_assign(matrix: &CategoricalMatrix, medians: &[Vec<Symbol>]) -> Result<Clustering> {
    if medians.is_empty() {
        return invalid("at least one median is required");
    }
    if let Some(bad) = medians.iter().find(|c| c.len() != matrix.rows()) {
        return invalid(format!(
            "median of length {} for a matrix with {} rows",
            bad.len(),
            matrix.rows()
        ));
    }
    let mut clusters = vec![Vec::new(); medians.len()];
    let mut cost = 0;
    for (j, col) in matrix.columns().enumerate() {
        let (best, d) = medians
            .iter()
            .map(|c| hamming(c, col))
            .enumerate()
            .min_by_key(|&(i, d)| (d, i))
            .unwrap();
        clusters[best].push(j);
        cost += d as u64;
    }
    Ok(Clustering {
        clusters,
        medians: medians.to_vec(),
        cost,
    })
}

/// Lower bound on [`assign_with_medians`] for any size bounds.
pub(crate) fn greedy_cost(matrix: &CategoricalMatrix, medians: &[Vec<Symbol>]) -> u64 {
    matrix
        .columns()
        .map(|col| medians.iter().map(|c| hamming(c, col)).min().unwrap_or(0) as u64)
        .sum()
}
