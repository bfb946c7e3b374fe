//! Candidate medians: a finite set guaranteed to contain optimal medians for
//! every clustering of cost at most `B`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::metric::{hamming, majority_median};
use crate::model::{initial_clusters, CategoricalMatrix, InitialClustering, Symbol};

/// Where a candidate came from. A vector that is both a column and a
/// majority is tagged as a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Provenance {
    Column,
    Majority,
}

/// Deduplicated candidate medians in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateMedianSet {
    vectors: Vec<Vec<Symbol>>,
    provenance: Vec<Provenance>,
}

impl CandidateMedianSet {
    pub fn vectors(&self) -> &[Vec<Symbol>] {
        &self.vectors
    }

    pub fn provenance(&self, i: usize) -> Provenance {
        self.provenance[i]
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn contains(&self, v: &[Symbol]) -> bool {
        self.vectors.binary_search_by(|x| x.as_slice().cmp(v)).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[Symbol], Provenance)> + '_ {
        self.vectors
            .iter()
            .map(Vec::as_slice)
            .zip(self.provenance.iter().copied())
    }
}

/// All distinct columns plus the majority median of every multiset of column
/// types with `2 <= |S| <= max(B, 1)`, where each type appears at most
/// `min(count, B)` times and `S` costs at most `B` around its majority.
///
/// A cluster of cost at most `B` either has more than `B` members, and then
/// each of its optimal medians is one of its columns, or it is itself such a
/// multiset and its majority median is listed.
pub fn candidate_medians(matrix: &CategoricalMatrix, budget: u64) -> CandidateMedianSet {
    let init = initial_clusters(matrix);
    let mut found: BTreeMap<Vec<Symbol>, Provenance> = BTreeMap::new();
    for g in 0..init.len() {
        found.insert(matrix.column(init.representative(g)).to_vec(), Provenance::Column);
    }

    let cap = usize::try_from(budget.max(1)).unwrap_or(usize::MAX).min(matrix.cols());
    if cap >= 2 {
        let types: Vec<(&[Symbol], usize)> = (0..init.len())
            .map(|g| {
                let limit = init.groups()[g].len().min(cap);
                (matrix.column(init.representative(g)), limit)
            })
            .collect();
        let mut chosen: Vec<&[Symbol]> = Vec::with_capacity(cap);
        enumerate_multisets(&types, 0, cap, budget, &mut chosen, &mut found);
    }

    let (vectors, provenance) = found.into_iter().unzip();
    CandidateMedianSet { vectors, provenance }
}

fn enumerate_multisets<'a>(
    types: &[(&'a [Symbol], usize)],
    next: usize,
    cap: usize,
    budget: u64,
    chosen: &mut Vec<&'a [Symbol]>,
    found: &mut BTreeMap<Vec<Symbol>, Provenance>,
) {
    if next == types.len() {
        if chosen.len() >= 2 {
            let median = majority_median(chosen).expect("nonempty multiset of equal-length columns");
            let cost: u64 = chosen.iter().map(|c| hamming(&median, c) as u64).sum();
            if cost <= budget {
                found.entry(median).or_insert(Provenance::Majority);
            }
        }
        return;
    }
    let (column, limit) = types[next];
    let before = chosen.len();
    enumerate_multisets(types, next + 1, cap, budget, chosen, found);
    for _ in 0..limit {
        if chosen.len() == cap {
            break;
        }
        chosen.push(column);
        enumerate_multisets(types, next + 1, cap, budget, chosen, found);
    }
    chosen.truncate(before);
}

/// Initial clusters that can serve as the median of `cluster` when its cost is
/// at most `budget`.
///
/// With `|I| >= B + 1`, a median within budget must equal at least `|I| - B`
/// members, so only groups holding that many members qualify; once
/// `|I| >= 2B + 1` at most one does. Returns `None` for clusters of size at
/// most `B`, which force nothing.
pub fn big_cluster_median_check(cluster: &[usize], budget: u64, init: &InitialClustering) -> Option<Vec<usize>> {
    let size = cluster.len() as u64;
    if size <= budget {
        return None;
    }
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for &j in cluster {
        *counts.entry(init.group_of(j)).or_default() += 1;
    }
    let need = size - budget;
    Some(counts.into_iter().filter(|&(_, c)| c >= need).map(|(g, _)| g).collect())
}
