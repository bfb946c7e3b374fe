//! Hamming distance, majority-rule medians and clustering cost.

use crate::error::{invalid, Result};
use crate::model::{validate_partition, CategoricalMatrix, Symbol};

/// Number of coordinates in which `a` and `b` differ.
pub fn hamming_distance(a: &[Symbol], b: &[Symbol]) -> Result<usize> {
    if a.len() != b.len() {
        return invalid(format!(
            "vectors of length {} and {} cannot be compared",
            a.len(),
            b.len()
        ));
    }
    Ok(hamming(a, b))
}

#[inline]
pub(crate) fn hamming(a: &[Symbol], b: &[Symbol]) -> usize {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Coordinate-wise most frequent symbol. Ties go to the smallest symbol.
///
/// The result minimizes the total Hamming distance to the given columns over
/// all vectors of the same length.
pub fn majority_median<C: AsRef<[Symbol]>>(columns: &[C]) -> Result<Vec<Symbol>> {
    let first = match columns.first() {
        Some(c) => c.as_ref(),
        None => return invalid("majority median of an empty multiset"),
    };
    let m = first.len();
    if let Some(bad) = columns.iter().find(|c| c.as_ref().len() != m) {
        return invalid(format!(
            "column of length {} in a multiset of length-{} columns",
            bad.as_ref().len(),
            m
        ));
    }
    let mut counts: Vec<u32> = Vec::new();
    let median = (0..m)
        .map(|row| {
            counts.clear();
            for c in columns {
                let s = c.as_ref()[row] as usize;
                if counts.len() <= s {
                    counts.resize(s + 1, 0);
                }
                counts[s] += 1;
            }
            // max_by_key keeps the last maximum, so scan in reverse
            counts
                .iter()
                .enumerate()
                .rev()
                .max_by_key(|(_, &c)| c)
                .map(|(s, _)| s as Symbol)
                .unwrap()
        })
        .collect();
    Ok(median)
}

/// Total distance from `center` to the given columns of `matrix`.
pub fn cluster_cost(matrix: &CategoricalMatrix, cluster: &[usize], center: &[Symbol]) -> u64 {
    cluster.iter().map(|&j| hamming(center, matrix.column(j)) as u64).sum()
}

/// Optimal cost of a partition together with its majority medians.
///
/// Empty clusters (allowed only without size constraints) get the all-zero
/// median and contribute nothing.
pub fn clustering_cost(matrix: &CategoricalMatrix, clusters: &[Vec<usize>]) -> Result<(u64, Vec<Vec<Symbol>>)> {
    validate_partition(clusters, matrix.cols())?;
    let mut total = 0;
    let mut medians = Vec::with_capacity(clusters.len());
    for cluster in clusters {
        if cluster.is_empty() {
            medians.push(vec![0; matrix.rows()]);
            continue;
        }
        let cols: Vec<&[Symbol]> = cluster.iter().map(|&j| matrix.column(j)).collect();
        let median = majority_median(&cols)?;
        total += cluster_cost(matrix, cluster, &median);
        medians.push(median);
    }
    Ok((total, medians))
}

/// Precomputed distances between columns, and between candidate centers and
/// columns. Read-only after construction.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    cols: usize,
    column_dist: Vec<u32>,
}

impl DistanceTable {
    pub fn new(matrix: &CategoricalMatrix) -> Self {
        let n = matrix.cols();
        let mut column_dist = vec![0; n * n];
        for a in 0..n {
            for b in (a + 1)..n {
                let d = hamming(matrix.column(a), matrix.column(b)) as u32;
                column_dist[a * n + b] = d;
                column_dist[b * n + a] = d;
            }
        }
        DistanceTable { cols: n, column_dist }
    }

    pub fn between(&self, a: usize, b: usize) -> u32 {
        self.column_dist[a * self.cols + b]
    }
}

/// `table[c][j]` is the distance between center `c` and column `j`.
pub fn center_distances(matrix: &CategoricalMatrix, centers: &[Vec<Symbol>]) -> Vec<Vec<u32>> {
    centers
        .iter()
        .map(|c| matrix.columns().map(|col| hamming(c, col) as u32).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances() {
        assert_eq!(hamming_distance(&[0, 1, 1], &[0, 0, 1]).unwrap(), 1);
        assert_eq!(hamming_distance(&[2, 0, 1], &[2, 0, 1]).unwrap(), 0);
        assert_eq!(hamming_distance(&[0, 1, 2], &[2, 1, 0]).unwrap(), 2);
        assert!(hamming_distance(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn majority_examples() {
        let cols: Vec<Vec<Symbol>> = vec![vec![0, 0], vec![0, 1], vec![1, 1]];
        assert_eq!(majority_median(&cols).unwrap(), vec![0, 1]);
        // tie goes to the smaller symbol
        let tie: Vec<Vec<Symbol>> = vec![vec![0, 0], vec![1, 1]];
        assert_eq!(majority_median(&tie).unwrap(), vec![0, 0]);
        let tie3: Vec<Vec<Symbol>> = vec![vec![2], vec![1]];
        assert_eq!(majority_median(&tie3).unwrap(), vec![1]);
        assert_eq!(majority_median(&[vec![2u32, 1, 0]]).unwrap(), vec![2, 1, 0]);
        let empty: Vec<Vec<Symbol>> = vec![];
        assert!(majority_median(&empty).is_err());
        assert!(majority_median(&[vec![0u32], vec![0, 1]]).is_err());
    }

    #[test]
    fn cost_of_partitions() {
        let a = CategoricalMatrix::from_columns(vec![vec![0, 0], vec![0, 0], vec![1, 1]]).unwrap();
        let (cost, medians) = clustering_cost(&a, &[vec![0, 1, 2]]).unwrap();
        assert_eq!(cost, 2);
        assert_eq!(medians, vec![vec![0, 0]]);
        let (cost, _) = clustering_cost(&a, &[vec![0, 1], vec![2]]).unwrap();
        assert_eq!(cost, 0);
        assert!(clustering_cost(&a, &[vec![0, 1]]).is_err());
        assert!(clustering_cost(&a, &[vec![0, 1], vec![1, 2]]).is_err());
    }

    #[test]
    fn distance_tables() {
        let a = CategoricalMatrix::from_columns(vec![vec![0, 0], vec![0, 1], vec![1, 1]]).unwrap();
        let t = DistanceTable::new(&a);
        assert_eq!(t.between(0, 2), 2);
        assert_eq!(t.between(2, 1), 1);
        let c = center_distances(&a, &[vec![1, 1]]);
        assert_eq!(c, vec![vec![2, 1, 0]]);
    }
}
