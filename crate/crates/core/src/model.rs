//! Domain types shared by every solver: the input matrix, size constraints,
//! instances, clusterings, initial clusters and the intersection graph.
//!
//! All indices are 0-based. Conversion to 1-based indices happens only at the
//! I/O boundary (the CLI).

use std::collections::HashMap;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A symbol of the alphabet, identified with `0..sigma`.
pub type Symbol = u32;

/// Finite alphabet `{0, .., size - 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    size: u32,
}

impl Alphabet {
    pub fn new(size: u32) -> Result<Self> {
        if size == 0 {
            return invalid("alphabet size must be at least 1");
        }
        Ok(Alphabet { size })
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn contains(&self, symbol: Symbol) -> bool {
        symbol < self.size
    }
}

/// An `m x n` matrix over an alphabet, stored column-major since every
/// algorithm here works on columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CategoricalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Symbol>,
}

impl CategoricalMatrix {
    pub fn from_columns(columns: Vec<Vec<Symbol>>) -> Result<Self> {
        let cols = columns.len();
        if cols == 0 {
            return invalid("matrix needs at least one column");
        }
        let rows = columns[0].len();
        if rows == 0 {
            return invalid("matrix needs at least one row");
        }
        let mut data = Vec::with_capacity(rows * cols);
        for (j, col) in columns.into_iter().enumerate() {
            if col.len() != rows {
                return invalid(format!("column {} has {} entries, expected {}", j, col.len(), rows));
            }
            data.extend(col);
        }
        Ok(CategoricalMatrix { rows, cols, data })
    }

    /// Builds a matrix from `m` rows of `n` symbols each.
    pub fn from_rows(rows: &[Vec<Symbol>]) -> Result<Self> {
        if rows.is_empty() {
            return invalid("matrix needs at least one row");
        }
        let n = rows[0].len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return invalid(format!("row {} has {} entries, expected {}", i, r.len(), n));
        }
        let columns = (0..n).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        Self::from_columns(columns)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[Symbol] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[Symbol]> + '_ {
        self.data.chunks_exact(self.rows)
    }

    pub fn get(&self, row: usize, col: usize) -> Symbol {
        self.data[col * self.rows + row]
    }

    /// Largest symbol that occurs anywhere in the matrix.
    pub fn max_symbol(&self) -> Symbol {
        self.data.iter().copied().max().unwrap_or(0)
    }

    /// Row `i` as a vector of `n` symbols.
    pub fn row(&self, i: usize) -> Vec<Symbol> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    /// The submatrix formed by the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        Self::from_columns(cols.iter().map(|&j| self.column(j).to_vec()).collect())
    }
}

/// Restriction on cluster sizes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SizeConstraint {
    Unconstrained,
    /// Every cluster size lies in `[p, q]`.
    Capacitated {
        p: usize,
        q: usize,
    },
    /// Cluster sizes differ pairwise by at most `delta`.
    Balanced {
        delta: usize,
    },
    /// The largest cluster is at most `alpha` times the smallest one.
    FactorBalanced {
        alpha: Ratio<u64>,
    },
    /// All clusters have size exactly `n / k`.
    Equal,
}

impl SizeConstraint {
    pub fn validate(&self) -> Result<()> {
        match self {
            SizeConstraint::Capacitated { p, q } => {
                if *p == 0 {
                    return invalid("capacitated lower bound p must be positive");
                }
                if p > q {
                    return invalid(format!("capacitated bounds need p <= q, got p={p}, q={q}"));
                }
            }
            SizeConstraint::FactorBalanced { alpha } if (*alpha.denom() == 0 || alpha < &Ratio::from_integer(1)) => {
                return invalid("factor-balanced alpha must be a rational >= 1");
            }
            _ => {}
        }
        Ok(())
    }

    /// Whether clusters are allowed to be empty.
    pub fn allows_empty_clusters(&self) -> bool {
        matches!(self, SizeConstraint::Unconstrained)
    }

    /// Short lowercase name used in reports.
    pub fn name(&self) -> &'static str {
        match self {
            SizeConstraint::Unconstrained => "unconstrained",
            SizeConstraint::Capacitated { .. } => "capacitated",
            SizeConstraint::Balanced { .. } => "balanced",
            SizeConstraint::FactorBalanced { .. } => "factor",
            SizeConstraint::Equal => "equal",
        }
    }
}

/// Whether the cluster sizes satisfy `constraint`.
///
/// Constrained variants require every cluster to be nonempty. `Equal` with
/// `k` not dividing `n` is never satisfiable.
pub fn check_constraint(sizes: &[usize], constraint: &SizeConstraint, n: usize) -> bool {
    if let SizeConstraint::Unconstrained = constraint {
        return true;
    }
    if sizes.is_empty() || sizes.iter().sum::<usize>() != n || sizes.contains(&0) {
        return false;
    }
    let min = *sizes.iter().min().unwrap();
    let max = *sizes.iter().max().unwrap();
    match constraint {
        SizeConstraint::Unconstrained => true,
        SizeConstraint::Capacitated { p, q } => sizes.iter().all(|s| p <= s && s <= q),
        SizeConstraint::Balanced { delta } => max - min <= *delta,
        SizeConstraint::FactorBalanced { alpha } => {
            // max <= alpha * min, cross-multiplied to stay in integers
            (max as u128) * (*alpha.denom() as u128) <= (*alpha.numer() as u128) * (min as u128)
        }
        SizeConstraint::Equal => {
            let k = sizes.len();
            n.is_multiple_of(k) && sizes.iter().all(|&s| s == n / k)
        }
    }
}

/// A clustering problem: the matrix, its alphabet, the number of clusters,
/// the cost budget and a size constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub matrix: CategoricalMatrix,
    pub alphabet: Alphabet,
    pub k: usize,
    pub budget: u64,
    pub constraint: SizeConstraint,
}

impl Instance {
    pub fn new(
        matrix: CategoricalMatrix,
        alphabet: Alphabet,
        k: usize,
        budget: u64,
        constraint: SizeConstraint,
    ) -> Result<Self> {
        if k == 0 {
            return invalid("k must be positive");
        }
        constraint.validate()?;
        if matrix.max_symbol() >= alphabet.size() {
            return invalid(format!(
                "matrix symbol {} outside alphabet of size {}",
                matrix.max_symbol(),
                alphabet.size()
            ));
        }
        Ok(Instance {
            matrix,
            alphabet,
            k,
            budget,
            constraint,
        })
    }

    pub fn n(&self) -> usize {
        self.matrix.cols()
    }

    pub fn m(&self) -> usize {
        self.matrix.rows()
    }

    /// Same instance with a different constraint.
    pub fn with_constraint(&self, constraint: SizeConstraint) -> Result<Self> {
        constraint.validate()?;
        Ok(Instance {
            constraint,
            ..self.clone()
        })
    }

    /// Same instance with a different budget.
    pub fn with_budget(&self, budget: u64) -> Self {
        Instance { budget, ..self.clone() }
    }
}

/// Partition of the column indices into maximal groups of identical columns.
///
/// Groups are ordered by their smallest member; members are ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialClustering {
    groups: Vec<Vec<usize>>,
    membership: Vec<usize>,
}

impl InitialClustering {
    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Number of groups `s`.
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Index of the group containing column `j`.
    pub fn group_of(&self, j: usize) -> usize {
        self.membership[j]
    }

    /// A column index whose column represents group `g`.
    pub fn representative(&self, g: usize) -> usize {
        self.groups[g][0]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }
}

pub fn initial_clusters(matrix: &CategoricalMatrix) -> InitialClustering {
    let mut index: HashMap<&[Symbol], usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut membership = Vec::with_capacity(matrix.cols());
    for (j, col) in matrix.columns().enumerate() {
        let g = *index.entry(col).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(j);
        membership.push(g);
    }
    InitialClustering { groups, membership }
}

/// A partition of the column indices into `k` clusters with one median per
/// cluster and the resulting total Hamming cost.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clustering {
    pub clusters: Vec<Vec<usize>>,
    pub medians: Vec<Vec<Symbol>>,
    pub cost: u64,
}

impl Clustering {
    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Vec::len).collect()
    }

    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    /// Sorts members of every cluster and orders clusters by their smallest
    /// member (empty clusters last), keeping medians aligned.
    pub fn normalize(&mut self) {
        for c in &mut self.clusters {
            c.sort_unstable();
        }
        let mut order: Vec<usize> = (0..self.clusters.len()).collect();
        order.sort_by_key(|&i| self.clusters[i].first().copied().unwrap_or(usize::MAX));
        self.clusters = order.iter().map(|&i| std::mem::take(&mut self.clusters[i])).collect();
        self.medians = order.iter().map(|&i| std::mem::take(&mut self.medians[i])).collect();
    }
}

/// Checks that `clusters` partition `0..n`.
pub fn validate_partition(clusters: &[Vec<usize>], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for c in clusters {
        for &j in c {
            if j >= n {
                return invalid(format!("index {j} out of range for {n} columns"));
            }
            if seen[j] {
                return invalid(format!("index {j} appears in more than one cluster"));
            }
            seen[j] = true;
        }
    }
    if let Some(j) = seen.iter().position(|s| !s) {
        return invalid(format!("index {j} is not covered by any cluster"));
    }
    Ok(())
}

/// Bipartite intersection graph between solution clusters and initial
/// clusters: cluster `i` and group `g` are adjacent iff they share an index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionGraph {
    clusters: usize,
    groups: usize,
    edges: Vec<(usize, usize)>,
}

impl IntersectionGraph {
    pub fn cluster_count(&self) -> usize {
        self.clusters
    }

    pub fn group_count(&self) -> usize {
        self.groups
    }

    /// Sorted `(cluster, group)` pairs.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, cluster: usize, group: usize) -> bool {
        self.edges.binary_search(&(cluster, group)).is_ok()
    }

    pub fn cluster_degree(&self, cluster: usize) -> usize {
        self.edges.iter().filter(|e| e.0 == cluster).count()
    }

    pub fn group_degree(&self, group: usize) -> usize {
        self.edges.iter().filter(|e| e.1 == group).count()
    }

    /// True iff the graph has no cycle.
    pub fn is_forest(&self) -> bool {
        // union-find over clusters followed by groups
        let mut parent: Vec<usize> = (0..self.clusters + self.groups).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(i, g) in &self.edges {
            let a = find(&mut parent, i);
            let b = find(&mut parent, self.clusters + g);
            if a == b {
                return false;
            }
            parent[a] = b;
        }
        true
    }
}

pub fn intersection_graph(clusters: &[Vec<usize>], init: &InitialClustering) -> IntersectionGraph {
    let mut edges: Vec<(usize, usize)> = clusters
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |&j| (i, init.group_of(j))))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    IntersectionGraph {
        clusters: clusters.len(),
        groups: init.len(),
        edges,
    }
}

impl fmt::Display for CategoricalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(cols: &[&[Symbol]]) -> CategoricalMatrix {
        CategoricalMatrix::from_columns(cols.iter().map(|c| c.to_vec()).collect()).unwrap()
    }

    #[test]
    fn groups_identical_columns() {
        let a = m(&[&[0, 0], &[0, 0], &[1, 1]]);
        let init = initial_clusters(&a);
        assert_eq!(init.groups(), &[vec![0, 1], vec![2]]);
        assert_eq!(init.len(), 2);
    }

    #[test]
    fn all_identical_or_all_distinct() {
        let same = m(&[&[2], &[2], &[2], &[2]]);
        assert_eq!(initial_clusters(&same).groups(), &[vec![0, 1, 2, 3]]);
        let distinct = m(&[&[0], &[1], &[2]]);
        assert_eq!(initial_clusters(&distinct).len(), 3);
    }

    #[test]
    fn groups_are_ordered_by_smallest_member() {
        let a = m(&[&[1], &[0], &[1], &[0]]);
        assert_eq!(initial_clusters(&a).groups(), &[vec![0, 2], vec![1, 3]]);
    }

    #[test]
    fn intersection_graph_shapes() {
        let a = m(&[&[0], &[0], &[1]]);
        let init = initial_clusters(&a);
        let g = intersection_graph(&[vec![0, 1], vec![2]], &init);
        assert_eq!(g.edges(), &[(0, 0), (1, 1)]);

        let a = m(&[&[0], &[0], &[1], &[1]]);
        let init = initial_clusters(&a);
        let g = intersection_graph(&[vec![0, 2], vec![1, 3]], &init);
        assert_eq!(g.edges().len(), 4);
        assert!(!g.is_forest());

        let a = m(&[&[0], &[1], &[2]]);
        let init = initial_clusters(&a);
        let g = intersection_graph(&[vec![0, 1, 2]], &init);
        assert_eq!(g.edges().len(), 3);
        assert_eq!(g.cluster_degree(0), 3);
        assert!(g.is_forest());
    }

    #[test]
    fn constraint_checks() {
        assert!(check_constraint(
            &[2, 2],
            &SizeConstraint::Capacitated { p: 2, q: 2 },
            4
        ));
        assert!(!check_constraint(&[1, 3], &SizeConstraint::Balanced { delta: 1 }, 4));
        let alpha = Ratio::new(3, 2);
        assert!(check_constraint(&[2, 3], &SizeConstraint::FactorBalanced { alpha }, 5));
        assert!(!check_constraint(&[1, 3], &SizeConstraint::FactorBalanced { alpha }, 4));
        assert!(check_constraint(&[2, 2], &SizeConstraint::Equal, 4));
        assert!(!check_constraint(&[1, 2], &SizeConstraint::Equal, 3));
        assert!(!check_constraint(&[1, 1, 2], &SizeConstraint::Equal, 4));
        assert!(check_constraint(&[0, 5], &SizeConstraint::Unconstrained, 5));
        assert!(!check_constraint(&[0, 5], &SizeConstraint::Balanced { delta: 10 }, 5));
    }

    #[test]
    fn instance_validation() {
        let a = m(&[&[0, 3]]);
        assert!(Instance::new(a.clone(), Alphabet::new(3).unwrap(), 1, 0, SizeConstraint::Equal).is_err());
        assert!(Instance::new(a.clone(), Alphabet::new(4).unwrap(), 1, 0, SizeConstraint::Equal).is_ok());
        assert!(Instance::new(
            a.clone(),
            Alphabet::new(4).unwrap(),
            1,
            0,
            SizeConstraint::Capacitated { p: 3, q: 2 }
        )
        .is_err());
        assert!(Alphabet::new(0).is_err());
        assert!(CategoricalMatrix::from_columns(vec![vec![0], vec![0, 1]]).is_err());
    }

    #[test]
    fn from_rows_transposes() {
        let a = CategoricalMatrix::from_rows(&[vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        assert_eq!(a.rows(), 2);
        assert_eq!(a.cols(), 3);
        assert_eq!(a.column(1), &[1, 4]);
        assert_eq!(a.row(1), vec![3, 4, 5]);
    }
}
