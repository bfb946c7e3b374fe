//! Preprocessing for balanced clustering.
//!
//! When clusters are large compared to the budget, their medians are forced
//! and the instance is solved outright. Otherwise the instance shrinks to at
//! most `2Bk + delta k^2` columns over an alphabet of at most `B + k`
//! symbols. Rows are left as they are.

use crate::assignment::assign_with_medians;
use crate::error::{invalid, Result};
use crate::metric::clustering_cost;
use crate::model::{
    check_constraint, initial_clusters, Alphabet, CategoricalMatrix, Clustering, Instance, SizeConstraint, Symbol,
};

/// Outcome of [`kernelize_balanced`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KernelResult {
    Resolved {
        answer: bool,
        witness: Option<Clustering>,
    },
    Reduced {
        instance: Instance,
        /// `2Bk + delta k^2`, an upper bound on the reduced column count.
        column_bound: u128,
        alphabet_size: u32,
    },
}

/// How many clusters of a solution with sizes in `[s_lower, s_lower + delta]`
/// have the column of an initial cluster of size `group_size` as their
/// median. Requires `s_lower >= 2B + 1 + (k - 1) delta`.
pub fn median_count(group_size: usize, s_lower: usize, k: usize, delta: usize, budget: u64) -> Result<usize> {
    let slack = (k as u128).saturating_sub(1) * delta as u128;
    if k == 0 || (s_lower as u128) < 2 * budget as u128 + 1 + slack {
        return invalid(format!(
            "median count needs s >= 2B + 1 + (k - 1) delta, got s={s_lower}, B={budget}, k={k}, delta={delta}"
        ));
    }
    let rem = (group_size % s_lower) as u128;
    if rem >= budget as u128 + 1 + slack {
        Ok(group_size.div_ceil(s_lower))
    } else {
        Ok(group_size / s_lower)
    }
}

fn balanced_delta(instance: &Instance) -> Result<usize> {
    match instance.constraint {
        SizeConstraint::Balanced { delta } => Ok(delta),
        ref other => invalid(format!("expected a balanced instance, got {}", other.name())),
    }
}

/// Whether the smallest possible cluster is large enough for
/// [`median_count`] to apply: `ceil(n/k) >= 2B + 1 + delta k`.
pub fn is_large_balanced(n: usize, k: usize, delta: usize, budget: u64) -> bool {
    k >= 1 && k <= n && n.div_ceil(k) as u128 >= 2 * budget as u128 + 1 + delta as u128 * k as u128
}

/// Polynomial-time solver for large balanced instances. For each candidate
/// smallest size `s`, the medians are forced by [`median_count`]; if there
/// are exactly `k` of them, an optimal assignment with sizes in
/// `[s, s + delta]` decides.
pub fn solve_large_balanced(instance: &Instance) -> Result<Option<Clustering>> {
    let delta = balanced_delta(instance)?;
    let n = instance.n();
    let k = instance.k;
    if !is_large_balanced(n, k, delta, instance.budget) {
        return invalid(format!(
            "instance is not large: ceil(n/k) = {} < 2B + 1 + delta k",
            n.div_ceil(k.max(1))
        ));
    }
    let delta = delta.min(n - 1);
    let init = initial_clusters(&instance.matrix);
    for s in n.div_ceil(k).saturating_sub(delta).max(1)..=n / k {
        let mut medians: Vec<Vec<Symbol>> = Vec::new();
        for (g, group) in init.groups().iter().enumerate() {
            let count = median_count(group.len(), s, k, delta, instance.budget)?;
            let column = instance.matrix.column(init.representative(g));
            medians.extend(std::iter::repeat_n(column.to_vec(), count));
            if medians.len() > k {
                break;
            }
        }
        if medians.len() != k {
            continue;
        }
        let Some(c) = assign_with_medians(&instance.matrix, s, (s + delta).min(n), &medians)? else {
            continue;
        };
        if c.cost <= instance.budget {
            let (cost, medians) = clustering_cost(&instance.matrix, &c.clusters)?;
            debug_assert!(check_constraint(&c.sizes(), &instance.constraint, n));
            let mut c = Clustering {
                clusters: c.clusters,
                medians,
                cost,
            };
            c.normalize();
            return Ok(Some(c));
        }
    }
    Ok(None)
}

/// Solves large instances, rejects instances with more than `B + k`
/// distinct columns, and otherwise renames each row's symbols to
/// `0, 1, ..` in increasing order.
pub fn kernelize_balanced(instance: &Instance) -> Result<KernelResult> {
    let delta = balanced_delta(instance)?;
    let n = instance.n();
    let k = instance.k;
    if k > n {
        return Ok(KernelResult::Resolved {
            answer: false,
            witness: None,
        });
    }
    if is_large_balanced(n, k, delta, instance.budget) {
        let witness = solve_large_balanced(instance)?;
        return Ok(KernelResult::Resolved {
            answer: witness.is_some(),
            witness,
        });
    }
    let distinct = initial_clusters(&instance.matrix).len() as u128;
    if distinct > instance.budget as u128 + k as u128 {
        // at least B + 1 columns differ from every median
        return Ok(KernelResult::Resolved {
            answer: false,
            witness: None,
        });
    }
    let column_bound = 2 * instance.budget as u128 * k as u128 + delta as u128 * (k as u128).pow(2);
    debug_assert!(n as u128 <= column_bound);

    let m = instance.m();
    let mut rows = Vec::with_capacity(m);
    let mut alphabet_size = 1;
    for i in 0..m {
        let row = instance.matrix.row(i);
        let mut symbols = row.clone();
        symbols.sort_unstable();
        symbols.dedup();
        alphabet_size = alphabet_size.max(symbols.len() as u32);
        rows.push(
            row.iter()
                .map(|x| symbols.binary_search(x).unwrap() as Symbol)
                .collect::<Vec<_>>(),
        );
    }
    let matrix = CategoricalMatrix::from_rows(&rows)?;
    let reduced = Instance::new(
        matrix,
        Alphabet::new(alphabet_size)?,
        k,
        instance.budget,
        instance.constraint.clone(),
    )?;
    Ok(KernelResult::Reduced {
        instance: reduced,
        column_bound,
        alphabet_size,
    })
}
