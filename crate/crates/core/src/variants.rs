//! Balanced, factor-balanced and equal clustering as sweeps over capacitated
//! instances.

use num_rational::Ratio;

use crate::error::{invalid, Error, Result};
use crate::fpt;
use crate::model::{check_constraint, Clustering, Instance, SizeConstraint};

/// A capacitated solver the sweeps delegate to.
pub type CapacitatedSolver<'a> = dyn Fn(&Instance) -> Result<Option<Clustering>> + Sync + 'a;

/// `[p, q]` windows to try, in order. A clustering satisfies the constraint
/// iff it fits one of them.
pub fn capacitated_windows(constraint: &SizeConstraint, n: usize, k: usize) -> Vec<(usize, usize)> {
    if k == 0 || k > n {
        return Vec::new();
    }
    match constraint {
        SizeConstraint::Unconstrained => vec![(1, n)],
        SizeConstraint::Capacitated { p, q } => vec![(*p, *q)],
        SizeConstraint::Balanced { delta } => {
            // the smallest cluster has between ceil(n/k) - delta and floor(n/k) members
            let lo = n.div_ceil(k).saturating_sub(*delta).max(1);
            (lo..=n / k).map(|p| (p, (p + delta).min(n))).collect()
        }
        SizeConstraint::FactorBalanced { alpha } => {
            let (num, den) = (*alpha.numer() as u128, *alpha.denom() as u128);
            // n / (alpha k) <= p <= n / k
            let lo = ((n as u128 * den).div_ceil(num * k as u128) as usize).max(1);
            (lo..=n / k)
                .map(|p| (p, (Ratio::new(p as u128 * num, den).to_integer() as usize).min(n)))
                .collect()
        }
        SizeConstraint::Equal => {
            if n.is_multiple_of(k) {
                vec![(n / k, n / k)]
            } else {
                Vec::new()
            }
        }
    }
}

fn sweep(instance: &Instance, solver: &CapacitatedSolver<'_>) -> Result<Option<Clustering>> {
    for (p, q) in capacitated_windows(&instance.constraint, instance.n(), instance.k) {
        let sub = instance.with_constraint(SizeConstraint::Capacitated { p, q })?;
        if let Some(c) = solver(&sub)? {
            if !check_constraint(&c.sizes(), &instance.constraint, instance.n()) {
                return Err(Error::Internal(format!(
                    "witness sizes {:?} violate the {} constraint",
                    c.sizes(),
                    instance.constraint.name()
                )));
            }
            return Ok(Some(c));
        }
    }
    Ok(None)
}

fn expect(instance: &Instance, name: &str, ok: bool) -> Result<()> {
    if ok {
        Ok(())
    } else {
        invalid(format!(
            "expected a {name} instance, got {}",
            instance.constraint.name()
        ))
    }
}

/// Tries `p` from `max(1, ceil(n/k) - delta)` up to `floor(n/k)` with
/// `q = min(n, p + delta)`.
pub fn solve_balanced(instance: &Instance) -> Result<Option<Clustering>> {
    solve_balanced_with(instance, &fpt::solve)
}

pub fn solve_balanced_with(instance: &Instance, solver: &CapacitatedSolver<'_>) -> Result<Option<Clustering>> {
    expect(
        instance,
        "balanced",
        matches!(instance.constraint, SizeConstraint::Balanced { .. }),
    )?;
    sweep(instance, solver)
}

/// Tries integer `p` in `[n / (alpha k), n / k]` with `q = floor(alpha p)`.
pub fn solve_factor_balanced(instance: &Instance) -> Result<Option<Clustering>> {
    solve_factor_balanced_with(instance, &fpt::solve)
}

pub fn solve_factor_balanced_with(instance: &Instance, solver: &CapacitatedSolver<'_>) -> Result<Option<Clustering>> {
    expect(
        instance,
        "factor-balanced",
        matches!(instance.constraint, SizeConstraint::FactorBalanced { .. }),
    )?;
    sweep(instance, solver)
}

/// Capacitated with `p = q = n / k`; no if `k` does not divide `n`.
pub fn solve_equal(instance: &Instance) -> Result<Option<Clustering>> {
    solve_equal_with(instance, &fpt::solve)
}

pub fn solve_equal_with(instance: &Instance, solver: &CapacitatedSolver<'_>) -> Result<Option<Clustering>> {
    expect(instance, "equal", matches!(instance.constraint, SizeConstraint::Equal))?;
    sweep(instance, solver)
}

/// Dispatches on the constraint. Without size constraints, `k > n` is solved
/// by singletons plus empty clusters; otherwise empty clusters never help,
/// so the instance is capacitated with `[1, n]`.
pub fn solve_any_with(instance: &Instance, solver: &CapacitatedSolver<'_>) -> Result<Option<Clustering>> {
    match instance.constraint {
        SizeConstraint::Capacitated { .. } => solver(instance),
        SizeConstraint::Unconstrained if instance.k > instance.n() => {
            let n = instance.n();
            let mut clusters: Vec<Vec<usize>> = (0..n).map(|j| vec![j]).collect();
            clusters.resize(instance.k, Vec::new());
            let (cost, medians) = crate::metric::clustering_cost(&instance.matrix, &clusters)?;
            Ok(Some(Clustering {
                clusters,
                medians,
                cost,
            }))
        }
        _ => sweep(instance, solver),
    }
}

pub fn solve_any(instance: &Instance) -> Result<Option<Clustering>> {
    solve_any_with(instance, &fpt::solve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Alphabet, CategoricalMatrix, Symbol};

    fn inst(cols: Vec<Vec<Symbol>>, k: usize, budget: u64, constraint: SizeConstraint) -> Instance {
        let m = CategoricalMatrix::from_columns(cols).unwrap();
        Instance::new(m, Alphabet::new(2).unwrap(), k, budget, constraint).unwrap()
    }

    #[test]
    fn windows() {
        assert_eq!(
            capacitated_windows(&SizeConstraint::Balanced { delta: 0 }, 4, 2),
            vec![(2, 2)]
        );
        assert_eq!(
            capacitated_windows(&SizeConstraint::Balanced { delta: 9 }, 4, 2),
            vec![(1, 4), (2, 4)]
        );
        let alpha = Ratio::new(3, 2);
        assert_eq!(
            capacitated_windows(&SizeConstraint::FactorBalanced { alpha }, 7, 2),
            vec![(3, 4)]
        );
        assert_eq!(capacitated_windows(&SizeConstraint::Equal, 4, 3), vec![]);
        assert_eq!(capacitated_windows(&SizeConstraint::Equal, 6, 3), vec![(2, 2)]);
    }

    #[test]
    fn balanced_three_one() {
        let cols = vec![vec![0, 0], vec![0, 0], vec![0, 0], vec![1, 1]];
        let b = SizeConstraint::Balanced { delta: 0 };
        assert!(solve_balanced(&inst(cols.clone(), 2, 2, b.clone())).unwrap().is_some());
        assert!(solve_balanced(&inst(cols, 2, 1, b)).unwrap().is_none());
    }

    #[test]
    fn factor_and_equal() {
        let cols = vec![vec![0, 0], vec![0, 0], vec![0, 0], vec![0, 0], vec![1, 1], vec![1, 1]];
        let f = SizeConstraint::FactorBalanced {
            alpha: Ratio::new(2, 1),
        };
        let c = solve_factor_balanced(&inst(cols.clone(), 2, 0, f)).unwrap().unwrap();
        let mut sizes = c.sizes();
        sizes.sort();
        assert_eq!(sizes, vec![2, 4]);
        assert!(solve_equal(&inst(cols[..4].to_vec(), 3, 5, SizeConstraint::Equal))
            .unwrap()
            .is_none());
        assert!(solve_equal(&inst(cols.clone(), 3, 0, SizeConstraint::Equal))
            .unwrap()
            .is_some());
    }

    #[test]
    fn unconstrained_with_more_clusters_than_columns() {
        let c = solve_any(&inst(vec![vec![0], vec![1]], 4, 0, SizeConstraint::Unconstrained))
            .unwrap()
            .unwrap();
        assert_eq!(c.clusters.len(), 4);
        assert_eq!(c.cost, 0);
    }
}
