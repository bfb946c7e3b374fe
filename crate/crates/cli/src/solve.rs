//! Solver dispatch shared by the `solve` and `crosscheck` commands.

use catclust::combinatorics::{ColoringMode, DEFAULT_COLORING_CAP};
use catclust::fpt::{self, FptOptions};
use catclust::kernel::{kernelize_balanced, KernelResult};
use catclust::metric::clustering_cost;
use catclust::oracle::{self, CandidateSource, DEFAULT_MEDIANS_CAP, DEFAULT_PARTITION_CAP};
use catclust::variants::solve_any_with;
use catclust::{check_constraint, validate_partition, Clustering, Error, Instance, Result};
use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Fpt,
    BrutePartition,
    BruteMedians,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Fpt => "fpt",
            SolverKind::BrutePartition => "brute-partition",
            SolverKind::BruteMedians => "brute-medians",
        }
    }
}

/// Oracle and coloring limits, overridable through `CATCLUST_PARTITION_CAP`,
/// `CATCLUST_MEDIANS_CAP` and `CATCLUST_COLORING_CAP`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub partition: usize,
    pub medians: u64,
    pub coloring: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            partition: DEFAULT_PARTITION_CAP,
            medians: DEFAULT_MEDIANS_CAP,
            coloring: DEFAULT_COLORING_CAP,
        }
    }
}

impl Caps {
    pub fn from_env() -> std::result::Result<Caps, String> {
        fn read<T: std::str::FromStr>(name: &str, default: T) -> std::result::Result<T, String> {
            match std::env::var(name) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| format!("{name} must be a nonnegative integer, got {v:?}")),
                Err(_) => Ok(default),
            }
        }
        let d = Caps::default();
        Ok(Caps {
            partition: read("CATCLUST_PARTITION_CAP", d.partition)?,
            medians: read("CATCLUST_MEDIANS_CAP", d.medians)?,
            coloring: read("CATCLUST_COLORING_CAP", d.coloring)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveConfig {
    pub solver: SolverKind,
    pub coloring: ColoringMode,
    pub candidates: CandidateSource,
    pub kernelize: bool,
    pub caps: Caps,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            solver: SolverKind::Fpt,
            coloring: ColoringMode::Perfect,
            candidates: CandidateSource::AllVectors,
            kernelize: false,
            caps: Caps::default(),
        }
    }
}

/// What the kernel did before the solver ran.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KernelSummary {
    pub outcome: &'static str,
    pub columns: usize,
    pub column_bound: Option<u64>,
    pub alphabet: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub witness: Option<Clustering>,
    pub kernel: Option<KernelSummary>,
}

fn direct(instance: &Instance, cfg: &SolveConfig) -> Result<Option<Clustering>> {
    match cfg.solver {
        SolverKind::Fpt => {
            let options = FptOptions {
                coloring: cfg.coloring.clone(),
                coloring_cap: cfg.caps.coloring,
                ..FptOptions::default()
            };
            solve_any_with(instance, &|sub: &Instance| fpt::solve_with(sub, &options))
        }
        SolverKind::BrutePartition => oracle::brute_force_partitions_capped(instance, cfg.caps.partition),
        SolverKind::BruteMedians => oracle::brute_force_medians_capped(instance, cfg.candidates, cfg.caps.medians),
    }
}

/// Runs the configured solver, after the kernel when asked. A witness found
/// on a reduced instance is re-scored against the original matrix.
pub fn run(instance: &Instance, cfg: &SolveConfig) -> Result<Outcome> {
    if !cfg.kernelize {
        return Ok(Outcome {
            witness: direct(instance, cfg)?,
            kernel: None,
        });
    }
    match kernelize_balanced(instance)? {
        KernelResult::Resolved { witness, .. } => Ok(Outcome {
            witness,
            kernel: Some(KernelSummary {
                outcome: "resolved",
                columns: instance.n(),
                column_bound: None,
                alphabet: None,
            }),
        }),
        KernelResult::Reduced {
            instance: reduced,
            column_bound,
            alphabet_size,
        } => {
            let witness = match direct(&reduced, cfg)? {
                Some(c) => {
                    let (cost, medians) = clustering_cost(&instance.matrix, &c.clusters)?;
                    let mut c = Clustering {
                        clusters: c.clusters,
                        medians,
                        cost,
                    };
                    c.normalize();
                    Some(c)
                }
                None => None,
            };
            Ok(Outcome {
                witness,
                kernel: Some(KernelSummary {
                    outcome: "reduced",
                    columns: reduced.n(),
                    column_bound: Some(u64::try_from(column_bound).unwrap_or(u64::MAX)),
                    alphabet: Some(alphabet_size),
                }),
            })
        }
    }
}

/// Checks a witness from scratch: a partition into `k` clusters, sizes
/// allowed by the constraint, and a recomputed cost equal to the reported
/// one and at most `B`.
pub fn verify(instance: &Instance, c: &Clustering) -> Result<()> {
    validate_partition(&c.clusters, instance.n())?;
    let fail = |msg: String| Err(Error::Internal(msg));
    if c.clusters.len() != instance.k {
        return fail(format!("{} clusters, expected {}", c.clusters.len(), instance.k));
    }
    if !check_constraint(&c.sizes(), &instance.constraint, instance.n()) {
        return fail(format!(
            "sizes {:?} violate the {} constraint",
            c.sizes(),
            instance.constraint.name()
        ));
    }
    let (cost, _) = clustering_cost(&instance.matrix, &c.clusters)?;
    if cost != c.cost {
        return fail(format!("reported cost {} but the clusters cost {cost}", c.cost));
    }
    if cost > instance.budget {
        return fail(format!("cost {cost} exceeds the budget {}", instance.budget));
    }
    Ok(())
}
