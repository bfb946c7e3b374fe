//! Exact categorical clustering under Hamming cost with cluster-size
//! constraints.
//!
//! Columns of a matrix over a finite alphabet are split into `k` clusters.
//! The cost of a cluster is the total Hamming distance from its members to
//! its median, and the question is whether some clustering of cost at most
//! `B` meets the size constraint. The main solver, [`fpt::solve`], runs in
//! time exponential only in `B` (through color coding and a dynamic program
//! over forest templates). Brute-force solvers in [`oracle`] certify it on
//! small inputs.
//!
//! ```
//! use catclust::{fpt, Alphabet, CategoricalMatrix, Instance, SizeConstraint};
//!
//! let matrix = CategoricalMatrix::from_columns(vec![
//!     vec![0, 0], vec![0, 0], vec![0, 0], vec![1, 1],
//! ]).unwrap();
//! let capacitated = SizeConstraint::Capacitated { p: 2, q: 2 };
//! let instance = Instance::new(matrix, Alphabet::new(2).unwrap(), 2, 1, capacitated).unwrap();
//! assert!(fpt::solve(&instance).unwrap().is_none());
//!
//! let witness = fpt::solve(&instance.with_budget(2)).unwrap().unwrap();
//! assert_eq!(witness.cost, 2);
//! ```

pub mod assignment;
pub mod combinatorics;
pub mod error;
pub mod fpt;
pub mod kernel;
pub mod medians;
pub mod metric;
pub mod model;
pub mod oracle;
pub mod variants;

pub use error::{Error, Result};
pub use model::{
    check_constraint, initial_clusters, intersection_graph, validate_partition, Alphabet, CategoricalMatrix,
    Clustering, InitialClustering, Instance, IntersectionGraph, SizeConstraint, Symbol,
};
pub use num_rational::Ratio;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/instances.md")]
    mod instances {}
    #[doc = include_str!("../../../book/src/medians.md")]
    mod medians {}
    #[doc = include_str!("../../../book/src/assignment.md")]
    mod assignment {}
    #[doc = include_str!("../../../book/src/fpt.md")]
    mod fpt {}
    #[doc = include_str!("../../../book/src/variants.md")]
    mod variants {}
    #[doc = include_str!("../../../book/src/kernel.md")]
    mod kernel {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
}
