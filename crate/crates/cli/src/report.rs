//! JSON reports. Field order is fixed and timing is opt-in, so identical
//! runs print identical bytes.

use catclust::{Clustering, Symbol};
use serde::Serialize;

use crate::solve::KernelSummary;
use crate::Variant;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Params {
    pub variant: Variant,
    pub k: usize,
    #[serde(rename = "B")]
    pub budget: u64,
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub delta: Option<usize>,
    pub alpha: Option<String>,
    pub coloring: Option<&'static str>,
    pub trials: Option<usize>,
    pub seed: u64,
    pub candidates: Option<&'static str>,
    pub kernelize: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub answer: &'static str,
    pub cost: Option<u64>,
    /// 1-based column indices.
    pub clusters: Vec<Vec<usize>>,
    pub medians: Vec<Vec<Symbol>>,
    pub solver: &'static str,
    pub params: Params,
    pub kernel: Option<KernelSummary>,
    pub elapsed_ms: Option<u64>,
}

impl Report {
    pub fn new(
        witness: Option<&Clustering>,
        solver: &'static str,
        params: Params,
        kernel: Option<KernelSummary>,
    ) -> Report {
        let (answer, cost, clusters, medians) = match witness {
            Some(c) => (
                "yes",
                Some(c.cost),
                c.clusters
                    .iter()
                    .map(|cl| cl.iter().map(|&j| j + 1).collect())
                    .collect(),
                c.medians.clone(),
            ),
            None => ("no", None, Vec::new(), Vec::new()),
        };
        Report {
            answer,
            cost,
            clusters,
            medians,
            solver,
            params,
            kernel,
            elapsed_ms: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// One solver disagreement or failure in a cross-check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Disagreement {
    pub id: String,
    pub left: Option<bool>,
    pub right: Option<bool>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrosscheckReport {
    pub left: String,
    pub right: String,
    pub variant: Variant,
    pub seed: u64,
    pub instances: usize,
    pub yes: usize,
    pub disagreements: Vec<Disagreement>,
    pub elapsed_ms: Option<u64>,
}

impl CrosscheckReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}
