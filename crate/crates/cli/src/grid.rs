//! Seeded instance grids for cross-checking solvers.
//!
//! All randomness comes from ChaCha8 streams seeded by [`stream_seed`], so a
//! grid is the same on every platform and thread count.

use std::ops::RangeInclusive;

use catclust::{Alphabet, CategoricalMatrix, Instance, Ratio, SizeConstraint, Symbol};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Variant;

/// SplitMix64 finalizer over `seed` and a list of tags.
pub fn stream_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut x = seed;
    for &t in tags {
        x = x.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(t);
        x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x ^= x >> 31;
    }
    x
}

pub fn stream(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, tags))
}

/// Half the time uniform columns, half the time up to three centers with
/// occasional single-symbol edits.
pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize, sigma: u32) -> CategoricalMatrix {
    let cols: Vec<Vec<Symbol>> = if rng.gen_bool(0.5) {
        (0..n)
            .map(|_| (0..m).map(|_| rng.gen_range(0..sigma)).collect())
            .collect()
    } else {
        let centers: Vec<Vec<Symbol>> = (0..rng.gen_range(1..=3))
            .map(|_| (0..m).map(|_| rng.gen_range(0..sigma)).collect())
            .collect();
        (0..n)
            .map(|_| {
                let mut c = centers[rng.gen_range(0..centers.len())].clone();
                if rng.gen_bool(0.3) {
                    c[rng.gen_range(0..m)] = rng.gen_range(0..sigma);
                }
                c
            })
            .collect()
    };
    CategoricalMatrix::from_columns(cols).expect("nonempty equal-length columns")
}

/// A planted instance and its hidden clustering.
#[derive(Debug, Clone)]
pub struct Planted {
    pub matrix: CategoricalMatrix,
    pub centers: Vec<Vec<Symbol>>,
    pub clusters: Vec<Vec<usize>>,
}

/// `k` random centers; column `j < k` copies center `j`, the rest copy a
/// random center; then exactly `edits` distinct cells get a different
/// symbol. Needs `sigma >= 2` when `edits > 0`.
pub fn planted(seed: u64, n: usize, m: usize, sigma: u32, k: usize, edits: usize) -> Result<Planted, String> {
    if n == 0 || m == 0 || sigma == 0 {
        return Err("n, m and sigma must be positive".into());
    }
    if k == 0 || k > n {
        return Err(format!("planted k must be in 1..={n}, got {k}"));
    }
    if edits > n * m {
        return Err(format!("{edits} edits do not fit in {m} x {n} cells"));
    }
    if edits > 0 && sigma < 2 {
        return Err("edits need sigma >= 2".into());
    }
    let mut rng = stream(seed, &[0x0070_6c61_6e74]);
    let centers: Vec<Vec<Symbol>> = (0..k)
        .map(|_| (0..m).map(|_| rng.gen_range(0..sigma)).collect())
        .collect();
    let owner: Vec<usize> = (0..n).map(|j| if j < k { j } else { rng.gen_range(0..k) }).collect();
    let mut cols: Vec<Vec<Symbol>> = owner.iter().map(|&c| centers[c].clone()).collect();
    let mut cells: Vec<usize> = (0..n * m).collect();
    let (chosen, _) = cells.partial_shuffle(&mut rng, edits);
    for &cell in chosen.iter() {
        let (j, i) = (cell / m, cell % m);
        let shift = rng.gen_range(1..sigma);
        cols[j][i] = (cols[j][i] + shift) % sigma;
    }
    let mut clusters = vec![Vec::new(); k];
    for (j, &c) in owner.iter().enumerate() {
        clusters[c].push(j);
    }
    let matrix = CategoricalMatrix::from_columns(cols).map_err(|e| e.to_string())?;
    Ok(Planted {
        matrix,
        centers,
        clusters,
    })
}

/// One instance of a grid with a stable identifier.
#[derive(Debug, Clone)]
pub struct Case {
    pub id: String,
    pub instance: Instance,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec {
    pub n: RangeInclusive<usize>,
    pub m: RangeInclusive<usize>,
    pub sigmas: Vec<u32>,
    pub k_max: usize,
    pub b_max: u64,
    /// `(p, q)` windows sampled per cell for capacitated grids.
    pub pq_samples: usize,
    /// Extra instances with random parameters.
    pub random: usize,
    pub seed: u64,
    pub variant: Variant,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n: 2..=8,
            m: 1..=3,
            sigmas: vec![2, 3],
            k_max: 3,
            b_max: 4,
            pq_samples: 3,
            random: 500,
            seed: 0,
            variant: Variant::Capacitated,
        }
    }
}

/// Every size-feasible window `p <= n/k <= q`.
pub fn feasible_windows(n: usize, k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for p in 1..=n / k {
        for q in n.div_ceil(k).max(p)..=n {
            out.push((p, q));
        }
    }
    out
}

fn constraints(variant: Variant, n: usize, k: usize, samples: usize, rng: &mut ChaCha8Rng) -> Vec<SizeConstraint> {
    match variant {
        Variant::Capacitated => {
            let mut windows = feasible_windows(n, k);
            windows.shuffle(rng);
            windows.truncate(samples.max(1));
            windows.sort();
            windows
                .into_iter()
                .map(|(p, q)| SizeConstraint::Capacitated { p, q })
                .collect()
        }
        Variant::Balanced => (0..=2).map(|delta| SizeConstraint::Balanced { delta }).collect(),
        Variant::Factor => [(1, 1), (3, 2), (2, 1)]
            .into_iter()
            .map(|(a, b)| SizeConstraint::FactorBalanced {
                alpha: Ratio::new(a, b),
            })
            .collect(),
        Variant::Equal => vec![SizeConstraint::Equal],
        Variant::Unconstrained => vec![SizeConstraint::Unconstrained],
    }
}

fn describe(c: &SizeConstraint) -> String {
    match c {
        SizeConstraint::Unconstrained => "free".into(),
        SizeConstraint::Capacitated { p, q } => format!("p{p}q{q}"),
        SizeConstraint::Balanced { delta } => format!("d{delta}"),
        SizeConstraint::FactorBalanced { alpha } => format!("a{}/{}", alpha.numer(), alpha.denom()),
        SizeConstraint::Equal => "eq".into(),
    }
}

fn push_cases(
    out: &mut Vec<Case>,
    prefix: &str,
    matrix: &CategoricalMatrix,
    sigma: u32,
    k: usize,
    budgets: &[u64],
    cs: &[SizeConstraint],
) {
    for &budget in budgets {
        for c in cs {
            let instance = Instance::new(
                matrix.clone(),
                Alphabet::new(sigma).expect("positive alphabet"),
                k,
                budget,
                c.clone(),
            )
            .expect("grid instances are valid");
            out.push(Case {
                id: format!("{prefix}-k{k}-B{budget}-{}", describe(c)),
                instance,
            });
        }
    }
}

/// The full grid: one matrix per `(n, m, sigma, k)` cell, every budget,
/// and the variant's constraints; then the random instances.
pub fn build(spec: &GridSpec) -> Vec<Case> {
    let mut out = Vec::new();
    let budgets: Vec<u64> = (0..=spec.b_max).collect();
    for n in spec.n.clone() {
        for m in spec.m.clone() {
            for &sigma in &spec.sigmas {
                for k in 1..=spec.k_max.min(n) {
                    let mut rng = stream(spec.seed, &[n as u64, m as u64, sigma as u64, k as u64]);
                    let matrix = random_matrix(&mut rng, n, m, sigma);
                    let cs = constraints(spec.variant, n, k, spec.pq_samples, &mut rng);
                    push_cases(
                        &mut out,
                        &format!("grid-n{n}-m{m}-s{sigma}"),
                        &matrix,
                        sigma,
                        k,
                        &budgets,
                        &cs,
                    );
                }
            }
        }
    }
    let (n_lo, n_hi) = (*spec.n.start(), *spec.n.end());
    let (m_lo, m_hi) = (*spec.m.start(), *spec.m.end());
    for r in 0..spec.random {
        let mut rng = stream(spec.seed, &[u64::MAX, r as u64]);
        let n = rng.gen_range(n_lo..=n_hi);
        let m = rng.gen_range(m_lo..=m_hi);
        let sigma = *spec.sigmas.choose(&mut rng).expect("at least one alphabet size");
        let k = rng.gen_range(1..=spec.k_max.min(n));
        let budget = rng.gen_range(0..=spec.b_max);
        let matrix = random_matrix(&mut rng, n, m, sigma);
        let mut cs = constraints(spec.variant, n, k, 1, &mut rng);
        let pick = rng.gen_range(0..cs.len());
        let c = cs.swap_remove(pick);
        push_cases(
            &mut out,
            &format!("rand{r}-n{n}-m{m}-s{sigma}"),
            &matrix,
            sigma,
            k,
            &[budget],
            &[c],
        );
    }
    out
}
