//! The exact solver for capacitated clustering parameterized by the budget.
//!
//! A solution consists of simple clusters, each inside one initial cluster,
//! and `t <= B` composite clusters. Among solutions of minimum cost there is
//! one whose composite clusters and the `l` initial clusters they touch form
//! a forest. The solver guesses `t`, `l`, the forest shape (a template) and a
//! coloring of the initial clusters that gives the touched ones distinct
//! colors, then fills in the template with a dynamic program over color
//! subsets.
//!
//! DP tables per template tree (all costs saturate to "infinite" above `B`):
//!
//! * `w(x, h, Y, g, j)`: W-node `x` is group `g`, whose color class is
//!   `color(g)`; `j` members go to the parent composite cluster, the subtree
//!   below `x` uses colors `Y`, and `h` clusters are formed in the subtree
//!   plus the simple clusters of the color class.
//! * `u(x, h, Y, j, s)`: U-node `x` is a composite cluster with median `s`
//!   that already holds `j` members of its parent group.
//!
//! `gw` and `hu` fold the children of a node one at a time.

use std::collections::HashMap;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::combinatorics::{
    block_sizes, coloring_family_capped, enumerate_forest_templates, simple_split_feasible, split_range, Coloring,
    ColoringMode, ForestTemplate, NodeKind, TemplateTree, DEFAULT_COLORING_CAP,
};
use crate::error::{invalid, Error, Result};
use crate::medians::{candidate_medians, CandidateMedianSet};
use crate::metric::{clustering_cost, hamming};
use crate::model::{
    initial_clusters, CategoricalMatrix, Clustering, InitialClustering, Instance, SizeConstraint, Symbol,
};

const INF: u32 = u32::MAX;

/// Knobs for [`solve_with`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FptOptions {
    pub coloring: ColoringMode,
    /// Cap on the size of an exhaustive coloring family.
    pub coloring_cap: u64,
    /// Colorings evaluated per parallel batch.
    pub batch: usize,
}

impl Default for FptOptions {
    fn default() -> Self {
        FptOptions {
            coloring: ColoringMode::Perfect,
            coloring_cap: DEFAULT_COLORING_CAP,
            batch: 16,
        }
    }
}

/// Decides a capacitated instance with the deterministic coloring family.
pub fn solve(instance: &Instance) -> Result<Option<Clustering>> {
    solve_with(instance, &FptOptions::default())
}

/// Returns a clustering of cost at most `B` with all sizes in `[p, q]`, or
/// `None`. The first accepting `(t, l)` wins; the witness need not have
/// minimum cost. Random coloring can miss solutions but never reports a
/// false one.
pub fn solve_with(instance: &Instance, options: &FptOptions) -> Result<Option<Clustering>> {
    let (p, q) = capacitated_bounds(instance)?;
    let n = instance.n();
    let k = instance.k;
    if k * p > n || k * q < n {
        return Ok(None);
    }
    if let Some(c) = solve_t_zero(instance)? {
        return Ok(Some(c));
    }
    let budget = dp_budget(instance);
    if budget == 0 {
        return Ok(None);
    }
    let init = initial_clusters(&instance.matrix);
    let s = init.len();
    let b = budget as usize;
    // every cluster with d distinct column types costs at least d - 1
    if s > b + k {
        return Ok(None);
    }
    let medians = candidate_medians(&instance.matrix, instance.budget);
    let problem = Problem::new(instance, &init, medians.vectors(), p, q, budget);

    for t in 1..=b.min(k) {
        let l_min = (t + 1).max((s + t).saturating_sub(k));
        let l_max = (2 * b).min(b + t).min(s);
        for l in l_min..=l_max {
            // a tree component with l_i W-nodes costs at least l_i - 1
            let templates: Vec<ForestTemplate> = enumerate_forest_templates(t, l)
                .into_iter()
                .filter(|f| l - f.components.len() <= b)
                .collect();
            if templates.is_empty() {
                continue;
            }
            let colorings = coloring_family_capped(s, l, &options.coloring, options.coloring_cap)?;
            if let Some(c) = search(&problem, &templates, &colorings, l, options.batch)? {
                return Ok(Some(c));
            }
        }
    }
    Ok(None)
}

fn capacitated_bounds(instance: &Instance) -> Result<(usize, usize)> {
    match instance.constraint {
        SizeConstraint::Capacitated { p, q } => Ok((p, q)),
        ref other => invalid(format!(
            "the FPT solver needs a capacitated instance, got {}",
            other.name()
        )),
    }
}

/// No clustering costs more than `n * m`, so larger budgets are clamped.
fn dp_budget(instance: &Instance) -> u32 {
    let max_cost = (instance.n() as u64).saturating_mul(instance.m() as u64);
    instance.budget.min(max_cost).min(u64::from(INF - 1)) as u32
}

/// Solutions without composite clusters: every initial cluster is split on
/// its own into blocks of size `[p, q]`, for `k` blocks in total.
pub fn solve_t_zero(instance: &Instance) -> Result<Option<Clustering>> {
    let (p, q) = capacitated_bounds(instance)?;
    let init = initial_clusters(&instance.matrix);
    let sizes = init.sizes();
    let Some(counts) = distribute_blocks(&sizes, instance.k, p, q) else {
        return Ok(None);
    };
    let mut clusters = Vec::with_capacity(instance.k);
    let mut medians = Vec::with_capacity(instance.k);
    for (g, members) in init.groups().iter().enumerate() {
        let mut rest = members.as_slice();
        for size in block_sizes(members.len(), counts[g], p, q).expect("count within the group's range") {
            let (head, tail) = rest.split_at(size);
            clusters.push(head.to_vec());
            medians.push(instance.matrix.column(members[0]).to_vec());
            rest = tail;
        }
    }
    let mut c = Clustering {
        clusters,
        medians,
        cost: 0,
    };
    c.normalize();
    Ok(Some(c))
}

/// Number of blocks per group, `h` in total, each count within the group's
/// feasible range. Starts from the minimum counts and raises them greedily.
fn distribute_blocks(sizes: &[usize], h: usize, p: usize, q: usize) -> Option<Vec<usize>> {
    if !simple_split_feasible(sizes, h, p, q) {
        return None;
    }
    let mut counts: Vec<usize> = sizes.iter().map(|z| z.div_ceil(q)).collect();
    let mut extra = h - counts.iter().sum::<usize>();
    for (c, z) in counts.iter_mut().zip(sizes) {
        let add = extra.min(z / p - *c);
        *c += add;
        extra -= add;
    }
    debug_assert_eq!(extra, 0);
    Some(counts)
}

/// Shared read-only data: group sizes and median-to-group distances.
struct Problem<'a> {
    matrix: &'a CategoricalMatrix,
    init: &'a InitialClustering,
    sizes: Vec<usize>,
    medians: &'a [Vec<Symbol>],
    /// `dist[s][g]`
    dist: Vec<Vec<u32>>,
    k: usize,
    p: usize,
    q: usize,
    budget: u32,
}

impl<'a> Problem<'a> {
    fn new(
        instance: &'a Instance,
        init: &'a InitialClustering,
        medians: &'a [Vec<Symbol>],
        p: usize,
        q: usize,
        budget: u32,
    ) -> Self {
        let dist = medians
            .iter()
            .map(|s| {
                (0..init.len())
                    .map(|g| hamming(s, instance.matrix.column(init.representative(g))) as u32)
                    .collect()
            })
            .collect();
        Problem {
            matrix: &instance.matrix,
            init,
            sizes: init.sizes(),
            medians,
            dist,
            k: instance.k,
            p,
            q,
            budget,
        }
    }

    #[inline]
    fn add(&self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        if s > self.budget as u64 {
            INF
        } else {
            s as u32
        }
    }

    /// `count` members of group `g` charged against median `s`.
    #[inline]
    fn charge(&self, s: usize, g: usize, count: usize) -> u32 {
        let c = self.dist[s][g] as u64 * count as u64;
        if c > self.budget as u64 {
            INF
        } else {
            c as u32
        }
    }
}

/// A coloring with its color classes.
struct ColorCtx<'a> {
    prob: &'a Problem<'a>,
    color: Vec<usize>,
    classes: Vec<Vec<usize>>,
    /// Block-count range of the other groups in `g`'s class, or `None` if
    /// one of them cannot be split.
    others: Vec<Option<(usize, usize)>>,
    l: usize,
}

impl<'a> ColorCtx<'a> {
    fn new(prob: &'a Problem<'a>, coloring: &Coloring, l: usize) -> Self {
        let s = prob.sizes.len();
        let color: Vec<usize> = (0..s).map(|g| coloring.color(g)).collect();
        let mut classes = vec![Vec::new(); l];
        for (g, &c) in color.iter().enumerate() {
            classes[c].push(g);
        }
        let others = (0..s)
            .map(|g| {
                let rest = classes[color[g]].iter().filter(|&&o| o != g).map(|&o| prob.sizes[o]);
                split_range(rest, prob.p, prob.q)
            })
            .collect();
        ColorCtx {
            prob,
            color,
            classes,
            others,
            l,
        }
    }

    /// Group `g` keeps `r` members for simple clusters, the rest of its
    /// class is split whole, and the class yields exactly `h` clusters.
    fn simple_ok(&self, g: usize, r: usize, h: usize) -> bool {
        let Some((lo, hi)) = self.others[g] else {
            return false;
        };
        match split_range([r], self.prob.p, self.prob.q) {
            Some((a, b)) => lo + a <= h && h <= hi + b,
            None => false,
        }
    }

    fn groups_in(&self, mask: u32) -> impl Iterator<Item = usize> + '_ {
        (0..self.l)
            .filter(move |c| mask >> c & 1 == 1)
            .flat_map(move |c| self.classes[c].iter().copied())
    }
}

/// Submasks of `mask` with exactly `count` bits, in decreasing order.
fn submasks(mask: u32, count: u32) -> impl Iterator<Item = u32> {
    let mut sub = mask;
    let mut done = mask == 0 && count > 0;
    std::iter::from_fn(move || loop {
        if done {
            return None;
        }
        let cur = sub;
        if sub == 0 {
            done = true;
        } else {
            sub = (sub - 1) & mask;
        }
        if cur.count_ones() == count {
            return Some(cur);
        }
    })
}

type Key5 = (u32, u32, u32, u32, u32);
type Key6 = (u32, u32, u32, u32, u32, u32);

/// Memoized DP over one template tree for one coloring.
struct TreeDp<'c> {
    ctx: &'c ColorCtx<'c>,
    tree: TemplateTree,
    /// `prefix_w[x][i]`: W-nodes below the first `i` children of `x`.
    prefix_w: Vec<Vec<u32>>,
    w_memo: FxHashMap<Key5, u32>,
    gw_memo: FxHashMap<Key6, u32>,
    u_memo: FxHashMap<Key5, u32>,
    hu_memo: FxHashMap<Key6, u32>,
    root_memo: FxHashMap<(u32, u32), u32>,
}

impl<'c> TreeDp<'c> {
    fn new(ctx: &'c ColorCtx<'c>, tree: &TemplateTree) -> Self {
        let prefix_w = tree
            .nodes
            .iter()
            .map(|node| {
                let mut acc = vec![0u32];
                for &c in &node.children {
                    acc.push(acc.last().unwrap() + tree.nodes[c].w_below as u32);
                }
                acc
            })
            .collect();
        TreeDp {
            ctx,
            tree: tree.clone(),
            prefix_w,
            w_memo: FxHashMap::default(),
            gw_memo: FxHashMap::default(),
            u_memo: FxHashMap::default(),
            hu_memo: FxHashMap::default(),
            root_memo: FxHashMap::default(),
        }
    }

    fn prob(&self) -> &'c Problem<'c> {
        self.ctx.prob
    }

    /// Minimum cost of the tree using colors `x_mask` and `h` clusters.
    fn root_value(&mut self, x_mask: u32, h: usize) -> u32 {
        if h == 0 || x_mask.count_ones() as usize != self.tree.l {
            return INF;
        }
        let key = (x_mask, h as u32);
        if let Some(&v) = self.root_memo.get(&key) {
            return v;
        }
        let mut best = INF;
        for s in 0..self.prob().medians.len() {
            best = best.min(self.u(0, h, x_mask, 0, s));
        }
        self.root_memo.insert(key, best);
        best
    }

    fn w(&mut self, x: usize, h: usize, y: u32, g: usize, j: usize) -> u32 {
        let c = self.ctx.color[g];
        let size = self.prob().sizes[g];
        if y >> c & 1 == 0 || j == 0 || j > size {
            return INF;
        }
        let key = (x as u32, h as u32, y, g as u32, j as u32);
        if let Some(&v) = self.w_memo.get(&key) {
            return v;
        }
        let children = self.tree.nodes[x].children.len();
        let v = if children == 0 {
            if y == 1 << c && self.ctx.simple_ok(g, size - j, h) {
                0
            } else {
                INF
            }
        } else if j >= size {
            INF
        } else {
            self.gw(x, children, g, h, size - j, y)
        };
        self.w_memo.insert(key, v);
        v
    }

    /// W-node `x` (group `g`) after its first `i` children: `jhat` members
    /// remain for those children and for simple clusters.
    fn gw(&mut self, x: usize, i: usize, g: usize, h: usize, jhat: usize, z: u32) -> u32 {
        let c = self.ctx.color[g];
        if z.count_ones() != 1 + self.prefix_w[x][i] || z >> c & 1 == 0 {
            return INF;
        }
        if i == 0 {
            return if self.ctx.simple_ok(g, jhat, h) { 0 } else { INF };
        }
        let key = (x as u32, i as u32, g as u32, h as u32, jhat as u32, z);
        if let Some(&v) = self.gw_memo.get(&key) {
            return v;
        }
        let prob = self.prob();
        let child = self.tree.nodes[x].children[i - 1];
        let need = self.tree.nodes[child].w_below as u32;
        let mut best = INF;
        for zhat in submasks(z & !(1 << c), need) {
            for hp in 1..=h {
                for jp in 1..=jhat.min(prob.q) {
                    let rest = self.gw(x, i - 1, g, h - hp, jhat - jp, z ^ zhat);
                    if rest == INF {
                        continue;
                    }
                    for s in 0..prob.medians.len() {
                        let charge = prob.charge(s, g, jp);
                        if charge == INF || prob.add(charge, rest) == INF {
                            continue;
                        }
                        let u = self.u(child, hp, zhat, jp, s);
                        best = best.min(prob.add(prob.add(u, charge), rest));
                    }
                }
            }
        }
        self.gw_memo.insert(key, best);
        best
    }

    fn u(&mut self, x: usize, h: usize, y: u32, j: usize, s: usize) -> u32 {
        let prob = self.prob();
        if h == 0 || j > prob.q || y.count_ones() as usize != self.tree.nodes[x].w_below {
            return INF;
        }
        let key = (x as u32, h as u32, y, j as u32, s as u32);
        if let Some(&v) = self.u_memo.get(&key) {
            return v;
        }
        let children = self.tree.nodes[x].children.len();
        let lo = prob.p.saturating_sub(j).max(1);
        let mut best = INF;
        for jhat in lo..=(prob.q - j) {
            best = best.min(self.hu(x, children, s, h, jhat, y));
        }
        self.u_memo.insert(key, best);
        best
    }

    /// U-node `x` with median `s` after its first `i` children, which
    /// supply `jhat` members in total.
    fn hu(&mut self, x: usize, i: usize, s: usize, h: usize, jhat: usize, z: u32) -> u32 {
        if h == 0 || z.count_ones() != self.prefix_w[x][i] {
            return INF;
        }
        let key = (x as u32, i as u32, s as u32, h as u32, jhat as u32, z);
        if let Some(&v) = self.hu_memo.get(&key) {
            return v;
        }
        let prob = self.prob();
        let ctx = self.ctx;
        let child = self.tree.nodes[x].children[i - 1];
        let mut best = INF;
        if i == 1 {
            for g in ctx.groups_in(z) {
                let charge = prob.charge(s, g, jhat);
                if charge == INF {
                    continue;
                }
                let w = self.w(child, h - 1, z, g, jhat);
                best = best.min(prob.add(w, charge));
            }
        } else {
            let need = self.tree.nodes[child].w_below as u32;
            for zhat in submasks(z, need) {
                if zhat == z {
                    continue;
                }
                for jp in 1..jhat {
                    for hp in 0..h {
                        let rest = self.hu(x, i - 1, s, h - hp, jhat - jp, z ^ zhat);
                        if rest == INF {
                            continue;
                        }
                        for g in ctx.groups_in(zhat) {
                            let charge = prob.charge(s, g, jp);
                            if charge == INF || prob.add(charge, rest) == INF {
                                continue;
                            }
                            let w = self.w(child, hp, zhat, g, jp);
                            best = best.min(prob.add(prob.add(w, charge), rest));
                        }
                    }
                }
            }
        }
        self.hu_memo.insert(key, best);
        best
    }
}

/// What a DP value decomposes into: composite clusters as (median, parts)
/// and, per color class, the group kept by the template with its remainder
/// and the number of simple clusters for the class.
#[derive(Debug, Default)]
struct Blueprint {
    composites: Vec<(usize, Vec<(usize, usize)>)>,
    simple: Vec<(usize, usize, usize)>,
}

struct Rebuild<'d, 'c> {
    dp: &'d mut TreeDp<'c>,
    out: &'d mut Blueprint,
}

impl Rebuild<'_, '_> {
    fn fail<T>(what: &str) -> Result<T> {
        Err(Error::Internal(format!("no DP choice reproduces the value of {what}")))
    }

    fn root(&mut self, x_mask: u32, h: usize) -> Result<()> {
        let target = self.dp.root_value(x_mask, h);
        for s in 0..self.dp.prob().medians.len() {
            if self.dp.u(0, h, x_mask, 0, s) == target {
                return self.u(0, h, x_mask, 0, s, None);
            }
        }
        Self::fail("a tree root")
    }

    fn w(&mut self, x: usize, h: usize, y: u32, g: usize, j: usize) -> Result<()> {
        let size = self.dp.prob().sizes[g];
        let children = self.dp.tree.nodes[x].children.len();
        if children == 0 {
            self.out.simple.push((g, size - j, h));
            Ok(())
        } else {
            self.gw(x, children, g, h, size - j, y)
        }
    }

    fn gw(&mut self, x: usize, i: usize, g: usize, h: usize, jhat: usize, z: u32) -> Result<()> {
        if i == 0 {
            self.out.simple.push((g, jhat, h));
            return Ok(());
        }
        let target = self.dp.gw(x, i, g, h, jhat, z);
        let prob = self.dp.prob();
        let c = self.dp.ctx.color[g];
        let child = self.dp.tree.nodes[x].children[i - 1];
        let need = self.dp.tree.nodes[child].w_below as u32;
        for zhat in submasks(z & !(1 << c), need) {
            for hp in 1..=h {
                for jp in 1..=jhat.min(prob.q) {
                    let rest = self.dp.gw(x, i - 1, g, h - hp, jhat - jp, z ^ zhat);
                    if rest == INF {
                        continue;
                    }
                    for s in 0..prob.medians.len() {
                        let charge = prob.charge(s, g, jp);
                        if charge == INF {
                            continue;
                        }
                        let u = self.dp.u(child, hp, zhat, jp, s);
                        if prob.add(prob.add(u, charge), rest) == target {
                            self.u(child, hp, zhat, jp, s, Some((g, jp)))?;
                            return self.gw(x, i - 1, g, h - hp, jhat - jp, z ^ zhat);
                        }
                    }
                }
            }
        }
        Self::fail("a W-node")
    }

    fn u(&mut self, x: usize, h: usize, y: u32, j: usize, s: usize, parent: Option<(usize, usize)>) -> Result<()> {
        let target = self.dp.u(x, h, y, j, s);
        let prob = self.dp.prob();
        let children = self.dp.tree.nodes[x].children.len();
        let lo = prob.p.saturating_sub(j).max(1);
        for jhat in lo..=(prob.q - j) {
            if self.dp.hu(x, children, s, h, jhat, y) == target {
                let id = self.out.composites.len();
                self.out.composites.push((s, parent.into_iter().collect()));
                return self.hu(x, children, s, h, jhat, y, id);
            }
        }
        Self::fail("a U-node")
    }

    #[allow(clippy::too_many_arguments)]
    fn hu(&mut self, x: usize, i: usize, s: usize, h: usize, jhat: usize, z: u32, id: usize) -> Result<()> {
        let target = self.dp.hu(x, i, s, h, jhat, z);
        let prob = self.dp.prob();
        let ctx = self.dp.ctx;
        let child = self.dp.tree.nodes[x].children[i - 1];
        if i == 1 {
            for g in ctx.groups_in(z) {
                let charge = prob.charge(s, g, jhat);
                if charge == INF {
                    continue;
                }
                if prob.add(self.dp.w(child, h - 1, z, g, jhat), charge) == target {
                    self.out.composites[id].1.push((g, jhat));
                    return self.w(child, h - 1, z, g, jhat);
                }
            }
            return Self::fail("a U-node's first child");
        }
        let need = self.dp.tree.nodes[child].w_below as u32;
        for zhat in submasks(z, need) {
            if zhat == z {
                continue;
            }
            for jp in 1..jhat {
                for hp in 0..h {
                    let rest = self.dp.hu(x, i - 1, s, h - hp, jhat - jp, z ^ zhat);
                    if rest == INF {
                        continue;
                    }
                    for g in ctx.groups_in(zhat) {
                        let charge = prob.charge(s, g, jp);
                        if charge == INF {
                            continue;
                        }
                        let w = self.dp.w(child, hp, zhat, g, jp);
                        if prob.add(prob.add(w, charge), rest) == target {
                            self.out.composites[id].1.push((g, jp));
                            self.w(child, hp, zhat, g, jp)?;
                            return self.hu(x, i - 1, s, h - hp, jhat - jp, z ^ zhat, id);
                        }
                    }
                }
            }
        }
        Self::fail("a U-node")
    }
}

/// Per-component cost tables `omega_i(X, h)`, dense over color masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentTable {
    /// Number of W-nodes of the component.
    pub l: usize,
    colors: usize,
    k: usize,
    values: Vec<Option<u64>>,
}

impl ComponentTable {
    /// All entries infinite, for masks over `colors` colors and `h <= k`.
    pub fn new(colors: usize, l: usize, k: usize) -> Self {
        ComponentTable {
            l,
            colors,
            k,
            values: vec![None; (1usize << colors) * (k + 1)],
        }
    }

    pub fn set(&mut self, mask: u32, h: usize, cost: Option<u64>) {
        self.values[mask as usize * (self.k + 1) + h] = cost;
    }

    /// Entries with `|X| != l` are infinite regardless of what was set.
    pub fn get(&self, mask: u32, h: usize) -> Option<u64> {
        if mask.count_ones() as usize != self.l || h > self.k || mask as usize >= 1 << self.colors {
            return None;
        }
        self.values[mask as usize * (self.k + 1) + h]
    }
}

/// Minimum total cost of covering all `l` colors with the components, in
/// `k` clusters overall. Components are added one at a time; each takes a
/// color subset of its own size and at least one cluster.
pub fn combine_components(tables: &[ComponentTable], l: usize, k: usize) -> Option<u64> {
    let parts: Vec<usize> = tables.iter().map(|t| t.l).collect();
    let mut omega = |j: usize, mask: u32, h: usize| tables[j].get(mask, h).unwrap_or(u64::MAX);
    let mut memo = HashMap::new();
    let v = combine_value(
        &parts,
        parts.len() - 1,
        full_mask(l),
        k,
        u64::MAX - 1,
        &mut omega,
        &mut memo,
    );
    (v != u64::MAX).then_some(v)
}

fn full_mask(l: usize) -> u32 {
    if l == 32 {
        u32::MAX
    } else {
        (1u32 << l) - 1
    }
}

/// `w_j(X, h)`: components `0..=j` use exactly colors `X` and `h` clusters.
/// Values above `cap` are infinite (`u64::MAX`).
fn combine_value(
    parts: &[usize],
    j: usize,
    x: u32,
    h: usize,
    cap: u64,
    omega: &mut dyn FnMut(usize, u32, usize) -> u64,
    memo: &mut HashMap<(usize, u32, usize), u64>,
) -> u64 {
    if j == 0 {
        let v = omega(0, x, h);
        return if v > cap { u64::MAX } else { v };
    }
    if let Some(&v) = memo.get(&(j, x, h)) {
        return v;
    }
    let mut best = u64::MAX;
    for y in submasks(x, parts[j] as u32) {
        if y == x {
            continue;
        }
        for hp in 1..h {
            let a = omega(j, y, hp);
            if a > cap {
                continue;
            }
            let b = combine_value(parts, j - 1, x ^ y, h - hp, cap, omega, memo);
            if b != u64::MAX && a + b <= cap {
                best = best.min(a + b);
            }
        }
    }
    memo.insert((j, x, h), best);
    best
}

/// The `(X_j, h_j)` per component that realizes `w_f(all, k)`.
fn combine_splits(
    parts: &[usize],
    x: u32,
    h: usize,
    cap: u64,
    omega: &mut dyn FnMut(usize, u32, usize) -> u64,
) -> Result<Vec<(u32, usize)>> {
    let mut memo = HashMap::new();
    let mut out = vec![(0, 0); parts.len()];
    let (mut x, mut h) = (x, h);
    for j in (1..parts.len()).rev() {
        let target = combine_value(parts, j, x, h, cap, omega, &mut memo);
        let mut found = None;
        'search: for y in submasks(x, parts[j] as u32) {
            if y == x {
                continue;
            }
            for hp in 1..h {
                let a = omega(j, y, hp);
                if a > cap {
                    continue;
                }
                let b = combine_value(parts, j - 1, x ^ y, h - hp, cap, omega, &mut memo);
                if b != u64::MAX && a + b == target {
                    found = Some((y, hp));
                    break 'search;
                }
            }
        }
        let (y, hp) = found.ok_or_else(|| Error::Internal("component split not reproducible".into()))?;
        out[j] = (y, hp);
        x ^= y;
        h -= hp;
    }
    out[0] = (x, h);
    Ok(out)
}

/// DP state for all distinct component shapes of a set of templates.
struct ColorEval<'c> {
    ctx: &'c ColorCtx<'c>,
    dps: Vec<TreeDp<'c>>,
    by_code: HashMap<String, usize>,
}

impl<'c> ColorEval<'c> {
    fn new(ctx: &'c ColorCtx<'c>) -> Self {
        ColorEval {
            ctx,
            dps: Vec::new(),
            by_code: HashMap::new(),
        }
    }

    fn indices(&mut self, template: &ForestTemplate) -> Vec<usize> {
        template
            .components
            .iter()
            .map(|tree| {
                if let Some(&i) = self.by_code.get(&tree.code) {
                    return i;
                }
                self.dps.push(TreeDp::new(self.ctx, tree));
                self.by_code.insert(tree.code.clone(), self.dps.len() - 1);
                self.dps.len() - 1
            })
            .collect()
    }

    /// `w_f(all colors, k)` for one template, or `INF`.
    fn template_value(&mut self, template: &ForestTemplate) -> u32 {
        let idx = self.indices(template);
        let parts: Vec<usize> = template.components.iter().map(|c| c.l).collect();
        let prob = self.ctx.prob;
        let dps = &mut self.dps;
        let mut omega = |j: usize, mask: u32, h: usize| to_u64(dps[idx[j]].root_value(mask, h));
        let mut memo = HashMap::new();
        let v = combine_value(
            &parts,
            parts.len() - 1,
            full_mask(self.ctx.l),
            prob.k,
            prob.budget as u64,
            &mut omega,
            &mut memo,
        );
        if v == u64::MAX {
            INF
        } else {
            v as u32
        }
    }

    /// Cheapest template as `(cost, index)`, lowest index on ties.
    fn best(&mut self, templates: &[ForestTemplate]) -> Option<(u32, usize)> {
        let mut best: Option<(u32, usize)> = None;
        for (i, f) in templates.iter().enumerate() {
            let v = self.template_value(f);
            if v != INF && best.is_none_or(|(b, _)| v < b) {
                best = Some((v, i));
            }
        }
        best
    }

    fn blueprint(&mut self, template: &ForestTemplate) -> Result<Blueprint> {
        let idx = self.indices(template);
        let parts: Vec<usize> = template.components.iter().map(|c| c.l).collect();
        let prob = self.ctx.prob;
        let splits = {
            let dps = &mut self.dps;
            let mut omega = |j: usize, mask: u32, h: usize| to_u64(dps[idx[j]].root_value(mask, h));
            combine_splits(&parts, full_mask(self.ctx.l), prob.k, prob.budget as u64, &mut omega)?
        };
        let mut out = Blueprint::default();
        for (j, &(mask, h)) in splits.iter().enumerate() {
            Rebuild {
                dp: &mut self.dps[idx[j]],
                out: &mut out,
            }
            .root(mask, h)?;
        }
        Ok(out)
    }
}

fn to_u64(v: u32) -> u64 {
    if v == INF {
        u64::MAX
    } else {
        v as u64
    }
}

/// Turns a blueprint into an explicit clustering. Composite parts take
/// members from the front of each group; each color class then splits its
/// leftovers into simple clusters.
fn materialize(ctx: &ColorCtx<'_>, bp: &Blueprint, expected: u32) -> Result<Clustering> {
    let prob = ctx.prob;
    let groups = prob.init.groups();
    let mut cursor = vec![0usize; groups.len()];
    let mut clusters: Vec<Vec<usize>> = Vec::with_capacity(prob.k);
    let take = |g: usize, count: usize, cursor: &mut Vec<usize>| -> Result<Vec<usize>> {
        let start = cursor[g];
        if start + count > groups[g].len() {
            return Err(Error::Internal(format!("blueprint overdraws group {g}")));
        }
        cursor[g] += count;
        Ok(groups[g][start..start + count].to_vec())
    };
    for (_, parts) in &bp.composites {
        let mut cluster = Vec::new();
        for &(g, count) in parts {
            cluster.extend(take(g, count, &mut cursor)?);
        }
        clusters.push(cluster);
    }
    if bp.simple.len() != ctx.l {
        return Err(Error::Internal("blueprint does not cover every color class".into()));
    }
    for &(kept, remaining, h) in &bp.simple {
        if groups[kept].len() - cursor[kept] != remaining {
            return Err(Error::Internal(format!("group {kept} has an inconsistent remainder")));
        }
        let class = &ctx.classes[ctx.color[kept]];
        let sizes: Vec<usize> = class.iter().map(|&g| groups[g].len() - cursor[g]).collect();
        let counts = distribute_blocks(&sizes, h, prob.p, prob.q)
            .ok_or_else(|| Error::Internal("simple clusters of a class do not fit".into()))?;
        for (i, &g) in class.iter().enumerate() {
            let blocks = block_sizes(sizes[i], counts[i], prob.p, prob.q).expect("count within the group's range");
            for size in blocks {
                clusters.push(take(g, size, &mut cursor)?);
            }
        }
    }
    let (cost, medians) = clustering_cost(prob.matrix, &clusters)?;
    if cost != expected as u64 {
        return Err(Error::Internal(format!(
            "rebuilt clustering costs {cost}, the DP promised {expected}"
        )));
    }
    let mut c = Clustering {
        clusters,
        medians,
        cost,
    };
    c.normalize();
    Ok(c)
}

/// Evaluates colorings in batches and rebuilds the solution for the first
/// accepting one. Colorings equal up to renaming are evaluated once, and
/// colorings that miss a color are skipped since every color must host a
/// W-node.
fn search(
    prob: &Problem<'_>,
    templates: &[ForestTemplate],
    colorings: &[Coloring],
    l: usize,
    batch: usize,
) -> Result<Option<Clustering>> {
    let mut seen = std::collections::HashSet::new();
    let unique: Vec<Coloring> = colorings
        .iter()
        .filter_map(|c| {
            let (canon, used) = c.canonical();
            (used == l && seen.insert(canon.clone())).then_some(canon)
        })
        .collect();
    for chunk in unique.chunks(batch.max(1)) {
        let results: Vec<Option<(u32, usize)>> = chunk
            .par_iter()
            .map(|coloring| {
                let ctx = ColorCtx::new(prob, coloring, l);
                ColorEval::new(&ctx).best(templates)
            })
            .collect();
        if let Some((i, (value, t))) = results.iter().enumerate().find_map(|(i, r)| r.map(|r| (i, r))) {
            let ctx = ColorCtx::new(prob, &chunk[i], l);
            let bp = ColorEval::new(&ctx).blueprint(&templates[t])?;
            return materialize(&ctx, &bp, value).map(Some);
        }
    }
    Ok(None)
}

/// Cheapest colorful solution with `t` composite clusters touching `l`
/// initial clusters, over all templates, for one coloring.
pub fn colorful_solve(
    instance: &Instance,
    t: usize,
    l: usize,
    coloring: &Coloring,
    medians: &CandidateMedianSet,
) -> Result<Option<Clustering>> {
    let (p, q) = capacitated_bounds(instance)?;
    let init = initial_clusters(&instance.matrix);
    if coloring.len() != init.len() {
        return invalid(format!(
            "coloring covers {} groups, the instance has {}",
            coloring.len(),
            init.len()
        ));
    }
    if coloring.colors().iter().any(|&c| c as usize >= l) || l > 31 {
        return invalid("coloring uses a color outside 0..l");
    }
    let prob = Problem::new(instance, &init, medians.vectors(), p, q, dp_budget(instance));
    let templates = enumerate_forest_templates(t, l);
    let ctx = ColorCtx::new(&prob, coloring, l);
    let mut eval = ColorEval::new(&ctx);
    match eval.best(&templates) {
        Some((value, i)) => {
            let bp = eval.blueprint(&templates[i])?;
            materialize(&ctx, &bp, value).map(Some)
        }
        None => Ok(None),
    }
}

/// Minimum cost of one template tree on color set `x_mask` with `h`
/// clusters, or `None` if infinite (above the budget).
pub fn tree_dp(
    instance: &Instance,
    tree: &TemplateTree,
    x_mask: u32,
    h: usize,
    medians: &CandidateMedianSet,
    coloring: &Coloring,
) -> Result<Option<u64>> {
    let (p, q) = capacitated_bounds(instance)?;
    if tree.nodes.first().map(|n| n.kind) != Some(NodeKind::U) {
        return Err(Error::Internal("template tree must be rooted at a U node".into()));
    }
    let init = initial_clusters(&instance.matrix);
    let l = coloring.colors().iter().map(|&c| c as usize + 1).max().unwrap_or(1);
    if l > 31 || x_mask >> l != 0 {
        return Ok(None);
    }
    let prob = Problem::new(instance, &init, medians.vectors(), p, q, dp_budget(instance));
    let ctx = ColorCtx::new(&prob, coloring, l);
    let mut dp = TreeDp::new(&ctx, tree);
    let v = dp.root_value(x_mask, h);
    Ok((v != INF).then_some(v as u64))
}
