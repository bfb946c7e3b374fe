//! Block-split feasibility, forest templates and coloring families.

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// True iff a set of `set_size` elements splits into exactly `h` blocks with
/// sizes in `[p, q]`.
pub fn block_partition_feasible(set_size: usize, h: usize, p: usize, q: usize) -> bool {
    debug_assert!(1 <= p && p <= q);
    set_size.div_ceil(q) <= h && h <= set_size / p
}

/// True iff groups of the given sizes split, each on its own, into `h`
/// blocks in total with sizes in `[p, q]`.
pub fn simple_split_feasible(group_sizes: &[usize], h: usize, p: usize, q: usize) -> bool {
    match split_range(group_sizes.iter().copied(), p, q) {
        Some((lo, hi)) => lo <= h && h <= hi,
        None => false,
    }
}

/// Range of block counts reachable by splitting every group separately, or
/// `None` if some group cannot be split at all.
pub(crate) fn split_range(sizes: impl IntoIterator<Item = usize>, p: usize, q: usize) -> Option<(usize, usize)> {
    let mut lo = 0;
    let mut hi = 0;
    for z in sizes {
        let (a, b) = (z.div_ceil(q), z / p);
        if a > b {
            return None;
        }
        lo += a;
        hi += b;
    }
    Some((lo, hi))
}

/// Sizes of `h` blocks in `[p, q]` summing to `set_size`: every block gets
/// `p`, then the remainder is poured greedily into the first blocks.
pub(crate) fn block_sizes(set_size: usize, h: usize, p: usize, q: usize) -> Option<Vec<usize>> {
    if !block_partition_feasible(set_size, h, p, q) {
        return None;
    }
    let mut sizes = vec![p; h];
    let mut rest = set_size - p * h;
    for s in sizes.iter_mut() {
        let add = rest.min(q - p);
        *s += add;
        rest -= add;
    }
    debug_assert_eq!(rest, 0);
    Some(sizes)
}

/// Vertex side of a forest template: `U` nodes stand for composite
/// clusters, `W` nodes for the initial clusters they touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    U,
    W,
}

impl NodeKind {
    fn tag(self) -> char {
        match self {
            NodeKind::U => 'u',
            NodeKind::W => 'w',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateNode {
    pub kind: NodeKind,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Number of `W` nodes in the subtree rooted here.
    pub w_below: usize,
}

/// One tree of a template, rooted at its smallest-code `U` vertex. Node 0 is
/// the root and nodes are stored in preorder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateTree {
    pub code: String,
    pub nodes: Vec<TemplateNode>,
    pub t: usize,
    pub l: usize,
}

impl TemplateTree {
    fn from_code(code: &str) -> TemplateTree {
        let bytes = code.as_bytes();
        let mut nodes: Vec<TemplateNode> = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            match bytes[i] {
                b'u' | b'w' => {
                    let kind = if bytes[i] == b'u' { NodeKind::U } else { NodeKind::W };
                    let id = nodes.len();
                    let parent = stack.last().copied();
                    if let Some(par) = parent {
                        nodes[par].children.push(id);
                    }
                    nodes.push(TemplateNode {
                        kind,
                        parent,
                        children: Vec::new(),
                        w_below: 0,
                    });
                    stack.push(id);
                    i += 2;
                }
                b')' => {
                    stack.pop();
                    i += 1;
                }
                other => unreachable!("bad template code byte {other}"),
            }
        }
        for v in (0..nodes.len()).rev() {
            let own = usize::from(nodes[v].kind == NodeKind::W);
            nodes[v].w_below = own + nodes[v].children.iter().map(|&c| nodes[c].w_below).sum::<usize>();
        }
        let t = nodes.iter().filter(|n| n.kind == NodeKind::U).count();
        let l = nodes.len() - t;
        TemplateTree {
            code: code.to_string(),
            nodes,
            t,
            l,
        }
    }

    /// Edges as `(parent, child)` pairs of node indices.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(v, n)| n.parent.map(|p| (p, v)))
            .collect()
    }
}

/// An unlabeled forest on `t` U-nodes and `l` W-nodes. Components are sorted
/// by canonical code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestTemplate {
    pub t: usize,
    pub l: usize,
    pub components: Vec<TemplateTree>,
}

impl ForestTemplate {
    /// All edges as `(u, w)` pairs, numbering U-nodes and W-nodes separately
    /// and consecutively across components.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let (mut u_base, mut w_base) = (0, 0);
        for tree in &self.components {
            let mut local = vec![0; tree.nodes.len()];
            let (mut nu, mut nw) = (0, 0);
            for (v, node) in tree.nodes.iter().enumerate() {
                match node.kind {
                    NodeKind::U => {
                        local[v] = u_base + nu;
                        nu += 1;
                    }
                    NodeKind::W => {
                        local[v] = w_base + nw;
                        nw += 1;
                    }
                }
            }
            for (a, b) in tree.edges() {
                let pair = match tree.nodes[a].kind {
                    NodeKind::U => (local[a], local[b]),
                    NodeKind::W => (local[b], local[a]),
                };
                out.push(pair);
            }
            u_base += nu;
            w_base += nw;
        }
        out.sort_unstable();
        out
    }

    pub fn code(&self) -> String {
        self.components
            .iter()
            .map(|c| c.code.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn encode(kind: NodeKind, mut children: Vec<String>) -> String {
    children.sort_unstable();
    let mut s = String::with_capacity(2 + children.iter().map(String::len).sum::<usize>() + 1);
    s.push(kind.tag());
    s.push('(');
    for c in children {
        s.push_str(&c);
    }
    s.push(')');
    s
}

/// Memoized generator of rooted trees, as canonical codes.
#[derive(Default)]
struct RootedGen {
    u_trees: HashMap<(usize, usize, usize), Vec<String>>,
    w_trees: HashMap<(usize, usize), Vec<String>>,
}

impl RootedGen {
    /// Trees rooted at a U node with `a` U-nodes and `b` W-nodes whose root
    /// has at least `min_children` children. Every U node has a child, so all
    /// leaves are W nodes.
    fn u_rooted(&mut self, a: usize, b: usize, min_children: usize) -> Vec<String> {
        if let Some(v) = self.u_trees.get(&(a, b, min_children)) {
            return v.clone();
        }
        let mut out = Vec::new();
        if a >= 1 && b >= 1 {
            let mut options = Vec::new();
            for ca in 0..a {
                for cb in 1..=b {
                    for code in self.w_rooted(ca, cb) {
                        options.push((code, ca, cb));
                    }
                }
            }
            options.sort();
            let mut picked = Vec::new();
            pick_children(&options, 0, a - 1, b, min_children, &mut picked, &mut |children| {
                out.push(encode(NodeKind::U, children.to_vec()));
            });
        }
        out.sort();
        out.dedup();
        self.u_trees.insert((a, b, min_children), out.clone());
        out
    }

    /// Trees rooted at a W node with `a` U-nodes and `b` W-nodes.
    fn w_rooted(&mut self, a: usize, b: usize) -> Vec<String> {
        if let Some(v) = self.w_trees.get(&(a, b)) {
            return v.clone();
        }
        let mut out = Vec::new();
        if b >= 1 {
            let mut options = Vec::new();
            for ca in 1..=a {
                for cb in 1..b {
                    for code in self.u_rooted(ca, cb, 1) {
                        options.push((code, ca, cb));
                    }
                }
            }
            options.sort();
            let mut picked = Vec::new();
            pick_children(&options, 0, a, b - 1, 0, &mut picked, &mut |children| {
                out.push(encode(NodeKind::W, children.to_vec()));
            });
        }
        out.sort();
        out.dedup();
        self.w_trees.insert((a, b), out.clone());
        out
    }
}

/// Emits every multiset of options whose sizes add up to exactly `(ra, rb)`.
fn pick_children(
    options: &[(String, usize, usize)],
    start: usize,
    ra: usize,
    rb: usize,
    min_count: usize,
    picked: &mut Vec<String>,
    emit: &mut dyn FnMut(&[String]),
) {
    if ra == 0 && rb == 0 {
        if picked.len() >= min_count {
            emit(picked);
        }
        return;
    }
    for i in start..options.len() {
        let (code, ca, cb) = &options[i];
        if *ca <= ra && *cb <= rb {
            picked.push(code.clone());
            pick_children(options, i, ra - ca, rb - cb, min_count, picked, emit);
            picked.pop();
        }
    }
}

/// Unrooted canonical code: the smallest rooted code over all U vertices.
fn unrooted_code(tree: &TemplateTree) -> String {
    let n = tree.nodes.len();
    let mut adj = vec![Vec::new(); n];
    for (a, b) in tree.edges() {
        adj[a].push(b);
        adj[b].push(a);
    }
    fn rooted(v: usize, from: usize, adj: &[Vec<usize>], kinds: &[NodeKind]) -> String {
        let children = adj[v]
            .iter()
            .filter(|&&w| w != from)
            .map(|&w| rooted(w, v, adj, kinds))
            .collect();
        encode(kinds[v], children)
    }
    let kinds: Vec<NodeKind> = tree.nodes.iter().map(|n| n.kind).collect();
    (0..n)
        .filter(|&v| kinds[v] == NodeKind::U)
        .map(|v| rooted(v, usize::MAX, &adj, &kinds))
        .min()
        .expect("a template tree has a U vertex")
}

/// Non-isomorphic trees with `t` U-nodes and `l` W-nodes, every U of degree
/// at least 2 and every leaf a W node, in canonical-code order.
pub fn enumerate_template_trees(t: usize, l: usize) -> Vec<TemplateTree> {
    let mut gen = RootedGen::default();
    enumerate_trees_with(&mut gen, t, l)
}

fn enumerate_trees_with(gen: &mut RootedGen, t: usize, l: usize) -> Vec<TemplateTree> {
    if t == 0 || l < t + 1 {
        return Vec::new();
    }
    let codes: BTreeSet<String> = gen
        .u_rooted(t, l, 2)
        .iter()
        .map(|c| unrooted_code(&TemplateTree::from_code(c)))
        .collect();
    codes.iter().map(|c| TemplateTree::from_code(c)).collect()
}

/// All forest templates on `t` U-nodes and `l` W-nodes, up to isomorphism
/// preserving the sides, in a deterministic canonical order.
pub fn enumerate_forest_templates(t: usize, l: usize) -> Vec<ForestTemplate> {
    if t == 0 || l < t + 1 {
        return Vec::new();
    }
    let mut gen = RootedGen::default();
    let mut catalog: Vec<TemplateTree> = Vec::new();
    for ti in 1..=t {
        for li in (ti + 1)..=l {
            catalog.extend(enumerate_trees_with(&mut gen, ti, li));
        }
    }
    catalog.sort_by(|a, b| a.code.cmp(&b.code));

    let mut out = Vec::new();
    let mut picked: Vec<usize> = Vec::new();
    pick_components(&catalog, 0, t, l, &mut picked, &mut out);
    out
}

fn pick_components(
    catalog: &[TemplateTree],
    start: usize,
    rt: usize,
    rl: usize,
    picked: &mut Vec<usize>,
    out: &mut Vec<ForestTemplate>,
) {
    if rt == 0 && rl == 0 {
        let components: Vec<TemplateTree> = picked.iter().map(|&i| catalog[i].clone()).collect();
        let t = components.iter().map(|c| c.t).sum();
        let l = components.iter().map(|c| c.l).sum();
        out.push(ForestTemplate { t, l, components });
        return;
    }
    for i in start..catalog.len() {
        if catalog[i].t <= rt && catalog[i].l <= rl {
            picked.push(i);
            pick_components(catalog, i, rt - catalog[i].t, rl - catalog[i].l, picked, out);
            picked.pop();
        }
    }
}

/// Map from initial-cluster index to a color in `0..l`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coloring {
    colors: Vec<u8>,
}

impl Coloring {
    pub fn new(colors: Vec<u8>) -> Self {
        Coloring { colors }
    }

    pub fn color(&self, group: usize) -> usize {
        self.colors[group] as usize
    }

    pub fn colors(&self) -> &[u8] {
        &self.colors
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    /// True iff the given groups get pairwise distinct colors.
    pub fn is_injective_on(&self, groups: &[usize]) -> bool {
        let mut seen = 0u128;
        groups.iter().all(|&g| {
            let bit = 1u128 << self.colors[g];
            let fresh = seen & bit == 0;
            seen |= bit;
            fresh
        })
    }

    /// Colors renamed in order of first appearance. Solving is invariant
    /// under renaming colors, so this is a cache key.
    pub(crate) fn canonical(&self) -> (Coloring, usize) {
        let mut rename = [u8::MAX; 256];
        let mut next = 0u8;
        let colors = self
            .colors
            .iter()
            .map(|&c| {
                if rename[c as usize] == u8::MAX {
                    rename[c as usize] = next;
                    next += 1;
                }
                rename[c as usize]
            })
            .collect();
        (Coloring { colors }, next as usize)
    }
}

/// How colorings of the initial clusters are produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColoringMode {
    /// All `l^s` colorings.
    Exhaustive,
    /// One coloring per `l`-subset of groups: the subset gets colors
    /// `0..l` in index order and every other group gets color 0. Every
    /// `l`-subset is rainbow under some member.
    Perfect,
    /// Uniform colorings from a ChaCha8 stream. `trials: None` means
    /// [`default_trials`].
    Random { trials: Option<usize>, seed: u64 },
}

/// Largest exhaustive family [`coloring_family`] will build.
pub const DEFAULT_COLORING_CAP: u64 = 1 << 20;

/// `ceil(e^l * ln 4)`: a fixed `l`-set is rainbow under one uniform coloring
/// with probability at least `e^-l`, so this many trials find it with
/// probability at least 3/4.
pub fn default_trials(l: usize) -> usize {
    ((l as f64).exp() * 4f64.ln()).ceil() as usize
}

/// Colorings of `s` groups with `l` colors, with the default exhaustive cap.
pub fn coloring_family(s: usize, l: usize, mode: &ColoringMode) -> Result<Vec<Coloring>> {
    coloring_family_capped(s, l, mode, DEFAULT_COLORING_CAP)
}

/// Colorings of `s` groups with `l` colors. Exhaustive mode fails with a
/// resource error when `l^s` exceeds `cap`.
pub fn coloring_family_capped(s: usize, l: usize, mode: &ColoringMode, cap: u64) -> Result<Vec<Coloring>> {
    if s == 0 || l == 0 {
        return Err(Error::InvalidInput(format!(
            "coloring needs s >= 1 and l >= 1, got s={s}, l={l}"
        )));
    }
    if l > 128 {
        return Err(Error::InvalidInput(format!(
            "at most 128 colors are supported, got {l}"
        )));
    }
    match mode {
        ColoringMode::Exhaustive => {
            let total = (l as u64).checked_pow(s as u32).filter(|&x| x <= cap);
            let Some(total) = total else {
                return Err(Error::Resource(format!(
                    "exhaustive family has {l}^{s} colorings, above the cap of {cap}; use random or perfect coloring"
                )));
            };
            let mut out = Vec::with_capacity(total as usize);
            let mut digits = vec![0u8; s];
            for _ in 0..total {
                out.push(Coloring::new(digits.clone()));
                for d in digits.iter_mut().rev() {
                    *d += 1;
                    if (*d as usize) < l {
                        break;
                    }
                    *d = 0;
                }
            }
            Ok(out)
        }
        ColoringMode::Perfect => {
            if l > s {
                return Ok(Vec::new());
            }
            let mut out = Vec::new();
            let mut subset: Vec<usize> = (0..l).collect();
            loop {
                let mut colors = vec![0u8; s];
                for (c, &g) in subset.iter().enumerate() {
                    colors[g] = c as u8;
                }
                out.push(Coloring::new(colors));
                // next l-subset in lexicographic order
                let Some(i) = (0..l).rev().find(|&i| subset[i] < s - l + i) else {
                    break;
                };
                subset[i] += 1;
                for j in (i + 1)..l {
                    subset[j] = subset[j - 1] + 1;
                }
            }
            Ok(out)
        }
        ColoringMode::Random { trials, seed } => {
            let trials = trials.unwrap_or_else(|| default_trials(l));
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(*seed, s, l));
            Ok((0..trials)
                .map(|_| Coloring::new((0..s).map(|_| rng.gen_range(0..l) as u8).collect()))
                .collect())
        }
    }
}

fn stream_seed(seed: u64, s: usize, l: usize) -> u64 {
    // splitmix64 finalizer over the seed and the family shape
    let mut z = seed ^ ((s as u64) << 32 | l as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_feasibility() {
        assert!(block_partition_feasible(7, 3, 2, 3));
        assert!(!block_partition_feasible(7, 2, 2, 3));
        assert!(block_partition_feasible(4, 4, 1, 1));
        assert!(block_partition_feasible(0, 0, 2, 3));
        assert_eq!(block_sizes(7, 3, 2, 3), Some(vec![3, 2, 2]));
        assert_eq!(block_sizes(7, 2, 2, 3), None);
    }

    #[test]
    fn simple_splits() {
        assert!(simple_split_feasible(&[4, 4], 4, 2, 2));
        assert!(!simple_split_feasible(&[3], 2, 2, 2));
        assert!(!simple_split_feasible(&[5, 5], 3, 2, 4));
        assert!(simple_split_feasible(&[5, 5], 4, 2, 4));
    }

    #[test]
    fn small_template_counts() {
        assert_eq!(enumerate_forest_templates(1, 2).len(), 1);
        assert_eq!(enumerate_forest_templates(1, 1).len(), 0);
        assert_eq!(enumerate_forest_templates(2, 3).len(), 1);
        let path = &enumerate_forest_templates(2, 3)[0];
        assert_eq!(path.components.len(), 1);
        assert_eq!(path.edges().len(), 4);
        let star = &enumerate_forest_templates(1, 3)[0];
        assert_eq!(star.code(), "u(w()w()w())");
    }

    #[test]
    fn template_roots_are_u() {
        for t in 1..=3 {
            for l in (t + 1)..=6 {
                for f in enumerate_forest_templates(t, l) {
                    for c in &f.components {
                        assert_eq!(c.nodes[0].kind, NodeKind::U);
                        assert_eq!(c.nodes[0].w_below, c.l);
                    }
                }
            }
        }
    }

    #[test]
    fn exhaustive_family() {
        let fam = coloring_family(3, 2, &ColoringMode::Exhaustive).unwrap();
        assert_eq!(fam.len(), 8);
        for a in 0..3 {
            for b in (a + 1)..3 {
                assert!(fam.iter().any(|c| c.is_injective_on(&[a, b])));
            }
        }
        assert_eq!(coloring_family(1, 1, &ColoringMode::Exhaustive).unwrap().len(), 1);
        assert!(matches!(
            coloring_family_capped(8, 8, &ColoringMode::Exhaustive, 1000),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn perfect_family() {
        let fam = coloring_family(5, 3, &ColoringMode::Perfect).unwrap();
        assert_eq!(fam.len(), 10);
        assert!(fam.iter().any(|c| c.is_injective_on(&[1, 3, 4])));
        assert!(coloring_family(2, 3, &ColoringMode::Perfect).unwrap().is_empty());
    }

    #[test]
    fn random_family_is_reproducible() {
        let mode = ColoringMode::Random {
            trials: Some(20),
            seed: 7,
        };
        let a = coloring_family(6, 3, &mode).unwrap();
        assert_eq!(a, coloring_family(6, 3, &mode).unwrap());
        assert_eq!(a.len(), 20);
        assert!(a.iter().all(|c| c.colors().iter().all(|&x| x < 3)));
        let default = ColoringMode::Random { trials: None, seed: 7 };
        assert_eq!(coloring_family(6, 2, &default).unwrap().len(), default_trials(2));
        assert_eq!(default_trials(2), 11);
    }

    #[test]
    fn canonical_renaming() {
        let (c, used) = Coloring::new(vec![2, 0, 2, 1]).canonical();
        assert_eq!(c.colors(), &[0, 1, 0, 2]);
        assert_eq!(used, 3);
    }
}
