use super::{BoostParams, Growth, NodeRef, SplitNode, Tree};
use crate::embeddings::EmbeddingMatrix;

/// Column-major copy of the feature matrix with each column's row order
/// presorted once per training run.
pub(crate) struct Columns {
    n_rows: usize,
    values: Vec<f64>,
    order: Vec<Vec<u32>>,
}

impl Columns {
    pub(crate) fn new(x: &EmbeddingMatrix) -> Self {
        let (n, d) = (x.n_rows(), x.dim());
        let mut values = vec![0.0; n * d];
        for (i, row) in x.rows().enumerate() {
            for (f, v) in row.iter().enumerate() {
                values[f * n + i] = *v;
            }
        }
        let order = (0..d)
            .map(|f| {
                let col = &values[f * n..(f + 1) * n];
                let mut idx: Vec<u32> = (0..n as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        Columns { n_rows: n, values, order }
    }

    fn dim(&self) -> usize {
        self.order.len()
    }

    fn value(&self, feature: usize, row: u32) -> f64 {
        self.values[feature * self.n_rows + row as usize]
    }
}

/// The best split found for a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Structure score improvement of splitting (G, H) into left and right parts.
pub fn split_gain(g_left: f64, h_left: f64, g_right: f64, h_right: f64, lambda: f64, gamma: f64) -> f64 {
    let score = |g: f64, h: f64| g * g / (h + lambda);
    let (g, h) = (g_left + g_right, h_left + h_right);
    0.5 * (score(g_left, h_left) + score(g_right, h_right) - score(g, h)) - gamma
}

/// Gains at or below this are rounding noise in the three structure scores,
/// not improvement. Relative, so scaling all weights leaves decisions unchanged.
fn noise_floor(g_left: f64, h_left: f64, g_right: f64, h_right: f64, lambda: f64) -> f64 {
    let score = |g: f64, h: f64| g * g / (h + lambda);
    let parent = score(g_left + g_right, h_left + h_right);
    1e-12 * (score(g_left, h_left) + score(g_right, h_right) + parent)
}

/// Rows of one tree node: ascending row ids plus each feature's presorted order
/// restricted to those rows.
struct NodeRows {
    rows: Vec<u32>,
    sorted: Vec<Vec<u32>>,
}

fn sums(rows: &[u32], grad: &[f64], hess: &[f64]) -> (f64, f64) {
    rows.iter().fold((0.0, 0.0), |(g, h), &r| (g + grad[r as usize], h + hess[r as usize]))
}

fn leaf_value(rows: &[u32], grad: &[f64], hess: &[f64], lambda: f64) -> f64 {
    let (g, h) = sums(rows, grad, hess);
    if h + lambda > 0.0 {
        -g / (h + lambda)
    } else {
        0.0
    }
}

/// Midpoint between two distinct consecutive values that still sends `lo` left
/// and `hi` right under `x <= threshold`.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m < hi && m >= lo {
        m
    } else {
        lo
    }
}

fn best_split_in(cols: &Columns, node: &NodeRows, grad: &[f64], hess: &[f64], params: &BoostParams) -> Option<SplitCandidate> {
    let (g_total, h_total) = sums(&node.rows, grad, hess);
    let mut best: Option<SplitCandidate> = None;
    for (f, order) in node.sorted.iter().enumerate() {
        let (mut gl, mut hl) = (0.0, 0.0);
        for k in 0..order.len().saturating_sub(1) {
            let (a, b) = (order[k], order[k + 1]);
            gl += grad[a as usize];
            hl += hess[a as usize];
            let (va, vb) = (cols.value(f, a), cols.value(f, b));
            if va == vb {
                continue;
            }
            let (gr, hr) = (g_total - gl, h_total - hl);
            if hl < params.min_child_hessian || hr < params.min_child_hessian {
                continue;
            }
            if hl + params.lambda <= 0.0 || hr + params.lambda <= 0.0 {
                continue;
            }
            let gain = split_gain(gl, hl, gr, hr, params.lambda, params.gamma);
            // strict comparison keeps the lowest (feature, threshold) on ties
            if gain > noise_floor(gl, hl, gr, hr, params.lambda) && best.is_none_or(|b| gain > b.gain) {
                best = Some(SplitCandidate { feature: f, threshold: midpoint(va, vb), gain });
            }
        }
    }
    best
}

fn partition(cols: &Columns, node: NodeRows, split: &SplitCandidate, goes_left: &mut [bool]) -> (NodeRows, NodeRows) {
    for &r in &node.rows {
        goes_left[r as usize] = cols.value(split.feature, r) <= split.threshold;
    }
    let split_list = |list: &[u32]| -> (Vec<u32>, Vec<u32>) { list.iter().partition(|&&r| goes_left[r as usize]) };
    let (l_rows, r_rows) = split_list(&node.rows);
    let mut l_sorted = Vec::with_capacity(cols.dim());
    let mut r_sorted = Vec::with_capacity(cols.dim());
    for list in &node.sorted {
        let (l, r) = split_list(list);
        l_sorted.push(l);
        r_sorted.push(r);
    }
    (NodeRows { rows: l_rows, sorted: l_sorted }, NodeRows { rows: r_rows, sorted: r_sorted })
}

enum Built {
    Leaf(f64),
    Split { cand: SplitCandidate, left: usize, right: usize },
}

struct Grower<'a> {
    cols: &'a Columns,
    grad: &'a [f64],
    hess: &'a [f64],
    params: &'a BoostParams,
    arena: Vec<Built>,
    goes_left: Vec<bool>,
}

impl Grower<'_> {
    fn leaf(&mut self, node: &NodeRows) -> usize {
        self.arena.push(Built::Leaf(leaf_value(&node.rows, self.grad, self.hess, self.params.lambda)));
        self.arena.len() - 1
    }

    fn depth_wise(&mut self, node: NodeRows, depth: usize) -> usize {
        if depth >= self.params.max_depth {
            return self.leaf(&node);
        }
        let Some(cand) = best_split_in(self.cols, &node, self.grad, self.hess, self.params) else {
            return self.leaf(&node);
        };
        let at = self.arena.len();
        self.arena.push(Built::Leaf(0.0));
        let (l, r) = partition(self.cols, node, &cand, &mut self.goes_left);
        let left = self.depth_wise(l, depth + 1);
        let right = self.depth_wise(r, depth + 1);
        self.arena[at] = Built::Split { cand, left, right };
        at
    }

    fn leaf_wise(&mut self, root: NodeRows) -> usize {
        struct Open {
            slot: usize,
            node: NodeRows,
            depth: usize,
            cand: Option<SplitCandidate>,
        }
        let candidate = |g: &Self, node: &NodeRows, depth: usize| {
            if depth >= g.params.max_depth {
                None
            } else {
                best_split_in(g.cols, node, g.grad, g.hess, g.params)
            }
        };
        self.arena.push(Built::Leaf(0.0));
        let cand = candidate(self, &root, 0);
        let mut open = vec![Open { slot: 0, node: root, depth: 0, cand }];
        let mut n_leaves = 1;
        while n_leaves < self.params.max_leaves {
            // highest gain; earliest-opened leaf on ties
            let mut pick: Option<(usize, f64)> = None;
            for (i, o) in open.iter().enumerate() {
                if let Some(c) = o.cand {
                    if pick.is_none_or(|(_, g)| c.gain > g) {
                        pick = Some((i, c.gain));
                    }
                }
            }
            let Some((i, _)) = pick else { break };
            let o = open.remove(i);
            let cand = o.cand.expect("picked leaves have a candidate");
            let (l, r) = partition(self.cols, o.node, &cand, &mut self.goes_left);
            let (ls, rs) = (self.arena.len(), self.arena.len() + 1);
            self.arena.push(Built::Leaf(0.0));
            self.arena.push(Built::Leaf(0.0));
            self.arena[o.slot] = Built::Split { cand, left: ls, right: rs };
            let lc = candidate(self, &l, o.depth + 1);
            let rc = candidate(self, &r, o.depth + 1);
            open.push(Open { slot: ls, node: l, depth: o.depth + 1, cand: lc });
            open.push(Open { slot: rs, node: r, depth: o.depth + 1, cand: rc });
            n_leaves += 1;
        }
        for o in open {
            self.arena[o.slot] = Built::Leaf(leaf_value(&o.node.rows, self.grad, self.hess, self.params.lambda));
        }
        0
    }

    /// Pre-order numbering so every child index exceeds its parent's.
    fn into_tree(self, root: usize) -> Tree {
        fn visit(arena: &[Built], at: usize, tree: &mut Tree) -> NodeRef {
            match arena[at] {
                Built::Leaf(v) => {
                    tree.leaves.push(v);
                    NodeRef::Leaf(tree.leaves.len() - 1)
                }
                Built::Split { cand, left, right } => {
                    let idx = tree.splits.len();
                    tree.splits.push(SplitNode {
                        feature: cand.feature,
                        threshold: cand.threshold,
                        gain: cand.gain,
                        left: NodeRef::Leaf(usize::MAX),
                        right: NodeRef::Leaf(usize::MAX),
                    });
                    let l = visit(arena, left, tree);
                    let r = visit(arena, right, tree);
                    tree.splits[idx].left = l;
                    tree.splits[idx].right = r;
                    NodeRef::Split(idx)
                }
            }
        }
        let mut tree = Tree { splits: vec![], leaves: vec![] };
        visit(&self.arena, root, &mut tree);
        tree
    }
}

fn root_node(cols: &Columns) -> NodeRows {
    NodeRows { rows: (0..cols.n_rows as u32).collect(), sorted: cols.order.clone() }
}

pub(crate) fn grow_tree(cols: &Columns, grad: &[f64], hess: &[f64], params: &BoostParams) -> Tree {
    let mut g = Grower { cols, grad, hess, params, arena: Vec::new(), goes_left: vec![false; cols.n_rows] };
    let root = root_node(cols);
    let at = match params.growth {
        Growth::DepthWise => g.depth_wise(root, 0),
        Growth::LeafWise => g.leaf_wise(root),
    };
    g.into_tree(at)
}

/// Best split of all rows of `x` for the given per-row gradients and hessians,
/// under `params`' regularization and child-hessian constraints. `None` when
/// no split has positive gain.
pub fn find_best_split(x: &EmbeddingMatrix, grad: &[f64], hess: &[f64], params: &BoostParams) -> Option<SplitCandidate> {
    assert_eq!(grad.len(), x.n_rows(), "gradient length");
    assert_eq!(hess.len(), x.n_rows(), "hessian length");
    let cols = Columns::new(x);
    best_split_in(&cols, &root_node(&cols), grad, hess, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boosted::{train_boosted, BoostParams};
    use crate::corpus::Label;

    fn matrix(rows: &[Vec<f64>]) -> EmbeddingMatrix {
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        EmbeddingMatrix::from_rows(ids, rows, rows[0].len(), "t").unwrap()
    }

    #[test]
    fn ties_prefer_lowest_feature() {
        // both features separate identically
        let x = matrix(&[vec![0.0, 0.0], vec![1.0, 1.0]]);
        let p = BoostParams { lambda: 0.0, min_child_hessian: 0.0, ..BoostParams::default() };
        let c = find_best_split(&x, &[1.0, -1.0], &[0.25, 0.25], &p).unwrap();
        assert_eq!(c.feature, 0);
        assert_eq!(c.threshold, 0.5);
    }

    #[test]
    fn min_child_hessian_blocks_small_children() {
        let x = matrix(&[vec![0.0], vec![1.0]]);
        let p = BoostParams { min_child_hessian: 1.0, ..BoostParams::default() };
        assert!(find_best_split(&x, &[1.0, -1.0], &[0.25, 0.25], &p).is_none());
    }

    #[test]
    fn gamma_suppresses_weak_splits() {
        let x = matrix(&[vec![0.0], vec![1.0]]);
        let base = BoostParams { lambda: 0.0, min_child_hessian: 0.0, ..BoostParams::default() };
        let g = find_best_split(&x, &[1.0, -1.0], &[0.25, 0.25], &base).unwrap().gain;
        let p = BoostParams { gamma: g + 1e-9, ..base };
        assert!(find_best_split(&x, &[1.0, -1.0], &[0.25, 0.25], &p).is_none());
    }

    #[test]
    fn midpoint_of_adjacent_floats_stays_left() {
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let m = midpoint(lo, hi);
        assert!(lo <= m && m < hi);
    }

    #[test]
    fn leaf_wise_respects_leaf_budget() {
        let rows: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64, ((i * 37) % 64) as f64]).collect();
        let y: Vec<Label> = (0..64).map(|i| Label::from((i * 13) % 7 < 3)).collect();
        let params = BoostParams { n_rounds: 3, max_leaves: 5, min_child_hessian: 0.0, ..BoostParams::lgbm_like() };
        let m = train_boosted(&matrix(&rows), &y, None, &params).unwrap();
        for t in &m.trees {
            assert!(t.leaves.len() <= 5);
        }
        assert!(m.trees.iter().any(|t| t.leaves.len() == 5));
    }

    #[test]
    fn depth_wise_respects_depth() {
        let rows: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64, ((i * 37) % 64) as f64]).collect();
        let y: Vec<Label> = (0..64).map(|i| Label::from((i * 13) % 7 < 3)).collect();
        let params = BoostParams { n_rounds: 3, max_depth: 2, min_child_hessian: 0.0, ..BoostParams::xgb_like() };
        let m = train_boosted(&matrix(&rows), &y, None, &params).unwrap();
        assert!(m.trees.iter().all(|t| t.depth() <= 2));
        assert!(m.trees.iter().any(|t| t.depth() == 2));
    }
}
