//! Binary classification trees: greedy Gini growth with midpoint thresholds,
//! followed by weakest-link cost-complexity pruning.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, check_dim, check_training, ProbabilityVector};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartParams {
    /// Number of weakest links cut after growth (0 = unpruned).
    pub pruning_level: usize,
    pub min_leaf: usize,
}

impl Default for CartParams {
    fn default() -> Self {
        CartParams {
            pruning_level: 6,
            min_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
    /// Weighted impurity decrease of this split, as a fraction of the root
    /// sample weight.
    pub decrease: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    /// Training sample weight per class reaching this node.
    pub counts: Vec<f64>,
    pub split: Option<Split>,
}

impl Node {
    fn total(&self) -> f64 {
        self.counts.iter().sum()
    }
}

/// A trained tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartModel {
    pub n_classes: usize,
    pub n_features: usize,
    pub nodes: Vec<Node>,
    pub pruning_level: usize,
}

pub(crate) fn gini(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total) * (c / total)).sum::<f64>()
}

/// Column-major copy of a training matrix.
pub(crate) struct Columns {
    pub cols: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub n_classes: usize,
}

impl Columns {
    pub(crate) fn new(x: &[Vec<f64>], y: &[usize], n_classes: usize) -> Columns {
        let dim = x[0].len();
        let cols = (0..dim).map(|j| x.iter().map(|r| r[j]).collect()).collect();
        Columns {
            cols,
            labels: y.to_vec(),
            n_classes,
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.cols.len()
    }
}

/// Growth settings shared by single trees and forests.
pub(crate) struct GrowParams<'a> {
    pub min_leaf: usize,
    /// Features examined per split; `None` examines all of them.
    pub mtry: Option<usize>,
    pub rng: Option<&'a mut ChaCha8Rng>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    child_impurity: f64,
}

struct Grower<'a, 'b> {
    data: &'a Columns,
    params: GrowParams<'b>,
    nodes: Vec<Node>,
    root_weight: f64,
    buf: Vec<(f64, usize)>,
    features: Vec<usize>,
}

impl Grower<'_, '_> {
    fn counts(&self, idx: &[usize]) -> Vec<f64> {
        let mut c = vec![0.0; self.data.n_classes];
        for &i in idx {
            c[self.data.labels[i]] += 1.0;
        }
        c
    }

    /// Best split of `feature` over `idx` by weighted child Gini; `None` if the
    /// feature is constant on the node or `min_leaf` forbids every threshold.
    fn best_for_feature(&mut self, feature: usize, idx: &[usize], parent: &[f64]) -> Option<Candidate> {
        let col = &self.data.cols[feature];
        self.buf.clear();
        self.buf.extend(idx.iter().map(|&i| (col[i], self.data.labels[i])));
        self.buf.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let n = self.buf.len();
        if self.buf[0].0 == self.buf[n - 1].0 {
            return None;
        }
        let total: f64 = n as f64;
        let mut left = vec![0.0; parent.len()];
        let mut best: Option<Candidate> = None;
        let min_leaf = self.params.min_leaf;
        for k in 0..n - 1 {
            left[self.buf[k].1] += 1.0;
            let nl = k + 1;
            if self.buf[k].0 == self.buf[k + 1].0 || nl < min_leaf || n - nl < min_leaf {
                continue;
            }
            let (wl, wr) = (nl as f64, (n - nl) as f64);
            let mut sl = 0.0;
            let mut sr = 0.0;
            for (c, &l) in left.iter().enumerate() {
                let r = parent[c] - l;
                sl += l * l;
                sr += r * r;
            }
            // weighted child gini = (wl (1 - sl/wl^2) + wr (1 - sr/wr^2)) / total
            let child = (wl - sl / wl + wr - sr / wr) / total;
            if best.as_ref().is_none_or(|b| child < b.child_impurity) {
                let (a, b) = (self.buf[k].0, self.buf[k + 1].0);
                let mut threshold = a + (b - a) / 2.0;
                if threshold >= b {
                    threshold = a;
                }
                best = Some(Candidate {
                    feature,
                    threshold,
                    child_impurity: child,
                });
            }
        }
        best
    }

    fn choose(&mut self, idx: &[usize], counts: &[f64]) -> Option<Candidate> {
        let dim = self.data.dim();
        let mut best: Option<Candidate> = None;
        let consider = |me: &mut Self, f: usize, best: &mut Option<Candidate>| -> bool {
            match me.best_for_feature(f, idx, counts) {
                Some(c) => {
                    let better = match best {
                        None => true,
                        Some(b) => {
                            c.child_impurity < b.child_impurity
                                || (c.child_impurity == b.child_impurity && c.feature < b.feature)
                        }
                    };
                    if better {
                        *best = Some(c);
                    }
                    true
                }
                None => false,
            }
        };
        match (self.params.mtry, self.params.rng.as_deref_mut()) {
            (Some(mtry), Some(rng)) if mtry < dim => {
                let mut order = std::mem::take(&mut self.features);
                order.shuffle(rng);
                // constant features do not count towards mtry
                let mut used = 0;
                for &f in &order {
                    if used == mtry {
                        break;
                    }
                    if consider(self, f, &mut best) {
                        used += 1;
                    }
                }
                self.features = order;
            }
            _ => {
                for f in 0..dim {
                    consider(self, f, &mut best);
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>) -> usize {
        let counts = self.counts(&idx);
        let id = self.nodes.len();
        self.nodes.push(Node {
            counts: counts.clone(),
            split: None,
        });
        let n = idx.len() as f64;
        let impurity = gini(&counts, n);
        if impurity <= 0.0 || idx.len() < 2 * self.params.min_leaf {
            return id;
        }
        let Some(best) = self.choose(&idx, &counts) else {
            return id;
        };
        let decrease = n * (impurity - best.child_impurity) / self.root_weight;
        if !(decrease > 0.0) {
            return id;
        }
        let col = &self.data.cols[best.feature];
        let (li, ri): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| col[i] <= best.threshold);
        drop(idx);
        let left = self.grow(li);
        let right = self.grow(ri);
        self.nodes[id].split = Some(Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
            decrease,
        });
        id
    }
}

/// Grows an unpruned tree over the (possibly repeated) sample indices `idx`.
pub(crate) fn grow_tree(data: &Columns, idx: Vec<usize>, params: GrowParams<'_>) -> CartModel {
    let root_weight = idx.len() as f64;
    let mut g = Grower {
        data,
        params,
        nodes: Vec::new(),
        root_weight,
        buf: Vec::with_capacity(idx.len()),
        features: (0..data.dim()).collect(),
    };
    g.grow(idx);
    CartModel {
        n_classes: data.n_classes,
        n_features: data.dim(),
        nodes: g.nodes,
        pruning_level: 0,
    }
}

pub fn cart_train(x: &[Vec<f64>], y: &[usize], n_classes: usize, params: &CartParams) -> Result<CartModel> {
    check_training(x, y, n_classes)?;
    let data = Columns::new(x, y, n_classes);
    let mut tree = grow_tree(
        &data,
        (0..x.len()).collect(),
        GrowParams {
            min_leaf: params.min_leaf.max(1),
            mtry: None,
            rng: None,
        },
    );
    tree.prune(params.pruning_level);
    Ok(tree)
}

impl CartModel {
    fn leaf_for(&self, x: &[f64]) -> &Node {
        let mut node = &self.nodes[0];
        while let Some(s) = node.split {
            node = if x[s.feature] <= s.threshold {
                &self.nodes[s.left]
            } else {
                &self.nodes[s.right]
            };
        }
        node
    }

    /// Class frequencies at the leaf reached by `x`.
    pub fn predict(&self, x: &[f64]) -> Result<ProbabilityVector> {
        check_dim(self.n_features, x)?;
        let leaf = self.leaf_for(x);
        let total = leaf.total();
        Ok(ProbabilityVector(leaf.counts.iter().map(|c| c / total).collect()))
    }

    /// Majority class at the leaf, lowest index on ties.
    pub(crate) fn vote(&self, x: &[f64]) -> usize {
        argmax(&self.leaf_for(x).counts)
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &CartModel, id: usize) -> usize {
            match t.nodes[id].split {
                Some(s) => 1 + walk(t, s.left).max(walk(t, s.right)),
                None => 0,
            }
        }
        walk(self, 0)
    }

    /// Ids of the nodes reachable from the root, in preorder.
    fn reachable(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![0];
        while let Some(id) = stack.pop() {
            out.push(id);
            if let Some(s) = self.nodes[id].split {
                stack.push(s.right);
                stack.push(s.left);
            }
        }
        out
    }

    pub fn internal_count(&self) -> usize {
        self.reachable()
            .into_iter()
            .filter(|&i| self.nodes[i].split.is_some())
            .count()
    }

    pub fn leaf_count(&self) -> usize {
        self.reachable().len() - self.internal_count()
    }

    /// Misclassification weight if `id` were a leaf.
    fn resub_error(&self, id: usize) -> f64 {
        let n = &self.nodes[id];
        n.total() - n.counts.iter().copied().fold(0.0, f64::max)
    }

    /// (error of the subtree's leaves, number of leaves) for every node.
    fn subtree_stats(&self, id: usize, out: &mut [(f64, usize)]) -> (f64, usize) {
        let stats = match self.nodes[id].split {
            None => (self.resub_error(id), 1),
            Some(s) => {
                let (el, nl) = self.subtree_stats(s.left, out);
                let (er, nr) = self.subtree_stats(s.right, out);
                (el + er, nl + nr)
            }
        };
        out[id] = stats;
        stats
    }

    /// Cuts the `links` weakest links one at a time. The weakest link is the
    /// internal node minimizing `(R(t) - R(T_t)) / (|leaves(T_t)| - 1)`, ties
    /// to the lowest node id. Pruning past the root leaves a single leaf.
    pub fn prune(&mut self, links: usize) {
        for _ in 0..links {
            if self.nodes[0].split.is_none() {
                break;
            }
            let mut stats = vec![(0.0, 0); self.nodes.len()];
            self.subtree_stats(0, &mut stats);
            let mut weakest: Option<(f64, usize)> = None;
            for id in self.reachable() {
                if self.nodes[id].split.is_none() {
                    continue;
                }
                let (sub_err, leaves) = stats[id];
                let g = (self.resub_error(id) - sub_err) / (leaves - 1) as f64;
                if weakest.is_none_or(|(wg, wid)| g < wg || (g == wg && id < wid)) {
                    weakest = Some((g, id));
                }
            }
            if let Some((_, id)) = weakest {
                self.nodes[id].split = None;
            }
            self.pruning_level += 1;
        }
        self.compact();
    }

    /// Drops unreachable nodes and renumbers the rest in preorder.
    fn compact(&mut self) {
        let order = self.reachable();
        if order.len() == self.nodes.len() {
            return;
        }
        let mut remap = vec![usize::MAX; self.nodes.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        self.nodes = order
            .iter()
            .map(|&old| {
                let mut n = self.nodes[old].clone();
                if let Some(s) = n.split.as_mut() {
                    s.left = remap[s.left];
                    s.right = remap[s.right];
                }
                n
            })
            .collect();
    }

    /// Sum of split impurity decreases per feature.
    pub fn impurity_importance(&self) -> Vec<f64> {
        let mut imp = vec![0.0; self.n_features];
        for id in self.reachable() {
            if let Some(s) = self.nodes[id].split {
                imp[s.feature] += s.decrease;
            }
        }
        imp
    }
}
