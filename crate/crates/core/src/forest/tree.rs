use rand::seq::SliceRandom;
use rand::Rng;

use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Regression tree grown by variance reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

pub(crate) struct TreeParams {
    pub max_features: usize,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
}

struct Split {
    feature: usize,
    threshold: f64,
    score: f64,
    /// Samples going left, in node order.
    n_left: usize,
}

impl Tree {
    /// Grows a tree on `samples` (row indices, repeats allowed).
    pub(crate) fn grow(
        x: &Matrix,
        y: &[f64],
        samples: Vec<usize>,
        params: &TreeParams,
        rng: &mut impl Rng,
    ) -> Tree {
        let mut nodes = vec![Node::Leaf(0.0)];
        let mut stack = vec![(0usize, samples, 0usize)];
        let p = x.ncols();
        let mut order: Vec<usize> = (0..p).collect();
        while let Some((slot, mut idx, depth)) = stack.pop() {
            let mean = idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64;
            let splittable = idx.len() >= 2 * params.min_samples_leaf
                && params.max_depth.is_none_or(|d| depth < d)
                && idx.iter().any(|&i| y[i] != y[idx[0]]);
            let split = if splittable {
                order.shuffle(rng);
                best_split(x, y, &mut idx, &order, params)
            } else {
                None
            };
            let Some(s) = split else {
                nodes[slot] = Node::Leaf(mean);
                continue;
            };
            let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
                idx.iter().partition(|&&i| x.get(i, s.feature) <= s.threshold);
            debug_assert_eq!(left_idx.len(), s.n_left);
            let left = nodes.len();
            nodes.push(Node::Leaf(0.0));
            nodes.push(Node::Leaf(0.0));
            nodes[slot] = Node::Split {
                feature: s.feature,
                threshold: s.threshold,
                left,
                right: left + 1,
            };
            stack.push((left + 1, right_idx, depth + 1));
            stack.push((left, left_idx, depth + 1));
        }
        Tree { nodes }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut k = 0;
        loop {
            match self.nodes[k] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => k = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// Examines features in the shuffled `order` until `max_features` of them
/// have shown more than one value; among those, the best split wins, ties
/// going to the lowest column and then the lowest threshold.
fn best_split(
    x: &Matrix,
    y: &[f64],
    idx: &mut [usize],
    order: &[usize],
    params: &TreeParams,
) -> Option<Split> {
    let mut visited: Vec<usize> = Vec::with_capacity(params.max_features);
    for &f in order {
        if visited.len() == params.max_features {
            break;
        }
        let first = x.get(idx[0], f);
        if idx.iter().any(|&i| x.get(i, f) != first) {
            visited.push(f);
        }
    }
    visited.sort_unstable();

    let n = idx.len();
    let total: f64 = idx.iter().map(|&i| y[i]).sum();
    let leaf = params.min_samples_leaf;
    let mut best: Option<Split> = None;
    for &f in &visited {
        idx.sort_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)).then(a.cmp(&b)));
        let mut left_sum = 0.0;
        for pos in 0..n - 1 {
            left_sum += y[idx[pos]];
            let (a, b) = (x.get(idx[pos], f), x.get(idx[pos + 1], f));
            let nl = pos + 1;
            if a == b || nl < leaf || n - nl < leaf {
                continue;
            }
            let right_sum = total - left_sum;
            let score = left_sum * left_sum / nl as f64 + right_sum * right_sum / (n - nl) as f64;
            if best.as_ref().is_none_or(|s| score > s.score) {
                let mid = a + (b - a) / 2.0;
                best = Some(Split {
                    feature: f,
                    threshold: if mid < b { mid } else { a },
                    score,
                    n_left: nl,
                });
            }
        }
    }
    best
}
