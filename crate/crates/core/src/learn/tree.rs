//! Binary CART classifier with Gini impurity, plus AUROC.

use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 8,
            min_leaf: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        /// Fraction of class-1 training samples in the leaf.
        p1: f64,
        samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        /// Index of the child for `x[feature] <= threshold`.
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    features: usize,
    max_depth: usize,
}

pub fn gini(ones: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = ones as f64 / total as f64;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

struct Builder<'a, X: AsRef<[f64]>> {
    xs: &'a [X],
    ys: &'a [bool],
    params: TreeParams,
    features: usize,
    nodes: Vec<Node>,
}

impl<X: AsRef<[f64]>> Builder<'_, X> {
    fn leaf(&mut self, idx: &[usize]) -> usize {
        let ones = idx.iter().filter(|&&i| self.ys[i]).count();
        self.nodes.push(Node::Leaf {
            p1: ones as f64 / idx.len() as f64,
            samples: idx.len(),
        });
        self.nodes.len() - 1
    }

    /// Best `(feature, threshold)` by weighted child impurity, if any split
    /// lowers it while leaving `min_leaf` samples on each side.
    fn best_split(&self, idx: &[usize]) -> Option<(usize, f64)> {
        let n = idx.len();
        let total_ones = idx.iter().filter(|&&i| self.ys[i]).count();
        let parent = gini(total_ones, n) * n as f64;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order = idx.to_vec();
        for f in 0..self.features {
            let value = |i: usize| self.xs[i].as_ref()[f];
            order.sort_by(|&a, &b| value(a).total_cmp(&value(b)).then(a.cmp(&b)));
            let mut left_ones = 0;
            for k in 1..n {
                if self.ys[order[k - 1]] {
                    left_ones += 1;
                }
                let (lo, hi) = (value(order[k - 1]), value(order[k]));
                if lo == hi || k < self.params.min_leaf || n - k < self.params.min_leaf {
                    continue;
                }
                let impurity = gini(left_ones, k) * k as f64 + gini(total_ones - left_ones, n - k) * (n - k) as f64;
                if impurity < parent - 1e-12 && best.is_none_or(|(b, _, _)| impurity < b - 1e-12) {
                    best = Some((impurity, f, lo + (hi - lo) / 2.0));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let ones = idx.iter().filter(|&&i| self.ys[i]).count();
        let pure = ones == 0 || ones == idx.len();
        if pure || depth >= self.params.max_depth || idx.len() < 2 * self.params.min_leaf.max(1) {
            return self.leaf(&idx);
        }
        let Some((feature, threshold)) = self.best_split(&idx) else {
            return self.leaf(&idx);
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.xs[i].as_ref()[feature] <= threshold);
        let me = self.nodes.len();
        self.nodes.push(Node::Leaf { p1: 0.0, samples: 0 });
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[me] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        me
    }
}

/// Greedy CART fit on feature rows `xs` and labels `ys` (true = class 1).
pub fn tree_fit<X: AsRef<[f64]>>(xs: &[X], ys: &[bool], params: TreeParams) -> Result<DecisionTree> {
    if xs.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if xs.len() != ys.len() {
        return Err(Error::SizeMismatch(xs.len(), ys.len()));
    }
    let features = xs[0].as_ref().len();
    if features == 0 || xs.iter().any(|x| x.as_ref().len() != features) {
        return Err(Error::InvalidArgument("feature rows must share a positive length".into()));
    }
    let mut b = Builder {
        xs,
        ys,
        params,
        features,
        nodes: Vec::new(),
    };
    b.grow((0..xs.len()).collect(), 0);
    Ok(DecisionTree {
        nodes: b.nodes,
        features,
        max_depth: params.max_depth,
    })
}

impl DecisionTree {
    pub fn from_nodes(nodes: Vec<Node>, features: usize, max_depth: usize) -> Result<Self> {
        let ok = !nodes.is_empty()
            && nodes.iter().all(|n| match *n {
                Node::Split {
                    feature, left, right, ..
                } => feature < features && left < nodes.len() && right < nodes.len(),
                Node::Leaf { p1, .. } => (0.0..=1.0).contains(&p1),
            });
        if !ok {
            return Err(Error::InvalidArgument("malformed tree".into()));
        }
        let tree = Self {
            nodes,
            features,
            max_depth,
        };
        if tree.depth_checked().is_none() {
            return Err(Error::InvalidArgument("tree contains a cycle".into()));
        }
        Ok(tree)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    fn depth_checked(&self) -> Option<usize> {
        let mut stack = alloc::vec![(0usize, 0usize)];
        let mut deepest = 0;
        let mut visited = 0;
        while let Some((i, d)) = stack.pop() {
            visited += 1;
            if visited > self.nodes.len() {
                return None;
            }
            deepest = deepest.max(d);
            if let Node::Split { left, right, .. } = self.nodes[i] {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
        Some(deepest)
    }

    /// Depth of the deepest leaf (a single leaf has depth 0).
    pub fn depth(&self) -> usize {
        self.depth_checked().unwrap_or(0)
    }

    /// Probability of class 1.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.features {
            return Err(Error::DimMismatch {
                expected: self.features,
                got: x.len(),
            });
        }
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { p1, .. } => return Ok(p1),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    /// Hard decision: class 1 iff the leaf's class-1 fraction exceeds 1/2.
    pub fn classify(&self, x: &[f64]) -> Result<bool> {
        Ok(self.predict(x)? > 0.5)
    }
}

pub fn tree_predict(tree: &DecisionTree, x: &[f64]) -> Result<f64> {
    tree.predict(x)
}

/// Area under the ROC curve via the Mann–Whitney statistic, ties counted
/// half (average ranks).
pub fn auroc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::SizeMismatch(scores.len(), labels.len()));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Ranks i+1..=j+1 share their average.
        let avg = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += avg * order[i..=j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j + 1;
    }
    let u = rank_sum - (pos * (pos + 1)) as f64 / 2.0;
    Ok(u / (pos * neg) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng;
    use alloc::vec;
    use rand::Rng;

    #[test]
    fn gini_values() {
        assert_eq!(gini(0, 10), 0.0);
        assert_eq!(gini(10, 10), 0.0);
        assert_eq!(gini(5, 10), 0.5);
    }

    #[test]
    fn separable_data_gives_one_split() {
        let xs: Vec<[f64; 1]> = (0..20).map(|i| [i as f64]).collect();
        let ys: Vec<bool> = (0..20).map(|i| i >= 10).collect();
        let tree = tree_fit(&xs, &ys, TreeParams::default()).unwrap();
        assert_eq!(tree.depth(), 1);
        match tree.nodes()[0] {
            Node::Split { threshold, .. } => assert_eq!(threshold, 9.5),
            _ => panic!("expected a split"),
        }
        for (x, y) in xs.iter().zip(&ys) {
            assert_eq!(tree.classify(x).unwrap(), *y);
        }
    }

    #[test]
    fn accuracy_grows_with_depth() {
        let mut r = rng(8);
        let xs: Vec<[f64; 3]> = (0..300).map(|_| [r.random(), r.random(), r.random()]).collect();
        let ys: Vec<bool> = xs
            .iter()
            .map(|x| (x[0] > 0.5) ^ (x[1] > 0.3) ^ (r.random::<f64>() < 0.1))
            .collect();
        let mut last = 0.0;
        for depth in 0..=8 {
            let params = TreeParams {
                max_depth: depth,
                min_leaf: 5,
            };
            let tree = tree_fit(&xs, &ys, params).unwrap();
            assert!(tree.depth() <= depth);
            let acc = xs.iter().zip(&ys).filter(|(x, y)| tree.classify(*x).unwrap() == **y).count() as f64 / 300.0;
            assert!(acc >= last, "depth {depth}: {acc} < {last}");
            last = acc;
        }
        assert!(last > 0.85);
    }

    #[test]
    fn auroc_cases() {
        assert_eq!(auroc(&[0.1, 0.2, 0.8, 0.9], &[false, false, true, true]).unwrap(), 1.0);
        assert_eq!(auroc(&[0.5; 4], &[false, true, false, true]).unwrap(), 0.5);
        assert_eq!(auroc(&[0.9, 0.1], &[true, true]), Err(Error::SingleClass));
        let mut r = rng(1);
        let scores: Vec<f64> = (0..10_000).map(|_| r.random()).collect();
        let labels: Vec<bool> = (0..10_000).map(|i| i % 2 == 0).collect();
        assert!((auroc(&scores, &labels).unwrap() - 0.5).abs() < 0.02);
    }

    #[test]
    fn errors_and_reconstruction() {
        assert!(tree_fit::<[f64; 1]>(&[], &[], TreeParams::default()).is_err());
        let tree = tree_fit(&[[0.0], [1.0]], &[false, true], TreeParams { max_depth: 3, min_leaf: 1 }).unwrap();
        let again = DecisionTree::from_nodes(tree.nodes().to_vec(), 1, 3).unwrap();
        assert_eq!(tree, again);
        assert!(DecisionTree::from_nodes(vec![Node::Split { feature: 0, threshold: 0.0, left: 0, right: 0 }], 1, 3).is_err());
    }
}
