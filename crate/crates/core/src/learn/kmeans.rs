//! Lloyd's k-means with k-means++ seeding and an elbow sweep.

use alloc::vec::Vec;

use rand::Rng as _;

use crate::rng::{rng, Rng};
use crate::{Error, Result};

const MAX_ITERATIONS: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    /// Inertia after each assignment step, in order.
    pub history: Vec<f64>,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(x: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = dist2(x, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn check<X: AsRef<[f64]>>(xs: &[X], k: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if k > xs.len() {
        return Err(Error::TooManyClusters { k, n: xs.len() });
    }
    let dim = xs[0].as_ref().len();
    if xs.iter().any(|x| x.as_ref().len() != dim) {
        return Err(Error::InvalidArgument("feature rows must share a length".into()));
    }
    Ok(dim)
}

/// Adds one center drawn with probability proportional to the squared
/// distance to the nearest existing center.
fn add_plus_plus<X: AsRef<[f64]>>(xs: &[X], centroids: &mut Vec<Vec<f64>>, r: &mut Rng) {
    if centroids.is_empty() {
        centroids.push(xs[r.random_range(0..xs.len())].as_ref().to_vec());
        return;
    }
    let d: Vec<f64> = xs.iter().map(|x| nearest(x.as_ref(), centroids).1).collect();
    let total: f64 = d.iter().sum();
    let pick = if total > 0.0 {
        let target = r.random::<f64>() * total;
        let mut acc = 0.0;
        d.iter()
            .position(|v| {
                acc += v;
                acc > target
            })
            .unwrap_or(xs.len() - 1)
    } else {
        r.random_range(0..xs.len())
    };
    centroids.push(xs[pick].as_ref().to_vec());
}

fn lloyd<X: AsRef<[f64]>>(xs: &[X], mut centroids: Vec<Vec<f64>>) -> KMeans {
    let dim = centroids[0].len();
    let mut assignments: Vec<usize> = alloc::vec![usize::MAX; xs.len()];
    let mut history = Vec::new();
    for _ in 0..MAX_ITERATIONS {
        let mut changed = false;
        let mut inertia = 0.0;
        for (a, x) in assignments.iter_mut().zip(xs) {
            let (j, d) = nearest(x.as_ref(), &centroids);
            inertia += d;
            if *a != j {
                *a = j;
                changed = true;
            }
        }
        history.push(inertia);
        if !changed {
            break;
        }
        let mut sums = alloc::vec![alloc::vec![0.0; dim]; centroids.len()];
        let mut counts = alloc::vec![0usize; centroids.len()];
        for (x, &a) in xs.iter().zip(&assignments) {
            counts[a] += 1;
            sums[a].iter_mut().zip(x.as_ref()).for_each(|(s, v)| *s += v);
        }
        for ((c, s), n) in centroids.iter_mut().zip(sums).zip(counts) {
            // An empty cluster keeps its previous center.
            if n > 0 {
                *c = s.into_iter().map(|v| v / n as f64).collect();
            }
        }
    }
    KMeans {
        inertia: *history.last().expect("at least one iteration"),
        centroids,
        assignments,
        history,
    }
}

pub fn kmeans<X: AsRef<[f64]>>(xs: &[X], k: usize, seed: u64) -> Result<KMeans> {
    check(xs, k)?;
    let mut r = rng(seed);
    let mut centroids = Vec::with_capacity(k);
    for _ in 0..k {
        add_plus_plus(xs, &mut centroids, &mut r);
    }
    Ok(lloyd(xs, centroids))
}

/// Inertia for k = 1..=k_max. Each k starts from the previous solution plus
/// one k-means++ center, so the curve never increases.
pub fn elbow<X: AsRef<[f64]>>(xs: &[X], k_max: usize, seed: u64) -> Result<Vec<f64>> {
    check(xs, k_max)?;
    let mut r = rng(seed);
    let mut centroids = Vec::new();
    let mut out = Vec::with_capacity(k_max);
    for _ in 0..k_max {
        add_plus_plus(xs, &mut centroids, &mut r);
        let fit = lloyd(xs, centroids);
        out.push(fit.inertia);
        centroids = fit.centroids;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn blobs(seed: u64) -> (Vec<[f64; 2]>, Vec<usize>) {
        let mut r = rng(seed);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..60 {
            let c = i % 2;
            let off = if c == 0 { 0.0 } else { 10.0 };
            xs.push([off + r.random_range(-1.0..1.0), off + r.random_range(-1.0..1.0)]);
            ys.push(c);
        }
        (xs, ys)
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let xs = [[0.0, 1.0], [2.0, 3.0], [4.0, 8.0]];
        let fit = kmeans(&xs, 1, 0).unwrap();
        assert_eq!(fit.centroids[0], alloc::vec![2.0, 4.0]);
        assert_eq!(kmeans(&xs, 4, 0), Err(Error::TooManyClusters { k: 4, n: 3 }));
    }

    #[test]
    fn separated_blobs_are_recovered() {
        let (xs, ys) = blobs(3);
        let fit = kmeans(&xs, 2, 9).unwrap();
        let flip = fit.assignments[0] != ys[0];
        for (a, y) in fit.assignments.iter().zip(&ys) {
            assert_eq!(*a == 1, (*y == 1) ^ flip);
        }
        for pair in fit.history.windows(2) {
            assert!(pair[1] <= pair[0]);
        }
    }

    #[test]
    fn elbow_is_non_increasing() {
        let (xs, _) = blobs(5);
        let curve = elbow(&xs, 10, 2).unwrap();
        assert_eq!(curve.len(), 10);
        for pair in curve.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12);
        }
        assert!(curve[1] < 0.1 * curve[0]);
    }
}
