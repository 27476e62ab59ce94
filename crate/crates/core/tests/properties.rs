use proptest::prelude::*;
use shiftguard_core::haar;
use shiftguard_core::learn::{auroc, tree_fit, TreeParams};
use shiftguard_core::metrics::{
    assignment, make_projection, ssim, wasserstein_1d, wasserstein_exact, wasserstein_sliced, PointCloud,
    ProjectionFamily,
};
use shiftguard_core::transforms::{action_library, apply};
use shiftguard_core::{Image, SampleSet};

fn cloud(dim: usize, len: usize) -> impl Strategy<Value = PointCloud> {
    prop::collection::vec(-5.0f64..5.0, dim * len).prop_map(move |d| PointCloud::new(dim, d).unwrap())
}

fn plane() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
    (1usize..6, 1usize..6).prop_flat_map(|(hw, hh)| {
        let (w, h) = (2 * hw, 2 * hh);
        prop::collection::vec(-1.0f64..1.0, w * h).prop_map(move |p| (w, h, p))
    })
}

fn gray_image() -> impl Strategy<Value = Image> {
    (4usize..10, 4usize..10).prop_flat_map(|(w, h)| {
        prop::collection::vec(0.0f64..=1.0, w * h).prop_map(move |p| Image::new(w, h, 1, p).unwrap())
    })
}

proptest! {
    #[test]
    fn haar_is_orthonormal_and_invertible((w, h, p) in plane()) {
        let planes = haar::forward(&p, w, h);
        let back = haar::inverse(&planes);
        for (a, b) in p.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let energy: f64 = p.iter().map(|v| v * v).sum();
        let coeff: f64 = planes.coefficients().map(|v| v * v).sum();
        prop_assert!((energy - coeff).abs() < 1e-9);
    }

    #[test]
    fn orthonormal_projection_is_a_contraction(
        seed in any::<u64>(),
        x in prop::collection::vec(-3.0f64..3.0, 12),
        y in prop::collection::vec(-3.0f64..3.0, 12),
    ) {
        let p = make_projection(12, 5, ProjectionFamily::Orthonormal, seed).unwrap();
        prop_assert!(p.orthonormality_error() < 1e-9);
        let (px, py) = (p.apply(&x).unwrap(), p.apply(&y).unwrap());
        let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
        prop_assert!(d(&px, &py) <= d(&x, &y) + 1e-9);
    }

    #[test]
    fn assignment_is_a_permutation_with_matching_cost(
        n in 1usize..7,
        cost in prop::collection::vec(0.0f64..10.0, 49),
    ) {
        let cost = &cost[..n * n];
        let (perm, total) = assignment(cost, n);
        let mut seen = perm.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
        let sum: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
        prop_assert!((sum - total).abs() < 1e-9);
    }

    #[test]
    fn exact_wasserstein_is_a_symmetric_distance(a in cloud(3, 6), b in cloud(3, 6), p in 1u32..3) {
        prop_assert!(wasserstein_exact(&a, &a, p).unwrap().abs() < 1e-12);
        let ab = wasserstein_exact(&a, &b, p).unwrap();
        let ba = wasserstein_exact(&b, &a, p).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() < 1e-9);
    }

    #[test]
    fn exact_matches_sorted_coupling_in_one_dimension(a in cloud(1, 8), b in cloud(1, 8), p in 1u32..3) {
        let exact = wasserstein_exact(&a, &b, p).unwrap();
        let sorted = wasserstein_1d(a.data(), b.data(), p).unwrap();
        prop_assert!((exact - sorted).abs() < 1e-9);
    }

    #[test]
    fn sliced_never_exceeds_exact(a in cloud(4, 6), b in cloud(4, 6), seed in any::<u64>()) {
        let sliced = wasserstein_sliced(&a, &b, 1, 16, seed).unwrap();
        let exact = wasserstein_exact(&a, &b, 1).unwrap();
        prop_assert!(sliced <= exact + 1e-9);
    }

    #[test]
    fn ssim_of_an_image_with_itself_is_one(img in gray_image()) {
        prop_assert!((ssim(&img, &img).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn actions_keep_shape_and_range(img in gray_image(), seed in any::<u64>()) {
        let batch = SampleSet::new(vec![img.clone()], None).unwrap();
        for spec in action_library() {
            let out = apply(&spec, &batch, seed).unwrap();
            let o = &out.images()[0];
            prop_assert_eq!((o.width(), o.height(), o.channels()), (img.width(), img.height(), 1));
            prop_assert!(o.data().iter().all(|v| (0.0..=1.0).contains(v)), "{} left [0, 1]", spec.name());
        }
    }

    #[test]
    fn deeper_trees_never_fit_worse(
        xs in prop::collection::vec(prop::array::uniform2(-1.0f64..1.0), 20..80),
        tilt in -1.0f64..1.0,
    ) {
        let ys: Vec<bool> = xs.iter().map(|x| x[0] * x[0] + tilt * x[1] > 0.2).collect();
        prop_assume!(ys.iter().any(|&y| y) && ys.iter().any(|&y| !y));
        let mut last = 0usize;
        for depth in 1..6 {
            let tree = tree_fit(&xs, &ys, TreeParams { max_depth: depth, min_leaf: 1 }).unwrap();
            prop_assert!(tree.depth() <= depth);
            let correct = xs.iter().zip(&ys).filter(|(x, &y)| tree.classify(&x[..]).unwrap() == y).count();
            prop_assert!(correct >= last, "depth {depth}: {correct} < {last}");
            last = correct;
        }
    }

    #[test]
    fn auroc_is_bounded_and_perfect_on_labels(labels in prop::collection::vec(any::<bool>(), 2..40), noise in prop::collection::vec(0.0f64..1.0, 40)) {
        prop_assume!(labels.iter().any(|&y| y) && labels.iter().any(|&y| !y));
        let scores: Vec<f64> = labels.iter().map(|&y| if y { 1.0 } else { 0.0 }).collect();
        prop_assert!((auroc(&scores, &labels).unwrap() - 1.0).abs() < 1e-12);
        let a = auroc(&noise[..labels.len()], &labels).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
    }
}
