use pdvoice_learn::forest::{ForestModel, ForestParams};
use pdvoice_learn::tree::{DecisionTree, Mode, Node, TreeParams};
use pdvoice_learn::validate::loo_validate;
use pdvoice_learn::Learner;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Two Gaussian blobs in `dim` dimensions, centres 6 sd apart on every axis.
fn blobs(per_class: usize, dim: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal: Normal<f64> = Normal::new(0.0, 0.5).unwrap();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for c in 0..2 {
        for _ in 0..per_class {
            x.push(
                (0..dim)
                    .map(|_| 3.0 * c as f64 + normal.sample(&mut rng).clamp(-1.4, 1.4))
                    .collect(),
            );
            y.push(c as f64);
        }
    }
    (x, y)
}

#[test]
fn step_target_splits_near_half() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut x: Vec<Vec<f64>> = (0..60).map(|_| vec![rng.random_range(0.0..0.45)]).collect();
    x.extend((0..60).map(|_| vec![rng.random_range(0.55..1.0)]));
    let y: Vec<f64> = x
        .iter()
        .map(|r| if r[0] > 0.5 { 7.0 } else { 2.0 })
        .collect();
    let t = DecisionTree::fit(&x, &y, &TreeParams::new(Mode::Regression)).unwrap();
    match &t.nodes[0] {
        Node::Split { threshold, .. } => {
            assert!(*threshold > 0.4 && *threshold < 0.6, "{threshold}")
        }
        Node::Leaf { .. } => panic!("root should split"),
    }
    let mae: f64 = x
        .iter()
        .zip(&y)
        .map(|(r, v)| (t.predict(r).unwrap() - v).abs())
        .sum::<f64>()
        / 120.0;
    assert_eq!(mae, 0.0);
}

#[test]
fn blobs_are_fit_exactly() {
    let (x, y) = blobs(30, 3, 1);
    let t = DecisionTree::fit(&x, &y, &TreeParams::new(Mode::Classification)).unwrap();
    for (r, v) in x.iter().zip(&y) {
        assert_eq!(t.predict(r).unwrap(), *v);
    }
}

#[test]
fn single_unbootstrapped_tree_equals_cart() {
    let (x, y) = blobs(20, 4, 2);
    let mut y = y;
    y[3] = 1.0; // some label noise so the tree is not a stump
    let params = TreeParams::new(Mode::Classification);
    let cart = DecisionTree::fit(&x, &y, &params).unwrap();
    let forest = ForestModel::fit(
        &x,
        &y,
        &ForestParams {
            n_trees: 1,
            feature_subsample: Some(4),
            bootstrap: false,
            seed: 11,
            tree: params,
        },
    )
    .unwrap();
    assert_eq!(forest.trees[0], cart);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let r: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..5.0)).collect();
        assert_eq!(forest.predict(&r).unwrap(), cart.predict(&r).unwrap());
    }
}

#[test]
fn forest_loo_separates_blobs() {
    let (x, y) = blobs(15, 3, 5);
    let mut p = ForestParams::new(Mode::Classification, 21);
    p.n_trees = 50;
    let out = loo_validate(&x, &y, &Learner::Forest(p)).unwrap();
    assert!(out.failures.is_empty());
    for (pred, truth) in out.predictions.iter().zip(&y) {
        assert_eq!(pred.unwrap(), *truth);
    }
}

#[test]
fn fixed_seed_forest_is_byte_identical() {
    let (x, y) = blobs(20, 5, 6);
    let mut p = ForestParams::new(Mode::Classification, 99);
    p.n_trees = 40;
    let a = ForestModel::fit(&x, &y, &p).unwrap();
    let b = ForestModel::fit(&x, &y, &p).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    let back = ForestModel::from_json(&a.to_json().unwrap()).unwrap();
    assert_eq!(back, a);
    let la = loo_validate(&x, &y, &Learner::Forest(p)).unwrap();
    let lb = loo_validate(&x, &y, &Learner::Forest(p)).unwrap();
    assert_eq!(la, lb);
    p.seed = 100;
    assert_ne!(ForestModel::fit(&x, &y, &p).unwrap().seeds, a.seeds);
}

#[test]
fn loo_constant_target() {
    let x: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64, (i * i) as f64]).collect();
    let out = loo_validate(
        &x,
        &[3.5; 9],
        &Learner::Cart(TreeParams::new(Mode::Regression)),
    )
    .unwrap();
    assert_eq!(out.predictions, vec![Some(3.5); 9]);
}

#[test]
fn loo_never_sees_the_held_out_row() {
    // Uninformative feature: each prediction is a training-set mean, so a
    // poisoned held-out target must not pull its own prediction.
    let n = 12;
    let x: Vec<Vec<f64>> = vec![vec![1.0]; n];
    let y: Vec<f64> = (0..n).map(|i| (i % 3) as f64).collect();
    let learner = Learner::Cart(TreeParams::new(Mode::Regression));
    let clean = loo_validate(&x, &y, &learner).unwrap();
    for i in 0..n {
        let mut poisoned = y.clone();
        poisoned[i] = 1e6;
        let out = loo_validate(&x, &poisoned, &learner).unwrap();
        assert_eq!(out.predictions[i], clean.predictions[i], "fold {i}");
        let rest: f64 = (0..n).filter(|&j| j != i).map(|j| y[j]).sum::<f64>() / (n - 1) as f64;
        assert!((out.predictions[i].unwrap() - rest).abs() < 1e-12);
    }
}

#[test]
fn loo_needs_three_rows() {
    let learner = Learner::Cart(TreeParams::new(Mode::Regression));
    assert!(loo_validate(&[vec![0.0], vec![1.0]], &[0.0, 1.0], &learner).is_err());
}

#[test]
fn failed_folds_are_reported() {
    // Holding out the lone positive leaves a single-class training set.
    let x: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
    let y = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
    let mut p = ForestParams::new(Mode::Classification, 1);
    p.n_trees = 3;
    let out = loo_validate(&x, &y, &Learner::Forest(p)).unwrap();
    assert_eq!(out.failures.len(), 1);
    assert_eq!(out.failures[0].0, 5);
    assert_eq!(out.predictions[5], None);
}

/// Tree obtained by mapping every threshold of `t` through `f`.
fn relabel(t: &DecisionTree, f: impl Fn(f64) -> f64) -> DecisionTree {
    let mut out = t.clone();
    for n in &mut out.nodes {
        if let Node::Split { threshold, .. } = n {
            *threshold = f(*threshold);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cart_decisions_survive_monotone_transforms(seed in any::<u64>(), n in 12usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..2).map(|_| rng.random_range(0.0..4.0)).collect()).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..3) as f64).collect();
        let params = TreeParams::new(Mode::Classification);
        let base = DecisionTree::fit(&x, &y, &params).unwrap();
        let warp = |v: f64| v.powi(3) + v;
        let xw: Vec<Vec<f64>> = x.iter().map(|r| r.iter().map(|&v| warp(v)).collect()).collect();
        let warped = DecisionTree::fit(&xw, &y, &params).unwrap();
        // Same structure; thresholds move between the same neighbours.
        let moved = relabel(&base, warp);
        prop_assert_eq!(warped.nodes.len(), moved.nodes.len());
        for (r, rw) in x.iter().zip(&xw) {
            prop_assert_eq!(base.predict(r).unwrap(), warped.predict(rw).unwrap());
        }
        let leaves = |t: &DecisionTree| t.nodes.iter().filter_map(|n| match n {
            Node::Leaf { value } => Some(*value),
            _ => None,
        }).collect::<Vec<_>>();
        prop_assert_eq!(leaves(&warped), leaves(&moved));
    }

    #[test]
    fn tree_invariants(seed in any::<u64>(), depth in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..30).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let y: Vec<f64> = (0..30).map(|_| rng.random_range(-5.0..5.0)).collect();
        let mut params = TreeParams::new(Mode::Regression);
        params.max_depth = Some(depth);
        let t = DecisionTree::fit(&x, &y, &params).unwrap();
        prop_assert!(t.depth() <= depth);
        for n in &t.nodes {
            match n {
                Node::Split { feature, .. } => prop_assert!(*feature < 3),
                Node::Leaf { value } => prop_assert!(value.is_finite()),
            }
        }
    }
}
