mod common;

use common::{candidate_splits, exhaustive_split, knn_oracle, numeric_gradient, ols, relative_error, split_sse};
use evostack::learners::mlp::{Batch, Network};
use evostack::learners::{train_knn, train_pls, train_regression_tree, Metric};
use evostack::{seed, Dataset};
use proptest::prelude::*;
use rand::Rng;

fn random_rows<R: Rng>(rng: &mut R, n: usize, p: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..p).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

#[test]
fn knn_matches_brute_force() {
    let mut rng = seed::rng(101);
    for case in 0..200 {
        let n = rng.random_range(1..=50);
        let p = rng.random_range(1..=5);
        let rows = random_rows(&mut rng, n, p);
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let k = rng.random_range(1..=n);
        let alpha = [0.0, 0.5, 1.0, 2.0, 10.0, 20.0][case % 6];
        let metric = if case % 2 == 0 { Metric::Manhattan } else { Metric::Euclidean };
        let data = Dataset::from_rows("knn", &rows, y.clone()).unwrap();
        let model = train_knn(&data, k, alpha, metric).unwrap();
        let query = if case % 5 == 0 {
            rows[rng.random_range(0..n)].clone()
        } else {
            (0..p).map(|_| rng.random_range(-1.0..1.0)).collect()
        };
        let expect = knn_oracle(&rows, &y, &query, k, alpha, metric);
        let got = model.predict(&query);
        assert!((got - expect).abs() < 1e-10, "case {case}: {got} vs {expect}");
    }
}

#[test]
fn knn_duplicate_rows_average() {
    let rows = vec![vec![0.0], vec![0.0], vec![1.0]];
    let data = Dataset::from_rows("d", &rows, vec![1.0, 3.0, 10.0]).unwrap();
    let model = train_knn(&data, 3, 2.0, Metric::Euclidean).unwrap();
    assert_eq!(model.predict(&[0.0]), 2.0);
}

#[test]
fn tree_root_matches_exhaustive_search() {
    let mut rng = seed::rng(202);
    for case in 0..100 {
        let n = rng.random_range(2..=20);
        let p = rng.random_range(1..=4);
        let min_leaf = rng.random_range(1..=3);
        let rows = random_rows(&mut rng, n, p);
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let data = Dataset::from_rows("tree", &rows, y.clone()).unwrap();
        let tree = train_regression_tree(&data, p, min_leaf, case).unwrap();
        match (tree.root_split(), exhaustive_split(&rows, &y, min_leaf)) {
            (Some((f, t)), Some((_, _, best))) => {
                // Equal-SSE alternatives (common for tiny n) are all optimal.
                let candidates = candidate_splits(&rows, &y, min_leaf);
                assert!(candidates.iter().any(|c| (c.0, c.1) == (f, t)), "case {case}: ({f}, {t}) not admissible");
                let got = split_sse(&rows, &y, f, t);
                assert!((got - best).abs() <= 1e-9 * (1.0 + best), "case {case}: sse {got} vs {best}");
            }
            (None, None) => {}
            (got, want) => panic!("case {case}: {got:?} vs {want:?}"),
        }
    }
}

#[test]
fn pls_full_rank_equals_least_squares() {
    let mut rng = seed::rng(303);
    for case in 0..50 {
        let p = rng.random_range(1..=5);
        let n = rng.random_range(p + 3..=40);
        let rows = random_rows(&mut rng, n, p);
        let y: Vec<f64> = rows
            .iter()
            .map(|r| r.iter().enumerate().map(|(j, v)| (j as f64 + 1.0) * v).sum::<f64>() + rng.random_range(-0.5..0.5))
            .collect();
        let data = Dataset::from_rows("pls", &rows, y.clone()).unwrap();
        let model = train_pls(&data, p).unwrap();
        let (b0, beta) = ols(&rows, &y);
        for _ in 0..10 {
            let x: Vec<f64> = (0..p).map(|_| rng.random_range(-2.0..2.0)).collect();
            let want = b0 + beta.iter().zip(&x).map(|(b, v)| b * v).sum::<f64>();
            let got = model.predict(&x);
            assert!((got - want).abs() < 1e-6, "case {case}: {got} vs {want}");
        }
    }
}

#[test]
fn mlp_gradient_matches_finite_differences() {
    let mut rng = seed::rng(404);
    for case in 0..20 {
        let p = rng.random_range(1..=5);
        let h = rng.random_range(1..=8);
        let n = rng.random_range(3..=30);
        let rows: Vec<f64> = (0..n * p).map(|_| rng.random_range(-1.5..1.5)).collect();
        let targets: Vec<f64> = (0..n).map(|_| rng.random_range(-0.9..0.9)).collect();
        let batch = Batch::new(&rows, p, &targets);
        let net = Network::random(p, h, &mut rng);
        let (_, analytic) = net.loss_and_gradient(&batch);
        let numeric = numeric_gradient(&net, &batch, 1e-5);
        let err = relative_error(&analytic, &numeric);
        assert!(err < 1e-4, "case {case}: relative error {err}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn knn_prediction_within_neighbour_range(seed_value in 0u64..10_000, k in 1usize..8, alpha in 0.0f64..20.0) {
        let mut rng = seed::rng(seed_value);
        let rows = random_rows(&mut rng, 12, 3);
        let y: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
        let data = Dataset::from_rows("p", &rows, y.clone()).unwrap();
        let model = train_knn(&data, k, alpha, Metric::Euclidean).unwrap();
        let q: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let nb = model.neighbours(&q);
        let lo = nb.iter().map(|&(_, i)| y[i]).fold(f64::INFINITY, f64::min);
        let hi = nb.iter().map(|&(_, i)| y[i]).fold(f64::NEG_INFINITY, f64::max);
        let v = model.predict(&q);
        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
    }

    #[test]
    fn pls_is_row_order_invariant(seed_value in 0u64..10_000, l in 1usize..4) {
        let mut rng = seed::rng(seed_value);
        let rows = random_rows(&mut rng, 20, 4);
        let y: Vec<f64> = rows.iter().map(|r| r[0] - 2.0 * r[2] + rng.random_range(-0.1..0.1)).collect();
        let a = train_pls(&Dataset::from_rows("a", &rows, y.clone()).unwrap(), l).unwrap();
        let mut order: Vec<usize> = (0..20).collect();
        order.reverse();
        order.swap(3, 11);
        let rows_b: Vec<Vec<f64>> = order.iter().map(|&i| rows[i].clone()).collect();
        let y_b: Vec<f64> = order.iter().map(|&i| y[i]).collect();
        let b = train_pls(&Dataset::from_rows("b", &rows_b, y_b).unwrap(), l).unwrap();
        let q = [0.3, -0.2, 0.9, 0.1];
        prop_assert!((a.predict(&q) - b.predict(&q)).abs() < 1e-10);
    }
}
