mod common;

use abusebench::boosted::{find_best_split, predict_proba, train_boosted, train_boosted_with_history, BoostParams, Growth};
use abusebench::corpus::Label;
use abusebench::embeddings::EmbeddingMatrix;
use abusebench::sigmoid;
use common::oracles;
use proptest::prelude::*;

fn matrix(rows: &[Vec<f64>]) -> EmbeddingMatrix {
    let ids = (0..rows.len()).map(|i| format!("r{i}")).collect();
    EmbeddingMatrix::from_rows(ids, rows, rows[0].len(), "t").unwrap()
}

/// Small design matrices with repeated values so ties and duplicate
/// thresholds occur.
fn fixture(max_rows: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Label>)> {
    (1usize..4).prop_flat_map(move |d| {
        proptest::collection::vec((proptest::collection::vec(-4i32..5, d), any::<bool>()), 2..max_rows).prop_map(|rows| {
            rows.into_iter().map(|(r, l)| (r.into_iter().map(|v| f64::from(v) * 0.5).collect(), Label::from(l))).unzip()
        })
    })
}

#[test]
fn closed_form_fixture_predicts_expected_probability() {
    let x = matrix(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
    let y = [Label::Positive; 4];
    let p = BoostParams { n_rounds: 1, max_depth: 0, learning_rate: 0.3, lambda: 0.0, ..BoostParams::xgb_like() };
    let model = train_boosted(&x, &y, None, &p).unwrap();
    for s in predict_proba(&model, &x).unwrap() {
        assert!((s - 0.645656306225795).abs() < 1e-9);
        assert!((s - sigmoid(0.6)).abs() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn chosen_split_beats_every_alternative(
        (rows, labels) in fixture(30),
        probs in proptest::collection::vec(0.05f64..0.95, 30),
        lambda in prop_oneof![Just(0.0), 0.1f64..3.0],
        mch in prop_oneof![Just(0.0), 0.05f64..0.5],
    ) {
        let x = matrix(&rows);
        let p = BoostParams { lambda, min_child_hessian: mch, ..BoostParams::xgb_like() };
        let g: Vec<f64> = labels.iter().zip(&probs).map(|(l, s)| s - l.as_f64()).collect();
        let h: Vec<f64> = probs.iter().take(g.len()).map(|s| s * (1.0 - s)).collect();
        let found = find_best_split(&x, &g, &h, &p);
        let oracle = oracles::exhaustive_best_gain(&x, &g, &h, &p).filter(|(_, _, gain)| *gain > 0.0);
        match (found, oracle) {
            (Some(s), Some((_, _, best))) => prop_assert!(s.gain >= best - 1e-12 * best.abs().max(1.0), "{} < {}", s.gain, best),
            (None, None) => {}
            // gains within rounding noise of zero are not splits
            (None, Some((_, _, best))) => prop_assert!(best <= 1e-9, "missed gain {}", best),
            (s, o) => prop_assert!(false, "library {:?} vs oracle {:?}", s, o),
        }
    }

    #[test]
    fn training_loss_never_increases((rows, labels) in fixture(40), leaf_wise in any::<bool>()) {
        let x = matrix(&rows);
        let mut p = BoostParams { n_rounds: 8, max_depth: 3, ..BoostParams::xgb_like() };
        if leaf_wise {
            p = BoostParams { n_rounds: 8, max_leaves: 6, ..BoostParams::lgbm_like() };
            prop_assert_eq!(p.growth, Growth::LeafWise);
        }
        let (_, hist) = train_boosted_with_history(&x, &labels, None, &p).unwrap();
        for w in hist.losses.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "{:?}", hist.losses);
        }
    }

    #[test]
    // Powers of two scale g and h without rounding; other constants can flip
    // exact gain ties between candidate splits.
    fn constant_weights_match_unweighted_training((rows, labels) in fixture(30), k in -3i32..5) {
        let c = 2f64.powi(k);
        let x = matrix(&rows);
        let p = BoostParams { n_rounds: 5, max_depth: 3, lambda: 0.0, min_child_hessian: 0.0, ..BoostParams::xgb_like() };
        let plain = train_boosted(&x, &labels, None, &p).unwrap();
        let weighted = train_boosted(&x, &labels, Some(&vec![c; labels.len()]), &p).unwrap();
        prop_assert_eq!(plain.trees.len(), weighted.trees.len());
        for (a, b) in plain.trees.iter().zip(&weighted.trees) {
            prop_assert_eq!(a.splits.len(), b.splits.len());
            for (sa, sb) in a.splits.iter().zip(&b.splits) {
                prop_assert_eq!((sa.feature, sa.threshold, sa.left, sa.right), (sb.feature, sb.threshold, sb.left, sb.right));
            }
        }
        // leaves are bit-identical, gains scale by c
        for (a, b) in plain.trees.iter().zip(&weighted.trees) {
            prop_assert_eq!(&a.leaves, &b.leaves);
            for (sa, sb) in a.splits.iter().zip(&b.splits) {
                prop_assert_eq!(sa.gain * c, sb.gain);
            }
        }
    }

    #[test]
    fn training_is_deterministic((rows, labels) in fixture(30)) {
        let x = matrix(&rows);
        let p = BoostParams { n_rounds: 4, ..BoostParams::lgbm_like() };
        let a = train_boosted(&x, &labels, None, &p).unwrap().to_json();
        let b = train_boosted(&x, &labels, None, &p).unwrap().to_json();
        prop_assert_eq!(a, b);
    }
}
