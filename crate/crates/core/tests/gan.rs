mod common;

use ndarray::{concatenate, Array2, Axis};
use proptest::prelude::*;

use envsynth::gan::mlp::{mlp_backward, mlp_forward};
use envsynth::gan::model::latent_batch;
use envsynth::gan::train::binarize_output;
use envsynth::gan::{
    sample_environments, train_gan, GanTrainConfig, MlpParams, MlpSpec, Mode, OutputActivation,
};
use envsynth::{SeededRng, SetKind, GRID_CELLS};

#[test]
fn forward_matches_hand_loops() {
    let spec = MlpSpec::new(vec![3, 4, 2], OutputActivation::Tanh, false, 0.0).unwrap();
    let params = MlpParams::init(&spec, &mut SeededRng::new(11));
    let x = Array2::from_shape_vec((2, 3), vec![0.3, -1.2, 0.7, -0.4, 0.9, 2.0]).unwrap();
    let (out, _) = mlp_forward(&spec, &params, x.view(), Mode::Eval, None).unwrap();

    let (w1, b1, w2, b2) = (&params.weights[0], &params.biases[0], &params.weights[1], &params.biases[1]);
    for r in 0..2 {
        let hidden: Vec<f64> = (0..4)
            .map(|j| {
                let a = b1[j] + (0..3).map(|i| x[[r, i]] * w1[[i, j]]).sum::<f64>();
                if a > 0.0 {
                    a
                } else {
                    0.2 * a
                }
            })
            .collect();
        for k in 0..2 {
            let want = (b2[k] + (0..4).map(|j| hidden[j] * w2[[j, k]]).sum::<f64>()).tanh();
            assert!((out[[r, k]] - want).abs() <= 1e-12, "row {r} col {k}");
        }
    }
}

#[test]
fn duplicated_rows_with_halved_upstream_match_single_row() {
    let spec = MlpSpec::new(vec![5, 4, 3], OutputActivation::Sigmoid, false, 0.0).unwrap();
    let params = MlpParams::init(&spec, &mut SeededRng::new(12));
    let mut rng = SeededRng::new(13);
    let x = Array2::from_shape_fn((1, 5), |_| rng.uniform(-1.0, 1.0));
    let u = Array2::from_shape_fn((1, 3), |_| rng.uniform(-1.0, 1.0));

    let grads = |x: &Array2<f64>, u: &Array2<f64>| {
        let (_, cache) = mlp_forward(&spec, &params, x.view(), Mode::Train, None).unwrap();
        mlp_backward(&spec, &params, &cache.unwrap(), u.view()).unwrap()
    };
    let one = grads(&x, &u);
    let half = &u * 0.5;
    let two = grads(
        &concatenate![Axis(0), x.view(), x.view()],
        &concatenate![Axis(0), half.view(), half.view()],
    );
    for (a, b) in one.params.trainable().iter().zip(two.params.trainable()) {
        for (p, q) in a.iter().zip(b.iter()) {
            assert!((p - q).abs() <= 1e-12, "{p} vs {q}");
        }
    }
}

#[test]
fn singleton_dataset_is_reproduced() {
    let target = common::side_wall(true, 3);
    let set = common::set_of(SetKind::Challenging, vec![target.clone(); 64]);
    let cfg = GanTrainConfig {
        epochs: 200,
        ..GanTrainConfig::default()
    };
    let model = train_gan(&set, &cfg).unwrap();

    let z = latent_batch(100, model.latent_dim, &mut SeededRng::new(5));
    let out = model.generate(&z).unwrap();
    let exact = out
        .rows()
        .into_iter()
        .filter(|r| binarize_output(r.as_slice().unwrap()).unwrap() == target)
        .count();
    assert!(exact >= 95, "{exact}/100 exact copies");

    let sampled = sample_environments(&model, 10, &mut SeededRng::new(6)).unwrap();
    assert_eq!(sampled.len(), 10);
    assert!(sampled.grids().filter(|g| **g == target).count() >= 9);
    assert!(sample_environments(&model, 0, &mut SeededRng::new(6)).unwrap().is_empty());
}

proptest! {
    #[test]
    fn binarization_thresholds_at_zero(values in prop::collection::vec(-1.0f64..1.0, GRID_CELLS)) {
        let g = binarize_output(&values).unwrap();
        let (s, e) = (g.start_cell(), g.goal_cell());
        for row in 0..30 {
            for col in 0..30 {
                let endpoint = (col, row) == (s.col, s.row) || (col, row) == (e.col, e.row);
                let want = u8::from(!endpoint && values[row * 30 + col] > 0.0);
                prop_assert_eq!(g.get(col, row), want);
            }
        }
    }
}
