use ndarray::{concatenate, s, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::loss::{discriminator_output_grads, gan_losses, generator_output_grad, GeneratorLoss};
use super::mlp::{mlp_backward, mlp_forward_train, MlpSpec};
use super::model::{default_discriminator_spec, default_generator_spec, latent_batch, GanModel, DEFAULT_LATENT_DIM};
use crate::envset::{EnvEntry, EnvironmentSet, Provenance, SetKind};
use crate::error::{Error, Result};
use crate::grid::{OccupancyGrid, GRID_CELLS};
use crate::rng::SeededRng;
use crate::sim::nav::is_navigable_grid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GanTrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub seed: u64,
    pub d_steps_per_g_step: usize,
    pub generator_loss: GeneratorLoss,
    pub latent_dim: usize,
}

impl Default for GanTrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 64,
            learning_rate: 1e-3,
            adam_beta1: 0.5,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            seed: 0,
            d_steps_per_g_step: 1,
            generator_loss: GeneratorLoss::NonSaturating,
            latent_dim: DEFAULT_LATENT_DIM,
        }
    }
}

impl GanTrainConfig {
    pub fn validate(&self, dataset_len: usize) -> Result<()> {
        let positive = [
            ("epochs", self.epochs),
            ("batch_size", self.batch_size),
            ("d_steps_per_g_step", self.d_steps_per_g_step),
            ("latent_dim", self.latent_dim),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::config(format!("{name} must be positive")));
            }
        }
        for (name, v) in [
            ("learning_rate", self.learning_rate),
            ("adam_beta1", self.adam_beta1),
            ("adam_beta2", self.adam_beta2),
            ("adam_epsilon", self.adam_epsilon),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(format!("{name} must be positive")));
            }
        }
        if self.adam_beta1 >= 1.0 || self.adam_beta2 >= 1.0 {
            return Err(Error::config("Adam betas must be below 1"));
        }
        if self.batch_size > dataset_len {
            return Err(Error::config(format!(
                "batch_size {} exceeds dataset size {dataset_len}",
                self.batch_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub loss_d: f64,
    pub loss_g: f64,
}

/// Train with the default architectures on a set of grids.
pub fn train_gan(dataset: &EnvironmentSet, cfg: &GanTrainConfig) -> Result<GanModel> {
    train_gan_with(
        dataset,
        cfg,
        default_generator_spec(cfg.latent_dim),
        default_discriminator_spec(),
    )
    .map(|(m, _)| m)
}

/// Train with explicit architectures; also returns per-epoch mean losses.
pub fn train_gan_with(
    dataset: &EnvironmentSet,
    cfg: &GanTrainConfig,
    generator: MlpSpec,
    discriminator: MlpSpec,
) -> Result<(GanModel, Vec<EpochStats>)> {
    if dataset.is_empty() {
        return Err(Error::contract("cannot train on an empty set"));
    }
    cfg.validate(dataset.len())?;
    if generator.input_width() != cfg.latent_dim {
        return Err(Error::config(format!(
            "generator input width {} differs from latent_dim {}",
            generator.input_width(),
            cfg.latent_dim
        )));
    }
    if generator.output_width() != GRID_CELLS {
        return Err(Error::contract("generator must emit 900 values"));
    }
    let mut model = GanModel::new(generator, discriminator, cfg.seed)?;
    let data: Vec<Vec<f64>> = dataset.grids().map(|g| g.to_signed()).collect();
    let n = data.len();
    let batches = n / cfg.batch_size;

    let root = SeededRng::new(cfg.seed);
    let mut shuffle_rng = root.derive(1);
    let mut noise_rng = root.derive(2);
    let mut dropout_rng = root.derive(3);
    let mut opt_d = Adam::new(
        &model.discriminator.params,
        cfg.learning_rate,
        cfg.adam_beta1,
        cfg.adam_beta2,
        cfg.adam_epsilon,
    );
    let mut opt_g = Adam::new(
        &model.generator.params,
        cfg.learning_rate,
        cfg.adam_beta1,
        cfg.adam_beta2,
        cfg.adam_epsilon,
    );

    let mut history = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..n).collect();
    let mut step = 0usize;
    for epoch in 0..cfg.epochs {
        shuffle_rng.shuffle(&mut order);
        let (mut sum_d, mut sum_g, mut count_d, mut count_g) = (0.0, 0.0, 0usize, 0usize);
        for b in 0..batches {
            step += 1;
            let idx = &order[b * cfg.batch_size..(b + 1) * cfg.batch_size];
            let real = Array2::from_shape_fn((idx.len(), GRID_CELLS), |(i, j)| data[idx[i]][j]);
            let bs = idx.len();

            // Discriminator update. Real and fake rows share one pass so
            // batch normalization sees both and keeps the batch mean, which
            // is what separates the two.
            let z = latent_batch(bs, cfg.latent_dim, &mut noise_rng);
            let (fake, _) = mlp_forward_train(
                &model.generator.spec,
                &mut model.generator.params,
                z.view(),
                &mut dropout_rng,
            )?;
            let d_spec = model.discriminator.spec.clone();
            let mixed = concatenate![Axis(0), real.view(), fake.view()];
            let (d_out, cache) =
                mlp_forward_train(&d_spec, &mut model.discriminator.params, mixed.view(), &mut dropout_rng)?;
            let (d_real, d_fake) = d_out.view().split_at(Axis(0), bs);
            let (loss_d, _) = gan_losses(
                d_real.as_slice().expect("contiguous"),
                d_fake.as_slice().expect("contiguous"),
                cfg.generator_loss,
            );
            if !loss_d.is_finite() {
                return Err(Error::Training {
                    epoch,
                    step,
                    message: format!("discriminator loss is {loss_d}"),
                });
            }
            let (g_real, g_fake) = discriminator_output_grads(d_real, d_fake);
            let up = concatenate![Axis(0), g_real.view(), g_fake.view()];
            let total = mlp_backward(&d_spec, &model.discriminator.params, &cache, up.view())?.params;
            opt_d.step(&mut model.discriminator.params, &total);
            sum_d += loss_d;
            count_d += 1;

            if !step.is_multiple_of(cfg.d_steps_per_g_step) {
                continue;
            }

            // Generator update through the (fixed) discriminator, again on a
            // mixed batch; only the fake rows carry gradient.
            let z = latent_batch(bs, cfg.latent_dim, &mut noise_rng);
            let g_spec = model.generator.spec.clone();
            let (fake, cache_g) =
                mlp_forward_train(&g_spec, &mut model.generator.params, z.view(), &mut dropout_rng)?;
            let mixed = concatenate![Axis(0), real.view(), fake.view()];
            let (d_out, cache_d) =
                mlp_forward_train(&d_spec, &mut model.discriminator.params, mixed.view(), &mut dropout_rng)?;
            let d_fake = d_out.slice(s![bs.., ..]);
            let (_, loss_g) = gan_losses(&[0.5], d_fake.as_slice().expect("contiguous"), cfg.generator_loss);
            if !loss_g.is_finite() {
                return Err(Error::Training {
                    epoch,
                    step,
                    message: format!("generator loss is {loss_g}"),
                });
            }
            let mut up = Array2::zeros((2 * bs, 1));
            up.slice_mut(s![bs.., ..]).assign(&generator_output_grad(d_fake, cfg.generator_loss));
            let through_d = mlp_backward(&d_spec, &model.discriminator.params, &cache_d, up.view())?;
            let g_in = through_d.input.slice(s![bs.., ..]);
            let gg = mlp_backward(&g_spec, &model.generator.params, &cache_g, g_in)?;
            opt_g.step(&mut model.generator.params, &gg.params);
            sum_g += loss_g;
            count_g += 1;
        }
        if !model.generator.params.is_finite() || !model.discriminator.params.is_finite() {
            return Err(Error::Training {
                epoch,
                step,
                message: "non-finite parameters".into(),
            });
        }
        let stats = EpochStats {
            loss_d: sum_d / count_d.max(1) as f64,
            loss_g: sum_g / count_g.max(1) as f64,
        };
        log::debug!("epoch {epoch}: loss_d {:.4} loss_g {:.4}", stats.loss_d, stats.loss_g);
        history.push(stats);
    }
    Ok((model, history))
}

/// Binarize one generator output at threshold 0.
pub fn binarize_output(values: &[f64]) -> Result<OccupancyGrid> {
    OccupancyGrid::from_scores(values, 0.0)
}

/// Draw `count` navigable environments from the generator. Non-navigable
/// samples are redrawn, up to `100 · count` draws in total.
pub fn sample_environments(model: &GanModel, count: usize, rng: &mut SeededRng) -> Result<EnvironmentSet> {
    let mut out = EnvironmentSet::new(SetKind::Synthesized);
    let cap = 100 * count;
    let mut draws = 0usize;
    while out.len() < count {
        if draws >= cap {
            return Err(Error::SamplingExhausted {
                draws,
                accepted: out.len(),
                rate: out.len() as f64 / draws.max(1) as f64,
            });
        }
        let chunk = (count - out.len()).min(cap - draws).min(64);
        let z = latent_batch(chunk, model.latent_dim, rng);
        let samples = model.generate(&z)?;
        for row in samples.axis_iter(Axis(0)) {
            draws += 1;
            let grid = binarize_output(row.as_slice().expect("row-major"))?;
            if out.len() < count && is_navigable_grid(&grid) {
                let i = out.len();
                out.entries.push(EnvEntry {
                    id: format!("gan-{i:04}"),
                    grid,
                    c_bar: None,
                    provenance: Provenance::Generated { draw: draws - 1 },
                });
            }
        }
    }
    Ok(out)
}

/// Stack grids as signed rows; used by tests and diagnostics.
pub fn signed_matrix<'a>(grids: impl Iterator<Item = &'a OccupancyGrid>) -> Array2<f64> {
    let rows: Vec<Array2<f64>> = grids
        .map(|g| Array2::from_shape_vec((1, GRID_CELLS), g.to_signed()).expect("shape"))
        .collect();
    if rows.is_empty() {
        return Array2::zeros((0, GRID_CELLS));
    }
    let views: Vec<_> = rows.iter().map(|r| r.view()).collect();
    concatenate(Axis(0), &views).expect("same widths")
}
