use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::mlp::{Mlp, MlpParams, MlpSpec, OutputActivation};
use crate::checkpoint;
use crate::error::{Error, Result};
use crate::grid::GRID_CELLS;
use crate::rng::SeededRng;

const MAGIC: &str = "ENVSYNTH-GAN";
const VERSION: u32 = 1;

pub const DEFAULT_LATENT_DIM: usize = 100;

/// Generator: 256-512-1024 hidden units, batch norm, leaky ReLU, tanh output.
pub fn default_generator_spec(latent_dim: usize) -> MlpSpec {
    MlpSpec::new(
        vec![latent_dim, 256, 512, 1024, GRID_CELLS],
        OutputActivation::Tanh,
        true,
        0.0,
    )
    .expect("valid spec")
}

/// Discriminator: 512-256-256 hidden units, each followed by batch norm and
/// dropout 0.5, sigmoid output.
pub fn default_discriminator_spec() -> MlpSpec {
    MlpSpec::new(
        vec![GRID_CELLS, 512, 256, 256, 1],
        OutputActivation::Sigmoid,
        true,
        0.5,
    )
    .expect("valid spec")
}

#[derive(Debug, Clone, PartialEq)]
pub struct GanModel {
    pub generator: Mlp,
    pub discriminator: Mlp,
    pub latent_dim: usize,
    /// Seed the model was trained with.
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct Meta {
    latent_dim: usize,
    seed: u64,
    generator: MlpSpec,
    discriminator: MlpSpec,
}

impl GanModel {
    pub fn new(generator: MlpSpec, discriminator: MlpSpec, seed: u64) -> Result<Self> {
        generator.validate()?;
        discriminator.validate()?;
        if discriminator.input_width() != generator.output_width() {
            return Err(Error::contract(format!(
                "generator emits {} values but discriminator reads {}",
                generator.output_width(),
                discriminator.input_width()
            )));
        }
        if discriminator.output_width() != 1 {
            return Err(Error::contract("discriminator must output one probability"));
        }
        let mut rng = SeededRng::new(seed).derive(0x1417);
        let latent_dim = generator.input_width();
        Ok(Self {
            generator: Mlp::new(generator, &mut rng)?,
            discriminator: Mlp::new(discriminator, &mut rng)?,
            latent_dim,
            seed,
        })
    }

    /// Evaluation-mode generator output for a batch of latent vectors.
    pub fn generate(&self, z: &Array2<f64>) -> Result<Array2<f64>> {
        self.generator.forward_eval(z.view())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let meta = Meta {
            latent_dim: self.latent_dim,
            seed: self.seed,
            generator: self.generator.spec.clone(),
            discriminator: self.discriminator.spec.clone(),
        };
        let mut tensors = self.generator.params.all_tensors();
        tensors.extend(self.discriminator.params.all_tensors());
        checkpoint::write(path, MAGIC, VERSION, &meta, &tensors)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (meta, tensors): (Meta, _) = checkpoint::read(path, MAGIC, VERSION)?;
        let mut model = GanModel::new(meta.generator, meta.discriminator, meta.seed)?;
        let mut it = tensors.into_iter();
        for params in [&mut model.generator.params, &mut model.discriminator.params] {
            fill(params, &mut it).map_err(|m| Error::Parse {
                path: path.to_path_buf(),
                line: 3,
                message: m,
            })?;
        }
        if it.next().is_some() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 3,
                message: "more tensors than the specs need".into(),
            });
        }
        model.latent_dim = meta.latent_dim;
        if !model.generator.params.is_finite() || !model.discriminator.params.is_finite() {
            return Err(Error::Value(format!("{}: non-finite parameters", path.display())));
        }
        Ok(model)
    }
}

fn fill(params: &mut MlpParams, it: &mut impl Iterator<Item = Vec<f64>>) -> std::result::Result<(), String> {
    for slot in params.all_tensors_mut() {
        let t = it.next().ok_or("fewer tensors than the specs need")?;
        if t.len() != slot.len() {
            return Err(format!("tensor of {} values where {} expected", t.len(), slot.len()));
        }
        slot.copy_from_slice(&t);
    }
    Ok(())
}

/// Draw a `(count, latent_dim)` batch from N(0, 1).
pub fn latent_batch(count: usize, latent_dim: usize, rng: &mut SeededRng) -> Array2<f64> {
    let data: Vec<f64> = (0..count * latent_dim).map(|_| rng.normal()).collect();
    Array2::from_shape_vec((count, latent_dim), data).expect("shape")
}
