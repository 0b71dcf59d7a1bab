//! Generative adversarial synthesis of occupancy grids.
//!
//! Both networks are plain multilayer perceptrons implemented on
//! [`ndarray`]: affine layers, batch normalization, leaky ReLU and inverted
//! dropout, with hand-written backpropagation ([`mlp`]). [`train`] plays the
//! discriminator/generator game with Adam and [`sample_environments`] turns
//! generator outputs into binary grids.

pub mod adam;
pub mod loss;
pub mod mlp;
pub mod model;
pub mod train;

pub use loss::{gan_losses, GeneratorLoss};
pub use mlp::{Mlp, MlpParams, MlpSpec, Mode, OutputActivation};
pub use model::GanModel;
pub use train::{sample_environments, train_gan, GanTrainConfig};
