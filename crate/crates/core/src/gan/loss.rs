use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

/// Probabilities are clamped into [CLAMP, 1 - CLAMP] before taking logs.
pub const PROB_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorLoss {
    /// Minimize -log D(G(z)).
    #[default]
    NonSaturating,
    /// Minimize log(1 - D(G(z))), the literal minimax objective.
    Minimax,
}

fn clamp(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

fn mean<F: Fn(f64) -> f64>(xs: &[f64], f: F) -> f64 {
    xs.iter().map(|&x| f(clamp(x))).sum::<f64>() / xs.len() as f64
}

/// Returns `(loss_d, loss_g)` where `loss_d = -mean ln D(e) - mean ln(1 - D(G(z)))`,
/// i.e. the negated value function, and `loss_g` follows `kind`.
pub fn gan_losses(d_real: &[f64], d_fake: &[f64], kind: GeneratorLoss) -> (f64, f64) {
    let loss_d = -mean(d_real, f64::ln) - mean(d_fake, |p| (1.0 - p).ln());
    let loss_g = match kind {
        GeneratorLoss::NonSaturating => -mean(d_fake, f64::ln),
        GeneratorLoss::Minimax => mean(d_fake, |p| (1.0 - p).ln()),
    };
    (loss_d, loss_g)
}

/// ∂loss_d/∂D for the real and fake batches (`(B, 1)` columns).
pub fn discriminator_output_grads(d_real: ArrayView2<f64>, d_fake: ArrayView2<f64>) -> (Array2<f64>, Array2<f64>) {
    let nr = d_real.nrows() as f64;
    let nf = d_fake.nrows() as f64;
    (
        d_real.mapv(|p| -1.0 / (nr * clamp(p))),
        d_fake.mapv(|p| 1.0 / (nf * (1.0 - clamp(p)))),
    )
}

/// ∂loss_g/∂D(G(z)).
pub fn generator_output_grad(d_fake: ArrayView2<f64>, kind: GeneratorLoss) -> Array2<f64> {
    let n = d_fake.nrows() as f64;
    match kind {
        GeneratorLoss::NonSaturating => d_fake.mapv(|p| -1.0 / (n * clamp(p))),
        GeneratorLoss::Minimax => d_fake.mapv(|p| -1.0 / (n * (1.0 - clamp(p)))),
    }
}
