//! Multilayer perceptron with batch normalization and dropout.
//!
//! Batches are `(examples, features)` matrices. Each hidden layer computes
//! `affine → [batch norm] → leaky ReLU → [dropout]`; the output layer is
//! `affine → tanh | sigmoid`.

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

pub const BN_EPSILON: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputActivation {
    Tanh,
    Sigmoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    /// Input width, hidden widths, output width.
    pub layer_widths: Vec<usize>,
    pub leaky_slope: f64,
    pub output_activation: OutputActivation,
    /// One flag per hidden layer.
    pub batch_norm: Vec<bool>,
    pub dropout_rate: f64,
}

impl MlpSpec {
    pub fn new(
        layer_widths: Vec<usize>,
        output_activation: OutputActivation,
        batch_norm: bool,
        dropout_rate: f64,
    ) -> Result<Self> {
        let hidden = layer_widths.len().saturating_sub(2);
        let spec = Self {
            layer_widths,
            leaky_slope: 0.2,
            output_activation,
            batch_norm: vec![batch_norm; hidden],
            dropout_rate,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_widths.len() < 3 {
            return Err(Error::contract("an MLP needs at least one hidden layer"));
        }
        if self.layer_widths.contains(&0) {
            return Err(Error::contract("layer widths must be positive"));
        }
        if self.batch_norm.len() != self.hidden_layers() {
            return Err(Error::contract(format!(
                "{} batch-norm flags for {} hidden layers",
                self.batch_norm.len(),
                self.hidden_layers()
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::contract("dropout rate must be in [0, 1)"));
        }
        if !self.leaky_slope.is_finite() {
            return Err(Error::contract("leaky slope must be finite"));
        }
        Ok(())
    }

    pub fn hidden_layers(&self) -> usize {
        self.layer_widths.len() - 2
    }

    pub fn input_width(&self) -> usize {
        self.layer_widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.layer_widths.last().expect("validated")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm {
    pub gamma: Array1<f64>,
    pub beta: Array1<f64>,
    pub running_mean: Array1<f64>,
    pub running_var: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    /// `(in, out)` weight matrices, one per affine layer.
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    /// One entry per hidden layer.
    pub norms: Vec<Option<BatchNorm>>,
}

impl MlpParams {
    /// Uniform(-1/√fan_in, 1/√fan_in) weights and biases; γ = 1, β = 0.
    pub fn init(spec: &MlpSpec, rng: &mut SeededRng) -> Self {
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in spec.layer_widths.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            weights.push(Array2::from_shape_fn((fan_in, fan_out), |_| {
                rng.uniform(-bound, bound)
            }));
            biases.push(Array1::from_shape_fn(fan_out, |_| rng.uniform(-bound, bound)));
        }
        let norms = spec
            .batch_norm
            .iter()
            .enumerate()
            .map(|(l, &on)| {
                let w = spec.layer_widths[l + 1];
                on.then(|| BatchNorm {
                    gamma: Array1::ones(w),
                    beta: Array1::zeros(w),
                    running_mean: Array1::zeros(w),
                    running_var: Array1::ones(w),
                })
            })
            .collect();
        Self {
            weights,
            biases,
            norms,
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            weights: self.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            biases: self.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
            norms: self
                .norms
                .iter()
                .map(|n| {
                    n.as_ref().map(|n| BatchNorm {
                        gamma: Array1::zeros(n.gamma.len()),
                        beta: Array1::zeros(n.beta.len()),
                        running_mean: Array1::zeros(n.running_mean.len()),
                        running_var: Array1::zeros(n.running_var.len()),
                    })
                })
                .collect(),
        }
    }

    /// Trainable tensors in a fixed order: per layer W, b, then γ, β if present.
    pub fn trainable(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for l in 0..self.weights.len() {
            out.push(self.weights[l].as_slice().expect("standard layout"));
            out.push(self.biases[l].as_slice().expect("standard layout"));
            if let Some(Some(n)) = self.norms.get(l) {
                out.push(n.gamma.as_slice().expect("standard layout"));
                out.push(n.beta.as_slice().expect("standard layout"));
            }
        }
        out
    }

    pub fn trainable_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        let norms = &mut self.norms;
        let mut norm_iter = norms.iter_mut();
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            out.push(w.as_slice_mut().expect("standard layout"));
            out.push(b.as_slice_mut().expect("standard layout"));
            if let Some(Some(n)) = norm_iter.next() {
                out.push(n.gamma.as_slice_mut().expect("standard layout"));
                out.push(n.beta.as_slice_mut().expect("standard layout"));
            }
        }
        out
    }

    /// Every tensor including running statistics, for checkpoints.
    pub fn all_tensors(&self) -> Vec<&[f64]> {
        let mut out = self.trainable();
        for n in self.norms.iter().flatten() {
            out.push(n.running_mean.as_slice().expect("standard layout"));
            out.push(n.running_var.as_slice().expect("standard layout"));
        }
        out
    }

    pub fn all_tensors_mut(&mut self) -> Vec<&mut [f64]> {
        // Same order as `all_tensors`.
        let mut running: Vec<&mut [f64]> = Vec::new();
        let mut out: Vec<&mut [f64]> = Vec::new();
        let mut norm_iter = self.norms.iter_mut();
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            out.push(w.as_slice_mut().expect("standard layout"));
            out.push(b.as_slice_mut().expect("standard layout"));
            if let Some(Some(n)) = norm_iter.next() {
                out.push(n.gamma.as_slice_mut().expect("standard layout"));
                out.push(n.beta.as_slice_mut().expect("standard layout"));
                running.push(n.running_mean.as_slice_mut().expect("standard layout"));
                running.push(n.running_var.as_slice_mut().expect("standard layout"));
            }
        }
        out.extend(running);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.all_tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    pub fn parameter_count(&self) -> usize {
        self.trainable().iter().map(|t| t.len()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Debug, Clone)]
struct HiddenCache {
    input: Array2<f64>,
    /// Normalized pre-activation (only with batch norm).
    xhat: Option<Array2<f64>>,
    inv_std: Option<Array1<f64>>,
    /// Input to the leaky ReLU.
    pre_act: Array2<f64>,
    /// Inverted-dropout multipliers (0 or 1/(1-p)).
    mask: Option<Array2<f64>>,
}

/// Intermediates recorded by a training-mode forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    widths: Vec<usize>,
    hidden: Vec<HiddenCache>,
    last_input: Array2<f64>,
    output: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct Gradients {
    pub params: MlpParams,
    pub input: Array2<f64>,
}

/// A network: architecture plus parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub spec: MlpSpec,
    pub params: MlpParams,
}

impl Mlp {
    pub fn new(spec: MlpSpec, rng: &mut SeededRng) -> Result<Self> {
        spec.validate()?;
        let params = MlpParams::init(&spec, rng);
        Ok(Self { spec, params })
    }

    pub fn forward_eval(&self, input: ArrayView2<f64>) -> Result<Array2<f64>> {
        let (out, _) = mlp_forward(&self.spec, &self.params, input, Mode::Eval, None)?;
        Ok(out)
    }
}

fn leaky(x: f64, slope: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        slope * x
    }
}

fn affine(x: ArrayView2<f64>, w: &Array2<f64>, b: &Array1<f64>) -> Array2<f64> {
    let mut a = x.dot(w);
    a += b;
    a
}

/// Forward pass. Training mode uses batch statistics (and updates running
/// statistics in `params`) and applies dropout drawn from `rng`; evaluation
/// mode is a pure function of `params` and `input`.
pub fn mlp_forward(
    spec: &MlpSpec,
    params: &MlpParams,
    input: ArrayView2<f64>,
    mode: Mode,
    rng: Option<&mut SeededRng>,
) -> Result<(Array2<f64>, Option<ForwardCache>)> {
    let mut stats_sink = None;
    forward_impl(spec, params, input, mode, rng, &mut stats_sink)
}

/// Training-mode forward that also folds the batch statistics into the
/// running averages of `params`.
pub fn mlp_forward_train(
    spec: &MlpSpec,
    params: &mut MlpParams,
    input: ArrayView2<f64>,
    rng: &mut SeededRng,
) -> Result<(Array2<f64>, ForwardCache)> {
    let mut sink = Some(Vec::new());
    let (out, cache) = forward_impl(spec, params, input, Mode::Train, Some(rng), &mut sink)?;
    let batch = input.nrows() as f64;
    let mut stats = sink.expect("filled").into_iter();
    for n in params.norms.iter_mut().flatten() {
        let (mean, var): (Array1<f64>, Array1<f64>) = stats.next().expect("one per norm");
        let unbiased = var * (batch / (batch - 1.0));
        n.running_mean = &n.running_mean * (1.0 - BN_MOMENTUM) + &(mean * BN_MOMENTUM);
        n.running_var = &n.running_var * (1.0 - BN_MOMENTUM) + &(unbiased * BN_MOMENTUM);
    }
    Ok((out, cache.expect("train mode caches")))
}

type BatchStats = Vec<(Array1<f64>, Array1<f64>)>;

fn forward_impl(
    spec: &MlpSpec,
    params: &MlpParams,
    input: ArrayView2<f64>,
    mode: Mode,
    mut rng: Option<&mut SeededRng>,
    stats: &mut Option<BatchStats>,
) -> Result<(Array2<f64>, Option<ForwardCache>)> {
    if input.ncols() != spec.input_width() {
        return Err(Error::Shape(format!(
            "input has {} columns, network expects {}",
            input.ncols(),
            spec.input_width()
        )));
    }
    if params.weights.len() != spec.layer_widths.len() - 1 {
        return Err(Error::contract("parameters do not match the spec"));
    }
    let batch = input.nrows();
    let train = mode == Mode::Train;
    if train && batch < 2 && spec.batch_norm.iter().any(|&b| b) {
        return Err(Error::contract(
            "batch normalization in training mode needs at least 2 examples",
        ));
    }
    if train && spec.dropout_rate > 0.0 && rng.is_none() {
        return Err(Error::contract("training-mode dropout needs an rng"));
    }

    let mut x = input.to_owned();
    let mut hidden = Vec::with_capacity(spec.hidden_layers());
    for l in 0..spec.hidden_layers() {
        let a = affine(x.view(), &params.weights[l], &params.biases[l]);
        let (pre_act, xhat, inv_std) = match &params.norms[l] {
            Some(bn) => {
                let (mean, var) = if train {
                    let mean = a.mean_axis(Axis(0)).expect("non-empty batch");
                    let var = a.var_axis(Axis(0), 0.0);
                    (mean, var)
                } else {
                    (bn.running_mean.clone(), bn.running_var.clone())
                };
                let inv_std = var.mapv(|v| 1.0 / (v + BN_EPSILON).sqrt());
                let xhat = (&a - &mean) * &inv_std;
                let y = &xhat * &bn.gamma + &bn.beta;
                if let Some(s) = stats.as_mut() {
                    s.push((mean, var));
                }
                (y, Some(xhat), Some(inv_std))
            }
            None => (a, None, None),
        };
        let mut h = pre_act.mapv(|v| leaky(v, spec.leaky_slope));
        let mask = if train && spec.dropout_rate > 0.0 {
            let keep = 1.0 - spec.dropout_rate;
            let r = rng.as_deref_mut().expect("checked above");
            let m = Array2::from_shape_fn(h.raw_dim(), |_| {
                if r.bernoulli(keep) {
                    1.0 / keep
                } else {
                    0.0
                }
            });
            h *= &m;
            Some(m)
        } else {
            None
        };
        if train {
            hidden.push(HiddenCache {
                input: x,
                xhat,
                inv_std,
                pre_act,
                mask,
            });
        }
        x = h;
    }
    let last = spec.hidden_layers();
    let mut out = affine(x.view(), &params.weights[last], &params.biases[last]);
    match spec.output_activation {
        OutputActivation::Tanh => out.mapv_inplace(f64::tanh),
        OutputActivation::Sigmoid => out.mapv_inplace(sigmoid),
    }
    let cache = train.then(|| ForwardCache {
        widths: spec.layer_widths.clone(),
        hidden,
        last_input: x,
        output: out.clone(),
    });
    Ok((out, cache))
}

/// Products with transposed operands may come back column-major; parameter
/// tensors are always kept row-major.
fn standard(a: Array2<f64>) -> Array2<f64> {
    if a.is_standard_layout() {
        a
    } else {
        a.as_standard_layout().into_owned()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Backpropagate `upstream` (∂loss/∂output) through a cached training-mode
/// pass. Returns gradients for every trainable parameter (running-stat slots
/// are zero) and for the input batch.
pub fn mlp_backward(
    spec: &MlpSpec,
    params: &MlpParams,
    cache: &ForwardCache,
    upstream: ArrayView2<f64>,
) -> Result<Gradients> {
    if cache.widths != spec.layer_widths || cache.hidden.len() != spec.hidden_layers() {
        return Err(Error::contract("forward cache does not match the spec"));
    }
    if upstream.raw_dim() != cache.output.raw_dim() {
        return Err(Error::Shape(format!(
            "upstream gradient {:?} does not match output {:?}",
            upstream.shape(),
            cache.output.shape()
        )));
    }
    let mut grads = params.zeros_like();
    let batch = upstream.nrows() as f64;

    let mut d = upstream.to_owned();
    match spec.output_activation {
        OutputActivation::Tanh => Zip::from(&mut d)
            .and(&cache.output)
            .for_each(|g, &y| *g *= 1.0 - y * y),
        OutputActivation::Sigmoid => Zip::from(&mut d)
            .and(&cache.output)
            .for_each(|g, &y| *g *= y * (1.0 - y)),
    }
    let last = spec.hidden_layers();
    grads.weights[last] = standard(cache.last_input.t().dot(&d));
    grads.biases[last] = d.sum_axis(Axis(0));
    let mut dx = d.dot(&params.weights[last].t());

    for l in (0..last).rev() {
        let hc = &cache.hidden[l];
        if let Some(m) = &hc.mask {
            dx *= m;
        }
        Zip::from(&mut dx)
            .and(&hc.pre_act)
            .for_each(|g, &z| *g *= if z > 0.0 { 1.0 } else { spec.leaky_slope });
        let da = match (&params.norms[l], &hc.xhat, &hc.inv_std) {
            (Some(bn), Some(xhat), Some(inv_std)) => {
                let gn = grads.norms[l].as_mut().expect("same structure");
                gn.gamma = (&dx * xhat).sum_axis(Axis(0));
                gn.beta = dx.sum_axis(Axis(0));
                let dxhat = &dx * &bn.gamma;
                let sum_d = dxhat.sum_axis(Axis(0));
                let sum_dx = (&dxhat * xhat).sum_axis(Axis(0));
                // dA = inv_std / B · (B·dxhat − Σdxhat − xhat·Σ(dxhat·xhat))
                let mut da = dxhat * batch - &sum_d;
                da -= &(xhat * &sum_dx);
                da * &(inv_std / batch)
            }
            (None, _, _) => dx,
            _ => return Err(Error::contract("batch-norm cache missing")),
        };
        grads.weights[l] = standard(hc.input.t().dot(&da));
        grads.biases[l] = da.sum_axis(Axis(0));
        dx = da.dot(&params.weights[l].t());
    }
    Ok(Gradients {
        params: grads,
        input: dx,
    })
}
