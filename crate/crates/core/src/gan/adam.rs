use super::mlp::MlpParams;

/// Adam with bias correction, over the trainable tensors of one network.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(params: &MlpParams, learning_rate: f64, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        let shapes: Vec<usize> = params.trainable().iter().map(|t| t.len()).collect();
        Self {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            step: 0,
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn step(&mut self, params: &mut MlpParams, grads: &MlpParams) {
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.learning_rate, self.epsilon);
        for (((p, g), m), v) in params
            .trainable_mut()
            .into_iter()
            .zip(grads.trainable())
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                let mhat = m[i] / c1;
                let vhat = v[i] / c2;
                p[i] -= lr * mhat / (vhat.sqrt() + eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gan::mlp::{MlpSpec, OutputActivation};
    use crate::rng::SeededRng;

    #[test]
    fn first_step_moves_each_parameter_by_learning_rate() {
        let spec = MlpSpec::new(vec![2, 2, 1], OutputActivation::Tanh, false, 0.0).unwrap();
        let mut p = MlpParams::init(&spec, &mut SeededRng::new(0));
        let before = p.clone();
        let mut g = p.zeros_like();
        for t in g.trainable_mut() {
            t.iter_mut().for_each(|v| *v = 3.0);
        }
        let mut adam = Adam::new(&p, 0.01, 0.9, 0.999, 1e-8);
        adam.step(&mut p, &g);
        for (a, b) in p.trainable().iter().zip(before.trainable()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert!(((y - x) - 0.01).abs() < 1e-9);
            }
        }
    }
}
