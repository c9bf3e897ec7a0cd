//! Adam optimizer with bias correction.

use super::{FeedforwardNet, Gradients};
use ndarray::{Array1, Array2};

#[derive(Debug, Clone)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m_w: Vec<Array2<f64>>,
    v_w: Vec<Array2<f64>>,
    m_b: Vec<Array1<f64>>,
    v_b: Vec<Array1<f64>>,
    m_c: Option<Array2<f64>>,
    v_c: Option<Array2<f64>>,
}

impl AdamState {
    pub fn new(net: &FeedforwardNet, lr: f64) -> Self {
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m_w: net.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            v_w: net.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            m_b: net.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
            v_b: net.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
            m_c: net.class_table.as_ref().map(|t| Array2::zeros(t.dim())),
            v_c: net.class_table.as_ref().map(|t| Array2::zeros(t.dim())),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One first/second-moment update with bias correction.
    pub fn step(&mut self, net: &mut FeedforwardNet, grads: &Gradients) {
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.eps);

        let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        };

        for l in 0..net.weights.len() {
            update(
                net.weights[l].as_slice_mut().expect("standard layout"),
                grads.weights[l].as_slice().expect("standard layout"),
                self.m_w[l].as_slice_mut().expect("standard layout"),
                self.v_w[l].as_slice_mut().expect("standard layout"),
            );
            update(
                net.biases[l].as_slice_mut().expect("standard layout"),
                grads.biases[l].as_slice().expect("standard layout"),
                self.m_b[l].as_slice_mut().expect("standard layout"),
                self.v_b[l].as_slice_mut().expect("standard layout"),
            );
        }
        if let (Some(table), Some(g), Some(m), Some(v)) = (
            net.class_table.as_mut(),
            grads.class_table.as_ref(),
            self.m_c.as_mut(),
            self.v_c.as_mut(),
        ) {
            update(
                table.as_slice_mut().expect("standard layout"),
                g.as_slice().expect("standard layout"),
                m.as_slice_mut().expect("standard layout"),
                v.as_slice_mut().expect("standard layout"),
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::NetConfig;

    fn tiny_net() -> FeedforwardNet {
        FeedforwardNet::init(NetConfig::residual_mlp(2, 1), 7).unwrap()
    }

    #[test]
    fn zero_gradients_leave_parameters_unchanged() {
        let mut net = tiny_net();
        let before = net.clone();
        let grads = net.zero_gradients();
        let mut adam = AdamState::new(&net, 0.1);
        adam.step(&mut net, &grads);
        assert_eq!(net, before);
    }

    #[test]
    fn bias_corrected_first_step_is_unit_scaled() {
        // f(w) = w² from w = 1 with lr = 0.1: g = 2, m̂ = g, v̂ = g², so the
        // update is lr·g/√(g²) ≈ lr and w moves to 0.9.
        let mut net = FeedforwardNet {
            config: NetConfig {
                input_dim: 1,
                hidden: vec![],
                output_dim: 1,
                residual: None,
                time_embed: None,
                class_embed: None,
            },
            weights: vec![ndarray::array![[1.0]]],
            biases: vec![ndarray::array![0.0]],
            class_table: None,
        };
        let mut grads = net.zero_gradients();
        grads.weights[0][[0, 0]] = 2.0;
        let mut adam = AdamState::new(&net, 0.1);
        adam.step(&mut net, &grads);
        let w = net.weights[0][[0, 0]];
        assert!((w - 0.9).abs() < 1e-7, "w = {w}");
    }

    #[test]
    fn two_identical_runs_agree() {
        let run = || {
            let mut net = tiny_net();
            let mut adam = AdamState::new(&net, 1e-3);
            for k in 0..5 {
                let mut grads = net.zero_gradients();
                for g in &mut grads.weights {
                    g.fill(0.1 * (k as f64 + 1.0));
                }
                adam.step(&mut net, &grads);
            }
            net
        };
        assert_eq!(run(), run());
    }
}
