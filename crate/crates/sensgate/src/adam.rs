//! Adam with bias correction, over a flat list of parameter vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// Optimizer hyperparameters, stored at full precision and converted to the
/// working scalar on use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// First and second moment estimates mirroring the parameter layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdamState<S> {
    pub m: Vec<Vec<S>>,
    pub v: Vec<Vec<S>>,
    pub t: u64,
}

impl<S: Real> AdamState<S> {
    pub fn new(sizes: &[usize]) -> Self {
        AdamState {
            m: sizes.iter().map(|&n| vec![S::zero(); n]).collect(),
            v: sizes.iter().map(|&n| vec![S::zero(); n]).collect(),
            t: 0,
        }
    }

    /// One update over every parameter vector. `params` and `grads` must
    /// match the layout the state was created with.
    pub fn update(
        &mut self,
        cfg: &AdamConfig,
        params: &mut [&mut Vec<S>],
        grads: &[Vec<S>],
    ) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Contract(format!(
                "adam update: {} params, {} grads against state of {}",
                params.len(),
                grads.len(),
                self.m.len()
            )));
        }
        self.t += 1;
        let lr = real::<S>(cfg.learning_rate);
        let b1 = real::<S>(cfg.beta1);
        let b2 = real::<S>(cfg.beta2);
        let eps = real::<S>(cfg.epsilon);
        let one = S::one();
        let mc = one - b1.powi(self.t as i32);
        let vc = one - b2.powi(self.t as i32);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            if p.len() != m.len() || g.len() != m.len() {
                return Err(Error::Contract("adam update: vector length mismatch".into()));
            }
            for i in 0..m.len() {
                let gi = g[i];
                m[i] = b1 * m[i] + (one - b1) * gi;
                v[i] = b2 * v[i] + (one - b2) * gi * gi;
                let m_hat = m[i] / mc;
                let v_hat = v[i] / vc;
                p[i] = p[i] - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}
