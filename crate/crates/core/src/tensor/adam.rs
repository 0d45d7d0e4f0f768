use serde::{Deserialize, Serialize};

use super::params::ParamSet;
use super::TensorError;

/// Adam hyperparameters. Weight decay is coupled: it is added to the raw
/// gradient before the moment updates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
        }
    }
}

/// First and second moment buffers for one [`ParamSet`], aligned to its
/// parameter order.
pub struct AdamState {
    config: AdamConfig,
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(config: AdamConfig, params: &ParamSet) -> Self {
        let shapes: Vec<usize> = params.ids().map(|id| params.value(id).len()).collect();
        Self {
            config,
            step: 0,
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One bias-corrected Adam update over every parameter. Fails if any
    /// parameter has no accumulated gradient.
    pub fn step(&mut self, params: &mut ParamSet) -> Result<(), TensorError> {
        debug_assert_eq!(self.m.len(), params.len(), "state matches the param set");
        for p in &params.params {
            if p.grad.is_none() {
                return Err(TensorError::MissingGrad(p.name.clone()));
            }
        }
        self.step += 1;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
            weight_decay,
        } = self.config;
        let bc1 = 1.0 - beta1.powi(self.step as i32);
        let bc2 = 1.0 - beta2.powi(self.step as i32);
        for (i, p) in params.params.iter_mut().enumerate() {
            let grad = p.grad.as_ref().expect("checked above");
            let value = p.value.data_mut();
            let m = &mut self.m[i];
            let v = &mut self.v[i];
            for j in 0..value.len() {
                let g = grad.data()[j] + weight_decay * value[j];
                m[j] = beta1 * m[j] + (1.0 - beta1) * g;
                v[j] = beta2 * v[j] + (1.0 - beta2) * g * g;
                let m_hat = m[j] / bc1;
                let v_hat = v[j] / bc2;
                value[j] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}
