//! Adam with decoupled weight decay.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamWConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl AdamWConfig {
    pub fn new(lr: f64, weight_decay: f64) -> Self {
        AdamWConfig {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
        }
    }
}

/// First and second moment estimates for one parameter tensor.
#[derive(Debug, Clone)]
pub struct AdamWState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl AdamWState {
    pub fn new(len: usize) -> Self {
        AdamWState {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    /// One update of `params` in place. The decay shrinks the parameters
    /// before the adaptive step and does not enter the moment estimates.
    pub fn update(&mut self, cfg: &AdamWConfig, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len(), "parameter length changed");
        assert_eq!(grads.len(), params.len(), "gradient length mismatch");
        self.t += 1;
        let bc1 = 1.0 - cfg.beta1.powi(self.t);
        let bc2_sqrt = (1.0 - cfg.beta2.powi(self.t)).sqrt();
        let step = cfg.lr / bc1;
        let decay = 1.0 - cfg.lr * cfg.weight_decay;
        for (((p, &g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *p *= decay;
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            *p -= step * *m / (v.sqrt() / bc2_sqrt + cfg.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= 1e-15 * y.abs().max(1e-5), "{x} vs {y}");
        }
    }

    // Reference trajectories produced with torch.optim.AdamW in float64.
    #[test]
    fn matches_reference_trajectory() {
        let cfg = AdamWConfig::new(3e-5, 0.01);
        let mut p = vec![0.5, -1.25, 2.0, 0.0];
        let mut st = AdamWState::new(4);
        let grads = [
            [0.1, -0.2, 0.0, 3.0],
            [0.05, 0.4, -1e-3, -3.0],
            [-0.3, 0.1, 2.0, 0.5],
        ];
        let expected = [
            [4.99969850003000038e-01, -1.24996962500150000e+00, 1.99999940000000009e+00, -2.99999999000000025e-05],
            [4.99941734626418610e-01, -1.24998023311607631e+00, 2.00002112378926000e+00, -2.84210435368421522e-05],
            [4.99952001348543840e-01, -1.24999232765753177e+00, 2.00000136800148232e+00, -2.94535900180305139e-05],
        ];
        for (g, e) in grads.iter().zip(&expected) {
            st.update(&cfg, &mut p, g);
            close(&p, e);
        }
        assert_eq!(st.steps(), 3);
    }

    #[test]
    fn decay_is_decoupled() {
        let cfg = AdamWConfig::new(0.1, 0.5);
        let mut p = vec![1.0, -2.0];
        let mut st = AdamWState::new(2);
        st.update(&cfg, &mut p, &[1.0, 1.0]);
        close(&p, &[8.50000000999999950e-01, -1.99999999899999992e+00]);
        st.update(&cfg, &mut p, &[-2.0, 0.5]);
        close(&p, &[8.44110353422074855e-01, -1.99321796175183885e+00]);
    }
}
