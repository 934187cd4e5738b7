//! AdamW over candle variables, with the same update order as the
//! element-wise reference in the core crate.

use std::collections::HashMap;

use candle_core::{Tensor, Var};
use infodemic::modeling::AdamWConfig;

pub struct AdamW {
    moments: HashMap<String, (Tensor, Tensor)>,
    t: i32,
}

impl AdamW {
    pub fn new() -> Self {
        AdamW {
            moments: HashMap::new(),
            t: 0,
        }
    }

    /// One update of every variable that has a gradient in `grads`.
    pub fn step<'a>(
        &mut self,
        cfg: &AdamWConfig,
        vars: impl Iterator<Item = (&'a str, &'a Var)>,
        grads: &HashMap<String, Tensor>,
    ) -> candle_core::Result<()> {
        self.t += 1;
        let bc1 = 1.0 - cfg.beta1.powi(self.t);
        let bc2_sqrt = (1.0 - cfg.beta2.powi(self.t)).sqrt();
        let step = cfg.lr / bc1;
        let decay = 1.0 - cfg.lr * cfg.weight_decay;
        for (name, var) in vars {
            let Some(g) = grads.get(name) else { continue };
            let (m, v) = match self.moments.remove(name) {
                Some(mv) => mv,
                None => (g.zeros_like()?, g.zeros_like()?),
            };
            let m = ((m * cfg.beta1)? + (g * (1.0 - cfg.beta1))?)?;
            let v = ((v * cfg.beta2)? + (g.sqr()? * (1.0 - cfg.beta2))?)?;
            let denom = v.sqrt()?.affine(1.0 / bc2_sqrt, cfg.eps)?;
            let p = (var.as_tensor() * decay)?;
            let p = (p - (m.div(&denom)? * step)?)?;
            var.set(&p)?;
            self.moments.insert(name.to_string(), (m, v));
        }
        Ok(())
    }
}
