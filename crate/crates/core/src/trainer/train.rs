// SPDX-License-Identifier: Apache-2.0

use super::{Dataset, MlpSpec};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Stop as soon as the loss falls below this.
    pub target_loss: f64,
    /// When set, trainable parameters are re-initialised from this seed first.
    pub seed: Option<u64>,
    pub clip: (f64, f64),
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.5,
            max_epochs: 5000,
            target_loss: 1e-3,
            seed: None,
            clip: (-1.0, 1.0),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(invalid(format!("learning rate must be > 0, got {}", self.learning_rate)));
        }
        let (lo, hi) = self.clip;
        if !(lo < hi) || lo < -1.0 || hi > 1.0 {
            return Err(invalid(format!("clip bounds must satisfy -1 <= lo < hi <= 1, got ({lo}, {hi})")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub mlp: MlpSpec,
    /// Loss before each update, then the final loss.
    pub losses: Vec<f64>,
    pub epochs: usize,
}

impl TrainReport {
    pub fn final_loss(&self) -> f64 {
        *self.losses.last().expect("at least one loss")
    }
}

/// Full-batch gradient descent on the MSE, clipping weights after each step.
pub fn train(mlp: &MlpSpec, data: &Dataset, cfg: &TrainConfig) -> Result<TrainReport> {
    cfg.validate()?;
    mlp.validate()?;
    let mut m = mlp.clone();
    if let Some(seed) = cfg.seed {
        m.randomize(seed);
        m.clip_weights(cfg.clip.0, cfg.clip.1);
    }
    let mut losses = Vec::new();
    let mut epochs = 0;
    loop {
        let (loss, grad) = m.loss_and_grad(data)?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Divergence { epoch: epochs, loss });
        }
        losses.push(loss);
        if loss < cfg.target_loss || epochs == cfg.max_epochs {
            break;
        }
        let p: Vec<f64> = m
            .params()
            .iter()
            .zip(&grad)
            .map(|(p, g)| p - cfg.learning_rate * g)
            .collect();
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { epoch: epochs, loss });
        }
        m.set_params(&p)?;
        m.clip_weights(cfg.clip.0, cfg.clip.1);
        assert!(m.max_abs_weight() <= 1.0);
        epochs += 1;
    }
    Ok(TrainReport { mlp: m, losses, epochs })
}
