use crate::error::{Error, Result};

/// AM-Softmax scale used with every margin schedule.
pub const AM_SOFTMAX_SCALE: f64 = 30.0;

/// Warmup / plateau / exponential-decay schedule for learning rate and margin.
///
/// During warmup the learning rate rises linearly from `lr_start` to
/// `lr_max` with zero margin; during the plateau the learning rate holds at
/// `lr_max` while the margin rises linearly to `margin_max`; afterwards the
/// learning rate decays continuously by `decay_gamma` every `decay_every`
/// epochs and the margin stays at `margin_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSchedule {
    pub warmup_epochs: u32,
    pub plateau_epochs: u32,
    pub total_epochs: u32,
    pub lr_start: f64,
    pub lr_max: f64,
    pub decay_gamma: f64,
    pub decay_every: u32,
    pub margin_max: f64,
    pub scale: f64,
}

impl PhaseSchedule {
    /// Pre-training recipe: 300 epochs, 10 warmup, 50 plateau, halving every 20.
    pub const BASE: PhaseSchedule = PhaseSchedule {
        warmup_epochs: 10,
        plateau_epochs: 50,
        total_epochs: 300,
        lr_start: 1e-5,
        lr_max: 0.2,
        decay_gamma: 0.5,
        decay_every: 20,
        margin_max: 0.3,
        scale: AM_SOFTMAX_SCALE,
    };

    pub fn validate(&self) -> Result<()> {
        let ok = self.lr_start > 0.0
            && self.lr_start <= self.lr_max
            && self.decay_gamma > 0.0
            && self.decay_gamma < 1.0
            && self.decay_every > 0
            && self.margin_max >= 0.0
            && self.scale > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid phase schedule {self:?}")))
        }
    }

    fn check_epoch(&self, epoch: f64) -> Result<()> {
        if !(epoch >= 0.0 && epoch < f64::from(self.total_epochs)) {
            return Err(Error::invalid(format!(
                "epoch {epoch} outside [0, {})",
                self.total_epochs
            )));
        }
        Ok(())
    }

    pub fn lr(&self, epoch: f64) -> Result<f64> {
        self.check_epoch(epoch)?;
        let warmup = f64::from(self.warmup_epochs);
        let decay_start = warmup + f64::from(self.plateau_epochs);
        Ok(if epoch <= warmup && warmup > 0.0 {
            lerp(self.lr_start, self.lr_max, epoch / warmup)
        } else if epoch <= decay_start {
            self.lr_max
        } else {
            self.lr_max * self.decay_gamma.powf((epoch - decay_start) / f64::from(self.decay_every))
        })
    }

    pub fn margin(&self, epoch: f64) -> Result<f64> {
        self.check_epoch(epoch)?;
        let warmup = f64::from(self.warmup_epochs);
        let plateau = f64::from(self.plateau_epochs);
        Ok(if epoch <= warmup {
            0.0
        } else if epoch < warmup + plateau {
            lerp(0.0, self.margin_max, (epoch - warmup) / plateau)
        } else {
            self.margin_max
        })
    }
}

/// Exact at both ends: `t = 0` gives `a`, `t = 1` gives `b`.
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    (1.0 - t) * a + t * b
}

pub fn base_lr(epoch: f64) -> Result<f64> {
    PhaseSchedule::BASE.lr(epoch)
}

pub fn base_margin(epoch: f64) -> Result<f64> {
    PhaseSchedule::BASE.margin(epoch)
}

const FINETUNE_EPOCHS: f64 = 30.0;

/// Fine-tuning learning rate: linear 1e-5 to 1e-2 over the first epoch, then
/// halving every 5 epochs.
pub fn finetune_lr(epoch: f64) -> Result<f64> {
    if !(epoch >= 0.0 && epoch < FINETUNE_EPOCHS) {
        return Err(Error::invalid(format!("epoch {epoch} outside [0, 30)")));
    }
    Ok(if epoch <= 1.0 {
        lerp(1e-5, 1e-2, epoch)
    } else {
        1e-2 * 0.5f64.powf((epoch - 1.0) / 5.0)
    })
}

/// The margin is held at its maximum during fine-tuning.
pub fn finetune_margin(epoch: f64) -> Result<f64> {
    finetune_lr(epoch).map(|_| 0.3)
}

/// Exponential staircase with linear warmup:
/// `(gamma, warmup epochs, plateau epochs, epochs per step)` and a peak rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaircaseSpec {
    pub gamma: f64,
    pub warmup_epochs: u32,
    pub plateau_epochs: u32,
    pub epochs_per: u32,
    pub max_lr: f64,
}

impl StaircaseSpec {
    pub fn new(gamma: f64, warmup_epochs: u32, plateau_epochs: u32, epochs_per: u32, max_lr: f64) -> Result<Self> {
        let spec = Self {
            gamma,
            warmup_epochs,
            plateau_epochs,
            epochs_per,
            max_lr,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.gamma > 0.0
            && self.gamma <= 1.0
            && self.warmup_epochs > 0
            && self.epochs_per > 0
            && self.max_lr > 0.0
            && self.max_lr.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid staircase spec {self:?}")))
        }
    }
}

/// Learning rate at an integer epoch.
///
/// Warmup epoch `e` gets `max_lr * (e + 1) / warmup`, so the first epoch is
/// already nonzero and the last warmup epoch reaches `max_lr`.
pub fn staircase_lr(spec: &StaircaseSpec, epoch: u32) -> f64 {
    let (w, p) = (spec.warmup_epochs, spec.plateau_epochs);
    if epoch + 1 < w {
        spec.max_lr / f64::from(w) * f64::from(epoch + 1)
    } else if epoch < w + p {
        spec.max_lr
    } else {
        let steps = 1 + (epoch - w - p) / spec.epochs_per;
        spec.max_lr * spec.gamma.powi(steps as i32)
    }
}
