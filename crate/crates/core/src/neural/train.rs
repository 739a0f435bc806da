//! Unsupervised training: the loss only sees the condition number that the
//! predicted `ε` produces.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::KernelFamily;
use crate::neural::cost::{stencil_cond, CondBand};
use crate::neural::dataset::{minibatches, Dataset};
use crate::neural::mlp::{MlpModel, OutputMap, HIDDEN_1D, HIDDEN_2D};
use crate::points::PointSet;
use crate::shape::{EPS_MAX, EPS_MIN};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub reg_beta: f64,
    pub batch_size: usize,
    pub patience: usize,
    pub max_epochs: usize,
    pub train_samples: usize,
    pub valid_samples: usize,
    pub band: CondBand,
    pub kappa: f64,
    pub seed: u64,
    /// Relative step of the central difference `dC/dε`.
    pub fd_rel_step: f64,
    pub fd_abs_step: f64,
    /// Stop as soon as the median validation `cond` lies in this interval.
    pub cond_stop: Option<(f64, f64)>,
    /// Evaluate samples of a batch on the rayon pool.
    pub parallel: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-4,
            reg_beta: 1e-5,
            batch_size: 500,
            patience: 500,
            max_epochs: 5000,
            train_samples: 4400,
            valid_samples: 1100,
            band: CondBand::default(),
            kappa: 1.0,
            seed: 42,
            fd_rel_step: 1e-2,
            fd_abs_step: 1e-7,
            cond_stop: None,
            parallel: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.learning_rate, self.kappa, self.fd_rel_step, self.fd_abs_step];
        if positive.iter().any(|v| !(*v > 0.0) || !v.is_finite())
            || !(self.reg_beta >= 0.0)
            || self.batch_size == 0
            || self.patience == 0
            || self.max_epochs == 0
            || self.train_samples == 0
            || self.valid_samples == 0
        {
            return Err(Error::InvalidArgument("training hyperparameters must be positive".into()));
        }
        if !self.band.is_valid() {
            return Err(Error::InvalidArgument("condition thresholds must increase".into()));
        }
        Ok(())
    }

    /// The optional stop rule used for structured 2D training.
    pub fn with_median_cond_stop(mut self) -> Self {
        self.cond_stop = Some((10f64.powf(11.5), 10f64.powf(12.5)));
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Patience,
    MaxEpochs,
    CondBand,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::Patience => "patience",
            StopReason::MaxEpochs => "max_epochs",
            StopReason::CondBand => "cond_band",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainTrace {
    pub train_loss: Vec<f64>,
    pub valid_loss: Vec<f64>,
    /// 1-based epoch whose parameters were returned.
    pub best_epoch: usize,
    pub stop_reason: StopReason,
}

#[derive(Clone, Copy, Debug)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_loss: f64,
    pub median_valid_cond: f64,
}

/// `ε` clamped to the strategy range, with `dε/dH` (0 when clamped).
fn clamped_eps(model: &MlpModel, h: f64) -> (f64, f64) {
    let e = model.output_map.apply(h);
    if e.is_nan() {
        (EPS_MIN, 0.0)
    } else if e < EPS_MIN {
        (EPS_MIN, 0.0)
    } else if e > EPS_MAX {
        (EPS_MAX, 0.0)
    } else {
        (e, model.output_map.derivative(h))
    }
}

/// Predicted (clamped) `ε` for standardized features.
pub fn predicted_eps(model: &MlpModel, features: &[f64]) -> Result<f64> {
    Ok(clamped_eps(model, model.forward(features)?).0)
}

fn sample_cost(stencil: &PointSet, family: KernelFamily, eps: f64, cfg: &TrainConfig) -> f64 {
    cfg.band.cost(stencil_cond(stencil, family, eps), cfg.kappa)
}

/// Central difference of the cost in `ε`; the step is halved once if the
/// result is not finite.
pub fn dcost_deps(stencil: &PointSet, family: KernelFamily, eps: f64, cfg: &TrainConfig) -> Result<f64> {
    let mut step = (cfg.fd_rel_step * eps).max(cfg.fd_abs_step);
    for _ in 0..2 {
        let hi = sample_cost(stencil, family, eps + step, cfg);
        let lo = sample_cost(stencil, family, (eps - step).max(f64::MIN_POSITIVE), cfg);
        let d = (hi - lo) / (2.0 * step);
        if d.is_finite() {
            return Ok(d);
        }
        step *= 0.5;
    }
    Err(Error::NonFiniteGradient)
}

/// Mean data cost over `idx` (no regularizer).
fn data_cost(
    model: &MlpModel,
    stencils: &[PointSet],
    features: &[Vec<f64>],
    idx: &[usize],
    cfg: &TrainConfig,
) -> Result<f64> {
    let one = |&i: &usize| -> Result<f64> {
        let eps = predicted_eps(model, &features[i])?;
        Ok(sample_cost(&stencils[i], model.kernel_family, eps, cfg))
    };
    let costs: Vec<f64> = if cfg.parallel {
        idx.par_iter().map(one).collect::<Result<_>>()?
    } else {
        idx.iter().map(one).collect::<Result<_>>()?
    };
    Ok(costs.iter().sum::<f64>() / idx.len() as f64)
}

/// `1/S_b Σ C_j + β‖W‖²` over a batch of stencils.
pub fn batch_cost(model: &MlpModel, stencils: &[PointSet], cfg: &TrainConfig) -> Result<f64> {
    if stencils.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let features = stencils
        .iter()
        .map(|s| model.feature_spec.features(s))
        .collect::<Result<Vec<_>>>()?;
    let idx: Vec<usize> = (0..stencils.len()).collect();
    Ok(data_cost(model, stencils, &features, &idx, cfg)? + cfg.reg_beta * model.squared_norm())
}

/// Batch cost and its gradient in the flat parameter layout of
/// [`MlpModel::params`]. Per-sample terms are summed in index order.
pub fn batch_gradient(
    model: &MlpModel,
    stencils: &[PointSet],
    features: &[Vec<f64>],
    idx: &[usize],
    cfg: &TrainConfig,
) -> Result<(f64, Vec<f64>)> {
    if idx.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let one = |&i: &usize| -> Result<(f64, f64, Vec<f64>)> {
        let (h, dh) = model.forward_with_grad(&features[i])?;
        let (eps, deps_dh) = clamped_eps(model, h);
        let c = sample_cost(&stencils[i], model.kernel_family, eps, cfg);
        let dc = if deps_dh == 0.0 {
            0.0
        } else {
            dcost_deps(&stencils[i], model.kernel_family, eps, cfg)? * deps_dh
        };
        Ok((c, dc, dh))
    };
    let per: Vec<(f64, f64, Vec<f64>)> = if cfg.parallel {
        idx.par_iter().map(one).collect::<Result<_>>()?
    } else {
        idx.iter().map(one).collect::<Result<_>>()?
    };
    let inv = 1.0 / idx.len() as f64;
    let params = model.params();
    let mut grad: Vec<f64> = params.iter().map(|w| 2.0 * cfg.reg_beta * w).collect();
    let mut loss = 0.0;
    for (c, dc, dh) in &per {
        loss += c * inv;
        if *dc != 0.0 {
            for (g, d) in grad.iter_mut().zip(dh) {
                *g += inv * dc * d;
            }
        }
    }
    loss += cfg.reg_beta * params.iter().map(|w| w * w).sum::<f64>();
    if grad.iter().any(|g| !g.is_finite()) || !loss.is_finite() {
        return Err(Error::NonFiniteGradient);
    }
    Ok((loss, grad))
}

/// Adam with decays 0.9/0.999 and stabilizer 1e−8.
#[derive(Clone, Debug)]
pub struct Adam {
    lr: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    pub fn new(lr: f64, n: usize) -> Self {
        Adam {
            lr,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = Self::B1 * *m + (1.0 - Self::B1) * g;
            *v = Self::B2 * *v + (1.0 - Self::B2) * g * g;
            *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
        }
    }
}

/// One optimizer step on a batch; returns the batch loss before the step.
pub fn grad_step(
    model: &mut MlpModel,
    opt: &mut Adam,
    stencils: &[PointSet],
    features: &[Vec<f64>],
    idx: &[usize],
    cfg: &TrainConfig,
) -> Result<f64> {
    let (loss, grad) = batch_gradient(model, stencils, features, idx, cfg)?;
    let mut p = model.params();
    opt.step(&mut p, &grad);
    model.set_params(&p);
    Ok(loss)
}

/// Condition numbers produced by the model on each stencil.
pub fn predicted_conds(model: &MlpModel, stencils: &[PointSet], parallel: bool) -> Result<Vec<f64>> {
    let one = |s: &PointSet| -> Result<f64> {
        let eps = predicted_eps(model, &model.feature_spec.features(s)?)?;
        Ok(stencil_cond(s, model.kernel_family, eps))
    };
    if parallel {
        stencils.par_iter().map(one).collect()
    } else {
        stencils.iter().map(one).collect()
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Tracks the best validation loss; exhausted after `patience` epochs
/// without strict improvement.
#[derive(Clone, Debug)]
pub struct EarlyStopping {
    patience: usize,
    best_loss: f64,
    pub best_epoch: usize,
    since_best: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            best_loss: f64::INFINITY,
            best_epoch: 0,
            since_best: 0,
        }
    }

    /// Records one epoch; true if it is the new best.
    pub fn observe(&mut self, epoch: usize, loss: f64) -> bool {
        if loss < self.best_loss {
            self.best_loss = loss;
            self.best_epoch = epoch;
            self.since_best = 0;
            true
        } else {
            self.since_best += 1;
            false
        }
    }

    pub fn exhausted(&self) -> bool {
        self.since_best >= self.patience
    }
}

/// Stencils used to calibrate the initial output bias.
const CALIBRATION_SAMPLES: usize = 200;

/// The constant `ε` on a log grid over `[1e-2, 1e3]` (20 points per decade)
/// that puts the most of `stencils` (up to the first 200) into
/// `[band.lower, band.cap]`. Ties go to the smaller `ε`.
pub fn calibrate_init_eps(stencils: &[PointSet], family: KernelFamily, band: &CondBand) -> f64 {
    let sample = &stencils[..stencils.len().min(CALIBRATION_SAMPLES)];
    let mut best = (0usize, 1.0);
    for k in 0..=100 {
        let e = 10f64.powf(-2.0 + k as f64 / 20.0);
        let hits = sample
            .iter()
            .filter(|s| {
                let c = stencil_cond(s, family, e);
                c >= band.lower && c <= band.cap
            })
            .count();
        if hits > best.0 {
            best = (hits, e);
        }
    }
    best.1
}

/// A fresh network for `data`: the shipped hidden widths for the dimension,
/// an exponential output, and the output bias set to the calibrated `ε`.
pub fn initial_model(data: &Dataset, family: KernelFamily, band: &CondBand, seed: u64) -> MlpModel {
    let hidden: &[usize] = if data.spec.dim == 1 { &HIDDEN_1D } else { &HIDDEN_2D };
    let eps = calibrate_init_eps(&data.train, family, band);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MlpModel::init(data.spec.clone(), hidden, family, OutputMap::Exp, eps, &mut rng)
}

/// Minibatch training with early stopping on the validation data cost.
/// Returns the parameters of the best validation epoch.
pub fn train(model: MlpModel, data: &Dataset, cfg: &TrainConfig) -> Result<(MlpModel, TrainTrace)> {
    train_with_progress(model, data, cfg, |_| {})
}

pub fn train_with_progress<F: FnMut(&EpochStats)>(
    mut model: MlpModel,
    data: &Dataset,
    cfg: &TrainConfig,
    mut progress: F,
) -> Result<(MlpModel, TrainTrace)> {
    cfg.validate()?;
    if model.feature_spec != data.spec {
        model.feature_spec = data.spec.clone();
    }
    model.validate()?;
    let train_f = data.train_features()?;
    let valid_f = data.valid_features()?;
    let valid_idx: Vec<usize> = (0..data.valid.len()).collect();
    let no_reg = TrainConfig { reg_beta: 0.0, ..cfg.clone() };

    // the shuffle stream is separate from the dataset stream
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5DEE_CE66);
    let mut opt = Adam::new(cfg.learning_rate, model.num_params());
    let mut best = model.clone();
    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut trace = TrainTrace {
        train_loss: Vec::new(),
        valid_loss: Vec::new(),
        best_epoch: 0,
        stop_reason: StopReason::MaxEpochs,
    };

    for epoch in 1..=cfg.max_epochs {
        let batches = minibatches(data.train.len(), cfg.batch_size, &mut rng);
        let mut epoch_loss = 0.0;
        for b in &batches {
            epoch_loss += grad_step(&mut model, &mut opt, &data.train, &train_f, b, cfg)? * b.len() as f64;
        }
        epoch_loss /= data.train.len() as f64;
        let valid_loss = data_cost(&model, &data.valid, &valid_f, &valid_idx, &no_reg)?;
        trace.train_loss.push(epoch_loss);
        trace.valid_loss.push(valid_loss);

        let need_cond = cfg.cond_stop.is_some();
        let med = if need_cond {
            median(&predicted_conds(&model, &data.valid, cfg.parallel)?)
        } else {
            f64::NAN
        };
        progress(&EpochStats {
            epoch,
            train_loss: epoch_loss,
            valid_loss,
            median_valid_cond: med,
        });

        if stopper.observe(epoch, valid_loss) {
            best = model.clone();
        }
        if let Some((lo, hi)) = cfg.cond_stop {
            if med >= lo && med <= hi {
                best = model.clone();
                stopper.best_epoch = epoch;
                trace.stop_reason = StopReason::CondBand;
                break;
            }
        }
        if stopper.exhausted() {
            trace.stop_reason = StopReason::Patience;
            break;
        }
    }
    trace.best_epoch = stopper.best_epoch;
    Ok((best, trace))
}

/// Fraction of stencils whose predicted `cond` lies in `[lo, hi]`.
pub fn fraction_in_band(conds: &[f64], lo: f64, hi: f64) -> f64 {
    if conds.is_empty() {
        return 0.0;
    }
    conds.iter().filter(|c| **c >= lo && **c <= hi).count() as f64 / conds.len() as f64
}
