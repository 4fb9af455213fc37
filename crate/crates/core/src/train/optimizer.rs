use crate::error::{Error, Result};
use crate::model::{Gradients, ModelConfig, Parameters};
use crate::numerics::Scalar;

/// Training hyperparameters: SGD with classical momentum, L2 weight decay
/// folded into the momentum buffer, and a validation-driven halving
/// schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainHyper {
    /// Mini-batch lanes.
    pub lanes: usize,
    /// Chunk length per update step.
    pub unroll: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    /// Relative dev-NLL improvement below which the halving phase starts.
    pub improvement_threshold: f64,
    /// Epochs of continued halving once the phase starts.
    pub halving_epochs: usize,
    /// Hard cap on total epochs.
    pub max_epochs: usize,
    /// Optional elementwise gradient clip bound.
    pub clip: Option<f64>,
    /// Reset recurrent state at sentence-end tokens.
    pub reset_at_eos: bool,
    /// Lane count used for dev evaluation.
    pub eval_lanes: usize,
}

impl Default for TrainHyper {
    fn default() -> Self {
        TrainHyper {
            lanes: 200,
            unroll: 20,
            learning_rate: 0.4,
            momentum: 0.9,
            weight_decay: 4e-5,
            improvement_threshold: 0.005,
            halving_epochs: 7,
            max_epochs: 100,
            clip: None,
            reset_at_eos: false,
            eval_lanes: 8,
        }
    }
}

/// Mutable optimizer state: one momentum buffer per learnable tensor plus
/// the learning-rate schedule position.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState<T> {
    pub velocity: Parameters<T>,
    pub lr: f64,
    pub epoch: usize,
    /// True once the halving phase has been entered.
    pub halving: bool,
    /// Remaining epochs in the halving phase.
    pub countdown: usize,
}

impl<T: Scalar> OptimizerState<T> {
    pub fn new(config: &ModelConfig, hyper: &TrainHyper) -> Self {
        OptimizerState {
            velocity: Parameters::zeros_like(config),
            lr: hyper.learning_rate,
            epoch: 0,
            halving: false,
            countdown: hyper.halving_epochs,
        }
    }
}

/// One SGD update: buf <- momentum*buf + grad + weight_decay*param, then
/// param <- param - lr*buf. Gradients are summed cross-entropy over the
/// batch; no averaging happens here.
pub fn sgd_step<T: Scalar>(
    params: &mut Parameters<T>,
    grads: &Gradients<T>,
    opt: &mut OptimizerState<T>,
    hyper: &TrainHyper,
) -> Result<()> {
    let lr = T::from_f64(opt.lr);
    let momentum = T::from_f64(hyper.momentum);
    let decay = T::from_f64(hyper.weight_decay);
    let clip = hyper.clip.map(T::from_f64);

    let mut p_slices = params.slices_mut();
    let g_slices = grads.slices();
    let mut v_slices = opt.velocity.slices_mut();
    if p_slices.len() != g_slices.len() || p_slices.len() != v_slices.len() {
        return Err(Error::Shape(
            "parameter/gradient/velocity tensor counts differ".into(),
        ));
    }
    for ((p, g), v) in p_slices.iter_mut().zip(&g_slices).zip(v_slices.iter_mut()) {
        if p.len() != g.len() || p.len() != v.len() {
            return Err(Error::Shape("tensor length mismatch in sgd_step".into()));
        }
        for ((pv, &gv), vv) in p.iter_mut().zip(g.iter()).zip(v.iter_mut()) {
            let g_eff = match clip {
                Some(c) => gv.maximum(-c).minimum(c),
                None => gv,
            };
            *vv = momentum * *vv + g_eff + decay * *pv;
            *pv -= lr * *vv;
        }
    }
    Ok(())
}

/// Learning-rate schedule driven by the per-epoch dev NLL history (last
/// entry is the epoch that just finished). While the relative improvement
/// stays at or above the threshold the rate is kept; the first
/// sub-threshold epoch halves it and starts the fixed phase of
/// `halving_epochs` further epochs, halving after each, then stopping.
/// Returns true when training should stop.
pub fn lr_schedule_update<T: Scalar>(
    opt: &mut OptimizerState<T>,
    dev_nll_history: &[f64],
    hyper: &TrainHyper,
) -> bool {
    if opt.halving {
        opt.lr /= 2.0;
        opt.countdown -= 1;
        return opt.countdown == 0;
    }
    let n = dev_nll_history.len();
    if n < 2 {
        return false;
    }
    let prev = dev_nll_history[n - 2];
    let cur = dev_nll_history[n - 1];
    let improvement = (prev - cur) / prev.abs().max(f64::MIN_POSITIVE);
    if improvement < hyper.improvement_threshold {
        opt.lr /= 2.0;
        opt.halving = true;
        opt.countdown = hyper.halving_epochs;
    }
    false
}
