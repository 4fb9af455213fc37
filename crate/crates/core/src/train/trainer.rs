use super::checkpoint::Checkpoint;
use super::eval::perplexity;
use super::optimizer::{lr_schedule_update, sgd_step, OptimizerState, TrainHyper};
use crate::corpus::{make_batches, TokenStream};
use crate::error::{Error, Result};
use crate::model::{
    backward_bptt, BoundaryPolicy, Engine, ModelConfig, Parameters, StreamState,
};
use crate::numerics::{Rng, Scalar};

/// Callback fired after every completed epoch.
pub type EpochCallback<'a, T> = &'a mut dyn FnMut(&Checkpoint<T>, &EpochRecord);

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    pub train_nll_per_token: f64,
    pub train_ppl: f64,
    pub dev_nll_per_token: f64,
    pub dev_ppl: f64,
}

/// Outcome of a training run. `diverged` carries the diagnostic when the
/// loss became non-finite; the checkpoint then holds the state at abort.
#[derive(Clone, Debug)]
pub struct TrainRun<T> {
    pub checkpoint: Checkpoint<T>,
    pub epochs: Vec<EpochRecord>,
    pub diverged: Option<String>,
}

/// Trains from a fresh initialization. Everything downstream of the seed
/// is deterministic: same seed, config, data and hyperparameters give a
/// bit-identical checkpoint.
pub fn train<T: Scalar>(
    config: &ModelConfig,
    hyper: &TrainHyper,
    train_stream: &TokenStream,
    dev_stream: &TokenStream,
    eos_id: u32,
    seed: u64,
) -> Result<TrainRun<T>> {
    config.validate()?;
    let mut rng = Rng::new(seed);
    let params = Parameters::init(config, &mut rng);
    let checkpoint = Checkpoint {
        config: config.clone(),
        params,
        opt: OptimizerState::new(config, hyper),
        rng,
        vocab_hash: [0u8; 32],
        dev_history: Vec::new(),
    };
    resume(checkpoint, hyper, train_stream, dev_stream, eos_id, None)
}

/// Continues training from a checkpoint until the schedule stops, the
/// epoch cap is reached, or the loss diverges. `on_epoch` fires after
/// every completed epoch with the fresh checkpoint.
pub fn resume<T: Scalar>(
    mut checkpoint: Checkpoint<T>,
    hyper: &TrainHyper,
    train_stream: &TokenStream,
    dev_stream: &TokenStream,
    eos_id: u32,
    mut on_epoch: Option<EpochCallback<'_, T>>,
) -> Result<TrainRun<T>> {
    let config = checkpoint.config.clone();
    let policy = if hyper.reset_at_eos {
        BoundaryPolicy::ResetAtEos { eos_id }
    } else {
        BoundaryPolicy::Continue
    };
    let mut epochs = Vec::new();

    while checkpoint.opt.epoch < hyper.max_epochs {
        let mut state = StreamState::fresh(&config, hyper.lanes);
        let mut train_nll = 0.0f64;
        let mut train_tokens = 0usize;
        for batch in make_batches(train_stream, hyper.lanes, hyper.unroll)? {
            let trace = {
                let engine = Engine::new(&checkpoint.params, &config, policy);
                engine.forward_chunk(&batch.inputs, batch.lanes, batch.len, &mut state)?
            };
            let nll = trace.nll(&batch.targets)?;
            if !nll.is_finite() {
                let diag = format!(
                    "training NLL became non-finite in epoch {} after {} tokens",
                    checkpoint.opt.epoch + 1,
                    train_tokens
                );
                return Ok(TrainRun {
                    checkpoint,
                    epochs,
                    diverged: Some(diag),
                });
            }
            train_nll += nll;
            let predictions = batch.lanes * batch.len;
            train_tokens += predictions;
            let mut grads = backward_bptt(trace, &batch.targets, &checkpoint.params, &config)?;
            // backward_bptt sums over the batch; the learning rate applies
            // to the per-token mean, which is what makes the published
            // recipe (lr 0.4 at mini-batch 200) stable.
            grads.scale_all(T::from_f64(1.0 / predictions as f64));
            sgd_step(&mut checkpoint.params, &grads, &mut checkpoint.opt, hyper)?;
        }
        if !checkpoint.params.all_finite() {
            let diag = format!(
                "parameters became non-finite after epoch {}",
                checkpoint.opt.epoch + 1
            );
            return Ok(TrainRun {
                checkpoint,
                epochs,
                diverged: Some(diag),
            });
        }

        let dev = perplexity(
            &checkpoint.params,
            &config,
            dev_stream,
            policy,
            hyper.eval_lanes,
        )?;
        checkpoint.opt.epoch += 1;
        checkpoint.dev_history.push(dev.nll);

        let record = EpochRecord {
            epoch: checkpoint.opt.epoch,
            lr: checkpoint.opt.lr,
            train_nll_per_token: train_nll / train_tokens.max(1) as f64,
            train_ppl: (train_nll / train_tokens.max(1) as f64).exp(),
            dev_nll_per_token: dev.nll / dev.tokens as f64,
            dev_ppl: dev.ppl,
        };
        let stop = lr_schedule_update(&mut checkpoint.opt, &checkpoint.dev_history, hyper);
        if let Some(cb) = on_epoch.as_deref_mut() {
            cb(&checkpoint, &record);
        }
        epochs.push(record);
        if stop {
            break;
        }
    }

    Ok(TrainRun {
        checkpoint,
        epochs,
        diverged: None,
    })
}

/// Divergence is an error for callers that need a hard failure.
pub fn require_converged<T>(run: &TrainRun<T>) -> Result<()> {
    match &run.diverged {
        Some(diag) => Err(Error::Diverged(diag.clone())),
        None => Ok(()),
    }
}
