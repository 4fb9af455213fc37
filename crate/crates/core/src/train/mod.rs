//! SGD training with momentum, weight decay, and the validation-driven
//! learning-rate halving schedule; perplexity evaluation; checkpoints.

mod checkpoint;
mod eval;
mod optimizer;
mod trainer;

pub use checkpoint::{checkpoint_precision, Checkpoint};
pub use eval::{perplexity, perplexity_with_sentences, EvalReport};
pub use optimizer::{lr_schedule_update, sgd_step, OptimizerState, TrainHyper};
pub use trainer::{require_converged, resume, train, EpochRecord, TrainRun};
