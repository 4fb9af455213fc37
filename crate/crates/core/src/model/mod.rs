//! The architecture family: forward evaluation and hand-derived truncated
//! BPTT for FNN, RNN, and the word-independent / word-dependent SRNN,
//! including the fixed-scalar FOFE configuration.

mod backward;
mod config;
mod forward;
mod params;

pub use backward::backward_bptt;
pub use config::{ContextMode, Mode, ModelConfig, SeqActivation};
pub use forward::{
    forward_sequence, hidden, output_dist, project, rnn_step, sequence_nll, BoundaryPolicy,
    Engine, ForwardTrace, ProjectionState, StreamState,
};
pub use params::{ContextWeights, Gradients, Parameters};
