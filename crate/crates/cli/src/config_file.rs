//! Flat key=value experiment manifests. Every key mirrors a `ModelConfig`
//! or `TrainHyper` field one-to-one; unknown keys are rejected so a typo
//! cannot silently fall back to a default.

use srnn_core::model::{ContextMode, Mode, ModelConfig, SeqActivation};
use srnn_core::train::TrainHyper;
use srnn_core::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct FileConfig {
    pub model: ModelConfig,
    pub hyper: TrainHyper,
}

impl Default for FileConfig {
    fn default() -> Self {
        FileConfig {
            model: ModelConfig::wi_srnn(10_000, 4, 100, &[400]),
            hyper: TrainHyper::default(),
        }
    }
}

pub fn default_config_text() -> String {
    let c = FileConfig::default();
    format!(
        "\
# model architecture
mode = wi-srnn            # fnn | rnn | wi-srnn | wd-srnn
window = {window}                # history positions N-1 (1 for rnn)
embed_dim = {embed}
hidden_dims = {hidden}         # one or two comma-separated sizes
vocab_size = {vocab}        # must match the vocabulary file
seq_act = tanh            # tanh | identity (sequential activation)
context = shared          # none | shared | per-word | fixed:<value in [0,1]>
bptt_steps = {bptt}

# training
lanes = {lanes}
unroll = {unroll}
learning_rate = {lr}
momentum = {mom}
weight_decay = {wd}
improvement_threshold = {thr}
halving_epochs = {halve}
max_epochs = {maxep}
clip = none               # none | <bound> (elementwise gradient clip)
reset_at_eos = false
eval_lanes = {evall}
",
        window = c.model.window,
        embed = c.model.embed_dim,
        hidden = c.model.hidden_dims[0],
        vocab = c.model.vocab_size,
        bptt = c.model.bptt_steps,
        lanes = c.hyper.lanes,
        unroll = c.hyper.unroll,
        lr = c.hyper.learning_rate,
        mom = c.hyper.momentum,
        wd = c.hyper.weight_decay,
        thr = c.hyper.improvement_threshold,
        halve = c.hyper.halving_epochs,
        maxep = c.hyper.max_epochs,
        evall = c.hyper.eval_lanes,
    )
}

fn bad(key: &str, value: &str, expect: &str) -> Error {
    Error::Config(format!("config key {key}: bad value {value:?}, expected {expect}"))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value.parse().map_err(|_| bad(key, value, "an integer"))
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value.parse().map_err(|_| bad(key, value, "a number"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(bad(key, value, "true or false")),
    }
}

pub fn parse_config(text: &str) -> Result<FileConfig> {
    let mut cfg = FileConfig::default();
    let mut explicit_context = None;
    let mut explicit_act = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "config line {}: expected key = value, got {raw:?}",
                lineno + 1
            ))
        })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "mode" => {
                cfg.model.mode = match value {
                    "fnn" => Mode::Fnn,
                    "rnn" => Mode::Rnn,
                    "wi-srnn" => Mode::WiSrnn,
                    "wd-srnn" => Mode::WdSrnn,
                    _ => return Err(bad(key, value, "fnn | rnn | wi-srnn | wd-srnn")),
                };
            }
            "window" => cfg.model.window = parse_usize(key, value)?,
            "embed_dim" => cfg.model.embed_dim = parse_usize(key, value)?,
            "hidden_dims" => {
                let dims: Result<Vec<usize>> = value
                    .split(',')
                    .map(|v| parse_usize(key, v.trim()))
                    .collect();
                cfg.model.hidden_dims = dims?;
            }
            "vocab_size" => cfg.model.vocab_size = parse_usize(key, value)?,
            "seq_act" => {
                explicit_act = Some(match value {
                    "tanh" => SeqActivation::Tanh,
                    "identity" => SeqActivation::Identity,
                    _ => return Err(bad(key, value, "tanh | identity")),
                });
            }
            "context" => {
                explicit_context = Some(match value {
                    "none" => ContextMode::None,
                    "shared" => ContextMode::SharedVector,
                    "per-word" => ContextMode::PerWord,
                    _ => match value.strip_prefix("fixed:") {
                        Some(v) => ContextMode::FixedScalar(parse_f64(key, v)?),
                        None => {
                            return Err(bad(key, value, "none | shared | per-word | fixed:<v>"))
                        }
                    },
                });
            }
            "bptt_steps" => cfg.model.bptt_steps = parse_usize(key, value)?,
            "lanes" => cfg.hyper.lanes = parse_usize(key, value)?,
            "unroll" => cfg.hyper.unroll = parse_usize(key, value)?,
            "learning_rate" => cfg.hyper.learning_rate = parse_f64(key, value)?,
            "momentum" => cfg.hyper.momentum = parse_f64(key, value)?,
            "weight_decay" => cfg.hyper.weight_decay = parse_f64(key, value)?,
            "improvement_threshold" => {
                cfg.hyper.improvement_threshold = parse_f64(key, value)?
            }
            "halving_epochs" => cfg.hyper.halving_epochs = parse_usize(key, value)?,
            "max_epochs" => cfg.hyper.max_epochs = parse_usize(key, value)?,
            "clip" => {
                cfg.hyper.clip = match value {
                    "none" => None,
                    _ => Some(parse_f64(key, value)?),
                };
            }
            "reset_at_eos" => cfg.hyper.reset_at_eos = parse_bool(key, value)?,
            "eval_lanes" => cfg.hyper.eval_lanes = parse_usize(key, value)?,
            _ => {
                return Err(Error::Config(format!(
                    "config line {}: unknown key {key:?}",
                    lineno + 1
                )))
            }
        }
    }
    // Mode-dependent defaults when the file leaves them implicit.
    match cfg.model.mode {
        Mode::Fnn | Mode::Rnn => {
            cfg.model.context = explicit_context.unwrap_or(ContextMode::None);
            cfg.model.seq_act = explicit_act.unwrap_or(SeqActivation::Identity);
            if cfg.model.mode == Mode::Rnn {
                cfg.model.window = 1;
            }
        }
        Mode::WiSrnn => {
            cfg.model.context = explicit_context.unwrap_or(ContextMode::SharedVector);
            cfg.model.seq_act = explicit_act.unwrap_or(match cfg.model.context {
                ContextMode::FixedScalar(_) => SeqActivation::Identity,
                _ => SeqActivation::Tanh,
            });
        }
        Mode::WdSrnn => {
            cfg.model.context = explicit_context.unwrap_or(ContextMode::PerWord);
            cfg.model.seq_act = explicit_act.unwrap_or(SeqActivation::Tanh);
        }
    }
    cfg.model.validate()?;
    Ok(cfg)
}
