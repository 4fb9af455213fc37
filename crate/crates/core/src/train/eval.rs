use rayon::prelude::*;

use crate::corpus::TokenStream;
use crate::error::{Error, Result};
use crate::model::{BoundaryPolicy, Engine, ModelConfig, Parameters, StreamState};
use crate::numerics::Scalar;

/// Evaluation summary. Perplexity is exp(NLL / token count) with natural
/// logs throughout.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub tokens: usize,
    pub nll: f64,
    pub ppl: f64,
    pub reset_at_eos: bool,
    /// NLL per sentence, when requested (single-lane evaluation only).
    pub per_sentence: Option<Vec<f64>>,
}

/// Scores every token in the stream, including sentence-end tokens. The
/// stream splits into `lanes` contiguous segments evaluated independently;
/// each segment's first token is predicted from the empty history. Lanes
/// run in parallel but the total reduces in lane order, so the report is
/// identical for any thread count.
pub fn perplexity<T: Scalar>(
    params: &Parameters<T>,
    config: &ModelConfig,
    stream: &TokenStream,
    policy: BoundaryPolicy,
    lanes: usize,
) -> Result<EvalReport> {
    if stream.is_empty() {
        return Err(Error::Data("cannot evaluate an empty stream".into()));
    }
    let lanes = lanes.clamp(1, stream.len());
    let ids = stream.ids();
    // All tokens are covered: the first (len % lanes) segments get one
    // extra token.
    let base = ids.len() / lanes;
    let extra = ids.len() % lanes;
    let mut segments = Vec::with_capacity(lanes);
    let mut start = 0;
    for lane in 0..lanes {
        let len = base + usize::from(lane < extra);
        segments.push(&ids[start..start + len]);
        start += len;
    }

    let nlls: Vec<Result<f64>> = segments
        .par_iter()
        .map(|segment| {
            let engine = Engine::new(params, config, policy);
            let mut state = StreamState::fresh(config, 1);
            engine.score_all_tokens(segment, &mut state)
        })
        .collect();
    let mut nll = 0.0;
    for lane_nll in nlls {
        nll += lane_nll?;
    }

    Ok(EvalReport {
        tokens: ids.len(),
        nll,
        ppl: (nll / ids.len() as f64).exp(),
        reset_at_eos: matches!(policy, BoundaryPolicy::ResetAtEos { .. }),
        per_sentence: None,
    })
}

/// Single-lane evaluation that also splits the NLL at sentence boundaries.
pub fn perplexity_with_sentences<T: Scalar>(
    params: &Parameters<T>,
    config: &ModelConfig,
    stream: &TokenStream,
    policy: BoundaryPolicy,
) -> Result<EvalReport> {
    if stream.is_empty() {
        return Err(Error::Data("cannot evaluate an empty stream".into()));
    }
    let engine = Engine::new(params, config, policy);
    let mut state = StreamState::fresh(config, 1);
    let mut per_token = Vec::with_capacity(stream.len());
    for &id in stream.ids() {
        let nll = engine.score_all_tokens(&[id], &mut state)?;
        per_token.push(nll);
    }
    let nll: f64 = per_token.iter().sum();
    let mut per_sentence = Vec::new();
    let mut start = 0;
    for &bound in stream.sentence_bounds() {
        per_sentence.push(per_token[start..=bound].iter().sum());
        start = bound + 1;
    }
    if start < per_token.len() {
        per_sentence.push(per_token[start..].iter().sum());
    }
    Ok(EvalReport {
        tokens: stream.len(),
        nll,
        ppl: (nll / stream.len() as f64).exp(),
        reset_at_eos: matches!(policy, BoundaryPolicy::ResetAtEos { .. }),
        per_sentence: Some(per_sentence),
    })
}
