use std::collections::VecDeque;

use super::config::{ContextMode, Mode, ModelConfig, SeqActivation};
use super::params::{ContextWeights, Parameters};
use crate::error::{Error, Result};
use crate::numerics::{mul_into, relu, softmax, softmax_rows, Matrix, Scalar};

/// What happens to recurrent state at sentence boundaries. With
/// `ResetAtEos`, a sentence-end input clears the lane instead of being
/// projected, so the next word is predicted from an empty history.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryPolicy {
    Continue,
    ResetAtEos { eos_id: u32 },
}

impl BoundaryPolicy {
    fn is_reset(&self, id: u32) -> bool {
        matches!(self, BoundaryPolicy::ResetAtEos { eos_id } if *eos_id == id)
    }
}

/// Carried per-lane state: the ring of the last N-1 projections (newest
/// first) and, for RNN mode, the hidden state. Zero at a stream start.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamState<T> {
    pub(crate) lanes: usize,
    pub(crate) window: VecDeque<Matrix<T>>,
    pub(crate) prev_hidden: Option<Matrix<T>>,
}

impl<T: Scalar> StreamState<T> {
    pub fn fresh(config: &ModelConfig, lanes: usize) -> Self {
        StreamState {
            lanes,
            window: (0..config.window)
                .map(|_| Matrix::zeros(lanes, config.embed_dim))
                .collect(),
            prev_hidden: (config.mode == Mode::Rnn)
                .then(|| Matrix::zeros(lanes, config.hidden1())),
        }
    }

    pub fn lanes(&self) -> usize {
        self.lanes
    }

    fn reset_lane(&mut self, lane: usize) {
        for m in &mut self.window {
            m.row_mut(lane).iter_mut().for_each(|v| *v = T::ZERO);
        }
        if let Some(h) = &mut self.prev_hidden {
            h.row_mut(lane).iter_mut().for_each(|v| *v = T::ZERO);
        }
    }
}

/// Per-timestep activations retained for the backward pass: projections
/// (with the pre-chunk window for the earliest steps), hidden activations,
/// and output distributions. `resets` marks lanes whose state was cleared
/// at a step, which cuts gradient flow there.
#[derive(Clone, Debug)]
pub struct ForwardTrace<T> {
    pub lanes: usize,
    pub steps: usize,
    pub inputs: Vec<Vec<u32>>,
    pub resets: Vec<Vec<bool>>,
    pub prev_proj: Vec<Matrix<T>>,
    pub proj: Vec<Matrix<T>>,
    pub hidden1: Vec<Matrix<T>>,
    pub hidden2: Vec<Matrix<T>>,
    pub outputs: Vec<Matrix<T>>,
    pub prev_hidden: Option<Matrix<T>>,
}

impl<T: Scalar> ForwardTrace<T> {
    /// Summed cross-entropy of lane-major `targets` under the traced
    /// distributions, in nats.
    pub fn nll(&self, targets: &[u32]) -> Result<f64> {
        if targets.len() != self.lanes * self.steps {
            return Err(Error::Shape(format!(
                "targets length {} does not match {} lanes x {} steps",
                targets.len(),
                self.lanes,
                self.steps
            )));
        }
        let mut total = 0.0;
        for l in 0..self.steps {
            let out = &self.outputs[l];
            for b in 0..self.lanes {
                let t = targets[b * self.steps + l] as usize;
                total -= out.get(b, t).to_f64().ln();
            }
        }
        Ok(total)
    }
}

fn gather_embed_rows<T: Scalar>(
    params: &Parameters<T>,
    ids: &[u32],
    vocab_size: usize,
) -> Result<Matrix<T>> {
    let mut m = Matrix::zeros(ids.len(), params.embed.cols());
    for (b, &id) in ids.iter().enumerate() {
        if id as usize >= vocab_size {
            return Err(Error::Data(format!(
                "token id {id} out of range for vocabulary of {vocab_size}"
            )));
        }
        m.row_mut(b).copy_from_slice(params.embed.row(id as usize));
    }
    Ok(m)
}

fn apply_seq_activation<T: Scalar>(act: SeqActivation, m: &mut Matrix<T>) {
    if act == SeqActivation::Tanh {
        m.data_mut().iter_mut().for_each(|v| *v = v.tanh());
    }
}

/// Batched forward/eval driver over a fixed lane count.
pub struct Engine<'a, T> {
    pub params: &'a Parameters<T>,
    pub config: &'a ModelConfig,
    pub policy: BoundaryPolicy,
}

impl<'a, T: Scalar> Engine<'a, T> {
    pub fn new(params: &'a Parameters<T>, config: &'a ModelConfig, policy: BoundaryPolicy) -> Self {
        Engine {
            params,
            config,
            policy,
        }
    }

    /// Consumes one input id per lane, updating the state. Returns the new
    /// projection matrix (non-RNN modes) and the per-lane reset flags.
    fn consume(
        &self,
        state: &mut StreamState<T>,
        step_inputs: &[u32],
    ) -> Result<(Option<Matrix<T>>, Vec<bool>)> {
        let resets: Vec<bool> = step_inputs
            .iter()
            .map(|&id| self.policy.is_reset(id))
            .collect();
        for (lane, &r) in resets.iter().enumerate() {
            if r {
                state.reset_lane(lane);
            }
        }

        if self.config.mode == Mode::Rnn {
            let prev = state.prev_hidden.as_ref().unwrap();
            let mut pre = gather_embed_rows(self.params, step_inputs, self.config.vocab_size)?;
            mul_into(&mut pre, prev, self.params.rec.as_ref().unwrap());
            relu(pre.data_mut());
            for (lane, &r) in resets.iter().enumerate() {
                if r {
                    pre.row_mut(lane).iter_mut().for_each(|v| *v = T::ZERO);
                }
            }
            state.prev_hidden = Some(pre);
            return Ok((None, resets));
        }

        // Projection step: P_t = f_s(U[w_t] + c ⊙ P_{t-1}).
        let mut p = gather_embed_rows(self.params, step_inputs, self.config.vocab_size)?;
        let prev = state.window.front().expect("window is never empty");
        match (&self.config.context, &self.params.context) {
            (ContextMode::None, _) => {}
            (ContextMode::FixedScalar(c), _) => {
                let c = T::from_f64(*c);
                for (pv, prev_v) in p.data_mut().iter_mut().zip(prev.data()) {
                    *pv += c * *prev_v;
                }
            }
            (ContextMode::SharedVector, ContextWeights::Shared(c)) => {
                for b in 0..state.lanes {
                    let prev_row = prev.row(b);
                    for ((pv, cv), prev_v) in p.row_mut(b).iter_mut().zip(c).zip(prev_row) {
                        *pv += *cv * *prev_v;
                    }
                }
            }
            (ContextMode::PerWord, ContextWeights::PerWord(c)) => {
                for b in 0..state.lanes {
                    let c_row = c.row(step_inputs[b] as usize);
                    let prev_row = prev.row(b);
                    for ((pv, cv), prev_v) in p.row_mut(b).iter_mut().zip(c_row).zip(prev_row) {
                        *pv += *cv * *prev_v;
                    }
                }
            }
            _ => {
                return Err(Error::Config(
                    "context weights do not match the configured context mode".into(),
                ))
            }
        }
        apply_seq_activation(self.config.seq_act, &mut p);
        for (lane, &r) in resets.iter().enumerate() {
            if r {
                p.row_mut(lane).iter_mut().for_each(|v| *v = T::ZERO);
            }
        }

        state.window.pop_back();
        state.window.push_front(p.clone());
        Ok((Some(p), resets))
    }

    /// Hidden activations and output distribution from the current state.
    fn predict(&self, state: &StreamState<T>) -> (Matrix<T>, Option<Matrix<T>>, Matrix<T>) {
        let h1 = if self.config.mode == Mode::Rnn {
            state.prev_hidden.as_ref().unwrap().clone()
        } else {
            let mut pre = Matrix::zeros(state.lanes, self.config.hidden1());
            for (i, p) in state.window.iter().enumerate() {
                mul_into(&mut pre, p, &self.params.win[i]);
            }
            relu(pre.data_mut());
            pre
        };
        let (last, h2) = match &self.params.hidden2 {
            Some(vh) => {
                let mut pre = Matrix::zeros(state.lanes, self.config.hidden_dims[1]);
                mul_into(&mut pre, &h1, vh);
                relu(pre.data_mut());
                (pre.clone(), Some(pre))
            }
            None => (h1.clone(), None),
        };
        let mut logits = Matrix::zeros(state.lanes, self.config.vocab_size);
        mul_into(&mut logits, &last, &self.params.out);
        softmax_rows(&mut logits);
        (h1, h2, logits)
    }

    /// Runs `len` steps over lane-major `inputs`, consuming each input and
    /// predicting its successor. Retains everything the backward pass needs.
    pub fn forward_chunk(
        &self,
        inputs: &[u32],
        lanes: usize,
        len: usize,
        state: &mut StreamState<T>,
    ) -> Result<ForwardTrace<T>> {
        if inputs.len() != lanes * len {
            return Err(Error::Shape(format!(
                "inputs length {} does not match {lanes} lanes x {len}",
                inputs.len()
            )));
        }
        if state.lanes != lanes {
            return Err(Error::Shape(format!(
                "state has {} lanes, batch has {lanes}",
                state.lanes
            )));
        }
        let mut trace = ForwardTrace {
            lanes,
            steps: len,
            inputs: Vec::with_capacity(len),
            resets: Vec::with_capacity(len),
            prev_proj: state.window.iter().cloned().collect(),
            proj: Vec::with_capacity(len),
            hidden1: Vec::with_capacity(len),
            hidden2: Vec::with_capacity(len),
            outputs: Vec::with_capacity(len),
            prev_hidden: state.prev_hidden.clone(),
        };
        for l in 0..len {
            let step_inputs: Vec<u32> = (0..lanes).map(|b| inputs[b * len + l]).collect();
            let (proj, resets) = self.consume(state, &step_inputs)?;
            let (h1, h2, out) = self.predict(state);
            trace.inputs.push(step_inputs);
            trace.resets.push(resets);
            if let Some(p) = proj {
                trace.proj.push(p);
            }
            trace.hidden1.push(h1);
            if let Some(h2) = h2 {
                trace.hidden2.push(h2);
            }
            trace.outputs.push(out);
        }
        Ok(trace)
    }

    /// Total NLL of `targets` after consuming `inputs`, without retaining
    /// activations. Same stepping as `forward_chunk`.
    pub fn nll_chunk(
        &self,
        inputs: &[u32],
        targets: &[u32],
        lanes: usize,
        len: usize,
        state: &mut StreamState<T>,
    ) -> Result<f64> {
        if inputs.len() != lanes * len || targets.len() != lanes * len {
            return Err(Error::Shape("inputs/targets shape mismatch".into()));
        }
        let mut total = 0.0;
        for l in 0..len {
            let step_inputs: Vec<u32> = (0..lanes).map(|b| inputs[b * len + l]).collect();
            self.consume(state, &step_inputs)?;
            let (_, _, out) = self.predict(state);
            for b in 0..lanes {
                let t = targets[b * len + l] as usize;
                if t >= self.config.vocab_size {
                    return Err(Error::Data(format!("target id {t} out of range")));
                }
                total -= out.get(b, t).to_f64().ln();
            }
        }
        Ok(total)
    }

    /// NLL of every token in `ids`: each token is predicted from the state
    /// before consuming it, so the first token of a fresh stream is scored
    /// against the empty history.
    pub fn score_all_tokens(
        &self,
        ids: &[u32],
        state: &mut StreamState<T>,
    ) -> Result<f64> {
        if state.lanes != 1 {
            return Err(Error::Shape("score_all_tokens runs on a single lane".into()));
        }
        let mut total = 0.0;
        for &id in ids {
            let (_, _, out) = self.predict(state);
            if id as usize >= self.config.vocab_size {
                return Err(Error::Data(format!("token id {id} out of range")));
            }
            total -= out.get(0, id as usize).to_f64().ln();
            self.consume(state, &[id])?;
        }
        Ok(total)
    }

    /// Model probability of each realized token, aligned position by
    /// position with `ids`. Single lane, same stepping as
    /// `score_all_tokens`; this is the neural side of an interpolation
    /// stream.
    pub fn token_probs(&self, ids: &[u32], state: &mut StreamState<T>) -> Result<Vec<f64>> {
        if state.lanes != 1 {
            return Err(Error::Shape("token_probs runs on a single lane".into()));
        }
        let mut probs = Vec::with_capacity(ids.len());
        for &id in ids {
            let (_, _, out) = self.predict(state);
            if id as usize >= self.config.vocab_size {
                return Err(Error::Data(format!("token id {id} out of range")));
            }
            probs.push(out.get(0, id as usize).to_f64());
            self.consume(state, &[id])?;
        }
        Ok(probs)
    }
}

/// Single-word projection state for the step-by-step API.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionState<T> {
    pub prev_p: Vec<T>,
}

impl<T: Scalar> ProjectionState<T> {
    pub fn fresh(config: &ModelConfig) -> Self {
        ProjectionState {
            prev_p: vec![T::ZERO; config.embed_dim],
        }
    }
}

/// One projection step: P = f_s(U[word] + c ⊙ prev_P), with the context
/// term dropped in FNN mode. Updates the state to the new projection.
pub fn project<T: Scalar>(
    word: u32,
    state: &mut ProjectionState<T>,
    params: &Parameters<T>,
    config: &ModelConfig,
) -> Result<Vec<T>> {
    if word as usize >= config.vocab_size {
        return Err(Error::Data(format!("word id {word} out of range")));
    }
    let mut p: Vec<T> = params.embed.row(word as usize).to_vec();
    match (&config.context, &params.context) {
        (ContextMode::None, _) => {}
        (ContextMode::FixedScalar(c), _) => {
            let c = T::from_f64(*c);
            for (pv, prev) in p.iter_mut().zip(&state.prev_p) {
                *pv += c * *prev;
            }
        }
        (ContextMode::SharedVector, ContextWeights::Shared(c)) => {
            for ((pv, cv), prev) in p.iter_mut().zip(c).zip(&state.prev_p) {
                *pv += *cv * *prev;
            }
        }
        (ContextMode::PerWord, ContextWeights::PerWord(c)) => {
            for ((pv, cv), prev) in p.iter_mut().zip(c.row(word as usize)).zip(&state.prev_p) {
                *pv += *cv * *prev;
            }
        }
        _ => {
            return Err(Error::Config(
                "context weights do not match the configured context mode".into(),
            ))
        }
    }
    if config.seq_act == SeqActivation::Tanh {
        for v in &mut p {
            *v = v.tanh();
        }
    }
    state.prev_p.copy_from_slice(&p);
    Ok(p)
}

/// Hidden activation from a window of projections ordered oldest to newest
/// (P_{t-N+1} .. P_{t-1}); the newest position pairs with V_1.
pub fn hidden<T: Scalar>(
    window_p: &[Vec<T>],
    params: &Parameters<T>,
    config: &ModelConfig,
) -> Result<Vec<T>> {
    if window_p.len() != config.window {
        return Err(Error::Shape(format!(
            "expected {} window positions, got {}",
            config.window,
            window_p.len()
        )));
    }
    let h1 = config.hidden1();
    let mut pre = vec![T::ZERO; h1];
    for (j, p) in window_p.iter().enumerate() {
        if p.len() != config.embed_dim {
            return Err(Error::Shape("projection width mismatch".into()));
        }
        // oldest-first ordering: element j is position t-(N-1-j)
        let v = &params.win[config.window - 1 - j];
        for (d, &pd) in p.iter().enumerate() {
            let row = v.row(d);
            for (h, out) in pre.iter_mut().enumerate() {
                *out += pd * row[h];
            }
        }
    }
    relu(&mut pre);
    let mut h = pre;
    if let Some(vh) = &params.hidden2 {
        let mut pre2 = vec![T::ZERO; config.hidden_dims[1]];
        for (i, &hv) in h.iter().enumerate() {
            let row = vh.row(i);
            for (j, out) in pre2.iter_mut().enumerate() {
                *out += hv * row[j];
            }
        }
        relu(&mut pre2);
        h = pre2;
    }
    Ok(h)
}

/// Output distribution: softmax(H · W); entry w is p(w_t = w | history).
pub fn output_dist<T: Scalar>(h: &[T], params: &Parameters<T>) -> Result<Vec<T>> {
    if h.len() != params.out.rows() {
        return Err(Error::Shape(format!(
            "hidden width {} does not match output weights with {} rows",
            h.len(),
            params.out.rows()
        )));
    }
    let k = params.out.cols();
    let mut logits = vec![T::ZERO; k];
    for (i, &hv) in h.iter().enumerate() {
        let row = params.out.row(i);
        for (j, out) in logits.iter_mut().enumerate() {
            *out += hv * row[j];
        }
    }
    softmax(&mut logits);
    Ok(logits)
}

/// RNN recurrence: H_t = relu(U[word] + H_{t-1} · V_rec).
pub fn rnn_step<T: Scalar>(
    word: u32,
    h_prev: &[T],
    params: &Parameters<T>,
) -> Result<Vec<T>> {
    if word as usize >= params.embed.rows() {
        return Err(Error::Data(format!("word id {word} out of range")));
    }
    let rec = params
        .rec
        .as_ref()
        .ok_or_else(|| Error::Config("rnn_step requires RNN parameters".into()))?;
    let mut h: Vec<T> = params.embed.row(word as usize).to_vec();
    for (i, &hv) in h_prev.iter().enumerate() {
        let row = rec.row(i);
        for (j, out) in h.iter_mut().enumerate() {
            *out += hv * row[j];
        }
    }
    relu(&mut h);
    Ok(h)
}

/// Left-to-right evaluation of a full sequence on one lane from the given
/// state. Returns the per-position next-word distributions along with the
/// trace.
pub fn forward_sequence<T: Scalar>(
    ids: &[u32],
    params: &Parameters<T>,
    config: &ModelConfig,
    state: &mut StreamState<T>,
    policy: BoundaryPolicy,
) -> Result<(Vec<Vec<T>>, ForwardTrace<T>)> {
    let engine = Engine::new(params, config, policy);
    let trace = engine.forward_chunk(ids, 1, ids.len(), state)?;
    let dists = trace.outputs.iter().map(|o| o.row(0).to_vec()).collect();
    Ok((dists, trace))
}

/// Total NLL (natural log) of the transitions in `ids` from a fresh state:
/// -sum over t >= 1 of ln p(ids[t] | ids[..t]).
pub fn sequence_nll<T: Scalar>(
    ids: &[u32],
    params: &Parameters<T>,
    config: &ModelConfig,
    policy: BoundaryPolicy,
) -> Result<f64> {
    if ids.len() < 2 {
        return Ok(0.0);
    }
    let mut state = StreamState::fresh(config, 1);
    let engine = Engine::new(params, config, policy);
    let len = ids.len() - 1;
    engine.nll_chunk(&ids[..len], &ids[1..], 1, len, &mut state)
}
