use super::config::{ContextMode, Mode, ModelConfig, SeqActivation};
use super::forward::ForwardTrace;
use super::params::{ContextWeights, Gradients, Parameters};
use crate::error::{Error, Result};
use crate::numerics::{mul_at_into, mul_into, Matrix, Scalar};

/// Exact gradients of the summed cross-entropy over the traced chunk,
/// under truncated BPTT:
///
/// * output error O - onehot(target) flows into W and the hidden stack;
/// * every projection in the trace receives error from up to N-1 future
///   hidden layers through the V_i window weights;
/// * error then travels backwards through the sequential recurrence
///   (projection-to-projection, or hidden-to-hidden for RNN) for at most
///   `bptt_steps` hops, tracked per injection age;
/// * nothing crosses the chunk boundary: pre-chunk state is a constant.
///
/// Lanes whose state was reset at a step contribute no gradient there, and
/// no error flows through a reset.
pub fn backward_bptt<T: Scalar>(
    mut trace: ForwardTrace<T>,
    targets: &[u32],
    params: &Parameters<T>,
    config: &ModelConfig,
) -> Result<Gradients<T>> {
    let (lanes, steps) = (trace.lanes, trace.steps);
    if targets.len() != lanes * steps {
        return Err(Error::Shape(format!(
            "targets length {} does not match {lanes} lanes x {steps} steps",
            targets.len()
        )));
    }
    let mut grads = Parameters::zeros_like(config);

    // Backward multiplies against the transposes of the forward weights;
    // materializing them once per chunk turns every error propagation into
    // the cache-friendly row-streaming kernel. Summation order per element
    // is unchanged (ascending over the contracted axis).
    let out_t = params.out.transposed();
    let hidden2_t = params.hidden2.as_ref().map(Matrix::transposed);

    // Output layer and hidden stack, per step. Leaves the post-activation
    // error at the first hidden layer for the recurrent stage.
    let mut dh1_list: Vec<Matrix<T>> = Vec::with_capacity(steps);
    for l in 0..steps {
        let dout = &mut trace.outputs[l]; // becomes the logit error in place
        for b in 0..lanes {
            let t = targets[b * steps + l] as usize;
            if t >= config.vocab_size {
                return Err(Error::Data(format!("target id {t} out of range")));
            }
            let v = dout.get(b, t);
            dout.set(b, t, v - T::ONE);
        }
        let two_layers = config.hidden_dims.len() == 2;
        let hlast = if two_layers {
            &trace.hidden2[l]
        } else {
            &trace.hidden1[l]
        };
        mul_at_into(&mut grads.out, hlast, dout);
        let mut dhlast = Matrix::zeros(lanes, config.last_hidden());
        mul_into(&mut dhlast, dout, &out_t);

        let dh1 = if two_layers {
            let mut dpre2 = dhlast;
            relu_mask(&mut dpre2, &trace.hidden2[l]);
            mul_at_into(grads.hidden2.as_mut().unwrap(), &trace.hidden1[l], &dpre2);
            let mut dh1 = Matrix::zeros(lanes, config.hidden1());
            mul_into(&mut dh1, &dpre2, hidden2_t.as_ref().unwrap());
            dh1
        } else {
            dhlast
        };
        dh1_list.push(dh1);
    }

    // last_reset[l][b]: most recent step <= l where lane b was reset, or -1.
    let mut last_reset = vec![vec![-1isize; lanes]; steps];
    for l in 0..steps {
        for b in 0..lanes {
            let prev = if l > 0 { last_reset[l - 1][b] } else { -1 };
            last_reset[l][b] = if trace.resets[l][b] { l as isize } else { prev };
        }
    }

    match config.mode {
        Mode::Rnn => {
            backward_rnn_recurrence(&trace, params, config, dh1_list, &mut grads);
        }
        _ => {
            backward_projection_recurrence(
                &trace,
                params,
                config,
                dh1_list,
                &last_reset,
                &mut grads,
            );
        }
    }
    Ok(grads)
}

fn relu_mask<T: Scalar>(err: &mut Matrix<T>, act: &Matrix<T>) {
    for (e, &a) in err.data_mut().iter_mut().zip(act.data()) {
        if a <= T::ZERO {
            *e = T::ZERO;
        }
    }
}

fn zero_rows<T: Scalar>(m: &mut Matrix<T>, flags: &[bool]) {
    for (b, &flag) in flags.iter().enumerate() {
        if flag {
            m.row_mut(b).iter_mut().for_each(|v| *v = T::ZERO);
        }
    }
}

fn backward_projection_recurrence<T: Scalar>(
    trace: &ForwardTrace<T>,
    params: &Parameters<T>,
    config: &ModelConfig,
    dh1_list: Vec<Matrix<T>>,
    last_reset: &[Vec<isize>],
    grads: &mut Gradients<T>,
) {
    let (lanes, steps) = (trace.lanes, trace.steps);
    let d = config.embed_dim;
    let win_t: Vec<Matrix<T>> = params.win.iter().map(Matrix::transposed).collect();

    // Window stage: distribute hidden error over the N-1 projections it
    // read, accumulating dV_i along the way. Errors aimed at a projection
    // that a reset separated from this step die here (the forward pass saw
    // zeros there), as do errors aimed below the chunk boundary.
    let mut dpre1_list = dh1_list;
    for (l, dpre1) in dpre1_list.iter_mut().enumerate() {
        relu_mask(dpre1, &trace.hidden1[l]);
    }
    let mut inject: Vec<Matrix<T>> = (0..steps).map(|_| Matrix::zeros(lanes, d)).collect();
    for l in 0..steps {
        let dpre1 = &dpre1_list[l];
        for i in 1..=config.window {
            let q = l as isize + 1 - i as isize;
            // A lane is cut when some reset lies strictly between the
            // projection position and this step; -1 means no reset at all.
            let cut: Vec<bool> = (0..lanes)
                .map(|b| last_reset[l][b] >= 0 && last_reset[l][b] > q)
                .collect();
            let masked;
            let err: &Matrix<T> = if cut.iter().any(|&c| c) {
                let mut m = dpre1.clone();
                zero_rows(&mut m, &cut);
                masked = m;
                &masked
            } else {
                dpre1
            };
            let value = if q >= 0 {
                &trace.proj[q as usize]
            } else {
                &trace.prev_proj[(-q - 1) as usize]
            };
            mul_at_into(&mut grads.win[i - 1], value, err);
            if q >= 0 {
                mul_into(&mut inject[q as usize], err, &win_t[i - 1]);
            }
        }
    }

    // Sequential recurrence sweep, newest step first. `pending[k]` holds
    // error that has already travelled k+1 hops; a vector is dropped once
    // it would exceed bptt_steps hops.
    let has_recurrence = config.context != ContextMode::None;
    let tau = config.bptt_steps;
    let mut pending: Vec<Matrix<T>> = Vec::new();
    for p in (0..steps).rev() {
        let resets = &trace.resets[p];
        let proj = &trace.proj[p];

        // delta of the projection pre-activation, per age class
        let mut classes: Vec<Matrix<T>> = Vec::with_capacity(1 + pending.len());
        classes.push(std::mem::replace(&mut inject[p], Matrix::zeros(0, 0)));
        classes.append(&mut pending);
        for cls in &mut classes {
            if config.seq_act == SeqActivation::Tanh {
                for (e, &pv) in cls.data_mut().iter_mut().zip(proj.data()) {
                    *e *= T::ONE - pv * pv;
                }
            }
            zero_rows(cls, resets);
        }
        let mut da_total = classes[0].clone();
        for cls in &classes[1..] {
            da_total.add_assign(cls);
        }

        for b in 0..lanes {
            if resets[b] {
                continue;
            }
            let w = trace.inputs[p][b] as usize;
            for (g, &e) in grads.embed.row_mut(w).iter_mut().zip(da_total.row(b)) {
                *g += e;
            }
        }

        let prev_value = if p > 0 {
            &trace.proj[p - 1]
        } else {
            &trace.prev_proj[0]
        };
        match &mut grads.context {
            ContextWeights::Shared(dc) => {
                for b in 0..lanes {
                    if resets[b] {
                        continue;
                    }
                    for ((g, &e), &pv) in
                        dc.iter_mut().zip(da_total.row(b)).zip(prev_value.row(b))
                    {
                        *g += e * pv;
                    }
                }
            }
            ContextWeights::PerWord(dc) => {
                for b in 0..lanes {
                    if resets[b] {
                        continue;
                    }
                    let w = trace.inputs[p][b] as usize;
                    for ((g, &e), &pv) in dc
                        .row_mut(w)
                        .iter_mut()
                        .zip(da_total.row(b))
                        .zip(prev_value.row(b))
                    {
                        *g += e * pv;
                    }
                }
            }
            ContextWeights::None => {}
        }

        if has_recurrence && p > 0 {
            for (age, cls) in classes.into_iter().enumerate() {
                if age + 1 > tau {
                    break;
                }
                let mut flow = cls;
                match (&config.context, &params.context) {
                    (ContextMode::FixedScalar(c), _) => {
                        flow.scale(T::from_f64(*c));
                    }
                    (ContextMode::SharedVector, ContextWeights::Shared(c)) => {
                        for b in 0..lanes {
                            for (e, &cv) in flow.row_mut(b).iter_mut().zip(c) {
                                *e *= cv;
                            }
                        }
                    }
                    (ContextMode::PerWord, ContextWeights::PerWord(c)) => {
                        for b in 0..lanes {
                            let c_row = c.row(trace.inputs[p][b] as usize);
                            for (e, &cv) in flow.row_mut(b).iter_mut().zip(c_row) {
                                *e *= cv;
                            }
                        }
                    }
                    _ => unreachable!("validated context mode"),
                }
                pending.push(flow);
            }
        }
    }
}

fn backward_rnn_recurrence<T: Scalar>(
    trace: &ForwardTrace<T>,
    params: &Parameters<T>,
    config: &ModelConfig,
    dh1_list: Vec<Matrix<T>>,
    grads: &mut Gradients<T>,
) {
    let (lanes, steps) = (trace.lanes, trace.steps);
    let rec_t = params.rec.as_ref().expect("RNN parameters").transposed();
    let tau = config.bptt_steps;
    let mut inject = dh1_list;
    let mut pending: Vec<Matrix<T>> = Vec::new();
    for p in (0..steps).rev() {
        let resets = &trace.resets[p];
        let h = &trace.hidden1[p];

        let mut classes: Vec<Matrix<T>> = Vec::with_capacity(1 + pending.len());
        classes.push(std::mem::replace(&mut inject[p], Matrix::zeros(0, 0)));
        classes.append(&mut pending);
        for cls in &mut classes {
            relu_mask(cls, h);
            zero_rows(cls, resets);
        }
        let mut dpre_total = classes[0].clone();
        for cls in &classes[1..] {
            dpre_total.add_assign(cls);
        }

        for b in 0..lanes {
            if resets[b] {
                continue;
            }
            let w = trace.inputs[p][b] as usize;
            for (g, &e) in grads.embed.row_mut(w).iter_mut().zip(dpre_total.row(b)) {
                *g += e;
            }
        }

        let h_prev = if p > 0 {
            &trace.hidden1[p - 1]
        } else {
            trace.prev_hidden.as_ref().expect("RNN trace carries hidden")
        };
        mul_at_into(grads.rec.as_mut().unwrap(), h_prev, &dpre_total);

        if p > 0 {
            for (age, cls) in classes.into_iter().enumerate() {
                if age + 1 > tau {
                    break;
                }
                let mut flow = Matrix::zeros(lanes, config.hidden1());
                mul_into(&mut flow, &cls, &rec_t);
                pending.push(flow);
            }
        }
    }
}
