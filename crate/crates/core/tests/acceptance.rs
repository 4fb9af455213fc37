//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured values (run with `--nocapture` to see them).

#![allow(clippy::needless_range_loop)]

use srnn_core::corpus::TokenStream;
use srnn_core::model::{
    backward_bptt, forward_sequence, hidden, output_dist, BoundaryPolicy, ContextWeights, Engine,
    ModelConfig, Parameters, SeqActivation, StreamState,
};
use srnn_core::ngram::{count_ngrams, estimate_kn};
use srnn_core::numerics::{finite_diff_grad, Matrix, Rng};
use srnn_core::train::{
    lr_schedule_update, perplexity, resume, train, Checkpoint, OptimizerState, TrainHyper,
    TrainRun,
};

const POLICY: BoundaryPolicy = BoundaryPolicy::Continue;

fn millions(n: usize) -> f64 {
    (n as f64 / 10_000.0).round() / 100.0
}

fn random_ids(n: usize, vocab: usize, rng: &mut Rng) -> Vec<u32> {
    (0..n).map(|_| rng.below(vocab) as u32).collect()
}

// ---------------------------------------------------------------------------
// Criterion 1: parameter counts reproduce every published model-size figure
// exactly (rounded to 0.01M).
// ---------------------------------------------------------------------------
#[test]
fn criterion_1_parameter_count_fidelity() {
    let cells: Vec<(&str, ModelConfig, f64)> = vec![
        ("PTB 1h FNN", ModelConfig::fnn(10_000, 4, 200, &[400]), 6.32),
        ("PTB 1h WI-SRNN", ModelConfig::wi_srnn(10_000, 4, 100, &[400]), 5.16),
        ("PTB 1h WD-SRNN", ModelConfig::wd_srnn(10_000, 4, 100, &[400]), 6.16),
        ("PTB RNN", ModelConfig::rnn(10_000, &[400]), 8.16),
        ("PTB 2h FNN", ModelConfig::fnn(10_000, 4, 200, &[400, 400]), 6.48),
        ("PTB 2h WI-SRNN", ModelConfig::wi_srnn(10_000, 4, 100, &[400, 400]), 5.32),
        ("PTB 2h WD-SRNN", ModelConfig::wd_srnn(10_000, 4, 100, &[400, 400]), 6.32),
        ("LTCB FNN", ModelConfig::fnn(80_000, 4, 200, &[600, 600]), 64.84),
        ("LTCB FOFE 400", ModelConfig::fofe(80_000, 4, 200, &[400, 400], 0.6), 48.48),
        ("LTCB FOFE 600", ModelConfig::fofe(80_000, 4, 200, &[600, 600], 0.6), 64.84),
        ("LTCB WI-SRNN*", ModelConfig::fofe(80_000, 4, 200, &[600], 0.6), 64.48),
        ("LTCB WI-SRNN", ModelConfig::wi_srnn(80_000, 4, 200, &[600]), 64.48),
        ("LTCB WD-SRNN", ModelConfig::wd_srnn(80_000, 4, 200, &[600]), 80.48),
        ("LTCB RNN", ModelConfig::rnn(80_000, &[600]), 96.36),
    ];
    for (name, cfg, want) in &cells {
        cfg.validate().unwrap();
        let got = millions(cfg.param_count());
        assert_eq!(got, *want, "{name}: {} params", cfg.param_count());
    }
    // Two spot checks at full precision.
    assert_eq!(ModelConfig::wi_srnn(10_000, 4, 100, &[400]).param_count(), 5_160_100);
    assert_eq!(ModelConfig::rnn(10_000, &[400]).param_count(), 8_160_000);
    println!("PASS — criterion 1: all {} model-size figures match to 0.01M", cells.len());
}

// ---------------------------------------------------------------------------
// Criterion 2: analytic gradients match central finite differences for every
// parameter, every mode, 1 and 2 hidden layers (K=20, D=8, H=10, N-1=3,
// sequence length 12, f64, eps=1e-5, 1e-4 relative with 1e-7 floor).
// ---------------------------------------------------------------------------
fn gradcheck(cfg: &ModelConfig, seed: u64) -> (usize, f64) {
    cfg.validate().unwrap();
    let params: Parameters<f64> = Parameters::init(cfg, &mut Rng::new(seed));
    let mut rng = Rng::new(seed + 1000);
    let seq = random_ids(13, cfg.vocab_size, &mut rng);
    let (ids, targets) = (&seq[..12], &seq[1..]);

    let engine = Engine::new(&params, cfg, POLICY);
    let mut state = StreamState::fresh(cfg, 1);
    let trace = engine.forward_chunk(ids, 1, 12, &mut state).unwrap();
    let analytic = backward_bptt(trace, targets, &params, cfg).unwrap();

    let flat = params.to_f64_vec();
    let ids_v = ids.to_vec();
    let targets_v = targets.to_vec();
    let numeric = finite_diff_grad(
        |theta: &[f64]| {
            let p = Parameters::<f64>::from_f64_slice(cfg, theta);
            let engine = Engine::new(&p, cfg, POLICY);
            let mut state = StreamState::fresh(cfg, 1);
            engine
                .nll_chunk(&ids_v, &targets_v, 1, 12, &mut state)
                .unwrap()
        },
        &flat,
        1e-5,
    );
    let analytic_flat = analytic.to_f64_vec();
    let mut worst = 0.0f64;
    for (i, (&n, &a)) in numeric.iter().zip(&analytic_flat).enumerate() {
        let diff = (n - a).abs();
        let rel = diff / n.abs().max(a.abs()).max(1e-300);
        if diff > 1e-7 {
            assert!(
                rel <= 1e-4,
                "{:?} {} hidden layers: scalar {i}: numeric {n} vs analytic {a} (rel {rel:.3e})",
                cfg.mode,
                cfg.hidden_dims.len()
            );
            worst = worst.max(rel);
        }
    }
    (flat.len(), worst)
}

#[test]
fn criterion_2_gradient_oracle() {
    let mut configs: Vec<(&str, ModelConfig)> = Vec::new();
    for hidden in [vec![10], vec![10, 7]] {
        configs.push(("FNN", ModelConfig::fnn(20, 3, 8, &hidden)));
        // RNN requires the embedding width to equal the hidden size.
        configs.push(("RNN", ModelConfig::rnn(20, &hidden)));
        configs.push(("WI-SRNN", ModelConfig::wi_srnn(20, 3, 8, &hidden)));
        configs.push(("WD-SRNN", ModelConfig::wd_srnn(20, 3, 8, &hidden)));
        configs.push(("FOFE", ModelConfig::fofe(20, 3, 8, &hidden, 0.7)));
    }
    let mut total = 0;
    for (i, (name, mut cfg)) in configs.into_iter().enumerate() {
        // Full unrolling so truncated BPTT equals the differentiated loss.
        cfg.bptt_steps = 12;
        let (scalars, worst) = gradcheck(&cfg, 100 + i as u64);
        total += scalars;
        println!(
            "  criterion 2: {name} x {} hidden: {scalars} scalars, worst rel {worst:.2e}",
            cfg.hidden_dims.len()
        );
    }
    println!("PASS — criterion 2: {total} parameter gradients match finite differences");
}

// ---------------------------------------------------------------------------
// Criterion 3: reduction equivalences.
// ---------------------------------------------------------------------------
#[test]
fn criterion_3a_zero_context_identity_equals_fnn() {
    let fnn = ModelConfig::fnn(25, 4, 6, &[8]);
    let mut srnn = ModelConfig::wi_srnn(25, 4, 6, &[8]);
    srnn.seq_act = SeqActivation::Identity;
    let fnn_params: Parameters<f64> = Parameters::init(&fnn, &mut Rng::new(201));
    let mut srnn_params: Parameters<f64> = Parameters::zeros_like(&srnn);
    srnn_params.embed = fnn_params.embed.clone();
    srnn_params.win = fnn_params.win.clone();
    srnn_params.out = fnn_params.out.clone();
    srnn_params.context = ContextWeights::Shared(vec![0.0; 6]);

    let ids = random_ids(60, 25, &mut Rng::new(202));
    let mut s1 = StreamState::fresh(&fnn, 1);
    let (d1, _) = forward_sequence(&ids, &fnn_params, &fnn, &mut s1, POLICY).unwrap();
    let mut s2 = StreamState::fresh(&srnn, 1);
    let (d2, _) = forward_sequence(&ids, &srnn_params, &srnn, &mut s2, POLICY).unwrap();
    let mut worst = 0.0f64;
    for (a, b) in d1.iter().zip(&d2) {
        for (x, y) in a.iter().zip(b) {
            worst = worst.max((x - y).abs());
        }
    }
    assert!(worst <= 1e-12, "max deviation {worst:.3e}");
    println!("PASS — criterion 3a: WI-SRNN(C=0, identity) == FNN (max dev {worst:.2e})");
}

#[test]
fn criterion_3b_fofe_closed_form() {
    let cfg = ModelConfig::fofe(30, 3, 7, &[9], 0.7);
    let params: Parameters<f64> = Parameters::init(&cfg, &mut Rng::new(203));
    let ids = random_ids(50, 30, &mut Rng::new(204));
    let mut state = StreamState::fresh(&cfg, 1);
    let (_, trace) = forward_sequence(&ids, &params, &cfg, &mut state, POLICY).unwrap();
    let mut worst = 0.0f64;
    for (t, proj) in trace.proj.iter().enumerate() {
        // closed form: P_t = sum over j>=0 of 0.7^j * U[w_{t-j}]
        for d in 0..7 {
            let mut want = 0.0;
            let mut factor = 1.0;
            for j in 0..=t {
                want += factor * params.embed.get(ids[t - j] as usize, d);
                factor *= 0.7;
            }
            worst = worst.max((proj.get(0, d) - want).abs());
        }
    }
    assert!(worst <= 1e-10, "max deviation {worst:.3e}");
    println!("PASS — criterion 3b: FOFE projection equals closed form (max dev {worst:.2e})");
}

#[test]
fn criterion_3c_window_one_srnn_equals_diagonal_rnn() {
    let cfg = ModelConfig::wi_srnn(18, 1, 6, &[7]);
    let params: Parameters<f64> = Parameters::init(&cfg, &mut Rng::new(205));
    let c = match &params.context {
        ContextWeights::Shared(c) => c.clone(),
        _ => unreachable!(),
    };
    let ids = random_ids(40, 18, &mut Rng::new(206));

    let mut state = StreamState::fresh(&cfg, 1);
    let (dists, _) = forward_sequence(&ids, &params, &cfg, &mut state, POLICY).unwrap();

    // RNN construction: recurrence matrix diag(C), then the non-recurrent
    // V_1 layer, activations matched (tanh recurrence, relu hidden).
    let mut diag = Matrix::<f64>::zeros(6, 6);
    for i in 0..6 {
        diag.set(i, i, c[i]);
    }
    let mut r = vec![0.0f64; 6];
    let mut worst = 0.0f64;
    for (t, &w) in ids.iter().enumerate() {
        let mut pre: Vec<f64> = params.embed.row(w as usize).to_vec();
        for j in 0..6 {
            for i in 0..6 {
                pre[j] += r[i] * diag.get(i, j);
            }
        }
        let r_new: Vec<f64> = pre.iter().map(|v| v.tanh()).collect();
        let h = hidden(std::slice::from_ref(&r_new), &params, &cfg).unwrap();
        let dist = output_dist(&h, &params).unwrap();
        for (a, b) in dists[t].iter().zip(&dist) {
            worst = worst.max((a - b).abs());
        }
        r = r_new;
    }
    assert!(worst <= 1e-12, "max deviation {worst:.3e}");
    println!("PASS — criterion 3c: SRNN(N=2) == diagonal-recurrence RNN (max dev {worst:.2e})");
}

// ---------------------------------------------------------------------------
// Criterion 4: every emitted distribution is a distribution; KN per-context
// sums brute-forced on a vocab-20 corpus.
// ---------------------------------------------------------------------------
#[test]
fn criterion_4_distribution_validity() {
    // Neural side, all modes, f32, batched lanes.
    let configs = [
        ModelConfig::fnn(40, 3, 8, &[10]),
        ModelConfig::rnn(40, &[10]),
        ModelConfig::wi_srnn(40, 3, 8, &[10, 9]),
        ModelConfig::wd_srnn(40, 2, 8, &[10]),
        ModelConfig::fofe(40, 3, 8, &[10], 0.7),
    ];
    let mut checked = 0usize;
    for (i, cfg) in configs.iter().enumerate() {
        let params: Parameters<f32> = Parameters::init(cfg, &mut Rng::new(300 + i as u64));
        let engine = Engine::new(&params, cfg, POLICY);
        let mut state = StreamState::fresh(cfg, 3);
        let inputs = random_ids(3 * 40, 40, &mut Rng::new(400 + i as u64));
        let trace = engine.forward_chunk(&inputs, 3, 40, &mut state).unwrap();
        for out in &trace.outputs {
            for b in 0..3 {
                let sum: f64 = out.row(b).iter().map(|&v| v as f64).sum();
                assert!((sum - 1.0).abs() <= 1e-6, "{:?}: row sums to {sum}", cfg.mode);
                assert!(out.row(b).iter().all(|&v| v > 0.0 && v <= 1.0));
                checked += 1;
            }
        }
    }

    // KN side: vocab-20 corpus, every context length 0..=4 seen in the
    // corpus plus unseen probes, 1e-8.
    let mut rng = Rng::new(310);
    let ids = random_ids(100, 20, &mut rng);
    let stream = TokenStream::from_ids(ids.clone(), u32::MAX);
    let counts = count_ngrams(&stream, 5, false, u32::MAX).unwrap();
    let kn = estimate_kn(&counts, 20).unwrap();
    let mut contexts: Vec<Vec<u32>> = vec![vec![], vec![19, 19, 19, 19]];
    for len in 1..=4usize {
        for start in 0..ids.len() - len {
            contexts.push(ids[start..start + len].to_vec());
        }
    }
    let mut kn_checked = 0usize;
    for ctx in contexts {
        let sum: f64 = (0..20).map(|w| kn.prob(&ctx, w).unwrap()).sum();
        assert!((sum - 1.0).abs() <= 1e-8, "KN context {ctx:?} sums to {sum}");
        kn_checked += 1;
    }
    println!(
        "PASS — criterion 4: {checked} neural rows within 1e-6, {kn_checked} KN contexts within 1e-8"
    );
}

// ---------------------------------------------------------------------------
// Synthetic order-2 Markov source shared by criteria 5 and 9. The chain is
// generated by a fixed random window-2 feedforward teacher with sharpened
// outputs, so the conditional table p(c | a, b) is exact and the entropy
// rate is computable from the transition matrix.
// ---------------------------------------------------------------------------
const SYMBOLS: usize = 30;

struct MarkovSource {
    /// cond[a * SYMBOLS + b][c] = p(next = c | prev2 = a, prev1 = b)
    cond: Vec<Vec<f64>>,
}

impl MarkovSource {
    fn build(seed: u64, sharpen: f64) -> Self {
        let cfg = ModelConfig::fnn(SYMBOLS, 2, 16, &[24]);
        let mut params: Parameters<f64> = Parameters::init(&cfg, &mut Rng::new(seed));
        params.out.scale(sharpen);
        let mut cond = Vec::with_capacity(SYMBOLS * SYMBOLS);
        for a in 0..SYMBOLS {
            for b in 0..SYMBOLS {
                let window = vec![
                    params.embed.row(a).to_vec(),
                    params.embed.row(b).to_vec(),
                ];
                let h = hidden(&window, &params, &cfg).unwrap();
                cond.push(output_dist(&h, &params).unwrap());
            }
        }
        MarkovSource { cond }
    }

    fn sample(&self, len: usize, seed: u64) -> Vec<u32> {
        let mut rng = Rng::new(seed);
        let (mut a, mut b) = (0usize, 0usize);
        let mut out = Vec::with_capacity(len);
        for step in 0..len + 200 {
            let c = rng.sample_weighted(&self.cond[a * SYMBOLS + b]);
            if step >= 200 {
                out.push(c as u32);
            }
            a = b;
            b = c;
        }
        out
    }

    /// Entropy rate in nats from the transition matrix: stationary
    /// distribution over (prev2, prev1) states by power iteration, then the
    /// pi-weighted conditional entropies.
    fn entropy_rate(&self) -> f64 {
        let states = SYMBOLS * SYMBOLS;
        let mut pi = vec![1.0 / states as f64; states];
        for _ in 0..3000 {
            let mut next = vec![0.0f64; states];
            for (s, &mass) in pi.iter().enumerate() {
                if mass == 0.0 {
                    continue;
                }
                let b = s % SYMBOLS;
                for (c, &p) in self.cond[s].iter().enumerate() {
                    next[b * SYMBOLS + c] += mass * p;
                }
            }
            let diff: f64 = pi.iter().zip(&next).map(|(x, y)| (x - y).abs()).sum();
            pi = next;
            if diff < 1e-13 {
                break;
            }
        }
        pi.iter()
            .zip(&self.cond)
            .map(|(&mass, dist)| {
                mass * dist
                    .iter()
                    .filter(|&&p| p > 0.0)
                    .map(|&p| -p * p.ln())
                    .sum::<f64>()
            })
            .sum()
    }
}

fn markov_hyper() -> TrainHyper {
    TrainHyper {
        lanes: 8,
        unroll: 12,
        learning_rate: 0.4,
        momentum: 0.9,
        weight_decay: 4e-5,
        improvement_threshold: 0.002,
        halving_epochs: 7,
        max_epochs: 40,
        clip: None,
        reset_at_eos: false,
        eval_lanes: 4,
    }
}

// Criterion 5: a WI-SRNN with a 2-position window reaches the source
// entropy rate within 10% on held-out data.
#[test]
fn criterion_5_synthetic_learnability() {
    let source = MarkovSource::build(7001, 5.0);
    let entropy = source.entropy_rate();
    let true_ppl = entropy.exp();
    let train_stream = TokenStream::from_ids(source.sample(50_000, 7002), u32::MAX);
    let dev_stream = TokenStream::from_ids(source.sample(5_000, 7003), u32::MAX);
    let test_stream = TokenStream::from_ids(source.sample(10_000, 7004), u32::MAX);

    let cfg = ModelConfig::wi_srnn(SYMBOLS, 2, 16, &[32]);
    let run: TrainRun<f32> =
        train(&cfg, &markov_hyper(), &train_stream, &dev_stream, u32::MAX, 7005).unwrap();
    assert!(run.diverged.is_none(), "training diverged: {:?}", run.diverged);
    let report = perplexity(&run.checkpoint.params, &cfg, &test_stream, POLICY, 1).unwrap();
    let ratio = report.ppl / true_ppl;
    assert!(
        (ratio - 1.0).abs() <= 0.10,
        "test ppl {:.4} vs true ppl {:.4} (ratio {:.4}, {} epochs)",
        report.ppl,
        true_ppl,
        ratio,
        run.epochs.len()
    );
    println!(
        "PASS — criterion 5: test ppl {:.4} within 10% of exp(entropy rate) = {:.4} (ratio {:.4})",
        report.ppl, true_ppl, ratio
    );
}

// ---------------------------------------------------------------------------
// Criterion 6: on a position-dependent template corpus (token A, random
// filler, token A), the SRNN beats an RNN of matched hidden size.
// ---------------------------------------------------------------------------
#[test]
fn criterion_6_position_pattern_advantage() {
    // Position-dependent template "marker, filler(s), same marker": 24
    // marker words, 6 filler words, one or two fillers between the repeats.
    // Recovering the closing marker requires the identity of a word one or
    // two positions back; the explicit window reads it off directly while
    // the recurrent state must carry it through the filler updates. The
    // source optimum is about ppl 6.5.
    let markers = 24usize;
    let fillers = 6usize;
    let gen = |len: usize, seed: u64| -> Vec<u32> {
        let mut rng = Rng::new(seed);
        let mut out = Vec::with_capacity(len + 4);
        while out.len() < len {
            let m = rng.below(markers) as u32;
            out.push(m);
            for _ in 0..1 + rng.below(2) {
                out.push((markers + rng.below(fillers)) as u32);
            }
            out.push(m);
        }
        out.truncate(len);
        out
    };
    let train_stream = TokenStream::from_ids(gen(30_000, 8004u64.wrapping_mul(31)), u32::MAX);
    let dev_stream = TokenStream::from_ids(gen(3_000, 8005), u32::MAX);
    let test_stream = TokenStream::from_ids(gen(3_000, 8006), u32::MAX);

    // Same recipe for both models; the elementwise clip keeps the relu
    // recurrence of the RNN baseline from spiking.
    let mut hyper = markov_hyper();
    hyper.clip = Some(15.0);
    hyper.learning_rate = 0.1;

    let srnn_cfg = ModelConfig::wi_srnn(SYMBOLS, 3, 16, &[12]);
    let srnn: TrainRun<f32> =
        train(&srnn_cfg, &hyper, &train_stream, &dev_stream, u32::MAX, 8004).unwrap();
    assert!(srnn.diverged.is_none());
    let srnn_ppl = perplexity(&srnn.checkpoint.params, &srnn_cfg, &test_stream, POLICY, 1)
        .unwrap()
        .ppl;

    let rnn_cfg = ModelConfig::rnn(SYMBOLS, &[12]);
    let rnn: TrainRun<f32> =
        train(&rnn_cfg, &hyper, &train_stream, &dev_stream, u32::MAX, 8004).unwrap();
    assert!(rnn.diverged.is_none());
    let rnn_ppl = perplexity(&rnn.checkpoint.params, &rnn_cfg, &test_stream, POLICY, 1)
        .unwrap()
        .ppl;

    assert!(
        srnn_ppl < rnn_ppl,
        "SRNN ppl {srnn_ppl:.4} must be strictly below RNN ppl {rnn_ppl:.4}"
    );
    println!(
        "PASS — criterion 6: SRNN ppl {srnn_ppl:.4} < RNN ppl {rnn_ppl:.4} at matched hidden size"
    );
}

// ---------------------------------------------------------------------------
// Criterion 7: training mechanics.
// ---------------------------------------------------------------------------
#[test]
fn criterion_7_training_mechanics() {
    let source = MarkovSource::build(9001, 4.0);
    let train_stream = TokenStream::from_ids(source.sample(4_000, 9002), u32::MAX);
    let dev_stream = TokenStream::from_ids(source.sample(800, 9003), u32::MAX);
    let cfg = ModelConfig::wd_srnn(SYMBOLS, 2, 8, &[12]);
    let mut hyper = markov_hyper();
    hyper.lanes = 4;
    hyper.max_epochs = 4;

    // (a) same seed twice: bit-identical checkpoints.
    let a: TrainRun<f32> = train(&cfg, &hyper, &train_stream, &dev_stream, u32::MAX, 42).unwrap();
    let b: TrainRun<f32> = train(&cfg, &hyper, &train_stream, &dev_stream, u32::MAX, 42).unwrap();
    assert_eq!(a.checkpoint, b.checkpoint, "same-seed runs must be identical");

    // (b) resume from a mid-run checkpoint equals the uninterrupted run,
    // through the serialized file.
    let mut short = hyper.clone();
    short.max_epochs = 2;
    let half: TrainRun<f32> = train(&cfg, &short, &train_stream, &dev_stream, u32::MAX, 42).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("half.ckpt");
    half.checkpoint.save(&path).unwrap();
    let reloaded = Checkpoint::<f32>::load(&path).unwrap();
    let resumed: TrainRun<f32> =
        resume(reloaded, &hyper, &train_stream, &dev_stream, u32::MAX, None).unwrap();
    assert_eq!(
        a.checkpoint, resumed.checkpoint,
        "resumed training must be bit-identical to the uninterrupted run"
    );

    // (c) lr trajectory on a scripted dev history: improving epochs keep
    // 0.4; the first flat epoch halves; seven more epochs halve after each,
    // then stop, ending at 0.4 / 2^8.
    let mut opt = OptimizerState::<f32>::new(&cfg, &hyper);
    let mut history = Vec::new();
    let mut lrs = vec![opt.lr];
    let mut stopped = false;
    // Improvement stalls at epoch 4 (the trigger); training then runs seven
    // more epochs and stops after epoch 11.
    let scripted = [100.0, 90.0, 81.0, 80.9, 80.0, 79.0, 78.0, 77.0, 76.0, 75.0, 74.0];
    for nll in scripted {
        assert!(!stopped, "schedule stopped early");
        history.push(nll);
        stopped = lr_schedule_update(&mut opt, &history, &hyper);
        lrs.push(opt.lr);
    }
    assert!(stopped, "schedule must stop after the seven halving epochs");
    let expected = [
        0.4, 0.4, 0.4, 0.4, 0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125,
        0.4 / 256.0,
    ];
    assert_eq!(lrs.len(), expected.len());
    for (got, want) in lrs.iter().zip(&expected) {
        assert!((got - want).abs() < 1e-15, "lr {got} vs {want}");
    }
    println!(
        "PASS — criterion 7: same-seed and resume bit-exact; lr trajectory 0.4 -> 0.4/2^8 as scheduled"
    );
}

// ---------------------------------------------------------------------------
// Criterion 8 (optional, long-running, not CI-gated): full PTB recipe.
// Provide the standard PTB files via SRNN_PTB_DIR to run it.
// ---------------------------------------------------------------------------
#[test]
#[ignore = "full PTB training takes hours; set SRNN_PTB_DIR and run with --ignored"]
fn criterion_8_full_ptb_reproduction() {
    use srnn_core::corpus::{encode_lines, Vocabulary};

    let dir = match std::env::var("SRNN_PTB_DIR") {
        Ok(d) => std::path::PathBuf::from(d),
        Err(_) => {
            println!("criterion 8 SKIPPED: SRNN_PTB_DIR not set (optional full-scale run)");
            return;
        }
    };
    let read = |name: &str| std::fs::read_to_string(dir.join(name)).unwrap();
    let train_text = read("ptb.train.txt");
    let dev_text = read("ptb.valid.txt");
    let test_text = read("ptb.test.txt");
    let vocab = Vocabulary::build_from_lines(train_text.lines(), 10_000).unwrap();
    let train_stream = encode_lines(train_text.lines(), &vocab);
    let dev_stream = encode_lines(dev_text.lines(), &vocab);
    let test_stream = encode_lines(test_text.lines(), &vocab);

    let hyper = TrainHyper::default(); // lr 0.4, momentum 0.9, decay 4e-5, lanes 200
    for (name, cfg, want) in [
        ("WI-SRNN", ModelConfig::wi_srnn(vocab.len(), 4, 100, &[400]), 107.0),
        ("WD-SRNN", ModelConfig::wd_srnn(vocab.len(), 4, 100, &[400]), 106.0),
        ("FNN", ModelConfig::fnn(vocab.len(), 4, 200, &[400]), 119.0),
    ] {
        let run: TrainRun<f32> =
            train(&cfg, &hyper, &train_stream, &dev_stream, vocab.eos_id(), 1).unwrap();
        assert!(run.diverged.is_none());
        let ppl = perplexity(&run.checkpoint.params, &cfg, &test_stream, POLICY, 8)
            .unwrap()
            .ppl;
        println!("criterion 8: {name} test ppl {ppl:.2} (published {want})");
        assert!(
            (ppl - want).abs() / want <= 0.05,
            "{name}: ppl {ppl:.2} outside 5% of {want}"
        );
    }
    println!("PASS — criterion 8: PTB test perplexities within 5% of the published figures");
}

// ---------------------------------------------------------------------------
// Criterion 9 (advisory, statistical): after training a window-4 SRNN on the
// synthetic corpus scaled to 200k tokens, the mean absolute weight of V_1
// exceeds that of V_4 for a majority of 3 seeds.
// ---------------------------------------------------------------------------
#[test]
fn criterion_9_weight_magnitude_decays_with_position() {
    let source = MarkovSource::build(7001, 5.0);
    let train_stream = TokenStream::from_ids(source.sample(200_000, 9101), u32::MAX);
    let dev_stream = TokenStream::from_ids(source.sample(8_000, 9102), u32::MAX);
    let cfg = ModelConfig::wi_srnn(SYMBOLS, 4, 16, &[32]);
    let mut hyper = markov_hyper();
    hyper.max_epochs = 12;

    let mut wins = 0;
    let mut report = Vec::new();
    for seed in [11u64, 12, 13] {
        let run: TrainRun<f32> =
            train(&cfg, &hyper, &train_stream, &dev_stream, u32::MAX, seed).unwrap();
        assert!(run.diverged.is_none());
        let means = srnn_core::analysis::mean_abs_by_position(&run.checkpoint.params);
        if means[0] > means[3] {
            wins += 1;
        }
        report.push(format!(
            "seed {seed}: mean|V1| {:.5} vs mean|V4| {:.5}",
            means[0], means[3]
        ));
    }
    assert!(
        wins >= 2,
        "mean|V1| > mean|V4| must hold for a majority of seeds: {report:?}"
    );
    println!(
        "PASS — criterion 9 (advisory): mean|V1| > mean|V4| in {wins}/3 seeds ({})",
        report.join("; ")
    );
}

// Ad-hoc throughput probe at PTB dimensions (ignored; run on demand).
#[test]
#[ignore = "timing probe, not an assertion"]
fn bench_chunk_throughput() {
    use std::time::Instant;
    let cfg = ModelConfig::wi_srnn(10_000, 4, 100, &[400]);
    let params: Parameters<f32> = Parameters::init(&cfg, &mut Rng::new(1));
    let mut rng = Rng::new(2);
    let (lanes, len) = (200usize, 20usize);
    let inputs = random_ids(lanes * len, 10_000, &mut rng);
    let targets = random_ids(lanes * len, 10_000, &mut rng);
    let engine = Engine::new(&params, &cfg, POLICY);
    let mut state = StreamState::fresh(&cfg, lanes);
    let trace = engine.forward_chunk(&inputs, lanes, len, &mut state).unwrap();
    backward_bptt(trace, &targets, &params, &cfg).unwrap();
    let reps = 5;
    let tok = (reps * lanes * len) as f64;
    let t0 = Instant::now();
    let mut traces = Vec::new();
    for _ in 0..reps {
        traces.push(engine.forward_chunk(&inputs, lanes, len, &mut state).unwrap());
    }
    let fwd = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    for trace in traces {
        backward_bptt(trace, &targets, &params, &cfg).unwrap();
    }
    let bwd = t1.elapsed().as_secs_f64();
    println!(
        "fwd {:.0} tok/s, bwd {:.0} tok/s, combined {:.0} tok/s",
        tok / fwd,
        tok / bwd,
        tok / (fwd + bwd)
    );
}
