mod config_file;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use config_file::{default_config_text, parse_config, FileConfig};
use srnn_core::analysis::{
    histograms_to_csv, mean_abs_by_position, nearest_neighbors, neighbors_to_csv, weight_histogram,
    Histogram, HistogramSpec, NeighborSpace,
};
use srnn_core::corpus::{corpus_stats, encode_lines, TokenStream, Vocabulary};
use srnn_core::model::{BoundaryPolicy, Engine, Mode, ModelConfig, Parameters, StreamState};
use srnn_core::ngram::{count_ngrams, estimate_kn, interpolated_nll, tune_lambda, KNModel};
use srnn_core::numerics::{Rng, Scalar};
use srnn_core::train::{
    checkpoint_precision, perplexity, perplexity_with_sentences, resume, Checkpoint, EpochRecord,
    OptimizerState,
};
use srnn_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "srnn",
    version,
    about = "Neural language modeling with sequential recurrence at the projection layer"
)]
struct Cli {
    /// Emit one machine-readable JSON object instead of text output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Precision {
    F32,
    F64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Fnn,
    Rnn,
    #[value(name = "wi-srnn")]
    WiSrnn,
    #[value(name = "wd-srnn")]
    WdSrnn,
    Fofe,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SpaceArg {
    Embedding,
    Context,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a vocabulary from training text and encode splits to caches.
    Prep {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        dev: Option<PathBuf>,
        #[arg(long)]
        test: Option<PathBuf>,
        /// Maximum vocabulary size (specials included).
        #[arg(long, default_value_t = 10_000)]
        vocab_cap: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Train a model with the recipe from a config file.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        vocab: Option<PathBuf>,
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        dev: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Precision::F32)]
        precision: Precision,
        /// Reset recurrent state at sentence-end tokens.
        #[arg(long)]
        reset_at_eos: bool,
        /// Print the default config file and exit.
        #[arg(long)]
        print_defaults: bool,
    },
    /// Evaluate a checkpoint's perplexity on a data file.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 1)]
        lanes: usize,
        #[arg(long)]
        reset_at_eos: bool,
        /// Per-sentence NLL breakdown (single-lane).
        #[arg(long)]
        sentences: bool,
        /// Accept a checkpoint written with a different vocabulary.
        #[arg(long)]
        force: bool,
    },
    /// Count n-grams and estimate the Kneser-Ney model.
    KnTrain {
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 5)]
        order: usize,
        #[arg(long)]
        out: PathBuf,
        /// Also export ARPA text to this path.
        #[arg(long)]
        arpa: Option<PathBuf>,
        #[arg(long)]
        reset_at_eos: bool,
    },
    /// Interpolate a neural checkpoint with a Kneser-Ney model.
    Interpolate {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        kn: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        /// Dev data for lambda tuning (required with --lambda auto).
        #[arg(long)]
        dev: Option<PathBuf>,
        #[arg(long)]
        test: PathBuf,
        /// Interpolation weight in [0,1], or "auto" to tune on dev.
        #[arg(long, default_value = "auto")]
        lambda: String,
        #[arg(long)]
        reset_at_eos: bool,
        #[arg(long)]
        force: bool,
    },
    /// Nearest neighbors in the embedding or context-weight space.
    Neighbors {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, value_enum, default_value_t = SpaceArg::Embedding)]
        space: SpaceArg,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Histograms of the projection-to-hidden weights per position.
    Histogram {
        #[arg(long)]
        checkpoint: PathBuf,
        /// 1-based window position; omit for all positions.
        #[arg(long)]
        position: Option<usize>,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        /// Value range lo:hi (defaults to each tensor's own range).
        #[arg(long)]
        range: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact learnable-parameter count for an architecture.
    ParamCount {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        vocab: usize,
        #[arg(long)]
        embed: usize,
        /// One or two comma-separated hidden sizes.
        #[arg(long)]
        hidden: String,
        #[arg(long, default_value_t = 4)]
        window: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                Error::Config(_) => 1,
                Error::Diverged(_) => 3,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}

fn policy_for(reset_at_eos: bool, eos_id: u32) -> BoundaryPolicy {
    if reset_at_eos {
        BoundaryPolicy::ResetAtEos { eos_id }
    } else {
        BoundaryPolicy::Continue
    }
}

/// Data files may be binary token caches or plain text (detected by magic).
fn load_stream(path: &Path, vocab: &Vocabulary) -> Result<TokenStream> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(b"SRNNTOKS") {
        return TokenStream::load_cache(path, vocab.eos_id());
    }
    let text = String::from_utf8(bytes).map_err(|_| {
        Error::Data(format!(
            "{}: neither a token cache nor UTF-8 text",
            path.display()
        ))
    })?;
    Ok(encode_lines(text.lines(), vocab))
}

fn load_checkpoint_checked<T: Scalar>(
    path: &Path,
    vocab: &Vocabulary,
    force: bool,
) -> Result<Checkpoint<T>> {
    if force {
        Checkpoint::load(path)
    } else {
        Checkpoint::load_checked(path, vocab)
    }
}

fn run(cli: Cli) -> Result<()> {
    let json = cli.json;
    match cli.cmd {
        Cmd::Prep {
            train,
            dev,
            test,
            vocab_cap,
            out_dir,
        } => cmd_prep(
            &train,
            dev.as_deref(),
            test.as_deref(),
            vocab_cap,
            &out_dir,
            json,
        ),
        Cmd::Train {
            config,
            vocab,
            train,
            dev,
            out,
            seed,
            precision,
            reset_at_eos,
            print_defaults,
        } => {
            if print_defaults {
                print!("{}", default_config_text());
                return Ok(());
            }
            let missing =
                |what: &str| Error::Config(format!("--{what} is required (unless --print-defaults)"));
            let config = config.ok_or_else(|| missing("config"))?;
            let vocab = vocab.ok_or_else(|| missing("vocab"))?;
            let train = train.ok_or_else(|| missing("train"))?;
            let dev = dev.ok_or_else(|| missing("dev"))?;
            let out = out.ok_or_else(|| missing("out"))?;
            match precision {
                Precision::F32 => {
                    cmd_train::<f32>(&config, &vocab, &train, &dev, &out, seed, reset_at_eos, json)
                }
                Precision::F64 => {
                    cmd_train::<f64>(&config, &vocab, &train, &dev, &out, seed, reset_at_eos, json)
                }
            }
        }
        Cmd::Eval {
            checkpoint,
            vocab,
            data,
            lanes,
            reset_at_eos,
            sentences,
            force,
        } => match checkpoint_precision(&checkpoint)? {
            4 => cmd_eval::<f32>(
                &checkpoint,
                &vocab,
                &data,
                lanes,
                reset_at_eos,
                sentences,
                force,
                json,
            ),
            8 => cmd_eval::<f64>(
                &checkpoint,
                &vocab,
                &data,
                lanes,
                reset_at_eos,
                sentences,
                force,
                json,
            ),
            w => Err(Error::Format(format!("unsupported checkpoint precision {w}"))),
        },
        Cmd::KnTrain {
            vocab,
            data,
            order,
            out,
            arpa,
            reset_at_eos,
        } => cmd_kn_train(&vocab, &data, order, &out, arpa.as_deref(), reset_at_eos, json),
        Cmd::Interpolate {
            checkpoint,
            kn,
            vocab,
            dev,
            test,
            lambda,
            reset_at_eos,
            force,
        } => match checkpoint_precision(&checkpoint)? {
            4 => cmd_interpolate::<f32>(
                &checkpoint,
                &kn,
                &vocab,
                dev.as_deref(),
                &test,
                &lambda,
                reset_at_eos,
                force,
                json,
            ),
            8 => cmd_interpolate::<f64>(
                &checkpoint,
                &kn,
                &vocab,
                dev.as_deref(),
                &test,
                &lambda,
                reset_at_eos,
                force,
                json,
            ),
            w => Err(Error::Format(format!("unsupported checkpoint precision {w}"))),
        },
        Cmd::Neighbors {
            checkpoint,
            vocab,
            word,
            k,
            space,
            out,
            force,
        } => match checkpoint_precision(&checkpoint)? {
            4 => cmd_neighbors::<f32>(&checkpoint, &vocab, &word, k, space, out.as_deref(), force, json),
            8 => cmd_neighbors::<f64>(&checkpoint, &vocab, &word, k, space, out.as_deref(), force, json),
            w => Err(Error::Format(format!("unsupported checkpoint precision {w}"))),
        },
        Cmd::Histogram {
            checkpoint,
            position,
            bins,
            range,
            out,
        } => match checkpoint_precision(&checkpoint)? {
            4 => cmd_histogram::<f32>(&checkpoint, position, bins, range.as_deref(), out.as_deref(), json),
            8 => cmd_histogram::<f64>(&checkpoint, position, bins, range.as_deref(), out.as_deref(), json),
            w => Err(Error::Format(format!("unsupported checkpoint precision {w}"))),
        },
        Cmd::ParamCount {
            mode,
            vocab,
            embed,
            hidden,
            window,
        } => cmd_param_count(mode, vocab, embed, &hidden, window, json),
    }
}

fn cmd_prep(
    train: &Path,
    dev: Option<&Path>,
    test: Option<&Path>,
    vocab_cap: usize,
    out_dir: &Path,
    json: bool,
) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let train_text = fs::read_to_string(train)?;
    let vocab = Vocabulary::build_from_lines(train_text.lines(), vocab_cap)?;
    let vocab_path = out_dir.join("vocab.txt");
    vocab.save(&vocab_path)?;

    let mut splits = vec![("train", train.to_path_buf())];
    if let Some(p) = dev {
        splits.push(("dev", p.to_path_buf()));
    }
    if let Some(p) = test {
        splits.push(("test", p.to_path_buf()));
    }
    let mut reports = Vec::new();
    for (name, path) in &splits {
        let text = fs::read_to_string(path)?;
        let stream = encode_lines(text.lines(), &vocab);
        let cache = out_dir.join(format!("{name}.bin"));
        stream.save_cache(&cache)?;
        let stats = corpus_stats(&stream, &vocab);
        reports.push((name.to_string(), cache, stats));
    }

    if json {
        let obj = json!({
            "vocab": {
                "path": vocab_path.display().to_string(),
                "size": vocab.len(),
            },
            "splits": reports.iter().map(|(name, cache, s)| json!({
                "split": name,
                "cache": cache.display().to_string(),
                "tokens": s.tokens,
                "unk_tokens": s.unk_tokens,
                "unk_rate": s.unk_rate,
                "sentences": s.sentences,
            })).collect::<Vec<_>>(),
        });
        println!("{obj}");
    } else {
        println!("vocabulary: {} words -> {}", vocab.len(), vocab_path.display());
        for (name, cache, s) in &reports {
            println!(
                "{name}: {} tokens, unk rate {:.2}%, {} sentences -> {}",
                s.tokens,
                s.unk_rate * 100.0,
                s.sentences,
                cache.display()
            );
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_train<T: Scalar>(
    config: &Path,
    vocab_path: &Path,
    train_path: &Path,
    dev_path: &Path,
    out: &Path,
    seed: u64,
    reset_flag: bool,
    json: bool,
) -> Result<()> {
    let FileConfig { model, mut hyper } = parse_config(&fs::read_to_string(config)?)?;
    if reset_flag {
        hyper.reset_at_eos = true;
    }
    let vocab = Vocabulary::load(vocab_path)?;
    if model.vocab_size != vocab.len() {
        return Err(Error::Config(format!(
            "config vocab_size {} does not match vocabulary of {} words",
            model.vocab_size,
            vocab.len()
        )));
    }
    let train_stream = load_stream(train_path, &vocab)?;
    let dev_stream = load_stream(dev_path, &vocab)?;

    let epoch_lines = !json;
    let mut on_epoch = |_cp: &Checkpoint<T>, rec: &EpochRecord| {
        if epoch_lines {
            println!(
                "epoch {:>3}  lr {:<10.6} train_ppl {:<12.3} dev_ppl {:<12.3}",
                rec.epoch, rec.lr, rec.train_ppl, rec.dev_ppl
            );
        }
    };
    let mut rng = Rng::new(seed);
    let params = Parameters::init(&model, &mut rng);
    let start = Checkpoint {
        config: model.clone(),
        params,
        opt: OptimizerState::new(&model, &hyper),
        rng,
        vocab_hash: vocab.hash(),
        dev_history: Vec::new(),
    };
    let run = resume(
        start,
        &hyper,
        &train_stream,
        &dev_stream,
        vocab.eos_id(),
        Some(&mut on_epoch),
    )?;
    run.checkpoint.save(out)?;

    if json {
        let obj = json!({
            "checkpoint": out.display().to_string(),
            "seed": seed,
            "param_count": model.param_count(),
            "epochs": run.epochs.iter().map(|r| json!({
                "epoch": r.epoch,
                "lr": r.lr,
                "train_ppl": r.train_ppl,
                "dev_ppl": r.dev_ppl,
            })).collect::<Vec<_>>(),
            "diverged": run.diverged,
        });
        println!("{obj}");
    } else if run.diverged.is_none() {
        println!("saved checkpoint to {}", out.display());
    }
    if let Some(diag) = run.diverged {
        return Err(Error::Diverged(format!(
            "{diag}; diagnostic checkpoint written to {}",
            out.display()
        )));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval<T: Scalar>(
    checkpoint: &Path,
    vocab_path: &Path,
    data: &Path,
    lanes: usize,
    reset_at_eos: bool,
    sentences: bool,
    force: bool,
    json: bool,
) -> Result<()> {
    let vocab = Vocabulary::load(vocab_path)?;
    let cp: Checkpoint<T> = load_checkpoint_checked(checkpoint, &vocab, force)?;
    let stream = load_stream(data, &vocab)?;
    let policy = policy_for(reset_at_eos, vocab.eos_id());
    let report = if sentences {
        perplexity_with_sentences(&cp.params, &cp.config, &stream, policy)?
    } else {
        perplexity(&cp.params, &cp.config, &stream, policy, lanes)?
    };
    if json {
        let obj = json!({
            "tokens": report.tokens,
            "nll": report.nll,
            "ppl": report.ppl,
            "reset_at_eos": report.reset_at_eos,
            "per_sentence_nll": report.per_sentence,
        });
        println!("{obj}");
    } else {
        println!(
            "tokens {}  nll {:.4}  ppl {:.4}",
            report.tokens, report.nll, report.ppl
        );
        if let Some(parts) = report.per_sentence {
            for (i, nll) in parts.iter().enumerate() {
                println!("sentence {i:>5}  nll {nll:.4}");
            }
        }
    }
    Ok(())
}

fn cmd_kn_train(
    vocab_path: &Path,
    data: &Path,
    order: usize,
    out: &Path,
    arpa: Option<&Path>,
    reset_at_eos: bool,
    json: bool,
) -> Result<()> {
    let vocab = Vocabulary::load(vocab_path)?;
    let stream = load_stream(data, &vocab)?;
    let counts = count_ngrams(&stream, order, reset_at_eos, vocab.eos_id())?;
    let model = estimate_kn(&counts, vocab.len())?;
    if model.used_fallback_discount {
        eprintln!("warning: degenerate count-of-count statistics; fixed 0.75 discount in use");
    }
    model.save(out)?;
    if let Some(arpa_path) = arpa {
        model.export_arpa(|id| vocab.word(id).to_string(), arpa_path)?;
    }
    let nll = model.stream_nll(&stream, reset_at_eos, vocab.eos_id())?;
    let ppl = (nll / stream.len() as f64).exp();
    if json {
        let obj = json!({
            "model": out.display().to_string(),
            "order": order,
            "train_tokens": stream.len(),
            "train_ppl": ppl,
            "fallback_discount": model.used_fallback_discount,
            "arpa": arpa.map(|p| p.display().to_string()),
        });
        println!("{obj}");
    } else {
        println!(
            "KN order-{order} model on {} tokens (train ppl {:.3}) -> {}",
            stream.len(),
            ppl,
            out.display()
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_interpolate<T: Scalar>(
    checkpoint: &Path,
    kn_path: &Path,
    vocab_path: &Path,
    dev: Option<&Path>,
    test: &Path,
    lambda_arg: &str,
    reset_at_eos: bool,
    force: bool,
    json: bool,
) -> Result<()> {
    let vocab = Vocabulary::load(vocab_path)?;
    let cp: Checkpoint<T> = load_checkpoint_checked(checkpoint, &vocab, force)?;
    let kn = KNModel::load(kn_path)?;
    let policy = policy_for(reset_at_eos, vocab.eos_id());

    let neural_probs = |stream: &TokenStream| -> Result<Vec<f64>> {
        let engine = Engine::new(&cp.params, &cp.config, policy);
        let mut state = StreamState::fresh(&cp.config, 1);
        engine.token_probs(stream.ids(), &mut state)
    };

    let (lambda, tuned) = if lambda_arg == "auto" {
        let dev_path =
            dev.ok_or_else(|| Error::Config("--lambda auto needs --dev data for tuning".into()))?;
        let dev_stream = load_stream(dev_path, &vocab)?;
        let pm = neural_probs(&dev_stream)?;
        let pk = kn.stream_probs(&dev_stream, reset_at_eos, vocab.eos_id())?;
        (tune_lambda(&pm, &pk)?, true)
    } else {
        let l: f64 = lambda_arg
            .parse()
            .map_err(|_| Error::Config(format!("bad lambda {lambda_arg:?}")))?;
        if !(0.0..=1.0).contains(&l) {
            return Err(Error::Config(format!("lambda {l} outside [0,1]")));
        }
        (l, false)
    };

    let test_stream = load_stream(test, &vocab)?;
    let pm = neural_probs(&test_stream)?;
    let pk = kn.stream_probs(&test_stream, reset_at_eos, vocab.eos_id())?;
    let t = test_stream.len() as f64;
    let model_ppl = (pm.iter().map(|p| -p.ln()).sum::<f64>() / t).exp();
    let kn_ppl = (pk.iter().map(|p| -p.ln()).sum::<f64>() / t).exp();
    let mix_ppl = (interpolated_nll(&pm, &pk, lambda) / t).exp();

    if json {
        let obj = json!({
            "lambda": lambda,
            "lambda_tuned": tuned,
            "test_tokens": test_stream.len(),
            "model_ppl": model_ppl,
            "kn_ppl": kn_ppl,
            "interpolated_ppl": mix_ppl,
        });
        println!("{obj}");
    } else {
        println!(
            "lambda {:.4}{}  model_ppl {:.4}  kn_ppl {:.4}  interpolated_ppl {:.4}",
            lambda,
            if tuned { " (tuned)" } else { "" },
            model_ppl,
            kn_ppl,
            mix_ppl
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_neighbors<T: Scalar>(
    checkpoint: &Path,
    vocab_path: &Path,
    word: &str,
    k: usize,
    space: SpaceArg,
    out: Option<&Path>,
    force: bool,
    json: bool,
) -> Result<()> {
    let vocab = Vocabulary::load(vocab_path)?;
    let cp: Checkpoint<T> = load_checkpoint_checked(checkpoint, &vocab, force)?;
    let space = match space {
        SpaceArg::Embedding => NeighborSpace::Embedding,
        SpaceArg::Context => NeighborSpace::Context,
    };
    let neighbors = nearest_neighbors(&cp.params, cp.config.mode, &vocab, word, k, space)?;
    if json {
        let obj = json!({
            "query": word,
            "space": match space {
                NeighborSpace::Embedding => "embedding",
                NeighborSpace::Context => "context",
            },
            "neighbors": neighbors.iter().enumerate().map(|(i, n)| json!({
                "rank": i + 1,
                "word": n.word,
                "score": n.score,
            })).collect::<Vec<_>>(),
        });
        println!("{obj}");
    } else {
        let csv = neighbors_to_csv(&neighbors);
        match out {
            Some(path) => fs::write(path, csv)?,
            None => print!("{csv}"),
        }
    }
    Ok(())
}

fn parse_range(range: &str) -> Result<(f64, f64)> {
    let (lo, hi) = range
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("bad range {range:?}, expected lo:hi")))?;
    let lo: f64 = lo
        .parse()
        .map_err(|_| Error::Config(format!("bad range bound {lo:?}")))?;
    let hi: f64 = hi
        .parse()
        .map_err(|_| Error::Config(format!("bad range bound {hi:?}")))?;
    Ok((lo, hi))
}

fn cmd_histogram<T: Scalar>(
    checkpoint: &Path,
    position: Option<usize>,
    bins: usize,
    range: Option<&str>,
    out: Option<&Path>,
    json: bool,
) -> Result<()> {
    let cp: Checkpoint<T> = Checkpoint::load(checkpoint)?;
    if cp.config.mode == Mode::Rnn {
        return Err(Error::Config(
            "RNN checkpoints have no projection-to-hidden window matrices".into(),
        ));
    }
    let range = range.map(parse_range).transpose()?;
    let positions: Vec<usize> = match position {
        Some(p) => vec![p],
        None => (1..=cp.config.window).collect(),
    };
    let histograms: Vec<Histogram> = positions
        .iter()
        .map(|&position| {
            weight_histogram(
                &cp.params,
                &HistogramSpec {
                    position,
                    bins,
                    range,
                },
            )
        })
        .collect::<Result<_>>()?;
    if json {
        let obj = json!({
            "mean_abs_by_position": mean_abs_by_position(&cp.params),
            "histograms": histograms.iter().map(|h| json!({
                "position": h.position,
                "mean_abs": h.mean_abs,
                "variance": h.variance,
                "elements": h.elements,
                "rows": h.rows.iter().map(|r| json!([r.bin_center, r.count])).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        });
        println!("{obj}");
    } else {
        for h in &histograms {
            eprintln!(
                "position {}: mean|w| {:.6}, variance {:.6}, {} elements",
                h.position, h.mean_abs, h.variance, h.elements
            );
        }
        let csv = histograms_to_csv(&histograms);
        match out {
            Some(path) => fs::write(path, csv)?,
            None => print!("{csv}"),
        }
    }
    Ok(())
}

fn cmd_param_count(
    mode: ModeArg,
    vocab: usize,
    embed: usize,
    hidden: &str,
    window: usize,
    json: bool,
) -> Result<()> {
    let hidden_dims: Vec<usize> = hidden
        .split(',')
        .map(|h| {
            h.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad hidden size {h:?}")))
        })
        .collect::<Result<_>>()?;
    let config = match mode {
        ModeArg::Fnn => ModelConfig::fnn(vocab, window, embed, &hidden_dims),
        ModeArg::Rnn => ModelConfig::rnn(vocab, &hidden_dims),
        ModeArg::WiSrnn => ModelConfig::wi_srnn(vocab, window, embed, &hidden_dims),
        ModeArg::WdSrnn => ModelConfig::wd_srnn(vocab, window, embed, &hidden_dims),
        ModeArg::Fofe => ModelConfig::fofe(vocab, window, embed, &hidden_dims, 0.7),
    };
    config.validate()?;
    let count = config.param_count();
    if json {
        println!("{}", json!({ "param_count": count }));
    } else {
        println!("{count}");
    }
    Ok(())
}
