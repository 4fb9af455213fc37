use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use super::optimizer::OptimizerState;
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::model::{ContextMode, Mode, ModelConfig, Parameters, SeqActivation};
use crate::numerics::{Rng, Scalar};

const MAGIC: &[u8; 8] = b"SRNNCKPT";
const VERSION: u8 = 1;

/// Full training snapshot: parameters, optimizer state, rng state, the
/// vocabulary hash the streams were encoded with, and the per-epoch dev
/// NLL history driving the schedule. Round-trips bit-exactly through
/// save/load, which is what makes resumed training identical to an
/// uninterrupted run.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint<T> {
    pub config: ModelConfig,
    pub params: Parameters<T>,
    pub opt: OptimizerState<T>,
    pub rng: Rng,
    pub vocab_hash: [u8; 32],
    pub dev_history: Vec<f64>,
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new() -> Self {
        Writer { buf: Vec::new() }
    }
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn bytes(&mut self, v: &[u8]) {
        self.buf.extend_from_slice(v);
    }
    fn tensor<T: Scalar>(&mut self, data: &[T]) {
        self.u64(data.len() as u64);
        for &v in data {
            v.write_le(&mut self.buf);
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: String,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Format(format!(
                "{}: truncated at byte {} while reading {what} ({n} bytes needed, {} left)",
                self.path,
                self.pos,
                self.bytes.len() - self.pos
            )));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }
    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }
    fn u32(&mut self, what: &str) -> Result<u32> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
    fn u64(&mut self, what: &str) -> Result<u64> {
        let b = self.take(8, what)?;
        Ok(u64::from_le_bytes(b.try_into().unwrap()))
    }
    fn f64(&mut self, what: &str) -> Result<f64> {
        let b = self.take(8, what)?;
        Ok(f64::from_le_bytes(b.try_into().unwrap()))
    }
    fn tensor<T: Scalar>(&mut self, expect_len: usize, what: &str) -> Result<Vec<T>> {
        let n = self.u64(what)? as usize;
        if n != expect_len {
            return Err(Error::Format(format!(
                "{}: tensor {what} has {n} scalars, expected {expect_len}",
                self.path
            )));
        }
        let raw = self.take(n * T::WIDTH, what)?;
        Ok(raw.chunks_exact(T::WIDTH).map(T::read_le).collect())
    }
}

fn write_config(w: &mut Writer, cfg: &ModelConfig) {
    w.u8(match cfg.mode {
        Mode::Fnn => 0,
        Mode::Rnn => 1,
        Mode::WiSrnn => 2,
        Mode::WdSrnn => 3,
    });
    w.u32(cfg.window as u32);
    w.u32(cfg.embed_dim as u32);
    w.u8(cfg.hidden_dims.len() as u8);
    for &h in &cfg.hidden_dims {
        w.u32(h as u32);
    }
    w.u32(cfg.vocab_size as u32);
    w.u8(match cfg.seq_act {
        SeqActivation::Tanh => 0,
        SeqActivation::Identity => 1,
    });
    match cfg.context {
        ContextMode::None => w.u8(0),
        ContextMode::SharedVector => w.u8(1),
        ContextMode::PerWord => w.u8(2),
        ContextMode::FixedScalar(c) => {
            w.u8(3);
            w.f64(c);
        }
    }
    w.u32(cfg.bptt_steps as u32);
}

fn read_config(r: &mut Reader) -> Result<ModelConfig> {
    let mode = match r.u8("mode")? {
        0 => Mode::Fnn,
        1 => Mode::Rnn,
        2 => Mode::WiSrnn,
        3 => Mode::WdSrnn,
        m => return Err(Error::Format(format!("unknown mode tag {m}"))),
    };
    let window = r.u32("window")? as usize;
    let embed_dim = r.u32("embed_dim")? as usize;
    let nh = r.u8("hidden layer count")? as usize;
    let mut hidden_dims = Vec::with_capacity(nh);
    for _ in 0..nh {
        hidden_dims.push(r.u32("hidden size")? as usize);
    }
    let vocab_size = r.u32("vocab_size")? as usize;
    let seq_act = match r.u8("seq_act")? {
        0 => SeqActivation::Tanh,
        1 => SeqActivation::Identity,
        a => return Err(Error::Format(format!("unknown activation tag {a}"))),
    };
    let context = match r.u8("context mode")? {
        0 => ContextMode::None,
        1 => ContextMode::SharedVector,
        2 => ContextMode::PerWord,
        3 => ContextMode::FixedScalar(r.f64("context scalar")?),
        c => return Err(Error::Format(format!("unknown context tag {c}"))),
    };
    let bptt_steps = r.u32("bptt_steps")? as usize;
    let cfg = ModelConfig {
        mode,
        window,
        embed_dim,
        hidden_dims,
        vocab_size,
        seq_act,
        context,
        bptt_steps,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn write_params<T: Scalar>(w: &mut Writer, p: &Parameters<T>) {
    for slice in p.slices() {
        w.tensor(slice);
    }
}

fn read_params<T: Scalar>(r: &mut Reader, cfg: &ModelConfig, what: &str) -> Result<Parameters<T>> {
    let mut p = Parameters::<T>::zeros_like(cfg);
    for slice in p.slices_mut() {
        let expect = slice.len();
        let data: Vec<T> = r.tensor(expect, what)?;
        slice.copy_from_slice(&data);
    }
    Ok(p)
}

impl<T: Scalar> Checkpoint<T> {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = Writer::new();
        w.bytes(MAGIC);
        w.u8(VERSION);
        w.u8(T::WIDTH as u8);
        write_config(&mut w, &self.config);
        w.bytes(&self.vocab_hash);
        w.bytes(&self.rng.state_bytes());
        w.f64(self.opt.lr);
        w.u32(self.opt.epoch as u32);
        w.u8(self.opt.halving as u8);
        w.u32(self.opt.countdown as u32);
        w.u32(self.dev_history.len() as u32);
        for &v in &self.dev_history {
            w.f64(v);
        }
        write_params(&mut w, &self.params);
        write_params(&mut w, &self.opt.velocity);
        let digest: [u8; 32] = Sha256::digest(&w.buf).into();
        w.bytes(&digest);

        let mut f = fs::File::create(path)?;
        f.write_all(&w.buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.len() < 32 {
            return Err(Error::Format(format!(
                "{}: file too short to hold a checkpoint",
                path.display()
            )));
        }
        let (body, stored_digest) = bytes.split_at(bytes.len() - 32);
        let digest: [u8; 32] = Sha256::digest(body).into();
        if digest != stored_digest {
            return Err(Error::Format(format!(
                "{}: checksum mismatch (corrupt or truncated file)",
                path.display()
            )));
        }
        let mut r = Reader {
            bytes: body,
            pos: 0,
            path: path.display().to_string(),
        };
        if r.take(8, "magic")? != MAGIC {
            return Err(Error::Format(format!(
                "{}: not a checkpoint file (bad magic)",
                path.display()
            )));
        }
        let version = r.u8("version")?;
        if version != VERSION {
            return Err(Error::Format(format!(
                "{}: unsupported checkpoint version {version}",
                path.display()
            )));
        }
        let width = r.u8("precision")?;
        if width as usize != T::WIDTH {
            return Err(Error::Format(format!(
                "{}: stored precision is {}-byte floats, requested {}-byte",
                path.display(),
                width,
                T::WIDTH
            )));
        }
        let config = read_config(&mut r)?;
        let mut vocab_hash = [0u8; 32];
        vocab_hash.copy_from_slice(r.take(32, "vocab hash")?);
        let mut rng_state = [0u8; 32];
        rng_state.copy_from_slice(r.take(32, "rng state")?);
        let rng = Rng::from_state_bytes(&rng_state);
        let lr = r.f64("learning rate")?;
        let epoch = r.u32("epoch")? as usize;
        let halving = r.u8("halving flag")? != 0;
        let countdown = r.u32("countdown")? as usize;
        let n_hist = r.u32("dev history length")? as usize;
        let mut dev_history = Vec::with_capacity(n_hist);
        for _ in 0..n_hist {
            dev_history.push(r.f64("dev history entry")?);
        }
        let params = read_params(&mut r, &config, "parameters")?;
        let velocity = read_params(&mut r, &config, "velocity")?;
        if r.pos != body.len() {
            return Err(Error::Format(format!(
                "{}: {} trailing bytes after checkpoint payload",
                path.display(),
                body.len() - r.pos
            )));
        }
        Ok(Checkpoint {
            config,
            params,
            opt: OptimizerState {
                velocity,
                lr,
                epoch,
                halving,
                countdown,
            },
            rng,
            vocab_hash,
            dev_history,
        })
    }

    /// Load, refusing checkpoints written against a different vocabulary.
    pub fn load_checked(path: &Path, vocab: &Vocabulary) -> Result<Self> {
        let cp = Self::load(path)?;
        if cp.vocab_hash != vocab.hash() {
            return Err(Error::Data(format!(
                "{}: checkpoint was written with a different vocabulary (hash mismatch); \
                 pass force to override",
                path.display()
            )));
        }
        Ok(cp)
    }
}

/// Stored scalar width of a checkpoint file without loading it: 4 for f32,
/// 8 for f64.
pub fn checkpoint_precision(path: &Path) -> Result<u8> {
    let mut f = fs::File::open(path)?;
    let mut head = [0u8; 10];
    f.read_exact(&mut head)
        .map_err(|_| Error::Format(format!("{}: too short for a header", path.display())))?;
    if &head[..8] != MAGIC {
        return Err(Error::Format(format!(
            "{}: not a checkpoint file (bad magic)",
            path.display()
        )));
    }
    Ok(head[9])
}
