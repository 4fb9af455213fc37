use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::vocab::{tokenize_line, Vocabulary};
use crate::error::{Error, Result};

const CACHE_MAGIC: &[u8; 8] = b"SRNNTOKS";
const CACHE_VERSION: u8 = 1;

/// An integer-encoded corpus. `sentence_bounds` records the positions of
/// sentence-end tokens; synthetic streams may have none.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenStream {
    ids: Vec<u32>,
    sentence_bounds: Vec<usize>,
}

impl TokenStream {
    pub fn from_ids(ids: Vec<u32>, eos_id: u32) -> Self {
        let sentence_bounds = ids
            .iter()
            .enumerate()
            .filter(|(_, &id)| id == eos_id)
            .map(|(i, _)| i)
            .collect();
        TokenStream {
            ids,
            sentence_bounds,
        }
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn sentence_bounds(&self) -> &[usize] {
        &self.sentence_bounds
    }

    pub fn sentence_count(&self) -> usize {
        self.sentence_bounds.len()
    }

    /// Binary cache: 8-byte magic, version byte, then little-endian u32 ids.
    pub fn save_cache(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(9 + self.ids.len() * 4);
        buf.extend_from_slice(CACHE_MAGIC);
        buf.push(CACHE_VERSION);
        for &id in &self.ids {
            buf.extend_from_slice(&id.to_le_bytes());
        }
        let mut f = fs::File::create(path)?;
        f.write_all(&buf)?;
        Ok(())
    }

    pub fn load_cache(path: &Path, eos_id: u32) -> Result<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.len() < 9 || &bytes[..8] != CACHE_MAGIC {
            return Err(Error::Format(format!(
                "{}: not a token cache (bad magic)",
                path.display()
            )));
        }
        if bytes[8] != CACHE_VERSION {
            return Err(Error::Format(format!(
                "{}: unsupported cache version {}",
                path.display(),
                bytes[8]
            )));
        }
        let payload = &bytes[9..];
        if payload.len() % 4 != 0 {
            return Err(Error::Format(format!(
                "{}: truncated id payload ({} trailing bytes)",
                path.display(),
                payload.len() % 4
            )));
        }
        let ids = payload
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Ok(TokenStream::from_ids(ids, eos_id))
    }
}

/// Encodes one pre-tokenized line: out-of-vocabulary tokens map to `<unk>`
/// and a sentence-end id is appended.
pub fn encode_line<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> Vec<u32> {
    let mut ids: Vec<u32> = tokens
        .iter()
        .map(|t| vocab.id_or_unk(t.as_ref()))
        .collect();
    ids.push(vocab.eos_id());
    ids
}

/// Encodes whitespace-tokenized lines into a single stream, one `</s>` per
/// line.
pub fn encode_lines<'a, I>(lines: I, vocab: &Vocabulary) -> TokenStream
where
    I: IntoIterator<Item = &'a str>,
{
    let mut ids = Vec::new();
    let mut sentence_bounds = Vec::new();
    for line in lines {
        for tok in tokenize_line(line) {
            ids.push(vocab.id_or_unk(tok));
        }
        ids.push(vocab.eos_id());
        sentence_bounds.push(ids.len() - 1);
    }
    TokenStream {
        ids,
        sentence_bounds,
    }
}

/// Inverse of encoding: tokens come back with OOV words replaced by `<unk>`.
pub fn decode(ids: &[u32], vocab: &Vocabulary) -> Vec<String> {
    ids.iter().map(|&id| vocab.word(id).to_string()).collect()
}

/// Token count, `<unk>` rate, and sentence count for a stream.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusStats {
    pub tokens: usize,
    pub unk_tokens: usize,
    pub unk_rate: f64,
    pub sentences: usize,
}

pub fn corpus_stats(stream: &TokenStream, vocab: &Vocabulary) -> CorpusStats {
    let unk = vocab.unk_id();
    let unk_tokens = stream.ids().iter().filter(|&&id| id == unk).count();
    let tokens = stream.len();
    CorpusStats {
        tokens,
        unk_tokens,
        unk_rate: if tokens == 0 {
            0.0
        } else {
            unk_tokens as f64 / tokens as f64
        },
        sentences: stream.sentence_count(),
    }
}
