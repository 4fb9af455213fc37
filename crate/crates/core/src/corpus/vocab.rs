use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const UNK_TOKEN: &str = "<unk>";
pub const EOS_TOKEN: &str = "</s>";

/// Bidirectional word/id map with training frequencies. Ids are assigned by
/// descending frequency with lexicographic tie-break, so the mapping is
/// deterministic across platforms. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    ids: HashMap<String, u32>,
    counts: Vec<u64>,
    unk_id: u32,
    eos_id: u32,
}

/// Splits on ASCII whitespace. Both target corpora ship pre-tokenized, so
/// no normalization of any kind is applied.
pub fn tokenize_line(text: &str) -> Vec<&str> {
    text.split_ascii_whitespace().collect()
}

impl Vocabulary {
    /// Builds a vocabulary from a token stream, keeping the `cap` most
    /// frequent tokens. `<unk>` and `</s>` are treated as specials: they are
    /// always retained (evicting the least frequent regular token when they
    /// fall below the cap), as is every token in `extra_specials`.
    pub fn build<I, S>(tokens: I, cap: usize, extra_specials: &[&str]) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut specials: Vec<&str> = vec![UNK_TOKEN, EOS_TOKEN];
        for s in extra_specials {
            if !specials.contains(s) {
                specials.push(s);
            }
        }
        if cap < specials.len() {
            return Err(Error::Config(format!(
                "vocabulary cap {cap} is below the {} special tokens",
                specials.len()
            )));
        }

        let mut freq: HashMap<String, u64> = HashMap::new();
        for tok in tokens {
            *freq.entry(tok.as_ref().to_string()).or_insert(0) += 1;
        }
        for s in &specials {
            freq.entry(s.to_string()).or_insert(0);
        }

        let mut ranked: Vec<(String, u64)> = freq.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

        let mut selected: Vec<(String, u64)> = Vec::with_capacity(cap.min(ranked.len()));
        let mut overflow_specials: Vec<(String, u64)> = Vec::new();
        for entry in ranked {
            if selected.len() < cap {
                selected.push(entry);
            } else if specials.contains(&entry.0.as_str()) {
                overflow_specials.push(entry);
            }
        }
        // Force specials in by evicting the lowest-ranked regular tokens.
        for special in overflow_specials {
            if let Some(pos) = selected
                .iter()
                .rposition(|(tok, _)| !specials.contains(&tok.as_str()))
            {
                selected.remove(pos);
                selected.push(special);
            }
        }
        selected.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

        let words: Vec<String> = selected.iter().map(|(t, _)| t.clone()).collect();
        let counts: Vec<u64> = selected.iter().map(|(_, c)| *c).collect();
        let ids: HashMap<String, u32> = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        let unk_id = ids[UNK_TOKEN];
        let eos_id = ids[EOS_TOKEN];
        Ok(Vocabulary {
            words,
            ids,
            counts,
            unk_id,
            eos_id,
        })
    }

    /// Builds from whitespace-tokenized lines, counting one `</s>` per line
    /// so the sentence-end token ranks by its true frequency.
    pub fn build_from_lines<'a, I>(lines: I, cap: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut tokens: Vec<String> = Vec::new();
        for line in lines {
            for tok in tokenize_line(line) {
                tokens.push(tok.to_string());
            }
            tokens.push(EOS_TOKEN.to_string());
        }
        Self::build(tokens, cap, &[])
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn unk_id(&self) -> u32 {
        self.unk_id
    }

    pub fn eos_id(&self) -> u32 {
        self.eos_id
    }

    /// Token id, or the `<unk>` id for out-of-vocabulary tokens.
    pub fn id_or_unk(&self, token: &str) -> u32 {
        self.ids.get(token).copied().unwrap_or(self.unk_id)
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// SHA-256 over the id-ordered word list; identifies the id mapping for
    /// checkpoint compatibility checks.
    pub fn hash(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        for w in &self.words {
            hasher.update(w.as_bytes());
            hasher.update(b"\n");
        }
        hasher.finalize().into()
    }

    /// Writes the vocabulary file: line 0 documents the specials, then one
    /// `token<TAB>count` line per id.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        out.push_str(&format!("#specials\t{UNK_TOKEN}\t{EOS_TOKEN}\n"));
        for (w, c) in self.words.iter().zip(&self.counts) {
            out.push_str(&format!("{w}\t{c}\n"));
        }
        let mut f = fs::File::create(path)?;
        f.write_all(out.as_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines();
        match lines.next() {
            Some(header) if header.starts_with("#specials") => {}
            _ => {
                return Err(Error::Format(format!(
                    "{}: missing #specials header line",
                    path.display()
                )))
            }
        }
        let mut words = Vec::new();
        let mut counts = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let (tok, cnt) = line.split_once('\t').ok_or_else(|| {
                Error::Format(format!(
                    "{}: line {}: expected token<TAB>count",
                    path.display(),
                    lineno + 2
                ))
            })?;
            let cnt: u64 = cnt.parse().map_err(|_| {
                Error::Format(format!(
                    "{}: line {}: bad count {cnt:?}",
                    path.display(),
                    lineno + 2
                ))
            })?;
            words.push(tok.to_string());
            counts.push(cnt);
        }
        let ids: HashMap<String, u32> = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        if ids.len() != words.len() {
            return Err(Error::Format(format!(
                "{}: duplicate tokens in vocabulary file",
                path.display()
            )));
        }
        let unk_id = *ids
            .get(UNK_TOKEN)
            .ok_or_else(|| Error::Format(format!("{}: vocabulary lacks {UNK_TOKEN}", path.display())))?;
        let eos_id = *ids
            .get(EOS_TOKEN)
            .ok_or_else(|| Error::Format(format!("{}: vocabulary lacks {EOS_TOKEN}", path.display())))?;
        Ok(Vocabulary {
            words,
            ids,
            counts,
            unk_id,
            eos_id,
        })
    }
}
