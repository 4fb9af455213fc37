use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::model::KNModel;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"SRNNKNLM";
const VERSION: u8 = 1;

fn sorted_entries(table: &HashMap<Box<[u32]>, f64>) -> Vec<(&[u32], f64)> {
    let mut entries: Vec<(&[u32], f64)> = table.iter().map(|(k, &v)| (k.as_ref(), v)).collect();
    entries.sort_by(|a, b| a.0.cmp(b.0));
    entries
}

fn write_table(buf: &mut Vec<u8>, table: &HashMap<Box<[u32]>, f64>, key_len: usize) {
    buf.extend_from_slice(&(table.len() as u64).to_le_bytes());
    for (gram, v) in sorted_entries(table) {
        debug_assert_eq!(gram.len(), key_len);
        for &id in gram.iter() {
            buf.extend_from_slice(&id.to_le_bytes());
        }
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

fn read_table(
    bytes: &[u8],
    pos: &mut usize,
    key_len: usize,
    path: &Path,
) -> Result<HashMap<Box<[u32]>, f64>> {
    let need = |pos: usize, n: usize| -> Result<()> {
        if pos + n > bytes.len() {
            return Err(Error::Format(format!(
                "{}: truncated at byte {pos} in n-gram table",
                path.display()
            )));
        }
        Ok(())
    };
    need(*pos, 8)?;
    let count = u64::from_le_bytes(bytes[*pos..*pos + 8].try_into().unwrap()) as usize;
    *pos += 8;
    let mut table = HashMap::with_capacity(count);
    for _ in 0..count {
        need(*pos, key_len * 4 + 8)?;
        let mut gram = Vec::with_capacity(key_len);
        for _ in 0..key_len {
            gram.push(u32::from_le_bytes(bytes[*pos..*pos + 4].try_into().unwrap()));
            *pos += 4;
        }
        let v = f64::from_le_bytes(bytes[*pos..*pos + 8].try_into().unwrap());
        *pos += 8;
        table.insert(gram.into_boxed_slice(), v);
    }
    Ok(table)
}

impl KNModel {
    /// Sorted binary tables with a magic/version header.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.push(VERSION);
        buf.push(self.order as u8);
        buf.extend_from_slice(&(self.vocab_size as u32).to_le_bytes());
        buf.push(self.used_fallback_discount as u8);
        for k in 1..=self.order {
            write_table(&mut buf, &self.probs[k - 1], k);
            write_table(&mut buf, &self.gammas[k - 1], k - 1);
        }
        let mut f = fs::File::create(path)?;
        f.write_all(&buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.len() < 15 || &bytes[..8] != MAGIC {
            return Err(Error::Format(format!(
                "{}: not a KN model file (bad magic)",
                path.display()
            )));
        }
        if bytes[8] != VERSION {
            return Err(Error::Format(format!(
                "{}: unsupported KN model version {}",
                path.display(),
                bytes[8]
            )));
        }
        let order = bytes[9] as usize;
        let vocab_size = u32::from_le_bytes(bytes[10..14].try_into().unwrap()) as usize;
        let used_fallback_discount = bytes[14] != 0;
        let mut pos = 15usize;
        let mut probs = Vec::with_capacity(order);
        let mut gammas = Vec::with_capacity(order);
        for k in 1..=order {
            probs.push(read_table(&bytes, &mut pos, k, path)?);
            gammas.push(read_table(&bytes, &mut pos, k - 1, path)?);
        }
        if pos != bytes.len() {
            return Err(Error::Format(format!(
                "{}: {} trailing bytes after KN tables",
                path.display(),
                bytes.len() - pos
            )));
        }
        Ok(KNModel {
            order,
            vocab_size,
            probs,
            gammas,
            used_fallback_discount,
        })
    }

    /// ARPA-style text export. Probabilities are the fully interpolated
    /// values and back-off weights are the interpolation gammas, which
    /// gives an equivalent back-off model. The unigram section covers the
    /// whole vocabulary.
    pub fn export_arpa(&self, word: impl Fn(u32) -> String, path: &Path) -> Result<()> {
        let f = fs::File::create(path)?;
        let mut out = BufWriter::new(f);
        writeln!(out, "\\data\\")?;
        writeln!(out, "ngram 1={}", self.vocab_size)?;
        for k in 2..=self.order {
            writeln!(out, "ngram {k}={}", self.probs[k - 1].len())?;
        }
        let log10 = |p: f64| {
            if p > 0.0 {
                p.log10()
            } else {
                -99.0
            }
        };

        writeln!(out, "\n\\1-grams:")?;
        for id in 0..self.vocab_size as u32 {
            let p = self.prob(&[], id)?;
            let bow = self
                .gammas
                .get(1)
                .and_then(|g| g.get(std::slice::from_ref(&id)))
                .copied();
            match bow {
                Some(b) => writeln!(out, "{:.7}\t{}\t{:.7}", log10(p), word(id), log10(b))?,
                None => writeln!(out, "{:.7}\t{}", log10(p), word(id))?,
            }
        }

        for k in 2..=self.order {
            writeln!(out, "\n\\{k}-grams:")?;
            let mut grams: Vec<&Box<[u32]>> = self.probs[k - 1].keys().collect();
            grams.sort();
            for gram in grams {
                let (ctx, w) = gram.split_at(k - 1);
                let p = self.prob_full(ctx, w[0])?;
                let words: Vec<String> = gram.iter().map(|&id| word(id)).collect();
                let bow = self
                    .gammas
                    .get(k)
                    .and_then(|g| g.get(gram))
                    .copied();
                match bow {
                    Some(b) => writeln!(
                        out,
                        "{:.7}\t{}\t{:.7}",
                        log10(p),
                        words.join(" "),
                        log10(b)
                    )?,
                    None => writeln!(out, "{:.7}\t{}", log10(p), words.join(" "))?,
                }
            }
        }
        writeln!(out, "\n\\end\\")?;
        Ok(())
    }

    fn prob_full(&self, ctx: &[u32], word: u32) -> Result<f64> {
        self.prob(ctx, word)
    }
}
