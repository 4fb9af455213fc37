use std::collections::HashMap;

use super::counts::NgramCounts;
use crate::corpus::TokenStream;
use crate::error::{Error, Result};

/// Interpolated modified Kneser-Ney model. The highest order discounts raw
/// counts; lower orders use continuation counts (distinct left extensions);
/// the unigram level interpolates with the uniform distribution over the
/// vocabulary, so every word has positive probability in every context.
#[derive(Clone, Debug, PartialEq)]
pub struct KNModel {
    pub order: usize,
    pub vocab_size: usize,
    /// probs[k-1]: k-gram -> discounted probability mass (c - D)+ / den.
    pub(crate) probs: Vec<HashMap<Box<[u32]>, f64>>,
    /// gammas[k-1]: (k-1)-length context -> back-off weight. The unigram
    /// level has the empty context.
    pub(crate) gammas: Vec<HashMap<Box<[u32]>, f64>>,
    /// True when degenerate count-of-count statistics forced the fixed
    /// 0.75 discount at some order.
    pub used_fallback_discount: bool,
}

/// Per-order discounts D1, D2, D3+ estimated from count-of-count
/// statistics (Y = n1/(n1+2 n2); D_j = j - (j+1) Y n_{j+1}/n_j), falling
/// back to a fixed 0.75 when the statistics degenerate.
fn estimate_discounts(count_of_counts: &[u64; 4]) -> ([f64; 3], bool) {
    let n = count_of_counts;
    if n[0] == 0 || n[1] == 0 {
        return ([0.75; 3], true);
    }
    let y = n[0] as f64 / (n[0] as f64 + 2.0 * n[1] as f64);
    let mut d = [0.0f64; 3];
    let mut fallback = false;
    for j in 1..=3usize {
        let nj = n[j - 1] as f64;
        let nj1 = n[j.min(3)] as f64;
        if nj == 0.0 {
            d[j - 1] = 0.75;
            fallback = true;
            continue;
        }
        let est = j as f64 - (j as f64 + 1.0) * y * nj1 / nj;
        d[j - 1] = if est.is_finite() && est >= 0.0 {
            est
        } else {
            fallback = true;
            0.75
        };
    }
    (d, fallback)
}

/// Builds the order-`counts.order` model. `vocab_size` bounds the ids that
/// may be queried and sets the uniform floor distribution.
pub fn estimate_kn(counts: &NgramCounts, vocab_size: usize) -> Result<KNModel> {
    let order = counts.order;
    if vocab_size == 0 {
        return Err(Error::Config("vocab_size must be positive".into()));
    }
    for (k, table) in counts.tables.iter().enumerate() {
        if table.is_empty() {
            return Err(Error::Data(format!(
                "no {}-grams in the corpus; stream shorter than the order?",
                k + 1
            )));
        }
    }

    let mut probs: Vec<HashMap<Box<[u32]>, f64>> = Vec::with_capacity(order);
    let mut gammas: Vec<HashMap<Box<[u32]>, f64>> = Vec::with_capacity(order);
    let mut any_fallback = false;

    for k in 1..=order {
        // Counts used at this order: raw at the top, continuation below
        // (distinct left extensions, read off the raw (k+1)-gram table).
        let used: HashMap<Box<[u32]>, u64> = if k == order {
            counts.tables[k - 1].clone()
        } else {
            let mut cont: HashMap<Box<[u32]>, u64> = HashMap::new();
            for gram in counts.tables[k].keys() {
                *cont.entry(gram[1..].into()).or_insert(0) += 1;
            }
            cont
        };

        let mut count_of_counts = [0u64; 4];
        for &c in used.values() {
            if (1..=4).contains(&c) {
                count_of_counts[(c - 1) as usize] += 1;
            }
        }
        let (d, fellback) = estimate_discounts(&count_of_counts);
        any_fallback |= fellback;

        let mut denom: HashMap<Box<[u32]>, u64> = HashMap::new();
        let mut n_by_bucket: HashMap<Box<[u32]>, [u64; 3]> = HashMap::new();
        for (gram, &c) in &used {
            let ctx: Box<[u32]> = gram[..k - 1].into();
            *denom.entry(ctx.clone()).or_insert(0) += c;
            let bucket = (c.min(3) - 1) as usize;
            n_by_bucket.entry(ctx).or_insert([0; 3])[bucket] += 1;
        }

        let mut p_table: HashMap<Box<[u32]>, f64> = HashMap::with_capacity(used.len());
        for (gram, &c) in &used {
            let den = denom[&gram[..k - 1]] as f64;
            let discount = d[(c.min(3) - 1) as usize];
            p_table.insert(gram.clone(), (c as f64 - discount).max(0.0) / den);
        }
        let mut g_table: HashMap<Box<[u32]>, f64> = HashMap::with_capacity(denom.len());
        for (ctx, &den) in &denom {
            let nb = n_by_bucket[ctx];
            let reserved = d[0] * nb[0] as f64 + d[1] * nb[1] as f64 + d[2] * nb[2] as f64;
            g_table.insert(ctx.clone(), reserved / den as f64);
        }
        probs.push(p_table);
        gammas.push(g_table);
    }

    Ok(KNModel {
        order,
        vocab_size,
        probs,
        gammas,
        used_fallback_discount: any_fallback,
    })
}

impl KNModel {
    fn prob_order(&self, k: usize, ctx: &[u32], word: u32) -> f64 {
        debug_assert_eq!(ctx.len(), k - 1);
        if k == 1 {
            let disc = self
                .probs[0]
                .get(std::slice::from_ref(&word))
                .copied()
                .unwrap_or(0.0);
            let gamma = self.gammas[0].get(&[] as &[u32]).copied().unwrap_or(1.0);
            return disc + gamma / self.vocab_size as f64;
        }
        match self.gammas[k - 1].get(ctx) {
            // Context unseen at this order: identical to the lower-order
            // query.
            None => self.prob_order(k - 1, &ctx[1..], word),
            Some(&gamma) => {
                let mut gram = Vec::with_capacity(k);
                gram.extend_from_slice(ctx);
                gram.push(word);
                let disc = self.probs[k - 1].get(gram.as_slice()).copied().unwrap_or(0.0);
                disc + gamma * self.prob_order(k - 1, &ctx[1..], word)
            }
        }
    }

    /// p(word | context), using at most the last order-1 context ids.
    /// Positive for every word below `vocab_size`.
    pub fn prob(&self, context: &[u32], word: u32) -> Result<f64> {
        if word as usize >= self.vocab_size {
            return Err(Error::Data(format!(
                "word id {word} out of range for vocabulary of {}",
                self.vocab_size
            )));
        }
        let start = context.len().saturating_sub(self.order - 1);
        let ctx = &context[start..];
        Ok(self.prob_order(ctx.len() + 1, ctx, word))
    }

    /// Per-position probabilities of the realized tokens, aligned with the
    /// neural all-token scoring: position t is conditioned on the tokens
    /// before it (truncated at the last eos when `reset_at_eos`).
    pub fn stream_probs(
        &self,
        stream: &TokenStream,
        reset_at_eos: bool,
        eos_id: u32,
    ) -> Result<Vec<f64>> {
        let ids = stream.ids();
        let mut out = Vec::with_capacity(ids.len());
        let mut sentence_start = 0usize;
        for (t, &id) in ids.iter().enumerate() {
            let ctx_start = t
                .saturating_sub(self.order - 1)
                .max(if reset_at_eos { sentence_start } else { 0 });
            out.push(self.prob(&ids[ctx_start..t], id)?);
            if reset_at_eos && id == eos_id {
                sentence_start = t + 1;
            }
        }
        Ok(out)
    }

    /// Evaluation NLL/PPL of a stream under this model alone.
    pub fn stream_nll(&self, stream: &TokenStream, reset_at_eos: bool, eos_id: u32) -> Result<f64> {
        Ok(self
            .stream_probs(stream, reset_at_eos, eos_id)?
            .iter()
            .map(|p| -p.ln())
            .sum())
    }
}
