use std::collections::HashMap;

use crate::corpus::TokenStream;
use crate::error::{Error, Result};

/// Raw n-gram occurrence tables for orders 1..=order. The sentence-end
/// token counts as a regular word; with `reset_at_eos` no window spans
/// across one (an eos may only be the final element of a gram).
#[derive(Clone, Debug)]
pub struct NgramCounts {
    pub order: usize,
    /// tables[k-1] maps k-grams to occurrence counts.
    pub tables: Vec<HashMap<Box<[u32]>, u64>>,
}

pub fn count_ngrams(
    stream: &TokenStream,
    order: usize,
    reset_at_eos: bool,
    eos_id: u32,
) -> Result<NgramCounts> {
    if order == 0 {
        return Err(Error::Config("n-gram order must be at least 1".into()));
    }
    let ids = stream.ids();
    let mut tables: Vec<HashMap<Box<[u32]>, u64>> = vec![HashMap::new(); order];
    for t in 0..ids.len() {
        for k in 1..=order {
            if t + 1 < k {
                break;
            }
            let gram = &ids[t + 1 - k..=t];
            if reset_at_eos && gram[..k - 1].contains(&eos_id) {
                continue;
            }
            *tables[k - 1].entry(gram.into()).or_insert(0) += 1;
        }
    }
    Ok(NgramCounts { order, tables })
}

impl NgramCounts {
    pub fn count(&self, gram: &[u32]) -> u64 {
        self.tables
            .get(gram.len() - 1)
            .and_then(|t| t.get(gram))
            .copied()
            .unwrap_or(0)
    }

    pub fn total(&self, order: usize) -> u64 {
        self.tables[order - 1].values().sum()
    }
}
