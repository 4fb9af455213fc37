//! Trained-model inspection: per-position histograms of the
//! projection-to-hidden weights and nearest-neighbor queries in the
//! embedding and context-weight spaces.

use std::fmt::Write as _;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::model::{ContextWeights, Mode, Parameters};
use crate::numerics::{Matrix, Scalar};

/// Histogram request over one projection-to-hidden matrix V_i
/// (1-based position, 1 = most recent word).
#[derive(Clone, Debug)]
pub struct HistogramSpec {
    pub position: usize,
    pub bins: usize,
    /// Value range; when absent the tensor's own min/max is used.
    pub range: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HistogramRow {
    pub bin_center: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub position: usize,
    pub rows: Vec<HistogramRow>,
    pub mean_abs: f64,
    pub variance: f64,
    pub elements: usize,
}

/// Histogram of one V_i. Frequencies always sum to the tensor's element
/// count; values outside an explicit range clamp into the edge bins.
pub fn weight_histogram<T: Scalar>(
    params: &Parameters<T>,
    spec: &HistogramSpec,
) -> Result<Histogram> {
    if spec.position == 0 || spec.position > params.win.len() {
        return Err(Error::Config(format!(
            "position {} out of range: model has {} window matrices",
            spec.position,
            params.win.len()
        )));
    }
    if spec.bins == 0 {
        return Err(Error::Config("bin count must be positive".into()));
    }
    let tensor = &params.win[spec.position - 1];
    let values: Vec<f64> = tensor.data().iter().map(|v| v.to_f64()).collect();
    let (lo, hi) = match spec.range {
        Some((lo, hi)) if lo < hi => (lo, hi),
        Some(_) => return Err(Error::Config("empty histogram range".into())),
        None => {
            let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if lo == hi {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        }
    };
    let width = (hi - lo) / spec.bins as f64;
    let mut counts = vec![0usize; spec.bins];
    for &v in &values {
        let idx = (((v - lo) / width) as isize).clamp(0, spec.bins as isize - 1) as usize;
        counts[idx] += 1;
    }
    let n = values.len() as f64;
    let mean: f64 = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let mean_abs = values.iter().map(|v| v.abs()).sum::<f64>() / n;
    Ok(Histogram {
        position: spec.position,
        rows: counts
            .into_iter()
            .enumerate()
            .map(|(i, count)| HistogramRow {
                bin_center: lo + (i as f64 + 0.5) * width,
                count,
            })
            .collect(),
        mean_abs,
        variance,
        elements: tensor.len(),
    })
}

/// Mean absolute weight per window position, V_1 first. The decay of this
/// sequence over positions is the trained-model signature of interest.
pub fn mean_abs_by_position<T: Scalar>(params: &Parameters<T>) -> Vec<f64> {
    params
        .win
        .iter()
        .map(|v| v.data().iter().map(|x| x.to_f64().abs()).sum::<f64>() / v.len() as f64)
        .collect()
}

/// `position,bin_center,count` rows for one or more histograms.
pub fn histograms_to_csv(histograms: &[Histogram]) -> String {
    let mut out = String::from("position,bin_center,count\n");
    for h in histograms {
        for row in &h.rows {
            let _ = writeln!(out, "{},{},{}", h.position, row.bin_center, row.count);
        }
    }
    out
}

/// Vector space a neighbor query runs in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NeighborSpace {
    /// Word embeddings U_w, ranked by descending cosine similarity.
    Embedding,
    /// Context weights C_w, ranked by ascending Euclidean distance
    /// (word-dependent models only).
    Context,
}

#[derive(Clone, Debug)]
pub struct Neighbor {
    pub word: String,
    pub id: u32,
    pub score: f64,
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Top-k neighbors of `query` in the chosen space. The query word is
/// excluded from its own result list; ties break by ascending word id.
pub fn nearest_neighbors<T: Scalar>(
    params: &Parameters<T>,
    mode: Mode,
    vocab: &Vocabulary,
    query: &str,
    k: usize,
    space: NeighborSpace,
) -> Result<Vec<Neighbor>> {
    let query_id = vocab
        .id(query)
        .ok_or_else(|| Error::Data(format!("query word {query:?} is out of vocabulary")))?;
    let table: &Matrix<T> = match space {
        NeighborSpace::Embedding => &params.embed,
        NeighborSpace::Context => match (&params.context, mode) {
            (ContextWeights::PerWord(c), _) => c,
            (_, Mode::WiSrnn) => {
                return Err(Error::Config(
                    "this model has a single shared context vector; per-word context \
                     neighbors need a word-dependent model"
                        .into(),
                ))
            }
            _ => {
                return Err(Error::Config(
                    "context-space neighbors need a word-dependent model".into(),
                ))
            }
        },
    };
    if query_id as usize >= table.rows() {
        return Err(Error::Data(format!("query id {query_id} out of range")));
    }
    let q: Vec<f64> = table.row(query_id as usize).iter().map(|v| v.to_f64()).collect();
    let mut scored: Vec<(u32, f64)> = (0..table.rows() as u32)
        .filter(|&id| id != query_id)
        .map(|id| {
            let row: Vec<f64> = table.row(id as usize).iter().map(|v| v.to_f64()).collect();
            let score = match space {
                NeighborSpace::Embedding => cosine(&q, &row),
                NeighborSpace::Context => euclidean(&q, &row),
            };
            (id, score)
        })
        .collect();
    match space {
        NeighborSpace::Embedding => scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.0.cmp(&b.0))
        }),
        NeighborSpace::Context => scored.sort_by(|a, b| {
            a.1.partial_cmp(&b.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.0.cmp(&b.0))
        }),
    }
    Ok(scored
        .into_iter()
        .take(k)
        .map(|(id, score)| Neighbor {
            word: vocab.word(id).to_string(),
            id,
            score,
        })
        .collect())
}

/// `rank,word,score` rows.
pub fn neighbors_to_csv(neighbors: &[Neighbor]) -> String {
    let mut out = String::from("rank,word,score\n");
    for (i, n) in neighbors.iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", i + 1, n.word, n.score);
    }
    out
}
