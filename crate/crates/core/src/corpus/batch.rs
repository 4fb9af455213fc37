use super::stream::TokenStream;
use crate::error::{Error, Result};

/// One training batch: `lanes x len` input ids and the same shape of targets
/// shifted one position ahead in the underlying stream. Lanes are contiguous
/// stream segments, so recurrent state carries across consecutive batches;
/// `first` marks the initial batch of a pass (fresh state).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Batch {
    pub inputs: Vec<u32>,
    pub targets: Vec<u32>,
    pub lanes: usize,
    pub len: usize,
    pub first: bool,
}

impl Batch {
    pub fn input(&self, lane: usize, pos: usize) -> u32 {
        self.inputs[lane * self.len + pos]
    }

    pub fn target(&self, lane: usize, pos: usize) -> u32 {
        self.targets[lane * self.len + pos]
    }
}

/// Iterator over batches. The stream splits into `lanes` contiguous segments
/// of equal length (a remainder shorter than `lanes` tokens is dropped);
/// each step yields `unroll`-length windows, with a final ragged batch for
/// the leftover positions.
pub struct BatchIter<'a> {
    ids: &'a [u32],
    lanes: usize,
    unroll: usize,
    seg_len: usize,
    offset: usize,
}

pub fn make_batches(stream: &TokenStream, lanes: usize, unroll: usize) -> Result<BatchIter<'_>> {
    if lanes == 0 || unroll == 0 {
        return Err(Error::Config("lanes and unroll must be at least 1".into()));
    }
    if stream.len() < lanes * (unroll + 1) {
        return Err(Error::Data(format!(
            "stream of {} tokens is too short for {lanes} lanes with unroll {unroll}",
            stream.len()
        )));
    }
    Ok(BatchIter {
        ids: stream.ids(),
        lanes,
        unroll,
        seg_len: stream.len() / lanes,
        offset: 0,
    })
}

impl Iterator for BatchIter<'_> {
    type Item = Batch;

    fn next(&mut self) -> Option<Batch> {
        // seg_len tokens per lane give seg_len - 1 prediction positions.
        let positions = self.seg_len - 1;
        if self.offset >= positions {
            return None;
        }
        let len = self.unroll.min(positions - self.offset);
        let mut inputs = Vec::with_capacity(self.lanes * len);
        let mut targets = Vec::with_capacity(self.lanes * len);
        for lane in 0..self.lanes {
            let base = lane * self.seg_len + self.offset;
            inputs.extend_from_slice(&self.ids[base..base + len]);
            targets.extend_from_slice(&self.ids[base + 1..base + len + 1]);
        }
        let batch = Batch {
            inputs,
            targets,
            lanes: self.lanes,
            len,
            first: self.offset == 0,
        };
        self.offset += len;
        Some(batch)
    }
}
