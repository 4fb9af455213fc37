//! Text ingestion: vocabulary construction with a frequency cap, `<unk>`
//! mapping, integer encoding, and mini-batch preparation.

mod batch;
mod stream;
mod vocab;

pub use batch::{make_batches, Batch, BatchIter};
pub use stream::{
    corpus_stats, decode, encode_line, encode_lines, CorpusStats, TokenStream,
};
pub use vocab::{tokenize_line, Vocabulary, EOS_TOKEN, UNK_TOKEN};
