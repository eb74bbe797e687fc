//! Fine-tuning data and few-shot retrieval: next-token records, masked
//! fill-in-the-middle examples and a cosine index over chart summaries.

mod embed;
mod index;
mod mask;
mod records;

pub use embed::{cosine, norm, normalized, tokens, BagOfWords, Embedder, EmbedderError, EmbeddingScalar};
pub use index::{
    CorpusItem, Hit, IndexError, IndexWarning, RetrievalIndex, RetrieveError, DEFAULT_K, INDEX_FORMAT, INDEX_VERSION,
};
pub use mask::{fim_examples, is_connected_cluster, mask_subgraph, FimExample, MaskError, MaskParams};
pub use records::{ntp_sequence, read_records, write_records, RecordError, TrainingRecord};
