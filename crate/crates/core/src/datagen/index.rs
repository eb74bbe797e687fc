//! Cosine-similarity retrieval over chart summaries.

use std::cmp::Ordering;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::embed::{cosine, norm, Embedder, EmbedderError, EmbeddingScalar};

pub const INDEX_FORMAT: &str = "sfcgen-retrieval-index";
pub const INDEX_VERSION: u32 = 1;

/// Number of examples retrieved when the caller does not say.
pub const DEFAULT_K: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: EmbeddingScalar")]
pub struct CorpusItem<F> {
    pub chart_id: String,
    pub document: String,
    pub summary: String,
    pub embedding: Vec<F>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: EmbeddingScalar")]
pub struct RetrievalIndex<F> {
    pub format: String,
    pub version: u32,
    pub embedder: String,
    pub dimension: usize,
    pub items: Vec<CorpusItem<F>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexWarning {
    pub chart_id: String,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum IndexError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("index file is malformed: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported index format {format} version {version}")]
    Version { format: String, version: u32 },
    #[error("item {chart_id} has dimension {got}, index has {expected}")]
    Dimension { chart_id: String, expected: usize, got: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum RetrieveError {
    #[error("index is empty")]
    EmptyIndex,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("index was built with embedder {index}, query uses {query}")]
    EmbedderMismatch { index: String, query: String },
    #[error(transparent)]
    Embed(#[from] EmbedderError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hit<'a, F> {
    pub item: &'a CorpusItem<F>,
    pub score: F,
}

impl<F: EmbeddingScalar> RetrievalIndex<F> {
    pub fn new(embedder: impl Into<String>, dimension: usize) -> Self {
        RetrievalIndex {
            format: INDEX_FORMAT.to_string(),
            version: INDEX_VERSION,
            embedder: embedder.into(),
            dimension,
            items: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Embeds each summary. Items whose summary is empty or whose embedding
    /// fails, is zero, or has the wrong dimension are skipped with a warning.
    pub fn build<I>(items: I, embedder: &dyn Embedder<F>) -> (Self, Vec<IndexWarning>)
    where
        I: IntoIterator<Item = (String, String, String)>,
    {
        let mut index = RetrievalIndex::new(embedder.id(), 0);
        let mut warnings = Vec::new();
        for (chart_id, document, summary) in items {
            let mut warn = |message: String| {
                warnings.push(IndexWarning {
                    chart_id: chart_id.clone(),
                    message,
                })
            };
            if summary.trim().is_empty() {
                warn("empty summary".into());
                continue;
            }
            let embedding = match embedder.embed(&summary) {
                Ok(v) => v,
                Err(e) => {
                    warn(e.to_string());
                    continue;
                }
            };
            let n = norm(&embedding);
            if !n.is_finite() || n == F::zero() {
                warn("embedding has zero or non-finite norm".into());
                continue;
            }
            if index.items.is_empty() {
                index.dimension = embedding.len();
            } else if embedding.len() != index.dimension {
                warn(
                    EmbedderError::Dimension {
                        expected: index.dimension,
                        got: embedding.len(),
                    }
                    .to_string(),
                );
                continue;
            }
            index.items.push(CorpusItem {
                chart_id,
                document,
                summary,
                embedding,
            });
        }
        (index, warnings)
    }

    /// Top `k` items by descending cosine, ties broken by chart id.
    pub fn rank(&self, query: &[F], k: usize) -> Result<Vec<Hit<'_, F>>, RetrieveError> {
        if self.items.is_empty() {
            return Err(RetrieveError::EmptyIndex);
        }
        if k == 0 {
            return Err(RetrieveError::ZeroK);
        }
        if query.len() != self.dimension {
            return Err(EmbedderError::Dimension {
                expected: self.dimension,
                got: query.len(),
            }
            .into());
        }
        let mut hits: Vec<Hit<'_, F>> = self
            .items
            .iter()
            .map(|item| Hit {
                item,
                score: cosine(query, &item.embedding),
            })
            .collect();
        hits.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.item.chart_id.cmp(&b.item.chart_id))
        });
        hits.truncate(k);
        Ok(hits)
    }

    pub fn retrieve(&self, query: &str, k: usize, embedder: &dyn Embedder<F>) -> Result<Vec<Hit<'_, F>>, RetrieveError> {
        if embedder.id() != self.embedder {
            return Err(RetrieveError::EmbedderMismatch {
                index: self.embedder.clone(),
                query: embedder.id(),
            });
        }
        if self.items.is_empty() {
            return Err(RetrieveError::EmptyIndex);
        }
        let q = embedder.embed(query)?;
        self.rank(&q, k)
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<(), IndexError> {
        let mut out = BufWriter::new(out);
        serde_json::to_writer(&mut out, self)?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(input: R) -> Result<Self, IndexError> {
        let index: RetrievalIndex<F> = serde_json::from_reader(BufReader::new(input))?;
        if index.format != INDEX_FORMAT || index.version != INDEX_VERSION {
            return Err(IndexError::Version {
                format: index.format,
                version: index.version,
            });
        }
        if let Some(bad) = index.items.iter().find(|i| i.embedding.len() != index.dimension) {
            return Err(IndexError::Dimension {
                chart_id: bad.chart_id.clone(),
                expected: index.dimension,
                got: bad.embedding.len(),
            });
        }
        Ok(index)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), IndexError> {
        self.write_to(File::create(path)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IndexError> {
        Self::read_from(File::open(path)?)
    }
}
