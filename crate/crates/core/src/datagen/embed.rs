//! Text embedders for retrieval.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

/// Element type of an embedding vector: f32 or f64.
pub trait EmbeddingScalar: Float + FromPrimitive + Debug + Serialize + DeserializeOwned + Send + Sync + 'static {}

impl EmbeddingScalar for f32 {}
impl EmbeddingScalar for f64 {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbedderError {
    #[error("embedding service failed: {0}")]
    Service(String),
    #[error("embedding has dimension {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("embedding is not finite")]
    NotFinite,
}

pub trait Embedder<F: EmbeddingScalar> {
    /// Identifies the embedding space; indexes remember it.
    fn id(&self) -> String;
    fn embed(&self, text: &str) -> Result<Vec<F>, EmbedderError>;
}

/// L2-normalized term frequencies of lowercased alphanumeric tokens, hashed
/// into a fixed number of buckets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BagOfWords {
    pub dimension: usize,
}

impl Default for BagOfWords {
    fn default() -> Self {
        BagOfWords { dimension: 1024 }
    }
}

/// Lowercased maximal runs of alphanumeric characters.
pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// FNV-1a, fixed so that bucket assignment never changes between builds.
fn bucket(token: &str, dimension: usize) -> usize {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in token.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    (h % dimension as u64) as usize
}

impl<F: EmbeddingScalar> Embedder<F> for BagOfWords {
    fn id(&self) -> String {
        format!("bow-fnv-{}", self.dimension)
    }

    fn embed(&self, text: &str) -> Result<Vec<F>, EmbedderError> {
        let mut v = vec![F::zero(); self.dimension];
        for t in tokens(text) {
            let i = bucket(&t, self.dimension);
            v[i] = v[i] + F::one();
        }
        Ok(normalized(v))
    }
}

pub fn norm<F: EmbeddingScalar>(v: &[F]) -> F {
    v.iter().fold(F::zero(), |acc, &x| acc + x * x).sqrt()
}

/// Scales to unit length; the zero vector is returned unchanged.
pub fn normalized<F: EmbeddingScalar>(mut v: Vec<F>) -> Vec<F> {
    let n = norm(&v);
    if n > F::zero() {
        v.iter_mut().for_each(|x| *x = *x / n);
    }
    v
}

/// Cosine similarity; zero when either vector is zero.
pub fn cosine<F: EmbeddingScalar>(a: &[F], b: &[F]) -> F {
    let (na, nb) = (norm(a), norm(b));
    if na == F::zero() || nb == F::zero() {
        return F::zero();
    }
    let dot = a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + x * y);
    dot / (na * nb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_and_disjoint() {
        let e = BagOfWords::default();
        let a: Vec<f64> = e.embed("Conveyor motor").unwrap();
        let b: Vec<f64> = e.embed("conveyor  MOTOR!").unwrap();
        assert!((cosine(&a, &b) - 1.0).abs() < 1e-12);
        let c: Vec<f64> = e.embed("oven temperature").unwrap();
        assert_eq!(cosine(&a, &c), 0.0);
    }

    #[test]
    fn tokenizer() {
        let t: Vec<String> = tokens("Fill-tank #2, then HEAT.").collect();
        assert_eq!(t, ["fill", "tank", "2", "then", "heat"]);
    }
}
