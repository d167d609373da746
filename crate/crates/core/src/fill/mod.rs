//! Cloze (fill-mask) and embedding capabilities used by the matchers.
//!
//! [`CooccurrenceModel`] is the built-in fill model, counted from dependency
//! records. [`TableFillModel`] answers from a static table. Anything else
//! attaches as an external process through [`plugin`].

mod cooccurrence;
pub mod plugin;
mod table;

use serde::{Deserialize, Serialize};

pub use cooccurrence::{CooccurrenceModel, SlotKind};
pub use table::{CharBagEmbedder, FillTable, TableFillModel};

use crate::error::{Error, Result};

pub const MASK: &str = "[MASK]";

/// A template with exactly one `[MASK]` and the number of candidates wanted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClozeQuery {
    template: String,
    top_n: usize,
}

impl ClozeQuery {
    pub fn new(template: impl Into<String>, top_n: usize) -> Result<Self> {
        let template = template.into();
        let masks = template.matches(MASK).count();
        if masks != 1 {
            return Err(Error::Template {
                template,
                msg: format!("expected exactly one {MASK}, found {masks}"),
            });
        }
        if top_n == 0 {
            return Err(Error::invalid("cloze query", "top_n must be at least 1"));
        }
        Ok(ClozeQuery { template, top_n })
    }

    pub fn template(&self) -> &str {
        &self.template
    }

    pub fn top_n(&self) -> usize {
        self.top_n
    }

    /// Whitespace tokens of the template other than the mask.
    pub fn content_tokens(&self) -> impl Iterator<Item = &str> {
        self.template.split(MASK).flat_map(str::split_whitespace)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub lemma: String,
    pub score: f64,
}

/// Sorts by score descending, then lemma ascending, and keeps `top_n`.
pub fn rank_candidates(candidates: &mut Vec<Candidate>, top_n: usize) {
    candidates.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.lemma.cmp(&b.lemma))
    });
    candidates.truncate(top_n);
}

pub trait FillModel: Send + Sync {
    /// Ranked candidates for the masked slot; may be shorter than `top_n`.
    fn fill(&self, query: &ClozeQuery) -> Result<Vec<Candidate>>;
}

pub trait Embedder: Send + Sync {
    fn embed(&self, text: &str) -> Result<Vec<f64>>;
}

impl<T: FillModel + ?Sized> FillModel for &T {
    fn fill(&self, query: &ClozeQuery) -> Result<Vec<Candidate>> {
        (**self).fill(query)
    }
}

impl<T: Embedder + ?Sized> Embedder for &T {
    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        (**self).embed(text)
    }
}

/// Cosine similarity; 0 when either vector is all zeros. Vectors of
/// different length are an error.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(
            "embedding",
            format!("dimension mismatch {} vs {}", a.len(), b.len()),
        ));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok(dot / (na * nb))
}
