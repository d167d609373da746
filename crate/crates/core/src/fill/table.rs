use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{rank_candidates, Candidate, ClozeQuery, Embedder, FillModel};
use crate::error::{Error, Result};

/// A static fill table: template → candidates. Unknown templates have no
/// candidates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FillTable {
    pub templates: BTreeMap<String, Vec<Candidate>>,
}

impl FillTable {
    pub fn parse(input: &str) -> Result<Self> {
        let table: FillTable = serde_json::from_str(input)?;
        for (template, candidates) in &table.templates {
            ClozeQuery::new(template.clone(), 1)?;
            if let Some(c) = candidates.iter().find(|c| !(0.0..=1.0).contains(&c.score)) {
                return Err(Error::invalid(
                    "fill table",
                    format!("score {} of {:?} outside [0, 1]", c.score, c.lemma),
                ));
            }
        }
        Ok(table)
    }
}

/// In-process fill model answering from a [`FillTable`].
#[derive(Debug, Clone, Default)]
pub struct TableFillModel {
    table: FillTable,
}

impl TableFillModel {
    pub fn new(table: FillTable) -> Self {
        TableFillModel { table }
    }
}

impl FillModel for TableFillModel {
    fn fill(&self, query: &ClozeQuery) -> Result<Vec<Candidate>> {
        let mut candidates = self
            .table
            .templates
            .get(query.template())
            .cloned()
            .unwrap_or_default();
        rank_candidates(&mut candidates, query.top_n());
        Ok(candidates)
    }
}

/// Embeds text as counts of characters hashed into `dim` buckets
/// (`codepoint % dim`). Cheap and deterministic; used for loopback testing.
#[derive(Debug, Clone, Copy)]
pub struct CharBagEmbedder {
    pub dim: usize,
}

impl Embedder for CharBagEmbedder {
    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        if self.dim == 0 {
            return Err(Error::invalid("embedder", "dimension must be at least 1"));
        }
        let mut v = vec![0.0; self.dim];
        for c in text.chars() {
            v[c as usize % self.dim] += 1.0;
        }
        Ok(v)
    }
}
