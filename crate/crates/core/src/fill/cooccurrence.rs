use std::collections::{BTreeMap, HashMap};

use super::{rank_candidates, Candidate, ClozeQuery, FillModel};
use crate::corpus::{DependencyRecord, HeadRule};
use crate::error::Result;

/// Counts of (predicate lemma, filler head lemma) pairs.
///
/// A query is answered from the template's content tokens. If any token is
/// a known predicate, the mask is a dependent slot and fillers `f` are
/// ranked by the mean of `P(f | p)` over the predicate tokens. Otherwise the
/// mask is a predicate slot and predicates `p` are ranked by the mean of
/// `P(f | p)` over the tokens that are known fillers. In both directions
/// `P(f | p) = pair_count(p, f) / predicate_total(p)`. Unknown tokens are
/// ignored; a template without known tokens yields no candidates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CooccurrenceModel {
    by_predicate: BTreeMap<String, BTreeMap<String, u64>>,
    by_filler: BTreeMap<String, BTreeMap<String, u64>>,
    predicate_totals: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    Predicate,
    Filler,
}

impl CooccurrenceModel {
    pub fn train(records: &[DependencyRecord]) -> Self {
        Self::train_with(records, HeadRule::default())
    }

    pub fn train_with(records: &[DependencyRecord], head: HeadRule) -> Self {
        let mut model = CooccurrenceModel::default();
        for r in records {
            model.add(&r.sense.lexeme_group, head.apply(&r.filler_lemma), 1);
        }
        model
    }

    fn add(&mut self, predicate: &str, filler: &str, n: u64) {
        *self
            .by_predicate
            .entry(predicate.to_owned())
            .or_default()
            .entry(filler.to_owned())
            .or_default() += n;
        *self
            .by_filler
            .entry(filler.to_owned())
            .or_default()
            .entry(predicate.to_owned())
            .or_default() += n;
        *self
            .predicate_totals
            .entry(predicate.to_owned())
            .or_default() += n;
    }

    pub fn pair_count(&self, predicate: &str, filler: &str) -> u64 {
        self.by_predicate
            .get(predicate)
            .and_then(|row| row.get(filler))
            .copied()
            .unwrap_or(0)
    }

    pub fn predicate_total(&self, predicate: &str) -> u64 {
        self.predicate_totals.get(predicate).copied().unwrap_or(0)
    }

    /// All `((predicate, filler), count)` entries, ordered.
    pub fn pairs(&self) -> impl Iterator<Item = ((&str, &str), u64)> {
        self.by_predicate
            .iter()
            .flat_map(|(p, row)| row.iter().map(move |(f, &n)| ((p.as_str(), f.as_str()), n)))
    }

    pub fn predicate_totals(&self) -> impl Iterator<Item = (&str, u64)> {
        self.predicate_totals.iter().map(|(p, &n)| (p.as_str(), n))
    }

    pub fn is_empty(&self) -> bool {
        self.predicate_totals.is_empty()
    }

    pub fn is_predicate(&self, token: &str) -> bool {
        self.predicate_totals.contains_key(token)
    }

    pub fn is_filler(&self, token: &str) -> bool {
        self.by_filler.contains_key(token)
    }

    /// Which kind of word the mask stands for, or `None` when no content
    /// token is known.
    pub fn slot_kind(&self, query: &ClozeQuery) -> Option<SlotKind> {
        let mut any_filler = false;
        for t in query.content_tokens() {
            if self.is_predicate(t) {
                return Some(SlotKind::Filler);
            }
            any_filler |= self.is_filler(t);
        }
        any_filler.then_some(SlotKind::Predicate)
    }

    fn p_filler_given(&self, predicate: &str, count: u64) -> f64 {
        count as f64 / self.predicate_totals[predicate] as f64
    }
}

impl FillModel for CooccurrenceModel {
    fn fill(&self, query: &ClozeQuery) -> Result<Vec<Candidate>> {
        let mut scores: HashMap<&str, f64> = HashMap::new();
        let n_conditioning = match self.slot_kind(query) {
            None => return Ok(Vec::new()),
            Some(SlotKind::Filler) => {
                let mut n = 0;
                for p in query.content_tokens().filter(|t| self.is_predicate(t)) {
                    n += 1;
                    for (f, &c) in &self.by_predicate[p] {
                        *scores.entry(f).or_default() += self.p_filler_given(p, c);
                    }
                }
                n
            }
            Some(SlotKind::Predicate) => {
                let mut n = 0;
                for f in query.content_tokens().filter(|t| self.is_filler(t)) {
                    n += 1;
                    for (p, &c) in &self.by_filler[f] {
                        *scores.entry(p).or_default() += self.p_filler_given(p, c);
                    }
                }
                n
            }
        };
        let mut candidates: Vec<Candidate> = scores
            .into_iter()
            .map(|(lemma, s)| Candidate {
                lemma: lemma.to_owned(),
                score: s / n_conditioning as f64,
            })
            .collect();
        rank_candidates(&mut candidates, query.top_n());
        Ok(candidates)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{RoleLabel, SenseKey};

    fn rec(pred: &str, filler: &str) -> DependencyRecord {
        DependencyRecord {
            sentence_id: "s".into(),
            sense: SenseKey::new(pred, "C").unwrap(),
            role: RoleLabel::new("Object").unwrap(),
            filler_lemma: filler.into(),
            filler_surface: filler.into(),
            filler_pos: "NOUN".into(),
            flags: Default::default(),
        }
    }

    fn toy() -> CooccurrenceModel {
        CooccurrenceModel::train(&[
            rec("готовить", "обед"),
            rec("готовить", "обед"),
            rec("готовить", "ужин"),
        ])
    }

    #[test]
    fn hand_tally() {
        let m = toy();
        let pairs: Vec<_> = m.pairs().collect();
        assert_eq!(
            pairs,
            [(("готовить", "обед"), 2), (("готовить", "ужин"), 1)]
        );
        assert_eq!(m.predicate_total("готовить"), 3);
    }

    #[test]
    fn empty_model() {
        let m = CooccurrenceModel::train(&[]);
        assert!(m.is_empty());
        let q = ClozeQuery::new("[MASK] обед", 5).unwrap();
        assert!(m.fill(&q).unwrap().is_empty());
    }

    #[test]
    fn predicate_slot_score() {
        let q = ClozeQuery::new("[MASK] обед", 10).unwrap();
        let got = toy().fill(&q).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].lemma, "готовить");
        assert_eq!(got[0].score, 2.0 / 3.0);
    }

    #[test]
    fn filler_slot_score() {
        let q = ClozeQuery::new("готовить [MASK]", 10).unwrap();
        let got = toy().fill(&q).unwrap();
        assert_eq!(
            got[0],
            Candidate {
                lemma: "обед".into(),
                score: 2.0 / 3.0
            }
        );
        assert_eq!(
            got[1],
            Candidate {
                lemma: "ужин".into(),
                score: 1.0 / 3.0
            }
        );
    }

    #[test]
    fn phrase_filler_uses_head() {
        let m = CooccurrenceModel::train(&[rec("встать", "на заря")]);
        assert_eq!(m.pair_count("встать", "заря"), 1);
        let q = ClozeQuery::new("[MASK] на заря", 3).unwrap();
        assert_eq!(m.fill(&q).unwrap()[0].lemma, "встать");
        let whole = CooccurrenceModel::train_with(&[rec("встать", "на заря")], HeadRule::Whole);
        assert_eq!(whole.pair_count("встать", "на заря"), 1);
    }

    #[test]
    fn top_n_truncates() {
        let m = CooccurrenceModel::train(&[
            rec("a", "x"),
            rec("b", "x"),
            rec("b", "y"),
            rec("c", "x"),
            rec("c", "x"),
        ]);
        let q = ClozeQuery::new("[MASK] x", 1).unwrap();
        let got = m.fill(&q).unwrap();
        assert_eq!(got.len(), 1);
        // a: 1/1, c: 2/2, b: 1/2 -> tie between a and c broken by lemma
        assert_eq!(got[0].lemma, "a");
        assert_eq!(got[0].score, 1.0);
        let all = m.fill(&ClozeQuery::new("[MASK] x", 10).unwrap()).unwrap();
        let order: Vec<_> = all.iter().map(|c| c.lemma.as_str()).collect();
        assert_eq!(order, ["a", "c", "b"]);
    }
}
