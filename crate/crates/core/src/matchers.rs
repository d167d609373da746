//! Sketch-to-context matching strategies.
//!
//! * `baseline-intersection`: for every direct dependent of the target, ask
//!   the fill model what could stand in that dependent's slot, intersect the
//!   candidate sets, and score a sketch by how many of its filler lemmas
//!   survive the intersection.
//! * `template-score`: mean probability of the context's target lemma in
//!   `[MASK] <cell>` templates, one per sketch cell.
//! * `flatten-similarity`: cosine between embeddings of the tagged context
//!   sentence and the flattened sketch.
//! * `predicate-restoration`: guess each sketch's hidden predicate from its
//!   cells, then pick the first sketch whose guess equals the target lemma.
//!
//! Every strategy produces a [`Ranking`] per context, ordered by score
//! descending and sketch id ascending, so the result never depends on the
//! order sketches are passed in.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{Context, HeadRule, Mapping};
use crate::error::{Error, Result};
use crate::fill::{cosine, ClozeQuery, Embedder, FillModel, MASK};
use crate::sketch::Sketch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    BaselineIntersection,
    TemplateScore,
    FlattenSimilarity,
    PredicateRestoration,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::BaselineIntersection,
        Strategy::TemplateScore,
        Strategy::FlattenSimilarity,
        Strategy::PredicateRestoration,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::BaselineIntersection => "baseline-intersection",
            Strategy::TemplateScore => "template-score",
            Strategy::FlattenSimilarity => "flatten-similarity",
            Strategy::PredicateRestoration => "predicate-restoration",
        }
    }

    pub fn needs_fill(self) -> bool {
        self != Strategy::FlattenSimilarity
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::invalid("strategy", s.to_owned()))
    }
}

#[derive(Debug, Clone)]
pub struct MatchConfig {
    pub strategy: Strategy,
    /// Candidates requested per fill query.
    pub top_n: usize,
    /// Cell template with `{mask}` and `{cell}` slots.
    pub template_pattern: String,
    /// Hypotheses kept per template when restoring a sketch's predicate.
    pub restoration_top_k: usize,
    pub head_rule: HeadRule,
    /// Worker threads for per-context matching.
    pub jobs: usize,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            strategy: Strategy::BaselineIntersection,
            top_n: 1000,
            template_pattern: "{mask} {cell}".into(),
            restoration_top_k: 1,
            head_rule: HeadRule::default(),
            jobs: 1,
        }
    }
}

impl MatchConfig {
    pub fn with_strategy(strategy: Strategy) -> Self {
        MatchConfig {
            strategy,
            ..MatchConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.top_n == 0 || self.restoration_top_k == 0 {
            return Err(Error::invalid(
                "match config",
                "top_n and restoration_top_k must be at least 1",
            ));
        }
        if !self.template_pattern.contains("{mask}") || !self.template_pattern.contains("{cell}") {
            return Err(Error::invalid(
                "match config",
                format!(
                    "template pattern {:?} needs {{mask}} and {{cell}}",
                    self.template_pattern
                ),
            ));
        }
        Ok(())
    }

    fn cell_query(&self, cell: &str, top_n: usize) -> Result<ClozeQuery> {
        let template = self
            .template_pattern
            .replace("{cell}", cell)
            .replace("{mask}", MASK);
        ClozeQuery::new(template, top_n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSketch {
    pub sketch_id: String,
    pub score: f64,
}

/// Scores of every sketch for one context, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub scores: Vec<ScoredSketch>,
    /// Set when the strategy had no evidence for this context: an empty
    /// candidate intersection, all-zero scores, or no exact restoration.
    pub flagged: bool,
}

impl Ranking {
    fn new(mut scores: Vec<ScoredSketch>, flagged: bool) -> Self {
        scores.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| a.sketch_id.cmp(&b.sketch_id))
        });
        Ranking { scores, flagged }
    }

    pub fn best(&self) -> Option<&ScoredSketch> {
        self.scores.first()
    }

    pub fn score_of(&self, sketch_id: &str) -> Option<f64> {
        self.scores
            .iter()
            .find(|s| s.sketch_id == sketch_id)
            .map(|s| s.score)
    }
}

/// Head lemmas of all fillers of a sketch.
pub fn sketch_tokens(sketch: &Sketch) -> BTreeSet<String> {
    sketch_tokens_with(sketch, HeadRule::default())
}

pub fn sketch_tokens_with(sketch: &Sketch, head: HeadRule) -> BTreeSet<String> {
    sketch
        .fillers()
        .map(|f| head.apply(&f.lemma).to_owned())
        .collect()
}

/// Pseudo-sentence for the target's dependent slot: the target lemma
/// followed by the dependent lemmas, with dependent `masked` replaced by the
/// mask.
fn dependent_template(context: &Context, masked: usize) -> String {
    let deps = context.dependents.as_deref().unwrap_or_default();
    let mut parts = Vec::with_capacity(deps.len() + 1);
    parts.push(context.target_lemma.as_str());
    for (i, d) in deps.iter().enumerate() {
        parts.push(if i == masked { MASK } else { d.lemma.as_str() });
    }
    parts.join(" ")
}

/// Intersection of the per-dependent fill candidates (as head lemmas).
/// Empty when the context has no dependents.
pub fn baseline_candidates(
    context: &Context,
    fill: &dyn FillModel,
    config: &MatchConfig,
) -> Result<BTreeSet<String>> {
    let deps = context.dependents.as_ref().ok_or_else(|| {
        Error::invalid("context", format!("{} has no dependency parse", context.id))
    })?;
    let mut common: Option<BTreeSet<String>> = None;
    for i in 0..deps.len() {
        let query = ClozeQuery::new(dependent_template(context, i), config.top_n)?;
        let replacements: BTreeSet<String> = fill
            .fill(&query)?
            .into_iter()
            .map(|c| config.head_rule.apply(&c.lemma).to_owned())
            .collect();
        common = Some(match common {
            None => replacements,
            Some(acc) => acc.intersection(&replacements).cloned().collect(),
        });
        if common.as_ref().is_some_and(BTreeSet::is_empty) {
            break;
        }
    }
    Ok(common.unwrap_or_default())
}

pub fn baseline_match(
    context: &Context,
    sketches: &[Sketch],
    fill: &dyn FillModel,
    config: &MatchConfig,
) -> Result<Ranking> {
    let candidates = baseline_candidates(context, fill, config)?;
    let scores = sketches
        .iter()
        .map(|sk| ScoredSketch {
            sketch_id: sk.id.clone(),
            score: sketch_tokens_with(sk, config.head_rule)
                .intersection(&candidates)
                .count() as f64,
        })
        .collect();
    Ok(Ranking::new(scores, candidates.is_empty()))
}

/// Fill results for every cell template of every sketch, computed once and
/// reused across contexts.
pub struct TemplateScorer {
    sketches: Vec<(String, Vec<usize>)>,
    templates: Vec<HashMap<String, f64>>,
}

impl TemplateScorer {
    pub fn new(sketches: &[Sketch], fill: &dyn FillModel, config: &MatchConfig) -> Result<Self> {
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut templates = Vec::new();
        let mut per_sketch = Vec::with_capacity(sketches.len());
        for sk in sketches {
            let mut slots = Vec::new();
            for filler in sk.fillers() {
                let query = config.cell_query(&filler.lemma, config.top_n)?;
                let slot = match index.get(query.template()) {
                    Some(&slot) => slot,
                    None => {
                        let scores = fill
                            .fill(&query)?
                            .into_iter()
                            .map(|c| (c.lemma, c.score))
                            .collect();
                        templates.push(scores);
                        index.insert(query.template().to_owned(), templates.len() - 1);
                        templates.len() - 1
                    }
                };
                slots.push(slot);
            }
            per_sketch.push((sk.id.clone(), slots));
        }
        Ok(TemplateScorer {
            sketches: per_sketch,
            templates,
        })
    }

    /// Mean fill score of `predicate` over a sketch's templates.
    pub fn rank(&self, predicate: &str) -> Ranking {
        let scores: Vec<ScoredSketch> = self
            .sketches
            .iter()
            .map(|(id, slots)| {
                let sum: f64 = slots
                    .iter()
                    .map(|&s| self.templates[s].get(predicate).copied().unwrap_or(0.0))
                    .sum();
                ScoredSketch {
                    sketch_id: id.clone(),
                    score: if slots.is_empty() {
                        0.0
                    } else {
                        sum / slots.len() as f64
                    },
                }
            })
            .collect();
        let flagged = scores.iter().all(|s| s.score == 0.0);
        Ranking::new(scores, flagged)
    }
}

pub fn template_score_match(
    context: &Context,
    sketches: &[Sketch],
    fill: &dyn FillModel,
    config: &MatchConfig,
) -> Result<Ranking> {
    Ok(TemplateScorer::new(sketches, fill, config)?.rank(&context.target_lemma))
}

/// `Role: f1 f2 …` per section, in sketch order, joined by `; `.
pub fn flatten_sketch(sketch: &Sketch) -> String {
    sketch
        .sections
        .iter()
        .map(|sec| {
            let mut s = sec.role.to_string();
            s.push(':');
            for f in &sec.fillers {
                s.push(' ');
                s.push_str(&f.lemma);
            }
            s
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// The context sentence with the target span wrapped in `<t>…</t>`.
pub fn tag_context(context: &Context) -> String {
    context.replace_target(&format!("<t>{}</t>", context.target))
}

pub struct SimilarityScorer {
    sketches: Vec<(String, Vec<f64>)>,
}

impl SimilarityScorer {
    pub fn new(sketches: &[Sketch], embed: &dyn Embedder) -> Result<Self> {
        let sketches = sketches
            .iter()
            .map(|sk| Ok((sk.id.clone(), embed.embed(&flatten_sketch(sk))?)))
            .collect::<Result<_>>()?;
        Ok(SimilarityScorer { sketches })
    }

    pub fn rank(&self, context: &Context, embed: &dyn Embedder) -> Result<Ranking> {
        let v = embed.embed(&tag_context(context))?;
        let scores = self
            .sketches
            .iter()
            .map(|(id, e)| {
                Ok(ScoredSketch {
                    sketch_id: id.clone(),
                    score: cosine(&v, e)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Ranking::new(scores, false))
    }
}

pub fn similarity_match(
    context: &Context,
    sketches: &[Sketch],
    embed: &dyn Embedder,
    _config: &MatchConfig,
) -> Result<Ranking> {
    SimilarityScorer::new(sketches, embed)?.rank(context, embed)
}

/// The most frequent hypothesis over the sketch's cell templates (ties by
/// lemma), keeping `restoration_top_k` hypotheses per template.
pub fn restore_predicate(
    sketch: &Sketch,
    fill: &dyn FillModel,
    config: &MatchConfig,
) -> Result<String> {
    let mut votes: BTreeMap<String, usize> = BTreeMap::new();
    for filler in sketch.fillers() {
        let query = config.cell_query(&filler.lemma, config.restoration_top_k)?;
        for c in fill.fill(&query)? {
            *votes.entry(c.lemma).or_default() += 1;
        }
    }
    // BTreeMap iteration is lemma-ascending; keep the first maximum
    let mut best: Option<(String, usize)> = None;
    for (lemma, n) in votes {
        if best.as_ref().is_none_or(|(_, b)| n > *b) {
            best = Some((lemma, n));
        }
    }
    best.map(|(lemma, _)| lemma).ok_or_else(|| {
        Error::Insufficient(format!("no predicate hypotheses for sketch {}", sketch.id))
    })
}

/// Restored predicates of all sketches, by sketch id.
pub struct Restorer {
    restored: Vec<(String, Option<String>)>,
    embedded: Option<Vec<Option<Vec<f64>>>>,
}

impl Restorer {
    /// Sketches whose templates produce no hypothesis stay unrestored and
    /// never win by exact match.
    pub fn new(
        sketches: &[Sketch],
        fill: &dyn FillModel,
        embed: Option<&dyn Embedder>,
        config: &MatchConfig,
    ) -> Result<Self> {
        let mut restored = Vec::with_capacity(sketches.len());
        for sk in sketches {
            let guess = match restore_predicate(sk, fill, config) {
                Ok(p) => Some(p),
                Err(Error::Insufficient(_)) => None,
                Err(e) => return Err(e),
            };
            restored.push((sk.id.clone(), guess));
        }
        restored.sort_by(|a, b| a.0.cmp(&b.0));
        let embedded = match embed {
            None => None,
            Some(e) => Some(
                restored
                    .iter()
                    .map(|(_, p)| p.as_deref().map(|p| e.embed(p)).transpose())
                    .collect::<Result<_>>()?,
            ),
        };
        Ok(Restorer { restored, embedded })
    }

    pub fn restored(&self) -> impl Iterator<Item = (&str, Option<&str>)> {
        self.restored
            .iter()
            .map(|(id, p)| (id.as_str(), p.as_deref()))
    }

    /// Exact matches score 1 and everything else 0. Without an exact match
    /// the scores become cosine similarity of the restored predicate to the
    /// target lemma, or stay all-zero (so the smallest id wins) when no
    /// embedder is attached. Unrestored sketches score -inf in that case.
    pub fn rank(&self, target_lemma: &str, embed: Option<&dyn Embedder>) -> Result<Ranking> {
        let exact: Vec<ScoredSketch> = self
            .restored
            .iter()
            .map(|(id, p)| ScoredSketch {
                sketch_id: id.clone(),
                score: if p.as_deref() == Some(target_lemma) {
                    1.0
                } else {
                    0.0
                },
            })
            .collect();
        if exact.iter().any(|s| s.score > 0.0) {
            return Ok(Ranking::new(exact, false));
        }
        let (Some(embed), Some(vectors)) = (embed, &self.embedded) else {
            return Ok(Ranking::new(exact, true));
        };
        let target = embed.embed(target_lemma)?;
        let scores = self
            .restored
            .iter()
            .zip(vectors)
            .map(|((id, _), v)| {
                let score = match v {
                    Some(v) => cosine(&target, v)?,
                    None => f64::NEG_INFINITY,
                };
                Ok(ScoredSketch {
                    sketch_id: id.clone(),
                    score,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Ranking::new(scores, true))
    }
}

pub fn restoration_match(
    contexts: &[Context],
    sketches: &[Sketch],
    fill: &dyn FillModel,
    embed: Option<&dyn Embedder>,
    config: &MatchConfig,
) -> Result<Mapping> {
    let config = MatchConfig {
        strategy: Strategy::PredicateRestoration,
        ..config.clone()
    };
    let plugins = Plugins {
        fill: Some(fill),
        embed,
    };
    Ok(match_all(contexts, sketches, &config, plugins)?.mapping)
}

/// Capabilities available to a matching run.
#[derive(Clone, Copy, Default)]
pub struct Plugins<'a> {
    pub fill: Option<&'a dyn FillModel>,
    pub embed: Option<&'a dyn Embedder>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchOutput {
    pub mapping: Mapping,
    /// Context ids whose ranking was flagged, in input order.
    pub flagged: Vec<String>,
}

enum Prepared<'a> {
    Baseline(&'a dyn FillModel),
    Template(TemplateScorer),
    Similarity(SimilarityScorer, &'a dyn Embedder),
    Restoration(Restorer, Option<&'a dyn Embedder>),
}

/// Ranks every context with the configured strategy and maps it to the
/// top-ranked sketch.
pub fn match_all(
    contexts: &[Context],
    sketches: &[Sketch],
    config: &MatchConfig,
    plugins: Plugins<'_>,
) -> Result<MatchOutput> {
    config.validate()?;
    if contexts.is_empty() {
        return Ok(MatchOutput {
            mapping: Mapping::new(),
            flagged: Vec::new(),
        });
    }
    if sketches.is_empty() {
        return Err(Error::Insufficient("no sketches to match against".into()));
    }
    let fill = || plugins.fill.ok_or(Error::MissingCapability("fill"));
    let prepared = match config.strategy {
        Strategy::BaselineIntersection => Prepared::Baseline(fill()?),
        Strategy::TemplateScore => {
            Prepared::Template(TemplateScorer::new(sketches, fill()?, config)?)
        }
        Strategy::FlattenSimilarity => {
            let embed = plugins.embed.ok_or(Error::MissingCapability("embed"))?;
            Prepared::Similarity(SimilarityScorer::new(sketches, embed)?, embed)
        }
        Strategy::PredicateRestoration => Prepared::Restoration(
            Restorer::new(sketches, fill()?, plugins.embed, config)?,
            plugins.embed,
        ),
    };
    let rank = |ctx: &Context| -> Result<Ranking> {
        match &prepared {
            Prepared::Baseline(fill) => baseline_match(ctx, sketches, *fill, config),
            Prepared::Template(scorer) => Ok(scorer.rank(&ctx.target_lemma)),
            Prepared::Similarity(scorer, embed) => scorer.rank(ctx, *embed),
            Prepared::Restoration(restorer, embed) => restorer.rank(&ctx.target_lemma, *embed),
        }
    };

    let rankings: Vec<Ranking> = if config.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| Error::invalid("jobs", e.to_string()))?;
        pool.install(|| contexts.par_iter().map(rank).collect::<Result<_>>())?
    } else {
        contexts.iter().map(rank).collect::<Result<_>>()?
    };

    let mut mapping = Mapping::new();
    let mut flagged = Vec::new();
    for (ctx, ranking) in contexts.iter().zip(&rankings) {
        let best = ranking.best().expect("sketches are non-empty");
        mapping.insert(ctx.id.clone(), best.sketch_id.clone())?;
        if ranking.flagged {
            flagged.push(ctx.id.clone());
        }
    }
    Ok(MatchOutput { mapping, flagged })
}
