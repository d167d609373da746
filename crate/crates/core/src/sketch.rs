//! Semantic sketches: role sections of frequency-ranked fillers built from
//! dependency records, plus anonymization and the sketch JSON format.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{write_json_lines, DependencyRecord, Flag, RoleLabel, SenseKey};
use crate::error::{io_err, Error, Result};
use crate::sampling::Sampler;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filler {
    /// Lemma, or space-joined lemmas for a phrase filler.
    pub lemma: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleSection {
    pub role: RoleLabel,
    /// Untruncated number of records with this role.
    pub total_count: u64,
    pub fillers: Vec<Filler>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sketch {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sense: Option<SenseKey>,
    pub sections: Vec<RoleSection>,
}

impl Sketch {
    /// Checks ordering, distinctness and count invariants.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid("sketch", format!("{}: {msg}", self.id)));
        if self.id.is_empty() {
            return Err(Error::invalid("sketch", "empty id"));
        }
        if let Some(sense) = &self.sense {
            sense.validate()?;
        }
        if self.sections.is_empty() {
            return bad("no sections".into());
        }
        let mut roles = BTreeSet::new();
        for (i, sec) in self.sections.iter().enumerate() {
            if !roles.insert(&sec.role) {
                return bad(format!("role {} repeated", sec.role));
            }
            if i > 0 && !section_order(&self.sections[i - 1], sec).is_lt() {
                return bad(format!("section {} out of order", sec.role));
            }
            if sec.fillers.is_empty() {
                return bad(format!("section {} has no fillers", sec.role));
            }
            if sec
                .fillers
                .iter()
                .any(|f| f.count == 0 || f.lemma.is_empty())
            {
                return bad(format!("section {} has an empty filler", sec.role));
            }
            if sec
                .fillers
                .windows(2)
                .any(|w| !filler_order(&w[0], &w[1]).is_lt())
            {
                return bad(format!("fillers of {} out of order", sec.role));
            }
            let shown: u64 = sec.fillers.iter().map(|f| f.count).sum();
            if sec.total_count < shown {
                return bad(format!("section {} total below filler sum", sec.role));
            }
        }
        Ok(())
    }

    pub fn fillers(&self) -> impl Iterator<Item = &Filler> {
        self.sections.iter().flat_map(|s| s.fillers.iter())
    }
}

fn section_order(a: &RoleSection, b: &RoleSection) -> std::cmp::Ordering {
    b.total_count
        .cmp(&a.total_count)
        .then_with(|| a.role.cmp(&b.role))
}

fn filler_order(a: &Filler, b: &Filler) -> std::cmp::Ordering {
    b.count.cmp(&a.count).then_with(|| a.lemma.cmp(&b.lemma))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildConfig {
    /// Minimum number of (filtered) records, repeats included, for a sense.
    pub dependency_threshold: u64,
    /// Minimum distinct semantic classes per lexeme group.
    pub min_meanings: usize,
    pub max_roles: usize,
    pub max_fillers_per_role: usize,
    pub excluded_flags: BTreeSet<Flag>,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            dependency_threshold: 2000,
            min_meanings: 2,
            max_roles: 8,
            max_fillers_per_role: 10,
            excluded_flags: Flag::ALL.into_iter().collect(),
        }
    }
}

impl BuildConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_meanings == 0 || self.max_roles == 0 || self.max_fillers_per_role == 0 {
            return Err(Error::invalid("build config", "limits must be at least 1"));
        }
        Ok(())
    }
}

/// Drops records carrying any excluded flag, preserving order.
pub fn filter_records(records: &[DependencyRecord], config: &BuildConfig) -> Vec<DependencyRecord> {
    records
        .iter()
        .filter(|r| r.flags.is_disjoint(&config.excluded_flags))
        .cloned()
        .collect()
}

/// Senses with at least `dependency_threshold` records whose lexeme group
/// has at least `min_meanings` classes in `records`.
pub fn select_senses(records: &[DependencyRecord], config: &BuildConfig) -> BTreeSet<SenseKey> {
    let mut counts: HashMap<&SenseKey, u64> = HashMap::new();
    let mut classes: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    for r in records {
        *counts.entry(&r.sense).or_default() += 1;
        classes
            .entry(&r.sense.lexeme_group)
            .or_default()
            .insert(&r.sense.semantic_class);
    }
    counts
        .into_iter()
        .filter(|(sense, n)| {
            *n >= config.dependency_threshold
                && classes[sense.lexeme_group.as_str()].len() >= config.min_meanings
        })
        .map(|(sense, _)| sense.clone())
        .collect()
}

/// Builds the sketch of one sense. Records are filtered with
/// `config.excluded_flags` first; every record must carry `sense`.
pub fn build_sketch(
    sense: &SenseKey,
    records: &[DependencyRecord],
    config: &BuildConfig,
) -> Result<Sketch> {
    config.validate()?;
    if let Some(r) = records.iter().find(|r| &r.sense != sense) {
        return Err(Error::invalid(
            "records",
            format!("record of {} passed for {sense}", r.sense),
        ));
    }
    let kept = records
        .iter()
        .filter(|r| r.flags.is_disjoint(&config.excluded_flags));

    let mut by_role: BTreeMap<&RoleLabel, (u64, HashMap<&str, u64>)> = BTreeMap::new();
    for r in kept {
        let (total, fillers) = by_role.entry(&r.role).or_default();
        *total += 1;
        *fillers.entry(r.filler_lemma.as_str()).or_default() += 1;
    }
    if by_role.is_empty() {
        return Err(Error::Insufficient(format!("no records for {sense}")));
    }

    let mut sections: Vec<RoleSection> = by_role
        .into_iter()
        .map(|(role, (total_count, fillers))| {
            let mut fillers: Vec<Filler> = fillers
                .into_iter()
                .map(|(lemma, count)| Filler {
                    lemma: lemma.to_owned(),
                    count,
                })
                .collect();
            fillers.sort_by(filler_order);
            fillers.truncate(config.max_fillers_per_role);
            RoleSection {
                role: role.clone(),
                total_count,
                fillers,
            }
        })
        .collect();
    sections.sort_by(section_order);
    sections.truncate(config.max_roles);

    Ok(Sketch {
        id: sense.to_string(),
        sense: Some(sense.clone()),
        sections,
    })
}

/// Filter, select and build: one sketch per qualifying sense, by id.
pub fn build_all(records: &[DependencyRecord], config: &BuildConfig) -> Result<Vec<Sketch>> {
    config.validate()?;
    let filtered = filter_records(records, config);
    let selected = select_senses(&filtered, config);
    let mut grouped: BTreeMap<&SenseKey, Vec<DependencyRecord>> = BTreeMap::new();
    for r in &filtered {
        if selected.contains(&r.sense) {
            grouped.entry(&r.sense).or_default().push(r.clone());
        }
    }
    let mut sketches = grouped
        .into_iter()
        .map(|(sense, recs)| build_sketch(sense, &recs, config))
        .collect::<Result<Vec<_>>>()?;
    sketches.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(sketches)
}

/// Anonymized sketches and the secret map from opaque id back to sense.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Anonymized {
    /// Ordered by opaque id.
    pub sketches: Vec<Sketch>,
    pub secret: BTreeMap<String, SenseKey>,
}

impl Anonymized {
    pub fn sense_of(&self, sketch_id: &str) -> Option<&SenseKey> {
        self.secret.get(sketch_id)
    }
}

/// Hides senses behind opaque ids `sk0001`, `sk0002`, ... assigned by a
/// seeded shuffle.
pub fn anonymize(sketches: &[Sketch], seed: u64) -> Result<Anonymized> {
    let width = sketches.len().to_string().len().max(4);
    let mut slots: Vec<usize> = (0..sketches.len()).collect();
    Sampler::new(seed).shuffle(&mut slots);

    let mut secret = BTreeMap::new();
    let mut out = Vec::with_capacity(sketches.len());
    for (sketch, slot) in sketches.iter().zip(slots) {
        let sense = sketch.sense.clone().ok_or_else(|| {
            Error::invalid("sketch", format!("{} is already anonymous", sketch.id))
        })?;
        let id = format!("sk{:0width$}", slot + 1);
        let prev = secret.insert(id.clone(), sense);
        assert!(prev.is_none(), "opaque id {id} generated twice");
        out.push(Sketch {
            id,
            sense: None,
            sections: sketch.sections.clone(),
        });
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(Anonymized {
        sketches: out,
        secret,
    })
}

/// Parses sketches from a stream of JSON objects: one pretty-printed
/// object or JSON lines.
pub fn parse_sketches(input: &str) -> Result<Vec<Sketch>> {
    let mut out = Vec::new();
    let mut ids = BTreeSet::new();
    for item in serde_json::Deserializer::from_str(input).into_iter::<Sketch>() {
        let sketch = item?;
        sketch.validate()?;
        if !ids.insert(sketch.id.clone()) {
            return Err(Error::DuplicateId(sketch.id));
        }
        out.push(sketch);
    }
    Ok(out)
}

pub fn read_sketches(path: impl AsRef<Path>) -> Result<Vec<Sketch>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_sketches(&text).map_err(|e| e.in_file(path))
}

pub fn write_sketches(sketches: &[Sketch]) -> Result<String> {
    write_json_lines(sketches)
}

pub fn parse_secret(input: &str) -> Result<BTreeMap<String, SenseKey>> {
    let secret: BTreeMap<String, SenseKey> = serde_json::from_str(input)?;
    for sense in secret.values() {
        sense.validate()?;
    }
    Ok(secret)
}

pub fn write_secret(secret: &BTreeMap<String, SenseKey>) -> Result<String> {
    let mut s = serde_json::to_string_pretty(secret)?;
    s.push('\n');
    Ok(s)
}
