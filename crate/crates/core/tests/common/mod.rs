//! Synthetic corpora and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use semsketch::corpus::{Context, DependencyRecord, Dependent, Flag, RoleLabel, SenseKey};
use semsketch::sampling::Sampler;
use semsketch::sketch::{BuildConfig, Filler, RoleSection, Sketch};

pub const ROLES: [&str; 4] = ["Agent", "Object", "Locative", "Time"];

pub fn record(sense: &SenseKey, role: &str, filler: &str, flags: &[Flag]) -> DependencyRecord {
    DependencyRecord {
        sentence_id: "s0".into(),
        sense: sense.clone(),
        role: RoleLabel::new(role).unwrap(),
        filler_lemma: filler.into(),
        filler_surface: filler.into(),
        filler_pos: "NOUN".into(),
        flags: flags.iter().copied().collect(),
    }
}

/// A random corpus over a few lexeme groups, classes, roles and a small
/// shared filler vocabulary, with random flags.
pub fn random_corpus(seed: u64, max_records: usize) -> Vec<DependencyRecord> {
    let mut rng = Sampler::new(seed);
    let n = rng.below(max_records + 1);
    let groups = ["брать", "вести", "гнать", "есть", "жечь"];
    let classes = ["A", "B", "C"];
    let fillers = [
        "дом",
        "лес",
        "на заря",
        "мост",
        "сад",
        "вода",
        "гора",
        "ночь",
    ];
    (0..n)
        .map(|i| {
            let sense = SenseKey::new(
                groups[rng.below(groups.len())],
                classes[rng.below(classes.len())],
            )
            .unwrap();
            let mut flags = Vec::new();
            for f in Flag::ALL {
                if rng.below(12) == 0 {
                    flags.push(f);
                }
            }
            let mut r = record(
                &sense,
                ROLES[rng.below(ROLES.len())],
                fillers[rng.below(fillers.len())],
                &flags,
            );
            r.sentence_id = format!("s{i}");
            r
        })
        .collect()
}

/// Brute-force group-by over (sense, role, filler lemma): the expected
/// output of `build_all`, computed by nested linear scans and independent
/// of the library's aggregation code.
pub fn oracle_build_all(records: &[DependencyRecord], config: &BuildConfig) -> Vec<Sketch> {
    let kept: Vec<&DependencyRecord> = records
        .iter()
        .filter(|r| !r.flags.iter().any(|f| config.excluded_flags.contains(f)))
        .collect();

    let mut senses: Vec<&SenseKey> = Vec::new();
    for r in &kept {
        if !senses.contains(&&r.sense) {
            senses.push(&r.sense);
        }
    }
    senses.sort_by_key(|s| s.to_string());

    let mut out = Vec::new();
    for sense in senses {
        let mine: Vec<&&DependencyRecord> = kept.iter().filter(|r| &r.sense == sense).collect();
        let mut classes: Vec<&str> = Vec::new();
        for r in &kept {
            if r.sense.lexeme_group == sense.lexeme_group
                && !classes.contains(&r.sense.semantic_class.as_str())
            {
                classes.push(&r.sense.semantic_class);
            }
        }
        if (mine.len() as u64) < config.dependency_threshold || classes.len() < config.min_meanings
        {
            continue;
        }
        let mut roles: Vec<&str> = Vec::new();
        for r in &mine {
            if !roles.contains(&r.role.as_str()) {
                roles.push(r.role.as_str());
            }
        }
        let mut sections: Vec<RoleSection> = roles
            .iter()
            .map(|role| {
                let in_role: Vec<&&&DependencyRecord> =
                    mine.iter().filter(|r| r.role.as_str() == *role).collect();
                let mut lemmas: Vec<&str> = Vec::new();
                for r in &in_role {
                    if !lemmas.contains(&r.filler_lemma.as_str()) {
                        lemmas.push(&r.filler_lemma);
                    }
                }
                let mut fillers: Vec<Filler> = lemmas
                    .iter()
                    .map(|l| Filler {
                        lemma: (*l).to_owned(),
                        count: in_role.iter().filter(|r| r.filler_lemma == *l).count() as u64,
                    })
                    .collect();
                fillers.sort_by(|a, b| {
                    (std::cmp::Reverse(a.count), &a.lemma)
                        .cmp(&(std::cmp::Reverse(b.count), &b.lemma))
                });
                fillers.truncate(config.max_fillers_per_role);
                RoleSection {
                    role: RoleLabel::new(*role).unwrap(),
                    total_count: in_role.len() as u64,
                    fillers,
                }
            })
            .collect();
        sections.sort_by(|a, b| {
            (std::cmp::Reverse(a.total_count), a.role.as_str())
                .cmp(&(std::cmp::Reverse(b.total_count), b.role.as_str()))
        });
        sections.truncate(config.max_roles);
        out.push(Sketch {
            id: format!("{}:{}", sense.lexeme_group, sense.semantic_class),
            sense: Some(sense.clone()),
            sections,
        });
    }
    out
}

/// A closed world: `n_senses` senses, each its own lexeme group
/// (`глаголN`) with a private filler vocabulary (`словоN_j`). Returns the
/// sketch-building corpus and a held-out context pool whose dependents are
/// drawn from the same private vocabularies.
pub struct ClosedWorld {
    pub records: Vec<DependencyRecord>,
    pub pool: BTreeMap<SenseKey, Vec<Context>>,
}

pub fn closed_world(
    n_senses: usize,
    records_per_sense: usize,
    contexts_per_sense: usize,
    seed: u64,
) -> ClosedWorld {
    let mut rng = Sampler::new(seed);
    let vocab = 12;
    let mut records = Vec::new();
    let mut pool = BTreeMap::new();
    for k in 0..n_senses {
        let sense = SenseKey::new(format!("глагол{k}"), format!("CLASS_{k}")).unwrap();
        let word = |j: usize| format!("слово{k}_{j}");
        for i in 0..records_per_sense {
            // skewed towards low j so rankings are not flat
            let j = rng.below(vocab).min(rng.below(vocab));
            let mut r = record(&sense, ROLES[j % ROLES.len()], &word(j), &[]);
            r.sentence_id = format!("train{k}.{i}");
            records.push(r);
        }
        let contexts = (0..contexts_per_sense)
            .map(|i| {
                let n_deps = 1 + rng.below(3);
                let deps: Vec<String> = (0..n_deps).map(|_| word(rng.below(vocab))).collect();
                make_context(
                    &format!("ctx{k}.{i}"),
                    &format!("глагол{k}"),
                    &format!("глаголил{k}"),
                    &deps,
                )
            })
            .collect();
        pool.insert(sense, contexts);
    }
    ClosedWorld { records, pool }
}

/// `dep0 target dep1 dep2 …` with character offsets for the target.
pub fn make_context(id: &str, target_lemma: &str, target: &str, deps: &[String]) -> Context {
    let mut text = String::new();
    let mut start = 0;
    let mut words: Vec<&str> = deps.iter().map(String::as_str).collect();
    words.insert(words.len().min(1), target);
    for (i, w) in words.iter().enumerate() {
        if i > 0 {
            text.push(' ');
        }
        if *w == target {
            start = text.chars().count();
        }
        text.push_str(w);
    }
    let ctx = Context {
        id: id.into(),
        target: target.into(),
        start,
        end: start + target.chars().count(),
        text,
        target_lemma: target_lemma.into(),
        dependents: Some(
            deps.iter()
                .map(|d| Dependent {
                    lemma: d.clone(),
                    relation: "obj".into(),
                })
                .collect(),
        ),
    };
    ctx.validate().unwrap();
    ctx
}

pub fn sense_strings(senses: impl IntoIterator<Item = SenseKey>) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for s in senses {
        out.insert(s.to_string());
        out.insert(s.semantic_class.clone());
    }
    out
}
