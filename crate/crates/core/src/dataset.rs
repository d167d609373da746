//! Shared-task datasets: seeded trial / dev / manual-dev splits of
//! anonymized sketches paired with contexts and gold mappings.
//!
//! Trial and dev draw disjoint sketch sets from one seeded shuffle; the
//! manual-dev split is a subset of dev, both its sketches and its contexts.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::corpus::{parse_contexts, parse_mapping, write_contexts, Context, Mapping, SenseKey};
use crate::error::{io_err, Error, Result};
use crate::sampling::Sampler;
use crate::sketch::{parse_sketches, write_sketches, Anonymized, Sketch};

pub const SKETCHES_FILE: &str = "sketches.jsonl";
pub const CONTEXTS_FILE: &str = "contexts.jsonl";
pub const GOLD_FILE: &str = "gold.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SplitName {
    Trial,
    Dev,
    ManualDev,
}

impl SplitName {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Trial => "trial",
            SplitName::Dev => "dev",
            SplitName::ManualDev => "manual_dev",
        }
    }
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SplitName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trial" => Ok(SplitName::Trial),
            "dev" => Ok(SplitName::Dev),
            "manual_dev" => Ok(SplitName::ManualDev),
            _ => Err(Error::invalid("split name", s.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSpec {
    pub name: SplitName,
    pub n_sketches: usize,
    pub contexts_per_sketch: usize,
    /// Optional cap on the split's total context count, sampled uniformly
    /// after per-sketch sampling. Manual dev uses it to keep only part of
    /// its sketches' dev contexts.
    pub n_contexts: Option<usize>,
}

impl SplitSpec {
    pub fn new(name: SplitName, n_sketches: usize, contexts_per_sketch: usize) -> Self {
        SplitSpec {
            name,
            n_sketches,
            contexts_per_sketch,
            n_contexts: None,
        }
    }

    pub fn with_total(mut self, n_contexts: usize) -> Self {
        self.n_contexts = Some(n_contexts);
        self
    }

    /// Only trial data ships with its mapping.
    pub fn publishes_mapping(&self) -> bool {
        self.name == SplitName::Trial
    }

    fn validate(&self) -> Result<()> {
        if self.n_sketches == 0 || self.contexts_per_sketch == 0 || self.n_contexts == Some(0) {
            return Err(Error::invalid(
                "split spec",
                format!("{}: sizes must be at least 1", self.name),
            ));
        }
        Ok(())
    }
}

/// Parses `name=sketches,contexts_per_sketch[,total_contexts]`,
/// e.g. `dev=895,50` or `manual_dev=100,50,4347`.
impl FromStr for SplitSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid("split spec", s.to_owned());
        let (name, sizes) = s.split_once('=').ok_or_else(bad)?;
        let nums = sizes
            .split(',')
            .map(|n| n.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        let spec = match nums[..] {
            [n, k] => SplitSpec::new(name.parse()?, n, k),
            [n, k, total] => SplitSpec::new(name.parse()?, n, k).with_total(total),
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// The published configuration: trial 20/2000, dev 895/44750, manual dev
/// 100/4347.
pub fn published_splits() -> Vec<SplitSpec> {
    vec![
        SplitSpec::new(SplitName::Trial, 20, 100),
        SplitSpec::new(SplitName::Dev, 895, 50),
        SplitSpec::new(SplitName::ManualDev, 100, 50).with_total(4347),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub split: SplitSpec,
    /// Anonymized, ordered by id.
    pub sketches: Vec<Sketch>,
    pub contexts: Vec<Context>,
    pub gold: Mapping,
}

impl Dataset {
    /// Checks that gold is a function from this split's contexts onto its
    /// sketches.
    pub fn validate(&self) -> Result<()> {
        let sketch_ids: HashSet<&str> = self.sketches.iter().map(|s| s.id.as_str()).collect();
        let mut context_ids = HashSet::new();
        for c in &self.contexts {
            if !context_ids.insert(c.id.as_str()) {
                return Err(Error::DuplicateId(c.id.clone()));
            }
        }
        for (ctx, sk) in self.gold.iter() {
            if !sketch_ids.contains(sk) {
                return Err(Error::invalid(
                    "gold",
                    format!("{ctx} -> unknown sketch {sk}"),
                ));
            }
            if !context_ids.contains(ctx) {
                return Err(Error::invalid("gold", format!("unknown context {ctx}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct SplitOptions {
    /// Fail instead of warning when a sketch has too few contexts.
    pub strict: bool,
}

#[derive(Debug, Clone)]
pub struct SplitOutput {
    pub datasets: Vec<Dataset>,
    pub warnings: Vec<String>,
}

impl SplitOutput {
    pub fn get(&self, name: SplitName) -> Option<&Dataset> {
        self.datasets.iter().find(|d| d.split.name == name)
    }
}

/// Samples the requested splits. `pool` must be disjoint from the corpus
/// the sketches were built on; that is the caller's responsibility.
pub fn split_dataset(
    anonymized: &Anonymized,
    pool: &BTreeMap<SenseKey, Vec<Context>>,
    specs: &[SplitSpec],
    seed: u64,
    options: &SplitOptions,
) -> Result<SplitOutput> {
    let mut names = BTreeSet::new();
    for spec in specs {
        spec.validate()?;
        if !names.insert(spec.name) {
            return Err(Error::invalid(
                "split spec",
                format!("{} requested twice", spec.name),
            ));
        }
    }
    if names.contains(&SplitName::ManualDev) && !names.contains(&SplitName::Dev) {
        return Err(Error::invalid(
            "split spec",
            "manual_dev requires a dev split",
        ));
    }
    let mut seen = HashSet::new();
    for c in pool.values().flatten() {
        if !seen.insert(c.id.as_str()) {
            return Err(Error::DuplicateId(c.id.clone()));
        }
    }

    let mut rng = Sampler::new(seed);
    let mut warnings = Vec::new();
    let mut order: Vec<&str> = anonymized.sketches.iter().map(|s| s.id.as_str()).collect();
    rng.shuffle(&mut order);
    let by_id: HashMap<&str, &Sketch> = anonymized
        .sketches
        .iter()
        .map(|s| (s.id.as_str(), s))
        .collect();

    let mut next = 0;
    let mut datasets = Vec::new();
    for spec in specs.iter().filter(|s| s.name != SplitName::ManualDev) {
        if order.len() - next < spec.n_sketches {
            return Err(Error::Insufficient(format!(
                "{} needs {} sketches, {} left of {}",
                spec.name,
                spec.n_sketches,
                order.len() - next,
                order.len()
            )));
        }
        let mut chosen = order[next..next + spec.n_sketches].to_vec();
        next += spec.n_sketches;
        chosen.sort_unstable();

        let mut contexts = Vec::new();
        let mut gold = Mapping::new();
        for id in &chosen {
            let sense = anonymized
                .sense_of(id)
                .ok_or_else(|| Error::invalid("secret", format!("no sense for {id}")))?;
            let available = pool.get(sense).map(Vec::as_slice).unwrap_or(&[]);
            if available.len() < spec.contexts_per_sketch {
                let msg = format!(
                    "{}: sketch {id} has {} contexts, {} requested",
                    spec.name,
                    available.len(),
                    spec.contexts_per_sketch
                );
                if options.strict {
                    return Err(Error::Insufficient(msg));
                }
                warnings.push(msg);
            }
            for i in rng.sample_indices(available.len(), spec.contexts_per_sketch) {
                gold.insert(available[i].id.clone(), *id)?;
                contexts.push(available[i].clone());
            }
        }
        rng.shuffle(&mut contexts);
        let (contexts, gold) =
            cap_contexts(spec, contexts, gold, &mut rng, options, &mut warnings)?;
        datasets.push(Dataset {
            split: spec.clone(),
            sketches: chosen.iter().map(|id| by_id[id].clone()).collect(),
            contexts,
            gold,
        });
    }

    if let Some(spec) = specs.iter().find(|s| s.name == SplitName::ManualDev) {
        let dev = datasets
            .iter()
            .find(|d| d.split.name == SplitName::Dev)
            .expect("dev split checked above");
        if dev.sketches.len() < spec.n_sketches {
            return Err(Error::Insufficient(format!(
                "manual_dev needs {} sketches, dev has {}",
                spec.n_sketches,
                dev.sketches.len()
            )));
        }
        let picked: BTreeSet<usize> = rng
            .sample_indices(dev.sketches.len(), spec.n_sketches)
            .into_iter()
            .collect();
        let sketches: Vec<Sketch> = picked.iter().map(|&i| dev.sketches[i].clone()).collect();
        let ids: HashSet<&str> = sketches.iter().map(|s| s.id.as_str()).collect();

        let mut per_sketch: HashMap<&str, usize> = HashMap::new();
        let mut contexts = Vec::new();
        let mut gold = Mapping::new();
        for c in &dev.contexts {
            let sk = dev.gold.get(&c.id).expect("dev gold covers its contexts");
            if !ids.contains(sk) {
                continue;
            }
            let n = per_sketch.entry(sk).or_default();
            if *n < spec.contexts_per_sketch {
                *n += 1;
                gold.insert(c.id.clone(), sk)?;
                contexts.push(c.clone());
            }
        }
        for s in &sketches {
            let n = per_sketch.get(s.id.as_str()).copied().unwrap_or(0);
            if n < spec.contexts_per_sketch {
                let msg = format!(
                    "manual_dev: sketch {} has {n} dev contexts, {} requested",
                    s.id, spec.contexts_per_sketch
                );
                if options.strict {
                    return Err(Error::Insufficient(msg));
                }
                warnings.push(msg);
            }
        }
        let (contexts, gold) =
            cap_contexts(spec, contexts, gold, &mut rng, options, &mut warnings)?;
        datasets.push(Dataset {
            split: spec.clone(),
            sketches,
            contexts,
            gold,
        });
    }

    for d in &datasets {
        d.validate()?;
    }
    Ok(SplitOutput { datasets, warnings })
}

/// Applies `spec.n_contexts`, keeping the sampled contexts in their
/// current relative order.
fn cap_contexts(
    spec: &SplitSpec,
    contexts: Vec<Context>,
    gold: Mapping,
    rng: &mut Sampler,
    options: &SplitOptions,
    warnings: &mut Vec<String>,
) -> Result<(Vec<Context>, Mapping)> {
    let Some(total) = spec.n_contexts else {
        return Ok((contexts, gold));
    };
    if contexts.len() < total {
        let msg = format!(
            "{}: {} contexts available, {total} requested",
            spec.name,
            contexts.len()
        );
        if options.strict {
            return Err(Error::Insufficient(msg));
        }
        warnings.push(msg);
        return Ok((contexts, gold));
    }
    let keep: BTreeSet<usize> = rng
        .sample_indices(contexts.len(), total)
        .into_iter()
        .collect();
    let kept: Vec<Context> = contexts
        .into_iter()
        .enumerate()
        .filter(|(i, _)| keep.contains(i))
        .map(|(_, c)| c)
        .collect();
    let gold = kept
        .iter()
        .map(|c| {
            (
                c.id.clone(),
                gold.get(&c.id).expect("gold covers contexts").to_owned(),
            )
        })
        .collect();
    Ok((kept, gold))
}

/// Writes `sketches.jsonl`, `contexts.jsonl` and, for splits that publish
/// it, `gold.json` into `dir`.
pub fn emit_dataset(ds: &Dataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_file(&dir.join(SKETCHES_FILE), &write_sketches(&ds.sketches)?)?;
    write_file(&dir.join(CONTEXTS_FILE), &write_contexts(&ds.contexts)?)?;
    if ds.split.publishes_mapping() {
        write_file(&dir.join(GOLD_FILE), &ds.gold.to_json()?)?;
    }
    Ok(())
}

/// Reads a dataset directory back. Gold is read from `gold.json` when
/// present and is empty otherwise.
pub fn load_dataset(dir: impl AsRef<Path>, split: SplitSpec) -> Result<Dataset> {
    let dir = dir.as_ref();
    let read = |name: &str| {
        let path = dir.join(name);
        fs::read_to_string(&path).map_err(io_err(path))
    };
    let sketches =
        parse_sketches(&read(SKETCHES_FILE)?).map_err(|e| e.in_file(dir.join(SKETCHES_FILE)))?;
    let contexts =
        parse_contexts(&read(CONTEXTS_FILE)?).map_err(|e| e.in_file(dir.join(CONTEXTS_FILE)))?;
    let gold = if dir.join(GOLD_FILE).exists() {
        parse_mapping(&read(GOLD_FILE)?).map_err(|e| e.in_file(dir.join(GOLD_FILE)))?
    } else {
        Mapping::new()
    };
    let ds = Dataset {
        split,
        sketches,
        contexts,
        gold,
    };
    ds.validate()?;
    Ok(ds)
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(io_err(path))
}

/// Reads a context pool: context JSON lines with an extra `sense` object.
pub fn parse_pool(input: &str) -> Result<BTreeMap<SenseKey, Vec<Context>>> {
    #[derive(serde::Deserialize)]
    struct PoolEntry {
        sense: SenseKey,
        #[serde(flatten)]
        context: Context,
    }

    let mut pool: BTreeMap<SenseKey, Vec<Context>> = BTreeMap::new();
    let mut seen = HashSet::new();
    for (idx, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: PoolEntry =
            serde_json::from_str(line).map_err(|e| Error::parse(idx + 1, e.to_string()))?;
        entry.sense.validate()?;
        entry.context.validate()?;
        if !seen.insert(entry.context.id.clone()) {
            return Err(Error::DuplicateId(entry.context.id));
        }
        pool.entry(entry.sense).or_default().push(entry.context);
    }
    Ok(pool)
}

pub fn write_pool(pool: &BTreeMap<SenseKey, Vec<Context>>) -> Result<String> {
    #[derive(serde::Serialize)]
    struct PoolEntry<'a> {
        sense: &'a SenseKey,
        #[serde(flatten)]
        context: &'a Context,
    }

    let mut out = String::new();
    for (sense, contexts) in pool {
        for context in contexts {
            out.push_str(&serde_json::to_string(&PoolEntry { sense, context })?);
            out.push('\n');
        }
    }
    Ok(out)
}
