//! Domain types for role-labeled corpora and the readers/writers for the
//! dependency-record, context and mapping file formats.
//!
//! Dependency records are tab-separated with eight columns:
//!
//! ```text
//! sentence_id  lexeme_group  semantic_class  role  filler_lemma  filler_surface  filler_pos  flags
//! ```
//!
//! `flags` is a comma-joined, possibly empty list drawn from `PRONOUN`,
//! `PERSONAL_NOUN`, `ELLIPTED` and `MOVED`. Lines starting with `#` are
//! comments; blank lines are ignored.
//!
//! Contexts are JSON lines with character (not byte) offsets, half-open.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{io_err, Error, Result};

/// Name of a semantic role, e.g. `Agent`, `Locative`, `Purpose_Goal`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RoleLabel(String);

impl RoleLabel {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::invalid("role label", "empty"));
        }
        if name.chars().any(char::is_whitespace) {
            return Err(Error::invalid(
                "role label",
                format!("{name:?} contains whitespace"),
            ));
        }
        Ok(RoleLabel(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for RoleLabel {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        RoleLabel::new(value)
    }
}

impl From<RoleLabel> for String {
    fn from(value: RoleLabel) -> Self {
        value.0
    }
}

impl fmt::Display for RoleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A predicate sense. Aspect and voice variants that the corpus assigns to
/// the same lexeme group and class are one sense.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SenseKey {
    pub lexeme_group: String,
    pub semantic_class: String,
}

impl SenseKey {
    pub fn new(lexeme_group: impl Into<String>, semantic_class: impl Into<String>) -> Result<Self> {
        let key = SenseKey {
            lexeme_group: lexeme_group.into(),
            semantic_class: semantic_class.into(),
        };
        key.validate()?;
        Ok(key)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lexeme_group.is_empty() {
            return Err(Error::invalid("sense key", "empty lexeme group"));
        }
        if self.semantic_class.is_empty() {
            return Err(Error::invalid("sense key", "empty semantic class"));
        }
        Ok(())
    }
}

/// Formats as `lexeme_group:semantic_class`, which is also the id of a
/// named sketch.
impl fmt::Display for SenseKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lexeme_group, self.semantic_class)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Flag {
    Pronoun,
    PersonalNoun,
    Ellipted,
    Moved,
}

impl Flag {
    pub const ALL: [Flag; 4] = [
        Flag::Pronoun,
        Flag::PersonalNoun,
        Flag::Ellipted,
        Flag::Moved,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Flag::Pronoun => "PRONOUN",
            Flag::PersonalNoun => "PERSONAL_NOUN",
            Flag::Ellipted => "ELLIPTED",
            Flag::Moved => "MOVED",
        }
    }
}

impl FromStr for Flag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Flag::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::invalid("flag", format!("unknown flag {s:?}")))
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One occurrence of a semantic dependency. Repeated records are meaningful:
/// each one adds frequency weight.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DependencyRecord {
    pub sentence_id: String,
    pub sense: SenseKey,
    pub role: RoleLabel,
    pub filler_lemma: String,
    pub filler_surface: String,
    pub filler_pos: String,
    pub flags: BTreeSet<Flag>,
}

impl DependencyRecord {
    /// Head lemma of the filler; see [`head_lemma`].
    pub fn filler_head(&self) -> &str {
        head_lemma(&self.filler_lemma)
    }
}

/// Head lemma of a (possibly multiword) lemma string: the last
/// whitespace-separated token, so `на заря` has head `заря`.
pub fn head_lemma(lemma: &str) -> &str {
    HeadRule::LastToken.apply(lemma)
}

/// How a multiword filler lemma is reduced to the single lemma used for
/// co-occurrence counting and token intersection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum HeadRule {
    #[default]
    LastToken,
    FirstToken,
    /// Keep the phrase as is.
    Whole,
}

impl HeadRule {
    pub fn apply(self, lemma: &str) -> &str {
        let mut tokens = lemma.split_whitespace();
        let head = match self {
            HeadRule::LastToken => tokens.next_back(),
            HeadRule::FirstToken => tokens.next(),
            HeadRule::Whole => return lemma.trim(),
        };
        head.unwrap_or(lemma)
    }
}

impl FromStr for HeadRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "last" => Ok(HeadRule::LastToken),
            "first" => Ok(HeadRule::FirstToken),
            "whole" => Ok(HeadRule::Whole),
            _ => Err(Error::invalid("head rule", s.to_owned())),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct IngestConfig {
    /// Lowercase lemma columns (lexeme group and filler lemma) on read.
    pub lowercase_lemmas: bool,
}

const RECORD_FIELDS: usize = 8;

/// Parses dependency records from the tab-separated format. Errors carry the
/// 1-based line number; no malformed line is skipped.
pub fn parse_records(input: &str, config: &IngestConfig) -> Result<Vec<DependencyRecord>> {
    let mut records = Vec::new();
    for (idx, raw) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        records.push(parse_record_line(line, config).map_err(|msg| Error::parse(line_no, msg))?);
    }
    Ok(records)
}

fn parse_record_line(
    line: &str,
    config: &IngestConfig,
) -> std::result::Result<DependencyRecord, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != RECORD_FIELDS {
        return Err(format!(
            "expected {RECORD_FIELDS} tab-separated fields, found {}",
            fields.len()
        ));
    }
    let lemma = |s: &str| {
        if config.lowercase_lemmas {
            s.to_lowercase()
        } else {
            s.to_owned()
        }
    };
    let nonempty = |name: &str, s: &str| {
        if s.is_empty() {
            Err(format!("empty {name}"))
        } else {
            Ok(())
        }
    };
    nonempty("sentence_id", fields[0])?;
    nonempty("filler_lemma", fields[4])?;
    let sense = SenseKey::new(lemma(fields[1]), fields[2]).map_err(|e| e.to_string())?;
    let role = RoleLabel::new(fields[3]).map_err(|e| e.to_string())?;
    let flags = parse_flags(fields[7]).map_err(|e| e.to_string())?;
    Ok(DependencyRecord {
        sentence_id: fields[0].to_owned(),
        sense,
        role,
        filler_lemma: lemma(fields[4]),
        filler_surface: fields[5].to_owned(),
        filler_pos: fields[6].to_owned(),
        flags,
    })
}

fn parse_flags(field: &str) -> Result<BTreeSet<Flag>> {
    if field.is_empty() {
        return Ok(BTreeSet::new());
    }
    field.split(',').map(str::parse).collect()
}

/// Reads a dependency-record file.
pub fn ingest_corpus(
    path: impl AsRef<Path>,
    config: &IngestConfig,
) -> Result<Vec<DependencyRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_records(&text, config).map_err(|e| e.in_file(path))
}

/// Serializes records in the tab-separated format, one per line.
pub fn write_records(records: &[DependencyRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let flags: Vec<&str> = r.flags.iter().map(|f| f.as_str()).collect();
        let cols = [
            r.sentence_id.as_str(),
            &r.sense.lexeme_group,
            &r.sense.semantic_class,
            r.role.as_str(),
            &r.filler_lemma,
            &r.filler_surface,
            &r.filler_pos,
            &flags.join(","),
        ];
        out.push_str(&cols.join("\t"));
        out.push('\n');
    }
    out
}

/// A syntactic dependent of the target predicate, serialized as a
/// `[lemma, relation]` pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(String, String)", into = "(String, String)")]
pub struct Dependent {
    pub lemma: String,
    pub relation: String,
}

impl From<(String, String)> for Dependent {
    fn from((lemma, relation): (String, String)) -> Self {
        Dependent { lemma, relation }
    }
}

impl From<Dependent> for (String, String) {
    fn from(d: Dependent) -> Self {
        (d.lemma, d.relation)
    }
}

/// A sentence with one highlighted target predicate occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Context {
    pub id: String,
    pub target: String,
    pub start: usize,
    pub end: usize,
    #[serde(rename = "context")]
    pub text: String,
    pub target_lemma: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dependents: Option<Vec<Dependent>>,
}

impl Context {
    /// Checks the span invariant: `0 <= start < end <= chars(text)` and the
    /// characters in `[start, end)` spell `target`.
    pub fn validate(&self) -> Result<()> {
        let span_err = |msg: String| Error::Span {
            id: self.id.clone(),
            msg,
        };
        if self.id.is_empty() {
            return Err(Error::invalid("context", "empty id"));
        }
        if self.start >= self.end {
            return Err(span_err(format!(
                "empty or inverted span [{}, {})",
                self.start, self.end
            )));
        }
        let len = self.text.chars().count();
        if self.end > len {
            return Err(span_err(format!(
                "span end {} exceeds text length {len}",
                self.end
            )));
        }
        let got = self.span_text();
        if got != self.target {
            return Err(span_err(format!(
                "span [{}, {}) is {got:?}, expected {:?}",
                self.start, self.end, self.target
            )));
        }
        Ok(())
    }

    /// Characters of `text` in `[start, end)`.
    pub fn span_text(&self) -> String {
        self.text
            .chars()
            .skip(self.start)
            .take(self.end.saturating_sub(self.start))
            .collect()
    }

    /// The text with the target span replaced by `replacement`.
    pub fn replace_target(&self, replacement: &str) -> String {
        let mut out = String::with_capacity(self.text.len() + replacement.len());
        for (i, c) in self.text.chars().enumerate() {
            if i == self.start {
                out.push_str(replacement);
            }
            if i < self.start || i >= self.end {
                out.push(c);
            }
        }
        out
    }
}

/// Parses context JSON lines, validating spans and id uniqueness.
pub fn parse_contexts(input: &str) -> Result<Vec<Context>> {
    let mut seen = HashSet::new();
    let mut contexts = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let ctx: Context =
            serde_json::from_str(line).map_err(|e| Error::parse(idx + 1, e.to_string()))?;
        ctx.validate()?;
        if !seen.insert(ctx.id.clone()) {
            return Err(Error::DuplicateId(ctx.id));
        }
        contexts.push(ctx);
    }
    Ok(contexts)
}

pub fn ingest_contexts(path: impl AsRef<Path>) -> Result<Vec<Context>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_contexts(&text).map_err(|e| e.in_file(path))
}

pub fn write_contexts(contexts: &[Context]) -> Result<String> {
    write_json_lines(contexts)
}

pub(crate) fn write_json_lines<T: Serialize>(items: &[T]) -> Result<String> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item)?);
        out.push('\n');
    }
    Ok(out)
}

/// Assignment of context ids to sketch ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Mapping(BTreeMap<String, String>);

impl Mapping {
    pub fn new() -> Self {
        Mapping::default()
    }

    /// Adds a pair; a context may be assigned only once.
    pub fn insert(
        &mut self,
        context_id: impl Into<String>,
        sketch_id: impl Into<String>,
    ) -> Result<()> {
        let context_id = context_id.into();
        if self.0.contains_key(&context_id) {
            return Err(Error::DuplicateId(context_id));
        }
        self.0.insert(context_id, sketch_id.into());
        Ok(())
    }

    pub fn get(&self, context_id: &str) -> Option<&str> {
        self.0.get(context_id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(c, s)| (c.as_str(), s.as_str()))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

impl FromIterator<(String, String)> for Mapping {
    /// Later duplicates overwrite earlier ones; use [`Mapping::insert`] to
    /// reject them instead.
    fn from_iter<I: IntoIterator<Item = (String, String)>>(iter: I) -> Self {
        Mapping(iter.into_iter().collect())
    }
}

impl<'de> Deserialize<'de> for Mapping {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct MappingVisitor;

        impl<'de> Visitor<'de> for MappingVisitor {
            type Value = Mapping;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object of context id to sketch id")
            }

            fn visit_map<A: MapAccess<'de>>(
                self,
                mut map: A,
            ) -> std::result::Result<Mapping, A::Error> {
                let mut out = Mapping::new();
                while let Some((k, v)) = map.next_entry::<String, String>()? {
                    out.insert(k, v).map_err(serde::de::Error::custom)?;
                }
                Ok(out)
            }
        }

        deserializer.deserialize_map(MappingVisitor)
    }
}

pub fn parse_mapping(input: &str) -> Result<Mapping> {
    Ok(serde_json::from_str(input)?)
}

pub fn read_mapping(path: impl AsRef<Path>) -> Result<Mapping> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_mapping(&text).map_err(|e| e.in_file(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINES: &str = "# comment\n\
        s1\tготовить\tTO_PREPARE_FOOD_SUBSTANCE\tObject\tобед\tобед\tNOUN\t\n\
        s1\tготовить\tTO_PREPARE_FOOD_SUBSTANCE\tAgent\tон\tон\tPRON\tPRONOUN\n\
        s2\tписать\tTO_PAINT\tLocative\tна заря\tна заре\tPP\tMOVED,ELLIPTED\n";

    #[test]
    fn three_lines_in_file_order() {
        let recs = parse_records(LINES, &IngestConfig::default()).unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[0].filler_lemma, "обед");
        assert_eq!(recs[1].flags, BTreeSet::from([Flag::Pronoun]));
        assert_eq!(recs[2].flags, BTreeSet::from([Flag::Moved, Flag::Ellipted]));
        assert_eq!(recs[2].filler_head(), "заря");
        assert_eq!(recs[2].sense.to_string(), "писать:TO_PAINT");
    }

    #[test]
    fn empty_input() {
        assert!(parse_records("", &IngestConfig::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn short_line_names_line_number() {
        let input = "s1\tготовить\tTO_COOK\tObject\tобед\tобед\tNOUN\t\ns2\ta\tB\tObject\tx\n";
        let err = parse_records(input, &IngestConfig::default()).unwrap_err();
        match err {
            Error::Parse { line, msg } => {
                assert_eq!(line, 2);
                assert!(msg.contains("found 5"), "{msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_fields() {
        let cfg = IngestConfig::default();
        for bad in [
            "s\tg\tC\tObj ect\tx\tx\tN\t",
            "s\tg\tC\tObject\t\tx\tN\t",
            "s\t\tC\tObject\tx\tx\tN\t",
            "s\tg\tC\tObject\tx\tx\tN\tPRONOUN,",
            "s\tg\tC\tObject\tx\tx\tN\tNOUN",
        ] {
            assert!(parse_records(bad, &cfg).is_err(), "{bad:?} accepted");
        }
    }

    #[test]
    fn lowercase_option() {
        let cfg = IngestConfig {
            lowercase_lemmas: true,
        };
        let r = parse_records("s\tГотовить\tC\tObject\tОбед\tОбед\tN\t", &cfg).unwrap();
        assert_eq!(r[0].sense.lexeme_group, "готовить");
        assert_eq!(r[0].filler_lemma, "обед");
        assert_eq!(r[0].filler_surface, "Обед");
    }

    #[test]
    fn annotated_context_is_accepted() {
        let line = r#"{"id": "dev.sent.rus.116", "target": "наполнились", "start": 46, "end": 57, "context": "Когда доктор вошел, она вспыхнула, и глаза ее наполнились слезами", "target_lemma": "наполниться"}"#;
        let ctx = parse_contexts(line).unwrap();
        assert_eq!(ctx.len(), 1);
        assert_eq!(ctx[0].span_text(), "наполнились");
        assert_eq!(ctx[0].dependents, None);
        // byte offsets would not line up for Cyrillic text
        assert_ne!(ctx[0].text.get(46..57), Some("наполнились"));
    }

    #[test]
    fn empty_span_rejected() {
        let line = r#"{"id": "c1", "target": "a", "start": 3, "end": 3, "context": "abcd", "target_lemma": "a"}"#;
        assert!(matches!(parse_contexts(line), Err(Error::Span { .. })));
    }

    #[test]
    fn span_mismatch_cites_id() {
        let line = r#"{"id": "c7", "target": "ab", "start": 1, "end": 3, "context": "abcd", "target_lemma": "a"}"#;
        let err = parse_contexts(line).unwrap_err();
        assert!(matches!(&err, Error::Span { id, .. } if id == "c7"));
        assert!(err.to_string().contains("c7"));
    }

    #[test]
    fn span_past_end_rejected() {
        let line = r#"{"id": "c1", "target": "d", "start": 3, "end": 5, "context": "abcd", "target_lemma": "d"}"#;
        assert!(parse_contexts(line).is_err());
    }

    #[test]
    fn duplicate_context_id() {
        let line = r#"{"id": "c1", "target": "a", "start": 0, "end": 1, "context": "ab", "target_lemma": "a"}"#;
        let input = format!("{line}\n{line}\n");
        assert!(matches!(parse_contexts(&input), Err(Error::DuplicateId(id)) if id == "c1"));
    }

    #[test]
    fn dependents_as_pairs() {
        let line = r#"{"id": "c1", "target": "варит", "start": 5, "end": 10, "context": "мама варит суп", "target_lemma": "варить", "dependents": [["мама", "nsubj"], ["суп", "obj"]]}"#;
        let ctx = &parse_contexts(line).unwrap()[0];
        let deps = ctx.dependents.as_ref().unwrap();
        assert_eq!(
            deps[1],
            Dependent {
                lemma: "суп".into(),
                relation: "obj".into()
            }
        );
        let back = write_contexts(std::slice::from_ref(ctx)).unwrap();
        assert_eq!(parse_contexts(&back).unwrap()[0], *ctx);
    }

    #[test]
    fn replace_target_uses_char_offsets() {
        let ctx = &parse_contexts(
            r#"{"id": "c1", "target": "варит", "start": 5, "end": 10, "context": "мама варит суп", "target_lemma": "варить"}"#,
        )
        .unwrap()[0];
        assert_eq!(ctx.replace_target("[MASK]"), "мама [MASK] суп");
    }

    #[test]
    fn mapping_rejects_duplicate_keys() {
        assert!(parse_mapping(r#"{"a": "s1", "a": "s2"}"#).is_err());
        let m = parse_mapping(r#"{"b": "s2", "a": "s1"}"#).unwrap();
        assert_eq!(m.get("a"), Some("s1"));
        assert_eq!(parse_mapping(&m.to_json().unwrap()).unwrap(), m);
    }

    #[test]
    fn head_rules() {
        assert_eq!(head_lemma("на заря"), "заря");
        assert_eq!(head_lemma("заря"), "заря");
        assert_eq!(HeadRule::FirstToken.apply("на заря"), "на");
        assert_eq!(HeadRule::Whole.apply("на заря"), "на заря");
    }

    #[test]
    fn role_label_rules() {
        assert!(RoleLabel::new("Agent_Metaphoric").is_ok());
        assert!(RoleLabel::new("").is_err());
        assert!(RoleLabel::new("Agent ").is_err());
        assert_ne!(
            RoleLabel::new("agent").unwrap(),
            RoleLabel::new("Agent").unwrap()
        );
    }
}
