mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use proptest::sample::subsequence;

use semsketch::corpus::{parse_mapping, parse_records, write_records, IngestConfig};
use semsketch::dataset::{split_dataset, SplitName, SplitOptions, SplitSpec};
use semsketch::eval::accuracy;
use semsketch::fill::CooccurrenceModel;
use semsketch::matchers::{
    baseline_candidates, flatten_sketch, match_all, MatchConfig, Plugins, Strategy as Matcher,
};
use semsketch::sampling::Sampler;
use semsketch::sketch::{anonymize, build_all, parse_sketches, select_senses, write_sketches};
use semsketch::{BuildConfig, Context, DependencyRecord, Flag, Mapping, SenseKey};

use common::{closed_world, oracle_build_all, record, ROLES};

const GROUPS: [&str; 4] = ["брать", "вести", "гнать", "жечь"];
const CLASSES: [&str; 3] = ["A", "B", "C"];
const FILLERS: [&str; 7] = ["дом", "лес", "на заря", "мост", "сад", "вода", "ночь"];

fn arb_records(max: usize) -> impl Strategy<Value = Vec<DependencyRecord>> {
    prop::collection::vec(
        (
            0..4usize,
            0..3usize,
            0..4usize,
            0..7usize,
            prop_oneof![6 => Just(0u8), 1 => 1..16u8],
        ),
        0..max,
    )
    .prop_map(|rows| {
        rows.into_iter()
            .map(|(g, c, r, f, bits)| {
                let flags: Vec<Flag> = Flag::ALL
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| bits & (1 << i) != 0)
                    .map(|(_, f)| *f)
                    .collect();
                record(
                    &SenseKey::new(GROUPS[g], CLASSES[c]).unwrap(),
                    ROLES[r],
                    FILLERS[f],
                    &flags,
                )
            })
            .collect()
    })
}

fn arb_config() -> impl Strategy<Value = BuildConfig> {
    (
        1..25u64,
        1..4usize,
        1..5usize,
        1..6usize,
        subsequence(Flag::ALL.to_vec(), 0..=Flag::ALL.len()),
    )
        .prop_map(|(t, m, r, f, excluded)| BuildConfig {
            dependency_threshold: t,
            min_meanings: m,
            max_roles: r,
            max_fillers_per_role: f,
            excluded_flags: excluded.into_iter().collect(),
        })
}

fn word() -> impl Strategy<Value = String> {
    "[a-zа-я][a-zа-я ]{0,6}[a-zа-я]"
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn build_matches_brute_force_tally(records in arb_records(300), config in arb_config()) {
        prop_assert_eq!(build_all(&records, &config).unwrap(), oracle_build_all(&records, &config));
    }

    #[test]
    fn raising_threshold_never_adds_senses(records in arb_records(300), config in arb_config()) {
        let higher = BuildConfig { dependency_threshold: config.dependency_threshold + 1, ..config.clone() };
        prop_assert!(select_senses(&records, &higher).is_subset(&select_senses(&records, &config)));
    }

    #[test]
    fn truncation_keeps_a_prefix(records in arb_records(300), config in arb_config()) {
        let wide = BuildConfig { max_roles: 100, max_fillers_per_role: 100, ..config.clone() };
        let full = build_all(&records, &wide).unwrap();
        let cut = build_all(&records, &config).unwrap();
        prop_assert_eq!(full.len(), cut.len());
        for (f, c) in full.iter().zip(&cut) {
            prop_assert!(c.sections.len() <= config.max_roles);
            prop_assert_eq!(&f.sections[..c.sections.len()].iter().map(|s| &s.role).collect::<Vec<_>>(),
                            &c.sections.iter().map(|s| &s.role).collect::<Vec<_>>());
            for (fs, cs) in f.sections.iter().zip(&c.sections) {
                prop_assert!(cs.fillers.len() <= config.max_fillers_per_role);
                prop_assert_eq!(&fs.fillers[..cs.fillers.len()], &cs.fillers[..]);
                prop_assert_eq!(fs.total_count, cs.total_count);
                prop_assert_eq!(fs.fillers.iter().map(|x| x.count).sum::<u64>(), fs.total_count);
            }
        }
    }

    #[test]
    fn anonymization_is_seeded_and_reversible(records in arb_records(200), seed in any::<u64>()) {
        let config = BuildConfig { dependency_threshold: 1, min_meanings: 1, ..BuildConfig::default() };
        let named = build_all(&records, &config).unwrap();
        let a = anonymize(&named, seed).unwrap();
        prop_assert_eq!(&a, &anonymize(&named, seed).unwrap());
        prop_assert_eq!(a.sketches.len(), named.len());
        for sk in &a.sketches {
            prop_assert!(sk.sense.is_none());
            let sense = a.sense_of(&sk.id).unwrap();
            let original = named.iter().find(|n| n.sense.as_ref() == Some(sense)).unwrap();
            prop_assert_eq!(&original.sections, &sk.sections);
        }
    }

    #[test]
    fn records_round_trip_through_tsv(rows in prop::collection::vec((word(), word(), word(), word(), word(), word(), 0..16u8), 0..20)) {
        let records: Vec<DependencyRecord> = rows
            .into_iter()
            .enumerate()
            .map(|(i, (lg, class, role, lemma, surface, pos, bits))| DependencyRecord {
                sentence_id: format!("s{i}"),
                sense: SenseKey::new(lg, class.replace(' ', "_")).unwrap(),
                role: semsketch::RoleLabel::new(role.replace(' ', "_")).unwrap(),
                filler_lemma: lemma,
                filler_surface: surface,
                filler_pos: pos.replace(' ', "_"),
                flags: Flag::ALL.iter().enumerate().filter(|(j, _)| bits & (1 << j) != 0).map(|(_, f)| *f).collect(),
            })
            .collect();
        let text = write_records(&records);
        prop_assert_eq!(parse_records(&text, &IngestConfig::default()).unwrap(), records);
    }

    #[test]
    fn sketches_round_trip_through_jsonl(records in arb_records(200), config in arb_config()) {
        let built = build_all(&records, &config).unwrap();
        prop_assert_eq!(parse_sketches(&write_sketches(&built).unwrap()).unwrap(), built);
    }

    #[test]
    fn context_spans_are_character_offsets(prefix in "[а-яa-z ,]{0,12}", target in "[а-яa-z]{1,8}", suffix in "[а-яa-z ,.]{0,12}") {
        let start = prefix.chars().count();
        let ctx = Context {
            id: "c".into(),
            target: target.clone(),
            start,
            end: start + target.chars().count(),
            text: format!("{prefix}{target}{suffix}"),
            target_lemma: target.clone(),
            dependents: None,
        };
        prop_assert!(ctx.validate().is_ok());
        prop_assert_eq!(ctx.span_text(), target.clone());
        prop_assert_eq!(ctx.replace_target("[MASK]"), format!("{prefix}[MASK]{suffix}"));
        let shifted = Context { start: start + 1, end: ctx.end + 1, ..ctx.clone() };
        prop_assert!(shifted.validate().is_err());
    }

    #[test]
    fn accuracy_ignores_pair_order(pairs in prop::collection::btree_map("[a-z]{1,4}", 0..5u8, 0..30), hits in prop::collection::vec(any::<bool>(), 30), seed in any::<u64>()) {
        let gold: Mapping = pairs.iter().map(|(c, s)| (c.clone(), format!("sk{s}"))).collect();
        let mut pred_pairs: Vec<(String, String)> = pairs
            .iter()
            .zip(&hits)
            .map(|((c, s), hit)| (c.clone(), if *hit { format!("sk{s}") } else { "other".into() }))
            .collect();
        let expected = hits.iter().take(pairs.len()).filter(|h| **h).count();
        let r = accuracy(&pred_pairs.iter().cloned().collect(), &gold);
        prop_assert_eq!(r.n_correct, expected);
        prop_assert!((0.0..=1.0).contains(&r.accuracy));
        Sampler::new(seed).shuffle(&mut pred_pairs);
        prop_assert_eq!(accuracy(&pred_pairs.into_iter().collect(), &gold), r);
    }

    #[test]
    fn mapping_json_round_trip(pairs in prop::collection::btree_map("\\PC{1,6}", "\\PC{1,6}", 0..20)) {
        let m: Mapping = pairs.into_iter().collect();
        prop_assert_eq!(parse_mapping(&m.to_json().unwrap()).unwrap(), m);
    }

    #[test]
    fn sampler_draws_distinct_indices(seed in any::<u64>(), n in 0..200usize, k in 0..200usize) {
        let k = k.min(n);
        let picked = Sampler::new(seed).sample_indices(n, k);
        prop_assert_eq!(picked.len(), k);
        prop_assert!(picked.iter().all(|&i| i < n));
        prop_assert_eq!(picked.iter().collect::<BTreeSet<_>>().len(), k);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn matching_ignores_input_order(seed in any::<u64>()) {
        let world = closed_world(4, 60, 4, seed);
        let config = BuildConfig { dependency_threshold: 10, min_meanings: 1, ..BuildConfig::default() };
        let sketches = anonymize(&build_all(&world.records, &config).unwrap(), seed).unwrap().sketches;
        let contexts: Vec<Context> = world.pool.values().flatten().cloned().collect();
        let model = CooccurrenceModel::train(&world.records);
        let mut rng = Sampler::new(seed ^ 1);
        let mut sk2 = sketches.clone();
        let mut ctx2 = contexts.clone();
        rng.shuffle(&mut sk2);
        rng.shuffle(&mut ctx2);
        for strategy in [Matcher::BaselineIntersection, Matcher::TemplateScore, Matcher::PredicateRestoration] {
            let cfg = MatchConfig::with_strategy(strategy);
            let plugins = Plugins { fill: Some(&model), embed: None };
            let a = match_all(&contexts, &sketches, &cfg, plugins).unwrap();
            let b = match_all(&ctx2, &sk2, &MatchConfig { jobs: 3, ..cfg.clone() }, plugins).unwrap();
            prop_assert_eq!(a.mapping, b.mapping);
            prop_assert_eq!(a.flagged.into_iter().collect::<BTreeSet<_>>(), b.flagged.into_iter().collect::<BTreeSet<_>>());
        }
    }

    #[test]
    fn baseline_candidates_grow_with_top_n(seed in any::<u64>(), small in 1..6usize) {
        let world = closed_world(3, 80, 5, seed);
        let model = CooccurrenceModel::train(&world.records);
        for ctx in world.pool.values().flatten() {
            let narrow = MatchConfig { top_n: small, ..MatchConfig::default() };
            let a = baseline_candidates(ctx, &model, &narrow).unwrap();
            let b = baseline_candidates(ctx, &model, &MatchConfig::default()).unwrap();
            prop_assert!(a.is_subset(&b));
        }
    }

    #[test]
    fn splits_are_seeded(seed in any::<u64>()) {
        let world = closed_world(6, 30, 6, 3);
        let config = BuildConfig { dependency_threshold: 5, min_meanings: 1, ..BuildConfig::default() };
        let anon = anonymize(&build_all(&world.records, &config).unwrap(), seed).unwrap();
        let specs = [SplitSpec::new(SplitName::Trial, 2, 3), SplitSpec::new(SplitName::Dev, 4, 4)];
        let a = split_dataset(&anon, &world.pool, &specs, seed, &SplitOptions::default()).unwrap();
        let b = split_dataset(&anon, &world.pool, &specs, seed, &SplitOptions::default()).unwrap();
        prop_assert_eq!(&a.datasets, &b.datasets);
        for ds in &a.datasets {
            prop_assert!(ds.validate().is_ok());
        }
    }
}

#[test]
fn flattened_sketch_lists_roles_and_fillers_in_order() {
    let sense = SenseKey::new("печь", "TO_BAKE").unwrap();
    let mut records = Vec::new();
    for (role, filler, n) in [
        ("Object", "хлеб", 3),
        ("Object", "пирог", 2),
        ("Agent", "бабушка", 1),
    ] {
        for _ in 0..n {
            records.push(record(&sense, role, filler, &[]));
        }
    }
    let config = BuildConfig {
        dependency_threshold: 1,
        min_meanings: 1,
        ..BuildConfig::default()
    };
    let sketch = &build_all(&records, &config).unwrap()[0];
    assert_eq!(flatten_sketch(sketch), "Object: хлеб пирог; Agent: бабушка");
    let by_role: BTreeMap<&str, usize> = sketch
        .sections
        .iter()
        .map(|s| (s.role.as_str(), s.fillers.len()))
        .collect();
    assert_eq!(by_role, BTreeMap::from([("Agent", 1), ("Object", 2)]));
}
