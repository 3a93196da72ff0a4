#![allow(dead_code)]

use charrep::corpus::{canonical_token, mention_tokens, DocKind, Gender};
use charrep::embed::TrainConfig;
use charrep::fixtures::{alias_table_for, generate_synthetic_corpus, CharacterSpec, PlantedPair, SyntheticSpec};

pub const PAIR_NAMES: [&str; 8] = [
    "Ansel Moor", "Bryn Hale", "Cato Dune", "Delia Fenn", "Ezra Lowe", "Fay Marsh", "Gil Stone", "Hana Reeve",
];

fn units_of(spec: &SyntheticSpec, seed: u64) -> Vec<Vec<String>> {
    let aliases = alias_table_for(std::slice::from_ref(spec)).unwrap();
    generate_synthetic_corpus(spec, seed)
        .unwrap()
        .iter()
        .flat_map(|d| d.units())
        .map(|u| mention_tokens(u, &aliases))
        .collect()
}

/// Every unit mentions exactly one of four planted pairs: (0,1), (2,3),
/// (4,5), (6,7) in `PAIR_NAMES`.
pub fn pair_corpus(seed: u64) -> Vec<Vec<String>> {
    let spec = SyntheticSpec {
        documents: 100,
        units_per_document: 100,
        tokens_per_unit: 20,
        pair_rate: 1.0,
        base_pair_rate: 0.0,
        adjective_rate: 0.0,
        topic_rate: 0.5,
        characters: PAIR_NAMES
            .iter()
            .map(|n| CharacterSpec::new(n, &[], Gender::U, 1.0, &[]))
            .collect(),
        planted_pairs: (0..4)
            .map(|k| PlantedPair {
                a: PAIR_NAMES[2 * k].to_string(),
                b: PAIR_NAMES[2 * k + 1].to_string(),
                multiplier: 1.0,
            })
            .collect(),
        ..SyntheticSpec::empty("pairs", DocKind::Longform)
    };
    units_of(&spec, seed)
}

pub fn token(name: &str) -> String {
    canonical_token(name)
}

/// Two characters with opposite planted adjectives plus unmarked filler
/// characters.
pub fn gentle_harsh_corpus(seed: u64) -> Vec<Vec<String>> {
    let spec = SyntheticSpec {
        documents: 40,
        units_per_document: 50,
        tokens_per_unit: 24,
        pair_rate: 0.2,
        adjective_rate: 0.8,
        characters: vec![
            CharacterSpec::new("Amos Lyle", &[], Gender::M, 3.0, &["gentle", "soft", "mild"]),
            CharacterSpec::new("Boris Kane", &[], Gender::M, 3.0, &["harsh", "rough", "stern"]),
            CharacterSpec::new("Cleo Ward", &[], Gender::F, 2.0, &[]),
            CharacterSpec::new("Dina Voss", &[], Gender::F, 2.0, &[]),
        ],
        ..SyntheticSpec::empty("gentle", DocKind::Longform)
    };
    units_of(&spec, seed)
}

pub fn embed_config(seed: u64) -> TrainConfig {
    TrainConfig {
        dim: 50,
        window: 5,
        min_count: 3,
        negative: 5,
        epochs: 5,
        seed,
        ..TrainConfig::default()
    }
}
