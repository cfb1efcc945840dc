//! The bundled vocabulary and its split into search requests.

use std::collections::BTreeSet;

use cci::csv_io::{load_table, shipped_vocabulary, SHIPPED_BENCHMARK};
use cci_core::index::{partition_vocabulary, MAX_GROUP_SIZE};

#[test]
fn partition_covers_every_term_once() {
    let vocab = shipped_vocabulary();
    assert!(vocab.benchmark().text.to_lowercase().starts_with(SHIPPED_BENCHMARK));
    let groups = partition_vocabulary(&vocab, MAX_GROUP_SIZE).unwrap();
    let mut seen = BTreeSet::new();
    let mut last_category = 0;
    for g in &groups {
        assert!(g.len() <= MAX_GROUP_SIZE);
        assert_eq!(g.iter().filter(|t| t.is_benchmark).count(), 1);
        let cats: BTreeSet<u8> = g.iter().filter(|t| !t.is_benchmark).map(|t| t.category).collect();
        assert_eq!(cats.len(), 1, "group mixes categories");
        let c = *cats.iter().next().unwrap();
        assert!(c >= last_category, "groups not in category order");
        last_category = c;
        for t in g.iter().filter(|t| !t.is_benchmark) {
            assert!(seen.insert(t.text.clone()), "`{}` in two groups", t.text);
        }
    }
    assert_eq!(seen.len(), vocab.terms().len());
    // Ceiling division per category.
    let mut expected = 0;
    for c in 1..=7u8 {
        let k = vocab.terms().iter().filter(|t| t.category == c).count();
        expected += k.div_ceil(MAX_GROUP_SIZE - 1);
    }
    assert_eq!(groups.len(), expected);
}

#[test]
fn group_fixtures_follow_the_partition() {
    let vocab = shipped_vocabulary();
    let groups = partition_vocabulary(&vocab, MAX_GROUP_SIZE).unwrap();
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/groups");
    for (k, g) in groups.iter().enumerate() {
        let table = load_table(dir.join(format!("group_{:02}.csv", k + 1))).unwrap();
        let names: Vec<&str> = g.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(table.columns, names);
    }
}
