use permlab::enumeration::EnumConfig;
use permlab::table::{cache_path, table_build};
use permlab::Permutation;

#[test]
fn extending_a_cached_table_only_computes_new_rows() {
    let dir = tempfile::tempdir().unwrap();
    let q: Permutation = "1342".parse().unwrap();
    let cfg = EnumConfig::default();

    let first = table_build(&q, 6, 2, Some(dir.path()), &cfg).unwrap();
    assert_eq!(first.computed, (0..=6).collect::<Vec<_>>());
    assert!(cache_path(dir.path(), &q).exists());

    let second = table_build(&q, 8, 2, Some(dir.path()), &cfg).unwrap();
    assert_eq!(second.reused, (0..=6).collect::<Vec<_>>());
    assert_eq!(second.computed, vec![7, 8]);
    assert_eq!(second.table.avoiders(8).unwrap().to_string(), "15485");

    let cold = table_build(&q, 8, 2, None, &cfg).unwrap();
    assert_eq!(cold.table, second.table);
}

#[test]
fn wider_r_range_recomputes() {
    let dir = tempfile::tempdir().unwrap();
    let q: Permutation = "231".parse().unwrap();
    let cfg = EnumConfig::sequential();
    table_build(&q, 6, 1, Some(dir.path()), &cfg).unwrap();
    let wider = table_build(&q, 6, 3, Some(dir.path()), &cfg).unwrap();
    assert!(wider.computed.contains(&6));
    assert_eq!(wider.table.count(6, 1).unwrap().to_string(), "84");
}
