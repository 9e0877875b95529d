//! File-level ingest behavior: loading day files from disk, merge order,
//! and failure modes.

use ghicast_core::ingest::{
    load_station, serialize_day_file, station_by_id, IngestError, RowLayout,
};
use ghicast_core::synth::{gen_synthetic_with, SynthOptions};

fn day_opts(start_day: u32) -> SynthOptions {
    SynthOptions {
        start_day,
        day_stride: 1,
        sentinel_rate: 0.0,
        year: 2018,
        ..SynthOptions::default()
    }
}

/// Write `days` consecutive synthetic day files for bondville/2018.
fn write_days(root: &std::path::Path, start_day: u32, days: u32, seed: u64) {
    let info = station_by_id("bondville").unwrap();
    let ds = gen_synthetic_with(seed, days, &day_opts(start_day));
    let dir = root.join(info.id).join("2018");
    std::fs::create_dir_all(&dir).unwrap();
    for day in 0..days {
        let jday = start_day + day;
        let rows: Vec<_> = ds
            .rows()
            .iter()
            .filter(|o| o.jday == jday)
            .cloned()
            .collect();
        let text = serialize_day_file(&ds.meta, &rows, RowLayout::surfrad());
        std::fs::write(
            dir.join(ghicast_core::ingest::day_file_name(info, 2018, jday)),
            text,
        )
        .unwrap();
    }
}

#[test]
fn three_day_files_merge_sorted() {
    let tmp = tempfile::tempdir().unwrap();
    write_days(tmp.path(), 100, 3, 1);
    let info = station_by_id("bondville").unwrap();
    let ds = load_station(tmp.path(), info, &[2018]).unwrap();
    assert_eq!(ds.len(), 3 * 1440);
    for pair in ds.rows().windows(2) {
        assert!(pair[0].timestamp() < pair[1].timestamp());
    }
    assert_eq!(ds.meta.name, "bondville");
}

#[test]
fn empty_directory_is_missing_data() {
    let tmp = tempfile::tempdir().unwrap();
    let info = station_by_id("bondville").unwrap();
    match load_station(tmp.path(), info, &[2018]) {
        Err(IngestError::MissingData { station, year, .. }) => {
            assert_eq!(station, "bondville");
            assert_eq!(year, 2018);
        }
        other => panic!("expected MissingData, got {other:?}"),
    }
}

#[test]
fn year_without_files_is_missing_even_when_other_years_exist() {
    let tmp = tempfile::tempdir().unwrap();
    write_days(tmp.path(), 100, 1, 2);
    let info = station_by_id("bondville").unwrap();
    assert!(load_station(tmp.path(), info, &[2018]).is_ok());
    assert!(matches!(
        load_station(tmp.path(), info, &[2018, 2019]),
        Err(IngestError::MissingData { year: 2019, .. })
    ));
}

#[test]
fn colliding_minutes_across_files_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    write_days(tmp.path(), 100, 1, 3);
    let info = station_by_id("bondville").unwrap();
    // A second file claiming a different julian day but holding the same
    // civil timestamps.
    let ds = gen_synthetic_with(3, 1, &day_opts(100));
    let dir = tmp.path().join(info.id).join("2018");
    let text = serialize_day_file(&ds.meta, ds.rows(), RowLayout::surfrad());
    std::fs::write(dir.join("bon18101.dat"), text).unwrap();
    match load_station(tmp.path(), info, &[2018]) {
        Err(IngestError::InFile { source, .. }) => {
            assert!(matches!(*source, IngestError::DuplicateTimestamp { .. }));
        }
        other => panic!("expected duplicate-timestamp failure, got {other:?}"),
    }
}

#[test]
fn load_is_insensitive_to_directory_iteration_order() {
    // Same files with different on-disk creation order must merge equally.
    let one = tempfile::tempdir().unwrap();
    write_days(one.path(), 120, 3, 4);
    let two = tempfile::tempdir().unwrap();
    let info = station_by_id("bondville").unwrap();
    let dir = two.path().join(info.id).join("2018");
    std::fs::create_dir_all(&dir).unwrap();
    let mut names: Vec<_> = std::fs::read_dir(one.path().join(info.id).join("2018"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    names.sort();
    names.reverse();
    for p in names {
        std::fs::copy(&p, dir.join(p.file_name().unwrap())).unwrap();
    }
    let a = load_station(one.path(), info, &[2018]).unwrap();
    let b = load_station(two.path(), info, &[2018]).unwrap();
    assert_eq!(a.rows(), b.rows());
}

#[test]
fn golden_round_trip_over_a_full_day_file() {
    let tmp = tempfile::tempdir().unwrap();
    write_days(tmp.path(), 150, 1, 5);
    let info = station_by_id("bondville").unwrap();
    let path = tmp
        .path()
        .join("bondville/2018")
        .join(ghicast_core::ingest::day_file_name(info, 2018, 150));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    let meta = ghicast_core::ingest::parse_header(
        lines.next().unwrap(),
        lines.next().unwrap(),
    )
    .unwrap();
    let body: String = lines.collect::<Vec<_>>().join("\n");
    let rows = ghicast_core::ingest::parse_rows(&body, RowLayout::surfrad()).unwrap();
    assert_eq!(rows.len(), 1440);
    let rebuilt = serialize_day_file(&meta, &rows, RowLayout::surfrad());
    let orig_tokens: Vec<&str> = text.split_whitespace().collect();
    let new_tokens: Vec<&str> = rebuilt.split_whitespace().collect();
    assert_eq!(orig_tokens.len(), new_tokens.len());
    for (a, b) in orig_tokens.iter().zip(&new_tokens) {
        if let (Ok(x), Ok(y)) = (a.parse::<f64>(), b.parse::<f64>()) {
            assert_eq!(x, y, "token {a} vs {b}");
        } else {
            assert_eq!(a, b);
        }
    }
}
