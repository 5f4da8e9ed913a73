use std::path::PathBuf;

use proptest::prelude::*;
use sprocket::io::{self, LabelColumn, ResultFormat, ResultRecord};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[test]
fn three_channel_fixture() {
    let ds = io::parse_ts(fixture("three_channel.ts")).unwrap();
    assert_eq!(ds.name(), "tri");
    assert_eq!((ds.len(), ds.channels(), ds.series_length()), (4, 3, 10));
    assert_eq!(ds.labels(), &[0, 1, 0, 1]);
}

#[test]
fn csv_and_ts_agree() {
    let a = io::parse_csv(fixture("pair.csv"), LabelColumn::Last).unwrap();
    let b = io::parse_ts(fixture("pair.ts")).unwrap();
    assert_eq!(a.series(), b.series());
    assert_eq!(a.labels(), b.labels());
    assert_eq!(a.class_names(), b.class_names());
    assert_eq!(io::load_dataset(fixture("pair.csv")).unwrap().series(), b.series());
}

#[test]
fn results_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let records = vec![ResultRecord {
        dataset: "GunPoint".into(),
        algorithm: "rocket+sprocket".into(),
        seed: 3,
        accuracy: 0.9733333333333334,
        transform_s: 12.000000001,
        fit_s: 0.25,
        predict_s: 1e-5,
        distance_calls: 204_800,
        feature_count: 3072,
    }];
    for (file, format) in [("r.json", ResultFormat::Json), ("r.csv", ResultFormat::Csv)] {
        let path = dir.path().join(file);
        io::write_results(&records, &path, format).unwrap();
        assert_eq!(io::read_results(&path).unwrap(), records);
    }
}

fn record() -> impl Strategy<Value = ResultRecord> {
    (
        "[A-Za-z0-9_, \"-]{1,12}",
        "[a-z+-]{1,16}",
        any::<u64>(),
        0.0f64..=1.0,
        (0.0f64..1e6, 0.0f64..1e6, 0.0f64..1e6),
        any::<u64>(),
        0usize..1_000_000,
    )
        .prop_map(|(dataset, algorithm, seed, accuracy, (t, f, p), calls, features)| ResultRecord {
            dataset,
            algorithm,
            seed,
            accuracy,
            transform_s: t,
            fit_s: f,
            predict_s: p,
            distance_calls: calls,
            feature_count: features,
        })
}

proptest! {
    #[test]
    fn results_round_trip(records in prop::collection::vec(record(), 0..6)) {
        for format in [ResultFormat::Json, ResultFormat::Csv] {
            let text = io::results_to_string(&records, format).unwrap();
            prop_assert_eq!(&io::results_from_str(&text, format).unwrap(), &records);
        }
    }

    #[test]
    fn ts_parser_is_total(bytes in prop::collection::vec(any::<u8>(), 0..512)) {
        let _ = io::parse_ts_bytes(&bytes, "fuzz");
    }

    #[test]
    fn ts_parser_survives_mutation(cut in 0usize..400, insert in "[@:,a-z0-9.\n -]{0,8}") {
        let text = std::fs::read_to_string(fixture("three_channel.ts")).unwrap();
        let cut = cut.min(text.len());
        let cut = (0..=cut).rev().find(|&c| text.is_char_boundary(c)).unwrap();
        let mutated = format!("{}{}{}", &text[..cut], insert, &text[cut..]);
        let _ = io::parse_ts_str(&mutated, "fuzz");
    }

    #[test]
    fn csv_parser_is_total(text in "[0-9a-z,.\n-]{0,200}") {
        let _ = io::parse_csv_str(&text, LabelColumn::Last, "fuzz");
        let _ = io::parse_csv_str(&text, LabelColumn::First, "fuzz");
    }
}
