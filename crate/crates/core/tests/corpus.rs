//! The fuzz seed corpora replayed through the same entry points as the fuzz targets.

use std::fs;
use std::path::PathBuf;

use liouville_core::conjugate::{read_samples_json, write_samples_json};
use liouville_core::manifold::ManifoldConfig;
use liouville_core::suite::{SuiteConfig, SuiteReport};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn spec_seeds_parse_or_fail_cleanly() {
    let mut accepted = 0;
    for (name, text) in seeds("spec_json") {
        match ManifoldConfig::from_json_str(&text) {
            Ok(cfg) => {
                let _ = cfg.validate();
                accepted += 1;
            }
            Err(_) => assert!(name == "unknown_field.json", "{name} should parse"),
        }
    }
    assert!(accepted >= 5);
    for (name, text) in seeds("spec_toml") {
        let parsed = ManifoldConfig::from_toml_str(&text);
        assert_eq!(parsed.is_err(), name == "truncated.toml", "{name}");
        if let Ok(cfg) = parsed {
            let _ = cfg.validate();
        }
    }
}

#[test]
fn inverse_profile_seed_is_rejected_by_the_sign_conditions() {
    let text = seeds("spec_json").into_iter().find(|(n, _)| n == "inverse_n3.json").unwrap().1;
    let err = ManifoldConfig::from_json_str(&text).unwrap().validate().unwrap_err();
    assert!(matches!(err, liouville_core::Error::ConditionViolated(_)));
}

#[test]
fn suite_config_seeds() {
    for (name, text) in seeds("suite_config") {
        let cfg = if name.ends_with(".toml") { SuiteConfig::from_toml_str(&text) } else { SuiteConfig::from_json_str(&text) }
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(cfg.check().is_err(), name == "bad_dimension.json", "{name}");
    }
}

#[test]
fn report_seeds_round_trip() {
    for (name, text) in seeds("report_json") {
        let r: SuiteReport = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let again: SuiteReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(r, again);
    }
}

#[test]
fn sample_seeds_round_trip() {
    for (name, text) in seeds("samples_json") {
        let samples = read_samples_json(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let mut out = Vec::new();
        write_samples_json(&samples, &mut out).unwrap();
        assert_eq!(read_samples_json(std::str::from_utf8(&out).unwrap()).unwrap(), samples);
    }
}
