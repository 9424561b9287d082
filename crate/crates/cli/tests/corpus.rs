//! Replays the checked-in fuzz seeds through the same entry points as the
//! fuzz targets, so the parsers are exercised on stable toolchains too.

use std::fs;
use std::path::PathBuf;

use besov_inflate_cli::{parse_config, parse_flags, parse_n_list, RunConfig};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            (name, fs::read_to_string(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn config_seeds() {
    for (name, text) in seeds("config_parser") {
        let parsed = parse_config(&text);
        match name.as_str() {
            "duplicate.cfg" => assert!(parsed.is_err(), "{name}"),
            _ => {
                let cfg = RunConfig::resolve(parsed.unwrap()).unwrap();
                assert!(cfg.p > 2.0, "{name}");
            }
        }
    }
}

#[test]
fn flag_seeds() {
    for (name, text) in seeds("cli_flags") {
        let args = std::iter::once("besov-inflate").chain(text.split('\0'));
        let (_, settings) = parse_flags(args).unwrap_or_else(|e| panic!("{name}: {e}"));
        if name != "config" {
            RunConfig::resolve(settings).unwrap();
        }
    }
}

#[test]
fn n_list_seeds() {
    for (name, text) in seeds("n_list") {
        match parse_n_list(&text) {
            Ok(ns) => {
                let joined = ns.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
                assert_eq!(parse_n_list(&joined).unwrap(), ns, "{name}");
            }
            Err(_) => assert!(matches!(name.as_str(), "empty_entry" | "overflow"), "{name}"),
        }
    }
}
