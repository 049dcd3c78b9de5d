//! Replays the fuzz corpus on stable and checks the same round-trip
//! invariants the fuzz targets assert, plus generated inputs.

use std::fmt::Write as _;
use std::path::PathBuf;

use bloch_cli::config::parse_config;
use bloch_cli::potential::decode_coefficients;
use proptest::prelude::*;

fn corpus(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(PathBuf, String)> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    out
}

fn config_round_trip(text: &str) -> bool {
    let Ok(config) = parse_config(text) else {
        return false;
    };
    let again = toml::to_string(&config).unwrap();
    assert_eq!(parse_config(&again).unwrap(), config);
    true
}

fn table_round_trip(text: &str) -> bool {
    let Ok(modes) = decode_coefficients(text) else {
        return false;
    };
    let mut table = String::new();
    for (n, c) in &modes {
        let _ = writeln!(table, "{} {} {:?} {:?}", n[0], n[1], c.re, c.im);
    }
    assert_eq!(decode_coefficients(&table).unwrap(), modes);
    true
}

#[test]
fn config_corpus() {
    let seeds = corpus("fuzz_config");
    let accepted = seeds.iter().filter(|(_, t)| config_round_trip(t)).count();
    assert!(accepted >= seeds.len() - 1, "only {accepted} of {} seeds parse", seeds.len());
}

#[test]
fn potential_corpus() {
    let seeds = corpus("fuzz_potential");
    let accepted = seeds.iter().filter(|(_, t)| table_round_trip(t)).count();
    assert_eq!(accepted, 2);
}

proptest! {
    #[test]
    fn arbitrary_text_never_panics(text in "\\PC{0,200}") {
        config_round_trip(&text);
        table_round_trip(&text);
    }

    #[test]
    fn tables_round_trip(rows in prop::collection::vec((-50i64..50, -50i64..50, -1e6f64..1e6, -1e6f64..1e6), 1..20)) {
        let mut text = String::new();
        for (a, b, re, im) in &rows {
            let _ = writeln!(text, "{a} {b} {re} {im}");
        }
        let unique = {
            let mut keys: Vec<_> = rows.iter().map(|r| (r.0, r.1)).collect();
            keys.sort();
            keys.dedup();
            keys.len() == rows.len()
        };
        prop_assert_eq!(table_round_trip(&text), unique);
    }

    #[test]
    fn mutated_configs_never_panic(cut in 0usize..400, junk in "[\\[\\]=\"a-z0-9 .\\n-]{0,12}") {
        let seeds = corpus("fuzz_config");
        for (_, text) in &seeds {
            let mut s = text.clone();
            let at = (0..=cut.min(s.len())).rev().find(|&i| s.is_char_boundary(i)).unwrap();
            s.insert_str(at, &junk);
            config_round_trip(&s);
        }
    }

    #[test]
    fn lattice_blocks_round_trip(nmax in 1usize..12, a in -2.0f64..2.0, b in -2.0f64..2.0, tau in 0.2f64..2.0) {
        let text = format!(
            "task = \"dispersion\"\n[lattice]\nperiods = [[1.0, 0.0], [{a}, {tau}]]\nnmax = {nmax}\n[potential]\nkind = \"cos2d\"\na = {a}\nb = {b}\n"
        );
        prop_assert!(config_round_trip(&text));
    }
}
