//! Readers must reject malformed input with an error, never a panic. Inputs are
//! the checked-in fuzz seeds with random byte edits, plus arbitrary strings.

use std::fs;
use std::path::PathBuf;

use proptest::prelude::*;

use limitscout::expr::Expression;
use limitscout::geometry::Center;
use limitscout::paths::point_at;
use limitscout::witness::{read_interval_nest, read_path_spec, read_polyline_report, read_samples_csv};

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<Vec<u8>> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| fs::read(e.unwrap().path()).unwrap())
        .collect();
    out.sort();
    out
}

fn mutated(target: &'static str) -> impl Strategy<Value = Vec<u8>> {
    let all = seeds(target);
    (0..all.len(), prop::collection::vec((any::<prop::sample::Index>(), any::<u8>(), 0u8..3), 0..6)).prop_map(
        move |(i, edits)| {
            let mut s = all[i].clone();
            for (at, byte, kind) in edits {
                if s.is_empty() {
                    s.push(byte);
                    continue;
                }
                let k = at.index(s.len());
                match kind {
                    0 => s[k] = byte,
                    1 => s.insert(k, byte),
                    _ => {
                        s.remove(k);
                    }
                }
            }
            s
        },
    )
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn expression_parser_never_panics(bytes in mutated("parse_expr"), junk in "\\PC{0,40}") {
        for src in [text(&bytes[1.min(bytes.len())..]), junk] {
            for arity in 1..=4 {
                if let Ok(e) = Expression::parse(&src, arity) {
                    let back = Expression::parse(&e.to_string(), arity).unwrap();
                    let p = vec![0.3; arity];
                    prop_assert_eq!(e.evaluate(&p).unwrap(), back.evaluate(&p).unwrap());
                }
            }
        }
    }

    #[test]
    fn samples_reader_never_panics(bytes in mutated("samples_csv")) {
        let _ = read_samples_csv(&text(&bytes));
    }

    #[test]
    fn nest_reader_never_panics(bytes in mutated("interval_nest")) {
        if let Ok(nest) = read_interval_nest(&text(&bytes)) {
            for iv in &nest.intervals {
                prop_assert!(iv.contains(nest.phi0));
            }
        }
    }

    #[test]
    fn path_reader_never_panics(bytes in mutated("path_spec")) {
        if let Ok(path) = read_path_spec(&text(&bytes)) {
            let c = Center::origin(path.dim().unwrap_or(2)).unwrap();
            for r in [1.0, 1e-3, 1e-12] {
                let _ = point_at(&path, &c, r);
            }
        }
    }

    #[test]
    fn polyline_reader_never_panics(bytes in mutated("polyline_report")) {
        let _ = read_polyline_report(&text(&bytes));
    }
}
