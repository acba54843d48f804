//! Replays the checked-in fuzz seeds through the fuzz target bodies.

#[allow(dead_code)]
#[path = "../../../fuzz/checks.rs"]
mod checks;

use std::path::PathBuf;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn literal_seeds() {
    for (_, d) in seeds("parse_literal") {
        checks::check_literal(&d);
    }
}

#[test]
fn word_seeds() {
    for (_, d) in seeds("parse_word") {
        checks::check_word(&d);
    }
}

#[test]
fn certificate_seeds() {
    let all = seeds("parse_certificate");
    for (_, d) in &all {
        checks::check_certificate(d);
    }
    let valid = all.iter().filter(|(n, _)| n == "null_infinite" || n == "odd_cardinality");
    for (name, d) in valid {
        let c = kq_core::certificate::Certificate::from_json(std::str::from_utf8(d).unwrap()).unwrap();
        assert!(kq_core::certificate::check(&c).is_ok(), "{name}");
    }
}

#[test]
fn field_expr_seeds() {
    for (_, d) in seeds("parse_field_expr") {
        checks::check_field_expr(&d);
    }
}

mod random {
    use super::checks;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]

        #[test]
        fn literals(s in "[-+0-9./:a-z,]{0,40}") {
            checks::check_literal(s.as_bytes());
        }

        #[test]
        fn words(s in "[-0-2()^*0-9 ]{0,30}") {
            checks::check_word(s.as_bytes());
        }

        #[test]
        fn field_exprs(s in "[-+*/^q0-9 ]{0,30}") {
            checks::check_field_expr(s.as_bytes());
        }

        #[test]
        fn certificates(lhs in "[-+*/^q0-9]{1,8}", rhs in "[-+*/^q0-9]{1,8}", rel in "(<|<=|=|>=|>|!=|~)", q in "(3/2|bonacci:3|2|x)") {
            let doc = serde_json::json!({"claim": "c", "q": q, "hypotheses": [{"name": "h", "lhs": lhs, "rel": rel, "rhs": rhs}]});
            checks::check_certificate(doc.to_string().as_bytes());
        }
    }
}
