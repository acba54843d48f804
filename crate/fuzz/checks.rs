// Shared by the fuzz targets and the corpus replay test in kq-core.

/// Inputs longer than this only slow the fuzzer down.
pub const MAX_INPUT: usize = 512;

pub fn check_literal(data: &[u8]) {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if s.len() > MAX_INPUT {
        return;
    }
    if let Ok(lit) = kq_core::numeric::parse_literal(s) {
        let printed = lit.to_string();
        let again = kq_core::numeric::parse_literal(&printed).expect("printed literal parses");
        assert_eq!(again, lit, "literal round trip through `{printed}`");
        if s.len() <= 64 {
            let _ = lit.to_field();
        }
    }
}

pub fn check_word(data: &[u8]) {
    use kq_core::words::{parse_sequence, Alphabet, Sequence};
    let Ok(s) = std::str::from_utf8(data) else { return };
    if s.len() > MAX_INPUT {
        return;
    }
    for a in [Alphabet::Binary01, Alphabet::Ternary012, Alphabet::Signed] {
        let Ok(seq) = parse_sequence(s, a) else { continue };
        let printed = match &seq {
            Sequence::Finite(w) => w.to_string(),
            Sequence::Periodic(t) => t.to_string(),
        };
        let again = parse_sequence(&printed, a).expect("printed word parses");
        assert_eq!(again, seq, "word round trip through `{printed}`");
    }
}

pub fn check_certificate(data: &[u8]) {
    use kq_core::certificate::{check, Certificate};
    let Ok(s) = std::str::from_utf8(data) else { return };
    if s.len() > 4 * MAX_INPUT {
        return;
    }
    if let Ok(cert) = Certificate::from_json(s) {
        let text = serde_json::to_string(&cert.to_json()).expect("certificate serializes");
        let again = Certificate::from_json(&text).expect("serialized certificate parses");
        assert_eq!(again, cert);
        if cert.q.len() <= 64 {
            assert_eq!(check(&cert).is_ok(), check(&again).is_ok());
        }
    }
}

pub fn check_field_expr(data: &[u8]) {
    use kq_core::numeric::{field_from_literal, format_element, parse_element};
    let Ok(s) = std::str::from_utf8(data) else { return };
    if s.len() > MAX_INPUT {
        return;
    }
    for lit in ["5/3", "bonacci:3"] {
        let f = field_from_literal(lit).expect("fixed base");
        if let Ok(x) = parse_element(&f, s) {
            let printed = format_element(&x);
            let again = parse_element(&f, &printed).expect("printed element parses");
            assert_eq!(again, x, "element round trip through `{printed}`");
        }
    }
}
