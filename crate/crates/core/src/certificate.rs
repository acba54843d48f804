//! Machine-checkable claim records.
//!
//! A certificate is a list of exact inequalities between elements of ℚ(q),
//! each written as a polynomial in `q` (see [`parse_element`]). [`check`]
//! re-parses every side in the named field and re-decides the relation.

use crate::numeric::{field_from_literal, format_element, parse_element, Field, FieldElement, NumError};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rel {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Rel {
    pub fn holds(self, o: Ordering) -> bool {
        match self {
            Rel::Lt => o == Ordering::Less,
            Rel::Le => o != Ordering::Greater,
            Rel::Eq => o == Ordering::Equal,
            Rel::Ge => o != Ordering::Less,
            Rel::Gt => o == Ordering::Greater,
        }
    }
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub lhs: String,
    pub rel: Rel,
    pub rhs: String,
}

impl Hypothesis {
    pub fn new(name: &str, lhs: &FieldElement, rel: Rel, rhs: &FieldElement) -> Self {
        Hypothesis { name: name.to_string(), lhs: format_element(lhs), rel, rhs: format_element(rhs) }
    }

    pub fn holds_in(&self, field: &Arc<Field>) -> Result<bool, CertError> {
        let l = parse_element(field, &self.lhs)?;
        let r = parse_element(field, &self.rhs)?;
        Ok(self.rel.holds(l.compare(&r)?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub claim: String,
    pub q: String,
    pub hypotheses: Vec<Hypothesis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_interval: Option<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CertError {
    #[error(transparent)]
    Numeric(#[from] NumError),
    #[error("malformed certificate: {0}")]
    Malformed(String),
    #[error("hypothesis `{0}` does not hold")]
    Fails(String),
    #[error("witness interval is empty")]
    EmptyWitness,
}

impl Certificate {
    pub fn new(claim: &str, field: &Arc<Field>) -> Self {
        Certificate {
            claim: claim.to_string(),
            q: field.label().to_string(),
            hypotheses: Vec::new(),
            witness_interval: None,
            level: None,
            depth: None,
        }
    }

    pub fn push(&mut self, name: &str, lhs: &FieldElement, rel: Rel, rhs: &FieldElement) {
        self.hypotheses.push(Hypothesis::new(name, lhs, rel, rhs));
    }

    pub fn set_witness(&mut self, lo: &FieldElement, hi: &FieldElement) {
        self.witness_interval = Some([format_element(lo), format_element(hi)]);
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, CertError> {
        serde_json::from_str(s).map_err(|e| CertError::Malformed(e.to_string()))
    }
}

/// Re-decides every hypothesis exactly.
pub fn check(cert: &Certificate) -> Result<(), CertError> {
    let field = field_from_literal(&cert.q)?;
    if cert.claim.is_empty() {
        return Err(CertError::Malformed("empty claim".into()));
    }
    for h in &cert.hypotheses {
        if !h.holds_in(&field)? {
            return Err(CertError::Fails(h.name.clone()));
        }
    }
    if let Some([lo, hi]) = &cert.witness_interval {
        let lo = parse_element(&field, lo)?;
        let hi = parse_element(&field, hi)?;
        if lo > hi {
            return Err(CertError::EmptyWitness);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;

    #[test]
    fn round_trip_and_tamper() {
        let f = field_from_literal("bonacci:3").unwrap();
        let q = FieldElement::q(&f);
        let mut c = Certificate::new("demo", &f);
        c.push("q^3 = q^2+q+1", &q.pow(3).unwrap(), Rel::Eq, &(&(&q * &q) + &q.add_int(1)));
        c.push("q > 3/2", &q, Rel::Gt, &FieldElement::from_rational(&f, rat(3, 2)));
        c.set_witness(&FieldElement::zero(&f), &q);
        let text = c.to_json().to_string();
        let back = Certificate::from_json(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(check(&back), Ok(()));

        let mut bad = back.clone();
        bad.hypotheses[1].rel = Rel::Lt;
        assert_eq!(check(&bad), Err(CertError::Fails("q > 3/2".into())));
        let mut bad = back;
        bad.witness_interval = Some(["1".into(), "0".into()]);
        assert_eq!(check(&bad), Err(CertError::EmptyWitness));
    }

    #[test]
    fn malformed_inputs_are_errors() {
        assert!(Certificate::from_json("{").is_err());
        let c = Certificate {
            claim: "x".into(),
            q: "3/2".into(),
            hypotheses: vec![Hypothesis { name: "h".into(), lhs: "q^".into(), rel: Rel::Lt, rhs: "1".into() }],
            witness_interval: None,
            level: None,
            depth: None,
        };
        assert!(matches!(check(&c), Err(CertError::Numeric(_))));
    }
}
