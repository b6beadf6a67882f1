//! The monoid element literal grammar for the JSON instance format.
//!
//! Integers for the numeric finite monoids and N; strings "p/q" for
//! rationals; arrays of strings for sets; objects {generator: coefficient}
//! for free elements; objects {key: literal} for power elements. Rendering
//! is canonical and round-trips bit-exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::Value as Json;

use crate::error::{Error, Result};
use crate::monoid::{Monoid, MonoidKind, Value};

fn bad(m: &Monoid, detail: impl Into<String>) -> Error {
    Error::InvalidElement {
        monoid: m.name.clone(),
        detail: detail.into(),
    }
}

fn parse_nat(m: &Monoid, j: &Json) -> Result<BigUint> {
    match j {
        Json::Number(n) => n
            .as_u64()
            .map(BigUint::from)
            .ok_or_else(|| bad(m, format!("expected a non-negative integer, got {n}"))),
        Json::String(s) => BigUint::from_str(s.trim())
            .map_err(|_| bad(m, format!("expected a decimal natural, got `{s}`"))),
        other => Err(bad(m, format!("expected an integer literal, got {other}"))),
    }
}

fn parse_rat(m: &Monoid, j: &Json) -> Result<BigRational> {
    match j {
        Json::Number(n) => {
            if let Some(u) = n.as_u64() {
                Ok(BigRational::from_integer(u.into()))
            } else {
                Err(bad(m, format!("expected a non-negative rational, got {n}")))
            }
        }
        Json::String(s) => {
            let s = s.trim();
            let q = match s.split_once('/') {
                Some((num, den)) => {
                    let num = num.trim().parse::<num_bigint::BigInt>();
                    let den = den.trim().parse::<num_bigint::BigInt>();
                    match (num, den) {
                        (Ok(n), Ok(d)) if !d.is_zero() => BigRational::new(n, d),
                        _ => return Err(bad(m, format!("malformed rational `{s}`"))),
                    }
                }
                None => s
                    .parse::<num_bigint::BigInt>()
                    .map(BigRational::from_integer)
                    .map_err(|_| bad(m, format!("malformed rational `{s}`")))?,
            };
            if q.is_negative() {
                return Err(bad(m, format!("negative rational `{s}`")));
            }
            Ok(q)
        }
        other => Err(bad(m, format!("expected a rational literal, got {other}"))),
    }
}

/// Parses one element literal in the context of monoid `m` and validates it.
pub fn parse_element(m: &Monoid, j: &Json) -> Result<Value> {
    let v = match &m.kind {
        MonoidKind::Boolean
        | MonoidKind::Naturals
        | MonoidKind::TruncatedNaturals { .. }
        | MonoidKind::M2
        | MonoidKind::BoundedOrder { .. }
        | MonoidKind::TruncatedPowerset { .. } => Value::Nat(parse_nat(m, j)?),
        MonoidKind::RationalsNonneg | MonoidKind::GapRationals | MonoidKind::Fuzzy => {
            Value::Rat(parse_rat(m, j)?)
        }
        MonoidKind::PowerSet { .. } => match j {
            Json::Array(items) => {
                let mut set = BTreeSet::new();
                for item in items {
                    match item {
                        Json::String(s) => {
                            set.insert(s.clone());
                        }
                        other => return Err(bad(m, format!("set items must be strings, got {other}"))),
                    }
                }
                Value::Set(set)
            }
            other => Err(bad(m, format!("expected an array of strings, got {other}")))?,
        },
        MonoidKind::FiniteTable { .. } => match j {
            Json::String(s) => Value::Sym(s.clone()),
            other => Err(bad(m, format!("expected an element name, got {other}")))?,
        },
        MonoidKind::Free { .. } => match j {
            Json::Object(map) => {
                let mut coeffs = BTreeMap::new();
                for (g, c) in map {
                    let n = parse_nat(m, c)?;
                    if !n.is_zero() {
                        coeffs.insert(g.clone(), Value::Nat(n));
                    }
                }
                Value::Map(coeffs)
            }
            other => Err(bad(m, format!("expected {{generator: coefficient}}, got {other}")))?,
        },
        MonoidKind::Power { base, .. } => match j {
            Json::Object(map) => {
                let mut comps = BTreeMap::new();
                for (key, lit) in map {
                    let comp = parse_element(base, lit)?;
                    if !base.is_zero(&comp) {
                        comps.insert(key.clone(), comp);
                    }
                }
                Value::Map(comps)
            }
            other => Err(bad(m, format!("expected {{key: literal}}, got {other}")))?,
        },
    };
    m.validate(&v)?;
    Ok(v)
}

/// Canonical JSON rendering; `parse_element` maps it back to the same value.
pub fn render_element(m: &Monoid, v: &Value) -> Json {
    match v {
        Value::Nat(n) => match n.to_u64() {
            Some(u) => Json::from(u),
            None => Json::String(n.to_string()),
        },
        Value::Rat(q) => {
            if q.denom().to_u64() == Some(1) {
                Json::String(q.numer().to_string())
            } else {
                Json::String(format!("{}/{}", q.numer(), q.denom()))
            }
        }
        Value::Set(s) => Json::Array(s.iter().map(|x| Json::String(x.clone())).collect()),
        Value::Sym(name) => Json::String(name.clone()),
        Value::Map(comps) => {
            let base = match &m.kind {
                MonoidKind::Free { .. } => None,
                MonoidKind::Power { base, .. } => Some(base.clone()),
                _ => None,
            };
            let mut obj = serde_json::Map::new();
            for (key, comp) in comps {
                let rendered = match &base {
                    Some(b) => render_element(b, comp),
                    None => match comp {
                        Value::Nat(n) => match n.to_u64() {
                            Some(u) => Json::from(u),
                            None => Json::String(n.to_string()),
                        },
                        _ => unreachable!("free coefficients are naturals"),
                    },
                };
                obj.insert(key.clone(), rendered);
            }
            Json::Object(obj)
        }
    }
}

/// Canonical single-line name of an element; used as the generator name in
/// free covers. Decimal for naturals, "p/q" for rationals, compact JSON
/// for structured elements.
pub fn canonical_name(m: &Monoid, v: &Value) -> String {
    match render_element(m, v) {
        Json::String(s) => s,
        other => other.to_string(),
    }
}

/// Inverse of `canonical_name`.
pub fn parse_name(m: &Monoid, name: &str) -> Result<Value> {
    if let Ok(json) = serde_json::from_str::<Json>(name) {
        if !matches!(json, Json::String(_)) {
            return parse_element(m, &json);
        }
    }
    parse_element(m, &Json::String(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monoid::Monoid;
    use serde_json::json;

    #[test]
    fn literals_round_trip() {
        let cases: Vec<(crate::monoid::MonoidHandle, Json)> = vec![
            (Monoid::naturals(), json!(7)),
            (Monoid::truncated_naturals(2).unwrap(), json!(2)),
            (Monoid::rationals(), json!("3/4")),
            (Monoid::rationals(), json!(5)),
            (Monoid::powerset(["a", "b", "c"]).unwrap(), json!(["a", "c"])),
            (Monoid::free(None), json!({"x": 1, "y": 2})),
            (
                Monoid::power(Monoid::boolean(), None).unwrap(),
                json!({"1": 1, "2": 1}),
            ),
        ];
        for (m, lit) in cases {
            let v = parse_element(&m, &lit).unwrap();
            let rendered = render_element(&m, &v);
            let v2 = parse_element(&m, &rendered).unwrap();
            assert_eq!(v, v2, "round trip through {rendered} for {}", m.name);
        }
    }

    #[test]
    fn zero_coefficients_drop() {
        let free = Monoid::free(None);
        let v = parse_element(&free, &json!({"x": 0, "y": 3})).unwrap();
        assert_eq!(v, Value::free([("y", 3)]));
    }

    #[test]
    fn out_of_universe_rejected() {
        let n2 = Monoid::truncated_naturals(2).unwrap();
        assert!(parse_element(&n2, &json!(3)).is_err());
        let ps = Monoid::powerset(["a"]).unwrap();
        assert!(parse_element(&ps, &json!(["z"])).is_err());
        let r1 = Monoid::gap_rationals();
        assert!(parse_element(&r1, &json!("1/2")).is_err());
    }

    #[test]
    fn canonical_names_parse_back() {
        let q = Monoid::rationals();
        let v = parse_element(&q, &json!("7/2")).unwrap();
        let name = canonical_name(&q, &v);
        assert_eq!(name, "7/2");
        assert_eq!(parse_name(&q, &name).unwrap(), v);

        let ps = Monoid::powerset(["a", "b"]).unwrap();
        let v = parse_element(&ps, &json!(["b", "a"])).unwrap();
        let name = canonical_name(&ps, &v);
        assert_eq!(parse_name(&ps, &name).unwrap(), v);
    }
}
