//! JSON input files for the command line tool.
//!
//! Population file: `{"p": [..], "n": 2, "x": [..]}` with `n` and `x`
//! optional. Stratified file: `{"strata": [{"p": .., "size": 3}, ..],
//! "n": 2, "seed": 7}` with `seed` optional.
//!
//! Probabilities may be JSON numbers or `"num/den"` strings. Numbers are read
//! from their decimal text, so `0.415` becomes exactly `83/200`.

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::sampler::StratifiedPopulation;

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationFile {
    pub p: Vec<Rational>,
    pub n: Option<usize>,
    pub x: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StratifiedFile {
    pub population: StratifiedPopulation,
    pub n: usize,
    pub seed: Option<u64>,
}

fn parse_err(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        field: field.into(),
        message: message.into(),
    }
}

fn object(text: &str) -> Result<Map<String, Value>> {
    match serde_json::from_str::<Value>(text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(parse_err("<root>", "expected a JSON object")),
        Err(e) => Err(parse_err("<root>", e.to_string())),
    }
}

/// A probability given as a number or a `"num/den"` string.
pub fn rational_value(v: &Value, field: &str) -> Result<Rational> {
    let text = match v {
        Value::Number(num) => num.to_string(),
        Value::String(s) => s.clone(),
        other => return Err(parse_err(field, format!("expected a number or \"num/den\" string, got {other}"))),
    };
    rational::parse(&text).map_err(|e| match e {
        Error::Parse { message, .. } => parse_err(field, message),
        other => other,
    })
}

fn float_value(v: &Value, field: &str) -> Result<f64> {
    match v {
        Value::Number(num) => num
            .as_f64()
            .ok_or_else(|| parse_err(field, "number out of range")),
        Value::String(_) => Ok(rational::to_f64(&rational_value(v, field)?)),
        other => Err(parse_err(field, format!("expected a number, got {other}"))),
    }
}

fn unsigned(v: &Value, field: &str) -> Result<u64> {
    v.as_u64()
        .ok_or_else(|| parse_err(field, format!("expected a nonnegative integer, got {v}")))
}

fn array<'a>(map: &'a Map<String, Value>, field: &str) -> Result<Option<&'a Vec<Value>>> {
    match map.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Array(items)) => Ok(Some(items)),
        Some(other) => Err(parse_err(field, format!("expected an array, got {other}"))),
    }
}

fn reject_unknown(map: &Map<String, Value>, known: &[&str]) -> Result<()> {
    match map.keys().find(|k| !known.contains(&k.as_str())) {
        Some(k) => Err(parse_err(k.as_str(), "unknown field")),
        None => Ok(()),
    }
}

pub fn parse_population(text: &str) -> Result<PopulationFile> {
    let map = object(text)?;
    reject_unknown(&map, &["p", "n", "x"])?;
    let p = array(&map, "p")?
        .ok_or_else(|| parse_err("p", "missing"))?
        .iter()
        .enumerate()
        .map(|(i, v)| rational_value(v, &format!("p[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let n = match map.get("n") {
        None | Some(Value::Null) => None,
        Some(v) => Some(unsigned(v, "n")? as usize),
    };
    let x = match array(&map, "x")? {
        None => None,
        Some(items) => {
            if items.len() != p.len() {
                return Err(parse_err(
                    "x",
                    format!("has {} entries but p has {}", items.len(), p.len()),
                ));
            }
            Some(
                items
                    .iter()
                    .enumerate()
                    .map(|(i, v)| float_value(v, &format!("x[{i}]")))
                    .collect::<Result<Vec<_>>>()?,
            )
        }
    };
    Ok(PopulationFile { p, n, x })
}

pub fn parse_stratified(text: &str) -> Result<StratifiedFile> {
    let map = object(text)?;
    reject_unknown(&map, &["strata", "n", "seed"])?;
    let strata = array(&map, "strata")?.ok_or_else(|| parse_err("strata", "missing"))?;
    if strata.is_empty() {
        return Err(parse_err("strata", "must not be empty"));
    }
    let mut probs = Vec::with_capacity(strata.len());
    let mut sizes = Vec::with_capacity(strata.len());
    for (j, s) in strata.iter().enumerate() {
        let field = format!("strata[{j}]");
        let Value::Object(entry) = s else {
            return Err(parse_err(field, "expected an object with `p` and `size`"));
        };
        if let Some(k) = entry.keys().find(|k| *k != "p" && *k != "size") {
            return Err(parse_err(format!("{field}.{k}"), "unknown field"));
        }
        let p = entry
            .get("p")
            .ok_or_else(|| parse_err(format!("{field}.p"), "missing"))?;
        probs.push(rational_value(p, &format!("{field}.p"))?);
        let size = entry
            .get("size")
            .ok_or_else(|| parse_err(format!("{field}.size"), "missing"))?;
        sizes.push(unsigned(size, &format!("{field}.size"))? as usize);
    }
    let n = unsigned(map.get("n").ok_or_else(|| parse_err("n", "missing"))?, "n")? as usize;
    let seed = match map.get("seed") {
        None | Some(Value::Null) => None,
        Some(v) => Some(unsigned(v, "seed")?),
    };
    let population = StratifiedPopulation::new(probs, sizes)?;
    Ok(StratifiedFile { population, n, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn population_decimals_are_exact() {
        let f = parse_population(r#"{"p": [0.415, 0.25, "1/4", 0.085], "n": 2}"#).unwrap();
        assert_eq!(f.p[0], ratio(83, 200));
        assert_eq!(f.p[2], ratio(1, 4));
        assert_eq!(f.p[3], ratio(17, 200));
        assert_eq!(f.n, Some(2));
        assert!(f.x.is_none());
    }

    #[test]
    fn diagnostics_name_the_field() {
        let field = |text: &str| match parse_population(text) {
            Err(Error::Parse { field, .. }) => field,
            other => panic!("{other:?}"),
        };
        assert_eq!(field(r#"{"p": [0.5, "x/2", 0.5]}"#), "p[1]");
        assert_eq!(field(r#"{"p": [0.5, 0.5], "n": -1}"#), "n");
        assert_eq!(field(r#"{"p": [0.5, 0.5], "x": [1]}"#), "x");
        assert_eq!(field(r#"{"q": []}"#), "q");
        assert_eq!(field(r#"{"n": 2}"#), "p");
        assert_eq!(field("[1, 2]"), "<root>");
    }

    #[test]
    fn stratified() {
        let f = parse_stratified(
            r#"{"strata": [{"p": "1/5", "size": 3}, {"p": "2/15", "size": 3}], "n": 2, "seed": 9}"#,
        )
        .unwrap();
        assert_eq!(f.population.sizes(), &[3, 3]);
        assert_eq!(f.n, 2);
        assert_eq!(f.seed, Some(9));
        let err = parse_stratified(r#"{"strata": [{"p": 1, "size": "3"}], "n": 2}"#).unwrap_err();
        assert!(matches!(err, Error::Parse { field, .. } if field == "strata[0].size"));
    }
}
