//! Text front ends: the `kind:key=value,...` mini-language, JSON specs, and
//! CSV measure tables.
//!
//! Grammar of the mini-language:
//!
//! ```text
//! spec   := word [':' pairs] | pairs
//! pairs  := pair (',' pair)*
//! pair   := word '=' value
//! value  := '(' [spec] ')' | '[' [value (',' value)*] ']' | string | atom
//! ```
//!
//! A leading `word` followed by `:` or nothing is the `kind` tag. Atoms that
//! parse as integers or finite floats become JSON numbers, `true`/`false`
//! booleans, anything else a string (so `inf` reaches the non-finite float
//! fields as `"inf"`). Strings with reserved characters are written as JSON
//! string literals.

use serde::de::DeserializeOwned;
use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::radial::RadialMeasure;

/// Parses a mini-language spec into the JSON value it stands for.
pub fn parse_spec(text: &str) -> Result<Value> {
    let mut p = Parser { src: text, pos: 0 };
    p.skip_ws();
    let v = p.spec(true)?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(v)
}

/// Decodes either a JSON document (text starting with `{`) or a mini-language
/// spec into `T`.
pub fn decode<T: DeserializeOwned>(text: &str) -> Result<T> {
    let trimmed = text.trim_start();
    let value = if trimmed.starts_with('{') {
        serde_json::from_str::<Value>(trimmed).map_err(|e| Error::Parse { pos: e.column(), msg: e.to_string() })?
    } else {
        parse_spec(text)?
    };
    serde_json::from_value(value).map_err(|e| Error::InvalidInput(e.to_string()))
}

/// Renders a JSON value in the mini-language. Objects without a `kind`
/// field render as bare pairs; `parse_spec(&format_spec(v)) == v` for
/// objects whose strings and numbers survive the round trip.
pub fn format_spec(value: &Value) -> String {
    match value {
        Value::Object(map) => format_object(map),
        other => format_value(other),
    }
}

fn format_object(map: &Map<String, Value>) -> String {
    let kind = map.get("kind").and_then(Value::as_str).filter(|k| is_word(k));
    let pairs: Vec<String> = map
        .iter()
        .filter(|(k, _)| !(kind.is_some() && k.as_str() == "kind"))
        .map(|(k, v)| format!("{}={}", format_key(k), format_value(v)))
        .collect();
    match kind {
        Some(k) if pairs.is_empty() => k.to_string(),
        Some(k) => format!("{k}:{}", pairs.join(",")),
        None => pairs.join(","),
    }
}

fn format_key(k: &str) -> String {
    if is_word(k) {
        k.to_string()
    } else {
        Value::String(k.to_string()).to_string()
    }
}

fn format_value(v: &Value) -> String {
    match v {
        Value::Object(map) => format!("({})", format_object(map)),
        Value::Array(items) => format!("[{}]", items.iter().map(format_value).collect::<Vec<_>>().join(",")),
        Value::String(s) if is_word(s) && !looks_like_literal(s) => s.clone(),
        Value::String(s) => Value::String(s.clone()).to_string(),
        Value::Null => "null".to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
    }
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '+' | '-')
}

fn is_word(s: &str) -> bool {
    !s.is_empty() && s.chars().all(is_word_char)
}

/// Strings that would come back as a number, boolean or null.
fn looks_like_literal(s: &str) -> bool {
    !matches!(atom(s), Value::String(_))
}

fn atom(tok: &str) -> Value {
    match tok {
        "true" => return Value::Bool(true),
        "false" => return Value::Bool(false),
        "null" => return Value::Null,
        _ => {}
    }
    if let Ok(i) = tok.parse::<i64>() {
        return Value::Number(i.into());
    }
    if let Ok(u) = tok.parse::<u64>() {
        return Value::Number(u.into());
    }
    let numeric = tok.chars().next().is_some_and(|c| c.is_ascii_digit() || matches!(c, '-' | '+' | '.'))
        && tok.chars().all(|c| c.is_ascii_digit() || matches!(c, '-' | '+' | '.' | 'e' | 'E'));
    if numeric {
        if let Some(n) = tok.parse::<f64>().ok().and_then(Number::from_f64) {
            return Value::Number(n);
        }
    }
    Value::String(tok.to_string())
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: impl Into<String>) -> Error {
        Error::Parse { pos: self.pos, msg: msg.into() }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn word(&mut self) -> Result<&str> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if is_word_char(c) {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return Err(self.error("expected a word"));
        }
        Ok(&self.src[start..self.pos])
    }

    fn quoted(&mut self) -> Result<String> {
        let rest = &self.src[self.pos..];
        let mut stream = serde_json::Deserializer::from_str(rest).into_iter::<String>();
        match stream.next() {
            Some(Ok(s)) => {
                self.pos += stream.byte_offset();
                Ok(s)
            }
            _ => Err(self.error("malformed string literal")),
        }
    }

    fn key(&mut self) -> Result<String> {
        self.skip_ws();
        if self.peek() == Some('"') {
            self.quoted()
        } else {
            self.word().map(str::to_string)
        }
    }

    /// `top` is true outside any parentheses, where `)` cannot end a spec.
    fn spec(&mut self, top: bool) -> Result<Value> {
        let mut map = Map::new();
        self.skip_ws();
        if !top && self.peek() == Some(')') {
            return Ok(Value::Object(map));
        }
        let first = self.key()?;
        self.skip_ws();
        match self.peek() {
            Some('=') => {
                self.pos += 1;
                let v = self.value()?;
                map.insert(first, v);
                if self.eat(',') {
                    self.pairs(&mut map)?;
                }
            }
            Some(':') => {
                self.pos += 1;
                map.insert("kind".into(), Value::String(first));
                self.pairs(&mut map)?;
            }
            _ => {
                map.insert("kind".into(), Value::String(first));
            }
        }
        Ok(Value::Object(map))
    }

    fn pairs(&mut self, map: &mut Map<String, Value>) -> Result<()> {
        loop {
            let key = self.key()?;
            if !self.eat('=') {
                return Err(self.error(format!("expected '=' after '{key}'")));
            }
            let v = self.value()?;
            if map.insert(key.clone(), v).is_some() {
                return Err(self.error(format!("duplicate key '{key}'")));
            }
            if !self.eat(',') {
                return Ok(());
            }
        }
    }

    fn value(&mut self) -> Result<Value> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.spec(false)?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(v)
            }
            Some('[') => {
                self.pos += 1;
                let mut items = Vec::new();
                if self.eat(']') {
                    return Ok(Value::Array(items));
                }
                loop {
                    items.push(self.value()?);
                    if self.eat(']') {
                        return Ok(Value::Array(items));
                    }
                    if !self.eat(',') {
                        return Err(self.error("expected ',' or ']'"));
                    }
                }
            }
            Some('"') => self.quoted().map(Value::String),
            _ => self.word().map(atom),
        }
    }
}

/// Parses a measure spec. Besides the mini-language and JSON forms,
/// `ma:<profile spec>` is shorthand for the Monge-Ampère measure of a
/// profile in dimension `n`.
pub fn parse_measure(text: &str, n: u32) -> Result<RadialMeasure> {
    let trimmed = text.trim();
    if let Some(rest) = trimmed.strip_prefix("ma:") {
        let is_pairs = rest.trim_start().starts_with("profile=") || rest.trim_start().starts_with("n=");
        if !is_pairs {
            let profile = decode(rest)?;
            let m = RadialMeasure::Ma { profile: Box::new(profile), n };
            m.validate()?;
            return Ok(m);
        }
    }
    let m: RadialMeasure = decode(trimmed)?;
    m.validate()?;
    Ok(m)
}

/// Reads a measure table from CSV with columns `s,m` (header optional):
/// `m(s)` is the mass of the closed ball of radius `e^s`, rows sorted by
/// `s`, and a repeated `s` marks an atom (left value, then right value).
pub fn parse_measure_csv(text: &str) -> Result<RadialMeasure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(false)
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            pos: e.position().map_or(0, |p| p.byte() as usize),
            msg: e.to_string(),
        })?;
        if record.len() != 2 {
            return Err(Error::Parse { pos: record_pos(&record), msg: format!("row {} needs 2 columns", i + 1) });
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        match parsed {
            (Ok(s), Ok(m)) => points.push([s, m]),
            _ if i == 0 => continue,
            _ => {
                return Err(Error::Parse {
                    pos: record_pos(&record),
                    msg: format!("row {}: expected two numbers", i + 1),
                })
            }
        }
    }
    let m = RadialMeasure::Table { points };
    m.validate()?;
    Ok(m)
}

fn record_pos(record: &csv::StringRecord) -> usize {
    record.position().map_or(0, |p| p.byte() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::RadialProfile;
    use crate::weights::Weight;
    use serde_json::json;

    #[test]
    fn flat_spec() {
        assert_eq!(parse_spec("trunc:M=2").unwrap(), json!({"kind": "trunc", "M": 2}));
        assert_eq!(parse_spec("exp").unwrap(), json!({"kind": "exp"}));
        assert_eq!(parse_spec("poly:p=1.5").unwrap(), json!({"kind": "poly", "p": 1.5}));
    }

    #[test]
    fn nested_and_arrays() {
        let v = parse_spec("trunc:M=3,inner=(iterlog:k=1)").unwrap();
        assert_eq!(v, json!({"kind": "trunc", "M": 3, "inner": {"kind": "iterlog", "k": 1}}));
        let t = parse_spec("table:points=[[-2,0],[-2,1],[0,1e0]]").unwrap();
        assert_eq!(t["points"][2][1], json!(1.0));
    }

    #[test]
    fn decodes_types() {
        let g: RadialProfile = decode("trunc:M=2").unwrap();
        assert_eq!(g, RadialProfile::Trunc { m: 2.0, inner: Box::new(RadialProfile::Log) });
        let w: Weight = decode("poly:p=2").unwrap();
        assert_eq!(w, Weight::Poly { p: 2.0 });
        let j: Weight = decode(r#"{"kind":"poly","p":2}"#).unwrap();
        assert_eq!(j, w);
    }

    #[test]
    fn round_trip() {
        for v in [
            json!({"kind": "trunc", "M": 2, "inner": {"kind": "power", "alpha": 0.5}}),
            json!({"kind": "atom", "mass": 1, "value": "inf"}),
            json!({"a": [1, 2.5, {"kind": "x"}], "b": "two words"}),
            json!({"kind": "k", "s": "12"}),
        ] {
            assert_eq!(parse_spec(&format_spec(&v)).unwrap(), v, "{}", format_spec(&v));
        }
    }

    #[test]
    fn errors_carry_positions() {
        match parse_spec("trunc:M=2,") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 10),
            other => panic!("{other:?}"),
        }
        assert!(parse_spec("trunc:M").is_err());
        assert!(parse_spec("a=(b").is_err());
        assert!(parse_spec("k:a=1,a=2").is_err());
    }

    #[test]
    fn measure_shorthand() {
        let m = parse_measure("ma:trunc:M=2", 1).unwrap();
        assert_eq!(m.atoms(), vec![(-2.0, 1.0)]);
        let d = parse_measure("density:scale=2,rate=2", 1).unwrap();
        assert_eq!(d, RadialMeasure::Density { scale: 2.0, rate: 2.0 });
    }

    #[test]
    fn csv_table_with_atom() {
        let m = parse_measure_csv("s,m\n-3,0\n-2,0\n-2,1\n0,1\n").unwrap();
        assert_eq!(m.atoms(), vec![(-2.0, 1.0)]);
        assert!(parse_measure_csv("-1,1\n-2,1\n").is_err());
        assert!(parse_measure_csv("-1,1\n0,x\n").is_err());
    }
}
