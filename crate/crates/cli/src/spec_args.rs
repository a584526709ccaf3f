//! Building an order function from `--spec FILE` or `--kind K --params k=v …`.

use std::path::Path;

use metafib::{IndicatorSet, RSpec};
use serde_json::{Map, Value};

/// Parameters that are always lists, even with a single element.
const LIST_KEYS: &[&str] = &["values", "prefix", "cycle"];

pub fn load(spec: Option<&Path>, kind: Option<&str>, params: &[String]) -> Result<RSpec, String> {
    match (spec, kind) {
        (Some(path), None) => {
            if !params.is_empty() {
                return Err("--params only applies together with --kind".into());
            }
            let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            RSpec::from_json(&text).map_err(|e| e.to_string())
        }
        (None, Some(kind)) => from_kind(kind, params),
        (Some(_), Some(_)) => Err("give either --spec or --kind, not both".into()),
        (None, None) => Err("an order function is required: pass --spec FILE or --kind K".into()),
    }
}

fn preset(kind: &str) -> Option<RSpec> {
    Some(match kind {
        "fibonacci" => RSpec::fibonacci(),
        "even-odd" => RSpec::even_odd(),
        "alternating-2-3" => RSpec::alternating_two_three(),
        "powers-of-two" => RSpec::indicator(IndicatorSet::PowersOfTwo),
        "towers" => RSpec::indicator(IndicatorSet::Towers),
        _ => return None,
    })
}

fn scalar(raw: &str) -> Value {
    if let Ok(v) = raw.parse::<i64>() {
        return Value::from(v);
    }
    match raw {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => Value::String(raw.to_string()),
    }
}

fn list(raw: &str) -> Value {
    Value::Array(raw.split(',').filter(|s| !s.is_empty()).map(|s| scalar(s.trim())).collect())
}

/// Turns `--kind` and `key=value` pairs into the JSON form and parses that, so
/// both routes share one schema and one set of error messages.
pub fn from_kind(kind: &str, params: &[String]) -> Result<RSpec, String> {
    if let Some(spec) = preset(kind) {
        if !params.is_empty() {
            return Err(format!("preset kind {kind:?} takes no --params"));
        }
        return Ok(spec);
    }
    let mut obj = Map::new();
    obj.insert("kind".into(), Value::String(kind.into()));
    for p in params {
        let (key, raw) = p
            .split_once('=')
            .ok_or_else(|| format!("parameter {p:?} is not of the form key=value"))?;
        let value = if LIST_KEYS.contains(&key) {
            list(raw)
        } else if kind == "indicator" && key == "set" && raw.contains(|c: char| c.is_ascii_digit()) {
            let mut explicit = Map::new();
            explicit.insert("explicit".into(), list(raw));
            Value::Object(explicit)
        } else {
            scalar(raw)
        };
        if obj.insert(key.to_string(), value).is_some() {
            return Err(format!("parameter {key:?} given twice"));
        }
    }
    let json = Value::Object(obj).to_string();
    RSpec::from_json(&json).map_err(|e| e.to_string())
}
