//! JSON system description:
//!
//! ```json
//! {"species": ["A"],
//!  "reactions": [{"in": {"A": 2}, "out": {}, "rate": 0.025}],
//!  "initial": {"100": 1.0}}
//! ```
//!
//! Rates may be numbers or strings such as `"1/40"`; initial keys are
//! comma-joined count vectors.

use num_rational::BigRational;
use serde_json::{json, Map, Value};

use super::{Initial, ModelError, Reaction, ReactionSystem};
use crate::scalar::{f64_to_rational_decimal, parse_rational};

fn err(msg: impl Into<String>) -> ModelError {
    ModelError::Json(msg.into())
}

fn parse_rate(v: &Value) -> Result<BigRational, ModelError> {
    match v {
        Value::Number(n) => n.as_f64().map(f64_to_rational_decimal).ok_or_else(|| err("rate is not finite")),
        Value::String(s) => parse_rational(s).ok_or_else(|| err(format!("invalid rate '{s}'"))),
        _ => Err(err("rate must be a number or a string")),
    }
}

fn parse_side(v: Option<&Value>, species: &[String]) -> Result<Vec<u32>, ModelError> {
    let mut out = vec![0; species.len()];
    let Some(v) = v else { return Ok(out) };
    let map = v.as_object().ok_or_else(|| err("reaction sides must be objects"))?;
    for (name, count) in map {
        let idx = species.iter().position(|s| s == name).ok_or_else(|| err(format!("unknown species {name}")))?;
        let c = count.as_u64().and_then(|c| u32::try_from(c).ok()).ok_or_else(|| err(format!("bad count for {name}")))?;
        out[idx] += c;
    }
    Ok(out)
}

fn parse_state(key: &str, species: usize) -> Result<Vec<u32>, ModelError> {
    let n: Vec<u32> = key
        .split(',')
        .map(|p| p.trim().parse::<u32>())
        .collect::<Result<_, _>>()
        .map_err(|_| ModelError::InvalidInitial(format!("bad state '{key}'")))?;
    if n.len() != species {
        return Err(ModelError::InvalidInitial(format!("state '{key}' does not have {species} entries")));
    }
    Ok(n)
}

/// Reads an initial distribution object such as `{"3": 0.5, "5": 0.5}`.
pub fn parse_initial_json(v: &Value, species: usize) -> Result<Initial, ModelError> {
    let map = v.as_object().ok_or_else(|| ModelError::InvalidInitial("expected an object".into()))?;
    let mut initial = Initial::new();
    for (key, p) in map {
        let p = p.as_f64().ok_or_else(|| ModelError::InvalidInitial(format!("probability for '{key}' is not a number")))?;
        *initial.entry(parse_state(key, species)?).or_insert(0.0) += p;
    }
    Ok(initial)
}

pub fn parse_json(text: &str) -> Result<ReactionSystem, ModelError> {
    let root: Value = serde_json::from_str(text).map_err(|e| err(e.to_string()))?;
    let species: Vec<String> = root
        .get("species")
        .and_then(Value::as_array)
        .ok_or_else(|| err("missing species list"))?
        .iter()
        .map(|s| s.as_str().map(str::to_string).ok_or_else(|| err("species names must be strings")))
        .collect::<Result<_, _>>()?;
    let reactions = root
        .get("reactions")
        .and_then(Value::as_array)
        .ok_or_else(|| err("missing reactions list"))?
        .iter()
        .map(|r| {
            let rate = parse_rate(r.get("rate").ok_or_else(|| err("reaction without rate"))?)?;
            Ok(Reaction::new(parse_side(r.get("in"), &species)?, parse_side(r.get("out"), &species)?, rate))
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    let initial = match root.get("initial") {
        Some(v) => parse_initial_json(v, species.len())?,
        None => Initial::from([(vec![0; species.len()], 1.0)]),
    };
    ReactionSystem::new(species, reactions, initial)
}

pub fn to_json(system: &ReactionSystem) -> Value {
    let side = |v: &[u32]| {
        let mut m = Map::new();
        for (name, &c) in system.species().iter().zip(v) {
            if c > 0 {
                m.insert(name.clone(), json!(c));
            }
        }
        Value::Object(m)
    };
    let reactions: Vec<Value> = system
        .reactions()
        .iter()
        .map(|r| json!({"in": side(&r.inputs), "out": side(&r.outputs), "rate": r.rate.to_string()}))
        .collect();
    let mut initial = Map::new();
    for (n, p) in system.initial() {
        let key = n.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        initial.insert(key, json!(p));
    }
    json!({"species": system.species(), "reactions": reactions, "initial": initial})
}
