use std::io::Read;

use cme_core::reaction_model::{parse_dsl, parse_initial_json, parse_json, Initial, ReactionSystem};

use crate::args::Common;
use crate::error::Failure;

fn read_source(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text).map_err(|e| Failure::parse(format!("stdin: {e}")))?;
        return Ok(text);
    }
    std::fs::read_to_string(path).map_err(|e| Failure::parse(format!("{path}: {e}")))
}

fn parse_system_text(text: &str) -> Result<ReactionSystem, Failure> {
    if text.trim_start().starts_with('{') {
        Ok(parse_json(text)?)
    } else {
        Ok(parse_dsl(text)?)
    }
}

pub fn parse_initial(text: &str, species: usize) -> Result<Initial, Failure> {
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(trimmed).map_err(|e| Failure::parse(format!("--initial: {e}")))?;
        return Ok(parse_initial_json(&v, species)?);
    }
    let counts: Vec<u32> = trimmed
        .split(',')
        .map(|s| s.trim().parse::<u32>().map_err(|_| Failure::parse(format!("--initial: '{s}' is not a count"))))
        .collect::<Result<_, _>>()?;
    if counts.len() != species {
        return Err(Failure::parse(format!("--initial: expected {species} counts, got {}", counts.len())));
    }
    Ok(Initial::from([(counts, 1.0)]))
}

pub fn load_system(args: &Common) -> Result<ReactionSystem, Failure> {
    let text = match (&args.system, &args.dsl) {
        (Some(path), None) => read_source(path)?,
        (None, Some(dsl)) => dsl.clone(),
        _ => return Err(Failure::parse("give exactly one of --system and --dsl")),
    };
    let system = parse_system_text(&text)?;
    match &args.initial {
        Some(init) => {
            let initial = parse_initial(init, system.num_species())?;
            Ok(system.with_initial(initial)?)
        }
        None => Ok(system),
    }
}

pub fn parse_times(text: &str) -> Result<Vec<f64>, Failure> {
    let times: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Failure::parse(format!("--times: '{s}' is not a number"))))
        .collect::<Result<_, _>>()?;
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Failure::parse("--times must be finite, nonnegative and ascending"));
    }
    Ok(times)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn times() {
        assert_eq!(parse_times("0, 0.5,2").unwrap(), vec![0.0, 0.5, 2.0]);
        assert!(parse_times("1,0.5").is_err());
        assert!(parse_times("-1").is_err());
        assert!(parse_times("x").is_err());
    }

    #[test]
    fn initial_forms() {
        assert_eq!(parse_initial("100", 1).unwrap(), Initial::from([(vec![100], 1.0)]));
        assert_eq!(parse_initial("5, 1", 2).unwrap(), Initial::from([(vec![5, 1], 1.0)]));
        assert_eq!(parse_initial(r#"{"3": 0.5, "4": 0.5}"#, 1).unwrap(), Initial::from([(vec![3], 0.5), (vec![4], 0.5)]));
        assert!(parse_initial("5", 2).is_err());
    }

    #[test]
    fn detects_json() {
        let s = parse_system_text(r#"{"species":["A"],"reactions":[{"in":{"A":1},"out":{},"rate":"1/2"}]}"#).unwrap();
        assert_eq!(s.num_species(), 1);
        assert_eq!(parse_system_text("A -> 0 @ 1").unwrap().num_species(), 1);
    }
}
