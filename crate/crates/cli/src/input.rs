//! Shared input loading and output helpers.

use std::fs;
use std::path::Path;

use ewsd::codes::CodeDefinition;
use ewsd::gf2::GeneratorMatrix;
use ewsd::oracle::ChannelParams;
use serde::Serialize;
use serde_json::Value;

use crate::Failure;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

pub fn load_generator(path: &Path) -> Result<GeneratorMatrix, Failure> {
    Ok(read(path)?.parse()?)
}

pub fn load_q(path: &Path) -> Result<CodeDefinition, Failure> {
    Ok(CodeDefinition::from_json(&read(path)?)?)
}

/// Fixed-ε or fixed-μ parameters; clap guarantees exactly one is present.
pub fn channel(n: usize, epsilon: Option<f64>, mu: Option<usize>) -> Result<ChannelParams, Failure> {
    Ok(match (epsilon, mu) {
        (Some(e), None) => ChannelParams::epsilon(n, e)?,
        (None, Some(m)) => ChannelParams::mu(n, m)?,
        _ => return Err(Failure::usage("give exactly one of --epsilon and --mu")),
    })
}

pub fn to_value(x: &impl Serialize) -> Value {
    serde_json::to_value(x).expect("plain data always serializes")
}

/// Prints `body` with the resolved configuration attached.
pub fn emit(config: &impl Serialize, body: Value) {
    let mut out = serde_json::Map::new();
    out.insert("config".into(), to_value(config));
    match body {
        Value::Object(map) => out.extend(map),
        other => {
            out.insert("result".into(), other);
        }
    }
    out!("{}", serde_json::to_string_pretty(&Value::Object(out)).expect("valid JSON"));
}

/// Echoes the configuration on stderr for commands whose stdout is a file
/// format.
pub fn echo_config(config: &impl Serialize) {
    eprintln!("config: {}", serde_json::to_string(&to_value(config)).expect("valid JSON"));
}
