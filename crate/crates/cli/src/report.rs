//! Deterministic JSON reports and the sparse tensor file format.
//!
//! A tensor file is
//! `{"factors": [["1/2", "1/2"], ...], "entries": [[[0, 1], "1/4"], ...]}`,
//! one weight list per factor and one `(tuple, value)` pair per nonzero entry.

use std::sync::Arc;

use joinlab::rational::to_canonical;
use joinlab::{FiniteSpace, MeasureTensor, Rational};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::rational;
use crate::CliError;

pub fn rat(r: &Rational) -> Value {
    Value::String(to_canonical(r))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorFile {
    pub factors: Vec<Vec<String>>,
    pub entries: Vec<(Vec<usize>, String)>,
}

impl TensorFile {
    pub fn from_tensor(v: &MeasureTensor) -> Self {
        Self {
            factors: v
                .factors()
                .iter()
                .map(|f| f.weights().iter().map(to_canonical).collect())
                .collect(),
            entries: v
                .nonzero()
                .map(|(t, value)| (t, to_canonical(value)))
                .collect(),
        }
    }

    pub fn to_tensor(&self) -> Result<MeasureTensor, CliError> {
        let factors = self
            .factors
            .iter()
            .enumerate()
            .map(|(i, ws)| {
                let weights = ws
                    .iter()
                    .enumerate()
                    .map(|(j, w)| rational(&format!("factors[{i}][{j}]"), w))
                    .collect::<Result<_, _>>()?;
                FiniteSpace::new(weights)
                    .map_err(|e| CliError::Invalid(format!("factors[{i}]: {e}")))
            })
            .collect::<Result<Vec<Arc<FiniteSpace>>, _>>()?;
        let entries = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, (t, v))| Ok((t.clone(), rational(&format!("entries[{i}]"), v)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        MeasureTensor::from_sparse(factors, entries)
            .map_err(|e| CliError::Invalid(format!("entries: {e}")))
    }
}

pub fn tensor_json(v: &MeasureTensor) -> Value {
    serde_json::to_value(TensorFile::from_tensor(v)).expect("tensor file serializes")
}

/// SHA-256 over the NUL-separated arguments followed by every input file.
pub fn input_digest(args: &[String], inputs: &[Vec<u8>]) -> String {
    let mut hasher = Sha256::new();
    for a in args {
        hasher.update(a.as_bytes());
        hasher.update([0u8]);
    }
    for bytes in inputs {
        hasher.update(bytes);
    }
    hex::encode(hasher.finalize())
}

/// What a command hands back to the driver.
#[derive(Debug, Default)]
pub struct Outcome {
    pub results: Map<String, Value>,
    pub passed: Option<bool>,
    pub inputs: Vec<Vec<u8>>,
}

impl Outcome {
    pub fn set(&mut self, key: &str, value: Value) {
        self.results.insert(key.to_string(), value);
    }
}

pub fn render(command: &str, args: &[String], outcome: &Outcome, wall_ms: Option<u128>) -> String {
    let mut report = json!({
        "command": command,
        "args": args,
        "input_digest": input_digest(args, &outcome.inputs),
        "results": outcome.results,
    });
    if let Some(p) = outcome.passed {
        report["passed"] = json!(p);
    }
    if let Some(ms) = wall_ms {
        report["wall_time_ms"] = json!(ms);
    }
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    text
}
