//! Config documents (TOML, or JSON when the file ends in `.json`).
//!
//! ```toml
//! [action]                      # polytope, joining verify
//! z2k = 2                       # full Z₂^k action, or:
//! # space = { uniform = 4 }     # space = { weights = ["1/3", "2/3"] }
//! # generators = [[1, 2, 3, 0]]
//! objective = ["1/1", "0/1"]    # optional, one entry per tensor tuple
//!
//! [skew]                        # cocycle, sample
//! base = { uniform = 4 }
//! fiber = { uniform = 2 }
//! base_map = [1, 2, 3, 0]
//! cocycle = [[1, 0], [0, 1], [0, 1], [0, 1]]   # or coboundary = J-family,
//! # or power = { fiber_map = [1, 0], exponents = [1, -1, 0, 0] }
//!
//! [stats]                       # cocycle
//! base_set = [0, 1]
//! n = 4
//! sequence = [1, 2, 4]
//! eps = "1/2"
//! fiber_set_a = [0]
//! fiber_set_b = [0]
//! horizon = 8
//!
//! [system]                      # mixing
//! space = { uniform = 4 }
//! map = [1, 2, 3, 0]
//! sets = [[0, 1], [0, 1]]
//! offsets = [1]
//! ```

use std::path::Path;
use std::sync::Arc;

use joinlab::rational::parse;
use joinlab::torus::{full_action, Z2kContext};
use joinlab::{ActionGenerators, Automorphism, FiniteSpace, MeasurableSet, Rational, SkewProduct};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub action: Option<ActionConfig>,
    pub skew: Option<SkewConfig>,
    pub stats: Option<StatsConfig>,
    pub system: Option<SystemConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub uniform: Option<usize>,
    pub weights: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionConfig {
    pub z2k: Option<u32>,
    pub space: Option<SpaceConfig>,
    pub generators: Option<Vec<Vec<usize>>>,
    pub objective: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    pub fiber_map: Vec<usize>,
    pub exponents: Vec<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkewConfig {
    pub base: SpaceConfig,
    pub fiber: SpaceConfig,
    pub base_map: Vec<usize>,
    pub cocycle: Option<Vec<Vec<usize>>>,
    pub coboundary: Option<Vec<Vec<usize>>>,
    pub power: Option<PowerConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsConfig {
    pub base_set: Option<Vec<usize>>,
    pub n: Option<u64>,
    pub sequence: Option<Vec<u64>>,
    pub eps: Option<String>,
    pub fiber_set_a: Option<Vec<usize>>,
    pub fiber_set_b: Option<Vec<usize>>,
    pub horizon: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub space: SpaceConfig,
    pub map: Vec<usize>,
    pub sets: Vec<Vec<usize>>,
    pub offsets: Option<Vec<u64>>,
}

fn field_err(field: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(format!("{field}: {e}"))
}

pub fn load(path: &Path) -> Result<(ConfigDocument, Vec<u8>), CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Invalid(format!("cannot read config {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| CliError::Invalid(format!("config {} is not UTF-8", path.display())))?;
    let doc = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("config: {e}")))?
    } else {
        toml::from_str(text).map_err(|e| CliError::Invalid(format!("config: {e}")))?
    };
    Ok((doc, bytes))
}

pub fn rational(field: &str, s: &str) -> Result<Rational, CliError> {
    parse(s).map_err(|e| field_err(field, e))
}

impl SpaceConfig {
    pub fn build(&self, field: &str) -> Result<Arc<FiniteSpace>, CliError> {
        match (self.uniform, &self.weights) {
            (Some(0), None) => Err(field_err(&format!("{field}.uniform"), "must be positive")),
            (Some(n), None) => Ok(FiniteSpace::uniform(n)),
            (None, Some(ws)) => {
                let weights = ws
                    .iter()
                    .enumerate()
                    .map(|(i, w)| rational(&format!("{field}.weights[{i}]"), w))
                    .collect::<Result<_, _>>()?;
                FiniteSpace::new(weights).map_err(|e| field_err(&format!("{field}.weights"), e))
            }
            _ => Err(field_err(
                field,
                "give exactly one of `uniform` or `weights`",
            )),
        }
    }
}

pub fn automorphism(
    field: &str,
    space: &Arc<FiniteSpace>,
    perm: &[usize],
) -> Result<Automorphism, CliError> {
    Automorphism::new(space.clone(), perm.to_vec()).map_err(|e| field_err(field, e))
}

pub fn set(
    field: &str,
    space: &Arc<FiniteSpace>,
    atoms: &[usize],
) -> Result<MeasurableSet, CliError> {
    MeasurableSet::new(space.clone(), atoms.iter().copied()).map_err(|e| field_err(field, e))
}

impl ActionConfig {
    pub fn build(&self) -> Result<ActionGenerators, CliError> {
        match (self.z2k, &self.space, &self.generators) {
            (Some(k), None, None) => {
                let ctx = Z2kContext::new(k).map_err(|e| field_err("action.z2k", e))?;
                Ok(full_action(&ctx))
            }
            (None, Some(space), Some(gens)) => {
                let space = space.build("action.space")?;
                let gens = gens
                    .iter()
                    .enumerate()
                    .map(|(i, g)| automorphism(&format!("action.generators[{i}]"), &space, g))
                    .collect::<Result<Vec<_>, _>>()?;
                ActionGenerators::new(space, gens).map_err(|e| field_err("action.generators", e))
            }
            _ => Err(field_err(
                "action",
                "give either `z2k` or both `space` and `generators`",
            )),
        }
    }
}

impl SkewConfig {
    pub fn build(&self) -> Result<SkewProduct, CliError> {
        let base = self.base.build("skew.base")?;
        let fiber = self.fiber.build("skew.fiber")?;
        let s = automorphism("skew.base_map", &base, &self.base_map)?;
        let per_atom = |field: &str, perms: &[Vec<usize>]| -> Result<Vec<Automorphism>, CliError> {
            if perms.len() != base.atom_count() {
                return Err(field_err(
                    field,
                    format!(
                        "expected {} permutations, got {}",
                        base.atom_count(),
                        perms.len()
                    ),
                ));
            }
            perms
                .iter()
                .enumerate()
                .map(|(i, p)| automorphism(&format!("{field}[{i}]"), &fiber, p))
                .collect()
        };
        match (&self.cocycle, &self.coboundary, &self.power) {
            (Some(c), None, None) => {
                let maps = per_atom("skew.cocycle", c)?;
                SkewProduct::new(s, fiber, maps).map_err(|e| field_err("skew.cocycle", e))
            }
            (None, Some(j), None) => {
                let family = per_atom("skew.coboundary", j)?;
                joinlab::skew::coboundary_extension(&s, &family)
                    .map_err(|e| field_err("skew.coboundary", e))
            }
            (None, None, Some(p)) => {
                let t = automorphism("skew.power.fiber_map", &fiber, &p.fiber_map)?;
                joinlab::skew::power_skew(&s, &t, &p.exponents)
                    .map_err(|e| field_err("skew.power.exponents", e))
            }
            _ => Err(field_err(
                "skew",
                "give exactly one of `cocycle`, `coboundary` or `power`",
            )),
        }
    }
}

pub fn require<'a, T>(value: &'a Option<T>, field: &str) -> Result<&'a T, CliError> {
    value
        .as_ref()
        .ok_or_else(|| CliError::Invalid(format!("{field}: missing")))
}
