use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use joinlab::joining::{
    diagonal_invariance_defect, face_independence_defect, product_joining, sup_distance,
};
use joinlab::markov::weak_closure_probe;
use joinlab::mixing::{correlation, mixing_deviation_sweep, offset_joining, pair_with_indicators};
use joinlab::polytope::{certify_triviality, JoiningPolytope};
use joinlab::rational::{inv_pow2, zero};
use joinlab::skew::{
    as_automorphism, relative_mixing_fraction, relative_product, relative_weak_mixing_average,
    rigidity_statistic, sample_random_extension,
};
use joinlab::torus::{eta_measure, full_action, Z2kContext};
use joinlab::{
    ActionGenerators, Automorphism, FiniteSpace, JoiningTensor, LpStatus, MeasurableSet,
    MeasureTensor, OffsetVector, PolytopeSpec, Rational, SampleMode, SkewProduct,
};
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::config::{self, rational, require, ConfigDocument};
use crate::report::{rat, tensor_json, Outcome, TensorFile};
use crate::{CliError, Stat};

fn load(path: &Path, out: &mut Outcome) -> Result<ConfigDocument, CliError> {
    let (doc, bytes) = config::load(path)?;
    out.inputs.push(bytes);
    Ok(doc)
}

fn witness_checks(
    v: &MeasureTensor,
    action: &ActionGenerators,
    m: usize,
) -> Result<Value, CliError> {
    let invariance = diagonal_invariance_defect(v, action)?;
    let face = face_independence_defect(v, m)?;
    Ok(json!({
        "invariance_defect": rat(&invariance),
        "face_defect": rat(&face),
        "ok": invariance.is_zero() && face.is_zero(),
    }))
}

pub fn eta(k: u32, verify: bool) -> Result<Outcome, CliError> {
    let ctx = Z2kContext::new(k)?;
    let eta = eta_measure(&ctx);
    let mut out = Outcome::default();
    out.set("k", json!(k));
    if !verify {
        out.set("tensor", tensor_json(&eta));
        return Ok(out);
    }
    let mass: Rational = eta.entries().iter().sum();
    let product = product_joining(eta.factors())?;
    let invariance = diagonal_invariance_defect(&eta, &full_action(&ctx))?;
    let two_face = face_independence_defect(&eta, 2)?;
    let three_face = face_independence_defect(&eta, 3)?;
    let sup = sup_distance(&eta, &product)?;
    let expected = inv_pow2(3 * k) - inv_pow2(4 * k);
    let checks = json!({
        "mass_is_one": mass.is_one(),
        "invariant": invariance.is_zero(),
        "two_faces_independent": two_face.is_zero(),
        "three_face_defect_zero": three_face.is_zero(),
        "sup_distance_matches": sup == expected,
    });
    let passed = checks
        .as_object()
        .expect("object")
        .values()
        .all(|v| v == &json!(true));
    out.set("mass", rat(&mass));
    out.set("invariance_defect", rat(&invariance));
    out.set("two_face_defect", rat(&two_face));
    out.set("three_face_defect", rat(&three_face));
    out.set("sup_distance_to_product", rat(&sup));
    out.set("expected_sup_distance", rat(&expected));
    out.set("support_size", json!(eta.nonzero().count()));
    out.set("checks", checks);
    out.passed = Some(passed);
    Ok(out)
}

pub fn polytope(path: &Path, order: usize, m: usize, certify: bool) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let doc = load(path, &mut out)?;
    let action_cfg = require(&doc.action, "action")?;
    let action = action_cfg.build()?;
    let spec = PolytopeSpec::new(action.clone(), order, m)?;
    out.set("order", json!(order));
    out.set("independence_level", json!(m));
    out.set("atoms", json!(action.space().atom_count()));
    out.set("tensor_size", json!(spec.tensor_size()));
    if certify {
        let cert = certify_triviality(&spec)?;
        out.set("trivial", json!(cert.trivial));
        out.set("max_deviation", rat(&cert.max_deviation));
        match &cert.witness {
            Some(w) => {
                let checks = witness_checks(w, &action, m)?;
                out.passed = Some(checks["ok"] == json!(true));
                out.set("witness", tensor_json(w));
                out.set("witness_checks", checks);
            }
            None => {
                out.set("witness", Value::Null);
                out.passed = Some(true);
            }
        }
        return Ok(out);
    }
    let objective = match &action_cfg.objective {
        Some(c) => {
            if c.len() != spec.tensor_size() {
                return Err(CliError::Invalid(format!(
                    "action.objective: expected {} entries, got {}",
                    spec.tensor_size(),
                    c.len()
                )));
            }
            c.iter()
                .enumerate()
                .map(|(i, s)| rational(&format!("action.objective[{i}]"), s))
                .collect::<Result<Vec<_>, _>>()?
        }
        None => vec![zero(); spec.tensor_size()],
    };
    let outcome = JoiningPolytope::new(spec)?.maximize(&objective)?;
    out.set(
        "status",
        json!(match outcome.status {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
        }),
    );
    out.set("optimum", rat(&outcome.optimum));
    match &outcome.witness {
        Some(w) => {
            let checks = witness_checks(w, &action, m)?;
            out.passed = Some(checks["ok"] == json!(true));
            out.set("witness", tensor_json(w));
            out.set("witness_checks", checks);
        }
        None => out.set("witness", Value::Null),
    }
    Ok(out)
}

fn base_set(doc: &ConfigDocument, skew: &SkewProduct) -> Result<MeasurableSet, CliError> {
    let stats = require(&doc.stats, "stats")?;
    match &stats.base_set {
        Some(atoms) => config::set("stats.base_set", skew.base(), atoms),
        None => Ok(MeasurableSet::full(Arc::clone(skew.base()))),
    }
}

pub fn cocycle(path: &Path, stat: Stat) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let doc = load(path, &mut out)?;
    let skew = require(&doc.skew, "skew")?.build()?;
    let stats = require(&doc.stats, "stats")?;
    out.set("base_atoms", json!(skew.base().atom_count()));
    out.set("fiber_atoms", json!(skew.fiber().atom_count()));
    match stat {
        Stat::Rigidity => {
            let a = base_set(&doc, &skew)?;
            let n = *require(&stats.n, "stats.n")?;
            let seq = require(&stats.sequence, "stats.sequence")?;
            let values = seq
                .iter()
                .map(|&p| {
                    Ok(json!({
                        "p": p,
                        "value": rat(&rigidity_statistic(&skew, &a, n, p)?),
                        "returns_identity": skew.returns_identity_at(p),
                    }))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            out.set("stat", json!("rigidity"));
            out.set("n", json!(n));
            out.set("set_measure", rat(&a.measure()));
            out.set("values", Value::Array(values));
        }
        Stat::Fraction => {
            let eps = rational("stats.eps", require(&stats.eps, "stats.eps")?)?;
            let seq = require(&stats.sequence, "stats.sequence")?;
            let values = seq
                .iter()
                .map(|&p| {
                    Ok(json!({
                        "p": p,
                        "value": rat(&relative_mixing_fraction(&skew, p, &eps)?),
                    }))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            out.set("stat", json!("fraction"));
            out.set("eps", rat(&eps));
            out.set("values", Value::Array(values));
        }
        Stat::Average => {
            let fiber = skew.fiber();
            let a = config::set(
                "stats.fiber_set_a",
                fiber,
                require(&stats.fiber_set_a, "stats.fiber_set_a")?,
            )?;
            let b = config::set(
                "stats.fiber_set_b",
                fiber,
                require(&stats.fiber_set_b, "stats.fiber_set_b")?,
            )?;
            let horizon = *require(&stats.horizon, "stats.horizon")?;
            let value = relative_weak_mixing_average(&skew, &a, &b, horizon)?;
            out.set("stat", json!("average"));
            out.set("horizon", json!(horizon));
            out.set("value", rat(&value));
        }
    }
    Ok(out)
}

struct System {
    map: Automorphism,
    sets: Vec<MeasurableSet>,
    offsets: Option<Vec<u64>>,
}

fn system(doc: &ConfigDocument) -> Result<System, CliError> {
    let sys = require(&doc.system, "system")?;
    let space = sys.space.build("system.space")?;
    let t = config::automorphism("system.map", &space, &sys.map)?;
    let sets = sys
        .sets
        .iter()
        .enumerate()
        .map(|(i, s)| config::set(&format!("system.sets[{i}]"), &space, s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(System {
        map: t,
        sets,
        offsets: sys.offsets.clone(),
    })
}

pub fn mixing(path: &Path, sweep: u64) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let doc = load(path, &mut out)?;
    let System {
        map: t,
        sets,
        offsets,
    } = system(&doc)?;
    let product: Rational = sets.iter().map(MeasurableSet::measure).product();
    out.set("set_count", json!(sets.len()));
    out.set("product_of_measures", rat(&product));
    out.set("sweep", json!(sweep));
    out.set(
        "sweep_deviation",
        rat(&mixing_deviation_sweep(&t, &sets, sweep)?),
    );
    if let Some(offsets) = offsets {
        let k = OffsetVector::new(offsets)?;
        let direct = correlation(&t, &sets, &k)?;
        let via_joining = pair_with_indicators(&offset_joining(&t, &k), &sets)?;
        out.set("offsets", json!(k.offsets()));
        out.set("correlation", rat(&direct));
        out.set("correlation_via_joining", rat(&via_joining));
        out.passed = Some(direct == via_joining);
    }
    Ok(out)
}

pub fn probe(path: &Path, grid: &[String], k_max: u32) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let doc = load(path, &mut out)?;
    let t = system(&doc)?.map;
    let grid = grid
        .iter()
        .enumerate()
        .map(|(i, s)| rational(&format!("--grid[{i}]"), s))
        .collect::<Result<Vec<_>, _>>()?;
    let result = weak_closure_probe(&t, &grid, k_max)?;
    out.set("k_max", json!(k_max));
    out.set("best_k", json!(result.best_k));
    out.set("best_eps", rat(&result.best_eps));
    out.set("best_distance", rat(&result.best_distance));
    Ok(out)
}

fn perms(maps: &[Automorphism]) -> Value {
    json!(maps
        .iter()
        .map(Automorphism::permutation)
        .collect::<Vec<_>>())
}

pub fn sample(
    seed: u64,
    mode: SampleMode,
    base: usize,
    fiber: usize,
    analyze: bool,
) -> Result<Outcome, CliError> {
    if base == 0 || fiber == 0 {
        return Err(CliError::Invalid(
            "--base-size and --fiber-size must be positive".into(),
        ));
    }
    let base_space = FiniteSpace::uniform(base);
    let s = Automorphism::new(
        Arc::clone(&base_space),
        (0..base).map(|x| (x + 1) % base).collect(),
    )?;
    let fiber_space = FiniteSpace::uniform(fiber);
    let skew = sample_random_extension(&s, &fiber_space, seed, mode);
    let mut out = Outcome::default();
    out.set("seed", json!(seed));
    out.set("base_map", json!(s.permutation()));
    out.set("cocycle", perms(skew.cocycle()));
    if analyze {
        let period = base as u64;
        let whole = MeasurableSet::full(Arc::clone(&base_space));
        let joint = as_automorphism(&skew);
        let relative = relative_product(&skew);
        let half = joinlab::rational::ratio(1, 2);
        out.set(
            "analysis",
            json!({
                "period": period,
                "returns_identity_at_period": skew.returns_identity_at(period),
                "rigidity_at_period": rat(&rigidity_statistic(&skew, &whole, 1, period)?),
                "mixing_fraction_at_one": rat(&relative_mixing_fraction(&skew, 1, &half)?),
                "orbit_count": joint.orbit_count(),
                "ergodic": joint.is_ergodic(),
                "relative_product_orbit_count": relative.orbit_count(),
                "relative_product_ergodic": relative.is_ergodic(),
            }),
        );
    }
    Ok(out)
}

fn action_from(spec: &str, out: &mut Outcome) -> Result<ActionGenerators, CliError> {
    let path = Path::new(spec);
    if path.exists() {
        let doc = load(path, out)?;
        return require(&doc.action, "action")?.build();
    }
    match spec.strip_prefix("z2k:").map(str::parse::<u32>) {
        Some(Ok(k)) => Ok(full_action(&Z2kContext::new(k)?)),
        _ => Err(CliError::Invalid(format!(
            "--action: `{spec}` is neither a config file nor `z2k:K`"
        ))),
    }
}

pub fn verify_joining(file: &Path, action: &str) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let bytes = std::fs::read(file)
        .map_err(|e| CliError::Invalid(format!("cannot read tensor {}: {e}", file.display())))?;
    let parsed: TensorFile = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Invalid(format!("tensor file: {e}")))?;
    out.inputs.push(bytes);
    let tensor = parsed.to_tensor()?;
    let action = action_from(action, &mut out)?;
    let order = tensor.order();
    out.set("order", json!(order));
    let on_action_space = tensor
        .factors()
        .iter()
        .all(|f| f.weights() == action.space().weights());
    out.set("factors_match_action", json!(on_action_space));
    if !on_action_space {
        out.passed = Some(false);
        return Ok(out);
    }
    let mass: Rational = tensor.entries().iter().sum();
    let joining = JoiningTensor::new(tensor.clone());
    out.set("mass", rat(&mass));
    out.set("is_joining", json!(joining.is_ok()));
    if let Err(e) = &joining {
        out.set("joining_error", json!(e.to_string()));
    }
    let invariance = diagonal_invariance_defect(&tensor, &action)?;
    out.set("invariance_defect", rat(&invariance));
    let mut faces = BTreeMap::new();
    for m in 1..order {
        faces.insert(m.to_string(), rat(&face_independence_defect(&tensor, m)?));
    }
    out.set("face_defects", json!(faces));
    out.passed = Some(joining.is_ok() && invariance.is_zero());
    Ok(out)
}
