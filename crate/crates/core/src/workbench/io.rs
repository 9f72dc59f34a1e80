//! Versioned JSON instance files with canonical (sorted) key order.

use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::model::gsp::{GspInstance, Job};
use crate::model::step::StepCostFunction;
use crate::model::ufp::{UfpCoverInstance, UfpTask};
use crate::rational::{rat_from_json, rat_to_json};

pub const FORMAT_VERSION: i64 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    Ufp(UfpCoverInstance),
    Gsp(GspInstance),
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::Parse(format!("missing field {key:?}")))
}

fn int_field(v: &Value, key: &str) -> Result<i64> {
    field(v, key)?
        .as_i64()
        .ok_or_else(|| Error::Parse(format!("field {key:?} is not an integer")))
}

fn usize_field(v: &Value, key: &str) -> Result<usize> {
    usize::try_from(int_field(v, key)?).map_err(|_| Error::Parse(format!("field {key:?} is negative")))
}

fn array<'a>(v: &'a Value, key: &str) -> Result<&'a Vec<Value>> {
    field(v, key)?
        .as_array()
        .ok_or_else(|| Error::Parse(format!("field {key:?} is not an array")))
}

pub fn step_to_json(f: &StepCostFunction) -> Value {
    json!({
        "breakpoints": f.breakpoints().iter().map(|(t, v)| json!({"t": rat_to_json(t), "v": rat_to_json(v)})).collect::<Vec<_>>(),
        "unavailable_from": f.unavailable_from().map(rat_to_json),
    })
}

pub fn step_from_json(v: &Value) -> Result<StepCostFunction> {
    let bps = array(v, "breakpoints")?
        .iter()
        .map(|b| Ok((rat_from_json(field(b, "t")?)?, rat_from_json(field(b, "v")?)?)))
        .collect::<Result<Vec<_>>>()?;
    let unavailable = match v.get("unavailable_from") {
        None | Some(Value::Null) => None,
        Some(u) => Some(rat_from_json(u)?),
    };
    StepCostFunction::new(bps, unavailable)
}

pub fn ufp_to_json(inst: &UfpCoverInstance) -> Value {
    json!({
        "kind": "ufp-cover",
        "version": FORMAT_VERSION,
        "demands": inst.demands,
        "tasks": inst.tasks.iter().map(|t| json!({
            "id": t.id, "s": t.s, "t": t.t, "p": t.p, "c": rat_to_json(&t.c),
        })).collect::<Vec<_>>(),
    })
}

pub fn gsp_to_json(inst: &GspInstance) -> Value {
    json!({
        "kind": "gsp",
        "version": FORMAT_VERSION,
        "weight_bound": inst.weight_bound,
        "global_functions": inst.global_functions.iter().map(step_to_json).collect::<Vec<_>>(),
        "jobs": inst.jobs.iter().map(|j| json!({
            "id": j.id, "p": j.p, "r": j.r, "class": j.class, "weight": j.weight, "f": step_to_json(&j.f),
        })).collect::<Vec<_>>(),
    })
}

pub fn to_json(inst: &Instance) -> Value {
    match inst {
        Instance::Ufp(u) => ufp_to_json(u),
        Instance::Gsp(g) => gsp_to_json(g),
    }
}

pub fn from_json(v: &Value) -> Result<Instance> {
    let version = int_field(v, "version")?;
    if version != FORMAT_VERSION {
        return Err(Error::Parse(format!("unsupported format version {version}")));
    }
    match field(v, "kind")?.as_str() {
        Some("ufp-cover") => {
            let demands = array(v, "demands")?
                .iter()
                .map(|d| d.as_i64().ok_or_else(|| Error::Parse("demand is not an integer".into())))
                .collect::<Result<Vec<_>>>()?;
            let tasks = array(v, "tasks")?
                .iter()
                .map(|t| {
                    Ok(UfpTask {
                        id: usize_field(t, "id")?,
                        s: usize_field(t, "s")?,
                        t: usize_field(t, "t")?,
                        p: int_field(t, "p")?,
                        c: rat_from_json(field(t, "c")?)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Instance::Ufp(UfpCoverInstance::new(demands, tasks)?))
        }
        Some("gsp") => {
            let globals = array(v, "global_functions")?
                .iter()
                .map(step_from_json)
                .collect::<Result<Vec<_>>>()?;
            let opt = |j: &Value, key: &str| -> Result<Option<i64>> {
                match j.get(key) {
                    None | Some(Value::Null) => Ok(None),
                    Some(x) => x.as_i64().map(Some).ok_or_else(|| Error::Parse(format!("{key} is not an integer"))),
                }
            };
            let jobs = array(v, "jobs")?
                .iter()
                .map(|j| {
                    Ok(Job {
                        id: usize_field(j, "id")?,
                        p: int_field(j, "p")?,
                        r: int_field(j, "r")?,
                        f: step_from_json(field(j, "f")?)?,
                        class: opt(j, "class")?.map(|c| c as usize),
                        weight: opt(j, "weight")?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Instance::Gsp(GspInstance::new(jobs, globals, int_field(v, "weight_bound")?)?))
        }
        other => Err(Error::Parse(format!("unknown instance kind {other:?}"))),
    }
}

pub fn to_string(inst: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(&to_json(inst)).expect("values serialize");
    s.push('\n');
    s
}

pub fn parse(s: &str) -> Result<Instance> {
    from_json(&serde_json::from_str(s)?)
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    parse(&std::fs::read_to_string(path)?)
}

pub fn write_instance(path: &Path, inst: &Instance) -> Result<()> {
    std::fs::write(path, to_string(inst))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ufp::fixtures::u1;
    use crate::rational::frac;
    use crate::workbench::generate::{generate_gsp, generate_ufp, GspParams, UfpParams};
    use proptest::prelude::*;

    #[test]
    fn keys_are_sorted() {
        let s = to_string(&Instance::Ufp(u1()));
        let d = s.find("\"demands\"").unwrap();
        let k = s.find("\"kind\"").unwrap();
        let t = s.find("\"tasks\"").unwrap();
        assert!(d < k && k < t);
    }

    #[test]
    fn rational_costs_round_trip() {
        let mut inst = u1();
        inst.tasks[2].c = frac(22, 7);
        let x = Instance::Ufp(inst);
        assert_eq!(parse(&to_string(&x)).unwrap(), x);
    }

    #[test]
    fn rejects_unknown_kind_and_version() {
        assert!(parse(r#"{"kind":"other","version":1}"#).is_err());
        assert!(parse(r#"{"kind":"gsp","version":2}"#).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trip(seed in 0u64..1000) {
            let u = Instance::Ufp(generate_ufp(seed, &UfpParams::default()).unwrap());
            prop_assert_eq!(parse(&to_string(&u)).unwrap(), u.clone());
            prop_assert_eq!(to_string(&parse(&to_string(&u)).unwrap()), to_string(&u));
            let g = Instance::Gsp(generate_gsp(seed, &GspParams { releases: vec![0, 2], ..GspParams::default() }).unwrap());
            prop_assert_eq!(parse(&to_string(&g)).unwrap(), g);
        }
    }
}
