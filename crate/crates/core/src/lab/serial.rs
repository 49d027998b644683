use serde::{Deserialize, Serialize};

use super::LabError;
use crate::construction::{Basis, Construction, CopyIndex, Instance, Variant};
use crate::setcore::ItemSet;

/// On-disk instance layout. Sets are lowercase hex with item 0 in the low bit of the
/// first byte; copy indices are 1 or 2 and `i_star` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceJson {
    m: usize,
    n: usize,
    variant: Variant,
    theta: u64,
    i_star: usize,
    #[serde(rename = "S")]
    s: [String; 2],
    #[serde(rename = "T")]
    t: [String; 2],
    #[serde(rename = "A1")]
    a1: Vec<String>,
    #[serde(rename = "A2")]
    a2: Vec<String>,
    #[serde(rename = "B1")]
    b1: Vec<String>,
    #[serde(rename = "B2")]
    b2: Vec<String>,
    #[serde(rename = "rA")]
    r_a: Vec<u64>,
    #[serde(rename = "rB")]
    r_b: Vec<u64>,
    seed: u64,
}

fn hexes(v: &[ItemSet]) -> Vec<String> {
    v.iter().map(ItemSet::to_hex).collect()
}

fn to_json_struct(inst: &Instance) -> InstanceJson {
    let num = |c: &CopyIndex| u64::from(c.number());
    InstanceJson {
        m: inst.m,
        n: inst.n,
        variant: inst.variant,
        theta: num(&inst.theta),
        i_star: inst.i_star + 1,
        s: [inst.s.s1.to_hex(), inst.s.s2.to_hex()],
        t: [inst.t.s1.to_hex(), inst.t.s2.to_hex()],
        a1: hexes(&inst.a1),
        a2: hexes(&inst.a2),
        b1: hexes(&inst.b1),
        b2: hexes(&inst.b2),
        r_a: inst.r_a.iter().map(num).collect(),
        r_b: inst.r_b.iter().map(num).collect(),
        seed: inst.seed,
    }
}

pub fn instance_to_json(inst: &Instance) -> serde_json::Value {
    serde_json::to_value(to_json_struct(inst)).expect("instance serializes")
}

pub fn serialize_instance(inst: &Instance) -> String {
    serde_json::to_string(&to_json_struct(inst)).expect("instance serializes")
}

/// Parses and re-validates an instance; every structural invariant must hold.
pub fn parse_instance(bytes: &[u8]) -> Result<Instance, LabError> {
    let j: InstanceJson = serde_json::from_slice(bytes)?;
    let m = j.m;
    let set = |h: &str| ItemSet::from_hex(m, h).map_err(|e| LabError::Malformed(e.to_string()));
    let sets = |v: &[String]| v.iter().map(|h| set(h)).collect::<Result<Vec<_>, _>>();
    let copy = |x: u64| CopyIndex::from_number(x).ok_or_else(|| LabError::Malformed(format!("copy index {x}")));
    let copies = |v: &[u64]| v.iter().map(|&x| copy(x)).collect::<Result<Vec<_>, _>>();
    if j.i_star == 0 {
        return Err(LabError::Malformed("i_star is 1-based".into()));
    }
    let inst = Instance {
        m,
        n: j.n,
        seed: j.seed,
        variant: j.variant,
        s: Basis::new(set(&j.s[0])?, set(&j.s[1])?),
        t: Basis::new(set(&j.t[0])?, set(&j.t[1])?),
        i_star: j.i_star - 1,
        a1: sets(&j.a1)?,
        a2: sets(&j.a2)?,
        b1: sets(&j.b1)?,
        b2: sets(&j.b2)?,
        theta: copy(j.theta)?,
        r_a: copies(&j.r_a)?,
        r_b: copies(&j.r_b)?,
    };
    Construction::new(m)?.validate(&inst)?;
    Ok(inst)
}
