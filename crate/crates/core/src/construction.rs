//! Bases, clauses, special clauses and the two instance distributions built from them.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::setcore::{
    part_cells, part_profile, refine_sample, ItemSet, Rational, RngStream, SetError,
};

/// Width of the reference configuration all profiles are read from.
pub const REFERENCE_M: usize = 16;

const BASIS: [usize; 4] = [5, 3, 3, 5];
const CMP: [usize; 16] = [4, 1, 0, 0, 0, 1, 2, 0, 1, 0, 1, 1, 0, 1, 0, 4];
const REG: [usize; 4] = [2, 1, 2, 3];
const REGPAIR: [usize; 4] = [0, 0, 1, 1];
const SPEC1: [usize; 16] = [2, 0, 0, 0, 0, 1, 0, 0, 1, 0, 1, 0, 0, 1, 0, 2];
const SPEC2: [usize; 16] = [2, 0, 0, 0, 0, 0, 2, 0, 1, 0, 0, 0, 0, 1, 0, 2];
const SPECPAIR: [usize; 16] = [0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0];

const REF_S1: [usize; 8] = [0, 1, 2, 6, 8, 9, 10, 11];
const REF_S2: [usize; 8] = [3, 4, 5, 6, 8, 9, 10, 11];
const REF_T1: [usize; 8] = [1, 2, 3, 4, 8, 9, 10, 11];
const REF_T2: [usize; 8] = [1, 5, 6, 7, 8, 9, 10, 11];
const REF_A1: [usize; 8] = [0, 2, 5, 6, 8, 9, 14, 15];
const REF_A2: [usize; 8] = [0, 3, 4, 6, 10, 11, 12, 13];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("item count {0} is not a positive multiple of 16")]
    BadItemCount(usize),
    #[error("clause-pair count must be at least 1")]
    BadPairCount,
    #[error(transparent)]
    Set(#[from] SetError),
    #[error("constant tables are inconsistent: {0}")]
    Inconsistent(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("generalized formulas need u, v > 0")]
    NonPositive,
}

fn check_m(m: usize) -> Result<usize, ConstructionError> {
    if m == 0 || m % REFERENCE_M != 0 {
        return Err(ConstructionError::BadItemCount(m));
    }
    Ok(m / REFERENCE_M)
}

/// Which of the two copies a clause belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CopyIndex {
    One,
    Two,
}

impl CopyIndex {
    pub const BOTH: [CopyIndex; 2] = [CopyIndex::One, CopyIndex::Two];

    pub fn other(self) -> CopyIndex {
        match self {
            CopyIndex::One => CopyIndex::Two,
            CopyIndex::Two => CopyIndex::One,
        }
    }

    /// 1 or 2.
    pub fn number(self) -> u8 {
        match self {
            CopyIndex::One => 1,
            CopyIndex::Two => 2,
        }
    }

    pub fn from_number(j: u64) -> Option<CopyIndex> {
        match j {
            1 => Some(CopyIndex::One),
            2 => Some(CopyIndex::Two),
            _ => None,
        }
    }

    fn random(rng: &mut RngStream) -> CopyIndex {
        if rng.random_bool(0.5) {
            CopyIndex::One
        } else {
            CopyIndex::Two
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Nu,
    NuPrime,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Nu => "nu",
            Variant::NuPrime => "nu_prime",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        match s {
            "nu" => Some(Variant::Nu),
            "nu_prime" => Some(Variant::NuPrime),
            _ => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An ordered pair of sets. Valid bases have profile `(5,3,3,5)·m/16`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Basis {
    pub s1: ItemSet,
    pub s2: ItemSet,
}

impl Basis {
    pub fn new(s1: ItemSet, s2: ItemSet) -> Self {
        Basis { s1, s2 }
    }

    pub fn width(&self) -> usize {
        self.s1.width()
    }

    /// The basis with its two sets swapped.
    pub fn rev(&self) -> Basis {
        Basis::new(self.s2.clone(), self.s1.clone())
    }

    pub fn sets(&self) -> [ItemSet; 2] {
        [self.s1.clone(), self.s2.clone()]
    }

    /// `self ‖ other` as a four-set sequence.
    pub fn concat(&self, other: &Basis) -> [ItemSet; 4] {
        [
            self.s1.clone(),
            self.s2.clone(),
            other.s1.clone(),
            other.s2.clone(),
        ]
    }
}

fn scaled<const N: usize>(v: &[usize; N], q: usize) -> Vec<usize> {
    v.iter().map(|x| x * q).collect()
}

/// Sets of the reference configuration, each item expanded into a block of `m/16` items.
#[derive(Debug, Clone)]
pub struct ReferenceSets {
    pub s: Basis,
    pub t: Basis,
    pub a1: ItemSet,
    pub a2: ItemSet,
}

pub fn reference_sets(m: usize) -> Result<ReferenceSets, ConstructionError> {
    let q = check_m(m)?;
    let expand = |items: &[usize]| {
        ItemSet::from_items(m, items.iter().flat_map(|&z| z * q..(z + 1) * q))
            .expect("reference items fit")
    };
    Ok(ReferenceSets {
        s: Basis::new(expand(&REF_S1), expand(&REF_S2)),
        t: Basis::new(expand(&REF_T1), expand(&REF_T2)),
        a1: expand(&REF_A1),
        a2: expand(&REF_A2),
    })
}

/// All profile vectors of the construction, scaled to `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantVectors {
    pub m: usize,
    pub basis: Vec<usize>,
    pub cmp: Vec<usize>,
    pub reg: Vec<usize>,
    pub regpair: Vec<usize>,
    pub spec1: Vec<usize>,
    pub spec2: Vec<usize>,
    pub specpair: Vec<usize>,
    /// Profile of `S ‖ A¹ ‖ A²` for any clause pair w.r.t. `S`.
    pub pair_profile: Vec<usize>,
    /// Profile of `S ‖ T ‖ A¹⋆ ‖ A²⋆` for any special pair w.r.t. `(S, T)`.
    pub opt_profile: Vec<usize>,
}

/// Sums a profile over all but the listed bit positions (0 = most significant of `k`).
fn marginal(profile: &[usize], k: usize, keep: &[usize]) -> Vec<usize> {
    let mut out = vec![0; 1 << keep.len()];
    for (idx, &v) in profile.iter().enumerate() {
        let mut o = 0;
        for &b in keep {
            o = (o << 1) | ((idx >> (k - 1 - b)) & 1);
        }
        out[o] += v;
    }
    out
}

/// Reorders a profile so that new bit position `i` reads old position `perm[i]`.
fn permute_profile(profile: &[usize], k: usize, perm: &[usize]) -> Vec<usize> {
    let mut out = vec![0; profile.len()];
    for (idx, &v) in profile.iter().enumerate() {
        let mut o = 0;
        for &b in perm {
            o = (o << 1) | ((idx >> (k - 1 - b)) & 1);
        }
        out[o] = v;
    }
    out
}

fn expect_eq(what: &str, got: &[usize], want: &[usize]) -> Result<(), ConstructionError> {
    if got != want {
        return Err(ConstructionError::Inconsistent(format!(
            "{what}: derived {got:?}, expected {want:?}"
        )));
    }
    Ok(())
}

/// Joint class counts per base cell implied by the printed vectors: for each cell,
/// (neither, second only, first only, both).
fn joint_from_marginals(
    cell: &[usize],
    first: &[usize],
    second: &[usize],
    both: &[usize],
) -> Result<Vec<usize>, ConstructionError> {
    let mut out = Vec::with_capacity(cell.len() * 4);
    for c in 0..cell.len() {
        let (n, f, s, b) = (cell[c] as i64, first[c] as i64, second[c] as i64, both[c] as i64);
        let row = [n - f - s + b, s - b, f - b, b];
        if row.iter().any(|&x| x < 0) {
            return Err(ConstructionError::Inconsistent(format!(
                "negative joint class count {row:?} in cell {c}"
            )));
        }
        out.extend(row.iter().map(|&x| x as usize));
    }
    Ok(out)
}

pub fn constant_vectors(m: usize) -> Result<ConstantVectors, ConstructionError> {
    let q = check_m(m)?;
    let r = reference_sets(REFERENCE_M)?;
    let w = REFERENCE_M;
    let pair_ref = part_profile(&[r.s.s1.clone(), r.s.s2.clone(), r.a1.clone(), r.a2.clone()], w, None)?;
    let st = r.s.concat(&r.t);
    let mut opt_sets = st.to_vec();
    opt_sets.extend([r.a1.clone(), r.a2.clone()]);
    let opt_ref = part_profile(&opt_sets, w, None)?;

    // The reference configuration must realize every printed vector.
    expect_eq("basis S", &part_profile(&r.s.sets(), w, None)?, &BASIS)?;
    expect_eq("basis T", &part_profile(&r.t.sets(), w, None)?, &BASIS)?;
    expect_eq("cmp", &marginal(&opt_ref, 6, &[0, 1, 2, 3]), &CMP)?;
    expect_eq("spec1", &part_profile(&st, w, Some(&r.a1))?, &SPEC1)?;
    expect_eq("spec2", &part_profile(&st, w, Some(&r.a2))?, &SPEC2)?;
    expect_eq(
        "specpair",
        &part_profile(&st, w, Some(&r.a1.intersection(&r.a2)))?,
        &SPECPAIR,
    )?;
    expect_eq("reg A1", &part_profile(&r.s.sets(), w, Some(&r.a1))?, &REG)?;
    expect_eq("reg A2", &part_profile(&r.s.rev().sets(), w, Some(&r.a2))?, &REG)?;
    expect_eq(
        "regpair",
        &part_profile(&r.s.sets(), w, Some(&r.a1.intersection(&r.a2)))?,
        &REGPAIR,
    )?;
    expect_eq("pair marginal of opt", &marginal(&opt_ref, 6, &[0, 1, 4, 5]), &pair_ref)?;

    // The joint tables the samplers use must agree with the printed vectors.
    let reg_rev = [REG[0], REG[2], REG[1], REG[3]];
    let pair_joint = joint_from_marginals(&BASIS, &REG, &reg_rev, &REGPAIR)?;
    expect_eq("clause pair joint", &pair_joint, &pair_ref)?;
    let spec_joint = joint_from_marginals(&CMP, &SPEC1, &SPEC2, &SPECPAIR)?;
    expect_eq("special pair joint", &spec_joint, &opt_ref)?;

    Ok(ConstantVectors {
        m,
        basis: scaled(&BASIS, q),
        cmp: scaled(&CMP, q),
        reg: scaled(&REG, q),
        regpair: scaled(&REGPAIR, q),
        spec1: scaled(&SPEC1, q),
        spec2: scaled(&SPEC2, q),
        specpair: scaled(&SPECPAIR, q),
        pair_profile: pair_ref.iter().map(|x| x * q).collect(),
        opt_profile: opt_ref.iter().map(|x| x * q).collect(),
    })
}

/// True iff `part_profile(sets) = expected`.
pub fn validate_profile(sets: &[ItemSet], width: usize, expected: &[usize]) -> Result<bool, SetError> {
    Ok(part_profile(sets, width, None)? == expected)
}

fn profile_check(
    what: &str,
    sets: &[ItemSet],
    width: usize,
    mask: Option<&ItemSet>,
    expected: &[usize],
) -> Result<(), ConstructionError> {
    let got = part_profile(sets, width, mask)?;
    if got != expected {
        return Err(ConstructionError::Invariant(format!(
            "{what}: profile {got:?}, expected {expected:?}"
        )));
    }
    Ok(())
}

/// The instance generator for one item count.
#[derive(Debug, Clone)]
pub struct Construction {
    cv: ConstantVectors,
    /// `opt_profile` reordered to `S ‖ A¹ ‖ A² ‖ T`.
    opt_by_clauses: Vec<usize>,
}

impl Construction {
    pub fn new(m: usize) -> Result<Self, ConstructionError> {
        let cv = constant_vectors(m)?;
        let opt_by_clauses = permute_profile(&cv.opt_profile, 6, &[0, 1, 4, 5, 2, 3]);
        Ok(Construction { cv, opt_by_clauses })
    }

    pub fn m(&self) -> usize {
        self.cv.m
    }

    pub fn vectors(&self) -> &ConstantVectors {
        &self.cv
    }

    /// Draws `j` new sets uniformly subject to `part_profile(base ‖ new) = profile`.
    fn extend(
        &self,
        base: &[ItemSet],
        profile: &[usize],
        j: usize,
        rng: &mut RngStream,
    ) -> Result<Vec<ItemSet>, ConstructionError> {
        let m = self.m();
        let cells = part_cells(base, m)?;
        let per = 1 << j;
        let rows: Vec<Vec<usize>> = profile.chunks(per).map(|c| c.to_vec()).collect();
        let classes = refine_sample(&cells, &rows, rng)?;
        let mut out = vec![ItemSet::empty(m); j];
        for (cls_idx, cls) in classes.iter().enumerate() {
            for (t, set) in out.iter_mut().enumerate() {
                if (cls_idx >> (j - 1 - t)) & 1 == 1 {
                    *set = set.union(cls);
                }
            }
        }
        Ok(out)
    }

    fn require_basis(&self, b: &Basis, name: &str) -> Result<(), ConstructionError> {
        profile_check(name, &b.sets(), self.m(), None, &self.cv.basis)
    }

    pub fn sample_basis(&self, rng: &mut RngStream) -> Basis {
        let mut s = self.extend(&[], &self.cv.basis, 2, rng).expect("basis classes");
        let s2 = s.pop().unwrap();
        Basis::new(s.pop().unwrap(), s2)
    }

    pub fn sample_compatible(&self, s: &Basis, rng: &mut RngStream) -> Result<Basis, ConstructionError> {
        self.require_basis(s, "basis S")?;
        let mut t = self.extend(&s.sets(), &self.cv.cmp, 2, rng)?;
        let t2 = t.pop().unwrap();
        Ok(Basis::new(t.pop().unwrap(), t2))
    }

    pub fn sample_clause_pair(
        &self,
        s: &Basis,
        rng: &mut RngStream,
    ) -> Result<(ItemSet, ItemSet), ConstructionError> {
        self.require_basis(s, "basis")?;
        let mut a = self.extend(&s.sets(), &self.cv.pair_profile, 2, rng)?;
        let a2 = a.pop().unwrap();
        Ok((a.pop().unwrap(), a2))
    }

    pub fn sample_special_pair(
        &self,
        s: &Basis,
        t: &Basis,
        rng: &mut RngStream,
    ) -> Result<(ItemSet, ItemSet), ConstructionError> {
        if !self.is_compatible(s, t)? {
            return Err(ConstructionError::Invariant("S is not compatible with T".into()));
        }
        let mut a = self.extend(&s.concat(t), &self.cv.opt_profile, 2, rng)?;
        let a2 = a.pop().unwrap();
        Ok((a.pop().unwrap(), a2))
    }

    /// A uniform `T` with `part_profile(S ‖ T ‖ A¹ ‖ A²) = opt_profile`.
    pub fn sample_basis_for_special(
        &self,
        s: &Basis,
        a1: &ItemSet,
        a2: &ItemSet,
        rng: &mut RngStream,
    ) -> Result<Basis, ConstructionError> {
        if !self.is_clause_pair(a1, a2, s)? {
            return Err(ConstructionError::Invariant("(A1, A2) is not a clause pair w.r.t. S".into()));
        }
        let base = [s.s1.clone(), s.s2.clone(), a1.clone(), a2.clone()];
        let mut t = self.extend(&base, &self.opt_by_clauses, 2, rng)?;
        let t2 = t.pop().unwrap();
        Ok(Basis::new(t.pop().unwrap(), t2))
    }

    pub fn is_basis(&self, b: &Basis) -> Result<bool, ConstructionError> {
        Ok(validate_profile(&b.sets(), self.m(), &self.cv.basis)?)
    }

    pub fn is_compatible(&self, s: &Basis, t: &Basis) -> Result<bool, ConstructionError> {
        Ok(validate_profile(&s.concat(t), self.m(), &self.cv.cmp)?)
    }

    pub fn is_clause(&self, a: &ItemSet, s: &Basis) -> Result<bool, ConstructionError> {
        Ok(part_profile(&s.sets(), self.m(), Some(a))? == self.cv.reg)
    }

    pub fn is_clause_pair(&self, a1: &ItemSet, a2: &ItemSet, s: &Basis) -> Result<bool, ConstructionError> {
        Ok(self.is_clause(a1, s)?
            && self.is_clause(a2, &s.rev())?
            && part_profile(&s.sets(), self.m(), Some(&a1.intersection(a2)))? == self.cv.regpair)
    }

    pub fn is_special_pair(
        &self,
        a1: &ItemSet,
        a2: &ItemSet,
        s: &Basis,
        t: &Basis,
    ) -> Result<bool, ConstructionError> {
        let st = s.concat(t);
        let m = self.m();
        Ok(part_profile(&st, m, Some(a1))? == self.cv.spec1
            && part_profile(&st, m, Some(a2))? == self.cv.spec2
            && part_profile(&st, m, Some(&a1.intersection(a2)))? == self.cv.specpair)
    }

    fn random_choices(&self, n: usize, i_star: usize, theta: CopyIndex, rng: &mut RngStream) -> Vec<CopyIndex> {
        (0..n)
            .map(|i| if i == i_star { theta } else { CopyIndex::random(rng) })
            .collect()
    }

    pub fn sample_instance(
        &self,
        n: usize,
        variant: Variant,
        rng: &mut RngStream,
    ) -> Result<Instance, ConstructionError> {
        if n == 0 {
            return Err(ConstructionError::BadPairCount);
        }
        let m = self.m();
        let (s, t, i_star, a1, a2, b1, b2) = match variant {
            Variant::Nu => {
                let s = self.sample_basis(rng);
                let t = self.sample_compatible(&s, rng)?;
                let i_star = rng.random_range(0..n);
                let trev = t.rev();
                let (mut a1, mut a2, mut b1, mut b2) = (vec![], vec![], vec![], vec![]);
                for i in 0..n {
                    if i == i_star {
                        let (x1, x2) = self.sample_special_pair(&s, &t, rng)?;
                        b1.push(x1.complement());
                        b2.push(x2.complement());
                        a1.push(x1);
                        a2.push(x2);
                    } else {
                        let (x1, x2) = self.sample_clause_pair(&s, rng)?;
                        let (y2, y1) = self.sample_clause_pair(&trev, rng)?;
                        a1.push(x1);
                        a2.push(x2);
                        b1.push(y1);
                        b2.push(y2);
                    }
                }
                (s, t, i_star, a1, a2, b1, b2)
            }
            Variant::NuPrime => {
                let s = self.sample_basis(rng);
                let (mut a1, mut a2) = (Vec::with_capacity(n), Vec::with_capacity(n));
                for _ in 0..n {
                    let (x1, x2) = self.sample_clause_pair(&s, rng)?;
                    a1.push(x1);
                    a2.push(x2);
                }
                let i_star = rng.random_range(0..n);
                let t = self.sample_basis_for_special(&s, &a1[i_star], &a2[i_star], rng)?;
                let trev = t.rev();
                let (mut b1, mut b2) = (Vec::with_capacity(n), Vec::with_capacity(n));
                for i in 0..n {
                    if i == i_star {
                        b1.push(a1[i].complement());
                        b2.push(a2[i].complement());
                    } else {
                        let (y2, y1) = self.sample_clause_pair(&trev, rng)?;
                        b1.push(y1);
                        b2.push(y2);
                    }
                }
                (s, t, i_star, a1, a2, b1, b2)
            }
        };
        let theta = CopyIndex::random(rng);
        let r_a = self.random_choices(n, i_star, theta, rng);
        let r_b = self.random_choices(n, i_star, theta, rng);
        Ok(Instance {
            m,
            n,
            seed: rng.seed(),
            variant,
            s,
            t,
            i_star,
            a1,
            a2,
            b1,
            b2,
            theta,
            r_a,
            r_b,
        })
    }

    /// Checks every structural invariant of `inst`, naming the first failing profile.
    pub fn validate(&self, inst: &Instance) -> Result<(), ConstructionError> {
        let m = self.m();
        let bad = |msg: String| Err(ConstructionError::Invariant(msg));
        if inst.m != m {
            return bad(format!("instance has m = {}, generator has {m}", inst.m));
        }
        let n = inst.n;
        if n == 0 {
            return Err(ConstructionError::BadPairCount);
        }
        for (name, v) in [("A1", &inst.a1), ("A2", &inst.a2), ("B1", &inst.b1), ("B2", &inst.b2)] {
            if v.len() != n {
                return bad(format!("{name} has {} sets, expected {n}", v.len()));
            }
            crate::setcore::check_widths(m, v.iter())?;
        }
        if inst.r_a.len() != n || inst.r_b.len() != n {
            return bad("copy choice sequences have wrong length".into());
        }
        if inst.i_star >= n {
            return bad(format!("i_star {} outside 1..={n}", inst.i_star + 1));
        }
        crate::setcore::check_widths(m, [&inst.s.s1, &inst.s.s2, &inst.t.s1, &inst.t.s2])?;
        self.require_basis(&inst.s, "basis S")?;
        self.require_basis(&inst.t, "basis T")?;
        profile_check("S ‖ T", &inst.s.concat(&inst.t), m, None, &self.cv.cmp)?;
        let srev = inst.s.rev();
        let trev = inst.t.rev();
        for i in 0..n {
            for (name, c) in [("A1", &inst.a1[i]), ("A2", &inst.a2[i]), ("B1", &inst.b1[i]), ("B2", &inst.b2[i])] {
                if c.count() != m / 2 {
                    return bad(format!("{name}[{}] has {} items, expected {}", i + 1, c.count(), m / 2));
                }
            }
            if i == inst.i_star {
                let st = inst.s.concat(&inst.t);
                profile_check("special A1", &st, m, Some(&inst.a1[i]), &self.cv.spec1)?;
                profile_check("special A2", &st, m, Some(&inst.a2[i]), &self.cv.spec2)?;
                profile_check(
                    "special A1 ∩ A2",
                    &st,
                    m,
                    Some(&inst.a1[i].intersection(&inst.a2[i])),
                    &self.cv.specpair,
                )?;
                if inst.b1[i] != inst.a1[i].complement() || inst.b2[i] != inst.a2[i].complement() {
                    return bad("Bob's special clauses are not complements of Alice's".into());
                }
            } else {
                let at = format!("[{}]", i + 1);
                profile_check(&format!("A1{at} over S"), &inst.s.sets(), m, Some(&inst.a1[i]), &self.cv.reg)?;
                profile_check(&format!("A2{at} over S^rev"), &srev.sets(), m, Some(&inst.a2[i]), &self.cv.reg)?;
                profile_check(
                    &format!("A1{at} ∩ A2{at} over S"),
                    &inst.s.sets(),
                    m,
                    Some(&inst.a1[i].intersection(&inst.a2[i])),
                    &self.cv.regpair,
                )?;
                profile_check(&format!("B2{at} over T^rev"), &trev.sets(), m, Some(&inst.b2[i]), &self.cv.reg)?;
                profile_check(&format!("B1{at} over T"), &inst.t.sets(), m, Some(&inst.b1[i]), &self.cv.reg)?;
                profile_check(
                    &format!("B2{at} ∩ B1{at} over T^rev"),
                    &trev.sets(),
                    m,
                    Some(&inst.b1[i].intersection(&inst.b2[i])),
                    &self.cv.regpair,
                )?;
            }
        }
        if inst.r_a[inst.i_star] != inst.theta || inst.r_b[inst.i_star] != inst.theta {
            return bad("copy choice at i_star differs from theta".into());
        }
        Ok(())
    }
}

/// One sampled instance. `i_star` is 0-based here and 1-based in serialized form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub variant: Variant,
    pub s: Basis,
    pub t: Basis,
    pub i_star: usize,
    pub a1: Vec<ItemSet>,
    pub a2: Vec<ItemSet>,
    pub b1: Vec<ItemSet>,
    pub b2: Vec<ItemSet>,
    pub theta: CopyIndex,
    pub r_a: Vec<CopyIndex>,
    pub r_b: Vec<CopyIndex>,
}

impl Instance {
    pub fn a(&self, j: CopyIndex) -> &[ItemSet] {
        match j {
            CopyIndex::One => &self.a1,
            CopyIndex::Two => &self.a2,
        }
    }

    pub fn b(&self, j: CopyIndex) -> &[ItemSet] {
        match j {
            CopyIndex::One => &self.b1,
            CopyIndex::Two => &self.b2,
        }
    }

    /// The `n = 1` instance built from the reference configuration.
    pub fn reference(m: usize, theta: CopyIndex) -> Result<Instance, ConstructionError> {
        let r = reference_sets(m)?;
        Ok(Instance {
            m,
            n: 1,
            seed: 0,
            variant: Variant::Nu,
            b1: vec![r.a1.complement()],
            b2: vec![r.a2.complement()],
            a1: vec![r.a1],
            a2: vec![r.a2],
            s: r.s,
            t: r.t,
            i_star: 0,
            theta,
            r_a: vec![theta],
            r_b: vec![theta],
        })
    }
}

/// Convenience wrapper building a [`Construction`] for one draw.
pub fn sample_instance(
    m: usize,
    n: usize,
    variant: Variant,
    rng: &mut RngStream,
) -> Result<Instance, ConstructionError> {
    Construction::new(m)?.sample_instance(n, variant, rng)
}

/// Intersection fractions of the generalized block construction with block sizes `u`, `v`:
/// (single-copy regular, two-copy regular cross, two-copy special cross), each as a fraction of m.
pub fn generalized_deltas(
    u: &Rational,
    v: &Rational,
) -> Result<(Rational, Rational, Rational), ConstructionError> {
    if !u.is_positive() || !v.is_positive() {
        return Err(ConstructionError::NonPositive);
    }
    let k = |x: i64| Rational::from_integer(BigInt::from(x));
    let (u2, v2) = (u * u, v * v);
    let u2v = u + &(v * k(2));
    let v2u = v + &(u * k(2));
    let single = (&v2 * v * k(2) + &u2 * v * k(2) + u * &v2 * k(3)) / (&u2v * &u2v * &u2v);
    let cross = (&u2 * v * k(5) + &u2 * u + u * &v2 * k(6) + &v2 * v * k(2))
        / (&u2v * &u2v * &v2u * k(2));
    let special = (u * v * k(16) + &u2 * k(5) + &v2 * k(6)) / (&u2v * &v2u * k(12));
    debug_assert!(!single.is_zero());
    Ok((single, cross, special))
}

fn cross_f(r: f64) -> f64 {
    (5.0 * r + 1.0 + 6.0 * r * r + 2.0 * r * r * r) / (2.0 * (1.0 + 2.0 * r).powi(2) * (2.0 + r))
}

fn special_f(r: f64) -> f64 {
    (16.0 * r + 5.0 + 6.0 * r * r) / (12.0 * (1.0 + 2.0 * r) * (2.0 + r))
}

/// The ratio `v/u` maximizing `min(cross, special)`: coarse grid, then bisection on
/// `cross - special` around the best grid point.
pub fn optimal_block_ratio() -> f64 {
    let objective = |r: f64| cross_f(r).min(special_f(r));
    let (lo, hi, steps) = (0.05, 20.0, 4000);
    let h = (hi - lo) / steps as f64;
    let best = (0..=steps)
        .map(|i| lo + h * i as f64)
        .max_by(|a, b| objective(*a).total_cmp(&objective(*b)))
        .expect("non-empty grid");
    let diff = |r: f64| cross_f(r) - special_f(r);
    let (mut a, mut b) = (best - h, best + h);
    assert!(diff(a).signum() != diff(b).signum(), "no crossing near grid optimum");
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if diff(mid).signum() == diff(a).signum() {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}
