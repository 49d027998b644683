//! Independent reference computations shared by the integration tests. Nothing here
//! calls the library's profile, expectation or welfare code.
#![allow(dead_code)]

use bxos_core::construction::{Basis, Instance};
use bxos_core::setcore::{ItemSet, Rational};
use num_bigint::BigInt;

/// Printed profile vectors, in units of m/16.
pub const BASIS: [usize; 4] = [5, 3, 3, 5];
pub const CMP: [usize; 16] = [4, 1, 0, 0, 0, 1, 2, 0, 1, 0, 1, 1, 0, 1, 0, 4];
pub const REG: [usize; 4] = [2, 1, 2, 3];
pub const REGPAIR: [usize; 4] = [0, 0, 1, 1];
pub const SPEC1: [usize; 16] = [2, 0, 0, 0, 0, 1, 0, 0, 1, 0, 1, 0, 0, 1, 0, 2];
pub const SPEC2: [usize; 16] = [2, 0, 0, 0, 0, 0, 2, 0, 1, 0, 0, 0, 0, 1, 0, 2];

pub fn scaled<const K: usize>(v: &[usize; K], m: usize) -> Vec<usize> {
    v.iter().map(|x| x * m / 16).collect()
}

/// Cell of item `z`: membership bits with the first set most significant.
pub fn cell_of(sets: &[&ItemSet], z: usize) -> usize {
    sets.iter().fold(0, |acc, s| (acc << 1) | usize::from(s.contains(z)))
}

/// Item-by-item profile of `mask` (or the whole universe) over `sets`.
pub fn profile(sets: &[&ItemSet], m: usize, mask: Option<&ItemSet>) -> Vec<usize> {
    let mut out = vec![0; 1 << sets.len()];
    for z in 0..m {
        if mask.is_none_or(|u| u.contains(z)) {
            out[cell_of(sets, z)] += 1;
        }
    }
    out
}

/// `E|U ∩ U'|` for independent uniform draws, summed item by item:
/// `Pr(z ∈ U) = counts[cell(z)] / |cell(z)|`.
pub fn expected_by_items(
    sets: &[&ItemSet],
    counts: &[usize],
    sets2: &[&ItemSet],
    counts2: &[usize],
    m: usize,
) -> Rational {
    let sizes = profile(sets, m, None);
    let sizes2 = profile(sets2, m, None);
    let mut total = Rational::from_integer(BigInt::from(0));
    for z in 0..m {
        let (c, c2) = (cell_of(sets, z), cell_of(sets2, z));
        total += Rational::new(
            BigInt::from(counts[c] * counts2[c2]),
            BigInt::from(sizes[c] * sizes2[c2]),
        );
    }
    total
}

pub fn mask_of(s: &ItemSet) -> u32 {
    s.iter().fold(0u32, |acc, z| acc | (1 << z))
}

/// Brute-force welfare over every allocation `Z` to Alice (`m ≤ 20`).
pub fn brute_opt(alice: &[ItemSet], bob: &[ItemSet], m: usize) -> u32 {
    let full = (1u32 << m) - 1;
    let a: Vec<u32> = alice.iter().map(mask_of).collect();
    let b: Vec<u32> = bob.iter().map(mask_of).collect();
    (0..=full)
        .map(|z| {
            let va = a.iter().map(|c| (z & c).count_ones()).max().unwrap_or(0);
            let vb = b.iter().map(|c| (!z & full & c).count_ones()).max().unwrap_or(0);
            va + vb
        })
        .max()
        .unwrap()
}

pub fn alice_clauses(inst: &Instance) -> Vec<ItemSet> {
    inst.a1.iter().chain(&inst.a2).cloned().collect()
}

pub fn bob_clauses(inst: &Instance) -> Vec<ItemSet> {
    inst.b1.iter().chain(&inst.b2).cloned().collect()
}

/// `q_j(Z)` from the definition: Alice's clauses without `A^{3-j}_{i*}`, Bob's without
/// `B^{3-j}_{i*}`; `j` is 1 or 2.
pub fn q_value(inst: &Instance, z: &ItemSet, j: u8) -> usize {
    let s = inst.i_star;
    let (skip_a, skip_b) = if j == 1 { (&inst.a2[s], &inst.b2[s]) } else { (&inst.a1[s], &inst.b1[s]) };
    let zc = ItemSet::from_items(inst.m, (0..inst.m).filter(|&x| !z.contains(x))).unwrap();
    let count = |a: &ItemSet, b: &ItemSet| a.iter().filter(|&x| b.contains(x)).count();
    // Remove exactly one occurrence of the skipped clause from each family.
    let family = |all: Vec<ItemSet>, skip: &ItemSet| {
        let mut all = all;
        let pos = all.iter().position(|c| c == skip).expect("skipped clause present");
        all.remove(pos);
        all
    };
    let fa = family(alice_clauses(inst), skip_a);
    let fb = family(bob_clauses(inst), skip_b);
    fa.iter().map(|c| count(c, z)).max().unwrap() + fb.iter().map(|c| count(c, &zc)).max().unwrap()
}

/// The reference configuration at m = 16, as printed.
pub fn reference_16() -> (Basis, Basis, ItemSet, ItemSet) {
    let set = |v: &[usize]| ItemSet::from_items(16, v.iter().copied()).unwrap();
    (
        Basis::new(set(&[0, 1, 2, 6, 8, 9, 10, 11]), set(&[3, 4, 5, 6, 8, 9, 10, 11])),
        Basis::new(set(&[1, 2, 3, 4, 8, 9, 10, 11]), set(&[1, 5, 6, 7, 8, 9, 10, 11])),
        set(&[0, 2, 5, 6, 8, 9, 14, 15]),
        set(&[0, 3, 4, 6, 10, 11, 12, 13]),
    )
}

/// Binomial coefficient as f64 (small arguments).
pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
