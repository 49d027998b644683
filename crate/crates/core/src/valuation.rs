//! Binary-XOS valuations, welfare oracles, and recovery of the special copy.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::construction::{CopyIndex, Instance};
use crate::setcore::{ItemSet, Rational};

/// Largest universe the exhaustive oracle accepts.
pub const BRUTEFORCE_MAX_M: usize = 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValuationError {
    #[error("a valuation needs at least one clause")]
    NoClauses,
    #[error("width mismatch: expected {expected}, found {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("exhaustive search over {0} items exceeds the limit of {BRUTEFORCE_MAX_M}")]
    TooLarge(usize),
    #[error("allocation gives an item to both bidders")]
    Overlap,
    #[error("eps must lie in [0, 1/4), got {0}")]
    BadEps(f64),
}

/// `v(Z) = max over clauses C of |Z ∩ C|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BxosValuation {
    width: usize,
    clauses: Vec<ItemSet>,
}

impl BxosValuation {
    pub fn new(clauses: Vec<ItemSet>) -> Result<Self, ValuationError> {
        let width = clauses.first().ok_or(ValuationError::NoClauses)?.width();
        if let Some(c) = clauses.iter().find(|c| c.width() != width) {
            return Err(ValuationError::WidthMismatch {
                expected: width,
                found: c.width(),
            });
        }
        Ok(BxosValuation { width, clauses })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn clauses(&self) -> &[ItemSet] {
        &self.clauses
    }

    pub fn eval(&self, z: &ItemSet) -> Result<usize, ValuationError> {
        if z.width() != self.width {
            return Err(ValuationError::WidthMismatch {
                expected: self.width,
                found: z.width(),
            });
        }
        Ok(self.value(z))
    }

    /// [`eval`](Self::eval) for callers that already checked widths.
    pub(crate) fn value(&self, z: &ItemSet) -> usize {
        self.clauses
            .iter()
            .map(|c| c.intersection_count(z))
            .max()
            .unwrap_or(0)
    }

    /// Value of the full item set, i.e. the largest clause size.
    pub fn grand_value(&self) -> usize {
        self.clauses.iter().map(ItemSet::count).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    pub to_alice: ItemSet,
    pub to_bob: ItemSet,
}

impl Allocation {
    pub fn new(to_alice: ItemSet, to_bob: ItemSet) -> Result<Self, ValuationError> {
        if to_alice.width() != to_bob.width() {
            return Err(ValuationError::WidthMismatch {
                expected: to_alice.width(),
                found: to_bob.width(),
            });
        }
        if !to_alice.is_disjoint(&to_bob) {
            return Err(ValuationError::Overlap);
        }
        Ok(Allocation { to_alice, to_bob })
    }

    pub fn empty(width: usize) -> Self {
        Allocation {
            to_alice: ItemSet::empty(width),
            to_bob: ItemSet::empty(width),
        }
    }

    /// Alice gets `z`, Bob gets the rest.
    pub fn split(z: ItemSet) -> Self {
        let rest = z.complement();
        Allocation {
            to_alice: z,
            to_bob: rest,
        }
    }

    pub fn welfare(&self, va: &BxosValuation, vb: &BxosValuation) -> Result<usize, ValuationError> {
        Ok(va.eval(&self.to_alice)? + vb.eval(&self.to_bob)?)
    }
}

/// The welfare-maximizing clause pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptPair {
    pub alice_clause: usize,
    pub bob_clause: usize,
    pub value: usize,
}

fn same_width(va: &BxosValuation, vb: &BxosValuation) -> Result<(), ValuationError> {
    if va.width != vb.width {
        return Err(ValuationError::WidthMismatch {
            expected: va.width,
            found: vb.width,
        });
    }
    Ok(())
}

/// Maximizes `|F_A ∪ F_B|` over clause pairs; the first maximizer in index order wins.
///
/// For any `Z`, `|Z ∩ F_A| + |Z̄ ∩ F_B| ≤ |F_A ∪ F_B|` with equality at `Z = F_A`,
/// so this value is the optimal welfare.
pub fn opt_clause_pair(va: &BxosValuation, vb: &BxosValuation) -> Result<OptPair, ValuationError> {
    same_width(va, vb)?;
    let mut best = OptPair {
        alice_clause: 0,
        bob_clause: 0,
        value: 0,
    };
    let mut first = true;
    for (ia, fa) in va.clauses.iter().enumerate() {
        for (ib, fb) in vb.clauses.iter().enumerate() {
            let value = fa.union_count(fb);
            if first || value > best.value {
                best = OptPair {
                    alice_clause: ia,
                    bob_clause: ib,
                    value,
                };
                first = false;
            }
        }
    }
    Ok(best)
}

/// The allocation realizing [`opt_clause_pair`]: Alice receives her clause, Bob the rest.
pub fn opt_allocation(va: &BxosValuation, vb: &BxosValuation) -> Result<(OptPair, Allocation), ValuationError> {
    let opt = opt_clause_pair(va, vb)?;
    Ok((opt, Allocation::split(va.clauses[opt.alice_clause].clone())))
}

fn masks(v: &BxosValuation) -> Vec<u32> {
    v.clauses.iter().map(|c| c.to_mask() as u32).collect()
}

fn mask_value(clauses: &[u32], z: u32) -> u32 {
    clauses.iter().map(|c| (c & z).count_ones()).max().unwrap_or(0)
}

/// Exact optimal welfare by trying every `Z ⊆ M`.
pub fn opt_bruteforce(va: &BxosValuation, vb: &BxosValuation) -> Result<usize, ValuationError> {
    same_width(va, vb)?;
    let m = va.width;
    if m > BRUTEFORCE_MAX_M {
        return Err(ValuationError::TooLarge(m));
    }
    let (ca, cb) = (masks(va), masks(vb));
    let full: u32 = if m == 0 { 0 } else { u32::MAX >> (32 - m) };
    let best = (0..=full)
        .map(|z| mask_value(&ca, z) + mask_value(&cb, full & !z))
        .max()
        .unwrap_or(0);
    Ok(best as usize)
}

/// The bidders' valuations of an instance plus the auxiliary ones indexed by copy.
#[derive(Debug, Clone)]
pub struct InstanceValuations {
    pub m: usize,
    pub alice: BxosValuation,
    pub bob: BxosValuation,
    /// Index 0 holds copy 1.
    pub alice_aux: [BxosValuation; 2],
    pub bob_aux: [BxosValuation; 2],
}

impl InstanceValuations {
    pub fn alice_aux(&self, j: CopyIndex) -> &BxosValuation {
        &self.alice_aux[j.number() as usize - 1]
    }

    pub fn bob_aux(&self, j: CopyIndex) -> &BxosValuation {
        &self.bob_aux[j.number() as usize - 1]
    }
}

fn chosen(one: &[ItemSet], two: &[ItemSet], pick: &[CopyIndex]) -> Vec<ItemSet> {
    pick.iter()
        .enumerate()
        .map(|(i, j)| match j {
            CopyIndex::One => one[i].clone(),
            CopyIndex::Two => two[i].clone(),
        })
        .collect()
}

/// All clauses of both copies except the copy `3 - j` clause at `i_star`.
fn aux_family(one: &[ItemSet], two: &[ItemSet], i_star: usize, j: CopyIndex) -> Vec<ItemSet> {
    let mut out = Vec::with_capacity(2 * one.len() - 1);
    for (i, (x, y)) in one.iter().zip(two).enumerate() {
        if !(i == i_star && j == CopyIndex::Two) {
            out.push(x.clone());
        }
        if !(i == i_star && j == CopyIndex::One) {
            out.push(y.clone());
        }
    }
    out
}

pub fn build_valuations(inst: &Instance) -> InstanceValuations {
    let alice = chosen(&inst.a1, &inst.a2, &inst.r_a);
    let bob = chosen(&inst.b1, &inst.b2, &inst.r_b);
    let aux = |one: &[ItemSet], two: &[ItemSet]| {
        CopyIndex::BOTH.map(|j| {
            BxosValuation::new(aux_family(one, two, inst.i_star, j)).expect("instance clauses")
        })
    };
    InstanceValuations {
        m: inst.m,
        alice: BxosValuation::new(alice).expect("instance clauses"),
        bob: BxosValuation::new(bob).expect("instance clauses"),
        alice_aux: aux(&inst.a1, &inst.a2),
        bob_aux: aux(&inst.b1, &inst.b2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaGuess {
    Copy(CopyIndex),
    Neither,
    Ambiguous,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaRecovery {
    pub guess: ThetaGuess,
    /// `q_j = v^A_j(Z) + v^B_j(Z̄)` for copies 1 and 2.
    pub q: [usize; 2],
    /// `179m/240 + eps·m`.
    pub threshold: Rational,
}

/// `179m/240 + eps·m`, with `eps` read as the decimal it prints as.
pub fn recovery_threshold(m: usize, eps: f64) -> Result<Rational, ValuationError> {
    if !(0.0..0.25).contains(&eps) {
        return Err(ValuationError::BadEps(eps));
    }
    let m_r = Rational::from_integer(BigInt::from(m));
    let eps_r = crate::setcore::decimal_ratio(eps).ok_or(ValuationError::BadEps(eps))?;
    Ok(Rational::new(BigInt::from(179 * m), BigInt::from(240)) + eps_r * m_r)
}

impl InstanceValuations {
    /// `q_j` for both copies at allocation `Z` to Alice.
    pub fn q_values(&self, z: &ItemSet) -> [usize; 2] {
        let zc = z.complement();
        CopyIndex::BOTH.map(|j| self.alice_aux(j).value(z) + self.bob_aux(j).value(&zc))
    }

    pub fn recover_theta(&self, z: &ItemSet, eps: f64) -> Result<ThetaRecovery, ValuationError> {
        if z.width() != self.m {
            return Err(ValuationError::WidthMismatch {
                expected: self.m,
                found: z.width(),
            });
        }
        let threshold = recovery_threshold(self.m, eps)?;
        let q = self.q_values(z);
        let above = q.map(|x| Rational::from_integer(BigInt::from(x)) > threshold);
        let guess = match above {
            [true, false] => ThetaGuess::Copy(CopyIndex::One),
            [false, true] => ThetaGuess::Copy(CopyIndex::Two),
            [false, false] => ThetaGuess::Neither,
            [true, true] => ThetaGuess::Ambiguous,
        };
        Ok(ThetaRecovery { guess, q, threshold })
    }

    /// Exhaustive count of allocations `Z` with both `q_j` above the threshold (`m ≤ 24`).
    pub fn count_doubly_good(&self, eps: f64) -> Result<u64, ValuationError> {
        if self.m > BRUTEFORCE_MAX_M {
            return Err(ValuationError::TooLarge(self.m));
        }
        let threshold = recovery_threshold(self.m, eps)?;
        let full: u32 = if self.m == 0 { 0 } else { u32::MAX >> (32 - self.m) };
        let fam = |v: &BxosValuation| masks(v);
        let a = [fam(&self.alice_aux[0]), fam(&self.alice_aux[1])];
        let b = [fam(&self.bob_aux[0]), fam(&self.bob_aux[1])];
        // Integers above a rational threshold: q > t iff q >= floor(t) + 1.
        let min_q = (threshold.floor().to_integer() + 1u32).to_u32().unwrap_or(u32::MAX);
        let mut count = 0u64;
        for z in 0..=full {
            let good = (0..2).all(|j| mask_value(&a[j], z) + mask_value(&b[j], full & !z) >= min_q);
            if good {
                count += 1;
            }
        }
        Ok(count)
    }
}

pub fn recover_theta(inst: &Instance, z: &ItemSet, eps: f64) -> Result<ThetaRecovery, ValuationError> {
    build_valuations(inst).recover_theta(z, eps)
}

/// Smallest cross intersections of an instance and whether each falls below its margin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcentrationEvents {
    /// Over `i, i' ≠ i_star` and all copy pairs: `min |A^j_i ∩ B^{j'}_{i'}|`.
    pub min_regular: Option<usize>,
    /// Over `i ≠ i_star`: `min |A^j_{i_star} ∩ B^{3-j}_i|`.
    pub min_special_alice: Option<usize>,
    /// Over `i ≠ i_star`: `min |A^{3-j}_i ∩ B^j_{i_star}|`.
    pub min_special_bob: Option<usize>,
    pub e_reg: bool,
    pub e_special_alice: bool,
    pub e_special_bob: bool,
}

impl ConcentrationEvents {
    pub fn any(&self) -> bool {
        self.e_reg || self.e_special_alice || self.e_special_bob
    }
}

/// `c·m - eps·m` for the fraction `c`.
pub fn lower_margin(m: usize, c: &Rational, eps: f64) -> Result<Rational, ValuationError> {
    let eps_r = crate::setcore::decimal_ratio(eps).ok_or(ValuationError::BadEps(eps))?;
    let m_r = Rational::from_integer(BigInt::from(m));
    Ok((c - eps_r) * m_r)
}

pub fn concentration_events(inst: &Instance, eps: f64) -> Result<ConcentrationEvents, ValuationError> {
    let m = inst.m;
    let reg_cut = lower_margin(m, &Rational::new(51.into(), 200.into()), eps)?;
    let spec_cut = lower_margin(m, &Rational::new(61.into(), 240.into()), eps)?;
    let below = |x: Option<usize>, cut: &Rational| {
        x.is_some_and(|v| Rational::from_integer(BigInt::from(v)) < *cut)
    };
    let upd = |acc: &mut Option<usize>, v: usize| {
        *acc = Some(acc.map_or(v, |a| a.min(v)));
    };
    let s = inst.i_star;
    let (mut reg, mut sa, mut sb) = (None, None, None);
    for i in (0..inst.n).filter(|&i| i != s) {
        for j in CopyIndex::BOTH {
            for i2 in (0..inst.n).filter(|&i2| i2 != s) {
                for j2 in CopyIndex::BOTH {
                    upd(&mut reg, inst.a(j)[i].intersection_count(&inst.b(j2)[i2]));
                }
            }
            upd(&mut sa, inst.a(j)[s].intersection_count(&inst.b(j.other())[i]));
            upd(&mut sb, inst.a(j.other())[i].intersection_count(&inst.b(j)[s]));
        }
    }
    Ok(ConcentrationEvents {
        e_reg: below(reg, &reg_cut),
        e_special_alice: below(sa, &spec_cut),
        e_special_bob: below(sb, &spec_cut),
        min_regular: reg,
        min_special_alice: sa,
        min_special_bob: sb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{reference_sets, Construction, Variant};
    use crate::setcore::RngStream;

    fn set(m: usize, items: &[usize]) -> ItemSet {
        ItemSet::from_items(m, items.iter().copied()).unwrap()
    }

    #[test]
    fn eval_basics() {
        let f = set(6, &[0, 2, 4]);
        let v = BxosValuation::new(vec![f.clone(), set(6, &[1])]).unwrap();
        assert_eq!(v.eval(&f).unwrap(), 3);
        assert_eq!(v.eval(&ItemSet::empty(6)).unwrap(), 0);
        assert!(v.eval(&ItemSet::empty(7)).is_err());
        assert!(BxosValuation::new(vec![]).is_err());
    }

    #[test]
    fn reference_special_clause_value() {
        let r = reference_sets(16).unwrap();
        let v = BxosValuation::new(vec![r.a1.clone()]).unwrap();
        let b1 = r.a1.complement();
        assert_eq!(v.eval(&b1.complement()).unwrap(), 8);
    }

    #[test]
    fn oracles_on_tiny_inputs() {
        let one = BxosValuation::new(vec![set(1, &[0])]).unwrap();
        assert_eq!(opt_bruteforce(&one, &one).unwrap(), 1);
        assert_eq!(opt_clause_pair(&one, &one).unwrap().value, 1);
        let big = BxosValuation::new(vec![ItemSet::empty(25)]).unwrap();
        assert_eq!(opt_bruteforce(&big, &big), Err(ValuationError::TooLarge(25)));
    }

    #[test]
    fn ties_break_to_first_pair() {
        let m = 4;
        let va = BxosValuation::new(vec![set(m, &[0, 1]), set(m, &[2, 3])]).unwrap();
        let vb = BxosValuation::new(vec![set(m, &[2, 3]), set(m, &[0, 1])]).unwrap();
        let opt = opt_clause_pair(&va, &vb).unwrap();
        assert_eq!((opt.alice_clause, opt.bob_clause, opt.value), (0, 0, 4));
    }

    #[test]
    fn allocation_rejects_overlap() {
        assert_eq!(
            Allocation::new(set(3, &[0, 1]), set(3, &[1])),
            Err(ValuationError::Overlap)
        );
    }

    #[test]
    fn auxiliary_families_have_expected_shape() {
        let c = Construction::new(32).unwrap();
        let mut rng = RngStream::new(5, 0);
        let inst = c.sample_instance(5, Variant::Nu, &mut rng).unwrap();
        let vals = build_valuations(&inst);
        assert_eq!(vals.alice.clauses().len(), 5);
        for j in CopyIndex::BOTH {
            assert_eq!(vals.alice_aux(j).clauses().len(), 9);
            assert_eq!(vals.bob_aux(j).clauses().len(), 9);
        }
        let th = vals.alice_aux(inst.theta);
        for f in vals.alice.clauses() {
            assert!(th.clauses().contains(f));
        }
        assert!(!vals.alice_aux(inst.theta).clauses().contains(&inst.a(inst.theta.other())[inst.i_star]));
    }

    #[test]
    fn theta_recovery_edge_cases() {
        let inst = crate::construction::Instance::reference(16, CopyIndex::Two).unwrap();
        let r = recover_theta(&inst, &ItemSet::empty(16), 0.0).unwrap();
        assert_eq!(r.guess, ThetaGuess::Neither);
        let z = inst.a2[0].clone();
        let r = recover_theta(&inst, &z, 0.0).unwrap();
        assert_eq!(r.q[1], 16);
        assert_eq!(r.guess, ThetaGuess::Copy(CopyIndex::Two));
        assert!(recover_theta(&inst, &z, 0.3).is_err());
    }

    #[test]
    fn threshold_is_exact() {
        let t = recovery_threshold(240, 0.0).unwrap();
        assert_eq!(t, Rational::from_integer(179.into()));
        let t = recovery_threshold(16, 0.25 / 2.0).unwrap();
        assert_eq!(t, Rational::new(179.into(), 15.into()) + Rational::from_integer(2.into()));
    }
}
