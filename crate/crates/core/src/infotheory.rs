//! Exact finitely-supported joint distributions and the standard information measures.
//!
//! Probabilities are stored exactly as integer weights over a common total; entropies
//! and divergences are returned in bits.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::setcore::{Rational, RngStream};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InfoError {
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("variable {0:?} appears in more than one group")]
    Overlap(String),
    #[error("tuple of length {found} for {expected} variables")]
    Arity { expected: usize, found: usize },
    #[error("distribution has zero total weight")]
    Empty,
    #[error("distributions are over different variables")]
    VariableMismatch,
    #[error("duplicate variable name {0:?}")]
    DuplicateName(String),
}

/// A probability table over named discrete variables with values in `u32`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointDistribution {
    names: Vec<String>,
    weights: BTreeMap<Vec<u32>, u64>,
    total: u64,
}

impl JointDistribution {
    /// Builds a table from weighted tuples; weights are normalized by their sum and
    /// repeated tuples are merged.
    pub fn new<S: AsRef<str>>(names: &[S], entries: Vec<(Vec<u32>, u64)>) -> Result<Self, InfoError> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        let mut seen = BTreeSet::new();
        for n in &names {
            if !seen.insert(n) {
                return Err(InfoError::DuplicateName(n.clone()));
            }
        }
        let mut weights = BTreeMap::new();
        let mut total = 0u64;
        for (tuple, w) in entries {
            if tuple.len() != names.len() {
                return Err(InfoError::Arity {
                    expected: names.len(),
                    found: tuple.len(),
                });
            }
            if w > 0 {
                *weights.entry(tuple).or_insert(0) += w;
                total += w;
            }
        }
        if total == 0 {
            return Err(InfoError::Empty);
        }
        Ok(JointDistribution { names, weights, total })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Tuples with positive probability, in lexicographic order.
    pub fn support(&self) -> impl Iterator<Item = (&Vec<u32>, Rational)> + '_ {
        self.weights
            .iter()
            .map(|(t, &w)| (t, Rational::new(BigInt::from(w), BigInt::from(self.total))))
    }

    pub fn probability(&self, tuple: &[u32]) -> Rational {
        let w = self.weights.get(tuple).copied().unwrap_or(0);
        Rational::new(BigInt::from(w), BigInt::from(self.total))
    }

    fn index_of(&self, name: &str) -> Result<usize, InfoError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| InfoError::UnknownVariable(name.to_string()))
    }

    fn indices(&self, vars: &[&str]) -> Result<Vec<usize>, InfoError> {
        vars.iter().map(|v| self.index_of(v)).collect()
    }

    fn marginal_weights(&self, idx: &[usize]) -> BTreeMap<Vec<u32>, u64> {
        let mut out = BTreeMap::new();
        for (t, &w) in &self.weights {
            let key: Vec<u32> = idx.iter().map(|&i| t[i]).collect();
            *out.entry(key).or_insert(0) += w;
        }
        out
    }

    pub fn marginal(&self, vars: &[&str]) -> Result<JointDistribution, InfoError> {
        let idx = self.indices(vars)?;
        Ok(JointDistribution {
            names: vars.iter().map(|s| s.to_string()).collect(),
            weights: self.marginal_weights(&idx),
            total: self.total,
        })
    }

    /// The conditional table given `vars = values`, or `None` if that event has probability 0.
    pub fn condition(&self, vars: &[&str], values: &[u32]) -> Result<Option<JointDistribution>, InfoError> {
        let idx = self.indices(vars)?;
        if values.len() != idx.len() {
            return Err(InfoError::Arity {
                expected: idx.len(),
                found: values.len(),
            });
        }
        let weights: BTreeMap<Vec<u32>, u64> = self
            .weights
            .iter()
            .filter(|(t, _)| idx.iter().zip(values).all(|(&i, &v)| t[i] == v))
            .map(|(t, &w)| (t.clone(), w))
            .collect();
        let total: u64 = weights.values().sum();
        if total == 0 {
            return Ok(None);
        }
        Ok(Some(JointDistribution {
            names: self.names.clone(),
            weights,
            total,
        }))
    }

    /// Appends a variable computed from existing ones.
    pub fn derive(
        &self,
        name: &str,
        inputs: &[&str],
        f: impl Fn(&[u32]) -> u32,
    ) -> Result<JointDistribution, InfoError> {
        if self.names.iter().any(|n| n == name) {
            return Err(InfoError::DuplicateName(name.to_string()));
        }
        let idx = self.indices(inputs)?;
        let mut names = self.names.clone();
        names.push(name.to_string());
        let weights = self
            .weights
            .iter()
            .map(|(t, &w)| {
                let args: Vec<u32> = idx.iter().map(|&i| t[i]).collect();
                let mut t2 = t.clone();
                t2.push(f(&args));
                (t2, w)
            })
            .collect();
        Ok(JointDistribution {
            names,
            weights,
            total: self.total,
        })
    }

    /// `H(vars)` in bits.
    pub fn entropy(&self, vars: &[&str]) -> Result<f64, InfoError> {
        let idx = self.indices(vars)?;
        Ok(entropy_of(self.marginal_weights(&idx).values().copied(), self.total))
    }

    /// `H(x | given)` in bits.
    pub fn cond_entropy(&self, x: &[&str], given: &[&str]) -> Result<f64, InfoError> {
        let both: Vec<&str> = x.iter().chain(given).copied().collect();
        Ok(self.entropy(&both)? - self.entropy(given)?)
    }

    fn check_disjoint(&self, groups: &[&[&str]]) -> Result<(), InfoError> {
        let mut seen = BTreeSet::new();
        for g in groups {
            for v in g.iter() {
                self.index_of(v)?;
                if !seen.insert(*v) {
                    return Err(InfoError::Overlap(v.to_string()));
                }
            }
        }
        Ok(())
    }

    /// `I(x; y | given) = H(x | given) - H(x | y, given)` in bits.
    pub fn mutual_info(&self, x: &[&str], y: &[&str], given: &[&str]) -> Result<f64, InfoError> {
        self.check_disjoint(&[x, y, given])?;
        let xz: Vec<&str> = x.iter().chain(given).copied().collect();
        let yz: Vec<&str> = y.iter().chain(given).copied().collect();
        let xyz: Vec<&str> = x.iter().chain(y).chain(given).copied().collect();
        Ok(self.entropy(&xz)? + self.entropy(&yz)? - self.entropy(&xyz)? - self.entropy(given)?)
    }

    /// The same quantity as [`mutual_info`](Self::mutual_info), computed as the expected
    /// divergence of `dist(x | y, z)` from `dist(x | z)`.
    pub fn mutual_info_kl(&self, x: &[&str], y: &[&str], given: &[&str]) -> Result<f64, InfoError> {
        self.check_disjoint(&[x, y, given])?;
        let xi = self.indices(x)?;
        let yi = self.indices(y)?;
        let zi = self.indices(given)?;
        let key = |t: &Vec<u32>, idx: &[usize]| -> Vec<u32> { idx.iter().map(|&i| t[i]).collect() };
        let mut w_xyz: BTreeMap<(Vec<u32>, Vec<u32>, Vec<u32>), u64> = BTreeMap::new();
        let mut w_yz: BTreeMap<(Vec<u32>, Vec<u32>), u64> = BTreeMap::new();
        let mut w_xz: BTreeMap<(Vec<u32>, Vec<u32>), u64> = BTreeMap::new();
        let mut w_z: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
        for (t, &w) in &self.weights {
            let (kx, ky, kz) = (key(t, &xi), key(t, &yi), key(t, &zi));
            *w_xyz.entry((kx.clone(), ky.clone(), kz.clone())).or_insert(0) += w;
            *w_yz.entry((ky, kz.clone())).or_insert(0) += w;
            *w_xz.entry((kx, kz.clone())).or_insert(0) += w;
            *w_z.entry(kz).or_insert(0) += w;
        }
        // Sum over (y, z) of p(y, z) KL(dist(X | y, z) || dist(X | z)), expanded per tuple.
        let total = self.total as f64;
        let mut acc = 0.0;
        for ((xk, yk, zk), &wxyz) in &w_xyz {
            let p_given_yz = wxyz as f64 / w_yz[&(yk.clone(), zk.clone())] as f64;
            let p_given_z = w_xz[&(xk.clone(), zk.clone())] as f64 / w_z[zk] as f64;
            acc += (wxyz as f64 / total) * (p_given_yz / p_given_z).log2();
        }
        Ok(acc)
    }
}

fn entropy_of(weights: impl Iterator<Item = u64>, total: u64) -> f64 {
    let t = total as f64;
    weights
        .filter(|&w| w > 0)
        .map(|w| {
            let p = w as f64 / t;
            -p * p.log2()
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Kl {
    Finite(f64),
    Infinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Divergences {
    /// `KL(p ‖ q)` in bits.
    pub kl: Kl,
    /// Total variation distance, exact.
    pub tvd: Rational,
}

fn same_vars(p: &JointDistribution, q: &JointDistribution) -> Result<(), InfoError> {
    if p.names != q.names {
        return Err(InfoError::VariableMismatch);
    }
    Ok(())
}

pub fn divergences(p: &JointDistribution, q: &JointDistribution) -> Result<Divergences, InfoError> {
    same_vars(p, q)?;
    let mut kl = 0.0;
    let mut infinite = false;
    for (t, &wp) in &p.weights {
        match q.weights.get(t) {
            None => infinite = true,
            Some(&wq) => {
                let a = wp as f64 / p.total as f64;
                let b = wq as f64 / q.total as f64;
                kl += a * (a / b).log2();
            }
        }
    }
    let keys: BTreeSet<&Vec<u32>> = p.weights.keys().chain(q.weights.keys()).collect();
    let mut l1 = Rational::from_integer(BigInt::from(0));
    for t in keys {
        let d = p.probability(t) - q.probability(t);
        l1 += if d < Rational::from_integer(BigInt::from(0)) { -d } else { d };
    }
    Ok(Divergences {
        kl: if infinite { Kl::Infinite } else { Kl::Finite(kl) },
        tvd: l1 / Rational::from_integer(BigInt::from(2)),
    })
}

/// Total variation as the largest probability gap over all events (joint supports of
/// at most 20 tuples).
pub fn tvd_by_events(p: &JointDistribution, q: &JointDistribution) -> Result<Rational, InfoError> {
    same_vars(p, q)?;
    let keys: Vec<&Vec<u32>> = p
        .weights
        .keys()
        .chain(q.weights.keys())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    assert!(keys.len() <= 20, "event enumeration over {} outcomes", keys.len());
    let gaps: Vec<Rational> = keys.iter().map(|t| p.probability(t) - q.probability(t)).collect();
    let mut best = Rational::from_integer(BigInt::from(0));
    for mask in 0u32..(1 << keys.len()) {
        let mut s = Rational::from_integer(BigInt::from(0));
        for (i, g) in gaps.iter().enumerate() {
            if (mask >> i) & 1 == 1 {
                s += g;
            }
        }
        if s > best {
            best = s;
        }
    }
    Ok(best)
}

/// Tolerance for every identity check.
pub const IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Largest violation seen (residual for equalities, excess for inequalities).
    pub worst: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub trials: usize,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.failures == 0)
    }
}

#[derive(Default)]
struct Tally {
    order: Vec<String>,
    by_name: BTreeMap<String, IdentityCheck>,
}

impl Tally {
    /// Records `violation`, which passes when at most the tolerance.
    fn record(&mut self, name: &str, violation: f64) {
        if !self.by_name.contains_key(name) {
            self.order.push(name.to_string());
        }
        let c = self.by_name.entry(name.to_string()).or_insert_with(|| IdentityCheck {
            name: name.to_string(),
            cases: 0,
            failures: 0,
            worst: 0.0,
        });
        c.cases += 1;
        if !(violation <= IDENTITY_TOL) {
            c.failures += 1;
        }
        if violation > c.worst || violation.is_nan() {
            c.worst = violation;
        }
    }

    fn equal(&mut self, name: &str, a: f64, b: f64) {
        self.record(name, (a - b).abs());
    }

    fn at_most(&mut self, name: &str, lhs: f64, rhs: f64) {
        self.record(name, lhs - rhs);
    }

    fn finish(mut self, trials: usize) -> IdentityReport {
        let checks = self.order.iter().map(|n| self.by_name.remove(n).unwrap()).collect();
        IdentityReport { trials, checks }
    }
}

/// A random table over variables with the given support sizes; each tuple gets an
/// independent uniform weight in `min_weight..=1000`.
pub fn random_joint(names: &[&str], sizes: &[u32], min_weight: u64, rng: &mut RngStream) -> JointDistribution {
    let mut entries = Vec::new();
    let count: u32 = sizes.iter().product();
    for mut code in 0..count {
        let mut t = Vec::with_capacity(sizes.len());
        for &s in sizes.iter().rev() {
            t.push(code % s);
            code /= s;
        }
        t.reverse();
        entries.push((t, rng.random_range(min_weight..=1000)));
    }
    if entries.iter().all(|e| e.1 == 0) {
        entries[0].1 = 1;
    }
    JointDistribution::new(names, entries).expect("non-empty table")
}

/// True iff `x` and `y` are independent given `z`, decided exactly.
pub fn conditionally_independent(d: &JointDistribution, x: &str, y: &str, z: &str) -> Result<bool, InfoError> {
    let (xi, yi, zi) = (d.index_of(x)?, d.index_of(y)?, d.index_of(z)?);
    let xyz = d.marginal_weights(&[xi, yi, zi]);
    let xz = d.marginal_weights(&[xi, zi]);
    let yz = d.marginal_weights(&[yi, zi]);
    let zz = d.marginal_weights(&[zi]);
    for (kxz, &wxz) in &xz {
        for (kyz, &wyz) in &yz {
            if kxz[1] != kyz[1] {
                continue;
            }
            let wz = zz[&vec![kxz[1]]];
            let wxyz = xyz.get(&vec![kxz[0], kyz[0], kxz[1]]).copied().unwrap_or(0);
            if u128::from(wxyz) * u128::from(wz) != u128::from(wxz) * u128::from(wyz) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Builds the joint of `(X_1..X_n, Y, I, F, X_I)` with i.i.d. binary `X_i`, independent
/// `Y`, uniform `I`, and `F = f(X, Y)` for the given table of `f`.
pub fn index_construction(
    n: usize,
    x_weights: [u64; 2],
    y_weights: &[u64],
    f_table: &[u32],
) -> JointDistribution {
    let ny = y_weights.len();
    assert_eq!(f_table.len(), (1 << n) * ny);
    let mut names: Vec<String> = (1..=n).map(|i| format!("X{i}")).collect();
    names.extend(["Y", "I", "F", "XI"].map(String::from));
    let mut entries = Vec::new();
    for xs in 0u32..(1 << n) {
        let xw: u64 = (0..n).map(|i| x_weights[((xs >> i) & 1) as usize]).product();
        for (y, &yw) in y_weights.iter().enumerate() {
            let f = f_table[xs as usize * ny + y];
            for i in 0..n {
                let mut t: Vec<u32> = (0..n).map(|k| (xs >> k) & 1).collect();
                t.extend([y as u32, i as u32, f, (xs >> i) & 1]);
                entries.push((t, xw * yw));
            }
        }
    }
    JointDistribution::new(&names, entries).expect("positive weights")
}

pub fn verify_identities(trials: usize, rng: &mut RngStream) -> IdentityReport {
    let mut tally = Tally::default();
    let names = ["W", "X", "Y", "Z"];
    for trial in 0..trials.max(1) {
        let sizes: Vec<u32> = (0..4).map(|_| rng.random_range(2..=4)).collect();
        // Every third table is sparse so zero-probability conventions get exercised.
        let min_w = if trial % 3 == 0 { 0 } else { 1 };
        let d = random_joint(&names, &sizes, min_w, rng);
        let i = |a: &[&str], b: &[&str], c: &[&str]| d.mutual_info(a, b, c).expect("valid groups");

        tally.equal(
            "chain rule",
            i(&["W", "X"], &["Y"], &["Z"]),
            i(&["W"], &["Y"], &["Z"]) + i(&["X"], &["Y"], &["W", "Z"]),
        );

        let ysize = sizes[2];
        let fmap: Vec<u32> = (0..ysize).map(|_| rng.random_range(0..ysize)).collect();
        let df = d.derive("FY", &["Y"], |v| fmap[v[0] as usize]).expect("fresh name");
        tally.at_most(
            "data processing",
            df.mutual_info(&["X"], &["FY"], &["Z"]).unwrap(),
            i(&["X"], &["Y"], &["Z"]),
        );

        tally.equal(
            "mutual information as expected divergence",
            i(&["X"], &["Y"], &["Z"]),
            d.mutual_info_kl(&["X"], &["Y"], &["Z"]).unwrap(),
        );

        let q = random_joint(&names, &sizes, 1, rng);
        let dv = divergences(&d, &q).expect("same variables");
        if let Kl::Finite(kl_bits) = dv.kl {
            let tvd = rational_to_f64(&dv.tvd);
            tally.at_most("pinsker", tvd, (kl_bits * std::f64::consts::LN_2 / 2.0).sqrt());
        }

        let lhs = i(&["W"], &["X"], &["Y", "Z"]).max(i(&["Y"], &["X"], &["Z"]));
        tally.at_most(
            "two-term mutual information bound",
            lhs,
            i(&["W"], &["X"], &["Z"]) + i(&["Y"], &["X"], &["W", "Z"]),
        );

        for (v, &s) in names.iter().zip(&sizes) {
            let h = d.entropy(&[v]).unwrap();
            tally.at_most("entropy lower bound", -h, 0.0);
            tally.at_most("entropy upper bound", h, (s as f64).log2());
        }

        let ixy = i(&["X"], &["Y"], &["Z"]);
        tally.at_most("mutual information non-negative", -ixy, 0.0);
        tally.at_most("mutual information at most entropy", ixy, d.entropy(&["X"]).unwrap());
        tally.equal("mutual information symmetric", ixy, i(&["Y"], &["X"], &["Z"]));
        let indep = conditionally_independent(&d, "X", "Y", "Z").unwrap();
        tally.record(
            "zero mutual information iff conditional independence",
            if indep == (ixy.abs() <= 1e-12) { 0.0 } else { 1.0 },
        );

        let prod = independent_given(&d, "X", "Y", "Z");
        let ip = prod.mutual_info(&["X"], &["Y"], &["Z"]).unwrap();
        tally.equal("independent pair has zero mutual information", ip, 0.0);
        tally.record(
            "independent pair detected exactly",
            if conditionally_independent(&prod, "X", "Y", "Z").unwrap() { 0.0 } else { 1.0 },
        );

        let n = 2 + trial % 2;
        let ny = rng.random_range(1..=3usize);
        let xw = [rng.random_range(1..=20u64), rng.random_range(1..=20u64)];
        let yw: Vec<u64> = (0..ny).map(|_| rng.random_range(1..=20u64)).collect();
        let frange = rng.random_range(2..=4u32);
        let table: Vec<u32> = (0..(1usize << n) * ny).map(|_| rng.random_range(0..frange)).collect();
        let (lhs, rhs) = index_sides(n, xw, &yw, &table);
        tally.at_most("uniform index bound", lhs, rhs);
    }
    tally.finish(trials.max(1))
}

/// `(I(X_I; F | Y, I), I(X; F | Y) / n)` for [`index_construction`].
pub fn index_sides(n: usize, xw: [u64; 2], yw: &[u64], table: &[u32]) -> (f64, f64) {
    let d = index_construction(n, xw, yw, table);
    let xs: Vec<String> = (1..=n).map(|i| format!("X{i}")).collect();
    let xs: Vec<&str> = xs.iter().map(String::as_str).collect();
    let lhs = d.mutual_info(&["XI"], &["F"], &["Y", "I"]).unwrap();
    let rhs = d.mutual_info(&xs, &["F"], &["Y"]).unwrap() / n as f64;
    (lhs, rhs)
}

/// A table over `(X, Y, Z)` proportional to `p(x,z) p(y,z)`: same conditionals of `x`
/// and `y` given `z` as `d`, but independent given `z`.
fn independent_given(d: &JointDistribution, x: &str, y: &str, z: &str) -> JointDistribution {
    let xz = d.marginal(&[x, z]).unwrap();
    let yz = d.marginal(&[y, z]).unwrap();
    let mut entries = Vec::new();
    for (kxz, &wxz) in &xz.weights {
        for (kyz, &wyz) in &yz.weights {
            if kxz[1] != kyz[1] {
                continue;
            }
            entries.push((vec![kxz[0], kyz[0], kxz[1]], wxz * wyz));
        }
    }
    JointDistribution::new(&["X", "Y", "Z"], entries).expect("positive weights")
}

fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}
