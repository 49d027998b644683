//! Pearson χ² tests on integer-valued statistics with adjacent-bin pooling.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// Bins left after pooling.
    pub bins: usize,
}

fn finish(statistic: f64, df: usize, bins: usize) -> ChiSquareTest {
    let p_value = if df == 0 {
        1.0
    } else {
        ChiSquared::new(df as f64).expect("positive df").sf(statistic)
    };
    ChiSquareTest {
        statistic,
        df,
        p_value,
        bins,
    }
}

/// Maps each value to a bin, pooling adjacent values (in sorted order) until every bin
/// holds at least `min_total` observations; a short final run joins the previous bin.
pub fn pool_bins(totals: &BTreeMap<i64, usize>, min_total: usize) -> BTreeMap<i64, usize> {
    let mut map = BTreeMap::new();
    let mut bin = 0usize;
    let mut acc = 0;
    let mut pending = Vec::new();
    for (&v, &c) in totals {
        pending.push(v);
        acc += c;
        if acc >= min_total {
            for p in pending.drain(..) {
                map.insert(p, bin);
            }
            bin += 1;
            acc = 0;
        }
    }
    let last = bin.saturating_sub(1);
    for p in pending {
        map.insert(p, last);
    }
    map
}

fn counts(values: &[i64]) -> BTreeMap<i64, usize> {
    let mut out = BTreeMap::new();
    for &v in values {
        *out.entry(v).or_insert(0) += 1;
    }
    out
}

/// Homogeneity test of two samples (a 2 × k contingency table).
pub fn two_sample(a: &[i64], b: &[i64]) -> ChiSquareTest {
    assert!(!a.is_empty() && !b.is_empty(), "empty sample");
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let total = na + nb;
    let mut pooled = counts(a);
    for (v, c) in counts(b) {
        *pooled.entry(v).or_insert(0) += c;
    }
    // Each side's expected count in a bin is at least 5.
    let min_total = (5.0 * total / na.min(nb)).ceil() as usize;
    let bins = pool_bins(&pooled, min_total);
    let k = bins.values().max().map_or(0, |&b| b + 1);
    let mut oa = vec![0f64; k];
    let mut ob = vec![0f64; k];
    for v in a {
        oa[bins[v]] += 1.0;
    }
    for v in b {
        ob[bins[v]] += 1.0;
    }
    let mut stat = 0.0;
    for i in 0..k {
        let t = oa[i] + ob[i];
        for (o, n) in [(oa[i], na), (ob[i], nb)] {
            let e = t * n / total;
            stat += (o - e) * (o - e) / e;
        }
    }
    finish(stat, k.saturating_sub(1), k)
}

/// Goodness of fit of values in `0..k` to the uniform distribution.
pub fn uniform_fit(values: &[i64], k: usize) -> ChiSquareTest {
    assert!(!values.is_empty() && k > 0);
    let mut obs = vec![0f64; k];
    for &v in values {
        obs[v as usize] += 1.0;
    }
    let e = values.len() as f64 / k as f64;
    let stat = obs.iter().map(|o| (o - e) * (o - e) / e).sum();
    finish(stat, k - 1, k)
}

/// Independence test of paired observations (an r × c contingency table).
pub fn independence(xs: &[i64], ys: &[i64]) -> ChiSquareTest {
    assert_eq!(xs.len(), ys.len());
    assert!(!xs.is_empty());
    let n = xs.len() as f64;
    let xc = counts(xs);
    let xbins = pool_bins(&xc, 1);
    let r = xbins.len();
    // Expected cell count row_total · col_total / n ≥ 5 with the smallest row.
    let min_row = *xc.values().min().expect("non-empty") as f64;
    let ybins = pool_bins(&counts(ys), (5.0 * n / min_row).ceil() as usize);
    let c = ybins.values().max().map_or(0, |&b| b + 1);
    let mut table = vec![vec![0f64; c]; r];
    for (x, y) in xs.iter().zip(ys) {
        table[xbins[x]][ybins[y]] += 1.0;
    }
    let rows: Vec<f64> = table.iter().map(|row| row.iter().sum()).collect();
    let cols: Vec<f64> = (0..c).map(|j| table.iter().map(|row| row[j]).sum()).collect();
    let mut stat = 0.0;
    for i in 0..r {
        for j in 0..c {
            let e = rows[i] * cols[j] / n;
            stat += (table[i][j] - e) * (table[i][j] - e) / e;
        }
    }
    finish(stat, (r.saturating_sub(1)) * (c.saturating_sub(1)), r * c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_have_zero_statistic() {
        let a: Vec<i64> = (0..500).map(|i| i % 7).collect();
        let t = two_sample(&a, &a);
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.p_value, 1.0);
    }

    #[test]
    fn shifted_samples_are_rejected() {
        let a: Vec<i64> = (0..1000).map(|i| i % 10).collect();
        let b: Vec<i64> = (0..1000).map(|i| i % 10 + 3).collect();
        assert!(two_sample(&a, &b).p_value < 1e-6);
    }

    #[test]
    fn uniform_fit_hand_computed() {
        // Observed (3, 1) against expected (2, 2): statistic 1, one degree of freedom.
        let t = uniform_fit(&[0, 0, 0, 1], 2);
        assert_eq!((t.statistic, t.df), (1.0, 1));
        assert!((t.p_value - 0.317_310_507_862_914).abs() < 1e-9);
    }

    #[test]
    fn independence_detects_dependence() {
        let xs: Vec<i64> = (0..2000).map(|i| i % 4).collect();
        let dependent: Vec<i64> = xs.iter().map(|x| x * 10).collect();
        assert!(independence(&xs, &dependent).p_value < 1e-9);
        let constant = vec![5; 2000];
        let t = independence(&xs, &constant);
        assert_eq!((t.df, t.p_value), (0, 1.0));
    }

    #[test]
    fn pooling_merges_short_tail() {
        let totals: BTreeMap<i64, usize> = [(0, 12), (1, 3), (2, 4), (3, 2)].into_iter().collect();
        let bins = pool_bins(&totals, 10);
        assert_eq!(bins.values().copied().collect::<Vec<_>>(), vec![0, 0, 0, 0]);
        let totals: BTreeMap<i64, usize> = [(0, 12), (1, 13), (2, 4)].into_iter().collect();
        assert_eq!(pool_bins(&totals, 10).values().copied().collect::<Vec<_>>(), vec![0, 1, 1]);
    }
}
