//! Clustering-agreement scores: adjusted Rand index and adjusted mutual
//! information.
//!
//! Both scores adjust a raw agreement statistic for chance under the
//! permutation model (fixed marginals) and normalize so that identical
//! partitions score 1 and independent ones score about 0. The expected
//! mutual information is computed with exact log-space hypergeometric
//! terms rather than sampling, so scores are deterministic.
//!
//! Outlier labels (`-1`) count as one ordinary cluster of their own; a
//! caller that wants outliers excluded can filter points before scoring.

use crate::assign::HardAssignment;
use crate::error::{Error, Result};

/// Joint label counts between two assignments over the same points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    /// `counts[u][v]` = points with u-th distinct a-label and v-th
    /// distinct b-label (distinct labels ordered by first appearance).
    pub counts: Vec<Vec<u64>>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub n: u64,
}

/// Count joint label occurrences of `a` and `b`.
pub fn contingency(a: &HardAssignment, b: &HardAssignment) -> Result<ContingencyTable> {
    if a.n() != b.n() {
        return Err(Error::LengthMismatch {
            expected: a.n(),
            got: b.n(),
        });
    }
    let index_of = |labels: &[i64]| {
        let mut order: Vec<i64> = Vec::new();
        let mut idx = Vec::with_capacity(labels.len());
        for &l in labels {
            let pos = order.iter().position(|&o| o == l).unwrap_or_else(|| {
                order.push(l);
                order.len() - 1
            });
            idx.push(pos);
        }
        (idx, order.len())
    };
    let (rows, r) = index_of(a.labels());
    let (cols, s) = index_of(b.labels());
    let mut counts = vec![vec![0u64; s]; r];
    for (&u, &v) in rows.iter().zip(&cols) {
        counts[u][v] += 1;
    }
    let row_sums: Vec<u64> = counts.iter().map(|row| row.iter().sum()).collect();
    let col_sums: Vec<u64> = (0..s).map(|v| counts.iter().map(|row| row[v]).sum()).collect();
    Ok(ContingencyTable {
        counts,
        row_sums,
        col_sums,
        n: a.n() as u64,
    })
}

fn comb2(x: u64) -> f64 {
    (x as f64) * (x as f64 - 1.0) / 2.0
}

/// True when the two assignments induce the same partition (labels may
/// differ, outlier status may not).
pub fn partitions_equal(a: &HardAssignment, b: &HardAssignment) -> bool {
    a.canonicalize() == b.canonicalize()
}

/// Adjusted Rand index of two assignments.
///
/// When the pair-counting adjustment degenerates (maximum equals expected,
/// as for two all-singleton partitions), returns 1 if the partitions are
/// identical and 0 otherwise.
pub fn ari(a: &HardAssignment, b: &HardAssignment) -> Result<f64> {
    let table = contingency(a, b)?;
    if table.n < 2 {
        return Err(Error::invalid("scores need at least 2 points"));
    }
    let index: f64 = table
        .counts
        .iter()
        .flatten()
        .map(|&c| comb2(c))
        .sum();
    let a_pairs: f64 = table.row_sums.iter().map(|&c| comb2(c)).sum();
    let b_pairs: f64 = table.col_sums.iter().map(|&c| comb2(c)).sum();
    let expected = a_pairs * b_pairs / comb2(table.n);
    let max = 0.5 * (a_pairs + b_pairs);
    if (max - expected).abs() < 1e-12 {
        return Ok(if partitions_equal(a, b) { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max - expected))
}

/// Adjusted mutual information of two assignments, normalized by
/// `max(H(a), H(b))`.
///
/// Degenerate normalization (both entropies equal the expected MI) follows
/// the same identical-partitions rule as [`ari`].
pub fn ami(a: &HardAssignment, b: &HardAssignment) -> Result<f64> {
    let table = contingency(a, b)?;
    if table.n < 2 {
        return Err(Error::invalid("scores need at least 2 points"));
    }
    let n = table.n as f64;
    let mut mi = 0.0;
    for (u, row) in table.counts.iter().enumerate() {
        for (v, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += (c / n)
                    * ((n * c) / (table.row_sums[u] as f64 * table.col_sums[v] as f64)).ln();
            }
        }
    }
    let entropy = |sums: &[u64]| -> f64 {
        -sums
            .iter()
            .filter(|&&s| s > 0)
            .map(|&s| {
                let p = s as f64 / n;
                p * p.ln()
            })
            .sum::<f64>()
    };
    let h_a = entropy(&table.row_sums);
    let h_b = entropy(&table.col_sums);
    let emi = expected_mi(&table);
    let denom = h_a.max(h_b) - emi;
    if denom.abs() < 1e-12 {
        return Ok(if partitions_equal(a, b) { 1.0 } else { 0.0 });
    }
    Ok((mi - emi) / denom)
}

/// Expected mutual information under the permutation model with the
/// table's marginals, summed exactly over the hypergeometric support in
/// log space.
fn expected_mi(table: &ContingencyTable) -> f64 {
    let n = table.n;
    let nf = n as f64;
    // ln_fact[i] = ln(i!), accumulated once per call.
    let mut ln_fact = vec![0.0; n as usize + 1];
    for i in 1..=n as usize {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let lf = |x: u64| ln_fact[x as usize];
    let mut emi = 0.0;
    for &au in &table.row_sums {
        for &bv in &table.col_sums {
            let start = if au + bv > n { au + bv - n } else { 1 };
            let end = au.min(bv);
            for m in start..=end {
                let mf = m as f64;
                let ln_w = lf(au) + lf(bv) + lf(n - au) + lf(n - bv)
                    - lf(n)
                    - lf(m)
                    - lf(au - m)
                    - lf(bv - m)
                    - lf(n + m - au - bv);
                emi += (mf / nf) * ((nf * mf) / (au as f64 * bv as f64)).ln() * ln_w.exp();
            }
        }
    }
    emi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_stream;

    fn assign(labels: &[i64]) -> HardAssignment {
        HardAssignment::new(labels.to_vec()).unwrap()
    }

    fn random_assign(n: usize, k: usize, rng: &mut crate::rng::RngStream) -> HardAssignment {
        assign(&(0..n).map(|_| rng.index(k) as i64).collect::<Vec<_>>())
    }

    #[test]
    fn contingency_of_identical_assignments_is_diagonal() {
        let a = assign(&[0, 0, 1, 1, 2]);
        let t = contingency(&a, &a).unwrap();
        for (u, row) in t.counts.iter().enumerate() {
            for (v, &c) in row.iter().enumerate() {
                assert_eq!(c > 0, u == v);
            }
        }
    }

    #[test]
    fn contingency_one_cluster_vs_singletons() {
        let a = assign(&[0, 0, 0, 0]);
        let b = assign(&[0, 1, 2, 3]);
        let t = contingency(&a, &b).unwrap();
        assert_eq!(t.counts, vec![vec![1, 1, 1, 1]]);
    }

    #[test]
    fn contingency_row_sums_are_cluster_sizes() {
        let mut rng = rng_stream(1);
        let a = random_assign(50, 4, &mut rng);
        let b = random_assign(50, 3, &mut rng);
        let t = contingency(&a, &b).unwrap();
        let total: u64 = t.counts.iter().flatten().sum();
        assert_eq!(total, 50);
        // Recount sizes directly; distinct labels appear in first-seen order.
        let mut seen = Vec::new();
        for &l in a.labels() {
            if !seen.contains(&l) {
                seen.push(l);
            }
        }
        for (u, &label) in seen.iter().enumerate() {
            let size = a.labels().iter().filter(|&&l| l == label).count() as u64;
            assert_eq!(t.row_sums[u], size);
        }
    }

    #[test]
    fn ari_identical_is_one() {
        let a = assign(&[0, 0, 1, 2, 1]);
        assert_eq!(ari(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn ari_crossed_pairs_is_minus_half() {
        let a = assign(&[0, 0, 1, 1]);
        let b = assign(&[0, 1, 0, 1]);
        assert!((ari(&a, &b).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn ari_matches_brute_force_pair_counting() {
        let mut rng = rng_stream(2);
        for _ in 0..10 {
            let a = random_assign(30, 3, &mut rng);
            let b = random_assign(30, 4, &mut rng);
            // Direct definition over all point pairs.
            let mut n11 = 0.0;
            let mut n_a = 0.0;
            let mut n_b = 0.0;
            let mut pairs = 0.0;
            for i in 0..30 {
                for j in (i + 1)..30 {
                    let same_a = a.label(i) == a.label(j);
                    let same_b = b.label(i) == b.label(j);
                    if same_a && same_b {
                        n11 += 1.0;
                    }
                    if same_a {
                        n_a += 1.0;
                    }
                    if same_b {
                        n_b += 1.0;
                    }
                    pairs += 1.0;
                }
            }
            let expected = n_a * n_b / pairs;
            let max = 0.5 * (n_a + n_b);
            let want = (n11 - expected) / (max - expected);
            assert!((ari(&a, &b).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn ari_relabel_invariant() {
        let a = assign(&[0, 0, 1, 1, 2, 2]);
        let b = assign(&[2, 2, 0, 0, 1, 1]);
        assert_eq!(ari(&a, &b).unwrap(), 1.0);
        assert_eq!(ami(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn ari_of_canonicalized_copy_is_one() {
        let a = assign(&[5, 5, -1, 2, 2, 7]);
        assert_eq!(ari(&a, &a.canonicalize()).unwrap(), 1.0);
    }

    #[test]
    fn scores_are_symmetric() {
        let mut rng = rng_stream(3);
        for _ in 0..10 {
            let a = random_assign(40, 3, &mut rng);
            let b = random_assign(40, 5, &mut rng);
            assert_eq!(ari(&a, &b).unwrap(), ari(&b, &a).unwrap());
            assert!((ami(&a, &b).unwrap() - ami(&b, &a).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_all_singletons() {
        let a = assign(&[0, 1, 2, 3]);
        let b = assign(&[3, 2, 1, 0]);
        assert_eq!(ari(&a, &b).unwrap(), 1.0);
        let c = assign(&[0, 0, 1, 2]);
        assert_eq!(ari(&a, &c).unwrap(), 0.0);
    }

    #[test]
    fn ami_identical_is_one() {
        let a = assign(&[0, 0, 1, 1, 2]);
        assert_eq!(ami(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn ami_one_cluster_vs_nontrivial_is_zero() {
        let a = assign(&[0, 0, 0, 0, 0, 0]);
        let b = assign(&[0, 0, 1, 1, 2, 2]);
        assert!((ami(&a, &b).unwrap()).abs() < 1e-12);
        let both_trivial = assign(&[1, 1, 1, 1, 1, 1]);
        assert_eq!(ami(&a, &both_trivial).unwrap(), 1.0);
    }

    #[test]
    fn ami_chance_level_near_zero() {
        let mut rng = rng_stream(4);
        let trials = 60;
        let mut sum_ami = 0.0;
        let mut sum_ari = 0.0;
        for _ in 0..trials {
            let a = random_assign(100, 4, &mut rng);
            let b = random_assign(100, 4, &mut rng);
            sum_ami += ami(&a, &b).unwrap();
            sum_ari += ari(&a, &b).unwrap();
        }
        assert!((sum_ami / trials as f64).abs() < 0.02);
        assert!((sum_ari / trials as f64).abs() < 0.02);
    }

    #[test]
    fn outliers_score_as_their_own_cluster() {
        let a = assign(&[-1, -1, 0, 0]);
        let b = assign(&[1, 1, 0, 0]);
        assert_eq!(ari(&a, &b).unwrap(), 1.0);
        assert_eq!(ami(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn length_mismatch_is_reported() {
        let a = assign(&[0, 1]);
        let b = assign(&[0, 1, 1]);
        assert!(matches!(
            ari(&a, &b),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
