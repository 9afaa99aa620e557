//! Partition agreement scores: Rand index and adjusted Rand index.
//!
//! Both are pair-counting measures computed from the contingency table of
//! two labelings. All pair counts are exact integers; floating point enters
//! only in the final division. The two labelings may use different numbers
//! of clusters.

use serde::Serialize;

use crate::error::{Error, Result};

/// Cluster assignments in `{1..c}`. Empty clusters are allowed: `c` records
/// the intended cluster count, not the number of distinct values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Labeling {
    assignments: Vec<usize>,
    c: usize,
}

impl Labeling {
    pub fn new(assignments: Vec<usize>, c: usize) -> Result<Self> {
        if assignments.is_empty() {
            return Err(Error::TooFewSamples(0));
        }
        if c == 0 || assignments.iter().any(|&y| y == 0 || y > c) {
            return Err(Error::InvalidArgument(format!(
                "labels must lie in 1..={c}"
            )));
        }
        Ok(Self { assignments, c })
    }

    /// Builds a labeling with `c` set to the largest label present.
    pub fn from_assignments(assignments: Vec<usize>) -> Result<Self> {
        let c = assignments.iter().copied().max().unwrap_or(0);
        Self::new(assignments, c)
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn n(&self) -> usize {
        self.assignments.len()
    }

    pub fn c(&self) -> usize {
        self.c
    }

    /// Samples per cluster, indexed by label - 1.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.c];
        for &y in &self.assignments {
            sizes[y - 1] += 1;
        }
        sizes
    }
}

/// Joint label counts `n[y][y']` with row, column, and grand totals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    n: u64,
}

impl ContingencyTable {
    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    pub fn n(&self) -> u64 {
        self.n
    }
}

pub fn contingency(a: &Labeling, b: &Labeling) -> Result<ContingencyTable> {
    if a.n() != b.n() {
        return Err(Error::LengthMismatch(a.n(), b.n()));
    }
    let mut counts = vec![vec![0u64; b.c()]; a.c()];
    for (&ya, &yb) in a.assignments().iter().zip(b.assignments()) {
        counts[ya - 1][yb - 1] += 1;
    }
    let row_sums: Vec<u64> = counts.iter().map(|row| row.iter().sum()).collect();
    let mut col_sums = vec![0u64; b.c()];
    for row in &counts {
        for (j, &v) in row.iter().enumerate() {
            col_sums[j] += v;
        }
    }
    Ok(ContingencyTable {
        counts,
        row_sums,
        col_sums,
        n: a.n() as u64,
    })
}

fn comb2(x: u64) -> i128 {
    let x = x as i128;
    x * (x - 1) / 2
}

struct PairCounts {
    total: i128,       // C(n, 2)
    same_both: i128,   // pairs together in both labelings
    same_a: i128,      // pairs together in a
    same_b: i128,      // pairs together in b
}

fn pair_counts(table: &ContingencyTable) -> Result<PairCounts> {
    if table.n < 2 {
        return Err(Error::TooFewSamples(table.n as usize));
    }
    let same_both: i128 = table
        .counts
        .iter()
        .flat_map(|row| row.iter())
        .map(|&v| comb2(v))
        .sum();
    let same_a: i128 = table.row_sums.iter().map(|&v| comb2(v)).sum();
    let same_b: i128 = table.col_sums.iter().map(|&v| comb2(v)).sum();
    Ok(PairCounts {
        total: comb2(table.n),
        same_both,
        same_a,
        same_b,
    })
}

/// Fraction of sample pairs on which the two labelings agree
/// (both together or both apart). Always in `[0, 1]`.
pub fn rand_index(a: &Labeling, b: &Labeling) -> Result<f64> {
    let p = pair_counts(&contingency(a, b)?)?;
    // agreements = together-in-both + apart-in-both
    let agreements = p.same_both + (p.total - p.same_a - p.same_b + p.same_both);
    Ok(agreements as f64 / p.total as f64)
}

/// Adjusted Rand index and whether the chance-correction denominator
/// degenerated (both labelings all-singletons or both one-cluster).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AriOutcome {
    pub value: f64,
    pub degenerate: bool,
}

/// Chance-corrected pair agreement: 1 iff the partitions are identical up
/// to relabeling, near 0 for independent labelings.
pub fn adjusted_rand_index(a: &Labeling, b: &Labeling) -> Result<f64> {
    adjusted_rand_index_detailed(a, b).map(|o| o.value)
}

pub fn adjusted_rand_index_detailed(a: &Labeling, b: &Labeling) -> Result<AriOutcome> {
    let table = contingency(a, b)?;
    let p = pair_counts(&table)?;
    // ARI = (T*S - A*B) / (T*(A+B)/2 - A*B), doubled to stay integral
    let numer = 2 * (p.total * p.same_both - p.same_a * p.same_b);
    let denom = p.total * (p.same_a + p.same_b) - 2 * p.same_a * p.same_b;
    if denom == 0 {
        // both all-singletons or both one-cluster; identical partitions
        // score 1 as everywhere else
        let identical = partitions_identical(&table);
        return Ok(AriOutcome {
            value: if identical { 1.0 } else { 0.0 },
            degenerate: true,
        });
    }
    Ok(AriOutcome {
        value: numer as f64 / denom as f64,
        degenerate: false,
    })
}

/// Identical as partitions: a bijection between nonempty clusters, i.e.
/// at most one nonzero per row and per column of the contingency table.
fn partitions_identical(table: &ContingencyTable) -> bool {
    let row_ok = table
        .counts
        .iter()
        .all(|row| row.iter().filter(|&&v| v > 0).count() <= 1);
    let mut col_nonzero = vec![0usize; table.col_sums.len()];
    for row in &table.counts {
        for (j, &v) in row.iter().enumerate() {
            if v > 0 {
                col_nonzero[j] += 1;
            }
        }
    }
    row_ok && col_nonzero.iter().all(|&k| k <= 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;

    fn labeling(v: &[usize]) -> Labeling {
        Labeling::from_assignments(v.to_vec()).unwrap()
    }

    /// O(n^2) oracle over raw assignments, sharing no code with the
    /// contingency-table route.
    fn pairwise_counts(a: &[usize], b: &[usize]) -> (i128, i128, i128, i128) {
        let n = a.len();
        let (mut both, mut a_only, mut b_only, mut neither) = (0i128, 0i128, 0i128, 0i128);
        for i in 0..n {
            for j in i + 1..n {
                match (a[i] == a[j], b[i] == b[j]) {
                    (true, true) => both += 1,
                    (true, false) => a_only += 1,
                    (false, true) => b_only += 1,
                    (false, false) => neither += 1,
                }
            }
        }
        (both, a_only, b_only, neither)
    }

    fn oracle_ri(a: &[usize], b: &[usize]) -> f64 {
        let (both, a_only, b_only, neither) = pairwise_counts(a, b);
        (both + neither) as f64 / (both + a_only + b_only + neither) as f64
    }

    fn oracle_ari(a: &[usize], b: &[usize]) -> Option<f64> {
        let (both, a_only, b_only, neither) = pairwise_counts(a, b);
        let total = both + a_only + b_only + neither;
        let same_a = both + a_only;
        let same_b = both + b_only;
        let numer = 2 * (total * both - same_a * same_b);
        let denom = total * (same_a + same_b) - 2 * same_a * same_b;
        (denom != 0).then(|| numer as f64 / denom as f64)
    }

    #[test]
    fn contingency_identical_is_diagonal() {
        let a = labeling(&[1, 1, 2, 3, 3]);
        let t = contingency(&a, &a).unwrap();
        for (i, row) in t.counts().iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if i == j {
                    assert!(v > 0);
                } else {
                    assert_eq!(v, 0);
                }
            }
        }
    }

    #[test]
    fn contingency_crossed_example() {
        let t = contingency(&labeling(&[1, 1, 2, 2]), &labeling(&[1, 2, 1, 2])).unwrap();
        assert_eq!(t.counts(), &[vec![1, 1], vec![1, 1]]);
        assert_eq!(t.row_sums(), &[2, 2]);
        assert_eq!(t.col_sums(), &[2, 2]);
    }

    #[test]
    fn rand_index_examples() {
        let a = labeling(&[1, 1, 2, 2]);
        assert_eq!(rand_index(&a, &a).unwrap(), 1.0);
        let b = labeling(&[1, 2, 1, 2]);
        assert!((rand_index(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ari_examples() {
        let a = labeling(&[1, 1, 2, 2]);
        assert_eq!(adjusted_rand_index(&a, &a).unwrap(), 1.0);
        let b = labeling(&[1, 2, 1, 2]);
        assert_eq!(adjusted_rand_index(&a, &b).unwrap(), -0.5);
    }

    #[test]
    fn length_mismatch_and_tiny_inputs() {
        let a = labeling(&[1, 2, 1]);
        let b = labeling(&[1, 2]);
        assert!(matches!(
            rand_index(&a, &b),
            Err(Error::LengthMismatch(3, 2))
        ));
        let one = labeling(&[1]);
        assert!(matches!(
            adjusted_rand_index(&one, &one),
            Err(Error::TooFewSamples(1))
        ));
    }

    #[test]
    fn degenerate_denominators() {
        // both all-singletons
        let a = labeling(&[1, 2, 3]);
        let out = adjusted_rand_index_detailed(&a, &a).unwrap();
        assert!(out.degenerate);
        assert_eq!(out.value, 1.0);
        // both one-cluster, different label values
        let b1 = Labeling::new(vec![1, 1, 1], 1).unwrap();
        let b2 = Labeling::new(vec![2, 2, 2], 2).unwrap();
        let out = adjusted_rand_index_detailed(&b1, &b2).unwrap();
        assert!(out.degenerate);
        assert_eq!(out.value, 1.0);
        // one-cluster vs singletons is NOT degenerate
        let out = adjusted_rand_index_detailed(&b1, &a).unwrap();
        assert!(!out.degenerate);
        assert_eq!(out.value, 0.0);
    }

    #[test]
    fn matches_pairwise_oracle() {
        let mut rng = crate::seeds::rng(123);
        for trial in 0..100 {
            use rand::Rng;
            let n = 2 + rng.random_range(0..49usize);
            let ca = 1 + rng.random_range(0..5usize);
            let cb = 1 + rng.random_range(0..5usize);
            let a: Vec<usize> = (0..n).map(|_| 1 + rng.random_range(0..ca)).collect();
            let b: Vec<usize> = (0..n).map(|_| 1 + rng.random_range(0..cb)).collect();
            let la = labeling(&a);
            let lb = labeling(&b);
            assert_eq!(rand_index(&la, &lb).unwrap(), oracle_ri(&a, &b), "trial {trial}");
            if let Some(expected) = oracle_ari(&a, &b) {
                assert_eq!(
                    adjusted_rand_index(&la, &lb).unwrap(),
                    expected,
                    "trial {trial}"
                );
            }
        }
    }

    #[test]
    fn shuffled_relabelings_average_near_zero() {
        let base: Vec<usize> = (0..60).map(|i| 1 + i % 4).collect();
        let fixed = labeling(&base);
        let mut rng = crate::seeds::rng(7);
        let mut sum = 0.0;
        let trials = 1000;
        for _ in 0..trials {
            let mut shuffled = base.clone();
            shuffled.shuffle(&mut rng);
            sum += adjusted_rand_index(&fixed, &labeling(&shuffled)).unwrap();
        }
        let mean = sum / trials as f64;
        assert!(mean.abs() <= 0.02, "mean ARI {mean}");
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(
            raw_a in proptest::collection::vec(1usize..5, 2..40),
            raw_b_seed in 0u64..1000,
        ) {
            let n = raw_a.len();
            let mut rng = crate::seeds::rng(raw_b_seed);
            use rand::Rng;
            let raw_b: Vec<usize> = (0..n).map(|_| 1 + rng.random_range(0..4usize)).collect();
            let a = labeling(&raw_a);
            let b = labeling(&raw_b);
            let ri = rand_index(&a, &b).unwrap();
            prop_assert_eq!(ri, rand_index(&b, &a).unwrap());
            prop_assert!((0.0..=1.0).contains(&ri));
            let ari = adjusted_rand_index(&a, &b).unwrap();
            prop_assert_eq!(ari, adjusted_rand_index(&b, &a).unwrap());
            prop_assert!(ari <= 1.0);
        }

        #[test]
        fn invariant_under_relabeling(
            raw in proptest::collection::vec(1usize..4, 2..30),
            swap in 0usize..3,
        ) {
            // permute label values of one argument
            let perms = [[1usize, 2, 3], [2, 3, 1], [3, 1, 2]];
            let perm = perms[swap];
            let renamed: Vec<usize> = raw.iter().map(|&y| perm[y - 1]).collect();
            let other: Vec<usize> = raw.iter().rev().copied().collect();
            let a1 = Labeling::new(raw.clone(), 3).unwrap();
            let a2 = Labeling::new(renamed, 3).unwrap();
            let b = Labeling::new(other, 3).unwrap();
            prop_assert_eq!(
                rand_index(&a1, &b).unwrap(),
                rand_index(&a2, &b).unwrap()
            );
            prop_assert_eq!(
                adjusted_rand_index(&a1, &b).unwrap(),
                adjusted_rand_index(&a2, &b).unwrap()
            );
        }
    }
}
