//! Adjusted Rand index.

use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};

fn choose2(m: u64) -> i128 {
    let m = m as i128;
    m * (m - 1) / 2
}

fn dense_ids<T: Eq + Hash>(labels: &[T]) -> (Vec<usize>, usize) {
    let mut ids = HashMap::new();
    let dense = labels
        .iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(l).or_insert(next)
        })
        .collect();
    (dense, ids.len())
}

/// Chance-corrected agreement between two partitions of the same `n` items.
///
/// Binomial sums are accumulated in exact integer arithmetic; only the final
/// ratio is taken in floating point. When the denominator vanishes (both
/// partitions all-singletons, or both a single cluster) the index is 1 if the
/// partitions coincide and 0 otherwise.
pub fn adjusted_rand_index<T: Eq + Hash>(a: &[T], b: &[T]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "label vectors have lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 labels, got {n}"
        )));
    }
    let (da, ka) = dense_ids(a);
    let (db, kb) = dense_ids(b);

    let mut table: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows = vec![0u64; ka];
    let mut cols = vec![0u64; kb];
    for (&i, &j) in da.iter().zip(&db) {
        *table.entry((i, j)).or_insert(0) += 1;
        rows[i] += 1;
        cols[j] += 1;
    }

    let index: i128 = table.values().map(|&c| choose2(c)).sum();
    let sum_a: i128 = rows.iter().map(|&c| choose2(c)).sum();
    let sum_b: i128 = cols.iter().map(|&c| choose2(c)).sum();
    let pairs = choose2(n as u64);

    // (index − sa·sb/N) / ((sa + sb)/2 − sa·sb/N), scaled by 2N
    let numerator = 2 * (index * pairs - sum_a * sum_b);
    let denominator = (sum_a + sum_b) * pairs - 2 * sum_a * sum_b;
    if denominator == 0 {
        // identical partitions have a one-to-one contingency table
        let same = table.len() == ka && ka == kb;
        return Ok(if same { 1.0 } else { 0.0 });
    }
    Ok(numerator as f64 / denominator as f64)
}
