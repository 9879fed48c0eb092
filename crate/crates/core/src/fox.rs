//! Independent additive oracle for the mod-2 cohomology of `B(R^2, n)`.
//!
//! The one-dimensional cell model: generators in cochain degree `n - k` are
//! the compositions `(m_1, ..., m_k)` of `n`, and the differential merges
//! adjacent parts with a binomial coefficient,
//!
//! ```text
//! d(m_1, ..., m_k) = sum_i C(m_i + m_{i+1}, m_i) (m_1, ..., m_i + m_{i+1}, ..., m_k)  (mod 2)
//! ```
//!
//! `d o d = 0` follows from the multinomial factorization
//! `C(a+b, a) C(a+b+c, a+b) = C(a+b+c; a, b, c)`; disjoint merges cancel in
//! pairs over `Z_2`. Betti numbers come from `Z_2` Gaussian elimination.
//! This complex shares nothing with the divided-power model in
//! [`crate::cohomology`], which is exactly why the dimension cross-check is
//! meaningful.

use std::collections::HashMap;

use crate::cohomology::{binom_odd, CohError};

/// Composition of `n`: ordered positive parts. Cochain degree is
/// `n - (number of parts)`.
pub type Composition = Vec<u32>;

/// All compositions of `n` with exactly `k` parts, in lexicographic order.
pub fn compositions(n: u32, k: u32) -> Vec<Composition> {
    fn rec(rest: u32, parts_left: u32, prefix: &mut Composition, out: &mut Vec<Composition>) {
        if parts_left == 1 {
            prefix.push(rest);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        // Each remaining part needs at least 1.
        for first in 1..=(rest - (parts_left - 1)) {
            prefix.push(first);
            rec(rest - first, parts_left - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k >= 1 && k <= n {
        rec(n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Image of one composition under the merge differential: indices (into the
/// `k-1`-part basis) with odd coefficient, already reduced mod 2.
fn differential_row(
    comp: &Composition,
    target_index: &HashMap<Composition, usize>,
) -> Vec<usize> {
    let mut hits: Vec<usize> = Vec::new();
    for i in 0..comp.len() - 1 {
        if binom_odd(comp[i], comp[i + 1]) {
            let mut merged = Vec::with_capacity(comp.len() - 1);
            merged.extend_from_slice(&comp[..i]);
            merged.push(comp[i] + comp[i + 1]);
            merged.extend_from_slice(&comp[i + 2..]);
            hits.push(target_index[&merged]);
        }
    }
    hits.sort_unstable();
    // Cancel repeated hits mod 2 (cannot actually occur for merges at
    // distinct positions, but keep the reduction honest).
    let mut reduced = Vec::with_capacity(hits.len());
    let mut idx = 0;
    while idx < hits.len() {
        let mut run = 1;
        while idx + run < hits.len() && hits[idx + run] == hits[idx] {
            run += 1;
        }
        if run % 2 == 1 {
            reduced.push(hits[idx]);
        }
        idx += run;
    }
    reduced
}

/// Rank over `Z_2` of a matrix given as bit rows (`cols` columns).
pub fn z2_rank(mut rows: Vec<Vec<u64>>, cols: usize) -> usize {
    let words = cols.div_ceil(64);
    let mut rank = 0;
    for col in 0..cols {
        let (word, bit) = (col / 64, col % 64);
        let mask = 1u64 << bit;
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][word] & mask != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[word] & mask != 0 {
                for w in 0..words {
                    row[w] ^= pivot_row[w];
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Dimensions of `H^d(B(R^2, n); Z_2)` for `d = 0, ..., n-1`, computed from
/// the cell complex. Refuses `n > 16` (`2^(n-1)` cells).
pub fn betti_oracle(n: u32) -> Result<Vec<usize>, CohError> {
    if n > 16 {
        return Err(CohError::SizeLimit(n));
    }
    if n == 0 {
        return Ok(vec![]);
    }
    // bases[k-1] = compositions with k parts (cochain degree n - k).
    let bases: Vec<Vec<Composition>> = (1..=n).map(|k| compositions(n, k)).collect();
    let index: Vec<HashMap<Composition, usize>> = bases
        .iter()
        .map(|b| {
            b.iter()
                .enumerate()
                .map(|(i, c)| (c.clone(), i))
                .collect()
        })
        .collect();

    // rank_from[k] = rank of the differential from k-part to (k-1)-part
    // cochains, k = 2..=n.
    let mut rank_from = vec![0usize; n as usize + 1];
    for k in 2..=n as usize {
        let domain = &bases[k - 1];
        let target = &bases[k - 2];
        let words = target.len().div_ceil(64);
        let mut rows: Vec<Vec<u64>> = Vec::with_capacity(domain.len());
        for comp in domain {
            let mut row = vec![0u64; words];
            for hit in differential_row(comp, &index[k - 2]) {
                row[hit / 64] ^= 1 << (hit % 64);
            }
            rows.push(row);
        }
        rank_from[k] = z2_rank(rows, target.len());
    }

    // H^d with d = n - k: dim ker(d: C^d -> C^{d+1}) - rank(d: C^{d-1} -> C^d).
    // The differential out of degree d is the merge map from k parts to k-1
    // parts; the one into degree d comes from k+1 parts.
    let mut betti = Vec::with_capacity(n as usize);
    for d in 0..n as usize {
        let k = n as usize - d;
        let dim = bases[k - 1].len();
        let out_rank = if k >= 2 { rank_from[k] } else { 0 };
        let in_rank = if k + 1 <= n as usize { rank_from[k + 1] } else { 0 };
        betti.push(dim - out_rank - in_rank);
    }
    Ok(betti)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(5, 2).len(), 4);
        assert_eq!(compositions(5, 1), vec![vec![5]]);
        let total: usize = (1..=6).map(|k| compositions(6, k).len()).sum();
        assert_eq!(total, 1 << 5);
    }

    #[test]
    fn differential_squares_to_zero() {
        // d(d(c)) = 0 for every cell, checked over Z_2 by counting paths.
        for n in 2..=9u32 {
            for k in 3..=n {
                let mid = compositions(n, k - 1);
                let mid_index: HashMap<Composition, usize> =
                    mid.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
                let low = compositions(n, k - 2);
                let low_index: HashMap<Composition, usize> =
                    low.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
                for comp in compositions(n, k) {
                    let mut parity = vec![0u8; low.len()];
                    for hit in differential_row(&comp, &mid_index) {
                        for hit2 in differential_row(&mid[hit], &low_index) {
                            parity[hit2] ^= 1;
                        }
                    }
                    assert!(
                        parity.iter().all(|&p| p == 0),
                        "d^2 != 0 at n={n}, cell {comp:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn betti_small_cases() {
        assert_eq!(betti_oracle(2).unwrap(), vec![1, 1]);
        assert_eq!(betti_oracle(3).unwrap(), vec![1, 1, 0]);
        assert_eq!(betti_oracle(4).unwrap(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn size_limit() {
        assert!(matches!(betti_oracle(17), Err(CohError::SizeLimit(17))));
    }

    #[test]
    fn z2_rank_basics() {
        // Rows 101, 011, 110: third is the sum of the first two.
        let rows = vec![vec![0b101u64], vec![0b011], vec![0b110]];
        assert_eq!(z2_rank(rows, 3), 2);
        assert_eq!(z2_rank(vec![vec![0u64]], 3), 0);
    }

    #[test]
    fn oracle_matches_divided_power_counts_small() {
        for n in 1..=10u32 {
            let betti = betti_oracle(n).unwrap();
            for (d, &dim) in betti.iter().enumerate() {
                assert_eq!(
                    crate::cohomology::basis(n, d as u32).len(),
                    dim,
                    "n={n}, d={d}"
                );
            }
        }
    }
}
