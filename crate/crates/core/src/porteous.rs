//! Degeneracy obstruction determinants in the characteristic classes of the
//! configuration function bundle.
//!
//! The r x r matrix with entries `w_{N-n+r-i+k}` (rows i, columns k, with
//! `w_0 = 1` and `w_{<0} = 0`) is the obstruction to every N-dimensional
//! function space meeting all rank-drop-r condition systems transversally.
//! Over `Z_2` its determinant collapses to the product of the side-diagonal
//! entries `prod_{i=1..r} w_{N-n+2i-1}` because all squares vanish; both
//! routes are computed here and compared on a grid by the test suite.

use serde_json::json;

use crate::cohomology::{cup, sw_class, CohClass};

/// Entry `(i, k)` (1-based) of the obstruction matrix: `w_{N-n+r-i+k}`,
/// with `w_0` the unit and negative indices zero.
pub fn porteous_matrix(n: u32, big_n: u32, r: u32) -> Vec<Vec<CohClass>> {
    assert!(r >= 1, "matrix size must be at least 1");
    assert!(big_n >= n, "need N >= n");
    let q = big_n - n;
    let entry = |i: u32, k: u32| -> CohClass {
        let idx = q as i64 + r as i64 - i as i64 + k as i64;
        if idx < 0 {
            CohClass::zero(n, 0)
        } else {
            sw_class(n, idx as u32)
        }
    };
    let m: Vec<Vec<CohClass>> = (1..=r)
        .map(|i| (1..=r).map(|k| entry(i, k)).collect())
        .collect();
    // Corner orientation: bottom-left is w_{N-n+1}, top-right w_{N-n+2r-1}.
    debug_assert_eq!(m[(r - 1) as usize][0], sw_class(n, q + 1));
    debug_assert_eq!(m[0][(r - 1) as usize], sw_class(n, q + 2 * r - 1));
    m
}

/// Determinant of the obstruction matrix, expanded over the commutative
/// mod-2 ring (signs are irrelevant; r <= 6 keeps the expansion tiny).
pub fn porteous_det(n: u32, big_n: u32, r: u32) -> CohClass {
    let m = porteous_matrix(n, big_n, r);
    let degree: u32 = (0..r).map(|i| m[i as usize][i as usize].degree()).sum();
    let size = r as usize;
    let mut used = vec![false; size];
    fn expand(
        m: &[Vec<CohClass>],
        row: usize,
        used: &mut [bool],
        n: u32,
        degree: u32,
    ) -> CohClass {
        if row == m.len() {
            return CohClass::unit(n);
        }
        let mut acc = CohClass::zero(n, degree);
        for col in 0..m.len() {
            if used[col] || m[row][col].is_zero() {
                continue;
            }
            used[col] = true;
            let sub = expand(m, row + 1, used, n, degree);
            used[col] = false;
            if !sub.is_zero() {
                let term = cup(&m[row][col], &sub).expect("same budget");
                acc = pad_add(acc, term);
            }
        }
        acc
    }
    expand(&m, 0, &mut used, n, degree)
}

/// Mod-2 sum that tolerates the zero class carrying a different declared
/// degree (products of mixed-degree entries all land in the same total
/// degree when nonzero).
fn pad_add(a: CohClass, b: CohClass) -> CohClass {
    if a.is_zero() {
        return b;
    }
    if b.is_zero() {
        return a;
    }
    let n = a.budget();
    let degree = a.degree();
    let mut support: Vec<_> = a.monomials().cloned().collect();
    for m in b.monomials() {
        if let Some(pos) = support.iter().position(|x| x == m) {
            support.remove(pos);
        } else {
            support.push(m.clone());
        }
    }
    CohClass::from_monomials(n, degree, support)
}

/// Product of the side-diagonal entries `prod_{i=1..r} w_{N-n+2i-1}`.
pub fn antidiagonal_product(n: u32, big_n: u32, r: u32) -> CohClass {
    assert!(r >= 1 && big_n >= n);
    let q = big_n - n;
    let mut acc = CohClass::unit(n);
    for i in 1..=r {
        acc = cup(&acc, &sw_class(n, q + 2 * i - 1)).expect("same budget");
    }
    acc
}

/// True iff the side-diagonal product is nonzero, in which case every
/// N-dimensional function space contains independent n-chord condition
/// systems whose codimension drops by at least r.
pub fn degeneracy_decision(n: u32, big_n: u32, r: u32) -> bool {
    !antidiagonal_product(n, big_n, r).is_zero()
}

/// Decision grid over `n <= n_max`, offsets `q = N - n <= q_max`, and
/// `r <= r_max`, with the minimal true `n` per `(r, q)`.
#[derive(Debug, Clone)]
pub struct CorrTable {
    pub n_max: u32,
    pub r_max: u32,
    pub q_max: u32,
    /// `grid[r-1][q][n-1] = degeneracy_decision(n, n+q, r)`.
    pub grid: Vec<Vec<Vec<bool>>>,
    /// `minimal[r-1][q]` = least n with a true decision, if any.
    pub minimal: Vec<Vec<Option<u32>>>,
}

/// Default offset range for [`corr_table`].
pub const DEFAULT_Q_MAX: u32 = 8;

pub fn corr_table(n_max: u32, r_max: u32) -> CorrTable {
    corr_table_with_offsets(n_max, r_max, DEFAULT_Q_MAX)
}

pub fn corr_table_with_offsets(n_max: u32, r_max: u32, q_max: u32) -> CorrTable {
    assert!(n_max <= 64 && r_max <= 6, "table bounds: n_max <= 64, r_max <= 6");
    let mut grid = Vec::with_capacity(r_max as usize);
    let mut minimal = Vec::with_capacity(r_max as usize);
    for r in 1..=r_max {
        let mut by_q = Vec::with_capacity(q_max as usize + 1);
        let mut min_q = Vec::with_capacity(q_max as usize + 1);
        for q in 0..=q_max {
            let row: Vec<bool> = (1..=n_max)
                .map(|n| degeneracy_decision(n, n + q, r))
                .collect();
            min_q.push(row.iter().position(|&b| b).map(|i| i as u32 + 1));
            by_q.push(row);
        }
        grid.push(by_q);
        minimal.push(min_q);
    }
    CorrTable {
        n_max,
        r_max,
        q_max,
        grid,
        minimal,
    }
}

impl CorrTable {
    pub fn decision(&self, n: u32, big_n: u32, r: u32) -> Option<bool> {
        if r < 1 || r > self.r_max || big_n < n || n < 1 || n > self.n_max {
            return None;
        }
        let q = big_n - n;
        if q > self.q_max {
            return None;
        }
        Some(self.grid[(r - 1) as usize][q as usize][(n - 1) as usize])
    }

    /// Markdown table of minimal n per (r, offset).
    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        s.push_str("| r \\ N-n |");
        for q in 0..=self.q_max {
            s.push_str(&format!(" {q} |"));
        }
        s.push('\n');
        s.push_str("|---|");
        for _ in 0..=self.q_max {
            s.push_str("---|");
        }
        s.push('\n');
        for r in 1..=self.r_max {
            s.push_str(&format!("| {r} |"));
            for q in 0..=self.q_max {
                match self.minimal[(r - 1) as usize][q as usize] {
                    Some(n) => s.push_str(&format!(" {n} |")),
                    None => s.push_str(" - |"),
                }
            }
            s.push('\n');
        }
        s
    }

    /// CSV rows `r,offset,minimal_n,decisions` (decisions as a 0/1 string
    /// over n = 1..n_max).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,offset,minimal_n,decisions\n");
        for r in 1..=self.r_max {
            for q in 0..=self.q_max {
                let min = self.minimal[(r - 1) as usize][q as usize]
                    .map(|n| n.to_string())
                    .unwrap_or_default();
                let bits: String = self.grid[(r - 1) as usize][q as usize]
                    .iter()
                    .map(|&b| if b { '1' } else { '0' })
                    .collect();
                s.push_str(&format!("{r},{q},{min},{bits}\n"));
            }
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<_> = (1..=self.r_max)
            .flat_map(|r| {
                (0..=self.q_max).map(move |q| (r, q))
            })
            .map(|(r, q)| {
                json!({
                    "r": r,
                    "offset": q,
                    "minimal_n": self.minimal[(r - 1) as usize][q as usize],
                    "decisions": self.grid[(r - 1) as usize][q as usize],
                })
            })
            .collect();
        json!({
            "n_max": self.n_max,
            "r_max": self.r_max,
            "q_max": self.q_max,
            "rows": rows,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::{ones, DPMonomial};

    #[test]
    fn r1_det_is_the_single_class() {
        for (n, big_n) in [(4u32, 5u32), (6, 6), (9, 12)] {
            assert_eq!(porteous_det(n, big_n, 1), sw_class(n, big_n - n + 1));
            assert_eq!(antidiagonal_product(n, big_n, 1), sw_class(n, big_n - n + 1));
        }
    }

    #[test]
    fn six_six_two_is_y1_y2() {
        let det = porteous_det(6, 6, 2);
        let expected = CohClass::from_monomials(6, 4, [DPMonomial::from_pairs(&[(1, 1), (2, 1)])]);
        assert_eq!(det, expected);
        assert_eq!(antidiagonal_product(6, 6, 2), expected);
        assert!(degeneracy_decision(6, 6, 2));
    }

    #[test]
    fn eight_nine_two_vanishes() {
        assert!(antidiagonal_product(8, 9, 2).is_zero());
    }

    #[test]
    fn r1_vanishes_past_the_top_degree() {
        for n in 2..=20u32 {
            let top = n - ones(n as u64);
            let big_n = n + top; // N - n + 1 = top + 1 > top
            assert!(porteous_det(n, big_n, 1).is_zero(), "n={n}");
        }
    }

    #[test]
    fn det_equals_antidiagonal_on_a_small_grid() {
        for n in 1..=12u32 {
            for q in 0..=4u32 {
                for r in 1..=3u32 {
                    assert_eq!(
                        porteous_det(n, n + q, r),
                        antidiagonal_product(n, n + q, r),
                        "n={n}, q={q}, r={r}"
                    );
                }
            }
        }
    }

    #[test]
    fn thirty_thirty_one_four_is_true() {
        assert!(degeneracy_decision(30, 31, 4));
        assert!(!degeneracy_decision(29, 30, 4));
    }

    #[test]
    fn decision_r1_matches_binary_criterion() {
        for n in 1..=32u32 {
            for big_n in n..=2 * n {
                let expected = big_n < 2 * n - ones(n as u64);
                assert_eq!(degeneracy_decision(n, big_n, 1), expected, "n={n}, N={big_n}");
            }
        }
    }

    #[test]
    fn table_replays_decisions() {
        let t = corr_table(16, 3);
        for r in 1..=3u32 {
            for q in 0..=DEFAULT_Q_MAX {
                for n in 1..=16u32 {
                    assert_eq!(
                        t.decision(n, n + q, r).unwrap(),
                        degeneracy_decision(n, n + q, r)
                    );
                }
            }
        }
        // Known minimal entries.
        assert_eq!(t.minimal[1][0], Some(6));
        assert_eq!(t.minimal[1][1], Some(10));
        assert_eq!(t.minimal[1][3], Some(14));
    }

    #[test]
    fn renders_do_not_panic_and_mention_thresholds() {
        let t = corr_table(32, 4);
        let md = t.to_markdown();
        assert!(md.contains("| 2 |"));
        let csv = t.to_csv();
        assert!(csv.lines().count() > 4);
    }

    #[test]
    fn n_monotonicity_on_grid() {
        // Truncation only removes monomials, so a true decision stays true
        // for every larger n.
        let t = corr_table(32, 4);
        for r in 1..=4u32 {
            for q in 0..=DEFAULT_Q_MAX {
                for n in 1..32u32 {
                    let here = t.decision(n, n + q, r).unwrap();
                    let bigger = t.decision(n + 1, n + 1 + q, r).unwrap();
                    if here {
                        assert!(bigger, "n={n}, q={q}, r={r}");
                    }
                }
            }
        }
    }

    #[test]
    fn offset_monotonicity_holds_for_r_at_most_two_only() {
        // For r <= 2 a true decision stays true at every smaller offset on
        // the grid. For r = 3 this fails: the side-diagonal product
        // w_1 w_3 w_5 vanishes identically (y_1 y_2 kills both degree-5
        // monomials), so the offset-0 decision is false for every n even
        // though offset 1 is true from n = 18 on.
        let t = corr_table(24, 3);
        for r in 1..=2u32 {
            for n in 1..=24u32 {
                for q in 1..=DEFAULT_Q_MAX {
                    if t.decision(n, n + q, r).unwrap() {
                        assert!(t.decision(n, n + q - 1, r).unwrap(), "n={n}, q={q}, r={r}");
                    }
                }
            }
        }
        assert!(degeneracy_decision(18, 19, 3));
        assert!(!degeneracy_decision(18, 18, 3));
        assert!(antidiagonal_product(24, 24, 3).is_zero());
    }

    #[test]
    fn model_refines_two_threshold_entries() {
        // Two side-diagonal products are nonzero earlier than the classical
        // lists record: w_7 w_9 keeps the weight-20 survivor y_2^(3) y_3,
        // and w_5 w_7 w_9 keeps the weight-30 survivor y_1^(5) y_2^(3) y_3.
        let p = antidiagonal_product(20, 26, 2);
        assert!(p
            .monomials()
            .any(|m| m.exps() == [(2, 3), (3, 1)]));
        assert!(degeneracy_decision(20, 26, 2));
        assert!(!degeneracy_decision(19, 25, 2));
        let p = antidiagonal_product(30, 34, 3);
        assert!(p
            .monomials()
            .any(|m| m.exps() == [(1, 5), (2, 3), (3, 1)]));
        assert!(degeneracy_decision(30, 34, 3));
        assert!(!degeneracy_decision(29, 33, 3));
    }
}
