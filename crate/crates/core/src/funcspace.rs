//! Function bases and the chord-evaluation matrix.
//!
//! A diagram with chords `(a_i, b_i)` acts on a basis `e_1..e_N` through the
//! matrix `M[i][k] = e_k(b_i) - e_k(a_i)`; its rank is the codimension of
//! the subspace cut out of the span of the basis by the equality conditions.
//! Exact rank uses fraction-free (Bareiss) elimination over big integers;
//! float rank thresholds singular values.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::diagram::{ChordDiagram, DiagramError};
use crate::expr::{parse_expr, Expr, ExprError};
use crate::report::Report;
use crate::{F64Diagram, Rat, RatDiagram};

/// Relative singular-value threshold for float rank: tau = RANK_TOL_FACTOR *
/// sigma_max * max(rows, cols).
pub const RANK_TOL_FACTOR: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum FuncSpaceError {
    #[error("basis dimension must be at least 1")]
    InvalidDimension,
    #[error("exact mode needs a rational-function basis and rational endpoints")]
    ExactnessViolation,
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("empty basis text")]
    EmptyBasis,
}

/// Named list of basis functions with an exactness flag.
#[derive(Debug, Clone)]
pub struct Basis {
    pub name: String,
    pub exprs: Vec<Expr>,
    /// True iff every member is a rational function, hence exactly evaluable
    /// at rational points.
    pub exact: bool,
}

impl Basis {
    pub fn new(name: impl Into<String>, exprs: Vec<Expr>) -> Result<Self, FuncSpaceError> {
        if exprs.is_empty() {
            return Err(FuncSpaceError::InvalidDimension);
        }
        let exact = exprs.iter().all(Expr::is_exact);
        Ok(Basis {
            name: name.into(),
            exprs,
            exact,
        })
    }

    /// Number of basis functions.
    pub fn dim(&self) -> usize {
        self.exprs.len()
    }

    /// Largest syntactic degree when every member is a polynomial.
    pub fn polynomial_degree(&self) -> Option<i64> {
        self.exprs
            .iter()
            .map(Expr::polynomial_degree)
            .try_fold(0, |acc, d| d.map(|d| acc.max(d)))
    }

    pub fn rename(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// The monomial space `{x, x^2, ..., x^N}` (degree-N polynomials with zero
/// free term).
pub fn polynomial_space(n: usize) -> Result<Basis, FuncSpaceError> {
    if n == 0 {
        return Err(FuncSpaceError::InvalidDimension);
    }
    let exprs = (1..=n as i64)
        .map(|k| Expr::Pow(Box::new(Expr::X), k))
        .collect();
    Basis::new(format!("pp:{n}"), exprs)
}

/// Parses a newline- or comma-separated list of expressions. `#` starts a
/// comment running to the end of the line.
pub fn parse_basis(text: &str) -> Result<Basis, FuncSpaceError> {
    let mut exprs = Vec::new();
    for line in text.lines() {
        let line = match line.split_once('#') {
            Some((head, _)) => head,
            None => line,
        };
        for chunk in split_top_level_commas(line) {
            let chunk = chunk.trim();
            if chunk.is_empty() {
                continue;
            }
            exprs.push(parse_expr(chunk)?);
        }
    }
    if exprs.is_empty() {
        return Err(FuncSpaceError::EmptyBasis);
    }
    Basis::new("basis", exprs)
}

/// Splits on commas that are not nested inside parentheses.
fn split_top_level_commas(line: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, c) in line.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(&line[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&line[start..]);
    parts
}

/// Exact evaluation matrix: rows follow the diagram's canonical chord order.
pub fn eval_matrix_exact(
    d: &RatDiagram,
    basis: &Basis,
) -> Result<Vec<Vec<Rat>>, FuncSpaceError> {
    if !basis.exact {
        return Err(FuncSpaceError::ExactnessViolation);
    }
    let mut rows = Vec::with_capacity(d.n());
    for chord in d.chords() {
        let mut row = Vec::with_capacity(basis.dim());
        for e in &basis.exprs {
            row.push(e.eval_rat(chord.b())? - e.eval_rat(chord.a())?);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Float evaluation matrix, same row order.
pub fn eval_matrix_f64(
    d: &F64Diagram,
    basis: &Basis,
) -> Result<Vec<Vec<f64>>, FuncSpaceError> {
    let mut rows = Vec::with_capacity(d.n());
    for chord in d.chords() {
        let mut row = Vec::with_capacity(basis.dim());
        for e in &basis.exprs {
            row.push(e.eval_f64(*chord.b())? - e.eval_f64(*chord.a())?);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Rank of a rational matrix: each row is scaled to integers (row scaling
/// preserves rank), then reduced by fraction-free Bareiss elimination.
pub fn rank_exact(matrix: &[Vec<Rat>]) -> usize {
    if matrix.is_empty() || matrix[0].is_empty() {
        return 0;
    }
    let mut m: Vec<Vec<BigInt>> = matrix
        .iter()
        .map(|row| {
            let lcm = row
                .iter()
                .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            row.iter()
                .map(|v| v.numer() * (&lcm / v.denom()))
                .collect()
        })
        .collect();
    let rows = m.len();
    let cols = m[0].len();
    let mut prev_pivot = BigInt::one();
    let mut rank = 0;
    let mut col = 0;
    while rank < rows && col < cols {
        let pivot_row = (rank..rows).find(|&r| !m[r][col].is_zero());
        let pivot_row = match pivot_row {
            Some(r) => r,
            None => {
                col += 1;
                continue;
            }
        };
        m.swap(rank, pivot_row);
        let pivot = m[rank][col].clone();
        for r in rank + 1..rows {
            for c in col + 1..cols {
                let num = &m[r][c] * &pivot - &m[r][col] * &m[rank][c];
                m[r][c] = num / &prev_pivot;
            }
            m[r][col] = BigInt::zero();
        }
        prev_pivot = pivot;
        rank += 1;
        col += 1;
    }
    rank
}

/// Exact determinant of a square rational matrix (fraction-free elimination
/// on the row-scaled integer matrix, with the scales divided back out).
pub fn det_exact(matrix: &[Vec<Rat>]) -> Rat {
    let n = matrix.len();
    if n == 0 {
        return Rat::one();
    }
    assert!(matrix.iter().all(|r| r.len() == n), "square matrix required");
    let mut scale = Rat::one();
    let mut m: Vec<Vec<BigInt>> = matrix
        .iter()
        .map(|row| {
            let lcm = row
                .iter()
                .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            scale *= Rat::from_integer(lcm.clone());
            row.iter()
                .map(|v| v.numer() * (&lcm / v.denom()))
                .collect()
        })
        .collect();
    let mut sign = 1i32;
    let mut prev_pivot = BigInt::one();
    for col in 0..n {
        let pivot_row = match (col..n).find(|&r| !m[r][col].is_zero()) {
            Some(r) => r,
            None => return Rat::zero(),
        };
        if pivot_row != col {
            m.swap(col, pivot_row);
            sign = -sign;
        }
        let pivot = m[col][col].clone();
        for r in col + 1..n {
            for c in col + 1..n {
                let num = &m[r][c] * &pivot - &m[r][col] * &m[col][c];
                m[r][c] = num / &prev_pivot;
            }
            m[r][col] = BigInt::zero();
        }
        prev_pivot = pivot;
    }
    let det_int = Rat::from_integer(m[n - 1][n - 1].clone());
    let det = det_int / scale;
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// Numerical rank with threshold `RANK_TOL_FACTOR * sigma_max * max(n, N)`.
///
/// The matrix is first equilibrated by row and column sup-norms (diagonal
/// scaling never changes the exact rank but tames the wild column scales of
/// high-degree polynomial bases); the threshold applies to the singular
/// values of the equilibrated matrix.
pub fn rank_f64(matrix: &[Vec<f64>]) -> usize {
    if matrix.is_empty() || matrix[0].is_empty() {
        return 0;
    }
    let rows = matrix.len();
    let cols = matrix[0].len();
    let mut m = DMatrix::from_fn(rows, cols, |i, j| matrix[i][j]);
    for i in 0..rows {
        let sup = (0..cols).map(|j| m[(i, j)].abs()).fold(0.0f64, f64::max);
        if sup > 0.0 {
            for j in 0..cols {
                m[(i, j)] /= sup;
            }
        }
    }
    for j in 0..cols {
        let sup = (0..rows).map(|i| m[(i, j)].abs()).fold(0.0f64, f64::max);
        if sup > 0.0 {
            for i in 0..rows {
                m[(i, j)] /= sup;
            }
        }
    }
    let svd = m.svd(false, false);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let tau = RANK_TOL_FACTOR * sigma_max * rows.max(cols) as f64;
    svd.singular_values.iter().filter(|&&s| s > tau).count()
}

/// Exact codimension of the condition subspace: the rank of the evaluation
/// matrix over the given basis.
pub fn codimension_exact(d: &RatDiagram, basis: &Basis) -> Result<usize, FuncSpaceError> {
    Ok(rank_exact(&eval_matrix_exact(d, basis)?))
}

/// Float-mode codimension; never used for certification.
pub fn codimension_float(d: &F64Diagram, basis: &Basis) -> Result<usize, FuncSpaceError> {
    Ok(rank_f64(&eval_matrix_f64(d, basis)?))
}

/// Endpoint grid for random diagrams: multiples of 1/64 in [-10, 10].
pub fn random_grid_rat(rng: &mut impl Rng) -> Rat {
    let numer = rng.gen_range(-640i64..=640);
    crate::scalar::ratio(numer, 64)
}

/// Samples a non-resonant diagram with endpoints on the 1/64-grid in
/// [-10, 10], resampling until the diagram is valid and non-resonant.
pub fn sample_nonresonant_diagram(n: usize, rng: &mut impl Rng) -> RatDiagram {
    loop {
        let mut pairs = Vec::with_capacity(n);
        for _ in 0..n {
            pairs.push((random_grid_rat(rng), random_grid_rat(rng)));
        }
        match ChordDiagram::new(pairs) {
            Ok(d) if !d.is_resonant() && d.n() == n => return d,
            _ => continue,
        }
    }
}

/// Samples non-resonant diagrams and checks that their exact codimension in
/// `pp:N` equals `n` every time (interpolation guarantees this whenever
/// `N >= 2n - 1`). Returns a report listing any failures.
pub fn verify_prop1(n: usize, big_n: usize, trials: usize, seed: u64) -> Result<Report, FuncSpaceError> {
    if n == 0 || big_n + 1 < 2 * n {
        return Err(FuncSpaceError::PreconditionViolation(format!(
            "need n >= 1 and N >= 2n-1, got n={n}, N={big_n}"
        )));
    }
    let basis = polynomial_space(big_n)?;
    let start = std::time::Instant::now();
    let mut failures = Vec::new();
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let d = sample_nonresonant_diagram(n, &mut rng);
        let rank = codimension_exact(&d, &basis)?;
        if rank != n {
            failures.push(json!({
                "trial": trial,
                "diagram": d.to_json(),
                "rank": rank,
            }));
        }
    }
    Ok(Report::new("verify_prop1")
        .with_params(json!({ "n": n, "N": big_n, "trials": trials, "seed": seed }))
        .with_failures(failures)
        .with_count("trials", trials as u64)
        .finish(start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, ratio};

    fn rd(pairs: &[(i64, i64)]) -> RatDiagram {
        ChordDiagram::new(pairs.iter().map(|&(a, b)| (rat(a), rat(b))).collect()).unwrap()
    }

    #[test]
    fn parse_basis_flags_exactness() {
        let b = parse_basis("x, x^2, x^3").unwrap();
        assert!(b.exact);
        assert_eq!(b.dim(), 3);
        let b = parse_basis("sin(x), x*exp(x)").unwrap();
        assert!(!b.exact);
        assert_eq!(b.dim(), 2);
        assert!(matches!(
            parse_basis("x +").unwrap_err(),
            FuncSpaceError::Expr(ExprError::Syntax { pos: 3, .. })
        ));
    }

    #[test]
    fn parse_basis_handles_comments_and_newlines() {
        let b = parse_basis("# polynomial part\nx\nx^2 # quadratic\n\nx^3, x^4").unwrap();
        assert_eq!(b.dim(), 4);
    }

    #[test]
    fn polynomial_space_examples() {
        assert_eq!(polynomial_space(2).unwrap().dim(), 2);
        assert_eq!(polynomial_space(5).unwrap().dim(), 5);
        assert!(matches!(
            polynomial_space(0).unwrap_err(),
            FuncSpaceError::InvalidDimension
        ));
    }

    #[test]
    fn eval_matrix_rows() {
        let pp2 = polynomial_space(2).unwrap();
        let m = eval_matrix_exact(&rd(&[(-1, 1)]), &pp2).unwrap();
        assert_eq!(m, vec![vec![rat(2), rat(0)]]);

        let empty = ChordDiagram::new(Vec::<(Rat, Rat)>::new()).unwrap();
        let m = eval_matrix_exact(&empty, &pp2).unwrap();
        assert!(m.is_empty());

        // Rows follow canonical chord order: (-1,3) sorts before (0,2).
        let m = eval_matrix_exact(&rd(&[(0, 2), (-1, 3)]), &pp2).unwrap();
        assert_eq!(m, vec![vec![rat(4), rat(8)], vec![rat(2), rat(4)]]);
    }

    #[test]
    fn exact_mode_requires_exact_basis() {
        let trig = parse_basis("sin(x)").unwrap();
        assert!(matches!(
            eval_matrix_exact(&rd(&[(0, 1)]), &trig).unwrap_err(),
            FuncSpaceError::ExactnessViolation
        ));
    }

    #[test]
    fn codimension_examples() {
        let pp2 = polynomial_space(2).unwrap();
        assert_eq!(codimension_exact(&rd(&[(-1, 1), (-2, 2)]), &pp2).unwrap(), 1);
        let pp4 = polynomial_space(4).unwrap();
        assert_eq!(
            codimension_exact(&rd(&[(-1, 1), (-2, 2), (-3, 3)]), &pp4).unwrap(),
            2
        );
        let pp5 = polynomial_space(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..25 {
            let d = sample_nonresonant_diagram(3, &mut rng);
            assert_eq!(codimension_exact(&d, &pp5).unwrap(), 3);
        }
    }

    #[test]
    fn det_exact_small_cases() {
        let m = vec![vec![rat(1), rat(2)], vec![rat(3), rat(4)]];
        assert_eq!(det_exact(&m), rat(-2));
        let m = vec![vec![rat(0), rat(1)], vec![rat(1), rat(0)]];
        assert_eq!(det_exact(&m), rat(-1));
        let m = vec![
            vec![ratio(1, 2), rat(1), rat(0)],
            vec![rat(0), ratio(1, 3), rat(1)],
            vec![rat(1), rat(0), ratio(1, 5)],
        ];
        // det = (1/2)(1/3)(1/5) + 1*1*1 = 1/30 + 1 = 31/30.
        assert_eq!(det_exact(&m), ratio(31, 30));
        let singular = vec![vec![rat(1), rat(2)], vec![rat(2), rat(4)]];
        assert_eq!(det_exact(&singular), rat(0));
    }

    #[test]
    fn rank_exact_handles_rational_entries() {
        let m = vec![
            vec![ratio(1, 2), ratio(1, 3)],
            vec![ratio(3, 2), rat(2)],
            vec![rat(2), ratio(4, 3)],
        ];
        // Row 3 = 4 * row 1, row 2 is independent of row 1.
        assert_eq!(rank_exact(&m), 2);
        let singular = vec![vec![rat(1), rat(2)], vec![rat(2), rat(4)]];
        assert_eq!(rank_exact(&singular), 1);
        assert_eq!(rank_exact(&[]), 0);
    }

    #[test]
    fn float_rank_agrees_with_exact_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let n = rng.gen_range(1..=8);
            let nn = rng.gen_range(1..=8usize);
            let basis = polynomial_space(nn).unwrap();
            let d = sample_nonresonant_diagram(n, &mut rng);
            let exact = codimension_exact(&d, &basis).unwrap();
            let float = codimension_float(&d.approx(), &basis).unwrap();
            assert_eq!(exact, float, "diagram {d} over pp:{nn}");
        }
    }

    #[test]
    fn rank_invariance_under_reordering() {
        let pp3 = polynomial_space(3).unwrap();
        let d1 = rd(&[(0, 1), (2, 5), (-3, 4)]);
        let d2 = rd(&[(2, 5), (-3, 4), (0, 1)]);
        assert_eq!(
            codimension_exact(&d1, &pp3).unwrap(),
            codimension_exact(&d2, &pp3).unwrap()
        );
    }

    #[test]
    fn equivalent_diagrams_share_codimension() {
        // Same canonical partition => same row space.
        let pp4 = polynomial_space(4).unwrap();
        let d1 = rd(&[(0, 1), (1, 2), (4, 5)]);
        let d2 = rd(&[(0, 2), (0, 1), (4, 5)]);
        assert_eq!(d1.canonical_partition(), d2.canonical_partition());
        assert_eq!(
            codimension_exact(&d1, &pp4).unwrap(),
            codimension_exact(&d2, &pp4).unwrap()
        );
    }

    #[test]
    fn prop1_smoke() {
        let report = verify_prop1(2, 3, 50, 11).unwrap();
        assert_eq!(report.failures.len(), 0);
        assert!(verify_prop1(3, 4, 1, 0).is_err());
    }

    #[test]
    fn codimension_bounded_by_free_codimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let n = rng.gen_range(1..=6);
            let nn = rng.gen_range(1..=6usize);
            let basis = polynomial_space(nn).unwrap();
            let mut pairs = Vec::new();
            for _ in 0..n {
                pairs.push((random_grid_rat(&mut rng), random_grid_rat(&mut rng)));
            }
            let d = match ChordDiagram::new(pairs) {
                Ok(d) => d,
                Err(_) => continue,
            };
            let rank = codimension_exact(&d, &basis).unwrap();
            assert!(rank <= d.codimension_free().min(basis.dim()));
        }
    }
}
