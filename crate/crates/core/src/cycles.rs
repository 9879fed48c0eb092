//! Square-tree cycle families of planar configurations, built in exact
//! rational arithmetic.
//!
//! The depth-1 family is a pair of opposite points on the boundary square
//! with vertices `(+-1, +-1)`. A depth-j configuration glues two depth-(j-1)
//! configurations by the affine maps `X -> A + eps * chi(A)^{u_j} X` and
//! `X -> -A + eps * chi(-A)^{u_j} X`, where `A` is a point of the square and
//! `chi` dampens the contraction near two opposite sides. The exponents come
//! from the recursion `u_2 = 1, T_2 = 2`, `u_j = u_{j-1} + T_{j-1} + 2`,
//! `T_j = u_j + T_{j-1} + 1`; the smallest participating square then has
//! side at least `2 eps^{T_j}`, and after a translation `Z = (u, v)` with
//! `v - u > 8` every configuration becomes a non-resonant chord diagram.
//! All coordinates stay rational; no resonance predicate ever uses floats.

use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::diagram::ChordDiagram;
use crate::report::Report;
use crate::scalar::{format_rat, rat, rat_pow, ratio};
use crate::{Rat, RatDiagram};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CycleError {
    /// The construction is validated for eps <= 1/10 only.
    #[error("eps too large: need 0 < eps <= 1/10")]
    EpsTooLarge,
    /// Shifts must satisfy v - u > 8 to clear the main diagonal.
    #[error("shift too small: need v - u > 8")]
    ShiftTooSmall,
    #[error("bad parameter: {0}")]
    BadParameter(String),
}

/// Values of the exponent recursion at depth `j >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ut {
    pub j: u32,
    pub u: u64,
    pub t: u64,
}

/// `u_2 = 1, T_2 = 2; u_j = u_{j-1} + T_{j-1} + 2, T_j = u_j + T_{j-1} + 1`.
pub fn ut_sequence(j: u32) -> Ut {
    assert!(j >= 2, "the recursion starts at j = 2");
    let (mut u, mut t) = (1u64, 2u64);
    for _ in 3..=j {
        u = u + t + 2;
        t = u + t + 1;
    }
    Ut { j, u, t }
}

/// Point of the boundary square with vertices `(+-1, +-1)`, by arc-length
/// parameter `t` in `[0, 8)` starting at `(-1, -1)` and running through
/// `(-1, 1)`, `(1, 1)`, `(1, -1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxPoint {
    t: Rat,
}

impl BoxPoint {
    /// Wraps the parameter into `[0, 8)`.
    pub fn new(t: Rat) -> Self {
        let eight = rat(8);
        let mut t = t % &eight;
        if t.is_negative() {
            t += &eight;
        }
        BoxPoint { t }
    }

    pub fn param(&self) -> &Rat {
        &self.t
    }

    /// The antipodal point: coordinates negated, parameter shifted by 4.
    pub fn opposite(&self) -> BoxPoint {
        BoxPoint::new(&self.t + rat(4))
    }

    /// Exact coordinates on the square boundary.
    pub fn coords(&self) -> (Rat, Rat) {
        let t = &self.t;
        let one = Rat::one();
        if *t < rat(2) {
            (-one, t - rat(1))
        } else if *t < rat(4) {
            (t - rat(3), one)
        } else if *t < rat(6) {
            (one, rat(5) - t)
        } else {
            (rat(7) - t, -one)
        }
    }
}

/// Contraction profile on the square: `eps` on the two sides adjacent to
/// `(-1,-1)`, `1` on the two sides adjacent to `(1,1)`, linear in arc length
/// across the `eps`-neighbourhoods of the corners `(-1,1)` and `(1,-1)`.
pub fn chi(p: &BoxPoint, eps: &Rat) -> Rat {
    assert!(
        eps.is_positive() && *eps < Rat::one(),
        "chi needs 0 < eps < 1"
    );
    let t = p.param();
    let lo_end = rat(2) - eps; // last eps-pure point before corner (-1, 1)
    let hi_start = rat(2) + eps;
    let one_end = rat(6) - eps;
    let eps_start = rat(6) + eps;
    if *t <= lo_end {
        eps.clone()
    } else if *t < hi_start {
        // climb eps -> 1 across the corner (-1, 1)
        eps + (t - lo_end) * (Rat::one() - eps) / (rat(2) * eps)
    } else if *t <= one_end {
        Rat::one()
    } else if *t < eps_start {
        // descend 1 -> eps across the corner (1, -1)
        Rat::one() - (t - one_end) * (Rat::one() - eps) / (rat(2) * eps)
    } else {
        eps.clone()
    }
}

/// Parameters of one configuration: a perfect binary tree of box points in
/// heap order (`params[0]` is the root; node `i` has children `2i+1`,
/// `2i+2`). A depth-j tree has `2^j - 1` parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleTree {
    depth: u32,
    params: Vec<BoxPoint>,
}

impl CycleTree {
    pub fn new(depth: u32, params: Vec<BoxPoint>) -> Result<Self, CycleError> {
        if depth == 0 || depth > 20 {
            return Err(CycleError::BadParameter(
                "depth must be between 1 and 20".into(),
            ));
        }
        let expected = (1usize << depth) - 1;
        if params.len() != expected {
            return Err(CycleError::BadParameter(format!(
                "depth-{depth} tree needs {expected} box points, got {}",
                params.len()
            )));
        }
        Ok(CycleTree { depth, params })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn params(&self) -> &[BoxPoint] {
        &self.params
    }

    pub fn to_json(&self) -> Value {
        json!({
            "depth": self.depth,
            "params": self
                .params
                .iter()
                .map(|p| Value::String(format_rat(p.param())))
                .collect::<Vec<_>>(),
        })
    }
}

/// Axis-aligned square, given by center and half side length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Square {
    pub center: (Rat, Rat),
    pub half_side: Rat,
}

/// A constructed configuration: `2^j` distinct rational points plus the
/// `2^j - 1` squares participating in the construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config2d {
    pub points: Vec<(Rat, Rat)>,
    pub squares: Vec<Square>,
    pub shift: Option<(Rat, Rat)>,
}

impl Config2d {
    /// Interprets the points as chords `(a, b)`; valid after a shift into
    /// the half-plane `a < b`.
    pub fn to_diagram(&self) -> Result<RatDiagram, crate::diagram::DiagramError> {
        ChordDiagram::new(self.points.clone())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "points": self
                .points
                .iter()
                .map(|(x, y)| json!([format_rat(x), format_rat(y)]))
                .collect::<Vec<_>>(),
            "squares": self
                .squares
                .iter()
                .map(|s| json!({
                    "center": [format_rat(&s.center.0), format_rat(&s.center.1)],
                    "half_side": format_rat(&s.half_side),
                }))
                .collect::<Vec<_>>(),
            "shift": self
                .shift
                .as_ref()
                .map(|(u, v)| json!([format_rat(u), format_rat(v)])),
        })
    }
}

/// Largest eps the construction accepts.
pub fn max_eps() -> Rat {
    ratio(1, 10)
}

/// Builds the configuration of a parameter tree in exact arithmetic.
///
/// Validates `0 < eps <= 1/10`; under that bound the two halves of every
/// gluing step are separated, so the `2^j` points are automatically
/// pairwise distinct.
pub fn build_config(tree: &CycleTree, eps: &Rat) -> Result<Config2d, CycleError> {
    if !eps.is_positive() || *eps > max_eps() {
        return Err(CycleError::EpsTooLarge);
    }
    let depth = tree.depth;
    // Exponents u_l for levels l = 2..=depth.
    let mut u_of_level = vec![0u64; depth as usize + 1];
    for level in 2..=depth {
        u_of_level[level as usize] = ut_sequence(level).u;
    }
    let mut points = Vec::with_capacity(1 << depth);
    let mut squares = Vec::with_capacity((1 << depth) - 1);
    build_rec(
        tree,
        eps,
        &u_of_level,
        0,
        depth,
        (Rat::zero(), Rat::zero()),
        Rat::one(),
        &mut points,
        &mut squares,
    );
    for i in 0..points.len() {
        for k in i + 1..points.len() {
            if points[i] == points[k] {
                return Err(CycleError::BadParameter(
                    "construction produced coincident points".into(),
                ));
            }
        }
    }
    Ok(Config2d {
        points,
        squares,
        shift: None,
    })
}

#[allow(clippy::too_many_arguments)]
fn build_rec(
    tree: &CycleTree,
    eps: &Rat,
    u_of_level: &[u64],
    node: usize,
    levels_left: u32,
    center: (Rat, Rat),
    scale: Rat,
    points: &mut Vec<(Rat, Rat)>,
    squares: &mut Vec<Square>,
) {
    squares.push(Square {
        center: center.clone(),
        half_side: scale.clone(),
    });
    let a = &tree.params[node];
    let (ax, ay) = a.coords();
    if levels_left == 1 {
        points.push((&center.0 + &scale * &ax, &center.1 + &scale * &ay));
        points.push((&center.0 - &scale * &ax, &center.1 - &scale * &ay));
        return;
    }
    let u = u_of_level[levels_left as usize];
    let scale_plus = eps * rat_pow(&chi(a, eps), u);
    let scale_minus = eps * rat_pow(&chi(&a.opposite(), eps), u);
    build_rec(
        tree,
        eps,
        u_of_level,
        2 * node + 1,
        levels_left - 1,
        (&center.0 + &scale * &ax, &center.1 + &scale * &ay),
        &scale * scale_plus,
        points,
        squares,
    );
    build_rec(
        tree,
        eps,
        u_of_level,
        2 * node + 2,
        levels_left - 1,
        (&center.0 - &scale * &ax, &center.1 - &scale * &ay),
        &scale * scale_minus,
        points,
        squares,
    );
}

/// Side length of the smallest square participating in the construction.
/// For depth >= 2 the lower bound `2 eps^{T_j}` is asserted.
pub fn min_square_side(tree: &CycleTree, eps: &Rat) -> Result<Rat, CycleError> {
    let config = build_config(tree, eps)?;
    let min_half = config
        .squares
        .iter()
        .map(|s| &s.half_side)
        .min()
        .expect("at least the basic square")
        .clone();
    let side = rat(2) * min_half;
    if tree.depth >= 2 {
        let t_j = ut_sequence(tree.depth).t;
        assert!(
            side >= rat(2) * rat_pow(eps, t_j),
            "smallest square side {} under the 2 eps^T_j bound",
            side
        );
    }
    Ok(side)
}

/// Translates a configuration by `Z = (u, v)`; requires `v - u > 8`, which
/// puts every point strictly above the diagonal (`a < b` as a chord).
pub fn shift_config(c: &Config2d, z: (Rat, Rat)) -> Result<Config2d, CycleError> {
    let (u, v) = &z;
    if (v - u) <= rat(8) {
        return Err(CycleError::ShiftTooSmall);
    }
    let points: Vec<(Rat, Rat)> = c
        .points
        .iter()
        .map(|(x, y)| (x + u, y + v))
        .collect();
    for (a, b) in &points {
        assert!(a < b, "shifted point below the diagonal");
    }
    let squares = c
        .squares
        .iter()
        .map(|s| Square {
            center: (&s.center.0 + u, &s.center.1 + v),
            half_side: s.half_side.clone(),
        })
        .collect();
    Ok(Config2d {
        points,
        squares,
        shift: Some(z),
    })
}

/// Kind of a chain segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegKind {
    /// Tangent against the horizontal direction below delta.
    Horizontal,
    /// Tangent against the vertical direction below delta.
    Vertical,
}

/// Closed chain of strictly alternating almost-horizontal and
/// almost-vertical segments with endpoints in the configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaChain {
    /// Point indices `p_0, ..., p_{k-1}`; segment i joins `p_i` to
    /// `p_{i+1 mod k}`.
    pub points: Vec<usize>,
    /// `kinds[i]` is the kind of segment i; kinds alternate and k is even.
    pub kinds: Vec<SegKind>,
}

impl DeltaChain {
    /// Replays the chain against a configuration at tolerance `delta`.
    pub fn replays_on(&self, c: &Config2d, delta: &Rat) -> bool {
        let k = self.points.len();
        if k < 4 || k % 2 != 0 || self.kinds.len() != k {
            return false;
        }
        for i in 0..k {
            if self.kinds[i] == self.kinds[(i + 1) % k] {
                return false;
            }
            let p = &c.points[self.points[i]];
            let q = &c.points[self.points[(i + 1) % k]];
            if !segment_is(p, q, self.kinds[i], delta) {
                return false;
            }
        }
        true
    }
}

/// Exact tangent test: almost-horizontal means `|dy| < delta * |dx|`,
/// almost-vertical means `|dx| < delta * |dy|` (slope-infinite segments are
/// vertical).
fn segment_is(p: &(Rat, Rat), q: &(Rat, Rat), kind: SegKind, delta: &Rat) -> bool {
    let dx = (&q.0 - &p.0).abs();
    let dy = (&q.1 - &p.1).abs();
    match kind {
        SegKind::Horizontal => dy < delta * dx,
        SegKind::Vertical => dx < delta * dy,
    }
}

/// Searches for a closed chain of strictly alternating delta-vertical and
/// delta-horizontal segments with endpoints in the configuration. Points may
/// repeat along the chain; since `delta < 1` no segment is both kinds, so
/// any directed cycle in the (point, last-kind) state graph is a valid
/// witness and the shortest possible chain has four segments.
pub fn is_delta_resonant(c: &Config2d, delta: &Rat) -> Option<DeltaChain> {
    assert!(
        delta.is_positive() && *delta < Rat::one(),
        "need 0 < delta < 1"
    );
    let m = c.points.len();
    if m < 2 {
        return None;
    }
    let mut h_edges: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut v_edges: Vec<Vec<usize>> = vec![Vec::new(); m];
    for i in 0..m {
        for k in i + 1..m {
            if segment_is(&c.points[i], &c.points[k], SegKind::Horizontal, delta) {
                h_edges[i].push(k);
                h_edges[k].push(i);
            } else if segment_is(&c.points[i], &c.points[k], SegKind::Vertical, delta) {
                v_edges[i].push(k);
                v_edges[k].push(i);
            }
        }
    }
    // State 2*p + 0: at point p, arrived horizontally (next must be vertical);
    // state 2*p + 1: arrived vertically (next horizontal).
    let succ = |state: usize| -> &Vec<usize> {
        let p = state / 2;
        if state % 2 == 0 {
            &v_edges[p]
        } else {
            &h_edges[p]
        }
    };
    let next_state = |state: usize, q: usize| -> usize {
        if state % 2 == 0 {
            2 * q + 1
        } else {
            2 * q
        }
    };
    // Iterative DFS for a directed cycle.
    const WHITE: u8 = 0;
    const GRAY: u8 = 1;
    const BLACK: u8 = 2;
    let mut color = vec![WHITE; 2 * m];
    let mut parent = vec![usize::MAX; 2 * m];
    for start in 0..2 * m {
        if color[start] != WHITE {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        color[start] = GRAY;
        while let Some(&(state, next_i)) = stack.last() {
            let succs = succ(state);
            if next_i >= succs.len() {
                color[state] = BLACK;
                stack.pop();
                continue;
            }
            stack.last_mut().expect("nonempty stack").1 += 1;
            let q = succs[next_i];
            let ns = next_state(state, q);
            match color[ns] {
                WHITE => {
                    color[ns] = GRAY;
                    parent[ns] = state;
                    stack.push((ns, 0));
                }
                GRAY => {
                    // Cycle: ns -> ... -> state -> ns.
                    let mut states = vec![state];
                    let mut cur = state;
                    while cur != ns {
                        cur = parent[cur];
                        states.push(cur);
                    }
                    states.reverse();
                    let k = states.len();
                    let points: Vec<usize> = states.iter().map(|s| s / 2).collect();
                    // kinds[i] = kind of the segment from points[i] to
                    // points[i+1] = arrival kind of states[i+1].
                    let kinds: Vec<SegKind> = (0..k)
                        .map(|i| {
                            if states[(i + 1) % k] % 2 == 0 {
                                SegKind::Horizontal
                            } else {
                                SegKind::Vertical
                            }
                        })
                        .collect();
                    return Some(DeltaChain { points, kinds });
                }
                _ => {}
            }
        }
    }
    None
}

/// Uniform random box point with parameter denominator at most `2^16`.
pub fn sample_box_point(rng: &mut impl Rng) -> BoxPoint {
    let k = rng.gen_range(0..(8u64 << 16));
    BoxPoint::new(Rat::new(k.into(), (1u64 << 16).into()))
}

/// Uniform random depth-j parameter tree.
pub fn sample_tree(depth: u32, rng: &mut impl Rng) -> CycleTree {
    let count = (1usize << depth) - 1;
    let params = (0..count).map(|_| sample_box_point(rng)).collect();
    CycleTree::new(depth, params).expect("sampled tree is well-formed")
}

fn check_eps(j: u32, eps: &Rat) -> Result<(), CycleError> {
    if j < 2 {
        return Err(CycleError::BadParameter("need j >= 2".into()));
    }
    if !eps.is_positive() || *eps > max_eps() {
        return Err(CycleError::EpsTooLarge);
    }
    Ok(())
}

/// Samples depth-j trees and asserts none of their configurations admits an
/// `eps^{u_j + 1}`-resonant chain. Violations are reported with a replayable
/// witness (expected none).
pub fn verify_mtool2(j: u32, eps: &Rat, samples: usize, seed: u64) -> Result<Report, CycleError> {
    check_eps(j, eps)?;
    let start = std::time::Instant::now();
    let delta = rat_pow(eps, ut_sequence(j).u + 1);
    let mut failures = Vec::new();
    for trial in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let tree = sample_tree(j, &mut rng);
        let config = build_config(&tree, eps)?;
        if let Some(chain) = is_delta_resonant(&config, &delta) {
            debug_assert!(chain.replays_on(&config, &delta));
            failures.push(json!({
                "trial": trial,
                "tree": tree.to_json(),
                "chain_points": chain.points,
            }));
        }
    }
    Ok(Report::new("verify_mtool2")
        .with_params(json!({
            "j": j,
            "eps": format_rat(eps),
            "delta": format_rat(&delta),
            "samples": samples,
            "seed": seed,
        }))
        .with_failures(failures)
        .with_count("samples", samples as u64)
        .finish(start))
}

/// Samples depth-j trees, shifts their configurations by `Z`, and asserts
/// that every shifted configuration is a non-resonant chord diagram with all
/// points strictly above the diagonal and no left endpoint equal to a right
/// endpoint. Violations are reported (expected none).
pub fn verify_mtool(
    j: u32,
    eps: &Rat,
    z: (Rat, Rat),
    samples: usize,
    seed: u64,
) -> Result<Report, CycleError> {
    check_eps(j, eps)?;
    if (&z.1 - &z.0) <= rat(8) {
        return Err(CycleError::ShiftTooSmall);
    }
    let start = std::time::Instant::now();
    let mut failures = Vec::new();
    for trial in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let tree = sample_tree(j, &mut rng);
        let config = build_config(&tree, eps)?;
        let shifted = shift_config(&config, z.clone())?;
        let mut bad: Option<&str> = None;
        if !shifted.points.iter().all(|(a, b)| a < b) {
            bad = Some("point at or below the diagonal");
        }
        // No left endpoint may coincide with a right endpoint.
        if bad.is_none()
            && shifted
                .points
                .iter()
                .any(|p| shifted.points.iter().any(|q| p.0 == q.1))
        {
            bad = Some("left endpoint equals a right endpoint");
        }
        if bad.is_none() {
            match shifted.to_diagram() {
                Ok(d) => {
                    if let Some(witness) = d.resonance() {
                        debug_assert!(witness.replays_on(&d));
                        bad = Some("resonant diagram");
                    }
                }
                Err(_) => bad = Some("invalid diagram"),
            }
        }
        if let Some(reason) = bad {
            failures.push(json!({
                "trial": trial,
                "tree": tree.to_json(),
                "reason": reason,
            }));
        }
    }
    Ok(Report::new("verify_mtool")
        .with_params(json!({
            "j": j,
            "eps": format_rat(eps),
            "shift": [format_rat(&z.0), format_rat(&z.1)],
            "samples": samples,
            "seed": seed,
        }))
        .with_failures(failures)
        .with_count("samples", samples as u64)
        .finish(start))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bp(num: i64, den: i64) -> BoxPoint {
        BoxPoint::new(ratio(num, den))
    }

    #[test]
    fn recursion_values() {
        assert_eq!(ut_sequence(2), Ut { j: 2, u: 1, t: 2 });
        assert_eq!(ut_sequence(3), Ut { j: 3, u: 5, t: 8 });
        assert_eq!(ut_sequence(4), Ut { j: 4, u: 15, t: 24 });
    }

    #[test]
    fn box_point_coordinates_and_opposites() {
        assert_eq!(bp(0, 1).coords(), (rat(-1), rat(-1)));
        assert_eq!(bp(4, 1).coords(), (rat(1), rat(1)));
        assert_eq!(bp(3, 1).coords(), (rat(0), rat(1)));
        assert_eq!(bp(7, 1).coords(), (rat(0), rat(-1)));
        for k in 0..16 {
            let p = bp(k, 2);
            let (x, y) = p.coords();
            let (ox, oy) = p.opposite().coords();
            assert_eq!((ox, oy), (-x, -y), "t = {k}/2");
        }
    }

    #[test]
    fn chi_profile() {
        let eps = ratio(1, 10);
        // (1, 1) sits in the middle of the 1-region.
        assert_eq!(chi(&bp(4, 1), &eps), rat(1));
        // (-1, -1) is in the eps-region.
        assert_eq!(chi(&bp(0, 1), &eps), eps.clone());
        // Mid-transition at the corner (-1, 1): (1 + eps) / 2.
        assert_eq!(chi(&bp(2, 1), &eps), ratio(11, 20));
        // Values stay within [eps, 1] across the whole square.
        for k in 0..160 {
            let v = chi(&bp(k, 20), &eps);
            assert!(v >= eps && v <= rat(1), "t = {k}/20");
        }
        // Just inside the pure regions.
        assert_eq!(chi(&bp(19, 10), &eps), eps.clone());
        assert_eq!(chi(&bp(21, 10), &eps), rat(1));
        assert_eq!(chi(&bp(59, 10), &eps), rat(1));
        assert_eq!(chi(&bp(61, 10), &eps), eps);
    }

    #[test]
    fn depth_one_is_an_opposite_pair() {
        let tree = CycleTree::new(1, vec![bp(4, 1)]).unwrap();
        let c = build_config(&tree, &ratio(1, 10)).unwrap();
        assert_eq!(c.points, vec![(rat(1), rat(1)), (rat(-1), rat(-1))]);
        assert_eq!(c.squares.len(), 1);
        assert_eq!(
            min_square_side(&tree, &ratio(1, 10)).unwrap(),
            rat(2)
        );
    }

    #[test]
    fn point_and_square_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for depth in 1..=4u32 {
            let tree = sample_tree(depth, &mut rng);
            let c = build_config(&tree, &ratio(1, 10)).unwrap();
            assert_eq!(c.points.len(), 1 << depth);
            assert_eq!(c.squares.len(), (1 << depth) - 1);
        }
    }

    #[test]
    fn eps_bound_enforced() {
        let tree = CycleTree::new(1, vec![bp(1, 1)]).unwrap();
        assert_eq!(
            build_config(&tree, &ratio(1, 5)).unwrap_err(),
            CycleError::EpsTooLarge
        );
        assert_eq!(
            build_config(&tree, &rat(0)).unwrap_err(),
            CycleError::EpsTooLarge
        );
    }

    #[test]
    fn diameter_bound_pre_shift() {
        // |p|^2 <= 2 / (1 - eps)^2, exactly.
        let eps = ratio(1, 10);
        let bound = rat(2) / (rat_pow(&(Rat::one() - &eps), 2));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let tree = sample_tree(3, &mut rng);
            let c = build_config(&tree, &eps).unwrap();
            for (x, y) in &c.points {
                let norm2 = x * x + y * y;
                assert!(norm2 <= bound);
            }
        }
    }

    #[test]
    fn min_side_respects_the_lemma_bound() {
        let eps = ratio(1, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for depth in 2..=3u32 {
            let t_j = ut_sequence(depth).t;
            let bound = rat(2) * rat_pow(&eps, t_j);
            for _ in 0..30 {
                let tree = sample_tree(depth, &mut rng);
                let side = min_square_side(&tree, &eps).unwrap();
                assert!(side >= bound, "depth {depth}: {side} < bound");
            }
        }
    }

    #[test]
    fn shift_validation() {
        let tree = CycleTree::new(1, vec![bp(1, 1)]).unwrap();
        let c = build_config(&tree, &ratio(1, 10)).unwrap();
        assert!(shift_config(&c, (rat(0), rat(9))).is_ok());
        assert_eq!(
            shift_config(&c, (rat(0), rat(8))).unwrap_err(),
            CycleError::ShiftTooSmall
        );
        assert!(shift_config(&c, (rat(-5), rat(4))).is_ok());
        let shifted = shift_config(&c, (rat(0), rat(9))).unwrap();
        assert!(shifted.points.iter().all(|(a, b)| a < b));
    }

    #[test]
    fn rectangle_is_delta_resonant() {
        let c = Config2d {
            points: vec![
                (rat(0), rat(0)),
                (rat(1), rat(0)),
                (rat(1), rat(1)),
                (rat(0), rat(1)),
            ],
            squares: vec![],
            shift: None,
        };
        let delta = ratio(1, 100);
        let chain = is_delta_resonant(&c, &delta).expect("axis-aligned rectangle");
        assert_eq!(chain.points.len() % 2, 0);
        assert!(chain.points.len() >= 4);
        assert!(chain.replays_on(&c, &delta));
    }

    #[test]
    fn generic_quadruple_is_not_resonant() {
        let c = Config2d {
            points: vec![
                (rat(0), rat(0)),
                (rat(1), rat(3)),
                (rat(2), rat(7)),
                (rat(5), rat(1)),
            ],
            squares: vec![],
            shift: None,
        };
        assert!(is_delta_resonant(&c, &ratio(1, 100)).is_none());
    }

    #[test]
    fn two_points_never_resonate() {
        let c = Config2d {
            points: vec![(rat(0), rat(0)), (rat(1), rat(0))],
            squares: vec![],
            shift: None,
        };
        assert!(is_delta_resonant(&c, &ratio(1, 2)).is_none());
    }

    #[test]
    fn delta_monotonicity() {
        // Resonant at delta implies resonant at any delta' >= delta, with
        // the same witness replaying.
        let c = Config2d {
            points: vec![
                (rat(0), rat(0)),
                (rat(100), rat(1)),
                (rat(101), rat(99)),
                (rat(1), rat(100)),
            ],
            squares: vec![],
            shift: None,
        };
        let small = ratio(2, 100);
        let larger = ratio(1, 10);
        let chain = is_delta_resonant(&c, &small).expect("near-rectangle");
        assert!(chain.replays_on(&c, &larger));
        assert!(is_delta_resonant(&c, &larger).is_some());
    }

    #[test]
    fn mtool2_small_run_is_clean() {
        let r = verify_mtool2(2, &ratio(1, 10), 100, 5).unwrap();
        assert!(r.ok());
    }

    #[test]
    fn mtool_small_run_is_clean() {
        let r = verify_mtool(2, &ratio(1, 10), (rat(0), rat(9)), 50, 6).unwrap();
        assert!(r.ok());
        assert!(matches!(
            verify_mtool(2, &ratio(1, 10), (rat(0), rat(8)), 1, 0),
            Err(CycleError::ShiftTooSmall)
        ));
    }

    #[test]
    fn strict_resonance_of_shift_implies_delta_resonance() {
        // Translation invariance consistency: if a shifted configuration
        // were strictly resonant, the unshifted one would be delta-resonant
        // for every delta. Checked on sampled configurations via the
        // contrapositive: no shifted sample is resonant and no unshifted
        // sample is delta-resonant even at a generous delta.
        let eps = ratio(1, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let tree = sample_tree(2, &mut rng);
            let c = build_config(&tree, &eps).unwrap();
            let delta = rat_pow(&eps, ut_sequence(2).u + 1);
            let shifted = shift_config(&c, (rat(0), rat(9))).unwrap();
            let strict = shifted.to_diagram().unwrap().is_resonant();
            let delta_res = is_delta_resonant(&c, &delta).is_some();
            assert!(!strict);
            assert!(!delta_res);
        }
    }
}
