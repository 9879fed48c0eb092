//! Chord diagrams and their endpoint combinatorics.
//!
//! A chord is an unordered pair of distinct points on the line, stored as
//! `(a, b)` with `a < b`; a diagram is a set of pairwise distinct chords.
//! The diagram's *endpoint graph* has the distinct endpoint values as
//! vertices and the chords as edges. A diagram is *resonant* when that graph
//! contains a cycle (equivalently, a closed chain of k >= 3 distinct chords
//! with consecutive shared endpoints), in which case the equality conditions
//! `f(a_i) = f(b_i)` stop being independent already in `C^0`.

use std::cmp::Ordering;
use std::fmt;

use serde_json::Value;
use thiserror::Error;

use crate::scalar::{parse_rat, Coord};
use crate::Rat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    /// A chord must join two distinct points.
    #[error("degenerate chord: both endpoints equal")]
    DegenerateChord,
    /// Chords of a diagram are pairwise distinct as unordered pairs.
    #[error("duplicate chord in diagram")]
    DuplicateChord,
    /// The operation is only defined for non-resonant diagrams.
    #[error("resonant input diagram")]
    ResonantInput,
    /// Every endpoint of the diagram must appear in the supplied grid.
    #[error("diagram endpoint missing from grid")]
    EndpointNotInGrid,
    /// Malformed serialized diagram.
    #[error("bad diagram encoding: {0}")]
    BadEncoding(String),
}

/// Unordered pair of distinct points, normalized so that `a < b`.
#[derive(Debug, Clone)]
pub struct Chord<S> {
    a: S,
    b: S,
}

impl<S: Coord> Chord<S> {
    pub fn new(x: S, y: S) -> Result<Self, DiagramError> {
        if x.same(&y) {
            return Err(DiagramError::DegenerateChord);
        }
        match x.total_cmp(&y) {
            Ordering::Less => Ok(Chord { a: x, b: y }),
            _ => Ok(Chord { a: y, b: x }),
        }
    }

    /// Left (smaller) endpoint.
    pub fn a(&self) -> &S {
        &self.a
    }

    /// Right (larger) endpoint.
    pub fn b(&self) -> &S {
        &self.b
    }

    pub fn same_chord(&self, other: &Self) -> bool {
        self.a.same(&other.a) && self.b.same(&other.b)
    }

    fn cmp_key(&self, other: &Self) -> Ordering {
        self.a
            .total_cmp(&other.a)
            .then_with(|| self.b.total_cmp(&other.b))
    }
}

impl<S: Coord> PartialEq for Chord<S> {
    fn eq(&self, other: &Self) -> bool {
        self.same_chord(other)
    }
}

impl<S: Coord> fmt::Display for Chord<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// Set of pairwise distinct chords.
///
/// Normally nonempty; the empty diagram is accepted as the vacuous condition
/// system (it evaluates to a `0 x N` matrix and codimension 0).
#[derive(Debug, Clone)]
pub struct ChordDiagram<S> {
    chords: Vec<Chord<S>>,
}

impl<S: Coord> PartialEq for ChordDiagram<S> {
    fn eq(&self, other: &Self) -> bool {
        self.chords.len() == other.chords.len()
            && self
                .chords
                .iter()
                .zip(&other.chords)
                .all(|(x, y)| x.same_chord(y))
    }
}

impl<S: Coord> fmt::Display for ChordDiagram<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.chords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

/// Closed chain of k >= 3 pairwise distinct chords in which consecutive
/// chords (cyclically) share an endpoint.
#[derive(Debug, Clone)]
pub struct ResonanceWitness<S> {
    /// Chords in cyclic order.
    pub chords: Vec<Chord<S>>,
    /// `shared[i]` is the endpoint common to `chords[i]` and `chords[i+1]`
    /// (cyclically).
    pub shared: Vec<S>,
}

impl<S: Coord> ResonanceWitness<S> {
    /// Replays the witness against a diagram: every chord belongs to the
    /// diagram, all are distinct, and consecutive chords share exactly the
    /// stated endpoint.
    pub fn replays_on(&self, d: &ChordDiagram<S>) -> bool {
        let k = self.chords.len();
        if k < 3 || self.shared.len() != k {
            return false;
        }
        for c in &self.chords {
            if !d.chords.iter().any(|x| x.same_chord(c)) {
                return false;
            }
        }
        for i in 0..k {
            for j in i + 1..k {
                if self.chords[i].same_chord(&self.chords[j]) {
                    return false;
                }
            }
        }
        for i in 0..k {
            let s = &self.shared[i];
            let cur = &self.chords[i];
            let next = &self.chords[(i + 1) % k];
            let on = |c: &Chord<S>| c.a().same(s) || c.b().same(s);
            if !on(cur) || !on(next) {
                return false;
            }
        }
        true
    }
}

/// Partition of the diagram's endpoints into the connected components of the
/// endpoint graph. Two non-resonant diagrams are equivalent (cut out the
/// same subalgebra) iff their partitions are equal.
#[derive(Debug, Clone)]
pub struct EndpointPartition<S> {
    /// Sorted blocks of sorted endpoint values; every block has size >= 2.
    pub blocks: Vec<Vec<S>>,
}

impl<S: Coord> PartialEq for EndpointPartition<S> {
    fn eq(&self, other: &Self) -> bool {
        self.blocks.len() == other.blocks.len()
            && self.blocks.iter().zip(&other.blocks).all(|(x, y)| {
                x.len() == y.len() && x.iter().zip(y).all(|(u, v)| u.same(v))
            })
    }
}

impl<S: Coord> EndpointPartition<S> {
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.blocks
                .iter()
                .map(|b| Value::Array(b.iter().map(|v| v.to_json()).collect()))
                .collect(),
        )
    }
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != x {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    /// Returns false when both elements were already in one set.
    fn union(&mut self, x: usize, y: usize) -> bool {
        let (mut x, mut y) = (self.find(x), self.find(y));
        if x == y {
            return false;
        }
        if self.rank[x] < self.rank[y] {
            std::mem::swap(&mut x, &mut y);
        }
        self.parent[y] = x;
        if self.rank[x] == self.rank[y] {
            self.rank[x] += 1;
        }
        true
    }
}

impl<S: Coord> ChordDiagram<S> {
    /// Builds a diagram from raw endpoint pairs, normalizing each chord and
    /// rejecting degenerate or duplicate chords.
    pub fn new(pairs: Vec<(S, S)>) -> Result<Self, DiagramError> {
        let mut chords = Vec::with_capacity(pairs.len());
        for (x, y) in pairs {
            chords.push(Chord::new(x, y)?);
        }
        chords.sort_by(|x, y| x.cmp_key(y));
        for w in chords.windows(2) {
            if w[0].same_chord(&w[1]) {
                return Err(DiagramError::DuplicateChord);
            }
        }
        Ok(ChordDiagram { chords })
    }

    /// Number of chords.
    pub fn n(&self) -> usize {
        self.chords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chords.is_empty()
    }

    /// Chords in canonical (sorted) order.
    pub fn chords(&self) -> &[Chord<S>] {
        &self.chords
    }

    /// Distinct endpoint values (sorted) and the chord edges between them.
    ///
    /// Endpoints are identified per [`Coord::same`]; for floats this groups
    /// values closer than the identification window.
    pub fn endpoint_graph(&self) -> (Vec<S>, Vec<(usize, usize)>) {
        let mut values: Vec<S> = Vec::new();
        for c in &self.chords {
            values.push(c.a().clone());
            values.push(c.b().clone());
        }
        values.sort_by(|x, y| x.total_cmp(y));
        let mut reps: Vec<S> = Vec::new();
        for v in values {
            if reps.last().map_or(true, |r| !r.same(&v)) {
                reps.push(v);
            }
        }
        let index_of =
            |v: &S| -> usize { reps.iter().position(|r| r.same(v)).expect("endpoint indexed") };
        let edges = self
            .chords
            .iter()
            .map(|c| (index_of(c.a()), index_of(c.b())))
            .collect();
        (reps, edges)
    }

    /// Resonance test. Returns a closed-chain witness when the endpoint graph
    /// contains a cycle.
    ///
    /// Chords are distinct unordered pairs, so the endpoint graph has no
    /// parallel edges and any graph cycle has length >= 3, matching the
    /// closed-chain definition exactly.
    pub fn resonance(&self) -> Option<ResonanceWitness<S>> {
        let (reps, edges) = self.endpoint_graph();
        let mut dsu = DisjointSet::new(reps.len());
        for (i, &(u, v)) in edges.iter().enumerate() {
            if !dsu.union(u, v) {
                return Some(self.extract_cycle(&reps, &edges, i, u, v));
            }
        }
        None
    }

    pub fn is_resonant(&self) -> bool {
        self.resonance().is_some()
    }

    /// Cycle through edge `closing` plus a `u`-`v` path in the forest of the
    /// earlier edges, found by DFS.
    fn extract_cycle(
        &self,
        reps: &[S],
        edges: &[(usize, usize)],
        closing: usize,
        u: usize,
        v: usize,
    ) -> ResonanceWitness<S> {
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); reps.len()];
        for (i, &(x, y)) in edges.iter().enumerate().take(closing) {
            adj[x].push((y, i));
            adj[y].push((x, i));
        }
        // DFS from u to v over the already-inserted edges.
        let mut stack = vec![(u, usize::MAX)];
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; reps.len()];
        let mut seen = vec![false; reps.len()];
        seen[u] = true;
        while let Some((at, via)) = stack.pop() {
            if at == v {
                let _ = via;
                break;
            }
            for &(next, edge) in &adj[at] {
                if !seen[next] {
                    seen[next] = true;
                    prev[next] = Some((at, edge));
                    stack.push((next, edge));
                }
            }
        }
        let mut path_edges = Vec::new();
        let mut path_nodes = vec![v];
        let mut cur = v;
        while cur != u {
            let (p, e) = prev[cur].expect("path to closing edge exists");
            path_edges.push(e);
            path_nodes.push(p);
            cur = p;
        }
        path_nodes.reverse();
        path_edges.reverse();
        // Cycle: u -> ... -> v (tree path), then the closing chord v -> u.
        let mut chord_seq: Vec<Chord<S>> =
            path_edges.iter().map(|&e| self.chords[e].clone()).collect();
        chord_seq.push(self.chords[closing].clone());
        let mut shared: Vec<S> = path_nodes[1..].iter().map(|&i| reps[i].clone()).collect();
        shared.push(reps[u].clone());
        ResonanceWitness {
            chords: chord_seq,
            shared,
        }
    }

    /// Codimension of the corresponding subalgebra of `C^0`: the number of
    /// endpoint-graph vertices minus the number of its connected components.
    /// Equals `n` exactly when the diagram is non-resonant.
    pub fn codimension_free(&self) -> usize {
        let (reps, edges) = self.endpoint_graph();
        let mut dsu = DisjointSet::new(reps.len());
        let mut components = reps.len();
        for &(u, v) in &edges {
            if dsu.union(u, v) {
                components -= 1;
            }
        }
        reps.len() - components
    }

    /// Connected components of the endpoint graph as sorted value blocks.
    pub fn canonical_partition(&self) -> EndpointPartition<S> {
        let (reps, edges) = self.endpoint_graph();
        let mut dsu = DisjointSet::new(reps.len());
        for &(u, v) in &edges {
            dsu.union(u, v);
        }
        let mut by_root: Vec<Vec<S>> = vec![Vec::new(); reps.len()];
        for (i, r) in reps.iter().enumerate() {
            let root = dsu.find(i);
            by_root[root].push(r.clone());
        }
        let mut blocks: Vec<Vec<S>> = by_root.into_iter().filter(|b| !b.is_empty()).collect();
        for b in &mut blocks {
            b.sort_by(|x, y| x.total_cmp(y));
        }
        blocks.sort_by(|x, y| x[0].total_cmp(&y[0]));
        EndpointPartition { blocks }
    }

    /// All single-chord replacements `(x,y) -> (x,z)` or `(y,z)` with `z` a
    /// grid point of the same partition block, such that the result is a
    /// valid non-resonant diagram with the same partition. The input itself
    /// is never returned.
    pub fn elementary_flips(&self, grid: &[S]) -> Result<Vec<ChordDiagram<S>>, DiagramError> {
        if self.is_resonant() {
            return Err(DiagramError::ResonantInput);
        }
        let on_grid = |v: &S| grid.iter().any(|g| g.same(v));
        for c in &self.chords {
            if !on_grid(c.a()) || !on_grid(c.b()) {
                return Err(DiagramError::EndpointNotInGrid);
            }
        }
        let partition = self.canonical_partition();
        let block_of = |v: &S| {
            partition
                .blocks
                .iter()
                .find(|b| b.iter().any(|w| w.same(v)))
                .expect("endpoint belongs to a block")
        };
        let mut out: Vec<ChordDiagram<S>> = Vec::new();
        for (i, chord) in self.chords.iter().enumerate() {
            let block = block_of(chord.a());
            for kept in [chord.a().clone(), chord.b().clone()] {
                for z in block {
                    if z.same(&kept) {
                        continue;
                    }
                    let mut pairs: Vec<(S, S)> = self
                        .chords
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != i)
                        .map(|(_, c)| (c.a().clone(), c.b().clone()))
                        .collect();
                    pairs.push((kept.clone(), z.clone()));
                    let candidate = match ChordDiagram::new(pairs) {
                        Ok(d) => d,
                        Err(_) => continue,
                    };
                    if candidate == *self
                        || candidate.is_resonant()
                        || candidate.canonical_partition() != partition
                    {
                        continue;
                    }
                    if !out.iter().any(|d| *d == candidate) {
                        out.push(candidate);
                    }
                }
            }
        }
        out.sort_by(|x, y| {
            for (cx, cy) in x.chords.iter().zip(&y.chords) {
                let ord = cx.cmp_key(cy);
                if ord != Ordering::Equal {
                    return ord;
                }
            }
            Ordering::Equal
        });
        Ok(out)
    }

    /// `{"chords": [[a, b], ...]}` with scalars in their JSON form.
    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "chords": self
                .chords
                .iter()
                .map(|c| Value::Array(vec![c.a().to_json(), c.b().to_json()]))
                .collect::<Vec<_>>(),
        })
    }
}

impl ChordDiagram<Rat> {
    /// Parses the `{"chords": [[a, b], ...]}` form with rationals encoded as
    /// `"p/q"` strings or integers.
    pub fn from_json(v: &Value) -> Result<Self, DiagramError> {
        let arr = v
            .get("chords")
            .and_then(Value::as_array)
            .ok_or_else(|| DiagramError::BadEncoding("missing \"chords\" array".into()))?;
        let mut pairs = Vec::with_capacity(arr.len());
        for entry in arr {
            let pair = entry
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| DiagramError::BadEncoding("chord must be a 2-array".into()))?;
            let get = |v: &Value| -> Result<Rat, DiagramError> {
                match v {
                    Value::String(s) => parse_rat(s)
                        .ok_or_else(|| DiagramError::BadEncoding(format!("bad rational {s:?}"))),
                    Value::Number(n) => parse_rat(&n.to_string())
                        .ok_or_else(|| DiagramError::BadEncoding(format!("bad number {n}"))),
                    other => Err(DiagramError::BadEncoding(format!(
                        "bad scalar {other}"
                    ))),
                }
            };
            pairs.push((get(&pair[0])?, get(&pair[1])?));
        }
        ChordDiagram::new(pairs)
    }

    /// Approximate float copy (for rendering and float-mode evaluation).
    pub fn approx(&self) -> ChordDiagram<f64> {
        let pairs = self
            .chords
            .iter()
            .map(|c| (c.a().approx(), c.b().approx()))
            .collect();
        ChordDiagram::new(pairs).expect("float image of a valid diagram")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn d(pairs: &[(i64, i64)]) -> RatDiagram {
        ChordDiagram::new(pairs.iter().map(|&(a, b)| (rat(a), rat(b))).collect()).unwrap()
    }

    type RatDiagram = ChordDiagram<Rat>;

    #[test]
    fn construction_normalizes_and_rejects() {
        let diag = d(&[(2, 1), (1, 3)]);
        assert_eq!(diag.to_string(), "{(1,2),(1,3)}");
        assert_eq!(
            ChordDiagram::new(vec![(rat(1), rat(1))]).unwrap_err(),
            DiagramError::DegenerateChord
        );
        assert_eq!(
            ChordDiagram::new(vec![(rat(1), rat(2)), (rat(2), rat(1))]).unwrap_err(),
            DiagramError::DuplicateChord
        );
    }

    #[test]
    fn resonance_detects_the_triangle() {
        let triangle = d(&[(1, 2), (2, 3), (1, 3)]);
        let witness = triangle.resonance().expect("triangle is resonant");
        assert_eq!(witness.chords.len(), 3);
        assert!(witness.replays_on(&triangle));
        assert!(!d(&[(1, 2), (2, 3), (3, 4)]).is_resonant());
        assert!(!d(&[(1, 2), (3, 4), (5, 6)]).is_resonant());
    }

    #[test]
    fn free_codimension_counts_vertices_minus_components() {
        assert_eq!(d(&[(1, 2), (2, 3), (3, 4)]).codimension_free(), 3);
        assert_eq!(d(&[(1, 2), (2, 3), (1, 3)]).codimension_free(), 2);
        assert_eq!(d(&[(1, 2)]).codimension_free(), 1);
    }

    #[test]
    fn partition_blocks_are_components() {
        let p = d(&[(0, 1), (1, 2)]).canonical_partition();
        assert_eq!(p.blocks, vec![vec![rat(0), rat(1), rat(2)]]);
        let q = d(&[(0, 1), (2, 3)]).canonical_partition();
        assert_eq!(q.blocks.len(), 2);
        // A resonant triangle has the same single block.
        let r = d(&[(0, 1), (0, 2), (1, 2)]).canonical_partition();
        assert_eq!(r, p);
    }

    #[test]
    fn flips_match_the_three_point_example() {
        let grid: Vec<Rat> = (0..=2).map(rat).collect();
        let flips = d(&[(0, 1), (1, 2)]).elementary_flips(&grid).unwrap();
        assert_eq!(flips.len(), 2);
        assert!(flips.contains(&d(&[(0, 1), (0, 2)])));
        assert!(flips.contains(&d(&[(0, 2), (1, 2)])));
        let base = d(&[(0, 1), (1, 2)]).canonical_partition();
        for f in &flips {
            assert_eq!(f.canonical_partition(), base);
        }
    }

    #[test]
    fn single_chord_has_no_flips() {
        let grid: Vec<Rat> = vec![rat(0), rat(1)];
        assert!(d(&[(0, 1)]).elementary_flips(&grid).unwrap().is_empty());
    }

    #[test]
    fn flips_reject_resonant_input() {
        let grid: Vec<Rat> = (0..=3).map(rat).collect();
        assert_eq!(
            d(&[(0, 1), (1, 2), (0, 2)]).elementary_flips(&grid).unwrap_err(),
            DiagramError::ResonantInput
        );
    }

    #[test]
    fn json_round_trip_uses_rational_strings() {
        let diag = ChordDiagram::new(vec![
            (crate::scalar::ratio(1, 2), rat(3)),
            (rat(-1), rat(0)),
        ])
        .unwrap();
        let v = diag.to_json();
        assert_eq!(v["chords"][0][0], serde_json::json!("-1"));
        assert_eq!(v["chords"][1][0], serde_json::json!("1/2"));
        let back = ChordDiagram::from_json(&v).unwrap();
        assert_eq!(back, diag);
    }

    #[test]
    fn float_endpoints_identify_within_window() {
        let diag: ChordDiagram<f64> =
            ChordDiagram::new(vec![(0.0, 1.0), (1.0 + 1e-13, 2.0), (0.0, 2.0)]).unwrap();
        assert!(diag.is_resonant());
    }

    #[test]
    fn resonance_iff_first_betti_positive() {
        // #edges - (#vertices - #components) >= 1 exactly when resonant.
        let cases = [
            d(&[(1, 2), (2, 3), (1, 3)]),
            d(&[(1, 2), (2, 3), (3, 4)]),
            d(&[(0, 1), (0, 2), (0, 3), (1, 2)]),
            d(&[(0, 5), (1, 5), (2, 5)]),
        ];
        for diag in cases {
            let (reps, edges) = diag.endpoint_graph();
            let betti = edges.len() - diag.codimension_free();
            let _ = reps;
            assert_eq!(betti >= 1, diag.is_resonant(), "diagram {diag}");
        }
    }
}
