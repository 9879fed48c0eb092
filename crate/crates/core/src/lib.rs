//! Laboratory for equality-condition systems `f(a_i) = f(b_i)` on
//! finite-dimensional spaces of one-variable functions.
//!
//! A chord diagram (a finite set of point pairs on the line) cuts a subspace
//! out of a function space. This crate detects when the codimension of that
//! subspace drops below the number of chords, certifies such drops in exact
//! rational arithmetic, computes the mod-2 configuration-space cohomology
//! obstructions that force them, and constructs the square-tree cycle
//! families that realize braid homology generators by non-resonant diagrams.
//!
//! Geometry and linear algebra are generic over the scalar type through the
//! [`scalar::Coord`] trait; the two instantiations used throughout are exact
//! big rationals ([`Rat`]) and `f64`.

pub mod cache;
pub mod cohomology;
pub mod cycles;
pub mod diagram;
pub mod expr;
pub mod fox;
pub mod funcspace;
pub mod porteous;
pub mod report;
pub mod scalar;
pub mod search;
pub mod svg;
pub mod verify;

/// Exact scalar: arbitrary-precision rational.
pub type Rat = num_rational::BigRational;
/// Exact big integer, used by the fraction-free elimination.
pub type Int = num_bigint::BigInt;

/// Chord diagram with exact rational endpoints.
pub type RatDiagram = diagram::ChordDiagram<Rat>;
/// Chord diagram with double-precision endpoints (imported float data).
pub type F64Diagram = diagram::ChordDiagram<f64>;

/// Version tag stamped into reports and cache keys.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
