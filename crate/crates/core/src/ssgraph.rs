//! Supersingular elliptic curves over `F_{p^2}` and their small-prime
//! isogeny multigraphs.
//!
//! Everything is computed with exact finite-field arithmetic at desk scale
//! (`p <= 500`): supersingularity by exhaustive point counting, edges by
//! kernel polynomials and Velu's formulas, and paths by breadth-first
//! search. Each computed edge is cross-checked against the classical
//! modular polynomial of its degree, and every vertex enumeration is
//! checked against the Eichler mass formula before it is returned.

pub mod curve;
pub mod fp2;
pub mod graph;

pub use curve::{curve_from_j, is_supersingular, CurveSS, SquareTable};
pub use fp2::{FieldSpec, Fp2};
pub use graph::{
    build_graph, enumerate_supersingular, find_isogeny_path, l_isogeny_neighbors, IsogenyPath,
    SSGraph,
};
