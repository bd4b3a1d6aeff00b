//! Isogeny multigraphs of supersingular curves and path search.
//!
//! Vertices are the supersingular j-invariants of `F_{p^2}`; edges come
//! from kernel polynomials (the factors of the division polynomial) fed
//! through Velu's formulas. Curves are constructed from models with
//! coefficients generated over `F_p`, so the `F_{p^2}`-Frobenius acts on
//! them as the scalar `+-p` and every small-prime kernel is rational: each
//! supersingular vertex carries exactly `ell + 1` outgoing edges.
//!
//! Two global cross-checks guard the arithmetic: the Eichler mass formula
//! `sum 1/|Aut| = (p-1)/24` (exact rationals) for the vertex set, and the
//! classical modular polynomial `Phi_ell(j, j') = 0` for every edge.

use super::curve::{
    curve_from_j, discriminant, eval_rhs, is_supersingular_curve, j_invariant, CurveSS, SquareTable,
};
use super::fp2::{FieldSpec, Fp2};
use crate::error::{Error, Result};
use num_bigint::BigUint;
use num_rational::Ratio;
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;
use std::str::FromStr;

/// The `ell`-isogeny multigraph on supersingular j-invariants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SSGraph {
    pub p: u64,
    pub ell: u64,
    pub modulus: (u64, u64),
    /// Sorted lexicographically by coefficient pairs.
    pub vertices: Vec<Fp2>,
    /// `adjacency[i]` lists neighbor indices with multiplicity, sorted.
    pub adjacency: Vec<Vec<usize>>,
}

/// A shortest path in the graph together with the isogeny degree it
/// certifies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsogenyPath {
    pub path: Vec<Fp2>,
    pub r: usize,
    pub degree: BigUint,
}

pub fn aut_order(fs: &FieldSpec, j: Fp2) -> u64 {
    if j.is_zero() {
        6
    } else if j == fs.from_u64(1728) {
        4
    } else {
        2
    }
}

/// All supersingular j-invariants, sorted, verified against the Eichler
/// mass formula before returning.
pub fn enumerate_supersingular(fs: &FieldSpec) -> Result<Vec<Fp2>> {
    if fs.p <= 3 {
        return Err(Error::Invalid("p must exceed 3".to_string()));
    }
    let table = SquareTable::build(fs);
    let mut vertices = Vec::new();
    for j in fs.elements() {
        let c = curve_from_j(fs, j)?;
        if is_supersingular_curve(fs, &table, &c) {
            vertices.push(j);
        }
    }
    let mut mass = Ratio::new(0u64, 1u64);
    for &j in &vertices {
        mass += Ratio::new(1u64, aut_order(fs, j));
    }
    let expected = Ratio::new(fs.p - 1, 24u64);
    if mass != expected {
        return Err(Error::Inconsistent(format!(
            "mass formula failed for p = {}: got {mass}, expected {expected}",
            fs.p
        )));
    }
    Ok(vertices)
}

/// Classical modular polynomial `Phi_2`, evaluated over `F_{p^2}`.
fn phi2_vanishes(fs: &FieldSpec, x: Fp2, y: Fp2) -> bool {
    let c = |n: i128| fs.from_i64(n.rem_euclid(fs.p as i128) as i64);
    let m = |a: Fp2, b: Fp2| fs.mul(a, b);
    let x2 = m(x, x);
    let x3 = m(x2, x);
    let y2 = m(y, y);
    let y3 = m(y2, y);
    let mut acc = fs.add(x3, y3);
    acc = fs.sub(acc, m(x2, y2));
    acc = fs.add(acc, m(c(1488), fs.add(m(x2, y), m(x, y2))));
    acc = fs.sub(acc, m(c(162000), fs.add(x2, y2)));
    acc = fs.add(acc, m(c(40773375), m(x, y)));
    acc = fs.add(acc, m(c(8748000000), fs.add(x, y)));
    acc = fs.sub(acc, c(157464000000000));
    acc.is_zero()
}

/// Classical modular polynomial `Phi_3`, evaluated over `F_{p^2}`.
fn phi3_vanishes(fs: &FieldSpec, x: Fp2, y: Fp2) -> bool {
    let c = |n: i128| fs.from_i64(n.rem_euclid(fs.p as i128) as i64);
    let m = |a: Fp2, b: Fp2| fs.mul(a, b);
    let x2 = m(x, x);
    let x3 = m(x2, x);
    let x4 = m(x3, x);
    let y2 = m(y, y);
    let y3 = m(y2, y);
    let y4 = m(y3, y);
    let mut acc = fs.add(x4, y4);
    acc = fs.sub(acc, m(x3, y3));
    acc = fs.add(acc, m(c(2232), fs.add(m(x3, y2), m(x2, y3))));
    acc = fs.sub(acc, m(c(1069956), fs.add(m(x3, y), m(x, y3))));
    acc = fs.add(acc, m(c(36864000), fs.add(x3, y3)));
    acc = fs.add(acc, m(c(2587918086), m(x2, y2)));
    acc = fs.add(acc, m(c(8900222976000), fs.add(m(x2, y), m(x, y2))));
    acc = fs.add(acc, m(c(452984832000000), fs.add(x2, y2)));
    acc = fs.sub(acc, m(c(770845966336000000), m(x, y)));
    acc = fs.add(acc, m(c(1855425871872000000000), fs.add(x, y)));
    acc.is_zero()
}

fn modular_poly_vanishes(fs: &FieldSpec, ell: u64, x: Fp2, y: Fp2) -> bool {
    match ell {
        2 => phi2_vanishes(fs, x, y),
        3 => phi3_vanishes(fs, x, y),
        _ => unreachable!("only ell = 2, 3 are supported"),
    }
}

/// Velu's formulas for a 2-isogeny with kernel `(x0, 0)`.
fn velu_two(fs: &FieldSpec, c: &CurveSS, x0: Fp2) -> Result<Fp2> {
    let t = fs.add(fs.scal(3, fs.mul(x0, x0)), c.a);
    let w = fs.mul(x0, t);
    let a2 = fs.sub(c.a, fs.scal(5, t));
    let b2 = fs.sub(c.b, fs.scal(7, w));
    j_invariant(fs, a2, b2)
}

/// Velu's formulas for a 3-isogeny whose kernel polynomial is `x - x0`.
/// Only `y0^2 = x0^3 + a x0 + b` enters, so everything stays in `F_{p^2}`.
fn velu_three(fs: &FieldSpec, c: &CurveSS, x0: Fp2) -> Result<Fp2> {
    let t = fs.add(fs.scal(6, fs.mul(x0, x0)), fs.scal(2, c.a));
    let y0sq = eval_rhs(fs, c, x0);
    let w = fs.add(fs.scal(4, y0sq), fs.mul(x0, t));
    let a2 = fs.sub(c.a, fs.scal(5, t));
    let b2 = fs.sub(c.b, fs.scal(7, w));
    j_invariant(fs, a2, b2)
}

/// The multiset of j-invariants `ell`-isogenous to the given curve, one per
/// rational kernel, in the deterministic order of the kernel x-coordinates.
/// Every edge is cross-validated against the modular polynomial.
pub fn l_isogeny_neighbors(fs: &FieldSpec, c: &CurveSS, ell: u64) -> Result<Vec<Fp2>> {
    if ell != 2 && ell != 3 {
        return Err(Error::Invalid(format!(
            "ell = {ell} unsupported; only 2 and 3 are implemented"
        )));
    }
    if ell == fs.p {
        return Err(Error::Invalid("ell must differ from p".to_string()));
    }
    if discriminant(fs, c.a, c.b).is_zero() {
        return Err(Error::Invalid("singular curve".to_string()));
    }
    let mut out = Vec::new();
    for x0 in fs.elements() {
        let jn = if ell == 2 {
            // Kernel points of order 2 are the roots of x^3 + a x + b.
            if !eval_rhs(fs, c, x0).is_zero() {
                continue;
            }
            velu_two(fs, c, x0)?
        } else {
            // Degree-1 factors x - x0 of the 3-division polynomial
            // 3x^4 + 6a x^2 + 12b x - a^2 are exactly the rational kernel
            // polynomials.
            let x2 = fs.mul(x0, x0);
            let psi3 = fs.sub(
                fs.add(
                    fs.add(fs.scal(3, fs.mul(x2, x2)), fs.scal(6, fs.mul(c.a, x2))),
                    fs.scal(12, fs.mul(c.b, x0)),
                ),
                fs.mul(c.a, c.a),
            );
            if !psi3.is_zero() {
                continue;
            }
            velu_three(fs, c, x0)?
        };
        if !modular_poly_vanishes(fs, ell, c.j, jn) {
            return Err(Error::Inconsistent(format!(
                "edge {:?} -> {jn:?} contradicts the degree-{ell} modular polynomial",
                c.j
            )));
        }
        out.push(jn);
    }
    Ok(out)
}

/// Build the full `ell`-isogeny multigraph, asserting the mass formula,
/// `(ell+1)`-regularity, and closure of the vertex set under neighbors.
pub fn build_graph(fs: &FieldSpec, ell: u64) -> Result<SSGraph> {
    let vertices = enumerate_supersingular(fs)?;
    let mut adjacency = Vec::with_capacity(vertices.len());
    for &j in &vertices {
        let c = curve_from_j(fs, j)?;
        let neighbors = l_isogeny_neighbors(fs, &c, ell)?;
        if neighbors.len() != (ell + 1) as usize {
            return Err(Error::Inconsistent(format!(
                "vertex {j:?} has {} rational kernels, expected {}",
                neighbors.len(),
                ell + 1
            )));
        }
        let mut row = Vec::with_capacity(neighbors.len());
        for jn in neighbors {
            let idx = vertices.binary_search(&jn).map_err(|_| {
                Error::Inconsistent(format!("neighbor {jn:?} of {j:?} is not supersingular"))
            })?;
            row.push(idx);
        }
        row.sort_unstable();
        adjacency.push(row);
    }
    Ok(SSGraph {
        p: fs.p,
        ell,
        modulus: (fs.m0, fs.m1),
        vertices,
        adjacency,
    })
}

impl SSGraph {
    pub fn vertex_index(&self, j: Fp2) -> Option<usize> {
        self.vertices.binary_search(&j).ok()
    }

    /// Distances from a source by breadth-first search; `usize::MAX` marks
    /// unreachable vertices.
    pub fn bfs_layers(&self, src: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertices.len()];
        dist[src] = 0;
        let mut queue = std::collections::VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        !self.vertices.is_empty() && self.bfs_layers(0).iter().all(|&d| d != usize::MAX)
    }

    /// Shortest path between two vertices with deterministic (index-order)
    /// tie-breaking.
    pub fn shortest_path(&self, src: usize, dst: usize) -> Option<Vec<usize>> {
        let mut parent = vec![usize::MAX; self.vertices.len()];
        let mut seen = vec![false; self.vertices.len()];
        seen[src] = true;
        let mut queue = std::collections::VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            if u == dst {
                break;
            }
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if !seen[dst] {
            return None;
        }
        let mut path = vec![dst];
        let mut cur = dst;
        while cur != src {
            cur = parent[cur];
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }
}

/// Shortest isogeny walk from `j_src` to `j_dst` in the `ell`-graph; the
/// composite has degree `ell^r` and is separable since `ell != p`.
pub fn find_isogeny_path(fs: &FieldSpec, ell: u64, j_src: Fp2, j_dst: Fp2) -> Result<IsogenyPath> {
    let graph = build_graph(fs, ell)?;
    let src = graph
        .vertex_index(j_src)
        .ok_or_else(|| Error::Precondition(format!("{j_src:?} is not a supersingular vertex")))?;
    let dst = graph
        .vertex_index(j_dst)
        .ok_or_else(|| Error::Precondition(format!("{j_dst:?} is not a supersingular vertex")))?;
    let path_idx = graph.shortest_path(src, dst).ok_or_else(|| {
        Error::Inconsistent("supersingular isogeny graph is disconnected".to_string())
    })?;
    let r = path_idx.len() - 1;
    Ok(IsogenyPath {
        path: path_idx.iter().map(|&i| graph.vertices[i]).collect(),
        r,
        degree: BigUint::from(ell).pow(r as u32),
    })
}

fn fp2_pair(j: &Fp2) -> [u64; 2] {
    [j.c0, j.c1]
}

impl Serialize for SSGraph {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SSGraph", 6)?;
        st.serialize_field("p", &self.p)?;
        st.serialize_field("ell", &self.ell)?;
        st.serialize_field("modulus", &[self.modulus.0, self.modulus.1, 1])?;
        let verts: Vec<[u64; 2]> = self.vertices.iter().map(fp2_pair).collect();
        st.serialize_field("vertices", &verts)?;
        let mut edges: Vec<[usize; 2]> = Vec::new();
        for (i, row) in self.adjacency.iter().enumerate() {
            for &k in row {
                edges.push([i, k]);
            }
        }
        st.serialize_field("edges", &edges)?;
        st.end()
    }
}

impl Serialize for IsogenyPath {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("IsogenyPath", 3)?;
        let path: Vec<[u64; 2]> = self.path.iter().map(fp2_pair).collect();
        st.serialize_field("path", &path)?;
        st.serialize_field("r", &self.r)?;
        let n = serde_json::Number::from_str(&self.degree.to_string())
            .map_err(serde::ser::Error::custom)?;
        st.serialize_field("degree", &n)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_counts_for_small_primes() {
        // p = 11: mass 10/24 = 1/6 + 1/4 forces {0, 1728}.
        let fs = FieldSpec::canonical(11).unwrap();
        let v = enumerate_supersingular(&fs).unwrap();
        assert_eq!(v.len(), 2);
        assert!(v.contains(&fs.from_u64(0)) && v.contains(&fs.from_u64(1728)));
        // p = 13: mass 1/2 forces a single vertex with trivial extra
        // automorphisms; it is j = 5.
        let fs = FieldSpec::canonical(13).unwrap();
        let v = enumerate_supersingular(&fs).unwrap();
        assert_eq!(v, vec![fs.from_u64(5)]);
    }

    #[test]
    fn graph_p13_ell2_is_single_vertex_with_three_loops() {
        let fs = FieldSpec::canonical(13).unwrap();
        let g = build_graph(&fs, 2).unwrap();
        assert_eq!(g.vertices.len(), 1);
        assert_eq!(g.adjacency[0], vec![0, 0, 0]);
    }

    #[test]
    fn graph_p11_ell2_is_connected_two_vertices() {
        let fs = FieldSpec::canonical(11).unwrap();
        let g = build_graph(&fs, 2).unwrap();
        assert_eq!(g.vertices.len(), 2);
        assert!(g.is_connected());
        for row in &g.adjacency {
            assert_eq!(row.len(), 3);
        }
    }

    #[test]
    fn weighted_handshake_identity() {
        // Counting edges as subgroups, duality gives
        // A[i][j] * |Aut(j)| = A[j][i] * |Aut(i)|.
        for p in [11u64, 23, 31, 47] {
            let fs = FieldSpec::canonical(p).unwrap();
            for ell in [2u64, 3] {
                let g = build_graph(&fs, ell).unwrap();
                let n = g.vertices.len();
                let mut counts = vec![vec![0u64; n]; n];
                for (i, row) in g.adjacency.iter().enumerate() {
                    for &k in row {
                        counts[i][k] += 1;
                    }
                }
                for i in 0..n {
                    for k in 0..n {
                        let wi = aut_order(&fs, g.vertices[i]);
                        let wk = aut_order(&fs, g.vertices[k]);
                        assert_eq!(
                            counts[i][k] * wk,
                            counts[k][i] * wi,
                            "handshake failed at p={p}, ell={ell}, ({i},{k})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn neighbors_are_supersingular() {
        let fs = FieldSpec::canonical(23).unwrap();
        let verts = enumerate_supersingular(&fs).unwrap();
        for &j in &verts {
            let c = curve_from_j(&fs, j).unwrap();
            for jn in l_isogeny_neighbors(&fs, &c, 2).unwrap() {
                assert!(verts.binary_search(&jn).is_ok());
            }
        }
    }

    #[test]
    fn path_within_p11() {
        let fs = FieldSpec::canonical(11).unwrap();
        let j0 = fs.from_u64(0);
        let j1728 = fs.from_u64(1728);
        let same = find_isogeny_path(&fs, 2, j0, j0).unwrap();
        assert_eq!(same.r, 0);
        assert_eq!(same.degree, BigUint::from(1u32));
        let p = find_isogeny_path(&fs, 2, j0, j1728).unwrap();
        assert!(p.r >= 1);
        assert_eq!(p.degree, BigUint::from(2u32).pow(p.r as u32));
        // Each hop is a real edge.
        let c = curve_from_j(&fs, p.path[0]).unwrap();
        assert!(l_isogeny_neighbors(&fs, &c, 2)
            .unwrap()
            .contains(&p.path[1]));
    }

    #[test]
    fn path_rejects_ordinary_vertex() {
        let fs = FieldSpec::canonical(11).unwrap();
        let err = find_isogeny_path(&fs, 2, fs.from_u64(2), fs.from_u64(0));
        assert!(err.is_err());
    }

    #[test]
    fn graph_json_shape() {
        let fs = FieldSpec::canonical(13).unwrap();
        let g = build_graph(&fs, 2).unwrap();
        let js = serde_json::to_string(&g).unwrap();
        assert_eq!(
            js,
            r#"{"p":13,"ell":2,"modulus":[2,0,1],"vertices":[[5,0]],"edges":[[0,0],[0,0],[0,0]]}"#
        );
    }
}
