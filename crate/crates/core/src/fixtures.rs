//! Deterministic fixture generators shared by tests, the acceptance suite
//! and the scenario corpus: seeded random valid lattices, cover embeddings
//! of the shapes that arise from cyclic covers of products of elliptic
//! curves, and small Hom lattices.

use crate::lattice::LatticeSpec;
use crate::mat::{IntMat, IntVec};
use crate::product::{to_lattice_spec, CoverDatum, HomLattice};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A random unimodular matrix, built from a few elementary row operations.
fn random_unimodular(rng: &mut ChaCha8Rng, n: usize) -> IntMat {
    let mut m = IntMat::identity(n);
    if n < 2 {
        return m;
    }
    for _ in 0..2 * n {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n);
        while j == i {
            j = rng.gen_range(0..n);
        }
        let c = BigInt::from(rng.gen_range(-2i64..=2));
        for col in 0..n {
            let add = &c * &m[(j, col)];
            m[(i, col)] += add;
        }
    }
    m
}

/// A random valid lattice of the given rank: an even base form of
/// signature `(1, rank-1)` conjugated by a random unimodular change of
/// basis, with the ample class transported along.
pub fn random_lattice(seed: u64, rank: usize) -> LatticeSpec {
    assert!(rank >= 1, "rank must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut gram = IntMat::zeros(rank, rank);
    let mut h: IntVec = vec![BigInt::zero(); rank];
    if rank == 1 {
        gram[(0, 0)] = BigInt::from(2 * rng.gen_range(1i64..=3));
        h[0] = BigInt::one();
    } else {
        gram[(0, 1)] = BigInt::one();
        gram[(1, 0)] = BigInt::one();
        for i in 2..rank {
            gram[(i, i)] = BigInt::from(-2 * rng.gen_range(1i64..=3));
        }
        h[0] = BigInt::one();
        h[1] = BigInt::one();
    }
    let t = random_unimodular(&mut rng, rank);
    let t_inv = t
        .inverse_integral()
        .expect("elementary products are unimodular");
    LatticeSpec::new(rank, t.transpose().mul(&gram).mul(&t), t_inv.mul_vec(&h))
}

/// Product lattice, cover and target lattice for one normalization fixture.
pub struct CoverFixture {
    pub hom: HomLattice,
    pub prod: LatticeSpec,
    pub cover: CoverDatum,
    pub target: LatticeSpec,
}

/// The trivial cover: the target is the product itself.
pub fn identity_cover_fixture(hom: HomLattice) -> CoverFixture {
    let prod = to_lattice_spec(&hom, 1, 1).expect("fixture Hom lattice is valid");
    let target = prod.clone();
    let cover = CoverDatum::identity(prod.rank);
    CoverFixture {
        hom,
        prod,
        cover,
        target,
    }
}

/// A genuine index-`d^3` embedding modeling the dual complement of a
/// degree-`d` cyclic cover: `iota = diag(d, d^2, 1, ..., 1)`, which scales
/// the hyperbolic block by `d^3` and leaves the Hom block to the target
/// form `-d^3 * deg_gram`. Elementary divisors `{1, .., 1, d, d^2}` all
/// divide `d^2`, and the degree/exponent pair is `(d^3, d)`.
pub fn dual_cover_fixture(hom: HomLattice, d: u64) -> CoverFixture {
    assert!(d == 2 || d == 3, "cyclic cover degree must be 2 or 3");
    let prod = to_lattice_spec(&hom, 1, 1).expect("fixture Hom lattice is valid");
    let n = prod.rank;
    let d_big = BigInt::from(d);
    let d3 = d_big.pow(3);

    let mut iota = IntMat::identity(n);
    iota[(0, 0)] = d_big.clone();
    iota[(1, 1)] = &d_big * &d_big;

    let mut gram = IntMat::zeros(n, n);
    gram[(0, 1)] = BigInt::one();
    gram[(1, 0)] = BigInt::one();
    for i in 2..n {
        for j in 2..n {
            gram[(i, j)] = &d3 * &prod.gram[(i, j)];
        }
    }
    let ample = iota.mul_vec(&prod.ample_ref);
    let target = LatticeSpec::new(n, gram, ample);
    let cover = CoverDatum {
        iota,
        degree: d3,
        exponent: d_big,
    };
    CoverFixture {
        hom,
        prod,
        cover,
        target,
    }
}

/// A degree-`d` cover itself (rather than its dual complement):
/// `iota = diag(1, d, 1...)` with degree and exponent both `d`.
pub fn direct_cover_fixture(hom: HomLattice, d: u64) -> CoverFixture {
    assert!(d == 2 || d == 3, "cyclic cover degree must be 2 or 3");
    let prod = to_lattice_spec(&hom, 1, 1).expect("fixture Hom lattice is valid");
    let n = prod.rank;
    let d_big = BigInt::from(d);

    let mut iota = IntMat::identity(n);
    iota[(1, 1)] = d_big.clone();

    let mut gram = IntMat::zeros(n, n);
    gram[(0, 1)] = BigInt::one();
    gram[(1, 0)] = BigInt::one();
    for i in 2..n {
        for j in 2..n {
            gram[(i, j)] = &d_big * &prod.gram[(i, j)];
        }
    }
    let ample = iota.mul_vec(&prod.ample_ref);
    let target = LatticeSpec::new(n, gram, ample);
    let cover = CoverDatum {
        iota,
        degree: d_big.clone(),
        exponent: d_big,
    };
    CoverFixture {
        hom,
        prod,
        cover,
        target,
    }
}

/// Rank-four Hom lattice of two supersingular curves: a positive definite
/// even quaternary form with a separability functional vanishing on half
/// the generators.
pub fn hom_rank_four(p: i64) -> HomLattice {
    HomLattice::new(
        4,
        IntMat::from_rows(&[&[2, 1, 0, 0], &[1, 2, 0, 0], &[0, 0, 4, 2], &[0, 0, 2, 4]]),
        p,
        IntMat::from_rows(&[&[1, 0, 1, 0]]),
    )
}
