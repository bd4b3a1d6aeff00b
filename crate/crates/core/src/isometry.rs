//! Isometries of the extended Mukai lattice, represented as words in
//! generator actions.
//!
//! The generators mirror the numerical actions of the standard derived
//! (auto)equivalences of an abelian surface:
//!
//! * `Shift` negates every component (the shift functor acts by -1);
//! * `Twist(b, n)` is tensoring by the n-th power of a line bundle with
//!   class `b`: `(r, l, chi) -> (r, l + r n b, chi + n l.b + r n^2 b^2/2)`;
//! * `Swap(sigma)` exchanges the degree-0 and degree-4 components and acts
//!   on the NS part by an involutive isometry `sigma` (the numerical shadow
//!   of the Poincare-bundle equivalence with the dual surface);
//! * `Custom(m)` is an arbitrary validated isometry matrix.
//!
//! A word stores its generator sequence (applied right to left, matching
//! functor composition), the cached product matrix, and a parity bit that
//! records how many times the word crosses to the dual surface.

use crate::error::{Error, Result};
use crate::jsonnum;
use crate::lattice::{LatticeSpec, MukaiVector};
use crate::mat::IntMat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Generator {
    Shift,
    Twist {
        #[serde(with = "jsonnum::vec")]
        b: Vec<BigInt>,
        #[serde(with = "jsonnum::big")]
        n: BigInt,
    },
    Swap {
        #[serde(with = "jsonnum::mat")]
        sigma: IntMat,
    },
    Custom {
        #[serde(with = "jsonnum::mat")]
        m: IntMat,
    },
}

impl Generator {
    pub fn twist(b: Vec<i64>, n: i64) -> Self {
        Generator::Twist {
            b: b.into_iter().map(BigInt::from).collect(),
            n: BigInt::from(n),
        }
    }

    pub fn twist_big(b: Vec<BigInt>, n: BigInt) -> Self {
        Generator::Twist { b, n }
    }

    /// The swap with the default NS action `-Id`, which is an involutive
    /// isometry of every lattice.
    pub fn swap_default(rank: usize) -> Self {
        Generator::Swap {
            sigma: IntMat::identity(rank).neg(),
        }
    }

    fn is_swap(&self) -> bool {
        matches!(self, Generator::Swap { .. })
    }

    fn inverse(&self) -> Result<Generator> {
        Ok(match self {
            Generator::Shift => Generator::Shift,
            Generator::Twist { b, n } => Generator::Twist {
                b: b.clone(),
                n: -n,
            },
            // sigma is involutive, so the swap is its own inverse.
            Generator::Swap { sigma } => Generator::Swap {
                sigma: sigma.clone(),
            },
            Generator::Custom { m } => Generator::Custom {
                m: m.inverse_integral().ok_or_else(|| {
                    Error::Invalid("custom generator is not unimodular".to_string())
                })?,
            },
        })
    }
}

/// Build the `(rho+2) x (rho+2)` matrix of a single generator.
pub fn generator_matrix(spec: &LatticeSpec, g: &Generator) -> Result<IntMat> {
    let rho = spec.rank;
    let n = rho + 2;
    match g {
        Generator::Shift => Ok(IntMat::identity(n).neg()),
        Generator::Twist { b, n: tn } => {
            if b.len() != rho {
                return Err(Error::DimensionMismatch {
                    expected: rho,
                    got: b.len(),
                    context: "twist class",
                });
            }
            let gb = spec.gram.mul_vec(b);
            let b2 = spec.inner(b, b)?;
            // The form is even, so b^2/2 is an integer and the matrix is
            // integral for every n.
            let (half_b2, rem) = b2.div_rem(&BigInt::from(2));
            debug_assert!(rem.is_zero());
            let mut m = IntMat::identity(n);
            for i in 0..rho {
                m[(i + 1, 0)] = tn * &b[i];
            }
            m[(n - 1, 0)] = tn * tn * &half_b2;
            for j in 0..rho {
                m[(n - 1, j + 1)] = tn * &gb[j];
            }
            Ok(m)
        }
        Generator::Swap { sigma } => {
            if sigma.rows() != rho || sigma.cols() != rho {
                return Err(Error::DimensionMismatch {
                    expected: rho,
                    got: sigma.rows(),
                    context: "swap NS action",
                });
            }
            let stgs = sigma.transpose().mul(&spec.gram).mul(sigma);
            if stgs != spec.gram {
                return Err(Error::Invalid(
                    "swap NS action is not an isometry of the intersection form".to_string(),
                ));
            }
            if sigma.mul(sigma) != IntMat::identity(rho) {
                return Err(Error::Invalid(
                    "swap NS action is not involutive".to_string(),
                ));
            }
            let mut m = IntMat::zeros(n, n);
            m[(0, n - 1)] = BigInt::one();
            m[(n - 1, 0)] = BigInt::one();
            for i in 0..rho {
                for j in 0..rho {
                    m[(i + 1, j + 1)] = sigma[(i, j)].clone();
                }
            }
            Ok(m)
        }
        Generator::Custom { m } => {
            if !validate_isometry(spec, m) {
                return Err(Error::Invalid(
                    "custom matrix does not preserve the extended Mukai form".to_string(),
                ));
            }
            Ok(m.clone())
        }
    }
}

/// True iff `m` is an integral isometry of the extended Mukai form:
/// `m^T Q m = Q` and `det m = +-1`.
pub fn validate_isometry(spec: &LatticeSpec, m: &IntMat) -> bool {
    let n = spec.rank + 2;
    if m.rows() != n || m.cols() != n {
        return false;
    }
    let q = spec.extended_gram();
    m.transpose().mul(&q).mul(m) == q && m.det().abs().is_one()
}

/// A word in generator isometries with its cached matrix and dual parity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsometryWord {
    rank: usize,
    generators: Vec<Generator>,
    matrix: IntMat,
    dual_parity: bool,
}

/// Serialized form of a word: the generator list only. The matrix is
/// recomputed when the word is bound to a lattice again.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WordData {
    pub generators: Vec<Generator>,
}

impl Serialize for IsometryWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WordData {
            generators: self.generators.clone(),
        }
        .serialize(s)
    }
}

impl WordData {
    pub fn bind(self, spec: &LatticeSpec) -> Result<IsometryWord> {
        IsometryWord::new(spec, self.generators)
    }
}

impl IsometryWord {
    /// Build a word, validating every generator against the lattice and
    /// caching the product matrix (generators act right to left).
    pub fn new(spec: &LatticeSpec, generators: Vec<Generator>) -> Result<IsometryWord> {
        let mut matrix = IntMat::identity(spec.rank + 2);
        for g in &generators {
            matrix = matrix.mul(&generator_matrix(spec, g)?);
        }
        let dual_parity = generators.iter().filter(|g| g.is_swap()).count() % 2 == 1;
        Ok(IsometryWord {
            rank: spec.rank,
            generators,
            matrix,
            dual_parity,
        })
    }

    pub fn identity(spec: &LatticeSpec) -> IsometryWord {
        IsometryWord {
            rank: spec.rank,
            generators: Vec::new(),
            matrix: IntMat::identity(spec.rank + 2),
            dual_parity: false,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn matrix(&self) -> &IntMat {
        &self.matrix
    }

    pub fn dual_parity(&self) -> bool {
        self.dual_parity
    }

    /// Apply the word to a Mukai vector (matrix-vector product in the
    /// coordinates `(r, l_1..l_rho, chi)`).
    pub fn apply(&self, v: &MukaiVector) -> Result<MukaiVector> {
        if v.l.len() != self.rank {
            return Err(Error::DimensionMismatch {
                expected: self.rank,
                got: v.l.len(),
                context: "word application",
            });
        }
        let coords = self.matrix.mul_vec(&v.to_coords());
        Ok(MukaiVector::from_coords(&coords))
    }

    /// Prepend generators that act after this word: the result is
    /// `gens . self` in composition order.
    pub fn extended_by(&self, spec: &LatticeSpec, gens: Vec<Generator>) -> Result<IsometryWord> {
        let ext = IsometryWord::new(spec, gens)?;
        compose(&ext, self)
    }

    /// The inverse word: reversed generator sequence with each generator
    /// inverted (Shift and Swap are involutions, Twist(b,n) inverts to
    /// Twist(b,-n)).
    pub fn inverse(&self, spec: &LatticeSpec) -> Result<IsometryWord> {
        let gens: Result<Vec<Generator>> =
            self.generators.iter().rev().map(|g| g.inverse()).collect();
        IsometryWord::new(spec, gens?)
    }
}

/// Concatenate two words: `compose(w1, w2)` acts as `w1` after `w2`.
pub fn compose(w1: &IsometryWord, w2: &IsometryWord) -> Result<IsometryWord> {
    if w1.rank != w2.rank {
        return Err(Error::DimensionMismatch {
            expected: w1.rank,
            got: w2.rank,
            context: "word composition",
        });
    }
    let mut generators = w1.generators.clone();
    generators.extend(w2.generators.iter().cloned());
    Ok(IsometryWord {
        rank: w1.rank,
        generators,
        matrix: w1.matrix.mul(&w2.matrix),
        dual_parity: w1.dual_parity ^ w2.dual_parity,
    })
}

/// True iff the word fixes the point class `(0, 0, 1)`.
pub fn is_filtered(w: &IsometryWord) -> bool {
    let point = MukaiVector::point(w.rank);
    match w.apply(&point) {
        Ok(image) => image == point,
        Err(_) => false,
    }
}

/// Deterministic pseudo-random word of `length` generators drawn from
/// Shift, Twist (class entries in [-2, 2], exponent in [-3, 3]) and the
/// default Swap. Reproducible from the seed.
pub fn random_isometry(spec: &LatticeSpec, seed: u64, length: usize) -> IsometryWord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gens = Vec::with_capacity(length);
    for _ in 0..length {
        let g = match rng.gen_range(0u8..3) {
            0 => Generator::Shift,
            1 => {
                let b: Vec<BigInt> = (0..spec.rank)
                    .map(|_| BigInt::from(rng.gen_range(-2i64..=2)))
                    .collect();
                let n = BigInt::from(rng.gen_range(-3i64..=3));
                Generator::Twist { b, n }
            }
            _ => Generator::swap_default(spec.rank),
        };
        gens.push(g);
    }
    IsometryWord::new(spec, gens).expect("generators drawn from the standard set are always valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{mukai_pairing, LatticeSpec};
    use proptest::prelude::*;

    fn hyper() -> LatticeSpec {
        LatticeSpec::hyperbolic()
    }

    #[test]
    fn twist_matches_direct_formula() {
        let spec = hyper();
        let w = IsometryWord::new(&spec, vec![Generator::twist(vec![1, 1], 1)]).unwrap();
        let v = w.apply(&MukaiVector::unit(2)).unwrap();
        // chi' = 0 + n l.b + r n^2 b^2/2 = 1.
        assert_eq!(v, MukaiVector::new(1, vec![1, 1], 1));
    }

    #[test]
    fn twist_fixes_point_class() {
        let spec = hyper();
        let w = IsometryWord::new(&spec, vec![Generator::twist(vec![1, 1], 3)]).unwrap();
        let p = MukaiVector::point(2);
        assert_eq!(w.apply(&p).unwrap(), p);
    }

    #[test]
    fn swap_exchanges_rank_and_chi() {
        let spec = hyper();
        let w = IsometryWord::new(&spec, vec![Generator::swap_default(2)]).unwrap();
        assert_eq!(
            w.apply(&MukaiVector::point(2)).unwrap(),
            MukaiVector::unit(2)
        );
        assert!(w.dual_parity());
    }

    #[test]
    fn swap_rejects_invalid_sigma() {
        let spec = hyper();
        // A shear is not an isometry of the hyperbolic form.
        let bad = Generator::Swap {
            sigma: IntMat::from_rows(&[&[1, 1], &[0, 1]]),
        };
        assert!(IsometryWord::new(&spec, vec![bad]).is_err());
        // A Pell automorphism of diag(2, -4) is an isometry but not an
        // involution, so it must be rejected as a swap action too.
        let diag = LatticeSpec::new(
            2,
            IntMat::from_rows(&[&[2, 0], &[0, -4]]),
            vec![BigInt::one(), BigInt::zero()],
        );
        let pell = IntMat::from_rows(&[&[3, 4], &[2, 3]]);
        assert_eq!(pell.transpose().mul(&diag.gram).mul(&pell), diag.gram);
        let rot = Generator::Swap { sigma: pell };
        assert!(IsometryWord::new(&diag, vec![rot]).is_err());
    }

    #[test]
    fn double_shift_and_double_swap_are_identity() {
        let spec = hyper();
        let shift = IsometryWord::new(&spec, vec![Generator::Shift]).unwrap();
        let swap = IsometryWord::new(&spec, vec![Generator::swap_default(2)]).unwrap();
        assert_eq!(
            compose(&shift, &shift).unwrap().matrix(),
            IsometryWord::identity(&spec).matrix()
        );
        let ss = compose(&swap, &swap).unwrap();
        assert_eq!(ss.matrix(), IsometryWord::identity(&spec).matrix());
        assert!(!ss.dual_parity());
    }

    #[test]
    fn compose_with_identity_is_noop() {
        let spec = hyper();
        let w = random_isometry(&spec, 7, 6);
        let id = IsometryWord::identity(&spec);
        assert_eq!(compose(&id, &w).unwrap().matrix(), w.matrix());
    }

    #[test]
    fn filtered_examples() {
        let spec = hyper();
        assert!(is_filtered(&IsometryWord::identity(&spec)));
        let swap = IsometryWord::new(&spec, vec![Generator::swap_default(2)]).unwrap();
        assert!(!is_filtered(&swap));
        let double_shift =
            IsometryWord::new(&spec, vec![Generator::Shift, Generator::Shift]).unwrap();
        assert!(is_filtered(&double_shift));
    }

    #[test]
    fn shift_negates() {
        let spec = hyper();
        let w = IsometryWord::new(&spec, vec![Generator::Shift]).unwrap();
        assert_eq!(
            w.apply(&MukaiVector::new(2, vec![1, 8], 4)).unwrap(),
            MukaiVector::new(-2, vec![-1, -8], -4)
        );
    }

    #[test]
    fn validate_isometry_examples() {
        let spec = hyper();
        assert!(validate_isometry(&spec, &IntMat::identity(4)));
        // (r, a, b, chi) -> (-b, chi, -r, a).
        let p = IntMat::from_rows(&[&[0, 0, -1, 0], &[0, 0, 0, 1], &[-1, 0, 0, 0], &[0, 1, 0, 0]]);
        assert!(validate_isometry(&spec, &p));
        let word = IsometryWord::new(&spec, vec![Generator::Custom { m: p }]).unwrap();
        assert_eq!(
            word.apply(&MukaiVector::point(2)).unwrap(),
            MukaiVector::new(0, vec![1, 0], 0)
        );
        assert!(!validate_isometry(
            &spec,
            &IntMat::identity(4).scale(&BigInt::from(2))
        ));
    }

    #[test]
    fn random_isometry_is_deterministic_and_valid() {
        let spec = hyper();
        let w0 = random_isometry(&spec, 0, 0);
        assert!(w0.is_empty());
        for seed in 0..32u64 {
            let a = random_isometry(&spec, seed, 9);
            let b = random_isometry(&spec, seed, 9);
            assert_eq!(a, b);
            assert!(validate_isometry(&spec, a.matrix()));
        }
    }

    #[test]
    fn generator_json_round_trip() {
        let g = Generator::twist(vec![1, -2], 3);
        let js = serde_json::to_string(&g).unwrap();
        assert_eq!(js, r#"{"kind":"twist","b":[1,-2],"n":3}"#);
        let back: Generator = serde_json::from_str(&js).unwrap();
        assert_eq!(back, g);

        let s = serde_json::to_string(&Generator::Shift).unwrap();
        assert_eq!(s, r#"{"kind":"shift"}"#);

        let spec = hyper();
        let w = random_isometry(&spec, 3, 5);
        let js = serde_json::to_string(&w).unwrap();
        let data: WordData = serde_json::from_str(&js).unwrap();
        let back = data.bind(&spec).unwrap();
        assert_eq!(back, w);
    }

    proptest! {
        #[test]
        fn words_preserve_pairing(seed in 0u64..500, len in 0usize..10) {
            let spec = hyper();
            let w = random_isometry(&spec, seed, len);
            let v = MukaiVector::new(2, vec![1, -3], 4);
            let u = MukaiVector::new(-1, vec![2, 5], 0);
            let before = mukai_pairing(&spec, &v, &u).unwrap();
            let after = mukai_pairing(&spec, &w.apply(&v).unwrap(), &w.apply(&u).unwrap()).unwrap();
            prop_assert_eq!(before, after);
        }

        #[test]
        fn apply_respects_composition(s1 in 0u64..100, s2 in 0u64..100) {
            let spec = hyper();
            let w1 = random_isometry(&spec, s1, 5);
            let w2 = random_isometry(&spec, s2, 5);
            let v = MukaiVector::new(1, vec![2, -1], 3);
            let lhs = compose(&w1, &w2).unwrap().apply(&v).unwrap();
            let rhs = w1.apply(&w2.apply(&v).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn inverse_composes_to_filtered_identity(seed in 0u64..200) {
            let spec = hyper();
            let w = random_isometry(&spec, seed, 8);
            let inv = w.inverse(&spec).unwrap();
            let round = compose(&inv, &w).unwrap();
            let id = IsometryWord::identity(&spec);
            prop_assert_eq!(round.matrix(), id.matrix());
            prop_assert!(is_filtered(&round));
        }

        #[test]
        fn primitivity_is_preserved(seed in 0u64..200) {
            use num_integer::Integer as _;
            let spec = hyper();
            let w = random_isometry(&spec, seed, 8);
            let v = MukaiVector::new(2, vec![3, 0], 5); // gcd of coordinates is 1
            let image = w.apply(&v).unwrap();
            let gcd = image
                .to_coords()
                .iter()
                .fold(BigInt::zero(), |acc, x| acc.gcd(x));
            prop_assert_eq!(gcd, BigInt::one());
        }
    }
}
