//! The Neron-Severi lattice of a product of two elliptic curves, modeled as
//! `Z^2 + Hom(F, E)`.
//!
//! A class is written `l(phi, a, b)`: the pullback of the Mumford bundle
//! along `1 x phi`, twisted by degree-`a` and degree-`b` bundles from the
//! two factors. The Hom group is abstract: only its degree form, the
//! characteristic `p`, and a separability functional `tau` on `Hom/p Hom`
//! are retained, which is exactly the data the normalization algorithms
//! consume. The intersection form in these coordinates is
//!
//! ```text
//! l(phi,a,b) . l(psi,c,d) = a d + c b - bil(phi, psi)
//! ```
//!
//! with `bil(phi, psi) = deg(phi+psi) - deg(phi) - deg(psi)`; see the basis
//! oracle in the tests for where this formula comes from.

use crate::error::{Error, Result};
use crate::jsonnum;
use crate::lattice::LatticeSpec;
use crate::mat::{signature, smith_normal_form, IntMat, IntVec};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// `Hom(F, E)` with its degree quadratic form and separability functional.
///
/// `deg_gram` encodes the polarization of the degree form: `deg(phi) =
/// phi^T (deg_gram / 2) phi`, so `bil(phi, psi) = phi^T deg_gram psi` and
/// the diagonal is even. `tau` is a linear map `Hom / p Hom -> F_p^k`
/// whose nonvanishing detects separability (the differential of an isogeny
/// on tangent spaces).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomLattice {
    pub rank: usize,
    #[serde(with = "jsonnum::mat")]
    pub deg_gram: IntMat,
    #[serde(with = "jsonnum::big")]
    pub p: BigInt,
    #[serde(with = "jsonnum::mat")]
    pub tau: IntMat,
}

impl HomLattice {
    pub fn new(rank: usize, deg_gram: IntMat, p: impl Into<BigInt>, tau: IntMat) -> Self {
        HomLattice {
            rank,
            deg_gram,
            p: p.into(),
            tau,
        }
    }

    /// `Hom(F, E) = 0`: the two curves admit no morphisms.
    pub fn empty(p: impl Into<BigInt>) -> Self {
        HomLattice::new(0, IntMat::zeros(0, 0), p, IntMat::zeros(1, 0))
    }

    /// Rank one with a generator of the given degree and `tau = (1)`.
    pub fn rank_one(degree: i64, p: impl Into<BigInt>) -> Self {
        HomLattice::new(
            1,
            IntMat::from_rows(&[&[2 * degree]]),
            p,
            IntMat::from_rows(&[&[1]]),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank > 4 {
            return Err(Error::Invalid(format!(
                "Hom rank {} exceeds 4, impossible for elliptic curves",
                self.rank
            )));
        }
        if self.deg_gram.rows() != self.rank || self.deg_gram.cols() != self.rank {
            return Err(Error::Invalid("deg_gram has wrong shape".to_string()));
        }
        if !self.deg_gram.is_symmetric() {
            return Err(Error::Invalid("deg_gram is not symmetric".to_string()));
        }
        for i in 0..self.rank {
            if self.deg_gram[(i, i)].is_odd() {
                return Err(Error::Invalid(
                    "deg_gram diagonal must be even (it is twice a degree)".to_string(),
                ));
            }
        }
        if self.rank >= 1 {
            let (pos, neg, zero) = signature(&self.deg_gram);
            if (pos, neg, zero) != (self.rank, 0, 0) {
                return Err(Error::Invalid(
                    "degree form must be positive definite".to_string(),
                ));
            }
        }
        if self.p < BigInt::from(2) {
            return Err(Error::Invalid("characteristic must be a prime".to_string()));
        }
        if self.tau.cols() != self.rank {
            return Err(Error::Invalid(
                "tau must have one column per Hom generator".to_string(),
            ));
        }
        Ok(())
    }

    /// `deg(phi) = phi^T (deg_gram/2) phi`.
    pub fn degree(&self, phi: &[BigInt]) -> Result<BigInt> {
        let b = self.bil(phi, phi)?;
        Ok(b / BigInt::from(2))
    }

    /// `bil(phi, psi) = deg(phi+psi) - deg(phi) - deg(psi)`.
    pub fn bil(&self, phi: &[BigInt], psi: &[BigInt]) -> Result<BigInt> {
        if phi.len() != self.rank || psi.len() != self.rank {
            return Err(Error::DimensionMismatch {
                expected: self.rank,
                got: phi.len().max(psi.len()),
                context: "Hom pairing",
            });
        }
        let gpsi = self.deg_gram.mul_vec(psi);
        Ok(phi.iter().zip(gpsi.iter()).map(|(a, b)| a * b).sum())
    }

    /// `tau(phi)` reduced into `F_p^k`.
    pub fn tau_of(&self, phi: &[BigInt]) -> Result<IntVec> {
        if phi.len() != self.rank {
            return Err(Error::DimensionMismatch {
                expected: self.rank,
                got: phi.len(),
                context: "separability functional",
            });
        }
        Ok(self
            .tau
            .mul_vec(phi)
            .into_iter()
            .map(|x| x.mod_floor(&self.p))
            .collect())
    }
}

/// The class `l(phi, a, b)` in coordinates `(a, b, phi_1..phi_m)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductClass {
    #[serde(with = "jsonnum::big")]
    pub a: BigInt,
    #[serde(with = "jsonnum::big")]
    pub b: BigInt,
    #[serde(with = "jsonnum::vec")]
    pub phi: IntVec,
}

impl ProductClass {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, phi: Vec<i64>) -> Self {
        ProductClass {
            a: a.into(),
            b: b.into(),
            phi: phi.into_iter().map(BigInt::from).collect(),
        }
    }

    /// Coordinates in the `LatticeSpec` produced by [`to_lattice_spec`].
    pub fn to_coords(&self) -> IntVec {
        let mut v = Vec::with_capacity(self.phi.len() + 2);
        v.push(self.a.clone());
        v.push(self.b.clone());
        v.extend(self.phi.iter().cloned());
        v
    }

    pub fn from_coords(coords: &[BigInt]) -> Self {
        assert!(coords.len() >= 2, "product class needs at least (a, b)");
        ProductClass {
            a: coords[0].clone(),
            b: coords[1].clone(),
            phi: coords[2..].to_vec(),
        }
    }
}

/// Pullback data of a separable isogeny between surfaces: `iota` is the
/// pullback on NS in coordinates, `degree` its degree and `exponent` the
/// exponent of its kernel.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverDatum {
    #[serde(with = "jsonnum::mat")]
    pub iota: IntMat,
    #[serde(with = "jsonnum::big")]
    pub degree: BigInt,
    #[serde(with = "jsonnum::big")]
    pub exponent: BigInt,
}

impl CoverDatum {
    pub fn identity(rank: usize) -> Self {
        CoverDatum {
            iota: IntMat::identity(rank),
            degree: BigInt::one(),
            exponent: BigInt::one(),
        }
    }
}

/// Intersection number of two product classes:
/// `c1.a * c2.b + c2.a * c1.b - bil(c1.phi, c2.phi)`.
pub fn product_pairing(hl: &HomLattice, c1: &ProductClass, c2: &ProductClass) -> Result<BigInt> {
    let cross = &c1.a * &c2.b + &c2.a * &c1.b;
    let hom = hl.bil(&c1.phi, &c2.phi)?;
    Ok(cross - hom)
}

/// Package the product lattice as a `LatticeSpec` of rank `2 + m`: a
/// hyperbolic plane for the two fiber classes plus the negated degree form,
/// with ample class `l(0, ample_a, ample_b)`.
pub fn to_lattice_spec(hl: &HomLattice, ample_a: i64, ample_b: i64) -> Result<LatticeSpec> {
    if ample_a <= 0 || ample_b <= 0 {
        return Err(Error::Precondition(
            "product polarization degrees must be positive".to_string(),
        ));
    }
    hl.validate()?;
    let m = hl.rank;
    let n = 2 + m;
    let mut gram = IntMat::zeros(n, n);
    gram[(0, 1)] = BigInt::one();
    gram[(1, 0)] = BigInt::one();
    for i in 0..m {
        for j in 0..m {
            gram[(i + 2, j + 2)] = -hl.deg_gram[(i, j)].clone();
        }
    }
    let mut ample = vec![BigInt::zero(); n];
    ample[0] = BigInt::from(ample_a);
    ample[1] = BigInt::from(ample_b);
    let spec = LatticeSpec::new(n, gram, ample);
    let report = crate::lattice::validate_lattice(&spec);
    if !report.valid {
        return Err(Error::Inconsistent(format!(
            "product lattice failed validation: {:?}",
            report.violations
        )));
    }
    Ok(spec)
}

/// A morphism is a separable isogeny iff it is nonzero and its differential
/// does not vanish, i.e. `tau(phi) != 0` in `F_p^k`.
pub fn is_separable(hl: &HomLattice, phi: &[BigInt]) -> Result<bool> {
    if phi.iter().all(|x| x.is_zero()) {
        return Ok(false);
    }
    Ok(hl.tau_of(phi)?.iter().any(|x| !x.is_zero()))
}

/// Certificate for a separability shift `gamma = phi + r xi`.
#[derive(Clone, Debug, Serialize)]
pub struct SeparabilityShift {
    #[serde(with = "jsonnum::vec")]
    pub gamma: IntVec,
    pub separable: bool,
}

/// Shift an inseparable `phi` by `r xi` with `xi` separable and
/// `gcd(r, p) = 1`; the result `gamma = phi + r xi` is separable because
/// `tau(gamma) = r tau(xi) != 0`.
pub fn separability_shift(
    hl: &HomLattice,
    phi_insep: &[BigInt],
    xi_sep: &[BigInt],
    r: &BigInt,
) -> Result<SeparabilityShift> {
    if !is_separable(hl, xi_sep)? {
        return Err(Error::Precondition(
            "shift class xi must be separable".to_string(),
        ));
    }
    if hl.tau_of(phi_insep)?.iter().any(|x| !x.is_zero()) {
        return Err(Error::Precondition(
            "phi must be inseparable (tau(phi) = 0)".to_string(),
        ));
    }
    if !r.gcd(&hl.p).is_one() {
        return Err(Error::Precondition(format!(
            "shift multiplier {r} must be coprime to the characteristic {}",
            hl.p
        )));
    }
    let gamma: IntVec = phi_insep
        .iter()
        .zip(xi_sep.iter())
        .map(|(a, b)| a + r * b)
        .collect();
    let separable = is_separable(hl, &gamma)?;
    if !separable {
        return Err(Error::Inconsistent(
            "gamma = phi + r xi failed the separability check".to_string(),
        ));
    }
    Ok(SeparabilityShift { gamma, separable })
}

/// Validate pullback data `iota` from `src` to `dst`:
/// the projection-formula scaling `iota^T G_dst iota = degree * G_src`,
/// the inclusion `exponent^2 * Z^rank(dst)` inside the image of `iota`
/// (tested through the Smith normal form), and `exponent | degree`.
pub fn validate_cover(src: &LatticeSpec, dst: &LatticeSpec, c: &CoverDatum) -> bool {
    if c.iota.rows() != dst.rank || c.iota.cols() != src.rank {
        return false;
    }
    if c.degree <= BigInt::zero() || c.exponent <= BigInt::zero() {
        return false;
    }
    let scaled = c.iota.transpose().mul(&dst.gram).mul(&c.iota);
    if scaled != src.gram.scale(&c.degree) {
        return false;
    }
    if !(&c.degree % &c.exponent).is_zero() {
        return false;
    }
    // e^2 Z^rho lies in the image of iota iff iota has full row rank and
    // every elementary divisor divides e^2.
    let snf = smith_normal_form(&c.iota);
    let divisors = snf.divisors();
    if divisors.len() != dst.rank {
        return false;
    }
    let e2 = &c.exponent * &c.exponent;
    divisors.iter().all(|d| (&e2 % d).is_zero())
}

/// Degree of the complementary isogeny: if `nu` has degree `deg_nu` and
/// `mu . nu` is multiplication by `e` on a `dim`-dimensional abelian
/// variety (total degree `e^(2 dim)`), then `deg mu = e^(2 dim) / deg_nu`.
pub fn complementary_degree(e: &BigInt, dim: u32, deg_nu: &BigInt) -> Result<BigInt> {
    if deg_nu.is_zero() {
        return Err(Error::Precondition(
            "cover degree must be nonzero".to_string(),
        ));
    }
    let total = e.pow(2 * dim);
    let (q, r) = total.div_rem(deg_nu);
    if !r.is_zero() {
        return Err(Error::Precondition(format!(
            "{deg_nu} does not divide {total} = e^(2 dim)"
        )));
    }
    Ok(q)
}
