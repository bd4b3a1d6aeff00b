//! The extended Mukai lattice of an abelian surface at the numerical level.
//!
//! A surface is described by its Neron-Severi intersection form: an even
//! integral lattice of signature `(1, rho-1)` together with a designated
//! ample class `h`. Mukai vectors `(r, l, chi)` live in `Z + NS + Z` and
//! carry the pairing
//!
//! ```text
//! <(r, l, chi), (r', l', chi')> = l.l' - r chi' - chi r'
//! ```
//!
//! All arithmetic is exact: signatures are computed by congruence
//! diagonalization over the rationals, never by floating-point eigenvalues,
//! and every integer is arbitrary precision (twist formulas grow
//! quadratically and search loops must not overflow).

use crate::error::{Error, Result};
use crate::jsonnum;
use crate::mat::{signature, IntMat, IntVec};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// An even lattice of signature `(1, rho-1)` with a designated ample class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub rank: usize,
    #[serde(with = "jsonnum::mat")]
    pub gram: IntMat,
    #[serde(rename = "ample", with = "jsonnum::vec")]
    pub ample_ref: IntVec,
}

/// The triple `(r, l, chi)` in the extended lattice `Z + NS + Z`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MukaiVector {
    #[serde(with = "jsonnum::big")]
    pub r: BigInt,
    #[serde(with = "jsonnum::vec")]
    pub l: IntVec,
    #[serde(with = "jsonnum::big")]
    pub chi: BigInt,
}

impl MukaiVector {
    pub fn new(r: impl Into<BigInt>, l: Vec<i64>, chi: impl Into<BigInt>) -> Self {
        MukaiVector {
            r: r.into(),
            l: l.into_iter().map(BigInt::from).collect(),
            chi: chi.into(),
        }
    }

    /// The point class `(0, 0, 1)`.
    pub fn point(rank: usize) -> Self {
        MukaiVector {
            r: BigInt::zero(),
            l: vec![BigInt::zero(); rank],
            chi: BigInt::one(),
        }
    }

    /// The structure-sheaf class `(1, 0, 0)`.
    pub fn unit(rank: usize) -> Self {
        MukaiVector {
            r: BigInt::one(),
            l: vec![BigInt::zero(); rank],
            chi: BigInt::zero(),
        }
    }

    /// Flat coordinates `(r, l_1, ..., l_rho, chi)`.
    pub fn to_coords(&self) -> IntVec {
        let mut v = Vec::with_capacity(self.l.len() + 2);
        v.push(self.r.clone());
        v.extend(self.l.iter().cloned());
        v.push(self.chi.clone());
        v
    }

    pub fn from_coords(coords: &[BigInt]) -> Self {
        assert!(coords.len() >= 2, "coordinate vector too short");
        MukaiVector {
            r: coords[0].clone(),
            l: coords[1..coords.len() - 1].to_vec(),
            chi: coords[coords.len() - 1].clone(),
        }
    }
}

/// Report produced by [`validate_lattice`]; empty `violations` means valid.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<String>,
}

impl LatticeSpec {
    pub fn new(rank: usize, gram: IntMat, ample_ref: IntVec) -> Self {
        LatticeSpec {
            rank,
            gram,
            ample_ref,
        }
    }

    /// The hyperbolic plane `U` with ample class `(1, 1)`.
    pub fn hyperbolic() -> Self {
        LatticeSpec::new(
            2,
            IntMat::from_rows(&[&[0, 1], &[1, 0]]),
            vec![BigInt::one(), BigInt::one()],
        )
    }

    /// Intersection number `x.y` under the Gram matrix.
    pub fn inner(&self, x: &[BigInt], y: &[BigInt]) -> Result<BigInt> {
        self.check_len(x, "inner product, left argument")?;
        self.check_len(y, "inner product, right argument")?;
        let gy = self.gram.mul_vec(y);
        Ok(x.iter().zip(gy.iter()).map(|(a, b)| a * b).sum())
    }

    fn check_len(&self, v: &[BigInt], context: &'static str) -> Result<()> {
        if v.len() != self.rank {
            return Err(Error::DimensionMismatch {
                expected: self.rank,
                got: v.len(),
                context,
            });
        }
        Ok(())
    }

    /// Gram matrix of the extended Mukai form on `(r, l_1..l_rho, chi)`:
    /// `l.l' - r chi' - chi r'`.
    pub fn extended_gram(&self) -> IntMat {
        let n = self.rank + 2;
        let mut q = IntMat::zeros(n, n);
        for i in 0..self.rank {
            for j in 0..self.rank {
                q[(i + 1, j + 1)] = self.gram[(i, j)].clone();
            }
        }
        q[(0, n - 1)] = -BigInt::one();
        q[(n - 1, 0)] = -BigInt::one();
        q
    }
}

/// Check every structural invariant of a lattice description. Violations are
/// reported, not thrown.
pub fn validate_lattice(spec: &LatticeSpec) -> ValidationReport {
    let mut violations = Vec::new();
    if spec.rank == 0 {
        violations.push("rank must be positive".to_string());
    }
    if spec.gram.rows() != spec.rank || spec.gram.cols() != spec.rank {
        violations.push(format!(
            "gram matrix is {}x{}, expected {}x{}",
            spec.gram.rows(),
            spec.gram.cols(),
            spec.rank,
            spec.rank
        ));
        return ValidationReport {
            valid: false,
            violations,
        };
    }
    if !spec.gram.is_symmetric() {
        violations.push("gram matrix is not symmetric".to_string());
    }
    for i in 0..spec.rank {
        if spec.gram[(i, i)].is_odd() {
            violations.push(format!(
                "gram diagonal entry ({i},{i}) = {} is odd; the form must be even",
                spec.gram[(i, i)]
            ));
        }
    }
    if spec.gram.is_symmetric() {
        let (pos, neg, zero) = signature(&spec.gram);
        if (pos, neg, zero) != (1, spec.rank - 1, 0) {
            violations.push(format!(
                "signature is ({pos}, {neg}) with {zero} null directions; expected (1, {})",
                spec.rank - 1
            ));
        }
    }
    if spec.ample_ref.len() != spec.rank {
        violations.push(format!(
            "ample class has length {}, expected {}",
            spec.ample_ref.len(),
            spec.rank
        ));
    } else if let Ok(h2) = spec.inner(&spec.ample_ref, &spec.ample_ref) {
        if h2 <= BigInt::zero() {
            violations.push(format!("ample class has square {h2} <= 0"));
        }
    }
    ValidationReport {
        valid: violations.is_empty(),
        violations,
    }
}

/// The Mukai pairing `l.l' - r chi' - chi r'`.
pub fn mukai_pairing(spec: &LatticeSpec, v: &MukaiVector, w: &MukaiVector) -> Result<BigInt> {
    let ll = spec.inner(&v.l, &w.l)?;
    Ok(ll - &v.r * &w.chi - &v.chi * &w.r)
}

/// True iff `<v, v> = 0`.
pub fn is_isotropic(spec: &LatticeSpec, v: &MukaiVector) -> Result<bool> {
    Ok(mukai_pairing(spec, v, v)?.is_zero())
}

/// Ampleness of a numerical class on an abelian surface: positive square and
/// positive product against the designated ample class, which selects the
/// correct component of the positive cone.
pub fn is_ample(spec: &LatticeSpec, l: &[BigInt]) -> Result<bool> {
    let l2 = spec.inner(l, l)?;
    let lh = spec.inner(l, &spec.ample_ref)?;
    Ok(l2 > BigInt::zero() && lh > BigInt::zero())
}

/// Certificate that a Mukai vector satisfies the numerical hypotheses under
/// which the moduli space of stable sheaves is a fine smooth surface.
#[derive(Clone, Debug, Serialize)]
pub struct ModuliCertificate {
    /// `r > 0`.
    pub positive_rank: bool,
    /// `l` is ample.
    pub ample_class: bool,
    /// `gcd(r, chi) = 1`.
    pub coprime: bool,
    /// `<v, v> = 0`.
    pub isotropic: bool,
    pub pass: bool,
    #[serde(with = "jsonnum::big")]
    pub gcd: BigInt,
    #[serde(with = "jsonnum::big")]
    pub self_pairing: BigInt,
}

/// Evaluate the moduli-readiness flags `E1` (positive rank), `E2` (ample NS
/// component), `E3` (rank coprime to Euler characteristic) plus isotropy.
pub fn moduli_ready(spec: &LatticeSpec, v: &MukaiVector) -> Result<ModuliCertificate> {
    let positive_rank = v.r > BigInt::zero();
    let ample_class = is_ample(spec, &v.l)?;
    let gcd = v.r.gcd(&v.chi);
    let coprime = gcd.is_one();
    let self_pairing = mukai_pairing(spec, v, v)?;
    let isotropic = self_pairing.is_zero();
    Ok(ModuliCertificate {
        positive_rank,
        ample_class,
        coprime,
        isotropic,
        pass: positive_rank && ample_class && coprime && isotropic,
        gcd,
        self_pairing,
    })
}
