//! Arithmetic in `F_{p^2} = F_p[x] / (x^2 + m1 x + m0)`.
//!
//! Elements are coefficient pairs `(c0, c1)` for `c0 + c1 x`, ordered and
//! encoded lexicographically so that every enumeration in this crate is
//! reproducible. The default modulus is `x^2 + c` with the smallest `c`
//! making it irreducible.

use crate::error::{Error, Result};

/// The field `F_{p^2}` with a fixed monic degree-2 modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldSpec {
    pub p: u64,
    /// Constant coefficient of the modulus.
    pub m0: u64,
    /// Linear coefficient of the modulus.
    pub m1: u64,
}

/// An element `c0 + c1 x` of `F_{p^2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fp2 {
    pub c0: u64,
    pub c1: u64,
}

impl Fp2 {
    pub const ZERO: Fp2 = Fp2 { c0: 0, c1: 0 };

    pub fn is_zero(&self) -> bool {
        self.c0 == 0 && self.c1 == 0
    }

    /// Index in `0..p^2` used for tables and orderings (lexicographic in
    /// `(c0, c1)`).
    pub fn index(&self, p: u64) -> usize {
        (self.c0 * p + self.c1) as usize
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    /// Build a field with an explicit modulus `x^2 + m1 x + m0`, verifying
    /// that `p` is an odd prime at desk scale and the modulus has no root
    /// in `F_p`.
    pub fn new(p: u64, m0: u64, m1: u64) -> Result<FieldSpec> {
        if !is_prime(p) || p == 2 {
            return Err(Error::Invalid(format!("{p} is not an odd prime")));
        }
        if p > 500 {
            return Err(Error::Invalid(format!(
                "p = {p} exceeds the supported desk scale (p <= 500)"
            )));
        }
        let fs = FieldSpec {
            p,
            m0: m0 % p,
            m1: m1 % p,
        };
        for r in 0..p {
            if (r * r + fs.m1 * r + fs.m0).is_multiple_of(p) {
                return Err(Error::Invalid(format!(
                    "modulus x^2 + {}x + {} has root {r} over F_{p}",
                    fs.m1, fs.m0
                )));
            }
        }
        Ok(fs)
    }

    /// The canonical field for `p`: modulus `x^2 + c` with the smallest
    /// `c >= 1` that is irreducible (i.e. `-c` is a non-residue).
    pub fn canonical(p: u64) -> Result<FieldSpec> {
        for c in 1..p {
            if let Ok(fs) = FieldSpec::new(p, c, 0) {
                return Ok(fs);
            }
        }
        Err(Error::Invalid(format!(
            "no irreducible binomial modulus over F_{p}"
        )))
    }

    pub fn q(&self) -> u64 {
        self.p * self.p
    }

    pub fn from_u64(&self, n: u64) -> Fp2 {
        Fp2 {
            c0: n % self.p,
            c1: 0,
        }
    }

    pub fn from_i64(&self, n: i64) -> Fp2 {
        let p = self.p as i64;
        Fp2 {
            c0: n.rem_euclid(p) as u64,
            c1: 0,
        }
    }

    pub fn elem(&self, c0: u64, c1: u64) -> Fp2 {
        Fp2 {
            c0: c0 % self.p,
            c1: c1 % self.p,
        }
    }

    /// Element with the given index (inverse of [`Fp2::index`]).
    pub fn from_index(&self, i: usize) -> Fp2 {
        let i = i as u64;
        Fp2 {
            c0: i / self.p,
            c1: i % self.p,
        }
    }

    pub fn add(&self, a: Fp2, b: Fp2) -> Fp2 {
        Fp2 {
            c0: (a.c0 + b.c0) % self.p,
            c1: (a.c1 + b.c1) % self.p,
        }
    }

    pub fn sub(&self, a: Fp2, b: Fp2) -> Fp2 {
        Fp2 {
            c0: (a.c0 + self.p - b.c0) % self.p,
            c1: (a.c1 + self.p - b.c1) % self.p,
        }
    }

    pub fn neg(&self, a: Fp2) -> Fp2 {
        self.sub(Fp2::ZERO, a)
    }

    /// Product modulo `x^2 + m1 x + m0`: the `x^2` term folds back as
    /// `x^2 = -m1 x - m0`.
    pub fn mul(&self, a: Fp2, b: Fp2) -> Fp2 {
        let p = self.p;
        let t0 = a.c0 * b.c0 % p;
        let t1 = (a.c0 * b.c1 + a.c1 * b.c0) % p;
        let t2 = a.c1 * b.c1 % p;
        Fp2 {
            c0: (t0 + (p - self.m0 % p) * t2) % p,
            c1: (t1 + (p - self.m1 % p) * t2) % p,
        }
    }

    pub fn scal(&self, k: u64, a: Fp2) -> Fp2 {
        let k = k % self.p;
        Fp2 {
            c0: k * a.c0 % self.p,
            c1: k * a.c1 % self.p,
        }
    }

    pub fn pow(&self, mut base: Fp2, mut exp: u64) -> Fp2 {
        let mut acc = self.from_u64(1);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: Fp2) -> Result<Fp2> {
        if a.is_zero() {
            return Err(Error::Invalid("inversion of zero".to_string()));
        }
        Ok(self.pow(a, self.q() - 2))
    }

    /// All field elements in lexicographic order of `(c0, c1)`.
    pub fn elements(&self) -> impl Iterator<Item = Fp2> + '_ {
        (0..self.p).flat_map(move |c0| (0..self.p).map(move |c1| Fp2 { c0, c1 }))
    }
}
