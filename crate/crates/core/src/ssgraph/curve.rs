//! Short Weierstrass curves over `F_{p^2}`, exact point counting, and the
//! supersingularity test.

use super::fp2::{FieldSpec, Fp2};
use crate::error::{Error, Result};

/// A curve `y^2 = x^3 + a x + b` with its j-invariant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CurveSS {
    pub a: Fp2,
    pub b: Fp2,
    pub j: Fp2,
}

/// Number of square roots of each field element: `cnt[t] = #{y : y^2 = t}`.
/// Built once per field, this makes point counting a single scan.
pub struct SquareTable {
    cnt: Vec<u8>,
}

impl SquareTable {
    pub fn build(fs: &FieldSpec) -> SquareTable {
        let mut cnt = vec![0u8; fs.q() as usize];
        for y in fs.elements() {
            cnt[fs.mul(y, y).index(fs.p)] += 1;
        }
        SquareTable { cnt }
    }

    pub fn roots_of(&self, t: Fp2, p: u64) -> u64 {
        self.cnt[t.index(p)] as u64
    }
}

pub fn discriminant(fs: &FieldSpec, a: Fp2, b: Fp2) -> Fp2 {
    // 4 a^3 + 27 b^2
    let a3 = fs.mul(fs.mul(a, a), a);
    let b2 = fs.mul(b, b);
    fs.add(fs.scal(4, a3), fs.scal(27, b2))
}

pub fn j_invariant(fs: &FieldSpec, a: Fp2, b: Fp2) -> Result<Fp2> {
    let disc = discriminant(fs, a, b);
    if disc.is_zero() {
        return Err(Error::Invalid("singular curve".to_string()));
    }
    let a3 = fs.mul(fs.mul(a, a), a);
    let num = fs.scal(1728, fs.scal(4, a3));
    Ok(fs.mul(num, fs.inv(disc)?))
}

/// A curve with the requested j-invariant, via the standard model
/// `a = 3j(1728 - j)`, `b = 2j(1728 - j)^2` (and the special models for
/// j = 0 and j = 1728).
pub fn curve_from_j(fs: &FieldSpec, j: Fp2) -> Result<CurveSS> {
    if fs.p <= 3 {
        return Err(Error::Invalid(
            "characteristic 2 and 3 are not supported".to_string(),
        ));
    }
    let j1728 = fs.from_u64(1728);
    let (a, b) = if j.is_zero() {
        (fs.from_u64(0), fs.from_u64(1))
    } else if j == j1728 {
        (fs.from_u64(1), fs.from_u64(0))
    } else {
        let k = fs.sub(j1728, j);
        let a = fs.scal(3, fs.mul(j, k));
        let b = fs.scal(2, fs.mul(j, fs.mul(k, k)));
        (a, b)
    };
    let jj = j_invariant(fs, a, b)?;
    if jj != j {
        return Err(Error::Inconsistent(format!(
            "curve construction produced j = {jj:?}, wanted {j:?}"
        )));
    }
    Ok(CurveSS { a, b, j })
}

/// `x^3 + a x + b` at `x`.
pub fn eval_rhs(fs: &FieldSpec, c: &CurveSS, x: Fp2) -> Fp2 {
    let x2 = fs.mul(x, x);
    fs.add(fs.add(fs.mul(x2, x), fs.mul(c.a, x)), c.b)
}

/// Exact order of `E(F_{p^2})` by scanning every x-coordinate.
pub fn point_count(fs: &FieldSpec, table: &SquareTable, c: &CurveSS) -> u64 {
    let mut count = 1; // point at infinity
    for x in fs.elements() {
        count += table.roots_of(eval_rhs(fs, c, x), fs.p);
    }
    count
}

/// Trace of Frobenius over `F_{p^2}`: `t = q + 1 - #E`.
pub fn trace(fs: &FieldSpec, table: &SquareTable, c: &CurveSS) -> i64 {
    fs.q() as i64 + 1 - point_count(fs, table, c) as i64
}

pub fn is_supersingular_curve(fs: &FieldSpec, table: &SquareTable, c: &CurveSS) -> bool {
    trace(fs, table, c).rem_euclid(fs.p as i64) == 0
}

/// Supersingularity of the j-invariant: build a curve and test whether the
/// Frobenius trace vanishes mod p.
pub fn is_supersingular(fs: &FieldSpec, j: Fp2) -> Result<bool> {
    let table = SquareTable::build(fs);
    let c = curve_from_j(fs, j)?;
    Ok(is_supersingular_curve(fs, &table, &c))
}
