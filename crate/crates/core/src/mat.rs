//! Dense integer matrices with exact algorithms.
//!
//! Everything here runs over `BigInt` (or `BigRational` internally), so
//! results are exact: determinants, unimodular inverses, Smith normal form
//! with its transformation matrices, and the signature of a symmetric form
//! via congruence diagonalization over the rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Index, IndexMut};

pub type IntVec = Vec<BigInt>;

/// Row-major dense matrix over `BigInt`.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self[(i, j)].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for IntMat {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl IntMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMat {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<BigInt>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        IntMat { rows, cols, data }
    }

    /// Convenience constructor from machine integers, used heavily in tests.
    pub fn from_rows(rows: &[&[i64]]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            assert_eq!(r.len(), ncols, "ragged rows");
            data.extend(r.iter().map(|&x| BigInt::from(x)));
        }
        IntMat::from_vec(nrows, ncols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if self[(i, j)] != self[(j, i)] {
                    return false;
                }
            }
        }
        true
    }

    pub fn transpose(&self) -> IntMat {
        let mut t = IntMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn neg(&self) -> IntMat {
        let data = self.data.iter().map(|x| -x).collect();
        IntMat::from_vec(self.rows, self.cols, data)
    }

    pub fn scale(&self, k: &BigInt) -> IntMat {
        let data = self.data.iter().map(|x| x * k).collect();
        IntMat::from_vec(self.rows, self.cols, data)
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut out = IntMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a * &other[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> IntVec {
        assert_eq!(self.cols, v.len(), "matrix-vector shape");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| &self[(i, j)] * &v[j]).sum())
            .collect()
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        assert!(self.is_square(), "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                    Some(i) => {
                        for j in 0..n {
                            let tmp = a[(k, j)].clone();
                            a[(k, j)] = a[(i, j)].clone();
                            a[(i, j)] = tmp;
                        }
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)];
                    a[(i, j)] = num / &prev; // exact by Bareiss
                }
            }
            prev = a[(k, k)].clone();
        }
        sign * a[(n - 1, n - 1)].clone()
    }

    /// Exact inverse over the rationals; `None` if singular or non-integral.
    ///
    /// Integer isometries always have determinant +-1, so their inverses are
    /// integral and this returns `Some`.
    pub fn inverse_integral(&self) -> Option<IntMat> {
        assert!(self.is_square());
        let n = self.rows;
        // Gauss-Jordan on [A | I] over BigRational.
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                (0..2 * n)
                    .map(|j| {
                        if j < n {
                            BigRational::from(self[(i, j)].clone())
                        } else if j - n == i {
                            BigRational::one()
                        } else {
                            BigRational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n).find(|&i| !a[i][col].is_zero())?;
            a.swap(col, pivot);
            let p = a[col][col].clone();
            for j in 0..2 * n {
                a[col][j] /= p.clone();
            }
            for i in 0..n {
                if i != col && !a[i][col].is_zero() {
                    let f = a[i][col].clone();
                    for j in 0..2 * n {
                        let sub = &f * &a[col][j];
                        a[i][j] -= sub;
                    }
                }
            }
        }
        let mut out = IntMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let q = &a[i][j + n];
                if !q.denom().is_one() {
                    return None;
                }
                out[(i, j)] = q.numer().clone();
            }
        }
        Some(out)
    }
}

/// Smith normal form `u * a * v = d` with `u`, `v` unimodular and `d`
/// diagonal with nonnegative entries satisfying `d[i] | d[i+1]`.
pub struct SmithForm {
    pub u: IntMat,
    pub d: IntMat,
    pub v: IntMat,
}

impl SmithForm {
    /// The nonzero diagonal entries (elementary divisors).
    pub fn divisors(&self) -> Vec<BigInt> {
        let n = self.d.rows().min(self.d.cols());
        (0..n)
            .map(|i| self.d[(i, i)].clone())
            .filter(|x| !x.is_zero())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.divisors().len()
    }
}

pub fn smith_normal_form(a: &IntMat) -> SmithForm {
    let (rows, cols) = (a.rows(), a.cols());
    let mut d = a.clone();
    let mut u = IntMat::identity(rows);
    let mut v = IntMat::identity(cols);

    fn swap_rows(m: &mut IntMat, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..m.cols() {
            let tmp = m[(a, j)].clone();
            m[(a, j)] = m[(b, j)].clone();
            m[(b, j)] = tmp;
        }
    }
    fn swap_cols(m: &mut IntMat, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..m.rows() {
            let tmp = m[(i, a)].clone();
            m[(i, a)] = m[(i, b)].clone();
            m[(i, b)] = tmp;
        }
    }
    fn add_row(m: &mut IntMat, dst: usize, src: usize, k: &BigInt) {
        for j in 0..m.cols() {
            let add = k * &m[(src, j)];
            m[(dst, j)] += add;
        }
    }
    fn add_col(m: &mut IntMat, dst: usize, src: usize, k: &BigInt) {
        for i in 0..m.rows() {
            let add = k * &m[(i, src)];
            m[(i, dst)] += add;
        }
    }

    let n = rows.min(cols);
    let mut t = 0;
    while t < n {
        // Find a pivot: smallest nonzero |entry| in the trailing block.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !d[(i, j)].is_zero()
                    && pivot.is_none_or(|(pi, pj)| d[(i, j)].abs() < d[(pi, pj)].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        swap_rows(&mut d, t, pi);
        swap_rows(&mut u, t, pi);
        swap_cols(&mut d, t, pj);
        swap_cols(&mut v, t, pj);

        // Reduce row and column t until everything below/right of the pivot
        // in its row and column vanishes.
        loop {
            let mut changed = false;
            for i in t + 1..rows {
                if !d[(i, t)].is_zero() {
                    let q = -(&d[(i, t)] / &d[(t, t)]);
                    add_row(&mut d, i, t, &q);
                    add_row(&mut u, i, t, &q);
                    if !d[(i, t)].is_zero() {
                        swap_rows(&mut d, t, i);
                        swap_rows(&mut u, t, i);
                        changed = true;
                    }
                }
            }
            for j in t + 1..cols {
                if !d[(t, j)].is_zero() {
                    let q = -(&d[(t, j)] / &d[(t, t)]);
                    add_col(&mut d, j, t, &q);
                    add_col(&mut v, j, t, &q);
                    if !d[(t, j)].is_zero() {
                        swap_cols(&mut d, t, j);
                        swap_cols(&mut v, t, j);
                        changed = true;
                    }
                }
            }
            let row_clear = (t + 1..rows).all(|i| d[(i, t)].is_zero());
            let col_clear = (t + 1..cols).all(|j| d[(t, j)].is_zero());
            if row_clear && col_clear && !changed {
                break;
            }
        }

        // Enforce divisibility of the pivot into the trailing block: if some
        // entry is not divisible, fold its row into row t and restart.
        let mut fold = None;
        'scan: for i in t + 1..rows {
            for j in t + 1..cols {
                if !(&d[(i, j)] % &d[(t, t)]).is_zero() {
                    fold = Some(i);
                    break 'scan;
                }
            }
        }
        if let Some(i) = fold {
            add_row(&mut d, t, i, &BigInt::one());
            add_row(&mut u, t, i, &BigInt::one());
            continue; // redo step t
        }

        if d[(t, t)].is_negative() {
            for j in 0..cols {
                let x = -d[(t, j)].clone();
                d[(t, j)] = x;
            }
            for j in 0..rows {
                let x = -u[(t, j)].clone();
                u[(t, j)] = x;
            }
        }
        t += 1;
    }

    SmithForm { u, d, v }
}

/// Solve `a * x = b` over the integers via the Smith normal form.
/// Returns `None` when no integral solution exists.
pub fn solve_integer(a: &IntMat, b: &[BigInt]) -> Option<IntVec> {
    assert_eq!(a.rows(), b.len(), "solve shape");
    let snf = smith_normal_form(a);
    let ub = snf.u.mul_vec(b);
    let n = a.rows().min(a.cols());
    let mut y = vec![BigInt::zero(); a.cols()];
    for i in 0..a.rows() {
        if i < n && !snf.d[(i, i)].is_zero() {
            let (q, r) = num_integer::Integer::div_rem(&ub[i], &snf.d[(i, i)]);
            if !r.is_zero() {
                return None;
            }
            y[i] = q;
        } else if !ub[i].is_zero() {
            return None;
        }
    }
    Some(snf.v.mul_vec(&y))
}

/// Signature `(positive, negative, zero)` of a symmetric integer matrix,
/// computed by exact congruence diagonalization over the rationals.
pub fn signature(g: &IntMat) -> (usize, usize, usize) {
    assert!(g.is_symmetric(), "signature of non-symmetric matrix");
    let n = g.rows();
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| BigRational::from(g[(i, j)].clone()))
                .collect()
        })
        .collect();

    let (mut pos, mut neg, mut zero) = (0usize, 0usize, 0usize);
    for k in 0..n {
        if m[k][k].is_zero() {
            if let Some(i) = (k + 1..n).find(|&i| !m[i][i].is_zero()) {
                // Symmetric swap of rows/cols k and i.
                m.swap(k, i);
                for row in m.iter_mut() {
                    row.swap(k, i);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| !m[k][j].is_zero()) {
                // Zero diagonal but nonzero off-diagonal: m[k][k] becomes
                // 2*m[k][j] after the symmetric row/col addition.
                for col in 0..n {
                    let add = m[j][col].clone();
                    m[k][col] += add;
                }
                for row in m.iter_mut() {
                    let add = row[j].clone();
                    row[k] += add;
                }
            } else {
                zero += 1;
                continue;
            }
        }
        let pivot = m[k][k].clone();
        if pivot.is_zero() {
            zero += 1;
            continue;
        }
        if pivot > BigRational::zero() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in k + 1..n {
            if m[i][k].is_zero() {
                continue;
            }
            let f = &m[i][k] / &pivot;
            for col in 0..n {
                let sub = &f * &m[k][col];
                m[i][col] -= sub;
            }
            for row in m.iter_mut() {
                let sub = &f * &row[k];
                row[i] -= sub;
            }
        }
    }
    (pos, neg, zero)
}
