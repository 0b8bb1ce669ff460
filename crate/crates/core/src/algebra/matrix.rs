//! Dense integer matrices.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::IntPoly;
use super::AlgebraError;

/// Row-major dense matrix of arbitrary-precision integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self, AlgebraError> {
        if data.len() != rows * cols {
            return Err(AlgebraError::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(IntMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, &BigInt::one())
    }

    pub fn scalar(n: usize, s: &BigInt) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = s.clone();
        }
        m
    }

    pub fn diagonal(d: &[BigInt]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }

    /// Build from rows; all rows must have the same length.
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self, AlgebraError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(AlgebraError::Shape("ragged rows".into()));
        }
        Ok(IntMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Convenience constructor for small literal matrices.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
        .expect("literal matrix rows must have equal length")
    }

    /// Empty matrix with `cols` columns and no rows.
    pub fn empty(cols: usize) -> Self {
        IntMatrix {
            rows: 0,
            cols,
            data: Vec::new(),
        }
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

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [BigInt] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// `row[dst] += factor * row[src]`
    pub fn add_row_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = &self.data[src * self.cols + j] * factor;
            self.data[dst * self.cols + j] += v;
        }
    }

    pub fn negate_row(&mut self, i: usize) {
        for x in self.row_mut(i) {
            *x = -std::mem::take(x);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// `col[dst] += factor * col[src]`
    pub fn add_col_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = &self.data[i * self.cols + src] * factor;
            self.data[i * self.cols + dst] += v;
        }
    }

    pub fn mul(&self, rhs: &IntMatrix) -> Result<IntMatrix, AlgebraError> {
        if self.cols != rhs.rows {
            return Err(AlgebraError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out.data[i * rhs.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Product for operands known to be compatible; panics on shape mismatch.
    pub fn matmul(&self, rhs: &IntMatrix) -> IntMatrix {
        self.mul(rhs).expect("matrix shapes checked by caller")
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `v^T * self`
    pub fn vec_mul(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![BigInt::zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                let a = &self[(i, j)];
                if !a.is_zero() {
                    *o += vi * a;
                }
            }
        }
        out
    }

    /// `x^T * self * y`
    pub fn bilinear(&self, x: &[BigInt], y: &[BigInt]) -> BigInt {
        self.vec_mul(x).iter().zip(y).map(|(a, b)| a * b).sum()
    }

    pub fn add(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: &BigInt) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// Entrywise exact division; `None` if some entry is not divisible.
    pub fn div_exact(&self, s: &BigInt) -> Option<IntMatrix> {
        let mut data = Vec::with_capacity(self.data.len());
        for a in &self.data {
            let (q, r) = a.div_rem(s);
            if !r.is_zero() {
                return None;
            }
            data.push(q);
        }
        Some(IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Entrywise reduction into `[0, m)`.
    pub fn reduce_mod(&self, m: &BigInt) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.mod_floor(m)).collect(),
        }
    }

    pub fn pow(&self, mut e: u64) -> IntMatrix {
        assert!(self.is_square());
        let mut base = self.clone();
        let mut acc = Self::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.matmul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.matmul(&base);
            }
        }
        acc
    }

    pub fn trace(&self) -> BigInt {
        (0..self.rows.min(self.cols)).map(|i| &self[(i, i)]).sum()
    }

    /// `P(self)` by Horner's rule.
    pub fn eval_poly(&self, p: &IntPoly) -> IntMatrix {
        assert!(self.is_square());
        let n = self.rows;
        let mut acc = Self::zeros(n, n);
        for c in p.coeffs().iter().rev() {
            acc = acc.matmul(self);
            for i in 0..n {
                acc[(i, i)] += c;
            }
        }
        acc
    }

    /// Rows stacked vertically.
    pub fn vstack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        IntMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Columns side by side.
    pub fn hstack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.rows, other.rows);
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        IntMatrix {
            rows: self.rows,
            cols: self.cols + other.cols,
            data,
        }
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &IntMatrix) -> IntMatrix {
        let mut m = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].clone();
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                m[(self.rows + i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        m
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> IntMatrix {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for i in rows.clone() {
            data.extend_from_slice(&self.row(i)[cols.clone()]);
        }
        IntMatrix {
            rows: rows.len(),
            cols: cols.len(),
            data,
        }
    }

    pub fn select_rows(&self, idx: &[usize]) -> IntMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        IntMatrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Result<BigInt, AlgebraError> {
        if !self.is_square() {
            return Err(AlgebraError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut m = self.clone();
        let mut sign = false;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !m[(i, k)].is_zero()) {
                    Some(i) => {
                        m.swap_rows(k, i);
                        sign = !sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)];
                    m[(i, j)] = v / &prev;
                }
                m[(i, k)] = BigInt::zero();
            }
            prev = m[(k, k)].clone();
        }
        let d = m[(n - 1, n - 1)].clone();
        Ok(if sign { -d } else { d })
    }

    /// Rank over the rationals (fraction-free elimination).
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        let mut prev = BigInt::one();
        for col in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let Some(piv) = (rank..m.rows).find(|&i| !m[(i, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(rank, piv);
            for i in rank + 1..m.rows {
                for j in col + 1..m.cols {
                    let v = &m[(i, j)] * &m[(rank, col)] - &m[(i, col)] * &m[(rank, j)];
                    m[(i, j)] = v / &prev;
                }
                m[(i, col)] = BigInt::zero();
            }
            prev = m[(rank, col)].clone();
            rank += 1;
        }
        rank
    }

    /// Characteristic polynomial `det(tI - A)` by Berkowitz's division-free
    /// algorithm.
    pub fn charpoly(&self) -> Result<IntPoly, AlgebraError> {
        if !self.is_square() {
            return Err(AlgebraError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        // v holds coefficients from the leading one downwards.
        let mut v = vec![BigInt::one()];
        for r in 1..=n {
            let a_rr = &self[(r - 1, r - 1)];
            // column of the Toeplitz matrix: 1, -a_rr, -R C, -R A C, ...
            let mut col = Vec::with_capacity(r + 1);
            col.push(BigInt::one());
            col.push(-a_rr.clone());
            if r > 1 {
                let row_r: Vec<BigInt> = self.row(r - 1)[..r - 1].to_vec();
                let mut c: Vec<BigInt> = (0..r - 1).map(|i| self[(i, r - 1)].clone()).collect();
                for _ in 0..r - 1 {
                    let dot: BigInt = row_r.iter().zip(&c).map(|(a, b)| a * b).sum();
                    col.push(-dot);
                    // c <- A_{r-1} c
                    c = (0..r - 1)
                        .map(|i| self.row(i)[..r - 1].iter().zip(&c).map(|(a, b)| a * b).sum())
                        .collect();
                }
            }
            let mut next = vec![BigInt::zero(); r + 1];
            for (i, out) in next.iter_mut().enumerate() {
                for (j, vj) in v.iter().enumerate().take(i + 1) {
                    if i - j < col.len() {
                        *out += &col[i - j] * vj;
                    }
                }
            }
            v = next;
        }
        v.reverse();
        Ok(IntPoly::new(v))
    }

    pub fn to_rational_rows(&self) -> Vec<Vec<BigRational>> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|x| BigRational::from_integer(x.clone()))
                    .collect()
            })
            .collect()
    }

    pub fn max_abs_entry(&self) -> BigInt {
        self.data.iter().map(|x| x.abs()).max().unwrap_or_default()
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// See [`IntMatrix::charpoly`].
pub fn charpoly(a: &IntMatrix) -> Result<IntPoly, AlgebraError> {
    a.charpoly()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charpoly_identity() {
        let cp = IntMatrix::identity(2).charpoly().unwrap();
        assert_eq!(cp, IntPoly::from_i64(&[1, -2, 1]));
    }

    #[test]
    fn charpoly_companion() {
        // companion of t^2 - c t + q^2 with c = 3, q = 5
        let a = IntMatrix::from_i64(&[&[0, -25], &[1, 3]]);
        assert_eq!(a.charpoly().unwrap(), IntPoly::from_i64(&[25, -3, 1]));
    }

    #[test]
    fn charpoly_non_square() {
        let a = IntMatrix::zeros(2, 3);
        assert!(matches!(a.charpoly(), Err(AlgebraError::NonSquare { .. })));
    }

    #[test]
    fn det_with_pivoting() {
        let a = IntMatrix::from_i64(&[&[0, 1, 2], &[1, 0, 3], &[4, -3, 8]]);
        assert_eq!(a.det().unwrap(), BigInt::from(-2));
        assert_eq!(IntMatrix::from_i64(&[&[1, 2], &[2, 4]]).det().unwrap(), BigInt::zero());
    }

    #[test]
    fn rank_small() {
        assert_eq!(IntMatrix::from_i64(&[&[1, 2], &[2, 4]]).rank(), 1);
        assert_eq!(IntMatrix::from_i64(&[&[0, 0], &[0, 3]]).rank(), 1);
        assert_eq!(IntMatrix::zeros(3, 3).rank(), 0);
    }

    #[test]
    fn pow_and_eval() {
        let a = IntMatrix::from_i64(&[&[1, 1], &[0, 1]]);
        assert_eq!(a.pow(5), IntMatrix::from_i64(&[&[1, 5], &[0, 1]]));
        let cp = a.charpoly().unwrap();
        assert!(a.eval_poly(&cp).is_zero());
    }
}
