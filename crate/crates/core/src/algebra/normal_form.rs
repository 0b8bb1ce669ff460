//! Hermite and Smith normal forms, integer kernels, and Krylov-based
//! minimal polynomials.
//!
//! Lattices are always presented as row spans. The Hermite form here is the
//! row-style one: upper echelon, positive pivots, entries above each pivot
//! reduced into `[0, pivot)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::matrix::IntMatrix;
use super::poly::IntPoly;
use super::AlgebraError;

/// Row Hermite normal form `H = U * A` with `U` unimodular.
#[derive(Clone, Debug)]
pub struct Hermite {
    pub h: IntMatrix,
    pub u: IntMatrix,
    /// `(row, column)` of every pivot, in order.
    pub pivots: Vec<(usize, usize)>,
}

impl Hermite {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

pub fn hnf(a: &IntMatrix) -> Hermite {
    hnf_impl(a, true)
}

fn hnf_impl(a: &IntMatrix, track_u: bool) -> Hermite {
    let m = a.rows();
    let n = a.cols();
    let mut h = a.clone();
    let mut u = if track_u {
        IntMatrix::identity(m)
    } else {
        IntMatrix::zeros(0, 0)
    };
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        if r == m {
            break;
        }
        loop {
            // smallest nonzero magnitude at or below row r
            let best = (r..m)
                .filter(|&i| !h[(i, col)].is_zero())
                .min_by(|&i, &j| h[(i, col)].magnitude().cmp(h[(j, col)].magnitude()));
            let Some(best) = best else { break };
            h.swap_rows(r, best);
            if track_u {
                u.swap_rows(r, best);
            }
            let mut done = true;
            for i in r + 1..m {
                if h[(i, col)].is_zero() {
                    continue;
                }
                let q = h[(i, col)].div_floor(&h[(r, col)]);
                let f = -q;
                h.add_row_multiple(i, r, &f);
                if track_u {
                    u.add_row_multiple(i, r, &f);
                }
                if !h[(i, col)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[(r, col)].is_zero() {
            continue;
        }
        if h[(r, col)].is_negative() {
            h.negate_row(r);
            if track_u {
                u.negate_row(r);
            }
        }
        for i in 0..r {
            let q = h[(i, col)].div_floor(&h[(r, col)]);
            if !q.is_zero() {
                let f = -q;
                h.add_row_multiple(i, r, &f);
                if track_u {
                    u.add_row_multiple(i, r, &f);
                }
            }
        }
        pivots.push((r, col));
        r += 1;
    }
    Hermite { h, u, pivots }
}

/// Hermite form of the row span with the zero rows dropped.
pub fn hnf_basis(a: &IntMatrix) -> IntMatrix {
    let herm = hnf_impl(a, false);
    let r = herm.rank();
    herm.h.submatrix(0..r, 0..a.cols())
}

/// Smith invariant factors `d_1 | d_2 | ...`, one per `min(rows, cols)`,
/// zeros included at the end.
pub fn snf(a: &IntMatrix) -> Vec<BigInt> {
    let mut m = a.clone();
    let rows = m.rows();
    let cols = m.cols();
    let k = rows.min(cols);
    let mut diag = Vec::with_capacity(k);
    for t in 0..k {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if m[(i, j)].is_zero() {
                        continue;
                    }
                    if best.map_or(true, |(bi, bj)| m[(i, j)].magnitude() < m[(bi, bj)].magnitude()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                // remaining block is zero
                diag.extend(std::iter::repeat(BigInt::zero()).take(k - t));
                return diag;
            };
            m.swap_rows(t, bi);
            m.swap_cols(t, bj);
            let mut clean = true;
            for i in t + 1..rows {
                if !m[(i, t)].is_zero() {
                    let q = m[(i, t)].div_floor(&m[(t, t)]);
                    m.add_row_multiple(i, t, &-q);
                    clean &= m[(i, t)].is_zero();
                }
            }
            for j in t + 1..cols {
                if !m[(t, j)].is_zero() {
                    let q = m[(t, j)].div_floor(&m[(t, t)]);
                    m.add_col_multiple(j, t, &-q);
                    clean &= m[(t, j)].is_zero();
                }
            }
            if !clean {
                continue;
            }
            // pivot must divide the whole remaining block
            let p = m[(t, t)].clone();
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !m[(i, j)].is_multiple_of(&p)));
            match bad {
                Some(i) => m.add_row_multiple(t, i, &BigInt::one()),
                None => break,
            }
        }
        diag.push(m[(t, t)].abs());
    }
    diag
}

/// Basis (as rows) of the saturated integer kernel `{x : A x = 0}`.
///
/// Rows come from the unimodular transform of the Hermite form of `A^T`,
/// so they extend to a basis of `Z^n`; the returned basis is itself put in
/// Hermite form for determinism.
pub fn integer_kernel(a: &IntMatrix) -> IntMatrix {
    let n = a.cols();
    let at = a.transpose();
    let herm = hnf(&at);
    let r = herm.rank();
    if r == n {
        return IntMatrix::empty(n);
    }
    let idx: Vec<usize> = (r..n).collect();
    hnf_basis(&herm.u.select_rows(&idx))
}

/// Saturation `(span ⊗ Q) ∩ Z^n` of the row span of `b`, in Hermite form.
pub fn saturate_rows(b: &IntMatrix) -> IntMatrix {
    let n = b.cols();
    if b.rows() == 0 || b.is_zero() {
        return IntMatrix::empty(n);
    }
    // vectors orthogonal (for the standard dot product) to every row
    let perp = integer_kernel(b);
    if perp.rows() == 0 {
        return IntMatrix::identity(n);
    }
    integer_kernel(&perp)
}

/// Rational solution `x` of `x * B = v` (a row combination), if any.
pub fn solve_row_combination(b: &IntMatrix, v: &[BigInt]) -> Option<Vec<BigRational>> {
    let k = b.rows();
    let n = b.cols();
    assert_eq!(v.len(), n);
    // Solve B^T x = v by Gaussian elimination on the augmented system.
    let mut aug: Vec<Vec<BigRational>> = (0..n)
        .map(|j| {
            let mut row: Vec<BigRational> = (0..k).map(|i| BigRational::from_integer(b[(i, j)].clone())).collect();
            row.push(BigRational::from_integer(v[j].clone()));
            row
        })
        .collect();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..k {
        let Some(p) = (r..n).find(|&i| !aug[i][c].is_zero()) else {
            continue;
        };
        aug.swap(r, p);
        let inv = aug[r][c].recip();
        for x in aug[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != r && !aug[i][c].is_zero() {
                let f = aug[i][c].clone();
                #[allow(clippy::needless_range_loop)]
                for j in c..=k {
                    let t = &aug[r][j] * &f;
                    aug[i][j] -= t;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    if aug[r..].iter().any(|row| !row[k].is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); k];
    for (i, &c) in pivot_cols.iter().enumerate() {
        x[c] = aug[i][k].clone();
    }
    Some(x)
}

/// Fraction-free incremental row echelon with tracked combinations.
///
/// Rows are inserted one at a time; each insertion reports either that the
/// row was independent or an integer dependency among the inserted rows.
struct IncrementalEchelon {
    width: usize,
    /// (row, combination, pivot column)
    stored: Vec<(Vec<BigInt>, Vec<BigInt>, usize)>,
    count: usize,
}

impl IncrementalEchelon {
    fn new(width: usize) -> Self {
        IncrementalEchelon {
            width,
            stored: Vec::new(),
            count: 0,
        }
    }

    /// Inserts `v`; returns `Some(c)` with `sum c_i v_i = 0`, `c_last != 0`
    /// when `v` depends on earlier rows.
    fn insert(&mut self, v: Vec<BigInt>, max_len: usize) -> Option<Vec<BigInt>> {
        debug_assert_eq!(v.len(), self.width);
        let mut x = v;
        let mut combo = vec![BigInt::zero(); max_len];
        combo[self.count] = BigInt::one();
        for (row, rc, piv) in &self.stored {
            if x[*piv].is_zero() {
                continue;
            }
            let a = row[*piv].clone();
            let b = x[*piv].clone();
            for (xi, ri) in x.iter_mut().zip(row) {
                *xi = &*xi * &a - &b * ri;
            }
            for (ci, ri) in combo.iter_mut().zip(rc) {
                *ci = &*ci * &a - &b * ri;
            }
            let g = x.iter().chain(combo.iter()).fold(BigInt::zero(), |g, c| g.gcd(c));
            if g > BigInt::one() {
                for c in x.iter_mut().chain(combo.iter_mut()) {
                    *c /= &g;
                }
            }
        }
        self.count += 1;
        match x.iter().position(|c| !c.is_zero()) {
            Some(piv) => {
                self.stored.push((x, combo, piv));
                None
            }
            None => Some(combo),
        }
    }
}

/// Monic minimal polynomial of a square integer matrix: the first linear
/// dependency among `I, A, A^2, ...` found by growing the Krylov span.
pub fn minimal_poly(a: &IntMatrix) -> Result<IntPoly, AlgebraError> {
    if !a.is_square() {
        return Err(AlgebraError::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(IntPoly::one());
    }
    let mut ech = IncrementalEchelon::new(n * n);
    let mut power = IntMatrix::identity(n);
    for k in 0..=n {
        if let Some(mut combo) = ech.insert(power.entries().to_vec(), n + 1) {
            combo.truncate(k + 1);
            let lead = combo[k].clone();
            let poly = IntPoly::new(combo);
            // Gauss: the monic annihilator of an integer matrix is integral
            let monic: Vec<BigInt> = poly
                .coeffs()
                .iter()
                .map(|c| {
                    let (q, r) = c.div_rem(&lead);
                    debug_assert!(r.is_zero());
                    q
                })
                .collect();
            return Ok(IntPoly::new(monic));
        }
        power = power.matmul(a);
    }
    unreachable!("Cayley-Hamilton bounds the Krylov dimension by n")
}
