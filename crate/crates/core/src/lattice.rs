//! Integral quadratic lattices and their sublattices.
//!
//! A lattice is a symmetric integer Gram matrix; vectors are integer
//! coordinate vectors and sublattices are row spans in ambient coordinates.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{integer_kernel, saturate_rows, IntMatrix};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatticeError {
    #[error("Gram matrix must be square and non-empty")]
    NotSquare,
    #[error("Gram matrix is not symmetric")]
    NotSymmetric,
    #[error("form is degenerate")]
    DegenerateForm,
    #[error("sublattice basis rows are linearly dependent")]
    DependentBasis,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("{0} is not a (-2)-vector")]
    NotARoot(String),
}

/// `(positive, negative)` counts of a nondegenerate symmetric form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
}

impl Signature {
    pub fn new(positive: usize, negative: usize) -> Self {
        Signature { positive, negative }
    }
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.positive, self.negative)
    }
}

/// Signature of a symmetric integer matrix by symmetric rational
/// elimination. A zero diagonal with a nonzero off-diagonal entry is
/// eliminated as a hyperbolic 2x2 block contributing `(1, 1)`.
pub fn signature(gram: &IntMatrix) -> Result<Signature, LatticeError> {
    if !gram.is_square() {
        return Err(LatticeError::NotSquare);
    }
    if !gram.is_symmetric() {
        return Err(LatticeError::NotSymmetric);
    }
    let mut a = gram.to_rational_rows();
    let mut pos = 0;
    let mut neg = 0;
    while !a.is_empty() {
        let k = a.len();
        if let Some(i) = (0..k).find(|&i| !a[i][i].is_zero()) {
            if a[i][i].is_positive() {
                pos += 1;
            } else {
                neg += 1;
            }
            let piv = a[i][i].clone();
            let keep: Vec<usize> = (0..k).filter(|&j| j != i).collect();
            a = keep
                .iter()
                .map(|&x| keep.iter().map(|&y| &a[x][y] - &a[x][i] * &a[i][y] / &piv).collect())
                .collect();
            continue;
        }
        let Some((i, j)) = (0..k)
            .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
            .find(|&(i, j)| !a[i][j].is_zero())
        else {
            return Err(LatticeError::DegenerateForm);
        };
        pos += 1;
        neg += 1;
        let b = a[i][j].clone();
        let keep: Vec<usize> = (0..k).filter(|&x| x != i && x != j).collect();
        a = keep
            .iter()
            .map(|&x| {
                keep.iter()
                    .map(|&y| &a[x][y] - (&a[x][i] * &a[j][y] + &a[x][j] * &a[i][y]) / &b)
                    .collect()
            })
            .collect();
    }
    Ok(Signature::new(pos, neg))
}

/// An integral lattice given by its Gram matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    gram: IntMatrix,
    label: Option<String>,
}

impl Lattice {
    pub fn new(gram: IntMatrix) -> Result<Self, LatticeError> {
        if !gram.is_square() || gram.rows() == 0 {
            return Err(LatticeError::NotSquare);
        }
        if !gram.is_symmetric() {
            return Err(LatticeError::NotSymmetric);
        }
        Ok(Lattice { gram, label: None })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    /// The hyperbolic plane `U`, Gram `[[0,1],[1,0]]`.
    pub fn hyperbolic_plane() -> Self {
        Lattice::new(IntMatrix::from_i64(&[&[0, 1], &[1, 0]]))
            .unwrap()
            .with_label("U")
    }

    /// `E8(-1)`: the negated E8 Cartan matrix, Bourbaki node order
    /// (the chain 1-3-4-5-6-7-8 with node 2 attached to node 4).
    pub fn e8_minus() -> Self {
        let cartan: [[i64; 8]; 8] = [
            [2, 0, -1, 0, 0, 0, 0, 0],
            [0, 2, 0, -1, 0, 0, 0, 0],
            [-1, 0, 2, -1, 0, 0, 0, 0],
            [0, -1, -1, 2, -1, 0, 0, 0],
            [0, 0, 0, -1, 2, -1, 0, 0],
            [0, 0, 0, 0, -1, 2, -1, 0],
            [0, 0, 0, 0, 0, -1, 2, -1],
            [0, 0, 0, 0, 0, 0, -1, 2],
        ];
        let rows: Vec<&[i64]> = cartan.iter().map(|r| &r[..]).collect();
        Lattice::new(IntMatrix::from_i64(&rows).scale(&BigInt::from(-1)))
            .unwrap()
            .with_label("E8(-1)")
    }

    /// The K3 lattice `U ⊕ U ⊕ U ⊕ E8(-1) ⊕ E8(-1)` of rank 22.
    pub fn k3() -> Self {
        let u = Self::hyperbolic_plane();
        let e = Self::e8_minus();
        u.direct_sum(&u)
            .direct_sum(&u)
            .direct_sum(&e)
            .direct_sum(&e)
            .with_label("K3")
    }

    pub fn direct_sum(&self, other: &Lattice) -> Lattice {
        Lattice {
            gram: self.gram.direct_sum(&other.gram),
            label: None,
        }
    }

    /// `L(s)`: the same module with the form scaled by `s`.
    pub fn twist(&self, s: &BigInt) -> Result<Lattice, LatticeError> {
        if s.is_zero() {
            return Err(LatticeError::DegenerateForm);
        }
        Ok(Lattice {
            gram: self.gram.scale(s),
            label: None,
        })
    }

    pub fn inner(&self, x: &[BigInt], y: &[BigInt]) -> BigInt {
        self.gram.bilinear(x, y)
    }

    pub fn norm(&self, x: &[BigInt]) -> BigInt {
        self.inner(x, x)
    }

    /// `⟨x, y⟩` for rational vectors.
    pub fn inner_rational(&self, x: &[BigRational], y: &[BigRational]) -> BigRational {
        let n = self.rank();
        let mut acc = BigRational::zero();
        for (i, xi) in x.iter().enumerate().take(n) {
            if xi.is_zero() {
                continue;
            }
            let mut row = BigRational::zero();
            for (j, yj) in y.iter().enumerate().take(n) {
                let g = &self.gram[(i, j)];
                if !g.is_zero() && !yj.is_zero() {
                    row += yj * BigRational::from_integer(g.clone());
                }
            }
            acc += xi * row;
        }
        acc
    }

    pub fn det(&self) -> BigInt {
        self.gram.det().expect("Gram matrix is square")
    }

    /// Every diagonal entry even.
    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| (&self.gram[(i, i)] % 2u32).is_zero())
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs().is_one()
    }

    pub fn signature(&self) -> Result<Signature, LatticeError> {
        signature(&self.gram)
    }

    /// Gram matrix of the form restricted to the row span of `basis`.
    pub fn restrict(&self, basis: &IntMatrix) -> IntMatrix {
        basis.matmul(&self.gram).matmul(&basis.transpose())
    }

    pub fn saturate(&self, s: &Sublattice) -> Sublattice {
        saturate(s)
    }

    /// `{x : ⟨x, s⟩ = 0 for all s ∈ S}`, saturated by construction.
    pub fn orthogonal_complement(&self, s: &Sublattice) -> Sublattice {
        let n = self.rank();
        if s.rank() == 0 {
            return Sublattice {
                basis: IntMatrix::identity(n),
                saturated: true,
            };
        }
        let bg = s.basis.matmul(&self.gram);
        Sublattice {
            basis: integer_kernel(&bg),
            saturated: true,
        }
    }

    /// Matrix (acting on column vectors) of `x ↦ x + ⟨x, δ⟩ δ`; an isometry
    /// exactly when `δ² = -2`.
    pub fn reflection(&self, delta: &[BigInt]) -> Result<IntMatrix, LatticeError> {
        if delta.len() != self.rank() {
            return Err(LatticeError::Dimension {
                expected: self.rank(),
                got: delta.len(),
            });
        }
        if self.norm(delta) != BigInt::from(-2) {
            let s: Vec<String> = delta.iter().map(ToString::to_string).collect();
            return Err(LatticeError::NotARoot(format!("({})", s.join(", "))));
        }
        let gd = self.gram.mul_vec(delta);
        let n = self.rank();
        let mut s = IntMatrix::identity(n);
        for i in 0..n {
            if delta[i].is_zero() {
                continue;
            }
            for j in 0..n {
                s[(i, j)] += &delta[i] * &gd[j];
            }
        }
        Ok(s)
    }

    /// `T^T G T == G`.
    pub fn is_isometry(&self, t: &IntMatrix) -> bool {
        t.is_square() && t.rows() == self.rank() && t.transpose().matmul(&self.gram).matmul(t) == self.gram
    }

    /// Inverse of an isometry of a unimodular lattice: `G^{-1} T^T G`,
    /// computed as the exact solution of `T X = I`.
    pub fn isometry_inverse(&self, t: &IntMatrix) -> Option<IntMatrix> {
        if !self.is_isometry(t) {
            return None;
        }
        // T^T G T = G  =>  T^{-1} = G^{-1} T^T G; solve G X = T^T G exactly.
        let rhs = t.transpose().matmul(&self.gram);
        let n = self.rank();
        let mut cols = Vec::with_capacity(n);
        let gt = self.gram.transpose();
        for j in 0..n {
            let col = rhs.column(j);
            let x = crate::algebra::solve_row_combination(&gt, &col)?;
            let ints: Option<Vec<BigInt>> = x.into_iter().map(|v| v.is_integer().then(|| v.to_integer())).collect();
            cols.push(ints?);
        }
        Some(IntMatrix::from_rows(cols).ok()?.transpose())
    }
}

/// Row-span sublattice in ambient coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sublattice {
    basis: IntMatrix,
    saturated: bool,
}

impl Sublattice {
    pub fn new(basis: IntMatrix) -> Result<Self, LatticeError> {
        if basis.rank() != basis.rows() {
            return Err(LatticeError::DependentBasis);
        }
        Ok(Sublattice {
            basis,
            saturated: false,
        })
    }

    /// The zero sublattice of an ambient lattice of rank `n`.
    pub fn zero(n: usize) -> Self {
        Sublattice {
            basis: IntMatrix::empty(n),
            saturated: true,
        }
    }

    /// Row span of a (possibly dependent) generating set, saturated.
    pub fn saturation_of_generators(generators: &IntMatrix) -> Self {
        Sublattice {
            basis: saturate_rows(generators),
            saturated: true,
        }
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    pub fn ambient_rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    /// Membership of an integer vector in the row span.
    pub fn contains(&self, v: &[BigInt]) -> bool {
        crate::algebra::solve_row_combination(&self.basis, v).is_some_and(|x| x.iter().all(|c| c.is_integer()))
    }

    /// Membership in the rational span.
    pub fn spans_rationally(&self, v: &[BigInt]) -> bool {
        crate::algebra::solve_row_combination(&self.basis, v).is_some()
    }
}

/// Saturation `(S ⊗ Q) ∩ ambient`.
pub fn saturate(s: &Sublattice) -> Sublattice {
    if s.saturated {
        return s.clone();
    }
    Sublattice {
        basis: saturate_rows(&s.basis),
        saturated: true,
    }
}
