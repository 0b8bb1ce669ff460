//! Chambers of the positive cone of `NS ⊗ R` cut out by `(-2)`-roots.
//!
//! A chamber is represented by one rational interior point `λ`; every
//! predicate reduces to sign tests of `⟨λ, δ⟩` over finitely many roots `δ`,
//! enumerated exactly in negative-definite slices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::algebra::{integer_kernel, IntMatrix, RatVector};
use crate::lattice::{signature, Signature};
use crate::neron_severi::NSLattice;
use crate::weil::FrobeniusData;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConeError {
    #[error("form is not definite")]
    NotDefinite,
    #[error("points are not in the same component of the positive cone")]
    SameCone,
    #[error("point does not lie in NS ⊗ Q")]
    NotInNs,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

fn rat(x: &BigInt) -> BigRational {
    BigRational::from_integer(x.clone())
}

/// Gram–Schmidt data `(mu, B)` of a positive-definite Gram matrix.
fn gso(g: &IntMatrix) -> (Vec<Vec<BigRational>>, Vec<BigRational>) {
    let n = g.rows();
    let mut mu = vec![vec![BigRational::zero(); n]; n];
    let mut bn = vec![BigRational::zero(); n];
    for i in 0..n {
        for j in 0..i {
            let mut v = rat(&g[(i, j)]);
            for l in 0..j {
                v -= &mu[j][l] * &mu[i][l] * &bn[l];
            }
            mu[i][j] = v / &bn[j];
        }
        let mut v = rat(&g[(i, i)]);
        for l in 0..i {
            v -= &mu[i][l] * &mu[i][l] * &bn[l];
        }
        bn[i] = v;
    }
    (mu, bn)
}

/// `b_k ← b_k − r·b_j` applied to a Gram matrix.
fn gram_row_op(g: &mut IntMatrix, k: usize, j: usize, r: &BigInt) {
    let n = g.rows();
    let gkk = g[(k, k)].clone();
    let gkj = g[(k, j)].clone();
    let gjj = g[(j, j)].clone();
    for l in 0..n {
        if l == k {
            continue;
        }
        let v = &g[(k, l)] - r * &g[(j, l)];
        g[(k, l)] = v.clone();
        g[(l, k)] = v;
    }
    g[(k, k)] = gkk - r * &gkj * 2 + r * r * gjj;
}

fn swap_basis(g: &mut IntMatrix, k: usize) {
    g.swap_rows(k, k - 1);
    g.swap_cols(k, k - 1);
}

/// LLL reduction (δ = 3/4) of a positive-definite Gram matrix. Returns the
/// unimodular `T` whose rows express the reduced basis in the original one,
/// so the reduced Gram matrix is `T A Tᵀ`.
pub fn lll_gram(a: &IntMatrix) -> IntMatrix {
    let n = a.rows();
    let mut t = IntMatrix::identity(n);
    if n <= 1 {
        return t;
    }
    let delta = BigRational::new(BigInt::from(3), BigInt::from(4));
    let mut g = a.clone();
    let (mut mu, mut bn) = gso(&g);
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            let r = mu[k][j].round().to_integer();
            if r.is_zero() {
                continue;
            }
            t.add_row_multiple(k, j, &-&r);
            gram_row_op(&mut g, k, j, &r);
            let rr = rat(&r);
            #[allow(clippy::needless_range_loop)]
            for l in 0..j {
                let d = &rr * &mu[j][l];
                mu[k][l] -= d;
            }
            mu[k][j] -= &rr;
        }
        let lhs = bn[k].clone();
        let rhs = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &bn[k - 1];
        if lhs >= rhs {
            k += 1;
        } else {
            swap_basis(&mut g, k);
            t.swap_rows(k, k - 1);
            (mu, bn) = gso(&g);
            k = (k - 1).max(1);
        }
    }
    t
}

/// Solves `x · M = v` over `Q` for square invertible `M`.
fn solve_left(m: &IntMatrix, v: &[BigRational]) -> Vec<BigRational> {
    let n = m.rows();
    // (Mᵀ | v)
    let mut aug: Vec<Vec<BigRational>> = (0..n)
        .map(|j| {
            let mut row: Vec<BigRational> = (0..n).map(|i| rat(&m[(i, j)])).collect();
            row.push(v[j].clone());
            row
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).find(|&r| !aug[r][c].is_zero()).expect("invertible");
        aug.swap(c, piv);
        let inv = aug[c][c].recip();
        for x in aug[c].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != c && !aug[r][c].is_zero() {
                let f = aug[r][c].clone();
                let pivot_row = aug[c].clone();
                for (x, y) in aug[r].iter_mut().zip(pivot_row) {
                    *x -= &f * y;
                }
            }
        }
    }
    aug.into_iter().map(|mut r| r.pop().unwrap()).collect()
}

/// All integer `x` with `(x − z) A (x − z)ᵀ ≤ bound` for positive-definite
/// `A`, by Fincke–Pohst enumeration on an LLL-reduced basis with exact
/// rational bounds. Output sorted lexicographically.
pub fn enumerate_ellipsoid(a: &IntMatrix, center: &[BigRational], bound: &BigRational) -> Vec<Vec<BigInt>> {
    let n = a.rows();
    if bound.is_negative() {
        return Vec::new();
    }
    if n == 0 {
        return vec![Vec::new()];
    }
    let t = lll_gram(a);
    let reduced = t.matmul(a).matmul(&t.transpose());
    let ycenter = solve_left(&t, center);
    let (mu, bn) = gso(&reduced);
    let mut out = Vec::new();
    let mut y = vec![BigInt::zero(); n];
    fp_level(n - 1, &mu, &bn, &ycenter, bound, &mut y, &mut |yv| {
        out.push(t.vec_mul(yv));
    });
    out.sort();
    out
}

fn fp_level(
    i: usize,
    mu: &[Vec<BigRational>],
    bn: &[BigRational],
    zc: &[BigRational],
    budget: &BigRational,
    y: &mut Vec<BigInt>,
    emit: &mut dyn FnMut(&[BigInt]),
) {
    let n = y.len();
    let mut c = zc[i].clone();
    for j in i + 1..n {
        c -= &mu[j][i] * (rat(&y[j]) - &zc[j]);
    }
    let cost = |x: &BigInt| {
        let d = rat(x) - &c;
        &bn[i] * &d * &d
    };
    let start = c.round().to_integer();
    let mut visit = |x: BigInt, y: &mut Vec<BigInt>| -> bool {
        let used = cost(&x);
        if &used > budget {
            return false;
        }
        y[i] = x;
        if i == 0 {
            emit(y);
        } else {
            fp_level(i - 1, mu, bn, zc, &(budget - used), y, emit);
        }
        true
    };
    // the admissible set is an interval containing `start` whenever nonempty
    let mut x = start.clone();
    while visit(x.clone(), y) {
        x += 1;
    }
    let mut x: BigInt = start - 1;
    while visit(x.clone(), y) {
        x -= 1;
    }
}

/// All `v` with `vᵀ G v = target` for a negative-definite `G`, sorted
/// lexicographically.
pub fn definite_short_vectors(gram_neg: &IntMatrix, target: &BigInt) -> Result<Vec<Vec<BigInt>>, ConeError> {
    let n = gram_neg.rows();
    if n == 0 {
        return Ok(if target.is_zero() { vec![Vec::new()] } else { Vec::new() });
    }
    if signature(gram_neg).ok() != Some(Signature::new(0, n)) {
        return Err(ConeError::NotDefinite);
    }
    let pos = gram_neg.scale(&BigInt::from(-1));
    let c = -target;
    let zero = vec![BigRational::zero(); n];
    Ok(enumerate_ellipsoid(&pos, &zero, &rat(&c))
        .into_iter()
        .filter(|v| &gram_neg.bilinear(v, v) == target)
        .collect())
}

/// Integer `c` with `Σ c_i w_i = gcd(w)`.
fn bezout(w: &[BigInt]) -> (BigInt, Vec<BigInt>) {
    let mut g = BigInt::zero();
    let mut coeffs: Vec<BigInt> = Vec::with_capacity(w.len());
    for wi in w {
        let e = g.extended_gcd(wi);
        for c in coeffs.iter_mut() {
            *c *= &e.x;
        }
        coeffs.push(e.y);
        g = e.gcd;
    }
    if g.is_negative() {
        g = -g;
        for c in coeffs.iter_mut() {
            *c = -&*c;
        }
    }
    (g, coeffs)
}

/// All `z` with `w·z = s` and `zᵀ G z = norm`, provided `G` is negative
/// definite on `w^⊥` (otherwise [`ConeError::NotDefinite`]). Sorted.
pub fn slice_vectors(gram: &IntMatrix, w: &[BigInt], s: &BigInt, norm: &BigInt) -> Result<Vec<Vec<BigInt>>, ConeError> {
    let rho = gram.rows();
    if w.len() != rho {
        return Err(ConeError::Dimension {
            expected: rho,
            got: w.len(),
        });
    }
    let (g, coeffs) = bezout(w);
    if g.is_zero() {
        return Err(ConeError::NotDefinite);
    }
    if !s.is_multiple_of(&g) {
        return Ok(Vec::new());
    }
    let factor = s / &g;
    let z0: Vec<BigInt> = coeffs.iter().map(|c| c * &factor).collect();
    let wrow = IntMatrix::from_rows(vec![w.to_vec()]).expect("one row");
    let k = integer_kernel(&wrow);
    let z0_norm = gram.bilinear(&z0, &z0);
    if k.rows() == 0 {
        return Ok(if &z0_norm == norm { vec![z0] } else { Vec::new() });
    }
    let kg = k.matmul(gram);
    let a = kg.matmul(&k.transpose()).scale(&BigInt::from(-1));
    if signature(&a).ok() != Some(Signature::new(a.rows(), 0)) {
        return Err(ConeError::NotDefinite);
    }
    let b: Vec<BigRational> = kg.mul_vec(&z0).iter().map(rat).collect();
    let center = solve_left(&a, &b); // A symmetric, so c* A = b
    let cb: BigRational = center.iter().zip(&b).map(|(x, y)| x * y).sum();
    let bound = rat(&(&z0_norm - norm)) + cb;
    let mut out: Vec<Vec<BigInt>> = enumerate_ellipsoid(&a, &center, &bound)
        .into_iter()
        .map(|c| {
            let kc = k.vec_mul(&c);
            z0.iter().zip(kc).map(|(x, y)| x + y).collect::<Vec<BigInt>>()
        })
        .filter(|z| &gram.bilinear(z, z) == norm)
        .collect();
    out.sort();
    Ok(out)
}

/// Clears denominators of `λ`'s coordinates in the NS basis: returns the
/// primitive-direction integer vector `y` with `λ` a positive multiple of
/// `Σ y_i b_i`.
pub fn ns_coordinates(ns: &NSLattice, lambda: &RatVector) -> Result<Vec<BigInt>, ConeError> {
    let n = ns.basis().cols();
    if lambda.len() != n {
        return Err(ConeError::Dimension {
            expected: n,
            got: lambda.len(),
        });
    }
    if ns.rho() == 0 {
        return if lambda.is_zero() {
            Ok(Vec::new())
        } else {
            Err(ConeError::NotInNs)
        };
    }
    let coords = crate::algebra::solve_row_combination(ns.basis(), lambda.numerators()).ok_or(ConeError::NotInNs)?;
    let den = coords.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    Ok(coords.iter().map(|c| (c * rat(&den)).to_integer()).collect())
}

fn to_ambient(ns: &NSLattice, z: &[BigInt]) -> Vec<BigInt> {
    ns.basis().vec_mul(z)
}

/// Roots `δ ∈ NS` (ambient coordinates) with `⟨λ, δ⟩ = 0`.
pub fn roots_in_wall(ns: &NSLattice, lambda: &RatVector) -> Result<Vec<Vec<BigInt>>, ConeError> {
    let y = ns_coordinates(ns, lambda)?;
    if ns.rho() <= 1 {
        return Ok(Vec::new());
    }
    let w = ns.gram().mul_vec(&y);
    let roots = slice_vectors(ns.gram(), &w, &BigInt::zero(), &BigInt::from(-2))?;
    Ok(sorted(roots.iter().map(|z| to_ambient(ns, z)).collect()))
}

fn sorted(mut v: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    v.sort();
    v
}

/// Outcome of [`validate_chamber`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChamberCheck {
    Valid,
    NotInNs,
    NonPositive,
    /// A root orthogonal to the point.
    OnWall(Vec<BigInt>),
}

impl ChamberCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, ChamberCheck::Valid)
    }
}

/// `λ ∈ NS ⊗ Q`, `λ² > 0`, and `λ` lies on no root wall.
pub fn validate_chamber(ns: &NSLattice, lambda: &RatVector) -> Result<ChamberCheck, ConeError> {
    let y = match ns_coordinates(ns, lambda) {
        Ok(y) => y,
        Err(ConeError::NotInNs) => return Ok(ChamberCheck::NotInNs),
        Err(e) => return Err(e),
    };
    if y.is_empty() || !ns.gram().bilinear(&y, &y).is_positive() {
        return Ok(ChamberCheck::NonPositive);
    }
    let roots = roots_in_wall(ns, lambda)?;
    Ok(match roots.into_iter().next() {
        Some(d) => ChamberCheck::OnWall(d),
        None => ChamberCheck::Valid,
    })
}

/// Largest `S ≥ 0` with `S² μ² < 2(a² − L μ²)`.
fn separation_bound(a: &BigInt, l: &BigInt, m2: &BigInt) -> BigInt {
    let x: BigInt = (a * a - l * m2) * 2;
    if !x.is_positive() {
        return BigInt::zero();
    }
    let mut s = (&x / m2).sqrt();
    while s.is_positive() && &s * &s * m2 >= x {
        s -= 1;
    }
    while (&s + 1u32) * (&s + 1u32) * m2 < x {
        s += 1;
    }
    s
}

/// Roots `δ ∈ NS` with `⟨λ, δ⟩ · ⟨μ, δ⟩ < 0`, in ambient coordinates.
pub fn separating_roots(ns: &NSLattice, lambda: &RatVector, mu: &RatVector) -> Result<Vec<Vec<BigInt>>, ConeError> {
    let y = ns_coordinates(ns, lambda)?;
    let ym = ns_coordinates(ns, mu)?;
    let g = ns.gram();
    if y.is_empty() {
        return Err(ConeError::SameCone);
    }
    let a = g.bilinear(&y, &ym);
    if !a.is_positive() {
        return Err(ConeError::SameCone);
    }
    let l = g.bilinear(&y, &y);
    let m2 = g.bilinear(&ym, &ym);
    if !l.is_positive() || !m2.is_positive() {
        return Err(ConeError::SameCone);
    }
    let bound = separation_bound(&a, &l, &m2);
    let w = g.mul_vec(&y);
    let wm = g.mul_vec(&ym);
    let dot = |u: &[BigInt], v: &[BigInt]| -> BigInt { u.iter().zip(v).map(|(x, y)| x * y).sum() };
    let mut out = Vec::new();
    let mut s = -bound.clone();
    while s <= bound {
        if !s.is_zero() {
            for z in slice_vectors(g, &w, &s, &BigInt::from(-2))? {
                if (&s * dot(&wm, &z)).is_negative() {
                    out.push(to_ambient(ns, &z));
                }
            }
        }
        s += 1;
    }
    Ok(sorted(out))
}

/// `⟨λ, μ⟩ > 0` and no root separates them.
pub fn same_chamber(ns: &NSLattice, lambda: &RatVector, mu: &RatVector) -> Result<bool, ConeError> {
    match separating_roots(ns, lambda, mu) {
        Ok(r) => Ok(r.is_empty()),
        Err(ConeError::SameCone) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Outcome of [`frobenius_preserves_chamber`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Invariance {
    Preserved,
    /// `⟨λ, Fλ⟩ ≤ 0`.
    OppositeCone,
    /// `Fλ` lies on the wall of this root.
    ImageOnWall(Vec<BigInt>),
    /// This root separates `λ` from `Fλ`.
    Separated(Vec<BigInt>),
}

impl Invariance {
    pub fn is_preserved(&self) -> bool {
        matches!(self, Invariance::Preserved)
    }
}

/// `F(λ)` as a rational vector.
pub fn apply_frobenius(fd: &FrobeniusData, lambda: &RatVector) -> RatVector {
    let num = fd.frobenius().mul_vec(lambda.numerators());
    RatVector::new(num, lambda.denominator().clone()).expect("positive denominator")
}

/// Whether `F` maps the chamber of `λ` to itself.
pub fn frobenius_preserves_chamber(
    fd: &FrobeniusData,
    ns: &NSLattice,
    lambda: &RatVector,
) -> Result<Invariance, ConeError> {
    let image = apply_frobenius(fd, lambda);
    let y = ns_coordinates(ns, lambda)?;
    let ym = ns_coordinates(ns, &image)?;
    if !ns.gram().bilinear(&y, &ym).is_positive() {
        return Ok(Invariance::OppositeCone);
    }
    if let ChamberCheck::OnWall(d) = validate_chamber(ns, &image)? {
        return Ok(Invariance::ImageOnWall(d));
    }
    let sep = separating_roots(ns, lambda, &image)?;
    Ok(match sep.into_iter().next() {
        Some(d) => Invariance::Separated(d),
        None => Invariance::Preserved,
    })
}
