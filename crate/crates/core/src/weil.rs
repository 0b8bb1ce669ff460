//! q²-scaled isometries, certified Weil-polynomial tests and point counts.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};

use crate::algebra::{is_prime, minimal_poly, IntMatrix, IntPoly, SturmSequence};
use crate::lattice::Lattice;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WeilError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("exponent a must be positive")]
    ZeroExponent,
    #[error("q = {q} is not {p}^{a}")]
    InconsistentQ { p: u64, a: u32, q: BigInt },
    #[error("dimension mismatch: lattice rank {lattice}, Frobenius {rows}x{cols}")]
    DimensionMismatch { lattice: usize, rows: usize, cols: usize },
    #[error("polynomial is not monic")]
    NotMonic,
    #[error("residual degree {0} is odd; no trace transform exists")]
    OddResidualDegree(usize),
    #[error("polynomial is not of the form t^m R(t + q^2/t)")]
    NoSuchTransform,
}

/// `q = p^a` with `p` prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeilParams {
    p: u64,
    a: u32,
    q: BigInt,
}

impl WeilParams {
    pub fn new(p: u64, a: u32) -> Result<Self, WeilError> {
        if !is_prime(p) {
            return Err(WeilError::NotPrime(p));
        }
        if a == 0 {
            return Err(WeilError::ZeroExponent);
        }
        Ok(WeilParams {
            p,
            a,
            q: BigInt::from(p).pow(a),
        })
    }

    /// Validates a triple `(p, a, q)` as it appears in documents.
    pub fn with_q(p: u64, a: u32, q: &BigInt) -> Result<Self, WeilError> {
        let w = Self::new(p, a)?;
        if &w.q != q {
            return Err(WeilError::InconsistentQ { p, a, q: q.clone() });
        }
        Ok(w)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn a(&self) -> u32 {
        self.a
    }

    pub fn q(&self) -> &BigInt {
        &self.q
    }
}

/// A lattice together with an integer endomorphism `F` (acting on column
/// vectors) and Weil parameters.
#[derive(Debug, Clone)]
pub struct FrobeniusData {
    lattice: Lattice,
    frobenius: IntMatrix,
    params: WeilParams,
}

impl FrobeniusData {
    pub fn new(lattice: Lattice, frobenius: IntMatrix, params: WeilParams) -> Result<Self, WeilError> {
        if !frobenius.is_square() || frobenius.rows() != lattice.rank() {
            return Err(WeilError::DimensionMismatch {
                lattice: lattice.rank(),
                rows: frobenius.rows(),
                cols: frobenius.cols(),
            });
        }
        Ok(FrobeniusData {
            lattice,
            frobenius,
            params,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn frobenius(&self) -> &IntMatrix {
        &self.frobenius
    }

    pub fn params(&self) -> &WeilParams {
        &self.params
    }

    pub fn q(&self) -> &BigInt {
        &self.params.q
    }

    pub fn rank(&self) -> usize {
        self.lattice.rank()
    }

    pub fn charpoly(&self) -> IntPoly {
        self.frobenius.charpoly().expect("square by construction")
    }
}

/// `Fᵀ G F == q² G`.
pub fn check_scaling(fd: &FrobeniusData) -> bool {
    scaling_defect(fd).is_none()
}

/// First entry `(i, j)` where `Fᵀ G F` differs from `q² G`, with both values.
pub fn scaling_defect(fd: &FrobeniusData) -> Option<(usize, usize, BigInt, BigInt)> {
    let g = fd.lattice.gram();
    let f = &fd.frobenius;
    let lhs = f.transpose().matmul(g).matmul(f);
    let q2 = fd.q() * fd.q();
    let n = fd.rank();
    for i in 0..n {
        for j in 0..n {
            let rhs = &g[(i, j)] * &q2;
            if lhs[(i, j)] != rhs {
                return Some((i, j, lhs[(i, j)].clone(), rhs));
            }
        }
    }
    None
}

/// Outcome of the determinant consequence of the scaling identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetCheck {
    pub det: BigInt,
    pub holds: bool,
    /// `+1` or `-1` when `holds`, `0` otherwise.
    pub sign: i8,
}

/// `det F = ±q^n`.
pub fn frobenius_det_check(fd: &FrobeniusData) -> DetCheck {
    let det = fd.frobenius.det().expect("square by construction");
    let qn: BigInt = fd.q().pow(fd.rank() as u32);
    let sign = if det == qn {
        1
    } else if det == -&qn {
        -1
    } else {
        0
    };
    DetCheck {
        det,
        holds: sign != 0,
        sign,
    }
}

/// Removes all factors `(t - q)` and `(t + q)`; returns the residual and the
/// two multiplicities.
pub fn strip_real_roots(p: &IntPoly, q: &BigInt) -> (IntPoly, usize, usize) {
    let mut rest = p.clone();
    let mut plus = 0;
    let mut minus = 0;
    let lin_plus = IntPoly::linear_root(q);
    let lin_minus = IntPoly::linear_root(&-q);
    while rest.deg() > 0 && rest.eval(q).is_zero() {
        rest = rest.div_exact(&lin_plus).expect("root divides");
        plus += 1;
    }
    let mq = -q;
    while rest.deg() > 0 && rest.eval(&mq).is_zero() {
        rest = rest.div_exact(&lin_minus).expect("root divides");
        minus += 1;
    }
    (rest, plus, minus)
}

/// `c_i q^{2i} = q^d c_{d-i}` for all `i`, i.e. `t^d P(q²/t) = q^d P(t)`.
pub fn satisfies_functional_equation(p: &IntPoly, q: &BigInt) -> bool {
    let d = p.deg();
    let q2 = q * q;
    let qd: BigInt = q.pow(d as u32);
    let mut q2i = BigInt::one();
    for i in 0..=d {
        if p.coeff(i) * &q2i != &qd * p.coeff(d - i) {
            return false;
        }
        q2i *= &q2;
    }
    true
}

/// The unique monic `R` of degree `m` with `P(t) = t^m R(t + q²/t)`.
pub fn trace_transform(p: &IntPoly, q: &BigInt) -> Result<IntPoly, WeilError> {
    if !p.is_monic() {
        return Err(WeilError::NotMonic);
    }
    let d = p.deg();
    if d % 2 == 1 {
        return Err(WeilError::OddResidualDegree(d));
    }
    let m = d / 2;
    let base = IntPoly::new(vec![q * q, BigInt::zero(), BigInt::one()]); // t² + q²
    let mut rest = p.clone();
    let mut r = vec![BigInt::zero(); m + 1];
    let mut powers = vec![IntPoly::one()];
    for k in 1..=m {
        powers.push(&powers[k - 1] * &base);
    }
    for k in (0..=m).rev() {
        let rk = rest.coeff(m + k);
        if !rk.is_zero() {
            let term = IntPoly::monomial(rk.clone(), m - k);
            rest = &rest - &(&term * &powers[k]);
        }
        r[k] = rk;
    }
    if !rest.is_zero() {
        return Err(WeilError::NoSuchTransform);
    }
    Ok(IntPoly::new(r))
}

/// Expands `t^m R(t + q²/t)`; inverse of [`trace_transform`].
pub fn inverse_trace_transform(r: &IntPoly, q: &BigInt) -> IntPoly {
    let m = r.deg();
    let base = IntPoly::new(vec![q * q, BigInt::zero(), BigInt::one()]);
    let mut acc = IntPoly::zero();
    let mut pw = IntPoly::one();
    for k in 0..=m {
        let c = r.coeff(k);
        if !c.is_zero() {
            acc = &acc + &(&IntPoly::monomial(c, m - k) * &pw);
        }
        pw = &pw * &base;
    }
    acc
}

/// All distinct roots of `r` real and inside the open interval `(-2q, 2q)`.
pub fn roots_in_open_trace_interval(r: &IntPoly, q: &BigInt) -> bool {
    if r.deg() == 0 {
        return true;
    }
    let s = r.squarefree_part();
    let two_q = q * 2;
    if s.eval(&two_q).is_zero() || s.eval(&-&two_q).is_zero() {
        return false;
    }
    let seq = SturmSequence::new(&s).expect("squarefree part");
    let lo = BigRational::from_integer(-&two_q);
    let hi = BigRational::from_integer(two_q);
    seq.count(&lo, &hi) == s.deg()
}

/// Certified test that every complex root of the monic `P` has absolute
/// value exactly `q`.
pub fn is_weil_q2(p: &IntPoly, q: &BigInt) -> Result<bool, WeilError> {
    if !p.is_monic() {
        return Err(WeilError::NotMonic);
    }
    let (p1, _, _) = strip_real_roots(p, q);
    let d = p1.deg();
    if d % 2 == 1 {
        return Err(WeilError::OddResidualDegree(d));
    }
    if p1.coeff(0) != q.pow(d as u32) || !satisfies_functional_equation(&p1, q) {
        return Ok(false);
    }
    let r = trace_transform(&p1, q)?;
    Ok(roots_in_open_trace_interval(&r, q))
}

/// `is_weil_q2` with the odd-degree error folded into `false`.
pub fn is_weil(p: &IntPoly, q: &BigInt) -> bool {
    is_weil_q2(p, q).unwrap_or(false)
}

/// Minimal polynomial squarefree.
pub fn is_semisimple(f: &IntMatrix) -> bool {
    minimal_poly(f).is_ok_and(|m| m.is_squarefree())
}

/// `1 + tr(Fⁿ) + q^{2n}`.
pub fn point_count(fd: &FrobeniusData, n: u32) -> BigInt {
    BigInt::one() + fd.frobenius.pow(n as u64).trace() + fd.q().pow(2 * n)
}

/// `1 + tr F + q² < 0`.
pub fn question_predicate(fd: &FrobeniusData) -> bool {
    point_count(fd, 1).is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn u_data(f: IntMatrix, p: u64) -> FrobeniusData {
        FrobeniusData::new(Lattice::hyperbolic_plane(), f, WeilParams::new(p, 1).unwrap()).unwrap()
    }

    #[test]
    fn params() {
        assert!(WeilParams::new(4, 1).is_err());
        assert!(WeilParams::new(5, 0).is_err());
        assert_eq!(WeilParams::new(3, 2).unwrap().q(), &b(9));
        assert!(WeilParams::with_q(3, 2, &b(8)).is_err());
    }

    #[test]
    fn scaling_examples() {
        let fd = u_data(IntMatrix::scalar(2, &b(5)), 5);
        assert!(check_scaling(&fd));
        let fd = u_data(IntMatrix::diagonal(&[b(1), b(25)]), 5);
        assert!(check_scaling(&fd));
        let det = frobenius_det_check(&fd);
        assert!(det.holds);
        assert_eq!((det.det, det.sign), (b(25), 1));
        let fd = u_data(IntMatrix::identity(2), 2);
        assert!(!check_scaling(&fd));
    }

    #[test]
    fn weil_examples() {
        let q = b(5);
        assert!(is_weil_q2(&IntPoly::from_i64(&[-25, 0, 1]), &q).unwrap());
        assert!(is_weil_q2(&IntPoly::from_i64(&[25, -1, 1]), &q).unwrap());
        assert!(!is_weil_q2(&IntPoly::from_i64(&[25, -15, 1]), &q).unwrap());
        assert!(is_weil_q2(&IntPoly::from_i64(&[25, -10, 1]), &q).unwrap()); // (t-5)^2
        assert_eq!(
            is_weil_q2(&IntPoly::from_i64(&[1, 1]), &q),
            Err(WeilError::OddResidualDegree(1))
        );
        assert_eq!(is_weil_q2(&IntPoly::from_i64(&[1, 2]), &q), Err(WeilError::NotMonic));
    }

    #[test]
    fn transform_examples() {
        let q = b(5);
        let r = trace_transform(&IntPoly::from_i64(&[25, -7, 1]), &q).unwrap();
        assert_eq!(r, IntPoly::from_i64(&[-7, 1]));
        let p = &IntPoly::from_i64(&[25, -1, 1]) * &IntPoly::from_i64(&[25, 1, 1]);
        assert_eq!(trace_transform(&p, &q).unwrap(), IntPoly::from_i64(&[-1, 0, 1]));
        assert_eq!(inverse_trace_transform(&IntPoly::from_i64(&[-1, 0, 1]), &q), p);
        // t⁴ + q⁴ = q⁴ Φ₈(t/q) is symmetric; t⁴ + 1 is not
        let sym = IntPoly::from_i64(&[625, 0, 0, 0, 1]);
        assert_eq!(trace_transform(&sym, &q).unwrap(), IntPoly::from_i64(&[-50, 0, 1]));
        assert!(is_weil_q2(&sym, &q).unwrap());
        let bad = IntPoly::from_i64(&[1, 0, 0, 0, 1]);
        assert_eq!(trace_transform(&bad, &q), Err(WeilError::NoSuchTransform));
        assert!(!is_weil_q2(&bad, &q).unwrap());
    }

    #[test]
    fn semisimplicity() {
        assert!(is_semisimple(&IntMatrix::diagonal(&[b(1), b(2)])));
        assert!(!is_semisimple(&IntMatrix::from_i64(&[&[3, 1], &[0, 3]])));
        // companion of t^3 - 2
        let c = IntMatrix::from_i64(&[&[0, 0, 2], &[1, 0, 0], &[0, 1, 0]]);
        assert!(is_semisimple(&c));
    }

    #[test]
    fn point_counts() {
        let fd = u_data(IntMatrix::diagonal(&[b(1), b(4)]), 2);
        assert_eq!(point_count(&fd, 1), b(1 + 5 + 4));
        assert_eq!(point_count(&fd, 2), b(2 + 2 * 16));
        assert!(!question_predicate(&fd));
        let fd = u_data(IntMatrix::diagonal(&[b(-1), b(-4)]), 2);
        assert_eq!(point_count(&fd, 1), b(0));
        assert!(!question_predicate(&fd));
        let fd = u_data(IntMatrix::diagonal(&[b(-1), b(-5)]), 2);
        assert!(question_predicate(&fd));
    }
}
