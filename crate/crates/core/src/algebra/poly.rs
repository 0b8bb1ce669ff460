//! Dense univariate polynomials over the integers.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Integer polynomial; `coeffs[i]` is the coefficient of `t^i`.
///
/// Always normalized: no trailing zero coefficients, so the zero polynomial
/// has an empty coefficient vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    /// `c * t^k`
    pub fn monomial(c: BigInt, k: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// `t - r`
    pub fn linear_root(r: &BigInt) -> Self {
        Self::new(vec![-r, BigInt::one()])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    /// Coefficient of `t^i`, zero beyond the degree.
    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial mapped to 0; only for callers that
    /// have already excluded zero.
    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(|c| c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + BigRational::from_integer(c.clone());
        }
        acc
    }

    /// Sign of `P(x)` for rational `x`, computed on the homogenized integer
    /// form `sum c_i n^i d^(deg-i)` so no rational arithmetic is needed.
    pub fn sign_at(&self, x: &BigRational) -> Sign {
        let (n, d) = (x.numer(), x.denom());
        debug_assert!(d.is_positive());
        let Some(deg) = self.degree() else {
            return Sign::NoSign;
        };
        let mut acc = self.coeffs[deg].clone();
        let mut dpow = BigInt::one();
        for c in self.coeffs[..deg].iter().rev() {
            dpow *= d;
            acc = acc * n + c * &dpow;
        }
        acc.sign()
    }

    pub fn scale(&self, s: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Gcd of the coefficients (non-negative; zero for the zero polynomial).
    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Primitive part with positive leading coefficient.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut g = self.content();
        if self.leading().unwrap().is_negative() {
            g = -g;
        }
        Self::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::one();
        for _ in 0..k {
            result = &result * self;
        }
        result
    }

    /// `(Q, R)` with `lc(b)^(deg a - deg b + 1) * a = Q * b + R`.
    pub fn pseudo_div_rem(a: &Self, b: &Self) -> (Self, Self) {
        let db = b.degree().expect("pseudo division by zero polynomial");
        let Some(da) = a.degree() else {
            return (Self::zero(), Self::zero());
        };
        if da < db {
            return (Self::zero(), a.clone());
        }
        let lb = b.leading().unwrap().clone();
        let mut rem = a.coeffs.clone();
        let mut quot = vec![BigInt::zero(); da - db + 1];
        for k in (0..=da - db).rev() {
            for c in quot.iter_mut() {
                *c *= &lb;
            }
            for c in rem.iter_mut() {
                *c *= &lb;
            }
            let factor = rem[k + db].clone() / &lb;
            if !factor.is_zero() {
                for (j, bc) in b.coeffs.iter().enumerate() {
                    rem[k + j] -= &factor * bc;
                }
            }
            quot[k] = factor;
        }
        (Self::new(quot), Self::new(rem))
    }

    /// Exact quotient `self / d` over the integers, or `None` if `d` does not
    /// divide `self` in `Z[t]`.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let dd = d.degree()?;
        let Some(ds) = self.degree() else {
            return Some(Self::zero());
        };
        if ds < dd {
            return None;
        }
        let ld = d.leading().unwrap();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigInt::zero(); ds - dd + 1];
        for k in (0..=ds - dd).rev() {
            let (q, r) = rem[k + dd].div_rem(ld);
            if !r.is_zero() {
                return None;
            }
            if !q.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    rem[k + j] -= &q * dc;
                }
            }
            quot[k] = q;
        }
        if rem.iter().all(|c| c.is_zero()) {
            Some(Self::new(quot))
        } else {
            None
        }
    }

    /// Division by a monic polynomial, returning `(quotient, remainder)`.
    pub fn div_rem_monic(&self, d: &Self) -> (Self, Self) {
        assert!(d.is_monic(), "div_rem_monic needs a monic divisor");
        let dd = d.deg();
        let Some(ds) = self.degree() else {
            return (Self::zero(), Self::zero());
        };
        if ds < dd {
            return (Self::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigInt::zero(); ds - dd + 1];
        for k in (0..=ds - dd).rev() {
            let q = rem[k + dd].clone();
            if !q.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    rem[k + j] -= &q * dc;
                }
            }
            quot[k] = q;
        }
        (Self::new(quot), Self::new(rem))
    }

    /// Gcd over `Q[t]`, returned as a primitive integer polynomial with
    /// positive leading coefficient (zero iff both inputs are zero).
    pub fn gcd(a: &Self, b: &Self) -> Self {
        let mut x = a.primitive_part();
        let mut y = b.primitive_part();
        if x.degree() < y.degree() {
            std::mem::swap(&mut x, &mut y);
        }
        while !y.is_zero() {
            let (_, r) = Self::pseudo_div_rem(&x, &y);
            x = y;
            y = r.primitive_part();
        }
        x
    }

    pub fn is_squarefree(&self) -> bool {
        Self::gcd(self, &self.derivative()).is_constant()
    }

    /// `P / gcd(P, P')` with positive leading coefficient.
    pub fn squarefree_part(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let g = Self::gcd(self, &self.derivative());
        let q = self
            .div_exact(&g)
            .expect("gcd with a primitive divisor always divides exactly");
        if q.leading().unwrap().is_negative() {
            -q
        } else {
            q
        }
    }

    /// `q^deg * P(t / q)`: scales the roots by `q`.
    pub fn scale_roots(&self, q: &BigInt) -> Self {
        let Some(deg) = self.degree() else {
            return Self::zero();
        };
        let mut qpow = BigInt::one();
        let mut out = vec![BigInt::zero(); deg + 1];
        for i in (0..=deg).rev() {
            out[i] = &self.coeffs[i] * &qpow;
            qpow *= q;
        }
        Self::new(out)
    }

    /// `P(-t)`.
    pub fn negate_variable(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| if i % 2 == 1 { -c } else { c.clone() })
                .collect(),
        )
    }

    /// The `m`-th cyclotomic polynomial.
    pub fn cyclotomic(m: u64) -> Self {
        assert!(m >= 1, "cyclotomic index must be positive");
        let mut num = Self::one();
        let mut den = Self::one();
        for d in 1..=m {
            if m % d != 0 {
                continue;
            }
            let factor = Self::monomial(BigInt::one(), d as usize) - Self::one();
            match moebius(m / d) {
                1 => num = &num * &factor,
                -1 => den = &den * &factor,
                _ => {}
            }
        }
        num.div_exact(&den).expect("cyclotomic quotient is exact")
    }
}

fn moebius(mut n: u64) -> i32 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Euler's totient.
pub fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Squarefree part of `p`; see [`IntPoly::squarefree_part`].
pub fn squarefree_part(p: &IntPoly) -> IntPoly {
    p.squarefree_part()
}

/// See [`IntPoly::gcd`].
pub fn poly_gcd(a: &IntPoly, b: &IntPoly) -> IntPoly {
    IntPoly::gcd(a, b)
}

/// See [`IntPoly::cyclotomic`].
pub fn cyclotomic(m: u64) -> IntPoly {
    IntPoly::cyclotomic(m)
}

impl Add for &IntPoly {
    type Output = IntPoly;
    fn add(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        IntPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &IntPoly {
    type Output = IntPoly;
    fn sub(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        IntPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &IntPoly {
    type Output = IntPoly;
    fn mul(self, rhs: &IntPoly) -> IntPoly {
        if self.is_zero() || rhs.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }
}

impl Neg for &IntPoly {
    type Output = IntPoly;
    fn neg(self) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for IntPoly {
            type Output = IntPoly;
            fn $m(self, rhs: IntPoly) -> IntPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for IntPoly {
    type Output = IntPoly;
    fn neg(self) -> IntPoly {
        -&self
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let abs = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{abs}")?,
                _ => {
                    if !abs.is_one() {
                        write!(f, "{abs}*")?;
                    }
                    if i == 1 {
                        write!(f, "t")?;
                    } else {
                        write!(f, "t^{i}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> IntPoly {
        IntPoly::from_i64(c)
    }

    #[test]
    fn normalization_strips_zeros() {
        let z = p(&[0, 0]);
        assert!(z.is_zero());
        assert_eq!(z.degree(), None);
        assert_eq!(p(&[1, 2, 0]).degree(), Some(1));
    }

    #[test]
    fn squarefree_of_square() {
        let sq = p(&[1, -2, 1]); // (t-1)^2
        assert_eq!(sq.squarefree_part(), p(&[-1, 1]));
        assert!(!sq.is_squarefree());
        assert!(p(&[-1, 0, 1]).is_squarefree());
    }

    #[test]
    fn small_cyclotomics() {
        assert_eq!(IntPoly::cyclotomic(1), p(&[-1, 1]));
        assert_eq!(IntPoly::cyclotomic(2), p(&[1, 1]));
        assert_eq!(IntPoly::cyclotomic(4), p(&[1, 0, 1]));
        assert_eq!(IntPoly::cyclotomic(6), p(&[1, -1, 1]));
        assert_eq!(IntPoly::cyclotomic(12), p(&[1, 0, -1, 0, 1]));
        for m in 1..60u64 {
            assert_eq!(IntPoly::cyclotomic(m).deg() as u64, euler_phi(m));
        }
    }

    #[test]
    fn cyclotomics_multiply_to_t_n_minus_1() {
        for n in 1..=24u64 {
            let mut prod = IntPoly::one();
            for d in (1..=n).filter(|d| n % d == 0) {
                prod = &prod * &IntPoly::cyclotomic(d);
            }
            let target = IntPoly::monomial(BigInt::one(), n as usize) - IntPoly::one();
            assert_eq!(prod, target);
        }
    }

    #[test]
    fn gcd_and_exact_division() {
        let a = p(&[-1, 0, 1]); // (t-1)(t+1)
        let b = p(&[-2, 1, 1]); // (t-1)(t+2)
        assert_eq!(IntPoly::gcd(&a, &b), p(&[-1, 1]));
        assert_eq!(a.div_exact(&p(&[1, 1])), Some(p(&[-1, 1])));
        assert_eq!(a.div_exact(&p(&[2, 1])), None);
        // non-monic exact division
        let c = &p(&[1, 2]) * &p(&[3, 1]);
        assert_eq!(c.div_exact(&p(&[1, 2])), Some(p(&[3, 1])));
    }

    #[test]
    fn sign_at_matches_rational_eval() {
        let f = p(&[3, -7, 0, 2, -1]);
        for (n, d) in [(1, 2), (-5, 3), (7, 1), (0, 1), (-1, 7)] {
            let x = BigRational::new(BigInt::from(n), BigInt::from(d));
            let v = f.eval_rational(&x);
            let expected = if v.is_zero() {
                Sign::NoSign
            } else if v.is_positive() {
                Sign::Plus
            } else {
                Sign::Minus
            };
            assert_eq!(f.sign_at(&x), expected);
        }
    }

    #[test]
    fn scale_roots_of_linear() {
        // root 1 scaled by 5 -> root 5
        assert_eq!(p(&[-1, 1]).scale_roots(&BigInt::from(5)), p(&[-5, 1]));
        // Phi_4(t/q) q^2 = t^2 + q^2
        assert_eq!(IntPoly::cyclotomic(4).scale_roots(&BigInt::from(3)), p(&[9, 0, 1]));
    }

    #[test]
    fn display() {
        assert_eq!(p(&[25, -1, 1]).to_string(), "t^2 - t + 25");
        assert_eq!(p(&[0, -3]).to_string(), "-3*t");
    }
}
