//! Arithmetic modulo primes and prime powers: polynomials over `F_p`,
//! Hensel lifting of coprime factorizations, linear algebra over `Z/p^N`,
//! and distinct-degree factorization patterns.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::matrix::IntMatrix;
use super::poly::IntPoly;

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// Symmetric representative in `(-m/2, m/2]`.
pub fn symmetric_mod(a: &BigInt, m: &BigInt) -> BigInt {
    let r = a.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}

pub fn is_unit_mod_p(a: &BigInt, p: u64) -> bool {
    !a.mod_floor(&BigInt::from(p)).is_zero()
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(a: &BigInt, p: u64) -> u32 {
    assert!(!a.is_zero(), "valuation of zero");
    let p = BigInt::from(p);
    let mut v = 0;
    let mut x = a.clone();
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        x = q;
        v += 1;
    }
}

/// Polynomial over `F_p`, coefficients ascending, normalized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpPoly {
    p: u64,
    c: Vec<u64>,
}

impl FpPoly {
    pub fn new(p: u64, mut c: Vec<u64>) -> Self {
        for x in c.iter_mut() {
            *x %= p;
        }
        while c.last() == Some(&0) {
            c.pop();
        }
        FpPoly { p, c }
    }

    pub fn from_int(poly: &IntPoly, p: u64) -> Self {
        let pb = BigInt::from(p);
        Self::new(
            p,
            poly.coeffs()
                .iter()
                .map(|x| x.mod_floor(&pb).to_u64().unwrap())
                .collect(),
        )
    }

    pub fn to_int(&self) -> IntPoly {
        IntPoly::new(self.c.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    fn mulm(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    fn inv(&self, a: u64) -> u64 {
        // Fermat; p is prime
        pow_mod(a, self.p - 2, self.p)
    }

    pub fn add(&self, o: &FpPoly) -> FpPoly {
        let n = self.c.len().max(o.c.len());
        FpPoly::new(
            self.p,
            (0..n)
                .map(|i| (self.c.get(i).copied().unwrap_or(0) + o.c.get(i).copied().unwrap_or(0)) % self.p)
                .collect(),
        )
    }

    pub fn sub(&self, o: &FpPoly) -> FpPoly {
        let n = self.c.len().max(o.c.len());
        FpPoly::new(
            self.p,
            (0..n)
                .map(|i| {
                    let a = self.c.get(i).copied().unwrap_or(0);
                    let b = o.c.get(i).copied().unwrap_or(0);
                    (a + self.p - b) % self.p
                })
                .collect(),
        )
    }

    pub fn mul(&self, o: &FpPoly) -> FpPoly {
        if self.is_zero() || o.is_zero() {
            return FpPoly::new(self.p, vec![]);
        }
        let mut out = vec![0u64; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                out[i + j] = (out[i + j] + self.mulm(a, b)) % self.p;
            }
        }
        FpPoly::new(self.p, out)
    }

    pub fn div_rem(&self, d: &FpPoly) -> (FpPoly, FpPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let inv = self.inv(*d.c.last().unwrap());
        let mut rem = self.c.clone();
        if rem.len() <= dd {
            return (FpPoly::new(self.p, vec![]), self.clone());
        }
        let mut quot = vec![0u64; rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let f = self.mulm(rem[k + dd], inv);
            quot[k] = f;
            if f != 0 {
                for (j, &dc) in d.c.iter().enumerate() {
                    rem[k + j] = (rem[k + j] + self.p - self.mulm(f, dc)) % self.p;
                }
            }
        }
        (FpPoly::new(self.p, quot), FpPoly::new(self.p, rem))
    }

    pub fn monic(&self) -> FpPoly {
        match self.c.last() {
            None => self.clone(),
            Some(&l) => {
                let inv = self.inv(l);
                FpPoly::new(self.p, self.c.iter().map(|&x| self.mulm(x, inv)).collect())
            }
        }
    }

    pub fn gcd(&self, o: &FpPoly) -> FpPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `(g, s, t)` with `s*a + t*b = g` monic.
    pub fn ext_gcd(a: &FpPoly, b: &FpPoly) -> (FpPoly, FpPoly, FpPoly) {
        let p = a.p;
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (FpPoly::new(p, vec![1]), FpPoly::new(p, vec![]));
        let (mut t0, mut t1) = (FpPoly::new(p, vec![]), FpPoly::new(p, vec![1]));
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            r0 = std::mem::replace(&mut r1, r);
            let s2 = s0.sub(&q.mul(&s1));
            s0 = std::mem::replace(&mut s1, s2);
            let t2 = t0.sub(&q.mul(&t1));
            t0 = std::mem::replace(&mut t1, t2);
        }
        let lead = *r0.c.last().expect("gcd of two zero polynomials");
        let inv = r0.inv(lead);
        let scale = FpPoly::new(p, vec![inv]);
        (r0.mul(&scale), s0.mul(&scale), t0.mul(&scale))
    }

    pub fn derivative(&self) -> FpPoly {
        FpPoly::new(
            self.p,
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &x)| self.mulm(x, i as u64 % self.p))
                .collect(),
        )
    }

    /// `base^e mod self`.
    pub fn pow_mod(&self, base: &FpPoly, mut e: u128) -> FpPoly {
        let mut acc = FpPoly::new(self.p, vec![1]);
        let mut b = base.div_rem(self).1;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b).div_rem(self).1;
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b).div_rem(self).1;
            }
        }
        acc
    }
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * b as u128) % m as u128) as u64;
        }
        b = ((b as u128 * b as u128) % m as u128) as u64;
        e >>= 1;
    }
    acc
}

/// Degrees of the irreducible factors of a squarefree monic `f` over `F_p`
/// (distinct-degree factorization), sorted ascending. `None` if `f` is not
/// squarefree mod `p`.
pub fn degree_pattern(f: &FpPoly) -> Option<Vec<usize>> {
    let f = f.monic();
    let n = f.degree()?;
    if !f.gcd(&f.derivative()).degree().is_some_and(|d| d == 0) {
        return None;
    }
    let p = f.p;
    let x = FpPoly::new(p, vec![0, 1]);
    let mut rest = f.clone();
    let mut h = x.clone();
    let mut out = Vec::new();
    let mut d = 1;
    while let Some(deg) = rest.degree() {
        if deg == 0 {
            break;
        }
        if 2 * d > deg {
            out.push(deg);
            break;
        }
        h = rest.pow_mod(&h, p as u128);
        let g = rest.gcd(&h.sub(&x));
        let gd = g.degree().unwrap();
        if gd > 0 {
            for _ in 0..gd / d {
                out.push(d);
            }
            rest = rest.div_rem(&g).0;
            h = h.div_rem(&rest).1;
        }
        d += 1;
    }
    debug_assert_eq!(out.iter().sum::<usize>(), n);
    out.sort_unstable();
    Some(out)
}

/// Reduce an integer polynomial's coefficients into `[0, m)`.
pub fn poly_mod(p: &IntPoly, m: &BigInt) -> IntPoly {
    IntPoly::new(p.coeffs().iter().map(|c| c.mod_floor(m)).collect())
}

/// Lift `f ≡ g h (mod p)` (with `g`, `h` monic and coprime mod `p`) to a
/// factorization modulo `p^n`. Linear lifting, one p-adic digit per step.
pub fn hensel_lift(f: &IntPoly, g: &IntPoly, h: &IntPoly, p: u64, n: u32) -> (IntPoly, IntPoly) {
    assert!(f.is_monic() && g.is_monic() && h.is_monic());
    let pb = BigInt::from(p);
    let gp = FpPoly::from_int(g, p);
    let hp = FpPoly::from_int(h, p);
    let (one, s, t) = FpPoly::ext_gcd(&gp, &hp);
    assert_eq!(one.degree(), Some(0), "Hensel factors must be coprime mod p");
    let mut g = poly_mod(g, &pb);
    let mut h = poly_mod(h, &pb);
    let mut pk = pb.clone();
    for _ in 1..n {
        let err = &(f - &(&g * &h));
        // err is divisible by p^k
        let e: IntPoly = IntPoly::new(
            err.coeffs()
                .iter()
                .map(|c| {
                    debug_assert!(c.is_multiple_of(&pk));
                    c / &pk
                })
                .collect(),
        );
        let ep = FpPoly::from_int(&e, p);
        let (q, r) = t.mul(&ep).div_rem(&gp);
        let dh = s.mul(&ep).add(&q.mul(&hp));
        g = &g + &r.to_int().scale(&pk);
        h = &h + &dh.to_int().scale(&pk);
        pk *= &pb;
        g = poly_mod(&g, &pk);
        h = poly_mod(&h, &pk);
    }
    (g, h)
}

/// Indices of columns of `m` that form a basis of its column space mod `p`
/// (greedy, left to right).
pub fn independent_columns_mod_p(m: &IntMatrix, p: u64) -> Vec<usize> {
    let rows = m.rows();
    let pb = BigInt::from(p);
    let mut basis: Vec<(Vec<u64>, usize)> = Vec::new(); // (reduced column, pivot row)
    let mut chosen = Vec::new();
    for j in 0..m.cols() {
        let mut v: Vec<u64> = (0..rows).map(|i| m[(i, j)].mod_floor(&pb).to_u64().unwrap()).collect();
        for (b, piv) in &basis {
            if v[*piv] != 0 {
                let f = ((v[*piv] as u128 * pow_mod(b[*piv], p - 2, p) as u128) % p as u128) as u64;
                for (x, y) in v.iter_mut().zip(b) {
                    *x = (*x + p - ((f as u128 * *y as u128) % p as u128) as u64) % p;
                }
            }
        }
        if let Some(piv) = v.iter().position(|&x| x != 0) {
            basis.push((v, piv));
            chosen.push(j);
        }
    }
    chosen
}

/// Rank of `m` modulo the prime `p`.
pub fn rank_mod_p(m: &IntMatrix, p: u64) -> usize {
    independent_columns_mod_p(m, p).len()
}

/// Inverse of a square matrix modulo `p^n`, or `None` if its determinant is
/// divisible by `p`.
pub fn inverse_mod_prime_power(a: &IntMatrix, p: u64, modulus: &BigInt) -> Option<IntMatrix> {
    assert!(a.is_square());
    let n = a.rows();
    let mut m = a.reduce_mod(modulus).hstack(&IntMatrix::identity(n));
    for c in 0..n {
        let piv = (c..n).find(|&i| is_unit_mod_p(&m[(i, c)], p))?;
        m.swap_rows(c, piv);
        let inv = mod_inverse(&m[(c, c)], modulus)?;
        for x in m.row_mut(c) {
            *x = (&*x * &inv).mod_floor(modulus);
        }
        for i in 0..n {
            if i != c && !m[(i, c)].is_zero() {
                let f = -m[(i, c)].clone();
                m.add_row_multiple(i, c, &f);
                for x in m.row_mut(i) {
                    *x = x.mod_floor(modulus);
                }
            }
        }
    }
    Some(m.submatrix(0..n, n..2 * n))
}
