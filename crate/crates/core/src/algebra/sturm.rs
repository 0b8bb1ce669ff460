//! Exact real-root counting with Sturm sequences.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::Signed;

use super::poly::IntPoly;
use super::AlgebraError;

/// Sturm sequence of a squarefree integer polynomial.
///
/// Built from signed pseudo-remainders scaled by positive factors, so every
/// member has the sign pattern of the classical rational sequence.
#[derive(Clone, Debug)]
pub struct SturmSequence {
    chain: Vec<IntPoly>,
}

impl SturmSequence {
    pub fn new(p: &IntPoly) -> Result<Self, AlgebraError> {
        if p.is_zero() {
            return Err(AlgebraError::ZeroPolynomial);
        }
        let dp = p.derivative();
        if !IntPoly::gcd(p, &dp).is_constant() {
            return Err(AlgebraError::NotSquarefree);
        }
        let mut chain = vec![p.clone()];
        if !dp.is_zero() {
            chain.push(dp);
        }
        while chain.len() >= 2 {
            let a = &chain[chain.len() - 2];
            let b = &chain[chain.len() - 1];
            if b.is_constant() {
                break;
            }
            let (_, mut r) = IntPoly::pseudo_div_rem(a, b);
            let delta = a.deg() - b.deg();
            // lc(b)^(delta + 1) < 0 flips the sign of the remainder
            if b.leading().unwrap().is_negative() && delta % 2 == 0 {
                r = -r;
            }
            if r.is_zero() {
                break;
            }
            let g = r.content();
            let r = IntPoly::new(r.coeffs().iter().map(|c| -(c / &g)).collect());
            chain.push(r);
        }
        Ok(SturmSequence { chain })
    }

    pub fn chain(&self) -> &[IntPoly] {
        &self.chain
    }

    /// Sign variations at `x`, zeros dropped.
    pub fn variations_at(&self, x: &BigRational) -> usize {
        count_variations(self.chain.iter().map(|p| p.sign_at(x)))
    }

    /// Sign variations at `+inf` (`positive = true`) or `-inf`.
    pub fn variations_at_infinity(&self, positive: bool) -> usize {
        count_variations(self.chain.iter().map(|p| {
            let lc = p.leading().unwrap().sign();
            if positive || p.deg() % 2 == 0 {
                lc
            } else {
                -lc
            }
        }))
    }

    /// Number of distinct real roots in the half-open interval `(lo, hi]`.
    pub fn count(&self, lo: &BigRational, hi: &BigRational) -> usize {
        debug_assert!(lo < hi);
        self.variations_at(lo) - self.variations_at(hi)
    }

    /// Number of distinct real roots overall.
    pub fn count_real(&self) -> usize {
        self.variations_at_infinity(false) - self.variations_at_infinity(true)
    }
}

fn count_variations(signs: impl Iterator<Item = Sign>) -> usize {
    let mut last = Sign::NoSign;
    let mut count = 0;
    for s in signs {
        if s == Sign::NoSign {
            continue;
        }
        if last != Sign::NoSign && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

/// Distinct real roots of the squarefree `p` in `(lo, hi]`.
pub fn sturm_count(p: &IntPoly, lo: &BigRational, hi: &BigRational) -> Result<usize, AlgebraError> {
    if lo >= hi {
        return Err(AlgebraError::EmptyInterval);
    }
    Ok(SturmSequence::new(p)?.count(lo, hi))
}

/// Isolating intervals `(lo, hi]` (width at most `width`) for the distinct
/// real roots of a squarefree polynomial inside `(lo, hi]`.
pub fn isolate_roots(
    seq: &SturmSequence,
    lo: &BigRational,
    hi: &BigRational,
    width: &BigRational,
) -> Vec<(BigRational, BigRational)> {
    let mut out = Vec::new();
    let mut stack = vec![(lo.clone(), hi.clone(), seq.count(lo, hi))];
    let two = BigRational::from_integer(BigInt::from(2));
    while let Some((a, b, n)) = stack.pop() {
        if n == 0 {
            continue;
        }
        if n == 1 && (&b - &a) <= *width {
            out.push((a, b));
            continue;
        }
        let mid = (&a + &b) / &two;
        let left = seq.count(&a, &mid);
        // right half first so the stack pops the left half first
        stack.push((mid.clone(), b, n - left));
        stack.push((a, mid, left));
    }
    out
}
