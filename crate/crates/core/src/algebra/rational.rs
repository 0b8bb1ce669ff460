use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::AlgebraError;

/// Rational vector stored as integer numerators over one positive common
/// denominator, kept in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatVector {
    numerators: Vec<BigInt>,
    denominator: BigInt,
}

impl RatVector {
    pub fn new(numerators: Vec<BigInt>, denominator: BigInt) -> Result<Self, AlgebraError> {
        if !denominator.is_positive() {
            return Err(AlgebraError::NonPositiveDenominator);
        }
        let g = numerators.iter().fold(denominator.clone(), |g, x| g.gcd(x));
        Ok(RatVector {
            numerators: numerators.into_iter().map(|x| x / &g).collect(),
            denominator: denominator / g,
        })
    }

    pub fn from_integers(v: Vec<BigInt>) -> Self {
        RatVector {
            numerators: v,
            denominator: BigInt::one(),
        }
    }

    pub fn from_i64(v: &[i64]) -> Self {
        Self::from_integers(v.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn from_rationals(v: &[BigRational]) -> Self {
        let den = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
        let nums = v.iter().map(|x| x.numer() * (&den / x.denom())).collect();
        Self::new(nums, den).expect("lcm of denominators is positive")
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.numerators
    }

    pub fn denominator(&self) -> &BigInt {
        &self.denominator
    }

    pub fn len(&self) -> usize {
        self.numerators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.numerators.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.denominator.is_one()
    }

    pub fn get(&self, i: usize) -> BigRational {
        BigRational::new(self.numerators[i].clone(), self.denominator.clone())
    }

    pub fn to_rationals(&self) -> Vec<BigRational> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }
}
