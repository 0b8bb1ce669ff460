//! Exact integer and rational linear algebra and univariate polynomial
//! algorithms. Nothing in here touches floating point.

mod matrix;
pub mod modular;
mod normal_form;
mod poly;
mod rational;
mod sturm;

pub use matrix::{charpoly, IntMatrix};
pub use normal_form::{
    hnf, hnf_basis, integer_kernel, minimal_poly, saturate_rows, snf, solve_row_combination, Hermite,
};
pub use poly::{cyclotomic, euler_phi, poly_gcd, squarefree_part, IntPoly};
pub use rational::RatVector;
pub use sturm::{isolate_roots, sturm_count, SturmSequence};

use num_bigint::BigInt;

use num_traits::{Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("polynomial is not squarefree")]
    NotSquarefree,
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("interval is empty (lo >= hi)")]
    EmptyInterval,
    #[error("denominator must be positive")]
    NonPositiveDenominator,
}

/// `ceil(sqrt(n))` for `n >= 0`.
pub fn ceil_sqrt(n: &BigInt) -> BigInt {
    assert!(!n.is_negative(), "square root of a negative number");
    if n.is_zero() {
        return BigInt::zero();
    }
    let r = n.sqrt();
    if &(&r * &r) == n {
        r
    } else {
        r + 1
    }
}

/// Deterministic trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}
