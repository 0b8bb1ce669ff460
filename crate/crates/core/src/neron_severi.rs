//! The Néron–Severi part `NS(M, F) = {x : F^d x = q^d x for some d ≥ 1}`,
//! its transcendental complement, and the Hodge-index check.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use crate::algebra::modular::{degree_pattern, FpPoly};
use crate::algebra::{euler_phi, integer_kernel, is_prime, minimal_poly, solve_row_combination, IntMatrix, IntPoly};
use crate::lattice::{signature, LatticeError, Signature, Sublattice};
use crate::weil::FrobeniusData;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NsError {
    #[error("restricted form on NS is degenerate")]
    DegenerateRestriction,
    #[error("NS has rank 0")]
    Empty,
}

/// `NS(M, F)` with its restricted Gram matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NSLattice {
    sublattice: Sublattice,
    gram: IntMatrix,
}

impl NSLattice {
    /// Wraps a saturated sublattice, computing the restricted form.
    pub fn from_sublattice(fd: &FrobeniusData, sublattice: Sublattice) -> Self {
        let gram = fd.lattice().restrict(sublattice.basis());
        NSLattice { sublattice, gram }
    }

    pub fn sublattice(&self) -> &Sublattice {
        &self.sublattice
    }

    pub fn basis(&self) -> &IntMatrix {
        self.sublattice.basis()
    }

    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    pub fn rho(&self) -> usize {
        self.sublattice.rank()
    }

    pub fn signature(&self) -> Result<Signature, NsError> {
        signature(&self.gram).map_err(|_| NsError::DegenerateRestriction)
    }
}

/// Saturated kernel of `F^d - q^d`.
pub fn picard_fixed(fd: &FrobeniusData, d: u32) -> Sublattice {
    let n = fd.rank();
    let fd_pow = fd.frobenius().pow(d as u64);
    let qd: BigInt = fd.q().pow(d);
    let m = fd_pow.sub(&IntMatrix::scalar(n, &qd));
    sublattice_from_kernel(integer_kernel(&m), n)
}

fn sublattice_from_kernel(rows: IntMatrix, n: usize) -> Sublattice {
    if rows.rows() == 0 {
        Sublattice::zero(n)
    } else {
        Sublattice::saturation_of_generators(&rows)
    }
}

/// All `m` with `φ(m) ≤ n`, ascending.
pub fn cyclotomic_orders(n: usize) -> Vec<u64> {
    // φ(m) ≥ sqrt(m / 2), so m ≤ 2n²
    let bound = 2 * (n as u64).pow(2).max(1);
    (1..=bound).filter(|&m| euler_phi(m) <= n as u64).collect()
}

/// `lcm{m : φ(m) ≤ n}`.
pub fn cyclotomic_lcm(n: usize) -> u64 {
    cyclotomic_orders(n).into_iter().fold(1u64, num_integer::lcm)
}

/// `q^{φ(m)} Φ_m(t / q)`.
pub fn scaled_cyclotomic(m: u64, q: &BigInt) -> IntPoly {
    IntPoly::cyclotomic(m).scale_roots(q)
}

/// Cyclotomic orders `m` whose scaled factor divides the characteristic
/// polynomial, ascending.
pub fn active_orders(fd: &FrobeniusData) -> Vec<u64> {
    let chi = fd.charpoly();
    cyclotomic_orders(fd.rank())
        .into_iter()
        .filter(|&m| chi.div_exact(&scaled_cyclotomic(m, fd.q())).is_some())
        .collect()
}

/// Saturation of `Σ_m ker(q^{φ(m)} Φ_m(F/q))`.
pub fn neron_severi(fd: &FrobeniusData) -> NSLattice {
    let n = fd.rank();
    let mut gens = IntMatrix::empty(n);
    for m in active_orders(fd) {
        let k = integer_kernel(&fd.frobenius().eval_poly(&scaled_cyclotomic(m, fd.q())));
        gens = gens.vstack(&k);
    }
    NSLattice::from_sublattice(fd, sublattice_from_kernel(gens, n))
}

/// Verdict on cyclicity of `T ⊗ Q` as a `Q[F]`-module with irreducible
/// minimal polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Cyclicity {
    Yes,
    No,
    Inconclusive,
}

/// Transcendental lattice with the action of `F` on it.
#[derive(Debug, Clone)]
pub struct Transcendental {
    pub sublattice: Sublattice,
    /// Matrix of `F` on `T` in the basis of `T` (acting on row coordinates:
    /// `F(b_i) = Σ_j action[i][j] b_j`).
    pub action: IntMatrix,
    pub minimal_poly: IntPoly,
    pub cyclic: Cyclicity,
}

/// Expresses `F(b_i)` in the rows `b_j` of a saturated `F`-stable basis.
/// `None` if the span is not `F`-stable over `Z`.
pub fn restricted_action(f: &IntMatrix, basis: &IntMatrix) -> Option<IntMatrix> {
    let k = basis.rows();
    let mut rows = Vec::with_capacity(k);
    for i in 0..k {
        let image = f.mul_vec(basis.row(i));
        let coords = solve_row_combination(basis, &image)?;
        let ints: Option<Vec<BigInt>> = coords
            .into_iter()
            .map(|c| c.is_integer().then(|| c.to_integer()))
            .collect();
        rows.push(ints?);
    }
    if k == 0 {
        return Some(IntMatrix::zeros(0, 0));
    }
    IntMatrix::from_rows(rows).ok()
}

/// `F` maps the row span of `basis` into itself.
pub fn is_f_stable(fd: &FrobeniusData, s: &Sublattice) -> bool {
    restricted_action(fd.frobenius(), s.basis()).is_some()
}

/// Orthogonal complement of NS with the cyclicity verdict.
pub fn transcendental(fd: &FrobeniusData, ns: &NSLattice) -> Transcendental {
    let t = fd.lattice().orthogonal_complement(ns.sublattice());
    let k = t.rank();
    if k == 0 {
        return Transcendental {
            sublattice: t,
            action: IntMatrix::zeros(0, 0),
            minimal_poly: IntPoly::one(),
            cyclic: Cyclicity::Yes,
        };
    }
    let Some(action) = restricted_action(fd.frobenius(), t.basis()) else {
        return Transcendental {
            sublattice: t,
            action: IntMatrix::zeros(0, 0),
            minimal_poly: IntPoly::zero(),
            cyclic: Cyclicity::Inconclusive,
        };
    };
    let mp = minimal_poly(&action).expect("square");
    let cyclic = if mp.deg() < k {
        Cyclicity::No
    } else if irreducibility_certificate(&mp) {
        Cyclicity::Yes
    } else {
        Cyclicity::Inconclusive
    };
    Transcendental {
        sublattice: t,
        action,
        minimal_poly: mp,
        cyclic,
    }
}

/// Proves irreducibility of a monic integer polynomial from factorization
/// degree patterns modulo small primes: the degrees of any rational factor
/// must be a subset sum of every pattern, so an empty intersection of
/// proper subset sums proves irreducibility. `false` means "not proven".
pub fn irreducibility_certificate(f: &IntPoly) -> bool {
    let n = f.deg();
    if n <= 1 {
        return n == 1;
    }
    let mut possible = vec![true; n + 1];
    let mut used = 0;
    for ell in (3u64..2000).filter(|&l| is_prime(l)) {
        let fp = FpPoly::from_int(f, ell);
        if fp.degree() != Some(n) {
            continue;
        }
        let Some(pattern) = degree_pattern(&fp) else {
            continue;
        };
        let mut sums = vec![false; n + 1];
        sums[0] = true;
        for d in pattern {
            for s in (d..=n).rev() {
                if sums[s - d] {
                    sums[s] = true;
                }
            }
        }
        for s in 1..n {
            possible[s] &= sums[s];
        }
        if (1..n).all(|s| !possible[s]) {
            return true;
        }
        used += 1;
        if used >= 40 {
            break;
        }
    }
    false
}

/// Restricted signature equals `(1, rho − 1)`.
pub fn hodge_index_check(ns: &NSLattice) -> Result<bool, NsError> {
    if ns.rho() == 0 {
        return Err(NsError::Empty);
    }
    let sig = ns.signature()?;
    Ok(sig == Signature::new(1, ns.rho() - 1))
}

impl From<LatticeError> for NsError {
    fn from(_: LatticeError) -> Self {
        NsError::DegenerateRestriction
    }
}

/// Exact check that NS and T are orthogonal and of complementary rank.
pub fn is_orthogonal_pair(fd: &FrobeniusData, ns: &NSLattice, t: &Sublattice) -> bool {
    let cross = ns.basis().matmul(fd.lattice().gram()).matmul(&t.basis().transpose());
    cross.entries().iter().all(Zero::is_zero) && ns.rho() + t.rank() == fd.rank()
}

/// Row-span equality of two saturated sublattices.
pub fn same_span(a: &Sublattice, b: &Sublattice) -> bool {
    a.rank() == b.rank() && (0..b.rank()).all(|i| a.contains(b.basis().row(i)))
}

/// Saturated span of a collection of sublattices.
pub fn saturated_union(parts: &[Sublattice], n: usize) -> Sublattice {
    let mut gens = IntMatrix::empty(n);
    for s in parts {
        gens = gens.vstack(s.basis());
    }
    sublattice_from_kernel(gens, n)
}
