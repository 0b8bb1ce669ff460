//! Newton polygons, integral splittings `M = M⁰ ⊕ M¹ ⊕ M²` over `Z_p`
//! certified at finite precision, the unit-root pairing and hyperbolic
//! complements of isotropic lines.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Pow, ToPrimitive, Zero};
use serde::Serialize;

use crate::algebra::modular::{
    hensel_lift, independent_columns_mod_p, inverse_mod_prime_power, mod_inverse, poly_mod, symmetric_mod, valuation,
};
use crate::algebra::{IntMatrix, IntPoly};
use crate::weil::FrobeniusData;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PadicError {
    #[error("constant term is zero")]
    ZeroConstantTerm,
    #[error("Newton polygon {found} does not match the requested shape {expected}")]
    NotOrdinary { expected: String, found: String },
    #[error("not integrally split: {0}")]
    NotSplittable(DivisibilityFailure),
    #[error("precision p^{0} is insufficient")]
    PrecisionInsufficient(u32),
    #[error("form is not unimodular at p")]
    NotUnimodular,
    #[error("vector is not isotropic")]
    NotIsotropic,
    #[error("vector is not primitive at p")]
    NotPrimitive,
    #[error("odd form refused at p = 2")]
    OddFormAtTwo,
    #[error("expected a 2x2 symmetric matrix")]
    Shape,
}

/// The offending entry of `q^{-level} F` on the positive-slope part.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivisibilityFailure {
    /// Number of divisions by `q` already performed.
    pub level: usize,
    pub row: usize,
    pub col: usize,
    /// Entry reduced to the symmetric range.
    #[serde(serialize_with = "crate::format::ser_bigint")]
    pub entry: BigInt,
}

impl std::fmt::Display for DivisibilityFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "entry ({}, {}) = {} of the level-{} block is not divisible by q",
            self.row, self.col, self.entry, self.level
        )
    }
}

/// Root valuations with multiplicities, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonPolygon {
    segments: Vec<(Rational64, usize)>,
}

impl NewtonPolygon {
    pub fn segments(&self) -> &[(Rational64, usize)] {
        &self.segments
    }

    pub fn degree(&self) -> usize {
        self.segments.iter().map(|s| s.1).sum()
    }

    /// Multiplicity of root valuation `v`.
    pub fn multiplicity(&self, v: Rational64) -> usize {
        self.segments.iter().find(|s| s.0 == v).map_or(0, |s| s.1)
    }

    /// Valuation multiset equals `{0: r0, a: r1, 2a: r2}` (zero counts omitted).
    pub fn matches_shape(&self, a: u32, shape: (usize, usize, usize)) -> bool {
        self.segments == shape_segments(a, shape)
    }

    /// `Σ valuation · multiplicity`.
    pub fn total_valuation(&self) -> Rational64 {
        self.segments
            .iter()
            .map(|(v, l)| v * Rational64::from_integer(*l as i64))
            .sum()
    }
}

impl std::fmt::Display for NewtonPolygon {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.segments.iter().map(|(v, l)| format!("{v}: {l}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

fn shape_segments(a: u32, shape: (usize, usize, usize)) -> Vec<(Rational64, usize)> {
    let a = a as i64;
    [(0, shape.0), (a, shape.1), (2 * a, shape.2)]
        .into_iter()
        .filter(|&(_, l)| l > 0)
        .map(|(v, l)| (Rational64::from_integer(v), l))
        .collect()
}

fn shape_string(a: u32, shape: (usize, usize, usize)) -> String {
    NewtonPolygon {
        segments: shape_segments(a, shape),
    }
    .to_string()
}

/// Lower convex hull of `(i, v_p(c_i))`, returned as root valuations.
pub fn newton_polygon(poly: &IntPoly, p: u64) -> Result<NewtonPolygon, PadicError> {
    if poly.coeff(0).is_zero() {
        return Err(PadicError::ZeroConstantTerm);
    }
    let pts: Vec<(i64, i64)> = poly
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i as i64, valuation(c, p) as i64))
        .collect();
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            let cross = (a.0 - o.0) * (pt.1 - o.1) - (a.1 - o.1) * (pt.0 - o.0);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut segments: Vec<(Rational64, usize)> = hull
        .windows(2)
        .map(|w| {
            let len = w[1].0 - w[0].0;
            (Rational64::new(w[0].1 - w[1].1, len), len as usize)
        })
        .collect();
    segments.sort();
    Ok(NewtonPolygon { segments })
}

/// Root valuations exactly `{0: 1, a: 20, 2a: 1}`.
pub fn is_ordinary_k3_shape(np: &NewtonPolygon, a: u32) -> bool {
    np.matches_shape(a, (1, 20, 1))
}

/// Working modulus `p^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PadicPrecision {
    pub p: u64,
    pub n: u32,
}

impl PadicPrecision {
    pub fn new(p: u64, n: u32) -> Self {
        assert!(n >= 1, "precision must be positive");
        PadicPrecision { p, n }
    }

    pub fn modulus(&self) -> BigInt {
        BigInt::from(self.p).pow(self.n)
    }

    /// Default precision `a·(rank + 4)`.
    pub fn default_for(p: u64, a: u32, rank: usize) -> Self {
        Self::new(p, a * (rank as u32 + 4))
    }
}

/// Certified `Z_p`-decomposition into pieces on which `F` is `q^s` times an
/// invertible map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitCertificate {
    pub p: u64,
    pub a: u32,
    /// Precision the decomposition was computed at.
    pub working_precision: u32,
    /// Precision the certificate is verified at; bases are reduced modulo
    /// `p^certified_precision`.
    pub certified_precision: u32,
    /// `bases[s]`: rows are basis vectors of `M^s` in lattice coordinates.
    pub bases: [IntMatrix; 3],
    /// Determinant of the stacked basis modulo `p` (a unit).
    pub stacked_det_mod_p: u64,
    /// Determinant of `q^{-s} F` on `M^s` modulo `p` (units; 1 for empty blocks).
    pub block_det_mod_p: [u64; 3],
}

impl SplitCertificate {
    pub fn ranks(&self) -> (usize, usize, usize) {
        (self.bases[0].rows(), self.bases[1].rows(), self.bases[2].rows())
    }
}

/// Driver options for [`integral_splitting`].
#[derive(Debug, Clone, Copy)]
pub struct SplitOptions {
    /// Initial precision exponent; `None` means `a·(rank + 4)`.
    pub initial_precision: Option<u32>,
    /// Maximum precision as a multiple of the initial one.
    pub cap_factor: u32,
}

impl Default for SplitOptions {
    fn default() -> Self {
        SplitOptions {
            initial_precision: None,
            cap_factor: 16,
        }
    }
}

/// Computes and certifies the integral splitting for the shape `(r0, r1, r2)`,
/// doubling the precision on instability up to the configured cap.
pub fn integral_splitting(
    fd: &FrobeniusData,
    shape: (usize, usize, usize),
    opts: SplitOptions,
) -> Result<SplitCertificate, PadicError> {
    let p = fd.params().p();
    let a = fd.params().a();
    let n0 = opts
        .initial_precision
        .unwrap_or_else(|| PadicPrecision::default_for(p, a, fd.rank()).n)
        .max(1);
    let cap = n0.saturating_mul(opts.cap_factor.max(1));
    let mut n = n0;
    loop {
        match split_and_check_stability(fd, shape, PadicPrecision::new(p, n)) {
            Err(PadicError::PrecisionInsufficient(_)) if n.saturating_mul(2) <= cap => n *= 2,
            other => return other,
        }
    }
}

fn split_and_check_stability(
    fd: &FrobeniusData,
    shape: (usize, usize, usize),
    prec: PadicPrecision,
) -> Result<SplitCertificate, PadicError> {
    let cert = integral_splitting_at(fd, shape, prec)?;
    verify_certificate(fd, &cert)?;
    let finer = integral_splitting_at(fd, shape, PadicPrecision::new(prec.p, prec.n * 2))?;
    verify_certificate(fd, &finer)?;
    let m = BigInt::from(prec.p).pow(cert.certified_precision);
    let stable = (0..3).all(|s| finer.bases[s].reduce_mod(&m) == cert.bases[s]);
    if !stable {
        return Err(PadicError::PrecisionInsufficient(prec.n));
    }
    Ok(cert)
}

/// One splitting attempt at a fixed precision, without the stability rerun.
pub fn integral_splitting_at(
    fd: &FrobeniusData,
    shape: (usize, usize, usize),
    prec: PadicPrecision,
) -> Result<SplitCertificate, PadicError> {
    let p = prec.p;
    let a = fd.params().a();
    let q = fd.q().clone();
    let n = fd.rank();
    if shape.0 + shape.1 + shape.2 != n {
        return Err(PadicError::NotOrdinary {
            expected: shape_string(a, shape),
            found: format!("rank {n}"),
        });
    }
    let np = newton_polygon(&fd.charpoly(), p)?;
    if !np.matches_shape(a, shape) {
        return Err(PadicError::NotOrdinary {
            expected: shape_string(a, shape),
            found: np.to_string(),
        });
    }
    if prec.n < 2 * a + 1 {
        return Err(PadicError::PrecisionInsufficient(prec.n));
    }
    let modulus = prec.modulus();
    let f = fd.frobenius().reduce_mod(&modulus);
    let counts = [shape.0, shape.1, shape.2];
    let mut certified = prec.n;
    let cols = split_levels(&f, p, &q, a, prec.n, &counts, 0, &mut certified)?;
    if certified < 2 * a + 1 {
        return Err(PadicError::PrecisionInsufficient(prec.n));
    }
    let cm = BigInt::from(p).pow(certified);
    let bases: Vec<IntMatrix> = cols.into_iter().map(|c| c.transpose().reduce_mod(&cm)).collect();
    let bases: [IntMatrix; 3] = bases.try_into().expect("three levels");
    let mut cert = SplitCertificate {
        p,
        a,
        working_precision: prec.n,
        certified_precision: certified,
        bases,
        stacked_det_mod_p: 0,
        block_det_mod_p: [1; 3],
    };
    fill_residues(fd, &mut cert)?;
    Ok(cert)
}

/// Splits the operator `a` (entries mod `p^prec`) into level blocks with
/// sizes `counts`; returns column bases in the coordinates of `a` and lowers
/// `split_prec` to the smallest precision at which a nontrivial split ran.
#[allow(clippy::too_many_arguments)]
fn split_levels(
    a: &IntMatrix,
    p: u64,
    q: &BigInt,
    a_exp: u32,
    prec: u32,
    counts: &[usize],
    level: usize,
    split_prec: &mut u32,
) -> Result<Vec<IntMatrix>, PadicError> {
    let m = a.rows();
    let modulus = BigInt::from(p).pow(prec);
    let c0 = counts[0];
    let rest = m - c0;
    let empty = || IntMatrix::zeros(m, 0);
    if rest == 0 {
        let mut out = vec![IntMatrix::identity(m)];
        out.extend(counts[1..].iter().map(|_| empty()));
        return Ok(out);
    }
    let (c_zero, c_plus) = if c0 == 0 {
        (empty(), IntMatrix::identity(m))
    } else {
        let chi = poly_mod(&a.charpoly().expect("square"), &modulus);
        // chi ≡ t^rest · g0 (mod p) with g0(0) a unit
        let pb = BigInt::from(p);
        let reduced = poly_mod(&chi, &pb);
        if (0..rest).any(|i| !reduced.coeff(i).is_zero()) || reduced.coeff(rest).is_zero() {
            return Err(PadicError::PrecisionInsufficient(prec));
        }
        *split_prec = (*split_prec).min(prec);
        let g0 = IntPoly::new(reduced.coeffs()[rest..].to_vec());
        let tk = IntPoly::monomial(BigInt::one(), rest);
        let (p0, pplus) = hensel_lift(&chi, &g0, &tk, p, prec);
        let img0 = a.eval_poly(&pplus).reduce_mod(&modulus);
        let imgp = a.eval_poly(&p0).reduce_mod(&modulus);
        let sel0 = independent_columns_mod_p(&img0, p);
        let selp = independent_columns_mod_p(&imgp, p);
        if sel0.len() != c0 || selp.len() != rest {
            return Err(PadicError::PrecisionInsufficient(prec));
        }
        (
            img0.transpose().select_rows(&sel0).transpose(),
            imgp.transpose().select_rows(&selp).transpose(),
        )
    };
    let c = c_zero.hstack(&c_plus);
    let cinv = inverse_mod_prime_power(&c, p, &modulus).ok_or(PadicError::PrecisionInsufficient(prec))?;
    let conj = cinv.matmul(a).matmul(&c).reduce_mod(&modulus);
    for i in 0..m {
        for j in 0..m {
            if (i < c0) != (j < c0) && !conj[(i, j)].is_zero() {
                return Err(PadicError::PrecisionInsufficient(prec));
            }
        }
    }
    let block = conj.submatrix(c0..m, c0..m);
    for i in 0..rest {
        for j in 0..rest {
            if !block[(i, j)].is_multiple_of(q) {
                return Err(PadicError::NotSplittable(DivisibilityFailure {
                    level,
                    row: i,
                    col: j,
                    entry: symmetric_mod(&block[(i, j)], &modulus),
                }));
            }
        }
    }
    if prec <= a_exp {
        return Err(PadicError::PrecisionInsufficient(prec));
    }
    let sub_prec = prec - a_exp;
    let sub_mod = BigInt::from(p).pow(sub_prec);
    let g = block.div_exact(q).expect("checked divisibility").reduce_mod(&sub_mod);
    let sub = split_levels(&g, p, q, a_exp, sub_prec, &counts[1..], level + 1, split_prec)?;
    let mut out = vec![c_zero];
    out.extend(sub.into_iter().map(|b| c_plus.matmul(&b).reduce_mod(&modulus)));
    Ok(out)
}

fn det_mod_p(m: &IntMatrix, p: u64) -> u64 {
    if m.rows() == 0 {
        return 1;
    }
    m.det()
        .expect("square")
        .mod_floor(&BigInt::from(p))
        .to_u64()
        .expect("residue fits")
}

/// `C⁻¹ F C` for the stacked column basis, together with block offsets.
fn conjugated(
    fd: &FrobeniusData,
    cert: &SplitCertificate,
    modulus: &BigInt,
) -> Result<(IntMatrix, [usize; 4]), PadicError> {
    let stacked = cert.bases[0].vstack(&cert.bases[1]).vstack(&cert.bases[2]);
    let c = stacked.transpose();
    let cinv = inverse_mod_prime_power(&c, cert.p, modulus)
        .ok_or(PadicError::PrecisionInsufficient(cert.working_precision))?;
    let conj = cinv.matmul(fd.frobenius()).matmul(&c).reduce_mod(modulus);
    let (r0, r1, r2) = cert.ranks();
    Ok((conj, [0, r0, r0 + r1, r0 + r1 + r2]))
}

fn fill_residues(fd: &FrobeniusData, cert: &mut SplitCertificate) -> Result<(), PadicError> {
    let modulus = BigInt::from(cert.p).pow(cert.certified_precision);
    let stacked = cert.bases[0].vstack(&cert.bases[1]).vstack(&cert.bases[2]);
    cert.stacked_det_mod_p = det_mod_p(&stacked, cert.p);
    let (conj, off) = conjugated(fd, cert, &modulus)?;
    for s in 0..3 {
        let block = conj.submatrix(off[s]..off[s + 1], off[s]..off[s + 1]);
        let qs = fd.q().pow(s as u32);
        let scaled = block
            .div_exact(&qs)
            .ok_or(PadicError::PrecisionInsufficient(cert.working_precision))?;
        cert.block_det_mod_p[s] = det_mod_p(&scaled, cert.p);
    }
    Ok(())
}

/// Independent re-verification: the stacked basis is invertible mod `p`,
/// `C⁻¹ F C` is block diagonal modulo `p^certified_precision`, and block `s`
/// is `q^s` times a matrix with unit determinant mod `p`.
pub fn verify_certificate(fd: &FrobeniusData, cert: &SplitCertificate) -> Result<(), PadicError> {
    let p = cert.p;
    let insufficient = PadicError::PrecisionInsufficient(cert.working_precision);
    let (r0, r1, r2) = cert.ranks();
    if r0 + r1 + r2 != fd.rank() || cert.certified_precision < 2 * cert.a + 1 {
        return Err(insufficient);
    }
    let modulus = BigInt::from(p).pow(cert.certified_precision);
    let stacked = cert.bases[0].vstack(&cert.bases[1]).vstack(&cert.bases[2]);
    let det = det_mod_p(&stacked, p);
    if det == 0 || det != cert.stacked_det_mod_p {
        return Err(insufficient);
    }
    let (conj, off) = conjugated(fd, cert, &modulus)?;
    let block_of = |i: usize| (0..3).find(|&s| i < off[s + 1]).unwrap();
    let n = fd.rank();
    for i in 0..n {
        for j in 0..n {
            if block_of(i) != block_of(j) && !conj[(i, j)].is_zero() {
                return Err(insufficient);
            }
        }
    }
    for s in 0..3 {
        let block = conj.submatrix(off[s]..off[s + 1], off[s]..off[s + 1]);
        let qs = fd.q().pow(s as u32);
        let Some(scaled) = block.div_exact(&qs) else {
            let (row, col) = (0..block.rows())
                .flat_map(|i| (0..block.cols()).map(move |j| (i, j)))
                .find(|&(i, j)| !block[(i, j)].is_multiple_of(&qs))
                .unwrap();
            return Err(PadicError::NotSplittable(DivisibilityFailure {
                level: s,
                row,
                col,
                entry: symmetric_mod(&block[(row, col)], &modulus),
            }));
        };
        let d = det_mod_p(&scaled, p);
        if d == 0 || d != cert.block_det_mod_p[s] {
            return Err(insufficient);
        }
    }
    Ok(())
}

/// For a single slope-0 root `u` lifted mod `p^N`, checks that `q²/u` is
/// again a root: `P(q² u⁻¹) ≡ 0 (mod p^{N-2a})`.
pub fn unit_root_pairing_check(fd: &FrobeniusData, prec: PadicPrecision) -> Result<bool, PadicError> {
    let chi = fd.charpoly();
    let a = fd.params().a();
    let np = newton_polygon(&chi, prec.p)?;
    if np.multiplicity(Rational64::zero()) != 1 {
        return Err(PadicError::NotOrdinary {
            expected: "one root of valuation 0".into(),
            found: np.to_string(),
        });
    }
    if prec.n <= 2 * a {
        return Err(PadicError::PrecisionInsufficient(prec.n));
    }
    Ok(unit_root_pairing_poly(&chi, fd.q(), prec))
}

/// Polynomial-level form of [`unit_root_pairing_check`]; `chi` must have
/// exactly one root of valuation zero.
pub fn unit_root_pairing_poly(chi: &IntPoly, q: &BigInt, prec: PadicPrecision) -> bool {
    let p = prec.p;
    let pb = BigInt::from(p);
    let modulus = prec.modulus();
    let n = chi.deg();
    let reduced = poly_mod(chi, &pb);
    // chi ≡ t^{n-1} (t - ū) mod p
    let ubar = (-reduced.coeff(n - 1)).mod_floor(&pb);
    let g0 = IntPoly::new(vec![-ubar, BigInt::one()]);
    let (g, _) = hensel_lift(chi, &g0, &IntPoly::monomial(BigInt::one(), n - 1), p, prec.n);
    let u = (-g.coeff(0)).mod_floor(&modulus);
    let Some(uinv) = mod_inverse(&u, &modulus) else {
        return false;
    };
    let v = (q * q * uinv).mod_floor(&modulus);
    let check = pb.pow(prec.n.saturating_sub(2 * valuation(q, p)));
    chi.eval(&v).is_multiple_of(&check)
}

/// Given an even rank-2 form unimodular at `p` and a primitive isotropic
/// vector `l`, returns `v` with `⟨v, v⟩ ≡ 0` and `⟨l, v⟩ ≡ 1 (mod p^N)`,
/// reduced to the symmetric range.
pub fn hyperbolic_complement(gram: &IntMatrix, l: &[BigInt], prec: PadicPrecision) -> Result<[BigInt; 2], PadicError> {
    if gram.rows() != 2 || gram.cols() != 2 || !gram.is_symmetric() || l.len() != 2 {
        return Err(PadicError::Shape);
    }
    let p = prec.p;
    let pb = BigInt::from(p);
    if gram.det().unwrap().is_multiple_of(&pb) {
        return Err(PadicError::NotUnimodular);
    }
    let even = gram[(0, 0)].is_even() && gram[(1, 1)].is_even();
    if p == 2 && !even {
        return Err(PadicError::OddFormAtTwo);
    }
    if !gram.bilinear(l, l).is_zero() {
        return Err(PadicError::NotIsotropic);
    }
    let e = l[0].extended_gcd(&l[1]);
    if e.gcd.is_multiple_of(&pb) {
        return Err(PadicError::NotPrimitive);
    }
    // x l0 + y l1 = g; (l, f) with f = (-y, x) has determinant g, a unit at p.
    let f = [-e.y.clone(), e.x.clone()];
    let modulus = prec.modulus();
    let d = gram.bilinear(l, &f);
    let ff = gram.bilinear(&f, &f);
    let t = if ff.is_even() {
        let dinv = mod_inverse(&d, &modulus).ok_or(PadicError::NotUnimodular)?;
        -(&ff / 2u32) * dinv
    } else {
        let inv = mod_inverse(&(&d * 2), &modulus).ok_or(PadicError::NotUnimodular)?;
        -ff * inv
    };
    let dinv = mod_inverse(&d, &modulus).ok_or(PadicError::NotUnimodular)?;
    let v = [
        symmetric_mod(&((&f[0] + &t * &l[0]) * &dinv), &modulus),
        symmetric_mod(&((&f[1] + &t * &l[1]) * &dinv), &modulus),
    ];
    Ok(v)
}

/// Root valuations as `(numerator/denominator, multiplicity)` strings.
pub fn slope_strings(np: &NewtonPolygon) -> Vec<(String, usize)> {
    np.segments
        .iter()
        .map(|(v, l)| {
            let s = if v.is_integer() {
                v.to_integer().to_string()
            } else {
                v.to_string()
            };
            (s, *l)
        })
        .collect()
}
