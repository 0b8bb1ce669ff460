//! Helpers and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::{Complex, DMatrix, Schur};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use k3frob_core::algebra::{charpoly, IntMatrix, IntPoly};
use k3frob_core::weil::{is_semisimple, is_weil};
use k3frob_core::{BigInt, BigRational, Lattice};

pub fn b(n: i64) -> BigInt {
    BigInt::from(n)
}

pub fn bv(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| b(x)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_f64(x: &BigInt) -> f64 {
    x.to_string().parse().expect("decimal")
}

pub fn to_i64(x: &BigInt) -> i64 {
    x.to_string().parse().expect("fits in i64")
}

pub fn unit_vector(n: usize, i: usize) -> Vec<BigInt> {
    (0..n).map(|j| b((i == j) as i64)).collect()
}

/// A pool of (−2)-vectors of the K3 lattice `U³ ⊕ E8(−1)²`: `e − f` in each
/// hyperbolic plane, the E8 simple roots, and mixed roots `e + α`.
pub fn k3_seed_roots() -> Vec<Vec<BigInt>> {
    let n = 22;
    let mut roots = Vec::new();
    for u in 0..3 {
        let mut v = vec![b(0); n];
        v[2 * u] = b(1);
        v[2 * u + 1] = b(-1);
        roots.push(v);
    }
    for k in 6..22 {
        roots.push(unit_vector(n, k));
    }
    for u in 0..3 {
        for k in [6, 13, 14, 21] {
            let mut v = unit_vector(n, k);
            v[2 * u] = b(1);
            roots.push(v);
        }
    }
    roots
}

/// Product of `count` reflections in roots drawn from `pool`.
pub fn reflection_product(l: &Lattice, pool: &[Vec<BigInt>], count: usize, r: &mut ChaCha8Rng) -> IntMatrix {
    let mut s = IntMatrix::identity(l.rank());
    for _ in 0..count {
        let d = pool.choose(r).expect("non-empty pool");
        s = s.matmul(&l.reflection(d).expect("root"));
    }
    s
}

/// Random isometry of the K3 lattice from up to `max` reflections.
pub fn random_k3_isometry(r: &mut ChaCha8Rng, max: usize) -> IntMatrix {
    let l = Lattice::k3();
    let count = r.gen_range(1..=max);
    reflection_product(&l, &k3_seed_roots(), count, r)
}

/// `σ` has finite order: its characteristic polynomial is a product of
/// cyclotomic polynomials and it is semisimple.
pub fn has_finite_order(s: &IntMatrix) -> bool {
    is_weil(&charpoly(s).expect("square"), &b(1)) && is_semisimple(s)
}

pub fn to_dmatrix(m: &IntMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| to_f64(&m[(i, j)]))
}

/// Absolute values of the eigenvalues of `m`, computed in floating point.
pub fn eigen_moduli(m: &IntMatrix) -> Vec<f64> {
    eigenvalues(to_dmatrix(m))
        .into_iter()
        .map(|(re, im)| re.hypot(im))
        .collect()
}

/// Eigenvalues `(re, im)` via a real Schur decomposition with a bounded
/// iteration count.
pub fn eigenvalues(m: DMatrix<f64>) -> Vec<(f64, f64)> {
    let schur = Schur::try_new(m, f64::EPSILON, 100_000).expect("Schur iteration converges");
    schur.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect()
}

/// Roots of a polynomial (ascending coefficients) by Durand–Kerner
/// iteration, `(re, im)`.
pub fn numeric_roots(coeffs: &[f64]) -> Vec<(f64, f64)> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = coeffs[n];
    let c: Vec<Complex<f64>> = coeffs.iter().map(|&x| Complex::new(x / lead, 0.0)).collect();
    let radius = 1.0 + c[..n].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let eval = |z: Complex<f64>| c.iter().rev().fold(Complex::new(0.0, 0.0), |acc, &a| acc * z + a);
    let seed = Complex::new(0.4, 0.9);
    let mut z: Vec<Complex<f64>> = (0..n).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..5000 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let mut denom = Complex::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            moved = moved.max(step.norm() / (1.0 + z[i].norm()));
        }
        if moved < 1e-15 {
            break;
        }
    }
    z.into_iter().map(|w| (w.re, w.im)).collect()
}

pub fn poly_f64(p: &IntPoly) -> Vec<f64> {
    p.coeffs().iter().map(to_f64).collect()
}

/// Root valuations of `Σ c_i t^i` by brute force: the lower hull value at
/// each integer abscissa is the minimum over all chords spanning it.
pub fn hull_valuations(vals: &[Option<i64>]) -> BTreeMap<BigRational, usize> {
    let pts: Vec<(i64, i64)> = vals
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i as i64, v)))
        .collect();
    let (x0, x1) = (pts[0].0, pts[pts.len() - 1].0);
    let height = |x: i64| -> BigRational {
        let mut best: Option<BigRational> = None;
        for &(i, vi) in &pts {
            for &(j, vj) in &pts {
                if i <= x && x <= j {
                    let h = if i == j {
                        BigRational::from_integer(b(vi))
                    } else {
                        BigRational::from_integer(b(vi)) + BigRational::new(b((vj - vi) * (x - i)), b(j - i))
                    };
                    if best.as_ref().map_or(true, |c| &h < c) {
                        best = Some(h);
                    }
                }
            }
        }
        best.expect("spanned")
    };
    let mut out = BTreeMap::new();
    for x in x0..x1 {
        let v = height(x) - height(x + 1);
        *out.entry(v).or_insert(0) += 1;
    }
    out
}

/// `p`-adic valuation of a nonzero integer.
pub fn val(x: &BigInt, p: u64) -> u32 {
    let pb = b(p as i64);
    let zero = b(0);
    let mut x = x.clone();
    let mut v = 0;
    while &x % &pb == zero {
        x /= &pb;
        v += 1;
    }
    v
}

/// Unimodular lattice of the given rank assembled from `U`, `E8(−1)`, `⟨1⟩`
/// and `⟨−1⟩` summands, with a scaled isometry `F` built blockwise.
pub struct ScaledInstance {
    pub lattice: Lattice,
    pub frobenius: IntMatrix,
}

/// Random block-diagonal `F` with `Fᵀ G F = q² G` on a random unimodular
/// lattice of rank `n`, conjugated by a random isometry.
pub fn random_scaled_instance(n: usize, q: i64, r: &mut ChaCha8Rng) -> ScaledInstance {
    let q = b(q);
    let q2 = &q * &q;
    let mut gram = IntMatrix::zeros(0, 0);
    let mut f = IntMatrix::zeros(0, 0);
    let mut left = n;
    while left > 0 {
        let choice = r.gen_range(0..4);
        let (g, block) = if choice == 0 && left >= 8 {
            let e8 = Lattice::e8_minus();
            let roots: Vec<Vec<BigInt>> = (0..8).map(|i| unit_vector(8, i)).collect();
            let k = r.gen_range(0..6);
            let w = reflection_product(&e8, &roots, k, r);
            let sign = if r.gen_bool(0.5) { q.clone() } else { -q.clone() };
            (e8.gram().clone(), w.scale(&sign))
        } else if choice <= 1 && left >= 2 {
            let u = Lattice::hyperbolic_plane();
            let m = match r.gen_range(0..5) {
                0 => IntMatrix::diagonal(&[b(1), q2.clone()]),
                1 => IntMatrix::diagonal(&[q2.clone(), b(1)]),
                2 => IntMatrix::new(2, 2, vec![b(0), q.clone(), q.clone(), b(0)]).unwrap(),
                3 => IntMatrix::diagonal(&[-b(1), -q2.clone()]),
                _ => IntMatrix::scalar(2, &q),
            };
            (u.gram().clone(), m)
        } else {
            let s = if r.gen_bool(0.5) { 1 } else { -1 };
            let sign = if r.gen_bool(0.5) { q.clone() } else { -q.clone() };
            (IntMatrix::diagonal(&[b(s)]), IntMatrix::diagonal(&[sign]))
        };
        left -= g.rows();
        gram = gram.direct_sum(&g);
        f = f.direct_sum(&block);
    }
    let lattice = Lattice::new(gram).expect("symmetric");
    let g = random_isometry(&lattice, r, 6);
    let g_inv = lattice.isometry_inverse(&g).expect("isometry");
    ScaledInstance {
        frobenius: g.matmul(&f).matmul(&g_inv),
        lattice,
    }
}

/// Product of reflections in random vectors of norm ±1 or ±2, found by
/// sampling `{−1, 0, 1}`-vectors.
pub fn random_isometry(l: &Lattice, r: &mut ChaCha8Rng, max: usize) -> IntMatrix {
    let n = l.rank();
    let mut t = IntMatrix::identity(n);
    let count = r.gen_range(0..=max);
    let mut done = 0;
    let mut tries = 0;
    while done < count && tries < 2000 {
        tries += 1;
        let v: Vec<BigInt> = (0..n).map(|_| b(r.gen_range(-1..=1))).collect();
        let nv = l.norm(&v);
        if [b(1), b(-1), b(2), b(-2)].contains(&nv) {
            t = t.matmul(&general_reflection(l, &v));
            done += 1;
        }
    }
    t
}

/// `x ↦ x − 2⟨x, v⟩/⟨v, v⟩ · v` for `⟨v, v⟩ ∈ {±1, ±2}`.
pub fn general_reflection(l: &Lattice, v: &[BigInt]) -> IntMatrix {
    let n = l.rank();
    let nv = l.norm(v);
    let gv = l.gram().mul_vec(v);
    let mut s = IntMatrix::identity(n);
    let two = b(2);
    for i in 0..n {
        for j in 0..n {
            let num = &two * &v[i] * &gv[j];
            assert_eq!(&num % &nv, b(0));
            s[(i, j)] -= num / &nv;
        }
    }
    s
}

/// Result of comparing the certified Weil test with the numeric oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleOutcome {
    Agree,
    /// Disagreement with a root modulus within the tolerance band; the
    /// exact verdict stands.
    Adjudicated,
    Mismatch,
}

/// Largest relative deviation `||z| − q| / q` over the roots of the
/// squarefree part of `p`.
pub fn weil_deviation(p: &IntPoly, q: i64) -> f64 {
    let s = p.squarefree_part();
    numeric_roots(&poly_f64(&s))
        .into_iter()
        .map(|(re, im)| ((re.hypot(im) - q as f64) / q as f64).abs())
        .fold(0.0, f64::max)
}

/// Compares `is_weil` with the numeric oracle at tolerance `tol`.
pub fn compare_weil(p: &IntPoly, q: i64, tol: f64) -> OracleOutcome {
    let exact = is_weil(p, &b(q));
    let dev = weil_deviation(p, q);
    let numeric = dev < tol;
    if numeric == exact {
        OracleOutcome::Agree
    } else if dev < 10.0 * tol {
        OracleOutcome::Adjudicated
    } else {
        OracleOutcome::Mismatch
    }
}

/// Random monic polynomial of degree `1..=8` with coefficients in
/// `[−10⁴, 10⁴]`: half uniform, half products of Weil and near-Weil
/// quadratic and linear factors, sometimes perturbed by one unit.
pub fn random_weil_candidate(r: &mut ChaCha8Rng, q: i64) -> IntPoly {
    const BOUND: i64 = 10_000;
    loop {
        let deg = r.gen_range(1..=8);
        let p = if r.gen_bool(0.5) {
            let mut c: Vec<i64> = (0..deg).map(|_| r.gen_range(-BOUND..=BOUND)).collect();
            c.push(1);
            IntPoly::from_i64(&c)
        } else {
            let mut p = IntPoly::one();
            while p.deg() < deg {
                let f = if deg - p.deg() == 1 || r.gen_bool(0.2) {
                    IntPoly::from_i64(&[if r.gen_bool(0.5) { q } else { -q }, 1])
                } else {
                    let (beta, c) = match r.gen_range(0..6) {
                        0 => (r.gen_range(2 * q + 1..=3 * q), q * q),
                        1 => (r.gen_range(-2 * q + 1..2 * q), q * q + r.gen_range(1..3)),
                        2 => (2 * q, q * q),
                        _ => (r.gen_range(-2 * q + 1..2 * q), q * q),
                    };
                    IntPoly::from_i64(&[c, -beta, 1])
                };
                p = &p * &f;
            }
            if r.gen_bool(0.3) {
                let mut c = p.coeffs().to_vec();
                let i = r.gen_range(0..c.len() - 1);
                c[i] += b(if r.gen_bool(0.5) { 1 } else { -1 });
                p = IntPoly::new(c);
            }
            p
        };
        if p.coeffs().iter().all(|c| *c <= b(BOUND) && *c >= b(-BOUND)) {
            return p;
        }
    }
}

/// `F = g · diag(u, q·V, q²·w) · g⁻¹` on the K3 lattice, with `u, w` units
/// at `p`, `V ∈ GL₂₀(Z_p)` non-diagonal, and `g` a random isometry.
pub struct SplitInstance {
    pub frobenius: IntMatrix,
    pub g: IntMatrix,
    pub g_inv: IntMatrix,
}

fn unit_at(r: &mut ChaCha8Rng, p: i64) -> i64 {
    loop {
        let x = r.gen_range(-30..=30);
        if x % p != 0 {
            return x;
        }
    }
}

pub fn split_instance(r: &mut ChaCha8Rng, p: u64, a: u32) -> SplitInstance {
    let pi = p as i64;
    let q = b(pi).pow(a);
    let m = 20;
    let mut lower = IntMatrix::identity(m);
    let mut upper = IntMatrix::identity(m);
    for i in 0..m {
        upper[(i, i)] = b(unit_at(r, pi));
        for j in 0..i {
            lower[(i, j)] = b(r.gen_range(-2..=2));
            upper[(j, i)] = b(r.gen_range(-2..=2));
        }
    }
    let v = lower.matmul(&upper).scale(&q);
    let d = IntMatrix::diagonal(&[b(unit_at(r, pi))])
        .direct_sum(&v)
        .direct_sum(&IntMatrix::diagonal(&[&q * &q * b(unit_at(r, pi))]));
    let l = Lattice::k3();
    let g = random_k3_isometry(r, 10);
    let g_inv = l.isometry_inverse(&g).expect("isometry");
    SplitInstance {
        frobenius: g.matmul(&d).matmul(&g_inv),
        g,
        g_inv,
    }
}

/// Rows of `basis`, pulled back by `g⁻¹`, vanish modulo `modulus` outside
/// the coordinate range `block`, and the block part is invertible mod `p`.
pub fn aligned_with_block(
    basis: &IntMatrix,
    g_inv: &IntMatrix,
    block: std::ops::Range<usize>,
    p: u64,
    modulus: &BigInt,
) -> bool {
    let zero = b(0);
    let mut part = Vec::new();
    for i in 0..basis.rows() {
        let w = g_inv.mul_vec(basis.row(i));
        for (j, x) in w.iter().enumerate() {
            if !block.contains(&j) && (x % modulus) != zero {
                return false;
            }
        }
        part.push(w[block.clone()].to_vec());
    }
    if part.is_empty() {
        return block.is_empty();
    }
    let det = IntMatrix::from_rows(part).expect("rows").det().expect("square");
    &det % b(p as i64) != zero
}

/// All `x` with `|x_i| ≤ radii[i]` and `xᵀ G x = target`, by exhaustive
/// iteration over the box.
pub fn box_vectors(gram: &IntMatrix, radii: &[i64], target: i64) -> Vec<Vec<i64>> {
    let n = radii.len();
    let g: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| to_i64(&gram[(i, j)])).collect())
        .collect();
    let mut x: Vec<i64> = radii.iter().map(|r| -r).collect();
    let mut out = Vec::new();
    loop {
        let mut norm = 0;
        for i in 0..n {
            if x[i] != 0 {
                let row: i64 = (0..n).map(|j| g[i][j] * x[j]).sum();
                norm += x[i] * row;
            }
        }
        if norm == target {
            out.push(x.clone());
        }
        let mut k = 0;
        loop {
            if k == n {
                return out;
            }
            if x[k] < radii[k] {
                x[k] += 1;
                break;
            }
            x[k] = -radii[k];
            k += 1;
        }
    }
}

/// Box radii `⌊sqrt(k · (P⁻¹)_ii)⌋` containing every `x` with `xᵀ P x ≤ k`
/// for positive definite `P`.
pub fn ellipsoid_radii(p: &IntMatrix, k: i64) -> Vec<i64> {
    let inv = to_dmatrix(p).try_inverse().expect("invertible");
    (0..p.rows())
        .map(|i| ((k as f64 * inv[(i, i)]).sqrt() + 1e-6).floor() as i64)
        .collect()
}

/// Coefficients of the highest root of E8 in the Bourbaki numbering; every
/// root has coefficients bounded by these in absolute value.
pub const E8_HIGHEST_ROOT: [i64; 8] = [2, 3, 4, 6, 5, 4, 3, 2];

fn binom_i128(n: i128, k: i128) -> i128 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// `P(t) = tⁿ R(t + q²/t)` for `R = xⁿ + c[0]xⁿ⁻¹ + … + c[n−1]`, ascending.
fn p_from_r(c: &[i128], q: i128) -> Vec<i128> {
    let n = c.len();
    let mut p = vec![0i128; 2 * n + 1];
    for k in 0..=n {
        let coef = if k == n { 1 } else { c[n - 1 - k] };
        if coef == 0 {
            continue;
        }
        for j in 0..=k {
            p[n + k - 2 * j] += coef * binom_i128(k as i128, j as i128) * q.pow(2 * j as u32);
        }
    }
    p
}

fn v_p(mut x: i128, p: i128) -> Option<i64> {
    if x == 0 {
        return None;
    }
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    Some(v)
}

/// `v(P_{d−j}) ≥ a(j − 1)`, and a unit at `j = 1`.
fn newton_prefix_ok(p_coeffs: &[i128], j: usize, p: i128, a: i64) -> bool {
    let d = p_coeffs.len() - 1;
    let v = v_p(p_coeffs[d - j], p);
    if j == 1 {
        v == Some(0)
    } else {
        v.map_or(true, |v| v >= a * (j as i64 - 1))
    }
}

#[derive(Default)]
pub struct Brute {
    /// Surviving `R` coefficient vectors `[c_{n−1}, …, c_0]`.
    pub found: Vec<Vec<i128>>,
    pub adjudicated: usize,
}

/// Roots of `R` real and inside `[−2q, 2q]`, numerically; ambiguous cases
/// are settled by the exact test on `P`.
fn real_in_interval(c: &[i128], q: i128, adjudicated: &mut usize) -> bool {
    let mut asc: Vec<f64> = c.iter().rev().map(|&x| x as f64).collect();
    asc.push(1.0);
    let roots = numeric_roots(&asc);
    let lim = 2.0 * q as f64;
    let worst = roots
        .iter()
        .map(|&(re, im)| im.abs().max((re.abs() - lim).max(0.0)))
        .fold(0.0, f64::max);
    if worst < 1e-7 {
        true
    } else if worst > 1e-2 {
        false
    } else {
        *adjudicated += 1;
        let p: Vec<BigInt> = p_from_r(c, q).into_iter().map(BigInt::from).collect();
        is_weil(&IntPoly::new(p), &b(q as i64))
    }
}

/// Every `R` in the coefficient box `|c_{n−k}| ≤ C(n, k)(2q)^k` whose
/// `P` is ordinary and Weil, by direct enumeration with Newton filtering.
pub fn brute_force_ordinary_weil(n: usize, p: i128, a: u32) -> Brute {
    let q = p.pow(a);
    let mut out = Brute::default();
    let mut c = vec![0i128; n];
    fn go(k: usize, n: usize, c: &mut Vec<i128>, p: i128, a: u32, q: i128, out: &mut Brute) {
        if k == n {
            let pc = p_from_r(c, q);
            if !real_in_interval(c, q, &mut out.adjudicated) {
                return;
            }
            let vals: Vec<Option<i64>> = pc.iter().map(|&x| v_p(x, p)).collect();
            let a = a as i64;
            let d = 2 * n;
            let mut want = BTreeMap::new();
            for (s, m) in [(0, 1usize), (a, d - 2), (2 * a, 1)] {
                if m > 0 {
                    *want.entry(BigRational::from_integer(b(s))).or_insert(0) += m;
                }
            }
            if hull_valuations(&vals) == want {
                out.found.push(c.clone());
            }
            return;
        }
        let bound = binom_i128(n as i128, k as i128 + 1) * (2 * q).pow(k as u32 + 1);
        for x in -bound..=bound {
            c[k] = x;
            for y in c.iter_mut().skip(k + 1) {
                *y = 0;
            }
            if newton_prefix_ok(&p_from_r(c, q), k + 1, p, a as i64) {
                go(k + 1, n, c, p, a, q, out);
            }
        }
        c[k] = 0;
    }
    go(0, n, &mut c, p, a, q, &mut out);
    out
}
