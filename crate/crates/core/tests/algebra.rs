mod common;

use common::b;
use k3frob_core::algebra::{charpoly, hnf, integer_kernel, snf, sturm_count, IntMatrix, IntPoly};
use k3frob_core::{BigInt, BigRational};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn leibniz_det(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    let mut total = BigInt::zero();
    let mut perm: Vec<usize> = (0..n).collect();
    permutations(&mut perm, 0, &mut |p| {
        let mut inversions = 0;
        for i in 0..n {
            for j in i + 1..n {
                if p[i] > p[j] {
                    inversions += 1;
                }
            }
        }
        let mut term = BigInt::one();
        for (i, &j) in p.iter().enumerate() {
            term *= &m[i][j];
        }
        if inversions % 2 == 1 {
            term = -term;
        }
        total += term;
    });
    total
}

fn permutations(p: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, f);
        p.swap(k, i);
    }
}

fn matrix(n: usize, m: usize, range: i64) -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec(-range..=range, n * m)
        .prop_map(move |v| IntMatrix::new(n, m, v.into_iter().map(b).collect()).unwrap())
}

fn square(max: usize) -> impl Strategy<Value = IntMatrix> {
    (1..=max).prop_flat_map(|n| matrix(n, n, 9))
}

fn rect(max: usize) -> impl Strategy<Value = IntMatrix> {
    (1..=max, 1..=max).prop_flat_map(|(n, m)| matrix(n, m, 6))
}

/// Random unimodular matrix from elementary row operations.
fn unimodular(n: usize, ops: &[(usize, usize, i64)]) -> IntMatrix {
    let mut u = IntMatrix::identity(n);
    for &(i, j, c) in ops {
        let (i, j) = (i % n, j % n);
        if i == j {
            u.negate_row(i);
        } else {
            u.add_row_multiple(i, j, &b(c));
        }
    }
    u
}

/// gcd of all `k × k` minors of a `k × n` matrix.
fn minor_gcd(m: &IntMatrix) -> BigInt {
    let k = m.rows();
    let n = m.cols();
    let mut g = BigInt::zero();
    let mut cols: Vec<usize> = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cols: &mut Vec<usize>, m: &IntMatrix, g: &mut BigInt) {
        if cols.len() == k {
            let sub: Vec<Vec<BigInt>> = (0..k)
                .map(|i| cols.iter().map(|&j| m[(i, j)].clone()).collect())
                .collect();
            *g = g.gcd(&leibniz_det(&sub));
            return;
        }
        for c in start..n {
            cols.push(c);
            rec(c + 1, n, k, cols, m, g);
            cols.pop();
        }
    }
    rec(0, n, k, &mut cols, m, &mut g);
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn charpoly_matches_determinant_expansion(a in square(5)) {
        let n = a.rows();
        let chi = charpoly(&a).unwrap();
        prop_assert_eq!(chi.deg(), n);
        prop_assert_eq!(chi.coeff(n - 1), -a.trace());
        let sign = if n % 2 == 0 { b(1) } else { b(-1) };
        prop_assert_eq!(chi.coeff(0), sign * leibniz_det(&a.to_rows()));
        for t in -3..=(n as i64) {
            let shifted: Vec<Vec<BigInt>> = (0..n)
                .map(|i| (0..n).map(|j| if i == j { b(t) - &a[(i, j)] } else { -a[(i, j)].clone() }).collect())
                .collect();
            prop_assert_eq!(chi.eval(&b(t)), leibniz_det(&shifted));
        }
    }

    #[test]
    fn det_matches_leibniz(a in square(6)) {
        prop_assert_eq!(a.det().unwrap(), leibniz_det(&a.to_rows()));
    }

    #[test]
    fn hermite_form_is_canonical(a in rect(5)) {
        let h = hnf(&a);
        prop_assert_eq!(&h.u.matmul(&a), &h.h);
        prop_assert!(leibniz_det(&h.u.to_rows()).abs().is_one());
        prop_assert_eq!(&hnf(&h.h).h, &h.h);
        let mut last = None;
        for &(r, c) in &h.pivots {
            prop_assert!(h.h[(r, c)].is_positive());
            prop_assert!(last.map_or(true, |l| c > l));
            last = Some(c);
            for rr in 0..r {
                prop_assert!(!h.h[(rr, c)].is_negative() && h.h[(rr, c)] < h.h[(r, c)]);
            }
            for rr in r + 1..h.h.rows() {
                prop_assert!(h.h[(rr, c)].is_zero());
            }
        }
        prop_assert_eq!(h.rank(), a.rank());
    }

    #[test]
    fn smith_form_chain_and_invariance(
        a in rect(4),
        left in prop::collection::vec((0usize..4, 0usize..4, -3i64..=3), 0..8),
        right in prop::collection::vec((0usize..4, 0usize..4, -3i64..=3), 0..8),
    ) {
        let d = snf(&a);
        for w in d.windows(2) {
            prop_assert!(w[0].is_zero() && w[1].is_zero() || (!w[0].is_zero() && (&w[1] % &w[0]).is_zero()));
        }
        prop_assert!(d.iter().all(|x| !x.is_negative()));
        let l = unimodular(a.rows(), &left);
        let r = unimodular(a.cols(), &right);
        prop_assert_eq!(snf(&l.matmul(&a).matmul(&r)), d.clone());
        // product of the invariant factors of a square matrix is |det|
        if a.is_square() {
            let prod = d.iter().fold(BigInt::one(), |acc, x| acc * x);
            prop_assert_eq!(prod, a.det().unwrap().abs());
        }
    }

    #[test]
    fn kernel_annihilated_and_saturated(a in rect(5)) {
        let k = integer_kernel(&a);
        prop_assert_eq!(k.rows(), a.cols() - a.rank());
        for i in 0..k.rows() {
            prop_assert!(a.mul_vec(k.row(i)).iter().all(Zero::is_zero));
        }
        if k.rows() > 0 {
            prop_assert!(minor_gcd(&k).is_one());
        }
    }

    #[test]
    fn sturm_counts_are_additive(
        roots in prop::collection::btree_set(-20i64..=20, 1..6),
        c in 1i64..30,
        cuts in prop::collection::btree_set(-25i64..=25, 1..5),
    ) {
        let mut p = IntPoly::from_i64(&[c, 0, 1]);
        for &r in &roots {
            p = &p * &IntPoly::from_i64(&[-r, 1]);
        }
        let mut pts: Vec<BigRational> = vec![BigRational::from_integer(b(-30))];
        pts.extend(cuts.iter().map(|&x| BigRational::new(b(2 * x + 1), b(2))));
        pts.push(BigRational::from_integer(b(30)));
        let total = sturm_count(&p, &pts[0], &pts[pts.len() - 1]).unwrap();
        prop_assert_eq!(total, roots.len());
        let mut sum = 0;
        for w in pts.windows(2) {
            let n = sturm_count(&p, &w[0], &w[1]).unwrap();
            let expect = roots
                .iter()
                .filter(|&&r| w[0] < BigRational::from_integer(b(r)) && BigRational::from_integer(b(r)) <= w[1])
                .count();
            prop_assert_eq!(n, expect);
            sum += n;
        }
        prop_assert_eq!(sum, total);
    }
}

#[test]
fn sturm_interval_is_half_open() {
    let p = IntPoly::from_i64(&[-1, 0, 1]);
    let r = |x: i64| BigRational::from_integer(b(x));
    assert_eq!(sturm_count(&p, &r(-1), &r(1)).unwrap(), 1);
    assert_eq!(sturm_count(&p, &r(-2), &r(1)).unwrap(), 2);
    assert_eq!(sturm_count(&p, &r(-2), &r(-1)).unwrap(), 1);
}
