mod common;

use std::collections::BTreeMap;

use common::{aligned_with_block, b, hull_valuations, random_scaled_instance, rng, split_instance, val};
use k3frob_core::algebra::{IntMatrix, IntPoly};
use k3frob_core::padic::{
    hyperbolic_complement, integral_splitting, integral_splitting_at, newton_polygon, verify_certificate, PadicError,
    PadicPrecision, SplitOptions,
};
use k3frob_core::{BigInt, BigRational, FrobeniusData, Lattice, WeilParams};
use num_integer::Integer;
use num_traits::Zero;
use proptest::prelude::*;
use rand::Rng;

fn fd(l: Lattice, f: IntMatrix, p: u64, a: u32) -> FrobeniusData {
    FrobeniusData::new(l, f, WeilParams::new(p, a).unwrap()).unwrap()
}

fn segments(poly: &IntPoly, p: u64) -> BTreeMap<BigRational, usize> {
    newton_polygon(poly, p)
        .unwrap()
        .segments()
        .iter()
        .map(|(v, l)| (BigRational::new(b(*v.numer()), b(*v.denom())), *l))
        .collect()
}

#[test]
fn newton_polygon_matches_hull_oracle() {
    let mut r = rng(17);
    for _ in 0..1000 {
        let p = [2u64, 3, 5, 7][r.gen_range(0..4)];
        let deg = r.gen_range(1..=22);
        let mut coeffs = Vec::with_capacity(deg + 1);
        for i in 0..=deg {
            if i != 0 && i != deg && r.gen_bool(0.2) {
                coeffs.push(BigInt::zero());
                continue;
            }
            let mut u: i64 = r.gen_range(1..1000);
            while u % p as i64 == 0 {
                u += 1;
            }
            let s = if r.gen_bool(0.5) { 1 } else { -1 };
            coeffs.push(b(s * u) * b(p as i64).pow(r.gen_range(0..=30u32)));
        }
        let poly = IntPoly::new(coeffs);
        let vals: Vec<Option<i64>> = poly
            .coeffs()
            .iter()
            .map(|c| (!c.is_zero()).then(|| val(c, p) as i64))
            .collect();
        assert_eq!(segments(&poly, p), hull_valuations(&vals), "{poly} at p = {p}");
    }
}

#[test]
fn newton_examples() {
    let m = segments(&IntPoly::from_i64(&[25, -1, 1]), 5);
    assert_eq!(
        m,
        BTreeMap::from([
            (BigRational::from_integer(b(0)), 1),
            (BigRational::from_integer(b(2)), 1)
        ])
    );
    let chi = k3frob_core::algebra::charpoly(&IntMatrix::scalar(22, &b(9))).unwrap();
    assert_eq!(
        segments(&chi, 3),
        BTreeMap::from([(BigRational::from_integer(b(2)), 22)])
    );
}

#[test]
fn total_valuation_is_a_times_rank() {
    let mut r = rng(8);
    for i in 0..60 {
        let n = 2 + i % 15;
        let (p, a) = [(2u64, 1u32), (3, 1), (2, 2), (5, 1), (3, 2)][r.gen_range(0..5)];
        let inst = random_scaled_instance(n, (p as i64).pow(a), &mut r);
        let data = fd(inst.lattice, inst.frobenius, p, a);
        let np = newton_polygon(&data.charpoly(), p).unwrap();
        assert_eq!(
            np.total_valuation(),
            num_rational::Rational64::from_integer((a as usize * n) as i64)
        );
        assert_eq!(np.degree(), n);
    }
}

#[test]
fn splitting_block_instances() {
    let mut r = rng(7);
    for i in 0..12 {
        let (p, a) = [(2u64, 1u32), (3, 1), (5, 1), (7, 1), (2, 2), (3, 2)][i % 6];
        let inst = split_instance(&mut r, p, a);
        let data = fd(Lattice::k3(), inst.frobenius.clone(), p, a);
        let cert = integral_splitting(&data, (1, 20, 1), SplitOptions::default()).unwrap();
        assert_eq!(cert.ranks(), (1, 20, 1));
        verify_certificate(&data, &cert).unwrap();
        let m = b(p as i64).pow(cert.certified_precision);
        for (s, block) in [0..1, 1..21, 21..22].into_iter().enumerate() {
            assert!(
                aligned_with_block(&cert.bases[s], &inst.g_inv, block, p, &m),
                "instance {i}, level {s}"
            );
        }
        // stability under doubling the working precision
        let finer =
            integral_splitting_at(&data, (1, 20, 1), PadicPrecision::new(p, 2 * cert.working_precision)).unwrap();
        for s in 0..3 {
            assert_eq!(finer.bases[s].reduce_mod(&m), cert.bases[s]);
        }
        // the unconjugated block matrix splits with the same ranks
        let d = inst.g_inv.matmul(&inst.frobenius).matmul(&inst.g);
        let plain = integral_splitting(&fd(Lattice::k3(), d, p, a), (1, 20, 1), SplitOptions::default()).unwrap();
        assert_eq!(plain.ranks(), cert.ranks());
    }
}

#[test]
fn jordan_blocks_are_rejected() {
    let mut r = rng(9);
    for (p, a) in [(2u64, 1u32), (3, 1), (5, 1), (7, 1), (2, 2), (3, 2), (11, 1)] {
        let q = b(p as i64).pow(a);
        let j = IntMatrix::new(2, 2, vec![q.clone(), b(1), b(0), q.clone()]).unwrap();
        let data = fd(Lattice::hyperbolic_plane(), j, p, a);
        match integral_splitting(&data, (0, 2, 0), SplitOptions::default()) {
            Err(PadicError::NotSplittable(w)) => assert_eq!((w.level, w.entry), (0, b(1))),
            other => panic!("q = {q}: {other:?}"),
        }
        // a Jordan block inside the slope-a part of a K3 instance, conjugated
        let mut f = IntMatrix::scalar(22, &q);
        f[(0, 0)] = b(1);
        f[(1, 2)] = b(1);
        f[(21, 21)] = &q * &q;
        let g = common::random_k3_isometry(&mut r, 8);
        let g_inv = Lattice::k3().isometry_inverse(&g).unwrap();
        let data = fd(Lattice::k3(), g.matmul(&f).matmul(&g_inv), p, a);
        assert!(matches!(
            integral_splitting(&data, (1, 20, 1), SplitOptions::default()),
            Err(PadicError::NotSplittable(_))
        ));
    }
}

#[test]
fn wrong_shape_is_not_ordinary() {
    let data = fd(Lattice::k3(), IntMatrix::scalar(22, &b(3)), 3, 1);
    assert!(matches!(
        integral_splitting(&data, (1, 20, 1), SplitOptions::default()),
        Err(PadicError::NotOrdinary { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn hyperbolic_complement_congruences(
        pi in 0usize..5,
        d in 1i64..40,
        c in -20i64..20,
        ops in prop::collection::vec((0usize..2, -4i64..=4), 0..6),
        n in 3u32..12,
    ) {
        let p = [2u64, 3, 5, 7, 13][pi];
        prop_assume!(d % p as i64 != 0);
        // H = [[0, d], [d, 2c]] is even, unimodular at p and isotropic on e₁
        let h = IntMatrix::from_i64(&[&[0, d], &[d, 2 * c]]);
        let mut m = IntMatrix::identity(2);
        for (i, k) in ops {
            m.add_row_multiple(i, 1 - i, &b(k));
        }
        let gram = m.transpose().matmul(&h).matmul(&m);
        // l = M⁻¹ e₁ via the adjugate (det M = 1)
        let l = vec![m[(1, 1)].clone(), -m[(1, 0)].clone()];
        prop_assert!(gram.bilinear(&l, &l).is_zero());
        let prec = PadicPrecision::new(p, n);
        let modulus = prec.modulus();
        let v = hyperbolic_complement(&gram, &l, prec).unwrap();
        prop_assert!(gram.bilinear(&v, &v).mod_floor(&modulus).is_zero());
        prop_assert_eq!((gram.bilinear(&l, &v) - b(1)).mod_floor(&modulus), b(0));
        // uniqueness up to unit rescaling of the line
        let u = b(p as i64 + 1);
        let ul: Vec<BigInt> = l.iter().map(|x| x * &u).collect();
        let w = hyperbolic_complement(&gram, &ul, prec).unwrap();
        let coarse = b(p as i64).pow(n - 1);
        for i in 0..2 {
            prop_assert!((&w[i] * &u - &v[i]).mod_floor(&coarse).is_zero());
        }
    }
}
