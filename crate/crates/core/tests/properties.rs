mod support;

use std::collections::BTreeMap;

use bispectral_core::config::{lattice_points, Config, Params};
use bispectral_core::continuation::c_ratio;
use bispectral_core::numeric::ComplexParams;
use bispectral_core::operator::{build_d, DiffOp};
use bispectral_core::quasi_invariance::condition_residual;
use bispectral_core::series::{height, solve_recurrence};
use bispectral_core::{IVec, Monomial, QuasiPoly, Rat, XExpPoly, ZPoly, ZRatFunc};
use num_complex::Complex64 as C;
use proptest::prelude::*;

use support::oracle;

fn cfg(l: usize, k: i64, p: u32, r: u32) -> Config {
    Config::build(Params::new(l, Rat::from_int(k), p, r)).unwrap()
}

fn arb_params(max_l: usize) -> impl Strategy<Value = (usize, i64, u32, u32)> {
    (1..=max_l, prop::sample::select(vec![1i64, 3, 5]), 0u32..=2, 0u32..=2)
}

fn small_poly(nv: usize) -> impl Strategy<Value = ZPoly> {
    prop::collection::vec((prop::collection::vec(0u32..=2, nv), -4i64..=4), 1..4).prop_map(move |terms| {
        ZPoly::from_terms(nv, terms.into_iter().map(|(e, c)| (Monomial::from_exps(&e), Rat::from_int(c))))
    })
}

fn small_quasi(nv: usize) -> impl Strategy<Value = QuasiPoly> {
    prop::collection::vec((prop::collection::vec(-2i32..=2, nv), small_poly(nv)), 1..3)
        .prop_map(move |parts| QuasiPoly::from_parts(nv, parts.into_iter().map(|(e, p)| (IVec::from_slice(&e), p))))
}

/// A one-shift operator with a constant or inverse-affine coefficient.
fn small_op(c: &Config, shift: (i32, i32), coeff: (i64, i64, i64), inverse: bool) -> DiffOp {
    let nv = c.nvars();
    let (a, b, k) = coeff;
    let lin = &(&ZPoly::var(nv, 0).scale(&Rat::from_int(a)) + &ZPoly::var(nv, 1).scale(&Rat::from_int(b)))
        + &ZPoly::constant(nv, Rat::from_int(k));
    let coeff = match ZRatFunc::inverse_affine(&lin) {
        Some(inv) if inverse => inv,
        _ => ZRatFunc::from_poly(lin),
    };
    DiffOp::monomial(c, IVec::from_slice(&[2 * shift.0, 2 * shift.1]), coeff)
}

/// The recurrence solved level by level, visiting each height level in a
/// permuted order, straight from its defining relation.
fn recurrence_permuted(c: &Config, max_height: u32, salt: u64) -> BTreeMap<IVec, ZRatFunc> {
    let nv = c.nvars();
    let rho = c.rho();
    let mut order = lattice_points(nv, max_height);
    let key = |nu: &IVec| {
        let mut h = salt ^ 0x9e37_79b9_7f4a_7c15;
        for i in 0..nv {
            h = (h ^ nu.get(i) as u64).wrapping_mul(0x0100_0000_01b3);
        }
        (height(nv, nu), h)
    };
    order.sort_by_key(key);
    let mut q: BTreeMap<IVec, ZRatFunc> = BTreeMap::new();
    for nu in order {
        if nu.is_zero() {
            q.insert(nu, ZRatFunc::constant(nv, Rat::ONE));
            continue;
        }
        let mut sum = ZRatFunc::zero(nv);
        for root in c.positive_roots() {
            for j in 1.. {
                let lower = nu - root.vec.scale(2 * j);
                if !c.in_l_plus(&lower) {
                    break;
                }
                let form = &c.pairing_poly(&root.vec) + &ZPoly::constant(nv, c.k_inner(&root.vec, &(lower - rho)));
                sum = sum.add(&q[&lower].mul_poly(&form.scale(&Rat::from(4 * root.mult))));
            }
        }
        let diag = &c.pairing_poly(&nu).scale(&Rat::from_int(2)) + &ZPoly::constant(nv, c.k_inner(&nu, &nu));
        q.insert(nu, sum.neg().mul(&ZRatFunc::inverse_affine(&diag).unwrap()));
    }
    q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn doubled_roots_and_shift_sets((l, k, p, r) in arb_params(3)) {
        let c = cfg(l, k, p, r);
        for root in c.positive_roots() {
            prop_assert!(c.in_l_plus(&root.vec.scale(2)));
            if root.is_reduced() {
                prop_assert_eq!(root.a_set.len() as u32, root.mult + root.double_mult);
            }
        }
        let literal: u32 = c.positive_roots().iter().map(|a| a.mult).sum();
        prop_assert_eq!(literal, c.big_m());
    }

    #[test]
    fn weight_factorizations((l, k, p, r) in arb_params(2)) {
        prop_assume!(l == 1 || (k <= 3 && p + r <= 1));
        let c = cfg(l, k, p, r);
        let s = c.symbols().unwrap();
        prop_assert_eq!(s.q.degree(), Some(2 * c.big_m()));
        prop_assert_eq!(&s.g * &s.delta, s.c.clone());
        let mut cosh = XExpPoly::one(c.nvars());
        for a in c.reduced_roots() {
            cosh = &cosh * &XExpPoly::cosh2(c.nvars(), a.vec).pow(a.mult);
        }
        prop_assert_eq!(s.g.clone(), cosh.scale(&s.g_cosh_constant));
    }

    #[test]
    fn composition_is_associative(
        shifts in prop::collection::vec((-1i32..=1, -1i32..=1), 3),
        coeffs in prop::collection::vec((-2i64..=2, -2i64..=2, -3i64..=3), 3),
        inverse in prop::collection::vec(any::<bool>(), 3),
    ) {
        let c = cfg(1, 3, 0, 0);
        let ops: Vec<DiffOp> = (0..3).map(|i| small_op(&c, shifts[i], coeffs[i], inverse[i])).collect();
        let left = ops[0].compose(&ops[1]).compose(&ops[2]);
        let right = ops[0].compose(&ops[1].compose(&ops[2]));
        prop_assert!(left.equals(&right));
    }

    #[test]
    fn condition_residual_is_odd_in_s(f in small_quasi(2), s in 1i32..=3, which in 0usize..4) {
        let c = cfg(1, 3, 1, 0);
        let roots: Vec<_> = c.reduced_roots().collect();
        let alpha = roots[which % roots.len()].vec;
        let a = condition_residual(&c, &f, &alpha, s);
        let b = condition_residual(&c, &f, &alpha, -s);
        prop_assert!(a.add(&b).is_zero());
    }

    #[test]
    fn recurrence_is_independent_of_order_within_a_level(salt in any::<u64>(), which in 0usize..3) {
        let (c, h) = [(cfg(1, 1, 1, 0), 4), (cfg(1, 3, 0, 1), 3), (cfg(2, 1, 0, 0), 2)][which].clone();
        let solved = solve_recurrence(&c, h).unwrap();
        let permuted = recurrence_permuted(&c, h, salt);
        prop_assert_eq!(solved.coeffs.len(), permuted.len());
        for (nu, q) in &solved.coeffs {
            prop_assert!(q.equals(&permuted[nu]), "differs at {:?}", nu.to_vec(c.nvars()));
        }
    }

    #[test]
    fn c_ratio_matches_lgamma_oracle(
        zs in prop::collection::vec((-4.0f64..4.0, -4.0f64..4.0), 3),
        which in 0usize..3,
    ) {
        let cps = [
            ComplexParams::new(1, C::new(1.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0)).unwrap(),
            ComplexParams::new(1, C::new(1.5, 0.2), C::new(0.7, 0.0), C::new(0.3, 0.0)).unwrap(),
            ComplexParams::new(2, C::new(2.3, 0.0), C::new(0.4, 0.0), C::new(0.1, 0.0)).unwrap(),
        ];
        let cp = &cps[which];
        let z: Vec<C> = zs[..cp.nvars()].iter().map(|&(a, b)| C::new(a, b)).collect();
        for (i, s) in cp.shift_list() {
            let Ok(closed) = c_ratio(cp, &z, i, s) else { continue };
            let shifted = cp.shifted(&z, &IVec::unit(i, 2 * s as i32));
            let expected = oracle::c_ratio(cp, &z, &shifted);
            prop_assert!((closed - expected).norm() <= 1e-10 * expected.norm().max(1.0), "{} vs {}", closed, expected);
        }
    }
}

#[test]
fn diagonal_forms_are_nonconstant() {
    for c in [cfg(1, 1, 0, 0), cfg(1, 3, 2, 1), cfg(2, 3, 1, 0), cfg(3, 1, 0, 0)] {
        for nu in c.lattice_points(6).into_iter().filter(|nu| !nu.is_zero()) {
            let diag = &c.pairing_poly(&nu).scale(&Rat::from_int(2)) + &ZPoly::constant(c.nvars(), c.k_inner(&nu, &nu));
            assert_eq!(diag.degree(), Some(1));
            assert!(c.k_inner(&nu, &nu).is_positive());
        }
    }
}

#[test]
fn d_preserves_the_sample_ring_for_rational_k() {
    let c = Config::build(Params::new(1, Rat::new(1, 3), 0, 1)).unwrap();
    let d = build_d(&c);
    let q = c.symbols().unwrap().q;
    for (_, f) in bispectral_core::quasi_invariance::qi_samples(&c, &q) {
        let g = d.apply(&f).unwrap();
        assert!(bispectral_core::quasi_invariance::is_quasi_invariant(&c, &g).ok);
    }
}
