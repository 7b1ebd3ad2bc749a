use ffcubes_core::dualform::{dual_eval, dual_eval_chain, dual_eval_expand};
use ffcubes_core::expsums::{
    linear_full_sum, linear_full_sum_brute, psi_frac, s_r_c, s_r_c_brute, CentralSums, DiagonalForm,
};
use ffcubes_core::fields::FieldCtx;
use ffcubes_core::poly::{Poly, PolyRing};
use proptest::prelude::*;

fn ring(q: u32) -> PolyRing {
    PolyRing::new(FieldCtx::with_q(q).unwrap())
}

/// A polynomial with fewer than `len` coefficients, from a canonical index.
fn poly(r: &PolyRing, idx: u64, len: usize) -> Poly {
    let size = (r.q() as u64).pow(len as u32);
    r.from_index(idx % size, len)
}

/// A monic polynomial of degree `deg`.
fn monic(r: &PolyRing, idx: u64, deg: usize) -> Poly {
    let tail = poly(r, idx, deg);
    r.add(&tail, &Poly::monomial(r.field().element(1).unwrap(), deg))
}

fn nonzero(r: &PolyRing, idx: u64, len: usize) -> Poly {
    let p = poly(r, idx, len);
    if p.is_zero() {
        Poly::one()
    } else {
        p
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn division_and_bezout(q in prop::sample::select(vec![2u32, 4, 5, 7]), a in any::<u64>(), b in any::<u64>()) {
        let r = ring(q);
        let (a, b) = (poly(&r, a, 6), nonzero(&r, b, 4));
        let (quo, rem) = r.div_rem(&a, &b).unwrap();
        prop_assert_eq!(r.add(&r.mul(&quo, &b), &rem), a.clone());
        prop_assert!(rem.deg().is_none_or(|d| d < b.deg().unwrap()));
        let (g, s, t) = r.xgcd(&a, &b);
        prop_assert_eq!(r.add(&r.mul(&s, &a), &r.mul(&t, &b)), g.clone());
        prop_assert!(r.divides(&g, &a) && r.divides(&g, &b));
    }

    #[test]
    fn factorization_round_trip(q in prop::sample::select(vec![2u32, 5]), a in any::<u64>()) {
        let r = ring(q);
        let a = nonzero(&r, a, 7);
        let f = r.factor(&a).unwrap();
        prop_assert_eq!(r.expand(&f), a);
    }

    #[test]
    fn psi_is_additive(q in prop::sample::select(vec![2u32, 4, 5]), a in any::<u64>(), b in any::<u64>(), m in any::<u64>(), d in 1usize..4) {
        let r = ring(q);
        let m = monic(&r, m, d);
        let (a, b) = (poly(&r, a, 5), poly(&r, b, 5));
        let p = r.p();
        let lhs = psi_frac(&r, &r.add(&a, &b), &m).unwrap();
        let rhs = (psi_frac(&r, &a, &m).unwrap() + psi_frac(&r, &b, &m).unwrap()) % p;
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn linear_sum_matches_brute(q in prop::sample::select(vec![2u32, 5]), a in any::<u64>(), m in any::<u64>(), d in 0usize..3) {
        let r = ring(q);
        let m = monic(&r, m, d);
        let a = poly(&r, a, 4);
        prop_assert_eq!(linear_full_sum(&r, &a, &m).unwrap(), linear_full_sum_brute(&r, &a, &m).unwrap());
    }

    #[test]
    fn central_sum_matches_brute(seed in any::<u64>(), m in any::<u64>(), d in 0usize..4, cs in prop::array::uniform4(any::<u64>())) {
        let r = ring(2);
        let f = DiagonalForm::new(r.clone(), vec![Poly::one(), Poly::t(), Poly::one(), nonzero(&r, seed, 2)]).unwrap();
        let m = monic(&r, m, d);
        let c: Vec<Poly> = cs.iter().map(|&i| poly(&r, i, 3)).collect();
        let brute = s_r_c_brute(&f, &m, &c).unwrap();
        prop_assert_eq!(s_r_c(&f, &m, &c).unwrap(), brute.clone());
        let mut table = CentralSums::new(&f, &m).unwrap();
        prop_assert_eq!(table.eval(&c).unwrap(), brute);
    }

    #[test]
    fn central_sum_scaling_invariance(m in any::<u64>(), d in 1usize..3, cs in prop::array::uniform2(any::<u64>()), l in 1u64..5) {
        let r = ring(5);
        let f = DiagonalForm::parse(r.clone(), "1,2").unwrap();
        let m = monic(&r, m, d);
        let c: Vec<Poly> = cs.iter().map(|&i| poly(&r, i, 2)).collect();
        let lam = r.field().element(l as usize).unwrap();
        let scaled: Vec<Poly> = c.iter().map(|x| r.scale(lam, x)).collect();
        prop_assert_eq!(s_r_c_brute(&f, &m, &scaled).unwrap(), s_r_c_brute(&f, &m, &c).unwrap());
    }

    #[test]
    fn dual_form_evaluations_agree(q in prop::sample::select(vec![5u32, 7]), fs in prop::array::uniform4(any::<u64>()), cs in prop::array::uniform4(any::<u64>())) {
        let r = ring(q);
        let coeffs: Vec<Poly> = fs.iter().map(|&i| nonzero(&r, i, 2)).collect();
        let f = DiagonalForm::new(r.clone(), coeffs).unwrap();
        let c: Vec<Poly> = cs.iter().map(|&i| poly(&r, i, 2)).collect();
        let v = dual_eval(&f, &c).unwrap().value;
        prop_assert_eq!(dual_eval_chain(&f, &c).unwrap().value, v.clone());
        let e = dual_eval_expand(&f, &c).unwrap();
        prop_assert!(e == v || e == r.neg(&v));
    }

    #[test]
    fn dual_form_permutation_invariance(fs in prop::array::uniform4(any::<u64>()), cs in prop::array::uniform4(any::<u64>()), k in 0usize..24) {
        let r = ring(5);
        let coeffs: Vec<Poly> = fs.iter().map(|&i| nonzero(&r, i, 2)).collect();
        let f = DiagonalForm::new(r.clone(), coeffs).unwrap();
        let c: Vec<Poly> = cs.iter().map(|&i| poly(&r, i, 2)).collect();
        // the k-th permutation of 0..4 in factorial base
        let mut pool: Vec<usize> = (0..4).collect();
        let mut perm = Vec::new();
        let mut k = k;
        for base in (1..=4).rev() {
            let f = (1..base).product::<usize>();
            perm.push(pool.remove(k / f));
            k %= f;
        }
        let pc: Vec<Poly> = perm.iter().map(|&i| c[i].clone()).collect();
        prop_assert_eq!(dual_eval(&f.permuted(&perm), &pc).unwrap().value, dual_eval(&f, &c).unwrap().value);
    }
}
