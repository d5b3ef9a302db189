use std::collections::BTreeSet;

use num_bigint::BigUint;
use proptest::prelude::*;

use prenorm_core::arith;
use prenorm_core::field_tower::{Element, FieldContext};
use prenorm_core::fq_poly::{self, FqPoly};
use prenorm_core::guarantees;
use prenorm_core::norm_system::{self, Admissibility, DivisorTuple, PrescriptionSystem};
use prenorm_core::normality::{self, NormalityTester};
use prenorm_core::oracle;

/// `(q, n)` with `q^n <= 2^12`, a mix of prime and non-prime base fields.
const SMALL: &[(u64, u32)] = &[
    (2, 1), (2, 4), (2, 6), (2, 8), (2, 12), (3, 2), (3, 4), (3, 6), (4, 2), (4, 3), (4, 6),
    (5, 2), (5, 4), (7, 3), (8, 2), (8, 4), (9, 2), (9, 3), (16, 3), (25, 2), (27, 2), (64, 2),
];

fn ctx(q: u64, n: u32) -> FieldContext {
    FieldContext::for_q(q, n).unwrap()
}

fn element(ctx: &FieldContext, seed: &[u64]) -> Element {
    let q = ctx.q();
    let coeffs = (0..ctx.n() as usize).map(|i| (seed[i % seed.len()].wrapping_mul(i as u64 + 7) % q) as u32);
    ctx.element(coeffs.collect()).unwrap()
}

fn field_and_seeds() -> impl Strategy<Value = (usize, Vec<u64>, Vec<u64>, Vec<u64>)> {
    (
        0..SMALL.len(),
        prop::collection::vec(any::<u64>(), 12),
        prop::collection::vec(any::<u64>(), 12),
        prop::collection::vec(any::<u64>(), 12),
    )
}

fn poly(ctx: &FieldContext, seed: &[u64], deg: usize) -> FqPoly {
    let q = ctx.q();
    FqPoly::new((0..=deg).map(|i| (seed[i % seed.len()].rotate_left(i as u32) % q) as u32).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn frobenius_is_an_automorphism((f, s1, s2, _) in field_and_seeds(), i in 0u64..13) {
        let (q, n) = SMALL[f];
        let c = ctx(q, n);
        let (a, b) = (element(&c, &s1), element(&c, &s2));
        prop_assert_eq!(c.frobenius(&c.mul(&a, &b), i), c.mul(&c.frobenius(&a, i), &c.frobenius(&b, i)));
        prop_assert_eq!(c.frobenius(&c.add(&a, &b), i), c.add(&c.frobenius(&a, i), &c.frobenius(&b, i)));
        let i = i % (n as u64 + 1);
        prop_assert_eq!(c.frobenius(&a, i), c.pow(&a, &arith::big_pow(q, i)));
    }

    #[test]
    fn field_axioms((f, s1, s2, s3) in field_and_seeds()) {
        let (q, n) = SMALL[f];
        let c = ctx(q, n);
        let (a, b, d) = (element(&c, &s1), element(&c, &s2), element(&c, &s3));
        prop_assert_eq!(c.mul(&a, &c.add(&b, &d)), c.add(&c.mul(&a, &b), &c.mul(&a, &d)));
        prop_assert_eq!(c.mul(&c.mul(&a, &b), &d), c.mul(&a, &c.mul(&b, &d)));
        if !a.is_zero() {
            prop_assert_eq!(c.mul(&a, &c.inv(&a).unwrap()), c.one());
        }
        prop_assert_eq!(c.from_rank(c.rank(&a)), a.clone());
        prop_assert_eq!(c.parse_element(&c.format_element(&a)).unwrap(), a);
    }

    #[test]
    fn trace_is_linear((f, s1, s2, _) in field_and_seeds(), k in 0u32..7) {
        let (q, n) = SMALL[f];
        let c = ctx(q, n);
        let p = c.p() as u32;
        let (a, b) = (element(&c, &s1), element(&c, &s2));
        let kk = c.from_base(c.fq().from_prime(k % p));
        let lhs = c.abs_trace(&c.add(&c.mul(&kk, &a), &b));
        prop_assert_eq!(lhs, ((k % p) * c.abs_trace(&a) + c.abs_trace(&b)) % p);
    }

    #[test]
    fn module_axioms((f, s1, s2, s3) in field_and_seeds(), df in 0usize..8, dg in 0usize..8) {
        let (q, n) = SMALL[f];
        let c = ctx(q, n);
        let fq = c.fq();
        let (fp, gp) = (poly(&c, &s1, df.min(2 * n as usize - 1)), poly(&c, &s2, dg.min(2 * n as usize - 1)));
        let a = element(&c, &s3);
        prop_assert_eq!(
            fq_poly::apply_lf(&c, &fp.add(fq, &gp), &a),
            c.add(&fq_poly::apply_lf(&c, &fp, &a), &fq_poly::apply_lf(&c, &gp, &a))
        );
        prop_assert_eq!(
            fq_poly::apply_lf(&c, &fp.mul(fq, &gp), &a),
            fq_poly::apply_lf(&c, &fp, &fq_poly::apply_lf(&c, &gp, &a))
        );
    }

    #[test]
    fn normality_is_frobenius_invariant((f, s1, _, _) in field_and_seeds(), i in 0u64..12) {
        let (q, n) = SMALL[f];
        let c = ctx(q, n);
        let a = element(&c, &s1);
        prop_assert_eq!(normality::is_normal_gcd(&c, &a), normality::is_normal_gcd(&c, &c.frobenius(&a, i)));
    }

    #[test]
    fn norms_are_multiplicative_and_land_in_subfields((f, s1, s2, _) in field_and_seeds()) {
        let (q, n) = SMALL[f];
        let c = ctx(q, n);
        let (a, b) = (element(&c, &s1), element(&c, &s2));
        for d in arith::divisors(n as u64) {
            let d = d as u32;
            let nab = norm_system::norm_to(&c, &c.mul(&a, &b), d).unwrap();
            let na = norm_system::norm_to(&c, &a, d).unwrap();
            let nb = norm_system::norm_to(&c, &b, d).unwrap();
            prop_assert_eq!(&nab, &c.mul(&na, &nb));
            prop_assert!(c.is_in_subfield(&na, d).unwrap());
            prop_assert_eq!(na, c.pow(&a, &norm_system::norm_exponent(q, n, d)));
        }
    }

    #[test]
    fn solver_fiber_is_the_brute_force_fiber(f in 0..SMALL.len(), r in any::<u64>(), k in 1usize..3) {
        let (q, n) = SMALL[f];
        let c = ctx(q, n);
        let tuples = oracle::divisor_tuples(n, 3);
        let candidates: Vec<&DivisorTuple> = tuples.iter().filter(|d| d.k() == k).collect();
        prop_assume!(!candidates.is_empty());
        let d = candidates[(r % candidates.len() as u64) as usize].clone();
        let group = c.order_u64().unwrap() - 1;
        let a = oracle::norms_of_power(&c, &d, r % group).unwrap();
        let p = PrescriptionSystem::new(&c, d.clone(), a).unwrap();
        prop_assert_eq!(norm_system::admissibility(&c, &p).unwrap(), Admissibility::Yes);
        let brute = oracle::exhaustive_fiber(&c, &p, 1 << 16).unwrap();
        let sol = norm_system::solve_prescribed(&c, &p).unwrap();
        let mut solved: Vec<Element> = sol.elements(&c, 0, u64::MAX).unwrap().map(|(_, x)| x).collect();
        solved.sort_by_key(|x| c.rank(x));
        prop_assert_eq!(BigUint::from(brute.count), norm_system::fiber_count(q, n, &d));
        prop_assert_eq!(solved, brute.elements);
    }

    #[test]
    fn admissible_iff_fiber_nonempty(f in 0..SMALL.len(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let (q, n) = SMALL[f];
        let c = ctx(q, n);
        let pairs = norm_system::enumerate_gamma(n, 2);
        prop_assume!(!pairs.is_empty());
        let d = pairs[(s1 % pairs.len() as u64) as usize].clone();
        let units: Vec<Vec<Element>> = d.divisors().iter().map(|&di| oracle::subfield_units(&c, di).unwrap()).collect();
        let a = vec![
            units[0][(s1 % units[0].len() as u64) as usize].clone(),
            units[1][(s2 % units[1].len() as u64) as usize].clone(),
        ];
        let p = PrescriptionSystem::new(&c, d, a).unwrap();
        let adm = norm_system::admissibility(&c, &p).unwrap() == Admissibility::Yes;
        let brute = oracle::exhaustive_fiber(&c, &p, 1 << 16).unwrap();
        prop_assert_eq!(adm, brute.count > 0);
    }

    #[test]
    fn verdicts_are_self_consistent(q_idx in 0usize..40, n in 2u32..80, pick in any::<u64>()) {
        let qs = arith::prime_powers_in(2, 64);
        let q = qs[q_idx % qs.len()];
        let tuples = oracle::divisor_tuples(n, 4);
        prop_assume!(!tuples.is_empty());
        let d = &tuples[(pick % tuples.len() as u64) as usize];
        let v = guarantees::classify(q, n, d).unwrap();
        prop_assert!(v.is_consistent());
    }

    #[test]
    fn crt_pair_solves_both(r1 in 0u64..1000, m1 in 1u64..1000, r2 in 0u64..1000, m2 in 1u64..1000) {
        let (r1, r2) = (r1 % m1, r2 % m2);
        let big = |x: u64| BigUint::from(x);
        let g = arith::gcd_u64(m1, m2);
        match norm_system::crt_pair(&big(r1), &big(m1), &big(r2), &big(m2)) {
            Some((r, l)) => {
                prop_assert_eq!(l.clone(), big(arith::lcm_u64(m1, m2)));
                prop_assert_eq!(&r % big(m1), big(r1));
                prop_assert_eq!(&r % big(m2), big(r2));
                prop_assert!(r < l);
            }
            None => prop_assert_ne!(r1 % g, r2 % g),
        }
    }
}

#[test]
fn subfields_have_q_to_the_d_elements() {
    for &(q, n) in SMALL {
        let c = ctx(q, n);
        for d in arith::divisors(n as u64) {
            let sub: Vec<Element> = c.elements().filter(|a| c.is_in_subfield(a, d as u32).unwrap()).collect();
            assert_eq!(sub.len() as u64, q.pow(d as u32), "q={q} n={n} d={d}");
            let (x, y) = (&sub[sub.len() / 2], &sub[sub.len() - 1]);
            assert!(c.is_in_subfield(&c.mul(x, y), d as u32).unwrap());
            assert!(c.is_in_subfield(&c.add(x, y), d as u32).unwrap());
        }
    }
}

#[test]
fn frobenius_exhaustive_small() {
    for (q, n) in [(2, 4), (3, 2), (4, 2), (2, 6)] {
        let c = ctx(q, n);
        let all: Vec<Element> = c.elements().collect();
        for a in &all {
            for b in &all {
                assert_eq!(c.frobenius(&c.mul(a, b), 1), c.mul(&c.frobenius(a, 1), &c.frobenius(b, 1)));
            }
        }
    }
}

#[test]
fn canonical_primitive_is_deterministic() {
    for &(q, n) in SMALL {
        let a = ctx(q, n);
        let first = a.canonical_primitive().unwrap().clone();
        assert_eq!(a.canonical_primitive().unwrap(), &first);
        assert_eq!(ctx(q, n).canonical_primitive().unwrap(), &first);
        assert!(a.is_primitive(&first).unwrap());
    }
}

#[test]
fn absolute_trace_is_surjective() {
    for &(q, n) in SMALL {
        let c = ctx(q, n);
        let seen: BTreeSet<u32> = c.elements().map(|a| c.abs_trace(&a)).collect();
        assert_eq!(seen.len() as u64, c.p(), "q={q} n={n}");
    }
}

#[test]
fn phi_sums_to_field_order_and_orders_divide() {
    for &(q, n) in SMALL {
        let c = ctx(q, n);
        let fact = fq_poly::factor_xn_minus_1(&c);
        let total: BigUint = fact.divisors().iter().map(|d| fq_poly::arith_functions(&fact, d).unwrap().phi).sum();
        assert_eq!(&total, c.order());
        let full = fact.full();
        for a in c.elements().step_by(7) {
            let o = fq_poly::element_order(&c, &fact, &a);
            assert!(o.exps.iter().zip(&full.exps).all(|(x, y)| x <= y));
            let f = fact.expand(c.fq(), &o);
            assert!(fq_poly::apply_lf(&c, &f, &a).is_zero());
        }
    }
}

#[test]
fn w_matches_subset_expansion() {
    for q in arith::prime_powers_in(2, 9) {
        let base = ctx(q, 1);
        let fq = base.fq();
        for n in 1..=12u32 {
            let fact = fq_poly::factor_xn_minus_1_over(fq, n);
            let xn1 = FqPoly::xn_minus_1(fq, n as usize);
            let r = fact.factors.len();
            let mut found = BTreeSet::new();
            for mask in 0u32..(1 << r) {
                let mut f = FqPoly::one(fq);
                for (i, p) in fact.factors.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        f = f.mul(fq, p);
                    }
                }
                let sqfree = fq_poly::poly_gcd(fq, &f, &f.derivative(fq)).map_or(true, |g| g.degree() == Some(0));
                if xn1.divrem(fq, &f).1.is_zero() && sqfree {
                    found.insert(f.coeffs().to_vec());
                }
            }
            assert_eq!(BigUint::from(found.len()), fq_poly::w_exact(&fact), "q={q} n={n}");
        }
    }
}

#[test]
fn normality_criteria_agree_and_count() {
    for &(q, n) in SMALL {
        let c = ctx(q, n);
        let fact = fq_poly::factor_xn_minus_1(&c);
        let tester = NormalityTester::new(&c, &fact);
        let mut count = 0u64;
        for a in c.elements() {
            let g = normality::is_normal_gcd(&c, &a);
            assert_eq!(g, normality::is_normal_order(&c, &fact, &a));
            assert_eq!(g, tester.is_normal(&c, &a));
            count += g as u64;
        }
        assert_eq!(BigUint::from(count), normality::count_normal(&fact), "q={q} n={n}");
    }
}

#[test]
fn norm_transitivity() {
    for &(q, n) in SMALL {
        let c = ctx(q, n);
        let divs: Vec<u32> = arith::divisors(n as u64).into_iter().map(|d| d as u32).collect();
        for a in c.elements().skip(1).step_by(5) {
            for &d in &divs {
                for &e in divs.iter().filter(|&&e| d % e == 0) {
                    let via = norm_system::norm_rel(&c, &norm_system::norm_to(&c, &a, d).unwrap(), d, e).unwrap();
                    assert_eq!(via, norm_system::norm_to(&c, &a, e).unwrap());
                }
            }
        }
    }
}

#[test]
fn implied_norms_on_relaxed_tuples() {
    for (q, n, di, dj) in [(2, 12, 2, 4), (2, 12, 3, 6), (3, 6, 1, 3), (4, 6, 1, 2), (2, 8, 2, 4)] {
        let c = ctx(q, n);
        let only = DivisorTuple::new(n, vec![dj]).unwrap();
        let both = DivisorTuple::relaxed(n, vec![di, dj]).unwrap();
        for aj in oracle::subfield_units(&c, dj).unwrap().into_iter().step_by(3) {
            let ai = norm_system::norm_rel(&c, &aj, dj, di).unwrap();
            let single = PrescriptionSystem::new(&c, only.clone(), vec![aj.clone()]).unwrap();
            let pair = PrescriptionSystem::new(&c, both.clone(), vec![ai, aj]).unwrap();
            assert_eq!(norm_system::admissibility(&c, &pair).unwrap(), Admissibility::Yes);
            let f1 = oracle::exhaustive_fiber(&c, &single, 1 << 16).unwrap();
            let f2 = oracle::exhaustive_fiber(&c, &pair, 1 << 16).unwrap();
            assert_eq!(f1, f2);
        }
    }
}

#[test]
fn thm1_condition_window() {
    for q in arith::prime_powers_in(2, 64) {
        for n in 7..=40 {
            let v = guarantees::thm1_condition(q, n);
            assert!(v.status.is_certified(), "q={q} n={n}: {}", v.status);
            assert!(v.is_consistent());
        }
    }
}

#[test]
fn thm1_desk_scale_claim() {
    for (q, n) in oracle::field_instances(1 << 16, 2) {
        let r = oracle::verify_thm1_for(q, n, 1 << 16).unwrap();
        if (q, n) == (3, 2) {
            assert_eq!(r.missed.len(), 1);
        } else if n >= 3 || q >= 4 || (q, n) == (2, 2) {
            assert!(r.missed.is_empty(), "q={q} n={n} missed {:?}", r.missed);
        }
    }
}
