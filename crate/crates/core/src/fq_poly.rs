//! Polynomials over `F_q` and the `F_q[x]`-module structure of `F_{q^n}`.
//!
//! Only `x^n - 1` is ever factored. With `n = m p^t` and `gcd(m, p) = 1`,
//! `x^n - 1 = (x^m - 1)^{p^t}` and `x^m - 1 = prod_{d | m} Phi_d(x)`, where
//! each cyclotomic factor splits into `phi(d) / ord_d(q)` irreducibles of
//! degree `ord_d(q)`. Divisors of `x^n - 1` are exponent vectors over the
//! distinct irreducible factors.

use alloc::vec;
use alloc::vec::Vec;
use alloc::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::One;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::arith;
use crate::base_field::BaseField;
use crate::error::{Error, Result};
use crate::field_tower::{Element, FieldContext};
use crate::upoly::{self, PrimeField, ScalarField};

/// A polynomial over `F_q`, least degree first, without trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FqPoly {
    coeffs: Vec<u32>,
}

impl FqPoly {
    pub fn new(coeffs: Vec<u32>) -> Self {
        FqPoly { coeffs: upoly::trim(coeffs) }
    }

    pub fn zero() -> Self {
        FqPoly { coeffs: Vec::new() }
    }

    pub fn one(fq: &BaseField) -> Self {
        FqPoly { coeffs: vec![fq.one()] }
    }

    /// `x^n - 1`.
    pub fn xn_minus_1(fq: &BaseField, n: usize) -> Self {
        let mut c = vec![0u32; n + 1];
        c[0] = fq.neg(fq.one());
        c[n] = fq.add(c[n], fq.one());
        FqPoly::new(c)
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        upoly::degree(&self.coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_monic(&self, fq: &BaseField) -> bool {
        self.coeffs.last() == Some(&fq.one())
    }

    pub fn mul(&self, fq: &BaseField, other: &FqPoly) -> FqPoly {
        FqPoly { coeffs: upoly::mul(fq, &self.coeffs, &other.coeffs) }
    }

    pub fn add(&self, fq: &BaseField, other: &FqPoly) -> FqPoly {
        FqPoly { coeffs: upoly::add(fq, &self.coeffs, &other.coeffs) }
    }

    pub fn divrem(&self, fq: &BaseField, other: &FqPoly) -> (FqPoly, FqPoly) {
        let (q, r) = upoly::divrem(fq, &self.coeffs, &other.coeffs);
        (FqPoly { coeffs: q }, FqPoly { coeffs: r })
    }

    pub fn derivative(&self, fq: &BaseField) -> FqPoly {
        FqPoly { coeffs: upoly::derivative(fq, &self.coeffs) }
    }

    pub fn pow(&self, fq: &BaseField, e: u32) -> FqPoly {
        let mut acc = FqPoly::one(fq);
        for _ in 0..e {
            acc = acc.mul(fq, self);
        }
        acc
    }
}

/// Monic gcd of two polynomials, not both zero.
pub fn poly_gcd(fq: &BaseField, f: &FqPoly, g: &FqPoly) -> Result<FqPoly> {
    upoly::gcd(fq, &f.coeffs, &g.coeffs)
        .map(|coeffs| FqPoly { coeffs })
        .ok_or(Error::BothZero)
}

/// `f ∘ a = sum_i f_i a^{q^i}`, the linearized action.
pub fn apply_lf(ctx: &FieldContext, f: &FqPoly, a: &Element) -> Element {
    // sigma^n is the identity, so fold f modulo x^n - 1 first.
    let n = ctx.n() as usize;
    let fq = ctx.fq();
    let mut folded = vec![0u32; n];
    for (i, &c) in f.coeffs.iter().enumerate() {
        folded[i % n] = fq.add(folded[i % n], c);
    }
    let mut acc = ctx.zero();
    for (i, &c) in folded.iter().enumerate() {
        if c != 0 {
            acc = ctx.add(&acc, &ctx.scale(&ctx.frobenius(a, i as u64), c));
        }
    }
    acc
}

/// Row-major matrix of the `F_q`-linear map `a -> f ∘ a` (row `j` is the
/// image of `x^j`).
pub fn lf_matrix(ctx: &FieldContext, f: &FqPoly) -> Vec<u32> {
    let n = ctx.n() as usize;
    let mut m = vec![0u32; n * n];
    for j in 0..n {
        let img = apply_lf(ctx, f, &ctx.monomial(j));
        m[j * n..(j + 1) * n].copy_from_slice(img.coeffs());
    }
    m
}

/// Exponent vector over the distinct irreducible factors of `x^n - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Divisor {
    pub exps: Vec<u32>,
}

impl Divisor {
    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }
}

/// Factorization `x^n - 1 = prod P_i^{p^t}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XnFactorization {
    pub q: u64,
    pub n: u32,
    pub m: u32,
    pub t: u32,
    /// Common multiplicity `p^t` of every distinct factor.
    pub multiplicity: u32,
    /// Distinct monic irreducibles, sorted by degree then coefficients.
    pub factors: Vec<FqPoly>,
}

impl XnFactorization {
    pub fn r(&self) -> usize {
        self.factors.len()
    }

    pub fn factor_degrees(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.degree().unwrap()).collect()
    }

    /// The divisor `x^n - 1` itself.
    pub fn full(&self) -> Divisor {
        Divisor { exps: vec![self.multiplicity; self.r()] }
    }

    pub fn unit(&self) -> Divisor {
        Divisor { exps: vec![0; self.r()] }
    }

    /// Every monic divisor, in mixed-radix order of the exponent vectors.
    pub fn divisors(&self) -> Vec<Divisor> {
        let r = self.r();
        let mut out = Vec::new();
        let mut exps = vec![0u32; r];
        loop {
            out.push(Divisor { exps: exps.clone() });
            let mut i = 0;
            loop {
                if i == r {
                    return out;
                }
                exps[i] += 1;
                if exps[i] <= self.multiplicity {
                    break;
                }
                exps[i] = 0;
                i += 1;
            }
        }
    }

    /// The squarefree divisors (exponents in `{0, 1}`).
    pub fn squarefree_divisors(&self) -> Vec<Divisor> {
        let r = self.r();
        (0..1u64 << r)
            .map(|mask| Divisor { exps: (0..r).map(|i| ((mask >> i) & 1) as u32).collect() })
            .collect()
    }

    pub fn expand(&self, fq: &BaseField, d: &Divisor) -> FqPoly {
        let mut acc = FqPoly::one(fq);
        for (f, &e) in self.factors.iter().zip(&d.exps) {
            acc = acc.mul(fq, &f.pow(fq, e));
        }
        acc
    }

    pub fn degree_of(&self, d: &Divisor) -> usize {
        self.factor_degrees().iter().zip(&d.exps).map(|(deg, &e)| deg * e as usize).sum()
    }

    fn check(&self, d: &Divisor) -> Result<()> {
        if d.exps.len() != self.r() || d.exps.iter().any(|&e| e > self.multiplicity) {
            return Err(Error::NotADivisor { d: 0, n: self.n });
        }
        Ok(())
    }

    /// Expresses a monic polynomial as a divisor of `x^n - 1`.
    pub fn divisor_of(&self, fq: &BaseField, f: &FqPoly) -> Result<Divisor> {
        if f.is_zero() || !f.is_monic(fq) {
            return Err(Error::NotADivisor { d: 0, n: self.n });
        }
        let mut rest = f.clone();
        let mut exps = vec![0u32; self.r()];
        for (i, p) in self.factors.iter().enumerate() {
            loop {
                let (q, r) = rest.divrem(fq, p);
                if !r.is_zero() {
                    break;
                }
                rest = q;
                exps[i] += 1;
            }
        }
        let d = Divisor { exps };
        if rest != FqPoly::one(fq) {
            return Err(Error::NotADivisor { d: 0, n: self.n });
        }
        self.check(&d)?;
        Ok(d)
    }
}

/// Number of distinct irreducible factors of `x^n - 1` over `F_q`:
/// `sum_{d | m} phi(d) / ord_d(q)`.
pub fn distinct_factor_count(q: u64, n: u32) -> u64 {
    let (p, _) = arith::prime_power(q).expect("q is a prime power");
    let mut m = n as u64;
    while m % p == 0 {
        m /= p;
    }
    arith::divisors(m)
        .into_iter()
        .map(|d| arith::euler_phi(d) / arith::multiplicative_order(q % d.max(1), d))
        .sum()
}

/// Cyclotomic polynomial `Phi_d` over `F_p`, for `gcd(d, p) = 1`.
fn cyclotomic_mod_p(fp: &PrimeField, d: u64, memo: &mut BTreeMap<u64, Vec<u32>>) -> Vec<u32> {
    if let Some(c) = memo.get(&d) {
        return c.clone();
    }
    let mut num = vec![0u32; d as usize + 1];
    num[0] = fp.neg(1 % fp.p);
    num[d as usize] = fp.add(num[d as usize], 1);
    let mut f = upoly::trim(num);
    for e in arith::divisors(d) {
        if e < d {
            let phi_e = cyclotomic_mod_p(fp, e, memo);
            let (q, r) = upoly::divrem(fp, &f, &phi_e);
            debug_assert!(r.is_empty());
            f = q;
        }
    }
    memo.insert(d, f.clone());
    f
}

const EDF_SEED: u64 = 0x6e6f_726d_616c_2121;

/// Splits `f` (squarefree, all irreducible factors of degree `e`) into its
/// irreducible factors. Deterministic: random trials come from a fixed seed.
fn equal_degree_factor(fq: &BaseField, f: Vec<u32>, e: usize, rng: &mut ChaCha8Rng, out: &mut Vec<Vec<u32>>) {
    let deg = upoly::degree(&f).unwrap();
    if deg == e {
        out.push(f);
        return;
    }
    let q = fq.order();
    let odd = q % 2 == 1;
    loop {
        let g: Vec<u32> = upoly::trim((0..deg).map(|_| (rng.next_u64() % q) as u32).collect());
        if upoly::degree(&g).map_or(true, |d| d == 0) {
            continue;
        }
        let h = if odd {
            let exp = (arith::big_pow(q, e as u64) - 1u32) >> 1;
            let pw = upoly::pow_mod_big(fq, &g, &exp, &f);
            upoly::sub(fq, &pw, &[fq.one()])
        } else {
            // Absolute trace map to F_2: g + g^2 + ... + g^{2^{s e - 1}}.
            let steps = fq.s() as usize * e;
            let mut acc = Vec::new();
            let mut cur = upoly::rem(fq, &g, &f);
            for _ in 0..steps {
                acc = upoly::add(fq, &acc, &cur);
                cur = upoly::mul_mod(fq, &cur, &cur, &f);
            }
            acc
        };
        let Some(split) = upoly::gcd(fq, &h, &f) else { continue };
        let ds = upoly::degree(&split).unwrap_or(0);
        if ds == 0 || ds == deg {
            continue;
        }
        let other = upoly::divrem(fq, &f, &split).0;
        equal_degree_factor(fq, split, e, rng, out);
        equal_degree_factor(fq, upoly::monic(fq, &other), e, rng, out);
        return;
    }
}

/// Factors `x^n - 1` over the base field of `ctx`.
pub fn factor_xn_minus_1(ctx: &FieldContext) -> XnFactorization {
    factor_xn_minus_1_over(ctx.fq(), ctx.n())
}

pub fn factor_xn_minus_1_over(fq: &BaseField, n: u32) -> XnFactorization {
    let p = fq.p() as u64;
    let q = fq.order();
    let mut m = n as u64;
    let mut t = 0;
    while m % p == 0 {
        m /= p;
        t += 1;
    }
    let fp = PrimeField { p: fq.p() };
    let mut memo = BTreeMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(EDF_SEED);
    let mut factors = Vec::new();
    for d in arith::divisors(m) {
        let phi_d_fp = cyclotomic_mod_p(&fp, d, &mut memo);
        let phi_d: Vec<u32> = phi_d_fp.iter().map(|&c| fq.from_prime(c)).collect();
        let e = arith::multiplicative_order(q % d.max(1), d) as usize;
        let mut parts = Vec::new();
        equal_degree_factor(fq, phi_d, e, &mut rng, &mut parts);
        factors.extend(parts.into_iter().map(FqPoly::new));
    }
    factors.sort_by(|a, b| {
        a.degree()
            .cmp(&b.degree())
            .then_with(|| a.coeffs.iter().rev().cmp(b.coeffs.iter().rev()))
    });
    XnFactorization {
        q,
        n,
        m: m as u32,
        t,
        multiplicity: (p as u32).pow(t),
        factors,
    }
}

/// `Phi_q(f)`, `mu_q(f)` and squarefreeness of a divisor of `x^n - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArithValues {
    pub phi: BigUint,
    pub mu: i8,
    pub squarefree: bool,
}

pub fn arith_functions(fact: &XnFactorization, d: &Divisor) -> Result<ArithValues> {
    fact.check(d)?;
    let q = fact.q;
    let mut phi = BigUint::one();
    let mut squarefree = true;
    let mut r = 0;
    for (deg, &e) in fact.factor_degrees().iter().zip(&d.exps) {
        if e == 0 {
            continue;
        }
        // Phi(P^e) = q^{e deg} - q^{(e-1) deg}
        let hi = arith::big_pow(q, e as u64 * *deg as u64);
        let lo = arith::big_pow(q, (e as u64 - 1) * *deg as u64);
        phi *= hi - lo;
        if e > 1 {
            squarefree = false;
        }
        r += 1;
    }
    let mu = if !squarefree {
        0
    } else if r % 2 == 0 {
        1
    } else {
        -1
    };
    Ok(ArithValues { phi, mu, squarefree })
}

/// Arithmetic functions of a monic polynomial dividing `x^n - 1`.
pub fn arith_functions_poly(fq: &BaseField, fact: &XnFactorization, f: &FqPoly) -> Result<ArithValues> {
    arith_functions(fact, &fact.divisor_of(fq, f)?)
}

/// `W_q(x^n - 1) = 2^r`, the number of squarefree monic divisors.
pub fn w_exact(fact: &XnFactorization) -> BigUint {
    BigUint::one() << fact.r()
}

/// `W_q(x^n - 1)` from the closed-form factor count.
pub fn w_exact_for(q: u64, n: u32) -> BigUint {
    BigUint::one() << distinct_factor_count(q, n)
}

/// Precomputed powers `P_i^j`.
pub struct FactorPowers {
    pows: Vec<Vec<FqPoly>>,
}

impl FactorPowers {
    pub fn new(fq: &BaseField, fact: &XnFactorization) -> Self {
        let pows = fact
            .factors
            .iter()
            .map(|f| {
                let mut v = vec![FqPoly::one(fq)];
                for j in 1..=fact.multiplicity as usize {
                    let next = v[j - 1].mul(fq, f);
                    v.push(next);
                }
                v
            })
            .collect();
        FactorPowers { pows }
    }

    pub fn expand(&self, fq: &BaseField, d: &Divisor) -> FqPoly {
        let mut acc = FqPoly::one(fq);
        for (p, &e) in self.pows.iter().zip(&d.exps) {
            if e > 0 {
                acc = acc.mul(fq, &p[e as usize]);
            }
        }
        acc
    }
}

/// Minimal divisor of `x^n - 1` (as an exponent vector) satisfying `pred`,
/// found by peeling irreducible factors off `x^n - 1`. `pred` must be closed
/// under taking multiples within the divisor lattice.
pub fn peel_divisor<F>(fact: &XnFactorization, mut pred: F) -> Divisor
where
    F: FnMut(&Divisor) -> bool,
{
    let mut d = fact.full();
    for i in 0..fact.r() {
        while d.exps[i] > 0 {
            d.exps[i] -= 1;
            if !pred(&d) {
                d.exps[i] += 1;
                break;
            }
        }
    }
    d
}

/// Position of `d` in [`XnFactorization::divisors`].
pub fn divisor_index(fact: &XnFactorization, d: &Divisor) -> usize {
    let radix = fact.multiplicity as usize + 1;
    d.exps.iter().rev().fold(0, |acc, &e| acc * radix + e as usize)
}

/// The `F_q`-order of `a`: least-degree monic divisor `g` of `x^n - 1`
/// with `g ∘ a = 0`.
pub fn element_order(ctx: &FieldContext, fact: &XnFactorization, a: &Element) -> Divisor {
    let fq = ctx.fq();
    let powers = FactorPowers::new(fq, fact);
    peel_divisor(fact, |d| apply_lf(ctx, &powers.expand(fq, d), a).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_tower::build_context;

    #[test]
    fn factor_small_cases() {
        let f2 = BaseField::new(2, 1).unwrap();
        let f = factor_xn_minus_1_over(&f2, 4);
        assert_eq!(f.multiplicity, 4);
        assert_eq!(f.factors, vec![FqPoly::new(vec![1, 1])]);

        let f = factor_xn_minus_1_over(&f2, 3);
        assert_eq!(f.factors, vec![FqPoly::new(vec![1, 1]), FqPoly::new(vec![1, 1, 1])]);
        assert_eq!(f.multiplicity, 1);

        let f4 = BaseField::new(2, 2).unwrap();
        let f = factor_xn_minus_1_over(&f4, 3);
        assert_eq!(f.factor_degrees(), vec![1, 1, 1]);
    }

    #[test]
    fn product_and_count_identities() {
        for (p, s) in [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (3, 2), (2, 3)] {
            let fq = BaseField::new(p, s).unwrap();
            for n in 1..=16u32 {
                let f = factor_xn_minus_1_over(&fq, n);
                assert_eq!(f.expand(&fq, &f.full()), FqPoly::xn_minus_1(&fq, n as usize));
                assert_eq!(f.r() as u64, distinct_factor_count(fq.order(), n));
                for g in &f.factors {
                    assert!(g.is_monic(&fq));
                    assert!(upoly::is_irreducible(&fq, g.coeffs()));
                }
                let mut sorted = f.factors.clone();
                sorted.dedup();
                assert_eq!(sorted.len(), f.r());
            }
        }
    }

    #[test]
    fn w_spot_values() {
        let f2 = BaseField::new(2, 1).unwrap();
        assert_eq!(w_exact(&factor_xn_minus_1_over(&f2, 4)), BigUint::from(2u32));
        assert_eq!(w_exact(&factor_xn_minus_1_over(&f2, 6)), BigUint::from(4u32));
        assert_eq!(w_exact(&factor_xn_minus_1_over(&f2, 30)), BigUint::from(32u32));
        assert_eq!(w_exact_for(2, 30), BigUint::from(32u32));
    }

    #[test]
    fn arith_function_values() {
        let f2 = BaseField::new(2, 1).unwrap();
        let fact = factor_xn_minus_1_over(&f2, 4);
        let v = arith_functions(&fact, &fact.unit()).unwrap();
        assert_eq!(v, ArithValues { phi: BigUint::one(), mu: 1, squarefree: true });
        let v = arith_functions(&fact, &fact.full()).unwrap();
        assert_eq!((v.phi, v.mu), (BigUint::from(8u32), 0));

        let fact = factor_xn_minus_1_over(&f2, 3);
        let v = arith_functions_poly(&f2, &fact, &FqPoly::xn_minus_1(&f2, 3)).unwrap();
        assert_eq!((v.phi, v.mu, v.squarefree), (BigUint::from(3u32), 1, true));
        // x^2 does not divide x^3 - 1
        assert!(arith_functions_poly(&f2, &fact, &FqPoly::new(vec![0, 0, 1])).is_err());
        assert!(arith_functions(&fact, &Divisor { exps: vec![2, 0] }).is_err());
    }

    #[test]
    fn gcd_examples() {
        let f2 = BaseField::new(2, 1).unwrap();
        let f3 = BaseField::new(3, 1).unwrap();
        let f = FqPoly::new(vec![1, 1, 0, 1]);
        assert_eq!(poly_gcd(&f2, &f, &FqPoly::zero()).unwrap(), f);
        assert_eq!(
            poly_gcd(&f2, &f, &FqPoly::new(vec![1, 1, 1])).unwrap(),
            FqPoly::one(&f2)
        );
        assert_eq!(
            poly_gcd(&f3, &FqPoly::new(vec![2, 0, 1]), &FqPoly::new(vec![2, 1])).unwrap(),
            FqPoly::new(vec![2, 1])
        );
        assert_eq!(poly_gcd(&f3, &FqPoly::zero(), &FqPoly::zero()), Err(Error::BothZero));
    }

    #[test]
    fn linearized_action() {
        let ctx = build_context(2, 1, 4).unwrap();
        let fq = ctx.fq();
        let x_minus_1 = FqPoly::new(vec![fq.neg(fq.one()), fq.one()]);
        let xn1 = FqPoly::xn_minus_1(fq, 4);
        for a in ctx.elements() {
            assert_eq!(apply_lf(&ctx, &FqPoly::one(fq), &a), a);
            assert!(apply_lf(&ctx, &xn1, &a).is_zero());
            let b = apply_lf(&ctx, &x_minus_1, &a);
            assert_eq!(b, ctx.sub(&ctx.frobenius(&a, 1), &a));
            assert_eq!(b.is_zero(), ctx.is_in_subfield(&a, 1).unwrap());
        }
    }

    #[test]
    fn orders_in_f16() {
        let ctx = build_context(2, 1, 4).unwrap();
        let fact = factor_xn_minus_1(&ctx);
        assert!(element_order(&ctx, &fact, &ctx.zero()).is_one());
        assert_eq!(element_order(&ctx, &fact, &ctx.one()).exps, vec![1]);
        let full = ctx.elements().filter(|a| element_order(&ctx, &fact, a) == fact.full()).count();
        assert_eq!(full, 8);
        for (i, d) in fact.divisors().iter().enumerate() {
            assert_eq!(divisor_index(&fact, d), i);
        }
        let fact = factor_xn_minus_1_over(ctx.fq(), 6);
        for (i, d) in fact.divisors().iter().enumerate() {
            assert_eq!(divisor_index(&fact, d), i);
        }
    }
}
