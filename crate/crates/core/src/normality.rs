//! Normal elements: decision, counting and enumeration.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::field_tower::{Element, FieldContext};
use crate::fq_poly::{self, FqPoly, XnFactorization};
use crate::upoly::ScalarField;

/// Polynomials over `F_{q^n}`, least degree first.
type ExtPoly = Vec<Element>;

fn ext_trim(mut f: ExtPoly) -> ExtPoly {
    while f.last().is_some_and(|c| c.is_zero()) {
        f.pop();
    }
    f
}

fn ext_rem(ctx: &FieldContext, mut f: ExtPoly, g: &ExtPoly) -> Result<ExtPoly> {
    let dg = g.len() - 1;
    let lead_inv = ctx.inv(&g[dg])?;
    while f.len() > dg {
        let top = f.len() - 1;
        let c = ctx.mul(&f[top], &lead_inv);
        for (i, gi) in g.iter().enumerate() {
            let idx = top - dg + i;
            f[idx] = ctx.sub(&f[idx], &ctx.mul(&c, gi));
        }
        f = ext_trim(f);
    }
    Ok(f)
}

/// Degree of `gcd(f, g)` over `F_{q^n}`, for `g` nonzero.
fn ext_gcd_degree(ctx: &FieldContext, f: ExtPoly, g: ExtPoly) -> usize {
    let (mut a, mut b) = (g, f);
    while !b.is_empty() {
        let r = ext_rem(ctx, a, &b).expect("leading coefficient is nonzero");
        a = b;
        b = r;
    }
    a.len() - 1
}

/// Normality by the gcd criterion: `gcd(x^n - 1, sum_i a^{q^i} x^{n-1-i}) = 1`
/// over `F_{q^n}`.
pub fn is_normal_gcd(ctx: &FieldContext, a: &Element) -> bool {
    let n = ctx.n() as usize;
    let mut xn1 = vec![ctx.zero(); n + 1];
    xn1[0] = ctx.neg(&ctx.one());
    xn1[n] = ctx.add(&xn1[n], &ctx.one());
    let mut conj = vec![ctx.zero(); n];
    let mut cur = a.clone();
    for i in 0..n {
        conj[n - 1 - i] = cur.clone();
        cur = ctx.frobenius(&cur, 1);
    }
    let conj = ext_trim(conj);
    if conj.is_empty() {
        return false;
    }
    ext_gcd_degree(ctx, conj, xn1) == 0
}

/// Normality by the `F_q`-order criterion.
pub fn is_normal_order(ctx: &FieldContext, fact: &XnFactorization, a: &Element) -> bool {
    fq_poly::element_order(ctx, fact, a) == fact.full()
}

/// Number of normal elements, `Phi_q(x^n - 1)`.
pub fn count_normal(fact: &XnFactorization) -> BigUint {
    fq_poly::arith_functions(fact, &fact.full()).expect("x^n - 1 divides itself").phi
}

/// Bulk normality test: `a` is normal iff `((x^n - 1)/P) ∘ a != 0` for every
/// irreducible `P | x^n - 1`. The cofactor maps are stored as matrices.
#[derive(Debug, Clone)]
pub struct NormalityTester {
    n: usize,
    cofactor_maps: Vec<Vec<u32>>,
}

impl NormalityTester {
    pub fn new(ctx: &FieldContext, fact: &XnFactorization) -> Self {
        let fq = ctx.fq();
        let xn1 = FqPoly::xn_minus_1(fq, ctx.n() as usize);
        let cofactor_maps = fact
            .factors
            .iter()
            .map(|p| {
                let (cof, _) = xn1.divrem(fq, p);
                fq_poly::lf_matrix(ctx, &cof)
            })
            .collect();
        NormalityTester { n: ctx.n() as usize, cofactor_maps }
    }

    pub fn for_context(ctx: &FieldContext) -> Self {
        Self::new(ctx, &fq_poly::factor_xn_minus_1(ctx))
    }

    pub fn is_normal(&self, ctx: &FieldContext, a: &Element) -> bool {
        self.is_normal_coeffs(ctx, a.coeffs())
    }

    pub fn is_normal_coeffs(&self, ctx: &FieldContext, a: &[u32]) -> bool {
        let n = self.n;
        let fq = ctx.fq();
        let mut out = vec![0u32; n];
        self.cofactor_maps.iter().all(|m| {
            out.iter_mut().for_each(|o| *o = 0);
            for (j, &c) in a.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for (o, &r) in out.iter_mut().zip(&m[j * n..(j + 1) * n]) {
                    *o = fq.add(*o, fq.mul(c, r));
                }
            }
            out.iter().any(|&o| o != 0)
        })
    }
}

/// How [`iterate_normal`] produces elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterMode {
    /// Every normal element in canonical order; refuses fields larger than `budget`.
    Exhaustive { budget: u64 },
    /// Uniform samples filtered to normal ones, reproducible from `seed`.
    Randomized { seed: u64 },
}

enum Source<'a> {
    Exhaustive(crate::field_tower::ElementIter<'a>),
    Randomized(ChaCha8Rng),
}

pub struct NormalIter<'a> {
    ctx: &'a FieldContext,
    tester: NormalityTester,
    source: Source<'a>,
}

impl Iterator for NormalIter<'_> {
    type Item = Element;
    fn next(&mut self) -> Option<Element> {
        loop {
            let a = match &mut self.source {
                Source::Exhaustive(it) => it.next()?,
                Source::Randomized(rng) => random_element(self.ctx, rng),
            };
            if self.tester.is_normal(self.ctx, &a) {
                return Some(a);
            }
        }
    }
}

/// Uniformly random element.
pub fn random_element(ctx: &FieldContext, rng: &mut ChaCha8Rng) -> Element {
    let q = ctx.q();
    let coeffs = (0..ctx.n()).map(|_| (rng.next_u64() % q) as u32).collect();
    ctx.element(coeffs).expect("coefficients are in range")
}

pub fn iterate_normal(ctx: &FieldContext, mode: IterMode) -> Result<NormalIter<'_>> {
    let source = match mode {
        IterMode::Exhaustive { budget } => {
            if ctx.order_u64().map_or(true, |s| s > budget) {
                return Err(Error::BudgetExceeded { budget });
            }
            Source::Exhaustive(ctx.elements())
        }
        IterMode::Randomized { seed } => Source::Randomized(ChaCha8Rng::seed_from_u64(seed)),
    };
    Ok(NormalIter { ctx, tester: NormalityTester::for_context(ctx), source })
}
