//! Additive characters `psi_c(a) = exp(2 pi i Tr(c a) / p)` and the
//! character-sum side of normality.
//!
//! Sums are tallied as histograms of trace values in `F_p` and converted to
//! a complex number once.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::field_tower::{Element, FieldContext};
use crate::fq_poly::{self, Divisor, FactorPowers, XnFactorization};
use crate::norm_system::{self, PrescriptionSystem};
use crate::upoly::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl ComplexValue {
    pub const ONE: ComplexValue = ComplexValue { re: 1.0, im: 0.0 };

    pub fn abs(&self) -> f64 {
        libm::hypot(self.re, self.im)
    }

    /// `exp(2 pi i k / p)`.
    pub fn root_of_unity(k: u32, p: u32) -> Self {
        let theta = 2.0 * PI * k as f64 / p as f64;
        ComplexValue { re: libm::cos(theta), im: libm::sin(theta) }
    }

    pub fn add(self, o: ComplexValue) -> ComplexValue {
        ComplexValue { re: self.re + o.re, im: self.im + o.im }
    }

    pub fn scale(self, s: f64) -> ComplexValue {
        ComplexValue { re: self.re * s, im: self.im * s }
    }
}

/// Counts of trace values `0..p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceHistogram {
    pub counts: Vec<u64>,
}

impl TraceHistogram {
    pub fn new(p: u32) -> Self {
        TraceHistogram { counts: vec![0; p as usize] }
    }

    #[inline]
    pub fn add(&mut self, t: u32) {
        self.counts[t as usize] += 1;
    }

    pub fn merge(&mut self, other: &TraceHistogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn to_complex(&self) -> ComplexValue {
        self.to_complex_with(&roots_of_unity(self.counts.len() as u32))
    }

    /// As [`to_complex`](Self::to_complex), with `roots[k] = exp(2 pi i k / p)`.
    pub fn to_complex_with(&self, roots: &[ComplexValue]) -> ComplexValue {
        self.counts
            .iter()
            .zip(roots)
            .filter(|(&c, _)| c > 0)
            .fold(ComplexValue::default(), |acc, (&c, r)| acc.add(r.scale(c as f64)))
    }
}

/// All `p`-th roots of unity, `k = 0..p`.
pub fn roots_of_unity(p: u32) -> Vec<ComplexValue> {
    (0..p).map(|k| ComplexValue::root_of_unity(k, p)).collect()
}

/// `psi_c(a) = psi_1(c a)`.
pub fn psi(ctx: &FieldContext, c: &Element, a: &Element) -> ComplexValue {
    let t = ctx.abs_trace(&ctx.mul(c, a));
    ComplexValue::root_of_unity(t, ctx.p() as u32)
}

/// The trace form `B[i][j] = Tr_{q^n/q}(x^{i+j})`, so that
/// `Tr_{q^n/q}(c a) = sum_{i,j} c_i B[i][j] a_j`.
#[derive(Debug, Clone)]
pub struct TraceForm {
    n: usize,
    b: Vec<u32>,
}

impl TraceForm {
    pub fn new(ctx: &FieldContext) -> Self {
        let n = ctx.n() as usize;
        let mut b = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                b[i * n + j] = ctx.relative_trace(&ctx.monomial(i + j));
            }
        }
        TraceForm { n, b }
    }

    /// `u` with `Tr_{q^n/q}(c a) = sum_i c_i u_i`.
    pub fn dual(&self, ctx: &FieldContext, a: &[u32]) -> Vec<u32> {
        let fq = ctx.fq();
        (0..self.n)
            .map(|i| {
                a.iter()
                    .enumerate()
                    .fold(0, |acc, (j, &aj)| fq.add(acc, fq.mul(self.b[i * self.n + j], aj)))
            })
            .collect()
    }

    /// `Tr_{q^n/p}` of `sum_i c_i u_i`.
    #[inline]
    pub fn abs_trace_with(ctx: &FieldContext, c: &[u32], u: &[u32]) -> u32 {
        let fq = ctx.fq();
        let rel = c.iter().zip(u).fold(0, |acc, (&ci, &ui)| fq.add(acc, fq.mul(ci, ui)));
        fq.trace(rel)
    }
}

/// Whether `psi_c o h` is trivial: `Tr_{q^n/q}(c L_h(x^j)) = 0` for every
/// basis monomial. The images `L_h(x^j)` span an `F_q`-subspace, and the
/// absolute trace vanishes on `c` times it exactly when the relative trace does.
fn annihilates(ctx: &FieldContext, u: &[u32], images: &[u32]) -> bool {
    let n = ctx.n() as usize;
    let fq = ctx.fq();
    (0..n).all(|j| {
        let v = &images[j * n..(j + 1) * n];
        v.iter().zip(u).fold(0, |acc, (&vi, &ui)| fq.add(acc, fq.mul(vi, ui))) == 0
    })
}

/// The `F_q`-order of `psi_c`.
pub fn char_order(ctx: &FieldContext, fact: &XnFactorization, c: &Element) -> Divisor {
    let form = TraceForm::new(ctx);
    let u = form.dual(ctx, c.coeffs());
    let powers = FactorPowers::new(ctx.fq(), fact);
    fq_poly::peel_divisor(fact, |d| annihilates(ctx, &u, &fq_poly::lf_matrix(ctx, &powers.expand(ctx.fq(), d))))
}

/// `F_q`-orders of every character of a small field, grouped into the sets
/// `Lambda_f`.
#[derive(Debug, Clone)]
pub struct LambdaTable {
    pub divisors: Vec<Divisor>,
    /// Twists `c` of each `Lambda_f`, flattened coefficient vectors.
    members: Vec<Vec<u32>>,
}

impl LambdaTable {
    pub fn build(ctx: &FieldContext, fact: &XnFactorization) -> Self {
        let fq = ctx.fq();
        let divisors = fact.divisors();
        let powers = FactorPowers::new(fq, fact);
        let maps: Vec<Vec<u32>> = divisors
            .iter()
            .map(|d| fq_poly::lf_matrix(ctx, &powers.expand(fq, d)))
            .collect();
        let form = TraceForm::new(ctx);
        let mut members = vec![Vec::new(); divisors.len()];
        for c in ctx.elements() {
            let u = form.dual(ctx, c.coeffs());
            let order = fq_poly::peel_divisor(fact, |d| annihilates(ctx, &u, &maps[fq_poly::divisor_index(fact, d)]));
            members[fq_poly::divisor_index(fact, &order)].extend_from_slice(c.coeffs());
        }
        LambdaTable { divisors, members }
    }

    pub fn count(&self, n: usize, i: usize) -> usize {
        self.members[i].len() / n
    }

    pub fn members(&self, i: usize) -> &[u32] {
        &self.members[i]
    }
}

/// Evaluates the character-sum expression for the normal indicator.
#[derive(Debug, Clone)]
pub struct IndicatorEngine {
    form: TraceForm,
    table: LambdaTable,
    /// `(index, mu(f) / Phi(f))` for squarefree `f`.
    weights: Vec<(usize, f64)>,
    scale: f64,
    roots: Vec<ComplexValue>,
}

impl IndicatorEngine {
    pub fn new(ctx: &FieldContext, fact: &XnFactorization) -> Self {
        let table = LambdaTable::build(ctx, fact);
        let weights = table
            .divisors
            .iter()
            .enumerate()
            .filter_map(|(i, d)| {
                let v = fq_poly::arith_functions(fact, d).expect("listed divisor");
                (v.mu != 0).then(|| (i, v.mu as f64 / v.phi.to_f64().unwrap()))
            })
            .collect();
        let phi = fq_poly::arith_functions(fact, &fact.full()).unwrap().phi;
        let scale = phi.to_f64().unwrap() / ctx.order().to_f64().unwrap();
        IndicatorEngine { form: TraceForm::new(ctx), table, weights, scale, roots: roots_of_unity(ctx.p() as u32) }
    }

    pub fn table(&self) -> &LambdaTable {
        &self.table
    }

    /// The real value of the expression before rounding.
    pub fn value(&self, ctx: &FieldContext, a: &Element) -> f64 {
        let n = ctx.n() as usize;
        let u = self.form.dual(ctx, a.coeffs());
        let mut total = ComplexValue::default();
        for &(i, w) in &self.weights {
            let mut h = TraceHistogram::new(ctx.p() as u32);
            for c in self.table.members(i).chunks_exact(n) {
                h.add(TraceForm::abs_trace_with(ctx, c, &u));
            }
            total = total.add(h.to_complex_with(&self.roots).scale(w));
        }
        total.re * self.scale
    }

    pub fn indicator(&self, ctx: &FieldContext, a: &Element) -> Result<u8> {
        round_indicator(self.value(ctx, a))
    }
}

fn round_indicator(value: f64) -> Result<u8> {
    if libm::fabs(value) <= 1e-6 {
        Ok(0)
    } else if libm::fabs(value - 1.0) <= 1e-6 {
        Ok(1)
    } else {
        Err(Error::RoundingUnstable { value })
    }
}

/// The normal indicator evaluated through character sums.
pub fn indicator_normal(ctx: &FieldContext, fact: &XnFactorization, a: &Element) -> Result<u8> {
    IndicatorEngine::new(ctx, fact).indicator(ctx, a)
}

/// Histograms of `Tr(c alpha)` over a set, one per twist.
pub struct SetSums<'a> {
    ctx: &'a FieldContext,
    duals: Vec<Vec<u32>>,
    roots: Vec<ComplexValue>,
}

impl<'a> SetSums<'a> {
    pub fn new(ctx: &'a FieldContext, set: &[Element]) -> Self {
        let form = TraceForm::new(ctx);
        SetSums {
            ctx,
            duals: set.iter().map(|a| form.dual(ctx, a.coeffs())).collect(),
            roots: roots_of_unity(ctx.p() as u32),
        }
    }

    pub fn histogram(&self, c: &Element) -> TraceHistogram {
        let mut h = TraceHistogram::new(self.ctx.p() as u32);
        for u in &self.duals {
            h.add(TraceForm::abs_trace_with(self.ctx, c.coeffs(), u));
        }
        h
    }

    pub fn sum(&self, c: &Element) -> ComplexValue {
        self.histogram(c).to_complex_with(&self.roots)
    }

    /// `max |sum|` over all nontrivial twists.
    pub fn max_nontrivial(&self) -> f64 {
        self.ctx
            .elements()
            .skip(1)
            .map(|c| self.sum(&c).abs())
            .fold(0.0, f64::max)
    }
}

/// `sum_{alpha in fiber} psi_c(alpha)` over the norm fiber of `p`.
pub fn coset_sum(ctx: &FieldContext, p: &PrescriptionSystem, c: &Element) -> Result<ComplexValue> {
    let fiber = fiber_elements(ctx, p)?;
    Ok(SetSums::new(ctx, &fiber).sum(c))
}

/// The whole norm fiber of an admissible system.
pub fn fiber_elements(ctx: &FieldContext, p: &PrescriptionSystem) -> Result<Vec<Element>> {
    if let norm_system::Admissibility::No { i, j } = norm_system::admissibility(ctx, p)? {
        return Err(Error::NotAdmissible { i, j });
    }
    let sol = norm_system::solve_prescribed(ctx, p)?;
    Ok(sol.elements(ctx, 0, u64::MAX)?.map(|(_, a)| a).collect())
}

/// `Phi_q(x^n - 1) (#S - W M) / q^n`, a strict lower bound on the number of
/// normal elements in a set `S` whose nontrivial character sums are at most `M`.
pub fn ns_lower_bound(ctx: &FieldContext, set_size: u64, m: f64, fact: &XnFactorization) -> f64 {
    let phi = fq_poly::arith_functions(fact, &fact.full()).unwrap().phi.to_f64().unwrap();
    let w = fq_poly::w_exact(fact).to_f64().unwrap();
    phi * (set_size as f64 - w * m) / ctx.order().to_f64().unwrap()
}

/// `sum_{x in A, y in B} psi_c(x y)` and the bound `(#A #B q^n)^{1/2}`.
pub fn bilinear_sum(ctx: &FieldContext, a: &[Element], b: &[Element], c: &Element) -> (ComplexValue, f64) {
    let mut h = TraceHistogram::new(ctx.p() as u32);
    for x in a {
        let cx = ctx.mul(c, x);
        for y in b {
            h.add(ctx.abs_trace(&ctx.mul(&cx, y)));
        }
    }
    let bound = libm::sqrt(a.len() as f64 * b.len() as f64 * ctx.order().to_f64().unwrap());
    (h.to_complex(), bound)
}

/// `q^{n/2}` as a float, for reporting.
pub fn sqrt_field_order(ctx: &FieldContext) -> f64 {
    libm::sqrt(ctx.order().to_f64().unwrap())
}
