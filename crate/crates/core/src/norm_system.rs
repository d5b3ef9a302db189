//! Norms onto intermediate subfields and prescribed-norm systems.
//!
//! An element with prescribed norms `N_{n/d_i}(alpha) = a_i` is `theta^s` for
//! `s ≡ t_i (mod q^{d_i} - 1)`, where `a_i = eta_i^{t_i}` and
//! `eta_i = theta^{(q^n - 1)/(q^{d_i} - 1)}`. The solutions form a single
//! residue class modulo `L = lcm(q^{d_i} - 1)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith;
use crate::error::{Error, Result};
use crate::field_tower::{Element, FieldContext};
use crate::normality::NormalityTester;

/// Strictly increasing proper divisors of `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DivisorTuple {
    d: Vec<u32>,
    relaxed: bool,
}

impl DivisorTuple {
    /// A member of `Gamma_k(n)`: no entry divides another.
    pub fn new(n: u32, d: Vec<u32>) -> Result<Self> {
        let t = Self::relaxed(n, d)?;
        for i in 0..t.d.len() {
            for j in i + 1..t.d.len() {
                if t.d[j] % t.d[i] == 0 {
                    return Err(Error::InvalidTuple(format!("{} divides {}", t.d[i], t.d[j])));
                }
            }
        }
        Ok(DivisorTuple { relaxed: false, ..t })
    }

    /// Drops the antichain requirement.
    pub fn relaxed(n: u32, d: Vec<u32>) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::InvalidTuple("empty tuple".into()));
        }
        for (i, &di) in d.iter().enumerate() {
            if di == 0 || n % di != 0 {
                return Err(Error::InvalidTuple(format!("{di} does not divide {n}")));
            }
            if di >= n {
                return Err(Error::InvalidTuple(format!("{di} is not a proper divisor of {n}")));
            }
            if i > 0 && d[i - 1] >= di {
                return Err(Error::InvalidTuple("divisors must be strictly increasing".into()));
            }
        }
        Ok(DivisorTuple { d, relaxed: true })
    }

    pub fn divisors(&self) -> &[u32] {
        &self.d
    }
    pub fn k(&self) -> usize {
        self.d.len()
    }
    pub fn is_relaxed(&self) -> bool {
        self.relaxed
    }
    pub fn lcm(&self) -> u64 {
        self.d.iter().fold(1, |acc, &d| arith::lcm_u64(acc, d as u64))
    }
    pub fn product(&self) -> u64 {
        self.d.iter().map(|&d| d as u64).product()
    }
    pub fn is_pairwise_coprime(&self) -> bool {
        (0..self.d.len())
            .all(|i| (i + 1..self.d.len()).all(|j| arith::gcd_u64(self.d[i] as u64, self.d[j] as u64) == 1))
    }
}

/// Admissibility tri-state; `No` carries the first violated pair (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admissibility {
    Yes,
    No { i: usize, j: usize },
    Unchecked,
}

/// Divisor tuple with prescribed norm values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrescriptionSystem {
    pub d: DivisorTuple,
    pub a: Vec<Element>,
    pub admissible: Admissibility,
}

impl PrescriptionSystem {
    /// Validates that each `a_i` is a nonzero element of `F_{q^{d_i}}`.
    pub fn new(ctx: &FieldContext, d: DivisorTuple, a: Vec<Element>) -> Result<Self> {
        if a.len() != d.k() {
            return Err(Error::InvalidTuple(format!("{} divisors but {} norm values", d.k(), a.len())));
        }
        for (ai, &di) in a.iter().zip(d.divisors()) {
            if ai.coeffs().len() != ctx.n() as usize {
                return Err(Error::ContextMismatch);
            }
            if ai.is_zero() {
                return Err(Error::InvalidTuple("prescribed norms must be nonzero".into()));
            }
            if !ctx.is_in_subfield(ai, di)? {
                return Err(Error::NotInSubfield { d: di });
            }
        }
        Ok(PrescriptionSystem { d, a, admissible: Admissibility::Unchecked })
    }

    /// All prescribed norms equal to 1.
    pub fn ones(ctx: &FieldContext, d: DivisorTuple) -> Self {
        let a = vec![ctx.one(); d.k()];
        PrescriptionSystem { d, a, admissible: Admissibility::Unchecked }
    }
}

/// `(q^n - 1)/(q^d - 1)`.
pub fn norm_exponent(q: u64, n: u32, d: u32) -> BigUint {
    (arith::big_pow(q, n as u64) - 1u32) / (arith::big_pow(q, d as u64) - 1u32)
}

/// `N_{n/d}(a)`, as the product of the conjugates `a^{q^{d i}}`.
pub fn norm_to(ctx: &FieldContext, a: &Element, d: u32) -> Result<Element> {
    ctx.check_divisor(d)?;
    let mut acc = a.clone();
    let mut conj = a.clone();
    for _ in 1..ctx.n() / d {
        conj = ctx.frobenius(&conj, d as u64);
        acc = ctx.mul(&acc, &conj);
    }
    Ok(acc)
}

/// Relative norm `N_{d/e}(a) = a^{(q^d - 1)/(q^e - 1)}` for `a` in `F_{q^d}`.
pub fn norm_rel(ctx: &FieldContext, a: &Element, d: u32, e: u32) -> Result<Element> {
    ctx.check_divisor(d)?;
    if e == 0 || d % e != 0 {
        return Err(Error::NotADivisor { d: e, n: d });
    }
    if !ctx.is_in_subfield(a, d)? {
        return Err(Error::NotInSubfield { d });
    }
    let mut acc = a.clone();
    let mut conj = a.clone();
    for _ in 1..d / e {
        conj = ctx.frobenius(&conj, e as u64);
        acc = ctx.mul(&acc, &conj);
    }
    Ok(acc)
}

/// Evaluates the pairwise gluing condition.
pub fn admissibility(ctx: &FieldContext, p: &PrescriptionSystem) -> Result<Admissibility> {
    let d = p.d.divisors();
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let g = arith::gcd_u64(d[i] as u64, d[j] as u64) as u32;
            if norm_rel(ctx, &p.a[i], d[i], g)? != norm_rel(ctx, &p.a[j], d[j], g)? {
                return Ok(Admissibility::No { i, j });
            }
        }
    }
    Ok(Admissibility::Yes)
}

/// Sets and returns the admissibility of `p`.
pub fn check_admissible(ctx: &FieldContext, p: &mut PrescriptionSystem) -> Result<bool> {
    p.admissible = admissibility(ctx, p)?;
    Ok(p.admissible == Admissibility::Yes)
}

/// `Gamma_k(n)` in lexicographic order.
pub fn enumerate_gamma(n: u32, k: usize) -> Vec<DivisorTuple> {
    let proper: Vec<u32> = arith::divisors(n as u64)
        .into_iter()
        .map(|d| d as u32)
        .filter(|&d| d < n)
        .collect();
    let mut out = Vec::new();
    let mut stack = Vec::new();
    fn rec(proper: &[u32], start: usize, k: usize, stack: &mut Vec<u32>, out: &mut Vec<DivisorTuple>) {
        if stack.len() == k {
            out.push(DivisorTuple { d: stack.clone(), relaxed: false });
            return;
        }
        for idx in start..proper.len() {
            let c = proper[idx];
            if stack.iter().all(|&s| c % s != 0) {
                stack.push(c);
                rec(proper, idx + 1, k, stack, out);
                stack.pop();
            }
        }
    }
    if k > 0 {
        rec(&proper, 0, k, &mut stack, &mut out);
    }
    out
}

/// `gcd_i (q^n - 1)/(q^{d_i} - 1)`.
pub fn fiber_count(q: u64, n: u32, d: &DivisorTuple) -> BigUint {
    d.divisors()
        .iter()
        .map(|&di| norm_exponent(q, n, di))
        .reduce(|a, b| a.gcd(&b))
        .expect("tuple is nonempty")
}

/// `(q^n - 1) / lcm_i (q^{d_i} - 1)`.
pub fn fiber_count_lcm(q: u64, n: u32, d: &DivisorTuple) -> BigUint {
    (arith::big_pow(q, n as u64) - 1u32) / moduli_lcm(q, d)
}

/// `(q^n - 1)(q - 1)^{k-1} / prod (q^{d_i} - 1)` for pairwise coprime `d_i`.
pub fn fiber_count_coprime(q: u64, n: u32, d: &DivisorTuple) -> Option<BigUint> {
    if !d.is_pairwise_coprime() {
        return None;
    }
    let num = (arith::big_pow(q, n as u64) - 1u32) * BigUint::from(q - 1).pow(d.k() as u32 - 1);
    let den: BigUint = d.divisors().iter().map(|&di| arith::big_pow(q, di as u64) - 1u32).product();
    Some(num / den)
}

fn moduli_lcm(q: u64, d: &DivisorTuple) -> BigUint {
    d.divisors()
        .iter()
        .map(|&di| arith::big_pow(q, di as u64) - 1u32)
        .fold(BigUint::one(), |a, b| a.lcm(&b))
}

/// Solution family `theta^{s0 + j L}`, `0 <= j < count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberSolution {
    pub t: Vec<BigUint>,
    pub moduli: Vec<BigUint>,
    pub s0: BigUint,
    pub l: BigUint,
    pub count: BigUint,
}

impl FiberSolution {
    pub fn exponent(&self, j: &BigUint) -> BigUint {
        &self.s0 + j * &self.l
    }

    pub fn element(&self, ctx: &FieldContext, j: &BigUint) -> Result<Element> {
        ctx.theta_pow(&self.exponent(j))
    }

    /// The fiber elements with `j` in `[lo, hi)`, generated multiplicatively.
    pub fn elements<'a>(&self, ctx: &'a FieldContext, lo: u64, hi: u64) -> Result<FiberIter<'a>> {
        let start = self.element(ctx, &BigUint::from(lo))?;
        let step = ctx.theta_pow(&self.l)?;
        let hi = self.count.to_u64().map_or(hi, |c| hi.min(c));
        Ok(FiberIter { ctx, cur: start, step, j: lo, hi })
    }
}

pub struct FiberIter<'a> {
    ctx: &'a FieldContext,
    cur: Element,
    step: Element,
    j: u64,
    hi: u64,
}

impl Iterator for FiberIter<'_> {
    type Item = (u64, Element);
    fn next(&mut self) -> Option<(u64, Element)> {
        if self.j >= self.hi {
            return None;
        }
        let next = self.ctx.mul(&self.cur, &self.step);
        let out = (self.j, core::mem::replace(&mut self.cur, next));
        self.j += 1;
        Some(out)
    }
}

const DLOG_SCAN_LIMIT: u64 = 1 << 22;
const BSGS_PRIME_LIMIT: u64 = 1 << 44;

/// `t` with `eta^t = a`, `eta = theta^{(q^n - 1)/(q^d - 1)}`, for nonzero
/// `a` in `F_{q^d}`.
pub fn discrete_log(ctx: &FieldContext, a: &Element, d: u32) -> Result<BigUint> {
    ctx.check_divisor(d)?;
    if a.is_zero() {
        return Err(Error::DivisionByZero);
    }
    if !ctx.is_in_subfield(a, d)? {
        return Err(Error::NotInSubfield { d });
    }
    let order = arith::big_pow(ctx.q(), d as u64) - 1u32;
    let cof = norm_exponent(ctx.q(), ctx.n(), d);
    if let Some(table) = ctx.log_table()? {
        let l = table.log_of_rank(ctx.rank(a)) as u64;
        let cof = cof.to_u64().expect("small field");
        debug_assert_eq!(l % cof, 0);
        return Ok(BigUint::from(l / cof));
    }
    let eta = ctx.theta_pow(&cof)?;
    if let Some(m) = order.to_u64().filter(|&m| m <= DLOG_SCAN_LIMIT) {
        let mut x = ctx.one();
        for t in 0..m {
            if x == *a {
                return Ok(BigUint::from(t));
            }
            x = ctx.mul(&x, &eta);
        }
        unreachable!("eta generates F_{{q^d}}^*");
    }
    pohlig_hellman(ctx, a, &eta, &order)
}

fn pohlig_hellman(ctx: &FieldContext, a: &Element, eta: &Element, order: &BigUint) -> Result<BigUint> {
    // Primes of q^d - 1 are among those of q^n - 1.
    let mut prime_powers: Vec<(BigUint, u32)> = Vec::new();
    let mut rest = order.clone();
    for r in arith::distinct(ctx.qn_minus_1_factors()?) {
        let mut e = 0;
        while (&rest % &r).is_zero() {
            rest /= &r;
            e += 1;
        }
        if e > 0 {
            prime_powers.push((r, e));
        }
    }
    debug_assert!(rest.is_one());
    let mut residues = Vec::new();
    for (r, e) in &prime_powers {
        let r_u64 = r.to_u64().filter(|&r| r <= BSGS_PRIME_LIMIT).ok_or(Error::DiscreteLogBudget)?;
        let gamma = ctx.pow(eta, &(order / r));
        let eta_inv = ctx.inv(eta)?;
        let mut x = BigUint::zero();
        let mut rk = BigUint::one();
        for _ in 0..*e {
            let shifted = ctx.mul(a, &ctx.pow(&eta_inv, &x));
            let h = ctx.pow(&shifted, &(order / (&rk * r)));
            let dk = bsgs(ctx, &gamma, &h, r_u64)?;
            x += &rk * dk;
            rk *= r;
        }
        residues.push((x, rk));
    }
    let (mut acc, mut m) = (BigUint::zero(), BigUint::one());
    for (x, rk) in residues {
        let (s, l) = crt_pair(&acc, &m, &x, &rk).expect("coprime moduli");
        acc = s;
        m = l;
    }
    Ok(acc)
}

/// Baby-step giant-step in a cyclic group of prime order `r`.
fn bsgs(ctx: &FieldContext, g: &Element, h: &Element, r: u64) -> Result<u64> {
    let m = libm::sqrt(r as f64) as u64 + 1;
    let mut baby = BTreeMap::new();
    let mut x = ctx.one();
    for j in 0..m {
        baby.entry(x.clone()).or_insert(j);
        x = ctx.mul(&x, g);
    }
    let giant = ctx.inv(&ctx.pow_u64(g, m))?;
    let mut y = h.clone();
    for i in 0..=m {
        if let Some(&j) = baby.get(&y) {
            return Ok((i * m + j) % r);
        }
        y = ctx.mul(&y, &giant);
    }
    Err(Error::DiscreteLogBudget)
}

/// Merges `x ≡ r1 (mod m1)` and `x ≡ r2 (mod m2)`; `None` when inconsistent.
/// Returns the least nonnegative solution and `lcm(m1, m2)`.
pub fn crt_pair(r1: &BigUint, m1: &BigUint, r2: &BigUint, m2: &BigUint) -> Option<(BigUint, BigUint)> {
    let (r1i, m1i) = (BigInt::from(r1.clone()), BigInt::from(m1.clone()));
    let (r2i, m2i) = (BigInt::from(r2.clone()), BigInt::from(m2.clone()));
    let eg = m1i.extended_gcd(&m2i);
    let g = eg.gcd;
    let diff = &r2i - &r1i;
    if !(&diff % &g).is_zero() {
        return None;
    }
    let m2g = &m2i / &g;
    let k = ((&diff / &g) * eg.x).mod_floor(&m2g);
    let l = &m1i * &m2g;
    let x = (r1i + m1i * k).mod_floor(&l);
    let to_u = |v: BigInt| v.to_biguint().expect("nonnegative");
    debug_assert_ne!(x.sign(), Sign::Minus);
    Some((to_u(x), to_u(l)))
}

/// Solves the norm congruences by discrete logs and the generalized CRT.
pub fn solve_prescribed(ctx: &FieldContext, p: &PrescriptionSystem) -> Result<FiberSolution> {
    let q = ctx.q();
    let d = p.d.divisors();
    let moduli: Vec<BigUint> = d.iter().map(|&di| arith::big_pow(q, di as u64) - 1u32).collect();
    let t = p
        .a
        .iter()
        .zip(d)
        .map(|(ai, &di)| discrete_log(ctx, ai, di))
        .collect::<Result<Vec<_>>>()?;
    // pairwise consistency: t_i ≡ t_j (mod q^{gcd(d_i, d_j)} - 1)
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let g = moduli[i].gcd(&moduli[j]);
            if &t[i] % &g != &t[j] % &g {
                return Err(Error::NotAdmissible { i, j });
            }
        }
    }
    let (mut s0, mut l) = (t[0].clone(), moduli[0].clone());
    for i in 1..d.len() {
        let (s, m) = crt_pair(&s0, &l, &t[i], &moduli[i]).expect("pairwise consistent");
        s0 = s;
        l = m;
    }
    let count = ctx.order_minus_1() / &l;
    Ok(FiberSolution { t, moduli, s0, l, count })
}

/// A normal element with the prescribed norms, `theta^{s0 + j L}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub j: u64,
    pub exponent: BigUint,
    pub element: Element,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchResult {
    Found(Witness),
    /// The whole fiber was scanned without finding a normal element.
    NotFound { scanned: u64 },
}

/// Least `j` in `[lo, hi)` whose fiber element is normal.
pub fn scan_fiber(
    ctx: &FieldContext,
    sol: &FiberSolution,
    tester: &NormalityTester,
    lo: u64,
    hi: u64,
) -> Result<Option<Witness>> {
    for (j, a) in sol.elements(ctx, lo, hi)? {
        if tester.is_normal(ctx, &a) {
            return Ok(Some(Witness { j, exponent: sol.exponent(&BigUint::from(j)), element: a }));
        }
    }
    Ok(None)
}

/// Scans the fiber in order of `j` for a normal element. Fibers of at most
/// `budget` elements are scanned completely; larger fibers that yield no
/// witness in the first `budget` steps give `BudgetExceeded`.
pub fn find_normal_prescribed(ctx: &FieldContext, p: &PrescriptionSystem, budget: u64) -> Result<SearchResult> {
    let tester = NormalityTester::for_context(ctx);
    find_normal_with(ctx, p, &tester, budget)
}

pub fn find_normal_with(
    ctx: &FieldContext,
    p: &PrescriptionSystem,
    tester: &NormalityTester,
    budget: u64,
) -> Result<SearchResult> {
    if let Admissibility::No { i, j } = admissibility(ctx, p)? {
        return Err(Error::NotAdmissible { i, j });
    }
    let sol = solve_prescribed(ctx, p)?;
    let complete = sol.count.to_u64().filter(|&c| c <= budget);
    let hi = complete.unwrap_or(budget);
    match scan_fiber(ctx, &sol, tester, 0, hi)? {
        Some(w) => Ok(SearchResult::Found(w)),
        None if complete.is_some() => Ok(SearchResult::NotFound { scanned: hi }),
        None => Err(Error::BudgetExceeded { budget }),
    }
}
