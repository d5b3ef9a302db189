//! The tower `F_p ⊂ F_q ⊂ F_{q^n}` with exact element arithmetic.
//!
//! `F_{q^n} = F_q[x]/(M(x))` where `M` is the least monic irreducible of
//! degree `n` over `F_q` with nonzero constant term (coefficients compared
//! from `x^{n-1}` down, scalars in canonical order). `F_q` itself is built
//! the same way over `F_p`. Both choices make every witness reproducible.
//!
//! A [`FieldContext`] is immutable once built; the canonical primitive
//! element, the factorization of `q^n - 1` and the discrete-log table are
//! computed on first use and cached.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use once_cell::race::OnceBox;

use crate::arith::{self, BigExponent, FactorBudget};
use crate::base_field::BaseField;
use crate::error::{Error, Result};
use crate::upoly::{self, ScalarField};

/// Largest field order for which a full discrete-log table is built.
pub const LOG_TABLE_LIMIT: u64 = 1 << 22;

/// Above this degree Frobenius powers are applied iteratively instead of
/// being cached as matrices.
const FROBENIUS_CACHE_DEGREE: u32 = 64;

/// `q = p^s` with `p` prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimePower {
    pub p: u64,
    pub s: u32,
    pub q: u64,
}

impl PrimePower {
    pub fn new(p: u64, s: u32) -> Result<Self> {
        if s == 0 {
            return Err(Error::DegreeZero);
        }
        if !arith::is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        let q = p.checked_pow(s).ok_or(Error::FieldTooLarge { q: u64::MAX })?;
        Ok(PrimePower { p, s, q })
    }

    pub fn from_q(q: u64) -> Result<Self> {
        let (p, s) = arith::prime_power(q).ok_or(Error::NotAPrimePower(q))?;
        Ok(PrimePower { p, s, q })
    }
}

/// An element of `F_{q^n}`: `n` base-field coefficients (canonical indices),
/// coefficient of `x^i` in position `i`.
///
/// The derived order is the canonical order: lexicographic on the flattened
/// digit vector.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element {
    coeffs: Vec<u32>,
}

impl Element {
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// The base-field value if the element lies in `F_q`.
    pub fn as_base(&self) -> Option<u32> {
        if self.coeffs[1..].iter().all(|&c| c == 0) {
            Some(self.coeffs[0])
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Discrete logarithms to the base of the canonical primitive element.
#[derive(Debug)]
pub struct LogTable {
    /// `log[rank(a)]` for nonzero `a`.
    log: Vec<u32>,
    /// `antilog[k] = rank(theta^k)`.
    antilog: Vec<u32>,
}

impl LogTable {
    pub fn log_of_rank(&self, rank: u64) -> u32 {
        self.log[rank as usize]
    }
    pub fn rank_of_power(&self, k: u64) -> u64 {
        self.antilog[(k % self.antilog.len() as u64) as usize] as u64
    }
}

pub struct FieldContext {
    base: PrimePower,
    n: u32,
    fq: BaseField,
    mod_ext: Vec<u32>,
    /// `frob[i]` maps `x^j` to `(x^j)^{q^i}`, stored row `j` at `[j*n..(j+1)*n]`.
    frob: Vec<Vec<u32>>,
    /// Relative trace `Tr_{q^n/q}(x^j)` for each basis monomial.
    rel_trace_basis: Vec<u32>,
    order: BigUint,
    order_minus_1: BigUint,
    factor_budget: FactorBudget,
    theta: OnceBox<Element>,
    qn_factors: OnceBox<Vec<BigUint>>,
    log_table: OnceBox<LogTable>,
}

impl fmt::Debug for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldContext({self})")
    }
}

impl fmt::Display for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}^{}^{} mod_base={} mod_ext={}",
            self.base.p,
            self.base.s,
            self.n,
            fmt_list(self.fq.modulus()),
            self.format_poly_coeffs(&self.mod_ext)
        )
    }
}

fn fmt_list(xs: &[u32]) -> String {
    let inner: Vec<String> = xs.iter().map(|x| format!("{x}")).collect();
    format!("[{}]", inner.join(","))
}

/// Builds `F_{p^{s n}}` as a tower over `F_{p^s}`.
pub fn build_context(p: u64, s: u32, n: u32) -> Result<FieldContext> {
    FieldContext::new(p, s, n)
}

impl FieldContext {
    pub fn new(p: u64, s: u32, n: u32) -> Result<Self> {
        if n == 0 || s == 0 {
            return Err(Error::DegreeZero);
        }
        let base = PrimePower::new(p, s)?;
        let fq = BaseField::new(p, s)?;
        let mod_ext = upoly::least_irreducible(&fq, n as usize);
        let order = arith::big_pow(base.q, n as u64);
        let order_minus_1 = &order - 1u32;
        let mut ctx = FieldContext {
            base,
            n,
            fq,
            mod_ext,
            frob: Vec::new(),
            rel_trace_basis: Vec::new(),
            order,
            order_minus_1,
            factor_budget: FactorBudget::default(),
            theta: OnceBox::new(),
            qn_factors: OnceBox::new(),
            log_table: OnceBox::new(),
        };
        ctx.init_frobenius();
        Ok(ctx)
    }

    /// Context for `F_{q^n}` given the base order `q`.
    pub fn for_q(q: u64, n: u32) -> Result<Self> {
        let pp = PrimePower::from_q(q)?;
        Self::new(pp.p, pp.s, n)
    }

    pub fn with_factor_budget(mut self, budget: FactorBudget) -> Self {
        self.factor_budget = budget;
        self
    }

    fn init_frobenius(&mut self) {
        let n = self.n as usize;
        let q = self.base.q;
        // Row j of the q-power map: (x^j)^q.
        let x = self.monomial(1);
        let xq = self.pow_u64(&x, q);
        let mut first = vec![0u32; n * n];
        let mut row = self.one();
        for j in 0..n {
            first[j * n..(j + 1) * n].copy_from_slice(&row.coeffs);
            row = self.mul(&row, &xq);
        }
        let mut frob = vec![self.identity_matrix(), first];
        if self.n <= FROBENIUS_CACHE_DEGREE {
            for _ in 2..n {
                let prev = frob.last().unwrap().clone();
                let next = self.compose(&prev, &frob[1]);
                frob.push(next);
            }
        }
        frob.truncate(n.max(1));
        self.frob = frob;
        self.rel_trace_basis = (0..n)
            .map(|j| {
                let xj = self.monomial(j);
                let mut acc = self.zero();
                for i in 0..n {
                    acc = self.add(&acc, &self.frobenius(&xj, i as u64));
                }
                acc.as_base().expect("relative trace lies in F_q")
            })
            .collect();
    }

    fn identity_matrix(&self) -> Vec<u32> {
        let n = self.n as usize;
        let mut m = vec![0u32; n * n];
        for j in 0..n {
            m[j * n + j] = self.fq.one();
        }
        m
    }

    /// Matrix of `a -> second(first(a))` from row-major images.
    fn compose(&self, first: &[u32], second: &[u32]) -> Vec<u32> {
        let n = self.n as usize;
        let mut out = vec![0u32; n * n];
        for j in 0..n {
            let img = self.apply_matrix(second, &first[j * n..(j + 1) * n]);
            out[j * n..(j + 1) * n].copy_from_slice(&img);
        }
        out
    }

    /// Applies an `F_q`-linear map given by the images of the basis `x^j`.
    pub(crate) fn apply_matrix(&self, m: &[u32], a: &[u32]) -> Vec<u32> {
        let n = self.n as usize;
        let k = &self.fq;
        let mut out = vec![0u32; n];
        for (j, &c) in a.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let row = &m[j * n..(j + 1) * n];
            for (o, &r) in out.iter_mut().zip(row) {
                *o = k.add(*o, k.mul(c, r));
            }
        }
        out
    }

    pub fn base(&self) -> PrimePower {
        self.base
    }
    pub fn p(&self) -> u64 {
        self.base.p
    }
    pub fn s(&self) -> u32 {
        self.base.s
    }
    pub fn q(&self) -> u64 {
        self.base.q
    }
    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn fq(&self) -> &BaseField {
        &self.fq
    }
    /// `q^n`.
    pub fn order(&self) -> &BigUint {
        &self.order
    }
    /// `q^n - 1`.
    pub fn order_minus_1(&self) -> &BigUint {
        &self.order_minus_1
    }
    /// `q^n` as a machine integer when it fits.
    pub fn order_u64(&self) -> Option<u64> {
        self.order.to_u64()
    }
    pub fn mod_base(&self) -> &[u32] {
        self.fq.modulus()
    }
    /// Extension modulus over `F_q`, least degree first, monic.
    pub fn mod_ext(&self) -> &[u32] {
        &self.mod_ext
    }

    pub fn zero(&self) -> Element {
        Element { coeffs: vec![0; self.n as usize] }
    }

    pub fn one(&self) -> Element {
        self.from_base(self.fq.one())
    }

    pub fn from_base(&self, c: u32) -> Element {
        let mut coeffs = vec![0; self.n as usize];
        coeffs[0] = c;
        Element { coeffs }
    }

    /// `x^j mod M(x)`.
    pub fn monomial(&self, j: usize) -> Element {
        if j < self.n as usize {
            let mut e = self.zero();
            e.coeffs[j] = self.fq.one();
            e
        } else {
            let mut coeffs = upoly::pow_mod_u64(&self.fq, &[0, self.fq.one()], j as u64, &self.mod_ext);
            coeffs.resize(self.n as usize, 0);
            Element { coeffs }
        }
    }

    /// Validates and wraps a coefficient vector of base-field indices.
    pub fn element(&self, coeffs: Vec<u32>) -> Result<Element> {
        if coeffs.len() != self.n as usize || coeffs.iter().any(|&c| c as u64 >= self.base.q) {
            return Err(Error::ContextMismatch);
        }
        Ok(Element { coeffs })
    }

    /// Element from nested digit lists `[[d_0..d_{s-1}]; n]`.
    pub fn from_digits(&self, digits: &[Vec<u32>]) -> Result<Element> {
        if digits.len() != self.n as usize {
            return Err(Error::Parse(format!("expected {} coefficients", self.n)));
        }
        let coeffs = digits.iter().map(|d| self.fq.from_digits(d)).collect::<Result<Vec<_>>>()?;
        Ok(Element { coeffs })
    }

    pub fn digits(&self, a: &Element) -> Vec<Vec<u32>> {
        a.coeffs.iter().map(|&c| self.fq.digits(c)).collect()
    }

    /// Position of `a` in the canonical order (first coefficient most
    /// significant); requires `q^n < 2^64`.
    pub fn rank(&self, a: &Element) -> u64 {
        a.coeffs.iter().fold(0u64, |acc, &c| acc * self.base.q + c as u64)
    }

    pub fn from_rank(&self, mut r: u64) -> Element {
        let mut coeffs = vec![0u32; self.n as usize];
        for c in coeffs.iter_mut().rev() {
            *c = (r % self.base.q) as u32;
            r /= self.base.q;
        }
        Element { coeffs }
    }

    fn check(&self, a: &Element) -> Result<()> {
        if a.coeffs.len() != self.n as usize {
            return Err(Error::ContextMismatch);
        }
        Ok(())
    }

    pub fn add(&self, a: &Element, b: &Element) -> Element {
        let k = &self.fq;
        Element { coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| k.add(x, y)).collect() }
    }

    pub fn sub(&self, a: &Element, b: &Element) -> Element {
        let k = &self.fq;
        Element { coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| k.sub(x, y)).collect() }
    }

    pub fn neg(&self, a: &Element) -> Element {
        Element { coeffs: a.coeffs.iter().map(|&x| self.fq.neg(x)).collect() }
    }

    /// Multiplies by a base-field scalar.
    pub fn scale(&self, a: &Element, c: u32) -> Element {
        Element { coeffs: a.coeffs.iter().map(|&x| self.fq.mul(x, c)).collect() }
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        let n = self.n as usize;
        let k = &self.fq;
        let mut prod = vec![0u32; 2 * n - 1];
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate() {
                if y != 0 {
                    prod[i + j] = k.add(prod[i + j], k.mul(x, y));
                }
            }
        }
        for i in (n..2 * n - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            let base = i - n;
            for j in 0..n {
                let m = self.mod_ext[j];
                if m != 0 {
                    prod[base + j] = k.sub(prod[base + j], k.mul(c, m));
                }
            }
        }
        prod.truncate(n);
        Element { coeffs: prod }
    }

    pub fn square(&self, a: &Element) -> Element {
        self.mul(a, a)
    }

    pub fn inv(&self, a: &Element) -> Result<Element> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let f = upoly::trim(a.coeffs.clone());
        let inv = upoly::ext_gcd_inverse(&self.fq, &f, &self.mod_ext)
            .expect("nonzero elements are invertible modulo an irreducible");
        let mut coeffs = inv;
        coeffs.resize(self.n as usize, 0);
        Ok(Element { coeffs })
    }

    pub fn div(&self, a: &Element, b: &Element) -> Result<Element> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    /// Checked arithmetic on two elements of this context.
    pub fn arith(&self, a: &Element, b: &Element, op: ArithOp) -> Result<Element> {
        self.check(a)?;
        self.check(b)?;
        match op {
            ArithOp::Add => Ok(self.add(a, b)),
            ArithOp::Sub => Ok(self.sub(a, b)),
            ArithOp::Mul => Ok(self.mul(a, b)),
            ArithOp::Div => self.div(a, b),
        }
    }

    /// `a^e` by square-and-multiply; `0^0 = 1`.
    pub fn pow(&self, a: &Element, e: &BigExponent) -> Element {
        let mut acc = self.one();
        for i in (0..e.bits()).rev() {
            acc = self.square(&acc);
            if e.bit(i) {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }

    pub fn pow_u64(&self, a: &Element, mut e: u64) -> Element {
        let mut acc = self.one();
        let mut b = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            e >>= 1;
            if e > 0 {
                b = self.square(&b);
            }
        }
        acc
    }

    /// `a^{q^i}`, the `i`-th Frobenius image.
    pub fn frobenius(&self, a: &Element, i: u64) -> Element {
        let n = self.n as u64;
        let i = (i % n) as usize;
        if i == 0 {
            return a.clone();
        }
        if i < self.frob.len() {
            return Element { coeffs: self.apply_matrix(&self.frob[i], &a.coeffs) };
        }
        let mut out = a.clone();
        for _ in 0..i {
            out = Element { coeffs: self.apply_matrix(&self.frob[1], &out.coeffs) };
        }
        out
    }

    /// Whether `a` lies in the subfield `F_{q^d}`, i.e. `a^{q^d} = a`.
    pub fn is_in_subfield(&self, a: &Element, d: u32) -> Result<bool> {
        self.check_divisor(d)?;
        Ok(self.frobenius(a, d as u64) == *a)
    }

    pub(crate) fn check_divisor(&self, d: u32) -> Result<()> {
        if d == 0 || self.n % d != 0 {
            return Err(Error::NotADivisor { d, n: self.n });
        }
        Ok(())
    }

    /// `Tr_{q^n/q}(a)` as a base-field index.
    pub fn relative_trace(&self, a: &Element) -> u32 {
        let k = &self.fq;
        a.coeffs
            .iter()
            .zip(&self.rel_trace_basis)
            .fold(0, |acc, (&c, &t)| k.add(acc, k.mul(c, t)))
    }

    /// Absolute trace to `F_p`, as a residue in `[0, p)`.
    pub fn abs_trace(&self, a: &Element) -> u32 {
        self.fq.trace(self.relative_trace(a))
    }

    /// `Tr_{q^n/q}(x^j)` for each `j`.
    pub fn relative_trace_basis(&self) -> &[u32] {
        &self.rel_trace_basis
    }

    /// Prime factorization (with multiplicity) of `q^n - 1`.
    pub fn qn_minus_1_factors(&self) -> Result<&[BigUint]> {
        if let Some(f) = self.qn_factors.get() {
            return Ok(f);
        }
        let factors = factor_qn_minus_1(self.base.q, self.n, &self.factor_budget)?;
        Ok(self.qn_factors.get_or_init(|| Box::new(factors)))
    }

    /// Multiplicative order of a nonzero `a` is exactly `q^n - 1`.
    pub fn is_primitive(&self, a: &Element) -> Result<bool> {
        if a.is_zero() {
            return Ok(false);
        }
        let factors = self.qn_minus_1_factors()?;
        let one = self.one();
        Ok(arith::distinct(factors)
            .iter()
            .all(|r| self.pow(a, &(&self.order_minus_1 / r)) != one))
    }

    /// The canonically least element of multiplicative order `q^n - 1`.
    pub fn canonical_primitive(&self) -> Result<&Element> {
        if let Some(t) = self.theta.get() {
            return Ok(t);
        }
        let distinct = arith::distinct(self.qn_minus_1_factors()?);
        let cofactors: Vec<BigUint> = distinct.iter().map(|r| &self.order_minus_1 / r).collect();
        let one = self.one();
        let mut candidate = self.zero();
        let theta = loop {
            if !self.increment(&mut candidate) {
                unreachable!("F_{{q^n}}^* is cyclic");
            }
            if cofactors.iter().all(|c| self.pow(&candidate, c) != one) {
                break candidate;
            }
        };
        Ok(self.theta.get_or_init(|| Box::new(theta)))
    }

    /// Advances to the next element in canonical order; false on wrap-around.
    pub fn increment(&self, a: &mut Element) -> bool {
        let q = self.base.q as u32;
        for c in a.coeffs.iter_mut().rev() {
            *c += 1;
            if *c < q {
                return true;
            }
            *c = 0;
        }
        false
    }

    /// Iterator over every element in canonical order.
    pub fn elements(&self) -> ElementIter<'_> {
        ElementIter { ctx: self, next: Some(self.zero()) }
    }

    /// Discrete-log table for fields with at most [`LOG_TABLE_LIMIT`] elements.
    pub fn log_table(&self) -> Result<Option<&LogTable>> {
        let size = match self.order_u64() {
            Some(s) if s <= LOG_TABLE_LIMIT => s,
            _ => return Ok(None),
        };
        if let Some(t) = self.log_table.get() {
            return Ok(Some(t));
        }
        let theta = self.canonical_primitive()?.clone();
        let mut log = vec![0u32; size as usize];
        let mut antilog = vec![0u32; (size - 1) as usize];
        let mut x = self.one();
        for k in 0..size - 1 {
            let r = self.rank(&x);
            log[r as usize] = k as u32;
            antilog[k as usize] = r as u32;
            x = self.mul(&x, &theta);
        }
        Ok(Some(self.log_table.get_or_init(|| Box::new(LogTable { log, antilog }))))
    }

    /// `theta^k` for the canonical primitive `theta`.
    pub fn theta_pow(&self, k: &BigUint) -> Result<Element> {
        let theta = self.canonical_primitive()?;
        let k = k % &self.order_minus_1;
        if let Some(table) = self.log_table()? {
            return Ok(self.from_rank(table.rank_of_power(k.to_u64().unwrap_or(0))));
        }
        Ok(self.pow(theta, &k))
    }

    /// Textual form `[[d,..],..]`, coefficients least significant first.
    pub fn format_element(&self, a: &Element) -> String {
        let parts: Vec<String> = a.coeffs.iter().map(|&c| fmt_list(&self.fq.digits(c))).collect();
        format!("[{}]", parts.join(","))
    }

    /// Polynomial over `F_q` as `[[..],..]`, least degree first.
    pub fn format_poly_coeffs(&self, coeffs: &[u32]) -> String {
        let parts: Vec<String> = coeffs.iter().map(|&c| fmt_list(&self.fq.digits(c))).collect();
        format!("[{}]", parts.join(","))
    }

    /// Parses an element literal: nested digit lists, `g^k` (a power of the
    /// canonical primitive element), or a prime-field integer such as `1`.
    pub fn parse_element(&self, text: &str) -> Result<Element> {
        let t = text.trim();
        if let Some(exp) = t.strip_prefix("g^") {
            let k = BigUint::parse_bytes(exp.trim().as_bytes(), 10)
                .ok_or_else(|| Error::Parse(format!("bad exponent in {t:?}")))?;
            return self.theta_pow(&k);
        }
        if t == "g" {
            return Ok(self.canonical_primitive()?.clone());
        }
        if t.starts_with('[') {
            let digits = parse_nested(t)?;
            return self.from_digits(&digits);
        }
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t),
        };
        let v: u64 = body.parse().map_err(|_| Error::Parse(format!("unrecognised element literal {t:?}")))?;
        let c = self.fq.from_prime((v % self.base.p) as u32);
        let c = if neg { self.fq.neg(c) } else { c };
        Ok(self.from_base(c))
    }
}

pub struct ElementIter<'a> {
    ctx: &'a FieldContext,
    next: Option<Element>,
}

impl Iterator for ElementIter<'_> {
    type Item = Element;
    fn next(&mut self) -> Option<Element> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        if self.ctx.increment(&mut succ) {
            self.next = Some(succ);
        }
        Some(cur)
    }
}

/// Parses `[[1,0],[0,1]]` into digit lists.
fn parse_nested(t: &str) -> Result<Vec<Vec<u32>>> {
    let bad = || Error::Parse(format!("malformed element literal {t:?}"));
    let inner = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(bad)?;
    let mut out = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let open = rest.strip_prefix('[').ok_or_else(bad)?;
        let close = open.find(']').ok_or_else(bad)?;
        let digits = open[..close]
            .split(',')
            .map(|d| d.trim().parse::<u32>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        out.push(digits);
        rest = open[close + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
        } else if !rest.is_empty() {
            return Err(bad());
        }
    }
    Ok(out)
}

/// Factors `q^n - 1` through its cyclotomic pieces `Phi_d(q)`, `d | n`.
pub fn factor_qn_minus_1(q: u64, n: u32, budget: &FactorBudget) -> Result<Vec<BigUint>> {
    let mut out = Vec::new();
    for d in arith::divisors(n as u64) {
        let piece = cyclotomic_value(q, d);
        out.extend(arith::factor_integer(&piece, budget)?);
    }
    out.sort();
    Ok(out)
}

/// `Phi_d(q)` as a big integer.
pub fn cyclotomic_value(q: u64, d: u64) -> BigUint {
    // Phi_d(q) = prod_{e | d} (q^e - 1)^{mu(d/e)}
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for e in arith::divisors(d) {
        let term = arith::big_pow(q, e) - 1u32;
        match mobius(d / e) {
            1 => num *= term,
            -1 => den *= term,
            _ => {}
        }
    }
    debug_assert!((&num % &den).is_zero());
    num / den
}

pub fn mobius(n: u64) -> i32 {
    let f = arith::factor_u64(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}
