//! Dense univariate polynomials over a small scalar field, coefficients
//! stored least degree first as canonical `u32` indices.
//!
//! These helpers back both levels of the tower (moduli over `F_p` and
//! `F_q`) and the [`FqPoly`](crate::fq_poly::FqPoly) wrapper. Every
//! function returns trimmed vectors; the zero polynomial is the empty vector.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;

/// Arithmetic of a finite field whose elements are encoded as `u32`
/// indices with `0` the additive identity.
pub trait ScalarField {
    fn order(&self) -> u64;
    fn characteristic(&self) -> u64;
    fn one(&self) -> u32;
    fn add(&self, a: u32, b: u32) -> u32;
    fn neg(&self, a: u32) -> u32;
    fn mul(&self, a: u32, b: u32) -> u32;
    /// Multiplicative inverse; `a` must be nonzero.
    fn inv(&self, a: u32) -> u32;

    fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }
}

/// `F_p` for a prime `p < 2^31`, elements are residues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    pub p: u32,
}

impl ScalarField for PrimeField {
    fn order(&self) -> u64 {
        self.p as u64
    }
    fn characteristic(&self) -> u64 {
        self.p as u64
    }
    fn one(&self) -> u32 {
        1 % self.p
    }
    fn add(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.p as u64) as u32
    }
    fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }
    fn inv(&self, a: u32) -> u32 {
        assert!(a != 0, "inverse of zero");
        crate::arith::pow_mod_u64(a as u64, self.p as u64 - 2, self.p as u64) as u32
    }
}

pub fn trim(mut f: Vec<u32>) -> Vec<u32> {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

/// Degree, `None` for the zero polynomial.
pub fn degree(f: &[u32]) -> Option<usize> {
    f.iter().rposition(|&c| c != 0)
}

pub fn add<F: ScalarField>(k: &F, f: &[u32], g: &[u32]) -> Vec<u32> {
    let len = f.len().max(g.len());
    let out = (0..len)
        .map(|i| k.add(*f.get(i).unwrap_or(&0), *g.get(i).unwrap_or(&0)))
        .collect();
    trim(out)
}

pub fn sub<F: ScalarField>(k: &F, f: &[u32], g: &[u32]) -> Vec<u32> {
    let len = f.len().max(g.len());
    let out = (0..len)
        .map(|i| k.sub(*f.get(i).unwrap_or(&0), *g.get(i).unwrap_or(&0)))
        .collect();
    trim(out)
}

pub fn scale<F: ScalarField>(k: &F, f: &[u32], c: u32) -> Vec<u32> {
    trim(f.iter().map(|&a| k.mul(a, c)).collect())
}

pub fn mul<F: ScalarField>(k: &F, f: &[u32], g: &[u32]) -> Vec<u32> {
    if f.is_empty() || g.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u32; f.len() + g.len() - 1];
    for (i, &a) in f.iter().enumerate() {
        if a == 0 {
            continue;
        }
        for (j, &b) in g.iter().enumerate() {
            out[i + j] = k.add(out[i + j], k.mul(a, b));
        }
    }
    trim(out)
}

/// Quotient and remainder; `g` must be nonzero.
pub fn divrem<F: ScalarField>(k: &F, f: &[u32], g: &[u32]) -> (Vec<u32>, Vec<u32>) {
    let dg = degree(g).expect("division by the zero polynomial");
    let mut r = trim(f.to_vec());
    if r.len() <= dg {
        return (Vec::new(), r);
    }
    let lead_inv = k.inv(g[dg]);
    let mut quot = vec![0u32; r.len() - dg];
    while let Some(dr) = degree(&r) {
        if dr < dg {
            break;
        }
        let c = k.mul(r[dr], lead_inv);
        let shift = dr - dg;
        quot[shift] = c;
        for (j, &gj) in g[..=dg].iter().enumerate() {
            r[shift + j] = k.sub(r[shift + j], k.mul(c, gj));
        }
        r.truncate(dr);
        r = trim(r);
    }
    (trim(quot), r)
}

pub fn rem<F: ScalarField>(k: &F, f: &[u32], g: &[u32]) -> Vec<u32> {
    divrem(k, f, g).1
}

pub fn monic<F: ScalarField>(k: &F, f: &[u32]) -> Vec<u32> {
    match degree(f) {
        None => Vec::new(),
        Some(d) => scale(k, &f[..=d], k.inv(f[d])),
    }
}

/// Monic gcd; `None` when both inputs are zero.
pub fn gcd<F: ScalarField>(k: &F, f: &[u32], g: &[u32]) -> Option<Vec<u32>> {
    let mut a = trim(f.to_vec());
    let mut b = trim(g.to_vec());
    if a.is_empty() && b.is_empty() {
        return None;
    }
    while !b.is_empty() {
        let r = rem(k, &a, &b);
        a = b;
        b = r;
    }
    Some(monic(k, &a))
}

/// Inverse of `f` modulo `m`, or `None` when they are not coprime.
pub fn ext_gcd_inverse<F: ScalarField>(k: &F, f: &[u32], m: &[u32]) -> Option<Vec<u32>> {
    let (mut r0, mut r1) = (trim(m.to_vec()), rem(k, f, m));
    let (mut s0, mut s1): (Vec<u32>, Vec<u32>) = (Vec::new(), vec![k.one()]);
    while !r1.is_empty() {
        let (q, r) = divrem(k, &r0, &r1);
        let s2 = sub(k, &s0, &mul(k, &q, &s1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s2;
    }
    // r0 = s0 * f (mod m)
    if degree(&r0) != Some(0) {
        return None;
    }
    let c = k.inv(r0[0]);
    Some(scale(k, &s0, c))
}

pub fn mul_mod<F: ScalarField>(k: &F, f: &[u32], g: &[u32], m: &[u32]) -> Vec<u32> {
    rem(k, &mul(k, f, g), m)
}

pub fn pow_mod_u64<F: ScalarField>(k: &F, base: &[u32], mut e: u64, m: &[u32]) -> Vec<u32> {
    let mut acc = rem(k, &[k.one()], m);
    let mut b = rem(k, base, m);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(k, &acc, &b, m);
        }
        b = mul_mod(k, &b, &b, m);
        e >>= 1;
    }
    acc
}

pub fn pow_mod_big<F: ScalarField>(k: &F, base: &[u32], e: &BigUint, m: &[u32]) -> Vec<u32> {
    let mut acc = rem(k, &[k.one()], m);
    let b = rem(k, base, m);
    for i in (0..e.bits()).rev() {
        acc = mul_mod(k, &acc, &acc, m);
        if e.bit(i) {
            acc = mul_mod(k, &acc, &b, m);
        }
    }
    acc
}

/// Formal derivative.
pub fn derivative<F: ScalarField>(k: &F, f: &[u32]) -> Vec<u32> {
    let p = k.characteristic();
    let out = f
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| {
            let times = (i as u64 % p) as u32;
            let mut acc = 0;
            for _ in 0..times {
                acc = k.add(acc, c);
            }
            acc
        })
        .collect();
    trim(out)
}

/// Rabin's irreducibility test for a monic `f` of degree `n >= 1`.
pub fn is_irreducible<F: ScalarField>(k: &F, f: &[u32]) -> bool {
    let n = match degree(f) {
        Some(0) | None => return false,
        Some(d) => d as u64,
    };
    if n == 1 {
        return true;
    }
    let q = k.order();
    let x = vec![0, k.one()];
    // powers[i] = x^{q^i} mod f for i = 0..=n
    let mut powers = Vec::with_capacity(n as usize + 1);
    powers.push(rem(k, &x, f));
    for i in 1..=n as usize {
        let next = pow_mod_u64(k, &powers[i - 1], q, f);
        powers.push(next);
    }
    if powers[n as usize] != rem(k, &x, f) {
        return false;
    }
    for (r, _) in crate::arith::factor_u64(n) {
        let h = sub(k, &powers[(n / r) as usize], &x);
        match gcd(k, &h, f) {
            Some(g) if g.len() == 1 => {}
            _ => return false,
        }
    }
    true
}

/// Least monic irreducible of degree `n` with nonzero constant term, where
/// candidates are ordered by their coefficient tuple read from the
/// most-significant non-leading coefficient down, scalars by index.
pub fn least_irreducible<F: ScalarField>(k: &F, n: usize) -> Vec<u32> {
    let q = k.order();
    let mut coeffs = vec![0u32; n + 1];
    coeffs[n] = k.one();
    // Odometer over (c_{n-1}, ..., c_0) with c_0 least significant.
    coeffs[0] = 1;
    loop {
        if is_irreducible(k, &coeffs) {
            return coeffs;
        }
        let mut i = 0;
        loop {
            assert!(i < n, "no irreducible polynomial found");
            coeffs[i] += 1;
            if (coeffs[i] as u64) < q {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
        if coeffs[0] == 0 {
            coeffs[0] = 1;
        }
    }
}
