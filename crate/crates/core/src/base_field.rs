//! The base field `F_q = F_p[t]/(m(t))`, table driven.
//!
//! An element is a digit vector `[d_0, ..., d_{s-1}]` (coefficient of
//! `t^j` in position `j`). Its index packs the digits with `d_0` most
//! significant, so comparing indices compares digit vectors
//! lexicographically, which is the canonical order.

use alloc::vec;
use alloc::vec::Vec;

use crate::arith;
use crate::error::{Error, Result};
use crate::upoly::{self, PrimeField, ScalarField};

/// Largest supported base-field order.
pub const MAX_BASE_ORDER: u64 = 1 << 16;

const ADD_TABLE_LIMIT: u32 = 512;

#[derive(Debug, Clone)]
pub struct BaseField {
    p: u32,
    s: u32,
    q: u32,
    modulus: Vec<u32>,
    /// Weight of digit `j` in the index: `p^{s-1-j}`.
    weights: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    neg: Vec<u32>,
    add_table: Option<Vec<u16>>,
    trace: Vec<u32>,
    generator: u32,
}

impl BaseField {
    /// Builds `F_{p^s}` over the least monic irreducible of degree `s`.
    pub fn new(p: u64, s: u32) -> Result<Self> {
        if s == 0 {
            return Err(Error::DegreeZero);
        }
        if !arith::is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        let q = arith::checked_pow(p, s).filter(|&q| q <= MAX_BASE_ORDER);
        let q = match q {
            Some(q) => q as u32,
            None => return Err(Error::FieldTooLarge { q: p.saturating_pow(s) }),
        };
        let p = p as u32;
        let fp = PrimeField { p };
        let modulus = upoly::least_irreducible(&fp, s as usize);
        let weights: Vec<u32> = (0..s).map(|j| p.pow(s - 1 - j)).collect();

        let to_digits = |mut x: u32| -> Vec<u32> {
            let mut d = vec![0u32; s as usize];
            for j in (0..s as usize).rev() {
                d[j] = x % p;
                x /= p;
            }
            d
        };
        let from_digits = |d: &[u32]| -> u32 { d.iter().zip(&weights).map(|(a, w)| a * w).sum() };
        let mul_digits = |a: u32, b: u32| -> u32 {
            let prod = upoly::mul_mod(&fp, &upoly::trim(to_digits(a)), &upoly::trim(to_digits(b)), &modulus);
            let mut d = prod;
            d.resize(s as usize, 0);
            from_digits(&d)
        };
        let one = from_digits(&{
            let mut d = vec![0u32; s as usize];
            d[0] = 1 % p;
            d
        });

        // Least element (by index) of multiplicative order q - 1.
        let order = (q - 1) as u64;
        let primes: Vec<u64> = arith::factor_u64(order).into_iter().map(|(r, _)| r).collect();
        let pow_digits = |a: u32, mut e: u64| -> u32 {
            let mut acc = one;
            let mut b = a;
            while e > 0 {
                if e & 1 == 1 {
                    acc = mul_digits(acc, b);
                }
                b = mul_digits(b, b);
                e >>= 1;
            }
            acc
        };
        let generator = (1..q)
            .find(|&g| primes.iter().all(|&r| pow_digits(g, order / r) != one))
            .expect("multiplicative group is cyclic");

        let mut exp = vec![0u32; 2 * (q as usize - 1).max(1)];
        let mut log = vec![0u32; q as usize];
        let mut x = one;
        for i in 0..(q - 1) as usize {
            exp[i] = x;
            log[x as usize] = i as u32;
            x = mul_digits(x, generator);
        }
        for i in (q - 1) as usize..exp.len() {
            exp[i] = exp[i - (q - 1) as usize];
        }
        let neg: Vec<u32> = (0..q)
            .map(|a| {
                let d: Vec<u32> = to_digits(a).iter().map(|&c| fp.neg(c)).collect();
                from_digits(&d)
            })
            .collect();

        let mut field = BaseField {
            p,
            s,
            q,
            modulus,
            weights,
            exp,
            log,
            neg,
            add_table: None,
            trace: Vec::new(),
            generator,
        };
        if q <= ADD_TABLE_LIMIT && p != 2 && s > 1 {
            let mut table = vec![0u16; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    table[(a * q + b) as usize] = field.add_digits(a, b) as u16;
                }
            }
            field.add_table = Some(table);
        }
        field.trace = (0..q)
            .map(|a| {
                let mut acc = 0;
                let mut y = a;
                for _ in 0..s {
                    acc = field.add(acc, y);
                    y = field.pow(y, p as u64);
                }
                field.to_prime(acc).expect("absolute trace lands in F_p")
            })
            .collect();
        Ok(field)
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn s(&self) -> u32 {
        self.s
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    /// Defining modulus over `F_p`, least degree first, monic.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }
    /// The least generator of `F_q^*` in canonical order.
    pub fn generator(&self) -> u32 {
        self.generator
    }

    pub fn digits(&self, mut a: u32) -> Vec<u32> {
        let mut d = vec![0u32; self.s as usize];
        for j in (0..self.s as usize).rev() {
            d[j] = a % self.p;
            a /= self.p;
        }
        d
    }

    pub fn from_digits(&self, d: &[u32]) -> Result<u32> {
        if d.len() != self.s as usize || d.iter().any(|&c| c >= self.p) {
            return Err(Error::Parse(alloc::format!(
                "expected {} digits in [0, {})",
                self.s,
                self.p
            )));
        }
        Ok(d.iter().zip(&self.weights).map(|(a, w)| a * w).sum())
    }

    /// Embeds the prime-field residue `c`.
    pub fn from_prime(&self, c: u32) -> u32 {
        (c % self.p) * self.weights[0]
    }

    /// The residue of `a` if it lies in the prime field.
    pub fn to_prime(&self, a: u32) -> Option<u32> {
        if a % self.weights[0] == 0 {
            Some(a / self.weights[0])
        } else {
            None
        }
    }

    fn add_digits(&self, a: u32, b: u32) -> u32 {
        let mut out = 0;
        let (mut a, mut b) = (a, b);
        for j in (0..self.s as usize).rev() {
            let d = (a % self.p + b % self.p) % self.p;
            out += d * self.weights[j];
            a /= self.p;
            b /= self.p;
        }
        out
    }

    /// Absolute trace `F_q -> F_p` as a residue.
    #[inline]
    pub fn trace(&self, a: u32) -> u32 {
        self.trace[a as usize]
    }

    #[inline]
    pub fn log(&self, a: u32) -> u32 {
        debug_assert!(a != 0);
        self.log[a as usize]
    }

    #[inline]
    pub fn exp(&self, k: u64) -> u32 {
        self.exp[(k % (self.q as u64 - 1)) as usize]
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return self.one();
        }
        if a == 0 {
            return 0;
        }
        let k = (self.log[a as usize] as u64 * (e % (self.q as u64 - 1))) % (self.q as u64 - 1);
        self.exp[k as usize]
    }

    /// Every element in canonical order.
    pub fn elements(&self) -> core::ops::Range<u32> {
        0..self.q
    }
}

impl ScalarField for BaseField {
    fn order(&self) -> u64 {
        self.q as u64
    }
    fn characteristic(&self) -> u64 {
        self.p as u64
    }
    #[inline]
    fn one(&self) -> u32 {
        self.weights[0]
    }
    #[inline]
    fn add(&self, a: u32, b: u32) -> u32 {
        if self.s == 1 {
            let c = a + b;
            if c >= self.p {
                c - self.p
            } else {
                c
            }
        } else if self.p == 2 {
            a ^ b
        } else if let Some(t) = &self.add_table {
            t[(a * self.q + b) as usize] as u32
        } else {
            self.add_digits(a, b)
        }
    }
    #[inline]
    fn neg(&self, a: u32) -> u32 {
        self.neg[a as usize]
    }
    #[inline]
    fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }
    #[inline]
    fn inv(&self, a: u32) -> u32 {
        assert!(a != 0, "inverse of zero");
        let l = self.log[a as usize];
        if l == 0 {
            self.exp[0]
        } else {
            self.exp[(self.q - 1 - l) as usize]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f4_by_hand() {
        let f = BaseField::new(2, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 1, 1]);
        let t = f.from_digits(&[0, 1]).unwrap();
        let t1 = f.from_digits(&[1, 1]).unwrap();
        assert_eq!(f.mul(t, t1), f.one());
        assert_eq!(f.mul(t, t), t1);
        assert_eq!(f.trace(t), 1);
        assert_eq!(f.trace(f.one()), 0);
    }

    #[test]
    fn axioms_small_fields() {
        for (p, s) in [(2, 1), (3, 1), (2, 3), (3, 2), (5, 2), (2, 4), (7, 1), (3, 3)] {
            let f = BaseField::new(p, s).unwrap();
            for a in f.elements() {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a)), f.one());
                }
                for b in f.elements() {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in [0, 1 % f.q(), f.q() - 1] {
                        assert_eq!(
                            f.mul(a, f.add(b, c)),
                            f.add(f.mul(a, b), f.mul(a, c))
                        );
                    }
                }
            }
            // trace is onto F_p with equal fibres
            let mut hist = vec![0u32; p as usize];
            for a in f.elements() {
                hist[f.trace(a) as usize] += 1;
            }
            assert!(hist.iter().all(|&h| h == f.q() / p as u32));
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(BaseField::new(4, 1).unwrap_err(), Error::NotPrime(4));
        assert_eq!(BaseField::new(2, 0).unwrap_err(), Error::DegreeZero);
        assert!(matches!(BaseField::new(2, 17), Err(Error::FieldTooLarge { .. })));
    }
}
