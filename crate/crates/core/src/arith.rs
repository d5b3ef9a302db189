//! Integer number theory: primality, factorization, divisors and
//! multiplicative orders.
//!
//! Factorization is deterministic: trial division by every prime below
//! [`TRIAL_DIVISION_LIMIT`], then Pollard's rho with the fixed map
//! `x -> x^2 + 1` from the fixed starting points `2, 3, 4, ...`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use once_cell::race::OnceBox;

use crate::error::{Error, Result};

/// Arbitrary-precision nonnegative exponent or count.
pub type BigExponent = BigUint;

pub const TRIAL_DIVISION_LIMIT: u32 = 1_000_000;

/// Iteration budget for the rho phase of [`factor_integer`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorBudget {
    pub rho_iterations: u64,
    pub starting_points: u32,
}

impl Default for FactorBudget {
    fn default() -> Self {
        FactorBudget { rho_iterations: 20_000_000, starting_points: 24 }
    }
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

#[inline]
pub fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// `base^exp` as a big integer.
pub fn big_pow(base: u64, exp: u64) -> BigUint {
    num_traits::pow(BigUint::from(base), exp as usize)
}

fn miller_rabin_u64(n: u64, a: u64) -> bool {
    let a = a % n;
    if a == 0 {
        return true;
    }
    let mut d = n - 1;
    let mut r = 0;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    let mut x = pow_mod_u64(a, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..r {
        x = mul_mod_u64(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

const MR_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Deterministic primality for 64-bit integers (bases up to 37 suffice).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    MR_BASES[..12].iter().all(|&a| miller_rabin_u64(n, a))
}

fn miller_rabin_big(n: &BigUint, a: u64) -> bool {
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let r = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> r;
    let mut x = BigUint::from(a).modpow(&d, n);
    if x == one || x == n_minus_1 {
        return true;
    }
    for _ in 1..r {
        x = (&x * &x) % n;
        if x == n_minus_1 {
            return true;
        }
    }
    false
}

/// Jacobi symbol `(a / n)` for odd `n`.
fn jacobi(a: &BigUint, n: &BigUint) -> i32 {
    let mut a = a % n;
    let mut n = n.clone();
    let mut result = 1;
    let three = BigUint::from(3u32);
    let five = BigUint::from(5u32);
    let eight = BigUint::from(8u32);
    let four = BigUint::from(4u32);
    while !a.is_zero() {
        while a.is_even() {
            a >>= 1;
            let r = &n % &eight;
            if r == three || r == five {
                result = -result;
            }
        }
        core::mem::swap(&mut a, &mut n);
        if &a % &four == three && &n % &four == three {
            result = -result;
        }
        a %= &n;
    }
    if n.is_one() {
        result
    } else {
        0
    }
}

fn is_perfect_square(n: &BigUint) -> bool {
    let r = n.sqrt();
    &r * &r == *n
}

fn half_mod(x: BigUint, n: &BigUint) -> BigUint {
    if x.is_odd() {
        (x + n) >> 1
    } else {
        x >> 1
    }
}

/// Strong Lucas probable-prime test with Selfridge parameters.
fn strong_lucas(n: &BigUint) -> bool {
    if is_perfect_square(n) {
        return false;
    }
    // D = 5, -7, 9, -11, ...
    let mut mag: u64 = 5;
    let mut negative = false;
    let d_mod = loop {
        let d_mod = if negative {
            let m = BigUint::from(mag) % n;
            (n - m) % n
        } else {
            BigUint::from(mag) % n
        };
        let j = jacobi(&d_mod, n);
        if j == -1 {
            break d_mod;
        }
        if j == 0 && BigUint::from(mag) % n != BigUint::zero() {
            return false;
        }
        mag += 2;
        negative = !negative;
    };
    // P = 1, Q = (1 - D) / 4 computed modulo n.
    let four_inv = half_mod(half_mod(BigUint::one(), n), n);
    let q_mod = ((BigUint::one() + n - &d_mod) % n * &four_inv) % n;

    let n_plus_1 = n + 1u32;
    let s = n_plus_1.trailing_zeros().unwrap_or(0);
    let d = &n_plus_1 >> s;

    let mut u = BigUint::one();
    let mut v = BigUint::one(); // P
    let mut qk = q_mod.clone();
    let bits = d.bits();
    for i in (0..bits - 1).rev() {
        u = (&u * &v) % n;
        v = ((&v * &v) + n + n - ((&qk + &qk) % n)) % n;
        qk = (&qk * &qk) % n;
        if d.bit(i) {
            let u2 = half_mod((&u + &v) % n, n);
            let v2 = half_mod((&d_mod * &u + &v) % n, n);
            u = u2;
            v = v2;
            qk = (&qk * &q_mod) % n;
        }
    }
    if u.is_zero() || v.is_zero() {
        return true;
    }
    for _ in 1..s {
        v = ((&v * &v) + n + n - ((&qk + &qk) % n)) % n;
        if v.is_zero() {
            return true;
        }
        qk = (&qk * &qk) % n;
    }
    false
}

/// Deterministic primality test.
///
/// Below 2^64 and below 3.3e24 the Miller-Rabin base sets used are proven
/// exact; above that the Baillie-PSW combination is used.
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    for &p in &MR_BASES {
        if (n % p).is_zero() {
            return false;
        }
    }
    let proven_limit = BigUint::parse_bytes(b"3317044064679887385961981", 10).expect("literal");
    if *n < proven_limit {
        return MR_BASES.iter().all(|&a| miller_rabin_big(n, a));
    }
    miller_rabin_big(n, 2) && strong_lucas(n)
}

static SMALL_PRIMES: OnceBox<Vec<u32>> = OnceBox::new();

/// Primes below [`TRIAL_DIVISION_LIMIT`].
pub fn small_primes() -> &'static [u32] {
    SMALL_PRIMES.get_or_init(|| {
        let limit = TRIAL_DIVISION_LIMIT as usize;
        let mut composite = vec![false; limit];
        let mut primes = Vec::new();
        for i in 2..limit {
            if !composite[i] {
                primes.push(i as u32);
                let mut j = i * i;
                while j < limit {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        Box::new(primes)
    })
}

fn rho_u64(n: u64, x0: u64, budget: &mut u64) -> Option<u64> {
    let f = |x: u64| (mul_mod_u64(x, x, n) + 1) % n;
    let mut x = x0 % n;
    let mut y = x;
    loop {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        x = f(x);
        y = f(f(y));
        let diff = x.abs_diff(y);
        let g = gcd_u64(diff, n);
        if g == n {
            return None;
        }
        if g > 1 {
            return Some(g);
        }
    }
}

fn rho_big(n: &BigUint, x0: u64, budget: &mut u64) -> Option<BigUint> {
    let f = |x: &BigUint| (x * x + 1u32) % n;
    let mut x = BigUint::from(x0) % n;
    let mut y = x.clone();
    // Accumulate differences and take one gcd per batch.
    const BATCH: u32 = 64;
    loop {
        let (xs, ys) = (x.clone(), y.clone());
        let mut acc = BigUint::one();
        for _ in 0..BATCH {
            if *budget == 0 {
                return None;
            }
            *budget -= 1;
            x = f(&x);
            y = f(&f(&y));
            let diff = if x >= y { &x - &y } else { &y - &x };
            acc = (acc * diff) % n;
        }
        let g = acc.gcd(n);
        if g.is_one() {
            continue;
        }
        if g != *n {
            return Some(g);
        }
        // Batch overshot: replay it one step at a time.
        let (mut x, mut y) = (xs, ys);
        for _ in 0..BATCH {
            x = f(&x);
            y = f(&f(&y));
            let diff = if x >= y { &x - &y } else { &y - &x };
            let g = diff.gcd(n);
            if g == *n {
                return None;
            }
            if !g.is_one() {
                return Some(g);
            }
        }
        return None;
    }
}

fn split_composite(n: &BigUint, budget: &FactorBudget, remaining: &mut u64) -> Result<BigUint> {
    for x0 in 2..2 + budget.starting_points as u64 {
        let found = match n.to_u64() {
            Some(small) => rho_u64(small, x0, remaining).map(BigUint::from),
            None => rho_big(n, x0, remaining),
        };
        if let Some(g) = found {
            return Ok(g);
        }
        if *remaining == 0 {
            break;
        }
    }
    Err(Error::FactorizationTimeout)
}

/// Complete prime factorization of `n >= 1`, as a sorted multiset.
pub fn factor_integer(n: &BigUint, budget: &FactorBudget) -> Result<Vec<BigUint>> {
    let mut out = Vec::new();
    if n.is_zero() {
        return Err(Error::Parse("cannot factor 0".into()));
    }
    let mut rest = n.clone();
    for &p in small_primes() {
        if rest.is_one() {
            break;
        }
        let pb = BigUint::from(p);
        if &pb * &pb > rest {
            break;
        }
        while (&rest % p).is_zero() {
            rest /= p;
            out.push(pb.clone());
        }
    }
    let mut remaining = budget.rho_iterations;
    let mut stack = Vec::new();
    if !rest.is_one() {
        stack.push(rest);
    }
    while let Some(m) = stack.pop() {
        if is_prime(&m) {
            out.push(m);
            continue;
        }
        let g = split_composite(&m, budget, &mut remaining)?;
        let h = &m / &g;
        stack.push(g);
        stack.push(h);
    }
    out.sort();
    Ok(out)
}

/// Prime factorization of a machine integer as `(prime, exponent)` pairs.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    let primes = factor_integer(&BigUint::from(n.max(1)), &FactorBudget::default())
        .expect("64-bit factorization stays within budget");
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        let p = p.to_u64().expect("factor of a u64");
        match out.last_mut() {
            Some((last, e)) if *last == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

/// Distinct prime factors of a multiset returned by [`factor_integer`].
pub fn distinct(factors: &[BigUint]) -> Vec<BigUint> {
    let mut out: Vec<BigUint> = factors.to_vec();
    out.dedup();
    out
}

/// Sorted positive divisors of `n`.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (p, e) in factor_u64(n) {
        let len = divs.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

pub fn euler_phi(n: u64) -> u64 {
    factor_u64(n)
        .into_iter()
        .fold(1, |acc, (p, e)| acc * (p - 1) * p.pow(e - 1))
}

/// Multiplicative order of `q` modulo `d`; requires `gcd(q, d) = 1`.
/// By convention `ord_1(q) = 1`.
pub fn multiplicative_order(q: u64, d: u64) -> u64 {
    if d == 1 {
        return 1;
    }
    debug_assert_eq!(gcd_u64(q % d, d), 1);
    let mut order = euler_phi(d);
    for (r, _) in factor_u64(order) {
        while order % r == 0 && pow_mod_u64(q, order / r, d) == 1 {
            order /= r;
        }
    }
    order
}

/// Decomposes `q = p^s` with `p` prime.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let f = factor_u64(q);
    match f.as_slice() {
        [(p, s)] => Some((*p, *s)),
        _ => None,
    }
}

/// All prime powers `q` with `lo <= q <= hi`, ascending.
pub fn prime_powers_in(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(2)..=hi).filter(|&q| prime_power(q).is_some()).collect()
}

pub fn is_prime_power(n: u64) -> bool {
    prime_power(n).is_some()
}

/// Integer `floor(log_q(bound))`, i.e. the largest `n` with `q^n <= bound`.
pub fn max_exponent(q: u64, bound: u64) -> u32 {
    let mut n = 0;
    let mut acc: u128 = 1;
    while acc * q as u128 <= bound as u128 {
        acc *= q as u128;
        n += 1;
    }
    n
}

/// `q^n` if it fits in a `u64`.
pub fn checked_pow(q: u64, n: u32) -> Option<u64> {
    q.checked_pow(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_factor(mut n: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut p = 2;
        while p * p <= n {
            while n % p == 0 {
                out.push(p);
                n /= p;
            }
            p += 1;
        }
        if n > 1 {
            out.push(n);
        }
        out
    }

    fn as_u64(v: Vec<BigUint>) -> Vec<u64> {
        v.into_iter().map(|x| x.to_u64().unwrap()).collect()
    }

    #[test]
    fn factor_spot_values() {
        let b = FactorBudget::default();
        assert!(factor_integer(&BigUint::one(), &b).unwrap().is_empty());
        assert_eq!(as_u64(factor_integer(&BigUint::from(63u32), &b).unwrap()), vec![3, 3, 7]);
        let n = (1u64 << 30) - 1;
        assert_eq!(trial_factor(n), vec![3, 3, 7, 11, 31, 151, 331]);
        assert_eq!(as_u64(factor_integer(&BigUint::from(n), &b).unwrap()), trial_factor(n));
    }

    #[test]
    fn factor_needs_rho() {
        // Product of two primes above the trial-division limit.
        let p = 1_000_003u64;
        let q = 1_000_033u64;
        let got = as_u64(factor_integer(&BigUint::from(p * q), &FactorBudget::default()).unwrap());
        assert_eq!(got, vec![p, q]);
        // Above 64 bits: exercises the big-integer rho path.
        let n = BigUint::from(1_000_000_007u64) * 998_244_353u64 * ((1u64 << 61) - 1);
        let got = as_u64(factor_integer(&n, &FactorBudget::default()).unwrap());
        assert_eq!(got, vec![998_244_353, 1_000_000_007, (1 << 61) - 1]);
    }

    #[test]
    fn factor_timeout() {
        let n = BigUint::from(1_000_003u64 * 1_000_033u64);
        let tight = FactorBudget { rho_iterations: 3, starting_points: 1 };
        assert_eq!(factor_integer(&n, &tight), Err(Error::FactorizationTimeout));
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..200).filter(|&n| is_prime_u64(n)).collect();
        let brute: Vec<u64> = (0..200u64)
            .filter(|&n| n >= 2 && (2..n).all(|d| n % d != 0))
            .collect();
        assert_eq!(small, brute);
        // Strong pseudoprime to bases 2..37 products are rejected.
        assert!(!is_prime_u64(3_215_031_751));
        assert!(is_prime_u64(18_446_744_073_709_551_557));
        // 2^127 - 1 is prime, 2^128 + 1 is not; both above the MR-proven window.
        let m127 = (BigUint::one() << 127) - 1u32;
        assert!(is_prime(&m127));
        assert!(!is_prime(&((BigUint::one() << 128) + 1u32)));
        // 2^89 - 1 is prime (in the 13-base window).
        assert!(is_prime(&((BigUint::one() << 89) - 1u32)));
    }

    #[test]
    fn orders_and_divisors() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(euler_phi(15), 8);
        assert_eq!(multiplicative_order(2, 15), 4);
        assert_eq!(multiplicative_order(2, 3), 2);
        assert_eq!(multiplicative_order(4, 3), 1);
        assert_eq!(prime_power(64), Some((2, 6)));
        assert_eq!(prime_power(12), None);
        assert_eq!(max_exponent(2, 4096), 12);
    }
}
