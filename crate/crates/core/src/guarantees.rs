//! Sufficient conditions for normal elements with prescribed norms.
//!
//! Every inequality involving `q^{n/2}` or `2^{(n+a)/b}` is decided over the
//! integers by raising both sides to a common power.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::One;

use crate::arith;
use crate::error::{Error, Result};
use crate::fq_poly;
use crate::norm_system::{self, DivisorTuple};

/// Which `(a, b)` row of the `W_q(x^n - 1)` bound applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `q >= 29`
    Large,
    /// `7 <= q <= 27`
    Medium,
    /// `q in {2, 3, 4, 5}`
    Small,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WBoundParams {
    pub a: u64,
    pub b: u64,
    pub regime: Regime,
}

pub fn w_bound_params(q: u64) -> WBoundParams {
    let (a, b, regime) = match q {
        2 => (14, 5, Regime::Small),
        3 => (20, 4, Regime::Small),
        4 => (12, 3, Regime::Small),
        5 => (18, 3, Regime::Small),
        7..=27 => (q - 1, 2, Regime::Medium),
        _ => (0, 1, Regime::Large),
    };
    WBoundParams { a, b, regime }
}

/// The real number `2^{num/den}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PowerOfTwo {
    pub num: u64,
    pub den: u64,
}

impl PowerOfTwo {
    /// Whether `2^{num/den} >= x`.
    pub fn at_least(&self, x: &BigUint) -> bool {
        (BigUint::one() << self.num) >= x.pow(self.den as u32)
    }

    /// `floor(2^{num/den})`.
    pub fn floor(&self) -> BigUint {
        (BigUint::one() << self.num).nth_root(self.den as u32)
    }
}

impl fmt::Display for PowerOfTwo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "2^{}", self.num)
        } else {
            write!(f, "2^({}/{})", self.num, self.den)
        }
    }
}

/// Lemma-table bound `W_q(x^n - 1) <= 2^{(n + a)/b}`.
pub fn w_bound(q: u64, n: u32) -> PowerOfTwo {
    let p = w_bound_params(q);
    PowerOfTwo { num: n as u64 + p.a, den: p.b }
}

/// The trivial bound `W_q(x^n - 1) <= 2^n`.
pub fn w_trivial(n: u32) -> PowerOfTwo {
    PowerOfTwo { num: n as u64, den: 1 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    CertifiedThm1,
    CertifiedThm2,
    CertifiedThm3,
    CertifiedThm4,
    KnownException,
    AsymptoticOnly,
    Unknown,
}

impl Status {
    pub fn is_certified(self) -> bool {
        matches!(
            self,
            Status::CertifiedThm1 | Status::CertifiedThm2 | Status::CertifiedThm3 | Status::CertifiedThm4
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Status::CertifiedThm1 => "CertifiedThm1",
            Status::CertifiedThm2 => "CertifiedThm2",
            Status::CertifiedThm3 => "CertifiedThm3",
            Status::CertifiedThm4 => "CertifiedThm4",
            Status::KnownException => "KnownException",
            Status::AsymptoticOnly => "AsymptoticOnly",
            Status::Unknown => "Unknown",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An evaluated inequality `L > R` (or `L >= R`), decided as
/// `lhs = L^power` against `rhs = R^power`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    pub label: String,
    pub statement: String,
    pub lhs: BigUint,
    pub rhs: BigUint,
    pub power: u32,
    pub strict: bool,
    pub holds: bool,
}

impl Comparison {
    fn new(label: &str, statement: String, lhs: BigUint, rhs: BigUint, power: u32, strict: bool) -> Self {
        let holds = if strict { lhs > rhs } else { lhs >= rhs };
        Comparison { label: label.into(), statement, lhs, rhs, power, strict, holds }
    }

    pub fn reevaluate(&self) -> bool {
        if self.strict {
            self.lhs > self.rhs
        } else {
            self.lhs >= self.rhs
        }
    }
}

/// A structural fact used by a rule, e.g. `lcm = 6 < 12`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fact {
    pub label: String,
    pub statement: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Evidence {
    pub comparisons: Vec<Comparison>,
    pub facts: Vec<Fact>,
    /// The region or rule that determined the status.
    pub region: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuaranteeVerdict {
    pub status: Status,
    pub evidence: Evidence,
}

impl GuaranteeVerdict {
    /// Re-derives the status from the evidence.
    pub fn is_consistent(&self) -> bool {
        if self.evidence.comparisons.iter().any(|c| c.holds != c.reevaluate()) {
            return false;
        }
        match self.status {
            Status::Unknown => self.evidence.region.is_none(),
            _ => self.evidence.region.is_some(),
        }
    }
}

fn fact(label: &str, statement: String, holds: bool) -> Fact {
    Fact { label: label.into(), statement, holds }
}

fn q_pow(q: u64, e: u64) -> BigUint {
    arith::big_pow(q, e)
}

/// `(q^n - 1)/(q - 1) > X q^{n/2}` with `X = 2^{num/den}` compared exactly:
/// `S^{2 den} > 2^{2 num} q^{n den}`.
fn thm1_ineq(label: &str, q: u64, n: u32, x: PowerOfTwo) -> Comparison {
    let s = norm_system::norm_exponent(q, n, 1);
    let lhs = (&s).pow(2 * x.den as u32);
    let rhs = (BigUint::one() << (2 * x.num)) * q_pow(q, n as u64 * x.den);
    Comparison::new(
        label,
        format!("(q^n-1)/(q-1) = {s} > {x} * {q}^({n}/2)"),
        lhs,
        rhs,
        2 * x.den as u32,
        true,
    )
}

/// One prescribed norm in `F_q^*`.
pub fn thm1_condition(q: u64, n: u32) -> GuaranteeVerdict {
    let w = fq_poly::w_exact_for(q, n);
    let s = norm_system::norm_exponent(q, n, 1);
    let eq5 = Comparison::new(
        "ineq5",
        format!("(q^n-1)/(q-1) = {s} > W * q^(n/2) = {w} * {q}^({n}/2)"),
        (&s).pow(2u32),
        (&w).pow(2u32) * q_pow(q, n as u64),
        2,
        true,
    );
    let eq6 = thm1_ineq("ineq6", q, n, w_trivial(n));
    let eq7 = thm1_ineq("ineq7", q, n, w_bound(q, n));
    let mut ev = Evidence { comparisons: vec![eq5.clone(), eq6, eq7], ..Default::default() };
    let status = if n < 2 {
        ev.facts.push(fact("n_at_least_2", format!("n = {n} >= 2"), false));
        Status::Unknown
    } else if eq5.holds {
        ev.region = Some("ineq5".into());
        Status::CertifiedThm1
    } else if n == 2 && q + 1 > 4 {
        ev.facts.push(fact("n2_fiber", format!("q + 1 = {} > 4", q + 1), true));
        ev.region = Some("n = 2, q + 1 > 4".into());
        Status::CertifiedThm1
    } else if n == 2 && q == 2 {
        ev.facts.push(fact("n2_q2", "F_2^* = {1} and both normal elements of F_4 have norm 1".into(), true));
        ev.region = Some("n = 2, q = 2".into());
        Status::CertifiedThm1
    } else if n == 2 && q == 3 {
        ev.facts.push(fact("n2_q3", "exactly one a in F_3^* has no normal preimage".into(), true));
        ev.region = Some("q = 3, n = 2 exception".into());
        Status::KnownException
    } else if (3..=7).contains(&n) && q >= 64 {
        ev.region = Some("3 <= n <= 7, q >= 64".into());
        Status::CertifiedThm1
    } else if n >= 7 {
        ev.region = Some("n >= 7, q >= 2".into());
        Status::CertifiedThm1
    } else if (3..=7).contains(&n) && q < 64 {
        ev.region = Some("3 <= n <= 7, q < 64 (exhaustive search)".into());
        Status::CertifiedThm1
    } else {
        Status::Unknown
    };
    GuaranteeVerdict { status, evidence: ev }
}

/// `gcd_i (q^n - 1)/(q^{d_i} - 1) >= W q^{n/2}`, squared. With
/// `use_bound`, `W` is replaced by the lemma-table bound.
pub fn thm2_condition(q: u64, n: u32, d: &DivisorTuple, use_bound: bool) -> Result<GuaranteeVerdict> {
    if d.is_relaxed() {
        return Err(Error::InvalidTuple("divisors must form an antichain".into()));
    }
    if d.k() >= 2 && arith::factor_u64(n as u64).len() < 2 {
        return Err(Error::InvalidTuple(format!("{n} is a prime power")));
    }
    let g = norm_system::fiber_count(q, n, d);
    let cmp = if use_bound {
        let x = w_bound(q, n);
        Comparison::new(
            "eq2_bound",
            format!("gcd = {g} >= {x} * {q}^({n}/2)"),
            (&g).pow(2 * x.den as u32),
            (BigUint::one() << (2 * x.num)) * q_pow(q, n as u64 * x.den),
            2 * x.den as u32,
            false,
        )
    } else {
        let w = fq_poly::w_exact_for(q, n);
        Comparison::new(
            "eq2",
            format!("gcd = {g} >= W * q^(n/2) = {w} * {q}^({n}/2)"),
            (&g).pow(2u32),
            (&w).pow(2u32) * q_pow(q, n as u64),
            2,
            false,
        )
    };
    let certified = cmp.holds;
    let region = certified.then(|| String::from(if use_bound { "eq2 with W bound" } else { "eq2" }));
    Ok(GuaranteeVerdict {
        status: if certified { Status::CertifiedThm2 } else { Status::Unknown },
        evidence: Evidence { comparisons: vec![cmp], facts: Vec::new(), region },
    })
}

/// `lcm(d_1, ..., d_k) < n`, for `k >= 2`.
pub fn thm3_condition(n: u32, d: &DivisorTuple) -> GuaranteeVerdict {
    let l = d.lcm();
    let mut ev = Evidence::default();
    ev.facts.push(fact("k_at_least_2", format!("k = {} >= 2", d.k()), d.k() >= 2));
    ev.facts.push(fact("lcm_below_n", format!("lcm = {l} < n = {n}"), l < n as u64));
    let certified = d.k() >= 2 && l < n as u64;
    if certified {
        ev.region = Some("lcm < n".into());
    }
    GuaranteeVerdict { status: if certified { Status::CertifiedThm3 } else { Status::Unknown }, evidence: ev }
}

/// Pairwise coprime divisors with `n = d_1 ... d_k`.
pub fn thm4_condition(_q: u64, n: u32, d: &DivisorTuple) -> GuaranteeVerdict {
    let mut ev = Evidence::default();
    let coprime = d.is_pairwise_coprime();
    let prod = d.product();
    ev.facts.push(fact("pairwise_coprime", format!("pairwise coprime {:?}", d.divisors()), coprime));
    ev.facts.push(fact("k_at_least_2", format!("k = {} >= 2", d.k()), d.k() >= 2));
    if !coprime || d.k() < 2 {
        return GuaranteeVerdict { status: Status::Unknown, evidence: ev };
    }
    ev.facts.push(fact("product_is_n", format!("d_1 ... d_k = {prod} = n = {n}"), prod == n as u64));
    if prod < n as u64 {
        let v = thm3_condition(n, d);
        ev.facts.extend(v.evidence.facts);
        ev.region = v.evidence.region.map(|r| format!("product < n, {r}"));
        return GuaranteeVerdict { status: v.status, evidence: ev };
    }
    let d1 = d.divisors()[0];
    let (status, region) = if d.k() >= 3 {
        (Status::CertifiedThm4, Some("k >= 3"))
    } else if d1 >= 7 {
        (Status::CertifiedThm4, Some("k = 2, d_1 >= 7"))
    } else if (3..=6).contains(&d1) && d.divisors() != [3, 4] {
        (Status::AsymptoticOnly, Some("k = 2, d_1 in {3,4,5,6}, q large enough"))
    } else {
        (Status::Unknown, None)
    };
    ev.region = region.map(String::from);
    GuaranteeVerdict { status, evidence: ev }
}

/// `(q^g, d_1/g, d_2/g)` with `g = gcd(d_1, d_2)`.
pub fn reduce_to_coprime(q: u64, d1: u32, d2: u32) -> (BigUint, u32, u32) {
    let g = arith::gcd_u64(d1 as u64, d2 as u64) as u32;
    (q_pow(q, g as u64), d1 / g, d2 / g)
}

/// First certifying verdict among Thm3, Thm4 and Thm2, in that order (Thm1
/// for the single divisor 1). Otherwise an `AsymptoticOnly` verdict from
/// Thm4, or `Unknown` carrying every evaluated piece of evidence.
pub fn classify(q: u64, n: u32, d: &DivisorTuple) -> Result<GuaranteeVerdict> {
    if d.k() == 1 {
        if d.divisors()[0] == 1 {
            return Ok(thm1_condition(q, n));
        }
        return thm2_condition(q, n, d, false);
    }
    let v3 = thm3_condition(n, d);
    if v3.status.is_certified() {
        return Ok(v3);
    }
    let v4 = thm4_condition(q, n, d);
    if v4.status.is_certified() {
        return Ok(v4);
    }
    let v2 = thm2_condition(q, n, d, false)?;
    if v2.status.is_certified() {
        return Ok(v2);
    }
    if v4.status == Status::AsymptoticOnly {
        return Ok(v4);
    }
    let mut ev = Evidence::default();
    for v in [v3, v2, v4] {
        ev.comparisons.extend(v.evidence.comparisons);
        ev.facts.extend(v.evidence.facts);
    }
    Ok(GuaranteeVerdict { status: Status::Unknown, evidence: ev })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuple(n: u32, d: &[u32]) -> DivisorTuple {
        DivisorTuple::new(n, d.to_vec()).unwrap()
    }

    #[test]
    fn w_bound_examples() {
        assert_eq!(w_bound(29, 10), PowerOfTwo { num: 10, den: 1 });
        assert_eq!(w_bound(7, 6), PowerOfTwo { num: 12, den: 2 });
        assert_eq!(w_bound(7, 6).floor(), BigUint::from(64u32));
        let b = w_bound(2, 30);
        assert_eq!(b, PowerOfTwo { num: 44, den: 5 });
        assert!(b.at_least(&BigUint::from(32u32)));
        assert_eq!(b.floor(), BigUint::from(445u32));
        assert_eq!(w_bound_params(27).regime, Regime::Medium);
        assert_eq!(w_bound_params(32).regime, Regime::Large);
    }

    #[test]
    fn thm1_examples() {
        let v = thm1_condition(64, 3);
        assert_eq!(v.status, Status::CertifiedThm1);
        let c = &v.evidence.comparisons[0];
        assert!(c.holds);
        assert_eq!(c.lhs, BigUint::from(4161u32 * 4161));
        assert_eq!(c.rhs, BigUint::from(4096u32 * 4096));

        let v = thm1_condition(2, 7);
        assert_eq!(v.evidence.comparisons[0].lhs, BigUint::from(16129u32));
        assert_eq!(v.evidence.comparisons[0].rhs, BigUint::from(8192u32));
        assert_eq!(v.status, Status::CertifiedThm1);

        let v = thm1_condition(5, 2);
        assert_eq!(v.status, Status::CertifiedThm1);
        assert_eq!(v.evidence.region.as_deref(), Some("n = 2, q + 1 > 4"));
        assert_eq!(thm1_condition(3, 2).status, Status::KnownException);
        assert!(thm1_condition(3, 2).is_consistent());
    }

    #[test]
    fn thm2_examples() {
        let v = thm2_condition(2, 6, &tuple(6, &[2, 3]), false).unwrap();
        assert_eq!(v.status, Status::Unknown);
        assert_eq!(v.evidence.comparisons[0].lhs, BigUint::from(9u32));
        assert_eq!(v.evidence.comparisons[0].rhs, BigUint::from(16u32 * 64));
        // d_k = n/2 never passes
        for q in [2, 3, 4, 5, 7, 101] {
            assert_eq!(thm2_condition(q, 6, &tuple(6, &[2, 3]), false).unwrap().status, Status::Unknown);
        }
        assert!(thm2_condition(2, 12, &DivisorTuple::relaxed(12, vec![2, 4]).unwrap(), false).is_err());
    }

    #[test]
    fn thm3_and_thm4_examples() {
        assert_eq!(thm3_condition(12, &tuple(12, &[2, 3])).status, Status::CertifiedThm3);
        assert_eq!(thm3_condition(6, &tuple(6, &[2, 3])).status, Status::Unknown);
        assert_eq!(thm3_condition(30, &tuple(30, &[2, 3, 5])).status, Status::Unknown);
        assert_eq!(thm4_condition(2, 30, &tuple(30, &[2, 3, 5])).status, Status::CertifiedThm4);
        assert_eq!(thm4_condition(2, 56, &tuple(56, &[7, 8])).status, Status::CertifiedThm4);
        assert_eq!(thm4_condition(5, 12, &tuple(12, &[3, 4])).status, Status::Unknown);
        assert_eq!(thm4_condition(5, 20, &tuple(20, &[4, 5])).status, Status::AsymptoticOnly);
        assert_eq!(thm4_condition(5, 10, &tuple(10, &[2, 5])).status, Status::Unknown);
        assert_eq!(thm4_condition(2, 60, &tuple(60, &[3, 4])).status, Status::CertifiedThm3);
    }

    #[test]
    fn coprime_reduction() {
        assert_eq!(reduce_to_coprime(3, 4, 6), (BigUint::from(9u32), 2, 3));
        assert_eq!(reduce_to_coprime(5, 2, 3), (BigUint::from(5u32), 2, 3));
        assert_eq!(reduce_to_coprime(2, 6, 9), (BigUint::from(8u32), 2, 3));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(64, 3, &tuple(3, &[1])).unwrap().status, Status::CertifiedThm1);
        assert_eq!(classify(2, 12, &tuple(12, &[2, 3])).unwrap().status, Status::CertifiedThm3);
        let v = classify(2, 6, &tuple(6, &[2, 3])).unwrap();
        assert_eq!(v.status, Status::Unknown);
        assert!(v.is_consistent());
        assert_eq!(classify(5, 12, &tuple(12, &[3, 4])).unwrap().status, Status::Unknown);
        assert_eq!(classify(2, 56, &tuple(56, &[7, 8])).unwrap().status, Status::CertifiedThm4);
        assert_eq!(classify(2, 30, &tuple(30, &[2, 3, 5])).unwrap().status, Status::CertifiedThm4);
    }
}
