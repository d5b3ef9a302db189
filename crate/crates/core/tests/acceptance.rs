//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p prenorm-core --test acceptance`.

use std::time::Instant;

use num_bigint::BigUint;
use prenorm_core::arith;
use prenorm_core::field_tower::FieldContext;
use prenorm_core::fq_poly::{self, FqPoly};
use prenorm_core::guarantees::{self, Status};
use prenorm_core::norm_system::{DivisorTuple, PrescriptionSystem};
use prenorm_core::normality::NormalityTester;
use prenorm_core::oracle::{self, InstanceRecord, Suite, SuiteReport};

struct Outcome {
    pass: bool,
    detail: String,
}

fn suite_outcome(report: &SuiteReport) -> Outcome {
    let checks: u64 = report.records.iter().map(|r| r.checked).sum();
    let mut detail = format!("{} fields, {} checks, {} failing", report.records.len(), checks, report.failures());
    if let Some(bad) = report.records.iter().find(|r| !r.pass) {
        detail.push_str(&format!("; first: {} {:?}", bad.key, bad.counterexamples.first()));
    }
    Outcome { pass: report.passed(), detail }
}

fn criterion1() -> Outcome {
    suite_outcome(&oracle::run_suite(Suite::Lemma1, 1 << 16))
}

fn criterion2() -> Outcome {
    let mut pass = true;
    let mut exceptional = Vec::new();
    let mut fields = 0;
    for q in arith::prime_powers_in(2, 13) {
        for n in 2..=6 {
            if arith::checked_pow(q, n).is_none_or(|s| s > 1 << 20) {
                continue;
            }
            fields += 1;
            let r = oracle::verify_thm1_for(q, n, 1 << 20).unwrap();
            if !r.missed.is_empty() {
                exceptional.push(r);
            }
        }
    }
    let mut detail = format!("{fields} fields");
    match exceptional.as_slice() {
        [r] if (r.q, r.n) == (3, 2) && r.missed.len() == 1 => {
            let value = if r.missed[0] == 1 { "a = 1" } else { "a = -1" };
            detail.push_str(&format!(
                "; only (3,2) misses a value: {value}; stated exception a = -1 {}",
                if r.agrees_with_statement { "agrees" } else { "DISAGREES (sign reported, not suppressed)" }
            ));
        }
        other => {
            pass = false;
            let keys: Vec<(u64, u32, Vec<u32>)> = other.iter().map(|r| (r.q, r.n, r.missed.clone())).collect();
            detail.push_str(&format!("; unexpected missed sets {keys:?}"));
        }
    }
    Outcome { pass, detail }
}

fn criterion3() -> Outcome {
    suite_outcome(&oracle::run_suite(Suite::Indicator, 1 << 12))
}

fn criterion4() -> Outcome {
    let sums = oracle::run_suite(Suite::Charsum, 1 << 12);
    let lambda = oracle::run_suite(Suite::LambdaCount, 1 << 12);
    let a = suite_outcome(&sums);
    let b = suite_outcome(&lambda);
    Outcome { pass: a.pass && b.pass, detail: format!("coset sums: {}; Lambda sizes: {}", a.detail, b.detail) }
}

/// Squarefree monic divisors of `x^n - 1`, counted by enumerating every monic
/// polynomial of degree at most `m` (the `p`-free part of `n`).
fn brute_force_w(q: u64, n: u32) -> Option<u64> {
    let ctx = FieldContext::for_q(q, 1).unwrap();
    let fq = ctx.fq();
    let p = ctx.p();
    let mut m = n as u64;
    while m % p == 0 {
        m /= p;
    }
    if arith::checked_pow(q, m as u32).is_none_or(|s| s > 1 << 21) {
        return None;
    }
    let xn1 = FqPoly::xn_minus_1(fq, n as usize);
    let one = fq_poly::FqPoly::one(fq).coeffs()[0];
    let mut count = 0;
    for deg in 0..=m as usize {
        let total = q.pow(deg as u32);
        for idx in 0..total {
            let mut coeffs = Vec::with_capacity(deg + 1);
            let mut r = idx;
            for _ in 0..deg {
                coeffs.push((r % q) as u32);
                r /= q;
            }
            coeffs.push(one);
            let f = FqPoly::new(coeffs);
            if !xn1.divrem(fq, &f).1.is_zero() {
                continue;
            }
            let g = fq_poly::poly_gcd(fq, &f, &f.derivative(fq));
            if g.map_or(true, |g| g.degree() == Some(0)) {
                count += 1;
            }
        }
    }
    Some(count)
}

fn criterion5() -> Outcome {
    let mut pass = true;
    let mut brute = 0;
    let mut closed_form = 0;
    let mut problems = Vec::new();
    for q in arith::prime_powers_in(2, 9) {
        let ctx = FieldContext::for_q(q, 1).unwrap();
        for n in 1..=12u32 {
            let fact = fq_poly::factor_xn_minus_1_over(ctx.fq(), n);
            let w = fq_poly::w_exact(&fact);
            let reference = match brute_force_w(q, n) {
                Some(c) => {
                    brute += 1;
                    BigUint::from(c)
                }
                None => {
                    closed_form += 1;
                    fq_poly::w_exact_for(q, n)
                }
            };
            if w != reference {
                pass = false;
                problems.push(format!("W_{q}(x^{n}-1) = {w}, reference {reference}"));
            }
        }
    }
    let mut bound_checks = 0;
    for q in arith::prime_powers_in(2, 32) {
        for n in 1..=200u32 {
            bound_checks += 1;
            let w = fq_poly::w_exact_for(q, n);
            if !guarantees::w_bound(q, n).at_least(&w) {
                pass = false;
                problems.push(format!("W_{q}(x^{n}-1) = {w} exceeds {}", guarantees::w_bound(q, n)));
            }
        }
    }
    let w30 = fq_poly::w_exact_for(2, 30);
    let b30 = guarantees::w_bound(2, 30);
    let spot = w30 == BigUint::from(32u32) && b30.at_least(&w30) && b30.to_string() == "2^(44/5)";
    pass &= spot;
    Outcome {
        pass,
        detail: format!(
            "{brute} brute-force and {closed_form} closed-form references (q^m > 2^21), \
             {bound_checks} bound checks, W_2(x^30-1) = {w30} <= {b30}: {spot}; {problems:?}"
        ),
    }
}

fn criterion6() -> Outcome {
    let mut pass = true;
    let mut per_status = std::collections::BTreeMap::new();
    let mut tuples_checked = 0;
    let mut failures: Vec<String> = Vec::new();
    for (q, n) in oracle::field_instances(1 << 20, 2) {
        let mut certified = Vec::new();
        for d in oracle::divisor_tuples(n, usize::MAX) {
            let v = guarantees::classify(q, n, &d).unwrap();
            if v.status.is_certified() {
                *per_status.entry(v.status).or_insert(0u32) += 1;
                certified.push(d);
            }
        }
        if certified.is_empty() {
            continue;
        }
        tuples_checked += certified.len();
        let ctx = FieldContext::for_q(q, n).unwrap();
        let tester = NormalityTester::for_context(&ctx);
        let inst = oracle::Instance { q, n, tuples: certified.clone() };
        let mut rec = blank_record(&inst);
        oracle::soundness_check(&ctx, &tester, &certified, 2048, 0x5eed, &mut rec).unwrap();
        if !rec.pass {
            pass = false;
            failures.push(format!("{}: {:?}", rec.key, rec.counterexamples.first()));
        }
    }
    let boundary = guarantees::classify(64, 3, &DivisorTuple::new(3, vec![1]).unwrap()).unwrap();
    let c = &boundary.evidence.comparisons[0];
    let boundary_ok = boundary.status == Status::CertifiedThm1
        && c.lhs == BigUint::from(4161u32 * 4161)
        && c.rhs == BigUint::from(4096u32 * 4096);
    pass &= boundary_ok;
    let counts: Vec<String> = per_status.iter().map(|(s, c)| format!("{s}: {c}")).collect();
    Outcome {
        pass,
        detail: format!(
            "{tuples_checked} certified (q,n,D) [{}]; boundary q=64 n=3: 4161 vs 4096 exact {boundary_ok}; failures {failures:?}",
            counts.join(", ")
        ),
    }
}

fn blank_record(inst: &oracle::Instance) -> InstanceRecord {
    InstanceRecord {
        suite: Suite::Thm2Soundness,
        key: inst.key(),
        q: inst.q,
        n: inst.n,
        checked: 0,
        pass: true,
        note: None,
        counterexamples: Vec::new(),
        counterexample_count: 0,
    }
}

fn criterion7() -> Outcome {
    let appendix = oracle::run_suite(Suite::Appendix, 1 << 16);
    let a = suite_outcome(&appendix);
    let mut pass = a.pass;
    let mut exhaustive = 0;
    let mut randomized = 0;
    let mut max_samples = 0;
    let mut failures = Vec::new();
    for q in arith::prime_powers_in(2, 63) {
        for n in 3..=7u32 {
            let size = arith::checked_pow(q, n).unwrap();
            if size <= 1 << 20 {
                exhaustive += 1;
                let r = oracle::verify_thm1_for(q, n, 1 << 20).unwrap();
                if !r.missed.is_empty() {
                    pass = false;
                    failures.push(format!("q={q} n={n} missed {:?}", r.missed));
                }
                continue;
            }
            let ctx = FieldContext::for_q(q, n).unwrap();
            let tester = NormalityTester::for_context(&ctx);
            let d = DivisorTuple::new(n, vec![1]).unwrap();
            for a in 1..q as u32 {
                randomized += 1;
                let p = PrescriptionSystem::new(&ctx, d.clone(), vec![ctx.from_base(a)]).unwrap();
                let seed = (q << 40) ^ ((n as u64) << 32) ^ a as u64;
                let (w, used) = oracle::random_fiber_search(&ctx, &p, &tester, seed, 1_000_000).unwrap();
                max_samples = max_samples.max(used);
                if w.is_none() {
                    pass = false;
                    failures.push(format!("q={q} n={n} a={a}: no witness in 10^6 samples"));
                }
            }
        }
    }
    Outcome {
        pass,
        detail: format!(
            "certificate vs missed set: {}; sweep region: {exhaustive} fields exhaustive, \
             {randomized} (q,n,a) randomized (max {max_samples} samples); failures {failures:?}",
            a.detail
        ),
    }
}

fn criterion8() -> Outcome {
    let mut pass = true;
    let mut bad = Vec::new();
    let qs = arith::prime_powers_in(2, 49);
    for &q in &qs {
        let r = oracle::n2_fiber_analysis(q).unwrap();
        if !(r.sizes_ok && r.non_normal_ok) {
            pass = false;
            bad.push(q);
        }
    }
    Outcome { pass, detail: format!("{} prime powers q <= 49; failing q {bad:?}", qs.len()) }
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 8] = [
        (1, "Lemma 1 fiber counts", criterion1),
        (2, "single prescribed norm, q <= 13, 2 <= n <= 6", criterion2),
        (3, "character-sum indicator", criterion3),
        (4, "coset sum bound and Lambda sizes", criterion4),
        (5, "W function", criterion5),
        (6, "guarantee soundness up to 2^20", criterion6),
        (7, "divisibility certificate and sweep region", criterion7),
        (8, "n = 2 fibers", criterion8),
    ];
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (id, name, f) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id} [{tag}] {name} ({:.1}s): {}", start.elapsed().as_secs_f64(), o.detail);
        failed += !o.pass as u32;
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
