use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde_json::{json, Value};

use prenorm_core::char_sums;
use prenorm_core::field_tower::{Element, FieldContext};
use prenorm_core::fq_poly;
use prenorm_core::guarantees::{self, GuaranteeVerdict};
use prenorm_core::norm_system::{self, Admissibility, DivisorTuple, PrescriptionSystem, Witness};
use prenorm_core::normality::{self, NormalityTester};
use prenorm_core::num_traits::ToPrimitive;
use prenorm_core::oracle::{self, Suite};

use crate::output::{Emitter, Record};
use crate::prescription::{self, PrescriptionFile};
use crate::PrescriptionArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Failed = 1,
    Usage = 2,
    Absent = 3,
    Inconclusive = 4,
}

/// Fiber indices scanned per parallel work item.
const SCAN_BLOCK: u64 = 4096;

struct Loaded {
    ctx: FieldContext,
    d: DivisorTuple,
    lits: Option<Vec<String>>,
}

fn load(p: &PrescriptionArgs) -> Result<Loaded> {
    let (q, n, d, lits, relaxed) = match &p.file {
        Some(path) => {
            let f = PrescriptionFile::read(path)?;
            let lits = (!f.a.is_empty()).then_some(f.a);
            (f.q, f.n, f.d, lits, f.relaxed || p.relaxed)
        }
        None => {
            let (Some(q), Some(n)) = (p.q, p.n) else { bail!("q and n are required without --file") };
            let (d, lits) = prescription::resolve(p.divisors.as_deref(), p.norms.as_deref())?;
            (q, n, d, lits, p.relaxed)
        }
    };
    let ctx = FieldContext::for_q(q, n)?;
    let d = prescription::tuple(n, d, relaxed)?;
    Ok(Loaded { ctx, d, lits })
}

impl Loaded {
    fn system(&self) -> Result<PrescriptionSystem> {
        let a = prescription::norm_values(&self.ctx, &self.d, self.lits.as_deref())?;
        Ok(PrescriptionSystem::new(&self.ctx, self.d.clone(), a)?)
    }

    fn header(&self, command: &str, sys: Option<&PrescriptionSystem>) -> Record {
        let mut r = Record::new(command);
        r.set("q", self.ctx.q()).set("n", self.ctx.n()).set("divisors", self.d.divisors().to_vec());
        if let Some(sys) = sys {
            let norms: Vec<String> = sys.a.iter().map(|a| self.ctx.format_element(a)).collect();
            r.set("norms", norms);
        }
        r
    }
}

fn admissibility_fields(r: &mut Record, adm: Admissibility) {
    match adm {
        Admissibility::No { i, j } => {
            r.set("admissible", false).set("violated_pair", vec![i + 1, j + 1]);
        }
        _ => {
            r.set("admissible", true).set("violated_pair", Value::Null);
        }
    }
}

fn status_name(ctx: &FieldContext, d: &DivisorTuple) -> Value {
    match guarantees::classify(ctx.q(), ctx.n(), d) {
        Ok(v) => v.status.name().into(),
        Err(_) => Value::Null,
    }
}

pub fn field_info(out: &mut Emitter, q: u64, n: u32) -> Result<Exit> {
    let ctx = FieldContext::for_q(q, n)?;
    let fact = fq_poly::factor_xn_minus_1(&ctx);
    let mut r = Record::new("field-info");
    r.set("q", q).set("n", n).set("p", ctx.p()).set("s", ctx.s());
    r.set("mod_base", ctx.mod_base().to_vec());
    r.set("mod_ext", ctx.format_poly_coeffs(ctx.mod_ext()));
    let factors: Vec<Value> = fact
        .factors
        .iter()
        .map(|f| json!({"factor": ctx.format_poly_coeffs(f.coeffs()), "multiplicity": fact.multiplicity}))
        .collect();
    r.set("xn_minus_1", factors);
    r.set("distinct_factors", fact.r());
    r.set("w_exact", fq_poly::w_exact(&fact).to_string());
    let bound = guarantees::w_bound(q, n);
    r.set("w_bound", bound.to_string()).set("w_bound_floor", bound.floor().to_string());
    r.set("normal_count", normality::count_normal(&fact).to_string());
    let primes: Vec<String> = ctx.qn_minus_1_factors()?.iter().map(|f| f.to_string()).collect();
    r.set("qn_minus_1", ctx.order_minus_1().to_string()).set("qn_minus_1_factors", primes);
    r.set("theta", ctx.format_element(ctx.canonical_primitive()?));
    out.emit(&r)?;
    Ok(Exit::Ok)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().context("starting worker pool")
}

/// Least `j < limit` with a normal fiber element. Blocks are scanned in
/// parallel rounds and the earliest hit wins, so the answer is independent of
/// `jobs`.
fn ordered_scan(
    ctx: &FieldContext,
    sol: &norm_system::FiberSolution,
    tester: &NormalityTester,
    limit: u64,
    jobs: usize,
) -> Result<Option<Witness>> {
    if jobs <= 1 {
        return Ok(norm_system::scan_fiber(ctx, sol, tester, 0, limit)?);
    }
    let workers = pool(jobs)?;
    let mut lo = 0;
    while lo < limit {
        let blocks: Vec<(u64, u64)> = (0..jobs as u64)
            .map(|i| lo + i * SCAN_BLOCK)
            .take_while(|&b| b < limit)
            .map(|b| (b, (b + SCAN_BLOCK).min(limit)))
            .collect();
        let found: Vec<_> = workers.install(|| {
            blocks.par_iter().map(|&(a, b)| norm_system::scan_fiber(ctx, sol, tester, a, b)).collect()
        });
        for f in found {
            if let Some(w) = f? {
                return Ok(Some(w));
            }
        }
        lo = blocks.last().map_or(limit, |b| b.1);
    }
    Ok(None)
}

pub fn search(out: &mut Emitter, p: &PrescriptionArgs, budget: u64, seed: Option<u64>, jobs: usize) -> Result<Exit> {
    let l = load(p)?;
    let sys = l.system()?;
    let ctx = &l.ctx;
    let mut r = l.header("search", Some(&sys));
    let adm = norm_system::admissibility(ctx, &sys)?;
    admissibility_fields(&mut r, adm);
    r.set("status", status_name(ctx, &l.d));
    if adm != Admissibility::Yes {
        r.set("result", "inadmissible");
        out.emit(&r)?;
        return Ok(Exit::Usage);
    }
    let sol = norm_system::solve_prescribed(ctx, &sys)?;
    r.set("fiber_size", sol.count.to_string());
    let tester = NormalityTester::for_context(ctx);
    let count = sol.count.to_u64();
    let (witness, scanned, complete) = match seed {
        Some(seed) => {
            let (w, used) = oracle::random_fiber_search(ctx, &sys, &tester, seed, budget)?;
            (w, used, false)
        }
        None => {
            let limit = count.map_or(budget, |c| c.min(budget));
            let w = ordered_scan(ctx, &sol, &tester, limit, jobs)?;
            let scanned = w.as_ref().map_or(limit, |w| w.j + 1);
            (w, scanned, count.is_some_and(|c| c <= budget))
        }
    };
    let code = match &witness {
        Some(w) => {
            r.set("result", "witness").set("j", w.j);
            r.set("witness", ctx.format_element(&w.element));
            r.set("witness_power", format!("g^{}", w.exponent));
            Exit::Ok
        }
        None if complete => {
            r.set("result", "not_found");
            Exit::Absent
        }
        None => {
            r.set("result", "inconclusive");
            Exit::Inconclusive
        }
    };
    r.set("scanned", scanned);
    out.emit(&r)?;
    Ok(code)
}

fn verdict_fields(r: &mut Record, v: &GuaranteeVerdict) {
    r.set("status", v.status.name());
    r.set("region", v.evidence.region.clone());
    let comparisons: Vec<Value> = v
        .evidence
        .comparisons
        .iter()
        .map(|c| {
            json!({
                "label": c.label,
                "statement": c.statement,
                "lhs": c.lhs.to_string(),
                "rhs": c.rhs.to_string(),
                "power": c.power,
                "strict": c.strict,
                "holds": c.holds,
            })
        })
        .collect();
    r.set("comparisons", comparisons);
    let facts: Vec<Value> = v
        .evidence
        .facts
        .iter()
        .map(|f| json!({"label": f.label, "statement": f.statement, "holds": f.holds}))
        .collect();
    r.set("facts", facts);
}

pub fn classify(out: &mut Emitter, p: &PrescriptionArgs) -> Result<Exit> {
    let l = load(p)?;
    let v = guarantees::classify(l.ctx.q(), l.ctx.n(), &l.d)?;
    let mut r = l.header("classify", None);
    verdict_fields(&mut r, &v);
    out.emit(&r)?;
    Ok(Exit::Ok)
}

pub fn count(out: &mut Emitter, p: &PrescriptionArgs, budget: u64) -> Result<Exit> {
    let l = load(p)?;
    let sys = l.system()?;
    let ctx = &l.ctx;
    let (q, n) = (ctx.q(), ctx.n());
    let mut r = l.header("count", Some(&sys));
    r.set("field_size", ctx.order().to_string());
    r.set("fiber_count", norm_system::fiber_count(q, n, &l.d).to_string());
    r.set("fiber_count_lcm", norm_system::fiber_count_lcm(q, n, &l.d).to_string());
    r.set("fiber_count_coprime", norm_system::fiber_count_coprime(q, n, &l.d).map(|c| c.to_string()));
    let fact = fq_poly::factor_xn_minus_1(ctx);
    r.set("normal_count", normality::count_normal(&fact).to_string());
    admissibility_fields(&mut r, norm_system::admissibility(ctx, &sys)?);
    match oracle::exhaustive_fiber(ctx, &sys, budget) {
        Ok(f) => {
            r.set("exhaustive_count", f.count).set("exhaustive_normal_count", f.normal_count);
        }
        Err(prenorm_core::Error::BudgetExceeded { .. }) => {
            r.set("exhaustive_count", Value::Null).set("exhaustive_normal_count", Value::Null);
        }
        Err(e) => return Err(e.into()),
    }
    out.emit(&r)?;
    Ok(Exit::Ok)
}

pub fn admissible(out: &mut Emitter, p: &PrescriptionArgs) -> Result<Exit> {
    let l = load(p)?;
    let sys = l.system()?;
    let mut r = l.header("admissible", Some(&sys));
    let adm = norm_system::admissibility(&l.ctx, &sys)?;
    admissibility_fields(&mut r, adm);
    out.emit(&r)?;
    Ok(if adm == Admissibility::Yes { Exit::Ok } else { Exit::Usage })
}

pub fn charsum(out: &mut Emitter, p: &PrescriptionArgs, twist: Option<&str>, budget: u64) -> Result<Exit> {
    let l = load(p)?;
    let sys = l.system()?;
    let ctx = &l.ctx;
    let mut r = l.header("charsum", Some(&sys));
    if ctx.order_u64().map_or(true, |s| s > budget) {
        bail!("q^n exceeds --budget {budget}");
    }
    let fiber = match char_sums::fiber_elements(ctx, &sys) {
        Err(prenorm_core::Error::NotAdmissible { i, j }) => {
            admissibility_fields(&mut r, Admissibility::No { i, j });
            out.emit(&r)?;
            return Ok(Exit::Usage);
        }
        other => other?,
    };
    let sums = char_sums::SetSums::new(ctx, &fiber);
    let bound = char_sums::sqrt_field_order(ctx);
    r.set("fiber_size", fiber.len());
    match twist {
        Some(t) => {
            let c: Element = ctx.parse_element(t).with_context(|| format!("twist {t:?}"))?;
            let s = sums.sum(&c);
            r.set("twist", ctx.format_element(&c));
            r.set("re", s.re).set("im", s.im).set("abs", s.abs()).set("bound", bound);
            r.set("within_bound", c.is_zero() || s.abs() <= bound + 1e-6);
        }
        None => {
            let m = sums.max_nontrivial();
            let fact = fq_poly::factor_xn_minus_1(ctx);
            let tester = NormalityTester::new(ctx, &fact);
            let normal = fiber.iter().filter(|a| tester.is_normal(ctx, a)).count();
            r.set("max_abs", m).set("bound", bound).set("within_bound", m <= bound + 1e-6);
            r.set("normal_in_fiber", normal);
            r.set("normal_lower_bound", char_sums::ns_lower_bound(ctx, fiber.len() as u64, m, &fact));
        }
    }
    out.emit(&r)?;
    Ok(Exit::Ok)
}

pub fn default_budget(suite: Suite) -> u64 {
    match suite {
        Suite::Lemma1 | Suite::Appendix => 1 << 16,
        Suite::Indicator | Suite::Charsum | Suite::LambdaCount => 1 << 12,
        Suite::Thm1 | Suite::Thm2Soundness | Suite::Thm3Soundness | Suite::Thm4Soundness => 1 << 20,
    }
}

pub fn verify(out: &mut Emitter, name: &str, budget: Option<u64>, jobs: usize) -> Result<Exit> {
    let Some(suite) = Suite::parse(name) else {
        let known: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        bail!("unknown suite {name:?}; expected one of {}", known.join(", "));
    };
    let budget = budget.unwrap_or_else(|| default_budget(suite));
    let instances = oracle::suite_instances(suite, budget);
    let records: Vec<oracle::InstanceRecord> =
        pool(jobs)?.install(|| instances.par_iter().map(|inst| oracle::run_instance(suite, inst)).collect());
    let mut failures = 0;
    for rec in &records {
        failures += !rec.pass as usize;
        let mut r = Record::new("verify");
        r.set("suite", suite.name()).set("key", rec.key.clone()).set("q", rec.q).set("n", rec.n);
        r.set("checked", rec.checked).set("pass", rec.pass).set("note", rec.note.clone());
        r.set("counterexamples", rec.counterexamples.clone());
        r.set("counterexample_count", rec.counterexample_count);
        out.emit(&r)?;
    }
    let mut r = Record::new("verify-summary");
    r.set("suite", suite.name()).set("budget", budget).set("instances", records.len());
    r.set("failures", failures).set("pass", failures == 0);
    out.emit(&r)?;
    Ok(if failures == 0 { Exit::Ok } else { Exit::Failed })
}
