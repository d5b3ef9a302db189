//! Prescriptions from the command line or a TOML file.

use std::path::Path;

use anyhow::{bail, Context, Result};
use prenorm_core::field_tower::{Element, FieldContext};
use prenorm_core::norm_system::DivisorTuple;
use serde::Deserialize;

/// Contents of a prescription file:
///
/// ```toml
/// q = 2
/// n = 6
/// D = [2, 3]
/// A = ["1", "g^21"]
/// ```
#[derive(Debug, Clone, Deserialize)]
pub struct PrescriptionFile {
    pub q: u64,
    pub n: u32,
    #[serde(rename = "D")]
    pub d: Vec<u32>,
    #[serde(rename = "A", default)]
    pub a: Vec<String>,
    #[serde(default)]
    pub relaxed: bool,
}

impl PrescriptionFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Splits on commas that are not inside brackets.
pub fn split_top_level(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

pub fn parse_divisors(text: &str) -> Result<Vec<u32>> {
    text.split(',')
        .map(|t| t.trim().parse::<u32>().with_context(|| format!("bad divisor {t:?}")))
        .collect()
}

/// Resolves `--divisors` and `--norms` into `(D, literals)`. Norms are either
/// plain literals matched with `--divisors`, or `d=literal` pairs.
pub fn resolve(divisors: Option<&str>, norms: Option<&str>) -> Result<(Vec<u32>, Option<Vec<String>>)> {
    let d = divisors.map(parse_divisors).transpose()?;
    let Some(norms) = norms else {
        let Some(d) = d else { bail!("give --divisors, --norms or --file") };
        return Ok((d, None));
    };
    let parts = split_top_level(norms);
    let pairs: Vec<Option<(String, String)>> = parts
        .iter()
        .map(|p| {
            let (k, v) = p.split_once('=')?;
            (!k.contains('[')).then(|| (k.trim().to_string(), v.trim().to_string()))
        })
        .collect();
    if pairs.iter().all(Option::is_some) {
        let mut keys = Vec::new();
        let mut vals = Vec::new();
        for (k, v) in pairs.into_iter().flatten() {
            keys.push(k.parse::<u32>().with_context(|| format!("bad divisor {k:?}"))?);
            vals.push(v);
        }
        if let Some(d) = d {
            if d != keys {
                bail!("--divisors {d:?} disagrees with the divisors named in --norms {keys:?}");
            }
        }
        return Ok((keys, Some(vals)));
    }
    let Some(d) = d else { bail!("plain --norms values need --divisors") };
    if d.len() != parts.len() {
        bail!("{} divisors but {} norms", d.len(), parts.len());
    }
    Ok((d, Some(parts)))
}

pub fn tuple(n: u32, d: Vec<u32>, relaxed: bool) -> Result<DivisorTuple> {
    Ok(if relaxed { DivisorTuple::relaxed(n, d)? } else { DivisorTuple::new(n, d)? })
}

/// Parses norm literals; missing norms default to `1`.
pub fn norm_values(ctx: &FieldContext, d: &DivisorTuple, lits: Option<&[String]>) -> Result<Vec<Element>> {
    match lits {
        None => Ok(vec![ctx.one(); d.k()]),
        Some(l) => l
            .iter()
            .map(|t| ctx.parse_element(t).with_context(|| format!("norm value {t:?}")))
            .collect(),
    }
}
