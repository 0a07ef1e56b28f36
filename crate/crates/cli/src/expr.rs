//! Mini-language for densities and trial functions.
//!
//! Densities are sums of terms:
//!   gauss(w=1, c=[0,0,0], s=0.5)   normalized gaussian, weight w, width s
//!   uniform(cube=[0,1]^3)          indicator of a cube, value w (default 1)
//! Trial functions are single terms:
//!   gauss(c=[0,0,0], s=1)          L2-normalized gaussian
//!   bump(c=[0,0], r=1, p=3)        compact bump (1-|x-c|^2/r^2)_+^p
//!
//! Scalars are accepted where vectors are expected when the ambient
//! dimension is known: `c=0.5` means the constant vector.

use anyhow::{anyhow, bail, Context, Result};
use fraclt_core::density::{Density, GaussianComponent, TrialFunction};
use fraclt_core::geometry::Cube;

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Number(f64),
    Vector(Vec<f64>),
    CubeSpec { lo: f64, hi: f64, dim: usize },
}

#[derive(Debug, Clone)]
struct Term {
    name: String,
    args: Vec<(String, Value)>,
}

impl Term {
    fn get(&self, key: &str) -> Option<&Value> {
        self.args.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Number(x)) => Ok(Some(*x)),
            Some(other) => bail!("argument {key} of {} must be a number, got {other:?}", self.name),
        }
    }

    fn vector(&self, key: &str, dim: Option<usize>) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Vector(v)) => Ok(Some(v.clone())),
            Some(Value::Number(x)) => match dim {
                Some(d) => Ok(Some(vec![*x; d])),
                None => bail!("scalar {key} needs an explicit dimension (--d)"),
            },
            Some(other) => bail!("argument {key} of {} must be a vector, got {other:?}", self.name),
        }
    }
}

fn split_top_level_terms(expr: &str) -> Result<Vec<&str>> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, ch) in expr.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => {
                depth = depth.checked_sub(1).ok_or_else(|| anyhow!("unbalanced brackets"))?
            }
            '+' if depth == 0 => {
                parts.push(expr[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        bail!("unbalanced brackets in expression");
    }
    parts.push(expr[start..].trim());
    Ok(parts.into_iter().filter(|p| !p.is_empty()).collect())
}

fn parse_term(src: &str) -> Result<Term> {
    let open = src.find('(').ok_or_else(|| anyhow!("term `{src}` is missing `(`"))?;
    if !src.ends_with(')') {
        bail!("term `{src}` is missing the closing `)`");
    }
    let name = src[..open].trim().to_lowercase();
    let body = &src[open + 1..src.len() - 1];
    let mut args = Vec::new();
    for piece in split_args(body)? {
        let (key, value) = piece
            .split_once('=')
            .ok_or_else(|| anyhow!("argument `{piece}` is not key=value"))?;
        args.push((key.trim().to_lowercase(), parse_value(value.trim())?));
    }
    Ok(Term { name, args })
}

fn split_args(body: &str) -> Result<Vec<&str>> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, ch) in body.char_indices() {
        match ch {
            '[' | '(' => depth += 1,
            ']' | ')' => depth = depth.checked_sub(1).ok_or_else(|| anyhow!("unbalanced"))?,
            ',' if depth == 0 => {
                out.push(body[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    let last = body[start..].trim();
    if !last.is_empty() {
        out.push(last);
    }
    Ok(out)
}

fn parse_value(src: &str) -> Result<Value> {
    if let Some(stripped) = src.strip_prefix('[') {
        // either [a,b,...] or [a,b]^d
        if let Some((inside, suffix)) = stripped.split_once(']') {
            let nums: Vec<f64> = split_args(inside)?
                .iter()
                .map(|t| t.parse::<f64>().with_context(|| format!("bad number `{t}`")))
                .collect::<Result<_>>()?;
            if let Some(dim_str) = suffix.trim().strip_prefix('^') {
                if nums.len() != 2 {
                    bail!("cube spec needs exactly [lo,hi]^d");
                }
                let dim: usize = dim_str.trim().parse().context("bad cube dimension")?;
                return Ok(Value::CubeSpec { lo: nums[0], hi: nums[1], dim });
            }
            if !suffix.trim().is_empty() {
                bail!("unexpected trailing `{suffix}` after vector");
            }
            return Ok(Value::Vector(nums));
        }
        bail!("unterminated `[` in `{src}`");
    }
    Ok(Value::Number(src.parse::<f64>().with_context(|| format!("bad number `{src}`"))?))
}

/// Parse a density expression; `dim` resolves scalar shorthands and is
/// checked against vector arguments when both are present.
pub fn parse_density(expr: &str, dim: Option<usize>) -> Result<Density> {
    let terms: Vec<Term> =
        split_top_level_terms(expr)?.into_iter().map(parse_term).collect::<Result<_>>()?;
    if terms.is_empty() {
        bail!("empty density expression");
    }
    let mut gaussians: Vec<GaussianComponent> = Vec::new();
    let mut indicators: Vec<(f64, Cube)> = Vec::new();
    let mut inferred: Option<usize> = dim;
    for term in &terms {
        match term.name.as_str() {
            "gauss" | "gaussian" => {
                let center = term.vector("c", inferred)?;
                if let Some(c) = &center {
                    check_dim(&mut inferred, c.len())?;
                }
            }
            "uniform" => {
                if let Some(Value::CubeSpec { dim, .. }) = term.get("cube") {
                    check_dim(&mut inferred, *dim)?;
                }
            }
            other => bail!("unknown density term `{other}`"),
        }
    }
    let d = inferred.ok_or_else(|| anyhow!("cannot infer the dimension; pass --d"))?;
    for term in &terms {
        match term.name.as_str() {
            "gauss" | "gaussian" => {
                let weight = term.number("w")?.unwrap_or(1.0);
                let width = term
                    .number("s")?
                    .ok_or_else(|| anyhow!("gauss(...) needs a width s=..."))?;
                let center = term.vector("c", Some(d))?.unwrap_or_else(|| vec![0.0; d]);
                if center.len() != d {
                    bail!("center dimension {} does not match d = {d}", center.len());
                }
                gaussians.push(GaussianComponent { weight, center, width });
            }
            "uniform" => {
                let weight = term.number("w")?.unwrap_or(1.0);
                let cube = match term.get("cube") {
                    Some(Value::CubeSpec { lo, hi, dim }) => {
                        Cube::from_bounds(*lo, *hi, *dim).map_err(|e| anyhow!("{e}"))?
                    }
                    _ => bail!("uniform(...) needs cube=[lo,hi]^d"),
                };
                indicators.push((weight, cube));
            }
            _ => unreachable!(),
        }
    }
    match (gaussians.is_empty(), indicators.is_empty()) {
        (false, true) => Density::gaussian_mixture(d, gaussians).map_err(|e| anyhow!("{e}")),
        (true, false) => Density::indicator_mixture(d, indicators).map_err(|e| anyhow!("{e}")),
        _ => bail!("mixing gaussian and uniform terms in one density is not supported"),
    }
}

/// Parse a single-term trial function expression.
pub fn parse_trial(expr: &str, dim: Option<usize>) -> Result<TrialFunction> {
    let terms = split_top_level_terms(expr)?;
    if terms.len() != 1 {
        bail!("a trial function is a single term");
    }
    let term = parse_term(terms[0])?;
    let mut inferred = dim;
    if let Some(Value::Vector(c)) = term.get("c") {
        check_dim(&mut inferred, c.len())?;
    }
    let d = inferred.ok_or_else(|| anyhow!("cannot infer the dimension; pass --d"))?;
    let center = term.vector("c", Some(d))?.unwrap_or_else(|| vec![0.0; d]);
    if center.len() != d {
        bail!("center dimension {} does not match d = {d}", center.len());
    }
    match term.name.as_str() {
        "gauss" | "gaussian" => {
            let width =
                term.number("s")?.ok_or_else(|| anyhow!("gauss(...) needs a width s=..."))?;
            TrialFunction::gaussian(center, width).map_err(|e| anyhow!("{e}"))
        }
        "bump" => {
            let radius =
                term.number("r")?.ok_or_else(|| anyhow!("bump(...) needs a radius r=..."))?;
            let power = term.number("p")?.unwrap_or(3.0);
            if power < 1.0 || power.fract() != 0.0 {
                bail!("bump power p must be a positive integer");
            }
            TrialFunction::bump(center, radius, power as u32).map_err(|e| anyhow!("{e}"))
        }
        other => bail!("unknown trial term `{other}`"),
    }
}

fn check_dim(inferred: &mut Option<usize>, found: usize) -> Result<()> {
    match inferred {
        Some(d) if *d != found => bail!("dimension mismatch: {d} vs {found}"),
        Some(_) => Ok(()),
        None => {
            *inferred = Some(found);
            Ok(())
        }
    }
}

/// A bounding cube that carries essentially all of the density's mass:
/// exact for indicator mixtures, +/- 12 widths for gaussian mixtures.
pub fn default_domain(rho: &Density) -> Result<Cube> {
    use fraclt_core::density::DensityKind;
    match &rho.kind {
        DensityKind::GaussianMixture(parts) => {
            if parts.is_empty() {
                bail!("empty mixture has no natural domain");
            }
            let d = rho.dim;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for c in parts {
                for axis in 0..d {
                    lo = lo.min(c.center[axis] - 12.0 * c.width);
                    hi = hi.max(c.center[axis] + 12.0 * c.width);
                }
            }
            Cube::from_bounds(lo, hi, d).map_err(|e| anyhow!("{e}"))
        }
        DensityKind::IndicatorMixture(parts) => {
            if parts.is_empty() {
                bail!("empty mixture has no natural domain");
            }
            let d = rho.dim;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (_, q) in parts {
                for axis in 0..d {
                    lo = lo.min(q.lower(axis));
                    hi = hi.max(q.upper(axis));
                }
            }
            Cube::from_bounds(lo, hi, d).map_err(|e| anyhow!("{e}"))
        }
        DensityKind::GridSampled(g) => Ok(g.bounds.clone()),
    }
}
