//! Text form of graph recipes.
//!
//! ```text
//! lattice:2:31        Z^2 box of side 31
//! cycle:8 | path:10   cycle / path graphs
//! sierpinski:5        level-5 gasket prefractal
//! product(A,B)        free product of two recipes
//! ```
//! A recipe may end in `@beta=<x>` and/or `@lazy=<alpha|none>`.

use anyhow::{anyhow, bail, Context, Result};
use rieszlab_core::builders::{BuilderSpec, Family};

pub fn parse_family(text: &str) -> Result<BuilderSpec> {
    let text = text.trim();
    let (body, modifiers) = split_modifiers(text);
    let mut spec = parse_body(body).with_context(|| format!("invalid graph recipe `{text}`"))?;
    for m in modifiers {
        let (key, value) = m.split_once('=').ok_or_else(|| anyhow!("modifier `@{m}` lacks `=`"))?;
        match key {
            "beta" => spec.beta = Some(value.parse().context("beta")?),
            "lazy" if value == "none" => spec.laziness = None,
            "lazy" => spec.laziness = Some(value.parse().context("laziness")?),
            _ => bail!("unknown modifier `@{key}`"),
        }
    }
    Ok(spec)
}

/// Splits trailing `@k=v` modifiers that are not nested inside parentheses.
fn split_modifiers(text: &str) -> (&str, Vec<&str>) {
    let mut depth = 0i32;
    let mut cut = None;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '@' if depth == 0 && cut.is_none() => cut = Some(i),
            _ => {}
        }
    }
    match cut {
        Some(i) => (&text[..i], text[i + 1..].split('@').collect()),
        None => (text, Vec::new()),
    }
}

fn parse_body(body: &str) -> Result<BuilderSpec> {
    if let Some(inner) = body.strip_prefix("product(").and_then(|r| r.strip_suffix(')')) {
        let mut depth = 0i32;
        let split = inner
            .char_indices()
            .find(|&(_, c)| {
                match c {
                    '(' => depth += 1,
                    ')' => depth -= 1,
                    _ => {}
                }
                c == ',' && depth == 0
            })
            .map(|(i, _)| i)
            .ok_or_else(|| anyhow!("product needs two comma-separated factors"))?;
        let a = parse_family(&inner[..split])?;
        let b = parse_family(&inner[split + 1..])?;
        return Ok(BuilderSpec::free_product(a, b));
    }
    let parts: Vec<&str> = body.split(':').collect();
    let num = |i: usize| -> Result<usize> {
        parts
            .get(i)
            .ok_or_else(|| anyhow!("missing parameter {i}"))?
            .parse::<usize>()
            .map_err(Into::into)
    };
    let spec = match parts[0] {
        "lattice" => BuilderSpec::lattice(num(1)?, num(2)?),
        "cycle" => BuilderSpec::cycle(num(1)?),
        "path" => BuilderSpec::path(num(1)?),
        "sierpinski" => BuilderSpec::sierpinski(num(1)? as u32),
        other => bail!("unknown family `{other}`"),
    };
    Ok(spec)
}

/// Inverse of [`parse_family`].
pub fn describe(spec: &BuilderSpec) -> String {
    let mut out = match &spec.family {
        Family::Lattice { dim, side } => format!("lattice:{dim}:{side}"),
        Family::Cycle(n) => format!("cycle:{n}"),
        Family::Path(n) => format!("path:{n}"),
        Family::Sierpinski(l) => format!("sierpinski:{l}"),
        Family::FreeProduct(a, b) => format!("product({},{})", describe(a), describe(b)),
    };
    if let Some(beta) = spec.beta {
        out.push_str(&format!("@beta={beta}"));
    }
    if !matches!(spec.family, Family::FreeProduct(..)) {
        match spec.laziness {
            None => out.push_str("@lazy=none"),
            Some(a) if a != 0.5 => out.push_str(&format!("@lazy={a}")),
            Some(_) => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for text in [
            "lattice:2:31",
            "cycle:8",
            "path:10@beta=1",
            "sierpinski:5@lazy=none",
            "product(lattice:2:41,sierpinski:5)",
            "product(path:3@lazy=0.7,cycle:4)@beta=3",
        ] {
            let spec = parse_family(text).unwrap();
            assert_eq!(describe(&spec), text);
            assert_eq!(parse_family(&describe(&spec)).unwrap(), spec);
        }
        assert!(parse_family("torus:3").is_err());
        assert!(parse_family("product(path:3)").is_err());
    }
}
