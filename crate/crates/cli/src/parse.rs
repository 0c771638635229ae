//! Angle and list syntax shared by the flags and the config file.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use anyhow::{anyhow, bail, Context, Result};
use serde::de::{self, Deserializer};
use serde::Deserialize;

/// Parse `pi`, `pi/2`, `-3pi/4`, `2*pi`, `0.5pi` or a plain number of radians.
pub fn angle(text: &str) -> Result<f64> {
    let t: String = text.trim().to_ascii_lowercase().chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        bail!("empty angle");
    }
    let Some(pos) = t.find("pi") else {
        return number(&t);
    };
    let head = t[..pos].trim_end_matches('*');
    let tail = &t[pos + 2..];
    let factor = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => number(h)?,
    };
    let divisor = match tail {
        "" => 1.0,
        d if d.starts_with('/') => number(&d[1..])?,
        _ => bail!("malformed angle '{text}'"),
    };
    if divisor == 0.0 {
        bail!("malformed angle '{text}': division by zero");
    }
    Ok(factor * PI / divisor)
}

fn number(t: &str) -> Result<f64> {
    let v: f64 = t.parse().map_err(|_| anyhow!("malformed number '{t}'"))?;
    if !v.is_finite() {
        bail!("non-finite number '{t}'");
    }
    Ok(v)
}

/// Comma-separated numbers.
pub fn numbers(text: &str) -> Result<Vec<f64>> {
    text.split(',').filter(|s| !s.trim().is_empty()).map(|s| number(s.trim())).collect()
}

/// Comma-separated angles.
pub fn angles(text: &str) -> Result<Vec<f64>> {
    text.split(',').filter(|s| !s.trim().is_empty()).map(angle).collect()
}

/// `lo:hi` with `0 < lo <= hi`.
pub fn band(text: &str) -> Result<[f64; 2]> {
    let (a, b) = text.split_once(':').ok_or_else(|| anyhow!("band '{text}' must be lo:hi"))?;
    let (lo, hi) = (number(a.trim())?, number(b.trim())?);
    if !(lo > 0.0 && hi > lo) {
        bail!("empty or invalid band '{text}'");
    }
    Ok([lo, hi])
}

/// Either a comma list or `lo:hi:n`, spaced logarithmically when `log`.
pub fn spaced(text: &str, log: bool) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [_] => {
            let v = if log { numbers(text)? } else { angles(text)? };
            if v.is_empty() {
                bail!("empty list");
            }
            Ok(v)
        }
        [a, b, n] => {
            let (lo, hi) = if log { (number(a)?, number(b)?) } else { (angle(a)?, angle(b)?) };
            let n: usize = n.trim().parse().with_context(|| format!("bad point count in '{text}'"))?;
            if n == 0 {
                bail!("point count must be positive");
            }
            if log && !(lo > 0.0 && hi > 0.0) {
                bail!("log ranges need positive ends");
            }
            Ok((0..n)
                .map(|i| {
                    let f = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                    if log {
                        10f64.powf(lo.log10() + f * (hi.log10() - lo.log10()))
                    } else {
                        lo + f * (hi - lo)
                    }
                })
                .collect())
        }
        _ => bail!("expected a comma list or lo:hi:n, got '{text}'"),
    }
}

/// `1,2,4,8` or `a..b`, the latter doubling from `a` up to `b`.
pub fn lengths(text: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().with_context(|| format!("bad length range '{text}'"))?;
        let b: usize = if b.trim().is_empty() { 64 } else { b.trim().parse().with_context(|| format!("bad length range '{text}'"))? };
        if a == 0 || b < a {
            bail!("bad length range '{text}'");
        }
        let mut out = vec![];
        let mut l = a;
        while l <= b {
            out.push(l);
            l *= 2;
        }
        return Ok(out);
    }
    text.split(',').map(|s| s.trim().parse().with_context(|| format!("bad length '{s}'"))).collect()
}

/// `3=1.5,5=-2` into Walsh coefficients keyed by Paley index.
pub fn coefficients(text: &str) -> Result<BTreeMap<u64, f64>> {
    let mut out = BTreeMap::new();
    for item in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| anyhow!("coefficient '{item}' must be k=value"))?;
        let k: u64 = k.trim().parse().with_context(|| format!("bad Paley index '{k}'"))?;
        out.insert(k, angle(v)?);
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrText {
    Num(f64),
    Text(String),
}

/// Deserialize an angle given as a number or as text such as `"pi/2"`.
pub fn de_angle<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    match NumOrText::deserialize(d)? {
        NumOrText::Num(v) => Ok(v),
        NumOrText::Text(t) => angle(&t).map_err(de::Error::custom),
    }
}

pub fn de_opt_angle<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
    match Option::<NumOrText>::deserialize(d)? {
        None => Ok(None),
        Some(NumOrText::Num(v)) => Ok(Some(v)),
        Some(NumOrText::Text(t)) => angle(&t).map(Some).map_err(de::Error::custom),
    }
}
