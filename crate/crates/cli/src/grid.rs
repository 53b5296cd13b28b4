//! Learning-rate grid expressions.
//!
//! Accepted forms:
//! - `{1,3,5,8}e{-6..2}`: every mantissa times every power of ten;
//! - `{1,5}e-3`, `2e{-1,0,1}`: either side may be a single value;
//! - `0.1,1,10`: a plain list.
//!
//! Values are ordered by exponent, then by mantissa.

fn parse_number(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("bad number {s:?} in grid"))
}

fn parse_exponents(s: &str) -> Result<Vec<i32>, String> {
    let int = |t: &str| t.trim().parse::<i32>().map_err(|_| format!("bad exponent {t:?} in grid"));
    let Some(inner) = s.strip_prefix('{').and_then(|r| r.strip_suffix('}')) else {
        return Ok(vec![int(s)?]);
    };
    if let Some((lo, hi)) = inner.split_once("..") {
        let (lo, hi) = (int(lo)?, int(hi)?);
        if lo > hi {
            return Err(format!("empty exponent range {lo}..{hi}"));
        }
        return Ok((lo..=hi).collect());
    }
    inner.split(',').map(int).collect()
}

fn parse_mantissas(s: &str) -> Result<Vec<f64>, String> {
    match s.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
        Some(inner) => inner.split(',').map(parse_number).collect(),
        None => Ok(vec![parse_number(s)?]),
    }
}

pub fn parse_lr_grid(spec: &str) -> Result<Vec<f64>, String> {
    let spec: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
    if spec.is_empty() {
        return Err("empty learning-rate grid".into());
    }
    let split = if spec.starts_with('{') {
        let close = spec.find('}').ok_or("unclosed '{' in grid")?;
        match spec[close + 1..].chars().next() {
            None => Some((&spec[..=close], "0")),
            Some('e' | 'E') => Some((&spec[..=close], &spec[close + 2..])),
            Some(c) => return Err(format!("unexpected {c:?} after mantissa list")),
        }
    } else {
        spec.find("e{").or_else(|| spec.find("E{")).map(|i| (&spec[..i], &spec[i + 1..]))
    };
    let values: Vec<f64> = match split {
        Some((mant, exp)) => {
            let mantissas = parse_mantissas(mant)?;
            let exponents = parse_exponents(exp)?;
            exponents
                .iter()
                .flat_map(|&e| mantissas.iter().map(move |&m| format!("{m}e{e}").parse::<f64>().unwrap()))
                .collect()
        }
        None => spec.split(',').map(parse_number).collect::<Result<_, _>>()?,
    };
    if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(format!("learning rates must be positive, got {bad}"));
    }
    Ok(values)
}
