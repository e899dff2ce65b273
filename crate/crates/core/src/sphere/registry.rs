//! Named test functions and a small expression syntax for configs.
//!
//! Names: `u`, `x`, `y`, `u2` (`u^2 - 1/3`), `xy`, `xz` (`x u`), `Y<l>m<q>` /
//! `Y<l>p<q>` for the real harmonic `Y_{l,-q}` / `Y_{l,q}` (so `Y3m2`), and
//! `lincomb(c1*f1, c2*f2, ...)`; a bare number is a constant function.
//! Scalars accept `pi` factors: `pi/4`, `-2*pi`.

use std::f64::consts::PI;

use super::SphereFunction;
use crate::error::{Error, Result};

/// Parses a scalar such as `0.5`, `pi`, `-pi/3` or `3*pi/4`.
pub fn parse_scalar(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Input(format!("cannot parse '{s}' as a number"));
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest.trim()),
        None => (1.0, s),
    };
    if body.is_empty() {
        return Err(bad());
    }
    let atom = |t: &str| -> Result<f64> {
        let t = t.trim();
        if t == "pi" {
            Ok(PI)
        } else {
            t.parse::<f64>().map_err(|_| bad())
        }
    };
    let mut value = 1.0;
    for (i, factor) in body.split('*').enumerate() {
        let mut parts = factor.split('/');
        let mut v = atom(parts.next().ok_or_else(bad)?)?;
        for d in parts {
            v /= atom(d)?;
        }
        value = if i == 0 { v } else { value * v };
    }
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(sign * value)
}

/// Splits `a, f(b, c), d` at top-level commas.
pub fn split_args(s: &str) -> Result<Vec<&str>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::Input(format!("unbalanced parentheses in '{s}'")));
                }
            }
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::Input(format!("unbalanced parentheses in '{s}'")));
    }
    let last = s[start..].trim();
    if !last.is_empty() || !out.is_empty() {
        out.push(last);
    }
    Ok(out)
}

/// `name(args)` -> `(name, Some(args))`, `name` -> `(name, None)`.
pub fn split_call(s: &str) -> Result<(&str, Option<&str>)> {
    let s = s.trim();
    match s.find('(') {
        None => Ok((s, None)),
        Some(open) => {
            if !s.ends_with(')') {
                return Err(Error::Input(format!("expected ')' at the end of '{s}'")));
            }
            Ok((s[..open].trim(), Some(&s[open + 1..s.len() - 1])))
        }
    }
}

fn harmonic_by_name(name: &str) -> Option<SphereFunction> {
    let rest = name.strip_prefix('Y')?;
    let pos = rest.find(['m', 'p'])?;
    let l: usize = rest[..pos].parse().ok()?;
    let q: i64 = rest[pos + 1..].parse().ok()?;
    let q = if &rest[pos..pos + 1] == "m" { -q } else { q };
    (q.unsigned_abs() as usize <= l).then(|| SphereFunction::harmonic(l, q))
}

/// Resolves a function expression.
pub fn function_by_name(expr: &str) -> Result<SphereFunction> {
    if let Ok(c) = parse_scalar(expr) {
        return Ok(SphereFunction::constant(c));
    }
    let (name, args) = split_call(expr)?;
    if let Some(args) = args {
        if name != "lincomb" {
            return Err(Error::UnknownName(format!("function '{name}'")));
        }
        let mut acc = SphereFunction::zero();
        for term in split_args(args)? {
            acc = &acc + &term_by_name(term)?;
        }
        return Ok(acc);
    }
    let (x, y, u) = (SphereFunction::x(), SphereFunction::y(), SphereFunction::u());
    Ok(match name {
        "u" => u,
        "x" => x,
        "y" => y,
        "u2" => u.product(&u) - SphereFunction::constant(1.0 / 3.0),
        "xy" => x.product(&y),
        "xz" => x.product(&u),
        other => harmonic_by_name(other)
            .ok_or_else(|| Error::UnknownName(format!("function '{other}'")))?,
    })
}

fn term_by_name(term: &str) -> Result<SphereFunction> {
    // The coefficient is everything before the last top-level '*' whose
    // right-hand side is a function name.
    let term = term.trim();
    if let Some(pos) = term.rfind('*') {
        let (coef, name) = (&term[..pos], &term[pos + 1..]);
        if let Ok(f) = function_by_name(name) {
            return Ok(f * parse_scalar(coef)?);
        }
    }
    function_by_name(term)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalars() {
        assert_eq!(parse_scalar("0.5").unwrap(), 0.5);
        assert!((parse_scalar("pi/4").unwrap() - PI / 4.0).abs() < 1e-15);
        assert!((parse_scalar("-3*pi/2").unwrap() + 1.5 * PI).abs() < 1e-15);
        assert!(parse_scalar("abc").is_err());
        assert!(parse_scalar("1/0").is_err());
    }

    #[test]
    fn named_functions() {
        let u2 = function_by_name("u2").unwrap();
        assert!(u2.integrate().abs() < 1e-13);
        assert!((u2.eval(0.5, 0.3) - (0.25 - 1.0 / 3.0)).abs() < 1e-14);
        let xz = function_by_name("xz").unwrap();
        assert!((xz.eval(0.5, 0.0) - 0.5 * 0.75f64.sqrt()).abs() < 1e-14);
        let y = function_by_name("Y3m2").unwrap();
        assert_eq!(y.coeff(3, -2), 1.0);
        assert!(matches!(function_by_name("zz"), Err(Error::UnknownName(_))));
        assert!((function_by_name("1").unwrap().integrate() - 2.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn lincomb_syntax() {
        let f = function_by_name("lincomb(0.5*u, -2*xy, x)").unwrap();
        let g = SphereFunction::u() * 0.5 - function_by_name("xy").unwrap() * 2.0 + SphereFunction::x();
        let d = &f - &g;
        assert!(d.coeffs().iter().all(|c| c.abs() < 1e-15));
        let h = function_by_name("lincomb(pi/4*u)").unwrap();
        assert!((h.eval(1.0, 0.0) - PI / 4.0).abs() < 1e-14);
        assert!(function_by_name("lincomb(0.5*u").is_err());
    }
}
