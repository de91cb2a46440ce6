//! Parser for the compact call-like specification strings used in configs,
//! e.g. `powerexp(alpha=0,beta=2)` or `distance(a=0.5,interval=0,1)`.
//!
//! Arguments are split on top-level commas. `key=value` starts a named
//! argument; a bare value after a named argument extends that argument's
//! value list, otherwise it is positional. Nested calls such as
//! `mf(power(2),c=1.5)` are kept intact as single values.

use std::fmt;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SpecCall {
    pub name: String,
    pub positional: Vec<String>,
    pub named: Vec<(String, Vec<String>)>,
}

fn err(input: &str, reason: impl Into<String>) -> Error {
    Error::Spec {
        input: input.to_string(),
        reason: reason.into(),
    }
}

fn split_top_level(s: &str, input: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(err(input, "unbalanced ')'"));
                }
                cur.push(ch);
            }
            ',' if depth == 0 => out.push(std::mem::take(&mut cur)),
            _ => cur.push(ch),
        }
    }
    if depth != 0 {
        return Err(err(input, "unbalanced '('"));
    }
    out.push(cur);
    Ok(out.into_iter().map(|t| t.trim().to_string()).collect())
}

/// Position of the first `=` outside parentheses.
fn top_level_eq(s: &str) -> Option<usize> {
    let mut depth = 0i32;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '=' if depth == 0 => return Some(i),
            _ => {}
        }
    }
    None
}

impl SpecCall {
    pub fn parse(input: &str) -> Result<Self> {
        let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(err(input, "empty specification"));
        }
        let Some(open) = s.find('(') else {
            if s.contains(')') || s.contains(',') || s.contains('=') {
                return Err(err(input, "arguments must be enclosed in parentheses"));
            }
            return Ok(Self {
                name: s.to_lowercase(),
                positional: vec![],
                named: vec![],
            });
        };
        if !s.ends_with(')') {
            return Err(err(input, "trailing characters after ')'"));
        }
        let name = s[..open].to_lowercase();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(err(input, "missing or invalid name"));
        }
        let body = &s[open + 1..s.len() - 1];
        let mut call = Self {
            name,
            positional: vec![],
            named: vec![],
        };
        if body.is_empty() {
            return Ok(call);
        }
        for tok in split_top_level(body, input)? {
            if tok.is_empty() {
                return Err(err(input, "empty argument"));
            }
            if let Some(eq) = top_level_eq(&tok) {
                let key = tok[..eq].to_lowercase();
                let value = tok[eq + 1..].to_string();
                if key.is_empty() || value.is_empty() {
                    return Err(err(input, format!("malformed argument `{tok}`")));
                }
                if call.named.iter().any(|(k, _)| *k == key) {
                    return Err(err(input, format!("duplicate key `{key}`")));
                }
                call.named.push((key, vec![value]));
            } else if let Some(last) = call.named.last_mut() {
                last.1.push(tok);
            } else {
                call.positional.push(tok);
            }
        }
        Ok(call)
    }

    pub fn get(&self, key: &str) -> Option<&[String]> {
        self.named
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_slice())
    }

    /// Named argument `key`, or else positional argument `pos`, as a number.
    pub fn num(&self, key: &str, pos: usize) -> Result<Option<f64>> {
        let raw = match self.get(key) {
            Some([v]) => Some(v.as_str()),
            Some(_) => return Err(self.err(format!("`{key}` takes one value"))),
            None => self.positional.get(pos).map(String::as_str),
        };
        raw.map(|v| parse_num(v).ok_or_else(|| self.err(format!("`{v}` is not a number"))))
            .transpose()
    }

    pub fn require(&self, key: &str, pos: usize) -> Result<f64> {
        self.num(key, pos)?
            .ok_or_else(|| self.err(format!("missing `{key}`")))
    }

    pub fn nums(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|vs| {
                vs.iter()
                    .map(|v| parse_num(v).ok_or_else(|| self.err(format!("`{v}` is not a number"))))
                    .collect()
            })
            .transpose()
    }

    /// Rejects keys outside `allowed` and more than `max_positional` bare values.
    pub fn check(&self, allowed: &[&str], max_positional: usize) -> Result<()> {
        if let Some((k, _)) = self
            .named
            .iter()
            .find(|(k, _)| !allowed.contains(&k.as_str()))
        {
            return Err(self.err(format!("unknown key `{k}`")));
        }
        if self.positional.len() > max_positional {
            return Err(self.err(format!("at most {max_positional} positional arguments")));
        }
        Ok(())
    }

    pub fn err(&self, reason: impl Into<String>) -> Error {
        err(&self.to_string(), reason)
    }
}

pub fn parse_num(s: &str) -> Option<f64> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        t => t.parse::<f64>().ok().filter(|x| !x.is_nan()),
    }
}

/// Shortest round-tripping rendering of a number, `inf` for infinities.
pub fn fmt_num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x}")
    }
}

impl fmt::Display for SpecCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        if self.positional.is_empty() && self.named.is_empty() {
            return Ok(());
        }
        let mut parts: Vec<String> = self.positional.clone();
        for (k, vs) in &self.named {
            parts.push(format!("{k}={}", vs.join(",")));
        }
        write!(f, "({})", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_name() {
        let c = SpecCall::parse(" Exp ").unwrap();
        assert_eq!(c.name, "exp");
        assert_eq!(c.to_string(), "exp");
    }

    #[test]
    fn named_and_trailing_values() {
        let c = SpecCall::parse("distance(a=0.5, interval=0,1)").unwrap();
        assert_eq!(c.get("interval").unwrap(), ["0", "1"]);
        assert_eq!(c.num("a", 0).unwrap(), Some(0.5));
        assert_eq!(c.nums("interval").unwrap().unwrap(), vec![0.0, 1.0]);
        assert_eq!(c.to_string(), "distance(a=0.5,interval=0,1)");
    }

    #[test]
    fn positional_and_nested() {
        let c = SpecCall::parse("mf(powerlog(2,1),c=1.5)").unwrap();
        assert_eq!(c.positional, vec!["powerlog(2,1)"]);
        assert_eq!(c.num("c", 9).unwrap(), Some(1.5));
        let inner = SpecCall::parse(&c.positional[0]).unwrap();
        assert_eq!(inner.require("alpha", 1).unwrap(), 1.0);
    }

    #[test]
    fn explicit_triple_keys_hold_calls() {
        let c = SpecCall::parse("explicit(P=power(4),Q=power(4,0.01))").unwrap();
        assert_eq!(c.get("p").unwrap(), ["power(4)"]);
        assert_eq!(c.get("q").unwrap(), ["power(4,0.01)"]);
    }

    #[test]
    fn infinities() {
        let c = SpecCall::parse("lebesgue(interval=-inf,inf)").unwrap();
        assert_eq!(
            c.nums("interval").unwrap().unwrap(),
            vec![f64::NEG_INFINITY, f64::INFINITY]
        );
        assert_eq!(fmt_num(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn malformed() {
        for bad in [
            "",
            "power(2",
            "power2)",
            "power(2)x",
            "f(a=)",
            "f(a=1,a=2)",
            "f(,)",
            "(1)",
        ] {
            assert!(SpecCall::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn canonical_round_trip() {
        for s in [
            "powerexp(alpha=0,beta=2)",
            "power(3)",
            "mf(power(2),c=2)",
            "exp",
        ] {
            let c = SpecCall::parse(s).unwrap();
            assert_eq!(SpecCall::parse(&c.to_string()).unwrap(), c);
            assert_eq!(c.to_string(), s);
        }
    }
}
