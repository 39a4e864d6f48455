//! Fact files and extension-pair files.
//!
//! A fact file holds one atom per line, `rel(c1,c2,...).`, with `#`
//! comments. Relation names may carry selections, `r[1=a](b).`
//!
//! A pair file is a fact file split into sections by `#anchor` and
//! `#extension` header lines; lines before the first header belong to the
//! extension. A header may list additional elements of its section, e.g.
//! `#anchor x y`.

use std::fmt::Write as _;

use crate::core_ops::ExtensionPair;
use crate::error::{Error, Result};
use crate::relational::{is_ident, split_args, split_atom, Structure, Symbol};

fn parse_fact_line(line: &str, lineno: usize, into: &mut Structure) -> Result<()> {
    let col = line.len() - line.trim_start().len() + 1;
    let body = line.trim();
    let body = body.strip_suffix('.').unwrap_or(body).trim_end();
    let fail = |msg: String| Error::parse(lineno, col, msg);
    let (head, rest) = split_atom(body).map_err(|e| fail(e.to_string()))?;
    let symbol: Symbol = head.parse().map_err(|e: Error| fail(e.to_string()))?;
    if symbol.base().starts_with("__") {
        return Err(fail(format!(
            "relation names starting with `__` are reserved: {}",
            symbol.base()
        )));
    }
    let mut tuple = Vec::new();
    for a in split_args(rest) {
        if !is_ident(a) {
            return Err(fail(format!("invalid constant `{a}`")));
        }
        tuple.push(a.to_string());
    }
    into.add_tuple(symbol, tuple)
        .map_err(|e| fail(e.to_string()))
}

pub fn parse_facts(text: &str) -> Result<Structure> {
    let mut s = Structure::new();
    for (i, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        parse_fact_line(content, i + 1, &mut s)?;
    }
    Ok(s)
}

pub fn parse_pair(text: &str) -> Result<ExtensionPair> {
    let mut pair = ExtensionPair::default();
    let mut in_anchor = false;
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if let Some(header) = trimmed.strip_prefix('#') {
            let mut words = header.split_whitespace();
            match words.next() {
                Some("anchor") => in_anchor = true,
                Some("extension") => in_anchor = false,
                _ => continue,
            }
            let target = if in_anchor {
                &mut pair.anchor
            } else {
                &mut pair.extension
            };
            for w in words {
                if !is_ident(w) {
                    return Err(Error::parse(i + 1, 1, format!("invalid element `{w}`")));
                }
                target.add_element(w);
            }
            continue;
        }
        let content = line.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let target = if in_anchor {
            &mut pair.anchor
        } else {
            &mut pair.extension
        };
        parse_fact_line(content, i + 1, target)?;
    }
    Ok(pair)
}

/// Fact-file text for `s`. Elements without facts are listed in a leading
/// comment.
pub fn write_facts(s: &Structure) -> String {
    let mut out = String::new();
    for atom in s.atoms() {
        let _ = writeln!(out, "{atom}.");
    }
    out
}

pub fn write_pair(pair: &ExtensionPair) -> String {
    let mut out = String::new();
    for (header, s) in [("anchor", &pair.anchor), ("extension", &pair.extension)] {
        let used: std::collections::BTreeSet<&str> = s
            .relations()
            .values()
            .flatten()
            .flatten()
            .map(String::as_str)
            .collect();
        let isolated: Vec<&str> = s
            .domain()
            .iter()
            .map(String::as_str)
            .filter(|e| !used.contains(e))
            .collect();
        let _ = writeln!(out, "#{header} {}", isolated.join(" ").trim_end());
        out.push_str(&write_facts(s));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticket_facts() {
        let d = parse_facts(
            "# tickets\nticket(1).\nclass(1,E).\nseatclass(1,E). # first\nempty(1)\n\nnone().\n",
        )
        .unwrap();
        assert_eq!(d.tuple_count(), 5);
        assert!(d.contains(&Symbol::new("none"), &[]));
        assert_eq!(d.domain().len(), 2);
    }

    #[test]
    fn fact_errors() {
        assert!(matches!(
            parse_facts("a(1).\na(1,2).\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_facts("a(1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse_facts("a(x-y).").is_err());
        assert!(parse_facts("__cia(1).").is_err());
    }

    #[test]
    fn annotated_facts_round_trip() {
        let d = parse_facts("r[1=a](b).\ne(a,b).\n").unwrap();
        assert_eq!(parse_facts(&write_facts(&d)).unwrap(), d);
    }

    #[test]
    fn pair_sections() {
        let pair = parse_pair("#anchor x\na(x).\n#extension\nr(x,y).\n").unwrap();
        assert_eq!(pair.anchor.tuple_count(), 1);
        assert_eq!(pair.extension.tuple_count(), 1);
        let bare = parse_pair("#anchor y\n#extension\nr2(y,z).\nr3(z,w).\n").unwrap();
        assert_eq!(bare.anchor, Structure::with_domain(["y"]));
        assert_eq!(parse_pair(&write_pair(&bare)).unwrap(), bare);
    }
}
