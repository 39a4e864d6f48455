use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const MARKER_PREFIX: &str = "__mark_";

/// A relation symbol, optionally carrying selection annotations.
///
/// Projecting a structure under a set of elements moves tuple positions into
/// the symbol: `r3(z,w)` projected under `{z}` becomes `r3[1=z](w)`. The
/// positions always refer to the plain base symbol, so nested projections
/// compose without renumbering.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    base: String,
    selections: Vec<(usize, String)>,
}

impl Symbol {
    pub fn new(base: impl Into<String>) -> Self {
        Symbol {
            base: base.into(),
            selections: Vec::new(),
        }
    }

    /// Builds an annotated symbol. Positions are 1-based and must be strictly
    /// increasing.
    pub fn with_selections(
        base: impl Into<String>,
        selections: Vec<(usize, String)>,
    ) -> Result<Self> {
        let base = base.into();
        if selections.iter().any(|(p, _)| *p == 0)
            || selections.windows(2).any(|w| w[0].0 >= w[1].0)
        {
            return Err(Error::Invalid(format!(
                "selection positions of {base} must be 1-based and strictly increasing"
            )));
        }
        Ok(Symbol { base, selections })
    }

    /// The unary symbol `R_a` pinning element `a` in a singleton marking.
    pub fn marker(element: &str) -> Self {
        Symbol::new(format!("{MARKER_PREFIX}{element}"))
    }

    pub fn is_marker(&self) -> bool {
        self.base.starts_with(MARKER_PREFIX)
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn selections(&self) -> &[(usize, String)] {
        &self.selections
    }

    pub fn is_plain(&self) -> bool {
        self.selections.is_empty()
    }

    /// Original (base) positions, 1-based, of the tuple positions of this
    /// symbol, given the arity of its tuples.
    pub(crate) fn free_positions(&self, tuple_len: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(tuple_len);
        let mut sel = self.selections.iter().map(|(p, _)| *p).peekable();
        let mut pos = 1;
        while out.len() < tuple_len {
            if sel.peek() == Some(&pos) {
                sel.next();
            } else {
                out.push(pos);
            }
            pos += 1;
        }
        out
    }

    pub(crate) fn selections_mut(&mut self) -> &mut Vec<(usize, String)> {
        &mut self.selections
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.base)?;
        if !self.selections.is_empty() {
            f.write_str("[")?;
            for (i, (p, c)) in self.selections.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{p}={c}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

pub(crate) fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl FromStr for Symbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let Some(open) = s.find('[') else {
            if !is_ident(s) {
                return Err(Error::Invalid(format!("invalid relation name `{s}`")));
            }
            return Ok(Symbol::new(s));
        };
        let base = &s[..open];
        let rest = s[open + 1..]
            .strip_suffix(']')
            .ok_or_else(|| Error::Invalid(format!("unterminated selection in `{s}`")))?;
        if !is_ident(base) {
            return Err(Error::Invalid(format!("invalid relation name `{base}`")));
        }
        let mut selections = Vec::new();
        for part in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (pos, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("selection `{part}` lacks `=`")))?;
            let pos: usize = pos
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("bad selection position `{pos}`")))?;
            let value = value.trim();
            if !is_ident(value) {
                return Err(Error::Invalid(format!("bad selection constant `{value}`")));
            }
            selections.push((pos, value.to_string()));
        }
        Symbol::with_selections(base, selections)
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn name(&self) -> &str {
        match self {
            Term::Var(n) | Term::Const(n) => n,
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(n) => Some(n),
            Term::Const(_) => None,
        }
    }
}

/// `R(v1, ..., vk)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub symbol: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(symbol: Symbol, args: Vec<Term>) -> Self {
        Atom { symbol, args }
    }

    /// Atom over variables with a plain symbol.
    pub fn query<S: AsRef<str>>(rel: &str, vars: &[S]) -> Self {
        Atom {
            symbol: Symbol::new(rel),
            args: vars
                .iter()
                .map(|v| Term::Var(v.as_ref().to_string()))
                .collect(),
        }
    }

    pub fn fact<S: AsRef<str>>(rel: &str, consts: &[S]) -> Self {
        Atom {
            symbol: Symbol::new(rel),
            args: consts
                .iter()
                .map(|v| Term::Const(v.as_ref().to_string()))
                .collect(),
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(Term::as_var)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.args.iter().map(Term::name)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.symbol)?;
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(t.name())?;
        }
        f.write_str(")")
    }
}

/// Parses `r(x,y)` with all arguments read as variables; a leading `?` on an
/// argument is accepted and stripped.
impl FromStr for Atom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = split_atom(s)?;
        let symbol: Symbol = head.parse()?;
        let args = split_args(rest)
            .into_iter()
            .map(|a| {
                let a = a.strip_prefix('?').unwrap_or(a);
                if is_ident(a) {
                    Ok(Term::Var(a.to_string()))
                } else {
                    Err(Error::Invalid(format!("invalid variable `{a}` in `{s}`")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Atom { symbol, args })
    }
}

impl Serialize for Atom {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Atom {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Splits `head(args)` into the head and the argument text. The head may
/// itself contain a bracketed selection list.
pub(crate) fn split_atom(s: &str) -> Result<(&str, &str)> {
    let bracket_end = if s.contains('[') {
        s.find(']').map(|i| i + 1).unwrap_or(0)
    } else {
        0
    };
    let open = s[bracket_end..]
        .find('(')
        .map(|i| i + bracket_end)
        .ok_or_else(|| Error::Invalid(format!("expected `(` in `{s}`")))?;
    let close = s
        .rfind(')')
        .filter(|&c| c > open && c == s.len() - 1)
        .ok_or_else(|| Error::Invalid(format!("expected `)` at end of `{s}`")))?;
    Ok((s[..open].trim(), &s[open + 1..close]))
}

pub(crate) fn split_args(s: &str) -> Vec<&str> {
    if s.trim().is_empty() {
        return Vec::new();
    }
    s.split(',').map(str::trim).collect()
}
