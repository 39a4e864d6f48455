//! The `SELECT … WHERE { … OPTIONAL { … } }` query language.
//!
//! ```text
//! query := SELECT (var* | '*') WHERE group
//! group := '{' (atom '.'?)* (OPTIONAL group)* '}'
//! atom  := name '(' (var (',' var)*)? ')'
//! var   := '?' [A-Za-z0-9_]+
//! ```
//!
//! Keywords are case-insensitive and `#` starts a comment.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::pattern::{NodeId, PatternTree};
use crate::relational::{Atom, Symbol, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Var(String),
    Star,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Dot,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Var(v) => format!("`?{v}`"),
            Tok::Star => "`*`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

struct Cursor {
    chars: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
}

impl Cursor {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn bump(&mut self) {
        if self.peek() == Some('\n') {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        self.i += 1;
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize, usize)>> {
    let mut out = Vec::new();
    let mut cur = Cursor {
        chars: text.chars().collect(),
        i: 0,
        line: 1,
        col: 1,
    };
    while let Some(c) = cur.peek() {
        let (l, k) = (cur.line, cur.col);
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            while cur.peek().is_some_and(|c| c != '\n') {
                cur.bump();
            }
            continue;
        }
        let single = match c {
            '*' => Some(Tok::Star),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, l, k));
            cur.bump();
            continue;
        }
        let is_var = c == '?';
        if is_var {
            cur.bump();
        }
        let start = cur.i;
        while cur.peek().is_some_and(is_name_char) {
            cur.bump();
        }
        if start == cur.i {
            let message = if is_var {
                "expected a variable name after `?`".to_string()
            } else {
                format!("unexpected character `{c}`")
            };
            return Err(Error::parse(cur.line, cur.col, message));
        }
        let word: String = cur.chars[start..cur.i].iter().collect();
        out.push((
            if is_var {
                Tok::Var(word)
            } else {
                Tok::Word(word)
            },
            l,
            k,
        ));
    }
    out.push((Tok::End, cur.line, cur.col));
    Ok(out)
}

impl Lexer {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn next(&mut self) -> (Tok, usize, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> Error {
        let (_, l, c) = &self.toks[self.pos];
        Error::parse(*l, *c, message)
    }

    fn expect(&mut self, want: Tok, context: &str) -> Result<()> {
        if *self.peek() == want {
            self.next();
            Ok(())
        } else {
            Err(self.error_here(format!(
                "expected {} {context}, found {}",
                want.describe(),
                self.peek().describe()
            )))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        match self.peek() {
            Tok::Word(w) if w.eq_ignore_ascii_case(kw) => {
                self.next();
                Ok(())
            }
            other => Err(self.error_here(format!("expected {kw}, found {}", other.describe()))),
        }
    }
}

/// Non-fatal findings of the parser.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    /// A selected variable occurs in no atom.
    UnknownVariable(String),
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::UnknownVariable(v) => write!(f, "selected variable ?{v} occurs in no atom"),
        }
    }
}

pub fn parse_query(text: &str) -> Result<PatternTree> {
    parse_query_with_warnings(text).map(|(p, _)| p)
}

pub fn parse_query_with_warnings(text: &str) -> Result<(PatternTree, Vec<Warning>)> {
    let mut lx = Lexer {
        toks: lex(text)?,
        pos: 0,
    };
    lx.keyword("SELECT")?;
    let mut selected: Option<Vec<String>> = Some(Vec::new());
    if *lx.peek() == Tok::Star {
        lx.next();
        selected = None;
    } else {
        while let Tok::Var(v) = lx.peek().clone() {
            lx.next();
            let list = selected.as_mut().expect("list");
            if !list.contains(&v) {
                list.push(v);
            }
        }
    }
    lx.keyword("WHERE")?;
    let mut nodes: Vec<(Option<usize>, Vec<Atom>)> = Vec::new();
    group(&mut lx, None, &mut nodes)?;
    if *lx.peek() != Tok::End {
        return Err(lx.error_here(format!(
            "unexpected {} after the query",
            lx.peek().describe()
        )));
    }
    let all: BTreeSet<String> = nodes
        .iter()
        .flat_map(|(_, atoms)| atoms.iter().flat_map(|a| a.vars().map(str::to_string)))
        .collect();
    let free: Vec<String> = selected.unwrap_or_else(|| all.iter().cloned().collect());
    let warnings = free
        .iter()
        .filter(|v| !all.contains(*v))
        .map(|v| Warning::UnknownVariable(v.clone()))
        .collect();
    let tree = PatternTree::new(nodes, free).map_err(|e| Error::parse(1, 1, e.to_string()))?;
    Ok((tree, warnings))
}

fn group(
    lx: &mut Lexer,
    parent: Option<usize>,
    nodes: &mut Vec<(Option<usize>, Vec<Atom>)>,
) -> Result<()> {
    lx.expect(Tok::LBrace, "to open a group")?;
    let me = nodes.len();
    nodes.push((parent, Vec::new()));
    let mut seen_optional = false;
    loop {
        match lx.peek().clone() {
            Tok::RBrace => {
                lx.next();
                return Ok(());
            }
            Tok::Word(w) if w.eq_ignore_ascii_case("OPTIONAL") => {
                lx.next();
                seen_optional = true;
                group(lx, Some(me), nodes)?;
            }
            Tok::Word(_) => {
                if seen_optional {
                    return Err(
                        lx.error_here("atoms must precede the OPTIONAL groups of their group")
                    );
                }
                let (line, col) = (lx.toks[lx.pos].1, lx.toks[lx.pos].2);
                let a = atom(lx)?;
                let clash = nodes
                    .iter()
                    .flat_map(|(_, atoms)| atoms)
                    .find(|b| b.symbol == a.symbol && b.args.len() != a.args.len());
                if let Some(b) = clash {
                    return Err(Error::parse(
                        line,
                        col,
                        format!(
                            "{} is used with arity {} and {}",
                            a.symbol,
                            b.args.len(),
                            a.args.len()
                        ),
                    ));
                }
                nodes[me].1.push(a);
                if *lx.peek() == Tok::Dot {
                    lx.next();
                }
            }
            other => {
                return Err(lx.error_here(format!(
                    "expected an atom, OPTIONAL or `}}`, found {}",
                    other.describe()
                )))
            }
        }
    }
}

fn atom(lx: &mut Lexer) -> Result<Atom> {
    let (tok, line, col) = lx.next();
    let Tok::Word(name) = tok else {
        unreachable!("caller checked")
    };
    if name.starts_with("__") {
        return Err(Error::parse(
            line,
            col,
            format!("relation names starting with `__` are reserved: {name}"),
        ));
    }
    if name.starts_with(|c: char| c.is_ascii_digit()) {
        return Err(Error::parse(
            line,
            col,
            format!("relation name `{name}` starts with a digit"),
        ));
    }
    lx.expect(Tok::LParen, &format!("after relation name `{name}`"))?;
    let mut args = Vec::new();
    if *lx.peek() != Tok::RParen {
        loop {
            match lx.peek().clone() {
                Tok::Var(v) => {
                    lx.next();
                    args.push(Term::Var(v));
                }
                Tok::Word(w) => {
                    return Err(lx.error_here(format!(
                        "constants are not supported in queries (`{w}`); variables start with `?`"
                    )))
                }
                other => {
                    return Err(
                        lx.error_here(format!("expected a variable, found {}", other.describe()))
                    )
                }
            }
            if *lx.peek() == Tok::Comma {
                lx.next();
            } else {
                break;
            }
        }
    }
    lx.expect(Tok::RParen, "to close the argument list")?;
    Ok(Atom::new(Symbol::new(name), args))
}

/// Query text for `p`; parsing it gives back `p`.
pub fn to_query_text(p: &PatternTree) -> String {
    let mut out = String::from("SELECT");
    if p.is_projection_free() && p.dangling_free_vars().is_empty() && !p.free_vars().is_empty() {
        out.push_str(" *");
    } else {
        for v in p.free_vars() {
            let _ = write!(out, " ?{v}");
        }
    }
    out.push_str(" WHERE ");
    write_group(p, p.root(), 0, &mut out);
    out.push('\n');
    out
}

fn write_group(p: &PatternTree, t: NodeId, depth: usize, out: &mut String) {
    out.push_str("{\n");
    let pad = "  ".repeat(depth + 1);
    for a in p.label(t) {
        let args: Vec<String> = a.args.iter().map(|x| format!("?{}", x.name())).collect();
        let _ = writeln!(out, "{pad}{}({})", a.symbol, args.join(", "));
    }
    for &c in p.children(t) {
        let _ = write!(out, "{pad}OPTIONAL ");
        write_group(p, c, depth + 1, out);
        out.push('\n');
    }
    out.push_str(&"  ".repeat(depth));
    out.push('}');
}

#[cfg(test)]
mod tests {
    use super::*;

    const P1: &str = "SELECT * WHERE { ticket(?t) OPTIONAL { seatclass(?s,?c) empty(?s) class(?t,?c) } OPTIONAL { seatclass(?s,?c) empty(?s) } }";

    #[test]
    fn ticket_query() {
        let p = parse_query(P1).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.children(0), &[1, 2]);
        assert_eq!(p.label(1).len(), 3);
        assert!(p.is_projection_free());
        assert_eq!(p.free_vars().len(), 3);
    }

    #[test]
    fn projection() {
        let p = parse_query("SELECT ?x ?w WHERE { r1(?x,?y) OPTIONAL { r2(?y,?z) r3(?z,?w) } }")
            .unwrap();
        assert_eq!(
            p.free_vars().iter().cloned().collect::<Vec<_>>(),
            ["w", "x"]
        );
        assert!(p.is_well_designed() && !p.is_projection_free());
        let single = parse_query("select ?x where { a(?x) . }").unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn round_trip() {
        for q in [
            P1,
            "SELECT ?x ?w WHERE { r1(?x,?y) OPTIONAL { r2(?y,?z) OPTIONAL { r3(?z,?w) } } OPTIONAL { } }",
            "SELECT WHERE { z() }",
        ] {
            let p = parse_query(q).unwrap();
            assert_eq!(parse_query(&to_query_text(&p)).unwrap(), p, "{}", to_query_text(&p));
        }
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_query("SELECT ?x WHERE {\n  a(?x\n}").unwrap_err();
        assert!(
            matches!(
                err,
                Error::Parse {
                    line: 3,
                    column: 1,
                    ..
                }
            ),
            "{err}"
        );
        let err = parse_query("SELECT ?x WHERE { a(x) }").unwrap_err();
        assert!(
            matches!(
                err,
                Error::Parse {
                    line: 1,
                    column: 21,
                    ..
                }
            ),
            "{err}"
        );
        assert!(parse_query("SELECT ?x WHERE { __cia(?x) }").is_err());
        assert!(parse_query("SELECT ?x WHERE { OPTIONAL { a(?x) } b(?x) }").is_err());
        assert!(parse_query("SELECT ?x WHERE { a(?x) } extra").is_err());
        assert!(parse_query("SELECT ?x WHERE { a(?x) a(?x,?y) }").is_err());
    }

    #[test]
    fn unknown_selected_variable_warns() {
        let (_, w) = parse_query_with_warnings("SELECT ?x ?q WHERE { a(?x) }").unwrap();
        assert_eq!(w, vec![Warning::UnknownVariable("q".into())]);
    }
}
