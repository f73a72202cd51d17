//! Canonical text form of feature graphs.
//!
//! ```text
//! atom      ontdekt  'Nederlander'  'at-pres'
//! number    -12
//! var       X  Num  _tail
//! avm       [cat:np, synsem:[num:plur]]
//! sequence  {die, P}
//! disj      or(2, 3)
//! compound  f(a, B)
//! ```
//!
//! A record is a graph followed by `.` and a newline. Encoding is
//! byte-deterministic. The decoder accepts arbitrary whitespace and `%` line
//! comments between tokens.

use std::borrow::Cow;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};

use super::{normalize_disjuncts, Node};

pub fn to_canonical_text(g: &Node) -> String {
    let mut out = String::new();
    write_node(&mut out, g);
    out
}

/// Canonical text plus the `.\n` record terminator.
pub fn encode_record(g: &Node) -> String {
    let mut out = to_canonical_text(g);
    out.push_str(".\n");
    out
}

fn is_bare_atom(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Renders an atom bare when possible, single-quoted otherwise.
pub fn quote_atom(s: &str) -> Cow<'_, str> {
    if is_bare_atom(s) {
        return Cow::Borrowed(s);
    }
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    for c in s.chars() {
        match c {
            '\'' => out.push_str("\\'"),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('\'');
    Cow::Owned(out)
}

fn write_list(out: &mut String, items: &[Node]) {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_node(out, item);
    }
}

fn write_node(out: &mut String, g: &Node) {
    match g {
        Node::Atom(a) => out.push_str(&quote_atom(a)),
        Node::Number(n) => {
            let _ = write!(out, "{n}");
        }
        Node::Var(v) => out.push_str(v),
        Node::Seq(items) => {
            out.push('{');
            write_list(out, items);
            out.push('}');
        }
        Node::Disj(items) => {
            out.push_str("or(");
            write_list(out, items);
            out.push(')');
        }
        Node::Avm(pairs) => {
            out.push('[');
            for (i, (f, v)) in pairs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&quote_atom(f));
                out.push(':');
                write_node(out, v);
            }
            out.push(']');
        }
        Node::Compound(f, args) => {
            if f == "or" {
                out.push_str("'or'");
            } else {
                out.push_str(&quote_atom(f));
            }
            out.push('(');
            write_list(out, args);
            out.push(')');
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {reason}")]
pub struct DecodeError {
    /// Byte offset into the input.
    pub pos: usize,
    pub line: usize,
    pub col: usize,
    pub reason: String,
}

impl DecodeError {
    fn at(src: &str, pos: usize, reason: impl Into<String>) -> Self {
        let pos = pos.min(src.len());
        let before = &src[..pos];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        DecodeError {
            pos,
            line,
            col,
            reason: reason.into(),
        }
    }
}

/// Source of fresh variable names. Shared by reference; safe across threads.
#[derive(Debug, Default)]
pub struct VarSupply {
    next: AtomicU64,
}

impl Clone for VarSupply {
    fn clone(&self) -> Self {
        VarSupply {
            next: AtomicU64::new(self.next.load(Ordering::Relaxed)),
        }
    }
}

impl VarSupply {
    pub fn new() -> Self {
        Self::default()
    }

    /// `X`, `X_3` both become `X_<n>` for a fresh `n`.
    pub fn fresh(&self, name: &str) -> String {
        let n = self.next.fetch_add(1, Ordering::Relaxed);
        let base = match name.rsplit_once('_') {
            Some((b, digits)) if !b.is_empty() && digits.bytes().all(|c| c.is_ascii_digit()) => b,
            _ => name,
        };
        format!("{base}_{n}")
    }

    /// Renames every variable of `g` apart from anything issued before.
    pub fn freshen(&self, g: &Node) -> Node {
        let mut map: HashMap<String, String> = HashMap::new();
        g.rename_vars(&mut |v| map.entry(v.to_string()).or_insert_with(|| self.fresh(v)).clone())
    }
}

/// Parses canonical text, optionally renaming variables apart.
#[derive(Default)]
pub struct Decoder<'a> {
    supply: Option<&'a VarSupply>,
}

impl<'a> Decoder<'a> {
    pub fn new() -> Self {
        Decoder { supply: None }
    }

    pub fn freshening(supply: &'a VarSupply) -> Self {
        Decoder {
            supply: Some(supply),
        }
    }

    /// Decodes exactly one graph, with or without the trailing `.`.
    pub fn decode(&self, text: &str) -> Result<Node, DecodeError> {
        let mut p = Parser::new(text);
        let node = p.value()?;
        p.skip_ws();
        if p.peek() == Some(b'.') {
            p.pos += 1;
            p.skip_ws();
        }
        if p.pos != text.len() {
            return Err(p.err("trailing input after graph"));
        }
        Ok(match self.supply {
            Some(s) => s.freshen(&node),
            None => node,
        })
    }
}

pub fn from_canonical_text(t: &str) -> Result<Node, DecodeError> {
    Decoder::new().decode(t)
}

/// One `name := value .` record of a lexicon source file.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceRecord {
    pub name: String,
    pub value: Node,
    pub line: usize,
}

/// Parses a lexicon source file: a sequence of `name := value .` records.
pub fn parse_records(text: &str) -> Result<Vec<SourceRecord>, DecodeError> {
    let mut p = Parser::new(text);
    let mut out = Vec::new();
    loop {
        p.skip_ws();
        if p.at_end() {
            return Ok(out);
        }
        let start = p.pos;
        let name = p.atom_text()?;
        p.skip_ws();
        if !p.src[p.pos..].starts_with(":=") {
            return Err(p.err("expected `:=` after record name"));
        }
        p.pos += 2;
        let value = p.value()?;
        p.skip_ws();
        if p.peek() != Some(b'.') {
            return Err(p.err("expected `.` terminating record"));
        }
        p.pos += 1;
        out.push(SourceRecord {
            name,
            value,
            line: DecodeError::at(text, start, "").line,
        });
    }
}

struct Parser<'s> {
    src: &'s str,
    bytes: &'s [u8],
    pos: usize,
}

impl<'s> Parser<'s> {
    fn new(src: &'s str) -> Self {
        Parser {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn err(&self, reason: impl Into<String>) -> DecodeError {
        DecodeError::at(self.src, self.pos, reason)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_ascii_whitespace() {
                self.pos += 1;
            } else if c == b'%' {
                while let Some(c) = self.peek() {
                    if c == b'\n' {
                        break;
                    }
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), DecodeError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{}`", c as char)))
        }
    }

    fn ident(&mut self) -> &'s str {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
        {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn quoted(&mut self) -> Result<String, DecodeError> {
        let open = self.pos;
        self.pos += 1;
        let mut out = String::new();
        loop {
            let rest = &self.src[self.pos..];
            let Some(c) = rest.chars().next() else {
                return Err(DecodeError::at(self.src, open, "unterminated quoted atom"));
            };
            self.pos += c.len_utf8();
            match c {
                '\'' => return Ok(out),
                '\\' => {
                    let esc = self.src[self.pos..].chars().next();
                    self.pos += esc.map_or(0, char::len_utf8);
                    match esc {
                        Some('\'') => out.push('\''),
                        Some('\\') => out.push('\\'),
                        Some('n') => out.push('\n'),
                        Some('t') => out.push('\t'),
                        _ => return Err(self.err("unknown escape in quoted atom")),
                    }
                }
                c => out.push(c),
            }
        }
    }

    /// A bare or quoted atom, as used for record names and feature names.
    fn atom_text(&mut self) -> Result<String, DecodeError> {
        self.skip_ws();
        match self.peek() {
            Some(b'\'') => self.quoted(),
            Some(c) if c.is_ascii_lowercase() => Ok(self.ident().to_string()),
            _ => Err(self.err("expected atom")),
        }
    }

    fn list(&mut self, close: u8) -> Result<Vec<Node>, DecodeError> {
        let mut items = Vec::new();
        self.skip_ws();
        if self.peek() == Some(close) {
            self.pos += 1;
            return Ok(items);
        }
        loop {
            items.push(self.value()?);
            self.skip_ws();
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(c) if c == close => {
                    self.pos += 1;
                    return Ok(items);
                }
                _ => return Err(self.err(format!("expected `,` or `{}`", close as char))),
            }
        }
    }

    fn value(&mut self) -> Result<Node, DecodeError> {
        self.skip_ws();
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Err(self.err("unexpected end of input"));
        };
        match c {
            b'[' => {
                self.pos += 1;
                let mut pairs = Vec::new();
                self.skip_ws();
                if self.peek() == Some(b']') {
                    self.pos += 1;
                    return Ok(Node::Avm(pairs));
                }
                loop {
                    let feature = self.atom_text()?;
                    self.expect(b':')?;
                    let v = self.value()?;
                    pairs.push((feature, v));
                    self.skip_ws();
                    match self.peek() {
                        Some(b',') => self.pos += 1,
                        Some(b']') => {
                            self.pos += 1;
                            return Ok(Node::Avm(pairs));
                        }
                        _ => return Err(self.err("expected `,` or `]` in avm")),
                    }
                }
            }
            b'{' => {
                self.pos += 1;
                Ok(Node::Seq(self.list(b'}')?))
            }
            b'-' | b'0'..=b'9' => {
                if c == b'-' {
                    self.pos += 1;
                }
                let digits = self.ident();
                if digits.is_empty() || !digits.bytes().all(|d| d.is_ascii_digit()) {
                    return Err(DecodeError::at(self.src, start, "malformed number"));
                }
                self.src[start..self.pos]
                    .parse::<i64>()
                    .map(Node::Number)
                    .map_err(|_| DecodeError::at(self.src, start, "number out of range"))
            }
            b'A'..=b'Z' | b'_' => Ok(Node::Var(self.ident().to_string())),
            b'\'' | b'a'..=b'z' => {
                let bare = c != b'\'';
                let name = self.atom_text()?;
                if self.peek() != Some(b'(') {
                    return Ok(Node::Atom(name));
                }
                self.pos += 1;
                let args = self.list(b')')?;
                if args.is_empty() {
                    return Err(DecodeError::at(self.src, start, "compound with no arguments"));
                }
                if bare && name == "or" {
                    if !args.iter().all(Node::is_atomic) {
                        return Err(DecodeError::at(
                            self.src,
                            start,
                            "disjunction members must be atoms or numbers",
                        ));
                    }
                    let mut args = args;
                    normalize_disjuncts(&mut args);
                    return Ok(Node::Disj(args));
                }
                Ok(Node::Compound(name, args))
            }
            _ => Err(self.err(format!("unexpected character `{}`", c as char))),
        }
    }
}
