//! Directional categorial types.
//!
//! In an entry the category lives under `type` as a compound:
//!
//! ```text
//! cat(s, {arg(np, '0', A)}, {arg(np, '0', B)})      % s\np/np
//! ```
//!
//! Each argument carries its category (an atom, or a nested `cat(..)`), an
//! opaque mode tag and an optional link variable naming the `arg` sub-graph
//! whose `id` it is. The textual key `s\np/np` is the type index key.

use std::fmt;

use crate::feature_graph::Node;

/// Mode tag that is left out of keys.
pub const DEFAULT_MODE: &str = "0";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Category {
    pub result: String,
    pub left: Vec<CatArg>,
    pub right: Vec<CatArg>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CatArg {
    pub category: Category,
    pub mode: String,
    pub link: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Left,
    Right,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Left => "left",
            Direction::Right => "right",
        })
    }
}

/// Canonical rendering of a category; injective on link-free categories.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeKey(String);

impl TypeKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for TypeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CategoryError {
    #[error("malformed type: {0}")]
    Malformed(String),
    #[error("bad category notation `{text}` at {pos}")]
    Syntax { text: String, pos: usize },
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl CatArg {
    pub fn new(category: Category) -> Self {
        CatArg {
            category,
            mode: DEFAULT_MODE.to_string(),
            link: None,
        }
    }

    pub fn with_mode(mut self, mode: &str) -> Self {
        self.mode = mode.to_string();
        self
    }

    pub fn with_link(mut self, link: &str) -> Self {
        self.link = Some(link.to_string());
        self
    }
}

impl Category {
    pub fn atomic(result: &str) -> Self {
        Category {
            result: result.to_string(),
            left: Vec::new(),
            right: Vec::new(),
        }
    }

    pub fn is_atomic(&self) -> bool {
        self.left.is_empty() && self.right.is_empty()
    }

    /// Sentential categories end a derivation.
    pub fn is_sentential(&self) -> bool {
        self.is_atomic() && matches!(self.result.as_str(), "s" | "q")
    }

    /// Arguments in stack order: left arguments in written order, then
    /// right ones, so the rightmost argument is pushed last.
    pub fn args(&self) -> impl Iterator<Item = (Direction, &CatArg)> {
        self.left
            .iter()
            .map(|a| (Direction::Left, a))
            .chain(self.right.iter().map(|a| (Direction::Right, a)))
    }

    /// Same category with every link dropped.
    pub fn erase_links(&self) -> Category {
        let strip = |args: &[CatArg]| {
            args.iter()
                .map(|a| CatArg {
                    category: a.category.erase_links(),
                    mode: a.mode.clone(),
                    link: None,
                })
                .collect()
        };
        Category {
            result: self.result.clone(),
            left: strip(&self.left),
            right: strip(&self.right),
        }
    }

    pub fn key(&self) -> TypeKey {
        let mut out = String::new();
        self.write_key(&mut out);
        TypeKey(out)
    }

    fn write_key(&self, out: &mut String) {
        out.push_str(&self.result);
        for (dir, arg) in self.args() {
            out.push(match dir {
                Direction::Left => '\\',
                Direction::Right => '/',
            });
            if arg.category.is_atomic() {
                out.push_str(&arg.category.result);
            } else {
                out.push('(');
                arg.category.write_key(out);
                out.push(')');
            }
            if arg.mode != DEFAULT_MODE {
                out.push('^');
                out.push_str(&arg.mode);
            }
        }
    }

    /// Reads the `type` compound of an entry.
    pub fn from_node(node: &Node) -> Result<Self, CategoryError> {
        let bad = || CategoryError::Malformed(node.to_string());
        let Node::Compound(f, args) = node else {
            return Err(bad());
        };
        let [result, Node::Seq(left), Node::Seq(right)] = args.as_slice() else {
            return Err(bad());
        };
        if f != "cat" {
            return Err(bad());
        }
        let result = match result {
            Node::Atom(r) if valid_name(r) => r.clone(),
            _ => return Err(bad()),
        };
        let convert = |items: &[Node]| -> Result<Vec<CatArg>, CategoryError> {
            items.iter().map(Self::arg_from_node).collect()
        };
        Ok(Category {
            result,
            left: convert(left)?,
            right: convert(right)?,
        })
    }

    fn arg_from_node(node: &Node) -> Result<CatArg, CategoryError> {
        let bad = || CategoryError::Malformed(node.to_string());
        let Node::Compound(f, parts) = node else {
            return Err(bad());
        };
        if f != "arg" || !(2..=3).contains(&parts.len()) {
            return Err(bad());
        }
        let category = match &parts[0] {
            Node::Atom(a) if valid_name(a) => Category::atomic(a),
            n @ Node::Compound(..) => Category::from_node(n)?,
            _ => return Err(bad()),
        };
        let mode = match &parts[1] {
            Node::Atom(m) if valid_name(m) => m.clone(),
            Node::Number(n) if *n >= 0 => n.to_string(),
            _ => return Err(bad()),
        };
        let link = match parts.get(2) {
            None => None,
            Some(Node::Var(v)) => Some(v.clone()),
            Some(_) => return Err(bad()),
        };
        Ok(CatArg {
            category,
            mode,
            link,
        })
    }

    /// Compound form, the inverse of [`Category::from_node`].
    pub fn to_node(&self) -> Node {
        let arg = |a: &CatArg| {
            let cat = if a.category.is_atomic() {
                Node::atom(&a.category.result)
            } else {
                a.category.to_node()
            };
            let mut parts = vec![cat, Node::atom(&a.mode)];
            if let Some(l) = &a.link {
                parts.push(Node::var(l));
            }
            Node::Compound("arg".into(), parts)
        };
        Node::Compound(
            "cat".into(),
            vec![
                Node::atom(&self.result),
                Node::Seq(self.left.iter().map(arg).collect()),
                Node::Seq(self.right.iter().map(arg).collect()),
            ],
        )
    }

    /// Parses slash notation such as `s\np/np`, `np/(n/n)^wh`.
    pub fn parse(text: &str) -> Result<Self, CategoryError> {
        let mut p = KeyParser { text, pos: 0 };
        let c = p.category()?;
        if p.pos != text.len() {
            return Err(p.err());
        }
        Ok(c)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key().as_str())
    }
}

struct KeyParser<'a> {
    text: &'a str,
    pos: usize,
}

impl KeyParser<'_> {
    fn err(&self) -> CategoryError {
        CategoryError::Syntax {
            text: self.text.to_string(),
            pos: self.pos,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.text.as_bytes().get(self.pos).copied()
    }

    fn name(&mut self) -> Result<String, CategoryError> {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err());
        }
        Ok(self.text[start..self.pos].to_string())
    }

    fn category(&mut self) -> Result<Category, CategoryError> {
        let mut cat = Category::atomic(&self.name()?);
        while let Some(c @ (b'\\' | b'/')) = self.peek() {
            self.pos += 1;
            let inner = if self.peek() == Some(b'(') {
                self.pos += 1;
                let inner = self.category()?;
                if self.peek() != Some(b')') {
                    return Err(self.err());
                }
                self.pos += 1;
                inner
            } else {
                Category::atomic(&self.name()?)
            };
            let mut arg = CatArg::new(inner);
            if self.peek() == Some(b'^') {
                self.pos += 1;
                arg.mode = self.name()?;
            }
            if c == b'\\' {
                cat.left.push(arg);
            } else {
                cat.right.push(arg);
            }
        }
        Ok(cat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature_graph::from_canonical_text;

    #[test]
    fn key_is_canonical_notation() {
        assert_eq!(Category::parse("s\\np/np").unwrap().key().as_str(), "s\\np/np");
        assert_eq!(Category::parse("np/n").unwrap().key().as_str(), "np/n");
        assert_eq!(Category::parse("np").unwrap().key().as_str(), "np");
        assert_eq!(
            Category::parse("s/(np\\np)^wh").unwrap().key().as_str(),
            "s/(np\\np)^wh"
        );
    }

    #[test]
    fn left_args_render_before_right() {
        let c = Category::parse("s/np\\np").unwrap();
        assert_eq!(c.key().as_str(), "s\\np/np");
    }

    #[test]
    fn mode_tag_changes_key() {
        let a = Category::parse("s\\np/np").unwrap();
        let b = Category::parse("s\\np^wh/np").unwrap();
        assert_ne!(a.key(), b.key());
        assert_eq!(Category::parse("s\\np^0/np").unwrap().key(), a.key());
    }

    #[test]
    fn compound_form_round_trips() {
        let node = from_canonical_text("cat(s, {arg(np, wh, G)}, {arg(np, '0', J)})").unwrap();
        let c = Category::from_node(&node).unwrap();
        assert_eq!(c.key().as_str(), "s\\np^wh/np");
        assert_eq!(c.left[0].link.as_deref(), Some("G"));
        assert_eq!(c.to_node(), node);
        let nested = from_canonical_text("cat(s, {}, {arg(cat(np, {}, {arg(n, '0')}), '0', X)})").unwrap();
        let c = Category::from_node(&nested).unwrap();
        assert_eq!(c.key().as_str(), "s/(np/n)");
        assert_eq!(c.to_node(), nested);
    }

    #[test]
    fn malformed_types_rejected() {
        for bad in ["5", "np", "cat(s)", "cat(S, {}, {})", "cat(s, {np}, {})", "cat('s\\\\x', {}, {})",
            "cat(s, {arg(np, '0', b)}, {})", "kat(s, {}, {})"] {
            let n = from_canonical_text(bad).unwrap();
            assert!(Category::from_node(&n).is_err(), "{bad}");
        }
        assert!(Category::parse("s\\").is_err());
        assert!(Category::parse("s/(np").is_err());
        assert!(Category::parse("").is_err());
    }

    #[test]
    fn sentential() {
        assert!(Category::atomic("s").is_sentential());
        assert!(Category::atomic("q").is_sentential());
        assert!(!Category::atomic("np").is_sentential());
        assert!(!Category::parse("s\\np").unwrap().is_sentential());
    }
}
