//! Well-formedness checks for compiled entries.

use std::collections::HashSet;
use std::fmt;

use crate::category::Category;
use crate::entry::{CONCEPT_PATH, PHON_PATH, TYPE_PATH};
use crate::feature_graph::Node;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NotAvm,
    MissingFeature(&'static str),
    NotAtomic(&'static str),
    MalformedType,
    /// A variable used only inside one `arg` sub-graph and not marked local
    /// with a leading `_`.
    UnlinkedArgVar(String),
    /// A category argument whose link names no `arg` sub-graph's `id`.
    DanglingLink(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotAvm => f.write_str("not-avm"),
            Violation::MissingFeature(n) => write!(f, "missing-feature({n})"),
            Violation::NotAtomic(n) => write!(f, "not-atomic({n})"),
            Violation::MalformedType => f.write_str("malformed-type"),
            Violation::UnlinkedArgVar(v) => write!(f, "unlinked-arg-var({v})"),
            Violation::DanglingLink(v) => write!(f, "dangling-link({v})"),
        }
    }
}

/// All violations of `g`, in a fixed order; empty means valid.
pub fn violations(g: &Node) -> Vec<Violation> {
    let Node::Avm(pairs) = g else {
        return vec![Violation::NotAvm];
    };
    let mut out = Vec::new();
    for (name, path) in [("CONCEPT", &*CONCEPT_PATH), ("PHON", &*PHON_PATH)] {
        match g.get(path) {
            None => out.push(Violation::MissingFeature(name)),
            Some(Node::Atom(_)) => {}
            Some(_) => out.push(Violation::NotAtomic(name)),
        }
    }
    let category = match g.get(&TYPE_PATH) {
        None => {
            out.push(Violation::MissingFeature("TYPE"));
            None
        }
        Some(t) => match Category::from_node(t) {
            Ok(c) => Some(c),
            Err(_) => {
                out.push(Violation::MalformedType);
                None
            }
        },
    };

    let args: Vec<&Node> = pairs.iter().filter(|(f, _)| f == "arg").map(|(_, v)| v).collect();
    for (i, arg) in args.iter().enumerate() {
        let mut outside: HashSet<String> = HashSet::new();
        for (j, (f, v)) in pairs.iter().enumerate() {
            let is_this = f == "arg" && pairs[..j].iter().filter(|(f, _)| f == "arg").count() == i;
            if !is_this {
                v.visit_vars(&mut |name| {
                    outside.insert(name.to_string());
                });
            }
        }
        for v in arg.vars() {
            if !v.starts_with('_') && !outside.contains(&v) {
                out.push(Violation::UnlinkedArgVar(v));
            }
        }
    }

    if let Some(c) = category {
        let ids: Vec<&str> = args
            .iter()
            .filter_map(|a| match a.feature("id", 0) {
                Some(Node::Var(v)) => Some(v.as_str()),
                _ => None,
            })
            .collect();
        for (_, arg) in c.args() {
            if let Some(link) = &arg.link {
                if !ids.contains(&link.as_str()) {
                    out.push(Violation::DanglingLink(link.clone()));
                }
            }
        }
    }
    out
}

/// `Ok` or every violation found.
pub fn validate(g: &Node) -> Result<(), Vec<Violation>> {
    match violations(g) {
        v if v.is_empty() => Ok(()),
        v => Err(v),
    }
}
