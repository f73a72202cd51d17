//! Feature graphs: the value type of entries, constraints and agenda items.
//!
//! A graph is a tree of [`Node`]s in which re-entrancy is expressed by
//! sharing a variable name. Cycles cannot be written down; the unifier's
//! occurs check keeps bindings from introducing them.

mod codec;
mod unify;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

pub use codec::{
    encode_record, from_canonical_text, parse_records, quote_atom, to_canonical_text, DecodeError,
    Decoder, SourceRecord, VarSupply,
};
pub use unify::{resolve, unify, unify_graphs, unify_with, Bindings, ClashPolicy, UnifyError};

/// One node of a feature graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Atom(String),
    Number(i64),
    /// Variable, scoped to one entry. Equal names denote the same value.
    Var(String),
    Seq(Vec<Node>),
    /// Set of atoms and numbers, kept sorted and deduplicated.
    Disj(Vec<Node>),
    /// Attribute-value matrix. A feature name may occur more than once.
    Avm(Vec<(String, Node)>),
    Compound(String, Vec<Node>),
}

impl Node {
    pub fn atom(s: impl Into<String>) -> Node {
        Node::Atom(s.into())
    }

    pub fn var(s: impl Into<String>) -> Node {
        Node::Var(s.into())
    }

    pub fn avm<K: Into<String>>(pairs: impl IntoIterator<Item = (K, Node)>) -> Node {
        Node::Avm(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    /// Builds a disjunction, normalizing member order. Panics on a non-atomic
    /// member; use the decoder for untrusted input.
    pub fn disj(members: impl IntoIterator<Item = Node>) -> Node {
        let mut members: Vec<Node> = members.into_iter().collect();
        assert!(
            members.iter().all(Node::is_atomic),
            "disjunction members must be atoms or numbers"
        );
        normalize_disjuncts(&mut members);
        Node::Disj(members)
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Node::Atom(_) | Node::Number(_))
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Node::Atom(a) => Some(a),
            _ => None,
        }
    }

    /// Value of occurrence `occurrence` of `feature` in an Avm.
    pub fn feature(&self, feature: &str, occurrence: usize) -> Option<&Node> {
        match self {
            Node::Avm(pairs) => pairs
                .iter()
                .filter(|(f, _)| f == feature)
                .nth(occurrence)
                .map(|(_, v)| v),
            _ => None,
        }
    }

    /// Number of occurrences of `feature` in an Avm.
    pub fn feature_count(&self, feature: &str) -> usize {
        match self {
            Node::Avm(pairs) => pairs.iter().filter(|(f, _)| f == feature).count(),
            _ => 0,
        }
    }

    /// Follows `path` through nested Avms.
    pub fn get(&self, path: &Path) -> Option<&Node> {
        let mut cur = self;
        for step in path.steps() {
            cur = cur.feature(&step.feature, step.occurrence as usize)?;
        }
        Some(cur)
    }

    fn feature_slot_mut(&mut self, feature: &str, occurrence: usize) -> Option<&mut Node> {
        match self {
            Node::Avm(pairs) => pairs
                .iter_mut()
                .filter(|(f, _)| f == feature)
                .nth(occurrence)
                .map(|(_, v)| v),
            _ => None,
        }
    }

    pub fn get_mut(&mut self, path: &Path) -> Option<&mut Node> {
        let mut cur = self;
        for step in path.steps() {
            cur = cur.feature_slot_mut(&step.feature, step.occurrence as usize)?;
        }
        Some(cur)
    }

    /// Walks to the parent Avm of `path`'s last step, creating empty Avms for
    /// missing intermediate features.
    fn parent_mut(&mut self, path: &Path) -> Result<&mut Node, PathError> {
        let (_, parents) = path.steps().split_last().ok_or(PathError::Empty)?;
        let mut cur = self;
        for (depth, step) in parents.iter().enumerate() {
            let Node::Avm(pairs) = cur else {
                return Err(PathError::NotAvm(path.prefix(depth)));
            };
            let present = pairs.iter().filter(|(f, _)| *f == step.feature).count();
            let occ = step.occurrence as usize;
            if occ > present {
                return Err(PathError::Gap(path.prefix(depth + 1)));
            }
            if occ == present {
                pairs.push((step.feature.clone(), Node::Avm(Vec::new())));
            }
            cur = cur
                .feature_slot_mut(&step.feature, occ)
                .expect("occurrence exists");
        }
        if !matches!(cur, Node::Avm(_)) {
            return Err(PathError::NotAvm(path.prefix(parents.len())));
        }
        Ok(cur)
    }

    /// Replaces the node at `path`, creating intermediate Avms as needed. The
    /// final occurrence may be one past the last existing one, which appends.
    pub fn set(&mut self, path: &Path, value: Node) -> Result<(), PathError> {
        let last = path.last().ok_or(PathError::Empty)?.clone();
        let parent = self.parent_mut(path)?;
        let present = parent.feature_count(&last.feature);
        let occ = last.occurrence as usize;
        match occ.cmp(&present) {
            std::cmp::Ordering::Less => {
                *parent
                    .feature_slot_mut(&last.feature, occ)
                    .expect("occurrence exists") = value;
            }
            std::cmp::Ordering::Equal => {
                let Node::Avm(pairs) = parent else { unreachable!() };
                pairs.push((last.feature, value));
            }
            std::cmp::Ordering::Greater => return Err(PathError::Gap(path.clone())),
        }
        Ok(())
    }

    /// Appends a new occurrence of the path's final feature. The final
    /// occurrence index is ignored.
    pub fn add(&mut self, path: &Path, value: Node) -> Result<(), PathError> {
        let last = path.last().ok_or(PathError::Empty)?.clone();
        let Node::Avm(pairs) = self.parent_mut(path)? else { unreachable!() };
        pairs.push((last.feature, value));
        Ok(())
    }

    /// Removes the occurrence at `path`; later occurrences shift down.
    pub fn delete(&mut self, path: &Path) -> Result<Node, PathError> {
        let (last, parents) = path.steps().split_last().ok_or(PathError::Empty)?;
        let parent = match parents.is_empty() {
            true => Some(self),
            false => self.get_mut(&Path(parents.to_vec())),
        };
        let Some(Node::Avm(pairs)) = parent else {
            return Err(PathError::Missing(path.clone()));
        };
        let idx = pairs
            .iter()
            .enumerate()
            .filter(|(_, (f, _))| *f == last.feature)
            .nth(last.occurrence as usize)
            .map(|(i, _)| i)
            .ok_or_else(|| PathError::Missing(path.clone()))?;
        Ok(pairs.remove(idx).1)
    }

    /// One `(path, leaf)` pair per leaf reachable through Avm features, in
    /// depth-first document order. Compounds and sequences are leaves.
    pub fn flatten(&self) -> Vec<(Path, Node)> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        flatten_into(self, &mut stack, &mut out);
        out
    }

    /// Rebuilds an Avm skeleton from `(path, value)` pairs. Missing lower
    /// occurrences are filled with empty Avms.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a Path, &'a Node)>) -> Node {
        let mut root = Node::Avm(Vec::new());
        'pairs: for (path, value) in pairs {
            let mut cur = &mut root;
            for (depth, step) in path.steps().iter().enumerate() {
                let Node::Avm(items) = cur else {
                    // a pair below a leaf cannot be represented
                    continue 'pairs;
                };
                let last = depth + 1 == path.len();
                let mut have = items.iter().filter(|(f, _)| *f == step.feature).count();
                while have <= step.occurrence as usize {
                    let fill = if last && have == step.occurrence as usize {
                        value.clone()
                    } else {
                        Node::Avm(Vec::new())
                    };
                    items.push((step.feature.clone(), fill));
                    have += 1;
                }
                let slot = cur
                    .feature_slot_mut(&step.feature, step.occurrence as usize)
                    .expect("occurrence exists");
                if last {
                    *slot = value.clone();
                    continue 'pairs;
                }
                cur = slot;
            }
        }
        root
    }

    /// Applies `f` to every variable name.
    pub fn rename_vars(&self, f: &mut impl FnMut(&str) -> String) -> Node {
        match self {
            Node::Var(v) => Node::Var(f(v)),
            Node::Atom(_) | Node::Number(_) | Node::Disj(_) => self.clone(),
            Node::Seq(items) => Node::Seq(items.iter().map(|n| n.rename_vars(f)).collect()),
            Node::Avm(pairs) => Node::Avm(
                pairs
                    .iter()
                    .map(|(k, v)| (k.clone(), v.rename_vars(f)))
                    .collect(),
            ),
            Node::Compound(fun, args) => Node::Compound(
                fun.clone(),
                args.iter().map(|n| n.rename_vars(f)).collect(),
            ),
        }
    }

    /// Replaces every occurrence of variable `var` with `value`, in place.
    pub fn substitute(&mut self, var: &str, value: &Node) {
        match self {
            Node::Var(v) if v == var => *self = value.clone(),
            Node::Var(_) | Node::Atom(_) | Node::Number(_) | Node::Disj(_) => {}
            Node::Seq(items) | Node::Compound(_, items) => {
                items.iter_mut().for_each(|n| n.substitute(var, value))
            }
            Node::Avm(pairs) => pairs.iter_mut().for_each(|(_, v)| v.substitute(var, value)),
        }
    }

    /// Variable names in first-occurrence order, without duplicates.
    pub fn vars(&self) -> Vec<String> {
        let mut seen = Vec::new();
        self.visit_vars(&mut |v| {
            if !seen.iter().any(|s| s == v) {
                seen.push(v.to_string());
            }
        });
        seen
    }

    /// Calls `f` on every variable occurrence, in document order.
    pub fn visit_vars(&self, f: &mut impl FnMut(&str)) {
        match self {
            Node::Var(v) => f(v),
            Node::Atom(_) | Node::Number(_) | Node::Disj(_) => {}
            Node::Seq(items) | Node::Compound(_, items) => {
                items.iter().for_each(|n| n.visit_vars(f))
            }
            Node::Avm(pairs) => pairs.iter().for_each(|(_, v)| v.visit_vars(f)),
        }
    }

    pub fn contains_var(&self, name: &str) -> bool {
        let mut found = false;
        self.visit_vars(&mut |v| found |= v == name);
        found
    }

    /// Renames variables to `V0, V1, ...` in first-occurrence order, so two
    /// graphs equal up to variable renaming become structurally equal.
    pub fn canonical_vars(&self) -> Node {
        let mut map: HashMap<String, String> = HashMap::new();
        self.rename_vars(&mut |v| {
            let next = format!("V{}", map.len());
            map.entry(v.to_string()).or_insert(next).clone()
        })
    }

    /// Equality up to consistent variable renaming.
    pub fn alpha_eq(&self, other: &Node) -> bool {
        self.canonical_vars() == other.canonical_vars()
    }

    /// Canonical variables plus a stable sort of Avm features by name, for
    /// comparing graphs whose feature order came out differently.
    pub fn normal_form(&self) -> Node {
        fn sort(n: &Node) -> Node {
            match n {
                Node::Avm(pairs) => {
                    let mut pairs: Vec<(String, Node)> =
                        pairs.iter().map(|(k, v)| (k.clone(), sort(v))).collect();
                    pairs.sort_by(|a, b| a.0.cmp(&b.0));
                    Node::Avm(pairs)
                }
                Node::Seq(items) => Node::Seq(items.iter().map(sort).collect()),
                Node::Compound(f, args) => Node::Compound(f.clone(), args.iter().map(sort).collect()),
                other => other.clone(),
            }
        }
        sort(self).canonical_vars()
    }
}

pub(crate) fn normalize_disjuncts(members: &mut Vec<Node>) {
    members.sort_by(|a, b| match (a, b) {
        (Node::Number(x), Node::Number(y)) => x.cmp(y),
        (Node::Number(_), _) => std::cmp::Ordering::Less,
        (_, Node::Number(_)) => std::cmp::Ordering::Greater,
        (Node::Atom(x), Node::Atom(y)) => x.cmp(y),
        _ => std::cmp::Ordering::Equal,
    });
    members.dedup();
}

fn flatten_into(node: &Node, stack: &mut Vec<Step>, out: &mut Vec<(Path, Node)>) {
    let Node::Avm(pairs) = node else {
        if !stack.is_empty() {
            out.push((Path(stack.clone()), node.clone()));
        }
        return;
    };
    let mut seen: Vec<(&str, u32)> = Vec::new();
    for (feature, value) in pairs {
        let occ = match seen.iter_mut().find(|(f, _)| *f == feature) {
            Some((_, n)) => {
                *n += 1;
                *n
            }
            None => {
                seen.push((feature, 0));
                0
            }
        };
        stack.push(Step::new(feature, occ));
        flatten_into(value, stack, out);
        stack.pop();
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_canonical_text(self))
    }
}

/// One path step: a feature name plus its 0-based occurrence index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub feature: String,
    pub occurrence: u32,
}

impl Step {
    pub fn new(feature: impl Into<String>, occurrence: u32) -> Self {
        Step {
            feature: feature.into(),
            occurrence,
        }
    }
}

/// Path from the top of a graph, rendered `synsem@0.num@0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Path(Vec<Step>);

impl Path {
    pub fn new(steps: Vec<Step>) -> Self {
        Path(steps)
    }

    pub fn steps(&self) -> &[Step] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<&Step> {
        self.0.last()
    }

    pub fn prefix(&self, len: usize) -> Path {
        Path(self.0[..len.min(self.0.len())].to_vec())
    }

    pub fn child(&self, feature: &str, occurrence: u32) -> Path {
        let mut steps = self.0.clone();
        steps.push(Step::new(feature, occurrence));
        Path(steps)
    }

    pub fn join(&self, tail: &Path) -> Path {
        Path(self.0.iter().chain(tail.0.iter()).cloned().collect())
    }

    pub fn starts_with(&self, prefix: &Path) -> bool {
        self.0.starts_with(&prefix.0)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, step) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{}@{}", step.feature, step.occurrence)?;
        }
        Ok(())
    }
}

/// Parses `a.b@1.c`; a missing `@n` means occurrence 0.
impl FromStr for Path {
    type Err = PathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(PathError::Empty);
        }
        s.split('.')
            .map(|part| {
                let (name, occ) = match part.split_once('@') {
                    Some((name, occ)) => (
                        name,
                        occ.parse::<u32>()
                            .map_err(|_| PathError::Syntax(s.to_string()))?,
                    ),
                    None => (part, 0),
                };
                let ok = name
                    .chars()
                    .next()
                    .is_some_and(|c| c.is_ascii_lowercase())
                    && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
                if !ok {
                    return Err(PathError::Syntax(s.to_string()));
                }
                Ok(Step::new(name, occ))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Path)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PathError {
    #[error("empty path")]
    Empty,
    #[error("malformed path `{0}`")]
    Syntax(String),
    #[error("no value at path {0}")]
    Missing(Path),
    #[error("value at {0} is not an avm")]
    NotAvm(Path),
    #[error("occurrence gap at {0}")]
    Gap(Path),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Path {
        s.parse().unwrap()
    }

    fn g(s: &str) -> Node {
        from_canonical_text(s).unwrap()
    }

    #[test]
    fn flatten_nested_avm() {
        let flat = g("[cat:np, synsem:[num:plur]]").flatten();
        assert_eq!(
            flat,
            vec![
                (p("cat@0"), Node::atom("np")),
                (p("synsem@0.num@0"), Node::atom("plur")),
            ]
        );
    }

    #[test]
    fn flatten_non_avm_is_empty() {
        assert!(Node::atom("a").flatten().is_empty());
    }

    #[test]
    fn flatten_indexes_repeated_features() {
        let flat = g("[arg:[cat:np], arg:[cat:n]]").flatten();
        assert_eq!(
            flat,
            vec![
                (p("arg@0.cat@0"), Node::atom("np")),
                (p("arg@1.cat@0"), Node::atom("n")),
            ]
        );
    }

    #[test]
    fn flatten_keeps_opaque_leaves_whole() {
        let flat = g("[slf:f(a, [x:1]), ph:{a, b}, v:X, d:or(2, 3)]").flatten();
        assert_eq!(flat.len(), 4);
        assert_eq!(flat[0].1, g("f(a, [x:1])"));
        assert_eq!(flat[1].1, g("{a, b}"));
    }

    #[test]
    fn path_display_and_parse() {
        assert_eq!(p("synsem.num").to_string(), "synsem@0.num@0");
        assert_eq!(p("arg@1.cat").to_string(), "arg@1.cat@0");
        assert!("Arg".parse::<Path>().is_err());
        assert!("a@x".parse::<Path>().is_err());
        assert!("".parse::<Path>().is_err());
    }

    #[test]
    fn set_creates_intermediates_and_appends() {
        let mut n = g("[cat:v]");
        n.set(&p("synsem.num"), Node::atom("sing")).unwrap();
        assert_eq!(n, g("[cat:v, synsem:[num:sing]]"));
        n.set(&p("arg@0"), g("[cat:np]")).unwrap();
        n.set(&p("arg@1"), g("[cat:n]")).unwrap();
        assert_eq!(n.get(&p("arg@1.cat")), Some(&Node::atom("n")));
        assert!(matches!(n.set(&p("arg@3"), Node::atom("x")), Err(PathError::Gap(_))));
        assert!(matches!(
            n.set(&p("cat.x"), Node::atom("x")),
            Err(PathError::NotAvm(_))
        ));
    }

    #[test]
    fn delete_shifts_occurrences() {
        let mut n = g("[arg:[c:a], arg:[c:b], arg:[c:c]]");
        assert_eq!(n.delete(&p("arg@1")).unwrap(), g("[c:b]"));
        assert_eq!(n.get(&p("arg@1.c")), Some(&Node::atom("c")));
        assert!(matches!(n.delete(&p("arg@2")), Err(PathError::Missing(_))));
        assert!(matches!(n.delete(&p("nope.x")), Err(PathError::Missing(_))));
    }

    #[test]
    fn add_appends_occurrence() {
        let mut n = g("[arg:[c:a]]");
        n.add(&p("arg"), g("[c:b]")).unwrap();
        assert_eq!(n, g("[arg:[c:a], arg:[c:b]]"));
    }

    #[test]
    fn from_pairs_rebuilds_skeleton() {
        let src = g("[a:1, b:[c:x, c:y], d:[e:[f:Z]]]");
        let flat = src.flatten();
        let rebuilt = Node::from_pairs(flat.iter().map(|(p, v)| (p, v)));
        assert_eq!(rebuilt, src);
        let sparse = [(p("arg@1.cat"), Node::atom("n"))];
        let rebuilt = Node::from_pairs(sparse.iter().map(|(p, v)| (p, v)));
        assert_eq!(rebuilt, g("[arg:[], arg:[cat:n]]"));
    }

    #[test]
    fn alpha_eq_ignores_names_only() {
        assert!(g("[a:X, b:X, c:Y]").alpha_eq(&g("[a:P, b:P, c:Q]")));
        assert!(!g("[a:X, b:X]").alpha_eq(&g("[a:P, b:Q]")));
    }

    #[test]
    fn disjunction_normalizes() {
        assert_eq!(
            Node::disj([Node::Number(3), Node::atom("b"), Node::Number(2), Node::Number(3)]),
            Node::Disj(vec![Node::Number(2), Node::Number(3), Node::atom("b")])
        );
    }
}
