//! Constraint queries: index lookups, smallest-first intersection, then
//! unification against the fetched entries.

use std::fmt;

use crate::category::Category;
use crate::entry::{concept_of, phon_of, CONCEPT_PATH, PHON_PATH, TYPE_PATH};
use crate::feature_graph::{unify, Bindings, Node, Path};
use crate::index_engine::meta::{classify, Specification};
use crate::index_engine::{Mode, PostingList};
use crate::lexicon::Lexicon;
use crate::object_store::StoreError;
use crate::par::Exec;
use crate::entry::LexicalEntry;
use crate::ObjectId;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Target {
    Concept,
    Type,
    Phon,
    Meta(Path),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Concept => f.write_str("concept"),
            Target::Type => f.write_str("type"),
            Target::Phon => f.write_str("phon"),
            Target::Meta(p) => write!(f, "{p}"),
        }
    }
}

/// One constraint. A type value is the type key as an atom. Concept, type
/// and word form constraints are always strict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub target: Target,
    pub value: Node,
    pub mode: Mode,
}

impl Constraint {
    pub fn new(target: Target, value: Node, mode: Mode) -> Self {
        let mode = match target {
            Target::Meta(_) => mode,
            _ => Mode::Strict,
        };
        Constraint { target, value, mode }
    }

    pub fn concept(text: &str) -> Self {
        Self::new(Target::Concept, Node::atom(text), Mode::Strict)
    }

    pub fn phon(text: &str) -> Self {
        Self::new(Target::Phon, Node::atom(text), Mode::Strict)
    }

    pub fn type_key(key: &str) -> Self {
        Self::new(Target::Type, Node::atom(key), Mode::Strict)
    }

    pub fn meta(path: Path, value: Node, mode: Mode) -> Self {
        Self::new(Target::Meta(path), value, mode)
    }

    /// Whether `entry` satisfies this constraint, decided from the graph
    /// alone.
    pub fn admits(&self, entry: &Node) -> bool {
        let text = self.value.as_atom();
        match &self.target {
            Target::Concept => text.is_some() && concept_of(entry) == text,
            Target::Phon => text.is_some() && phon_of(entry) == text,
            Target::Type => {
                let key = crate::entry::category_of(entry).map(|c| c.key());
                matches!((key, text), (Ok(k), Some(t)) if k.as_str() == t)
            }
            Target::Meta(path) => match classify(entry, path) {
                Specification::Values(vs) => vs.contains(&self.value),
                Specification::Unspecified => self.mode == Mode::Liberal,
                Specification::Opaque => false,
            },
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tilde = if self.mode == Mode::Liberal { "~" } else { "" };
        write!(f, "{tilde}{}={}", self.target, self.value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub constraints: Vec<Constraint>,
    /// Graph candidates must unify with, when the query came from one.
    pub verify: Option<Node>,
}

impl Query {
    pub fn new(constraints: Vec<Constraint>) -> Self {
        Query {
            constraints,
            verify: None,
        }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.constraints.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(" "))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum QueryError {
    #[error("empty-query: the graph constrains nothing")]
    EmptyQuery,
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Flattens `g` into constraints. Concept, type and word form paths become
/// their dedicated constraints; other atomic leaves become liberal meta
/// constraints; variables and structured leaves constrain nothing. `g` is
/// kept for verification.
pub fn graph_to_query(g: &Node) -> Result<Query, QueryError> {
    let mut constraints = Vec::new();
    for (path, value) in g.flatten() {
        let c = if path == *CONCEPT_PATH {
            value.as_atom().map(Constraint::concept)
        } else if path == *PHON_PATH {
            value.as_atom().map(Constraint::phon)
        } else if path == *TYPE_PATH {
            Category::from_node(&value)
                .ok()
                .map(|c| Constraint::type_key(c.key().as_str()))
        } else if value.is_atomic() {
            Some(Constraint::meta(path, value, Mode::Liberal))
        } else {
            None
        };
        constraints.extend(c);
    }
    if constraints.is_empty() {
        return Err(QueryError::EmptyQuery);
    }
    Ok(Query {
        constraints,
        verify: Some(g.clone()),
    })
}

/// Result of [`execute`] with bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Execution {
    pub ids: Vec<ObjectId>,
    /// Constraints on paths without a meta index, checked by fetching.
    pub unindexed: usize,
    /// Entries fetched to check unindexed constraints.
    pub fetched: usize,
}

/// Posting list of one indexed constraint; `None` for an unindexed path.
pub fn resolve_constraint(lex: &Lexicon, c: &Constraint) -> Result<Option<PostingList>, StoreError> {
    let text = c.value.as_atom();
    Ok(match &c.target {
        Target::Concept => Some(text.map(|t| lex.concepts().lookup(t)).unwrap_or_default()),
        Target::Phon => Some(text.map(|t| lex.phons().lookup(t)).unwrap_or_default()),
        Target::Type => Some(text.map(|t| lex.types().lookup(t)).unwrap_or_default()),
        Target::Meta(path) => lex.lookup_meta(path, &c.value, c.mode)?,
    })
}

/// Sorted IDs satisfying every constraint of `q`, optionally limited to
/// `within`. Does not apply the verification graph.
pub fn execute_within(lex: &Lexicon, q: &Query, within: Option<&PostingList>) -> Result<Execution, StoreError> {
    let mut lists: Vec<PostingList> = within.cloned().into_iter().collect();
    let mut pending: Vec<&Constraint> = Vec::new();
    // Dedicated tables first: they are free and usually most selective.
    let mut order: Vec<&Constraint> = q.constraints.iter().collect();
    order.sort_by_key(|c| matches!(c.target, Target::Meta(_)));
    for c in order {
        if lists.iter().any(PostingList::is_empty) {
            break;
        }
        match resolve_constraint(lex, c)? {
            Some(list) => lists.push(list),
            None => pending.push(c),
        }
    }
    let mut candidates = match PostingList::intersect_all(&lists) {
        Some(l) => l,
        None => PostingList::full(lex.len()),
    };
    let mut out = Execution {
        unindexed: pending.len(),
        ..Execution::default()
    };
    if !pending.is_empty() && !candidates.is_empty() {
        let mut kept = PostingList::new();
        for id in candidates.iter() {
            let e = lex.get_object(id)?;
            out.fetched += 1;
            if pending.iter().all(|c| c.admits(&e.graph)) {
                kept.push_id(id);
            }
        }
        candidates = kept;
    }
    out.ids = candidates.decompress();
    Ok(out)
}

pub fn execute(lex: &Lexicon, q: &Query) -> Result<Vec<ObjectId>, StoreError> {
    execute_within(lex, q, None).map(|e| e.ids)
}

/// Fetches `ids` and keeps those that unify with the verification graph.
pub fn fetch_verified(
    lex: &Lexicon,
    q: &Query,
    ids: &[ObjectId],
) -> Result<Vec<(ObjectId, LexicalEntry, Bindings)>, StoreError> {
    let mut out = Vec::with_capacity(ids.len());
    for &id in ids {
        let e = lex.get_object(id)?;
        let env = match &q.verify {
            Some(v) => match unify(v, &e.graph, &Bindings::new()) {
                Ok(env) => env,
                Err(_) => continue,
            },
            None => Bindings::new(),
        };
        out.push((id, e, env));
    }
    Ok(out)
}

/// Execute plus verification, returning only IDs.
pub fn run(lex: &Lexicon, q: &Query) -> Result<Vec<ObjectId>, StoreError> {
    let ids = execute(lex, q)?;
    if q.verify.is_none() {
        return Ok(ids);
    }
    Ok(fetch_verified(lex, q, &ids)?.into_iter().map(|(id, _, _)| id).collect())
}

/// Runs many queries, in parallel when `exec` allows.
pub fn run_batch(lex: &Lexicon, queries: &[Query], exec: Exec) -> Vec<Result<Vec<ObjectId>, StoreError>> {
    exec.map(queries, |q| run(lex, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature_graph::from_canonical_text;

    fn g(s: &str) -> Node {
        from_canonical_text(s).unwrap()
    }

    #[test]
    fn argument_graph_becomes_liberal_meta_constraints() {
        let q = graph_to_query(&g("[cat:np, num:plur]")).unwrap();
        assert_eq!(q.to_string(), "~cat@0=np ~num@0=plur");
        assert!(q.verify.is_some());
    }

    #[test]
    fn dedicated_paths_are_strict() {
        let q = graph_to_query(&g("[head:[concept:discover, phon:X]]")).unwrap();
        assert_eq!(q.constraints, vec![Constraint::concept("discover")]);
        let q = graph_to_query(&g("[type:cat(s, {arg(np, '0', A)}, {})]")).unwrap();
        assert_eq!(q.constraints, vec![Constraint::type_key("s\\np")]);
    }

    #[test]
    fn only_variables_is_an_empty_query() {
        assert!(matches!(graph_to_query(&g("[a:X, b:[c:Y]]")), Err(QueryError::EmptyQuery)));
        assert!(matches!(graph_to_query(&g("[a:or(1, 2)]")), Err(QueryError::EmptyQuery)));
    }

    #[test]
    fn admits_follows_index_semantics() {
        let e = g("[synsem:[num:or(2, 3), cat:X]]");
        let m = |p: &str, v: Node, mode| Constraint::meta(p.parse().unwrap(), v, mode).admits(&e);
        assert!(m("synsem.num", Node::Number(2), Mode::Strict));
        assert!(!m("synsem.num", Node::Number(1), Mode::Liberal));
        assert!(!m("synsem.cat", Node::atom("np"), Mode::Strict));
        assert!(m("synsem.cat", Node::atom("np"), Mode::Liberal));
        assert!(m("synsem.case", Node::atom("nom"), Mode::Liberal));
    }

    #[test]
    fn dedicated_constraints_ignore_mode() {
        let c = Constraint::new(Target::Concept, Node::atom("x"), Mode::Liberal);
        assert_eq!(c.mode, Mode::Strict);
    }
}
