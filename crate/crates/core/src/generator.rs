//! Agenda-driven sentence generation.
//!
//! The agenda keeps produced heads in a list and pending arguments on a
//! stack. Each step either fills the top argument with a lexicon entry whose
//! category has the argument's category as result, or, when the stack is
//! empty and no sentential head remains, finds an entry that takes the
//! current head as an argument. Every reduction unifies full graphs under
//! one set of bindings, so agreement flows between constituents.
//!
//! Word order comes from each entry's `phon` slot template: a sequence of
//! words and variables, where each variable is the `phon` of one argument.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::category::{Category, Direction};
use crate::entry::LexicalEntry;
use crate::feature_graph::{resolve, unify_graphs, Bindings, Node, Path, VarSupply};
use crate::index_engine::PostingList;
use crate::lexicon::Lexicon;
use crate::object_store::StoreError;
use crate::query_engine::{execute_within, graph_to_query, QueryError};
use crate::ObjectId;

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub budget: usize,
    /// Path reported as the agreement value in the trace.
    pub agreement: Path,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            budget: 32,
            agreement: "synsem.num".parse().unwrap(),
        }
    }
}

/// A produced constituent: the graph of the entry at its root, with the
/// arguments filled so far merged in.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadItem {
    pub entry: ObjectId,
    pub category: Category,
    pub graph: Node,
}

/// A pending argument, addressed by its path inside the head's graph.
#[derive(Debug, Clone, PartialEq)]
pub struct ArgItem {
    pub path: Path,
    pub category: Category,
    pub direction: Direction,
    pub head: usize,
}

#[derive(Debug, Clone)]
pub struct Agenda {
    pub heads: Vec<HeadItem>,
    pub args: Vec<ArgItem>,
    pub env: Bindings,
    pub budget: usize,
    pub trace: Vec<Node>,
    rng: ChaCha8Rng,
    supply: VarSupply,
    agreement: Path,
}

/// Trace and agenda at the point generation stopped.
#[derive(Debug, Clone, PartialEq)]
pub struct Partial {
    pub trace: Vec<Node>,
    pub heads: Vec<String>,
    pub args: Vec<String>,
    pub phrase: String,
}

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("empty lexicon")]
    EmptyLexicon,
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
    #[error("dead end: {reason}")]
    DeadEnd { reason: String, partial: Box<Partial> },
    #[error("step budget exhausted with {} pending argument(s)", .partial.args.len())]
    Budget { partial: Box<Partial> },
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl GenError {
    pub fn partial(&self) -> Option<&Partial> {
        match self {
            GenError::DeadEnd { partial, .. } | GenError::Budget { partial } => Some(partial),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    pub surface: String,
    pub graph: Node,
    pub derivation: Vec<Node>,
}

fn record(step: usize, action: &str, fields: Vec<(&str, Node)>) -> Node {
    let mut pairs = vec![
        ("step".to_string(), Node::Number(step as i64)),
        ("action".to_string(), Node::atom(action)),
    ];
    pairs.extend(fields.into_iter().map(|(k, v)| (k.to_string(), v)));
    Node::Avm(pairs)
}

/// Words of a resolved `phon` value, `_` for unfilled slots.
pub fn surface_words(phon: &Node, out: &mut Vec<String>) {
    match phon {
        Node::Seq(items) => items.iter().for_each(|i| surface_words(i, out)),
        Node::Atom(w) => out.push(w.clone()),
        Node::Var(_) => out.push("_".into()),
        other => out.push(other.to_string()),
    }
}

/// Path of the `arg` sub-graph that category argument `k` refers to: the
/// one whose `id` is the argument's link, or the `k`-th one without links.
fn arg_path(graph: &Node, category: &Category, k: usize) -> Option<Path> {
    let (_, arg) = category.args().nth(k)?;
    let count = graph.feature_count("arg");
    let j = match &arg.link {
        Some(link) => (0..count).find(|&j| {
            matches!(graph.feature("arg", j).and_then(|a| a.feature("id", 0)), Some(Node::Var(v)) if v == link)
        })?,
        None if k < count => k,
        None => return None,
    };
    Some(Path::default().child("arg", j as u32))
}

impl Agenda {
    pub fn is_terminal(&self) -> bool {
        self.args.is_empty() && self.heads.len() == 1 && self.heads[0].category.is_sentential()
    }

    fn fetch(&self, lex: &Lexicon, id: ObjectId) -> Result<LexicalEntry, StoreError> {
        let mut e = lex.get_object(id)?;
        // Names from the run's own supply keep replays byte-identical.
        e.graph = self.supply.freshen(&e.graph);
        Ok(e)
    }

    fn choose(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    fn resolved(&self, g: &Node) -> Node {
        resolve(g, &self.env)
    }

    fn agreement_of(&self, g: &Node, under: &Path) -> Option<Node> {
        g.get(&under.join(&self.agreement)).map(|n| self.resolved(n))
    }

    /// Current word string of the head an argument belongs to, or of the
    /// only head.
    pub fn phrase(&self) -> String {
        let Some(h) = self.heads.first() else {
            return String::new();
        };
        let mut words = Vec::new();
        if let Some(p) = h.graph.feature("phon", 0) {
            surface_words(&self.resolved(p), &mut words);
        }
        words.join(" ")
    }

    fn heads_node(&self) -> Node {
        Node::Seq(
            self.heads
                .iter()
                .map(|h| Node::atom(h.category.key().into_string()))
                .collect(),
        )
    }

    fn args_node(&self) -> Node {
        Node::Seq(
            self.args
                .iter()
                .map(|a| Node::atom(a.category.key().into_string()))
                .collect(),
        )
    }

    fn push(&mut self, action: &str, mut fields: Vec<(&str, Node)>, agenda_state: bool) {
        if agenda_state {
            fields.push(("phrase", Node::atom(self.phrase())));
            fields.push(("heads", self.heads_node()));
            fields.push(("args", self.args_node()));
        }
        let n = self.trace.len() + 1;
        self.trace.push(record(n, action, fields));
    }

    fn partial(&self) -> Box<Partial> {
        Box::new(Partial {
            trace: self.trace.clone(),
            heads: self.heads.iter().map(|h| h.category.key().into_string()).collect(),
            args: self.args.iter().map(|a| a.category.key().into_string()).collect(),
            phrase: self.phrase(),
        })
    }

    fn dead_end(&self, reason: String) -> GenError {
        GenError::DeadEnd {
            reason,
            partial: self.partial(),
        }
    }

    /// Pushes the arguments of `category` found under `base`, leaving out
    /// argument `skip`. The rightmost argument ends up on top.
    fn shift_args(&mut self, graph: &Node, base: &Path, category: &Category, skip: Option<usize>) -> Result<Vec<Node>, GenError> {
        let mut shifted = Vec::new();
        for (k, (direction, arg)) in category.args().enumerate() {
            if Some(k) == skip {
                continue;
            }
            let path = arg_path(graph, category, k)
                .ok_or_else(|| self.dead_end(format!("argument {k} of {} has no arg sub-graph", category.key())))?;
            shifted.push(Node::atom(arg.category.key().into_string()));
            self.args.push(ArgItem {
                path: base.join(&path),
                category: arg.category.clone(),
                direction,
                head: 0,
            });
        }
        Ok(shifted)
    }

    /// Fills the top argument from the lexicon.
    fn produce_argument(&mut self, lex: &Lexicon) -> Result<(), GenError> {
        let arg = self.args.pop().expect("caller checked");
        let root = self.heads[arg.head].graph.clone();
        let spec = root.get(&arg.path).cloned().unwrap_or(Node::Avm(Vec::new()));

        let mut restrict = PostingList::new();
        for row in lex.types().rows() {
            let fits = if arg.category.is_atomic() {
                row.category.result == arg.category.result
            } else {
                row.key == arg.category.key()
            };
            if fits {
                restrict = restrict.union(&row.ids);
            }
        }
        let resolved_spec = self.resolved(&spec);
        let (ids, query_text) = match graph_to_query(&resolved_spec) {
            Ok(q) => (execute_within(lex, &q, Some(&restrict))?.ids, q.to_string()),
            Err(QueryError::EmptyQuery) => (restrict.decompress(), String::new()),
            Err(QueryError::Store(e)) => return Err(e.into()),
        };

        let mut candidates = Vec::new();
        for id in ids {
            let e = self.fetch(lex, id)?;
            if let Ok((merged, env)) = unify_graphs(&spec, &e.graph, &self.env) {
                candidates.push((e, merged, env));
            }
        }
        let head_cat = self.heads[arg.head].category.key().into_string();
        let mut fields = vec![
            ("target", Node::atom("head")),
            ("cat", Node::atom(arg.category.key().into_string())),
        ];
        fields.extend(self.agreement_of(&resolved_spec, &Path::default()).map(|n| ("num", n)));
        fields.push(("query", Node::atom(query_text)));
        fields.push(("candidates", Node::Number(candidates.len() as i64)));
        if candidates.is_empty() {
            self.push("search", fields, false);
            self.args.push(arg);
            return Err(self.dead_end(format!("no entry for argument {}", head_cat)));
        }
        let pick = self.choose(candidates.len());
        let (entry, merged, env) = candidates.swap_remove(pick);
        let category = entry.category().map_err(|err| StoreError::Corrupt {
            id: entry.id,
            reason: err.to_string(),
        })?;
        fields.push(("chosen", Node::atom(entry.phon().unwrap_or("?"))));
        fields.push(("type", Node::atom(category.key().into_string())));
        self.push("search", fields, false);

        self.env = env;
        let mut root = root;
        root.set(&arg.path, merged.clone())
            .map_err(|e| self.dead_end(e.to_string()))?;
        self.heads[arg.head].graph = root;
        let shifted = self.shift_args(&merged, &arg.path, &category, None)?;
        let mut fields = vec![
            ("arg", Node::atom(arg.category.key().into_string())),
            ("direction", Node::atom(arg.direction.to_string())),
            ("with", Node::atom(entry.phon().unwrap_or("?"))),
            ("dominated_by", Node::atom(head_cat)),
        ];
        let filled = self.heads[arg.head].graph.clone();
        fields.extend(self.agreement_of(&filled, &arg.path).map(|n| ("num", n)));
        fields.push(("shift", Node::Seq(shifted)));
        self.push("reduce", fields, true);
        Ok(())
    }

    /// Finds an entry taking the only head as an argument.
    fn extend_head(&mut self, lex: &Lexicon) -> Result<(), GenError> {
        if self.heads.len() != 1 {
            return Err(self.dead_end(format!("{} heads remain", self.heads.len())));
        }
        let head = self.heads[0].clone();
        let key = head.category.key();
        let mut ids = PostingList::new();
        for row in lex.types().rows() {
            if row.category.args().any(|(_, a)| a.category.key() == key) {
                ids = ids.union(&row.ids);
            }
        }
        let mut candidates = Vec::new();
        for id in ids.iter() {
            let e = self.fetch(lex, id)?;
            let Ok(category) = e.category() else { continue };
            let n = category.args().count();
            // Rightmost matching argument first.
            for k in (0..n).rev() {
                let (_, a) = category.args().nth(k).unwrap();
                if a.category.key() != key {
                    continue;
                }
                let Some(path) = arg_path(&e.graph, &category, k) else { continue };
                let spec = e.graph.get(&path).expect("arg_path found it");
                if let Ok((merged, env)) = unify_graphs(spec, &head.graph, &self.env) {
                    candidates.push((e.clone(), category.clone(), k, path, merged, env));
                    break;
                }
            }
        }
        let mut fields = vec![("target", Node::atom("argument_of")), ("cat", Node::atom(key.as_str()))];
        fields.extend(self.agreement_of(&head.graph, &Path::default()).map(|n| ("num", n)));
        fields.push(("candidates", Node::Number(candidates.len() as i64)));
        if candidates.is_empty() {
            self.push("search", fields, false);
            return Err(self.dead_end(format!("no entry takes {key} as an argument")));
        }
        let pick = self.choose(candidates.len());
        let (entry, category, k, path, merged, env) = candidates.swap_remove(pick);
        fields.push(("chosen", Node::atom(entry.phon().unwrap_or("?"))));
        fields.push(("type", Node::atom(category.key().into_string())));
        self.push("search", fields, false);

        self.env = env;
        let mut root = entry.graph.clone();
        root.set(&path, merged).map_err(|e| self.dead_end(e.to_string()))?;
        let direction = category.args().nth(k).unwrap().0;
        self.heads = vec![HeadItem {
            entry: entry.id,
            category: Category::atomic(&category.result),
            graph: root.clone(),
        }];
        let shifted = self.shift_args(&root, &Path::default(), &category, Some(k))?;
        let mut fields = vec![
            ("arg", Node::atom(key.as_str())),
            ("direction", Node::atom(direction.to_string())),
            ("into", Node::atom(entry.phon().unwrap_or("?"))),
            ("head", Node::atom(category.result.clone())),
        ];
        fields.extend(self.agreement_of(&root, &Path::default()).map(|n| ("num", n)));
        fields.extend(self.agreement_of(&root, &path).map(|n| ("assigned", n)));
        fields.push(("shift", Node::Seq(shifted)));
        self.push("reduce", fields, true);
        Ok(())
    }
}

/// Picks a realisation of `concept` (or of a random concept) and puts it on
/// a fresh agenda.
pub fn start(lex: &Lexicon, concept: Option<&str>, seed: u64, config: &GenConfig) -> Result<Agenda, GenError> {
    if lex.is_empty() {
        return Err(GenError::EmptyLexicon);
    }
    let mut agenda = Agenda {
        heads: Vec::new(),
        args: Vec::new(),
        env: Bindings::new(),
        budget: config.budget,
        trace: Vec::new(),
        rng: ChaCha8Rng::seed_from_u64(seed),
        supply: VarSupply::new(),
        agreement: config.agreement.clone(),
    };
    let concept = match concept {
        Some(c) => c.to_string(),
        None => {
            let all = lex.concepts().texts();
            let i = agenda.choose(all.len());
            all[i].to_string()
        }
    };
    let ids = lex.concepts().lookup(&concept).decompress();
    if ids.is_empty() {
        return Err(GenError::UnknownConcept(concept));
    }
    let pick = agenda.choose(ids.len());
    let entry = agenda.fetch(lex, ids[pick])?;
    let category = entry.category().map_err(|err| StoreError::Corrupt {
        id: entry.id,
        reason: err.to_string(),
    })?;
    let mut fields = vec![
        ("target", Node::atom("concept")),
        ("query", Node::atom(concept.as_str())),
        ("candidates", Node::Number(ids.len() as i64)),
        ("chosen", Node::atom(entry.phon().unwrap_or("?"))),
        ("type", Node::atom(category.key().into_string())),
    ];
    fields.extend(agenda.agreement_of(&entry.graph, &Path::default()).map(|n| ("num", n)));
    agenda.push("search", fields, false);

    agenda.heads.push(HeadItem {
        entry: entry.id,
        category: Category::atomic(&category.result),
        graph: entry.graph.clone(),
    });
    let shifted = agenda.shift_args(&entry.graph, &Path::default(), &category, None)?;
    let mut fields = vec![("head", Node::atom(category.result.clone()))];
    fields.extend(agenda.agreement_of(&entry.graph, &Path::default()).map(|n| ("num", n)));
    fields.push(("shift", Node::Seq(shifted)));
    agenda.push("insert", fields, true);
    Ok(agenda)
}

/// One agenda step. Fails on a dead end or when the budget is used up.
pub fn step(lex: &Lexicon, agenda: &mut Agenda) -> Result<(), GenError> {
    if agenda.budget == 0 {
        return Err(GenError::Budget {
            partial: agenda.partial(),
        });
    }
    agenda.budget -= 1;
    if !agenda.args.is_empty() {
        agenda.produce_argument(lex)
    } else if !agenda.is_terminal() {
        agenda.extend_head(lex)
    } else {
        Ok(())
    }
}

/// Runs [`start`] and [`step`] until the agenda is terminal.
pub fn generate(lex: &Lexicon, concept: Option<&str>, seed: u64, config: &GenConfig) -> Result<Sentence, GenError> {
    let mut agenda = start(lex, concept, seed, config)?;
    while !agenda.is_terminal() {
        step(lex, &mut agenda)?;
    }
    let head = &agenda.heads[0];
    let graph = resolve(&head.graph, &agenda.env);
    let mut words = Vec::new();
    if let Some(p) = graph.feature("phon", 0) {
        surface_words(p, &mut words);
    }
    Ok(Sentence {
        surface: words.join(" "),
        graph,
        derivation: agenda.trace,
    })
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.surface)
    }
}
