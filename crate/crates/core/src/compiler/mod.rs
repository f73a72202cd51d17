//! Off-line lexicon compiler: templates, lemma difference lists and
//! inflection rules in, validated and type-sorted entries out.

mod source;
mod validate;

use std::collections::HashMap;
use std::fmt;

pub use source::{Edit, InflectionRule, LemmaSpec, LexiconSource, SourceError, SurfaceOp, Template, parse_edit};
pub use validate::{validate, violations, Violation};

use crate::entry::{category_of, concept_of, phon_of, LexicalEntry, PHON_PATH};
use crate::feature_graph::{resolve, unify_graphs, unify_with, Bindings, ClashPolicy, Node, Path, PathError};
use crate::par::Exec;
use crate::ObjectId;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EditError {
    #[error("edit {edit}: {err}")]
    Path { edit: String, err: PathError },
    #[error("word form: {0}")]
    Surface(String),
}

/// Where a failing graph came from: a lemma, and the rule that expanded it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Origin {
    pub lemma: String,
    pub rule: Option<String>,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.rule {
            Some(r) => write!(f, "lemma `{}`, rule `{r}`", self.lemma),
            None => write!(f, "lemma `{}`", self.lemma),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompileError {
    #[error("{origin}: unknown template `{template}`")]
    UnknownTemplate { origin: Origin, template: String },
    #[error("{origin}: {err}")]
    Edit { origin: Origin, err: EditError },
    #[error("{}", render_invalid(.0))]
    Invalid(Vec<(Origin, Vec<Violation>)>),
}

fn render_invalid(items: &[(Origin, Vec<Violation>)]) -> String {
    items
        .iter()
        .map(|(o, vs)| {
            let vs: Vec<String> = vs.iter().map(ToString::to_string).collect();
            format!("{o}: {}", vs.join(", "))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn apply_edit(g: &mut Node, edit: &Edit) -> Result<(), EditError> {
    let wrap = |err| EditError::Path {
        edit: edit.to_string(),
        err,
    };
    match edit {
        Edit::Override(path, value) => match g.get(path) {
            // Overriding a co-indexed variable fixes every occurrence.
            Some(Node::Var(v)) => {
                let v = v.clone();
                g.substitute(&v, value);
                Ok(())
            }
            _ => g.set(path, value.clone()).map_err(wrap),
        },
        Edit::Add(path, value) => g.add(path, value.clone()).map_err(wrap),
        Edit::Delete(path) => g.delete(path).map(drop).map_err(wrap),
    }
}

/// Applies `edits` in order.
pub fn apply_edits(g: &Node, edits: &[Edit]) -> Result<Node, EditError> {
    let mut g = g.clone();
    for e in edits {
        apply_edit(&mut g, e)?;
    }
    Ok(g)
}

/// Merges `parents` left to right, later parents winning on conflicts, then
/// applies `edits`. Each parent's variables are renamed apart first, so
/// co-indexing never crosses templates.
pub fn inherit(parents: &[&Template], edits: &[Edit]) -> Result<Node, EditError> {
    let mut merged: Option<Node> = None;
    let mut env = Bindings::new();
    for (i, t) in parents.iter().enumerate() {
        let g = match parents.len() {
            1 => t.graph.clone(),
            _ => t.graph.rename_vars(&mut |v| format!("{v}_{i}")),
        };
        merged = Some(match merged {
            None => g,
            Some(acc) => {
                let (m, e) = unify_with(&acc, &g, &env, ClashPolicy::PreferRight)
                    .expect("override merge cannot fail");
                env = e;
                m
            }
        });
    }
    let base = resolve(&merged.unwrap_or(Node::Avm(Vec::new())), &env);
    apply_edits(&base, edits)
}

/// Rewrites the word form at `head.phon` and every copy of it in the
/// top-level `phon` slot template.
fn apply_surface(g: &mut Node, ops: &[SurfaceOp]) -> Result<(), EditError> {
    if ops.is_empty() {
        return Ok(());
    }
    let Some(old) = phon_of(g).map(str::to_string) else {
        return Err(EditError::Surface("entry has no atomic head.phon".into()));
    };
    let mut word = old.clone();
    for op in ops {
        word = op.apply(&word).map_err(EditError::Surface)?;
    }
    *g.get_mut(&PHON_PATH).expect("checked above") = Node::Atom(word.clone());
    let slots: Path = "phon".parse().expect("valid path");
    if let Some(Node::Seq(items)) = g.get_mut(&slots) {
        for item in items.iter_mut() {
            if item.as_atom() == Some(old.as_str()) {
                *item = Node::Atom(word.clone());
            }
        }
    }
    Ok(())
}

/// Applies one rule to a pristine lemma. `Ok(None)` when the guard does not
/// unify.
pub fn apply_rule(lemma: &Node, rule: &InflectionRule) -> Result<Option<Node>, EditError> {
    apply_renamed(lemma, &renamed_apart(rule))
}

/// `rule` with its variables renamed apart from any lemma's.
fn renamed_apart(rule: &InflectionRule) -> InflectionRule {
    let mut rename = |v: &str| format!("{v}_r");
    InflectionRule {
        name: rule.name.clone(),
        guard: rule.guard.rename_vars(&mut rename),
        edits: rule.edits.iter().map(|e| e.rename_vars(&mut rename)).collect(),
        surface: rule.surface.clone(),
    }
}

fn apply_renamed(lemma: &Node, rule: &InflectionRule) -> Result<Option<Node>, EditError> {
    let Ok((merged, env)) = unify_graphs(lemma, &rule.guard, &Bindings::new()) else {
        return Ok(None);
    };
    let mut g = resolve(&merged, &env);
    for e in &rule.edits {
        let e = match e {
            Edit::Override(p, v) => Edit::Override(p.clone(), resolve(v, &env)),
            Edit::Add(p, v) => Edit::Add(p.clone(), resolve(v, &env)),
            Edit::Delete(p) => Edit::Delete(p.clone()),
        };
        apply_edit(&mut g, &e)?;
    }
    apply_surface(&mut g, &rule.surface)?;
    Ok(Some(g))
}

/// One graph per rule whose guard unifies with `lemma`, in rule order.
pub fn expand(lemma: &Node, rules: &[InflectionRule]) -> Result<Vec<Node>, EditError> {
    let rules: Vec<InflectionRule> = rules.iter().map(renamed_apart).collect();
    let mut out = Vec::new();
    for r in &rules {
        out.extend(apply_renamed(lemma, r)?);
    }
    Ok(out)
}

/// Renames variables to `A`..`Z`, `A1`.. in first-occurrence order; local
/// (`_`-prefixed) variables keep their underscore.
pub fn tidy_vars(g: &Node) -> Node {
    let mut map: HashMap<String, String> = HashMap::new();
    let (mut plain, mut local) = (0usize, 0usize);
    g.rename_vars(&mut |v| {
        if let Some(n) = map.get(v) {
            return n.clone();
        }
        let counter = if v.starts_with('_') { &mut local } else { &mut plain };
        let letter = (b'A' + (*counter % 26) as u8) as char;
        let mut name = match *counter / 26 {
            0 => letter.to_string(),
            k => format!("{letter}{k}"),
        };
        if v.starts_with('_') {
            name.insert(0, '_');
        }
        *counter += 1;
        map.insert(v.to_string(), name.clone());
        name
    })
}

/// Sort key of an entry graph: type key, then word form, then concept.
fn sort_key(g: &Node) -> (String, String, String) {
    (
        category_of(g).map(|c| c.key().into_string()).unwrap_or_default(),
        phon_of(g).unwrap_or_default().to_string(),
        concept_of(g).unwrap_or_default().to_string(),
    )
}

/// Inherits every lemma, adds its rule expansions, validates all graphs,
/// sorts them by type key (then word form, then concept) and numbers them.
/// Each lemma contributes itself followed by its expansions.
pub fn compile(src: &LexiconSource, exec: Exec) -> Result<Vec<LexicalEntry>, CompileError> {
    let rules: Vec<InflectionRule> = src.rules.iter().map(renamed_apart).collect();
    let per_lemma = exec.map(&src.lemmas, |lemma| -> Result<Vec<(Origin, Node)>, CompileError> {
        let origin = |rule: Option<&str>| Origin {
            lemma: lemma.name.clone(),
            rule: rule.map(str::to_string),
        };
        let parents = lemma
            .parents
            .iter()
            .map(|p| {
                src.template(p).ok_or_else(|| CompileError::UnknownTemplate {
                    origin: origin(None),
                    template: p.clone(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let base = inherit(&parents, &lemma.edits).map_err(|err| CompileError::Edit { origin: origin(None), err })?;
        let mut out = vec![(origin(None), base.clone())];
        for rule in &rules {
            let applied = apply_renamed(&base, rule).map_err(|err| CompileError::Edit {
                origin: origin(Some(&rule.name)),
                err,
            })?;
            out.extend(applied.map(|g| (origin(Some(&rule.name)), g)));
        }
        Ok(out)
    });

    let mut graphs: Vec<(Origin, Node)> = Vec::new();
    for r in per_lemma {
        graphs.extend(r?);
    }
    let checked = exec.map(&graphs, |(_, g)| violations(g));
    let invalid: Vec<(Origin, Vec<Violation>)> = graphs
        .iter()
        .zip(checked)
        .filter(|(_, v)| !v.is_empty())
        .map(|((o, _), v)| (o.clone(), v))
        .collect();
    if !invalid.is_empty() {
        return Err(CompileError::Invalid(invalid));
    }

    let tidied = exec.map(&graphs, |(_, g)| {
        let g = tidy_vars(g);
        (sort_key(&g), g)
    });
    let mut keyed = tidied;
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(keyed
        .into_iter()
        .enumerate()
        .map(|(i, (_, g))| LexicalEntry::new(i as ObjectId, g))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature_graph::from_canonical_text;

    fn g(s: &str) -> Node {
        from_canonical_text(s).unwrap()
    }

    fn t(name: &str, s: &str) -> Template {
        Template {
            name: name.into(),
            graph: g(s),
        }
    }

    fn edit(s: &str) -> Edit {
        parse_edit(&g(s)).unwrap()
    }

    #[test]
    fn inherit_without_edits_is_identity() {
        let tpl = t("x", "[cat:v, num:X]");
        assert_eq!(inherit(&[&tpl], &[]).unwrap(), tpl.graph);
    }

    #[test]
    fn override_binds_a_variable() {
        let tpl = t("x", "[cat:v, num:X]");
        assert_eq!(inherit(&[&tpl], &[edit("set(num, sing)")]).unwrap(), g("[cat:v, num:sing]"));
        let shared = t("x", "[a:[num:X], b:[num:X]]");
        assert_eq!(
            inherit(&[&shared], &[edit("set('a.num', plur)")]).unwrap(),
            g("[a:[num:plur], b:[num:plur]]")
        );
    }

    #[test]
    fn right_parent_wins() {
        let (a, b) = (t("a", "[a:1]"), t("b", "[a:2]"));
        assert_eq!(inherit(&[&a, &b], &[]).unwrap(), g("[a:2]"));
        let (a, b) = (t("a", "[a:1, c:X]"), t("b", "[b:2, c:X]"));
        let m = inherit(&[&a, &b], &[]).unwrap();
        assert_eq!(m.get(&"a".parse().unwrap()), Some(&Node::Number(1)));
        assert_eq!(m.get(&"b".parse().unwrap()), Some(&Node::Number(2)));
    }

    #[test]
    fn delete_missing_is_an_error() {
        let tpl = t("x", "[a:1]");
        assert!(inherit(&[&tpl], &[edit("del(b)")]).is_err());
        assert_eq!(inherit(&[&tpl], &[edit("del(a)")]).unwrap(), g("[]"));
        assert_eq!(inherit(&[&tpl], &[edit("add(a, 2)")]).unwrap(), g("[a:1, a:2]"));
    }

    fn rule(guard: &str, edits: &[&str], surface: Vec<SurfaceOp>) -> InflectionRule {
        InflectionRule {
            name: "r".into(),
            guard: g(guard),
            edits: edits.iter().map(|e| edit(e)).collect(),
            surface,
        }
    }

    #[test]
    fn expand_third_singular() {
        let verb = g("[head:[concept:discover, phon:ontdek, synsem:[cat:v, num:N, pers:P]], phon:{S, ontdek}]");
        let r = rule(
            "[head:[synsem:[cat:v]]]",
            &["set('head.synsem.num', sing)", "set('head.synsem.pers', 3)"],
            vec![SurfaceOp::Suffix("t".into())],
        );
        let out = expand(&verb, std::slice::from_ref(&r)).unwrap();
        assert_eq!(
            out,
            vec![g("[head:[concept:discover, phon:ontdekt, synsem:[cat:v, num:sing, pers:3]], phon:{S, ontdekt}]")]
        );
        assert_eq!(expand(&verb, &[]).unwrap(), Vec::<Node>::new());
        let noun = g("[head:[concept:house, phon:huis, synsem:[cat:n]]]");
        assert_eq!(expand(&noun, std::slice::from_ref(&r)).unwrap(), Vec::<Node>::new());
        assert_eq!(expand(&verb, std::slice::from_ref(&r)).unwrap(), expand(&verb, &[r]).unwrap());
    }

    #[test]
    fn surface_change_needs_an_atomic_form() {
        let r = rule("[]", &[], vec![SurfaceOp::Suffix("t".into())]);
        assert!(expand(&g("[head:[phon:W]]"), &[r]).is_err());
    }

    #[test]
    fn tidy_renames_in_order() {
        assert_eq!(tidy_vars(&g("[a:Foo_3, b:_x, c:Bar, d:Foo_3]")), g("[a:A, b:_A, c:B, d:A]"));
    }

    const TEMPLATES: &str = "
        noun := [head:[concept:C, phon:W, synsem:[num:N]], phon:{W}, synsem:[cat:n, num:N], type:cat(n, {}, {})] .
        det := [head:[concept:C, phon:W, synsem:[num:N]], phon:{W, P}, synsem:[cat:np, num:N],
                type:cat(np, {}, {arg(n, '0', A)}), arg:[id:A, phon:P, synsem:[cat:n, num:N]]] .
    ";

    fn source(lemmas: &str, rules: &str) -> LexiconSource {
        LexiconSource::parse(("t", TEMPLATES), ("l", lemmas), ("r", rules)).unwrap()
    }

    #[test]
    fn one_lemma_one_entry() {
        let src = source("huis := lemma({noun}, {set('head.concept', house), set('head.phon', huis)}) .", "");
        let es = compile(&src, Exec::Sequential).unwrap();
        assert_eq!(es.len(), 1);
        assert_eq!(es[0].id, 0);
        assert_eq!(es[0].phon(), Some("huis"));
        assert!(validate(&es[0].graph).is_ok());
    }

    #[test]
    fn same_type_gets_contiguous_ids() {
        let src = source(
            "huis := lemma({noun}, {set('head.concept', house), set('head.phon', huis)}) .
             de := lemma({det}, {set('head.concept', the), set('head.phon', de)}) .
             boom := lemma({noun}, {set('head.concept', tree), set('head.phon', boom)}) .",
            "pl := rule([synsem:[cat:n]], {set('synsem.num', plur)}, {suffix(en)}) .",
        );
        let es = compile(&src, Exec::Parallel).unwrap();
        let keys: Vec<String> = es.iter().map(|e| e.category().unwrap().key().into_string()).collect();
        assert_eq!(keys, vec!["n", "n", "n", "n", "np/n"]);
        let phons: Vec<&str> = es.iter().map(|e| e.phon().unwrap()).collect();
        assert_eq!(phons, vec!["boom", "boomen", "huis", "huisen", "de"]);
        assert_eq!(compile(&src, Exec::Sequential).unwrap(), es);
    }

    #[test]
    fn invalid_lemma_aborts_naming_it() {
        let src = source("x := lemma({noun}, {set('head.concept', house)}) .", "");
        let err = compile(&src, Exec::Sequential).unwrap_err();
        assert_eq!(err.to_string(), "lemma `x`: not-atomic(PHON)");
        let src = source("x := lemma({verb}, {}) .", "");
        assert!(matches!(compile(&src, Exec::Sequential), Err(CompileError::UnknownTemplate { .. })));
    }
}
