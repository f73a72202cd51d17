//! Lexicon source files.
//!
//! Each file is a sequence of `name := value .` records in canonical text.
//!
//! ```text
//! % templates
//! noun := [head:[concept:C, phon:W, synsem:[num:N]], phon:{W}, type:cat(n, {}, {})] .
//!
//! % lemmas: parents, then edits applied in order
//! huis := lemma({noun}, {set('head.concept', house), set('head.phon', huis)}) .
//!
//! % rules: guard, edits, word form changes
//! plural := rule([type:cat(n, {}, {})], {set('head.synsem.num', plur)}, {suffix(en)}) .
//! ```
//!
//! Edits are `set(Path, Value)`, `add(Path, Value)` and `del(Path)`; word
//! form changes are `suffix(S)`, `strip(S)` and `replace(From, To)`.

use std::collections::HashSet;
use std::fmt;

use crate::feature_graph::{parse_records, DecodeError, Node, Path, SourceRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub name: String,
    pub graph: Node,
}

/// One difference-list edit.
#[derive(Debug, Clone, PartialEq)]
pub enum Edit {
    /// Replace the node at the path, creating intermediate Avms.
    Override(Path, Node),
    /// Append a new occurrence of the path's final feature.
    Add(Path, Node),
    /// Remove the occurrence at the path.
    Delete(Path),
}

impl Edit {
    pub fn path(&self) -> &Path {
        match self {
            Edit::Override(p, _) | Edit::Add(p, _) | Edit::Delete(p) => p,
        }
    }

    pub(crate) fn rename_vars(&self, f: &mut impl FnMut(&str) -> String) -> Edit {
        match self {
            Edit::Override(p, v) => Edit::Override(p.clone(), v.rename_vars(f)),
            Edit::Add(p, v) => Edit::Add(p.clone(), v.rename_vars(f)),
            Edit::Delete(p) => Edit::Delete(p.clone()),
        }
    }
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Edit::Override(p, v) => write!(f, "set('{p}', {v})"),
            Edit::Add(p, v) => write!(f, "add('{p}', {v})"),
            Edit::Delete(p) => write!(f, "del('{p}')"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaSpec {
    pub name: String,
    pub parents: Vec<String>,
    pub edits: Vec<Edit>,
}

/// String edit on a word form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SurfaceOp {
    Suffix(String),
    Strip(String),
    Replace(String, String),
}

impl SurfaceOp {
    pub fn apply(&self, word: &str) -> Result<String, String> {
        match self {
            SurfaceOp::Suffix(s) => Ok(format!("{word}{s}")),
            SurfaceOp::Strip(s) => word
                .strip_suffix(s.as_str())
                .map(str::to_string)
                .ok_or_else(|| format!("`{word}` does not end in `{s}`")),
            SurfaceOp::Replace(from, to) if word.contains(from.as_str()) => Ok(word.replace(from.as_str(), to)),
            SurfaceOp::Replace(from, _) => Err(format!("`{word}` does not contain `{from}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InflectionRule {
    pub name: String,
    pub guard: Node,
    pub edits: Vec<Edit>,
    pub surface: Vec<SurfaceOp>,
}

/// Parsed templates, lemmas and rules.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LexiconSource {
    pub templates: Vec<Template>,
    pub lemmas: Vec<LemmaSpec>,
    pub rules: Vec<InflectionRule>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SourceError {
    #[error("{file}: {reason}")]
    Io { file: String, reason: String },
    #[error("{file}:{err}")]
    Decode { file: String, err: DecodeError },
    #[error("{file}:{line}: `{name}`: {reason}")]
    Record {
        file: String,
        line: usize,
        name: String,
        reason: String,
    },
}

impl LexiconSource {
    /// Parses the three source texts. `names` label the files in errors.
    pub fn parse(templates: (&str, &str), lemmas: (&str, &str), rules: (&str, &str)) -> Result<Self, SourceError> {
        let records = |(file, text): (&str, &str)| {
            parse_records(text).map_err(|err| SourceError::Decode {
                file: file.to_string(),
                err,
            })
        };
        let t = records(templates)?;
        let l = records(lemmas)?;
        let r = records(rules)?;
        check_unique(templates.0, &t)?;
        check_unique(lemmas.0, &l)?;
        check_unique(rules.0, &r)?;
        Ok(LexiconSource {
            templates: t
                .into_iter()
                .map(|rec| Template {
                    name: rec.name,
                    graph: rec.value,
                })
                .collect(),
            lemmas: l
                .iter()
                .map(|rec| lemma_from(rec).map_err(|reason| record_err(lemmas.0, rec, reason)))
                .collect::<Result<_, _>>()?,
            rules: r
                .iter()
                .map(|rec| rule_from(rec).map_err(|reason| record_err(rules.0, rec, reason)))
                .collect::<Result<_, _>>()?,
        })
    }

    /// Reads and parses three source files.
    pub fn read_files(templates: &std::path::Path, lemmas: &std::path::Path, rules: &std::path::Path) -> Result<Self, SourceError> {
        let read = |p: &std::path::Path| {
            std::fs::read_to_string(p)
                .map(|text| (p.display().to_string(), text))
                .map_err(|e| SourceError::Io {
                    file: p.display().to_string(),
                    reason: e.to_string(),
                })
        };
        let (t, l, r) = (read(templates)?, read(lemmas)?, read(rules)?);
        Self::parse((&t.0, &t.1), (&l.0, &l.1), (&r.0, &r.1))
    }

    pub fn template(&self, name: &str) -> Option<&Template> {
        self.templates.iter().find(|t| t.name == name)
    }
}

fn record_err(file: &str, rec: &SourceRecord, reason: String) -> SourceError {
    SourceError::Record {
        file: file.to_string(),
        line: rec.line,
        name: rec.name.clone(),
        reason,
    }
}

fn check_unique(file: &str, recs: &[SourceRecord]) -> Result<(), SourceError> {
    let mut seen = HashSet::new();
    for rec in recs {
        if !seen.insert(rec.name.as_str()) {
            return Err(record_err(file, rec, "duplicate name".into()));
        }
    }
    Ok(())
}

fn items(n: &Node) -> Vec<&Node> {
    match n {
        Node::Seq(items) => items.iter().collect(),
        other => vec![other],
    }
}

fn text_arg(n: &Node) -> Result<&str, String> {
    n.as_atom().ok_or_else(|| format!("expected an atom, found {n}"))
}

fn path_arg(n: &Node) -> Result<Path, String> {
    let text = text_arg(n)?;
    text.parse().map_err(|e| format!("{e}"))
}

pub fn parse_edit(n: &Node) -> Result<Edit, String> {
    match n {
        Node::Compound(f, args) => match (f.as_str(), args.as_slice()) {
            ("set", [p, v]) => Ok(Edit::Override(path_arg(p)?, v.clone())),
            ("add", [p, v]) => Ok(Edit::Add(path_arg(p)?, v.clone())),
            ("del", [p]) => Ok(Edit::Delete(path_arg(p)?)),
            _ => Err(format!("unknown edit {n}")),
        },
        _ => Err(format!("unknown edit {n}")),
    }
}

fn parse_surface(n: &Node) -> Result<SurfaceOp, String> {
    match n {
        Node::Compound(f, args) => match (f.as_str(), args.as_slice()) {
            ("suffix", [s]) => Ok(SurfaceOp::Suffix(text_arg(s)?.to_string())),
            ("strip", [s]) => Ok(SurfaceOp::Strip(text_arg(s)?.to_string())),
            ("replace", [a, b]) => Ok(SurfaceOp::Replace(text_arg(a)?.to_string(), text_arg(b)?.to_string())),
            _ => Err(format!("unknown word form change {n}")),
        },
        _ => Err(format!("unknown word form change {n}")),
    }
}

fn lemma_from(rec: &SourceRecord) -> Result<LemmaSpec, String> {
    let Node::Compound(f, args) = &rec.value else {
        return Err("expected lemma(Parents, Edits)".into());
    };
    let [parents, edits] = args.as_slice() else {
        return Err("expected lemma(Parents, Edits)".into());
    };
    if f != "lemma" {
        return Err("expected lemma(Parents, Edits)".into());
    }
    let parents: Vec<String> = items(parents)
        .into_iter()
        .map(|p| text_arg(p).map(str::to_string))
        .collect::<Result<_, _>>()?;
    if parents.is_empty() {
        return Err("a lemma needs at least one parent template".into());
    }
    Ok(LemmaSpec {
        name: rec.name.clone(),
        parents,
        edits: items(edits).into_iter().map(parse_edit).collect::<Result<_, _>>()?,
    })
}

fn rule_from(rec: &SourceRecord) -> Result<InflectionRule, String> {
    let shape = || "expected rule(Guard, Edits, WordFormChanges)".to_string();
    let Node::Compound(f, args) = &rec.value else {
        return Err(shape());
    };
    let [guard, edits, surface] = args.as_slice() else {
        return Err(shape());
    };
    if f != "rule" {
        return Err(shape());
    }
    Ok(InflectionRule {
        name: rec.name.clone(),
        guard: guard.clone(),
        edits: items(edits).into_iter().map(parse_edit).collect::<Result<_, _>>()?,
        surface: items(surface).into_iter().map(parse_surface).collect::<Result<_, _>>()?,
    })
}
