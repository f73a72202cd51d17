//! Query expressions: `[~]field=value`, or one canonical-text graph.

use oolex::category::Category;
use oolex::entry::{CONCEPT_PATH, PHON_PATH, TYPE_PATH};
use oolex::feature_graph::{from_canonical_text, Node, Path};
use oolex::index_engine::{MetaIndex, Mode};
use oolex::query_engine::{graph_to_query, Constraint, Query, QueryError, Target};

fn unquote(v: &str) -> &str {
    v.strip_prefix('\'').and_then(|s| s.strip_suffix('\'')).unwrap_or(v)
}

/// `concept`, `phon` and `type` name the dedicated indexes. A bare feature
/// name stands for the one indexed meta path ending in it; anything else is
/// read as a path.
pub fn resolve_field(meta: &MetaIndex, field: &str) -> Result<Target, String> {
    match field {
        "concept" => return Ok(Target::Concept),
        "phon" => return Ok(Target::Phon),
        "type" => return Ok(Target::Type),
        _ => {}
    }
    let path: Path = field.parse().map_err(|e| format!("bad field `{field}`: {e}"))?;
    if path == *CONCEPT_PATH {
        return Ok(Target::Concept);
    }
    if path == *PHON_PATH {
        return Ok(Target::Phon);
    }
    if path == *TYPE_PATH {
        return Ok(Target::Type);
    }
    if meta.is_indexed(&path) || path.len() > 1 || field.contains('@') {
        return Ok(Target::Meta(path));
    }
    let matches: Vec<&Path> = meta
        .paths()
        .filter(|p| p.last().is_some_and(|s| s.feature == field))
        .collect();
    match matches.as_slice() {
        [] => Ok(Target::Meta(path)),
        [one] => Ok(Target::Meta((*one).clone())),
        many => Err(format!(
            "field `{field}` is ambiguous: {}",
            many.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
        )),
    }
}

fn meta_value(v: &str) -> Result<Node, String> {
    match from_canonical_text(v) {
        Ok(n @ (Node::Atom(_) | Node::Number(_))) => Ok(n),
        // Capitalised words would read as variables.
        Ok(Node::Var(_)) => Ok(Node::atom(v)),
        Ok(other) => Err(format!("value `{other}` is not atomic")),
        Err(e) => Err(format!("bad value `{v}`: {e}")),
    }
}

pub fn parse_constraint(meta: &MetaIndex, expr: &str) -> Result<Constraint, String> {
    let (liberal, body) = match expr.strip_prefix('~') {
        Some(rest) => (true, rest),
        None => (false, expr),
    };
    let (field, value) = body
        .split_once('=')
        .ok_or_else(|| format!("expected field=value, got `{expr}`"))?;
    let mode = if liberal { Mode::Liberal } else { Mode::Strict };
    let target = resolve_field(meta, field.trim())?;
    let value = value.trim();
    let c = match target {
        Target::Concept => Constraint::concept(unquote(value)),
        Target::Phon => Constraint::phon(unquote(value)),
        Target::Type => {
            let cat = Category::parse(value).map_err(|e| e.to_string())?;
            Constraint::type_key(cat.key().as_str())
        }
        Target::Meta(path) => Constraint::meta(path, meta_value(value)?, mode),
    };
    if liberal && c.mode == Mode::Strict {
        return Err(format!("`{field}` constraints are always strict"));
    }
    Ok(c)
}

pub fn parse_query(meta: &MetaIndex, exprs: &[String]) -> Result<Query, String> {
    if let [one] = exprs {
        if one.trim_start().starts_with('[') {
            let g = from_canonical_text(one).map_err(|e| format!("bad graph: {e}"))?;
            return graph_to_query(&g).map_err(|e| match e {
                QueryError::EmptyQuery => e.to_string(),
                QueryError::Store(e) => e.to_string(),
            });
        }
    }
    if exprs.is_empty() {
        return Err("no constraints given".into());
    }
    let constraints = exprs
        .iter()
        .map(|e| parse_constraint(meta, e))
        .collect::<Result<_, _>>()?;
    Ok(Query::new(constraints))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> MetaIndex {
        MetaIndex::parse(
            "synsem@0.num@0\u{1f}\t-\t0\nsynsem@0.cat@0\u{1f}\t-\t0\nhead@0.synsem@0.num@0\u{1f}\t-\t0\n",
            4,
        )
        .unwrap()
    }

    fn c(expr: &str) -> Result<String, String> {
        parse_constraint(&meta(), expr).map(|c| c.to_string())
    }

    #[test]
    fn dedicated_fields() {
        assert_eq!(c("concept=meaning").unwrap(), "concept=meaning");
        assert_eq!(c("phon='Nederlander'").unwrap(), "phon='Nederlander'");
        assert_eq!(c("phon=Nederlander").unwrap(), "phon='Nederlander'");
        assert_eq!(c("type=s\\np/np").unwrap(), "type='s\\\\np/np'");
        assert!(c("~concept=meaning").is_err());
    }

    #[test]
    fn bare_names_pick_the_unique_indexed_path() {
        assert_eq!(c("cat=np").unwrap(), "synsem@0.cat@0=np");
        assert!(c("num=plur").unwrap_err().contains("ambiguous"));
        assert_eq!(c("~synsem.num=plur").unwrap(), "~synsem@0.num@0=plur");
        assert_eq!(c("person=3").unwrap(), "person@0=3");
    }

    #[test]
    fn malformed() {
        assert!(c("cat").is_err());
        assert!(c("type=s\\").is_err());
        assert!(c("cat=[a:b]").is_err());
    }
}
