//! The three in-memory index tables: type, concept and word form.
//!
//! File formats, one record per line:
//!
//! ```text
//! index.typ   s\np/np<TAB>[3+1].
//! index.con   3016<TAB>discover<TAB>[3, 7].
//! index.pho   88<TAB>de<TAB>[12].
//! ```
//!
//! Word records carry the original text so colliding hashes stay apart.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::posting::PostingList;
use super::word_hash::word_hash;
use crate::category::{Category, TypeKey};
use crate::entry::LexicalEntry;
use crate::feature_graph::{from_canonical_text, quote_atom, Node};
use crate::object_store::StoreError;
use crate::ObjectId;

pub const TYPE_FILE: &str = "index.typ";
pub const CONCEPT_FILE: &str = "index.con";
pub const PHON_FILE: &str = "index.pho";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeRow {
    pub key: TypeKey,
    pub category: Category,
    pub ids: PostingList,
}

/// Type key to posting list, rows kept in key order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeTable {
    rows: Vec<TypeRow>,
    by_key: HashMap<String, usize>,
}

impl TypeTable {
    fn from_rows(mut rows: Vec<TypeRow>) -> Self {
        rows.sort_by(|a, b| a.key.cmp(&b.key));
        let by_key = rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.key.as_str().to_string(), i))
            .collect();
        TypeTable { rows, by_key }
    }

    pub fn rows(&self) -> &[TypeRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&TypeRow> {
        self.by_key.get(key).map(|&i| &self.rows[i])
    }

    /// Posting list for `key`; empty when absent.
    pub fn lookup(&self, key: &str) -> PostingList {
        self.get(key).map(|r| r.ids.clone()).unwrap_or_default()
    }

    /// Share of keys whose list is a single item (one id or one range).
    pub fn range_fraction(&self) -> f64 {
        if self.rows.is_empty() {
            return 1.0;
        }
        let single = self.rows.iter().filter(|r| r.ids.spans().len() == 1).count();
        single as f64 / self.rows.len() as f64
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(r.key.as_str());
            out.push('\t');
            out.push_str(&r.ids.to_string());
            out.push_str(".\n");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let bad = |what: String| format!("line {}: {what}", n + 1);
            let (key, list) = line.split_once('\t').ok_or_else(|| bad("missing tab".into()))?;
            let category = Category::parse(key).map_err(|e| bad(e.to_string()))?;
            if category.key().as_str() != key {
                return Err(bad(format!("non-canonical key `{key}`")));
            }
            let ids: PostingList = list.parse().map_err(|e: super::PostingError| bad(e.to_string()))?;
            rows.push(TypeRow {
                key: category.key(),
                category,
                ids,
            });
        }
        let table = TypeTable::from_rows(rows);
        if table.by_key.len() != table.rows.len() {
            return Err("duplicate key".into());
        }
        Ok(table)
    }
}

/// Word hash to collision bucket of `(text, posting list)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordTable {
    buckets: HashMap<u64, Vec<(String, PostingList)>>,
}

impl WordTable {
    fn insert(&mut self, text: &str, id: ObjectId) {
        let bucket = self.buckets.entry(word_hash(text)).or_default();
        match bucket.iter_mut().find(|(t, _)| t == text) {
            Some((_, ids)) => ids.push_id(id),
            None => {
                let mut ids = PostingList::new();
                ids.push_id(id);
                bucket.push((text.to_string(), ids));
            }
        }
    }

    /// Resolves the bucket by exact text comparison.
    pub fn lookup(&self, text: &str) -> PostingList {
        self.get(text).cloned().unwrap_or_default()
    }

    pub fn get(&self, text: &str) -> Option<&PostingList> {
        self.buckets
            .get(&word_hash(text))?
            .iter()
            .find(|(t, _)| t == text)
            .map(|(_, ids)| ids)
    }

    pub fn bucket(&self, hash: u64) -> &[(String, PostingList)] {
        self.buckets.get(&hash).map_or(&[], Vec::as_slice)
    }

    /// Number of distinct hash keys.
    pub fn hash_count(&self) -> usize {
        self.buckets.len()
    }

    /// Number of distinct texts.
    pub fn len(&self) -> usize {
        self.buckets.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }

    /// Hash keys shared by more than one text.
    pub fn collisions(&self) -> impl Iterator<Item = (u64, &[(String, PostingList)])> {
        self.buckets
            .iter()
            .filter(|(_, b)| b.len() > 1)
            .map(|(h, b)| (*h, b.as_slice()))
    }

    /// All texts in byte order.
    pub fn texts(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .buckets
            .values()
            .flat_map(|b| b.iter().map(|(t, _)| t.as_str()))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn render(&self) -> String {
        let mut items: Vec<(u64, &str, &PostingList)> = self
            .buckets
            .iter()
            .flat_map(|(h, b)| b.iter().map(move |(t, ids)| (*h, t.as_str(), ids)))
            .collect();
        items.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut out = String::new();
        for (h, t, ids) in items {
            out.push_str(&format!("{h}\t{}\t{ids}.\n", quote_atom(t)));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut table = WordTable::default();
        for (n, line) in text.lines().enumerate() {
            let bad = |what: String| format!("line {}: {what}", n + 1);
            let mut parts = line.splitn(3, '\t');
            let (Some(h), Some(word), Some(list)) = (parts.next(), parts.next(), parts.next()) else {
                return Err(bad("expected three fields".into()));
            };
            let h: u64 = h.parse().map_err(|_| bad(format!("bad hash `{h}`")))?;
            let word = match from_canonical_text(word) {
                Ok(Node::Atom(w)) => w,
                _ => return Err(bad(format!("bad word `{word}`"))),
            };
            if word_hash(&word) != h {
                return Err(bad(format!("hash {h} does not match `{word}`")));
            }
            let ids: PostingList = list.parse().map_err(|e: super::PostingError| bad(e.to_string()))?;
            let bucket = table.buckets.entry(h).or_default();
            if bucket.iter().any(|(t, _)| *t == word) {
                return Err(bad(format!("duplicate word `{word}`")));
            }
            bucket.push((word, ids));
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IndexTables {
    pub types: TypeTable,
    pub concepts: WordTable,
    pub phons: WordTable,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IndexError {
    #[error("entry {id}: {what}")]
    Entry { id: ObjectId, what: String },
    #[error("entry at position {pos} carries id {id}")]
    Order { pos: usize, id: ObjectId },
}

/// Builds the three tables from ID-ordered entries.
pub fn build_indexes(entries: &[LexicalEntry]) -> Result<IndexTables, IndexError> {
    let mut types: Vec<TypeRow> = Vec::new();
    let mut type_pos: HashMap<TypeKey, usize> = HashMap::new();
    let mut concepts = WordTable::default();
    let mut phons = WordTable::default();
    for (pos, e) in entries.iter().enumerate() {
        if e.id as usize != pos {
            return Err(IndexError::Order { pos, id: e.id });
        }
        let err = |what: String| IndexError::Entry { id: e.id, what };
        let category = e.category().map_err(|x| err(x.to_string()))?;
        let key = category.key();
        match type_pos.get(&key) {
            Some(&i) => types[i].ids.push_id(e.id),
            None => {
                let mut ids = PostingList::new();
                ids.push_id(e.id);
                type_pos.insert(key.clone(), types.len());
                types.push(TypeRow {
                    key,
                    category: category.erase_links(),
                    ids,
                });
            }
        }
        concepts.insert(e.concept().ok_or_else(|| err("concept is not an atom".into()))?, e.id);
        phons.insert(e.phon().ok_or_else(|| err("phon is not an atom".into()))?, e.id);
    }
    Ok(IndexTables {
        types: TypeTable::from_rows(types),
        concepts,
        phons,
    })
}

impl IndexTables {
    /// Writes the three index files; returns their total size in bytes.
    pub fn write(&self, dir: &Path) -> Result<u64, StoreError> {
        let mut total = 0;
        for (file, text) in [
            (TYPE_FILE, self.types.render()),
            (CONCEPT_FILE, self.concepts.render()),
            (PHON_FILE, self.phons.render()),
        ] {
            let path = dir.join(file);
            fs::write(&path, &text).map_err(|e| StoreError::io(&path, e))?;
            total += text.len() as u64;
        }
        Ok(total)
    }

    pub fn load(dir: &Path) -> Result<Self, StoreError> {
        let read = |file: &str| {
            let path = dir.join(file);
            fs::read_to_string(&path).map_err(|e| StoreError::io(&path, e))
        };
        let index_err = |file: &str| {
            let file = file.to_string();
            move |reason: String| StoreError::Index { file, reason }
        };
        Ok(IndexTables {
            types: TypeTable::parse(&read(TYPE_FILE)?).map_err(index_err(TYPE_FILE))?,
            concepts: WordTable::parse(&read(CONCEPT_FILE)?).map_err(index_err(CONCEPT_FILE))?,
            phons: WordTable::parse(&read(PHON_FILE)?).map_err(index_err(PHON_FILE))?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(id: ObjectId, concept: &str, phon: &str, ty: &str) -> LexicalEntry {
        let ty = Category::parse(ty).unwrap().to_node();
        let g = Node::avm([
            ("head", Node::avm([("concept", Node::atom(concept)), ("phon", Node::atom(phon))])),
            ("type", ty),
        ]);
        LexicalEntry::new(id, g)
    }

    #[test]
    fn empty_input_gives_empty_tables() {
        let t = build_indexes(&[]).unwrap();
        assert!(t.types.is_empty() && t.concepts.is_empty() && t.phons.is_empty());
    }

    #[test]
    fn one_type_is_one_range() {
        let es: Vec<_> = (0..5).map(|i| entry(i, &format!("c{i}"), "w", "n")).collect();
        let t = build_indexes(&es).unwrap();
        assert_eq!(t.types.len(), 1);
        assert_eq!(t.types.lookup("n").to_string(), "[0+4]");
        assert_eq!(t.phons.lookup("w").to_string(), "[0+4]");
        assert_eq!(t.concepts.lookup("c3").to_string(), "[3]");
        assert!(t.phons.lookup("zzz").is_empty());
    }

    #[test]
    fn colliding_words_share_a_key_but_not_a_list() {
        let a = "arbeidsongeschiktheidsverzekering";
        let b = "arbeidsongeschiktheidsverzekeringen";
        let es = vec![entry(0, "x", a, "n"), entry(1, "y", b, "n"), entry(2, "z", a, "n")];
        let t = build_indexes(&es).unwrap();
        assert_eq!(t.phons.hash_count(), 1);
        assert_eq!(t.phons.bucket(word_hash(a)).len(), 2);
        assert_eq!(t.phons.lookup(a).decompress(), vec![0, 2]);
        assert_eq!(t.phons.lookup(b).decompress(), vec![1]);
        assert_eq!(t.phons.collisions().count(), 1);
    }

    #[test]
    fn files_round_trip() {
        let es = vec![
            entry(0, "discover", "ontdekt", "s\\np/np"),
            entry(1, "that", "die", "np/n"),
            entry(2, "this", "dit", "np/n"),
            entry(3, "'odd\tone'", "Nederlander", "n"),
        ];
        let t = build_indexes(&es).unwrap();
        let dir = tempfile::tempdir().unwrap();
        t.write(dir.path()).unwrap();
        let back = IndexTables::load(dir.path()).unwrap();
        assert_eq!(back, t);
        let typ = fs::read_to_string(dir.path().join(TYPE_FILE)).unwrap();
        assert_eq!(typ, "n\t[3].\nnp/n\t[1+1].\ns\\np/np\t[0].\n");
    }

    #[test]
    fn tampered_hash_is_rejected() {
        assert!(WordTable::parse("5\tde\t[0].\n").is_err());
        assert!(WordTable::parse("88\tde\t[0].\n").is_ok());
    }
}
