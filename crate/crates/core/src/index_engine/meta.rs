//! External index over arbitrary feature paths.
//!
//! `meta.dat` holds posting lists as text records. For every indexed path
//! there is one record of entries that leave the path unspecified, and one
//! record per observed value. `meta.idx` maps each `(path, value)` to the
//! offsets of its match record and of its path's unspecified record:
//!
//! ```text
//! synsem@0.num@0<US>plur<TAB>41<TAB>0
//! synsem@0.num@0<US><TAB>-<TAB>0
//! ```
//!
//! The second form, with an empty value, records the unspecified list of a
//! path even when no entry has a value there.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::{self, File};
use std::io::{Read, Seek, SeekFrom};
use std::path::{Path as FsPath, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use super::posting::PostingList;
use crate::entry::{is_dedicated, LexicalEntry};
use crate::feature_graph::{to_canonical_text, Node, Path};
use crate::object_store::{AccessCounters, StoreError};
use crate::par::Exec;
use crate::ObjectId;

pub const META_IDX: &str = "meta.idx";
pub const META_DAT: &str = "meta.dat";
const US: char = '\u{1f}';

/// Strict constraints need an explicit matching value; liberal ones also
/// admit entries that leave the feature unspecified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    Strict,
    #[default]
    Liberal,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::Liberal => "liberal",
        })
    }
}

/// How an entry stands with respect to one path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Specification {
    /// Atomic values the entry matches; several for a disjunction.
    Values(Vec<Node>),
    /// No value, an unbound variable, or only deeper structure.
    Unspecified,
    /// A sequence or compound: matches no atomic query value.
    Opaque,
}

pub fn classify(g: &Node, path: &Path) -> Specification {
    match g.get(path) {
        None | Some(Node::Var(_)) | Some(Node::Avm(_)) => Specification::Unspecified,
        Some(n @ (Node::Atom(_) | Node::Number(_))) => Specification::Values(vec![n.clone()]),
        Some(Node::Disj(members)) => Specification::Values(members.clone()),
        Some(Node::Seq(_) | Node::Compound(..)) => Specification::Opaque,
    }
}

/// Location of one posting-list record in `meta.dat`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Record {
    pub offset: u64,
    pub len: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct PathMeta {
    unspecified: Option<Record>,
    values: HashMap<String, Record>,
}

/// `(path, value)` to record locations. Values are keyed by canonical text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MetaIndex {
    paths: BTreeMap<Path, PathMeta>,
}

impl MetaIndex {
    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.paths.keys()
    }

    pub fn is_indexed(&self, path: &Path) -> bool {
        self.paths.contains_key(path)
    }

    /// Number of `(path, value)` keys.
    pub fn len(&self) -> usize {
        self.paths.values().map(|p| p.values.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Observed values at `path`, in canonical-text order.
    pub fn values(&self, path: &Path) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .paths
            .get(path)
            .map(|p| p.values.keys().map(String::as_str).collect())
            .unwrap_or_default();
        out.sort_unstable();
        out
    }

    /// Records to read for a lookup, or `None` when the path is not indexed.
    /// At most two: the match record and, when liberal, the unspecified one.
    pub fn records(&self, path: &Path, value: &Node, mode: Mode) -> Option<Vec<Record>> {
        let meta = self.paths.get(path)?;
        let mut out = Vec::with_capacity(2);
        if value.is_atomic() {
            if let Some(r) = meta.values.get(&to_canonical_text(value)) {
                out.push(*r);
            }
        }
        if mode == Mode::Liberal {
            out.extend(meta.unspecified);
        }
        Some(out)
    }

    /// Parses `meta.idx` text; `dat_len` is the size of `meta.dat`.
    pub fn parse(text: &str, dat_len: u64) -> Result<Self, String> {
        let mut raw: Vec<(Path, Option<String>, Option<u64>, u64)> = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let bad = |what: &str| format!("line {}: {what}", n + 1);
            let (path, rest) = line.split_once(US).ok_or_else(|| bad("missing separator"))?;
            let path = Path::from_str(path).map_err(|e| bad(&e.to_string()))?;
            let mut fields = rest.rsplitn(3, '\t');
            let (Some(unspec), Some(matched), Some(value)) = (fields.next(), fields.next(), fields.next()) else {
                return Err(bad("expected three tab-separated fields"));
            };
            let unspec: u64 = unspec.parse().map_err(|_| bad("bad unspecified offset"))?;
            let (value, matched) = match (value, matched) {
                ("", "-") => (None, None),
                (v, m) => (Some(v.to_string()), Some(m.parse::<u64>().map_err(|_| bad("bad match offset"))?)),
            };
            raw.push((path, value, matched, unspec));
        }
        let mut offsets: Vec<u64> = raw
            .iter()
            .flat_map(|(_, _, m, u)| m.iter().copied().chain([*u]))
            .collect();
        offsets.sort_unstable();
        offsets.dedup();
        if offsets.last().is_some_and(|&o| o >= dat_len) {
            return Err(format!("offset {} past end of {META_DAT}", offsets.last().unwrap()));
        }
        let record = |offset: u64| {
            let i = offsets.binary_search(&offset).unwrap();
            let end = offsets.get(i + 1).copied().unwrap_or(dat_len);
            Record {
                offset,
                len: end - offset,
            }
        };
        let mut index = MetaIndex::default();
        for (path, value, matched, unspec) in raw {
            let meta = index.paths.entry(path).or_default();
            let u = record(unspec);
            if meta.unspecified.is_some_and(|old| old != u) {
                return Err("path with two unspecified records".into());
            }
            meta.unspecified = Some(u);
            if let (Some(v), Some(m)) = (value, matched) {
                meta.values.insert(v, record(m));
            }
        }
        Ok(index)
    }
}

/// Builds `meta.idx` and `meta.dat` for `paths` over ID-ordered entries.
pub fn build_meta(entries: &[LexicalEntry], paths: &[Path], dir: &FsPath, exec: Exec) -> Result<MetaIndex, StoreError> {
    let mut unique: Vec<Path> = Vec::new();
    for p in paths {
        if p.is_empty() || is_dedicated(p) {
            return Err(StoreError::Index {
                file: META_IDX.into(),
                reason: format!("path `{p}` cannot be meta-indexed"),
            });
        }
        if !unique.contains(p) {
            unique.push(p.clone());
        }
    }
    if let Some(pos) = entries.iter().enumerate().position(|(i, e)| e.id as usize != i) {
        return Err(StoreError::IdMismatch { pos, id: entries[pos].id });
    }

    let per_path = exec.map(&unique, |path| {
        let mut unspecified = PostingList::new();
        let mut values: BTreeMap<String, Vec<ObjectId>> = BTreeMap::new();
        for e in entries {
            match classify(&e.graph, path) {
                Specification::Unspecified => unspecified.push_id(e.id),
                Specification::Values(vs) => {
                    for v in vs {
                        values.entry(to_canonical_text(&v)).or_default().push(e.id);
                    }
                }
                Specification::Opaque => {}
            }
        }
        (unspecified, values)
    });

    let mut dat = String::new();
    let mut idx = String::new();
    for (path, (unspecified, values)) in unique.iter().zip(per_path) {
        let unspec_at = dat.len();
        dat.push_str(&format!("{unspecified}.\n"));
        idx.push_str(&format!("{path}{US}\t-\t{unspec_at}\n"));
        for (value, ids) in values {
            let at = dat.len();
            let list = PostingList::compress(&ids).expect("entries are visited in id order");
            dat.push_str(&format!("{list}.\n"));
            idx.push_str(&format!("{path}{US}{value}\t{at}\t{unspec_at}\n"));
        }
    }
    let idx_path = dir.join(META_IDX);
    let dat_path = dir.join(META_DAT);
    let written = fs::write(&dat_path, &dat)
        .map_err(|e| StoreError::io(&dat_path, e))
        .and_then(|_| fs::write(&idx_path, &idx).map_err(|e| StoreError::io(&idx_path, e)));
    if let Err(e) = written {
        let _ = fs::remove_file(&dat_path);
        let _ = fs::remove_file(&idx_path);
        return Err(e);
    }
    MetaIndex::parse(&idx, dat.len() as u64).map_err(|reason| StoreError::Index {
        file: META_IDX.into(),
        reason,
    })
}

/// Reads posting-list records from `meta.dat`, one seek and one read each.
#[derive(Debug)]
pub struct MetaReader {
    path: PathBuf,
    file: Mutex<File>,
    counters: Arc<AccessCounters>,
}

impl MetaReader {
    pub fn read(&self, record: Record) -> Result<PostingList, StoreError> {
        let mut buf = vec![0u8; record.len as usize];
        {
            let mut f = self.file.lock().unwrap_or_else(|p| p.into_inner());
            f.seek(SeekFrom::Start(record.offset))
                .and_then(|_| f.read_exact(&mut buf))
                .map_err(|e| StoreError::io(&self.path, e))?;
        }
        self.counters.meta_read(buf.len());
        let corrupt = |reason: String| StoreError::Index {
            file: META_DAT.into(),
            reason: format!("record at {}: {reason}", record.offset),
        };
        let text = std::str::from_utf8(&buf).map_err(|e| corrupt(e.to_string()))?;
        text.parse().map_err(|e: super::PostingError| corrupt(e.to_string()))
    }
}

/// Loads `meta.idx` and opens `meta.dat`.
pub fn open_meta(dir: &FsPath, counters: Arc<AccessCounters>) -> Result<(MetaIndex, MetaReader), StoreError> {
    let idx_path = dir.join(META_IDX);
    let dat_path = dir.join(META_DAT);
    let text = fs::read_to_string(&idx_path).map_err(|e| StoreError::io(&idx_path, e))?;
    let file = File::open(&dat_path).map_err(|e| StoreError::io(&dat_path, e))?;
    let dat_len = file.metadata().map_err(|e| StoreError::io(&dat_path, e))?.len();
    let index = MetaIndex::parse(&text, dat_len).map_err(|reason| StoreError::Index {
        file: META_IDX.into(),
        reason,
    })?;
    Ok((
        index,
        MetaReader {
            path: dat_path,
            file: Mutex::new(file),
            counters,
        },
    ))
}

/// Posting list for a meta constraint; `None` when `path` is not indexed.
/// Strict reads at most the match record; liberal adds the path's
/// unspecified record.
pub fn lookup_meta(
    index: &MetaIndex,
    reader: &MetaReader,
    path: &Path,
    value: &Node,
    mode: Mode,
) -> Result<Option<PostingList>, StoreError> {
    let Some(records) = index.records(path, value, mode) else {
        return Ok(None);
    };
    let mut out = PostingList::new();
    for r in records {
        out = out.union(&reader.read(r)?);
    }
    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature_graph::from_canonical_text;

    fn entries(texts: &[&str]) -> Vec<LexicalEntry> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| LexicalEntry::new(i as ObjectId, from_canonical_text(t).unwrap()))
            .collect()
    }

    fn p(s: &str) -> Path {
        s.parse().unwrap()
    }

    fn open(es: &[LexicalEntry], paths: &[Path]) -> (tempfile::TempDir, MetaIndex, MetaReader, Arc<AccessCounters>) {
        let dir = tempfile::tempdir().unwrap();
        let built = build_meta(es, paths, dir.path(), Exec::Sequential).unwrap();
        let counters = Arc::new(AccessCounters::default());
        let (index, reader) = open_meta(dir.path(), counters.clone()).unwrap();
        assert_eq!(built, index);
        (dir, index, reader, counters)
    }

    #[test]
    fn three_entry_number_example() {
        let es = entries(&["[synsem:[number:sing]]", "[synsem:[number:plur]]", "[synsem:[cat:n]]"]);
        let path = p("synsem.number");
        let (_d, idx, rd, counters) = open(&es, std::slice::from_ref(&path));
        let look = |v: &str, m| {
            lookup_meta(&idx, &rd, &path, &Node::atom(v), m)
                .unwrap()
                .unwrap()
                .decompress()
        };
        assert_eq!(look("sing", Mode::Strict), vec![0]);
        assert_eq!(look("plur", Mode::Strict), vec![1]);
        assert_eq!(look("plur", Mode::Liberal), vec![1, 2]);
        assert_eq!(look("dual", Mode::Strict), Vec::<u32>::new());
        assert_eq!(look("dual", Mode::Liberal), vec![2]);
        // 1 + 1 + 2 + 0 + 1 records read
        assert_eq!(counters.snapshot().meta_reads, 5);
    }

    #[test]
    fn vars_and_disjunctions() {
        let es = entries(&["[num:X]", "[num:or(2, 3)]", "[num:3]", "[num:f(x)]", "[num:[deeper:1]]"]);
        let path = p("num");
        let (_d, idx, rd, _) = open(&es, std::slice::from_ref(&path));
        let look = |v: Node, m| lookup_meta(&idx, &rd, &path, &v, m).unwrap().unwrap().decompress();
        assert_eq!(look(Node::Number(3), Mode::Strict), vec![1, 2]);
        assert_eq!(look(Node::Number(2), Mode::Liberal), vec![0, 1, 4]);
        assert_eq!(look(Node::atom("3"), Mode::Strict), Vec::<u32>::new());
    }

    #[test]
    fn unindexed_path_is_none() {
        let es = entries(&["[a:1]"]);
        let (_d, idx, rd, counters) = open(&es, &[p("a")]);
        assert!(lookup_meta(&idx, &rd, &p("b"), &Node::Number(1), Mode::Liberal).unwrap().is_none());
        assert_eq!(counters.snapshot().meta_reads, 0);
    }

    #[test]
    fn empty_store_gives_empty_files() {
        let dir = tempfile::tempdir().unwrap();
        let idx = build_meta(&[], &[], dir.path(), Exec::Sequential).unwrap();
        assert!(idx.is_empty());
        assert_eq!(fs::read(dir.path().join(META_DAT)).unwrap().len(), 0);
    }

    #[test]
    fn dedicated_paths_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(build_meta(&[], &[p("type")], dir.path(), Exec::Sequential).is_err());
    }

    #[test]
    fn odd_values_survive_the_index_file() {
        let es = entries(&["[a:'x\ty']", "[a:'p\u{1f}q']", "[a:'']"]);
        let (_d, idx, rd, _) = open(&es, &[p("a")]);
        for (i, v) in ["x\ty", "p\u{1f}q", ""].into_iter().enumerate() {
            let got = lookup_meta(&idx, &rd, &p("a"), &Node::atom(v), Mode::Strict).unwrap().unwrap();
            assert_eq!(got.decompress(), vec![i as u32], "{v:?}");
        }
    }
}
