//! Entries persisted as text records addressed through a fixed-width offset
//! table.
//!
//! `lexicon.obj` holds one canonical-text record per entry. `lexicon.tab`
//! holds, for entry `i`, the byte offset of its record as an 8-byte
//! big-endian integer at position `8 * i`.

use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use crate::entry::LexicalEntry;
use crate::feature_graph::{encode_record, Decoder, VarSupply};
use crate::par::Exec;
use crate::ObjectId;

pub const OBJ_FILE: &str = "lexicon.obj";
pub const TAB_FILE: &str = "lexicon.tab";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("not-multiple-of-8: {TAB_FILE} has length {len}")]
    NotMultipleOf8 { len: u64 },
    #[error("bad-first-offset: entry 0 starts at {0}, expected 0")]
    BadFirstOffset(u64),
    #[error("dangling-offset: entry {id} starts at {offset} but {OBJ_FILE} has length {obj_len}")]
    DanglingOffset { id: ObjectId, offset: u64, obj_len: u64 },
    #[error("id {id} out of range, store holds {n} entries")]
    OutOfRange { id: ObjectId, n: usize },
    #[error("corrupt record {id}: {reason}")]
    Corrupt { id: ObjectId, reason: String },
    #[error("entry at position {pos} carries id {id}")]
    IdMismatch { pos: usize, id: ObjectId },
    #[error("{file}: {reason}")]
    Index { file: String, reason: String },
}

impl StoreError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        StoreError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// True when the files on disk are inconsistent rather than missing or
    /// unreadable.
    pub fn is_corruption(&self) -> bool {
        matches!(
            self,
            StoreError::NotMultipleOf8 { .. }
                | StoreError::BadFirstOffset(_)
                | StoreError::DanglingOffset { .. }
                | StoreError::Corrupt { .. }
                | StoreError::Index { .. }
        ) || matches!(self, StoreError::Io { source, .. } if source.kind() == io::ErrorKind::UnexpectedEof)
    }
}

/// Seek and read counters, shared by the object store and the meta index.
#[derive(Debug, Default)]
pub struct AccessCounters {
    obj_seeks: AtomicU64,
    obj_reads: AtomicU64,
    meta_seeks: AtomicU64,
    meta_reads: AtomicU64,
    bytes_read: AtomicU64,
}

impl AccessCounters {
    pub(crate) fn obj_read(&self, bytes: usize) {
        self.obj_seeks.fetch_add(1, Ordering::Relaxed);
        self.obj_reads.fetch_add(1, Ordering::Relaxed);
        self.bytes_read.fetch_add(bytes as u64, Ordering::Relaxed);
    }

    pub(crate) fn meta_read(&self, bytes: usize) {
        self.meta_seeks.fetch_add(1, Ordering::Relaxed);
        self.meta_reads.fetch_add(1, Ordering::Relaxed);
        self.bytes_read.fetch_add(bytes as u64, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> AccessStats {
        AccessStats {
            obj_seeks: self.obj_seeks.load(Ordering::Relaxed),
            obj_reads: self.obj_reads.load(Ordering::Relaxed),
            meta_seeks: self.meta_seeks.load(Ordering::Relaxed),
            meta_reads: self.meta_reads.load(Ordering::Relaxed),
            bytes_read: self.bytes_read.load(Ordering::Relaxed),
        }
    }
}

/// Counter values at one moment. Object counts cover both `lexicon.tab` and
/// `lexicon.obj`; meta counts cover `meta.dat`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AccessStats {
    pub obj_seeks: u64,
    pub obj_reads: u64,
    pub meta_seeks: u64,
    pub meta_reads: u64,
    pub bytes_read: u64,
}

impl AccessStats {
    pub fn seeks(&self) -> u64 {
        self.obj_seeks + self.meta_seeks
    }

    pub fn reads(&self) -> u64 {
        self.obj_reads + self.meta_reads
    }

    /// Counts accumulated since `earlier`.
    pub fn since(&self, earlier: &AccessStats) -> AccessStats {
        AccessStats {
            obj_seeks: self.obj_seeks - earlier.obj_seeks,
            obj_reads: self.obj_reads - earlier.obj_reads,
            meta_seeks: self.meta_seeks - earlier.meta_seeks,
            meta_reads: self.meta_reads - earlier.meta_reads,
            bytes_read: self.bytes_read - earlier.bytes_read,
        }
    }
}

/// Sizes of the files written by [`build_store`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StoreFiles {
    pub entries: usize,
    pub obj_bytes: u64,
    pub tab_bytes: u64,
}

/// Writes `lexicon.obj` and `lexicon.tab`. Entry `i` must carry id `i`.
/// Partially written files are removed on failure.
pub fn build_store(entries: &[LexicalEntry], dir: &Path, exec: Exec) -> Result<StoreFiles, StoreError> {
    if let Some(pos) = entries.iter().enumerate().position(|(i, e)| e.id as usize != i) {
        return Err(StoreError::IdMismatch {
            pos,
            id: entries[pos].id,
        });
    }
    let records = exec.map(entries, |e| encode_record(&e.graph));
    let obj_path = dir.join(OBJ_FILE);
    let tab_path = dir.join(TAB_FILE);
    let result = write_files(&records, &obj_path, &tab_path);
    if result.is_err() {
        let _ = fs::remove_file(&obj_path);
        let _ = fs::remove_file(&tab_path);
    }
    result
}

fn write_files(records: &[String], obj_path: &Path, tab_path: &Path) -> Result<StoreFiles, StoreError> {
    let create = |p: &Path| File::create(p).map(BufWriter::new).map_err(|e| StoreError::io(p, e));
    let mut obj = create(obj_path)?;
    let mut tab = create(tab_path)?;
    let mut offset = 0u64;
    for rec in records {
        tab.write_all(&offset.to_be_bytes())
            .map_err(|e| StoreError::io(tab_path, e))?;
        obj.write_all(rec.as_bytes())
            .map_err(|e| StoreError::io(obj_path, e))?;
        offset += rec.len() as u64;
    }
    obj.flush().map_err(|e| StoreError::io(obj_path, e))?;
    tab.flush().map_err(|e| StoreError::io(tab_path, e))?;
    Ok(StoreFiles {
        entries: records.len(),
        obj_bytes: offset,
        tab_bytes: 8 * records.len() as u64,
    })
}

/// Read-only handle on `lexicon.obj` and `lexicon.tab`.
///
/// A shared handle serializes each seek+read pair under a lock, so it can be
/// used from several threads at once.
#[derive(Debug)]
pub struct ObjectStore {
    dir: PathBuf,
    obj: Mutex<File>,
    tab: Mutex<File>,
    n: usize,
    obj_len: u64,
    counters: Arc<AccessCounters>,
    supply: VarSupply,
}

impl ObjectStore {
    pub fn open(dir: &Path) -> Result<Self, StoreError> {
        Self::open_with_counters(dir, Arc::new(AccessCounters::default()))
    }

    pub(crate) fn open_with_counters(dir: &Path, counters: Arc<AccessCounters>) -> Result<Self, StoreError> {
        let obj_path = dir.join(OBJ_FILE);
        let tab_path = dir.join(TAB_FILE);
        let obj = File::open(&obj_path).map_err(|e| StoreError::io(&obj_path, e))?;
        let mut tab = File::open(&tab_path).map_err(|e| StoreError::io(&tab_path, e))?;
        let len_of = |f: &File, p: &Path| f.metadata().map(|m| m.len()).map_err(|e| StoreError::io(p, e));
        let obj_len = len_of(&obj, &obj_path)?;
        let tab_len = len_of(&tab, &tab_path)?;
        if tab_len % 8 != 0 {
            return Err(StoreError::NotMultipleOf8 { len: tab_len });
        }
        let n = (tab_len / 8) as usize;
        if n > 0 {
            let mut buf = [0u8; 8];
            let mut read_at = |pos: u64| -> Result<u64, StoreError> {
                tab.seek(SeekFrom::Start(pos))
                    .and_then(|_| tab.read_exact(&mut buf))
                    .map_err(|e| StoreError::io(&tab_path, e))?;
                Ok(u64::from_be_bytes(buf))
            };
            let first = read_at(0)?;
            if first != 0 {
                return Err(StoreError::BadFirstOffset(first));
            }
            let last = read_at(tab_len - 8)?;
            if last >= obj_len {
                return Err(StoreError::DanglingOffset {
                    id: (n - 1) as ObjectId,
                    offset: last,
                    obj_len,
                });
            }
        }
        Ok(ObjectStore {
            dir: dir.to_path_buf(),
            obj: Mutex::new(obj),
            tab: Mutex::new(tab),
            n,
            obj_len,
            counters,
            supply: VarSupply::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn obj_len(&self) -> u64 {
        self.obj_len
    }

    pub fn stats(&self) -> AccessStats {
        self.counters.snapshot()
    }

    /// Byte range of record `id` in `lexicon.obj`: one seek and one read
    /// in the access table.
    pub fn record_span(&self, id: ObjectId) -> Result<(u64, u64), StoreError> {
        if id as usize >= self.n {
            return Err(StoreError::OutOfRange { id, n: self.n });
        }
        let last = id as usize + 1 == self.n;
        let mut buf = [0u8; 16];
        let want = if last { 8 } else { 16 };
        {
            let mut tab = self.tab.lock().unwrap_or_else(|p| p.into_inner());
            tab.seek(SeekFrom::Start(8 * id as u64))
                .and_then(|_| tab.read_exact(&mut buf[..want]))
                .map_err(|e| StoreError::io(&self.dir.join(TAB_FILE), e))?;
        }
        self.counters.obj_read(want);
        let start = u64::from_be_bytes(buf[..8].try_into().unwrap());
        let end = if last {
            self.obj_len
        } else {
            u64::from_be_bytes(buf[8..].try_into().unwrap())
        };
        if start >= end || end > self.obj_len {
            return Err(StoreError::DanglingOffset {
                id,
                offset: start,
                obj_len: self.obj_len,
            });
        }
        Ok((start, end))
    }

    /// The stored record text, terminator included.
    pub fn raw_record(&self, id: ObjectId) -> Result<String, StoreError> {
        let (start, end) = self.record_span(id)?;
        let mut buf = vec![0u8; (end - start) as usize];
        {
            let mut obj = self.obj.lock().unwrap_or_else(|p| p.into_inner());
            obj.seek(SeekFrom::Start(start))
                .and_then(|_| obj.read_exact(&mut buf))
                .map_err(|e| StoreError::io(&self.dir.join(OBJ_FILE), e))?;
        }
        self.counters.obj_read(buf.len());
        String::from_utf8(buf).map_err(|e| StoreError::Corrupt {
            id,
            reason: e.to_string(),
        })
    }

    /// Two seeks and two reads: the offset pair, then the record. Variables
    /// in the returned graph are fresh for this handle.
    pub fn get_object(&self, id: ObjectId) -> Result<LexicalEntry, StoreError> {
        let text = self.raw_record(id)?;
        let graph = Decoder::freshening(&self.supply)
            .decode(&text)
            .map_err(|e| StoreError::Corrupt {
                id,
                reason: e.to_string(),
            })?;
        Ok(LexicalEntry { id, graph })
    }

    /// Reads every entry with one sequential pass over `lexicon.obj`.
    /// Meant for offline checks, not for the query path.
    pub fn scan(&self) -> Result<Vec<LexicalEntry>, StoreError> {
        let obj_path = self.dir.join(OBJ_FILE);
        let text = fs::read_to_string(&obj_path).map_err(|e| StoreError::io(&obj_path, e))?;
        self.counters.obj_read(text.len());
        let mut out = Vec::with_capacity(self.n);
        for (i, rec) in text.split_inclusive(".\n").enumerate() {
            let id = i as ObjectId;
            let graph = Decoder::freshening(&self.supply)
                .decode(rec)
                .map_err(|e| StoreError::Corrupt {
                    id,
                    reason: e.to_string(),
                })?;
            out.push(LexicalEntry { id, graph });
        }
        if out.len() != self.n {
            return Err(StoreError::Corrupt {
                id: out.len() as ObjectId,
                reason: format!("{} records in {OBJ_FILE}, {} offsets", out.len(), self.n),
            });
        }
        Ok(out)
    }
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

    #[test]
    fn empty_store() {
        let dir = tempfile::tempdir().unwrap();
        let files = build_store(&[], dir.path(), Exec::Sequential).unwrap();
        assert_eq!(files.obj_bytes, 0);
        assert_eq!(fs::read(dir.path().join(TAB_FILE)).unwrap(), Vec::<u8>::new());
        let s = ObjectStore::open(dir.path()).unwrap();
        assert_eq!(s.len(), 0);
        assert!(matches!(s.get_object(0), Err(StoreError::OutOfRange { .. })));
    }

    #[test]
    fn offsets_are_cumulative_record_lengths() {
        let dir = tempfile::tempdir().unwrap();
        let es = entries(&["[a:1]", "[bb:X, c:X]", "x"]);
        build_store(&es, dir.path(), Exec::Sequential).unwrap();
        let lens: Vec<u64> = es.iter().map(|e| encode_record(&e.graph).len() as u64).collect();
        let tab = fs::read(dir.path().join(TAB_FILE)).unwrap();
        let offsets: Vec<u64> = tab
            .chunks(8)
            .map(|c| u64::from_be_bytes(c.try_into().unwrap()))
            .collect();
        assert_eq!(offsets, vec![0, lens[0], lens[0] + lens[1]]);
    }

    #[test]
    fn get_object_round_trips_with_two_seeks() {
        let dir = tempfile::tempdir().unwrap();
        let es = entries(&["[a:1]", "[bb:X, c:X]", "x"]);
        build_store(&es, dir.path(), Exec::Parallel).unwrap();
        let s = ObjectStore::open(dir.path()).unwrap();
        assert_eq!(s.stats(), AccessStats::default());
        for e in &es {
            let before = s.stats();
            let got = s.get_object(e.id).unwrap();
            assert!(got.graph.alpha_eq(&e.graph));
            let d = s.stats().since(&before);
            assert_eq!((d.obj_seeks, d.obj_reads), (2, 2));
        }
        let a = s.get_object(0).unwrap();
        let b = s.get_object(0).unwrap();
        assert_eq!(a, b);
        assert_eq!(s.stats().seeks(), 10);
        assert!(matches!(s.get_object(3), Err(StoreError::OutOfRange { id: 3, n: 3 })));
    }

    #[test]
    fn loaded_vars_are_fresh() {
        let dir = tempfile::tempdir().unwrap();
        build_store(&entries(&["[a:X]", "[a:X]"]), dir.path(), Exec::Sequential).unwrap();
        let s = ObjectStore::open(dir.path()).unwrap();
        let (a, b) = (s.get_object(0).unwrap(), s.get_object(1).unwrap());
        assert_ne!(a.graph.vars(), b.graph.vars());
    }

    #[test]
    fn corrupt_tables_are_refused() {
        let dir = tempfile::tempdir().unwrap();
        build_store(&entries(&["a", "b"]), dir.path(), Exec::Sequential).unwrap();
        let tab = dir.path().join(TAB_FILE);
        let good = fs::read(&tab).unwrap();

        fs::write(&tab, &good[..12]).unwrap();
        let err = ObjectStore::open(dir.path()).unwrap_err();
        assert!(err.to_string().starts_with("not-multiple-of-8"), "{err}");
        assert!(err.is_corruption());

        let mut bad = good.clone();
        bad[15] = 0xff;
        fs::write(&tab, &bad).unwrap();
        let err = ObjectStore::open(dir.path()).unwrap_err();
        assert!(err.to_string().starts_with("dangling-offset"), "{err}");
    }

    #[test]
    fn build_rejects_misnumbered_entries() {
        let dir = tempfile::tempdir().unwrap();
        let mut es = entries(&["a", "b"]);
        es[1].id = 5;
        assert!(matches!(
            build_store(&es, dir.path(), Exec::Sequential),
            Err(StoreError::IdMismatch { pos: 1, id: 5 })
        ));
    }

    #[test]
    fn scan_reads_everything() {
        let dir = tempfile::tempdir().unwrap();
        let es = entries(&["[a:'x.\\ny']", "b"]);
        build_store(&es, dir.path(), Exec::Sequential).unwrap();
        let s = ObjectStore::open(dir.path()).unwrap();
        let all = s.scan().unwrap();
        assert_eq!(all.len(), 2);
        assert!(all[0].graph.alpha_eq(&es[0].graph));
    }
}
