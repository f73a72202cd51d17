//! An opened lexicon directory: object store, index tables and meta index.

use std::fs;
use std::path::Path as FsPath;
use std::sync::Arc;

use crate::entry::LexicalEntry;
use crate::feature_graph::{Node, Path};
use crate::index_engine::meta::{META_DAT, META_IDX};
use crate::index_engine::tables::{CONCEPT_FILE, PHON_FILE, TYPE_FILE};
use crate::index_engine::{build_indexes, build_meta, lookup_meta, open_meta};
use crate::index_engine::{IndexTables, MetaIndex, MetaReader, Mode, PostingList, TypeTable, WordTable};
use crate::object_store::{build_store, AccessCounters, AccessStats, ObjectStore, StoreError, StoreFiles};
use crate::par::Exec;
use crate::ObjectId;

/// File sizes after a build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildReport {
    pub store: StoreFiles,
    /// `index.typ + index.con + index.pho + meta.idx`.
    pub index_bytes: u64,
    pub meta_dat_bytes: u64,
    pub type_keys: usize,
    pub meta_keys: usize,
}

impl BuildReport {
    /// In-memory index size relative to the object file.
    pub fn index_ratio(&self) -> f64 {
        if self.store.obj_bytes == 0 {
            0.0
        } else {
            self.index_bytes as f64 / self.store.obj_bytes as f64
        }
    }
}

/// Read-only handle on a built lexicon. Safe to share between threads.
#[derive(Debug)]
pub struct Lexicon {
    store: ObjectStore,
    tables: IndexTables,
    meta: MetaIndex,
    meta_reader: MetaReader,
}

impl Lexicon {
    /// Writes all store and index files for ID-ordered `entries` into `dir`.
    pub fn build(entries: &[LexicalEntry], meta_paths: &[Path], dir: &FsPath, exec: Exec) -> Result<BuildReport, StoreError> {
        fs::create_dir_all(dir).map_err(|e| StoreError::io(dir, e))?;
        let result = Self::write_all(entries, meta_paths, dir, exec);
        if result.is_err() {
            for f in [TYPE_FILE, CONCEPT_FILE, PHON_FILE, META_IDX, META_DAT] {
                let _ = fs::remove_file(dir.join(f));
            }
        }
        result
    }

    fn write_all(entries: &[LexicalEntry], meta_paths: &[Path], dir: &FsPath, exec: Exec) -> Result<BuildReport, StoreError> {
        let tables = build_indexes(entries).map_err(|e| StoreError::Index {
            file: TYPE_FILE.into(),
            reason: e.to_string(),
        })?;
        let meta = build_meta(entries, meta_paths, dir, exec)?;
        let store = build_store(entries, dir, exec)?;
        let table_bytes = tables.write(dir)?;
        let size = |f: &str| {
            let p = dir.join(f);
            fs::metadata(&p).map(|m| m.len()).map_err(|e| StoreError::io(&p, e))
        };
        Ok(BuildReport {
            store,
            index_bytes: table_bytes + size(META_IDX)?,
            meta_dat_bytes: size(META_DAT)?,
            type_keys: tables.types.len(),
            meta_keys: meta.len(),
        })
    }

    pub fn open(dir: &FsPath) -> Result<Self, StoreError> {
        let counters = Arc::new(AccessCounters::default());
        let store = ObjectStore::open_with_counters(dir, counters.clone())?;
        let tables = IndexTables::load(dir)?;
        let (meta, meta_reader) = open_meta(dir, counters)?;
        let n = store.len();
        let max_id = tables
            .types
            .rows()
            .iter()
            .filter_map(|r| r.ids.spans().last().map(|s| s.end()))
            .max();
        if max_id.is_some_and(|m| m as usize >= n) || (max_id.is_none() && n > 0) {
            return Err(StoreError::Index {
                file: TYPE_FILE.into(),
                reason: format!("type index does not match a store of {n} entries"),
            });
        }
        Ok(Lexicon {
            store,
            tables,
            meta,
            meta_reader,
        })
    }

    pub fn len(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        self.store.is_empty()
    }

    pub fn store(&self) -> &ObjectStore {
        &self.store
    }

    pub fn types(&self) -> &TypeTable {
        &self.tables.types
    }

    pub fn concepts(&self) -> &WordTable {
        &self.tables.concepts
    }

    pub fn phons(&self) -> &WordTable {
        &self.tables.phons
    }

    pub fn meta(&self) -> &MetaIndex {
        &self.meta
    }

    pub fn get_object(&self, id: ObjectId) -> Result<LexicalEntry, StoreError> {
        self.store.get_object(id)
    }

    pub fn stats(&self) -> AccessStats {
        self.store.stats()
    }

    /// See [`lookup_meta`]; `None` when `path` is not meta-indexed.
    pub fn lookup_meta(&self, path: &Path, value: &Node, mode: Mode) -> Result<Option<PostingList>, StoreError> {
        lookup_meta(&self.meta, &self.meta_reader, path, value, mode)
    }
}
