//! Hashing, posting lists, in-memory index tables and the external meta index.

pub mod meta;
pub mod posting;
pub mod tables;
pub mod word_hash;

pub use meta::{build_meta, lookup_meta, open_meta, MetaIndex, MetaReader, Mode};
pub use posting::{PostingError, PostingList, Span};
pub use tables::{build_indexes, IndexError, IndexTables, TypeTable, WordTable};
pub use word_hash::word_hash;

use crate::category::{Category, TypeKey};

/// Index key of a category.
pub fn type_key(c: &Category) -> TypeKey {
    c.key()
}
