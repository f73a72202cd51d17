//! Stored lexical entries and the feature paths the dedicated indexes use.

use std::sync::LazyLock;

use crate::category::{Category, CategoryError};
use crate::feature_graph::{Node, Path};
use crate::ObjectId;

pub static CONCEPT_PATH: LazyLock<Path> = LazyLock::new(|| "head.concept".parse().unwrap());
pub static PHON_PATH: LazyLock<Path> = LazyLock::new(|| "head.phon".parse().unwrap());
pub static TYPE_PATH: LazyLock<Path> = LazyLock::new(|| "type".parse().unwrap());

/// True for the three paths served by dedicated in-memory tables.
pub fn is_dedicated(path: &Path) -> bool {
    *path == *CONCEPT_PATH || *path == *PHON_PATH || *path == *TYPE_PATH
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexicalEntry {
    pub id: ObjectId,
    pub graph: Node,
}

impl LexicalEntry {
    pub fn new(id: ObjectId, graph: Node) -> Self {
        LexicalEntry { id, graph }
    }

    pub fn concept(&self) -> Option<&str> {
        concept_of(&self.graph)
    }

    pub fn phon(&self) -> Option<&str> {
        phon_of(&self.graph)
    }

    pub fn category(&self) -> Result<Category, CategoryError> {
        category_of(&self.graph)
    }
}

pub fn concept_of(g: &Node) -> Option<&str> {
    g.get(&CONCEPT_PATH)?.as_atom()
}

pub fn phon_of(g: &Node) -> Option<&str> {
    g.get(&PHON_PATH)?.as_atom()
}

pub fn category_of(g: &Node) -> Result<Category, CategoryError> {
    match g.get(&TYPE_PATH) {
        Some(t) => Category::from_node(t),
        None => Err(CategoryError::Malformed("missing type".into())),
    }
}
