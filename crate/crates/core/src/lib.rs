pub mod category;
pub mod compiler;
pub mod entry;
pub mod feature_graph;
pub mod generator;
pub mod index_engine;
pub mod lexicon;
pub mod object_store;
pub mod par;
pub mod query_engine;
pub mod synth;

/// Position of an entry in the type-sorted store.
pub type ObjectId = u32;
