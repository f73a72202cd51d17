#![allow(dead_code)]

use std::path::PathBuf;

use oolex::compiler::{compile, LexiconSource};
use oolex::entry::LexicalEntry;
use oolex::feature_graph::Path;
use oolex::lexicon::Lexicon;
use oolex::par::Exec;

pub fn lexicon_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../lexicons").join(name)
}

pub fn compile_named(name: &str) -> Vec<LexicalEntry> {
    let d = lexicon_dir(name);
    let src = LexiconSource::read_files(&d.join("templates.lex"), &d.join("lemmas.lex"), &d.join("rules.lex")).unwrap();
    compile(&src, Exec::Sequential).unwrap()
}

pub fn desk_meta_paths() -> Vec<Path> {
    vec!["synsem.cat".parse().unwrap(), "synsem.num".parse().unwrap()]
}

/// Builds the desk lexicon into a fresh directory and opens it.
pub fn desk() -> (tempfile::TempDir, Lexicon) {
    let dir = tempfile::tempdir().unwrap();
    Lexicon::build(&compile_named("desk"), &desk_meta_paths(), dir.path(), Exec::Sequential).unwrap();
    let lex = Lexicon::open(dir.path()).unwrap();
    (dir, lex)
}
