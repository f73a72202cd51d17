//! Writes the source files of a synthetic lexicon, or builds it.
//!
//! `synth_lexicon <entries> <seed> <src-dir> [<store-dir>]`

use std::path::PathBuf;
use std::time::Instant;

use oolex::lexicon::Lexicon;
use oolex::par::Exec;
use oolex::synth;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [entries, seed, src, rest @ ..] = args.as_slice() else {
        eprintln!("usage: synth_lexicon <entries> <seed> <src-dir> [<store-dir>]");
        std::process::exit(1);
    };
    let entries: usize = entries.parse().expect("entries");
    let seed: u64 = seed.parse().expect("seed");
    let src = PathBuf::from(src);
    std::fs::create_dir_all(&src).expect("create source dir");
    let (t, l, r) = synth::source_texts(entries, seed);
    std::fs::write(src.join("templates.lex"), t).expect("write");
    std::fs::write(src.join("lemmas.lex"), l).expect("write");
    std::fs::write(src.join("rules.lex"), r).expect("write");
    if let Some(out) = rest.first() {
        let t0 = Instant::now();
        let compiled = synth::lexicon(entries, seed, Exec::default()).expect("compile");
        let t1 = Instant::now();
        let report = Lexicon::build(&compiled, &synth::meta_paths(), out.as_ref(), Exec::default()).expect("build");
        println!(
            "compile {:?}, build {:?}, obj {} bytes, indexes {} bytes ({:.2}%), {} type keys",
            t1 - t0,
            t1.elapsed(),
            report.store.obj_bytes,
            report.index_bytes,
            100.0 * report.index_ratio(),
            report.type_keys
        );
    }
}
