use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use oolex::compiler::{compile, LexiconSource};
use oolex::feature_graph::{from_canonical_text, to_canonical_text, Path};
use oolex::generator::{generate, GenConfig, GenError};
use oolex::index_engine::meta::{META_DAT, META_IDX};
use oolex::index_engine::tables::{CONCEPT_FILE, PHON_FILE, TYPE_FILE};
use oolex::index_engine::Mode;
use oolex::lexicon::Lexicon;
use oolex::object_store::{ObjectStore, StoreError, OBJ_FILE, TAB_FILE};
use oolex::par::Exec;
use oolex::query_engine::run;

mod expr;

#[derive(Parser)]
#[command(name = "oolex", about = "Build and query an object lexicon", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile lexicon sources and write the store and its indexes.
    Build {
        #[arg(long)]
        templates: PathBuf,
        #[arg(long)]
        lemmas: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        /// Feature path to index in the meta index; repeatable.
        #[arg(long = "meta-path", num_args = 1..)]
        meta_path: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print one stored entry.
    Get { dir: PathBuf, id: u32 },
    /// Print the IDs matching all constraints, one per line.
    ///
    /// A constraint is `field=value`, or `~field=value` for a liberal meta
    /// constraint. A single argument starting with `[` is read as a graph.
    Query {
        dir: PathBuf,
        #[arg(required = true, allow_hyphen_values = true)]
        expr: Vec<String>,
    },
    /// Generate a sentence.
    Generate {
        dir: PathBuf,
        /// Starting concept; random when absent.
        #[arg(long)]
        concept: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        budget: usize,
        /// Print the derivation before the sentence.
        #[arg(long)]
        trace: bool,
    },
    /// Print sizes, key counts and the access counters of a sample workload.
    Stats { dir: PathBuf },
}

/// Exit status and message.
struct Failure(u8, String);

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        Failure(if e.is_corruption() { 3 } else { 1 }, e.to_string())
    }
}

fn input(msg: impl ToString) -> Failure {
    Failure(1, msg.to_string())
}

fn file_size(dir: &FsPath, name: &str) -> u64 {
    fs::metadata(dir.join(name)).map(|m| m.len()).unwrap_or(0)
}

fn build(templates: &FsPath, lemmas: &FsPath, rules: &FsPath, meta_paths: &[String], out: &FsPath) -> Result<(), Failure> {
    let src = LexiconSource::read_files(templates, lemmas, rules).map_err(input)?;
    let paths = meta_paths
        .iter()
        .map(|p| p.parse::<Path>().map_err(|e| input(format!("--meta-path {p}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let entries = compile(&src, Exec::default()).map_err(input)?;
    if entries.is_empty() {
        eprintln!("warning: the lexicon has no entries");
    }
    let report = Lexicon::build(&entries, &paths, out, Exec::default()).map_err(input)?;
    println!("entries\t{}", entries.len());
    for f in [OBJ_FILE, TAB_FILE, TYPE_FILE, CONCEPT_FILE, PHON_FILE, META_IDX, META_DAT] {
        println!("{f}\t{}", file_size(out, f));
    }
    println!("type_keys\t{}", report.type_keys);
    println!("meta_keys\t{}", report.meta_keys);
    println!("index_ratio\t{:.4}", report.index_ratio());
    Ok(())
}

fn get(dir: &FsPath, id: u32) -> Result<(), Failure> {
    let store = ObjectStore::open(dir)?;
    if id as usize >= store.len() {
        return Err(input(format!("no entry {id}: the store has {} entries", store.len())));
    }
    print!("{}", store.raw_record(id)?);
    Ok(())
}

fn query(dir: &FsPath, exprs: &[String]) -> Result<(), Failure> {
    let lex = Lexicon::open(dir)?;
    let q = expr::parse_query(lex.meta(), exprs).map_err(input)?;
    for id in run(&lex, &q)? {
        println!("{id}");
    }
    Ok(())
}

fn gen(dir: &FsPath, concept: Option<&str>, seed: u64, budget: usize, trace: bool) -> Result<(), Failure> {
    let lex = Lexicon::open(dir)?;
    let config = GenConfig {
        budget,
        ..GenConfig::default()
    };
    match generate(&lex, concept, seed, &config) {
        Ok(s) => {
            if trace {
                for r in &s.derivation {
                    println!("{}", to_canonical_text(r));
                }
            }
            println!("{}", s.surface);
            Ok(())
        }
        Err(e @ (GenError::DeadEnd { .. } | GenError::Budget { .. })) => {
            let partial = e.partial().expect("dead ends carry a trace");
            for r in &partial.trace {
                println!("{}", to_canonical_text(r));
            }
            println!("{}", partial.phrase);
            Err(Failure(2, format!("{e}; heads {:?}, pending {:?}", partial.heads, partial.args)))
        }
        Err(GenError::Store(e)) => Err(e.into()),
        Err(e) => Err(input(e)),
    }
}

fn stats(dir: &FsPath) -> Result<(), Failure> {
    let lex = Lexicon::open(dir)?;
    let n = lex.len();
    println!("entries\t{n}");
    println!("type_keys\t{}", lex.types().len());
    println!("type_range_fraction\t{:.4}", lex.types().range_fraction());
    println!("concepts\t{}", lex.concepts().len());
    println!("concept_collisions\t{}", lex.concepts().collisions().count());
    println!("phons\t{}", lex.phons().len());
    println!("phon_collisions\t{}", lex.phons().collisions().count());
    println!("meta_paths\t{}", lex.meta().paths().count());
    println!("meta_keys\t{}", lex.meta().len());
    let index_bytes: u64 = [TYPE_FILE, CONCEPT_FILE, PHON_FILE, META_IDX]
        .iter()
        .map(|f| file_size(dir, f))
        .sum();
    let obj_bytes = lex.store().obj_len();
    println!("obj_bytes\t{obj_bytes}");
    println!("index_bytes\t{index_bytes}");
    if obj_bytes > 0 {
        println!("index_ratio\t{:.4}", index_bytes as f64 / obj_bytes as f64);
    }

    // Sample workload: spread-out fetches, every type key, one liberal
    // lookup per meta path.
    let before = lex.stats();
    let gets = n.min(100);
    for k in 0..gets {
        lex.get_object((k * n / gets) as u32)?;
    }
    for row in lex.types().rows() {
        lex.types().lookup(row.key.as_str());
    }
    let paths: Vec<Path> = lex.meta().paths().cloned().collect();
    for p in &paths {
        let first = lex.meta().values(p).first().map(|v| from_canonical_text(v));
        if let Some(Ok(v)) = first {
            lex.lookup_meta(p, &v, Mode::Liberal)?;
        }
    }
    let s = lex.stats().since(&before);
    println!("sample_gets\t{gets}");
    println!("sample_type_lookups\t{}", lex.types().len());
    println!("sample_meta_lookups\t{}", paths.len());
    println!("obj_seeks\t{}", s.obj_seeks);
    println!("obj_reads\t{}", s.obj_reads);
    println!("meta_seeks\t{}", s.meta_seeks);
    println!("meta_reads\t{}", s.meta_reads);
    println!("bytes_read\t{}", s.bytes_read);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Build {
            templates,
            lemmas,
            rules,
            meta_path,
            out,
        } => build(templates, lemmas, rules, meta_path, out),
        Cmd::Get { dir, id } => get(dir, *id),
        Cmd::Query { dir, expr } => query(dir, expr),
        Cmd::Generate {
            dir,
            concept,
            seed,
            budget,
            trace,
        } => gen(dir, concept.as_deref(), *seed, *budget, *trace),
        Cmd::Stats { dir } => stats(dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("oolex: {msg}");
            ExitCode::from(code)
        }
    }
}
