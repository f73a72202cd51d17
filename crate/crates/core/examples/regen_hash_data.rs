//! Regenerates the frozen letter code table and the word hash golden file.
//!
//! ```text
//! cargo run -p oolex --example regen_hash_data
//! ```

use std::fs;
use std::path::Path;

use oolex::index_engine::word_hash::{build_code_table, parse_frequencies, LETTER_FREQUENCIES};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let freqs = parse_frequencies(LETTER_FREQUENCIES)?;
    let table = build_code_table(&freqs)?;
    fs::write(data.join("letter_codes.tsv"), table.render())?;
    println!("wrote letter_codes.tsv");

    // The golden hashes come from a second process so the freshly written
    // table is the one compiled in.
    if std::env::args().any(|a| a == "--golden") {
        let words = fs::read_to_string(data.join("wordlist.txt"))?;
        let mut out = String::new();
        for w in words.lines().filter(|w| !w.is_empty()) {
            out.push_str(&format!("{w}\t{}\n", oolex::index_engine::word_hash(w)));
        }
        fs::write(data.join("word_hash_golden.tsv"), out)?;
        println!("wrote word_hash_golden.tsv");
    }
    Ok(())
}
