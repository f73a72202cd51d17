//! Near-perfect hash for word forms and concepts.
//!
//! Each letter maps to a prefix-free bit code built Huffman-style from Dutch
//! letter frequencies, so frequent letters cost few bits. A word hashes to a
//! leading `1` bit followed by its letter codes, most significant bit first,
//! cut off at 63 bits. Long words may therefore collide; index buckets keep
//! the original text to tell them apart.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::LazyLock;

/// Letter frequencies the code table was generated from.
pub const LETTER_FREQUENCIES: &str = include_str!("../../data/dutch_letter_freq.tsv");
/// The frozen code table.
pub const LETTER_CODES: &str = include_str!("../../data/letter_codes.tsv");

pub const ESCAPE: &str = "<esc>";
pub const HASH_BITS: u32 = 63;

/// A prefix-free code word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Code {
    pub bits: u64,
    pub len: u8,
}

impl Code {
    pub fn to_bit_string(self) -> String {
        (0..self.len)
            .rev()
            .map(|i| if self.bits >> i & 1 == 1 { '1' } else { '0' })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeTable {
    letters: [Code; 26],
    escape: Code,
}

impl CodeTable {
    pub fn code(&self, c: char) -> Code {
        match c {
            'a'..='z' => self.letters[(c as u8 - b'a') as usize],
            _ => self.escape,
        }
    }

    pub fn escape(&self) -> Code {
        self.escape
    }

    /// Parses `symbol<TAB>bits` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut letters = [None; 26];
        let mut escape = None;
        for line in text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')) {
            let (sym, bits) = line.split_once('\t').ok_or_else(|| format!("bad line `{line}`"))?;
            if bits.is_empty() || bits.len() > 32 || !bits.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(format!("bad code `{bits}`"));
            }
            let code = Code {
                bits: u64::from_str_radix(bits, 2).map_err(|e| e.to_string())?,
                len: bits.len() as u8,
            };
            match sym {
                ESCAPE => escape = Some(code),
                s if s.len() == 1 && s.as_bytes()[0].is_ascii_lowercase() => {
                    letters[(s.as_bytes()[0] - b'a') as usize] = Some(code)
                }
                s => return Err(format!("unknown symbol `{s}`")),
            }
        }
        let mut out = [Code { bits: 0, len: 0 }; 26];
        for (i, c) in letters.iter().enumerate() {
            out[i] = c.ok_or_else(|| format!("no code for `{}`", (b'a' + i as u8) as char))?;
        }
        Ok(CodeTable {
            letters: out,
            escape: escape.ok_or("no escape code")?,
        })
    }

    /// Renders the table in the format [`CodeTable::parse`] reads.
    pub fn render(&self) -> String {
        let mut out = String::from("# Generated from dutch_letter_freq.tsv; do not edit.\n");
        for (i, code) in self.letters.iter().enumerate() {
            out.push((b'a' + i as u8) as char);
            out.push('\t');
            out.push_str(&code.to_bit_string());
            out.push('\n');
        }
        out.push_str(ESCAPE);
        out.push('\t');
        out.push_str(&self.escape.to_bit_string());
        out.push('\n');
        out
    }
}

/// Reads `symbol<TAB>weight` lines.
pub fn parse_frequencies(text: &str) -> Result<Vec<(String, u64)>, String> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|line| {
            let (sym, w) = line.split_once('\t').ok_or_else(|| format!("bad line `{line}`"))?;
            let w = w.trim().parse::<u64>().map_err(|e| format!("{line}: {e}"))?;
            Ok((sym.to_string(), w))
        })
        .collect()
}

/// Huffman construction. Ties are broken by creation order (input order for
/// leaves), and the first node popped gets bit 0, so the result is fully
/// determined by the input.
pub fn build_code_table(freqs: &[(String, u64)]) -> Result<CodeTable, String> {
    enum Tree {
        Leaf(usize),
        Node(Box<Tree>, Box<Tree>),
    }
    if freqs.len() < 2 {
        return Err("need at least two symbols".into());
    }
    let mut heap = BinaryHeap::new();
    let mut trees: Vec<Option<Tree>> = Vec::new();
    for (i, (_, w)) in freqs.iter().enumerate() {
        heap.push(Reverse((*w, trees.len())));
        trees.push(Some(Tree::Leaf(i)));
    }
    while heap.len() > 1 {
        let Reverse((w0, a)) = heap.pop().unwrap();
        let Reverse((w1, b)) = heap.pop().unwrap();
        let node = Tree::Node(
            Box::new(trees[a].take().unwrap()),
            Box::new(trees[b].take().unwrap()),
        );
        heap.push(Reverse((w0 + w1, trees.len())));
        trees.push(Some(node));
    }
    let Reverse((_, root)) = heap.pop().unwrap();
    let mut codes = vec![Code { bits: 0, len: 0 }; freqs.len()];
    let mut stack = vec![(trees[root].take().unwrap(), Code { bits: 0, len: 0 })];
    while let Some((tree, code)) = stack.pop() {
        match tree {
            Tree::Leaf(i) => codes[i] = code,
            Tree::Node(zero, one) => {
                let next = |bit| Code {
                    bits: code.bits << 1 | bit,
                    len: code.len + 1,
                };
                stack.push((*one, next(1)));
                stack.push((*zero, next(0)));
            }
        }
    }
    let text: String = freqs
        .iter()
        .zip(&codes)
        .map(|((sym, _), code)| format!("{sym}\t{}\n", code.to_bit_string()))
        .collect();
    CodeTable::parse(&text)
}

static TABLE: LazyLock<CodeTable> =
    LazyLock::new(|| CodeTable::parse(LETTER_CODES).expect("shipped letter code table is valid"));

pub fn code_table() -> &'static CodeTable {
    &TABLE
}

/// Hash of a word form or concept; `0` for the empty string.
pub fn word_hash(word: &str) -> u64 {
    if word.is_empty() {
        return 0;
    }
    let table = code_table();
    let mut acc: u64 = 1;
    let mut used = 1;
    for c in word.chars().flat_map(char::to_lowercase) {
        let code = table.code(c);
        let take = (code.len as u32).min(HASH_BITS - used);
        acc = acc << take | code.bits >> (code.len as u32 - take);
        used += take;
        if used == HASH_BITS {
            break;
        }
    }
    acc
}
