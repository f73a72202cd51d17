//! Synthetic lexicons for scale tests and benchmarks.
//!
//! Templates are shaped like a full verb entry (head features, semantic
//! terms, linearisation data, one `arg` block per argument), lemmas are made
//! up words, and rules expand each lemma into a paradigm crossed with the
//! argument modes. The entry count is hit exactly: lemmas are added while
//! they fit and single-entry pronouns fill the remainder.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::compiler::{compile, CompileError, LexiconSource};
use crate::entry::LexicalEntry;
use crate::feature_graph::Path;
use crate::par::Exec;

pub const TEMPLATES: &str = r#"
noun := [id:I, class:noun,
         head:[concept:C, phon:W, slf:C, synsem:[etype:entity, gender:G, num:N, person:3]],
         phon:{W}, phondata:linearize(W, I, {}, X),
         slf:entity(C, I),
         synsem:[cat:n, count:yes, num:N, qmode:Q],
         type:cat(n, {}, {})] .

pronoun := [id:I, class:pronoun,
            head:[concept:C, phon:W, slf:C, synsem:[case:K, num:N, person:R]],
            phon:{W}, phondata:linearize(W, I, {}, X),
            slf:ref(C, I),
            synsem:[cat:np, num:N, person:R, qmode:Q],
            type:cat(np, {}, {})] .

adjective := [id:I, class:adjective,
              head:[concept:C, phon:W, slf:C, synsem:[degree:pos, etype:property, num:N]],
              phon:{W, P}, phondata:linearize(W, I, {arg(right(1), '0', A)}, X),
              slf:modify(C, F),
              synsem:[cat:np, num:N, qmode:Q],
              type:cat(np, {}, {arg(n, '0', A)}),
              arg:[id:A, phon:P, slf:F, synsem:[cat:n, num:N, qmode:Q]]] .

adverb := [id:I, class:adverb,
           head:[concept:C, phon:W, slf:C, synsem:[etype:manner]],
           phon:{P, W}, phondata:linearize(W, I, {arg(left(2), '0', A)}, X),
           slf:modify(C, F),
           synsem:[cat:s, subqmode:Q, tense:T],
           type:cat(s, {arg(cat(s, {arg(np, '0', _L)}, {}), '0', A)}, {}),
           arg:[id:A, phon:P, slf:F, synsem:[cat:s, qmode:Q, tense:T]]] .

intransitive_verb := [id:I, class:intransitive,
    head:[concept:C, phon:W, slf:C, synsem:[etype:event, flex:F, num:N, person:R, tenseop:T, vtype:intrans]],
    phon:{S, W}, phondata:linearize(W, I, {arg(left(11), M, A)}, X),
    slf:event(C, E, {agent_of(E, H)}, tense(E, T)),
    synsem:[cat:s, eventvar:E, extth:agent_of(I, H), predtype:nonerg, subqmode:Q, tense:tensed],
    type:cat(s, {arg(np, '0', A)}, {}),
    arg:[id:A, phon:S, slf:H, synsem:[case:nom, cat:np, num:N, obj:subject_of(I), person:R, qmode:Q, theta:agent_of]]] .

transitive_verb := [id:I, class:transitive,
    head:[concept:C, phon:W, slf:C, synsem:[etype:event, flex:F, num:N, person:R, tenseop:T, vtype:transacc]],
    phon:{S, W, O}, phondata:linearize(W, I, {arg(right(-1), '0', B), arg(left(11), M, A)}, X),
    slf:event(C, E, {agent_of(E, H), theme_of(E, K)}, tense(E, T)),
    synsem:[cat:s, eventvar:E, extth:agent_of(I, H), predtype:nonerg, subqmode:Q, tense:tensed],
    type:cat(s, {arg(np, '0', A)}, {arg(np, '0', B)}),
    arg:[id:A, phon:S, slf:H, synsem:[case:nom, cat:np, num:N, obj:subject_of(I), person:R, qmode:Q, theta:agent_of]],
    arg:[id:B, phon:O, slf:K, synsem:[case:obliq, cat:np, obj:object_of(I), qmode:_Q2, theta:theme_of]]] .

ditransitive_verb := [id:I, class:ditransitive,
    head:[concept:C, phon:W, slf:C, synsem:[etype:event, flex:F, num:N, person:R, tenseop:T, vtype:ditrans]],
    phon:{S, W, O, D}, phondata:linearize(W, I, {arg(right(-2), '0', B), arg(right(-1), '0', Z), arg(left(11), M, A)}, X),
    slf:event(C, E, {agent_of(E, H), theme_of(E, K), goal_of(E, G)}, tense(E, T)),
    synsem:[cat:s, eventvar:E, extth:agent_of(I, H), predtype:nonerg, subqmode:Q, tense:tensed],
    type:cat(s, {arg(np, '0', A)}, {arg(np, '0', B), arg(np, '0', Z)}),
    arg:[id:A, phon:S, slf:H, synsem:[case:nom, cat:np, num:N, obj:subject_of(I), person:R, qmode:Q, theta:agent_of]],
    arg:[id:B, phon:O, slf:K, synsem:[case:obliq, cat:np, obj:object_of(I), qmode:_Q2, theta:theme_of]],
    arg:[id:Z, phon:D, slf:G, synsem:[case:dat, cat:np, obj:object_of(I), qmode:_Q3, theta:goal_of]]] .

sentential_verb := [id:I, class:sentential,
    head:[concept:C, phon:W, slf:C, synsem:[etype:event, flex:F, num:N, person:R, tenseop:T, vtype:sbar]],
    phon:{S, W, O}, phondata:linearize(W, I, {arg(right(-1), '0', B), arg(left(11), M, A)}, X),
    slf:event(C, E, {agent_of(E, H), prop_of(E, K)}, tense(E, T)),
    synsem:[cat:s, eventvar:E, extth:agent_of(I, H), predtype:nonerg, subqmode:Q, tense:tensed],
    type:cat(s, {arg(np, '0', A)}, {arg(s, '0', B)}),
    arg:[id:A, phon:S, slf:H, synsem:[case:nom, cat:np, num:N, obj:subject_of(I), person:R, qmode:Q, theta:agent_of]],
    arg:[id:B, phon:O, slf:K, synsem:[cat:s, obj:complement_of(I), tense:tensed, theta:prop_of]]] .
"#;

/// Meta paths worth indexing in a synthetic lexicon.
pub const META_PATHS: &[&str] = &[
    "synsem.cat",
    "synsem.num",
    "synsem.tense",
    "synsem.subqmode",
    "head.synsem.num",
    "head.synsem.person",
    "head.synsem.flex",
    "head.synsem.tenseop",
    "head.synsem.gender",
    "arg.synsem.case",
    "arg@1.synsem.case",
];

pub fn meta_paths() -> Vec<Path> {
    META_PATHS.iter().map(|p| p.parse().expect("static path")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Noun,
    Pronoun,
    Adjective,
    Adverb,
    Intransitive,
    Transitive,
    Ditransitive,
    Sentential,
}

impl Class {
    fn template(self) -> &'static str {
        match self {
            Class::Noun => "noun",
            Class::Pronoun => "pronoun",
            Class::Adjective => "adjective",
            Class::Adverb => "adverb",
            Class::Intransitive => "intransitive_verb",
            Class::Transitive => "transitive_verb",
            Class::Ditransitive => "ditransitive_verb",
            Class::Sentential => "sentential_verb",
        }
    }

    fn atom(self) -> &'static str {
        match self {
            Class::Noun => "noun",
            Class::Pronoun => "pronoun",
            Class::Adjective => "adjective",
            Class::Adverb => "adverb",
            Class::Intransitive => "intransitive",
            Class::Transitive => "transitive",
            Class::Ditransitive => "ditransitive",
            Class::Sentential => "sentential",
        }
    }

    fn is_verb(self) -> bool {
        matches!(
            self,
            Class::Intransitive | Class::Transitive | Class::Ditransitive | Class::Sentential
        )
    }
}

/// Lemma mix, repeated. Verbs dominate the entry count as in real
/// lexicons, nouns the lemma count.
const CYCLE: &[Class] = &[
    Class::Noun,
    Class::Transitive,
    Class::Noun,
    Class::Adjective,
    Class::Intransitive,
    Class::Noun,
    Class::Transitive,
    Class::Adverb,
    Class::Noun,
    Class::Ditransitive,
    Class::Adjective,
    Class::Noun,
    Class::Sentential,
    Class::Intransitive,
];

const SUBJECT_MODES: &[&str] = &["'0'", "wh", "rel", "top"];
const OBJECT_MODES: &[&str] = &["'0'", "wh"];

/// num, person, tense operator, word form changes
const VERB_FORMS: &[(&str, &str, &str, &str, &str)] = &[
    ("pres1sg", "sing", "1", "at_pres", "strip(en)"),
    ("pres23sg", "sing", "or(2, 3)", "at_pres", "strip(en), suffix(t)"),
    ("presplur", "plur", "or(1, 2, 3)", "at_pres", ""),
    ("pastsg", "sing", "or(1, 2, 3)", "at_past", "strip(en), suffix(de)"),
    ("pastplur", "plur", "or(1, 2, 3)", "at_past", "strip(en), suffix(den)"),
];

fn verb_type(class: Class, subject: &str, object: &str) -> String {
    match class {
        Class::Intransitive => format!("cat(s, {{arg(np, {subject}, A)}}, {{}})"),
        Class::Transitive => format!("cat(s, {{arg(np, {subject}, A)}}, {{arg(np, {object}, B)}})"),
        Class::Ditransitive => {
            format!("cat(s, {{arg(np, {subject}, A)}}, {{arg(np, {object}, B), arg(np, '0', Z)}})")
        }
        Class::Sentential => format!("cat(s, {{arg(np, {subject}, A)}}, {{arg(s, '0', B)}})"),
        _ => unreachable!("not a verb class"),
    }
}

fn push_rule(out: &mut String, name: &str, guard: &str, edits: &[String], surface: &str) {
    let _ = writeln!(out, "{name} := rule({guard}, {{{}}}, {{{surface}}}) .", edits.join(", "));
}

/// Rule source for every class.
pub fn rules_text() -> String {
    let mut out = String::new();
    for class in [Class::Intransitive, Class::Transitive, Class::Ditransitive, Class::Sentential] {
        let guard = format!("[class:{}, type:{}]", class.atom(), verb_type(class, "_M1", "_M2"));
        let objects: &[&str] = if matches!(class, Class::Transitive | Class::Ditransitive) {
            OBJECT_MODES
        } else {
            &["'0'"]
        };
        for (form, num, person, tense, surface) in VERB_FORMS {
            for (si, subject) in SUBJECT_MODES.iter().enumerate() {
                for (oi, object) in objects.iter().enumerate() {
                    let subject_mode = subject.trim_matches('\'');
                    let edits = vec![
                        format!("set(type, {})", verb_type(class, subject, object)),
                        format!("set('head.synsem.num', {num})"),
                        format!("set('head.synsem.person', {person})"),
                        format!("set('head.synsem.tenseop', {tense})"),
                        "set('head.synsem.flex', fin)".to_string(),
                        format!("set('synsem.subqmode', '{subject_mode}')"),
                    ];
                    let name = format!("{}_{form}_{si}{oi}", class.atom());
                    push_rule(&mut out, &name, &guard, &edits, surface);
                }
            }
        }
    }
    let noun = "[class:noun]";
    push_rule(&mut out, "noun_sing", noun, &["set('head.synsem.num', sing)".into()], "");
    push_rule(&mut out, "noun_plur", noun, &["set('head.synsem.num', plur)".into()], "suffix(en)");
    push_rule(
        &mut out,
        "noun_dim",
        noun,
        &["set('head.synsem.num', sing)".into(), "set('head.synsem.gender', neut)".into()],
        "suffix(je)",
    );
    push_rule(
        &mut out,
        "noun_dimplur",
        noun,
        &["set('head.synsem.num', plur)".into(), "set('head.synsem.gender', neut)".into()],
        "suffix(jes)",
    );
    let adj = "[class:adjective]";
    push_rule(&mut out, "adj_infl", adj, &["set('head.synsem.num', plur)".into()], "suffix(e)");
    push_rule(&mut out, "adj_comp", adj, &["set('head.synsem.degree', comp)".into()], "suffix(er)");
    push_rule(&mut out, "adj_sup", adj, &["set('head.synsem.degree', sup)".into()], "suffix(st)");
    push_rule(
        &mut out,
        "adv_wh",
        "[class:adverb, type:cat(s, {arg(cat(s, {arg(np, '0', _L)}, {}), '0', A)}, {})]",
        &["set(type, cat(s, {arg(cat(s, {arg(np, '0', _L)}, {}), wh, A)}, {}))".into()],
        "",
    );
    out
}

/// Entries one lemma of `class` compiles to under [`rules_text`].
fn entries_per_lemma(class: Class) -> usize {
    let forms = VERB_FORMS.len() * SUBJECT_MODES.len();
    1 + match class {
        Class::Noun => 4,
        Class::Pronoun => 0,
        Class::Adjective => 3,
        Class::Adverb => 1,
        Class::Intransitive | Class::Sentential => forms,
        Class::Transitive | Class::Ditransitive => forms * OBJECT_MODES.len(),
    }
}

const ONSETS: &[&str] = &[
    "b", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z", "br", "dr", "gr", "kl", "kr",
    "pl", "sl", "sp", "st", "tr", "vl", "zw", "sch",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "aa", "ee", "oo", "ie", "oe", "ui", "ei", "eu"];
const CODAS: &[&str] = &["", "", "k", "l", "m", "n", "p", "r", "s", "t", "rk", "lt", "nd", "ng"];

fn make_word(rng: &mut ChaCha8Rng) -> String {
    let syllables = rng.gen_range(1..=3);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(ONSETS[rng.gen_range(0..ONSETS.len())]);
        w.push_str(VOWELS[rng.gen_range(0..VOWELS.len())]);
        w.push_str(CODAS[rng.gen_range(0..CODAS.len())]);
    }
    w
}

/// Source texts `(templates, lemmas, rules)` of a lexicon that compiles to
/// exactly `entries` entries.
pub fn source_texts(entries: usize, seed: u64) -> (String, String, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut fresh = |rng: &mut ChaCha8Rng, suffix: &str| loop {
        let w = format!("{}{suffix}", make_word(rng));
        if seen.insert(w.clone()) {
            return w;
        }
    };
    let mut lemmas = String::new();
    let mut total = 0;
    let mut k = 0;
    loop {
        let class = CYCLE[k % CYCLE.len()];
        k += 1;
        let n = entries_per_lemma(class);
        if total + n > entries {
            break;
        }
        total += n;
        let word = fresh(&mut rng, if class.is_verb() { "en" } else { "" });
        let mut edits = vec![
            format!("set('head.concept', '{word}_{}')", class.atom()),
            format!("set('head.phon', '{word}')"),
        ];
        if class.is_verb() {
            edits.push("set('head.synsem.flex', inf)".into());
        }
        if class == Class::Noun {
            let gender = if rng.gen_bool(0.6) { "de" } else { "het" };
            edits.push(format!("set('head.synsem.gender', {gender})"));
        }
        let _ = writeln!(lemmas, "{word} := lemma({}, {{{}}}) .", class.template(), edits.join(", "));
    }
    while total < entries {
        total += 1;
        let word = fresh(&mut rng, "");
        let num = ["sing", "plur"][rng.gen_range(0..2)];
        let person = rng.gen_range(1..=3);
        let case = ["nom", "obliq"][rng.gen_range(0..2)];
        let _ = writeln!(
            lemmas,
            "{word} := lemma({}, {{set('head.concept', '{word}_pronoun'), set('head.phon', '{word}'), \
             set('head.synsem.num', {num}), set('head.synsem.person', {person}), set('head.synsem.case', {case})}}) .",
            Class::Pronoun.template()
        );
    }
    (TEMPLATES.to_string(), lemmas, rules_text())
}

/// A compiled synthetic lexicon of exactly `entries` entries.
pub fn lexicon(entries: usize, seed: u64, exec: Exec) -> Result<Vec<LexicalEntry>, CompileError> {
    let (t, l, r) = source_texts(entries, seed);
    let src = LexiconSource::parse(("templates", &t), ("lemmas", &l), ("rules", &r))
        .expect("generated source parses");
    compile(&src, exec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_sizes() {
        for n in [0, 1, 7, 100, 500] {
            assert_eq!(lexicon(n, 1, Exec::Sequential).unwrap().len(), n, "n = {n}");
        }
    }

    #[test]
    fn per_lemma_counts_match_compilation() {
        let (t, _, r) = source_texts(0, 0);
        for class in CYCLE.iter().chain([&Class::Pronoun]) {
            let lemma = match class {
                Class::Pronoun => "x := lemma(pronoun, {set('head.concept', x), set('head.phon', x)}) .".to_string(),
                c => format!(
                    "x := lemma({}, {{set('head.concept', x), set('head.phon', xen)}}) .",
                    c.template()
                ),
            };
            let src = LexiconSource::parse(("t", &t), ("l", &lemma), ("r", &r)).unwrap();
            assert_eq!(compile(&src, Exec::Sequential).unwrap().len(), entries_per_lemma(*class), "{class:?}");
        }
    }

    #[test]
    fn same_seed_same_text() {
        assert_eq!(source_texts(300, 9), source_texts(300, 9));
        assert_ne!(source_texts(300, 9).1, source_texts(300, 10).1);
    }
}
