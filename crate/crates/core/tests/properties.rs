use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

use proptest::prelude::*;

use oolex::entry::LexicalEntry;
use oolex::feature_graph::{from_canonical_text, resolve, to_canonical_text, unify_graphs, Bindings, Node, Path};
use oolex::index_engine::{Mode, PostingList};
use oolex::lexicon::Lexicon;
use oolex::par::Exec;
use oolex::query_engine::{run, Constraint, Query};
use oolex::synth;
use oolex::ObjectId;

fn leaf() -> impl Strategy<Value = Node> {
    prop_oneof![
        prop::sample::select(vec!["a", "b", "c"]).prop_map(Node::atom),
        (1i64..3).prop_map(Node::Number),
        prop::sample::select(vec!["X", "Y", "Z"]).prop_map(Node::var),
        prop::sample::subsequence(vec!["a", "b", "c", "d"], 2..=3)
            .prop_map(|ms| Node::disj(ms.into_iter().map(Node::atom))),
    ]
}

/// Small graphs over a shared vocabulary, so random pairs often overlap and
/// share variables.
fn graph() -> impl Strategy<Value = Node> {
    leaf().prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            3 => prop::collection::vec((prop::sample::select(vec!["f", "g", "h"]), inner.clone()), 0..4)
                .prop_map(Node::avm),
            1 => prop::collection::vec(inner.clone(), 1..3).prop_map(Node::Seq),
            1 => inner.prop_map(|n| Node::Compound("p".into(), vec![n])),
        ]
    })
}

fn avm() -> impl Strategy<Value = Node> {
    prop::collection::vec((prop::sample::select(vec!["f", "g", "h"]), graph()), 0..4).prop_map(Node::avm)
}

fn meet(a: &Node, b: &Node, env: &Bindings) -> Option<(Node, Bindings)> {
    unify_graphs(a, b, env).ok()
}

fn settled(m: &Option<(Node, Bindings)>) -> Option<Node> {
    m.as_ref().map(|(g, env)| resolve(g, env).normal_form())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn unification_is_commutative(a in avm(), b in avm()) {
        let ab = meet(&a, &b, &Bindings::new());
        let ba = meet(&b, &a, &Bindings::new());
        prop_assert_eq!(settled(&ab), settled(&ba));
    }

    #[test]
    fn unification_is_associative(a in avm(), b in avm(), c in avm()) {
        let left = meet(&a, &b, &Bindings::new()).and_then(|(ab, env)| meet(&ab, &c, &env));
        let right = meet(&b, &c, &Bindings::new()).and_then(|(bc, env)| meet(&a, &bc, &env));
        prop_assert_eq!(settled(&left), settled(&right));
    }

    #[test]
    fn unification_is_idempotent(a in avm()) {
        let (merged, env) = unify_graphs(&a, &a, &Bindings::new()).unwrap();
        prop_assert!(env.is_empty());
        prop_assert_eq!(merged, a);
    }

    #[test]
    fn unifying_with_the_empty_graph_changes_nothing(a in avm()) {
        let (merged, env) = unify_graphs(&a, &Node::avm::<&str>([]), &Bindings::new()).unwrap();
        prop_assert!(env.is_empty());
        prop_assert_eq!(merged, a);
    }

    #[test]
    fn a_successful_result_subsumes_both_inputs(a in avm(), b in avm()) {
        if let Some((g, env)) = meet(&a, &b, &Bindings::new()) {
            let g = resolve(&g, &env);
            prop_assert!(meet(&a, &g, &env).is_some());
            prop_assert!(meet(&g, &b, &env).is_some());
        }
    }
}

fn text_atom() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z][a-z0-9_]{0,5}",
        "[A-Z][a-z]{0,4}",
        "[ -~]{0,6}",
        prop::sample::select(vec!["or", "it's", "a\\b", "tab\there", "line\nbreak", "ë", ""]).prop_map(String::from),
    ]
}

fn rich_graph() -> impl Strategy<Value = Node> {
    let leaf = prop_oneof![
        text_atom().prop_map(Node::Atom),
        any::<i64>().prop_map(Node::Number),
        "[A-Z][A-Za-z0-9_]{0,3}".prop_map(Node::Var),
        prop::collection::vec(text_atom(), 1..4).prop_map(|ms| Node::disj(ms.into_iter().map(Node::Atom))),
    ];
    leaf.prop_recursive(4, 40, 4, |inner| {
        prop_oneof![
            prop::collection::vec((text_atom(), inner.clone()), 0..4).prop_map(Node::avm),
            prop::collection::vec(inner.clone(), 0..3).prop_map(Node::Seq),
            (text_atom(), prop::collection::vec(inner, 1..3)).prop_map(|(f, a)| Node::Compound(f, a)),
        ]
    })
}

/// No empty Avm below the root: `flatten` has no pair for one.
fn without_empty_avms(n: &Node, root: bool) -> bool {
    match n {
        Node::Avm(p) if p.is_empty() => root,
        Node::Avm(p) => p.iter().all(|(_, v)| without_empty_avms(v, false)),
        _ => true,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn canonical_text_round_trips(g in rich_graph()) {
        let text = to_canonical_text(&g);
        prop_assert_eq!(from_canonical_text(&text).unwrap(), g);
    }

    #[test]
    fn flatten_then_rebuild_is_identity(pairs in prop::collection::vec(("[a-z][a-z0-9_]{0,3}", rich_graph()), 0..5)) {
        let g = Node::avm(pairs);
        prop_assume!(without_empty_avms(&g, true));
        let flat = g.flatten();
        prop_assert_eq!(Node::from_pairs(flat.iter().map(|(p, v)| (p, v))), g.clone());
        for (p, v) in &flat {
            prop_assert_eq!(g.get(p), Some(v));
            // Nested feature names are free text; only bare ones have a path syntax.
            if let Ok(reparsed) = p.to_string().parse::<Path>() {
                prop_assert_eq!(&reparsed, p);
            }
        }
    }
}

fn id_set() -> impl Strategy<Value = BTreeSet<ObjectId>> {
    prop::collection::vec((0u32..3000, prop_oneof![Just(1u32), 1u32..80]), 0..15)
        .prop_map(|runs| runs.into_iter().flat_map(|(s, n)| s..s + n).collect())
}

fn list(s: &BTreeSet<ObjectId>) -> PostingList {
    PostingList::compress(&s.iter().copied().collect::<Vec<_>>()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn compression_round_trips(s in id_set()) {
        let p = list(&s);
        prop_assert!(p.is_maximal());
        prop_assert_eq!(p.len(), s.len());
        prop_assert_eq!(p.decompress(), s.iter().copied().collect::<Vec<_>>());
        let back: PostingList = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn set_operations_match_a_set_oracle(a in id_set(), b in id_set(), probe in 0u32..3100) {
        let (pa, pb) = (list(&a), list(&b));
        let inter = pa.intersect(&pb);
        let uni = pa.union(&pb);
        prop_assert!(inter.is_maximal() && uni.is_maximal());
        prop_assert_eq!(inter.decompress(), a.intersection(&b).copied().collect::<Vec<_>>());
        prop_assert_eq!(uni.decompress(), a.union(&b).copied().collect::<Vec<_>>());
        prop_assert_eq!(pa.contains(probe), a.contains(&probe));
        prop_assert_eq!(PostingList::intersect_all([&pa, &pb]), Some(inter));
    }

    #[test]
    fn unsorted_input_is_rejected(mut v in prop::collection::vec(0u32..100, 2..20)) {
        v.sort_unstable();
        v.dedup();
        prop_assume!(v.len() >= 2);
        v.swap(0, 1);
        prop_assert!(PostingList::compress(&v).is_err());
    }
}

struct Fixture {
    _dir: tempfile::TempDir,
    entries: Vec<LexicalEntry>,
    flat: Vec<HashMap<Path, Node>>,
    values: Vec<(Path, Vec<Node>)>,
    lex: Lexicon,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let entries = synth::lexicon(400, 11, Exec::Sequential).unwrap();
        Lexicon::build(&entries, &synth::meta_paths(), dir.path(), Exec::Sequential).unwrap();
        let lex = Lexicon::open(dir.path()).unwrap();
        let flat = entries.iter().map(|e| e.graph.flatten().into_iter().collect()).collect();
        let values = synth::meta_paths()
            .into_iter()
            .map(|p| {
                let mut vs: Vec<Node> = lex.meta().values(&p).iter().map(|v| from_canonical_text(v).unwrap()).collect();
                vs.push(Node::atom("unseen"));
                (p, vs)
            })
            .collect();
        Fixture { _dir: dir, entries, flat, values, lex }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn meta_queries_match_a_scan(picks in prop::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>(), any::<bool>()), 1..4)) {
        let f = fixture();
        let cs: Vec<Constraint> = picks
            .iter()
            .map(|(p, v, liberal)| {
                let (path, vs) = p.get(&f.values);
                let mode = if *liberal { Mode::Liberal } else { Mode::Strict };
                Constraint::meta(path.clone(), v.get(vs).clone(), mode)
            })
            .collect();
        let want: Vec<ObjectId> = f
            .entries
            .iter()
            .zip(&f.flat)
            .filter(|(_, flat)| {
                cs.iter().all(|c| {
                    let oolex::query_engine::Target::Meta(p) = &c.target else { unreachable!() };
                    match flat.get(p) {
                        None | Some(Node::Var(_)) => c.mode == Mode::Liberal,
                        Some(Node::Disj(ms)) => ms.contains(&c.value),
                        Some(v) => *v == c.value,
                    }
                })
            })
            .map(|(e, _)| e.id)
            .collect();
        prop_assert_eq!(run(&f.lex, &Query::new(cs)).unwrap(), want);
    }
}
