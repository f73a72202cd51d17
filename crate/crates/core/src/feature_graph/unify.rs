use std::borrow::Cow;
use std::collections::BTreeMap;

use super::Node;

/// Variable bindings produced by unification.
///
/// Chains are allowed (`X ↦ Y ↦ a`); cycles are not, the occurs check
/// rejects them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bindings {
    map: BTreeMap<String, Node>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &str) -> Option<&Node> {
        self.map.get(var)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Node)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Fully resolved value of `var`, if bound.
    pub fn value_of(&self, var: &str) -> Option<Node> {
        self.map.get(var).map(|n| resolve(n, self))
    }

    /// Follows variable bindings. Returns the last bound variable on the
    /// chain, if any, and the node the chain ends in.
    fn walk<'a>(&'a self, mut n: &'a Node) -> (Option<&'a str>, &'a Node) {
        let mut last = None;
        while let Node::Var(v) = n {
            match self.map.get(v) {
                Some(t) => {
                    last = Some(v.as_str());
                    n = t;
                }
                None => break,
            }
        }
        (last, n)
    }

    fn occurs(&self, var: &str, n: &Node) -> bool {
        match n {
            Node::Var(v) if v == var => true,
            Node::Var(v) => self.map.get(v).is_some_and(|t| self.occurs(var, t)),
            Node::Atom(_) | Node::Number(_) | Node::Disj(_) => false,
            Node::Seq(items) | Node::Compound(_, items) => {
                items.iter().any(|i| self.occurs(var, i))
            }
            Node::Avm(pairs) => pairs.iter().any(|(_, v)| self.occurs(var, v)),
        }
    }

    fn bind(&mut self, var: &str, value: Node) -> Result<(), UnifyError> {
        if self.occurs(var, &value) {
            return Err(UnifyError::Occurs(var.to_string()));
        }
        self.map.insert(var.to_string(), value);
        Ok(())
    }
}

/// Why two graphs failed to unify.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UnifyError {
    #[error("cannot unify {0} with {1}")]
    Clash(String, String),
    #[error("functor or arity mismatch: {0} vs {1}")]
    Shape(String, String),
    #[error("empty disjunction intersection")]
    EmptyDisjunction,
    #[error("occurs check: {0} would become cyclic")]
    Occurs(String),
}

/// What to do when two values conflict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClashPolicy {
    /// Ordinary unification: conflicts fail.
    Fail,
    /// The right-hand value replaces the left on any conflict. Used for
    /// template inheritance, where later parents override earlier ones.
    PreferRight,
}

struct Unifier {
    env: Bindings,
    policy: ClashPolicy,
}

impl Unifier {
    fn meet(&mut self, a: &Node, b: &Node) -> Result<Node, UnifyError> {
        match self.policy {
            ClashPolicy::Fail => self.meet_inner(a, b),
            ClashPolicy::PreferRight => {
                let saved = self.env.clone();
                match self.meet_inner(a, b) {
                    Ok(n) => Ok(n),
                    Err(_) => {
                        self.env = saved;
                        Ok(b.clone())
                    }
                }
            }
        }
    }

    fn meet_inner(&mut self, a: &Node, b: &Node) -> Result<Node, UnifyError> {
        let (va, ta) = self.env.walk(a);
        let (vb, tb) = self.env.walk(b);
        // Only values reached through a binding need copying out of `env`.
        let ta: Cow<'_, Node> = if va.is_some() { Cow::Owned(ta.clone()) } else { Cow::Borrowed(a) };
        let tb: Cow<'_, Node> = if vb.is_some() { Cow::Owned(tb.clone()) } else { Cow::Borrowed(b) };
        let (va, vb) = (va.map(str::to_owned), vb.map(str::to_owned));
        // An unbound variable binds to the other side, through its variable
        // when it has one so later widening stays shared.
        let via = |v: &Option<String>, t: &Node| match v {
            Some(name) => Node::Var(name.clone()),
            None => t.clone(),
        };
        match (ta.as_ref(), tb.as_ref()) {
            (Node::Var(x), Node::Var(y)) if x == y => return Ok(ta.into_owned()),
            (Node::Var(x), _) => {
                self.env.bind(x, via(&vb, &tb))?;
                return Ok(ta.into_owned());
            }
            (_, Node::Var(y)) => {
                self.env.bind(y, via(&va, &ta))?;
                return Ok(tb.into_owned());
            }
            _ => {}
        }
        let merged = self.meet_values(&ta, &tb)?;
        // Rebind so every occurrence of a bound variable sees the merged,
        // more specific value.
        match (va, vb) {
            (Some(x), Some(y)) if x != y => {
                self.env.bind(&x, merged)?;
                self.env.bind(&y, Node::Var(x.clone()))?;
                Ok(Node::Var(x))
            }
            (Some(x), _) | (None, Some(x)) => {
                self.env.bind(&x, merged)?;
                Ok(Node::Var(x))
            }
            (None, None) => Ok(merged),
        }
    }

    fn meet_all(&mut self, a: &[Node], b: &[Node]) -> Result<Vec<Node>, UnifyError> {
        a.iter().zip(b).map(|(x, y)| self.meet(x, y)).collect()
    }

    fn meet_values(&mut self, a: &Node, b: &Node) -> Result<Node, UnifyError> {
        let clash = || UnifyError::Clash(a.to_string(), b.to_string());
        match (a, b) {
            (Node::Atom(x), Node::Atom(y)) if x == y => Ok(a.clone()),
            (Node::Number(x), Node::Number(y)) if x == y => Ok(a.clone()),
            (Node::Disj(ms), x) | (x, Node::Disj(ms)) if x.is_atomic() => {
                if ms.contains(x) {
                    Ok(x.clone())
                } else {
                    Err(clash())
                }
            }
            (Node::Disj(xs), Node::Disj(ys)) => {
                let common: Vec<Node> = xs.iter().filter(|m| ys.contains(m)).cloned().collect();
                match common.len() {
                    0 => Err(UnifyError::EmptyDisjunction),
                    1 => Ok(common.into_iter().next().unwrap()),
                    _ => Ok(Node::Disj(common)),
                }
            }
            (Node::Seq(xs), Node::Seq(ys)) => {
                if xs.len() != ys.len() {
                    return Err(UnifyError::Shape(a.to_string(), b.to_string()));
                }
                Ok(Node::Seq(self.meet_all(xs, ys)?))
            }
            (Node::Compound(f, xs), Node::Compound(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return Err(UnifyError::Shape(a.to_string(), b.to_string()));
                }
                Ok(Node::Compound(f.clone(), self.meet_all(xs, ys)?))
            }
            (Node::Avm(xs), Node::Avm(ys)) => self.meet_avms(xs, ys),
            _ => Err(clash()),
        }
    }

    /// Union of features. Occurrence `k` of a feature on the left meets
    /// occurrence `k` of the same feature on the right; unmatched right-hand
    /// occurrences are appended in their original order.
    fn meet_avms(
        &mut self,
        xs: &[(String, Node)],
        ys: &[(String, Node)],
    ) -> Result<Node, UnifyError> {
        let ys_occ = occurrences(ys);
        let mut used = vec![false; ys.len()];
        let mut out = Vec::with_capacity(xs.len().max(ys.len()));
        for ((f, x), k) in xs.iter().zip(occurrences(xs)) {
            let partner = ys
                .iter()
                .zip(&ys_occ)
                .position(|((g, _), &j)| g == f && j == k);
            match partner {
                Some(i) => {
                    used[i] = true;
                    out.push((f.clone(), self.meet(x, &ys[i].1)?));
                }
                None => out.push((f.clone(), x.clone())),
            }
        }
        for (i, (g, y)) in ys.iter().enumerate() {
            if !used[i] {
                out.push((g.clone(), y.clone()));
            }
        }
        Ok(Node::Avm(out))
    }
}

fn occurrences(pairs: &[(String, Node)]) -> Vec<usize> {
    let mut counts: Vec<(&str, usize)> = Vec::new();
    pairs
        .iter()
        .map(|(f, _)| match counts.iter_mut().find(|(g, _)| g == f) {
            Some((_, n)) => {
                *n += 1;
                *n
            }
            None => {
                counts.push((f, 0));
                0
            }
        })
        .collect()
}

/// Unifies `a` with `b` under `env`, returning the extended bindings.
///
/// Literal disjunctions narrowed by the unification are only visible in the
/// merged graph from [`unify_graphs`]; the bindings record variable values.
pub fn unify(a: &Node, b: &Node, env: &Bindings) -> Result<Bindings, UnifyError> {
    unify_graphs(a, b, env).map(|(_, env)| env)
}

/// Unifies `a` with `b` and returns the merged graph with the new bindings.
/// The merged graph keeps `a`'s feature order, followed by features only `b`
/// has.
pub fn unify_graphs(a: &Node, b: &Node, env: &Bindings) -> Result<(Node, Bindings), UnifyError> {
    unify_with(a, b, env, ClashPolicy::Fail)
}

pub fn unify_with(
    a: &Node,
    b: &Node,
    env: &Bindings,
    policy: ClashPolicy,
) -> Result<(Node, Bindings), UnifyError> {
    let mut u = Unifier {
        env: env.clone(),
        policy,
    };
    let merged = u.meet(a, b)?;
    Ok((merged, u.env))
}

/// Replaces bound variables transitively; unbound variables stay by name.
pub fn resolve(g: &Node, env: &Bindings) -> Node {
    match g {
        Node::Var(v) => match env.map.get(v) {
            Some(t) => resolve(t, env),
            None => g.clone(),
        },
        Node::Atom(_) | Node::Number(_) | Node::Disj(_) => g.clone(),
        Node::Seq(items) => Node::Seq(items.iter().map(|n| resolve(n, env)).collect()),
        Node::Compound(f, args) => {
            Node::Compound(f.clone(), args.iter().map(|n| resolve(n, env)).collect())
        }
        Node::Avm(pairs) => Node::Avm(
            pairs
                .iter()
                .map(|(k, v)| (k.clone(), resolve(v, env)))
                .collect(),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::super::from_canonical_text;
    use super::*;

    fn g(s: &str) -> Node {
        from_canonical_text(s).unwrap()
    }

    #[test]
    fn variable_binds_anything() {
        let env = unify(&Node::var("X"), &Node::atom("sing"), &Bindings::new()).unwrap();
        assert_eq!(env.get("X"), Some(&Node::atom("sing")));
    }

    #[test]
    fn disjunction_selects_member() {
        let (m, _) = unify_graphs(&g("or(2, 3)"), &Node::Number(3), &Bindings::new()).unwrap();
        assert_eq!(m, Node::Number(3));
        let (m, _) = unify_graphs(&g("or(2, 3)"), &g("or(3, 4, 2)"), &Bindings::new()).unwrap();
        assert_eq!(m, g("or(2, 3)"));
        assert_eq!(
            unify(&g("or(2, 3)"), &g("or(1, 4)"), &Bindings::new()),
            Err(UnifyError::EmptyDisjunction)
        );
        assert!(unify(&g("or(2, 3)"), &Node::Number(1), &Bindings::new()).is_err());
    }

    #[test]
    fn distinct_atoms_fail() {
        assert!(matches!(
            unify(&Node::atom("sing"), &Node::atom("plur"), &Bindings::new()),
            Err(UnifyError::Clash(..))
        ));
        assert!(unify(&Node::atom("1"), &Node::Number(1), &Bindings::new()).is_err());
    }

    #[test]
    fn compound_shape_mismatch_fails() {
        assert!(matches!(
            unify(&g("f(a)"), &g("g(a)"), &Bindings::new()),
            Err(UnifyError::Shape(..))
        ));
        assert!(unify(&g("f(a)"), &g("f(a, b)"), &Bindings::new()).is_err());
        assert!(unify(&g("{a}"), &g("{a, b}"), &Bindings::new()).is_err());
    }

    #[test]
    fn occurs_check_rejects_cycles() {
        assert_eq!(
            unify(&Node::var("X"), &g("[f:X]"), &Bindings::new()),
            Err(UnifyError::Occurs("X".into()))
        );
        assert!(unify(&g("[a:X, b:X]"), &g("[a:Y, b:f(Y)]"), &Bindings::new()).is_err());
    }

    #[test]
    fn avm_union_and_reentrancy() {
        let (m, env) =
            unify_graphs(&g("[cat:v, num:X, agr:X]"), &g("[num:sing, pers:3]"), &Bindings::new())
                .unwrap();
        assert_eq!(resolve(&m, &env), g("[cat:v, num:sing, agr:sing, pers:3]"));
    }

    #[test]
    fn shared_variable_sees_widened_value() {
        // X is bound at `a`, then widened through `b`; both must agree.
        let (m, env) = unify_graphs(
            &g("[a:X, b:X]"),
            &g("[a:[p:1], b:[q:2]]"),
            &Bindings::new(),
        )
        .unwrap();
        assert_eq!(resolve(&m, &env), g("[a:[p:1, q:2], b:[p:1, q:2]]"));
    }

    #[test]
    fn repeated_features_pair_by_occurrence() {
        let (m, env) = unify_graphs(
            &g("[arg:[cat:np], arg:[cat:n]]"),
            &g("[arg:[num:sing], arg:[num:plur], arg:[cat:pp]]"),
            &Bindings::new(),
        )
        .unwrap();
        assert_eq!(
            resolve(&m, &env),
            g("[arg:[cat:np, num:sing], arg:[cat:n, num:plur], arg:[cat:pp]]")
        );
    }

    #[test]
    fn resolve_examples() {
        let mut env = Bindings::new();
        env.map.insert("X".into(), Node::atom("a"));
        assert_eq!(resolve(&Node::var("X"), &env), Node::atom("a"));
        assert_eq!(resolve(&Node::atom("a"), &Bindings::new()), Node::atom("a"));
        let mut env = Bindings::new();
        env.map.insert("X".into(), g("[v:Y]"));
        env.map.insert("Y".into(), Node::Number(3));
        assert_eq!(resolve(&g("[num:X]"), &env), g("[num:[v:3]]"));
        assert_eq!(resolve(&g("[num:Z]"), &env), g("[num:Z]"));
    }

    #[test]
    fn prefer_right_overrides_conflicts() {
        let (m, env) =
            unify_with(&g("[a:1, b:X, c:X]"), &g("[a:2, b:q]"), &Bindings::new(), ClashPolicy::PreferRight)
                .unwrap();
        assert_eq!(resolve(&m, &env), g("[a:2, b:q, c:q]"));
    }

    #[test]
    fn failure_leaves_caller_env_untouched() {
        let env = unify(&Node::var("X"), &Node::atom("a"), &Bindings::new()).unwrap();
        let before = env.clone();
        assert!(unify(&g("[p:Y, q:b]"), &g("[p:c, q:d]"), &env).is_err());
        assert_eq!(env, before);
    }
}
