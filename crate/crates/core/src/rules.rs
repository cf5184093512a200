//! Rewriting rules as pairs of arrows from the empty graph with a shared
//! inner interface, application via double-pushout steps, and the weakest
//! precondition / strongest postcondition transformers.

use std::collections::BTreeSet;

use crate::canon::canonical_key;
use crate::category::{pushout, pushout_complement};
use crate::condition::{
    conjoin, disjoin, negate, satisfies_embedded, shift, simplify, Condition, Polarity,
};
use crate::cospan::Cospan;
use crate::error::Error;
use crate::graph::{enumerate_monos, Graph, PartialMap};

/// A rule `(lhs, rhs, app_cond)`: both sides are cospans from the empty
/// graph with the same codomain interface; the application condition is
/// rooted at that interface and constrains the context.
#[derive(Clone, Debug)]
pub struct Rule {
    pub name: String,
    lhs: Cospan,
    rhs: Cospan,
    app_cond: Condition,
}

impl Rule {
    pub fn new(name: impl Into<String>, lhs: Cospan, rhs: Cospan, app_cond: Condition) -> Result<Self, Error> {
        if !lhs.domain().is_empty() || !rhs.domain().is_empty() {
            return Err(Error::RootMismatch);
        }
        if lhs.codomain() != rhs.codomain() || app_cond.root() != lhs.codomain() {
            return Err(Error::InterfaceMismatch);
        }
        Ok(Rule { name: name.into(), lhs, rhs, app_cond })
    }

    pub fn lhs(&self) -> &Cospan {
        &self.lhs
    }

    pub fn rhs(&self) -> &Cospan {
        &self.rhs
    }

    pub fn app_cond(&self) -> &Condition {
        &self.app_cond
    }

    pub fn interface(&self) -> &Graph {
        self.lhs.codomain()
    }
}

#[derive(Clone, Debug)]
pub struct ReactiveSystem {
    pub rules: Vec<Rule>,
}

impl ReactiveSystem {
    pub fn rule(&self, name: &str) -> Result<&Rule, Error> {
        self.rules
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRule(name.to_string()))
    }
}

/// One application of a rule: the matched occurrence, the preserved context
/// and the resulting graph.
#[derive(Clone, Debug)]
pub struct StepResult {
    pub result: Graph,
    /// match of the left-hand middle into the state
    pub matched: crate::graph::Morphism,
    /// context graph with the interface embedded
    pub context: crate::graph::Morphism,
}

/// All double-pushout applications of `rule` to `state`, deduplicated by
/// isomorphism of the result, in deterministic order.
pub fn step(state: &Graph, rule: &Rule) -> Vec<StepResult> {
    let mut out: Vec<(Vec<u8>, StepResult)> = Vec::new();
    let mut seen = BTreeSet::new();
    for m in enumerate_monos(rule.lhs.middle(), state, &PartialMap::default()) {
        let Some((i_into_c, _c_into_state)) = pushout_complement(rule.lhs.right(), &m) else {
            continue;
        };
        let context = i_into_c.target().clone();
        if !satisfies_embedded(&context, &i_into_c, &rule.app_cond) {
            continue;
        }
        let (_r_into_h, _c_into_h) = {
            let po = pushout(rule.rhs.right(), &i_into_c);
            (po.0, po.1)
        };
        let result = _r_into_h.target().clone();
        let key = canonical_key(&result);
        if seen.insert(key.clone()) {
            out.push((
                key,
                StepResult { result, matched: m, context: i_into_c },
            ));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out.into_iter().map(|(_, r)| r).collect()
}

/// Successors of a set of graphs under one rule, deduplicated up to iso.
pub fn rule_apply_set(states: &[Graph], rule: &Rule) -> Vec<Graph> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for s in states {
        for r in step(s, rule) {
            if seen.insert(canonical_key(&r.result)) {
                out.push(r.result);
            }
        }
    }
    out
}

/// Strongest postcondition: `exists rhs . (app_cond ∧ shift(pre, lhs))`,
/// simplified. A graph satisfies it iff it is reachable in one `rule` step
/// from some graph satisfying `pre`.
pub fn sp(pre: &Condition, rule: &Rule) -> Result<Condition, Error> {
    let inner = conjoin(&rule.app_cond, &shift(pre, &rule.lhs)?)?;
    Ok(simplify(&Condition::quantifier(
        Polarity::Existential,
        rule.rhs.clone(),
        inner,
    )))
}

/// Weakest precondition: `forall lhs . (¬app_cond ∨ shift(post, rhs))`,
/// simplified. A graph satisfies it iff every `rule` step from it lands in
/// `post`.
pub fn wp(rule: &Rule, post: &Condition) -> Result<Condition, Error> {
    let inner = disjoin(&negate(&rule.app_cond), &shift(post, &rule.rhs)?)?;
    Ok(simplify(&Condition::quantifier(
        Polarity::Universal,
        rule.lhs.clone(),
        inner,
    )))
}

/// Forward chain: `[sp(pre, r1), sp(sp(pre, r1), r2), ...]`.
pub fn sp_trace(pre: &Condition, trace: &[&Rule]) -> Result<Vec<Condition>, Error> {
    let mut out = Vec::with_capacity(trace.len());
    let mut cur = pre.clone();
    for rule in trace {
        cur = sp(&cur, rule)?;
        out.push(cur.clone());
    }
    Ok(out)
}

/// Backward chain: `out[i]` is the weakest precondition of `post` under the
/// suffix `trace[i..]`; `out.last()` is `wp(trace[n-1], post)`.
pub fn wp_trace(trace: &[&Rule], post: &Condition) -> Result<Vec<Condition>, Error> {
    let mut out = vec![Condition::tt(Graph::empty()); trace.len()];
    let mut cur = post.clone();
    for (i, rule) in trace.iter().enumerate().rev() {
        cur = wp(rule, &cur)?;
        out[i] = cur.clone();
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::canon::are_isomorphic;
    use crate::condition::satisfies;
    use crate::graph::Morphism;

    fn lift_empty(g: &Graph) -> Cospan {
        Cospan::lift(Morphism::new(Graph::empty(), g.clone(), vec![], vec![]))
    }

    /// The running example rule: a looped node grows an edge to a fresh
    /// looped node, consuming its own loop.
    pub(crate) fn append_rule() -> Rule {
        let looped = Graph::new(vec![0], vec![(0, 0)]);
        let iface = Graph::discrete(1);
        let rhs_mid = Graph::new(vec![0, 0], vec![(0, 1), (1, 1)]);
        let lhs = Cospan::new(
            Morphism::new(Graph::empty(), looped.clone(), vec![], vec![]),
            Morphism::new(iface.clone(), looped.clone(), vec![0], vec![]),
        );
        let rhs = Cospan::new(
            Morphism::new(Graph::empty(), rhs_mid.clone(), vec![], vec![]),
            Morphism::new(iface.clone(), rhs_mid.clone(), vec![0], vec![]),
        );
        Rule::new("append", lhs, rhs, Condition::tt(iface)).unwrap()
    }

    #[test]
    fn append_extends_a_chain() {
        let rule = append_rule();
        let start = Graph::new(vec![0], vec![(0, 0)]);
        let results = step(&start, &rule);
        assert_eq!(results.len(), 1);
        let expected = Graph::new(vec![0, 0], vec![(0, 1), (1, 1)]);
        assert!(are_isomorphic(&results[0].result, &expected));
        // applying again moves the loop one further
        let results2 = step(&results[0].result, &rule);
        assert_eq!(results2.len(), 1);
        let expected2 = Graph::new(vec![0, 0, 0], vec![(0, 1), (1, 2), (2, 2)]);
        assert!(are_isomorphic(&results2[0].result, &expected2));
    }

    #[test]
    fn no_match_no_step() {
        let rule = append_rule();
        assert!(step(&Graph::discrete(2), &rule).is_empty());
        assert!(step(&Graph::empty(), &rule).is_empty());
    }

    #[test]
    fn app_cond_blocks_application() {
        // delete a loop, but only if the node has no second loop
        let looped = Graph::new(vec![0], vec![(0, 0)]);
        let iface = Graph::discrete(1);
        let lhs = Cospan::new(
            Morphism::new(Graph::empty(), looped.clone(), vec![], vec![]),
            Morphism::new(iface.clone(), looped.clone(), vec![0], vec![]),
        );
        let rhs = lift_empty(&iface);
        // context must not contain a loop on the interface node
        let ctx_loop = Graph::new(vec![0], vec![(0, 0)]);
        let forbid = Condition::quantifier(
            Polarity::Universal,
            Cospan::lift(Morphism::new(iface.clone(), ctx_loop.clone(), vec![0], vec![])),
            Condition::ff(ctx_loop),
        );
        let rule = Rule::new("unloop", lhs, rhs, forbid).unwrap();
        let single = Graph::new(vec![0], vec![(0, 0)]);
        let double = Graph::new(vec![0], vec![(0, 0), (0, 0)]);
        assert_eq!(step(&single, &rule).len(), 1);
        assert!(step(&double, &rule).is_empty());
    }

    #[test]
    fn sp_agrees_with_stepping_on_bounded_models() {
        use crate::models::{bounded_models, enumerate_graphs};
        let rule = append_rule();
        // pre: a loop exists
        let looped = Graph::new(vec![0], vec![(0, 0)]);
        let pre = Condition::quantifier(
            Polarity::Existential,
            lift_empty(&looped),
            Condition::tt(looped),
        );
        let post = sp(&pre, &rule).unwrap();
        // oracle: successors of all bounded models of pre
        let pre_models = bounded_models(&pre, 3, 4);
        let successors = rule_apply_set(&pre_models, &rule);
        let mut succ_keys: BTreeSet<Vec<u8>> = successors
            .iter()
            .filter(|g| g.node_count() <= 3 && g.edge_count() <= 4)
            .map(canonical_key)
            .collect();
        for g in enumerate_graphs(3, 4).iter() {
            let in_sp = satisfies(g, &post).unwrap();
            let in_succ = succ_keys.remove(&canonical_key(g));
            assert_eq!(
                in_sp, in_succ,
                "sp and stepping disagree on {:?}",
                g
            );
        }
        assert!(succ_keys.is_empty());
    }

    #[test]
    fn wp_agrees_with_stepping_on_bounded_models() {
        use crate::models::enumerate_graphs;
        let rule = append_rule();
        // post: no node with a loop and an outgoing edge
        let bad = Graph::new(vec![0, 0], vec![(0, 0), (0, 1)]);
        let not_bad = negate(&Condition::quantifier(
            Polarity::Existential,
            lift_empty(&bad),
            Condition::tt(bad),
        ));
        let pre = wp(&rule, &not_bad).unwrap();
        for g in enumerate_graphs(3, 4).iter() {
            let in_wp = satisfies(g, &pre).unwrap();
            let all_safe = step(g, &rule)
                .iter()
                .all(|r| satisfies(&r.result, &not_bad).unwrap());
            assert_eq!(in_wp, all_safe, "wp and stepping disagree on {:?}", g);
        }
    }

    #[test]
    fn trace_transformers_chain() {
        let rule = append_rule();
        let looped = Graph::new(vec![0], vec![(0, 0)]);
        let pre = Condition::quantifier(
            Polarity::Existential,
            lift_empty(&looped),
            Condition::tt(looped.clone()),
        );
        let chain = sp_trace(&pre, &[&rule, &rule]).unwrap();
        assert_eq!(chain.len(), 2);
        let bad = Graph::new(vec![0, 0], vec![(0, 0), (0, 1)]);
        let not_bad = negate(&Condition::quantifier(
            Polarity::Existential,
            lift_empty(&bad),
            Condition::tt(bad),
        ));
        let back = wp_trace(&[&rule, &rule], &not_bad).unwrap();
        assert_eq!(back.len(), 2);
        // back[1] is the one-step weakest precondition
        let direct = wp(&rule, &not_bad).unwrap();
        assert_eq!(crate::condition::cond_key(&back[1]), crate::condition::cond_key(&direct));
    }
}
