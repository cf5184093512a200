//! Predicate abstraction: abstract states assign each predicate condition
//! one of `Pos`, `Neg`, `Unknown` (plus a `Bottom` state for unsatisfiable
//! concretizations), and the abstract transition relation applies the
//! strongest postcondition to the concretization and re-abstracts it.

use std::collections::BTreeMap;

use crate::condition::{conjoin, negate, satisfies, Condition};
use crate::entailment::Engine;
use crate::error::Error;
use crate::graph::Graph;
use crate::rules::{sp, ReactiveSystem};

#[derive(Clone, Copy, PartialEq, Eq, Debug, PartialOrd, Ord)]
pub enum Lit {
    Pos,
    Neg,
    Unknown,
}

#[derive(Clone, PartialEq, Eq, Debug, PartialOrd, Ord)]
pub enum AbstractState {
    Bottom,
    Assign(Vec<Lit>),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PredicateSource {
    User,
    Wp,
    Sp,
}

#[derive(Clone, Debug)]
pub struct Predicate {
    pub name: String,
    pub source: PredicateSource,
    pub cond: Condition,
}

/// An ordered set of predicate conditions, all closed (empty root).
#[derive(Clone, Debug, Default)]
pub struct PredicateSet {
    pub preds: Vec<Predicate>,
}

impl PredicateSet {
    pub fn new(preds: Vec<Predicate>) -> Self {
        PredicateSet { preds }
    }

    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }
}

/// Concretization: the conjunction of asserted and negated predicates;
/// `Unknown` contributes nothing, `Bottom` concretizes to `false`.
pub fn gamma(q: &AbstractState, p: &PredicateSet) -> Condition {
    match q {
        AbstractState::Bottom => Condition::ff(Graph::empty()),
        AbstractState::Assign(lits) => {
            assert_eq!(lits.len(), p.len());
            let mut acc = Condition::tt(Graph::empty());
            for (lit, pred) in lits.iter().zip(&p.preds) {
                match lit {
                    Lit::Pos => acc = conjoin(&acc, &pred.cond).unwrap(),
                    Lit::Neg => acc = conjoin(&acc, &negate(&pred.cond)).unwrap(),
                    Lit::Unknown => {}
                }
            }
            acc
        }
    }
}

/// Best provable abstraction of a condition: per predicate, `Pos` if the
/// condition provably entails it, `Neg` if it provably entails its negation,
/// otherwise `Unknown`. `Bottom` if the condition is provably unsatisfiable.
pub fn alpha_hat(a: &Condition, p: &PredicateSet, engine: &mut Engine) -> Result<AbstractState, Error> {
    if engine.entails(a, &Condition::ff(Graph::empty()))?.is_proved() {
        return Ok(AbstractState::Bottom);
    }
    let mut lits = Vec::with_capacity(p.len());
    let mut contradictory = false;
    for pred in &p.preds {
        let pos = engine.entails(a, &pred.cond)?.is_proved();
        let neg = engine.entails(a, &negate(&pred.cond))?.is_proved();
        match (pos, neg) {
            (true, true) => {
                contradictory = true;
                break;
            }
            (true, false) => lits.push(Lit::Pos),
            (false, true) => lits.push(Lit::Neg),
            (false, false) => lits.push(Lit::Unknown),
        }
    }
    if contradictory {
        return Ok(AbstractState::Bottom);
    }
    Ok(AbstractState::Assign(lits))
}

/// Abstract successor: `alpha_hat(sp(gamma(q), rule))`. Results are cached
/// per (state, rule) in `cache`.
pub fn sp_hat(
    q: &AbstractState,
    rule_name: &str,
    system: &ReactiveSystem,
    p: &PredicateSet,
    engine: &mut Engine,
    cache: &mut BTreeMap<(AbstractState, String), AbstractState>,
) -> Result<AbstractState, Error> {
    if let Some(hit) = cache.get(&(q.clone(), rule_name.to_string())) {
        return Ok(hit.clone());
    }
    let rule = system.rule(rule_name)?;
    let result = if *q == AbstractState::Bottom {
        AbstractState::Bottom
    } else {
        let post = sp(&gamma(q, p), rule)?;
        alpha_hat(&post, p, engine)?
    };
    cache.insert((q.clone(), rule_name.to_string()), result.clone());
    Ok(result)
}

/// Exact abstraction of an explicit finite set of graphs: `Pos` if all
/// satisfy the predicate, `Neg` if none does, `Unknown` otherwise; `Bottom`
/// for the empty set. Test oracle for the Galois connection.
pub fn alpha_sets(graphs: &[Graph], p: &PredicateSet) -> AbstractState {
    if graphs.is_empty() {
        return AbstractState::Bottom;
    }
    let lits = p
        .preds
        .iter()
        .map(|pred| {
            let sat: Vec<bool> = graphs
                .iter()
                .map(|g| satisfies(g, &pred.cond).unwrap_or(false))
                .collect();
            if sat.iter().all(|&b| b) {
                Lit::Pos
            } else if sat.iter().all(|&b| !b) {
                Lit::Neg
            } else {
                Lit::Unknown
            }
        })
        .collect();
    AbstractState::Assign(lits)
}

#[derive(Clone, Debug)]
pub struct AbstractTS {
    pub states: Vec<AbstractState>,
    pub initial: usize,
    /// (source state index, rule name, target state index)
    pub transitions: Vec<(usize, String, usize)>,
}

#[derive(Clone, Debug)]
pub struct Counterexample {
    /// rule names along the abstract path from the initial state
    pub trace: Vec<String>,
    /// states along the path, including initial and failing state
    pub states: Vec<AbstractState>,
}

#[derive(Clone, Copy, Debug)]
pub struct ExploreLimits {
    pub max_states: usize,
}

impl Default for ExploreLimits {
    fn default() -> Self {
        ExploreLimits { max_states: 10_000 }
    }
}

/// Breadth-first exploration of the abstract transition system from
/// `alpha_hat(init)`. Stops at the first state whose concretization is not
/// provably safe and returns the trace to it; otherwise returns the complete
/// finite system. With `stop_at_first == false`, exploration continues and
/// all unsafe states are reported (shortest traces first).
pub fn explore(
    system: &ReactiveSystem,
    init: &Condition,
    bad: &Condition,
    p: &PredicateSet,
    engine: &mut Engine,
    limits: ExploreLimits,
    stop_at_first: bool,
) -> Result<(AbstractTS, Vec<Counterexample>), Error> {
    let not_bad = negate(bad);
    let mut cache = BTreeMap::new();
    let q0 = alpha_hat(init, p, engine)?;
    let mut states = vec![q0.clone()];
    let mut index: BTreeMap<AbstractState, usize> = BTreeMap::new();
    index.insert(q0, 0);
    let mut parents: Vec<Option<(usize, String)>> = vec![None];
    let mut transitions = Vec::new();
    let mut counterexamples = Vec::new();
    let mut queue = std::collections::VecDeque::from([0usize]);
    let mut visited = vec![false; 1];

    let trace_to = |i: usize, parents: &[Option<(usize, String)>], states: &[AbstractState]| {
        let mut rules = Vec::new();
        let mut path = vec![states[i].clone()];
        let mut cur = i;
        while let Some((par, rule)) = &parents[cur] {
            rules.push(rule.clone());
            path.push(states[*par].clone());
            cur = *par;
        }
        rules.reverse();
        path.reverse();
        Counterexample { trace: rules, states: path }
    };

    while let Some(i) = queue.pop_front() {
        if visited[i] {
            continue;
        }
        visited[i] = true;
        let q = states[i].clone();
        let safe = engine.entails(&gamma(&q, p), &not_bad)?.is_proved();
        if !safe {
            counterexamples.push(trace_to(i, &parents, &states));
            if stop_at_first {
                let ts = AbstractTS { states, initial: 0, transitions };
                return Ok((ts, counterexamples));
            }
            continue; // do not expand unsafe states
        }
        for rule in &system.rules {
            let succ = sp_hat(&q, &rule.name, system, p, engine, &mut cache)?;
            let j = match index.get(&succ) {
                Some(&j) => j,
                None => {
                    if states.len() >= limits.max_states {
                        return Err(Error::LimitExceeded(format!(
                            "abstract state limit {} reached",
                            limits.max_states
                        )));
                    }
                    let j = states.len();
                    states.push(succ.clone());
                    index.insert(succ.clone(), j);
                    parents.push(Some((i, rule.name.clone())));
                    visited.push(false);
                    queue.push_back(j);
                    j
                }
            };
            transitions.push((i, rule.name.clone(), j));
        }
    }
    let ts = AbstractTS { states, initial: 0, transitions };
    Ok((ts, counterexamples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condition::Polarity;
    use crate::cospan::Cospan;
    use crate::entailment::Budget;
    use crate::graph::Morphism;
    use crate::rules::tests::append_rule;

    fn lift_empty(g: &Graph) -> Cospan {
        Cospan::lift(Morphism::new(Graph::empty(), g.clone(), vec![], vec![]))
    }

    fn exists_pattern(g: &Graph) -> Condition {
        Condition::quantifier(Polarity::Existential, lift_empty(g), Condition::tt(g.clone()))
    }

    fn forbid_pattern(g: &Graph) -> Condition {
        Condition::quantifier(Polarity::Universal, lift_empty(g), Condition::ff(g.clone()))
    }

    fn two_predicates() -> PredicateSet {
        let init = forbid_pattern(&Graph::new(vec![0, 0], vec![(0, 1)]));
        let bad = exists_pattern(&Graph::new(vec![0, 0], vec![(0, 0), (0, 1)]));
        PredicateSet::new(vec![
            Predicate { name: "init".into(), source: PredicateSource::User, cond: init },
            Predicate { name: "bad".into(), source: PredicateSource::User, cond: bad },
        ])
    }

    #[test]
    fn gamma_of_assignments() {
        let p = two_predicates();
        let q = AbstractState::Assign(vec![Lit::Pos, Lit::Neg]);
        let c = gamma(&q, &p);
        let clean = Graph::new(vec![0], vec![(0, 0)]);
        let dirty = Graph::new(vec![0, 0], vec![(0, 0), (0, 1)]);
        assert!(satisfies(&clean, &c).unwrap());
        assert!(!satisfies(&dirty, &c).unwrap());
        assert!(gamma(&AbstractState::Bottom, &p).is_false());
        let top = AbstractState::Assign(vec![Lit::Unknown, Lit::Unknown]);
        assert!(gamma(&top, &p).is_true());
    }

    #[test]
    fn alpha_hat_of_init() {
        let p = two_predicates();
        let mut engine = Engine::new(Budget::default());
        let init = p.preds[0].cond.clone();
        let q = alpha_hat(&init, &p, &mut engine).unwrap();
        assert_eq!(q, AbstractState::Assign(vec![Lit::Pos, Lit::Neg]));
        // unsatisfiable condition abstracts to bottom
        let contradiction =
            conjoin(&p.preds[1].cond, &negate(&p.preds[1].cond)).unwrap();
        let qb = alpha_hat(&contradiction, &p, &mut engine).unwrap();
        assert_eq!(qb, AbstractState::Bottom);
    }

    #[test]
    fn alpha_sets_galois_with_gamma() {
        use crate::models::bounded_models;
        let p = two_predicates();
        // for explicit sets X: X ⊆ models(gamma(alpha_sets(X)))
        let universe = crate::models::enumerate_graphs(2, 3);
        let sets: Vec<Vec<Graph>> = vec![
            universe.iter().take(4).cloned().collect(),
            universe.iter().skip(3).take(5).cloned().collect(),
            vec![],
        ];
        for xs in sets {
            let q = alpha_sets(&xs, &p);
            let g = gamma(&q, &p);
            for x in &xs {
                assert!(satisfies(x, &g).unwrap(), "gamma(alpha(X)) must cover X");
            }
            // monotonicity of alpha along gamma: abstracting the models of
            // gamma(q) again yields something at least as coarse
            let gm = bounded_models(&g, 2, 3);
            if !gm.is_empty() {
                let q2 = alpha_sets(&gm, &p);
                if let (AbstractState::Assign(a), AbstractState::Assign(b)) = (&q, &q2) {
                    for (la, lb) in a.iter().zip(b) {
                        if *la != Lit::Unknown && *lb != Lit::Unknown {
                            assert_eq!(la, lb);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn explore_finds_shortest_counterexample() {
        let p = two_predicates();
        let system = ReactiveSystem { rules: vec![append_rule()] };
        let mut engine = Engine::new(Budget::default());
        let init = p.preds[0].cond.clone();
        let bad = p.preds[1].cond.clone();
        let (ts, ces) = explore(
            &system,
            &init,
            &bad,
            &p,
            &mut engine,
            ExploreLimits::default(),
            true,
        )
        .unwrap();
        assert_eq!(ces.len(), 1);
        // weak init: one abstract step already loses ¬bad
        assert_eq!(ces[0].trace, vec!["append".to_string()]);
        assert!(ts.states.len() >= 2);
    }
}
