//! A budgeted, three-valued entailment prover for closed conditions.
//!
//! `entails(a, b)` decides whether every graph satisfying `a` satisfies `b`.
//! `Proved` and `Refuted` are absolute; `Unknown` only means the budget ran
//! out. The proof side refutes `a ∧ ¬b` with a small tableau: existential
//! disjunctions are branched on, every other fact is moved into the chosen
//! witness's context via `shift`, and branches close on explicit
//! contradictions (a pattern that is both required and forbidden at the same
//! interface). The refutation side scans bounded models, smallest first. The
//! two searches are interleaved on a fixed schedule, so outcomes are
//! deterministic for a given budget.

use std::time::{Duration, Instant};

use crate::condition::{
    cond_key, negate, satisfies, simplify, structural_entails, transport, Child, Condition,
    Polarity,
};
use crate::cospan::{factors_through, Cospan};
use crate::error::Error;
use crate::graph::Graph;
use crate::models::enumerate_graphs;

#[derive(Clone, PartialEq, Debug)]
pub enum Verdict {
    Proved,
    /// A graph satisfying the left side but not the right.
    Refuted(Graph),
    /// Budget exhausted; the reason is advisory only.
    Unknown(String),
}

impl Verdict {
    pub fn is_proved(&self) -> bool {
        matches!(self, Verdict::Proved)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Budget {
    pub wall_ms: u64,
    pub unfold_depth: u32,
    pub model_nodes: usize,
    pub model_edges: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { wall_ms: 10_000, unfold_depth: 3, model_nodes: 4, model_edges: 6 }
    }
}

/// Counters shared across a verification run.
#[derive(Clone, Copy, Debug, Default)]
pub struct Stats {
    pub entailment_calls: u64,
    pub unknown_results: u64,
}

pub struct Engine {
    pub budget: Budget,
    pub stats: Stats,
}

impl Engine {
    pub fn new(budget: Budget) -> Self {
        Engine { budget, stats: Stats::default() }
    }

    pub fn entails(&mut self, a: &Condition, b: &Condition) -> Result<Verdict, Error> {
        self.stats.entailment_calls += 1;
        let v = entails_inner(a, b, &self.budget)?;
        if matches!(v, Verdict::Unknown(_)) {
            self.stats.unknown_results += 1;
        }
        Ok(v)
    }

    /// Entailment in both directions; `Refuted` carries a graph on which
    /// the two conditions disagree.
    pub fn equivalent(&mut self, a: &Condition, b: &Condition) -> Result<Verdict, Error> {
        match self.entails(a, b)? {
            Verdict::Proved => self.entails(b, a),
            other => Ok(other),
        }
    }
}

/// One-shot helpers with a fresh engine.
pub fn entails(a: &Condition, b: &Condition, budget: &Budget) -> Result<Verdict, Error> {
    entails_inner(a, b, budget)
}

pub fn equivalent(a: &Condition, b: &Condition, budget: &Budget) -> Result<Verdict, Error> {
    Engine::new(*budget).equivalent(a, b)
}

/// Smallest bounded model of `a` (by node count, edge count, canonical key).
pub fn find_model(a: &Condition, max_nodes: usize, max_edges: usize) -> Option<Graph> {
    enumerate_graphs(max_nodes, max_edges)
        .iter()
        .find(|g| satisfies(g, a).unwrap_or(false))
        .cloned()
}

/// Entailment over the bounded universe only: no `Unknown`, but sound only
/// as a semantic approximation.
pub fn bounded_entails(a: &Condition, b: &Condition, max_nodes: usize, max_edges: usize) -> bool {
    enumerate_graphs(max_nodes, max_edges)
        .iter()
        .all(|g| !satisfies(g, a).unwrap_or(false) || satisfies(g, b).unwrap_or(false))
}

fn entails_inner(a: &Condition, b: &Condition, budget: &Budget) -> Result<Verdict, Error> {
    if a.root() != b.root() || !a.root().is_empty() {
        return Err(Error::RootMismatch);
    }
    let deadline = Instant::now() + Duration::from_millis(budget.wall_ms);
    let sa = simplify(a);
    let sb = simplify(b);

    // fast syntactic paths
    if sb.is_true() || sa.is_false() || structural_entails(&sa, &sb) {
        return Ok(Verdict::Proved);
    }
    if cond_key(&sa) == cond_key(&sb) {
        return Ok(Verdict::Proved);
    }

    let goal = vec![sa.clone(), simplify(&negate(&sb))];

    // interleave: shallow proofs, then small models, deeper proofs, all models
    for depth in 0..=budget.unfold_depth {
        if Instant::now() >= deadline {
            return Ok(Verdict::Unknown("wall budget exhausted".into()));
        }
        let mut ctx = ProofCtx { deadline, timed_out: false };
        if close(goal.clone(), depth, &mut ctx) {
            return Ok(Verdict::Proved);
        }
        if ctx.timed_out {
            return Ok(Verdict::Unknown("wall budget exhausted".into()));
        }
        if depth == 1 {
            // cheap refutation pass before deeper proof search
            let small = budget.model_nodes.min(2);
            if let Some(g) = search_counter_model(&sa, &sb, small, budget.model_edges, deadline) {
                return Ok(Verdict::Refuted(g));
            }
        }
    }
    if Instant::now() >= deadline {
        return Ok(Verdict::Unknown("wall budget exhausted".into()));
    }
    if let Some(g) =
        search_counter_model(&sa, &sb, budget.model_nodes, budget.model_edges, deadline)
    {
        return Ok(Verdict::Refuted(g));
    }
    if Instant::now() >= deadline {
        return Ok(Verdict::Unknown("wall budget exhausted".into()));
    }
    Ok(Verdict::Unknown("searches exhausted without a proof or counter-model".into()))
}

fn search_counter_model(
    a: &Condition,
    b: &Condition,
    max_nodes: usize,
    max_edges: usize,
    deadline: Instant,
) -> Option<Graph> {
    for (i, g) in enumerate_graphs(max_nodes, max_edges).iter().enumerate() {
        if i % 64 == 0 && Instant::now() >= deadline {
            return None;
        }
        if satisfies(g, a).unwrap_or(false) && !satisfies(g, b).unwrap_or(false) {
            return Some(g.clone());
        }
    }
    None
}

struct ProofCtx {
    deadline: Instant,
    timed_out: bool,
}

/// Tries to close the branch `conds` (a conjunction of conditions at a
/// common root) within `depth` existential unfoldings. `true` means the
/// branch is contradictory; `false` is inconclusive.
fn close(conds: Vec<Condition>, depth: u32, ctx: &mut ProofCtx) -> bool {
    if ctx.timed_out {
        return false;
    }
    if Instant::now() >= ctx.deadline {
        ctx.timed_out = true;
        return false;
    }

    // flatten into universal atoms and existential disjunctions
    let mut atoms: Vec<Child> = Vec::new(); // forall arrow . sub
    let mut disjunctions: Vec<Condition> = Vec::new();
    let mut work: Vec<Condition> = conds;
    while let Some(c) = work.pop() {
        match c.polarity() {
            Polarity::Universal => {
                for ch in c.children() {
                    if ch.arrow.is_iso_arrow() {
                        work.push(transport(&ch.sub, &ch.arrow));
                    } else if !ch.sub.is_true() {
                        atoms.push(ch.clone());
                    }
                }
            }
            Polarity::Existential => {
                if c.children().is_empty() {
                    return true; // explicit false
                }
                let children: Vec<Child> = c
                    .children()
                    .iter()
                    .filter(|ch| !ch.sub.is_false())
                    .cloned()
                    .collect();
                if children.is_empty() {
                    return true;
                }
                if children.len() == 1 && children[0].arrow.is_iso_arrow() {
                    work.push(transport(&children[0].sub, &children[0].arrow));
                    continue;
                }
                disjunctions.push(Condition::node(
                    Polarity::Existential,
                    c.root().clone(),
                    children,
                ));
            }
        }
    }

    // contradiction: a disjunction all of whose witnesses are forbidden by a
    // `forall g . false` atom they factor through
    let forbidden: Vec<&Cospan> = atoms
        .iter()
        .filter(|a| a.sub.is_false())
        .map(|a| &a.arrow)
        .collect();
    let mut pruned: Vec<Condition> = Vec::new();
    for d in &disjunctions {
        let children: Vec<Child> = d
            .children()
            .iter()
            .filter(|ch| !forbidden.iter().any(|g| factors_through(g, &ch.arrow)))
            .cloned()
            .collect();
        if children.is_empty() {
            return true;
        }
        pruned.push(Condition::node(Polarity::Existential, d.root().clone(), children));
    }
    let disjunctions = pruned;

    // a disjunction forced to a lone iso witness can be spliced in place;
    // renormalize with everything else kept
    if let Some(pos) = disjunctions
        .iter()
        .position(|d| d.children().len() == 1 && d.children()[0].arrow.is_iso_arrow())
    {
        let forced = &disjunctions[pos].children()[0];
        let root = disjunctions[pos].root().clone();
        let mut next = vec![transport(&forced.sub, &forced.arrow)];
        for (j, d) in disjunctions.iter().enumerate() {
            if j != pos {
                next.push(d.clone());
            }
        }
        next.extend(
            atoms
                .iter()
                .map(|a| Condition::node(Polarity::Universal, root.clone(), vec![a.clone()])),
        );
        return close(next, depth, ctx);
    }

    if depth == 0 || disjunctions.is_empty() {
        return false;
    }

    // nothing to contradict: no branch below can ever close
    let any_false = atoms.iter().any(|a| has_false(&a.sub) || a.sub.is_false())
        || disjunctions.iter().any(has_false_cond);
    if !any_false {
        return false;
    }

    // branch on each disjunction in a deterministic order until one closes
    let mut ordered: Vec<(Vec<u8>, Condition)> = disjunctions
        .iter()
        .map(|d| (cond_key(d), d.clone()))
        .collect();
    ordered.sort_by(|x, y| x.0.cmp(&y.0));
    'outer: for (idx, (_, d)) in ordered.iter().enumerate() {
        for witness in d.children() {
            let mut next: Vec<Condition> = vec![witness.sub.clone()];
            let mut ok = true;
            for (j, (_, other)) in ordered.iter().enumerate() {
                if j == idx {
                    continue;
                }
                match crate::condition::shift(other, &witness.arrow) {
                    Ok(s) => next.push(s),
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                for a in &atoms {
                    let one = Condition::node(
                        Polarity::Universal,
                        d.root().clone(),
                        vec![a.clone()],
                    );
                    match crate::condition::shift(&one, &witness.arrow) {
                        Ok(s) => next.push(s),
                        Err(_) => {
                            ok = false;
                            break;
                        }
                    }
                }
            }
            if !ok || !close(next, depth - 1, ctx) {
                continue 'outer;
            }
            if ctx.timed_out {
                return false;
            }
        }
        return true; // every witness of this disjunction led to a contradiction
    }
    false
}

fn has_false_cond(c: &Condition) -> bool {
    c.is_false() || c.children().iter().any(|ch| has_false(&ch.sub))
}

fn has_false(c: &Condition) -> bool {
    has_false_cond(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condition::{conjoin, Polarity};
    use crate::cospan::Cospan;
    use crate::graph::Morphism;

    fn lift_empty(g: &Graph) -> Cospan {
        Cospan::lift(Morphism::new(Graph::empty(), g.clone(), vec![], vec![]))
    }

    fn exists_pattern(g: &Graph) -> Condition {
        Condition::quantifier(Polarity::Existential, lift_empty(g), Condition::tt(g.clone()))
    }

    fn forbid_pattern(g: &Graph) -> Condition {
        Condition::quantifier(Polarity::Universal, lift_empty(g), Condition::ff(g.clone()))
    }

    fn bad() -> Condition {
        exists_pattern(&Graph::new(vec![0, 0], vec![(0, 0), (0, 1)]))
    }

    /// no edge between two distinct nodes
    fn init1() -> Condition {
        forbid_pattern(&Graph::new(vec![0, 0], vec![(0, 1)]))
    }

    /// init1 and no node with two loops
    fn init2() -> Condition {
        conjoin(&init1(), &forbid_pattern(&Graph::new(vec![0], vec![(0, 0), (0, 0)]))).unwrap()
    }

    #[test]
    fn trivial_verdicts() {
        let b = Budget::default();
        let t = Condition::tt(Graph::empty());
        let f = Condition::ff(Graph::empty());
        assert!(entails(&bad(), &t, &b).unwrap().is_proved());
        assert!(entails(&f, &bad(), &b).unwrap().is_proved());
        assert!(entails(&bad(), &bad(), &b).unwrap().is_proved());
    }

    #[test]
    fn pattern_conflicts_are_proved() {
        let b = Budget::default();
        // no-edges entails not-bad (bad needs an edge)
        let v = entails(&init1(), &negate(&bad()), &b).unwrap();
        assert!(v.is_proved(), "{v:?}");
        // stronger init too
        let v = entails(&init2(), &negate(&bad()), &b).unwrap();
        assert!(v.is_proved(), "{v:?}");
    }

    #[test]
    fn refutation_finds_smallest_model() {
        let b = Budget::default();
        // "a loop exists" does not entail "a double loop exists"
        let single = exists_pattern(&Graph::new(vec![0], vec![(0, 0)]));
        let double = exists_pattern(&Graph::new(vec![0], vec![(0, 0), (0, 0)]));
        match entails(&single, &double, &b).unwrap() {
            Verdict::Refuted(g) => {
                assert_eq!(g.node_count(), 1);
                assert_eq!(g.edge_count(), 1);
            }
            other => panic!("expected refutation, got {other:?}"),
        }
        // and the converse is proved
        assert!(entails(&double, &single, &b).unwrap().is_proved());
    }

    #[test]
    fn soundness_on_bounded_universe() {
        let b = Budget { wall_ms: 2_000, ..Budget::default() };
        let pats = [
            Graph::new(vec![0], vec![(0, 0)]),
            Graph::new(vec![0, 0], vec![(0, 1)]),
            Graph::discrete(2),
            Graph::new(vec![0, 0], vec![(0, 0), (0, 1)]),
        ];
        let mut conds: Vec<Condition> = Vec::new();
        for p in &pats {
            conds.push(exists_pattern(p));
            conds.push(forbid_pattern(p));
        }
        for x in &conds {
            for y in &conds {
                let v = entails(x, y, &b).unwrap();
                let semantic = bounded_entails(x, y, 3, 4);
                match v {
                    Verdict::Proved => assert!(semantic, "unsound proof {x:?} => {y:?}"),
                    Verdict::Refuted(g) => {
                        assert!(satisfies(&g, x).unwrap());
                        assert!(!satisfies(&g, y).unwrap());
                    }
                    Verdict::Unknown(_) => {}
                }
            }
        }
    }

    #[test]
    fn running_example_key_obligations() {
        use crate::rules::tests::append_rule;
        use crate::rules::{sp, wp};
        let budget = Budget::default();
        let rule = append_rule();
        let not_bad = negate(&bad());

        // w1 = weakest precondition of "not bad" under append
        let w1 = wp(&rule, &not_bad).unwrap();
        // the weak initial condition does not entail it (double loop breaks it)
        match entails(&init1(), &w1, &budget).unwrap() {
            Verdict::Refuted(g) => {
                assert_eq!(g.node_count(), 1);
                assert_eq!(g.edge_count(), 2);
            }
            other => panic!("expected refutation, got {other:?}"),
        }
        // the strengthened initial condition does
        assert!(entails(&init2(), &w1, &budget).unwrap().is_proved());
        // w1 is already a fixed point: wp(append, w1) is equivalent to w1
        let w2 = wp(&rule, &w1).unwrap();
        assert!(equivalent(&w2, &w1, &budget).unwrap().is_proved());
        assert!(entails(&init2(), &w2, &budget).unwrap().is_proved());

        // forward direction: one append step from init2 ∧ ¬bad stays safe
        let pre = conjoin(&init2(), &not_bad).unwrap();
        let post = sp(&pre, &rule).unwrap();
        assert!(entails(&post, &not_bad, &budget).unwrap().is_proved());
        assert!(entails(&post, &negate(&init2()), &budget).unwrap().is_proved());

        // with predicate w1 in the mix, the abstraction closes: the
        // successor of ¬init2 ∧ ¬bad ∧ w1 keeps ¬bad and w1
        let pre2 = conjoin(&conjoin(&negate(&init2()), &not_bad).unwrap(), &w1).unwrap();
        let post2 = sp(&pre2, &rule).unwrap();
        assert!(entails(&post2, &not_bad, &budget).unwrap().is_proved());
        assert!(entails(&post2, &w1, &budget).unwrap().is_proved());
        // and from init2 ∧ ¬bad ∧ w1 as well
        let pre3 = conjoin(&pre, &w1).unwrap();
        let post3 = sp(&pre3, &rule).unwrap();
        assert!(entails(&post3, &w1, &budget).unwrap().is_proved());
        assert!(entails(&post3, &not_bad, &budget).unwrap().is_proved());
    }

    #[test]
    fn budget_monotonicity() {
        let small = Budget { wall_ms: 10_000, unfold_depth: 1, model_nodes: 2, model_edges: 3 };
        let large = Budget::default();
        let pairs = [
            (init1(), negate(&bad())),
            (init2(), negate(&bad())),
            (bad(), init1()),
        ];
        for (x, y) in &pairs {
            let vs = entails(x, y, &small).unwrap();
            let vl = entails(x, y, &large).unwrap();
            match vs {
                Verdict::Proved => assert!(vl.is_proved()),
                Verdict::Refuted(_) => assert!(matches!(vl, Verdict::Refuted(_))),
                Verdict::Unknown(_) => {}
            }
        }
    }
}
