//! Counterexample-guided abstraction refinement over the predicate
//! abstraction: explore, check abstract counterexamples for spuriousness
//! with weakest-precondition or strongest-postcondition chains, and refine
//! the predicate set with the chain conditions until the system is proved
//! safe, a concrete witness is found, or the budget runs out.

use std::collections::BTreeSet;
use std::time::Instant;

use crate::abstraction::{
    explore, AbstractTS, Counterexample, ExploreLimits, Predicate, PredicateSet,
    PredicateSource,
};
use crate::condition::{cond_key, negate, satisfies, Condition, Polarity};
use crate::entailment::{Budget, Engine, Stats, Verdict};
use crate::error::Error;
use crate::graph::Graph;
use crate::models::enumerate_graphs;
use crate::rules::{rule_apply_set, sp_trace, wp_trace, ReactiveSystem, Rule};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SpuriousMode {
    Wp,
    Sp,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub budget: Budget,
    pub max_refinements: usize,
    pub spurious_mode: SpuriousMode,
    /// split refinement conditions into one predicate per top-level conjunct
    pub split_conjuncts: bool,
    pub witness_nodes: usize,
    pub witness_edges: usize,
    pub explore_max_states: usize,
    /// treat states whose safety check times out as expandable instead of
    /// reporting them as counterexamples (gives up on a Safe verdict)
    pub skip_undetermined: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            budget: Budget::default(),
            max_refinements: 10,
            spurious_mode: SpuriousMode::Wp,
            split_conjuncts: false,
            witness_nodes: 5,
            witness_edges: 8,
            explore_max_states: 10_000,
            skip_undetermined: false,
        }
    }
}

#[derive(Clone, Debug)]
pub enum SpuriousnessResult {
    /// the abstract trace has no concrete counterpart; carries the chain of
    /// conditions to refine with
    Spurious(Vec<Condition>),
    /// a concrete initial graph that reaches a bad graph along the trace
    Real(Graph),
    Undetermined(String),
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Safe,
    Unsafe { trace: Vec<String>, witness: Graph },
    Inconclusive { reason: String },
}

#[derive(Debug)]
pub struct VerdictReport {
    pub outcome: Outcome,
    pub iterations: usize,
    pub predicates: PredicateSet,
    pub ts: Option<AbstractTS>,
    pub stats: Stats,
    pub wall_millis: u64,
}

/// Split a condition into its top-level conjuncts, if any. Only a universal
/// node with more than one child splits.
fn conjuncts(c: &Condition) -> Vec<Condition> {
    if c.polarity() == Polarity::Universal && c.children().len() > 1 {
        c.children()
            .iter()
            .map(|ch| {
                Condition::node(Polarity::Universal, c.root().clone(), vec![ch.clone()])
            })
            .collect()
    } else {
        vec![c.clone()]
    }
}

fn check_spurious(
    system: &ReactiveSystem,
    init: &Condition,
    bad: &Condition,
    ce: &Counterexample,
    config: &RunConfig,
    engine: &mut Engine,
) -> Result<SpuriousnessResult, Error> {
    let rules: Vec<&Rule> = ce
        .trace
        .iter()
        .map(|name| system.rule(name))
        .collect::<Result<_, _>>()?;
    let not_bad = negate(bad);
    if rules.is_empty() {
        // the initial abstract state itself fails the safety check
        return Ok(match engine.entails(init, &not_bad)? {
            Verdict::Proved => SpuriousnessResult::Spurious(vec![]),
            Verdict::Refuted(g) => SpuriousnessResult::Real(g),
            Verdict::Unknown(why) => SpuriousnessResult::Undetermined(why),
        });
    }
    match config.spurious_mode {
        SpuriousMode::Wp => {
            let chain = wp_trace(&rules, &not_bad)?;
            match engine.entails(init, &chain[0])? {
                Verdict::Proved => Ok(SpuriousnessResult::Spurious(chain)),
                Verdict::Refuted(_) => {
                    confirm_real(system, init, bad, &ce.trace, &chain[0], config)
                }
                Verdict::Unknown(why) => Ok(SpuriousnessResult::Undetermined(why)),
            }
        }
        SpuriousMode::Sp => {
            let chain = sp_trace(init, &rules)?;
            match engine.entails(chain.last().unwrap(), &not_bad)? {
                Verdict::Proved => Ok(SpuriousnessResult::Spurious(chain)),
                Verdict::Refuted(_) => {
                    let tt = Condition::tt(Graph::empty());
                    confirm_real(system, init, bad, &ce.trace, &tt, config)
                }
                Verdict::Unknown(why) => Ok(SpuriousnessResult::Undetermined(why)),
            }
        }
    }
}

/// Find a concrete initial graph violating `wp_cond` (the weakest condition
/// under which the trace stays safe) and replay the trace to confirm a bad
/// graph is reachable from it.
fn confirm_real(
    system: &ReactiveSystem,
    init: &Condition,
    bad: &Condition,
    trace: &[String],
    wp_cond: &Condition,
    config: &RunConfig,
) -> Result<SpuriousnessResult, Error> {
    // grow the bounds stepwise so small witnesses never pay for the full
    // (and potentially enormous) enumeration at the configured limits
    let mut checked = BTreeSet::new();
    let mut k = 1;
    loop {
        let nodes = k.min(config.witness_nodes);
        let edges = (2 * k).min(config.witness_edges);
        for g in enumerate_graphs(nodes, edges).iter() {
            if !checked.insert(crate::canon::canonical_key(g)) {
                continue;
            }
            if !satisfies(g, init).unwrap_or(false) || satisfies(g, wp_cond).unwrap_or(true) {
                continue;
            }
            let mut states = vec![g.clone()];
            for name in trace {
                states = rule_apply_set(&states, system.rule(name)?);
                if states.is_empty() {
                    break;
                }
            }
            if states.iter().any(|s| satisfies(s, bad).unwrap_or(false)) {
                return Ok(SpuriousnessResult::Real(g.clone()));
            }
        }
        if nodes == config.witness_nodes && edges == config.witness_edges {
            break;
        }
        k += 1;
    }
    Ok(SpuriousnessResult::Undetermined(
        "refuted abstract trace, but no concrete witness within the bound".into(),
    ))
}

/// Add the chain conditions as predicates, deduplicating against the
/// canonical keys of the existing set. Returns how many were added.
fn refine(
    preds: &mut PredicateSet,
    chain: &[Condition],
    source: PredicateSource,
    split: bool,
    counter: &mut usize,
) -> usize {
    let mut keys: BTreeSet<Vec<u8>> =
        preds.preds.iter().map(|p| cond_key(&p.cond)).collect();
    let prefix = match source {
        PredicateSource::Wp => "wp",
        PredicateSource::Sp => "sp",
        PredicateSource::User => "user",
    };
    let mut added = 0;
    for cond in chain {
        let pieces = if split { conjuncts(cond) } else { vec![cond.clone()] };
        for piece in pieces {
            if piece.is_true() || piece.is_false() {
                continue;
            }
            let key = cond_key(&piece);
            if keys.insert(key) {
                *counter += 1;
                preds.preds.push(Predicate {
                    name: format!("{}{}", prefix, counter),
                    source,
                    cond: piece,
                });
                added += 1;
            }
        }
    }
    added
}

pub fn run(
    system: &ReactiveSystem,
    init: &Condition,
    bad: &Condition,
    user_preds: Vec<Predicate>,
    config: &RunConfig,
) -> Result<VerdictReport, Error> {
    let start = Instant::now();
    let mut engine = Engine::new(config.budget);
    let not_bad = negate(bad);
    let report = |outcome, iterations, preds, ts, engine: &Engine| VerdictReport {
        outcome,
        iterations,
        predicates: preds,
        ts,
        stats: engine.stats,
        wall_millis: start.elapsed().as_millis() as u64,
    };

    // iteration 0: is the initial condition itself safe?
    match engine.entails(init, &not_bad)? {
        Verdict::Proved => {}
        Verdict::Refuted(g) => {
            let outcome = Outcome::Unsafe { trace: vec![], witness: g };
            return Ok(report(outcome, 0, PredicateSet::default(), None, &engine));
        }
        Verdict::Unknown(why) => {
            let outcome = Outcome::Inconclusive {
                reason: format!("initial safety check undetermined: {}", why),
            };
            return Ok(report(outcome, 0, PredicateSet::default(), None, &engine));
        }
    }

    let mut preds = PredicateSet::new(vec![
        Predicate { name: "init".into(), source: PredicateSource::User, cond: init.clone() },
        Predicate { name: "safe".into(), source: PredicateSource::User, cond: not_bad.clone() },
    ]);
    {
        let mut keys: BTreeSet<Vec<u8>> =
            preds.preds.iter().map(|p| cond_key(&p.cond)).collect();
        for p in user_preds {
            if keys.insert(cond_key(&p.cond)) {
                preds.preds.push(p);
            }
        }
    }

    let limits = ExploreLimits { max_states: config.explore_max_states };
    let mut counter = 0usize;
    for iteration in 1..=config.max_refinements {
        let (ts, ces) = explore(system, init, bad, &preds, &mut engine, limits, true)?;
        let ce = match ces.into_iter().next() {
            None => {
                return Ok(report(Outcome::Safe, iteration, preds, Some(ts), &engine));
            }
            Some(ce) => ce,
        };
        match check_spurious(system, init, bad, &ce, config, &mut engine)? {
            SpuriousnessResult::Real(witness) => {
                let outcome = Outcome::Unsafe { trace: ce.trace, witness };
                return Ok(report(outcome, iteration, preds, Some(ts), &engine));
            }
            SpuriousnessResult::Undetermined(why) => {
                if !config.skip_undetermined {
                    let outcome = Outcome::Inconclusive {
                        reason: format!("counterexample undetermined: {}", why),
                    };
                    return Ok(report(outcome, iteration, preds, Some(ts), &engine));
                }
                // fall through to refinement with the wp chain anyway
                let rules: Vec<&Rule> = ce
                    .trace
                    .iter()
                    .map(|n| system.rule(n))
                    .collect::<Result<_, _>>()?;
                let chain = wp_trace(&rules, &not_bad)?;
                if refine(&mut preds, &chain, PredicateSource::Wp, config.split_conjuncts, &mut counter) == 0 {
                    let outcome = Outcome::Inconclusive {
                        reason: "counterexample undetermined and no new predicates".into(),
                    };
                    return Ok(report(outcome, iteration, preds, Some(ts), &engine));
                }
            }
            SpuriousnessResult::Spurious(chain) => {
                let source = match config.spurious_mode {
                    SpuriousMode::Wp => PredicateSource::Wp,
                    SpuriousMode::Sp => PredicateSource::Sp,
                };
                if refine(&mut preds, &chain, source, config.split_conjuncts, &mut counter) == 0 {
                    let outcome = Outcome::Inconclusive {
                        reason: "spurious counterexample yielded no new predicates".into(),
                    };
                    return Ok(report(outcome, iteration, preds, Some(ts), &engine));
                }
            }
        }
    }
    let outcome = Outcome::Inconclusive {
        reason: format!("refinement limit {} reached", config.max_refinements),
    };
    Ok(report(outcome, config.max_refinements, preds, None, &engine))
}

/// Quick check used by the `Unsafe` witness path of the CLI: does `witness`
/// satisfy the initial condition and reach `bad` along `trace`?
pub fn validate_witness(
    system: &ReactiveSystem,
    init: &Condition,
    bad: &Condition,
    trace: &[String],
    witness: &Graph,
) -> Result<bool, Error> {
    if !satisfies(witness, init)? {
        return Ok(false);
    }
    let mut states = vec![witness.clone()];
    for name in trace {
        states = rule_apply_set(&states, system.rule(name)?);
    }
    for s in &states {
        if satisfies(s, bad)? {
            return Ok(true);
        }
    }
    Ok(states.is_empty() && trace.is_empty() && satisfies(witness, bad)?)
}
