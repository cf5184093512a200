//! Nested conditions over cospans.
//!
//! A condition is a tree: a universal node is the conjunction of
//! `forall f_i . A_i` over its children (empty = true), an existential node
//! the disjunction of `exists f_i . A_i` (empty = false). Each child arrow
//! starts at the node's root object; the child condition is rooted at the
//! arrow's codomain. A state (a graph `G`, read as the arrow with empty
//! outer and inner interface) satisfies `forall f.A` iff every factorization
//! of the state through `f` satisfies `A`, and dually for `exists`.

use crate::canon::canonical_order_colored;
use crate::category::pushout_complement;
use crate::cospan::{borrowed_context_squares, factorization, Cospan};
use crate::error::Error;
use crate::graph::{enumerate_monos, Graph, Morphism, PartialMap};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Polarity {
    Universal,
    Existential,
}

#[derive(Clone, PartialEq, Debug)]
pub struct Child {
    pub arrow: Cospan,
    pub sub: Condition,
}

#[derive(Clone, PartialEq, Debug)]
pub struct Condition {
    polarity: Polarity,
    root: Graph,
    children: Vec<Child>,
}

impl Condition {
    /// `true` at the given root: the empty conjunction.
    pub fn tt(root: Graph) -> Self {
        Condition { polarity: Polarity::Universal, root, children: Vec::new() }
    }

    /// `false` at the given root: the empty disjunction.
    pub fn ff(root: Graph) -> Self {
        Condition { polarity: Polarity::Existential, root, children: Vec::new() }
    }

    pub fn quantifier(polarity: Polarity, arrow: Cospan, sub: Condition) -> Self {
        assert_eq!(arrow.codomain(), &sub.root, "subcondition root must be the arrow codomain");
        Condition {
            polarity,
            root: arrow.domain().clone(),
            children: vec![Child { arrow, sub }],
        }
    }

    pub fn node(polarity: Polarity, root: Graph, children: Vec<Child>) -> Self {
        for c in &children {
            assert_eq!(c.arrow.domain(), &root);
            assert_eq!(c.arrow.codomain(), &c.sub.root);
        }
        Condition { polarity, root, children }
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn root(&self) -> &Graph {
        &self.root
    }

    pub fn children(&self) -> &[Child] {
        &self.children
    }

    pub fn is_true(&self) -> bool {
        self.polarity == Polarity::Universal && self.children.is_empty()
    }

    pub fn is_false(&self) -> bool {
        self.polarity == Polarity::Existential && self.children.is_empty()
    }
}

/// De Morgan negation: flip every quantifier.
pub fn negate(cond: &Condition) -> Condition {
    let polarity = match cond.polarity {
        Polarity::Universal => Polarity::Existential,
        Polarity::Existential => Polarity::Universal,
    };
    Condition {
        polarity,
        root: cond.root.clone(),
        children: cond
            .children
            .iter()
            .map(|c| Child { arrow: c.arrow.clone(), sub: negate(&c.sub) })
            .collect(),
    }
}

/// Conjunction: a universal node whose children are the conjuncts, each
/// non-universal conjunct wrapped under an identity arrow.
pub fn conjoin(a: &Condition, b: &Condition) -> Result<Condition, Error> {
    if a.root != b.root {
        return Err(Error::RootMismatch);
    }
    let mut children = Vec::new();
    for c in [a, b] {
        match c.polarity {
            Polarity::Universal => children.extend(c.children.iter().cloned()),
            Polarity::Existential => children.push(Child {
                arrow: Cospan::identity(&c.root),
                sub: c.clone(),
            }),
        }
    }
    Ok(Condition { polarity: Polarity::Universal, root: a.root.clone(), children })
}

/// Disjunction, dual to `conjoin`.
pub fn disjoin(a: &Condition, b: &Condition) -> Result<Condition, Error> {
    if a.root != b.root {
        return Err(Error::RootMismatch);
    }
    let mut children = Vec::new();
    for c in [a, b] {
        match c.polarity {
            Polarity::Existential => children.extend(c.children.iter().cloned()),
            Polarity::Universal => children.push(Child {
                arrow: Cospan::identity(&c.root),
                sub: c.clone(),
            }),
        }
    }
    Ok(Condition { polarity: Polarity::Existential, root: a.root.clone(), children })
}

/// Satisfaction of a closed condition (empty root) by a state graph.
pub fn satisfies(state: &Graph, cond: &Condition) -> Result<bool, Error> {
    if !cond.root.is_empty() {
        return Err(Error::RootMismatch);
    }
    let emb = Morphism::new(Graph::empty(), state.clone(), vec![], vec![]);
    Ok(satisfies_embedded(state, &emb, cond))
}

/// Satisfaction with an explicit embedding of the root object into the state.
/// Factorizations of the state through a child arrow are monos from the
/// arrow's middle extending the embedding such that the remaining context is
/// a graph (the pushout complement over the inner interface exists); the
/// recursion continues inside that context.
pub fn satisfies_embedded(state: &Graph, emb: &Morphism, cond: &Condition) -> bool {
    debug_assert_eq!(emb.source(), &cond.root);
    debug_assert_eq!(emb.target(), state);
    match cond.polarity {
        Polarity::Universal => cond
            .children
            .iter()
            .all(|c| factorizations(state, emb, &c.arrow, &c.sub, true)),
        Polarity::Existential => cond
            .children
            .iter()
            .any(|c| factorizations(state, emb, &c.arrow, &c.sub, false)),
    }
}

/// `all = true`: every factorization satisfies `sub`; `all = false`: some does.
fn factorizations(state: &Graph, emb: &Morphism, arrow: &Cospan, sub: &Condition, all: bool) -> bool {
    let mut fixed = PartialMap::default();
    for v in 0..arrow.domain().node_count() {
        fixed.nodes.insert(arrow.left().node(v), emb.node(v));
    }
    for e in 0..arrow.domain().edge_count() {
        fixed.edges.insert(arrow.left().edge(e), emb.edge(e));
    }
    for h in enumerate_monos(arrow.middle(), state, &fixed) {
        let Some((k_into_c, c_into_state)) = pushout_complement(arrow.right(), &h) else {
            continue;
        };
        let _ = c_into_state;
        let context = k_into_c.target().clone();
        let holds = satisfies_embedded(&context, &k_into_c, sub);
        if all && !holds {
            return false;
        }
        if !all && holds {
            return true;
        }
    }
    all
}

/// Moves a condition along an arrow `c` with the same domain: the result is
/// satisfied by `d` iff the original is satisfied by `c; d`. Computed with
/// borrowed-context squares: each child `(f, A)` contributes one child
/// `(residual, shift(A, context))` per square of `(f, c)`.
pub fn shift(cond: &Condition, c: &Cospan) -> Result<Condition, Error> {
    if c.domain() != &cond.root {
        return Err(Error::RootMismatch);
    }
    let mut children = Vec::new();
    for child in &cond.children {
        for sq in borrowed_context_squares(&child.arrow, c)? {
            let residual = sq.residual_arrow();
            let context = sq.context_arrow();
            let moved = shift(&child.sub, &context)?;
            children.push(Child { arrow: residual, sub: moved });
        }
    }
    Ok(Condition { polarity: cond.polarity, root: c.codomain().clone(), children })
}

/// Renames a condition along an isomorphism arrow (both legs iso), moving
/// the root from the arrow's codomain to its domain.
pub fn transport(cond: &Condition, iso_arrow: &Cospan) -> Condition {
    assert!(iso_arrow.is_iso_arrow());
    assert_eq!(iso_arrow.codomain(), &cond.root);
    let phi = iso_arrow.left().then(&iso_arrow.right().inverse());
    Condition {
        polarity: cond.polarity,
        root: iso_arrow.domain().clone(),
        children: cond
            .children
            .iter()
            .map(|c| Child {
                arrow: Cospan::new(phi.then(c.arrow.left()), c.arrow.right().clone()),
                sub: c.sub.clone(),
            })
            .collect(),
    }
}

/// Canonical byte key: equal keys imply equivalent conditions. Children are
/// keyed with root orderings induced along the arrows, then sorted, so the
/// key ignores child order and consistent graph renamings.
pub fn cond_key(cond: &Condition) -> Vec<u8> {
    let order = canonical_order_colored(
        &cond.root,
        &vec![0; cond.root.node_count()],
        &vec![0; cond.root.edge_count()],
    );
    cond_key_under(cond, &order)
}

fn cond_key_under(cond: &Condition, root_order: &[usize]) -> Vec<u8> {
    let mut child_keys: Vec<Vec<u8>> = cond
        .children
        .iter()
        .map(|c| {
            let mut k = c.arrow.canonical_key_under(root_order);
            let sub_order = c.arrow.codomain_order(root_order);
            k.push(0xfe);
            k.extend(cond_key_under(&c.sub, &sub_order));
            k
        })
        .collect();
    child_keys.sort();
    child_keys.dedup();
    let mut out = vec![match cond.polarity {
        Polarity::Universal => 0xAAu8,
        Polarity::Existential => 0xEE,
    }];
    for k in child_keys {
        out.push(0xfd);
        out.extend(k);
    }
    out
}

/// Sound, incomplete syntactic entailment used by `simplify` and as a fast
/// path in the prover. `true` guarantees `p` entails `q`.
pub fn structural_entails(p: &Condition, q: &Condition) -> bool {
    if p.root != q.root {
        return false;
    }
    if q.is_true() || p.is_false() {
        return true;
    }
    let order = canonical_order_colored(
        &p.root,
        &vec![0; p.root.node_count()],
        &vec![0; p.root.edge_count()],
    );
    if cond_key_under(p, &order) == cond_key_under(q, &order) {
        return true;
    }
    match (p.polarity, q.polarity) {
        (Polarity::Universal, Polarity::Universal) => q
            .children
            .iter()
            .all(|qc| p.children.iter().any(|pc| universal_covers(pc, qc))),
        (Polarity::Existential, Polarity::Existential) => p
            .children
            .iter()
            .all(|pc| q.children.iter().any(|qc| existential_covers(pc, qc))),
        _ => false,
    }
}

/// `forall g.B` entails `forall f.A` when `f = g; e` and `B` moved along `e`
/// entails `A`: every factorization through `f` extends one through `g`.
fn universal_covers(stronger: &Child, weaker: &Child) -> bool {
    let Some(e) = factorization(&stronger.arrow, &weaker.arrow) else {
        return false;
    };
    if stronger.sub.is_false() {
        return true;
    }
    match shift(&stronger.sub, &e) {
        Ok(moved) => structural_entails(&moved, &weaker.sub),
        Err(_) => false,
    }
}

/// `exists f.A` entails `exists g.B` when `f = g; e` and `A` entails `B`
/// moved along `e`.
fn existential_covers(stronger: &Child, weaker: &Child) -> bool {
    let Some(e) = factorization(&weaker.arrow, &stronger.arrow) else {
        return false;
    };
    if weaker.sub.is_true() {
        return true;
    }
    match shift(&weaker.sub, &e) {
        Ok(moved) => structural_entails(&stronger.sub, &moved),
        Err(_) => false,
    }
}

/// Equivalence-preserving cleanup: recursive simplification of children,
/// splicing of isomorphism arrows, constant folding, duplicate removal (up
/// to iso) and syntactic subsumption between siblings.
pub fn simplify(cond: &Condition) -> Condition {
    let pol = cond.polarity;
    let mut children: Vec<Child> = Vec::new();
    let mut collapsed = false;

    // push a simplified child, splicing iso arrows
    fn push(
        pol: Polarity,
        root: &Graph,
        arrow: Cospan,
        sub: Condition,
        out: &mut Vec<Child>,
        collapsed: &mut bool,
    ) {
        if *collapsed {
            return;
        }
        if arrow.is_iso_arrow() {
            let t = transport(&sub, &arrow);
            if t.polarity() == pol {
                for c in t.children {
                    push(pol, root, c.arrow, c.sub, out, collapsed);
                }
            } else if t.children().is_empty() {
                // opposite-polarity constant under an iso arrow collapses
                // the whole node (false in a conjunction, true in a
                // disjunction)
                *collapsed = true;
            } else {
                out.push(Child { arrow: Cospan::identity(root), sub: t });
            }
            return;
        }
        // neutral constants under a real quantifier
        match pol {
            Polarity::Universal if sub.is_true() => return,
            Polarity::Existential if sub.is_false() => return,
            _ => {}
        }
        out.push(Child { arrow, sub });
    }

    for c in &cond.children {
        let sub = simplify(&c.sub);
        push(pol, &cond.root, c.arrow.clone(), sub, &mut children, &mut collapsed);
        if collapsed {
            break;
        }
    }
    if collapsed {
        return match pol {
            Polarity::Universal => Condition::ff(cond.root.clone()),
            Polarity::Existential => Condition::tt(cond.root.clone()),
        };
    }

    // duplicate removal up to iso
    let root_order = canonical_order_colored(
        &cond.root,
        &vec![0; cond.root.node_count()],
        &vec![0; cond.root.edge_count()],
    );
    let mut seen = std::collections::BTreeSet::new();
    children.retain(|c| {
        let mut k = c.arrow.canonical_key_under(&root_order);
        k.push(0xfe);
        k.extend(cond_key_under(&c.sub, &c.arrow.codomain_order(&root_order)));
        seen.insert(k)
    });

    // sibling subsumption
    let n = children.len();
    let mut dropped = vec![false; n];
    for i in 0..n {
        for j in 0..n {
            if i == j || dropped[j] || dropped[i] {
                continue;
            }
            let j_covers_i = match pol {
                Polarity::Universal => universal_covers(&children[j], &children[i]),
                Polarity::Existential => existential_covers(&children[i], &children[j]),
            };
            if !j_covers_i {
                continue;
            }
            let i_covers_j = match pol {
                Polarity::Universal => universal_covers(&children[i], &children[j]),
                Polarity::Existential => existential_covers(&children[j], &children[i]),
            };
            if !i_covers_j || j < i {
                dropped[i] = true;
            }
        }
    }
    let children: Vec<Child> = children
        .into_iter()
        .zip(dropped)
        .filter_map(|(c, d)| if d { None } else { Some(c) })
        .collect();

    // a lone identity-quantified child is the condition itself
    if children.len() == 1 && children[0].arrow.is_iso_arrow() {
        return transport(&children[0].sub, &children[0].arrow);
    }

    Condition { polarity: pol, root: cond.root.clone(), children }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node() -> Graph {
        Graph::discrete(1)
    }

    fn lift_empty(g: &Graph) -> Cospan {
        Cospan::lift(Morphism::new(Graph::empty(), g.clone(), vec![], vec![]))
    }

    /// `exists (0 -> g <- g) . true`
    fn exists_pattern(g: &Graph) -> Condition {
        Condition::quantifier(Polarity::Existential, lift_empty(g), Condition::tt(g.clone()))
    }

    /// `forall (0 -> g <- interface) . false` with full interface
    fn forbid_pattern(g: &Graph) -> Condition {
        Condition::quantifier(Polarity::Universal, lift_empty(g), Condition::ff(g.clone()))
    }

    fn bad_pattern() -> Graph {
        // node 0 with a loop and an edge to node 1
        Graph::new(vec![0, 0], vec![(0, 0), (0, 1)])
    }

    #[test]
    fn constants() {
        let s = Graph::new(vec![0], vec![(0, 0)]);
        assert!(satisfies(&s, &Condition::tt(Graph::empty())).unwrap());
        assert!(!satisfies(&s, &Condition::ff(Graph::empty())).unwrap());
        assert!(satisfies(&Graph::empty(), &Condition::tt(Graph::empty())).unwrap());
    }

    #[test]
    fn existential_pattern_matching() {
        let bad = exists_pattern(&bad_pattern());
        let yes = Graph::new(vec![0, 0], vec![(0, 0), (0, 1)]);
        let no_edge = Graph::new(vec![0, 0], vec![(0, 0)]);
        let no_loop = Graph::new(vec![0, 0], vec![(0, 1)]);
        assert!(satisfies(&yes, &bad).unwrap());
        assert!(!satisfies(&no_edge, &bad).unwrap());
        assert!(!satisfies(&no_loop, &bad).unwrap());
        // larger host still matches
        let bigger = Graph::new(vec![0, 0, 0], vec![(0, 0), (0, 1), (1, 2)]);
        assert!(satisfies(&bigger, &bad).unwrap());
    }

    #[test]
    fn negation_flips() {
        let bad = exists_pattern(&bad_pattern());
        let not_bad = negate(&bad);
        let yes = Graph::new(vec![0, 0], vec![(0, 0), (0, 1)]);
        assert!(!satisfies(&yes, &not_bad).unwrap());
        assert!(satisfies(&Graph::empty(), &not_bad).unwrap());
        // double negation is syntactically the original
        assert_eq!(negate(&not_bad), bad);
    }

    #[test]
    fn conjunction_disjunction() {
        let a = exists_pattern(&Graph::new(vec![0], vec![(0, 0)]));
        let b = exists_pattern(&Graph::discrete(2));
        let both = conjoin(&a, &b).unwrap();
        let either = disjoin(&a, &b).unwrap();
        let loop_two = Graph::new(vec![0, 0], vec![(0, 0)]);
        let loop_one = Graph::new(vec![0], vec![(0, 0)]);
        assert!(satisfies(&loop_two, &both).unwrap());
        assert!(!satisfies(&loop_one, &both).unwrap());
        assert!(satisfies(&loop_one, &either).unwrap());
        assert!(!satisfies(&Graph::empty(), &either).unwrap());
    }

    #[test]
    fn nested_every_node_has_outgoing_edge() {
        // forall (0 -> x <- x) . exists (x -> x->y <- x,y) . true
        let n = node();
        let edge = Graph::new(vec![0, 0], vec![(0, 1)]);
        let inner_arrow = Cospan::new(
            Morphism::new(n.clone(), edge.clone(), vec![0], vec![]),
            Morphism::identity(&edge),
        );
        let inner = Condition::quantifier(
            Polarity::Existential,
            inner_arrow,
            Condition::tt(edge.clone()),
        );
        let cond = Condition::quantifier(Polarity::Universal, lift_empty(&n), inner);

        let cycle = Graph::new(vec![0, 0], vec![(0, 1), (1, 0)]);
        let path = Graph::new(vec![0, 0], vec![(0, 1)]);
        let looped = Graph::new(vec![0], vec![(0, 0)]);
        assert!(satisfies(&cycle, &cond).unwrap());
        assert!(!satisfies(&path, &cond).unwrap());
        // matching is injective: a loop is not an edge to a second node
        assert!(!satisfies(&looped, &cond).unwrap());
        assert!(satisfies(&Graph::empty(), &cond).unwrap());
    }

    #[test]
    fn shift_preserves_satisfaction() {
        // d satisfies shift(A, c) iff c;d satisfies A, checked pointwise for
        // closed c: shift Bad over "one node exists" and test on contexts.
        let bad = exists_pattern(&bad_pattern());
        let c = lift_empty(&node());
        let shifted = shift(&bad, &c).unwrap();
        assert_eq!(shifted.root(), &node());
        // context adding loop+edge at the designated node satisfies it
        let host = Graph::new(vec![0, 0], vec![(0, 0), (0, 1)]);
        let emb = Morphism::new(node(), host.clone(), vec![0], vec![]);
        assert!(satisfies_embedded(&host, &emb, &shifted));
        // bare single node does not
        let solo = node();
        let emb2 = Morphism::new(node(), solo.clone(), vec![0], vec![]);
        assert!(!satisfies_embedded(&solo, &emb2, &shifted));
    }

    #[test]
    fn simplify_constant_folding() {
        let root = Graph::empty();
        let tt = Condition::tt(root.clone());
        let ff = Condition::ff(root.clone());
        let a = exists_pattern(&node());
        // a ∧ true = a, a ∨ false = a
        let c1 = simplify(&conjoin(&a, &tt).unwrap());
        assert_eq!(cond_key(&c1), cond_key(&a));
        let c2 = simplify(&disjoin(&a, &ff).unwrap());
        assert_eq!(cond_key(&c2), cond_key(&a));
        // a ∧ false = false, a ∨ true = true
        assert!(simplify(&conjoin(&a, &ff).unwrap()).is_false());
        assert!(simplify(&disjoin(&a, &tt).unwrap()).is_true());
    }

    #[test]
    fn simplify_drops_duplicates_and_subsumed() {
        let a = forbid_pattern(&Graph::new(vec![0, 0], vec![(0, 1)]));
        let dup = simplify(&conjoin(&a, &a).unwrap());
        assert_eq!(dup.children().len(), 1);

        // forbidding an edge subsumes forbidding loop+edge
        let b = forbid_pattern(&bad_pattern());
        let merged = simplify(&conjoin(&a, &b).unwrap());
        assert_eq!(merged.children().len(), 1);
        assert_eq!(cond_key(&merged), cond_key(&a));
    }

    #[test]
    fn key_invariant_under_renaming() {
        let g1 = Graph::new(vec![0, 0, 0], vec![(0, 1)]);
        let g2 = Graph::new(vec![0, 0, 0], vec![(2, 0)]);
        assert_eq!(cond_key(&exists_pattern(&g1)), cond_key(&exists_pattern(&g2)));
        assert_ne!(cond_key(&exists_pattern(&g1)), cond_key(&forbid_pattern(&g1)));
    }
}
