//! Bounded enumeration of graphs up to isomorphism, used for counter-model
//! search and as a semantic test oracle.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::canon::canonical_key;
use crate::condition::{satisfies, Condition};
use crate::graph::Graph;

fn cache() -> &'static Mutex<BTreeMap<(usize, usize), Arc<Vec<Graph>>>> {
    static CACHE: OnceLock<Mutex<BTreeMap<(usize, usize), Arc<Vec<Graph>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(BTreeMap::new()))
}

/// All graphs with at most `max_nodes` nodes and `max_edges` edges (parallel
/// edges counted individually), one representative per isomorphism class,
/// sorted by (node count, edge count, canonical key). Results are cached per
/// bound for the lifetime of the process.
pub fn enumerate_graphs(max_nodes: usize, max_edges: usize) -> Arc<Vec<Graph>> {
    if let Some(found) = cache().lock().unwrap().get(&(max_nodes, max_edges)) {
        return Arc::clone(found);
    }
    let mut reps: Vec<(usize, usize, Vec<u8>, Graph)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for n in 0..=max_nodes {
        // multisets over the n*n possible (source, target) pairs
        let pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|s| (0..n).map(move |t| (s, t))).collect();
        let mut counts = vec![0usize; pairs.len()];
        enumerate_multisets(&pairs, &mut counts, 0, max_edges, &mut |counts| {
            let mut edges = Vec::new();
            for (i, &c) in counts.iter().enumerate() {
                for _ in 0..c {
                    edges.push(pairs[i]);
                }
            }
            let g = Graph::new(vec![0; n], edges);
            let key = canonical_key(&g);
            if seen.insert(key.clone()) {
                reps.push((n, g.edge_count(), key, g));
            }
        });
    }
    reps.sort_by(|a, b| (a.0, a.1, &a.2).cmp(&(b.0, b.1, &b.2)));
    let result: Arc<Vec<Graph>> = Arc::new(reps.into_iter().map(|r| r.3).collect());
    cache()
        .lock()
        .unwrap()
        .insert((max_nodes, max_edges), Arc::clone(&result));
    result
}

fn enumerate_multisets(
    pairs: &[(usize, usize)],
    counts: &mut Vec<usize>,
    idx: usize,
    remaining: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if idx == pairs.len() {
        visit(counts);
        return;
    }
    for c in 0..=remaining {
        counts[idx] = c;
        enumerate_multisets(pairs, counts, idx + 1, remaining - c, visit);
    }
    counts[idx] = 0;
}

/// All bounded models of a closed condition, in enumeration order.
pub fn bounded_models(cond: &Condition, max_nodes: usize, max_edges: usize) -> Vec<Graph> {
    enumerate_graphs(max_nodes, max_edges)
        .iter()
        .filter(|g| satisfies(g, cond).unwrap_or(false))
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condition::{negate, Polarity};
    use crate::cospan::Cospan;
    use crate::graph::Morphism;

    #[test]
    fn small_universe_counts() {
        // up to 1 node, 2 edges: empty, node, loop, double loop
        assert_eq!(enumerate_graphs(1, 2).len(), 4);
        // 2 nodes, 1 edge: + two nodes, node+loop-on-one, edge
        assert_eq!(enumerate_graphs(2, 1).len(), 6);
    }

    #[test]
    fn models_of_true_and_false() {
        let all = enumerate_graphs(2, 2);
        assert_eq!(
            bounded_models(&Condition::tt(Graph::empty()), 2, 2).len(),
            all.len()
        );
        assert!(bounded_models(&Condition::ff(Graph::empty()), 2, 2).is_empty());
    }

    #[test]
    fn models_partition_under_negation() {
        let pat = Graph::new(vec![0], vec![(0, 0)]);
        let cond = Condition::quantifier(
            Polarity::Existential,
            Cospan::lift(Morphism::new(Graph::empty(), pat.clone(), vec![], vec![])),
            Condition::tt(pat),
        );
        let pos = bounded_models(&cond, 2, 2).len();
        let neg = bounded_models(&negate(&cond), 2, 2).len();
        assert_eq!(pos + neg, enumerate_graphs(2, 2).len());
    }
}
