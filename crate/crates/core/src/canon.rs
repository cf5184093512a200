//! Canonical forms for graphs up to isomorphism.
//!
//! Colors are refined iteratively from (label, extra color, incident edge
//! profile); remaining ties are broken by trying every class-respecting
//! ordering and keeping the lexicographically smallest serialization.
//! Two graphs have equal canonical keys iff they are isomorphic (with the
//! supplied node/edge colors preserved).

use crate::graph::Graph;

/// Canonical byte key of a plain graph.
pub fn canonical_key(g: &Graph) -> Vec<u8> {
    canonical_key_colored(g, &vec![0; g.node_count()], &vec![0; g.edge_count()])
}

/// Canonical byte key of a graph with extra node/edge colors. Colors must be
/// isomorphism-invariant data (e.g. interface positions) for the key to be
/// meaningful.
pub fn canonical_key_colored(g: &Graph, node_colors: &[u64], edge_colors: &[u64]) -> Vec<u8> {
    canonical(g, node_colors, edge_colors).1
}

/// The node ordering (old index -> canonical position) realizing the key.
pub fn canonical_order_colored(g: &Graph, node_colors: &[u64], edge_colors: &[u64]) -> Vec<usize> {
    canonical(g, node_colors, edge_colors).0
}

pub fn are_isomorphic(a: &Graph, b: &Graph) -> bool {
    a.node_count() == b.node_count()
        && a.edge_count() == b.edge_count()
        && canonical_key(a) == canonical_key(b)
}

fn canonical(g: &Graph, node_colors: &[u64], edge_colors: &[u64]) -> (Vec<usize>, Vec<u8>) {
    let n = g.node_count();
    assert_eq!(node_colors.len(), n);
    assert_eq!(edge_colors.len(), g.edge_count());
    if n == 0 {
        let mut key = vec![0u8];
        key.extend((g.edge_count() as u64).to_be_bytes());
        return (Vec::new(), key);
    }

    // initial colors: rank of (extra color, label)
    let mut sig: Vec<(u64, u64)> = (0..n)
        .map(|v| (node_colors[v], g.label(v) as u64))
        .collect();
    let mut colors = rank(&sig.iter().map(|s| vec![s.0, s.1]).collect::<Vec<_>>());
    let _ = &mut sig;

    // refinement: append sorted incident-edge profiles until stable
    loop {
        let mut sigs: Vec<Vec<u64>> = Vec::with_capacity(n);
        for v in 0..n {
            let mut prof: Vec<u64> = Vec::new();
            for (e, &(s, t)) in g.edges().iter().enumerate() {
                if s == v {
                    prof.push(pack(0, edge_colors[e], colors[t]));
                }
                if t == v {
                    prof.push(pack(1, edge_colors[e], colors[s]));
                }
            }
            prof.sort_unstable();
            let mut sig = vec![colors[v]];
            sig.extend(prof);
            sigs.push(sig);
        }
        let next = rank(&sigs);
        if next == colors {
            break;
        }
        colors = next;
    }

    // group nodes by color, classes ascending by color
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let max_color = *colors.iter().max().unwrap();
    for c in 0..=max_color {
        let class: Vec<usize> = (0..n).filter(|&v| colors[v] == c).collect();
        if !class.is_empty() {
            classes.push(class);
        }
    }

    // try every class-respecting ordering, keep the minimal serialization
    let mut best_key: Option<Vec<u8>> = None;
    let mut best_order: Vec<usize> = Vec::new();
    let mut arrangement: Vec<Vec<usize>> = classes.iter().map(|c| c.clone()).collect();
    permute_classes(&mut arrangement, 0, &mut |arr| {
        let mut order = vec![0usize; n]; // old -> new
        let mut pos = 0;
        for class in arr {
            for &v in class {
                order[v] = pos;
                pos += 1;
            }
        }
        let key = serialize(g, node_colors, edge_colors, &order);
        if best_key.as_ref().map_or(true, |b| key < *b) {
            best_key = Some(key);
            best_order = order;
        }
    });
    (best_order, best_key.unwrap())
}

fn pack(dir: u64, ecolor: u64, ncolor: u64) -> u64 {
    dir.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ ecolor.wrapping_mul(0xc2b2_ae3d_27d4_eb4f)
        ^ ncolor.wrapping_add(0x1656_67b1)
}

/// Dense ranks of signatures: equal signatures get equal rank.
fn rank(sigs: &[Vec<u64>]) -> Vec<u64> {
    let mut sorted: Vec<&Vec<u64>> = sigs.iter().collect();
    sorted.sort();
    sorted.dedup();
    sigs.iter()
        .map(|s| sorted.binary_search(&s).unwrap() as u64)
        .collect()
}

fn permute_classes(
    arrangement: &mut Vec<Vec<usize>>,
    idx: usize,
    visit: &mut impl FnMut(&[Vec<usize>]),
) {
    if idx == arrangement.len() {
        visit(arrangement);
        return;
    }
    let class = arrangement[idx].clone();
    permute(&class, &mut Vec::new(), &mut vec![false; class.len()], &mut |perm| {
        arrangement[idx] = perm.to_vec();
        permute_classes(arrangement, idx + 1, visit);
    });
    arrangement[idx] = class;
}

fn permute(
    items: &[usize],
    acc: &mut Vec<usize>,
    used: &mut Vec<bool>,
    visit: &mut impl FnMut(&[usize]),
) {
    if acc.len() == items.len() {
        visit(acc);
        return;
    }
    for i in 0..items.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        acc.push(items[i]);
        permute(items, acc, used, visit);
        acc.pop();
        used[i] = false;
    }
}

fn serialize(g: &Graph, node_colors: &[u64], edge_colors: &[u64], order: &[usize]) -> Vec<u8> {
    let n = g.node_count();
    let mut out = Vec::with_capacity(16 + 8 * n);
    out.extend((n as u64).to_be_bytes());
    let mut by_pos: Vec<(u64, u64)> = vec![(0, 0); n];
    for v in 0..n {
        by_pos[order[v]] = (g.label(v) as u64, node_colors[v]);
    }
    for (l, c) in by_pos {
        out.extend(l.to_be_bytes());
        out.extend(c.to_be_bytes());
    }
    let mut edges: Vec<(u64, u64, u64)> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(s, t))| (order[s] as u64, order[t] as u64, edge_colors[e]))
        .collect();
    edges.sort_unstable();
    out.extend((edges.len() as u64).to_be_bytes());
    for (s, t, c) in edges {
        out.extend(s.to_be_bytes());
        out.extend(t.to_be_bytes());
        out.extend(c.to_be_bytes());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_relabelings_are_isomorphic() {
        let a = Graph::new(vec![0, 0, 0], vec![(0, 1), (1, 2), (2, 0)]);
        let b = Graph::new(vec![0, 0, 0], vec![(2, 1), (0, 2), (1, 0)]);
        assert!(are_isomorphic(&a, &b));
    }

    #[test]
    fn direction_matters() {
        let path = Graph::new(vec![0, 0, 0], vec![(0, 1), (1, 2)]);
        let fork = Graph::new(vec![0, 0, 0], vec![(1, 0), (1, 2)]);
        assert!(!are_isomorphic(&path, &fork));
    }

    #[test]
    fn multiplicity_matters() {
        let single = Graph::new(vec![0], vec![(0, 0)]);
        let double = Graph::new(vec![0], vec![(0, 0), (0, 0)]);
        assert!(!are_isomorphic(&single, &double));
    }

    #[test]
    fn labels_matter() {
        let a = Graph::new(vec![0, 1], vec![(0, 1)]);
        let b = Graph::new(vec![1, 0], vec![(0, 1)]);
        assert!(!are_isomorphic(&a, &b));
        let c = Graph::new(vec![1, 0], vec![(1, 0)]);
        assert!(are_isomorphic(&a, &c));
    }

    #[test]
    fn colors_distinguish() {
        let g = Graph::discrete(2);
        let k1 = canonical_key_colored(&g, &[1, 2], &[]);
        let k2 = canonical_key_colored(&g, &[2, 1], &[]);
        assert_eq!(k1, k2); // same colored graph up to iso
        let k3 = canonical_key_colored(&g, &[1, 1], &[]);
        assert_ne!(k1, k3);
    }

    #[test]
    fn order_realizes_key() {
        let g = Graph::new(vec![0, 0, 0], vec![(1, 2)]);
        let order = canonical_order_colored(&g, &[0, 0, 0], &[0]);
        // order is a permutation
        let mut seen = order.clone();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2]);
    }
}
