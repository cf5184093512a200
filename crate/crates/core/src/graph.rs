//! Finite directed multigraphs and their (injective) morphisms.

use std::collections::BTreeMap;

pub type NodeId = usize;
pub type EdgeId = usize;
pub type Label = u32;

/// A finite directed multigraph. Nodes are `0..node_count()`, edges are
/// `0..edge_count()`. Parallel edges and loops are allowed.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Graph {
    labels: Vec<Label>,
    edges: Vec<(NodeId, NodeId)>,
}

impl Graph {
    pub fn empty() -> Self {
        Graph::default()
    }

    /// `n` unlabelled nodes, no edges.
    pub fn discrete(n: usize) -> Self {
        Graph { labels: vec![0; n], edges: Vec::new() }
    }

    pub fn new(labels: Vec<Label>, edges: Vec<(NodeId, NodeId)>) -> Self {
        let n = labels.len();
        assert!(
            edges.iter().all(|&(s, t)| s < n && t < n),
            "edge endpoint out of range"
        );
        Graph { labels, edges }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, v: NodeId) -> Label {
        self.labels[v]
    }

    pub fn source(&self, e: EdgeId) -> NodeId {
        self.edges[e].0
    }

    pub fn target(&self, e: EdgeId) -> NodeId {
        self.edges[e].1
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn add_node(&mut self, label: Label) -> NodeId {
        self.labels.push(label);
        self.labels.len() - 1
    }

    pub fn add_edge(&mut self, s: NodeId, t: NodeId) -> EdgeId {
        assert!(s < self.node_count() && t < self.node_count());
        self.edges.push((s, t));
        self.edges.len() - 1
    }
}

/// A total graph morphism, stored with owned copies of its endpoints.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Morphism {
    source: Graph,
    target: Graph,
    node_map: Vec<NodeId>,
    edge_map: Vec<EdgeId>,
}

impl Morphism {
    pub fn new(source: Graph, target: Graph, node_map: Vec<NodeId>, edge_map: Vec<EdgeId>) -> Self {
        assert_eq!(node_map.len(), source.node_count());
        assert_eq!(edge_map.len(), source.edge_count());
        Morphism { source, target, node_map, edge_map }
    }

    pub fn identity(g: &Graph) -> Self {
        Morphism {
            source: g.clone(),
            target: g.clone(),
            node_map: (0..g.node_count()).collect(),
            edge_map: (0..g.edge_count()).collect(),
        }
    }

    pub fn source(&self) -> &Graph {
        &self.source
    }

    pub fn target(&self) -> &Graph {
        &self.target
    }

    pub fn node(&self, v: NodeId) -> NodeId {
        self.node_map[v]
    }

    pub fn edge(&self, e: EdgeId) -> EdgeId {
        self.edge_map[e]
    }

    pub fn node_map(&self) -> &[NodeId] {
        &self.node_map
    }

    pub fn edge_map(&self) -> &[EdgeId] {
        &self.edge_map
    }

    /// Checks totality, structure preservation and label preservation.
    pub fn is_valid(&self) -> bool {
        let in_range = self.node_map.iter().all(|&v| v < self.target.node_count())
            && self.edge_map.iter().all(|&e| e < self.target.edge_count());
        if !in_range {
            return false;
        }
        let labels_ok = (0..self.source.node_count())
            .all(|v| self.source.label(v) == self.target.label(self.node_map[v]));
        let edges_ok = (0..self.source.edge_count()).all(|e| {
            let img = self.edge_map[e];
            self.target.source(img) == self.node_map[self.source.source(e)]
                && self.target.target(img) == self.node_map[self.source.target(e)]
        });
        labels_ok && edges_ok
    }

    pub fn is_mono(&self) -> bool {
        injective(&self.node_map) && injective(&self.edge_map)
    }

    pub fn is_iso(&self) -> bool {
        self.is_mono()
            && self.node_map.len() == self.target.node_count()
            && self.edge_map.len() == self.target.edge_count()
    }

    /// `self` then `other`.
    pub fn then(&self, other: &Morphism) -> Morphism {
        assert_eq!(self.target, other.source, "composition endpoint mismatch");
        Morphism {
            source: self.source.clone(),
            target: other.target.clone(),
            node_map: self.node_map.iter().map(|&v| other.node_map[v]).collect(),
            edge_map: self.edge_map.iter().map(|&e| other.edge_map[e]).collect(),
        }
    }

    /// Inverse of an isomorphism.
    pub fn inverse(&self) -> Morphism {
        assert!(self.is_iso());
        let mut node_map = vec![0; self.target.node_count()];
        for (v, &img) in self.node_map.iter().enumerate() {
            node_map[img] = v;
        }
        let mut edge_map = vec![0; self.target.edge_count()];
        for (e, &img) in self.edge_map.iter().enumerate() {
            edge_map[img] = e;
        }
        Morphism {
            source: self.target.clone(),
            target: self.source.clone(),
            node_map,
            edge_map,
        }
    }
}

fn injective(map: &[usize]) -> bool {
    let mut seen = map.to_vec();
    seen.sort_unstable();
    seen.windows(2).all(|w| w[0] != w[1])
}

/// Partial assignment used to constrain mono enumeration.
#[derive(Clone, Debug, Default)]
pub struct PartialMap {
    pub nodes: BTreeMap<NodeId, NodeId>,
    pub edges: BTreeMap<EdgeId, EdgeId>,
}

/// All injective morphisms `pattern -> host` extending `fixed`, in a
/// deterministic order (nodes assigned ascending, candidates ascending).
pub fn enumerate_monos(pattern: &Graph, host: &Graph, fixed: &PartialMap) -> Vec<Morphism> {
    let n = pattern.node_count();
    let mut node_map = vec![usize::MAX; n];
    let mut used_nodes = vec![false; host.node_count()];
    for (&v, &img) in &fixed.nodes {
        if v >= n || img >= host.node_count() || used_nodes[img] {
            return Vec::new();
        }
        if pattern.label(v) != host.label(img) {
            return Vec::new();
        }
        node_map[v] = img;
        used_nodes[img] = true;
    }
    let mut out = Vec::new();
    assign_nodes(pattern, host, fixed, 0, &mut node_map, &mut used_nodes, &mut out);
    out
}

fn assign_nodes(
    pattern: &Graph,
    host: &Graph,
    fixed: &PartialMap,
    v: NodeId,
    node_map: &mut Vec<NodeId>,
    used: &mut Vec<bool>,
    out: &mut Vec<Morphism>,
) {
    if v == pattern.node_count() {
        let mut edge_map = vec![usize::MAX; pattern.edge_count()];
        let mut used_edges = vec![false; host.edge_count()];
        let mut ok = true;
        for (&e, &img) in &fixed.edges {
            if e >= pattern.edge_count() || img >= host.edge_count() || used_edges[img] {
                ok = false;
                break;
            }
            if host.source(img) != node_map[pattern.source(e)]
                || host.target(img) != node_map[pattern.target(e)]
            {
                ok = false;
                break;
            }
            edge_map[e] = img;
            used_edges[img] = true;
        }
        if ok {
            assign_edges(pattern, host, 0, node_map, &mut edge_map, &mut used_edges, out);
        }
        return;
    }
    if node_map[v] != usize::MAX {
        assign_nodes(pattern, host, fixed, v + 1, node_map, used, out);
        return;
    }
    for cand in 0..host.node_count() {
        if used[cand] || host.label(cand) != pattern.label(v) {
            continue;
        }
        node_map[v] = cand;
        used[cand] = true;
        assign_nodes(pattern, host, fixed, v + 1, node_map, used, out);
        node_map[v] = usize::MAX;
        used[cand] = false;
    }
}

fn assign_edges(
    pattern: &Graph,
    host: &Graph,
    e: EdgeId,
    node_map: &[NodeId],
    edge_map: &mut Vec<EdgeId>,
    used: &mut Vec<bool>,
    out: &mut Vec<Morphism>,
) {
    if e == pattern.edge_count() {
        out.push(Morphism {
            source: pattern.clone(),
            target: host.clone(),
            node_map: node_map.to_vec(),
            edge_map: edge_map.clone(),
        });
        return;
    }
    if edge_map[e] != usize::MAX {
        assign_edges(pattern, host, e + 1, node_map, edge_map, used, out);
        return;
    }
    let (s, t) = (node_map[pattern.source(e)], node_map[pattern.target(e)]);
    for cand in 0..host.edge_count() {
        if used[cand] || host.source(cand) != s || host.target(cand) != t {
            continue;
        }
        edge_map[e] = cand;
        used[cand] = true;
        assign_edges(pattern, host, e + 1, node_map, edge_map, used, out);
        edge_map[e] = usize::MAX;
        used[cand] = false;
    }
}

/// All (not necessarily injective) morphisms `pattern -> host`. Used by
/// test oracles checking universal properties.
pub fn enumerate_homs(pattern: &Graph, host: &Graph) -> Vec<Morphism> {
    let n = pattern.node_count();
    let mut out = Vec::new();
    let mut node_map = vec![0usize; n];
    fn nodes(
        pattern: &Graph,
        host: &Graph,
        v: usize,
        node_map: &mut Vec<usize>,
        out: &mut Vec<Morphism>,
    ) {
        if v == pattern.node_count() {
            let mut edge_map = vec![0usize; pattern.edge_count()];
            edges(pattern, host, 0, node_map, &mut edge_map, out);
            return;
        }
        for cand in 0..host.node_count() {
            if host.label(cand) != pattern.label(v) {
                continue;
            }
            node_map[v] = cand;
            nodes(pattern, host, v + 1, node_map, out);
        }
    }
    fn edges(
        pattern: &Graph,
        host: &Graph,
        e: usize,
        node_map: &[usize],
        edge_map: &mut Vec<usize>,
        out: &mut Vec<Morphism>,
    ) {
        if e == pattern.edge_count() {
            out.push(Morphism::new(
                pattern.clone(),
                host.clone(),
                node_map.to_vec(),
                edge_map.clone(),
            ));
            return;
        }
        let (s, t) = (node_map[pattern.source(e)], node_map[pattern.target(e)]);
        for cand in 0..host.edge_count() {
            if host.source(cand) != s || host.target(cand) != t {
                continue;
            }
            edge_map[e] = cand;
            edges(pattern, host, e + 1, node_map, edge_map, out);
        }
    }
    if n == 0 && pattern.edge_count() == 0 {
        return vec![Morphism::new(pattern.clone(), host.clone(), vec![], vec![])];
    }
    nodes(pattern, host, 0, &mut node_map, &mut out);
    out
}
