//! Pushouts, pushout complements, pullbacks and jointly-epi overlaps in the
//! category of finite graphs. All constructions here assume injective input
//! morphisms, which keeps identification conditions trivial and makes
//! pushout complements unique when they exist.

use crate::canon::canonical_key_colored;
use crate::graph::{Graph, Morphism};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SquareKind {
    Pushout,
    Pullback,
    JointlyEpi,
    Commuting,
}

/// A commuting square: `span_left: D -> A`, `span_right: D -> B`,
/// `cocone_left: A -> P`, `cocone_right: B -> P`.
#[derive(Clone, Debug)]
pub struct Square {
    pub span_left: Morphism,
    pub span_right: Morphism,
    pub cocone_left: Morphism,
    pub cocone_right: Morphism,
    pub kind: SquareKind,
}

impl Square {
    pub fn commutes(&self) -> bool {
        self.span_left.source() == self.span_right.source()
            && self.cocone_left.target() == self.cocone_right.target()
            && self.span_left.then(&self.cocone_left) == self.span_right.then(&self.cocone_right)
    }

    /// The two bottom morphisms are jointly surjective.
    pub fn is_jointly_epi(&self) -> bool {
        let apex = self.cocone_left.target();
        let mut node_hit = vec![false; apex.node_count()];
        let mut edge_hit = vec![false; apex.edge_count()];
        for m in [&self.cocone_left, &self.cocone_right] {
            for &v in m.node_map() {
                node_hit[v] = true;
            }
            for &e in m.edge_map() {
                edge_hit[e] = true;
            }
        }
        node_hit.into_iter().all(|b| b) && edge_hit.into_iter().all(|b| b)
    }
}

/// Pushout of the span `f: D -> L`, `g: D -> G` (both injective).
/// Returns the injections `L -> P` and `G -> P`.
pub fn pushout(f: &Morphism, g: &Morphism) -> (Morphism, Morphism) {
    assert_eq!(f.source(), g.source(), "pushout span source mismatch");
    assert!(f.is_mono() && g.is_mono(), "pushout requires monos");
    let l = f.target();
    let gr = g.target();

    // preimage of g on nodes/edges of G
    let mut g_node_pre = vec![usize::MAX; gr.node_count()];
    for (d, &img) in g.node_map().iter().enumerate() {
        g_node_pre[img] = d;
    }
    let mut g_edge_pre = vec![usize::MAX; gr.edge_count()];
    for (d, &img) in g.edge_map().iter().enumerate() {
        g_edge_pre[img] = d;
    }

    let mut p = l.clone();
    let mut g_node_map = vec![usize::MAX; gr.node_count()];
    for v in 0..gr.node_count() {
        g_node_map[v] = if g_node_pre[v] != usize::MAX {
            f.node(g_node_pre[v])
        } else {
            p.add_node(gr.label(v))
        };
    }
    let mut g_edge_map = vec![usize::MAX; gr.edge_count()];
    for e in 0..gr.edge_count() {
        g_edge_map[e] = if g_edge_pre[e] != usize::MAX {
            f.edge(g_edge_pre[e])
        } else {
            p.add_edge(g_node_map[gr.source(e)], g_node_map[gr.target(e)])
        };
    }

    let into_l = Morphism::new(
        l.clone(),
        p.clone(),
        (0..l.node_count()).collect(),
        (0..l.edge_count()).collect(),
    );
    let into_g = Morphism::new(gr.clone(), p, g_node_map, g_edge_map);
    (into_l, into_g)
}

/// Pushout complement of `i: I -> L`, `m: L -> G` (both injective): the
/// subgraph `C` of `G` obtained by removing `m(L \ i(I))`, provided no
/// remaining edge dangles. Returns `(I -> C, C -> G)`.
pub fn pushout_complement(i: &Morphism, m: &Morphism) -> Option<(Morphism, Morphism)> {
    assert_eq!(i.target(), m.source(), "complement interface mismatch");
    assert!(i.is_mono() && m.is_mono(), "pushout complement requires monos");
    let l = m.source();
    let g = m.target();

    let mut keep_l_node = vec![false; l.node_count()];
    for &v in i.node_map() {
        keep_l_node[v] = true;
    }
    let mut keep_l_edge = vec![false; l.edge_count()];
    for &e in i.edge_map() {
        keep_l_edge[e] = true;
    }

    let mut del_node = vec![false; g.node_count()];
    for v in 0..l.node_count() {
        if !keep_l_node[v] {
            del_node[m.node(v)] = true;
        }
    }
    let mut del_edge = vec![false; g.edge_count()];
    for e in 0..l.edge_count() {
        if !keep_l_edge[e] {
            del_edge[m.edge(e)] = true;
        }
    }

    // dangling check
    for e in 0..g.edge_count() {
        if !del_edge[e] && (del_node[g.source(e)] || del_node[g.target(e)]) {
            return None;
        }
    }

    let mut node_remap = vec![usize::MAX; g.node_count()];
    let mut c = Graph::empty();
    for v in 0..g.node_count() {
        if !del_node[v] {
            node_remap[v] = c.add_node(g.label(v));
        }
    }
    let mut edge_remap = vec![usize::MAX; g.edge_count()];
    let mut c_to_g_nodes = Vec::new();
    for v in 0..g.node_count() {
        if !del_node[v] {
            c_to_g_nodes.push(v);
        }
    }
    let mut c_to_g_edges = Vec::new();
    for e in 0..g.edge_count() {
        if !del_edge[e] {
            edge_remap[e] = c.add_edge(node_remap[g.source(e)], node_remap[g.target(e)]);
            c_to_g_edges.push(e);
        }
    }

    let i_to_c = Morphism::new(
        i.source().clone(),
        c.clone(),
        i.node_map().iter().map(|&v| node_remap[m.node(v)]).collect(),
        i.edge_map().iter().map(|&e| edge_remap[m.edge(e)]).collect(),
    );
    let c_to_g = Morphism::new(c, g.clone(), c_to_g_nodes, c_to_g_edges);
    Some((i_to_c, c_to_g))
}

/// Pullback of the cospan `f: A -> X`, `g: B -> X` (both injective): the
/// intersection of the two images. Returns `(P -> A, P -> B)`.
pub fn pullback(f: &Morphism, g: &Morphism) -> (Morphism, Morphism) {
    assert_eq!(f.target(), g.target(), "pullback cospan target mismatch");
    assert!(f.is_mono() && g.is_mono(), "pullback requires monos");
    let a = f.source();
    let b = g.source();
    let x = f.target();

    let mut g_node_pre = vec![usize::MAX; x.node_count()];
    for (v, &img) in g.node_map().iter().enumerate() {
        g_node_pre[img] = v;
    }
    let mut g_edge_pre = vec![usize::MAX; x.edge_count()];
    for (e, &img) in g.edge_map().iter().enumerate() {
        g_edge_pre[img] = e;
    }

    let mut p = Graph::empty();
    let mut to_a_nodes = Vec::new();
    let mut to_b_nodes = Vec::new();
    let mut a_node_in_p = vec![usize::MAX; a.node_count()];
    for v in 0..a.node_count() {
        let img = f.node(v);
        if g_node_pre[img] != usize::MAX {
            a_node_in_p[v] = p.add_node(a.label(v));
            to_a_nodes.push(v);
            to_b_nodes.push(g_node_pre[img]);
        }
    }
    let mut to_a_edges = Vec::new();
    let mut to_b_edges = Vec::new();
    for e in 0..a.edge_count() {
        let img = f.edge(e);
        if g_edge_pre[img] != usize::MAX {
            p.add_edge(a_node_in_p[a.source(e)], a_node_in_p[a.target(e)]);
            to_a_edges.push(e);
            to_b_edges.push(g_edge_pre[img]);
        }
    }

    let to_a = Morphism::new(p.clone(), a.clone(), to_a_nodes, to_a_edges);
    let to_b = Morphism::new(p, b.clone(), to_b_nodes, to_b_edges);
    (to_a, to_b)
}

/// All jointly-epi completions of the span `f: D -> L`, `g: D -> G` with
/// injective legs, up to isomorphism of the apex commuting with both legs.
/// Each square overlays `L` and `G`, sharing `D` and optionally merging
/// elements outside the images of `D`.
pub fn jointly_epi_overlaps(f: &Morphism, g: &Morphism) -> Vec<Square> {
    assert_eq!(f.source(), g.source(), "overlap span source mismatch");
    assert!(f.is_mono() && g.is_mono(), "overlap requires monos");
    let l = f.target();
    let gr = g.target();

    let mut l_from_d = vec![usize::MAX; l.node_count()];
    for (d, &img) in f.node_map().iter().enumerate() {
        l_from_d[img] = d;
    }
    let mut l_edge_from_d = vec![usize::MAX; l.edge_count()];
    for (d, &img) in f.edge_map().iter().enumerate() {
        l_edge_from_d[img] = d;
    }
    let mut g_from_d = vec![usize::MAX; gr.node_count()];
    for (d, &img) in g.node_map().iter().enumerate() {
        g_from_d[img] = d;
    }
    let mut g_edge_from_d = vec![usize::MAX; gr.edge_count()];
    for (d, &img) in g.edge_map().iter().enumerate() {
        g_edge_from_d[img] = d;
    }

    let l_only_nodes: Vec<usize> =
        (0..l.node_count()).filter(|&v| l_from_d[v] == usize::MAX).collect();
    let g_only_nodes: Vec<usize> =
        (0..gr.node_count()).filter(|&v| g_from_d[v] == usize::MAX).collect();
    let l_only_edges: Vec<usize> =
        (0..l.edge_count()).filter(|&e| l_edge_from_d[e] == usize::MAX).collect();
    let g_only_edges: Vec<usize> =
        (0..gr.edge_count()).filter(|&e| g_edge_from_d[e] == usize::MAX).collect();

    let mut squares = Vec::new();
    let mut seen = std::collections::BTreeSet::new();

    // node matching: for each L-only node, either fresh or merged with an
    // unused G-only node of the same label
    let mut node_match: Vec<usize> = vec![usize::MAX; l.node_count()]; // L node -> G node
    let mut g_used = vec![false; gr.node_count()];
    enumerate_node_matchings(
        &l_only_nodes,
        0,
        l,
        gr,
        &g_only_nodes,
        &mut node_match,
        &mut g_used,
        &mut |node_match| {
            // edge matching on top of the node matching
            let mut edge_match: Vec<usize> = vec![usize::MAX; l.edge_count()];
            let mut ge_used = vec![false; gr.edge_count()];
            enumerate_edge_matchings(
                &l_only_edges,
                0,
                l,
                gr,
                &g_only_edges,
                f,
                g,
                &l_from_d,
                &g_from_d,
                node_match,
                &mut edge_match,
                &mut ge_used,
                &mut |edge_match| {
                    let sq = build_overlap(f, g, node_match, edge_match);
                    let key = overlap_key(&sq);
                    if seen.insert(key) {
                        squares.push(sq);
                    }
                },
            );
        },
    );
    squares
}

#[allow(clippy::too_many_arguments)]
fn enumerate_node_matchings(
    l_only: &[usize],
    idx: usize,
    l: &Graph,
    g: &Graph,
    g_only: &[usize],
    node_match: &mut Vec<usize>,
    g_used: &mut Vec<bool>,
    visit: &mut impl FnMut(&[usize]),
) {
    if idx == l_only.len() {
        visit(node_match);
        return;
    }
    let v = l_only[idx];
    // unmatched
    enumerate_node_matchings(l_only, idx + 1, l, g, g_only, node_match, g_used, visit);
    for &w in g_only {
        if g_used[w] || g.label(w) != l.label(v) {
            continue;
        }
        node_match[v] = w;
        g_used[w] = true;
        enumerate_node_matchings(l_only, idx + 1, l, g, g_only, node_match, g_used, visit);
        node_match[v] = usize::MAX;
        g_used[w] = false;
    }
}

#[allow(clippy::too_many_arguments)]
fn enumerate_edge_matchings(
    l_only: &[usize],
    idx: usize,
    l: &Graph,
    g: &Graph,
    g_only: &[usize],
    f: &Morphism,
    gm: &Morphism,
    l_from_d: &[usize],
    g_from_d: &[usize],
    node_match: &[usize],
    edge_match: &mut Vec<usize>,
    ge_used: &mut Vec<bool>,
    visit: &mut impl FnMut(&[usize]),
) {
    if idx == l_only.len() {
        visit(edge_match);
        return;
    }
    let e = l_only[idx];
    // unmatched
    enumerate_edge_matchings(
        l_only, idx + 1, l, g, g_only, f, gm, l_from_d, g_from_d, node_match, edge_match, ge_used,
        visit,
    );
    // a merged edge's endpoints must land on the same apex class
    let same_class = |lv: usize, gv: usize| -> bool {
        if l_from_d[lv] != usize::MAX {
            g_from_d[gv] == l_from_d[lv]
        } else {
            node_match[lv] == gv
        }
    };
    for &e2 in g_only {
        if ge_used[e2] {
            continue;
        }
        if !same_class(l.source(e), g.source(e2)) || !same_class(l.target(e), g.target(e2)) {
            continue;
        }
        edge_match[e] = e2;
        ge_used[e2] = true;
        enumerate_edge_matchings(
            l_only, idx + 1, l, g, g_only, f, gm, l_from_d, g_from_d, node_match, edge_match,
            ge_used, visit,
        );
        edge_match[e] = usize::MAX;
        ge_used[e2] = false;
    }
}

fn build_overlap(f: &Morphism, g: &Morphism, node_match: &[usize], edge_match: &[usize]) -> Square {
    let l = f.target();
    let gr = g.target();
    let mut g_node_pre = vec![usize::MAX; gr.node_count()];
    for (d, &img) in g.node_map().iter().enumerate() {
        g_node_pre[img] = d;
    }
    let mut g_edge_pre = vec![usize::MAX; gr.edge_count()];
    for (d, &img) in g.edge_map().iter().enumerate() {
        g_edge_pre[img] = d;
    }
    // L nodes first, then unmatched G-only nodes
    let mut apex = l.clone();
    let mut g_matched_to = vec![usize::MAX; gr.node_count()]; // G node -> apex via match
    for (lv, &gv) in node_match.iter().enumerate() {
        if gv != usize::MAX {
            g_matched_to[gv] = lv;
        }
    }
    let mut g_node_map = vec![usize::MAX; gr.node_count()];
    for v in 0..gr.node_count() {
        g_node_map[v] = if g_node_pre[v] != usize::MAX {
            f.node(g_node_pre[v])
        } else if g_matched_to[v] != usize::MAX {
            g_matched_to[v]
        } else {
            apex.add_node(gr.label(v))
        };
    }
    let mut g_edge_matched_to = vec![usize::MAX; gr.edge_count()];
    for (le, &ge) in edge_match.iter().enumerate() {
        if ge != usize::MAX {
            g_edge_matched_to[ge] = le;
        }
    }
    let mut g_edge_map = vec![usize::MAX; gr.edge_count()];
    for e in 0..gr.edge_count() {
        g_edge_map[e] = if g_edge_pre[e] != usize::MAX {
            f.edge(g_edge_pre[e])
        } else if g_edge_matched_to[e] != usize::MAX {
            g_edge_matched_to[e]
        } else {
            apex.add_edge(g_node_map[gr.source(e)], g_node_map[gr.target(e)])
        };
    }
    let into_l = Morphism::new(
        l.clone(),
        apex.clone(),
        (0..l.node_count()).collect(),
        (0..l.edge_count()).collect(),
    );
    let into_g = Morphism::new(gr.clone(), apex, g_node_map, g_edge_map);
    Square {
        span_left: f.clone(),
        span_right: g.clone(),
        cocone_left: into_l,
        cocone_right: into_g,
        kind: SquareKind::JointlyEpi,
    }
}

/// Key identifying an overlap square up to apex isomorphism commuting with
/// both embeddings.
fn overlap_key(sq: &Square) -> Vec<u8> {
    let apex = sq.cocone_left.target();
    let mut node_colors = vec![0u64; apex.node_count()];
    for (v, &img) in sq.cocone_left.node_map().iter().enumerate() {
        node_colors[img] ^= (v as u64 + 1) << 20;
    }
    for (v, &img) in sq.cocone_right.node_map().iter().enumerate() {
        node_colors[img] ^= v as u64 + 1;
    }
    let mut edge_colors = vec![0u64; apex.edge_count()];
    for (e, &img) in sq.cocone_left.edge_map().iter().enumerate() {
        edge_colors[img] ^= (e as u64 + 1) << 20;
    }
    for (e, &img) in sq.cocone_right.edge_map().iter().enumerate() {
        edge_colors[img] ^= e as u64 + 1;
    }
    canonical_key_colored(apex, &node_colors, &edge_colors)
}

/// `sq` is a pushout square: it commutes and its apex is isomorphic to the
/// computed pushout compatibly with the injections.
pub fn is_pushout(sq: &Square) -> bool {
    if !sq.commutes() {
        return false;
    }
    let (into_l, into_g) = pushout(&sq.span_left, &sq.span_right);
    iso_commuting(&into_l, &into_g, &sq.cocone_left, &sq.cocone_right)
}

/// `sq` is a pullback square (with the square read upside down: the span is
/// the computed pullback's pair, the cocone is the given cospan).
pub fn is_pullback(apex_to_a: &Morphism, apex_to_b: &Morphism, f: &Morphism, g: &Morphism) -> bool {
    if apex_to_a.then(f) != apex_to_b.then(g) {
        return false;
    }
    let (pa, pb) = pullback(f, g);
    // isomorphism between the two apexes commuting with both projections
    let p1 = apex_to_a.source();
    let p2 = pa.source();
    if p1.node_count() != p2.node_count() || p1.edge_count() != p2.edge_count() {
        return false;
    }
    let mut fixed = crate::graph::PartialMap::default();
    // projections to A are mono, so the iso is forced node by node
    let mut a_pre = vec![usize::MAX; f.source().node_count()];
    for (v, &img) in pa.node_map().iter().enumerate() {
        a_pre[img] = v;
    }
    for v in 0..p1.node_count() {
        let t = a_pre[apex_to_a.node(v)];
        if t == usize::MAX {
            return false;
        }
        fixed.nodes.insert(v, t);
    }
    let mut ae_pre = vec![usize::MAX; f.source().edge_count()];
    for (e, &img) in pa.edge_map().iter().enumerate() {
        ae_pre[img] = e;
    }
    for e in 0..p1.edge_count() {
        let t = ae_pre[apex_to_a.edge(e)];
        if t == usize::MAX {
            return false;
        }
        fixed.edges.insert(e, t);
    }
    crate::graph::enumerate_monos(p1, p2, &fixed)
        .into_iter()
        .any(|iso| iso.then(&pa) == *apex_to_a && iso.then(&pb) == *apex_to_b)
}

/// Finds an isomorphism between the targets of `(a1, b1)` and `(a2, b2)`
/// commuting with both. The pairs must be jointly epi for the search to be
/// cheap; this holds for pushouts of monos.
fn iso_commuting(a1: &Morphism, b1: &Morphism, a2: &Morphism, b2: &Morphism) -> bool {
    let p1 = a1.target();
    let p2 = a2.target();
    if p1.node_count() != p2.node_count() || p1.edge_count() != p2.edge_count() {
        return false;
    }
    // jointly-epi legs determine the candidate map completely
    let mut node_map = vec![usize::MAX; p1.node_count()];
    let mut edge_map = vec![usize::MAX; p1.edge_count()];
    for (src, dst) in [(a1, a2), (b1, b2)] {
        if src.source() != dst.source() {
            return false;
        }
        for v in 0..src.source().node_count() {
            let (from, to) = (src.node(v), dst.node(v));
            if node_map[from] != usize::MAX && node_map[from] != to {
                return false;
            }
            node_map[from] = to;
        }
        for e in 0..src.source().edge_count() {
            let (from, to) = (src.edge(e), dst.edge(e));
            if edge_map[from] != usize::MAX && edge_map[from] != to {
                return false;
            }
            edge_map[from] = to;
        }
    }
    if node_map.iter().any(|&v| v == usize::MAX) || edge_map.iter().any(|&e| e == usize::MAX) {
        return false;
    }
    let cand = Morphism::new(p1.clone(), p2.clone(), node_map, edge_map);
    cand.is_valid() && cand.is_iso()
}
