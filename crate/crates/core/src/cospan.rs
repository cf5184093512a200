//! Cospans of graphs with injective legs, composed by pushout. These are the
//! arrows both of states/contexts and of the quantifiers inside conditions.

use crate::canon::{canonical_key_colored, canonical_order_colored};
use crate::category::{jointly_epi_overlaps, pullback, pushout, pushout_complement};
use crate::error::Error;
use crate::graph::{enumerate_monos, Graph, Morphism, PartialMap};

/// `A -> X <- B` with both legs injective. `A` is the domain (outer
/// interface), `B` the codomain (inner interface), `X` the middle graph.
#[derive(Clone, PartialEq, Debug)]
pub struct Cospan {
    left: Morphism,
    right: Morphism,
}

impl Cospan {
    pub fn new(left: Morphism, right: Morphism) -> Self {
        assert_eq!(left.target(), right.target(), "cospan legs must share the middle");
        assert!(left.is_mono() && right.is_mono(), "cospan legs must be injective");
        Cospan { left, right }
    }

    pub fn identity(a: &Graph) -> Self {
        Cospan { left: Morphism::identity(a), right: Morphism::identity(a) }
    }

    /// Lifts an injective morphism `A -> B` to the cospan `A -> B <- B`.
    pub fn lift(m: Morphism) -> Self {
        assert!(m.is_mono(), "lift requires an injective morphism");
        let id = Morphism::identity(m.target());
        Cospan { left: m, right: id }
    }

    pub fn domain(&self) -> &Graph {
        self.left.source()
    }

    pub fn codomain(&self) -> &Graph {
        self.right.source()
    }

    pub fn middle(&self) -> &Graph {
        self.left.target()
    }

    pub fn left(&self) -> &Morphism {
        &self.left
    }

    pub fn right(&self) -> &Morphism {
        &self.right
    }

    /// Sequential composition: the middle is the pushout of the inner legs.
    pub fn compose(&self, other: &Cospan) -> Result<Cospan, Error> {
        if self.codomain() != other.domain() {
            return Err(Error::InterfaceMismatch);
        }
        let (into_self, into_other) = pushout(&self.right, &other.left);
        Ok(Cospan {
            left: self.left.then(&into_self),
            right: other.right.then(&into_other),
        })
    }

    /// An isomorphism arrow: both legs are isomorphisms.
    pub fn is_iso_arrow(&self) -> bool {
        self.left.is_iso() && self.right.is_iso()
    }

    /// Equality as arrows: same endpoints and a middle isomorphism commuting
    /// with both legs.
    pub fn equal_up_to_iso(&self, other: &Cospan) -> bool {
        if self.domain() != other.domain() || self.codomain() != other.codomain() {
            return false;
        }
        let (m1, m2) = (self.middle(), other.middle());
        if m1.node_count() != m2.node_count() || m1.edge_count() != m2.edge_count() {
            return false;
        }
        let mut fixed = PartialMap::default();
        for v in 0..self.domain().node_count() {
            fixed.nodes.insert(self.left.node(v), other.left.node(v));
        }
        for e in 0..self.domain().edge_count() {
            fixed.edges.insert(self.left.edge(e), other.left.edge(e));
        }
        for v in 0..self.codomain().node_count() {
            let (from, to) = (self.right.node(v), other.right.node(v));
            if let Some(&prev) = fixed.nodes.get(&from) {
                if prev != to {
                    return false;
                }
            }
            fixed.nodes.insert(from, to);
        }
        for e in 0..self.codomain().edge_count() {
            let (from, to) = (self.right.edge(e), other.right.edge(e));
            if let Some(&prev) = fixed.edges.get(&from) {
                if prev != to {
                    return false;
                }
            }
            fixed.edges.insert(from, to);
        }
        enumerate_monos(m1, m2, &fixed)
            .into_iter()
            .any(|iso| iso.is_iso()
                && self.left.then(&iso) == *other.left()
                && self.right.then(&iso) == *other.right())
    }

    /// Canonical key of the middle decorated with the domain image (by
    /// position) and the codomain image (as a flag): keys are equal iff the
    /// cospans agree up to a middle isomorphism fixing the domain pointwise,
    /// allowing the codomain to be renamed along with it.
    pub fn canonical_key(&self) -> Vec<u8> {
        let order: Vec<usize> = (0..self.domain().node_count()).collect();
        self.canonical_key_under(&order)
    }

    /// Decorated middle colors: domain positions (under `domain_order`) in
    /// the high bits, codomain membership flags in the low bits.
    fn decorations(&self, domain_order: &[usize]) -> (Vec<u64>, Vec<u64>) {
        let mid = self.middle();
        let mut node_colors = vec![0u64; mid.node_count()];
        for (v, &img) in self.left.node_map().iter().enumerate() {
            node_colors[img] ^= (domain_order[v] as u64 + 1) << 24;
        }
        for &img in self.right.node_map() {
            node_colors[img] |= 1;
        }
        let mut edge_colors = vec![0u64; mid.edge_count()];
        for (e, &img) in self.left.edge_map().iter().enumerate() {
            edge_colors[img] ^= (domain_order.len() as u64 + e as u64 + 1) << 24;
        }
        for &img in self.right.edge_map() {
            edge_colors[img] |= 1;
        }
        (node_colors, edge_colors)
    }

    /// As `canonical_key` but with the domain ordered by `domain_order`
    /// (old index -> position), so keys are stable under a fixed root order.
    pub fn canonical_key_under(&self, domain_order: &[usize]) -> Vec<u8> {
        let (node_colors, edge_colors) = self.decorations(domain_order);
        canonical_key_colored(self.middle(), &node_colors, &edge_colors)
    }

    /// Canonical ordering of the codomain induced by the canonical middle
    /// ordering (used to key nested conditions consistently).
    pub fn codomain_order(&self, domain_order: &[usize]) -> Vec<usize> {
        let (node_colors, edge_colors) = self.decorations(domain_order);
        let mid_order = canonical_order_colored(self.middle(), &node_colors, &edge_colors);
        // rank codomain nodes by their canonical middle position
        let cod = self.codomain();
        let mut pairs: Vec<(usize, usize)> = (0..cod.node_count())
            .map(|v| (mid_order[self.right.node(v)], v))
            .collect();
        pairs.sort_unstable();
        let mut order = vec![0usize; cod.node_count()];
        for (pos, &(_, v)) in pairs.iter().enumerate() {
            order[v] = pos;
        }
        order
    }
}

/// A borrowed-context diagram for `ell: D -> I` against `a: D -> J`.
/// The outputs are the context arrow `c = I -> C <- K` (along which inner
/// conditions move) and the residual arrow `f = J -> F <- K` (the new
/// quantifier).
#[derive(Clone, Debug)]
pub struct BCSquare {
    /// apex of the jointly-epi overlay of the two middles
    pub gplus: Graph,
    pub l_into_gplus: Morphism,
    pub g_into_gplus: Morphism,
    pub i_into_c: Morphism,
    pub c_into_gplus: Morphism,
    pub j_into_f: Morphism,
    pub f_into_gplus: Morphism,
    pub k_into_c: Morphism,
    pub k_into_f: Morphism,
}

impl BCSquare {
    /// `I -> C <- K`
    pub fn context_arrow(&self) -> Cospan {
        // K embeds into C directly
        Cospan::new(self.i_into_c.clone(), self.k_into_c.clone())
    }

    /// `J -> F <- K`
    pub fn residual_arrow(&self) -> Cospan {
        Cospan::new(self.j_into_f.clone(), self.k_into_f.clone())
    }
}

/// Enumerates all borrowed-context squares for the pair `(ell, a)` of arrows
/// with common domain. For each jointly-epi overlay of the middles, the two
/// pushout complements must exist (otherwise the overlay is discarded) and
/// the inner interface `K` is the pullback of `C` and `F` over the apex.
pub fn borrowed_context_squares(ell: &Cospan, a: &Cospan) -> Result<Vec<BCSquare>, Error> {
    if ell.domain() != a.domain() {
        return Err(Error::RootMismatch);
    }
    let mut out = Vec::new();
    for overlay in jointly_epi_overlaps(ell.left(), a.left()) {
        let l_into_gplus = overlay.cocone_left;
        let g_into_gplus = overlay.cocone_right;
        let m_l = ell.right().then(&l_into_gplus); // not needed below, kept for clarity
        let _ = m_l;
        let Some((i_into_c, c_into_gplus)) = pushout_complement(ell.right(), &l_into_gplus)
        else {
            continue;
        };
        let Some((j_into_f, f_into_gplus)) = pushout_complement(a.right(), &g_into_gplus) else {
            continue;
        };
        let (k_into_c, k_into_f) = pullback(&c_into_gplus, &f_into_gplus);
        out.push(BCSquare {
            gplus: l_into_gplus.target().clone(),
            l_into_gplus,
            g_into_gplus,
            i_into_c,
            c_into_gplus,
            j_into_f,
            f_into_gplus,
            k_into_c,
            k_into_f,
        });
    }
    Ok(out)
}

/// Does `f` factor through `g`, i.e. is there an arrow `e` with `g; e`
/// equal to `f` up to iso? Both must share the domain.
pub fn factors_through(g: &Cospan, f: &Cospan) -> bool {
    factorization(g, f).is_some()
}

/// The witnessing arrow `e: cod(g) -> cod(f)` with `g; e ≅ f`, if any.
pub fn factorization(g: &Cospan, f: &Cospan) -> Option<Cospan> {
    if g.domain() != f.domain() {
        return None;
    }
    let mut fixed = PartialMap::default();
    for v in 0..g.domain().node_count() {
        fixed.nodes.insert(g.left().node(v), f.left().node(v));
    }
    for e in 0..g.domain().edge_count() {
        fixed.edges.insert(g.left().edge(e), f.left().edge(e));
    }
    for h in enumerate_monos(g.middle(), f.middle(), &fixed) {
        let Some((b_into_m, m_into_xf)) = pushout_complement(g.right(), &h) else {
            continue;
        };
        // f's inner leg must avoid the removed part, i.e. factor through M
        let mut m_node_pre = vec![usize::MAX; f.middle().node_count()];
        for (v, &img) in m_into_xf.node_map().iter().enumerate() {
            m_node_pre[img] = v;
        }
        let mut m_edge_pre = vec![usize::MAX; f.middle().edge_count()];
        for (e, &img) in m_into_xf.edge_map().iter().enumerate() {
            m_edge_pre[img] = e;
        }
        let mut node_map = Vec::with_capacity(f.codomain().node_count());
        let mut ok = true;
        for v in 0..f.codomain().node_count() {
            let p = m_node_pre[f.right().node(v)];
            if p == usize::MAX {
                ok = false;
                break;
            }
            node_map.push(p);
        }
        if !ok {
            continue;
        }
        let mut edge_map = Vec::with_capacity(f.codomain().edge_count());
        for e in 0..f.codomain().edge_count() {
            let p = m_edge_pre[f.right().edge(e)];
            if p == usize::MAX {
                ok = false;
                break;
            }
            edge_map.push(p);
        }
        if !ok {
            continue;
        }
        let right = Morphism::new(
            f.codomain().clone(),
            b_into_m.target().clone(),
            node_map,
            edge_map,
        );
        return Some(Cospan::new(b_into_m, right));
    }
    None
}
