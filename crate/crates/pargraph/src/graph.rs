//! Attributed graphs and their algebra: subgraph order, joinability,
//! meet, join, family union, disjoint deletion, morphisms, images and
//! isomorphism.
//!
//! Vertices and arrows carry finite *sets* of algebra values, which is
//! what makes unions of graphs total on joinable pairs and rewriting
//! free of gluing conditions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::sigma::{Algebra, EvalError, Term, evaluate};

/// Canonical identity of a matching: rule name plus a canonical encoding
/// of the item map and assignment. Stable across runs, independent of the
/// host, so derived items produced by equal matchings coincide.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MatchingId {
    pub rule: String,
    pub key: String,
}

impl fmt::Display for MatchingId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{{{}}}", self.rule, self.key)
    }
}

/// A graph item: a plain identifier, or an identifier derived from a rule
/// item and the matching that created it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ItemId {
    Plain(String),
    Derived { origin: String, matching: MatchingId },
}

impl ItemId {
    pub fn plain(name: impl Into<String>) -> Self {
        ItemId::Plain(name.into())
    }

    pub fn derived(origin: impl Into<String>, matching: MatchingId) -> Self {
        ItemId::Derived {
            origin: origin.into(),
            matching,
        }
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ItemId::Plain(s) => write!(f, "{s}"),
            ItemId::Derived { origin, matching } => write!(f, "{origin}@{matching}"),
        }
    }
}

/// A partial attribution: maps items to finite sets of carrier elements,
/// implicitly empty elsewhere.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Attribution(BTreeMap<ItemId, BTreeSet<Term>>);

impl Attribution {
    pub fn new() -> Self {
        Attribution(BTreeMap::new())
    }

    pub fn get(&self, item: &ItemId) -> BTreeSet<Term> {
        self.0.get(item).cloned().unwrap_or_default()
    }

    pub fn insert_all(&mut self, item: ItemId, terms: impl IntoIterator<Item = Term>) {
        let entry = self.0.entry(item.clone()).or_default();
        entry.extend(terms);
        // keep the map free of empty entries so Eq stays canonical
        if entry.is_empty() {
            self.0.remove(&item);
        }
    }

    pub fn union(&mut self, other: &Attribution) {
        for (item, terms) in &other.0 {
            self.insert_all(item.clone(), terms.iter().cloned());
        }
    }

    /// Pointwise set difference.
    pub fn minus(&self, other: &Attribution) -> Attribution {
        let mut out = Attribution::new();
        for (item, terms) in &self.0 {
            let rest: BTreeSet<Term> = terms.difference(&other.get(item)).cloned().collect();
            if !rest.is_empty() {
                out.0.insert(item.clone(), rest);
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.0.values().all(|s| s.is_empty())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ItemId, &BTreeSet<Term>)> {
        self.0.iter().filter(|(_, s)| !s.is_empty())
    }
}

impl FromIterator<(ItemId, BTreeSet<Term>)> for Attribution {
    fn from_iter<T: IntoIterator<Item = (ItemId, BTreeSet<Term>)>>(iter: T) -> Self {
        let mut out = Attribution::new();
        for (item, terms) in iter {
            out.insert_all(item, terms);
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("item `{0}` declared twice")]
    DuplicateItem(ItemId),
    #[error("`{0}` is both a node and an arrow")]
    NodeArrowOverlap(ItemId),
    #[error("arrow `{arrow}` ends at `{endpoint}`, which is not a node")]
    DanglingArrow { arrow: ItemId, endpoint: ItemId },
    #[error("attribute on unknown item `{0}`")]
    AttrOnMissingItem(ItemId),
    #[error("attribute {term} on `{item}` is not a carrier element of the graph's algebra")]
    AttrOutsideCarrier { item: ItemId, term: Term },
    #[error("graphs are not joinable: {0}")]
    NotJoinable(JoinabilityViolation),
    #[error("item `{0}` is not in the morphism's domain")]
    NotInDomain(ItemId),
    #[error("morphism is not injective on items: `{0}` and `{1}` share an image")]
    NotInjective(ItemId, ItemId),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// The first violated joinability clause, for error reporting.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JoinabilityViolation {
    #[error("the graphs have different algebras")]
    AlgebraMismatch,
    #[error("`{0}` is a node of one graph and an arrow of the other")]
    NodeArrowClash(ItemId),
    #[error("shared arrow `{arrow}` has sources `{left}` and `{right}`")]
    SourceDisagreement {
        arrow: ItemId,
        left: ItemId,
        right: ItemId,
    },
    #[error("shared arrow `{arrow}` has targets `{left}` and `{right}`")]
    TargetDisagreement {
        arrow: ItemId,
        left: ItemId,
        right: ItemId,
    },
}

/// A finite attributed graph over an algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributedGraph {
    nodes: BTreeSet<ItemId>,
    arrows: BTreeSet<ItemId>,
    src: BTreeMap<ItemId, ItemId>,
    tgt: BTreeMap<ItemId, ItemId>,
    algebra: Arc<Algebra>,
    attrs: BTreeMap<ItemId, BTreeSet<Term>>,
}

impl AttributedGraph {
    /// The empty graph over an algebra.
    pub fn empty(algebra: Arc<Algebra>) -> Self {
        AttributedGraph {
            nodes: BTreeSet::new(),
            arrows: BTreeSet::new(),
            src: BTreeMap::new(),
            tgt: BTreeMap::new(),
            algebra,
            attrs: BTreeMap::new(),
        }
    }

    pub fn builder(algebra: Arc<Algebra>) -> GraphBuilder {
        GraphBuilder {
            graph: AttributedGraph::empty(algebra),
            error: None,
        }
    }

    fn from_parts(
        nodes: BTreeSet<ItemId>,
        arrows: BTreeSet<ItemId>,
        src: BTreeMap<ItemId, ItemId>,
        tgt: BTreeMap<ItemId, ItemId>,
        algebra: Arc<Algebra>,
        attrs: BTreeMap<ItemId, BTreeSet<Term>>,
    ) -> Self {
        let mut attrs = attrs;
        attrs.retain(|_, s| !s.is_empty());
        let g = AttributedGraph {
            nodes,
            arrows,
            src,
            tgt,
            algebra,
            attrs,
        };
        debug_assert!(g.check_structure().is_ok(), "malformed graph constructed");
        g
    }

    fn check_structure(&self) -> Result<(), GraphError> {
        if let Some(x) = self.nodes.intersection(&self.arrows).next() {
            return Err(GraphError::NodeArrowOverlap(x.clone()));
        }
        for e in &self.arrows {
            for map in [&self.src, &self.tgt] {
                let endpoint = map.get(e).ok_or_else(|| GraphError::DanglingArrow {
                    arrow: e.clone(),
                    endpoint: e.clone(),
                })?;
                if !self.nodes.contains(endpoint) {
                    return Err(GraphError::DanglingArrow {
                        arrow: e.clone(),
                        endpoint: endpoint.clone(),
                    });
                }
            }
        }
        for (item, terms) in &self.attrs {
            if !self.nodes.contains(item) && !self.arrows.contains(item) {
                return Err(GraphError::AttrOnMissingItem(item.clone()));
            }
            for t in terms {
                if !self.algebra.admits(t) {
                    return Err(GraphError::AttrOutsideCarrier {
                        item: item.clone(),
                        term: t.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn nodes(&self) -> &BTreeSet<ItemId> {
        &self.nodes
    }

    pub fn arrows(&self) -> &BTreeSet<ItemId> {
        &self.arrows
    }

    pub fn items(&self) -> impl Iterator<Item = &ItemId> {
        self.nodes.iter().chain(self.arrows.iter())
    }

    pub fn item_count(&self) -> usize {
        self.nodes.len() + self.arrows.len()
    }

    pub fn contains_item(&self, x: &ItemId) -> bool {
        self.nodes.contains(x) || self.arrows.contains(x)
    }

    pub fn src(&self, arrow: &ItemId) -> Option<&ItemId> {
        self.src.get(arrow)
    }

    pub fn tgt(&self, arrow: &ItemId) -> Option<&ItemId> {
        self.tgt.get(arrow)
    }

    pub fn attrs(&self, item: &ItemId) -> BTreeSet<Term> {
        self.attrs.get(item).cloned().unwrap_or_default()
    }

    pub fn attrs_ref(&self, item: &ItemId) -> Option<&BTreeSet<Term>> {
        self.attrs.get(item)
    }

    /// The graph's attribution as a standalone value.
    pub fn attribution(&self) -> Attribution {
        Attribution(self.attrs.clone())
    }

    pub fn is_unlabeled(&self) -> bool {
        self.attrs.values().all(|s| s.is_empty())
    }

    /// Subgraph order: items included, identical adjacency on shared
    /// arrows, same algebra, attributes pointwise included.
    pub fn is_subgraph(&self, other: &AttributedGraph) -> bool {
        if self.algebra != other.algebra {
            return false;
        }
        if !self.nodes.is_subset(&other.nodes) || !self.arrows.is_subset(&other.arrows) {
            return false;
        }
        for e in &self.arrows {
            if self.src.get(e) != other.src.get(e) || self.tgt.get(e) != other.tgt.get(e) {
                return false;
            }
        }
        self.attrs.iter().all(|(x, terms)| {
            other
                .attrs
                .get(x)
                .map(|theirs| terms.is_subset(theirs))
                .unwrap_or_else(|| terms.is_empty())
        })
    }

    /// The first reason why `self` is not a subgraph of `other`, if any.
    pub fn subgraph_defect(&self, other: &AttributedGraph) -> Option<SubgraphDefect> {
        if self.algebra != other.algebra {
            return Some(SubgraphDefect::AlgebraMismatch);
        }
        for n in self.nodes.difference(&other.nodes) {
            return Some(SubgraphDefect::MissingItem(n.clone()));
        }
        for e in self.arrows.difference(&other.arrows) {
            return Some(SubgraphDefect::MissingItem(e.clone()));
        }
        for e in &self.arrows {
            if self.src.get(e) != other.src.get(e) || self.tgt.get(e) != other.tgt.get(e) {
                return Some(SubgraphDefect::AdjacencyMismatch(e.clone()));
            }
        }
        for (x, terms) in &self.attrs {
            let theirs = other.attrs(x);
            if let Some(t) = terms.difference(&theirs).next() {
                return Some(SubgraphDefect::AttrNotContained {
                    item: x.clone(),
                    term: t.clone(),
                });
            }
        }
        None
    }

    pub fn check_joinable(&self, other: &AttributedGraph) -> Result<(), JoinabilityViolation> {
        if self.algebra != other.algebra {
            return Err(JoinabilityViolation::AlgebraMismatch);
        }
        if let Some(x) = self.nodes.intersection(&other.arrows).next() {
            return Err(JoinabilityViolation::NodeArrowClash(x.clone()));
        }
        if let Some(x) = self.arrows.intersection(&other.nodes).next() {
            return Err(JoinabilityViolation::NodeArrowClash(x.clone()));
        }
        for e in self.arrows.intersection(&other.arrows) {
            let (ls, rs) = (&self.src[e], &other.src[e]);
            if ls != rs {
                return Err(JoinabilityViolation::SourceDisagreement {
                    arrow: e.clone(),
                    left: ls.clone(),
                    right: rs.clone(),
                });
            }
            let (lt, rt) = (&self.tgt[e], &other.tgt[e]);
            if lt != rt {
                return Err(JoinabilityViolation::TargetDisagreement {
                    arrow: e.clone(),
                    left: lt.clone(),
                    right: rt.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn joinable(&self, other: &AttributedGraph) -> bool {
        self.check_joinable(other).is_ok()
    }

    /// Componentwise intersection of two joinable graphs.
    pub fn meet(&self, other: &AttributedGraph) -> Result<AttributedGraph, GraphError> {
        self.check_joinable(other).map_err(GraphError::NotJoinable)?;
        let nodes: BTreeSet<_> = self.nodes.intersection(&other.nodes).cloned().collect();
        let arrows: BTreeSet<_> = self.arrows.intersection(&other.arrows).cloned().collect();
        let src = arrows
            .iter()
            .map(|e| (e.clone(), self.src[e].clone()))
            .collect();
        let tgt = arrows
            .iter()
            .map(|e| (e.clone(), self.tgt[e].clone()))
            .collect();
        let attrs = nodes
            .iter()
            .chain(arrows.iter())
            .filter_map(|x| {
                let mine = self.attrs.get(x)?;
                let theirs = other.attrs.get(x)?;
                let both: BTreeSet<Term> = mine.intersection(theirs).cloned().collect();
                (!both.is_empty()).then(|| (x.clone(), both))
            })
            .collect();
        Ok(AttributedGraph::from_parts(
            nodes,
            arrows,
            src,
            tgt,
            self.algebra.clone(),
            attrs,
        ))
    }

    /// Componentwise union of two joinable graphs.
    pub fn join(&self, other: &AttributedGraph) -> Result<AttributedGraph, GraphError> {
        self.check_joinable(other).map_err(GraphError::NotJoinable)?;
        let nodes: BTreeSet<_> = self.nodes.union(&other.nodes).cloned().collect();
        let arrows: BTreeSet<_> = self.arrows.union(&other.arrows).cloned().collect();
        let mut src = self.src.clone();
        let mut tgt = self.tgt.clone();
        for e in &other.arrows {
            src.entry(e.clone()).or_insert_with(|| other.src[e].clone());
            tgt.entry(e.clone()).or_insert_with(|| other.tgt[e].clone());
        }
        let mut attrs = self.attrs.clone();
        for (x, terms) in &other.attrs {
            attrs.entry(x.clone()).or_default().extend(terms.iter().cloned());
        }
        Ok(AttributedGraph::from_parts(
            nodes,
            arrows,
            src,
            tgt,
            self.algebra.clone(),
            attrs,
        ))
    }

    /// Union of a family of pairwise joinable graphs. The fallback algebra
    /// is used when the family is empty.
    pub fn join_family(
        graphs: &[&AttributedGraph],
        fallback_algebra: Arc<Algebra>,
    ) -> Result<AttributedGraph, GraphError> {
        for (i, g) in graphs.iter().enumerate() {
            for h in &graphs[i + 1..] {
                g.check_joinable(h).map_err(GraphError::NotJoinable)?;
            }
        }
        let mut acc = AttributedGraph::empty(
            graphs
                .first()
                .map(|g| g.algebra.clone())
                .unwrap_or(fallback_algebra),
        );
        for g in graphs {
            acc = acc.join(g)?;
        }
        Ok(acc)
    }

    /// The largest subgraph disjoint from the node set `v`, the arrow set
    /// `a` and the attribution `l`. Arrows lose their place when either
    /// endpoint is removed, even if they are not named in `a`.
    pub fn delete_disjoint(
        &self,
        v: &BTreeSet<ItemId>,
        a: &BTreeSet<ItemId>,
        l: &Attribution,
    ) -> AttributedGraph {
        let nodes: BTreeSet<_> = self.nodes.difference(v).cloned().collect();
        let arrows: BTreeSet<_> = self
            .arrows
            .iter()
            .filter(|e| {
                !a.contains(*e) && nodes.contains(&self.src[*e]) && nodes.contains(&self.tgt[*e])
            })
            .cloned()
            .collect();
        let src = arrows
            .iter()
            .map(|e| (e.clone(), self.src[e].clone()))
            .collect();
        let tgt = arrows
            .iter()
            .map(|e| (e.clone(), self.tgt[e].clone()))
            .collect();
        let attrs = nodes
            .iter()
            .chain(arrows.iter())
            .filter_map(|x| {
                let mine = self.attrs.get(x)?;
                let rest: BTreeSet<Term> = mine.difference(&l.get(x)).cloned().collect();
                (!rest.is_empty()).then(|| (x.clone(), rest))
            })
            .collect();
        AttributedGraph::from_parts(nodes, arrows, src, tgt, self.algebra.clone(), attrs)
    }

    /// The first witness that this graph is *not* disjoint from `v`, `a`,
    /// `l`, or `None` when it is disjoint.
    pub fn disjointness_witness(
        &self,
        v: &BTreeSet<ItemId>,
        a: &BTreeSet<ItemId>,
        l: &Attribution,
    ) -> Option<DisjointnessWitness> {
        self.disjointness_witnesses(v, a, l).into_iter().next()
    }

    /// Every surviving item and attribute that keeps this graph from
    /// being disjoint from `v`, `a`, `l`.
    pub fn disjointness_witnesses(
        &self,
        v: &BTreeSet<ItemId>,
        a: &BTreeSet<ItemId>,
        l: &Attribution,
    ) -> Vec<DisjointnessWitness> {
        let mut out = Vec::new();
        for x in self.nodes.intersection(v) {
            out.push(DisjointnessWitness::Node(x.clone()));
        }
        for x in self.arrows.intersection(a) {
            out.push(DisjointnessWitness::Arrow(x.clone()));
        }
        for x in self.items() {
            let mine = self.attrs(x);
            let clash: BTreeSet<Term> = mine.intersection(&l.get(x)).cloned().collect();
            if !clash.is_empty() {
                out.push(DisjointnessWitness::Attributes {
                    item: x.clone(),
                    values: clash,
                });
            }
        }
        out
    }

    /// Re-tags the graph with an equivalent algebra; callers guarantee
    /// every attribute is admitted by the new algebra.
    pub(crate) fn retag_algebra(&self, algebra: Arc<Algebra>) -> AttributedGraph {
        AttributedGraph::from_parts(
            self.nodes.clone(),
            self.arrows.clone(),
            self.src.clone(),
            self.tgt.clone(),
            algebra,
            self.attrs.clone(),
        )
    }

    /// Renames items through `map`; items not mentioned keep their id.
    pub fn rename_items(&self, map: &BTreeMap<ItemId, ItemId>) -> AttributedGraph {
        let rename = |x: &ItemId| map.get(x).cloned().unwrap_or_else(|| x.clone());
        AttributedGraph::from_parts(
            self.nodes.iter().map(&rename).collect(),
            self.arrows.iter().map(&rename).collect(),
            self.src
                .iter()
                .map(|(e, n)| (rename(e), rename(n)))
                .collect(),
            self.tgt
                .iter()
                .map(|(e, n)| (rename(e), rename(n)))
                .collect(),
            self.algebra.clone(),
            self.attrs
                .iter()
                .map(|(x, s)| (rename(x), s.clone()))
                .collect(),
        )
    }

    /// Searches for an isomorphism onto `other`: a bijective item map
    /// commuting with adjacency and mapping attribute sets exactly. The
    /// algebras must be identical (the attribute homomorphism is the
    /// identity).
    pub fn isomorphic(&self, other: &AttributedGraph) -> Option<GraphMorphism> {
        if self.algebra != other.algebra
            || self.nodes.len() != other.nodes.len()
            || self.arrows.len() != other.arrows.len()
        {
            return None;
        }
        let my_nodes: Vec<&ItemId> = self.nodes.iter().collect();
        let mut map: BTreeMap<ItemId, ItemId> = BTreeMap::new();
        let mut used: BTreeSet<ItemId> = BTreeSet::new();
        if !self.match_nodes(other, &my_nodes, 0, &mut map, &mut used) {
            return None;
        }
        Some(GraphMorphism::new(map, AttrHom::Identity))
    }

    fn degree(&self, n: &ItemId) -> (usize, usize) {
        let out = self.src.values().filter(|s| *s == n).count();
        let inc = self.tgt.values().filter(|t| *t == n).count();
        (out, inc)
    }

    fn match_nodes(
        &self,
        other: &AttributedGraph,
        order: &[&ItemId],
        i: usize,
        map: &mut BTreeMap<ItemId, ItemId>,
        used: &mut BTreeSet<ItemId>,
    ) -> bool {
        if i == order.len() {
            return self.match_arrows(other, map);
        }
        let n = order[i];
        let attrs = self.attrs(n);
        let deg = self.degree(n);
        for cand in &other.nodes {
            if used.contains(cand) || other.attrs(cand) != attrs || other.degree(cand) != deg {
                continue;
            }
            map.insert(n.clone(), cand.clone());
            used.insert(cand.clone());
            if self.match_nodes(other, order, i + 1, map, used) {
                return true;
            }
            map.remove(n);
            used.remove(cand);
        }
        false
    }

    fn match_arrows(&self, other: &AttributedGraph, map: &mut BTreeMap<ItemId, ItemId>) -> bool {
        let arrows: Vec<&ItemId> = self.arrows.iter().collect();
        let mut used: BTreeSet<ItemId> = BTreeSet::new();
        self.match_arrows_from(other, &arrows, 0, map, &mut used)
    }

    fn match_arrows_from(
        &self,
        other: &AttributedGraph,
        order: &[&ItemId],
        i: usize,
        map: &mut BTreeMap<ItemId, ItemId>,
        used: &mut BTreeSet<ItemId>,
    ) -> bool {
        if i == order.len() {
            return true;
        }
        let e = order[i];
        let want_src = map[&self.src[e]].clone();
        let want_tgt = map[&self.tgt[e]].clone();
        let attrs = self.attrs(e);
        for cand in &other.arrows {
            if used.contains(cand)
                || other.src[cand] != want_src
                || other.tgt[cand] != want_tgt
                || other.attrs(cand) != attrs
            {
                continue;
            }
            map.insert(e.clone(), cand.clone());
            used.insert(cand.clone());
            if self.match_arrows_from(other, order, i + 1, map, used) {
                return true;
            }
            map.remove(e);
            used.remove(cand);
        }
        false
    }
}

/// First reason a subgraph inclusion fails, for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubgraphDefect {
    AlgebraMismatch,
    MissingItem(ItemId),
    AdjacencyMismatch(ItemId),
    AttrNotContained { item: ItemId, term: Term },
}

impl fmt::Display for SubgraphDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgraphDefect::AlgebraMismatch => write!(f, "algebras differ"),
            SubgraphDefect::MissingItem(x) => write!(f, "item {x} is missing"),
            SubgraphDefect::AdjacencyMismatch(e) => {
                write!(f, "arrow {e} has different endpoints")
            }
            SubgraphDefect::AttrNotContained { item, term } => {
                write!(f, "attribute {term} of {item} is not contained")
            }
        }
    }
}

/// Survivor found when a graph fails to be disjoint from a deletion spec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DisjointnessWitness {
    Node(ItemId),
    Arrow(ItemId),
    Attributes { item: ItemId, values: BTreeSet<Term> },
}

impl fmt::Display for DisjointnessWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DisjointnessWitness::Node(x) => write!(f, "node {x} survived deletion"),
            DisjointnessWitness::Arrow(x) => write!(f, "arrow {x} survived deletion"),
            DisjointnessWitness::Attributes { item, values } => {
                let vals: Vec<String> = values.iter().map(|t| t.to_string()).collect();
                write!(
                    f,
                    "attribute(s) {{{}}} on {item} survived deletion",
                    vals.join(", ")
                )
            }
        }
    }
}

/// The attribute side of a morphism: identity between equal algebras, or
/// the Σ-homomorphism from a term algebra into a concrete algebra that an
/// assignment induces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttrHom {
    Identity,
    Eval {
        target: Arc<Algebra>,
        asg: crate::sigma::Assignment,
    },
}

impl AttrHom {
    pub fn apply(&self, term: &Term) -> Result<Term, EvalError> {
        match self {
            AttrHom::Identity => Ok(term.clone()),
            AttrHom::Eval { target, asg } => {
                let alg = target
                    .as_concrete()
                    .expect("evaluation homomorphisms target concrete algebras");
                Ok(Term::Lit(evaluate(term, alg, asg)?))
            }
        }
    }

    pub fn apply_set(&self, terms: &BTreeSet<Term>) -> Result<BTreeSet<Term>, EvalError> {
        terms.iter().map(|t| self.apply(t)).collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorphismViolation {
    #[error("item `{0}` has no image")]
    MissingImage(ItemId),
    #[error("node `{0}` maps to a non-node")]
    NodeToNonNode(ItemId),
    #[error("arrow `{0}` maps to a non-arrow")]
    ArrowToNonArrow(ItemId),
    #[error("morphism does not commute with adjacency at arrow `{0}`")]
    AdjacencyBroken(ItemId),
    #[error("attribute {term} of `{item}` maps outside the target attributes")]
    AttrNotContained { item: ItemId, term: Term },
    #[error("algebras are incompatible with the attribute homomorphism")]
    AlgebraMismatch,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A graph morphism presented by its item map plus attribute homomorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphMorphism {
    items: BTreeMap<ItemId, ItemId>,
    attr_hom: AttrHom,
}

impl GraphMorphism {
    pub fn new(items: BTreeMap<ItemId, ItemId>, attr_hom: AttrHom) -> Self {
        GraphMorphism { items, attr_hom }
    }

    /// The canonical injection of a subgraph into a supergraph.
    pub fn identity_on(graph: &AttributedGraph) -> Self {
        GraphMorphism {
            items: graph.items().map(|x| (x.clone(), x.clone())).collect(),
            attr_hom: AttrHom::Identity,
        }
    }

    pub fn items(&self) -> &BTreeMap<ItemId, ItemId> {
        &self.items
    }

    pub fn attr_hom(&self) -> &AttrHom {
        &self.attr_hom
    }

    pub fn apply(&self, item: &ItemId) -> Option<&ItemId> {
        self.items.get(item)
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.items.values().all(|v| seen.insert(v.clone()))
    }

    /// Checks the morphism laws from `from` into `to`.
    pub fn check(
        &self,
        from: &AttributedGraph,
        to: &AttributedGraph,
    ) -> Result<(), MorphismViolation> {
        match &self.attr_hom {
            AttrHom::Identity => {
                if from.algebra() != to.algebra() {
                    return Err(MorphismViolation::AlgebraMismatch);
                }
            }
            AttrHom::Eval { target, .. } => {
                let compatible = from.algebra().as_terms().is_some()
                    && target.as_concrete().is_some()
                    && **target == **to.algebra()
                    && from.algebra().signature() == to.algebra().signature();
                if !compatible {
                    return Err(MorphismViolation::AlgebraMismatch);
                }
            }
        }
        for n in from.nodes() {
            let img = self
                .items
                .get(n)
                .ok_or_else(|| MorphismViolation::MissingImage(n.clone()))?;
            if !to.nodes().contains(img) {
                return Err(MorphismViolation::NodeToNonNode(n.clone()));
            }
        }
        for e in from.arrows() {
            let img = self
                .items
                .get(e)
                .ok_or_else(|| MorphismViolation::MissingImage(e.clone()))?;
            if !to.arrows().contains(img) {
                return Err(MorphismViolation::ArrowToNonArrow(e.clone()));
            }
            let src_ok = to.src(img) == self.items.get(from.src(e).unwrap());
            let tgt_ok = to.tgt(img) == self.items.get(from.tgt(e).unwrap());
            if !src_ok || !tgt_ok {
                return Err(MorphismViolation::AdjacencyBroken(e.clone()));
            }
        }
        for x in from.items() {
            let img = &self.items[x];
            let target_attrs = to.attrs(img);
            for t in from.attrs(x).iter() {
                let mapped = self.attr_hom.apply(t)?;
                if !target_attrs.contains(&mapped) {
                    return Err(MorphismViolation::AttrNotContained {
                        item: x.clone(),
                        term: t.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// The image of a subgraph `f` of this morphism's domain: the smallest
    /// subgraph of the codomain through which the restriction factors.
    /// Requires the morphism to be injective on `f`'s items.
    pub fn image(
        &self,
        f: &AttributedGraph,
        target_algebra: Arc<Algebra>,
    ) -> Result<AttributedGraph, GraphError> {
        let mut seen: BTreeMap<&ItemId, &ItemId> = BTreeMap::new();
        for x in f.items() {
            let img = self
                .items
                .get(x)
                .ok_or_else(|| GraphError::NotInDomain(x.clone()))?;
            if let Some(prev) = seen.insert(img, x) {
                return Err(GraphError::NotInjective(prev.clone(), x.clone()));
            }
        }
        let map = |x: &ItemId| self.items[x].clone();
        let nodes: BTreeSet<_> = f.nodes().iter().map(&map).collect();
        let arrows: BTreeSet<_> = f.arrows().iter().map(&map).collect();
        let src = f
            .arrows()
            .iter()
            .map(|e| (map(e), map(f.src(e).unwrap())))
            .collect();
        let tgt = f
            .arrows()
            .iter()
            .map(|e| (map(e), map(f.tgt(e).unwrap())))
            .collect();
        let mut attrs: BTreeMap<ItemId, BTreeSet<Term>> = BTreeMap::new();
        for x in f.items() {
            let mapped = self.attr_hom.apply_set(&f.attrs(x))?;
            if !mapped.is_empty() {
                attrs.insert(map(x), mapped);
            }
        }
        Ok(AttributedGraph::from_parts(
            nodes,
            arrows,
            src,
            tgt,
            target_algebra,
            attrs,
        ))
    }
}

/// Incremental construction of an attributed graph; the first error wins
/// and is reported by [`GraphBuilder::build`].
pub struct GraphBuilder {
    graph: AttributedGraph,
    error: Option<GraphError>,
}

impl GraphBuilder {
    pub fn node(mut self, id: impl Into<String>, attrs: Vec<Term>) -> Self {
        self.add_node(ItemId::plain(id), attrs);
        self
    }

    pub fn add_node(&mut self, id: ItemId, attrs: Vec<Term>) {
        if self.error.is_some() {
            return;
        }
        if self.graph.contains_item(&id) {
            self.error = Some(GraphError::DuplicateItem(id));
            return;
        }
        self.graph.nodes.insert(id.clone());
        self.graph.attrs.insert(id, attrs.into_iter().collect());
    }

    pub fn arrow(
        mut self,
        id: impl Into<String>,
        src: impl Into<String>,
        tgt: impl Into<String>,
        attrs: Vec<Term>,
    ) -> Self {
        self.add_arrow(
            ItemId::plain(id),
            ItemId::plain(src),
            ItemId::plain(tgt),
            attrs,
        );
        self
    }

    pub fn add_arrow(&mut self, id: ItemId, src: ItemId, tgt: ItemId, attrs: Vec<Term>) {
        if self.error.is_some() {
            return;
        }
        if self.graph.contains_item(&id) {
            self.error = Some(GraphError::DuplicateItem(id));
            return;
        }
        self.graph.arrows.insert(id.clone());
        self.graph.src.insert(id.clone(), src);
        self.graph.tgt.insert(id.clone(), tgt);
        self.graph.attrs.insert(id, attrs.into_iter().collect());
    }

    pub fn build(self) -> Result<AttributedGraph, GraphError> {
        if let Some(e) = self.error {
            return Err(e);
        }
        self.graph.check_structure()?;
        let mut graph = self.graph;
        graph.attrs.retain(|_, s| !s.is_empty());
        Ok(graph)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigma::{Carrier, ConcreteAlgebra, Signature, SortKind, Value};
    use crate::testkit::{int, sym};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::collections::BTreeMap;

    fn two_value_algebra() -> Arc<Algebra> {
        let mut sig = Signature::new("s");
        sig.add_sort("c", SortKind::Finite).unwrap();
        let carriers = BTreeMap::from([(
            "c".to_string(),
            Carrier::Finite(["p".to_string(), "q".to_string()].into()),
        )]);
        Arc::new(Algebra::Concrete(
            ConcreteAlgebra::new("A", Arc::new(sig), carriers, BTreeMap::new()).unwrap(),
        ))
    }

    fn v(name: &str) -> Term {
        sym("c", name)
    }

    /// The two-node picture: H with x, y|1 and one arrow f is a subgraph
    /// of G with x|1, y|0,1, z and arrows f, g|0.
    #[test]
    fn subgraph_picture() {
        let alg = crate::testkit::swap().algebra;
        let h = AttributedGraph::builder(alg.clone())
            .node("x", vec![])
            .node("y", vec![int(1)])
            .arrow("f", "x", "y", vec![])
            .build()
            .unwrap();
        let g = AttributedGraph::builder(alg)
            .node("x", vec![int(1)])
            .node("y", vec![int(0), int(1)])
            .node("z", vec![])
            .arrow("f", "x", "y", vec![])
            .arrow("g", "x", "y", vec![int(0)])
            .build()
            .unwrap();
        assert!(h.is_subgraph(&g));
        assert!(g.is_subgraph(&g), "reflexivity");
        assert!(!g.is_subgraph(&h));
    }

    #[test]
    fn joinability_cases() {
        let alg = two_value_algebra();
        let g = AttributedGraph::builder(alg.clone())
            .node("x", vec![v("p")])
            .node("y", vec![])
            .arrow("e", "x", "y", vec![])
            .build()
            .unwrap();
        // any two subgraphs of g are joinable
        let h1 = g.delete_disjoint(&[ItemId::plain("y")].into(), &BTreeSet::new(), &Attribution::new());
        let h2 = g.delete_disjoint(&BTreeSet::new(), &[ItemId::plain("e")].into(), &Attribution::new());
        assert!(h1.joinable(&h2));
        assert!(g.joinable(&g));

        // an arrow of one named like a node of the other
        let clash = AttributedGraph::builder(alg.clone())
            .node("a", vec![])
            .node("b", vec![])
            .arrow("x", "a", "b", vec![])
            .build()
            .unwrap();
        assert!(matches!(
            g.check_joinable(&clash),
            Err(JoinabilityViolation::NodeArrowClash(_))
        ));

        // shared arrow with different endpoints
        let twisted = AttributedGraph::builder(alg)
            .node("x", vec![])
            .node("y", vec![])
            .arrow("e", "y", "x", vec![])
            .build()
            .unwrap();
        assert!(matches!(
            g.check_joinable(&twisted),
            Err(JoinabilityViolation::SourceDisagreement { .. })
        ));
    }

    /// The final union of the swap example: the deletion remainder joined
    /// with both right-hand-side images.
    #[test]
    fn join_family_swap_pieces() {
        let alg = crate::testkit::swap().algebra;
        let remainder = AttributedGraph::builder(alg.clone())
            .node("x", vec![sym("ident", "a")])
            .node("y", vec![sym("ident", "b")])
            .build()
            .unwrap();
        let rimg1 = AttributedGraph::builder(alg.clone())
            .node("x", vec![sym("ident", "a"), int(-1)])
            .build()
            .unwrap();
        let rimg2 = AttributedGraph::builder(alg.clone())
            .node("y", vec![sym("ident", "b"), int(1)])
            .build()
            .unwrap();
        let joined =
            AttributedGraph::join_family(&[&remainder, &rimg1, &rimg2], alg.clone()).unwrap();
        let expected = AttributedGraph::builder(alg)
            .node("x", vec![sym("ident", "a"), int(-1)])
            .node("y", vec![sym("ident", "b"), int(1)])
            .build()
            .unwrap();
        assert_eq!(joined, expected);
    }

    #[test]
    fn meet_and_join_idempotent() {
        let alg = two_value_algebra();
        let g = AttributedGraph::builder(alg)
            .node("x", vec![v("p")])
            .node("y", vec![])
            .arrow("e", "x", "y", vec![v("q")])
            .build()
            .unwrap();
        assert_eq!(g.join(&g).unwrap(), g);
        assert_eq!(g.meet(&g).unwrap(), g);
    }

    #[test]
    fn meet_of_disjoint_graphs_is_empty() {
        let alg = two_value_algebra();
        let g = AttributedGraph::builder(alg.clone())
            .node("x", vec![v("p")])
            .build()
            .unwrap();
        let h = AttributedGraph::builder(alg.clone())
            .node("y", vec![v("q")])
            .build()
            .unwrap();
        assert_eq!(g.meet(&h).unwrap(), AttributedGraph::empty(alg));
    }

    #[test]
    fn join_family_empty_uses_fallback_algebra() {
        let alg = two_value_algebra();
        let joined = AttributedGraph::join_family(&[], alg.clone()).unwrap();
        assert_eq!(joined, AttributedGraph::empty(alg));
    }

    /// Deleting the swapped-out integers leaves the identifiers.
    #[test]
    fn delete_attributes_only() {
        let swap = crate::testkit::swap();
        let mut ld = Attribution::new();
        ld.insert_all(ItemId::plain("x"), [int(1)]);
        ld.insert_all(ItemId::plain("y"), [int(-1)]);
        let left = swap.host.delete_disjoint(&BTreeSet::new(), &BTreeSet::new(), &ld);
        let expected = AttributedGraph::builder(swap.algebra)
            .node("x", vec![sym("ident", "a")])
            .node("y", vec![sym("ident", "b")])
            .build()
            .unwrap();
        assert_eq!(left, expected);
    }

    /// Deleting both nodes of the two-node cycle empties the graph, the
    /// arrows going down with their endpoints.
    #[test]
    fn delete_nodes_removes_incident_arrows() {
        let conflict = crate::testkit::conflict();
        let v: BTreeSet<ItemId> = [ItemId::plain("y"), ItemId::plain("z")].into();
        let left = conflict
            .host
            .delete_disjoint(&v, &BTreeSet::new(), &Attribution::new());
        assert_eq!(left, AttributedGraph::empty(conflict.algebra));
    }

    #[test]
    fn delete_nothing_is_identity() {
        let swap = crate::testkit::swap();
        let left =
            swap.host
                .delete_disjoint(&BTreeSet::new(), &BTreeSet::new(), &Attribution::new());
        assert_eq!(left, swap.host);
    }

    #[test]
    fn image_under_identity_is_the_subgraph() {
        let alg = two_value_algebra();
        let g = AttributedGraph::builder(alg.clone())
            .node("x", vec![v("p")])
            .node("y", vec![])
            .arrow("e", "x", "y", vec![])
            .build()
            .unwrap();
        let f = AttributedGraph::builder(alg.clone())
            .node("x", vec![v("p")])
            .build()
            .unwrap();
        let id = GraphMorphism::identity_on(&g);
        assert_eq!(id.image(&f, alg).unwrap(), f);
    }

    #[test]
    fn image_requires_domain_items() {
        let alg = two_value_algebra();
        let g = AttributedGraph::builder(alg.clone())
            .node("x", vec![])
            .build()
            .unwrap();
        let f = AttributedGraph::builder(alg.clone())
            .node("other", vec![])
            .build()
            .unwrap();
        let id = GraphMorphism::identity_on(&g);
        assert!(matches!(
            id.image(&f, alg),
            Err(GraphError::NotInDomain(_))
        ));
    }

    #[test]
    fn isomorphic_after_renaming() {
        let alg = two_value_algebra();
        let g = AttributedGraph::builder(alg.clone())
            .node("x", vec![v("p")])
            .node("y", vec![])
            .arrow("e", "x", "y", vec![v("q")])
            .build()
            .unwrap();
        let renamed = g.rename_items(&BTreeMap::from([
            (ItemId::plain("x"), ItemId::plain("x'")),
            (ItemId::plain("y"), ItemId::plain("y'")),
            (ItemId::plain("e"), ItemId::plain("e'")),
        ]));
        let witness = g.isomorphic(&renamed).expect("renaming is an isomorphism");
        assert_eq!(witness.apply(&ItemId::plain("x")), Some(&ItemId::plain("x'")));
        witness.check(&g, &renamed).unwrap();
    }

    #[test]
    fn isomorphism_needs_exact_attributes() {
        let alg = two_value_algebra();
        let g = AttributedGraph::builder(alg.clone())
            .node("x", vec![v("p")])
            .build()
            .unwrap();
        let h = AttributedGraph::builder(alg)
            .node("x", vec![])
            .build()
            .unwrap();
        assert!(g.isomorphic(&h).is_none());
    }

    // -- randomized laws ---------------------------------------------------

    fn random_graph(rng: &mut StdRng, alg: &Arc<Algebra>, tag: &str) -> AttributedGraph {
        let n = rng.gen_range(0..=4);
        let mut builder = AttributedGraph::builder(alg.clone());
        let mut names = Vec::new();
        for i in 0..n {
            let name = format!("{tag}n{i}");
            let attrs = random_attrs(rng);
            builder.add_node(ItemId::plain(&name), attrs);
            names.push(name);
        }
        if !names.is_empty() {
            let arrows = rng.gen_range(0..=3);
            for i in 0..arrows {
                let s = &names[rng.gen_range(0..names.len())];
                let t = &names[rng.gen_range(0..names.len())];
                builder.add_arrow(
                    ItemId::plain(format!("{tag}e{i}")),
                    ItemId::plain(s),
                    ItemId::plain(t),
                    random_attrs(rng),
                );
            }
        }
        builder.build().unwrap()
    }

    fn random_attrs(rng: &mut StdRng) -> Vec<Term> {
        let mut attrs = Vec::new();
        if rng.gen_bool(0.4) {
            attrs.push(v("p"));
        }
        if rng.gen_bool(0.4) {
            attrs.push(v("q"));
        }
        attrs
    }

    /// A random subgraph of `g`, built independently of `delete_disjoint`.
    fn random_subgraph(rng: &mut StdRng, g: &AttributedGraph) -> AttributedGraph {
        let keep_nodes: BTreeSet<ItemId> = g
            .nodes()
            .iter()
            .filter(|_| rng.gen_bool(0.7))
            .cloned()
            .collect();
        let mut builder = AttributedGraph::builder(g.algebra().clone());
        for n in &keep_nodes {
            let attrs: Vec<Term> = g
                .attrs(n)
                .into_iter()
                .filter(|_| rng.gen_bool(0.7))
                .collect();
            builder.add_node(n.clone(), attrs);
        }
        for e in g.arrows() {
            let (s, t) = (g.src(e).unwrap(), g.tgt(e).unwrap());
            if keep_nodes.contains(s) && keep_nodes.contains(t) && rng.gen_bool(0.7) {
                let attrs: Vec<Term> = g
                    .attrs(e)
                    .into_iter()
                    .filter(|_| rng.gen_bool(0.7))
                    .collect();
                builder.add_arrow(e.clone(), s.clone(), t.clone(), attrs);
            }
        }
        builder.build().unwrap()
    }

    /// H ◁ G iff H ⊓ G = H iff H ⊔ G = G, on random joinable pairs.
    #[test]
    fn partial_order_laws() {
        let alg = two_value_algebra();
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..300 {
            let g = random_graph(&mut rng, &alg, "");
            let h = random_subgraph(&mut rng, &g);
            let h2 = random_subgraph(&mut rng, &g);
            assert!(h.is_subgraph(&g));
            assert_eq!(h.meet(&g).unwrap(), h);
            assert_eq!(h.join(&g).unwrap(), g);
            // two subgraphs of g: order iff meet/join degenerate
            let sub = h.is_subgraph(&h2);
            assert_eq!(h.meet(&h2).unwrap() == h, sub);
            assert_eq!(h.join(&h2).unwrap() == h2, sub);
        }
    }

    #[test]
    fn meet_join_commute_associate_distribute() {
        let alg = two_value_algebra();
        let mut rng = StdRng::seed_from_u64(8);
        for _ in 0..300 {
            let g = random_graph(&mut rng, &alg, "");
            let a = random_subgraph(&mut rng, &g);
            let b = random_subgraph(&mut rng, &g);
            let c = random_subgraph(&mut rng, &g);
            assert_eq!(a.meet(&b).unwrap(), b.meet(&a).unwrap());
            assert_eq!(a.join(&b).unwrap(), b.join(&a).unwrap());
            assert_eq!(
                a.meet(&b).unwrap().meet(&c).unwrap(),
                a.meet(&b.meet(&c).unwrap()).unwrap()
            );
            assert_eq!(
                a.join(&b).unwrap().join(&c).unwrap(),
                a.join(&b.join(&c).unwrap()).unwrap()
            );
            assert_eq!(
                a.meet(&b.join(&c).unwrap()).unwrap(),
                a.meet(&b).unwrap().join(&a.meet(&c).unwrap()).unwrap()
            );
            assert_eq!(
                a.join(&b.meet(&c).unwrap()).unwrap(),
                a.join(&b).unwrap().meet(&a.join(&c).unwrap()).unwrap()
            );
        }
    }

    /// Exhaustive enumeration of all subgraphs of small graphs, used as
    /// the oracle for deletion maximality and image minimality.
    fn all_subgraphs(g: &AttributedGraph) -> Vec<AttributedGraph> {
        let nodes: Vec<&ItemId> = g.nodes().iter().collect();
        let mut out = Vec::new();
        for nmask in 0..(1usize << nodes.len()) {
            let kept: BTreeSet<ItemId> = nodes
                .iter()
                .enumerate()
                .filter(|(i, _)| nmask & (1 << i) != 0)
                .map(|(_, n)| (*n).clone())
                .collect();
            let arrows: Vec<&ItemId> = g
                .arrows()
                .iter()
                .filter(|e| kept.contains(g.src(e).unwrap()) && kept.contains(g.tgt(e).unwrap()))
                .collect();
            for amask in 0..(1usize << arrows.len()) {
                let kept_arrows: Vec<&ItemId> = arrows
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| amask & (1 << i) != 0)
                    .map(|(_, e)| *e)
                    .collect();
                let items: Vec<ItemId> = kept
                    .iter()
                    .cloned()
                    .chain(kept_arrows.iter().map(|e| (*e).clone()))
                    .collect();
                let choices: Vec<Vec<BTreeSet<Term>>> = items
                    .iter()
                    .map(|x| {
                        let attrs: Vec<Term> = g.attrs(x).into_iter().collect();
                        (0..(1usize << attrs.len()))
                            .map(|mask| {
                                attrs
                                    .iter()
                                    .enumerate()
                                    .filter(|(i, _)| mask & (1 << i) != 0)
                                    .map(|(_, t)| t.clone())
                                    .collect()
                            })
                            .collect()
                    })
                    .collect();
                let mut pick = vec![0usize; items.len()];
                loop {
                    let mut builder = AttributedGraph::builder(g.algebra().clone());
                    for n in &kept {
                        let i = items.iter().position(|x| x == n).unwrap();
                        builder.add_node(n.clone(), choices[i][pick[i]].iter().cloned().collect());
                    }
                    for e in &kept_arrows {
                        let i = items.iter().position(|x| x == *e).unwrap();
                        builder.add_arrow(
                            (*e).clone(),
                            g.src(e).unwrap().clone(),
                            g.tgt(e).unwrap().clone(),
                            choices[i][pick[i]].iter().cloned().collect(),
                        );
                    }
                    out.push(builder.build().unwrap());
                    // advance the mixed-radix counter over attribute picks
                    let mut i = 0;
                    loop {
                        if i == items.len() {
                            break;
                        }
                        pick[i] += 1;
                        if pick[i] < choices[i].len() {
                            break;
                        }
                        pick[i] = 0;
                        i += 1;
                    }
                    if i == items.len() {
                        break;
                    }
                }
            }
        }
        out
    }

    /// Every subgraph of G disjoint from V, A, l is a subgraph of the
    /// deletion result: the result really is the largest one.
    #[test]
    fn delete_disjoint_is_maximal() {
        let alg = two_value_algebra();
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..25 {
            let g = random_graph(&mut rng, &alg, "");
            let vset: BTreeSet<ItemId> = g
                .nodes()
                .iter()
                .filter(|_| rng.gen_bool(0.3))
                .cloned()
                .collect();
            let aset: BTreeSet<ItemId> = g
                .arrows()
                .iter()
                .filter(|_| rng.gen_bool(0.3))
                .cloned()
                .collect();
            let mut l = Attribution::new();
            for x in g.items() {
                let dropped: Vec<Term> =
                    g.attrs(x).into_iter().filter(|_| rng.gen_bool(0.3)).collect();
                l.insert_all(x.clone(), dropped);
            }
            let result = g.delete_disjoint(&vset, &aset, &l);
            assert!(result.disjointness_witness(&vset, &aset, &l).is_none());
            assert!(result.is_subgraph(&g));
            for sub in all_subgraphs(&g) {
                if sub.disjointness_witness(&vset, &aset, &l).is_none() {
                    assert!(
                        sub.is_subgraph(&result),
                        "disjoint subgraph not below the deletion result"
                    );
                }
            }
        }
    }

    /// The image is the smallest subgraph of the codomain through which
    /// the restricted morphism factors.
    #[test]
    fn image_is_minimal() {
        let alg = two_value_algebra();
        let mut rng = StdRng::seed_from_u64(10);
        for _ in 0..25 {
            let g = random_graph(&mut rng, &alg, "");
            let f = random_subgraph(&mut rng, &g);
            // rename g injectively to get a nontrivial injective morphism
            let map: BTreeMap<ItemId, ItemId> = g
                .items()
                .map(|x| (x.clone(), ItemId::plain(format!("{x}'"))))
                .collect();
            let target = g.rename_items(&map);
            let morphism = GraphMorphism::new(map, AttrHom::Identity);
            let image = morphism.image(&f, target.algebra().clone()).unwrap();
            assert!(image.is_subgraph(&target));
            for sub in all_subgraphs(&target) {
                let factors = f.items().all(|x| {
                    let img = morphism.apply(x).unwrap();
                    sub.contains_item(img)
                        && f.attrs(x).iter().all(|t| sub.attrs(img).contains(t))
                });
                if factors {
                    assert!(image.is_subgraph(&sub), "image is not minimal");
                }
            }
        }
    }

    #[test]
    fn isomorphism_is_an_equivalence_on_a_sample() {
        let alg = two_value_algebra();
        let mut rng = StdRng::seed_from_u64(11);
        let sample: Vec<AttributedGraph> = (0..8)
            .map(|i| random_graph(&mut rng, &alg, &format!("g{i}")))
            .collect();
        for g in &sample {
            assert!(g.isomorphic(g).is_some(), "reflexivity");
        }
        for g in &sample {
            for h in &sample {
                let gh = g.isomorphic(h).is_some();
                assert_eq!(gh, h.isomorphic(g).is_some(), "symmetry");
                for k in &sample {
                    if gh && h.isomorphic(k).is_some() {
                        assert!(g.isomorphic(k).is_some(), "transitivity");
                    }
                }
            }
        }
    }
}
