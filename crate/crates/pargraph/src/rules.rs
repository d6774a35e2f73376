//! Rules ⟨L,K,R⟩ over term-attributed graphs, enumeration of consistent
//! matchings into a host graph, and lifted matchings with their fresh
//! right-hand-side images.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{
    AttrHom, AttributedGraph, GraphMorphism, ItemId, JoinabilityViolation, MatchingId,
    SubgraphDefect,
};
use crate::sigma::{
    Algebra, Assignment, EvalError, Signature, SortError, Term, TermAlgebra, Value, evaluate,
    validate_term, vars_of,
};

/// One of the three components of a rule, for error reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleComponent {
    Lhs,
    Kept,
    Rhs,
}

impl fmt::Display for RuleComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleComponent::Lhs => write!(f, "L"),
            RuleComponent::Kept => write!(f, "K"),
            RuleComponent::Rhs => write!(f, "R"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("{component} is not over the rule's term algebra")]
    ComponentAlgebraMismatch { component: RuleComponent },
    #[error("{component} contains derived item id `{item}`")]
    DerivedItemInRule { component: RuleComponent, item: ItemId },
    #[error("ill-sorted attribute {term} on `{item}` in {component}: {detail}")]
    IllSortedAttribute {
        component: RuleComponent,
        item: ItemId,
        term: Term,
        detail: SortError,
    },
    #[error("L and R are not joinable: {0}")]
    LhsRhsNotJoinable(JoinabilityViolation),
    #[error("K is not a subgraph of L: {0}")]
    KeptNotBelowLhs(SubgraphDefect),
    #[error("L⊓R is not a subgraph of K: {0}")]
    OverlapNotBelowKept(SubgraphDefect),
    #[error("variable `{0}` does not occur in L (Var(L) must equal the declared variables)")]
    VariableUnusedInLhs(String),
    #[error("variable `{0}` of R does not occur in L (Var(R) ⊆ Var(L) is violated)")]
    RhsVariableNotInLhs(String),
}

/// A rule ⟨L,K,R⟩ of graphs attributed by terms over the declared
/// variables, with L⊓R ◁ K ◁ L. Item identifiers are namespaced with the
/// rule name on construction so distinct rules never share carriers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    name: String,
    vars: BTreeMap<String, String>,
    algebra: Arc<Algebra>,
    lhs: AttributedGraph,
    kept: AttributedGraph,
    rhs: AttributedGraph,
}

impl Rule {
    /// The term algebra over `vars` that a rule's components live in.
    pub fn term_algebra(signature: Arc<Signature>, vars: BTreeMap<String, String>) -> Arc<Algebra> {
        Arc::new(Algebra::Terms(TermAlgebra { signature, vars }))
    }

    /// Validates the rule invariants and namespaces item ids with the rule
    /// name. The component graphs must share the term algebra obtained
    /// from [`Rule::term_algebra`] for the same variables.
    pub fn new(
        name: impl Into<String>,
        lhs: AttributedGraph,
        kept: AttributedGraph,
        rhs: AttributedGraph,
    ) -> Result<Arc<Rule>, Vec<RuleError>> {
        let name = name.into();
        let mut errors = Vec::new();

        let algebra = lhs.algebra().clone();
        let Some(term_algebra) = algebra.as_terms() else {
            return Err(vec![RuleError::ComponentAlgebraMismatch {
                component: RuleComponent::Lhs,
            }]);
        };
        let vars = term_algebra.vars.clone();
        let signature = term_algebra.signature.clone();

        // K and R may come in over a wider variable list; their terms are
        // validated against L's variables below and the graphs are
        // re-tagged to the rule's algebra.
        for (component, graph) in [(RuleComponent::Kept, &kept), (RuleComponent::Rhs, &rhs)] {
            match graph.algebra().as_terms() {
                Some(ta) if ta.signature == signature => {}
                _ => errors.push(RuleError::ComponentAlgebraMismatch { component }),
            }
        }
        for (component, graph) in [
            (RuleComponent::Lhs, &lhs),
            (RuleComponent::Kept, &kept),
            (RuleComponent::Rhs, &rhs),
        ] {
            for item in graph.items() {
                if !matches!(item, ItemId::Plain(_)) {
                    errors.push(RuleError::DerivedItemInRule {
                        component,
                        item: item.clone(),
                    });
                }
                for term in graph.attrs(item).iter() {
                    if let Err(details) = validate_term(term, &signature, &vars) {
                        let detail = details.into_iter().next().expect("at least one error");
                        if component == RuleComponent::Rhs
                            && matches!(
                                detail.kind,
                                crate::sigma::SortErrorKind::UnknownVariable(_)
                            )
                        {
                            if let crate::sigma::SortErrorKind::UnknownVariable(v) = &detail.kind {
                                errors.push(RuleError::RhsVariableNotInLhs(v.clone()));
                                continue;
                            }
                        }
                        errors.push(RuleError::IllSortedAttribute {
                            component,
                            item: item.clone(),
                            term: term.clone(),
                            detail,
                        });
                    }
                }
            }
        }
        if !errors.is_empty() {
            return Err(errors);
        }

        let kept = kept.retag_algebra(algebra.clone());
        let rhs = rhs.retag_algebra(algebra.clone());

        match lhs.check_joinable(&rhs) {
            Err(violation) => errors.push(RuleError::LhsRhsNotJoinable(violation)),
            Ok(()) => {
                let overlap = lhs.meet(&rhs).expect("joinable graphs have a meet");
                if let Some(defect) = overlap.subgraph_defect(&kept) {
                    errors.push(RuleError::OverlapNotBelowKept(defect));
                }
            }
        }
        if let Some(defect) = kept.subgraph_defect(&lhs) {
            errors.push(RuleError::KeptNotBelowLhs(defect));
        }

        let used: BTreeSet<String> = lhs
            .items()
            .flat_map(|x| lhs.attrs(x))
            .flat_map(|t| vars_of(&t))
            .map(|v| v.name)
            .collect();
        for declared in vars.keys() {
            if !used.contains(declared) {
                errors.push(RuleError::VariableUnusedInLhs(declared.clone()));
            }
        }

        if !errors.is_empty() {
            return Err(errors);
        }

        let prefix: BTreeMap<ItemId, ItemId> = lhs
            .items()
            .chain(kept.items())
            .chain(rhs.items())
            .map(|x| (x.clone(), qualify(&name, x)))
            .collect();
        Ok(Arc::new(Rule {
            lhs: lhs.rename_items(&prefix),
            kept: kept.rename_items(&prefix),
            rhs: rhs.rename_items(&prefix),
            name,
            vars,
            algebra,
        }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vars(&self) -> &BTreeMap<String, String> {
        &self.vars
    }

    pub fn signature(&self) -> &Arc<Signature> {
        self.algebra.signature()
    }

    pub fn lhs(&self) -> &AttributedGraph {
        &self.lhs
    }

    pub fn kept(&self) -> &AttributedGraph {
        &self.kept
    }

    pub fn rhs(&self) -> &AttributedGraph {
        &self.rhs
    }

    /// The namespaced id of a rule item, e.g. `item("x1")` for rule `r1`
    /// is the id `r1.x1`.
    pub fn item(&self, local: &str) -> ItemId {
        qualify(&self.name, &ItemId::plain(local))
    }

    pub fn is_unlabeled(&self) -> bool {
        self.lhs.is_unlabeled() && self.kept.is_unlabeled() && self.rhs.is_unlabeled()
    }
}

fn qualify(rule: &str, item: &ItemId) -> ItemId {
    match item {
        ItemId::Plain(s) if !s.starts_with(&format!("{rule}.")) => {
            ItemId::plain(format!("{rule}.{s}"))
        }
        other => other.clone(),
    }
}

/// Strips a rule-name prefix from a rule item's local name.
pub fn local_name(rule: &str, item: &ItemId) -> String {
    match item {
        ItemId::Plain(s) => s
            .strip_prefix(&format!("{rule}."))
            .unwrap_or(s)
            .to_string(),
        other => other.to_string(),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchError {
    #[error("host algebra is not a concrete algebra over the rule's signature")]
    IncompatibleAlgebra,
    #[error(
        "variable `{var}` of rule `{rule}` is unconstrained and ranges over an infinite carrier"
    )]
    UnconstrainedInfiniteVariable { rule: String, var: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchingViolation {
    #[error("item map is not injective")]
    NotInjective,
    #[error("not a morphism into the host: {0}")]
    NotAMorphism(crate::graph::MorphismViolation),
    #[error("matching is not consistent at `{item}`")]
    Inconsistent { item: ItemId },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// An injective, consistent morphism from a rule's left-hand side into a
/// host graph, given by its item map and variable assignment.
#[derive(Debug, Clone)]
pub struct Matching {
    rule: Arc<Rule>,
    items: BTreeMap<ItemId, ItemId>,
    asg: Assignment,
    host_algebra: Arc<Algebra>,
    id: MatchingId,
}

impl PartialEq for Matching {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for Matching {}

impl PartialOrd for Matching {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Matching {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.id.cmp(&other.id)
    }
}

impl Matching {
    /// Builds a candidate matching without validating it; used by the
    /// search and to probe consistency of hand-built candidates.
    pub fn candidate(
        rule: Arc<Rule>,
        items: BTreeMap<ItemId, ItemId>,
        asg: Assignment,
        host_algebra: Arc<Algebra>,
    ) -> Matching {
        let id = canonical_id(&rule, &items, &asg);
        Matching {
            rule,
            items,
            asg,
            host_algebra,
            id,
        }
    }

    pub fn id(&self) -> &MatchingId {
        &self.id
    }

    pub fn rule(&self) -> &Arc<Rule> {
        &self.rule
    }

    pub fn items(&self) -> &BTreeMap<ItemId, ItemId> {
        &self.items
    }

    pub fn assignment(&self) -> &Assignment {
        &self.asg
    }

    pub fn host_algebra(&self) -> &Arc<Algebra> {
        &self.host_algebra
    }

    /// The matching as a graph morphism from L into the host.
    pub fn as_morphism(&self) -> GraphMorphism {
        GraphMorphism::new(
            self.items.clone(),
            AttrHom::Eval {
                target: self.host_algebra.clone(),
                asg: self.asg.clone(),
            },
        )
    }

    /// μ-image of attribute terms.
    pub fn attr_image(&self, terms: &BTreeSet<Term>) -> Result<BTreeSet<Term>, EvalError> {
        let alg = self
            .host_algebra
            .as_concrete()
            .expect("matchings target concrete algebras");
        terms
            .iter()
            .map(|t| Ok(Term::Lit(evaluate(t, alg, &self.asg)?)))
            .collect()
    }

    /// Image of a subgraph of L in the host.
    pub fn image_of(&self, sub: &AttributedGraph) -> Result<AttributedGraph, crate::graph::GraphError> {
        self.as_morphism().image(sub, self.host_algebra.clone())
    }

    pub fn lhs_image(&self) -> Result<AttributedGraph, crate::graph::GraphError> {
        self.image_of(self.rule.lhs())
    }

    pub fn kept_image(&self) -> Result<AttributedGraph, crate::graph::GraphError> {
        self.image_of(self.rule.kept())
    }

    /// The consistency condition: at every K-item, the image of the
    /// deleted attribute terms is disjoint from the image of the kept
    /// ones.
    pub fn is_consistent(&self) -> Result<bool, EvalError> {
        Ok(self.first_inconsistency()?.is_none())
    }

    fn first_inconsistency(&self) -> Result<Option<ItemId>, EvalError> {
        let kept = self.rule.kept();
        let lhs = self.rule.lhs();
        for x in kept.items() {
            let deleted: BTreeSet<Term> = lhs
                .attrs(x)
                .difference(&kept.attrs(x))
                .cloned()
                .collect();
            let deleted_image = self.attr_image(&deleted)?;
            let kept_image = self.attr_image(&kept.attrs(x))?;
            if deleted_image.intersection(&kept_image).next().is_some() {
                return Ok(Some(x.clone()));
            }
        }
        Ok(None)
    }

    /// Full validation against a host graph: injectivity, the morphism
    /// laws from L into the host, and consistency.
    pub fn check(&self, host: &AttributedGraph) -> Result<(), MatchingViolation> {
        if !self.as_morphism().is_injective() {
            return Err(MatchingViolation::NotInjective);
        }
        self.as_morphism()
            .check(self.rule.lhs(), host)
            .map_err(MatchingViolation::NotAMorphism)?;
        if let Some(item) = self.first_inconsistency()? {
            return Err(MatchingViolation::Inconsistent { item });
        }
        Ok(())
    }
}

fn canonical_id(rule: &Rule, items: &BTreeMap<ItemId, ItemId>, asg: &Assignment) -> MatchingId {
    let mut key = String::new();
    for (from, to) in items {
        if !key.is_empty() {
            key.push(',');
        }
        key.push_str(&format!("{}>{}", local_name(rule.name(), from), to));
    }
    for (var, value) in asg {
        key.push(';');
        key.push_str(&format!("{var}={value}"));
    }
    MatchingId {
        rule: rule.name().to_string(),
        key,
    }
}

/// Enumerates all matchings of `rule` into `host`, in canonical order.
///
/// The search backtracks over item candidates filtered by incidence and
/// ground attributes. Variable domains are seeded by direct occurrences:
/// a bare variable attribute `u` on an L-item `x` constrains `u` to the
/// attributes of the image of `x`. Variables without a direct occurrence
/// enumerate their finite carrier; an infinite carrier is an error.
pub fn find_matchings(
    rule: &Arc<Rule>,
    host: &AttributedGraph,
) -> Result<Vec<Matching>, MatchError> {
    let Some(concrete) = host.algebra().as_concrete() else {
        return Err(MatchError::IncompatibleAlgebra);
    };
    if concrete.signature != *rule.signature() {
        return Err(MatchError::IncompatibleAlgebra);
    }

    let lhs = rule.lhs();
    let nodes: Vec<&ItemId> = lhs.nodes().iter().collect();
    let arrows: Vec<&ItemId> = lhs.arrows().iter().collect();

    let mut out = Vec::new();
    let mut map: BTreeMap<ItemId, ItemId> = BTreeMap::new();
    let mut used: BTreeSet<ItemId> = BTreeSet::new();
    assign_items(
        rule,
        host,
        &nodes,
        &arrows,
        0,
        &mut map,
        &mut used,
        &mut out,
    )?;
    out.sort();
    Ok(out)
}

/// All matchings of a rule set, in canonical order.
pub fn find_matchings_all(
    rules: &[Arc<Rule>],
    host: &AttributedGraph,
) -> Result<Vec<Matching>, MatchError> {
    let mut out = Vec::new();
    for rule in rules {
        out.extend(find_matchings(rule, host)?);
    }
    out.sort();
    Ok(out)
}

fn ground_attrs_fit(
    rule: &Rule,
    host: &AttributedGraph,
    item: &ItemId,
    candidate: &ItemId,
) -> Result<bool, MatchError> {
    let alg = host.algebra().as_concrete().expect("checked concrete");
    let empty = Assignment::new();
    let host_attrs = host.attrs(candidate);
    for term in rule.lhs().attrs(item).iter() {
        if term.is_ground() {
            let value = Term::Lit(evaluate(term, alg, &empty)?);
            if !host_attrs.contains(&value) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[allow(clippy::too_many_arguments)]
fn assign_items(
    rule: &Arc<Rule>,
    host: &AttributedGraph,
    nodes: &[&ItemId],
    arrows: &[&ItemId],
    depth: usize,
    map: &mut BTreeMap<ItemId, ItemId>,
    used: &mut BTreeSet<ItemId>,
    out: &mut Vec<Matching>,
) -> Result<(), MatchError> {
    let lhs = rule.lhs();
    if depth == nodes.len() + arrows.len() {
        return assign_variables(rule, host, map, out);
    }
    if depth < nodes.len() {
        let n = nodes[depth];
        for candidate in host.nodes() {
            if used.contains(candidate) || !ground_attrs_fit(rule, host, n, candidate)? {
                continue;
            }
            map.insert(n.clone(), candidate.clone());
            used.insert(candidate.clone());
            assign_items(rule, host, nodes, arrows, depth + 1, map, used, out)?;
            map.remove(n);
            used.remove(candidate);
        }
    } else {
        let e = arrows[depth - nodes.len()];
        let want_src = map[lhs.src(e).expect("arrow has a source")].clone();
        let want_tgt = map[lhs.tgt(e).expect("arrow has a target")].clone();
        for candidate in host.arrows() {
            if used.contains(candidate)
                || host.src(candidate) != Some(&want_src)
                || host.tgt(candidate) != Some(&want_tgt)
                || !ground_attrs_fit(rule, host, e, candidate)?
            {
                continue;
            }
            map.insert(e.clone(), candidate.clone());
            used.insert(candidate.clone());
            assign_items(rule, host, nodes, arrows, depth + 1, map, used, out)?;
            map.remove(e);
            used.remove(candidate);
        }
    }
    Ok(())
}

fn assign_variables(
    rule: &Arc<Rule>,
    host: &AttributedGraph,
    map: &BTreeMap<ItemId, ItemId>,
    out: &mut Vec<Matching>,
) -> Result<(), MatchError> {
    let alg = host.algebra().as_concrete().expect("checked concrete");
    let lhs = rule.lhs();

    // domain per variable: intersect host attributes over direct occurrences
    let mut domains: Vec<(String, Vec<Value>)> = Vec::new();
    for (var, sort) in rule.vars() {
        let mut domain: Option<BTreeSet<Value>> = None;
        for x in lhs.items() {
            let direct = lhs.attrs(x).iter().any(
                |t| matches!(t, Term::Var(v) if v.name == *var),
            );
            if !direct {
                continue;
            }
            let seeded: BTreeSet<Value> = host
                .attrs(&map[x])
                .iter()
                .filter_map(|t| match t {
                    Term::Lit(v) if v.sort == *sort => Some(v.clone()),
                    _ => None,
                })
                .collect();
            domain = Some(match domain {
                None => seeded,
                Some(prev) => prev.intersection(&seeded).cloned().collect(),
            });
        }
        let domain = match domain {
            Some(d) => d.into_iter().collect(),
            None => alg.finite_values(sort).ok_or_else(|| {
                MatchError::UnconstrainedInfiniteVariable {
                    rule: rule.name().to_string(),
                    var: var.clone(),
                }
            })?,
        };
        domains.push((var.clone(), domain));
    }

    let mut asg = Assignment::new();
    enumerate_assignments(rule, host, map, &domains, 0, &mut asg, out)?;
    Ok(())
}

fn enumerate_assignments(
    rule: &Arc<Rule>,
    host: &AttributedGraph,
    map: &BTreeMap<ItemId, ItemId>,
    domains: &[(String, Vec<Value>)],
    depth: usize,
    asg: &mut Assignment,
    out: &mut Vec<Matching>,
) -> Result<(), MatchError> {
    if depth == domains.len() {
        let candidate = Matching::candidate(
            rule.clone(),
            map.clone(),
            asg.clone(),
            host.algebra().clone(),
        );
        if attrs_contained(rule, host, map, &candidate)? && candidate.is_consistent()? {
            out.push(candidate);
        }
        return Ok(());
    }
    let (var, values) = &domains[depth];
    for value in values {
        asg.insert(var.clone(), value.clone());
        enumerate_assignments(rule, host, map, domains, depth + 1, asg, out)?;
        asg.remove(var);
    }
    Ok(())
}

fn attrs_contained(
    rule: &Arc<Rule>,
    host: &AttributedGraph,
    map: &BTreeMap<ItemId, ItemId>,
    candidate: &Matching,
) -> Result<bool, MatchError> {
    let lhs = rule.lhs();
    for x in lhs.items() {
        let image = candidate.attr_image(&lhs.attrs(x))?;
        let have = host.attrs(&map[x]);
        if !image.is_subset(&have) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A matching μ̂ of R into the fresh right-hand-side image: kept items are
/// mapped through μ, created items are minted as ⟨item, matching⟩ pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedMatching {
    rimg: AttributedGraph,
    map: BTreeMap<ItemId, ItemId>,
    attr_hom: AttrHom,
}

impl LiftedMatching {
    pub fn rimg(&self) -> &AttributedGraph {
        &self.rimg
    }

    pub fn map(&self) -> &BTreeMap<ItemId, ItemId> {
        &self.map
    }

    pub fn as_morphism(&self) -> GraphMorphism {
        GraphMorphism::new(self.map.clone(), self.attr_hom.clone())
    }

    pub fn apply(&self, item: &ItemId) -> Option<&ItemId> {
        self.map.get(item)
    }
}

/// Builds the lifted matching μ̂ and its image graph for a matching of a
/// rule in a host graph.
pub fn lift_matching(matching: &Matching) -> Result<LiftedMatching, EvalError> {
    let rule = matching.rule();
    let rhs = rule.rhs();
    let kept = rule.kept();

    let mut map: BTreeMap<ItemId, ItemId> = BTreeMap::new();
    for x in rhs.items() {
        let image = if kept.contains_item(x) {
            matching.items()[x].clone()
        } else {
            let origin = match x {
                ItemId::Plain(s) => s.clone(),
                ItemId::Derived { .. } => unreachable!("rule items are plain"),
            };
            ItemId::derived(origin, matching.id().clone())
        };
        map.insert(x.clone(), image);
    }

    let attr_hom = AttrHom::Eval {
        target: matching.host_algebra().clone(),
        asg: matching.assignment().clone(),
    };
    let morphism = GraphMorphism::new(map.clone(), attr_hom.clone());
    let rimg = morphism
        .image(rhs, matching.host_algebra().clone())
        .map_err(|e| match e {
            crate::graph::GraphError::Eval(e) => e,
            other => unreachable!("lifted image is total and injective: {other}"),
        })?;
    Ok(LiftedMatching {
        rimg,
        map,
        attr_hom,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::AttributedGraph;
    use crate::sigma::{Carrier, ConcreteAlgebra, Interp, Signature, SortKind};
    use crate::testkit::{self, int, sym, var, vars};
    use std::sync::Arc;

    #[test]
    fn swap_rules_validate() {
        // construction in the fixture runs the full validation
        let swap = testkit::swap();
        assert_eq!(swap.r1.name(), "r1");
        assert!(swap.r1.kept().is_subgraph(swap.r1.lhs()));
    }

    #[test]
    fn identity_rule_validates() {
        let alg = Rule::term_algebra(Arc::new(Signature::new("s")), vars(&[]));
        let g = AttributedGraph::builder(alg)
            .node("n", vec![])
            .build()
            .unwrap();
        assert!(Rule::new("id", g.clone(), g.clone(), g).is_ok());
    }

    #[test]
    fn rhs_variable_must_occur_in_lhs() {
        let mut sig = Signature::new("s");
        sig.add_sort("c", SortKind::Finite).unwrap();
        let sig = Arc::new(sig);
        let alg = Rule::term_algebra(sig.clone(), vars(&[("u", "c")]));
        let lhs = AttributedGraph::builder(alg.clone())
            .node("n", vec![var("u", "c")])
            .build()
            .unwrap();
        let kept = AttributedGraph::builder(alg)
            .node("n", vec![])
            .build()
            .unwrap();
        // R arrives over a wider variable list; `w` is not a variable of L
        let wide = Rule::term_algebra(sig, vars(&[("u", "c"), ("w", "c")]));
        let rhs = AttributedGraph::builder(wide)
            .node("n", vec![var("w", "c")])
            .build()
            .unwrap();
        let errs = Rule::new("bad", lhs, kept, rhs).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, RuleError::RhsVariableNotInLhs(v) if v == "w")));
    }

    #[test]
    fn kept_must_sit_between_overlap_and_lhs() {
        let mut sig = Signature::new("s");
        sig.add_sort("c", SortKind::Finite).unwrap();
        let alg = Rule::term_algebra(Arc::new(sig), vars(&[]));
        let with_attr = AttributedGraph::builder(alg.clone())
            .node("n", vec![sym("c", "p")])
            .build()
            .unwrap();
        let bare = AttributedGraph::builder(alg.clone())
            .node("n", vec![])
            .build()
            .unwrap();
        // K has an item L lacks
        let bigger = AttributedGraph::builder(alg)
            .node("n", vec![])
            .node("m", vec![])
            .build()
            .unwrap();
        let errs = Rule::new("bad", bare.clone(), bigger, bare.clone()).unwrap_err();
        assert!(errs.iter().any(|e| matches!(e, RuleError::KeptNotBelowLhs(_))));
        // L⊓R keeps the attribute but K drops it
        let errs = Rule::new("bad2", with_attr.clone(), bare, with_attr).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, RuleError::OverlapNotBelowKept(_))));
    }

    #[test]
    fn swap_has_one_matching_per_rule() {
        let swap = testkit::swap();
        for (rule, nodes) in [(&swap.r1, ["x1", "y1"]), (&swap.r2, ["x2", "y2"])] {
            let found = find_matchings(rule, &swap.host).unwrap();
            assert_eq!(found.len(), 1, "exactly one matching of {}", rule.name());
            let m = &found[0];
            assert_eq!(m.items()[&rule.item(nodes[0])], ItemId::plain("x"));
            assert_eq!(m.items()[&rule.item(nodes[1])], ItemId::plain("y"));
            assert_eq!(m.assignment()["u"], crate::sigma::Value::int("int", 1));
            assert_eq!(m.assignment()["v"], crate::sigma::Value::int("int", -1));
            m.check(&swap.host).unwrap();
        }
    }

    #[test]
    fn conflict_has_two_matchings() {
        let c = testkit::conflict();
        let found = find_matchings(&c.rule, &c.host).unwrap();
        assert_eq!(found.len(), 2);
        let tables: Vec<Vec<(&str, &str)>> = vec![
            vec![("x", "y"), ("xp", "z"), ("f", "g"), ("fp", "h")],
            vec![("x", "z"), ("xp", "y"), ("f", "h"), ("fp", "g")],
        ];
        for table in tables {
            assert!(
                found.iter().any(|m| table.iter().all(|(from, to)| {
                    m.items()[&c.rule.item(from)] == ItemId::plain(*to)
                })),
                "missing matching {table:?}"
            );
        }
    }

    #[test]
    fn no_matchings_into_the_empty_graph() {
        let swap = testkit::swap();
        let empty = AttributedGraph::empty(swap.algebra);
        assert!(find_matchings(&swap.r1, &empty).unwrap().is_empty());
    }

    #[test]
    fn consistency_examples() {
        let swap = testkit::swap();
        let m = &find_matchings(&swap.r1, &swap.host).unwrap()[0];
        assert!(m.is_consistent().unwrap());

        // all matchings of an unlabeled rule are consistent
        let c = testkit::conflict();
        for m in find_matchings(&c.rule, &c.host).unwrap() {
            assert!(m.is_consistent().unwrap());
        }
    }

    /// A candidate deleting u and keeping v is inconsistent when both are
    /// assigned the same value.
    #[test]
    fn inconsistent_candidate_detected() {
        let mut sig = Signature::new("s");
        sig.add_sort("c", SortKind::Finite).unwrap();
        let sig = Arc::new(sig);
        let term_alg = Rule::term_algebra(sig.clone(), vars(&[("u", "c"), ("v", "c")]));
        let rule = Rule::new(
            "r",
            AttributedGraph::builder(term_alg.clone())
                .node("x", vec![var("u", "c"), var("v", "c")])
                .build()
                .unwrap(),
            AttributedGraph::builder(term_alg.clone())
                .node("x", vec![var("v", "c")])
                .build()
                .unwrap(),
            AttributedGraph::builder(term_alg)
                .node("x", vec![var("v", "c")])
                .build()
                .unwrap(),
        )
        .unwrap();

        let carriers = std::collections::BTreeMap::from([(
            "c".to_string(),
            Carrier::Finite(["0".to_string()].into()),
        )]);
        let algebra = Arc::new(crate::sigma::Algebra::Concrete(
            ConcreteAlgebra::new("A", sig, carriers, Default::default()).unwrap(),
        ));
        let host = AttributedGraph::builder(algebra.clone())
            .node("x", vec![sym("c", "0")])
            .build()
            .unwrap();

        let zero = Value::sym("c", "0");
        let candidate = Matching::candidate(
            rule.clone(),
            [(rule.item("x"), ItemId::plain("x"))].into(),
            Assignment::from([("u".to_string(), zero.clone()), ("v".to_string(), zero)]),
            algebra,
        );
        assert!(!candidate.is_consistent().unwrap());
        // and therefore the search returns nothing
        assert!(find_matchings(&rule, &host).unwrap().is_empty());
    }

    #[test]
    fn lift_swap_matching() {
        let swap = testkit::swap();
        let m = &find_matchings(&swap.r1, &swap.host).unwrap()[0];
        let lifted = lift_matching(m).unwrap();
        let expected = AttributedGraph::builder(swap.algebra.clone())
            .node("x", vec![sym("ident", "a"), int(-1)])
            .build()
            .unwrap();
        assert_eq!(lifted.rimg(), &expected);
    }

    #[test]
    fn lift_without_creation_is_the_plain_image() {
        let c = testkit::conflict();
        let m = &find_matchings(&c.rule, &c.host).unwrap()[0];
        let lifted = lift_matching(m).unwrap();
        assert_eq!(
            lifted.rimg(),
            &m.image_of(m.rule().rhs()).unwrap(),
            "R ◁ K: nothing is created"
        );
        assert!(lifted.rimg().items().all(|x| matches!(x, ItemId::Plain(_))));
    }

    #[test]
    fn lift_creates_fresh_items() {
        let sig = Arc::new(Signature::new("s"));
        let term_alg = Rule::term_algebra(sig.clone(), vars(&[]));
        let one = |name: &str| {
            AttributedGraph::builder(term_alg.clone())
                .node(name, vec![])
                .build()
                .unwrap()
        };
        let lhs = one("x");
        let rhs = AttributedGraph::builder(term_alg.clone())
            .node("x", vec![])
            .node("n", vec![])
            .arrow("e", "x", "n", vec![])
            .build()
            .unwrap();
        let rule = Rule::new("mk", lhs.clone(), one("x"), rhs).unwrap();

        let algebra = Arc::new(crate::sigma::Algebra::Concrete(
            ConcreteAlgebra::new("A", sig, Default::default(), Default::default()).unwrap(),
        ));
        let host = AttributedGraph::builder(algebra)
            .node("h", vec![])
            .build()
            .unwrap();
        let m = &find_matchings(&rule, &host).unwrap()[0];
        let lifted = lift_matching(m).unwrap();
        let fresh = ItemId::derived("mk.n", m.id().clone());
        assert!(lifted.rimg().nodes().contains(&fresh));
        assert!(!host.contains_item(&fresh));
        assert_eq!(lifted.apply(&rule.item("n")), Some(&fresh));
    }

    #[test]
    fn unconstrained_integer_variable_is_an_error() {
        let mut sig = Signature::new("s");
        sig.add_sort("int", SortKind::Int).unwrap();
        sig.add_op("f", vec!["int".into()], "int").unwrap();
        let sig = Arc::new(sig);
        let term_alg = Rule::term_algebra(sig.clone(), vars(&[("u", "int")]));
        let node = |attrs| {
            AttributedGraph::builder(term_alg.clone())
                .node("x", attrs)
                .build()
                .unwrap()
        };
        // u occurs only under f, never directly
        let fu = Term::app("f", vec![var("u", "int")]);
        let rule = Rule::new("r", node(vec![fu.clone()]), node(vec![fu]), node(vec![])).unwrap();

        let interps = std::collections::BTreeMap::from([("f".to_string(), Interp::Succ)]);
        let algebra = Arc::new(crate::sigma::Algebra::Concrete(
            ConcreteAlgebra::new("A", sig, Default::default(), interps).unwrap(),
        ));
        let host = AttributedGraph::builder(algebra)
            .node("x", vec![int(5)])
            .build()
            .unwrap();
        assert!(matches!(
            find_matchings(&rule, &host),
            Err(MatchError::UnconstrainedInfiniteVariable { .. })
        ));
    }

    /// Matchings found by the search coincide with brute-force enumeration
    /// of all item maps and assignments filtered by the definition.
    #[test]
    fn search_matches_brute_force() {
        let inst = testkit::interp();
        brute_force_check(&inst.grow, &inst.host);
        brute_force_check(&inst.flip, &inst.host);
        let c = testkit::conflict();
        brute_force_check(&c.rule, &c.host);
        let t = testkit::three();
        for rule in [&t.del, &t.add, &t.grow] {
            brute_force_check(rule, &t.host);
        }
    }

    fn brute_force_check(rule: &Arc<Rule>, host: &AttributedGraph) {
        let found: std::collections::BTreeSet<MatchingId> = find_matchings(rule, host)
            .unwrap()
            .into_iter()
            .map(|m| m.id().clone())
            .collect();
        let expected = brute_force(rule, host);
        assert_eq!(found, expected, "search disagrees with brute force");
    }

    fn brute_force(rule: &Arc<Rule>, host: &AttributedGraph) -> std::collections::BTreeSet<MatchingId> {
        let lhs = rule.lhs();
        let l_nodes: Vec<ItemId> = lhs.nodes().iter().cloned().collect();
        let l_arrows: Vec<ItemId> = lhs.arrows().iter().cloned().collect();
        let h_nodes: Vec<ItemId> = host.nodes().iter().cloned().collect();
        let h_arrows: Vec<ItemId> = host.arrows().iter().cloned().collect();
        let alg = host.algebra().as_concrete().unwrap();

        let mut all_maps: Vec<BTreeMap<ItemId, ItemId>> = vec![BTreeMap::new()];
        for (locals, candidates) in [(&l_nodes, &h_nodes), (&l_arrows, &h_arrows)] {
            for local in locals {
                let mut next = Vec::new();
                for map in &all_maps {
                    for cand in candidates {
                        let mut m = map.clone();
                        m.insert(local.clone(), cand.clone());
                        next.push(m);
                    }
                }
                all_maps = next;
            }
        }

        let var_list: Vec<(String, String)> = rule
            .vars()
            .iter()
            .map(|(n, s)| (n.clone(), s.clone()))
            .collect();
        let mut assignments: Vec<Assignment> = vec![Assignment::new()];
        for (name, sort) in &var_list {
            let values = alg.finite_values(sort).expect("finite carrier");
            let mut next = Vec::new();
            for asg in &assignments {
                for v in &values {
                    let mut a = asg.clone();
                    a.insert(name.clone(), v.clone());
                    next.push(a);
                }
            }
            assignments = next;
        }

        let mut out = std::collections::BTreeSet::new();
        for map in &all_maps {
            for asg in &assignments {
                let candidate = Matching::candidate(
                    rule.clone(),
                    map.clone(),
                    asg.clone(),
                    host.algebra().clone(),
                );
                if candidate.check(host).is_ok() {
                    out.insert(candidate.id().clone());
                }
            }
        }
        out
    }

    /// μ and μ̂ are joinable as functions and agree on R⊓K, and the host
    /// stays joinable with every right-hand-side image.
    #[test]
    fn lifted_matchings_are_joinable() {
        let swap = testkit::swap();
        let matchings = find_matchings_all(&[swap.r1.clone(), swap.r2.clone()], &swap.host).unwrap();
        let mut rimgs = Vec::new();
        for m in &matchings {
            let lifted = lift_matching(m).unwrap();
            for (item, image) in lifted.map() {
                if let Some(direct) = m.items().get(item) {
                    assert_eq!(direct, image, "μ and μ̂ disagree on a shared item");
                }
            }
            let overlap = m.rule().rhs().meet(m.rule().kept()).unwrap();
            for x in overlap.items() {
                assert_eq!(lifted.apply(x), m.items().get(x));
            }
            rimgs.push(lifted.rimg().clone());
        }
        for (i, r) in rimgs.iter().enumerate() {
            assert!(swap.host.joinable(r));
            for s in &rimgs[i + 1..] {
                assert!(r.joinable(s));
            }
        }
    }
}
