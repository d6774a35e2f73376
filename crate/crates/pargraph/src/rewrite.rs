//! The parallel rewriting step: simultaneous deletion of everything
//! matched by L but not by K, followed by the union of all right-hand
//! side images. Also the sequential step (singleton case) and the
//! full-parallel relation gated by the effective deletion property.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{
    AttributedGraph, Attribution, DisjointnessWitness, GraphError, ItemId, MatchingId,
};
use crate::rules::{
    find_matchings_all, lift_matching, MatchError, Matching, MatchingViolation, Rule,
};
use crate::sigma::EvalError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchSetError {
    #[error("matching `{0}` does not target the host graph: {1}")]
    InvalidMatching(MatchingId, MatchingViolation),
    #[error("duplicate matching id `{0}`")]
    DuplicateId(MatchingId),
}

/// A finite set of matchings into one host graph, kept in canonical
/// order and keyed by matching id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchSet {
    host: AttributedGraph,
    matchings: Vec<Matching>,
}

impl MatchSet {
    pub fn new(host: AttributedGraph, matchings: Vec<Matching>) -> Result<Self, MatchSetError> {
        for m in &matchings {
            m.check(&host)
                .map_err(|v| MatchSetError::InvalidMatching(m.id().clone(), v))?;
        }
        Self::assume(host, matchings).map_err(|id| MatchSetError::DuplicateId(id))
    }

    /// Builds a match set without revalidating the matchings; callers
    /// guarantee they hold on the host.
    pub(crate) fn assume(
        host: AttributedGraph,
        mut matchings: Vec<Matching>,
    ) -> Result<Self, MatchingId> {
        matchings.sort();
        for pair in matchings.windows(2) {
            if pair[0].id() == pair[1].id() {
                return Err(pair[0].id().clone());
            }
        }
        Ok(MatchSet { host, matchings })
    }

    /// All matchings of a rule set in a host.
    pub fn all(host: AttributedGraph, rules: &[Arc<Rule>]) -> Result<Self, MatchError> {
        let matchings = find_matchings_all(rules, &host)?;
        Ok(MatchSet::assume(host, matchings).expect("canonical ids are distinct"))
    }

    pub fn host(&self) -> &AttributedGraph {
        &self.host
    }

    pub fn matchings(&self) -> &[Matching] {
        &self.matchings
    }

    pub fn len(&self) -> usize {
        self.matchings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matchings.is_empty()
    }

    pub fn get(&self, id: &MatchingId) -> Option<&Matching> {
        self.matchings.iter().find(|m| m.id() == id)
    }

    /// The subset selected by a bitmask over the canonical order.
    pub fn subset_by_mask(&self, mask: usize) -> MatchSet {
        let matchings = self
            .matchings
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, m)| m.clone())
            .collect();
        MatchSet {
            host: self.host.clone(),
            matchings,
        }
    }

    pub fn with_matching(&self, extra: &Matching) -> MatchSet {
        let mut matchings = self.matchings.clone();
        if !matchings.iter().any(|m| m.id() == extra.id()) {
            matchings.push(extra.clone());
            matchings.sort();
        }
        MatchSet {
            host: self.host.clone(),
            matchings,
        }
    }
}

/// Everything scheduled for deletion by a match set: the node set Vd, the
/// arrow set Ad and the attribution ld.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DeletionSpec {
    pub vd: BTreeSet<ItemId>,
    pub ad: BTreeSet<ItemId>,
    pub ld: Attribution,
}

impl fmt::Display for DeletionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items = |s: &BTreeSet<ItemId>| {
            s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
        };
        writeln!(f, "vd = {{{}}}", items(&self.vd))?;
        writeln!(f, "ad = {{{}}}", items(&self.ad))?;
        for (item, terms) in self.ld.iter() {
            let vals: Vec<String> = terms.iter().map(|t| t.to_string()).collect();
            writeln!(f, "ld({item}) = {{{}}}", vals.join(", "))?;
        }
        Ok(())
    }
}

/// The attribution recovered by right-hand sides: deleted attributes that
/// some rule re-creates on the same host item.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RecoveredAttribution {
    pub llift: Attribution,
}

/// Union over the match set of the images of everything L matches beyond
/// K: deleted nodes, deleted arrows and deleted attributes.
pub fn deletion_spec(ms: &MatchSet) -> Result<DeletionSpec, EvalError> {
    let mut spec = DeletionSpec::default();
    for m in ms.matchings() {
        let rule = m.rule();
        let (lhs, kept) = (rule.lhs(), rule.kept());
        for n in lhs.nodes() {
            if !kept.contains_item(n) {
                spec.vd.insert(m.items()[n].clone());
            }
        }
        for e in lhs.arrows() {
            if !kept.contains_item(e) {
                spec.ad.insert(m.items()[e].clone());
            }
        }
        for x in lhs.items() {
            let deleted: BTreeSet<_> = lhs
                .attrs(x)
                .difference(&kept.attrs(x))
                .cloned()
                .collect();
            if !deleted.is_empty() {
                spec.ld
                    .insert_all(m.items()[x].clone(), m.attr_image(&deleted)?);
            }
        }
    }
    Ok(spec)
}

/// Union over the match set of the images of the attributes R carries
/// beyond K, conjugated through μ (created items contribute nothing).
pub fn recovered_attribution(ms: &MatchSet) -> Result<RecoveredAttribution, EvalError> {
    let mut llift = Attribution::new();
    for m in ms.matchings() {
        let rule = m.rule();
        let (rhs, kept) = (rule.rhs(), rule.kept());
        for x in rhs.items() {
            // conjugation through μ⁻¹: only items that L maps at all
            let Some(host_item) = m.items().get(x) else {
                continue;
            };
            let recovered: BTreeSet<_> = rhs
                .attrs(x)
                .difference(&kept.attrs(x))
                .cloned()
                .collect();
            if !recovered.is_empty() {
                llift.insert_all(host_item.clone(), m.attr_image(&recovered)?);
            }
        }
    }
    Ok(RecoveredAttribution { llift })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RewriteError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// The simultaneous parallel step: delete everything in the deletion
/// spec, then join all right-hand-side images. Total on any match set;
/// safety gating is a separate property check.
pub fn parallel_apply(ms: &MatchSet) -> Result<AttributedGraph, RewriteError> {
    let spec = deletion_spec(ms)?;
    let remainder = ms.host().delete_disjoint(&spec.vd, &spec.ad, &spec.ld);
    let mut rimgs = Vec::with_capacity(ms.len());
    for m in ms.matchings() {
        rimgs.push(lift_matching(m)?.rimg().clone());
    }
    let mut graphs: Vec<&AttributedGraph> = vec![&remainder];
    graphs.extend(rimgs.iter());
    Ok(AttributedGraph::join_family(
        &graphs,
        ms.host().algebra().clone(),
    )?)
}

/// One sequential rewrite step: the parallel step of a singleton.
pub fn sequential_step(
    host: &AttributedGraph,
    matching: &Matching,
) -> Result<AttributedGraph, SequentialStepError> {
    matching
        .check(host)
        .map_err(|v| SequentialStepError::NotApplicable(matching.id().clone(), v))?;
    let ms = MatchSet::assume(host.clone(), vec![matching.clone()])
        .expect("singletons have distinct ids");
    Ok(parallel_apply(&ms)?)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SequentialStepError {
    #[error("matching `{0}` does not apply: {1}")]
    NotApplicable(MatchingId, MatchingViolation),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

/// Applies matchings one at a time in the given order, transporting each
/// matching unchanged onto the intermediate graph.
pub fn apply_in_order(
    host: &AttributedGraph,
    order: &[&Matching],
) -> Result<AttributedGraph, SequentialStepError> {
    let mut current = host.clone();
    for m in order {
        current = sequential_step(&current, m)?;
    }
    Ok(current)
}

/// Why a full parallel step was refused: items or attributes scheduled
/// for effective deletion survived into the result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdpViolation {
    pub witnesses: Vec<DisjointnessWitness>,
}

impl fmt::Display for EdpViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list: Vec<String> = self.witnesses.iter().map(|w| w.to_string()).collect();
        write!(f, "effective deletion fails: {}", list.join("; "))
    }
}

/// The surviving items and attributes that break the effective deletion
/// property for this match set, if any.
pub fn edp_witness(ms: &MatchSet) -> Result<Option<EdpViolation>, RewriteError> {
    let spec = deletion_spec(ms)?;
    let recovered = recovered_attribution(ms)?;
    let effective = spec.ld.minus(&recovered.llift);
    let result = parallel_apply(ms)?;
    let witnesses = result.disjointness_witnesses(&spec.vd, &spec.ad, &effective);
    Ok((!witnesses.is_empty()).then_some(EdpViolation { witnesses }))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepError {
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error("{0}")]
    Refused(EdpViolation),
}

/// The full parallel step: apply *all* matchings of the rule set at once,
/// refusing when the set violates the effective deletion property.
pub fn full_parallel_step(
    host: &AttributedGraph,
    rules: &[Arc<Rule>],
) -> Result<AttributedGraph, StepError> {
    let ms = MatchSet::all(host.clone(), rules)?;
    if let Some(violation) = edp_witness(&ms)? {
        return Err(StepError::Refused(violation));
    }
    Ok(parallel_apply(&ms)?)
}
