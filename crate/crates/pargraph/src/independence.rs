//! Decision procedures for the properties relating parallel and
//! sequential rewriting: parallel independence, sequential independence,
//! regularity (definitional and pairwise), parallel coherence and the
//! effective deletion property, plus the combined report with its
//! implication lattice.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::graph::{AttributedGraph, DisjointnessWitness, MatchingId, SubgraphDefect};
use crate::rewrite::{
    deletion_spec, edp_witness, parallel_apply, EdpViolation, MatchSet, RewriteError,
};
use crate::rules::lift_matching;

/// Default bound on |M| for the sequential-independence check, which
/// enumerates all subsets of M.
pub const DEFAULT_SEQUENTIAL_BOUND: usize = 6;

/// Outcome of a property check: either the property holds or a witness
/// of its failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict<W> {
    Holds,
    Fails(W),
}

impl<W> Verdict<W> {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Verdict::Holds => None,
            Verdict::Fails(w) => Some(w),
        }
    }
}

/// A violating ordered pair of matchings together with the first
/// subgraph defect of the pairwise condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairWitness {
    pub mu: MatchingId,
    pub nu: MatchingId,
    pub defect: SubgraphDefect,
}

impl fmt::Display for PairWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pair mu = {}, nu = {}: {}", self.mu, self.nu, self.defect)
    }
}

/// Why a match set fails regularity: the survivor from the definitional
/// check and the violating pair from the pairwise characterization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularityWitness {
    pub survivor: DisjointnessWitness,
    pub pair: PairWitness,
}

impl fmt::Display for RegularityWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}; {}", self.survivor, self.pair)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeqFailureReason {
    /// μ(L) is not a subgraph of the parallel application of N.
    LhsNotPreserved(SubgraphDefect),
    /// Applying μ after N does not commute with applying N ∪ {μ} at once.
    SwapMismatch,
}

impl fmt::Display for SeqFailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqFailureReason::LhsNotPreserved(defect) => {
                write!(f, "left-hand side no longer matches: {defect}")
            }
            SeqFailureReason::SwapMismatch => {
                write!(f, "applying the matching afterwards changes the result")
            }
        }
    }
}

/// A violating (N, μ) pair for sequential independence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeqWitness {
    pub subset: Vec<MatchingId>,
    pub matching: MatchingId,
    pub reason: SeqFailureReason,
}

impl fmt::Display for SeqWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let subset: Vec<String> = self.subset.iter().map(|m| m.to_string()).collect();
        write!(
            f,
            "N = {{{}}}, mu = {}: {}",
            subset.join(", "),
            self.matching,
            self.reason
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error("|M| = {size} exceeds the sequential-independence bound {bound}")]
    BoundExceeded { size: usize, bound: usize },
    #[error(
        "regularity algorithms disagree (definitional: {definitional}, pairwise: {pairwise}); this is a bug"
    )]
    RegularityMismatch { definitional: bool, pairwise: bool },
    #[error("implication lattice violated: {0}; this is a bug")]
    LatticeViolation(String),
}

struct PairData {
    id: MatchingId,
    lhs_image: AttributedGraph,
    kept_image: AttributedGraph,
    rimg: AttributedGraph,
    rhs_kept_image: AttributedGraph,
}

fn pair_data(ms: &MatchSet) -> Result<Vec<PairData>, RewriteError> {
    ms.matchings()
        .iter()
        .map(|m| {
            let rule = m.rule();
            let rhs_kept = rule
                .rhs()
                .meet(rule.kept())
                .expect("R and K of a valid rule are joinable");
            Ok(PairData {
                id: m.id().clone(),
                lhs_image: m.image_of(rule.lhs())?,
                kept_image: m.image_of(rule.kept())?,
                rimg: lift_matching(m)?.rimg().clone(),
                rhs_kept_image: m.image_of(&rhs_kept)?,
            })
        })
        .collect()
}

/// Parallel independence: for all ordered pairs of distinct matchings,
/// (ν(L_ν) ⊔ ν̂(R_ν)) ⊓ μ(L_μ) ◁ μ(K_μ) ⊔ μ̂(R_μ). Singletons and the
/// empty set hold vacuously.
pub fn parallel_independent(ms: &MatchSet) -> Result<Verdict<PairWitness>, CheckError> {
    let data = pair_data(ms)?;
    for mu in &data {
        let rhs_bound = mu
            .kept_image
            .join(&mu.rimg)
            .map_err(RewriteError::Graph)?;
        for nu in &data {
            if mu.id == nu.id {
                continue;
            }
            let reach = nu
                .lhs_image
                .join(&nu.rimg)
                .map_err(RewriteError::Graph)?
                .meet(&mu.lhs_image)
                .map_err(RewriteError::Graph)?;
            if let Some(defect) = reach.subgraph_defect(&rhs_bound) {
                return Ok(Verdict::Fails(PairWitness {
                    mu: mu.id.clone(),
                    nu: nu.id.clone(),
                    defect,
                }));
            }
        }
    }
    Ok(Verdict::Holds)
}

/// Sequential independence by its definition: every subset N can be
/// applied first and each remaining matching still applies, the two
/// routes agreeing on the nose once derived items are identified through
/// the canonical relabeling (which our host-independent matching ids
/// make the identity).
pub fn sequential_independent(
    ms: &MatchSet,
    bound: usize,
) -> Result<Verdict<SeqWitness>, CheckError> {
    let n = ms.len();
    if n > bound {
        return Err(CheckError::BoundExceeded { size: n, bound });
    }
    for mask in 0usize..(1 << n) {
        let sub = ms.subset_by_mask(mask);
        let applied = parallel_apply(&sub)?;
        for (i, mu) in ms.matchings().iter().enumerate() {
            if mask & (1 << i) != 0 {
                continue;
            }
            let witness = |reason| SeqWitness {
                subset: sub.matchings().iter().map(|m| m.id().clone()).collect(),
                matching: mu.id().clone(),
                reason,
            };
            let mu_lhs = mu.image_of(mu.rule().lhs()).map_err(RewriteError::Graph)?;
            if let Some(defect) = mu_lhs.subgraph_defect(&applied) {
                return Ok(Verdict::Fails(witness(SeqFailureReason::LhsNotPreserved(
                    defect,
                ))));
            }
            let together = parallel_apply(&sub.with_matching(mu))?;
            let transported = MatchSet::assume(applied.clone(), vec![mu.clone()])
                .expect("singleton ids are distinct");
            let after = parallel_apply(&transported)?;
            if together != after {
                return Ok(Verdict::Fails(witness(SeqFailureReason::SwapMismatch)));
            }
        }
    }
    Ok(Verdict::Holds)
}

/// Regularity, decided by both the definition (the parallel application
/// is disjoint from everything scheduled for deletion) and the pairwise
/// characterization (ν̂(R_ν) ⊓ μ(L_μ) ◁ μ(K_μ) for all pairs, including
/// μ = ν). The two must agree; disagreement reports an internal error.
pub fn regular(ms: &MatchSet) -> Result<Verdict<RegularityWitness>, CheckError> {
    let spec = deletion_spec(ms).map_err(RewriteError::Eval)?;
    let result = parallel_apply(ms)?;
    let survivor = result.disjointness_witness(&spec.vd, &spec.ad, &spec.ld);

    let data = pair_data(ms)?;
    let mut pair = None;
    'outer: for mu in &data {
        for nu in &data {
            let overlap = nu
                .rimg
                .meet(&mu.lhs_image)
                .map_err(RewriteError::Graph)?;
            if let Some(defect) = overlap.subgraph_defect(&mu.kept_image) {
                pair = Some(PairWitness {
                    mu: mu.id.clone(),
                    nu: nu.id.clone(),
                    defect,
                });
                break 'outer;
            }
        }
    }

    match (survivor, pair) {
        (None, None) => Ok(Verdict::Holds),
        (Some(survivor), Some(pair)) => Ok(Verdict::Fails(RegularityWitness { survivor, pair })),
        (survivor, pair) => Err(CheckError::RegularityMismatch {
            definitional: survivor.is_none(),
            pairwise: pair.is_none(),
        }),
    }
}

/// Parallel coherence: ν(R_ν ⊓ K_ν) ⊓ μ(L_μ) ◁ μ(K_μ) for all pairs,
/// including μ = ν.
pub fn parallel_coherent(ms: &MatchSet) -> Result<Verdict<PairWitness>, CheckError> {
    let data = pair_data(ms)?;
    for mu in &data {
        for nu in &data {
            let overlap = nu
                .rhs_kept_image
                .meet(&mu.lhs_image)
                .map_err(RewriteError::Graph)?;
            if let Some(defect) = overlap.subgraph_defect(&mu.kept_image) {
                return Ok(Verdict::Fails(PairWitness {
                    mu: mu.id.clone(),
                    nu: nu.id.clone(),
                    defect,
                }));
            }
        }
    }
    Ok(Verdict::Holds)
}

/// The effective deletion property: the parallel application is disjoint
/// from Vd, Ad and ld ∖ llift.
pub fn effective_deletion(ms: &MatchSet) -> Result<Verdict<EdpViolation>, CheckError> {
    match edp_witness(ms)? {
        None => Ok(Verdict::Holds),
        Some(violation) => Ok(Verdict::Fails(violation)),
    }
}

/// All property flags for one match set, with the implication lattice
/// asserted internally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyReport {
    pub parallel_independent: Verdict<PairWitness>,
    /// `None` when |M| exceeded the sequential-independence bound.
    pub sequential_independent: Option<Verdict<SeqWitness>>,
    pub regular: Verdict<RegularityWitness>,
    /// The pairwise regularity algorithm; agrees with `regular` by
    /// construction (Lemma-level cross-check).
    pub regular_pairwise: Verdict<PairWitness>,
    pub parallel_coherent: Verdict<PairWitness>,
    pub effective_deletion: Verdict<EdpViolation>,
}

impl PropertyReport {
    pub fn flags(&self) -> ReportFlags {
        ReportFlags {
            parallel_independent: self.parallel_independent.holds(),
            sequential_independent: self.sequential_independent.as_ref().map(Verdict::holds),
            regular: self.regular.holds(),
            parallel_coherent: self.parallel_coherent.holds(),
            effective_deletion: self.effective_deletion.holds(),
        }
    }
}

/// The boolean summary of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportFlags {
    pub parallel_independent: bool,
    pub sequential_independent: Option<bool>,
    pub regular: bool,
    pub parallel_coherent: bool,
    pub effective_deletion: bool,
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn line<W: fmt::Display>(
            f: &mut fmt::Formatter<'_>,
            key: &str,
            verdict: &Verdict<W>,
        ) -> fmt::Result {
            writeln!(f, "{key} = {}", verdict.holds())?;
            if let Verdict::Fails(w) = verdict {
                writeln!(f, "{key}.witness = {w}")?;
            }
            Ok(())
        }
        line(f, "parindep", &self.parallel_independent)?;
        match &self.sequential_independent {
            None => writeln!(f, "seqindep = skipped (bound exceeded)")?,
            Some(v) => line(f, "seqindep", v)?,
        }
        line(f, "regular", &self.regular)?;
        line(f, "regular_pairwise", &self.regular_pairwise)?;
        line(f, "coherent", &self.parallel_coherent)?;
        line(f, "edp", &self.effective_deletion)?;
        Ok(())
    }
}

/// Computes all property flags and asserts the implication lattice
/// (regularity ⇒ coherence ⇒ EDP ⇐ parallel independence) plus the
/// equivalence of parallel and sequential independence when the latter
/// is within bound. Lattice violations signal implementation bugs.
pub fn property_report(ms: &MatchSet, seq_bound: usize) -> Result<PropertyReport, CheckError> {
    let parallel = parallel_independent(ms)?;
    let sequential = if ms.len() <= seq_bound {
        Some(sequential_independent(ms, seq_bound)?)
    } else {
        None
    };
    let (regular_verdict, pairwise_verdict) = split_regular(ms)?;
    let coherent = parallel_coherent(ms)?;
    let edp = effective_deletion(ms)?;

    if regular_verdict.holds() && !coherent.holds() {
        return Err(CheckError::LatticeViolation(
            "regular but not parallel coherent".into(),
        ));
    }
    if coherent.holds() && !edp.holds() {
        return Err(CheckError::LatticeViolation(
            "parallel coherent but no effective deletion".into(),
        ));
    }
    if parallel.holds() && !edp.holds() {
        return Err(CheckError::LatticeViolation(
            "parallel independent but no effective deletion".into(),
        ));
    }
    if let Some(seq) = &sequential {
        if seq.holds() != parallel.holds() {
            return Err(CheckError::LatticeViolation(
                "parallel and sequential independence disagree".into(),
            ));
        }
    }

    Ok(PropertyReport {
        parallel_independent: parallel,
        sequential_independent: sequential,
        regular: regular_verdict,
        regular_pairwise: pairwise_verdict,
        parallel_coherent: coherent,
        effective_deletion: edp,
    })
}

fn split_regular(
    ms: &MatchSet,
) -> Result<(Verdict<RegularityWitness>, Verdict<PairWitness>), CheckError> {
    match regular(ms)? {
        Verdict::Holds => Ok((Verdict::Holds, Verdict::Holds)),
        Verdict::Fails(w) => {
            let pair = w.pair.clone();
            Ok((Verdict::Fails(w), Verdict::Fails(pair)))
        }
    }
}

/// The ids of all matchings in a set, useful when printing witnesses.
pub fn matching_ids(ms: &MatchSet) -> BTreeSet<MatchingId> {
    ms.matchings().iter().map(|m| m.id().clone()).collect()
}
