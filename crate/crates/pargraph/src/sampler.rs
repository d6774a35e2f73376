//! Seeded random instances (host graph, rule set, match set) used to
//! validate the independence theorems and the implication lattice
//! empirically. Sizes stay at desk scale so the exponential
//! sequential-independence check remains cheap.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::graph::{AttributedGraph, ItemId};
use crate::rewrite::MatchSet;
use crate::rules::{find_matchings_all, Rule};
use crate::sigma::{
    Algebra, Carrier, ConcreteAlgebra, Interp, Signature, SortKind, Term, Value,
};

/// Size limits for sampled instances.
#[derive(Debug, Clone)]
pub struct SamplerConfig {
    /// Upper bound on host items (nodes plus arrows).
    pub max_host_items: usize,
    /// Upper bound on rules per instance.
    pub max_rules: usize,
    /// Upper bound on carrier size.
    pub max_carrier: usize,
    /// Upper bound on the size of the sampled match set.
    pub max_match_set: usize,
    /// Generate unlabeled instances (no attributes anywhere).
    pub unlabeled: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            max_host_items: 4,
            max_rules: 2,
            max_carrier: 3,
            max_match_set: 4,
            unlabeled: false,
        }
    }
}

/// One sampled instance: a host, its rules, all their matchings and a
/// selected subset of bounded size.
pub struct Instance {
    pub host: AttributedGraph,
    pub rules: Vec<Arc<Rule>>,
    pub all: MatchSet,
    pub selected: MatchSet,
}

pub struct InstanceSampler {
    rng: StdRng,
    config: SamplerConfig,
}

impl InstanceSampler {
    pub fn new(seed: u64, config: SamplerConfig) -> Self {
        InstanceSampler {
            rng: StdRng::seed_from_u64(seed),
            config,
        }
    }

    /// Draws the next instance; retries internally until rule generation
    /// and matching enumeration succeed.
    pub fn next_instance(&mut self) -> Instance {
        loop {
            if let Some(instance) = self.try_instance() {
                return instance;
            }
        }
    }

    fn try_instance(&mut self) -> Option<Instance> {
        let carrier_size = if self.config.unlabeled {
            1
        } else {
            self.rng.gen_range(1..=self.config.max_carrier)
        };
        let with_op = !self.config.unlabeled && self.rng.gen_bool(0.5);

        let mut sig = Signature::new("sampled");
        sig.add_sort("s", SortKind::Finite).unwrap();
        if with_op {
            sig.add_op("f", vec!["s".into()], "s").unwrap();
        }
        let sig = Arc::new(sig);

        let names: Vec<String> = (0..carrier_size).map(|i| format!("v{i}")).collect();
        let values: Vec<Value> = names.iter().map(|n| Value::sym("s", n.clone())).collect();
        let mut interps = BTreeMap::new();
        if with_op {
            let table: BTreeMap<Vec<Value>, Value> = values
                .iter()
                .map(|v| {
                    (
                        vec![v.clone()],
                        values[self.rng.gen_range(0..values.len())].clone(),
                    )
                })
                .collect();
            interps.insert("f".to_string(), Interp::Table(table));
        }
        let carriers = BTreeMap::from([(
            "s".to_string(),
            Carrier::Finite(names.iter().cloned().collect()),
        )]);
        let algebra = Arc::new(Algebra::Concrete(
            ConcreteAlgebra::new("A", sig.clone(), carriers, interps).unwrap(),
        ));

        let host = self.random_host(&algebra, &values);
        let rule_count = self.rng.gen_range(1..=self.config.max_rules);
        let mut rules = Vec::new();
        for i in 0..rule_count {
            rules.push(self.random_rule(&format!("r{i}"), &sig, &values, with_op)?);
        }

        let matchings = find_matchings_all(&rules, &host).ok()?;
        let all = MatchSet::new(host.clone(), matchings.clone()).ok()?;
        let mut pool = matchings;
        pool.shuffle(&mut self.rng);
        let take = self
            .rng
            .gen_range(0..=pool.len().min(self.config.max_match_set));
        let selected = MatchSet::new(host.clone(), pool.into_iter().take(take).collect()).ok()?;
        Some(Instance {
            host,
            rules,
            all,
            selected,
        })
    }

    fn random_attr_values(&mut self, values: &[Value]) -> Vec<Term> {
        if self.config.unlabeled {
            return Vec::new();
        }
        values
            .iter()
            .filter(|_| self.rng.gen_bool(0.35))
            .map(|v| Term::Lit(v.clone()))
            .collect()
    }

    fn random_host(&mut self, algebra: &Arc<Algebra>, values: &[Value]) -> AttributedGraph {
        let nodes = self.rng.gen_range(1..=self.config.max_host_items.min(3));
        let arrows = self
            .rng
            .gen_range(0..=(self.config.max_host_items - nodes).min(3));
        let mut builder = AttributedGraph::builder(algebra.clone());
        for i in 0..nodes {
            let attrs = self.random_attr_values(values);
            builder.add_node(ItemId::plain(format!("n{i}")), attrs);
        }
        for i in 0..arrows {
            let s = self.rng.gen_range(0..nodes);
            let t = self.rng.gen_range(0..nodes);
            let attrs = self.random_attr_values(values);
            builder.add_arrow(
                ItemId::plain(format!("e{i}")),
                ItemId::plain(format!("n{s}")),
                ItemId::plain(format!("n{t}")),
                attrs,
            );
        }
        builder.build().expect("random host is well-formed")
    }

    /// A random attribute term over the variables `u`, `v` and the carrier.
    fn random_term(&mut self, values: &[Value], with_op: bool) -> Term {
        let base = match self.rng.gen_range(0..3) {
            0 => Term::var("u", "s"),
            1 => Term::var("v", "s"),
            _ => Term::Lit(values[self.rng.gen_range(0..values.len())].clone()),
        };
        if with_op && self.rng.gen_bool(0.4) {
            Term::app("f", vec![base])
        } else {
            base
        }
    }

    fn random_rule(
        &mut self,
        name: &str,
        sig: &Arc<Signature>,
        values: &[Value],
        with_op: bool,
    ) -> Option<Arc<Rule>> {
        let node_count = self.rng.gen_range(1..=2);
        let arrow_count = self.rng.gen_range(0..=1);

        // L first; the declared variables are exactly those it uses
        let mut l_nodes: Vec<(String, Vec<Term>)> = Vec::new();
        for i in 0..node_count {
            let attrs = if self.config.unlabeled {
                Vec::new()
            } else {
                (0..self.rng.gen_range(0..=2))
                    .map(|_| self.random_term(values, with_op))
                    .collect()
            };
            l_nodes.push((format!("x{i}"), attrs));
        }
        let mut l_arrows: Vec<(String, String, String, Vec<Term>)> = Vec::new();
        for i in 0..arrow_count {
            let s = self.rng.gen_range(0..node_count);
            let t = self.rng.gen_range(0..node_count);
            let attrs = if self.config.unlabeled || self.rng.gen_bool(0.5) {
                Vec::new()
            } else {
                vec![self.random_term(values, with_op)]
            };
            l_arrows.push((format!("a{i}"), format!("x{s}"), format!("x{t}"), attrs));
        }

        let used: BTreeSet<String> = l_nodes
            .iter()
            .map(|(_, attrs)| attrs)
            .chain(l_arrows.iter().map(|(_, _, _, attrs)| attrs))
            .flatten()
            .flat_map(crate::sigma::vars_of)
            .map(|v| v.name)
            .collect();
        let vars: BTreeMap<String, String> =
            used.into_iter().map(|n| (n, "s".to_string())).collect();
        let term_alg = Rule::term_algebra(sig.clone(), vars.clone());

        let mut lhs = AttributedGraph::builder(term_alg.clone());
        for (n, attrs) in &l_nodes {
            lhs.add_node(ItemId::plain(n), attrs.clone());
        }
        for (a, s, t, attrs) in &l_arrows {
            lhs.add_arrow(
                ItemId::plain(a),
                ItemId::plain(s),
                ItemId::plain(t),
                attrs.clone(),
            );
        }
        let lhs = lhs.build().ok()?;

        // K: a sub-selection of L
        let kept_nodes: BTreeSet<String> = l_nodes
            .iter()
            .filter(|_| self.rng.gen_bool(0.75))
            .map(|(n, _)| n.clone())
            .collect();
        let mut kept = AttributedGraph::builder(term_alg.clone());
        let mut kept_attrs: BTreeMap<String, BTreeSet<Term>> = BTreeMap::new();
        for (n, attrs) in &l_nodes {
            if kept_nodes.contains(n) {
                let keep: Vec<Term> = attrs
                    .iter()
                    .filter(|_| self.rng.gen_bool(0.6))
                    .cloned()
                    .collect();
                kept_attrs.insert(n.clone(), keep.iter().cloned().collect());
                kept.add_node(ItemId::plain(n), keep);
            }
        }
        let mut kept_arrow_ids: BTreeSet<String> = BTreeSet::new();
        for (a, s, t, attrs) in &l_arrows {
            if kept_nodes.contains(s) && kept_nodes.contains(t) && self.rng.gen_bool(0.75) {
                let keep: Vec<Term> = attrs
                    .iter()
                    .filter(|_| self.rng.gen_bool(0.6))
                    .cloned()
                    .collect();
                kept_attrs.insert(a.clone(), keep.iter().cloned().collect());
                kept_arrow_ids.insert(a.clone());
                kept.add_arrow(
                    ItemId::plain(a),
                    ItemId::plain(s),
                    ItemId::plain(t),
                    keep,
                );
            }
        }
        let kept = kept.build().ok()?;

        // R: some kept items plus possibly fresh ones; attributes filtered
        // so that L⊓R stays below K
        let l_attr = |n: &str| -> BTreeSet<Term> {
            l_nodes
                .iter()
                .map(|(name, a)| (name, a))
                .chain(l_arrows.iter().map(|(name, _, _, a)| (name, a)))
                .find(|(name, _)| name.as_str() == n)
                .map(|(_, a)| a.iter().cloned().collect())
                .unwrap_or_default()
        };
        let mut rhs = AttributedGraph::builder(term_alg.clone());
        let mut r_nodes: Vec<String> = kept_nodes
            .iter()
            .filter(|_| self.rng.gen_bool(0.8))
            .cloned()
            .collect();
        for i in 0..self.rng.gen_range(0..=1) {
            r_nodes.push(format!("w{i}"));
        }
        for n in &r_nodes {
            let mut attrs: Vec<Term> = if self.config.unlabeled {
                Vec::new()
            } else {
                (0..self.rng.gen_range(0..=2))
                    .map(|_| self.random_term(values, with_op))
                    .filter(|t| {
                        crate::sigma::vars_of(t)
                            .iter()
                            .all(|v| vars.contains_key(&v.name))
                    })
                    .collect()
            };
            let banned: BTreeSet<Term> = l_attr(n)
                .difference(&kept_attrs.get(n).cloned().unwrap_or_default())
                .cloned()
                .collect();
            attrs.retain(|t| !banned.contains(t));
            rhs.add_node(ItemId::plain(n), attrs);
        }
        for a in &kept_arrow_ids {
            let (_, s, t, _) = l_arrows.iter().find(|(id, _, _, _)| id == a).unwrap();
            if r_nodes.contains(s) && r_nodes.contains(t) && self.rng.gen_bool(0.7) {
                let keep: Vec<Term> = kept_attrs
                    .get(a)
                    .map(|k| {
                        k.iter()
                            .filter(|_| self.rng.gen_bool(0.8))
                            .cloned()
                            .collect()
                    })
                    .unwrap_or_default();
                rhs.add_arrow(
                    ItemId::plain(a),
                    ItemId::plain(s),
                    ItemId::plain(t),
                    keep,
                );
            }
        }
        if r_nodes.len() >= 2 && self.rng.gen_bool(0.3) {
            let s = r_nodes[self.rng.gen_range(0..r_nodes.len())].clone();
            let t = r_nodes[self.rng.gen_range(0..r_nodes.len())].clone();
            rhs.add_arrow(
                ItemId::plain("wa0"),
                ItemId::plain(s),
                ItemId::plain(t),
                Vec::new(),
            );
        }
        let rhs = rhs.build().ok()?;

        Rule::new(name, lhs, kept, rhs).ok()
    }
}

/// A random bijective renaming of a graph's items onto fresh plain ids.
pub fn random_renaming(rng: &mut StdRng, graph: &AttributedGraph) -> BTreeMap<ItemId, ItemId> {
    let mut items: Vec<ItemId> = graph.items().cloned().collect();
    items.shuffle(rng);
    items
        .into_iter()
        .enumerate()
        .map(|(i, x)| (x, ItemId::plain(format!("q{i}"))))
        .collect()
}
