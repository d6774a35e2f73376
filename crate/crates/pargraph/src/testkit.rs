//! Shared fixtures for unit tests: the worked single-node and two-node
//! instances that the property checkers are calibrated against, plus a
//! few helpers for building values and terms tersely.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::graph::AttributedGraph;
use crate::rewrite::MatchSet;
use crate::rules::{find_matchings_all, Rule};
use crate::sigma::{
    Algebra, Carrier, ConcreteAlgebra, Interp, Signature, SortKind, Term, Value,
};

pub fn sym(sort: &str, name: &str) -> Term {
    Term::Lit(Value::sym(sort, name))
}

pub fn int(n: i64) -> Term {
    Term::Lit(Value::int("int", n))
}

pub fn var(name: &str, sort: &str) -> Term {
    Term::var(name, sort)
}

pub fn vars(list: &[(&str, &str)]) -> BTreeMap<String, String> {
    list.iter()
        .map(|(n, s)| (n.to_string(), s.to_string()))
        .collect()
}

pub fn match_set(host: &AttributedGraph, rules: &[Arc<Rule>]) -> MatchSet {
    let matchings = find_matchings_all(rules, host).expect("matchings enumerate");
    MatchSet::new(host.clone(), matchings).expect("matchings are valid")
}

/// The value-swap instance: two nodes holding an identifier and its
/// integer content, and one rule per single assignment.
pub struct Swap {
    pub algebra: Arc<Algebra>,
    pub host: AttributedGraph,
    pub r1: Arc<Rule>,
    pub r2: Arc<Rule>,
}

pub fn swap() -> Swap {
    let mut sig = Signature::new("swap");
    sig.add_sort("ident", SortKind::Finite).unwrap();
    sig.add_sort("int", SortKind::Int).unwrap();
    let sig = Arc::new(sig);
    let carriers = BTreeMap::from([(
        "ident".to_string(),
        Carrier::Finite(BTreeSet::from(["a".to_string(), "b".to_string()])),
    )]);
    let algebra = Arc::new(Algebra::Concrete(
        ConcreteAlgebra::new("env", sig.clone(), carriers, BTreeMap::new()).unwrap(),
    ));

    let host = AttributedGraph::builder(algebra.clone())
        .node("x", vec![sym("ident", "a"), int(1)])
        .node("y", vec![sym("ident", "b"), int(-1)])
        .build()
        .unwrap();

    let term_alg = Rule::term_algebra(sig.clone(), vars(&[("u", "int"), ("v", "int")]));
    let r1 = Rule::new(
        "r1",
        AttributedGraph::builder(term_alg.clone())
            .node("x1", vec![sym("ident", "a"), var("u", "int")])
            .node("y1", vec![sym("ident", "b"), var("v", "int")])
            .build()
            .unwrap(),
        AttributedGraph::builder(term_alg.clone())
            .node("x1", vec![sym("ident", "a")])
            .node("y1", vec![sym("ident", "b"), var("v", "int")])
            .build()
            .unwrap(),
        AttributedGraph::builder(term_alg.clone())
            .node("x1", vec![sym("ident", "a"), var("v", "int")])
            .build()
            .unwrap(),
    )
    .unwrap();
    let r2 = Rule::new(
        "r2",
        AttributedGraph::builder(term_alg.clone())
            .node("x2", vec![sym("ident", "a"), var("u", "int")])
            .node("y2", vec![sym("ident", "b"), var("v", "int")])
            .build()
            .unwrap(),
        AttributedGraph::builder(term_alg.clone())
            .node("x2", vec![sym("ident", "a"), var("u", "int")])
            .node("y2", vec![sym("ident", "b")])
            .build()
            .unwrap(),
        AttributedGraph::builder(term_alg)
            .node("y2", vec![sym("ident", "b"), var("u", "int")])
            .build()
            .unwrap(),
    )
    .unwrap();

    Swap {
        algebra,
        host,
        r1,
        r2,
    }
}

/// The delete/re-add instance on one node with carrier {0}: one rule
/// deletes the attribute, the other re-creates it.
pub struct Recreate {
    pub algebra: Arc<Algebra>,
    pub host: AttributedGraph,
    pub del: Arc<Rule>,
    pub add: Arc<Rule>,
}

pub fn recreate() -> Recreate {
    let mut sig = Signature::new("flip");
    sig.add_sort("val", SortKind::Finite).unwrap();
    let sig = Arc::new(sig);
    let carriers = BTreeMap::from([(
        "val".to_string(),
        Carrier::Finite(BTreeSet::from(["0".to_string()])),
    )]);
    let algebra = Arc::new(Algebra::Concrete(
        ConcreteAlgebra::new("A", sig.clone(), carriers, BTreeMap::new()).unwrap(),
    ));
    let host = AttributedGraph::builder(algebra.clone())
        .node("x", vec![sym("val", "0")])
        .build()
        .unwrap();

    let term_alg = Rule::term_algebra(sig, BTreeMap::new());
    let node = |attrs: Vec<Term>| {
        AttributedGraph::builder(term_alg.clone())
            .node("x1", attrs)
            .build()
            .unwrap()
    };
    let del = Rule::new(
        "del",
        node(vec![sym("val", "0")]),
        node(vec![]),
        node(vec![]),
    )
    .unwrap();
    let node2 = |attrs: Vec<Term>| {
        AttributedGraph::builder(term_alg.clone())
            .node("x2", attrs)
            .build()
            .unwrap()
    };
    let add = Rule::new(
        "add",
        node2(vec![]),
        node2(vec![]),
        node2(vec![sym("val", "0")]),
    )
    .unwrap();

    Recreate {
        algebra,
        host,
        del,
        add,
    }
}

/// The unlabeled two-node cycle whose rule deletes one endpoint and both
/// arrows; its two matchings overlap head-to-tail.
pub struct Conflict {
    pub algebra: Arc<Algebra>,
    pub host: AttributedGraph,
    pub rule: Arc<Rule>,
}

pub fn conflict() -> Conflict {
    let sig = Arc::new(Signature::new("bare"));
    let algebra = Arc::new(Algebra::Concrete(
        ConcreteAlgebra::new("empty", sig.clone(), BTreeMap::new(), BTreeMap::new()).unwrap(),
    ));
    let host = AttributedGraph::builder(algebra.clone())
        .node("y", vec![])
        .node("z", vec![])
        .arrow("g", "y", "z", vec![])
        .arrow("h", "z", "y", vec![])
        .build()
        .unwrap();

    let term_alg = Rule::term_algebra(sig, BTreeMap::new());
    let lhs = AttributedGraph::builder(term_alg.clone())
        .node("x", vec![])
        .node("xp", vec![])
        .arrow("f", "x", "xp", vec![])
        .arrow("fp", "xp", "x", vec![])
        .build()
        .unwrap();
    let keep = AttributedGraph::builder(term_alg.clone())
        .node("x", vec![])
        .build()
        .unwrap();
    let rule = Rule::new("r", lhs, keep.clone(), keep).unwrap();

    Conflict {
        algebra,
        host,
        rule,
    }
}

/// The interpreted single-node instance with a unary `f` evaluated as
/// the constant 0: one rule grows the attribute set with f(u), the other
/// replaces v by f(v).
pub struct Interp0 {
    pub algebra: Arc<Algebra>,
    pub host: AttributedGraph,
    pub grow: Arc<Rule>,
    pub flip: Arc<Rule>,
}

pub fn interp() -> Interp0 {
    let mut sig = Signature::new("un");
    sig.add_sort("val", SortKind::Finite).unwrap();
    sig.add_op("f", vec!["val".into()], "val").unwrap();
    let sig = Arc::new(sig);
    let zero = Value::sym("val", "0");
    let carriers = BTreeMap::from([(
        "val".to_string(),
        Carrier::Finite(BTreeSet::from(["0".to_string()])),
    )]);
    let interps = BTreeMap::from([(
        "f".to_string(),
        Interp::Table(BTreeMap::from([(vec![zero.clone()], zero)])),
    )]);
    let algebra = Arc::new(Algebra::Concrete(
        ConcreteAlgebra::new("A", sig.clone(), carriers, interps).unwrap(),
    ));
    let host = AttributedGraph::builder(algebra.clone())
        .node("x", vec![sym("val", "0")])
        .build()
        .unwrap();

    let ta_u = Rule::term_algebra(sig.clone(), vars(&[("u", "val")]));
    let node_u = |attrs: Vec<Term>| {
        AttributedGraph::builder(ta_u.clone())
            .node("x1", attrs)
            .build()
            .unwrap()
    };
    let grow = Rule::new(
        "grow",
        node_u(vec![var("u", "val")]),
        node_u(vec![var("u", "val")]),
        node_u(vec![
            var("u", "val"),
            Term::app("f", vec![var("u", "val")]),
        ]),
    )
    .unwrap();

    let ta_v = Rule::term_algebra(sig, vars(&[("v", "val")]));
    let node_v = |attrs: Vec<Term>| {
        AttributedGraph::builder(ta_v.clone())
            .node("x2", attrs)
            .build()
            .unwrap()
    };
    let flip = Rule::new(
        "flip",
        node_v(vec![var("v", "val")]),
        node_v(vec![]),
        node_v(vec![Term::app("f", vec![var("v", "val")])]),
    )
    .unwrap();

    Interp0 {
        algebra,
        host,
        grow,
        flip,
    }
}

/// The three-rule instance over carrier {0,1} showing that effective
/// deletion is not closed under subsets.
pub struct Three {
    pub algebra: Arc<Algebra>,
    pub host: AttributedGraph,
    pub del: Arc<Rule>,
    pub add: Arc<Rule>,
    pub grow: Arc<Rule>,
}

pub fn three() -> Three {
    let mut sig = Signature::new("tri");
    sig.add_sort("val", SortKind::Finite).unwrap();
    let sig = Arc::new(sig);
    let carriers = BTreeMap::from([(
        "val".to_string(),
        Carrier::Finite(BTreeSet::from(["0".to_string(), "1".to_string()])),
    )]);
    let algebra = Arc::new(Algebra::Concrete(
        ConcreteAlgebra::new("A", sig.clone(), carriers, BTreeMap::new()).unwrap(),
    ));
    let host = AttributedGraph::builder(algebra.clone())
        .node("x", vec![sym("val", "0")])
        .build()
        .unwrap();

    let term_alg = Rule::term_algebra(sig, BTreeMap::new());
    let node = |name: &str, attrs: Vec<Term>| {
        AttributedGraph::builder(term_alg.clone())
            .node(name, attrs)
            .build()
            .unwrap()
    };
    let del = Rule::new(
        "del",
        node("x1", vec![sym("val", "0")]),
        node("x1", vec![]),
        node("x1", vec![]),
    )
    .unwrap();
    let add = Rule::new(
        "add",
        node("x2", vec![]),
        node("x2", vec![]),
        node("x2", vec![sym("val", "0")]),
    )
    .unwrap();
    let grow = Rule::new(
        "grow",
        node("x3", vec![sym("val", "0")]),
        node("x3", vec![sym("val", "0")]),
        node("x3", vec![sym("val", "0"), sym("val", "1")]),
    )
    .unwrap();

    Three {
        algebra,
        host,
        del,
        add,
        grow,
    }
}
