//! Canonical text rendering. Items are sorted (plain ids first, then
//! derived ids by origin and matching), attribute sets are sorted by
//! value, and derived ids are renamed to `origin@rule#k` with `k` the
//! matching's ordinal among the graph's matchings of that rule.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use super::Document;
use crate::graph::{AttributedGraph, ItemId, MatchingId};
use crate::rules::{local_name, Rule};
use crate::sigma::{
    Algebra, Carrier, ConcreteAlgebra, Interp, Signature, SortKind, Term, Value, ValueData,
};

/// The renaming of derived items to their canonical serialized names.
pub fn canonical_renaming(graph: &AttributedGraph) -> BTreeMap<ItemId, ItemId> {
    let mut per_rule: BTreeMap<String, BTreeSet<MatchingId>> = BTreeMap::new();
    for item in graph.items() {
        if let ItemId::Derived { matching, .. } = item {
            per_rule
                .entry(matching.rule.clone())
                .or_default()
                .insert(matching.clone());
        }
    }
    let ordinal: BTreeMap<&MatchingId, usize> = per_rule
        .values()
        .flat_map(|ids| ids.iter().enumerate().map(|(k, id)| (id, k)))
        .collect();

    let taken: BTreeSet<String> = graph
        .items()
        .filter_map(|x| match x {
            ItemId::Plain(s) => Some(s.clone()),
            ItemId::Derived { .. } => None,
        })
        .collect();
    let mut renaming = BTreeMap::new();
    for item in graph.items() {
        if let ItemId::Derived { origin, matching } = item {
            let local = local_name(&matching.rule, &ItemId::plain(origin.clone()));
            let mut name = format!("{local}@{}#{}", matching.rule, ordinal[matching]);
            while taken.contains(&name) {
                name.push('\'');
            }
            renaming.insert(item.clone(), ItemId::plain(name));
        }
    }
    renaming
}

/// Canonical body of a graph: one `node`/`arrow` line per item.
pub fn serialize_graph(graph: &AttributedGraph) -> String {
    let renamed = graph.rename_items(&canonical_renaming(graph));
    let mut out = String::new();
    for n in renamed.nodes() {
        write!(out, "node {n}").unwrap();
        write_attrs(&mut out, &renamed, n);
        out.push_str(";\n");
    }
    for e in renamed.arrows() {
        write!(
            out,
            "arrow {e} : {} -> {}",
            renamed.src(e).unwrap(),
            renamed.tgt(e).unwrap()
        )
        .unwrap();
        write_attrs(&mut out, &renamed, e);
        out.push_str(";\n");
    }
    out
}

fn write_attrs(out: &mut String, graph: &AttributedGraph, item: &ItemId) {
    let attrs = graph.attrs(item);
    if attrs.is_empty() {
        return;
    }
    let alg = graph.algebra().as_concrete();
    let rendered: Vec<String> = attrs
        .iter()
        .map(|t| match (t, alg) {
            (Term::Lit(v), Some(alg)) => render_value(v, alg),
            _ => t.to_string(),
        })
        .collect();
    write!(out, " [{}]", rendered.join(", ")).unwrap();
}

/// Renders a value so the parser resolves it back to the same value,
/// annotating with the sort when the bare spelling would be ambiguous.
fn render_value(value: &Value, alg: &ConcreteAlgebra) -> String {
    let bare = value.to_string();
    if resolves_bare(&bare, alg) == Some(value.clone()) {
        bare
    } else {
        format!("{bare}:{}", value.sort)
    }
}

/// Mirrors the parser's resolution of a bare attribute token in a graph
/// body: constants win, then a unique carrier value of that name.
fn resolves_bare(text: &str, alg: &ConcreteAlgebra) -> Option<Value> {
    let sig = &alg.signature;
    if let Some(decl) = sig.op(text) {
        if decl.is_constant() {
            return crate::sigma::evaluate(&Term::constant(text), alg, &Default::default()).ok();
        }
    }
    let mut candidates = Vec::new();
    if text.parse::<i64>().is_ok() {
        if let Some(int_sort) = sig.unique_int_sort() {
            candidates.push(Value::int(int_sort.clone(), text.parse().unwrap()));
        }
    }
    for (sort, kind) in sig.sorts() {
        if kind == SortKind::Finite {
            let v = Value::sym(sort.clone(), text);
            if alg.contains(&v) {
                candidates.push(v);
            }
        }
    }
    match candidates.len() {
        1 => candidates.into_iter().next(),
        _ => None,
    }
}

pub fn serialize_signature(sig: &Signature) -> String {
    let mut out = String::new();
    writeln!(out, "signature {} {{", sig.name).unwrap();
    for (name, kind) in sig.sorts() {
        match kind {
            SortKind::Finite => writeln!(out, "  sort {name};").unwrap(),
            SortKind::Int => writeln!(out, "  sort {name} builtin;").unwrap(),
        }
    }
    for (name, decl) in sig.ops() {
        if decl.is_constant() {
            writeln!(out, "  const {name} : {};", decl.result).unwrap();
        } else {
            writeln!(
                out,
                "  op {name} : {} -> {};",
                decl.args.join(" x "),
                decl.result
            )
            .unwrap();
        }
    }
    out.push_str("}\n");
    out
}

pub fn serialize_algebra(alg: &ConcreteAlgebra) -> String {
    let mut out = String::new();
    writeln!(out, "algebra {} over {} {{", alg.name, alg.signature.name).unwrap();
    for (sort, kind) in alg.signature.sorts() {
        if kind == SortKind::Finite {
            if let Some(Carrier::Finite(values)) = alg.carrier(sort) {
                let values: Vec<String> = values.iter().cloned().collect();
                writeln!(out, "  carrier {sort} = {{{}}};", values.join(", ")).unwrap();
            }
        }
    }
    for (op, _) in alg.signature.ops() {
        let Some(interp) = alg.interp(op) else {
            continue;
        };
        match interp {
            Interp::Table(table) => {
                let entries: Vec<String> = table
                    .iter()
                    .map(|(tuple, result)| {
                        let args: Vec<String> = tuple.iter().map(|v| v.to_string()).collect();
                        format!("({}) -> {result}", args.join(", "))
                    })
                    .collect();
                writeln!(out, "  map {op} : {};", entries.join(", ")).unwrap();
            }
            Interp::Succ => writeln!(out, "  map {op} = builtin succ;").unwrap(),
            Interp::Pred => writeln!(out, "  map {op} = builtin pred;").unwrap(),
            Interp::Add => writeln!(out, "  map {op} = builtin add;").unwrap(),
            Interp::ConstInt(n) => writeln!(out, "  map {op} = builtin const {n};").unwrap(),
        }
    }
    out.push_str("}\n");
    out
}

pub fn serialize_rule(rule: &Rule) -> String {
    let mut out = String::new();
    write!(out, "rule {} over {}", rule.name(), rule.signature().name).unwrap();
    if !rule.vars().is_empty() {
        let vars: Vec<String> = rule
            .vars()
            .iter()
            .map(|(n, s)| format!("{n}: {s}"))
            .collect();
        write!(out, " vars ({})", vars.join(", ")).unwrap();
    }
    out.push_str(" {\n");
    for (label, graph) in [
        ("L", rule.lhs()),
        ("K", rule.kept()),
        ("R", rule.rhs()),
    ] {
        writeln!(out, "  {label} {{").unwrap();
        for line in rule_body(rule, graph).lines() {
            writeln!(out, "    {line}").unwrap();
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

fn rule_body(rule: &Rule, graph: &AttributedGraph) -> String {
    let mut out = String::new();
    let local = |x: &ItemId| local_name(rule.name(), x);
    for n in graph.nodes() {
        write!(out, "node {}", local(n)).unwrap();
        write_rule_attrs(&mut out, rule, graph, n);
        out.push_str(";\n");
    }
    for e in graph.arrows() {
        write!(
            out,
            "arrow {} : {} -> {}",
            local(e),
            local(graph.src(e).unwrap()),
            local(graph.tgt(e).unwrap())
        )
        .unwrap();
        write_rule_attrs(&mut out, rule, graph, e);
        out.push_str(";\n");
    }
    out
}

fn write_rule_attrs(out: &mut String, rule: &Rule, graph: &AttributedGraph, item: &ItemId) {
    let attrs = graph.attrs(item);
    if attrs.is_empty() {
        return;
    }
    let rendered: Vec<String> = attrs.iter().map(|t| render_rule_term(rule, t)).collect();
    write!(out, " [{}]", rendered.join(", ")).unwrap();
}

fn render_rule_term(rule: &Rule, term: &Term) -> String {
    match term {
        Term::Var(v) => v.name.clone(),
        Term::App(op, args) => {
            if args.is_empty() {
                op.clone()
            } else {
                let args: Vec<String> = args.iter().map(|a| render_rule_term(rule, a)).collect();
                format!("{op}({})", args.join(", "))
            }
        }
        Term::Lit(v) => {
            let sig = rule.signature();
            let bare = v.to_string();
            let resolves = match &v.data {
                ValueData::Int(_) => {
                    sig.op(&bare).is_none()
                        && sig.unique_int_sort().map(|s| s == &v.sort).unwrap_or(false)
                }
                ValueData::Sym(name) => {
                    // bare identifiers in rules are variables or constants;
                    // numerals may fall back to a unique finite sort
                    name.parse::<i64>().is_ok()
                        && sig.op(name).is_none()
                        && sig.unique_int_sort().is_none()
                        && {
                            let finite: Vec<&String> = sig
                                .sorts()
                                .filter(|(_, k)| *k == SortKind::Finite)
                                .map(|(s, _)| s)
                                .collect();
                            finite.len() == 1 && finite[0] == &v.sort
                        }
                }
            };
            if resolves {
                bare
            } else {
                format!("{bare}:{}", v.sort)
            }
        }
    }
}

/// A complete, reparsable document.
pub fn serialize_document(doc: &Document) -> String {
    let mut out = String::new();
    for sig in doc.signatures.values() {
        out.push_str(&serialize_signature(sig));
        out.push('\n');
    }
    for algebra in doc.algebras.values() {
        if let Algebra::Concrete(c) = &**algebra {
            out.push_str(&serialize_algebra(c));
            out.push('\n');
        }
    }
    for rule in &doc.rules {
        out.push_str(&serialize_rule(rule));
        out.push('\n');
    }
    for (name, graph) in &doc.graphs {
        let alg_name = graph
            .algebra()
            .as_concrete()
            .map(|c| c.name.clone())
            .unwrap_or_default();
        writeln!(out, "graph {name} over {alg_name} {{").unwrap();
        for line in serialize_graph(graph).lines() {
            writeln!(out, "  {line}").unwrap();
        }
        out.push_str("}\n\n");
    }
    out
}
