//! Elementary cellular automata encoded as rewriting systems: a cycle of
//! cell nodes holding one bit each, and one rule per local neighborhood
//! configuration. A full parallel step computes one synchronous
//! generation. The array-based oracle is kept free of graph machinery so
//! the two routes stay independent.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{AttributedGraph, ItemId};
use crate::rules::Rule;
use crate::sigma::{
    Algebra, Carrier, ConcreteAlgebra, Interp, Signature, SortKind, Term, Value,
};

/// A cycle host graph together with the eight neighborhood rules of an
/// elementary automaton.
pub struct EcaSystem {
    pub algebra: Arc<Algebra>,
    pub host: AttributedGraph,
    pub rules: Vec<Arc<Rule>>,
    pub width: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EcaError {
    #[error("width {0} is too small; the encoding needs at least 3 cells")]
    WidthTooSmall(usize),
    #[error("cell {0} does not hold exactly one bit")]
    MalformedCell(ItemId),
}

fn bit_value(b: bool) -> Value {
    Value::sym("bit", if b { "1" } else { "0" })
}

fn bit_term(b: bool) -> Term {
    Term::Lit(bit_value(b))
}

/// The update table of a Wolfram rule number: entry (l, c, r) is bit
/// `4l + 2c + r` of the number.
fn update(rule_number: u8, l: bool, c: bool, r: bool) -> bool {
    let k = (l as u8) << 2 | (c as u8) << 1 | (r as u8);
    rule_number >> k & 1 == 1
}

/// The default initial configuration: a single centered 1.
pub fn single_one(width: usize) -> Vec<bool> {
    let mut bits = vec![false; width];
    if width > 0 {
        bits[width / 2] = true;
    }
    bits
}

/// Builds the cycle graph for `bits` and the eight neighborhood rules of
/// `rule_number`. Neighbor bits are read (kept in K); the center bit is
/// deleted and the updated bit is added by the right-hand side, so a
/// configuration that keeps a cell's bit makes the step non-regular while
/// the effective deletion property still holds.
pub fn eca_build(rule_number: u8, bits: &[bool]) -> Result<EcaSystem, EcaError> {
    let width = bits.len();
    if width < 3 {
        return Err(EcaError::WidthTooSmall(width));
    }

    let mut sig = Signature::new("eca");
    sig.add_sort("bit", SortKind::Finite).unwrap();
    sig.add_op("step", vec!["bit".into(); 3], "bit").unwrap();
    let sig = Arc::new(sig);

    let mut table = BTreeMap::new();
    for l in [false, true] {
        for c in [false, true] {
            for r in [false, true] {
                table.insert(
                    vec![bit_value(l), bit_value(c), bit_value(r)],
                    bit_value(update(rule_number, l, c, r)),
                );
            }
        }
    }
    let carriers = BTreeMap::from([(
        "bit".to_string(),
        Carrier::Finite(BTreeSet::from(["0".to_string(), "1".to_string()])),
    )]);
    let interps = BTreeMap::from([("step".to_string(), Interp::Table(table))]);
    let algebra = Arc::new(Algebra::Concrete(
        ConcreteAlgebra::new("bits", sig.clone(), carriers, interps).unwrap(),
    ));

    let mut builder = AttributedGraph::builder(algebra.clone());
    for (i, bit) in bits.iter().enumerate() {
        builder.add_node(ItemId::plain(cell_name(i)), vec![bit_term(*bit)]);
    }
    for i in 0..width {
        builder.add_arrow(
            ItemId::plain(format!("a{i:03}")),
            ItemId::plain(cell_name(i)),
            ItemId::plain(cell_name((i + 1) % width)),
            vec![],
        );
    }
    let host = builder.build().expect("cycle graph is well-formed");

    let mut rules = Vec::new();
    for l in [false, true] {
        for c in [false, true] {
            for r in [false, true] {
                rules.push(neighborhood_rule(&sig, l, c, r));
            }
        }
    }

    Ok(EcaSystem {
        algebra,
        host,
        rules,
        width,
    })
}

fn cell_name(i: usize) -> String {
    format!("x{i:03}")
}

fn neighborhood_rule(sig: &Arc<Signature>, l: bool, c: bool, r: bool) -> Arc<Rule> {
    let name = format!(
        "c{}{}{}",
        u8::from(l),
        u8::from(c),
        u8::from(r)
    );
    let term_alg = Rule::term_algebra(sig.clone(), BTreeMap::new());
    let shape = |center_attrs: Vec<Term>, with_neighbors: bool| {
        let mut b = AttributedGraph::builder(term_alg.clone());
        if with_neighbors {
            b = b
                .node("left", vec![bit_term(l)])
                .node("mid", center_attrs)
                .node("right", vec![bit_term(r)])
                .arrow("el", "left", "mid", vec![])
                .arrow("er", "mid", "right", vec![]);
        } else {
            b = b.node("mid", center_attrs);
        }
        b.build().expect("rule component is well-formed")
    };
    let lhs = shape(vec![bit_term(c)], true);
    let kept = shape(vec![], true);
    let rhs = shape(
        vec![Term::app(
            "step",
            vec![bit_term(l), bit_term(c), bit_term(r)],
        )],
        false,
    );
    Rule::new(name, lhs, kept, rhs).expect("neighborhood rule is valid")
}

/// Reads the configuration back off a cycle graph produced by stepping.
pub fn read_row(graph: &AttributedGraph, width: usize) -> Result<Vec<bool>, EcaError> {
    let one = Term::Lit(bit_value(true));
    let zero = Term::Lit(bit_value(false));
    (0..width)
        .map(|i| {
            let id = ItemId::plain(cell_name(i));
            let attrs = graph.attrs(&id);
            if attrs.len() != 1 || !graph.contains_item(&id) {
                return Err(EcaError::MalformedCell(id));
            }
            if attrs.contains(&one) {
                Ok(true)
            } else if attrs.contains(&zero) {
                Ok(false)
            } else {
                Err(EcaError::MalformedCell(id))
            }
        })
        .collect()
}

/// Direct synchronous array simulation, used only to validate the graph
/// route. Returns `steps + 1` rows including the initial one.
pub fn eca_oracle(rule_number: u8, bits: &[bool], steps: usize) -> Vec<Vec<bool>> {
    let width = bits.len();
    let mut rows = vec![bits.to_vec()];
    let mut current = bits.to_vec();
    for _ in 0..steps {
        let next: Vec<bool> = (0..width)
            .map(|i| {
                let l = current[(i + width - 1) % width];
                let r = current[(i + 1) % width];
                update(rule_number, l, current[i], r)
            })
            .collect();
        rows.push(next.clone());
        current = next;
    }
    rows
}

/// Renders a row the way the command-line tool prints generations.
pub fn render_row(bits: &[bool]) -> String {
    bits.iter().map(|b| if *b { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::independence::{effective_deletion, regular};
    use crate::rewrite::{full_parallel_step, MatchSet};

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn oracle_rule_90_is_xor_of_neighbors() {
        let rows = eca_oracle(90, &bits("0001000"), 1);
        assert_eq!(rows[1], bits("0010100"));
    }

    #[test]
    fn oracle_zero_steps_returns_the_initial_row() {
        let initial = bits("0110");
        assert_eq!(eca_oracle(90, &initial, 0), vec![initial]);
    }

    #[test]
    fn oracle_rule_204_is_the_identity() {
        let initial = bits("010011");
        let rows = eca_oracle(204, &initial, 3);
        assert!(rows.iter().all(|r| *r == initial));
    }

    #[test]
    fn one_step_of_rule_90_lights_the_neighbors() {
        let system = eca_build(90, &single_one(8)).unwrap();
        let next = full_parallel_step(&system.host, &system.rules).unwrap();
        let row = read_row(&next, 8).unwrap();
        // the 1 sits at index 4; rule 90 lights its two neighbors
        assert_eq!(render_row(&row), "00010100");
        assert_eq!(
            eca_oracle(90, &single_one(8), 1)[1],
            row,
            "oracle and graph route agree"
        );
    }

    #[test]
    fn rule_0_clears_everything() {
        let system = eca_build(0, &bits("0100110")).unwrap();
        let next = full_parallel_step(&system.host, &system.rules).unwrap();
        assert_eq!(read_row(&next, 7).unwrap(), bits("0000000"));
    }

    /// A cell whose bit is unchanged makes the step non-regular (the
    /// deleted bit is re-added by the same matching) while the effective
    /// deletion property still holds.
    #[test]
    fn identity_configurations_are_edp_but_not_regular() {
        let system = eca_build(204, &bits("010")).unwrap();
        let ms = MatchSet::all(system.host.clone(), &system.rules).unwrap();
        assert_eq!(ms.len(), 3, "one matching per cell");
        assert!(!regular(&ms).unwrap().holds());
        assert!(effective_deletion(&ms).unwrap().holds());
    }

    #[test]
    fn width_below_three_is_rejected() {
        assert!(matches!(
            eca_build(90, &bits("01")),
            Err(EcaError::WidthTooSmall(2))
        ));
    }

    #[test]
    fn twenty_generations_match_the_oracle() {
        let initial = single_one(9);
        let expected = eca_oracle(110, &initial, 20);
        let mut system = eca_build(110, &initial).unwrap();
        let mut rows = vec![read_row(&system.host, 9).unwrap()];
        for _ in 0..20 {
            let next = full_parallel_step(&system.host, &system.rules).unwrap();
            rows.push(read_row(&next, 9).unwrap());
            system.host = next;
        }
        assert_eq!(rows, expected);
    }
}
