//! The text format: documents holding signatures, algebras, graphs and
//! rules, a diagnosing parser, and the canonical serializer. The grammar
//! lives in `docs/grammar.ebnf`.

mod lexer;
mod parser;
mod serialize;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::graph::AttributedGraph;
use crate::rules::Rule;
use crate::sigma::{Algebra, Signature};

pub use serialize::{serialize_document, serialize_graph, serialize_rule};

/// A half-open byte range with the line/column of its start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// A parse or validation failure, with a source span whenever one is
/// known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub span: Option<Span>,
}

impl Diagnostic {
    pub fn error(message: String, span: Option<Span>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            message,
            span,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let severity = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match &self.span {
            Some(span) => write!(
                f,
                "{severity} at line {}, column {}: {}",
                span.line, span.col, self.message
            ),
            None => write!(f, "{severity}: {}", self.message),
        }
    }
}

/// A parsed and fully validated document.
#[derive(Debug, Clone, Default)]
pub struct Document {
    pub signatures: BTreeMap<String, Arc<Signature>>,
    pub algebras: BTreeMap<String, Arc<Algebra>>,
    pub graphs: BTreeMap<String, AttributedGraph>,
    /// Rules in declaration order.
    pub rules: Vec<Arc<Rule>>,
}

impl Document {
    pub fn is_empty(&self) -> bool {
        self.signatures.is_empty()
            && self.algebras.is_empty()
            && self.graphs.is_empty()
            && self.rules.is_empty()
    }

    pub fn graph(&self, name: &str) -> Option<&AttributedGraph> {
        self.graphs.get(name)
    }

    pub fn rule(&self, name: &str) -> Option<&Arc<Rule>> {
        self.rules.iter().find(|r| r.name() == name)
    }

    /// Resolves a rule selection: `all` or a comma-separated name list.
    pub fn select_rules(&self, selection: &str) -> Result<Vec<Arc<Rule>>, String> {
        if selection == "all" {
            return Ok(self.rules.clone());
        }
        selection
            .split(',')
            .map(|name| {
                let name = name.trim();
                self.rule(name)
                    .cloned()
                    .ok_or_else(|| format!("no rule named `{name}` in the document"))
            })
            .collect()
    }
}

/// Parses and validates a document; any failure yields at least one
/// diagnostic.
pub fn parse_document(text: &str) -> Result<Document, Vec<Diagnostic>> {
    let tokens = lexer::tokenize(text).map_err(|d| vec![d])?;
    parser::parse(tokens)
}
