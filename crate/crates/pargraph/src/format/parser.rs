//! Recursive-descent parser with validation woven in; recovers at
//! declaration boundaries so several diagnostics can be reported at once.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::lexer::{Token, TokenKind};
use super::{Diagnostic, Document, Span};
use crate::graph::{AttributedGraph, GraphBuilder, ItemId};
use crate::rules::Rule;
use crate::sigma::{
    evaluate, Algebra, Assignment, Carrier, ConcreteAlgebra, Interp, Signature, SortKind, Term,
    Value, validate_term,
};

pub(super) fn parse(tokens: Vec<Token>) -> Result<Document, Vec<Diagnostic>> {
    let mut parser = Parser {
        tokens,
        pos: 0,
        diags: Vec::new(),
        doc: Document::default(),
    };
    parser.document();
    if parser.diags.is_empty() {
        Ok(parser.doc)
    } else {
        Err(parser.diags)
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
    doc: Document,
}

/// A term as written, before context-dependent resolution.
#[derive(Debug, Clone)]
struct ParsedTerm {
    kind: ParsedTermKind,
    annot: Option<String>,
    span: Span,
}

#[derive(Debug, Clone)]
enum ParsedTermKind {
    Name(String),
    Int(i64),
    App(String, Vec<ParsedTerm>),
}

#[derive(Debug, Clone)]
struct ParsedItem {
    is_node: bool,
    name: String,
    src: Option<String>,
    tgt: Option<String>,
    attrs: Vec<ParsedTerm>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_kind(&self) -> &TokenKind {
        &self.peek().kind
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos.min(self.tokens.len() - 1)].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek_kind(), TokenKind::Eof)
    }

    fn error(&mut self, message: String, span: Span) {
        self.diags.push(Diagnostic::error(message, Some(span)));
    }

    fn expect(&mut self, kind: TokenKind) -> Option<Span> {
        if *self.peek_kind() == kind {
            Some(self.next().span)
        } else {
            let found = self.peek().clone();
            self.error(
                format!("expected {}, found {}", kind.describe(), found.kind.describe()),
                found.span,
            );
            None
        }
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek_kind() == kind {
            self.next();
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, word: &str) -> bool {
        if matches!(self.peek_kind(), TokenKind::Ident(s) if s == word) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, word: &str) -> bool {
        if self.eat_keyword(word) {
            true
        } else {
            let found = self.peek().clone();
            self.error(
                format!("expected `{word}`, found {}", found.kind.describe()),
                found.span,
            );
            false
        }
    }

    fn ident(&mut self, what: &str) -> Option<(String, Span)> {
        match self.peek_kind().clone() {
            TokenKind::Ident(s) => {
                let span = self.next().span;
                Some((s, span))
            }
            other => {
                let span = self.peek().span;
                self.error(format!("expected {what}, found {}", other.describe()), span);
                None
            }
        }
    }

    /// A name position that may also be written as a numeral (constant
    /// symbols and carrier values).
    fn name_or_numeral(&mut self, what: &str) -> Option<(String, Span)> {
        match self.peek_kind().clone() {
            TokenKind::Ident(s) => {
                let span = self.next().span;
                Some((s, span))
            }
            TokenKind::Int(n) => {
                let span = self.next().span;
                Some((n.to_string(), span))
            }
            other => {
                let span = self.peek().span;
                self.error(format!("expected {what}, found {}", other.describe()), span);
                None
            }
        }
    }

    /// Skips forward past the next `;`, or stops before `}`/end of input.
    fn recover_decl(&mut self) {
        loop {
            match self.peek_kind() {
                TokenKind::Semi => {
                    self.next();
                    return;
                }
                TokenKind::RBrace | TokenKind::Eof => return,
                TokenKind::LBrace => {
                    self.skip_block();
                }
                _ => {
                    self.next();
                }
            }
        }
    }

    /// Skips a braced block including nested ones.
    fn skip_block(&mut self) {
        if !self.eat(&TokenKind::LBrace) {
            self.next();
            return;
        }
        let mut depth = 1usize;
        while depth > 0 && !self.at_eof() {
            match self.next().kind {
                TokenKind::LBrace => depth += 1,
                TokenKind::RBrace => depth -= 1,
                _ => {}
            }
        }
    }

    fn document(&mut self) {
        while !self.at_eof() {
            let token = self.peek().clone();
            match &token.kind {
                TokenKind::Ident(word) => match word.as_str() {
                    "signature" => self.signature_decl(),
                    "algebra" => self.algebra_decl(),
                    "graph" => self.graph_decl(),
                    "rule" => self.rule_decl(),
                    other => {
                        self.error(
                            format!(
                                "expected `signature`, `algebra`, `graph` or `rule`, found `{other}`"
                            ),
                            token.span,
                        );
                        self.next();
                        self.recover_decl();
                    }
                },
                _ => {
                    self.error(
                        format!("expected a declaration, found {}", token.kind.describe()),
                        token.span,
                    );
                    self.next();
                }
            }
        }
    }

    // ----- signatures ------------------------------------------------

    fn signature_decl(&mut self) {
        self.next(); // `signature`
        let Some((name, name_span)) = self.ident("a signature name") else {
            self.recover_decl();
            return;
        };
        if self.expect(TokenKind::LBrace).is_none() {
            self.recover_decl();
            return;
        }
        let mut sig = Signature::new(name.clone());
        while !self.at_eof() && !matches!(self.peek_kind(), TokenKind::RBrace) {
            let token = self.peek().clone();
            let ok = match &token.kind {
                TokenKind::Ident(word) => match word.as_str() {
                    "sort" => self.sort_decl(&mut sig),
                    "const" => self.const_decl(&mut sig),
                    "op" => self.op_decl(&mut sig),
                    other => {
                        self.error(
                            format!("expected `sort`, `const` or `op`, found `{other}`"),
                            token.span,
                        );
                        false
                    }
                },
                _ => {
                    self.error(
                        format!("expected a signature item, found {}", token.kind.describe()),
                        token.span,
                    );
                    false
                }
            };
            if !ok {
                self.recover_decl();
            }
        }
        self.expect(TokenKind::RBrace);
        if self.doc.signatures.contains_key(&name) {
            self.error(format!("signature `{name}` is declared twice"), name_span);
        } else {
            self.doc.signatures.insert(name, Arc::new(sig));
        }
    }

    fn sort_decl(&mut self, sig: &mut Signature) -> bool {
        let span = self.next().span; // `sort`
        let Some((name, _)) = self.ident("a sort name") else {
            return false;
        };
        let kind = if self.eat_keyword("builtin") {
            SortKind::Int
        } else {
            SortKind::Finite
        };
        if self.expect(TokenKind::Semi).is_none() {
            return false;
        }
        if let Err(e) = sig.add_sort(name, kind) {
            self.error(e.to_string(), span);
        }
        true
    }

    fn const_decl(&mut self, sig: &mut Signature) -> bool {
        let span = self.next().span; // `const`
        let Some((name, _)) = self.name_or_numeral("a constant name") else {
            return false;
        };
        if self.expect(TokenKind::Colon).is_none() {
            return false;
        }
        let Some((sort, _)) = self.ident("a sort name") else {
            return false;
        };
        if self.expect(TokenKind::Semi).is_none() {
            return false;
        }
        if let Err(e) = sig.add_const(name, sort) {
            self.error(e.to_string(), span);
        }
        true
    }

    fn op_decl(&mut self, sig: &mut Signature) -> bool {
        let span = self.next().span; // `op`
        let Some((name, _)) = self.name_or_numeral("an operation name") else {
            return false;
        };
        if self.expect(TokenKind::Colon).is_none() {
            return false;
        }
        let Some((first, _)) = self.ident("a sort name") else {
            return false;
        };
        let mut args = vec![first];
        while self.eat_keyword("x") {
            let Some((sort, _)) = self.ident("a sort name") else {
                return false;
            };
            args.push(sort);
        }
        if self.expect(TokenKind::Arrow).is_none() {
            return false;
        }
        let Some((result, _)) = self.ident("a sort name") else {
            return false;
        };
        if self.expect(TokenKind::Semi).is_none() {
            return false;
        }
        if let Err(e) = sig.add_op(name, args, result) {
            self.error(e.to_string(), span);
        }
        true
    }

    // ----- algebras ----------------------------------------------------

    fn algebra_decl(&mut self) {
        let head = self.next().span; // `algebra`
        let Some((name, name_span)) = self.ident("an algebra name") else {
            self.recover_decl();
            return;
        };
        if !self.expect_keyword("over") {
            self.recover_decl();
            return;
        }
        let Some((sig_name, sig_span)) = self.ident("a signature name") else {
            self.recover_decl();
            return;
        };
        let Some(sig) = self.doc.signatures.get(&sig_name).cloned() else {
            self.error(format!("unknown signature `{sig_name}`"), sig_span);
            self.skip_block();
            return;
        };
        if self.expect(TokenKind::LBrace).is_none() {
            self.recover_decl();
            return;
        }

        let mut carriers: BTreeMap<String, Carrier> = BTreeMap::new();
        let mut interps: BTreeMap<String, Interp> = BTreeMap::new();
        while !self.at_eof() && !matches!(self.peek_kind(), TokenKind::RBrace) {
            let token = self.peek().clone();
            let ok = match &token.kind {
                TokenKind::Ident(word) => match word.as_str() {
                    "carrier" => self.carrier_decl(&sig, &mut carriers),
                    "map" => self.map_decl(&sig, &carriers, &mut interps),
                    other => {
                        self.error(
                            format!("expected `carrier` or `map`, found `{other}`"),
                            token.span,
                        );
                        false
                    }
                },
                _ => {
                    self.error(
                        format!("expected an algebra item, found {}", token.kind.describe()),
                        token.span,
                    );
                    false
                }
            };
            if !ok {
                self.recover_decl();
            }
        }
        self.expect(TokenKind::RBrace);

        // constants without an explicit map are interpreted as the carrier
        // value of the same name, when there is one
        for (op, decl) in sig.ops() {
            if decl.is_constant() && !interps.contains_key(op) {
                if let Some(Carrier::Finite(values)) = carriers.get(&decl.result) {
                    if values.contains(op) {
                        interps.insert(
                            op.clone(),
                            Interp::Table(BTreeMap::from([(
                                vec![],
                                Value::sym(decl.result.clone(), op.clone()),
                            )])),
                        );
                    }
                }
                if sig.sort_kind(&decl.result) == Some(SortKind::Int) {
                    if let Ok(n) = op.parse::<i64>() {
                        interps.entry(op.clone()).or_insert(Interp::ConstInt(n));
                    }
                }
            }
        }

        match ConcreteAlgebra::new(name.clone(), sig, carriers, interps) {
            Ok(algebra) => {
                if self.doc.algebras.contains_key(&name) {
                    self.error(format!("algebra `{name}` is declared twice"), name_span);
                } else {
                    self.doc
                        .algebras
                        .insert(name, Arc::new(Algebra::Concrete(algebra)));
                }
            }
            Err(e) => self.error(format!("invalid algebra `{name}`: {e}"), head),
        }
    }

    fn carrier_decl(&mut self, sig: &Signature, carriers: &mut BTreeMap<String, Carrier>) -> bool {
        self.next(); // `carrier`
        let Some((sort, sort_span)) = self.ident("a sort name") else {
            return false;
        };
        if self.expect(TokenKind::Equals).is_none() || self.expect(TokenKind::LBrace).is_none() {
            return false;
        }
        let mut values = BTreeSet::new();
        if !matches!(self.peek_kind(), TokenKind::RBrace) {
            loop {
                let Some((value, _)) = self.name_or_numeral("a carrier value") else {
                    return false;
                };
                values.insert(value);
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
        }
        if self.expect(TokenKind::RBrace).is_none() || self.expect(TokenKind::Semi).is_none() {
            return false;
        }
        if sig.sort_kind(&sort).is_none() {
            self.error(format!("unknown sort `{sort}`"), sort_span);
            return true;
        }
        if carriers.insert(sort.clone(), Carrier::Finite(values)).is_some() {
            self.error(format!("carrier of `{sort}` is declared twice"), sort_span);
        }
        true
    }

    fn map_decl(
        &mut self,
        sig: &Signature,
        carriers: &BTreeMap<String, Carrier>,
        interps: &mut BTreeMap<String, Interp>,
    ) -> bool {
        self.next(); // `map`
        let Some((op, op_span)) = self.name_or_numeral("an operation name") else {
            return false;
        };
        let Some(decl) = sig.op(&op).cloned() else {
            self.error(format!("unknown operation `{op}`"), op_span);
            self.recover_decl();
            return true;
        };

        if self.eat(&TokenKind::Equals) {
            // built-in interpretation
            if !self.expect_keyword("builtin") {
                return false;
            }
            let Some((which, which_span)) = self.ident("a built-in name") else {
                return false;
            };
            let interp = match which.as_str() {
                "succ" => Some(Interp::Succ),
                "pred" => Some(Interp::Pred),
                "add" => Some(Interp::Add),
                "const" => match self.peek_kind().clone() {
                    TokenKind::Int(n) => {
                        self.next();
                        Some(Interp::ConstInt(n))
                    }
                    other => {
                        let span = self.peek().span;
                        self.error(
                            format!("expected an integer, found {}", other.describe()),
                            span,
                        );
                        None
                    }
                },
                other => {
                    self.error(
                        format!(
                            "unknown built-in `{other}` (expected succ, pred, add or const)"
                        ),
                        which_span,
                    );
                    None
                }
            };
            if self.expect(TokenKind::Semi).is_none() {
                return false;
            }
            if let Some(interp) = interp {
                if interps.insert(op.clone(), interp).is_some() {
                    self.error(format!("`{op}` is mapped twice"), op_span);
                }
            }
            return true;
        }

        if self.expect(TokenKind::Colon).is_none() {
            return false;
        }
        let mut table: BTreeMap<Vec<Value>, Value> = BTreeMap::new();
        loop {
            if self.expect(TokenKind::LParen).is_none() {
                return false;
            }
            let mut tuple = Vec::new();
            if !matches!(self.peek_kind(), TokenKind::RParen) {
                loop {
                    let position = tuple.len();
                    let expected = decl.args.get(position).cloned();
                    let Some(value) = self.table_value(sig, carriers, expected.as_deref()) else {
                        return false;
                    };
                    tuple.push(value);
                    if !self.eat(&TokenKind::Comma) {
                        break;
                    }
                }
            }
            if self.expect(TokenKind::RParen).is_none()
                || self.expect(TokenKind::Arrow).is_none()
            {
                return false;
            }
            let Some(result) = self.table_value(sig, carriers, Some(&decl.result)) else {
                return false;
            };
            table.insert(tuple, result);
            if !self.eat(&TokenKind::Comma) {
                break;
            }
        }
        if self.expect(TokenKind::Semi).is_none() {
            return false;
        }
        if interps.insert(op.clone(), Interp::Table(table)).is_some() {
            self.error(format!("`{op}` is mapped twice"), op_span);
        }
        true
    }

    /// A value inside a map table; its sort is fixed by the operation's
    /// declaration, so no annotation is needed.
    fn table_value(
        &mut self,
        sig: &Signature,
        carriers: &BTreeMap<String, Carrier>,
        expected_sort: Option<&str>,
    ) -> Option<Value> {
        let token = self.next();
        let Some(sort) = expected_sort else {
            self.error("too many arguments in table entry".to_string(), token.span);
            return None;
        };
        match (&token.kind, sig.sort_kind(sort)) {
            (TokenKind::Int(n), Some(SortKind::Int)) => Some(Value::int(sort, *n)),
            (TokenKind::Int(n), Some(SortKind::Finite)) => {
                self.check_member(carriers, sort, &n.to_string(), token.span)
            }
            (TokenKind::Ident(name), Some(SortKind::Finite)) => {
                self.check_member(carriers, sort, name, token.span)
            }
            (kind, _) => {
                self.error(
                    format!("expected a value of sort `{sort}`, found {}", kind.describe()),
                    token.span,
                );
                None
            }
        }
    }

    fn check_member(
        &mut self,
        carriers: &BTreeMap<String, Carrier>,
        sort: &str,
        name: &str,
        span: Span,
    ) -> Option<Value> {
        match carriers.get(sort) {
            Some(Carrier::Finite(values)) if values.contains(name) => {
                Some(Value::sym(sort, name))
            }
            _ => {
                self.error(
                    format!("`{name}` is not in the carrier of sort `{sort}`"),
                    span,
                );
                None
            }
        }
    }

    // ----- graphs ------------------------------------------------------

    fn graph_decl(&mut self) {
        self.next(); // `graph`
        let Some((name, name_span)) = self.ident("a graph name") else {
            self.recover_decl();
            return;
        };
        if !self.expect_keyword("over") {
            self.recover_decl();
            return;
        }
        let Some((alg_name, alg_span)) = self.ident("an algebra name") else {
            self.recover_decl();
            return;
        };
        let Some(algebra) = self.doc.algebras.get(&alg_name).cloned() else {
            self.error(format!("unknown algebra `{alg_name}`"), alg_span);
            self.skip_block();
            return;
        };
        let Some(items) = self.item_block() else {
            return;
        };

        let mut builder = AttributedGraph::builder(algebra.clone());
        for item in &items {
            let mut attrs = Vec::new();
            for parsed in &item.attrs {
                if let Some(value) = self.resolve_graph_term(parsed, &algebra) {
                    attrs.push(Term::Lit(value));
                }
            }
            self.add_item(&mut builder, item, attrs);
        }
        match builder.build() {
            Ok(graph) => {
                if self.doc.graphs.contains_key(&name) {
                    self.error(format!("graph `{name}` is declared twice"), name_span);
                } else {
                    self.doc.graphs.insert(name, graph);
                }
            }
            Err(e) => self.error(format!("invalid graph `{name}`: {e}"), name_span),
        }
    }

    fn add_item(&mut self, builder: &mut GraphBuilder, item: &ParsedItem, attrs: Vec<Term>) {
        if item.is_node {
            builder.add_node(ItemId::plain(&item.name), attrs);
        } else {
            builder.add_arrow(
                ItemId::plain(&item.name),
                ItemId::plain(item.src.as_deref().unwrap_or_default()),
                ItemId::plain(item.tgt.as_deref().unwrap_or_default()),
                attrs,
            );
        }
    }

    /// `{ (node | arrow) ... ; ... }`, syntax only.
    fn item_block(&mut self) -> Option<Vec<ParsedItem>> {
        if self.expect(TokenKind::LBrace).is_none() {
            self.recover_decl();
            return None;
        }
        let mut items = Vec::new();
        while !self.at_eof() && !matches!(self.peek_kind(), TokenKind::RBrace) {
            let token = self.peek().clone();
            let ok = match &token.kind {
                TokenKind::Ident(word) if word == "node" => self.node_item(&mut items),
                TokenKind::Ident(word) if word == "arrow" => self.arrow_item(&mut items),
                other => {
                    self.error(
                        format!("expected `node` or `arrow`, found {}", other.describe()),
                        token.span,
                    );
                    false
                }
            };
            if !ok {
                self.recover_decl();
            }
        }
        self.expect(TokenKind::RBrace);
        Some(items)
    }

    fn node_item(&mut self, items: &mut Vec<ParsedItem>) -> bool {
        self.next(); // `node`
        let Some((name, _)) = self.ident("an item name") else {
            return false;
        };
        let Some(attrs) = self.attr_list() else {
            return false;
        };
        if self.expect(TokenKind::Semi).is_none() {
            return false;
        }
        items.push(ParsedItem {
            is_node: true,
            name,
            src: None,
            tgt: None,
            attrs,
        });
        true
    }

    fn arrow_item(&mut self, items: &mut Vec<ParsedItem>) -> bool {
        self.next(); // `arrow`
        let Some((name, _)) = self.ident("an item name") else {
            return false;
        };
        if self.expect(TokenKind::Colon).is_none() {
            return false;
        }
        let Some((src, _)) = self.ident("a source node") else {
            return false;
        };
        if self.expect(TokenKind::Arrow).is_none() {
            return false;
        }
        let Some((tgt, _)) = self.ident("a target node") else {
            return false;
        };
        let Some(attrs) = self.attr_list() else {
            return false;
        };
        if self.expect(TokenKind::Semi).is_none() {
            return false;
        }
        items.push(ParsedItem {
            is_node: false,
            name,
            src: Some(src),
            tgt: Some(tgt),
            attrs,
        });
        true
    }

    fn attr_list(&mut self) -> Option<Vec<ParsedTerm>> {
        if !self.eat(&TokenKind::LBracket) {
            return Some(Vec::new());
        }
        let mut attrs = Vec::new();
        if !matches!(self.peek_kind(), TokenKind::RBracket) {
            loop {
                attrs.push(self.term()?);
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
        }
        self.expect(TokenKind::RBracket)?;
        Some(attrs)
    }

    fn term(&mut self) -> Option<ParsedTerm> {
        let token = self.next();
        let mut term = match token.kind {
            TokenKind::Int(n) => ParsedTerm {
                kind: ParsedTermKind::Int(n),
                annot: None,
                span: token.span,
            },
            TokenKind::Ident(name) => {
                if self.eat(&TokenKind::LParen) {
                    let mut args = Vec::new();
                    if !matches!(self.peek_kind(), TokenKind::RParen) {
                        loop {
                            args.push(self.term()?);
                            if !self.eat(&TokenKind::Comma) {
                                break;
                            }
                        }
                    }
                    self.expect(TokenKind::RParen)?;
                    ParsedTerm {
                        kind: ParsedTermKind::App(name, args),
                        annot: None,
                        span: token.span,
                    }
                } else {
                    ParsedTerm {
                        kind: ParsedTermKind::Name(name),
                        annot: None,
                        span: token.span,
                    }
                }
            }
            other => {
                self.error(
                    format!("expected an attribute term, found {}", other.describe()),
                    token.span,
                );
                return None;
            }
        };
        if matches!(term.kind, ParsedTermKind::Name(_) | ParsedTermKind::Int(_))
            && self.eat(&TokenKind::Colon)
        {
            let (sort, _) = self.ident("a sort name")?;
            term.annot = Some(sort);
        }
        Some(term)
    }

    /// Resolves a graph attribute to a carrier value: constants and
    /// applications evaluate in the algebra, names and numerals resolve
    /// against the carriers.
    fn resolve_graph_term(&mut self, parsed: &ParsedTerm, algebra: &Algebra) -> Option<Value> {
        let alg = algebra.as_concrete().expect("graphs use concrete algebras");
        let term = self.ground_term(parsed, alg)?;
        match evaluate(&term, alg, &Assignment::new()) {
            Ok(value) => Some(value),
            Err(e) => {
                self.error(e.to_string(), parsed.span);
                None
            }
        }
    }

    fn ground_term(&mut self, parsed: &ParsedTerm, alg: &ConcreteAlgebra) -> Option<Term> {
        let sig = &alg.signature;
        match (&parsed.kind, &parsed.annot) {
            (ParsedTermKind::App(op, args), _) => {
                if sig.op(op).is_none() {
                    self.error(format!("unknown operation `{op}`"), parsed.span);
                    return None;
                }
                let mut resolved = Vec::new();
                for arg in args {
                    resolved.push(self.ground_term(arg, alg)?);
                }
                Some(Term::App(op.clone(), resolved))
            }
            (ParsedTermKind::Int(n), Some(sort)) => match sig.sort_kind(sort) {
                Some(SortKind::Int) => Some(Term::Lit(Value::int(sort.clone(), *n))),
                Some(SortKind::Finite) => {
                    self.value_of(alg, sort, &n.to_string(), parsed.span).map(Term::Lit)
                }
                None => {
                    self.error(format!("unknown sort `{sort}`"), parsed.span);
                    None
                }
            },
            (ParsedTermKind::Int(n), None) => {
                let name = n.to_string();
                if let Some(decl) = sig.op(&name) {
                    if decl.is_constant() {
                        return Some(Term::constant(name));
                    }
                }
                let mut candidates: Vec<Value> = Vec::new();
                if let Some(int_sort) = sig.unique_int_sort() {
                    candidates.push(Value::int(int_sort.clone(), *n));
                }
                for (sort, kind) in sig.sorts() {
                    if kind == SortKind::Finite {
                        let v = Value::sym(sort.clone(), name.clone());
                        if alg.contains(&v) {
                            candidates.push(v);
                        }
                    }
                }
                self.single_candidate(candidates, &name, parsed.span)
            }
            (ParsedTermKind::Name(name), Some(sort)) => match sig.sort_kind(sort) {
                Some(SortKind::Finite) => self.value_of(alg, sort, name, parsed.span).map(Term::Lit),
                Some(SortKind::Int) => {
                    self.error(
                        format!("`{name}` is not an integer of sort `{sort}`"),
                        parsed.span,
                    );
                    None
                }
                None => {
                    self.error(format!("unknown sort `{sort}`"), parsed.span);
                    None
                }
            },
            (ParsedTermKind::Name(name), None) => {
                if let Some(decl) = sig.op(name) {
                    if decl.is_constant() {
                        return Some(Term::constant(name.clone()));
                    }
                }
                let mut candidates: Vec<Value> = Vec::new();
                for (sort, kind) in sig.sorts() {
                    if kind == SortKind::Finite {
                        let v = Value::sym(sort.clone(), name.clone());
                        if alg.contains(&v) {
                            candidates.push(v);
                        }
                    }
                }
                self.single_candidate(candidates, name, parsed.span)
            }
        }
    }

    fn value_of(
        &mut self,
        alg: &ConcreteAlgebra,
        sort: &str,
        name: &str,
        span: Span,
    ) -> Option<Value> {
        let v = Value::sym(sort, name);
        if alg.contains(&v) {
            Some(v)
        } else {
            self.error(
                format!("`{name}` is not in the carrier of sort `{sort}`"),
                span,
            );
            None
        }
    }

    fn single_candidate(
        &mut self,
        candidates: Vec<Value>,
        name: &str,
        span: Span,
    ) -> Option<Term> {
        match candidates.len() {
            1 => Some(Term::Lit(candidates.into_iter().next().unwrap())),
            0 => {
                self.error(
                    format!("`{name}` names no constant or carrier value"),
                    span,
                );
                None
            }
            _ => {
                self.error(
                    format!("`{name}` is ambiguous; annotate it as `{name}:sort`"),
                    span,
                );
                None
            }
        }
    }

    // ----- rules ---------------------------------------------------------

    fn rule_decl(&mut self) {
        self.next(); // `rule`
        let Some((name, name_span)) = self.ident("a rule name") else {
            self.recover_decl();
            return;
        };
        if !self.expect_keyword("over") {
            self.recover_decl();
            return;
        }
        let Some((sig_name, sig_span)) = self.ident("a signature name") else {
            self.recover_decl();
            return;
        };
        let Some(sig) = self.doc.signatures.get(&sig_name).cloned() else {
            self.error(format!("unknown signature `{sig_name}`"), sig_span);
            self.skip_block();
            return;
        };

        let mut vars: BTreeMap<String, String> = BTreeMap::new();
        if self.eat_keyword("vars") {
            if self.expect(TokenKind::LParen).is_none() {
                self.recover_decl();
                return;
            }
            if !matches!(self.peek_kind(), TokenKind::RParen) {
                loop {
                    let Some((var, var_span)) = self.ident("a variable name") else {
                        self.recover_decl();
                        return;
                    };
                    if self.expect(TokenKind::Colon).is_none() {
                        self.recover_decl();
                        return;
                    }
                    let Some((sort, sort_span)) = self.ident("a sort name") else {
                        self.recover_decl();
                        return;
                    };
                    if sig.sort_kind(&sort).is_none() {
                        self.error(format!("unknown sort `{sort}`"), sort_span);
                    }
                    if vars.insert(var.clone(), sort).is_some() {
                        self.error(format!("variable `{var}` is declared twice"), var_span);
                    }
                    if !self.eat(&TokenKind::Comma) {
                        break;
                    }
                }
            }
            if self.expect(TokenKind::RParen).is_none() {
                self.recover_decl();
                return;
            }
        }

        if self.expect(TokenKind::LBrace).is_none() {
            self.recover_decl();
            return;
        }
        let mut components: Vec<Vec<ParsedItem>> = Vec::new();
        for part in ["L", "K", "R"] {
            if !self.expect_keyword(part) {
                self.skip_to_rule_end();
                return;
            }
            let Some(items) = self.item_block() else {
                self.skip_to_rule_end();
                return;
            };
            components.push(items);
        }
        self.expect(TokenKind::RBrace);

        let term_alg = Rule::term_algebra(sig.clone(), vars.clone());
        let mut graphs = Vec::new();
        let before = self.diags.len();
        for items in &components {
            let mut builder = AttributedGraph::builder(term_alg.clone());
            for item in items {
                let mut attrs = Vec::new();
                for parsed in &item.attrs {
                    if let Some(term) = self.rule_term(parsed, &sig, &vars) {
                        if let Err(errors) = validate_term(&term, &sig, &vars) {
                            for e in errors {
                                self.error(e.to_string(), parsed.span);
                            }
                        } else {
                            attrs.push(term);
                        }
                    }
                }
                self.add_item(&mut builder, item, attrs);
            }
            match builder.build() {
                Ok(graph) => graphs.push(graph),
                Err(e) => {
                    self.error(format!("invalid component of rule `{name}`: {e}"), name_span)
                }
            }
        }
        if graphs.len() < 3 || self.diags.len() > before {
            return;
        }
        let rhs = graphs.pop().unwrap();
        let kept = graphs.pop().unwrap();
        let lhs = graphs.pop().unwrap();
        match Rule::new(name.clone(), lhs, kept, rhs) {
            Ok(rule) => {
                if self.doc.rule(&name).is_some() {
                    self.error(format!("rule `{name}` is declared twice"), name_span);
                } else {
                    self.doc.rules.push(rule);
                }
            }
            Err(errors) => {
                for e in errors {
                    self.error(format!("invalid rule `{name}`: {e}"), name_span);
                }
            }
        }
    }

    fn skip_to_rule_end(&mut self) {
        // inside the outer rule braces; skip nested blocks until it closes
        let mut depth = 1usize;
        while depth > 0 && !self.at_eof() {
            match self.next().kind {
                TokenKind::LBrace => depth += 1,
                TokenKind::RBrace => depth -= 1,
                _ => {}
            }
        }
    }

    /// Resolves a term inside a rule: variables and constants by name,
    /// numerals as literals, annotated names as carrier values. Bare
    /// names that are neither variables nor constants are rejected.
    fn rule_term(
        &mut self,
        parsed: &ParsedTerm,
        sig: &Arc<Signature>,
        vars: &BTreeMap<String, String>,
    ) -> Option<Term> {
        match (&parsed.kind, &parsed.annot) {
            (ParsedTermKind::App(op, args), _) => {
                if sig.op(op).is_none() {
                    self.error(format!("unknown operation `{op}`"), parsed.span);
                    return None;
                }
                let mut resolved = Vec::new();
                for arg in args {
                    resolved.push(self.rule_term(arg, sig, vars)?);
                }
                Some(Term::App(op.clone(), resolved))
            }
            (ParsedTermKind::Int(n), Some(sort)) => match sig.sort_kind(sort) {
                Some(SortKind::Int) => Some(Term::Lit(Value::int(sort.clone(), *n))),
                Some(SortKind::Finite) => Some(Term::Lit(Value::sym(sort.clone(), n.to_string()))),
                None => {
                    self.error(format!("unknown sort `{sort}`"), parsed.span);
                    None
                }
            },
            (ParsedTermKind::Int(n), None) => {
                if let Some(op) = constant_named(sig, &n.to_string()) {
                    return Some(Term::constant(op));
                }
                if let Some(int_sort) = sig.unique_int_sort() {
                    return Some(Term::Lit(Value::int(int_sort.clone(), *n)));
                }
                let finite: Vec<&String> = sig
                    .sorts()
                    .filter(|(_, k)| *k == SortKind::Finite)
                    .map(|(s, _)| s)
                    .collect();
                match finite.as_slice() {
                    [sort] => Some(Term::Lit(Value::sym((*sort).clone(), n.to_string()))),
                    _ => {
                        self.error(
                            format!("`{n}` is ambiguous here; annotate it as `{n}:sort`"),
                            parsed.span,
                        );
                        None
                    }
                }
            }
            (ParsedTermKind::Name(name), Some(sort)) => match sig.sort_kind(sort) {
                Some(SortKind::Finite) => Some(Term::Lit(Value::sym(sort.clone(), name.clone()))),
                Some(SortKind::Int) => {
                    self.error(
                        format!("`{name}` is not an integer of sort `{sort}`"),
                        parsed.span,
                    );
                    None
                }
                None => {
                    self.error(format!("unknown sort `{sort}`"), parsed.span);
                    None
                }
            },
            (ParsedTermKind::Name(name), None) => {
                if let Some(sort) = vars.get(name) {
                    return Some(Term::var(name.clone(), sort.clone()));
                }
                if let Some(op) = constant_named(sig, name) {
                    return Some(Term::constant(op));
                }
                self.error(
                    format!("`{name}` is neither a variable nor a constant of the signature"),
                    parsed.span,
                );
                None
            }
        }
    }
}

fn constant_named(sig: &Signature, name: &str) -> Option<String> {
    sig.op(name)
        .filter(|decl| decl.is_constant())
        .map(|_| name.to_string())
}
