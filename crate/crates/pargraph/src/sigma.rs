//! Many-sorted signatures, terms, algebras and term evaluation.
//!
//! Attribute values are always tagged with their sort, so carriers of
//! distinct sorts never collide even when two sorts enumerate the same
//! value names. Item identifiers live in a separate universe entirely
//! (see [`crate::graph::ItemId`]).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// How a sort is interpreted by concrete algebras.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortKind {
    /// Carrier is a finite enumerated value set, given per algebra.
    Finite,
    /// Carrier is the built-in integers.
    Int,
}

/// Argument and result sorts of an operation symbol. Constants are
/// zero-argument operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpDecl {
    pub args: Vec<String>,
    pub result: String,
}

impl OpDecl {
    pub fn is_constant(&self) -> bool {
        self.args.is_empty()
    }
}

/// A many-sorted signature: sort names plus operation symbols.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Signature {
    pub name: String,
    sorts: BTreeMap<String, SortKind>,
    ops: BTreeMap<String, OpDecl>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SigmaError {
    #[error("sort `{0}` is declared twice")]
    DuplicateSort(String),
    #[error("operation `{0}` is declared twice")]
    DuplicateOp(String),
    #[error("operation `{op}` refers to undeclared sort `{sort}`")]
    UndeclaredSort { op: String, sort: String },
}

impl Signature {
    pub fn new(name: impl Into<String>) -> Self {
        Signature {
            name: name.into(),
            sorts: BTreeMap::new(),
            ops: BTreeMap::new(),
        }
    }

    pub fn add_sort(&mut self, name: impl Into<String>, kind: SortKind) -> Result<(), SigmaError> {
        let name = name.into();
        if self.sorts.insert(name.clone(), kind).is_some() {
            return Err(SigmaError::DuplicateSort(name));
        }
        Ok(())
    }

    pub fn add_op(
        &mut self,
        name: impl Into<String>,
        args: Vec<String>,
        result: impl Into<String>,
    ) -> Result<(), SigmaError> {
        let name = name.into();
        let result = result.into();
        for sort in args.iter().chain(std::iter::once(&result)) {
            if !self.sorts.contains_key(sort) {
                return Err(SigmaError::UndeclaredSort {
                    op: name,
                    sort: sort.clone(),
                });
            }
        }
        if self.ops.insert(name.clone(), OpDecl { args, result }).is_some() {
            return Err(SigmaError::DuplicateOp(name));
        }
        Ok(())
    }

    pub fn add_const(
        &mut self,
        name: impl Into<String>,
        sort: impl Into<String>,
    ) -> Result<(), SigmaError> {
        self.add_op(name, Vec::new(), sort)
    }

    pub fn sort_kind(&self, sort: &str) -> Option<SortKind> {
        self.sorts.get(sort).copied()
    }

    pub fn op(&self, name: &str) -> Option<&OpDecl> {
        self.ops.get(name)
    }

    pub fn sorts(&self) -> impl Iterator<Item = (&String, SortKind)> {
        self.sorts.iter().map(|(n, k)| (n, *k))
    }

    pub fn ops(&self) -> impl Iterator<Item = (&String, &OpDecl)> {
        self.ops.iter()
    }

    /// The signature's built-in integer sort, when there is exactly one.
    /// Used to resolve unannotated integer literals.
    pub fn unique_int_sort(&self) -> Option<&String> {
        let mut ints = self.sorts.iter().filter(|(_, k)| **k == SortKind::Int);
        match (ints.next(), ints.next()) {
            (Some((name, _)), None) => Some(name),
            _ => None,
        }
    }
}

/// A sorted variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Variable {
    pub name: String,
    pub sort: String,
}

impl Variable {
    pub fn new(name: impl Into<String>, sort: impl Into<String>) -> Self {
        Variable {
            name: name.into(),
            sort: sort.into(),
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.name, self.sort)
    }
}

/// A sort-tagged carrier value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Value {
    pub sort: String,
    pub data: ValueData,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ValueData {
    Int(i64),
    Sym(String),
}

impl Value {
    pub fn int(sort: impl Into<String>, n: i64) -> Self {
        Value {
            sort: sort.into(),
            data: ValueData::Int(n),
        }
    }

    pub fn sym(sort: impl Into<String>, name: impl Into<String>) -> Self {
        Value {
            sort: sort.into(),
            data: ValueData::Sym(name.into()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.data {
            ValueData::Int(n) => write!(f, "{n}"),
            ValueData::Sym(s) => write!(f, "{s}"),
        }
    }
}

/// A term over a signature: a variable, an operation symbol applied to
/// argument terms, or a carrier value injected as a literal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Term {
    Lit(Value),
    Var(Variable),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>, sort: impl Into<String>) -> Self {
        Term::Var(Variable::new(name, sort))
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::App(name.into(), Vec::new())
    }

    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Self {
        Term::App(name.into(), args)
    }

    pub fn is_ground(&self) -> bool {
        vars_of(self).is_empty()
    }

    /// Replaces variables by the given terms; identity where unmapped.
    /// This is evaluation in a term algebra.
    pub fn substitute(&self, subst: &BTreeMap<String, Term>) -> Term {
        match self {
            Term::Lit(_) => self.clone(),
            Term::Var(v) => subst.get(&v.name).cloned().unwrap_or_else(|| self.clone()),
            Term::App(op, args) => Term::App(
                op.clone(),
                args.iter().map(|a| a.substitute(subst)).collect(),
            ),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Lit(v) => write!(f, "{v}"),
            Term::Var(v) => write!(f, "{}", v.name),
            Term::App(op, args) => {
                write!(f, "{op}")?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// The variables occurring in a term, at any depth.
pub fn vars_of(term: &Term) -> BTreeSet<Variable> {
    let mut out = BTreeSet::new();
    collect_vars(term, &mut out);
    out
}

fn collect_vars(term: &Term, out: &mut BTreeSet<Variable>) {
    match term {
        Term::Lit(_) => {}
        Term::Var(v) => {
            out.insert(v.clone());
        }
        Term::App(_, args) => {
            for a in args {
                collect_vars(a, out);
            }
        }
    }
}

/// A sorting error at a position (path of argument indices) in a term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortError {
    pub path: Vec<usize>,
    pub kind: SortErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SortErrorKind {
    #[error("unknown operation symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{op}` expects {expected} argument(s), found {found}")]
    ArityMismatch {
        op: String,
        expected: usize,
        found: usize,
    },
    #[error("expected sort `{expected}`, found `{found}`")]
    SortMismatch { expected: String, found: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{name}` declared with sort `{declared}`, used with sort `{used}`")]
    VariableSortMismatch {
        name: String,
        declared: String,
        used: String,
    },
    #[error("value of undeclared sort `{0}`")]
    UndeclaredValueSort(String),
}

impl fmt::Display for SortError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.kind)
        } else {
            let path = self
                .path
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(".");
            write!(f, "at argument {path}: {}", self.kind)
        }
    }
}

/// Checks that `term` is well-sorted over `sig` with variables drawn from
/// `vars` and returns its sort.
pub fn validate_term(
    term: &Term,
    sig: &Signature,
    vars: &BTreeMap<String, String>,
) -> Result<String, Vec<SortError>> {
    let mut errors = Vec::new();
    let sort = check_term(term, sig, vars, &mut Vec::new(), &mut errors);
    match sort {
        Some(s) if errors.is_empty() => Ok(s),
        _ => Err(errors),
    }
}

fn check_term(
    term: &Term,
    sig: &Signature,
    vars: &BTreeMap<String, String>,
    path: &mut Vec<usize>,
    errors: &mut Vec<SortError>,
) -> Option<String> {
    let fail = |kind: SortErrorKind, path: &[usize], errors: &mut Vec<SortError>| {
        errors.push(SortError {
            path: path.to_vec(),
            kind,
        });
        None
    };
    match term {
        Term::Lit(v) => {
            if sig.sort_kind(&v.sort).is_none() {
                return fail(SortErrorKind::UndeclaredValueSort(v.sort.clone()), path, errors);
            }
            Some(v.sort.clone())
        }
        Term::Var(v) => match vars.get(&v.name) {
            None => fail(SortErrorKind::UnknownVariable(v.name.clone()), path, errors),
            Some(declared) if *declared != v.sort => fail(
                SortErrorKind::VariableSortMismatch {
                    name: v.name.clone(),
                    declared: declared.clone(),
                    used: v.sort.clone(),
                },
                path,
                errors,
            ),
            Some(_) => Some(v.sort.clone()),
        },
        Term::App(op, args) => {
            let Some(decl) = sig.op(op) else {
                return fail(SortErrorKind::UnknownSymbol(op.clone()), path, errors);
            };
            let decl = decl.clone();
            if decl.args.len() != args.len() {
                return fail(
                    SortErrorKind::ArityMismatch {
                        op: op.clone(),
                        expected: decl.args.len(),
                        found: args.len(),
                    },
                    path,
                    errors,
                );
            }
            let mut ok = true;
            for (i, (arg, expected)) in args.iter().zip(decl.args.iter()).enumerate() {
                path.push(i);
                if let Some(found) = check_term(arg, sig, vars, path, errors) {
                    if found != *expected {
                        errors.push(SortError {
                            path: path.clone(),
                            kind: SortErrorKind::SortMismatch {
                                expected: expected.clone(),
                                found,
                            },
                        });
                        ok = false;
                    }
                } else {
                    ok = false;
                }
                path.pop();
            }
            ok.then(|| decl.result.clone())
        }
    }
}

/// Per-sort carrier of a concrete algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Carrier {
    /// Finite enumerated set of value names.
    Finite(BTreeSet<String>),
    /// The built-in integers.
    Int,
}

/// Interpretation of one operation symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Interp {
    /// Total finite table from argument tuples to results.
    Table(BTreeMap<Vec<Value>, Value>),
    /// Built-in successor on an integer sort.
    Succ,
    /// Built-in predecessor on an integer sort.
    Pred,
    /// Built-in addition on an integer sort.
    Add,
    /// Built-in integer constant.
    ConstInt(i64),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("sort `{0}` has no carrier")]
    MissingCarrier(String),
    #[error("carrier declared for undeclared sort `{0}`")]
    UnknownCarrierSort(String),
    #[error("sort `{0}` is built-in integer and takes no finite carrier")]
    IntSortWithFiniteCarrier(String),
    #[error("finite sort `{0}` needs an enumerated carrier")]
    FiniteSortWithIntCarrier(String),
    #[error("operation `{0}` has no interpretation")]
    MissingInterp(String),
    #[error("interpretation given for undeclared operation `{0}`")]
    UnknownInterpOp(String),
    #[error("table for `{op}` misses entry for {tuple:?}")]
    IncompleteTable { op: String, tuple: Vec<Value> },
    #[error("table for `{op}` maps {tuple:?} outside its sorts")]
    IllSortedTableEntry { op: String, tuple: Vec<Value> },
    #[error("built-in interpretation of `{op}` does not fit its declaration")]
    BuiltinSortMismatch { op: String },
    #[error("operation `{op}` involves an integer sort and needs a built-in interpretation")]
    TableOnIntSort { op: String },
}

/// A concrete Σ-algebra: one carrier per sort, one interpretation per
/// operation symbol, total on finite carriers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteAlgebra {
    pub name: String,
    pub signature: Arc<Signature>,
    carriers: BTreeMap<String, Carrier>,
    interps: BTreeMap<String, Interp>,
}

impl ConcreteAlgebra {
    pub fn new(
        name: impl Into<String>,
        signature: Arc<Signature>,
        carriers: BTreeMap<String, Carrier>,
        interps: BTreeMap<String, Interp>,
    ) -> Result<Self, AlgebraError> {
        let alg = ConcreteAlgebra {
            name: name.into(),
            signature,
            carriers,
            interps,
        };
        alg.check()?;
        Ok(alg)
    }

    fn check(&self) -> Result<(), AlgebraError> {
        for (sort, _) in self.carriers.iter() {
            if self.signature.sort_kind(sort).is_none() {
                return Err(AlgebraError::UnknownCarrierSort(sort.clone()));
            }
        }
        for (sort, kind) in self.signature.sorts() {
            match (kind, self.carriers.get(sort)) {
                (SortKind::Int, Some(Carrier::Int)) | (SortKind::Int, None) => {}
                (SortKind::Int, Some(Carrier::Finite(_))) => {
                    return Err(AlgebraError::IntSortWithFiniteCarrier(sort.clone()))
                }
                (SortKind::Finite, Some(Carrier::Finite(_))) => {}
                (SortKind::Finite, Some(Carrier::Int)) => {
                    return Err(AlgebraError::FiniteSortWithIntCarrier(sort.clone()))
                }
                (SortKind::Finite, None) => {
                    return Err(AlgebraError::MissingCarrier(sort.clone()))
                }
            }
        }
        for op in self.interps.keys() {
            if self.signature.op(op).is_none() {
                return Err(AlgebraError::UnknownInterpOp(op.clone()));
            }
        }
        for (op, decl) in self.signature.ops() {
            let interp = self
                .interps
                .get(op)
                .ok_or_else(|| AlgebraError::MissingInterp(op.clone()))?;
            self.check_interp(op, decl, interp)?;
        }
        Ok(())
    }

    fn check_interp(&self, op: &str, decl: &OpDecl, interp: &Interp) -> Result<(), AlgebraError> {
        let all_finite = decl
            .args
            .iter()
            .chain(std::iter::once(&decl.result))
            .all(|s| self.signature.sort_kind(s) == Some(SortKind::Finite));
        match interp {
            Interp::Table(table) => {
                if !all_finite {
                    return Err(AlgebraError::TableOnIntSort { op: op.to_string() });
                }
                for (tuple, result) in table {
                    let well_sorted = tuple.len() == decl.args.len()
                        && tuple
                            .iter()
                            .zip(decl.args.iter())
                            .all(|(v, s)| v.sort == *s && self.contains(v))
                        && result.sort == decl.result
                        && self.contains(result);
                    if !well_sorted {
                        return Err(AlgebraError::IllSortedTableEntry {
                            op: op.to_string(),
                            tuple: tuple.clone(),
                        });
                    }
                }
                // totality over the finite argument space
                for tuple in self.tuples(&decl.args) {
                    if !table.contains_key(&tuple) {
                        return Err(AlgebraError::IncompleteTable {
                            op: op.to_string(),
                            tuple,
                        });
                    }
                }
                Ok(())
            }
            Interp::Succ | Interp::Pred => {
                let fits = decl.args.len() == 1
                    && self.signature.sort_kind(&decl.args[0]) == Some(SortKind::Int)
                    && decl.args[0] == decl.result;
                fits.then_some(())
                    .ok_or(AlgebraError::BuiltinSortMismatch { op: op.to_string() })
            }
            Interp::Add => {
                let fits = decl.args.len() == 2
                    && decl.args[0] == decl.result
                    && decl.args[1] == decl.result
                    && self.signature.sort_kind(&decl.result) == Some(SortKind::Int);
                fits.then_some(())
                    .ok_or(AlgebraError::BuiltinSortMismatch { op: op.to_string() })
            }
            Interp::ConstInt(_) => {
                let fits = decl.args.is_empty()
                    && self.signature.sort_kind(&decl.result) == Some(SortKind::Int);
                fits.then_some(())
                    .ok_or(AlgebraError::BuiltinSortMismatch { op: op.to_string() })
            }
        }
    }

    fn tuples(&self, sorts: &[String]) -> Vec<Vec<Value>> {
        let mut out = vec![Vec::new()];
        for sort in sorts {
            let values = self.finite_values(sort).unwrap_or_default();
            let mut next = Vec::new();
            for prefix in &out {
                for v in &values {
                    let mut t = prefix.clone();
                    t.push(v.clone());
                    next.push(t);
                }
            }
            out = next;
        }
        out
    }

    pub fn carrier(&self, sort: &str) -> Option<&Carrier> {
        self.carriers.get(sort).or(
            match self.signature.sort_kind(sort) {
                Some(SortKind::Int) => Some(&Carrier::Int),
                _ => None,
            },
        )
    }

    pub fn contains(&self, v: &Value) -> bool {
        match (self.carrier(&v.sort), &v.data) {
            (Some(Carrier::Int), ValueData::Int(_)) => true,
            (Some(Carrier::Finite(names)), ValueData::Sym(name)) => names.contains(name),
            _ => false,
        }
    }

    /// All values of a finite sort, or `None` when the carrier is infinite.
    pub fn finite_values(&self, sort: &str) -> Option<Vec<Value>> {
        match self.carrier(sort)? {
            Carrier::Int => None,
            Carrier::Finite(names) => Some(
                names
                    .iter()
                    .map(|n| Value::sym(sort.to_string(), n.clone()))
                    .collect(),
            ),
        }
    }

    pub fn interp(&self, op: &str) -> Option<&Interp> {
        self.interps.get(op)
    }

    pub fn apply(&self, op: &str, args: &[Value]) -> Result<Value, EvalError> {
        let decl = self
            .signature
            .op(op)
            .ok_or_else(|| EvalError::UnknownSymbol(op.to_string()))?;
        let interp = self
            .interps
            .get(op)
            .ok_or_else(|| EvalError::MissingInterp(op.to_string()))?;
        match interp {
            Interp::Table(table) => table.get(args).cloned().ok_or_else(|| EvalError::TableGap {
                op: op.to_string(),
                tuple: args.to_vec(),
            }),
            Interp::Succ => int_unary(op, args, &decl.result, |n| n + 1),
            Interp::Pred => int_unary(op, args, &decl.result, |n| n - 1),
            Interp::Add => match args {
                [Value {
                    data: ValueData::Int(a),
                    ..
                }, Value {
                    data: ValueData::Int(b),
                    ..
                }] => Ok(Value::int(decl.result.clone(), a + b)),
                _ => Err(EvalError::IllSortedArguments(op.to_string())),
            },
            Interp::ConstInt(n) => Ok(Value::int(decl.result.clone(), *n)),
        }
    }
}

fn int_unary(
    op: &str,
    args: &[Value],
    result_sort: &str,
    f: impl Fn(i64) -> i64,
) -> Result<Value, EvalError> {
    match args {
        [Value {
            data: ValueData::Int(n),
            ..
        }] => Ok(Value::int(result_sort.to_string(), f(*n))),
        _ => Err(EvalError::IllSortedArguments(op.to_string())),
    }
}

/// The algebra attached to a graph: either the term algebra over a
/// variable set (used by rule components) or a concrete algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Algebra {
    Terms(TermAlgebra),
    Concrete(ConcreteAlgebra),
}

/// The algebra of Σ-terms over a finite variable set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermAlgebra {
    pub signature: Arc<Signature>,
    /// Variable name to sort.
    pub vars: BTreeMap<String, String>,
}

impl Algebra {
    pub fn signature(&self) -> &Arc<Signature> {
        match self {
            Algebra::Terms(t) => &t.signature,
            Algebra::Concrete(c) => &c.signature,
        }
    }

    pub fn as_concrete(&self) -> Option<&ConcreteAlgebra> {
        match self {
            Algebra::Concrete(c) => Some(c),
            Algebra::Terms(_) => None,
        }
    }

    pub fn as_terms(&self) -> Option<&TermAlgebra> {
        match self {
            Algebra::Terms(t) => Some(t),
            Algebra::Concrete(_) => None,
        }
    }

    /// Whether `t` is a legal carrier element of this algebra.
    pub fn admits(&self, t: &Term) -> bool {
        match self {
            Algebra::Concrete(c) => match t {
                Term::Lit(v) => c.contains(v),
                _ => false,
            },
            Algebra::Terms(ta) => validate_term(t, &ta.signature, &ta.vars).is_ok(),
        }
    }
}

/// A sort-respecting assignment of carrier values to variable names.
pub type Assignment = BTreeMap<String, Value>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("variable `{0}` is unassigned")]
    UnassignedVariable(String),
    #[error("variable `{name}` of sort `{sort}` assigned a value of sort `{value_sort}`")]
    AssignmentSortMismatch {
        name: String,
        sort: String,
        value_sort: String,
    },
    #[error("unknown operation symbol `{0}`")]
    UnknownSymbol(String),
    #[error("operation `{0}` has no interpretation")]
    MissingInterp(String),
    #[error("table for `{op}` has no entry for {tuple:?} (malformed algebra)")]
    TableGap { op: String, tuple: Vec<Value> },
    #[error("ill-sorted arguments for `{0}`")]
    IllSortedArguments(String),
    #[error("literal {0} lies outside the carrier (malformed algebra)")]
    LiteralOutsideCarrier(Value),
}

/// Homomorphic evaluation of a term in a concrete algebra: variables via
/// the assignment, operations via the algebra's interpretations.
pub fn evaluate(term: &Term, alg: &ConcreteAlgebra, asg: &Assignment) -> Result<Value, EvalError> {
    match term {
        Term::Lit(v) => {
            if alg.contains(v) {
                Ok(v.clone())
            } else {
                Err(EvalError::LiteralOutsideCarrier(v.clone()))
            }
        }
        Term::Var(v) => {
            let value = asg
                .get(&v.name)
                .ok_or_else(|| EvalError::UnassignedVariable(v.name.clone()))?;
            if value.sort != v.sort {
                return Err(EvalError::AssignmentSortMismatch {
                    name: v.name.clone(),
                    sort: v.sort.clone(),
                    value_sort: value.sort.clone(),
                });
            }
            Ok(value.clone())
        }
        Term::App(op, args) => {
            let mut values = Vec::with_capacity(args.len());
            for arg in args {
                values.push(evaluate(arg, alg, asg)?);
            }
            alg.apply(op, &values)
        }
    }
}
