use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;

use super::sexpr::Loc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Requirement {
    Strips,
    Typing,
    Fluents,
    DurativeActions,
    NegativePreconditions,
}

impl Requirement {
    pub const SUPPORTED: [Requirement; 5] = [
        Requirement::Strips,
        Requirement::Typing,
        Requirement::Fluents,
        Requirement::DurativeActions,
        Requirement::NegativePreconditions,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Requirement::Strips => ":strips",
            Requirement::Typing => ":typing",
            Requirement::Fluents => ":fluents",
            Requirement::DurativeActions => ":durative-actions",
            Requirement::NegativePreconditions => ":negative-preconditions",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<Self> {
        Self::SUPPORTED.into_iter().find(|r| r.keyword() == kw)
    }
}

/// A typed parameter or object. `types` holds more than one entry only for
/// `(either ...)` declarations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedName {
    pub name: String,
    pub types: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub name: String,
    pub params: Vec<TypedName>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(s) | Term::Const(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomAst {
    pub predicate: String,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunctionTerm {
    pub function: String,
    pub args: Vec<Term>,
}

impl FunctionTerm {
    pub fn is_total_time(&self) -> bool {
        self.function == "total-time" && self.args.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Number(BigRational),
    Function(FunctionTerm),
    /// The reserved `?duration` symbol.
    Duration,
    Binary(BinOp, Box<ExprAst>, Box<ExprAst>),
    Neg(Box<ExprAst>),
}

impl ExprAst {
    pub fn for_each_function<'a>(&'a self, f: &mut impl FnMut(&'a FunctionTerm)) {
        match self {
            ExprAst::Function(t) => f(t),
            ExprAst::Binary(_, a, b) => {
                a.for_each_function(f);
                b.for_each_function(f);
            }
            ExprAst::Neg(a) => a.for_each_function(f),
            ExprAst::Number(_) | ExprAst::Duration => {}
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparator {
    Le,
    Lt,
    Eq,
    Gt,
    Ge,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Le => "<=",
            Comparator::Lt => "<",
            Comparator::Eq => "=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            "<=" => Comparator::Le,
            "<" => Comparator::Lt,
            "=" => Comparator::Eq,
            ">" => Comparator::Gt,
            ">=" => Comparator::Ge,
            _ => return None,
        })
    }

    /// The comparator obtained by swapping the operands.
    pub fn flipped(self) -> Self {
        match self {
            Comparator::Le => Comparator::Ge,
            Comparator::Lt => Comparator::Gt,
            Comparator::Eq => Comparator::Eq,
            Comparator::Gt => Comparator::Lt,
            Comparator::Ge => Comparator::Le,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConditionAst {
    Atom(AtomAst),
    Not(AtomAst),
    Compare(Comparator, ExprAst, ExprAst),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AssignOp {
    Assign,
    Increase,
    Decrease,
}

impl AssignOp {
    pub fn keyword(self) -> &'static str {
        match self {
            AssignOp::Assign => "assign",
            AssignOp::Increase => "increase",
            AssignOp::Decrease => "decrease",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EffectAst {
    Add(AtomAst),
    Delete(AtomAst),
    Numeric(AssignOp, FunctionTerm, ExprAst),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimeSpec {
    AtStart,
    OverAll,
    AtEnd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timed<T> {
    pub when: TimeSpec,
    pub item: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionAst {
    pub name: String,
    pub params: Vec<TypedName>,
    /// `None` for plain (instantaneous) `:action` schemas.
    pub duration: Option<ExprAst>,
    pub conditions: Vec<Timed<ConditionAst>>,
    pub effects: Vec<Timed<EffectAst>>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainAst {
    pub name: String,
    pub requirements: Vec<Requirement>,
    /// type → supertype; every declared type chains up to `object`.
    pub types: BTreeMap<String, String>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<Schema>,
    pub functions: Vec<Schema>,
    pub actions: Vec<ActionAst>,
}

impl DomainAst {
    pub fn predicate(&self, name: &str) -> Option<&Schema> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&Schema> {
        self.functions.iter().find(|p| p.name == name)
    }

    pub fn has_type(&self, name: &str) -> bool {
        name == "object" || self.types.contains_key(name)
    }

    /// True when `ty` equals `ancestor` or inherits from it.
    pub fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        let mut cur = ty;
        for _ in 0..=self.types.len() {
            if cur == ancestor {
                return true;
            }
            match self.types.get(cur) {
                Some(parent) => cur = parent,
                None => return false,
            }
        }
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimization {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricAst {
    pub direction: Optimization,
    pub expr: ExprAst,
}

impl MetricAst {
    pub fn total_time() -> Self {
        MetricAst {
            direction: Optimization::Minimize,
            expr: ExprAst::Function(FunctionTerm { function: "total-time".into(), args: vec![] }),
        }
    }
}

/// Ground atom used in the problem file.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundAtomAst {
    pub predicate: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemAst {
    pub name: String,
    pub domain: String,
    pub objects: Vec<TypedName>,
    pub init_atoms: Vec<GroundAtomAst>,
    pub init_values: Vec<(GroundAtomAst, BigRational)>,
    pub goal: Vec<ConditionAst>,
    pub metric: MetricAst,
}
