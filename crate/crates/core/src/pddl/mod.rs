//! PDDL2.1 front end: reader, abstract syntax, and domain/problem parsers.

pub mod ast;
mod domain;
mod problem;
pub mod sexpr;

use std::fmt;

pub use ast::*;
pub use domain::parse_domain;
pub use problem::parse_problem;
pub use sexpr::{tokenize, Loc, SExpr, SExprKind};

use num_rational::BigRational;
use num_traits::Zero;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub loc: Option<Loc>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.loc {
            Some(loc) => write!(f, "{loc}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl ParseError {
    pub fn at(loc: Loc, message: impl Into<String>) -> Self {
        ParseError { loc: Some(loc), message: message.into() }
    }

    pub fn new(message: impl Into<String>) -> Self {
        ParseError { loc: None, message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, ParseError>;

/// Reads exactly one top-level expression.
pub fn read_single(text: &str) -> Result<SExpr> {
    let mut exprs = tokenize(text)?;
    match exprs.len() {
        1 => Ok(exprs.pop().unwrap()),
        0 => Err(ParseError::new("empty input")),
        _ => Err(ParseError::at(exprs[1].loc, "expected a single top-level expression")),
    }
}

pub fn parse_domain_text(text: &str) -> Result<DomainAst> {
    parse_domain(&read_single(text)?)
}

pub fn parse_problem_text(text: &str, domain: &DomainAst) -> Result<ProblemAst> {
    parse_problem(&read_single(text)?, domain)
}

fn expect_list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr]> {
    e.as_list().ok_or_else(|| ParseError::at(e.loc, format!("expected {what}, found '{e}'")))
}

fn expect_symbol<'a>(e: &'a SExpr, what: &str) -> Result<&'a str> {
    e.as_symbol().ok_or_else(|| ParseError::at(e.loc, format!("expected {what}, found '{e}'")))
}

/// `(define (<kind> <name>) ...)` → (name, remaining sections).
fn split_define<'a>(e: &'a SExpr, kind: &str) -> Result<(String, &'a [SExpr])> {
    let items = expect_list(e, "(define ...)")?;
    if items.first().and_then(SExpr::as_symbol) != Some("define") {
        return Err(ParseError::at(e.loc, "expected (define ...)"));
    }
    let header = items.get(1).ok_or_else(|| ParseError::at(e.loc, format!("missing ({kind} <name>)")))?;
    let h = expect_list(header, "header")?;
    if h.len() != 2 || h[0].as_symbol() != Some(kind) {
        return Err(ParseError::at(header.loc, format!("expected ({kind} <name>)")));
    }
    Ok((expect_symbol(&h[1], "name")?.to_string(), &items[2..]))
}

/// `a b - t c - (either u v) d` → typed names; untyped names default to `object`.
fn parse_typed_list(items: &[SExpr]) -> Result<Vec<TypedName>> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        if item.as_symbol() == Some("-") {
            let ty = items.get(i + 1).ok_or_else(|| ParseError::at(item.loc, "type expected after '-'"))?;
            let types = parse_type_spec(ty)?;
            if pending.is_empty() {
                return Err(ParseError::at(item.loc, "'-' without preceding names"));
            }
            for name in pending.drain(..) {
                out.push(TypedName { name, types: types.clone() });
            }
            i += 2;
        } else {
            pending.push(expect_symbol(item, "name")?.to_string());
            i += 1;
        }
    }
    for name in pending {
        out.push(TypedName { name, types: vec!["object".into()] });
    }
    Ok(out)
}

fn parse_type_spec(e: &SExpr) -> Result<Vec<String>> {
    if let Some(s) = e.as_symbol() {
        return Ok(vec![s.to_string()]);
    }
    let items = expect_list(e, "type")?;
    if items.first().and_then(SExpr::as_symbol) != Some("either") || items.len() < 2 {
        return Err(ParseError::at(e.loc, "expected a type name or (either ...)"));
    }
    items[1..].iter().map(|t| expect_symbol(t, "type name").map(str::to_string)).collect()
}

/// Symbol resolution context for formulas inside actions, goals and metrics.
struct FormulaContext<'a> {
    predicates: &'a [Schema],
    functions: &'a [Schema],
    /// Parameter names in scope (with leading `?`).
    params: &'a [TypedName],
    allow_duration: bool,
}

impl FormulaContext<'_> {
    fn term(&self, e: &SExpr) -> Result<Term> {
        let s = expect_symbol(e, "term")?;
        if s.starts_with('?') {
            if !self.params.iter().any(|p| p.name == s) {
                return Err(ParseError::at(e.loc, format!("unbound variable {s}")));
            }
            Ok(Term::Var(s.to_string()))
        } else {
            Ok(Term::Const(s.to_string()))
        }
    }

    fn atom(&self, e: &SExpr) -> Result<AtomAst> {
        let items = expect_list(e, "atom")?;
        let name = expect_symbol(items.first().ok_or_else(|| ParseError::at(e.loc, "empty atom"))?, "predicate")?;
        let schema = self
            .predicates
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| ParseError::at(e.loc, format!("undeclared predicate {name}")))?;
        if schema.params.len() != items.len() - 1 {
            return Err(ParseError::at(
                e.loc,
                format!("predicate {name} expects {} arguments, found {}", schema.params.len(), items.len() - 1),
            ));
        }
        let args = items[1..].iter().map(|a| self.term(a)).collect::<Result<_>>()?;
        Ok(AtomAst { predicate: name.to_string(), args })
    }

    fn function_term(&self, e: &SExpr) -> Result<FunctionTerm> {
        let (name, args): (&str, &[SExpr]) = match &e.kind {
            SExprKind::Symbol(s) => (s, &[]),
            SExprKind::List(items) if !items.is_empty() => (expect_symbol(&items[0], "function name")?, &items[1..]),
            _ => return Err(ParseError::at(e.loc, format!("expected function term, found '{e}'"))),
        };
        if name == "total-time" {
            if !args.is_empty() {
                return Err(ParseError::at(e.loc, "total-time takes no arguments"));
            }
        } else {
            let schema = self
                .functions
                .iter()
                .find(|f| f.name == name)
                .ok_or_else(|| ParseError::at(e.loc, format!("undeclared function {name}")))?;
            if schema.params.len() != args.len() {
                return Err(ParseError::at(
                    e.loc,
                    format!("function {name} expects {} arguments, found {}", schema.params.len(), args.len()),
                ));
            }
        }
        let args = args.iter().map(|a| self.term(a)).collect::<Result<_>>()?;
        Ok(FunctionTerm { function: name.to_string(), args })
    }

    fn expr(&self, e: &SExpr) -> Result<ExprAst> {
        match &e.kind {
            SExprKind::Number(n) => Ok(ExprAst::Number(n.clone())),
            SExprKind::Symbol(s) if s == "?duration" => {
                if self.allow_duration {
                    Ok(ExprAst::Duration)
                } else {
                    Err(ParseError::at(e.loc, "?duration outside a durative action"))
                }
            }
            SExprKind::Symbol(_) => Ok(ExprAst::Function(self.function_term(e)?)),
            SExprKind::List(items) => {
                let head = items.first().ok_or_else(|| ParseError::at(e.loc, "empty expression"))?;
                let op = match head.as_symbol() {
                    Some("+") => Some(BinOp::Add),
                    Some("-") => Some(BinOp::Sub),
                    Some("*") => Some(BinOp::Mul),
                    Some("/") => Some(BinOp::Div),
                    _ => None,
                };
                let Some(op) = op else {
                    return Ok(ExprAst::Function(self.function_term(e)?));
                };
                let args = items[1..].iter().map(|a| self.expr(a)).collect::<Result<Vec<_>>>()?;
                match (op, args.len()) {
                    (BinOp::Sub, 1) => Ok(ExprAst::Neg(Box::new(args.into_iter().next().unwrap()))),
                    (_, 0 | 1) => Err(ParseError::at(e.loc, format!("'{}' needs two operands", op.symbol()))),
                    (BinOp::Sub | BinOp::Div, n) if n > 2 => {
                        Err(ParseError::at(e.loc, format!("'{}' takes exactly two operands", op.symbol())))
                    }
                    _ => {
                        let mut it = args.into_iter();
                        let first = it.next().unwrap();
                        Ok(it.fold(first, |acc, x| ExprAst::Binary(op, Box::new(acc), Box::new(x))))
                    }
                }
            }
            SExprKind::Keyword(k) => Err(ParseError::at(e.loc, format!("unexpected keyword {k}"))),
        }
    }

    fn condition(&self, e: &SExpr) -> Result<ConditionAst> {
        let items = expect_list(e, "condition")?;
        match e.head() {
            Some("not") => {
                if items.len() != 2 {
                    return Err(ParseError::at(e.loc, "(not ...) takes one atom"));
                }
                Ok(ConditionAst::Not(self.atom(&items[1])?))
            }
            Some(cmp) if Comparator::from_symbol(cmp).is_some() => {
                if items.len() != 3 {
                    return Err(ParseError::at(e.loc, format!("'{cmp}' takes two operands")));
                }
                Ok(ConditionAst::Compare(
                    Comparator::from_symbol(cmp).unwrap(),
                    self.expr(&items[1])?,
                    self.expr(&items[2])?,
                ))
            }
            Some("or" | "imply" | "forall" | "exists" | "when") => {
                Err(ParseError::at(e.loc, format!("'{}' is outside the supported subset", e.head().unwrap())))
            }
            _ => Ok(ConditionAst::Atom(self.atom(e)?)),
        }
    }

    /// Flattens nested `(and ...)` into its conjuncts.
    fn conjuncts<'e>(&self, e: &'e SExpr, out: &mut Vec<&'e SExpr>) -> Result<()> {
        match e.head() {
            Some("and") => {
                for c in &e.as_list().unwrap()[1..] {
                    self.conjuncts(c, out)?;
                }
            }
            _ => {
                if e.as_list().is_some_and(<[SExpr]>::is_empty) {
                    return Ok(());
                }
                out.push(e);
            }
        }
        Ok(())
    }
}

/// Evaluates a ground numeric expression exactly; used for init values.
fn eval_ground_number(e: &SExpr) -> Result<BigRational> {
    match &e.kind {
        SExprKind::Number(n) => Ok(n.clone()),
        SExprKind::List(items) if !items.is_empty() => {
            let args = items[1..].iter().map(eval_ground_number).collect::<Result<Vec<_>>>()?;
            let res = match (items[0].as_symbol(), args.as_slice()) {
                (Some("-"), [a]) => -a.clone(),
                (Some("+"), [a, b]) => a + b,
                (Some("-"), [a, b]) => a - b,
                (Some("*"), [a, b]) => a * b,
                (Some("/"), [a, b]) => {
                    if b.is_zero() {
                        return Err(ParseError::at(e.loc, "division by zero"));
                    }
                    a / b
                }
                _ => return Err(ParseError::at(e.loc, format!("expected a numeric value, found '{e}'"))),
            };
            Ok(res)
        }
        _ => Err(ParseError::at(e.loc, format!("expected a numeric value, found '{e}'"))),
    }
}
