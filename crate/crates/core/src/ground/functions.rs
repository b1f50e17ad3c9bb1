use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::pddl::{BinOp, ExprAst, FunctionTerm, Term};
use crate::state::{ArithExpr, ObjId, VarId};

pub type FunctionKey = (String, Vec<ObjId>);

/// Arithmetic tree with exact constants, used until folding is done.
#[derive(Debug, Clone, PartialEq)]
pub enum RatExpr {
    Const(BigRational),
    Var(VarId),
    Binary(BinOp, Box<RatExpr>, Box<RatExpr>),
    Neg(Box<RatExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FoldError {
    /// A constant function term without an initial value.
    Undefined(FunctionKey),
    DivisionByZero,
}

/// Numeric variables (fluent) and folded constants.
pub struct FunctionEnv<'a> {
    pub vars: &'a HashMap<FunctionKey, VarId>,
    pub constants: &'a HashMap<FunctionKey, BigRational>,
}

impl FunctionEnv<'_> {
    pub fn key(t: &FunctionTerm, resolve: &impl Fn(&Term) -> ObjId) -> FunctionKey {
        (t.function.clone(), t.args.iter().map(resolve).collect())
    }

    /// Substitutes constants and folds constant subtrees exactly.
    pub fn fold(&self, e: &ExprAst, resolve: &impl Fn(&Term) -> ObjId) -> Result<RatExpr, FoldError> {
        Ok(match e {
            ExprAst::Number(n) => RatExpr::Const(n.clone()),
            ExprAst::Duration => unreachable!("?duration is substituted during flattening"),
            ExprAst::Function(t) => {
                let k = Self::key(t, resolve);
                if let Some(&v) = self.vars.get(&k) {
                    RatExpr::Var(v)
                } else if let Some(c) = self.constants.get(&k) {
                    RatExpr::Const(c.clone())
                } else {
                    return Err(FoldError::Undefined(k));
                }
            }
            ExprAst::Neg(a) => match self.fold(a, resolve)? {
                RatExpr::Const(c) => RatExpr::Const(-c),
                other => RatExpr::Neg(Box::new(other)),
            },
            ExprAst::Binary(op, a, b) => {
                let (x, y) = (self.fold(a, resolve)?, self.fold(b, resolve)?);
                match (&x, &y) {
                    (RatExpr::Const(p), RatExpr::Const(q)) => RatExpr::Const(match op {
                        BinOp::Add => p + q,
                        BinOp::Sub => p - q,
                        BinOp::Mul => p * q,
                        BinOp::Div => {
                            if q.is_zero() {
                                return Err(FoldError::DivisionByZero);
                            }
                            p / q
                        }
                    }),
                    _ => RatExpr::Binary(*op, Box::new(x), Box::new(y)),
                }
            }
        })
    }
}

impl RatExpr {
    pub fn as_const(&self) -> Option<&BigRational> {
        match self {
            RatExpr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn to_arith(&self) -> ArithExpr {
        match self {
            RatExpr::Const(c) => ArithExpr::Const(rational_to_f64(c)),
            RatExpr::Var(v) => ArithExpr::Var(*v),
            RatExpr::Neg(a) => ArithExpr::Neg(Box::new(a.to_arith())),
            RatExpr::Binary(op, a, b) => ArithExpr::binary(*op, a.to_arith(), b.to_arith()),
        }
    }
}

pub fn rational_to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn folds_constant_subtrees_exactly() {
        let vars = HashMap::from([(("fuel".to_string(), vec![0]), 0)]);
        let constants = HashMap::from([
            (("capacity".to_string(), vec![0]), q(750, 1)),
            (("refuel-rate".to_string(), vec![0]), q(25, 2)),
            (("slow-burn".to_string(), vec![0]), q(1, 3)),
        ]);
        let env = FunctionEnv { vars: &vars, constants: &constants };
        let f = |name: &str| {
            ExprAst::Function(FunctionTerm { function: name.into(), args: vec![Term::Const("plane".into())] })
        };
        let resolve = |_: &Term| 0;
        let body = ExprAst::Binary(
            BinOp::Div,
            Box::new(ExprAst::Binary(BinOp::Sub, Box::new(f("capacity")), Box::new(f("fuel")))),
            Box::new(f("refuel-rate")),
        );
        let folded = env.fold(&body, &resolve).unwrap();
        assert_eq!(folded.to_arith().eval(&[250.0]), Some(40.0));

        let burn = ExprAst::Binary(BinOp::Mul, Box::new(ExprAst::Number(q(1000, 1))), Box::new(f("slow-burn")));
        assert_eq!(env.fold(&burn, &resolve).unwrap(), RatExpr::Const(q(1000, 3)));
    }

    #[test]
    fn undefined_constant_is_reported() {
        let vars = HashMap::new();
        let constants = HashMap::new();
        let env = FunctionEnv { vars: &vars, constants: &constants };
        let e = ExprAst::Function(FunctionTerm { function: "distance".into(), args: vec![] });
        assert!(matches!(env.fold(&e, &|_| 0), Err(FoldError::Undefined(_))));
    }
}
