use crate::pddl::{AssignOp, BinOp, Comparator};

use super::VarId;

/// Arithmetic tree over numeric variables and folded constants.
#[derive(Debug, Clone, PartialEq)]
pub enum ArithExpr {
    Const(f64),
    Var(VarId),
    Binary(BinOp, Box<ArithExpr>, Box<ArithExpr>),
    Neg(Box<ArithExpr>),
}

impl ArithExpr {
    pub fn binary(op: BinOp, a: ArithExpr, b: ArithExpr) -> Self {
        ArithExpr::Binary(op, Box::new(a), Box::new(b))
    }

    /// `None` on division by zero.
    pub fn eval(&self, vals: &[f64]) -> Option<f64> {
        Some(match self {
            ArithExpr::Const(c) => *c,
            ArithExpr::Var(v) => vals[*v as usize],
            ArithExpr::Neg(a) => -a.eval(vals)?,
            ArithExpr::Binary(op, a, b) => {
                let (x, y) = (a.eval(vals)?, b.eval(vals)?);
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return None;
                        }
                        x / y
                    }
                }
            }
        })
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            ArithExpr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<VarId> {
        match self {
            ArithExpr::Var(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        !self.for_each_leaf_any(&mut |_| true)
    }

    fn for_each_leaf_any(&self, f: &mut impl FnMut(VarId) -> bool) -> bool {
        match self {
            ArithExpr::Const(_) => false,
            ArithExpr::Var(v) => f(*v),
            ArithExpr::Neg(a) => a.for_each_leaf_any(f),
            ArithExpr::Binary(_, a, b) => a.for_each_leaf_any(f) || b.for_each_leaf_any(f),
        }
    }

    pub fn for_each_leaf(&self, f: &mut impl FnMut(VarId)) {
        self.for_each_leaf_any(&mut |v| {
            f(v);
            false
        });
    }

    /// L(t): sorted, deduplicated leaf variables.
    pub fn leaves(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        self.for_each_leaf(&mut |v| out.push(v));
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn mentions(&self, v: VarId) -> bool {
        self.for_each_leaf_any(&mut |x| x == v)
    }

    pub fn map_vars(&self, f: &impl Fn(VarId) -> VarId) -> ArithExpr {
        match self {
            ArithExpr::Const(c) => ArithExpr::Const(*c),
            ArithExpr::Var(v) => ArithExpr::Var(f(*v)),
            ArithExpr::Neg(a) => ArithExpr::Neg(Box::new(a.map_vars(f))),
            ArithExpr::Binary(op, a, b) => ArithExpr::binary(*op, a.map_vars(f), b.map_vars(f)),
        }
    }
}

impl Comparator {
    /// `a ⊗ b` with tolerance `eps` (0 means exact).
    pub fn holds(self, a: f64, b: f64, eps: f64) -> bool {
        match self {
            Comparator::Le => a <= b + eps,
            Comparator::Lt => a < b - eps,
            Comparator::Eq => (a - b).abs() <= eps,
            Comparator::Gt => a > b + eps,
            Comparator::Ge => a >= b - eps,
        }
    }
}

/// `lhs ⊗ rhs`. The grounder puts a variable on the left when either side is
/// one, so `head()` is the h_c of the normal form.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericCondition {
    pub lhs: ArithExpr,
    pub cmp: Comparator,
    pub rhs: ArithExpr,
}

impl NumericCondition {
    pub fn head(&self) -> Option<VarId> {
        self.lhs.as_var()
    }

    /// Every variable read by the condition, head included.
    pub fn reads(&self) -> Vec<VarId> {
        let mut v = self.lhs.leaves();
        v.extend(self.rhs.leaves());
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Evaluation failure counts as unsatisfied.
    pub fn satisfied(&self, vals: &[f64], eps: f64) -> bool {
        match (self.lhs.eval(vals), self.rhs.eval(vals)) {
            (Some(a), Some(b)) => self.cmp.holds(a, b, eps),
            _ => {
                log::debug!("numeric condition not evaluable; treated as false");
                false
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericEffect {
    pub head: VarId,
    pub op: AssignOp,
    pub body: ArithExpr,
}

impl NumericEffect {
    /// New value of the head given the current vector.
    pub fn value(&self, vals: &[f64]) -> Option<f64> {
        let x = self.body.eval(vals)?;
        let cur = vals[self.head as usize];
        Some(match self.op {
            AssignOp::Assign => x,
            AssignOp::Increase => cur + x,
            AssignOp::Decrease => cur - x,
        })
    }

    /// Increase/decrease by 0 or `v := v`.
    pub fn is_trivial(&self) -> bool {
        match self.op {
            AssignOp::Assign => self.body == ArithExpr::Var(self.head),
            AssignOp::Increase | AssignOp::Decrease => self.body.as_const() == Some(0.0),
        }
    }
}
