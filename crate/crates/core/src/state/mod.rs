//! Grounded states and normal-form operators.

mod bits;
mod dependency;
mod expr;

pub use bits::BitSet;
pub use dependency::{dependent, DependencyTable};
pub use expr::{ArithExpr, NumericCondition, NumericEffect};

use std::hash::{Hash, Hasher};

use crate::pddl::AssignOp;

pub type FluentId = u32;
pub type VarId = u32;
pub type OpId = u32;
pub type ObjId = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub props: BitSet,
    pub vals: Vec<f64>,
}

impl Eq for State {}

impl Hash for State {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.props.hash(h);
        for v in &self.vals {
            v.to_bits().hash(h);
        }
    }
}

impl State {
    pub fn holds(&self, f: FluentId) -> bool {
        self.props.contains(f)
    }
}

/// Normal form (α, β, γ, δ) plus the negative preconditions and the duration.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundedOperator {
    pub schema: String,
    pub args: Vec<ObjId>,
    /// α, sorted.
    pub pre: Vec<FluentId>,
    /// Fluents that must be false.
    pub pre_neg: Vec<FluentId>,
    pub add: Vec<FluentId>,
    pub del: Vec<FluentId>,
    pub conditions: Vec<NumericCondition>,
    /// δ in application order; the total-time increase comes first.
    pub effects: Vec<NumericEffect>,
    pub duration: ArithExpr,
    /// Variables read by γ (heads and bodies).
    pub cond_reads: Vec<VarId>,
    /// Variables read by effect bodies.
    pub eff_reads: Vec<VarId>,
    /// Effect heads other than total-time.
    pub writes: Vec<VarId>,
}

impl GroundedOperator {
    pub fn new(schema: impl Into<String>, args: Vec<ObjId>) -> Self {
        GroundedOperator {
            schema: schema.into(),
            args,
            pre: Vec::new(),
            pre_neg: Vec::new(),
            add: Vec::new(),
            del: Vec::new(),
            conditions: Vec::new(),
            effects: Vec::new(),
            duration: ArithExpr::Const(0.0),
            cond_reads: Vec::new(),
            eff_reads: Vec::new(),
            writes: Vec::new(),
        }
    }

    /// Propositional operator with unit duration folded away.
    pub fn strips(pre: Vec<FluentId>, add: Vec<FluentId>, del: Vec<FluentId>) -> Self {
        let mut o = GroundedOperator::new("op", vec![]);
        o.pre = pre;
        o.add = add;
        o.del = del;
        o.finalize(None);
        o
    }

    /// Sorts the fluent sets and recomputes the read/write footprints.
    pub fn finalize(&mut self, total_time: Option<VarId>) {
        for set in [&mut self.pre, &mut self.pre_neg, &mut self.add, &mut self.del] {
            set.sort_unstable();
            set.dedup();
        }
        let mut cond = Vec::new();
        for c in &self.conditions {
            cond.extend(c.reads());
        }
        cond.sort_unstable();
        cond.dedup();
        let mut reads = Vec::new();
        let mut writes = Vec::new();
        for e in &self.effects {
            reads.extend(e.body.leaves());
            if Some(e.head) != total_time {
                writes.push(e.head);
            }
        }
        reads.sort_unstable();
        reads.dedup();
        writes.sort_unstable();
        writes.dedup();
        self.cond_reads = cond;
        self.eff_reads = reads;
        self.writes = writes;
    }

    pub fn prop_applicable(&self, s: &State) -> bool {
        self.pre.iter().all(|&f| s.props.contains(f)) && !self.pre_neg.iter().any(|&f| s.props.contains(f))
    }

    /// α ⊆ S_p, negative preconditions false, every c ∈ γ satisfied.
    pub fn applicable(&self, s: &State, eps: f64) -> bool {
        self.prop_applicable(s) && self.conditions.iter().all(|c| c.satisfied(&s.vals, eps))
    }

    /// Applies the effects; `None` when an effect body cannot be evaluated.
    pub fn try_apply(&self, s: &State) -> Option<State> {
        let mut props = s.props.clone();
        for &f in &self.del {
            props.remove(f);
        }
        for &f in &self.add {
            props.insert(f);
        }
        let mut vals = s.vals.clone();
        for e in &self.effects {
            let v = e.value(&vals)?;
            vals[e.head as usize] = v;
        }
        Some(State { props, vals })
    }

    pub fn apply(&self, s: &State) -> State {
        debug_assert!(self.prop_applicable(s), "operator applied outside its preconditions");
        self.try_apply(s).expect("effect body not evaluable")
    }

    pub fn successor(&self, s: &State, eps: f64) -> Option<State> {
        if self.applicable(s, eps) {
            self.try_apply(s)
        } else {
            None
        }
    }

    /// Duration in state `s`: the amount the first effect adds to total-time.
    pub fn duration_in(&self, s: &State) -> Option<f64> {
        self.duration.eval(&s.vals)
    }

    pub fn modifies_var(&self, v: VarId) -> bool {
        self.effects.iter().any(|e| e.head == v && !e.is_trivial())
    }

    pub fn increase_only(&self, v: VarId) -> bool {
        self.effects.iter().filter(|e| e.head == v).all(|e| match e.op {
            AssignOp::Increase => e.body.as_const().is_some_and(|c| c >= 0.0),
            AssignOp::Decrease => e.body.as_const().is_some_and(|c| c <= 0.0),
            AssignOp::Assign => false,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Goal {
    pub pos: Vec<FluentId>,
    pub neg: Vec<FluentId>,
    pub numeric: Vec<NumericCondition>,
}

impl Goal {
    pub fn is_empty(&self) -> bool {
        self.pos.is_empty() && self.neg.is_empty() && self.numeric.is_empty()
    }

    pub fn satisfied(&self, s: &State, eps: f64) -> bool {
        self.pos.iter().all(|&f| s.props.contains(f))
            && !self.neg.iter().any(|&f| s.props.contains(f))
            && self.numeric.iter().all(|c| c.satisfied(&s.vals, eps))
    }
}
