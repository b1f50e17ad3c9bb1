use crate::pddl::{
    ActionAst, AssignOp, AtomAst, Comparator, ConditionAst, EffectAst, ExprAst, FunctionTerm, TypedName,
};

/// An action with its time tags dropped: one precondition set, one effect list.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub pre_pos: Vec<AtomAst>,
    pub pre_neg: Vec<AtomAst>,
    pub num_conds: Vec<(Comparator, ExprAst, ExprAst)>,
    pub adds: Vec<AtomAst>,
    pub dels: Vec<AtomAst>,
    pub num_effects: Vec<(AssignOp, FunctionTerm, ExprAst)>,
    /// `None` for instantaneous actions.
    pub duration: Option<ExprAst>,
}

fn substitute_duration(e: &ExprAst, dur: &Option<ExprAst>) -> ExprAst {
    match e {
        ExprAst::Duration => dur.clone().expect("?duration outside a durative action"),
        ExprAst::Binary(op, a, b) => {
            ExprAst::Binary(*op, Box::new(substitute_duration(a, dur)), Box::new(substitute_duration(b, dur)))
        }
        ExprAst::Neg(a) => ExprAst::Neg(Box::new(substitute_duration(a, dur))),
        other => other.clone(),
    }
}

/// Merges at-start, over-all and at-end conditions into one set and start and
/// end effects into one list in textual order.
pub fn flatten_temporal(a: &ActionAst) -> FlatSchema {
    let mut s = FlatSchema {
        name: a.name.clone(),
        params: a.params.clone(),
        pre_pos: Vec::new(),
        pre_neg: Vec::new(),
        num_conds: Vec::new(),
        adds: Vec::new(),
        dels: Vec::new(),
        num_effects: Vec::new(),
        duration: a.duration.clone(),
    };
    for c in &a.conditions {
        match &c.item {
            ConditionAst::Atom(at) => {
                if !s.pre_pos.contains(at) {
                    s.pre_pos.push(at.clone());
                }
            }
            ConditionAst::Not(at) => {
                if !s.pre_neg.contains(at) {
                    s.pre_neg.push(at.clone());
                }
            }
            ConditionAst::Compare(cmp, l, r) => {
                s.num_conds.push((*cmp, substitute_duration(l, &a.duration), substitute_duration(r, &a.duration)))
            }
        }
    }
    for e in &a.effects {
        match &e.item {
            EffectAst::Add(at) => s.adds.push(at.clone()),
            EffectAst::Delete(at) => s.dels.push(at.clone()),
            EffectAst::Numeric(op, head, body) => {
                s.num_effects.push((*op, head.clone(), substitute_duration(body, &a.duration)))
            }
        }
    }
    s
}
