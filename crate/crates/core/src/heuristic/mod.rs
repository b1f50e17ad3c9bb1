//! Delete relaxation: layered reachability with optimistic numeric bounds,
//! relaxed plan extraction and the scheduling variant.

use std::collections::HashSet;

use crate::ground::GroundedInstance;
use crate::pddl::{AssignOp, BinOp, Comparator};
use crate::schedule::{extended_makespan, TimedStep};
use crate::state::{ArithExpr, DependencyTable, FluentId, NumericCondition, OpId, State, VarId};

pub const UNREACHED: u32 = u32::MAX;
/// Upper limit on copies of one operator used to close a numeric gap.
pub const MAX_REPEAT: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    const FULL: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

    fn hull(self, o: Interval) -> Interval {
        Interval { lo: self.lo.min(o.lo), hi: self.hi.max(o.hi) }
    }

    fn sane(self) -> Interval {
        if self.lo.is_nan() || self.hi.is_nan() {
            Interval::FULL
        } else {
            self
        }
    }
}

fn interval_eval(e: &ArithExpr, b: &[Interval]) -> Interval {
    match e {
        ArithExpr::Const(c) => Interval::point(*c),
        ArithExpr::Var(v) => b[*v as usize],
        ArithExpr::Neg(a) => {
            let x = interval_eval(a, b);
            Interval { lo: -x.hi, hi: -x.lo }
        }
        ArithExpr::Binary(op, a, c) => {
            let (x, y) = (interval_eval(a, b), interval_eval(c, b));
            let r = match op {
                BinOp::Add => Interval { lo: x.lo + y.lo, hi: x.hi + y.hi },
                BinOp::Sub => Interval { lo: x.lo - y.hi, hi: x.hi - y.lo },
                BinOp::Mul => corners(x, y, |p, q| p * q),
                BinOp::Div => {
                    if y.lo <= 0.0 && y.hi >= 0.0 {
                        Interval::FULL
                    } else {
                        corners(x, y, |p, q| p / q)
                    }
                }
            };
            r.sane()
        }
    }
}

fn corners(x: Interval, y: Interval, f: impl Fn(f64, f64) -> f64) -> Interval {
    let c = [f(x.lo, y.lo), f(x.lo, y.hi), f(x.hi, y.lo), f(x.hi, y.hi)];
    Interval {
        lo: c.iter().copied().fold(f64::INFINITY, f64::min),
        hi: c.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// `(variable, comparator, constant)` when the condition has that shape.
fn restricted(c: &NumericCondition) -> Option<(VarId, Comparator, f64)> {
    match (&c.lhs, &c.rhs) {
        (ArithExpr::Var(v), ArithExpr::Const(k)) => Some((*v, c.cmp, *k)),
        (ArithExpr::Const(k), ArithExpr::Var(v)) => Some((*v, c.cmp.flipped(), *k)),
        _ => None,
    }
}

fn possible(cmp: Comparator, x: Interval, k: f64) -> bool {
    match cmp {
        Comparator::Ge => x.hi >= k,
        Comparator::Gt => x.hi > k,
        Comparator::Le => x.lo <= k,
        Comparator::Lt => x.lo < k,
        Comparator::Eq => x.lo <= k && k <= x.hi,
    }
}

/// Layered relaxed reachability from one state.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedGraph {
    pub fact_layer: Vec<u32>,
    pub op_layer: Vec<u32>,
    /// Variable bounds per layer.
    pub bounds: Vec<Vec<Interval>>,
    /// First layer containing the goal; `None` at a fixpoint without it.
    pub goal_layer: Option<u32>,
}

impl RelaxedGraph {
    pub fn layers(&self) -> usize {
        self.bounds.len()
    }

    pub fn facts_at(&self, layer: u32) -> impl Iterator<Item = FluentId> + '_ {
        self.fact_layer.iter().enumerate().filter(move |(_, &l)| l <= layer).map(|(f, _)| f as FluentId)
    }

    pub fn ops_at(&self, layer: u32) -> impl Iterator<Item = OpId> + '_ {
        self.op_layer.iter().enumerate().filter(move |(_, &l)| l <= layer).map(|(o, _)| o as OpId)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RelaxedPlan {
    /// Operator and the layer it is applied at, sorted by layer then index.
    pub steps: Vec<(OpId, u32)>,
    /// Numeric conditions counted without a supporting operator.
    pub unsupported: u32,
}

impl RelaxedPlan {
    pub fn len(&self) -> u32 {
        self.steps.len() as u32 + self.unsupported
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeuristicKind {
    /// Relaxed plan length; the scheduled estimate is zero.
    Rph,
    /// Relaxed plan length plus the scheduled estimate.
    #[default]
    RphSched,
    /// Blind.
    Zero,
}

/// `h_p`: propositional estimate (steps); `h_s`: makespan increase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub h_p: u32,
    pub h_s: f64,
}

/// Per-search evaluator with precomputed achiever and writer indices.
pub struct Evaluator<'a> {
    inst: &'a GroundedInstance,
    deps: &'a DependencyTable,
    pub kind: HeuristicKind,
    achievers: Vec<Vec<OpId>>,
    /// Variables read by some operator condition or numeric goal.
    relevant: Vec<bool>,
    writers: Vec<Vec<OpId>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(inst: &'a GroundedInstance, deps: &'a DependencyTable, kind: HeuristicKind) -> Self {
        let mut achievers = vec![Vec::new(); inst.fluents.len()];
        let mut writers = vec![Vec::new(); inst.variables.len()];
        let mut relevant = vec![false; inst.variables.len()];
        for (i, o) in inst.operators.iter().enumerate() {
            for &a in &o.add {
                achievers[a as usize].push(i as OpId);
            }
            for &w in &o.writes {
                writers[w as usize].push(i as OpId);
            }
            for &v in &o.cond_reads {
                relevant[v as usize] = true;
            }
        }
        for c in &inst.goal.numeric {
            for v in c.reads() {
                relevant[v as usize] = true;
            }
        }
        Evaluator { inst, deps, kind, achievers, relevant, writers }
    }

    fn cond_possible(&self, c: &NumericCondition, s: &State, b: &[Interval]) -> bool {
        if let Some((v, cmp, k)) = restricted(c) {
            return possible(cmp, b[v as usize], k);
        }
        c.satisfied(&s.vals, 0.0) || c.reads().iter().any(|&v| b[v as usize] != Interval::point(s.vals[v as usize]))
    }

    fn goal_reached(&self, g: &RelaxedGraph, s: &State, layer: u32) -> bool {
        let b = &g.bounds[layer as usize];
        self.inst.goal.pos.iter().all(|&f| g.fact_layer[f as usize] <= layer)
            && self.inst.goal.numeric.iter().all(|c| self.cond_possible(c, s, b))
    }

    /// Builds layers until the goal is contained or nothing grows. Negative
    /// preconditions and delete lists are ignored.
    pub fn relaxed_graph(&self, s: &State) -> RelaxedGraph {
        let inst = self.inst;
        let mut fact_layer = vec![UNREACHED; inst.fluents.len()];
        for f in s.props.iter() {
            fact_layer[f as usize] = 0;
        }
        let mut g = RelaxedGraph {
            fact_layer,
            op_layer: vec![UNREACHED; inst.operators.len()],
            bounds: vec![s.vals.iter().map(|&x| Interval::point(x)).collect()],
            goal_layer: None,
        };
        let mut layer = 0u32;
        let mut saturated = false;
        loop {
            if self.goal_reached(&g, s, layer) {
                g.goal_layer = Some(layer);
                return g;
            }
            let b = g.bounds[layer as usize].clone();
            let mut new_ops = false;
            for (i, o) in inst.operators.iter().enumerate() {
                if g.op_layer[i] == UNREACHED
                    && o.pre.iter().all(|&f| g.fact_layer[f as usize] <= layer)
                    && o.conditions.iter().all(|c| self.cond_possible(c, s, &b))
                {
                    g.op_layer[i] = layer;
                    new_ops = true;
                }
            }
            let mut new_facts = false;
            let mut next = b.clone();
            for (i, o) in inst.operators.iter().enumerate() {
                if g.op_layer[i] > layer {
                    continue;
                }
                for &a in &o.add {
                    if g.fact_layer[a as usize] == UNREACHED {
                        g.fact_layer[a as usize] = layer + 1;
                        new_facts = true;
                    }
                }
                for e in &o.effects {
                    let h = e.head as usize;
                    if !self.relevant[h] {
                        continue;
                    }
                    let x = interval_eval(&e.body, &b);
                    let cur = b[h];
                    let r = match e.op {
                        AssignOp::Assign => x,
                        AssignOp::Increase => Interval { lo: cur.lo + x.lo, hi: cur.hi + x.hi },
                        AssignOp::Decrease => Interval { lo: cur.lo - x.hi, hi: cur.hi - x.lo },
                    };
                    next[h] = next[h].hull(r.sane());
                }
            }
            let moved = next != b;
            if !new_ops && !new_facts {
                if !moved || saturated {
                    return g;
                }
                // Repeated application without new structure: jump each moving
                // bound to its limit so the fixpoint is reached.
                for (n, o) in next.iter_mut().zip(&b) {
                    if n.hi > o.hi {
                        n.hi = f64::INFINITY;
                    }
                    if n.lo < o.lo {
                        n.lo = f64::NEG_INFINITY;
                    }
                }
                saturated = true;
            } else {
                saturated = false;
            }
            g.bounds.push(next);
            layer += 1;
        }
    }

    /// Backward extraction; `None` when the graph does not contain the goal.
    pub fn extract(&self, g: &RelaxedGraph, s: &State) -> Option<RelaxedPlan> {
        let top = g.goal_layer?;
        let inst = self.inst;
        let mut open: Vec<Vec<FluentId>> = vec![Vec::new(); top as usize + 1];
        let mut supported = vec![false; inst.fluents.len()];
        let mut selected = vec![false; inst.operators.len()];
        let mut plan = RelaxedPlan::default();
        for f in s.props.iter() {
            supported[f as usize] = true;
        }
        for &f in &inst.goal.pos {
            if !supported[f as usize] {
                open[g.fact_layer[f as usize] as usize].push(f);
            }
        }
        // Open numeric conditions as (owning operator or goal, index).
        let mut numeric: Vec<(Option<OpId>, usize)> = (0..inst.goal.numeric.len())
            .filter(|&i| !inst.goal.numeric[i].satisfied(&s.vals, 0.0))
            .map(|i| (None, i))
            .collect();
        let mut done_numeric: HashSet<(Option<OpId>, usize)> = HashSet::new();
        let mut layer = top as usize;
        loop {
            while let Some(key) = numeric.pop() {
                if !done_numeric.insert(key) {
                    continue;
                }
                let c = match key.0 {
                    None => &inst.goal.numeric[key.1],
                    Some(o) => &inst.operators[o as usize].conditions[key.1],
                };
                match self.numeric_support(g, s, c) {
                    Some((o, copies)) => {
                        for _ in 0..copies {
                            plan.steps.push((o, g.op_layer[o as usize]));
                        }
                        if !selected[o as usize] {
                            selected[o as usize] = true;
                            self.open_preconditions(g, s, o, &mut open, &supported, &mut numeric);
                        }
                    }
                    None => plan.unsupported += 1,
                }
            }
            if layer == 0 {
                break;
            }
            while let Some(f) = open[layer].pop() {
                if supported[f as usize] {
                    continue;
                }
                let o = self.achievers[f as usize]
                    .iter()
                    .copied()
                    .filter(|&o| g.op_layer[o as usize] < layer as u32)
                    .min_by_key(|&o| (g.op_layer[o as usize], o))
                    .expect("reached fact without an achiever");
                if !selected[o as usize] {
                    selected[o as usize] = true;
                    plan.steps.push((o, g.op_layer[o as usize]));
                    for &a in &inst.operators[o as usize].add {
                        supported[a as usize] = true;
                    }
                    self.open_preconditions(g, s, o, &mut open, &supported, &mut numeric);
                }
            }
            layer -= 1;
        }
        plan.steps.sort_by_key(|&(o, l)| (l, o));
        Some(plan)
    }

    fn open_preconditions(
        &self,
        g: &RelaxedGraph,
        s: &State,
        o: OpId,
        open: &mut [Vec<FluentId>],
        supported: &[bool],
        numeric: &mut Vec<(Option<OpId>, usize)>,
    ) {
        let op = &self.inst.operators[o as usize];
        for &p in &op.pre {
            if !supported[p as usize] {
                open[g.fact_layer[p as usize] as usize].push(p);
            }
        }
        for (i, c) in op.conditions.iter().enumerate() {
            if !c.satisfied(&s.vals, 0.0) {
                numeric.push((Some(o), i));
            }
        }
    }

    /// Cheapest operator moving the condition's variable the right way and how
    /// many applications close the gap in `s`.
    fn numeric_support(&self, g: &RelaxedGraph, s: &State, c: &NumericCondition) -> Option<(OpId, u32)> {
        let reached = |o: &OpId| g.op_layer[*o as usize] != UNREACHED;
        let Some((v, cmp, k)) = restricted(c) else {
            let mut cands: Vec<OpId> =
                c.reads().iter().flat_map(|&v| self.writers[v as usize].iter().copied()).collect();
            cands.retain(reached);
            return cands.into_iter().min_by_key(|&o| (g.op_layer[o as usize], o)).map(|o| (o, 1));
        };
        let cur = s.vals[v as usize];
        let up = match cmp {
            Comparator::Ge | Comparator::Gt => true,
            Comparator::Le | Comparator::Lt => false,
            Comparator::Eq => k > cur,
        };
        let mut best: Option<(u32, OpId, u32)> = None;
        for &o in self.writers[v as usize].iter().filter(|o| reached(o)) {
            let op = &self.inst.operators[o as usize];
            let mut change = 0.0;
            let mut assigns = false;
            for e in op.effects.iter().filter(|e| e.head == v) {
                let Some(x) = e.body.eval(&s.vals) else { continue };
                match e.op {
                    AssignOp::Assign => {
                        assigns = true;
                        change = x - cur;
                    }
                    AssignOp::Increase => change += x,
                    AssignOp::Decrease => change -= x,
                }
            }
            if ((up && change <= 0.0) || (!up && change >= 0.0)) && !assigns {
                continue;
            }
            let copies = if assigns || change == 0.0 {
                1
            } else {
                ((k - cur) / change).abs().ceil().clamp(1.0, MAX_REPEAT as f64) as u32
            };
            let key = (g.op_layer[o as usize], o, copies);
            if best.is_none_or(|b| (key.0, key.1) < (b.0, b.1)) {
                best = Some(key);
            }
        }
        best.map(|(_, o, n)| (o, n))
    }

    pub fn relaxed_plan(&self, s: &State) -> Option<RelaxedPlan> {
        let g = self.relaxed_graph(s);
        self.extract(&g, s)
    }

    /// Makespan of `path ++ relaxed plan` minus that of `path`; relaxed steps
    /// use their durations evaluated in `s`, or zero when not evaluable.
    pub fn scheduling_rph(&self, s: &State, path: &[TimedStep], plan: &RelaxedPlan) -> f64 {
        let extra: Vec<(OpId, f64)> = plan
            .steps
            .iter()
            .map(|&(o, _)| {
                let d = self.inst.operators[o as usize].duration_in(s).filter(|d| d.is_finite() && *d > 0.0);
                (o, d.unwrap_or(0.0))
            })
            .collect();
        let base = path.iter().map(TimedStep::end).fold(0.0, f64::max);
        (extended_makespan(path, &extra, self.deps) - base).max(0.0)
    }

    /// `None` marks a recognized dead end.
    pub fn evaluate(&self, s: &State, path: &[TimedStep]) -> Option<Estimate> {
        match self.kind {
            HeuristicKind::Zero => Some(Estimate { h_p: 0, h_s: 0.0 }),
            HeuristicKind::Rph => self.relaxed_plan(s).map(|p| Estimate { h_p: p.len(), h_s: 0.0 }),
            HeuristicKind::RphSched => {
                let p = self.relaxed_plan(s)?;
                Some(Estimate { h_p: p.len(), h_s: self.scheduling_rph(s, path, &p) })
            }
        }
    }
}
