//! Precedence construction, critical-path scheduling, metric evaluation and
//! validation of parallel plans.

mod gantt;
mod planfile;
mod validate;

pub use gantt::{gantt_svg, gantt_text, GanttRow};
pub use planfile::{
    format_time, parse_plan, print_plan, resolve_plan, PlanFile, PlanLine, PlanParseError, ResolvedStep,
};
pub use validate::{validate_parallel, Verdict, Violation, DURATION_TOLERANCE, TIME_TOLERANCE};

use thiserror::Error;

use crate::ground::GroundedInstance;
use crate::state::{DependencyTable, OpId, State};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("step {step}: {op} is not applicable")]
    Inapplicable { step: usize, op: String },
    #[error("step {step}: {op} has negative duration {duration}")]
    NegativeDuration { step: usize, op: String, duration: f64 },
    #[error("step {step}: numeric effect of {op} cannot be evaluated")]
    Evaluation { step: usize, op: String },
    #[error("metric cannot be evaluated in the final state")]
    Metric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedStep {
    pub op: OpId,
    pub start: f64,
    pub duration: f64,
}

impl TimedStep {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParallelPlan {
    pub steps: Vec<TimedStep>,
}

impl ParallelPlan {
    pub fn makespan(&self) -> f64 {
        self.steps.iter().map(TimedStep::end).fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Operator sequence with the duration each occurrence had when applied.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialPlan {
    pub ops: Vec<OpId>,
    pub durations: Vec<f64>,
    pub final_state: State,
}

impl SequentialPlan {
    /// Steps back to back: t_i = Σ_{j<i} d_j.
    pub fn timed(&self) -> ParallelPlan {
        let mut t = 0.0;
        let steps = self
            .ops
            .iter()
            .zip(&self.durations)
            .map(|(&op, &duration)| {
                let s = TimedStep { op, start: t, duration };
                t += duration;
                s
            })
            .collect();
        ParallelPlan { steps }
    }

    pub fn makespan(&self) -> f64 {
        self.durations.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

/// Amount by which applying `op` in `s` advances total-time, with the
/// successor state.
pub fn step_duration(inst: &GroundedInstance, op: OpId, s: &State) -> Result<(f64, State), ScheduleError> {
    let o = &inst.operators[op as usize];
    let name = || inst.op_name(op);
    let next = o.try_apply(s).ok_or_else(|| ScheduleError::Evaluation { step: 0, op: name() })?;
    let tt = inst.total_time as usize;
    let d = next.vals[tt] - s.vals[tt];
    if d < 0.0 || d.is_nan() {
        return Err(ScheduleError::NegativeDuration { step: 0, op: name(), duration: d });
    }
    Ok((d, next))
}

/// Applies `ops` from the initial state, recording per-occurrence durations.
pub fn replay(inst: &GroundedInstance, ops: &[OpId]) -> Result<SequentialPlan, ScheduleError> {
    let mut s = inst.init.clone();
    let mut durations = Vec::with_capacity(ops.len());
    for (i, &op) in ops.iter().enumerate() {
        if !inst.operators[op as usize].applicable(&s, 0.0) {
            return Err(ScheduleError::Inapplicable { step: i + 1, op: inst.op_name(op) });
        }
        let (d, next) = step_duration(inst, op, &s).map_err(|e| with_step(e, i + 1))?;
        durations.push(d);
        s = next;
    }
    Ok(SequentialPlan { ops: ops.to_vec(), durations, final_state: s })
}

fn with_step(e: ScheduleError, step: usize) -> ScheduleError {
    match e {
        ScheduleError::Inapplicable { op, .. } => ScheduleError::Inapplicable { step, op },
        ScheduleError::NegativeDuration { op, duration, .. } => ScheduleError::NegativeDuration { step, op, duration },
        ScheduleError::Evaluation { op, .. } => ScheduleError::Evaluation { step, op },
        ScheduleError::Metric => ScheduleError::Metric,
    }
}

/// Forward edges (j, i), j < i, between dependent occurrences; stored as
/// predecessor lists.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PrecedenceGraph {
    pub preds: Vec<Vec<usize>>,
}

impl PrecedenceGraph {
    pub fn from_fn(k: usize, dependent: impl Fn(usize, usize) -> bool) -> Self {
        let preds = (0..k).map(|i| (0..i).filter(|&j| dependent(j, i)).collect()).collect();
        PrecedenceGraph { preds }
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.preds.iter().enumerate().flat_map(|(i, p)| p.iter().map(move |&j| (j, i)))
    }

    pub fn edge_count(&self) -> usize {
        self.preds.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, j: usize, i: usize) -> bool {
        self.preds.get(i).is_some_and(|p| p.binary_search(&j).is_ok())
    }
}

pub fn precedence(ops: &[OpId], deps: &DependencyTable) -> PrecedenceGraph {
    PrecedenceGraph::from_fn(ops.len(), |j, i| ops[j] == ops[i] || deps.get(ops[j], ops[i]))
}

/// Earliest end times e(O_i) over the precedence graph.
pub fn critical_path_ends(durations: &[f64], prec: &PrecedenceGraph) -> Vec<f64> {
    let mut e = Vec::with_capacity(durations.len());
    for (i, &d) in durations.iter().enumerate() {
        let start = prec.preds[i].iter().map(|&j| e[j]).fold(0.0, f64::max);
        e.push(start + d);
    }
    e
}

pub fn critical_path(ops: &[OpId], durations: &[f64], prec: &PrecedenceGraph) -> ParallelPlan {
    let ends = critical_path_ends(durations, prec);
    let steps = ops
        .iter()
        .zip(durations)
        .zip(ends)
        .map(|((&op, &duration), e)| TimedStep { op, start: e - duration, duration })
        .collect();
    ParallelPlan { steps }
}

/// PERT schedule of a sequential plan.
pub fn schedule(plan: &SequentialPlan, deps: &DependencyTable) -> ParallelPlan {
    critical_path(&plan.ops, &plan.durations, &precedence(&plan.ops, deps))
}

/// Makespan of `base` (already scheduled) extended by `extra` steps, each
/// placed after its dependent predecessors among both lists.
pub fn extended_makespan(base: &[TimedStep], extra: &[(OpId, f64)], deps: &DependencyTable) -> f64 {
    let mut ends: Vec<(OpId, f64)> = base.iter().map(|s| (s.op, s.end())).collect();
    let mut makespan = ends.iter().map(|e| e.1).fold(0.0, f64::max);
    for &(op, d) in extra {
        let start = ends.iter().filter(|(o, _)| *o == op || deps.get(*o, op)).map(|e| e.1).fold(0.0, f64::max);
        ends.push((op, start + d));
        makespan = makespan.max(start + d);
    }
    makespan
}

/// Metric value with total-time replaced by `makespan`; the state itself is
/// left untouched.
pub fn evaluate_metric(inst: &GroundedInstance, makespan: f64, final_state: &State) -> Result<f64, ScheduleError> {
    let mut vals = final_state.vals.clone();
    vals[inst.total_time as usize] = makespan;
    inst.metric.expr.eval(&vals).ok_or(ScheduleError::Metric)
}
