use std::fmt;

use crate::ground::GroundedInstance;
use crate::state::{DependencyTable, State};

use super::{evaluate_metric, step_duration, ParallelPlan};

/// Slack allowed in `t_i + d_i ≤ t_j`.
pub const TIME_TOLERANCE: f64 = 1e-6;
/// Allowed gap between a stated duration and the replayed one; covers
/// durations printed with two decimals.
pub const DURATION_TOLERANCE: f64 = 5e-3;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Dependent steps `earlier` (ending at `end`) and `later` (starting at `start`) overlap.
    Precedence {
        earlier: usize,
        later: usize,
        end: f64,
        start: f64,
    },
    Inapplicable {
        step: usize,
    },
    DurationMismatch {
        step: usize,
        stated: f64,
        actual: f64,
    },
    NotEvaluable {
        step: usize,
    },
    NegativeTime {
        step: usize,
    },
    GoalNotReached,
    MakespanMismatch {
        claimed: f64,
        actual: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub violations: Vec<Violation>,
    pub makespan: f64,
    /// State after replaying the steps in list order (as far as possible).
    pub final_state: State,
    pub metric: Option<f64>,
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn describe<'a>(&'a self, inst: &'a GroundedInstance, plan: &'a ParallelPlan) -> impl fmt::Display + 'a {
        VerdictDisplay { verdict: self, inst, plan }
    }
}

struct VerdictDisplay<'a> {
    verdict: &'a Verdict,
    inst: &'a GroundedInstance,
    plan: &'a ParallelPlan,
}

impl fmt::Display for VerdictDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |i: usize| self.inst.op_name(self.plan.steps[i].op);
        for v in &self.verdict.violations {
            match v {
                Violation::Precedence { earlier, later, end, start } => writeln!(
                    f,
                    "step {} {} starts at {} before dependent step {} {} ends at {}",
                    later + 1,
                    name(*later),
                    start,
                    earlier + 1,
                    name(*earlier),
                    end
                )?,
                Violation::Inapplicable { step } => writeln!(f, "step {} {} is not applicable", step + 1, name(*step))?,
                Violation::DurationMismatch { step, stated, actual } => {
                    writeln!(f, "step {} {} has duration {} but takes {}", step + 1, name(*step), stated, actual)?
                }
                Violation::NotEvaluable { step } => {
                    writeln!(f, "step {} {} has an effect that cannot be evaluated", step + 1, name(*step))?
                }
                Violation::NegativeTime { step } => writeln!(f, "step {} has a negative time", step + 1)?,
                Violation::GoalNotReached => writeln!(f, "goal not reached")?,
                Violation::MakespanMismatch { claimed, actual } => {
                    writeln!(f, "claimed makespan {claimed} but the steps end at {actual}")?
                }
            }
        }
        Ok(())
    }
}

/// Checks precedence between dependent steps, applicability and durations
/// along the list-order linearization, goal achievement and the claimed
/// makespan.
pub fn validate_parallel(
    inst: &GroundedInstance,
    plan: &ParallelPlan,
    deps: &DependencyTable,
    claimed_makespan: Option<f64>,
) -> Verdict {
    let mut violations = Vec::new();
    let steps = &plan.steps;
    for (i, s) in steps.iter().enumerate() {
        if s.start < 0.0 || s.duration < 0.0 {
            violations.push(Violation::NegativeTime { step: i });
        }
    }
    for j in 0..steps.len() {
        for i in 0..j {
            let (a, b) = (&steps[i], &steps[j]);
            if (a.op == b.op || deps.get(a.op, b.op)) && a.end() > b.start + TIME_TOLERANCE {
                violations.push(Violation::Precedence { earlier: i, later: j, end: a.end(), start: b.start });
            }
        }
    }

    let mut s = inst.init.clone();
    let mut replayed = true;
    for (i, step) in steps.iter().enumerate() {
        if !inst.operators[step.op as usize].applicable(&s, 0.0) {
            violations.push(Violation::Inapplicable { step: i });
            replayed = false;
            break;
        }
        match step_duration(inst, step.op, &s) {
            Ok((d, next)) => {
                if (d - step.duration).abs() > DURATION_TOLERANCE {
                    violations.push(Violation::DurationMismatch { step: i, stated: step.duration, actual: d });
                }
                s = next;
            }
            Err(_) => {
                violations.push(Violation::NotEvaluable { step: i });
                replayed = false;
                break;
            }
        }
    }
    if replayed && !inst.is_goal(&s) {
        violations.push(Violation::GoalNotReached);
    }
    let makespan = plan.makespan();
    if let Some(c) = claimed_makespan {
        if (c - makespan).abs() > DURATION_TOLERANCE {
            violations.push(Violation::MakespanMismatch { claimed: c, actual: makespan });
        }
    }
    let metric = if replayed { evaluate_metric(inst, makespan, &s).ok() } else { None };
    Verdict { violations, makespan, final_state: s, metric }
}
