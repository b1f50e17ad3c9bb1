//! Forward-chaining search: weighted A*, enforced hill climbing and the
//! anytime wrapper, all over symmetry-reduced expansion.

mod closed;
mod ehc;
mod open;

pub use closed::{ClosedSet, Entry, StateKey};
pub use ehc::enforced_hill_climbing;
pub use open::{compare, Key, OpenList, Priority};

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::ground::GroundedInstance;
use crate::heuristic::{Estimate, Evaluator, HeuristicKind};
use crate::pddl::{BinOp, Optimization};
use crate::schedule::{evaluate_metric, replay, schedule, ParallelPlan, SequentialPlan, TimedStep};
use crate::state::{ArithExpr, DependencyTable, OpId, State};
use crate::symmetry::Symmetries;

const EPS: f64 = 1e-9;
const PROGRESS_EVERY: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Algorithm {
    #[default]
    WeightedAstar,
    HillClimbing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub algorithm: Algorithm,
    pub weight: f64,
    pub delta: u32,
    pub anytime: bool,
    pub heuristic: HeuristicKind,
    pub symmetry: bool,
    /// Use the exact state comparison instead of the representative chains.
    pub exact_symmetry: bool,
    pub exact_duplicates: bool,
    /// Maximum number of expansions.
    pub node_budget: u64,
    pub time_budget: Option<Duration>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            algorithm: Algorithm::WeightedAstar,
            weight: 2.0,
            delta: 0,
            anytime: false,
            heuristic: HeuristicKind::RphSched,
            symmetry: true,
            exact_symmetry: false,
            exact_duplicates: false,
            node_budget: 10_000_000,
            time_budget: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("weight must be a finite number >= 1, got {0}")]
    Weight(f64),
    #[error("node budget must be positive")]
    NodeBudget,
    #[error("anytime search runs on weighted A* only")]
    AnytimeAlgorithm,
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.weight.is_finite() || self.weight < 1.0 {
            return Err(ConfigError::Weight(self.weight));
        }
        if self.node_budget == 0 {
            return Err(ConfigError::NodeBudget);
        }
        if self.anytime && self.algorithm != Algorithm::WeightedAstar {
            return Err(ConfigError::AnytimeAlgorithm);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SearchStats {
    pub expansions: u64,
    pub generated: u64,
    pub evaluations: u64,
    pub pruned_symmetry: u64,
    pub pruned_duplicate: u64,
    pub pruned_bound: u64,
    pub reopened: u64,
    pub dead_ends: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// A goal was expanded.
    Solved,
    /// The open list ran empty after at least one plan was found.
    Exhausted,
    NoPlan,
    NodeBudget,
    TimeBudget,
}

impl Termination {
    pub fn is_budget(self) -> bool {
        matches!(self, Termination::NodeBudget | Termination::TimeBudget)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub plan: SequentialPlan,
    pub schedule: ParallelPlan,
    /// Metric value with total-time set to the makespan.
    pub metric: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub solution: Option<Solution>,
    pub termination: Termination,
    pub stats: SearchStats,
    /// Successive metric values of the improving plans in anytime mode.
    pub improvements: Vec<f64>,
}

impl SearchOutcome {
    /// Budget ran out before the search could finish.
    pub fn incomplete(&self) -> bool {
        self.termination.is_budget()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchNode {
    pub state: State,
    pub parent: Option<u32>,
    pub step: Option<TimedStep>,
    pub g_p: u32,
    pub g_s: f64,
    pub h: Estimate,
    pub cost: f64,
    superseded: bool,
}

impl SearchNode {
    pub fn f_p(&self, w: f64) -> f64 {
        f64::from(self.g_p) + w * f64::from(self.h.h_p)
    }

    pub fn f_s(&self, w: f64) -> f64 {
        self.g_s + w * self.h.h_s
    }
}

/// Successors of one state after symmetry pruning.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    /// Operator, successor state and duration, by ascending operator index.
    pub successors: Vec<(OpId, State, f64)>,
    pub applicable: usize,
    pub pruned: usize,
}

/// Applies every operator whose preconditions hold and whose effects and
/// duration evaluate, minus Δ(C) when `sym` is given.
pub fn expand(inst: &GroundedInstance, sym: Option<&Symmetries>, exact_symmetry: bool, s: &State) -> Expansion {
    let tt = inst.total_time as usize;
    let mut all = Vec::new();
    for (i, o) in inst.operators.iter().enumerate() {
        let Some(next) = o.successor(s, 0.0) else { continue };
        let d = next.vals[tt] - s.vals[tt];
        if d.is_finite() && d >= 0.0 {
            all.push((i as OpId, next, d));
        }
    }
    let applicable = all.len();
    let pruned = match sym {
        Some(sym) => {
            let active = if exact_symmetry { sym.dynamic(s) } else { sym.fast(s) };
            let ids: Vec<OpId> = all.iter().map(|x| x.0).collect();
            sym.pruning_set(&ids, &active)
        }
        None => Vec::new(),
    };
    if !pruned.is_empty() {
        all.retain(|x| pruned.binary_search(&x.0).is_err());
    }
    Expansion { successors: all, applicable, pruned: pruned.len() }
}

/// Minimisation metrics built from total-time and increase-only variables
/// with non-negative coefficients never decrease along a plan.
pub fn monotone_metric(inst: &GroundedInstance) -> bool {
    fn mono(inst: &GroundedInstance, e: &ArithExpr) -> bool {
        match e {
            ArithExpr::Const(_) => true,
            ArithExpr::Var(v) => *v == inst.total_time || inst.operators.iter().all(|o| o.increase_only(*v)),
            ArithExpr::Binary(BinOp::Add, a, b) => mono(inst, a) && mono(inst, b),
            ArithExpr::Binary(BinOp::Sub, a, b) => mono(inst, a) && b.is_constant(),
            ArithExpr::Binary(BinOp::Mul, a, b) => {
                (a.as_const().is_some_and(|c| c >= 0.0) && mono(inst, b))
                    || (b.as_const().is_some_and(|c| c >= 0.0) && mono(inst, a))
            }
            ArithExpr::Binary(BinOp::Div, a, b) => b.as_const().is_some_and(|c| c > 0.0) && mono(inst, a),
            ArithExpr::Neg(a) => a.is_constant(),
        }
    }
    inst.metric.direction == Optimization::Minimize && mono(inst, &inst.metric.expr)
}

/// Metric cost (minimised) of a prefix whose schedule ends at `makespan`.
pub fn prefix_cost(inst: &GroundedInstance, makespan: f64, s: &State) -> f64 {
    let mut vals = s.vals.clone();
    vals[inst.total_time as usize] = makespan;
    inst.metric.cost(&vals).filter(|c| !c.is_nan()).unwrap_or(f64::INFINITY)
}

/// Replays, schedules and evaluates `ops`.
pub fn build_solution(inst: &GroundedInstance, deps: &DependencyTable, ops: &[OpId]) -> Solution {
    let plan = replay(inst, ops).expect("search paths replay from the initial state");
    assert!(inst.is_goal(&plan.final_state), "search returned a path that misses the goal");
    let schedule = schedule(&plan, deps);
    let metric = evaluate_metric(inst, schedule.makespan(), &plan.final_state).unwrap_or(f64::NAN);
    Solution { plan, schedule, metric }
}

/// Builds the dependency table and symmetry tables that `cfg` asks for and
/// runs the configured algorithm.
pub fn search(inst: &GroundedInstance, cfg: &SearchConfig) -> SearchOutcome {
    let deps = inst.dependency_table();
    let sym = cfg.symmetry.then(|| Symmetries::new(inst));
    search_with(inst, &deps, sym.as_ref(), cfg)
}

pub fn search_with(
    inst: &GroundedInstance,
    deps: &DependencyTable,
    sym: Option<&Symmetries>,
    cfg: &SearchConfig,
) -> SearchOutcome {
    match (cfg.algorithm, cfg.anytime) {
        (Algorithm::HillClimbing, _) => enforced_hill_climbing(inst, deps, sym, cfg),
        (Algorithm::WeightedAstar, false) => weighted_astar(inst, deps, sym, cfg),
        (Algorithm::WeightedAstar, true) => anytime(inst, deps, sym, cfg),
    }
}

/// Earliest start of every operator appended after `path`, then its
/// makespan. Paths with equal signatures schedule every extension alike.
pub fn schedule_signature(op_count: usize, deps: &DependencyTable, path: &[TimedStep]) -> Vec<f64> {
    let mut sig: Vec<f64> = (0..op_count as OpId)
        .map(|o| path.iter().filter(|p| p.op == o || deps.get(p.op, o)).map(TimedStep::end).fold(0.0, f64::max))
        .collect();
    sig.push(path.iter().map(TimedStep::end).fold(0.0, f64::max));
    sig
}

/// Whether a rediscovered state replaces the stored entry: a shorter prefix,
/// or in anytime mode a cheaper one (shorter on ties).
pub fn supersedes(anytime: bool, g_p: u32, cost: f64, stored: &Entry) -> bool {
    if anytime {
        cost < stored.cost - EPS || (cost <= stored.cost + EPS && g_p < stored.g_p)
    } else {
        g_p < stored.g_p
    }
}

pub(crate) struct Budget {
    nodes: u64,
    deadline: Option<(Instant, Duration)>,
}

impl Budget {
    pub(crate) fn new(cfg: &SearchConfig) -> Self {
        Budget { nodes: cfg.node_budget, deadline: cfg.time_budget.map(|d| (Instant::now(), d)) }
    }

    pub(crate) fn check(&self, expansions: u64) -> Option<Termination> {
        if expansions >= self.nodes {
            return Some(Termination::NodeBudget);
        }
        match self.deadline {
            Some((t0, d)) if expansions.is_multiple_of(64) && t0.elapsed() >= d => Some(Termination::TimeBudget),
            _ => None,
        }
    }
}

#[cfg(debug_assertions)]
pub(crate) fn check_groups(inst: &GroundedInstance, s: &State) {
    for g in &inst.groups {
        let n = g.members.iter().filter(|&&m| s.props.contains(m)).count();
        assert!(n <= 1 && (n == 1 || !g.exhaustive), "fact group {} violated: {} members hold", g.name, n);
    }
}

#[cfg(not(debug_assertions))]
pub(crate) fn check_groups(_: &GroundedInstance, _: &State) {}

struct Engine<'a> {
    inst: &'a GroundedInstance,
    deps: &'a DependencyTable,
    sym: Option<&'a Symmetries>,
    cfg: &'a SearchConfig,
    eval: Evaluator<'a>,
    nodes: Vec<SearchNode>,
    open: OpenList,
    closed: ClosedSet,
    stats: SearchStats,
    budget: Budget,
    anytime: bool,
    /// α-pruning is sound.
    monotone: bool,
    best_h: u32,
}

impl<'a> Engine<'a> {
    fn new(
        inst: &'a GroundedInstance,
        deps: &'a DependencyTable,
        sym: Option<&'a Symmetries>,
        cfg: &'a SearchConfig,
        anytime: bool,
    ) -> Self {
        Engine {
            inst,
            deps,
            sym,
            cfg,
            eval: Evaluator::new(inst, deps, cfg.heuristic),
            nodes: Vec::new(),
            open: OpenList::new(cfg.delta),
            closed: ClosedSet::new(inst, cfg.exact_duplicates),
            stats: SearchStats::default(),
            budget: Budget::new(cfg),
            anytime,
            monotone: monotone_metric(inst),
            best_h: u32::MAX,
        }
    }

    fn path(&self, mut node: Option<u32>) -> Vec<TimedStep> {
        let mut steps = Vec::new();
        while let Some(i) = node {
            let n = &self.nodes[i as usize];
            steps.extend(n.step);
            node = n.parent;
        }
        steps.reverse();
        steps
    }

    fn signature(&self, path: &[TimedStep]) -> Vec<f64> {
        if self.closed.is_exact() {
            schedule_signature(self.inst.operators.len(), self.deps, path)
        } else {
            Vec::new()
        }
    }

    fn needs_path(&self) -> bool {
        self.cfg.heuristic == HeuristicKind::RphSched || self.closed.is_exact()
    }

    fn log_progress(&self, alpha: f64) {
        if self.stats.expansions.is_multiple_of(PROGRESS_EVERY) {
            log::info!(
                "expanded {} open {} best h {} alpha {}",
                self.stats.expansions,
                self.open.len(),
                self.best_h,
                alpha
            );
        }
    }

    fn push_root(&mut self) -> bool {
        let s = self.inst.init.clone();
        let sig = self.signature(&[]);
        let key = self.closed.key(&s, &sig);
        self.stats.evaluations += 1;
        let Some(h) = self.eval.evaluate(&s, &[]) else {
            self.stats.dead_ends += 1;
            return false;
        };
        let cost = prefix_cost(self.inst, 0.0, &s);
        self.nodes.push(SearchNode {
            state: s,
            parent: None,
            step: None,
            g_p: 0,
            g_s: 0.0,
            h,
            cost,
            superseded: false,
        });
        self.closed.insert(key, Entry { node: 0, g_p: 0, cost });
        self.best_h = h.h_p;
        let n = &self.nodes[0];
        self.open.push(0, n.f_p(self.cfg.weight), n.f_s(self.cfg.weight));
        true
    }

    /// Duplicate check, evaluation and insertion of one successor.
    fn offer(&mut self, parent: u32, path: &[TimedStep], step: TimedStep, state: State, cost: f64) {
        let sig = self.signature(path);
        let key = self.closed.key(&state, &sig);
        let g_p = self.nodes[parent as usize].g_p + 1;
        let previous = self.closed.get(&key).copied();
        if let Some(e) = previous {
            if !supersedes(self.anytime, g_p, cost, &e) {
                self.stats.pruned_duplicate += 1;
                return;
            }
        }
        self.stats.evaluations += 1;
        let h = self.eval.evaluate(&state, if self.cfg.heuristic == HeuristicKind::RphSched { path } else { &[] });
        let Some(h) = h else {
            self.stats.dead_ends += 1;
            self.closed.insert(key, Entry { node: u32::MAX, g_p: 0, cost: f64::NEG_INFINITY });
            return;
        };
        let id = self.nodes.len() as u32;
        let g_s = self.nodes[parent as usize].g_s.max(step.end());
        if let Some(e) = previous {
            if let Some(old) = self.nodes.get_mut(e.node as usize) {
                old.superseded = true;
            }
            self.stats.reopened += 1;
        }
        self.closed.insert(key, Entry { node: id, g_p, cost });
        self.best_h = self.best_h.min(h.h_p);
        let node = SearchNode { state, parent: Some(parent), step: Some(step), g_p, g_s, h, cost, superseded: false };
        self.open.push(id, node.f_p(self.cfg.weight), node.f_s(self.cfg.weight));
        self.nodes.push(node);
    }

    /// Successors of `id` with their timed steps, plus the extended path
    /// when the heuristic, the signature or the anytime check needs it.
    fn successors(&mut self, id: u32) -> Vec<(TimedStep, State, Vec<TimedStep>)> {
        let sym = self.sym;
        let n = &self.nodes[id as usize];
        let ex = expand(self.inst, sym, self.cfg.exact_symmetry, &n.state);
        self.stats.pruned_symmetry += ex.pruned as u64;
        self.stats.generated += ex.successors.len() as u64;
        let base = self.path(Some(id));
        let keep_path = self.needs_path();
        ex.successors
            .into_iter()
            .map(|(op, state, duration)| {
                check_groups(self.inst, &state);
                let start = base
                    .iter()
                    .filter(|p| p.op == op || self.deps.get(p.op, op))
                    .map(TimedStep::end)
                    .fold(0.0, f64::max);
                let step = TimedStep { op, start, duration };
                let path = if keep_path || self.anytime {
                    let mut p = base.clone();
                    p.push(step);
                    p
                } else {
                    Vec::new()
                };
                (step, state, path)
            })
            .collect()
    }

    fn ops(&self, id: u32) -> Vec<OpId> {
        self.path(Some(id)).iter().map(|s| s.op).collect()
    }

    fn debug_check_schedule(&self, id: u32) {
        if cfg!(debug_assertions) {
            let n = &self.nodes[id as usize];
            let plan = replay(self.inst, &self.ops(id)).expect("node path replays");
            let full = schedule(&plan, self.deps).makespan();
            assert!((full - n.g_s).abs() <= 1e-6 * full.abs().max(1.0), "incremental g_s {} != {}", n.g_s, full);
            assert_eq!(plan.final_state.props, n.state.props);
        }
    }
}

/// Best-first search under the δ-comparator on `f = g + w·h`; stops when a
/// goal is expanded.
pub fn weighted_astar(
    inst: &GroundedInstance,
    deps: &DependencyTable,
    sym: Option<&Symmetries>,
    cfg: &SearchConfig,
) -> SearchOutcome {
    let mut e = Engine::new(inst, deps, sym, cfg, false);
    let done = |e: Engine, solution: Option<Solution>, termination| SearchOutcome {
        solution,
        termination,
        stats: e.stats,
        improvements: Vec::new(),
    };
    if inst.goal_unreachable || !e.push_root() {
        return done(e, None, Termination::NoPlan);
    }
    while let Some((id, _)) = e.open.pop() {
        if e.nodes[id as usize].superseded {
            continue;
        }
        if inst.is_goal(&e.nodes[id as usize].state) {
            e.debug_check_schedule(id);
            let sol = build_solution(inst, deps, &e.ops(id));
            return done(e, Some(sol), Termination::Solved);
        }
        if let Some(t) = e.budget.check(e.stats.expansions) {
            return done(e, None, t);
        }
        e.stats.expansions += 1;
        e.log_progress(f64::INFINITY);
        if cfg!(debug_assertions) && e.stats.expansions.is_multiple_of(1024) {
            e.debug_check_schedule(id);
        }
        for (step, state, path) in e.successors(id) {
            e.offer(id, &path, step, state, 0.0);
        }
    }
    done(e, None, Termination::NoPlan)
}

/// Keeps exploring after the first plan, scheduling every generated goal
/// and keeping the best; goals are not expanded further.
pub fn anytime(
    inst: &GroundedInstance,
    deps: &DependencyTable,
    sym: Option<&Symmetries>,
    cfg: &SearchConfig,
) -> SearchOutcome {
    let sym = sym.filter(|s| {
        if !s.metric_safe {
            log::warn!("symmetry pruning disabled: a symmetric pair moves a metric variable");
        }
        s.metric_safe
    });
    let mut e = Engine::new(inst, deps, sym, cfg, true);
    if !cfg.exact_duplicates && inst.metric.expr.mentions(inst.total_time) {
        log::warn!("duplicate pruning may discard a path with a shorter schedule; --exact-duplicates avoids this");
    }
    if !e.monotone {
        log::info!("metric is not monotone; plans are recorded without bound pruning");
    }
    let mut alpha = f64::INFINITY;
    let mut best: Option<Solution> = None;
    let mut improvements = Vec::new();
    let finish = |e: Engine, best: Option<Solution>, improvements, termination| SearchOutcome {
        termination: match (termination, &best) {
            (Termination::Exhausted, None) => Termination::NoPlan,
            (t, _) => t,
        },
        solution: best,
        stats: e.stats,
        improvements,
    };
    if inst.goal_unreachable {
        return finish(e, None, improvements, Termination::NoPlan);
    }
    if inst.is_goal(&inst.init) {
        let sol = build_solution(inst, deps, &[]);
        alpha = prefix_cost(inst, 0.0, &inst.init);
        improvements.push(sol.metric);
        best = Some(sol);
    }
    if !e.push_root() {
        return finish(e, best, improvements, Termination::Exhausted);
    }
    while let Some((id, _)) = e.open.pop() {
        let n = &e.nodes[id as usize];
        if n.superseded {
            continue;
        }
        if e.monotone && n.cost >= alpha - EPS {
            e.stats.pruned_bound += 1;
            continue;
        }
        if let Some(t) = e.budget.check(e.stats.expansions) {
            return finish(e, best, improvements, t);
        }
        e.stats.expansions += 1;
        e.log_progress(alpha);
        for (step, state, path) in e.successors(id) {
            let g_s = e.nodes[id as usize].g_s.max(step.end());
            let cost = prefix_cost(inst, g_s, &state);
            if inst.is_goal(&state) {
                let ops: Vec<OpId> = path.iter().map(|s| s.op).collect();
                let sol = build_solution(inst, deps, &ops);
                debug_assert!((sol.schedule.makespan() - g_s).abs() <= 1e-6 * g_s.max(1.0));
                let c = prefix_cost(inst, sol.schedule.makespan(), &sol.plan.final_state);
                if c < alpha - EPS {
                    alpha = c;
                    log::info!(
                        "improved: metric {} makespan {} steps {}",
                        sol.metric,
                        sol.schedule.makespan(),
                        ops.len()
                    );
                    improvements.push(sol.metric);
                    best = Some(sol);
                }
                continue;
            }
            if e.monotone && cost >= alpha - EPS {
                e.stats.pruned_bound += 1;
                continue;
            }
            e.offer(id, &path, step, state, cost);
        }
    }
    finish(e, best, improvements, Termination::Exhausted)
}

#[cfg(test)]
mod tests;
