use std::collections::VecDeque;

use super::{
    build_solution, check_groups, expand, Budget, ClosedSet, Entry, SearchConfig, SearchOutcome, SearchStats,
    Termination,
};
use crate::ground::GroundedInstance;
use crate::heuristic::Evaluator;
use crate::state::{DependencyTable, OpId, State};
use crate::symmetry::Symmetries;

/// Breadth-first from the current state until a strictly better `h_p`, then
/// commits to that path; fails as soon as one such search runs dry.
pub fn enforced_hill_climbing(
    inst: &GroundedInstance,
    deps: &DependencyTable,
    sym: Option<&Symmetries>,
    cfg: &SearchConfig,
) -> SearchOutcome {
    let eval = Evaluator::new(inst, deps, cfg.heuristic);
    let budget = Budget::new(cfg);
    let mut stats = SearchStats { evaluations: 1, ..SearchStats::default() };
    let done = |stats, ops: Option<Vec<OpId>>, termination| SearchOutcome {
        solution: ops.map(|ops| build_solution(inst, deps, &ops)),
        termination,
        stats,
        improvements: Vec::new(),
    };
    if inst.goal_unreachable {
        return done(stats, None, Termination::NoPlan);
    }
    let mut current = inst.init.clone();
    let Some(mut h) = eval.evaluate(&current, &[]).map(|e| e.h_p) else {
        stats.dead_ends += 1;
        return done(stats, None, Termination::NoPlan);
    };
    let mut plan: Vec<OpId> = Vec::new();
    while !inst.is_goal(&current) {
        // (state, parent index, operator)
        let mut arena: Vec<(State, usize, OpId)> = vec![(current.clone(), usize::MAX, 0)];
        let mut seen = ClosedSet::new(inst, false);
        seen.insert(seen.key(&current, &[]), Entry { node: 0, g_p: 0, cost: 0.0 });
        let mut queue = VecDeque::from([0usize]);
        let mut found = None;
        'bfs: while let Some(i) = queue.pop_front() {
            if let Some(t) = budget.check(stats.expansions) {
                return done(stats, None, t);
            }
            stats.expansions += 1;
            let ex = expand(inst, sym, cfg.exact_symmetry, &arena[i].0);
            stats.pruned_symmetry += ex.pruned as u64;
            for (op, s, _) in ex.successors {
                stats.generated += 1;
                check_groups(inst, &s);
                let key = seen.key(&s, &[]);
                if seen.get(&key).is_some() {
                    stats.pruned_duplicate += 1;
                    continue;
                }
                seen.insert(key, Entry { node: arena.len() as u32, g_p: 0, cost: 0.0 });
                stats.evaluations += 1;
                let Some(e) = eval.evaluate(&s, &[]) else {
                    stats.dead_ends += 1;
                    continue;
                };
                let goal = inst.is_goal(&s);
                arena.push((s, i, op));
                if e.h_p < h || goal {
                    found = Some((arena.len() - 1, e.h_p));
                    break 'bfs;
                }
                queue.push_back(arena.len() - 1);
            }
        }
        let Some((mut j, h_new)) = found else {
            log::info!("hill climbing stuck at h = {h} after {} steps", plan.len());
            return done(stats, None, Termination::NoPlan);
        };
        let mut segment = Vec::new();
        while arena[j].1 != usize::MAX {
            segment.push(arena[j].2);
            j = arena[j].1;
        }
        plan.extend(segment.into_iter().rev());
        h = h_new;
        let last = arena.len() - 1;
        current = arena.swap_remove(last).0;
    }
    done(stats, Some(plan), Termination::Solved)
}
