use std::cmp::Ordering;
use std::collections::{HashSet, VecDeque};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::*;
use crate::benchmarks::{GRIPPER, TRAP, ZENOTRAVEL, ZENOTRAVEL_FUEL, ZENOTRAVEL_MIXED};
use crate::schedule::{parse_plan, resolve_plan, validate_parallel};

fn ops_of(inst: &GroundedInstance, text: &str) -> Vec<OpId> {
    resolve_plan(inst, &parse_plan(text).unwrap()).unwrap().iter().map(|s| s.op).collect()
}

fn with_goal(problem: &str, goal: &str) -> String {
    let at = problem.find("(:goal").unwrap();
    let end = problem[at..].find("\n  (:metric").map(|i| at + i).unwrap_or_else(|| problem.rfind(')').unwrap());
    format!("{}(:goal {goal})\n{}", &problem[..at], &problem[end..])
}

fn small_gripper(n: usize) -> GroundedInstance {
    let balls: Vec<String> = (1..=n).map(|i| format!("ball{i}")).collect();
    let p = format!(
        "(define (problem g{n}) (:domain gripper-timed) (:objects rooma roomb - room left right - gripper {} - ball) \
         (:init (at-robby rooma) (free left) (free right) {}) (:goal (and {})))",
        balls.join(" "),
        balls.iter().map(|b| format!("(at {b} rooma)")).collect::<String>(),
        balls.iter().map(|b| format!("(at {b} roomb)")).collect::<String>()
    );
    crate::load(GRIPPER.domain, &p).unwrap()
}

/// Fewest steps to a goal, by breadth-first search over states without their
/// total-time value.
fn bfs_oracle(inst: &GroundedInstance) -> Option<usize> {
    let strip = |s: &State| {
        let mut vals = s.vals.clone();
        vals[inst.total_time as usize] = 0.0;
        (s.props.clone(), vals.iter().map(|v| v.to_bits()).collect::<Vec<_>>())
    };
    let mut seen = HashSet::from([strip(&inst.init)]);
    let mut queue = VecDeque::from([(inst.init.clone(), 0)]);
    while let Some((s, d)) = queue.pop_front() {
        if inst.is_goal(&s) {
            return Some(d);
        }
        for o in &inst.operators {
            if let Some(t) = o.successor(&s, 0.0) {
                if seen.insert(strip(&t)) {
                    queue.push_back((t, d + 1));
                }
            }
        }
        assert!(seen.len() <= 100_000, "oracle suite instances stay small");
    }
    None
}

fn blind() -> SearchConfig {
    SearchConfig { weight: 1.0, heuristic: HeuristicKind::Zero, symmetry: false, ..SearchConfig::default() }
}

fn assert_valid(inst: &GroundedInstance, sol: &Solution) {
    let deps = inst.dependency_table();
    let v = validate_parallel(inst, &sol.schedule, &deps, Some(sol.schedule.makespan()));
    assert!(v.is_valid(), "{}", v.describe(inst, &sol.schedule));
}

#[test]
fn comparator_rules() {
    let p = |f_p, f_s, seq| Priority { f_p, f_s, seq };
    assert_eq!(compare(&p(10.0, 300.0, 0), &p(11.0, 200.0, 1), 2.0), Ordering::Greater);
    assert_eq!(compare(&p(10.0, 300.0, 0), &p(11.0, 200.0, 1), 0.0), Ordering::Less);
    assert_eq!(compare(&p(10.0, 300.0, 0), &p(10.0, 200.0, 1), 0.0), Ordering::Greater);
    assert_eq!(compare(&p(10.0, 200.0, 3), &p(10.0, 200.0, 3), 0.0), Ordering::Equal);
    assert_eq!(compare(&p(10.0, 200.0, 3), &p(10.0, 200.0, 4), 5.0), Ordering::Less);
}

#[test]
fn open_list_order_without_window() {
    let mut rng = StdRng::seed_from_u64(5);
    let mut open = OpenList::new(0);
    let mut all = Vec::new();
    for i in 0..500 {
        let (f_p, f_s) = (rng.gen_range(0..20) as f64, rng.gen_range(0..5) as f64);
        all.push(open.push(i, f_p, f_s));
    }
    all.sort_by(|a, b| compare(a, b, 0.0));
    let popped: Vec<Priority> = std::iter::from_fn(|| open.pop().map(|x| x.1)).collect();
    assert_eq!(popped, all);
    assert!(open.is_empty());
}

#[test]
fn open_list_window_prefers_schedule() {
    let mut rng = StdRng::seed_from_u64(8);
    for delta in [1, 2, 5] {
        let mut open = OpenList::new(delta);
        let mut live: Vec<Priority> = Vec::new();
        for i in 0..300 {
            live.push(open.push(i, rng.gen_range(0..30) as f64, rng.gen_range(0..50) as f64));
            if rng.gen_bool(0.4) {
                let (_, p) = open.pop().unwrap();
                let lo = live.iter().map(|x| x.f_p).fold(f64::INFINITY, f64::min);
                let window: Vec<&Priority> = live.iter().filter(|x| x.f_p <= lo + f64::from(delta)).collect();
                assert!(window.iter().all(|x| (p.f_s, p.seq) <= (x.f_s, x.seq)));
                assert!(p.f_p <= lo + f64::from(delta));
                live.retain(|x| x.seq != p.seq);
            }
        }
        assert_eq!(open.len(), live.len());
    }
}

#[test]
fn initial_expansion_matches_applicability() {
    let g = ZENOTRAVEL.ground().unwrap();
    let ex = expand(&g, None, false, &g.init);
    let names: Vec<String> = ex.successors.iter().map(|x| g.op_name(x.0)).collect();
    let mut expected = [
        "(board scott plane city-a)",
        "(fly plane city-a city-b)",
        "(fly plane city-a city-c)",
        "(zoom plane city-a city-b)",
        "(zoom plane city-a city-c)",
    ];
    expected.sort();
    let mut got = names.clone();
    got.sort();
    assert_eq!(got, expected);
    assert_eq!(ex.applicable, 5);
    let zoom = g.find_operator("zoom", &["plane", "city-a", "city-c"]).unwrap();
    let d = ex.successors.iter().find(|x| x.0 == zoom).unwrap().2;
    assert_eq!(d, 100.0);
}

#[test]
fn pruned_expansion_keeps_one_operator_per_orbit() {
    let g = ZENOTRAVEL.ground().unwrap();
    let sym = Symmetries::new(&g);
    let mut s = g.init.clone();
    for (p, from, to) in [("scott", "city-a", "city-c"), ("plane", "city-a", "city-c")] {
        s.props.remove(g.find_fluent("at", &[p, from]).unwrap());
        s.props.insert(g.find_fluent("at", &[p, to]).unwrap());
    }
    let full = expand(&g, None, false, &s);
    let reduced = expand(&g, Some(&sym), false, &s);
    let active = sym.dynamic(&s);
    let mut orbits: HashSet<OpId> = HashSet::new();
    for (o, _, _) in &full.successors {
        let images = active.iter().filter_map(|&i| sym.tables[i].op(*o));
        orbits.insert(images.chain([*o]).min().unwrap());
    }
    assert_eq!(reduced.successors.len(), orbits.len());
    assert!(reduced.successors.len() < full.successors.len());
    assert_eq!(reduced.pruned, full.successors.len() - orbits.len());
}

#[test]
fn duplicate_check_masks_metric_variables() {
    let g = ZENOTRAVEL_FUEL.ground().unwrap();
    let fuel_used = g.find_var("total-fuel-used", &[]).unwrap() as usize;
    let mut masked = ClosedSet::new(&g, false);
    let mut exact = ClosedSet::new(&g, true);
    let e = Entry { node: 0, g_p: 0, cost: 0.0 };
    masked.insert(masked.key(&g.init, &[]), e);
    exact.insert(exact.key(&g.init, &[]), e);
    let mut other = g.init.clone();
    other.vals[fuel_used] += 500.0;
    other.vals[g.total_time as usize] += 100.0;
    assert!(masked.duplicate_check(&other, &[]));
    assert!(!exact.duplicate_check(&other, &[]));
    let mut fresh = g.init.clone();
    fresh.vals[g.find_var("fuel", &["plane"]).unwrap() as usize] = 10.0;
    assert!(!masked.duplicate_check(&fresh, &[]));
}

#[test]
fn astar_plans_zenotravel() {
    let g = ZENOTRAVEL.ground().unwrap();
    let out = search(&g, &SearchConfig::default());
    assert_eq!(out.termination, Termination::Solved);
    let sol = out.solution.unwrap();
    assert_valid(&g, &sol);
    assert!(out.stats.expansions > 0 && out.stats.generated >= out.stats.expansions);

    // Step counts alone settle for a slow flight; the window on f_p lets the
    // schedule decide among near ties.
    let tuned = search(&g, &SearchConfig { weight: 1.0, delta: 2, ..SearchConfig::default() });
    let sol = tuned.solution.unwrap();
    assert_valid(&g, &sol);
    assert!(sol.schedule.makespan() <= 670.0, "{}", sol.schedule.makespan());
}

#[test]
fn astar_edge_cases() {
    let g = crate::load(ZENOTRAVEL.domain, &with_goal(ZENOTRAVEL.problem, "(at dan city-c)")).unwrap();
    let out = search(&g, &SearchConfig::default());
    assert_eq!(out.termination, Termination::Solved);
    assert!(out.solution.unwrap().plan.is_empty());

    // A person can never reach a city without a distance entry.
    let g = crate::load(ZENOTRAVEL.domain, &with_goal(ZENOTRAVEL.problem, "(at dan city-e)"));
    assert!(g.is_err() || search(&g.unwrap(), &SearchConfig::default()).termination == Termination::NoPlan);

    let t = crate::load(TRAP.domain, &with_goal(TRAP.problem, "(and (at-goal) (have-key))")).unwrap();
    let out = search(&t, &blind());
    assert_eq!(out.termination, Termination::NoPlan);
    assert!(out.solution.is_none());

    let g = small_gripper(4);
    let out = search(&g, &SearchConfig { node_budget: 3, ..blind() });
    assert_eq!(out.termination, Termination::NodeBudget);
    assert!(out.incomplete());
}

#[test]
fn blind_search_is_step_optimal() {
    let mut suite = vec![small_gripper(2), small_gripper(4), GRIPPER.ground().unwrap(), TRAP.ground().unwrap()];
    suite.push(
        crate::load(ZENOTRAVEL.domain, &with_goal(ZENOTRAVEL.problem, "(and (at dan city-a) (at scott city-c))"))
            .unwrap(),
    );
    for g in &suite {
        let want = bfs_oracle(g);
        let out = search(g, &blind());
        assert_eq!(out.solution.as_ref().map(|s| s.plan.len()), want, "{}", g.grounded_name());
        let pruned = search(g, &SearchConfig { symmetry: true, ..blind() });
        assert_eq!(pruned.solution.as_ref().map(|s| s.plan.len()), want, "{}", g.grounded_name());
        let exact = search(g, &SearchConfig { symmetry: true, exact_symmetry: true, ..blind() });
        assert_eq!(exact.solution.as_ref().map(|s| s.plan.len()), want, "{}", g.grounded_name());
    }
}

#[test]
fn hill_climbing() {
    let cfg = SearchConfig { algorithm: Algorithm::HillClimbing, ..SearchConfig::default() };
    let g = ZENOTRAVEL.ground().unwrap();
    let out = search(&g, &cfg);
    assert_eq!(out.termination, Termination::Solved);
    assert_valid(&g, out.solution.as_ref().unwrap());

    let g = crate::load(ZENOTRAVEL.domain, &with_goal(ZENOTRAVEL.problem, "(at plane city-a)")).unwrap();
    assert!(search(&g, &cfg).solution.unwrap().plan.is_empty());

    let t = TRAP.ground().unwrap();
    let out = search(&t, &cfg);
    assert_eq!(out.termination, Termination::NoPlan);
    let fallback = search(&t, &SearchConfig::default());
    let sol = fallback.solution.unwrap();
    assert_eq!(sol.plan.len(), 4);
    assert_valid(&t, &sol);
}

#[test]
fn anytime_reaches_the_optimal_makespan() {
    let g = ZENOTRAVEL.ground().unwrap();
    let out = search(&g, &SearchConfig { anytime: true, node_budget: 1_000_000, ..SearchConfig::default() });
    assert_eq!(out.termination, Termination::Exhausted);
    let sol = out.solution.unwrap();
    assert_valid(&g, &sol);
    assert_eq!(sol.schedule.makespan(), 540.0);
    assert!(out.improvements.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(out.improvements.last(), Some(&540.0));

    let f = ZENOTRAVEL_FUEL.ground().unwrap();
    let out = search(&f, &SearchConfig { anytime: true, node_budget: 1_000_000, ..SearchConfig::default() });
    assert!((out.solution.unwrap().metric - 4000.0 / 3.0).abs() < 0.01);
}

#[test]
fn anytime_budget_keeps_the_best_plan() {
    let g = ZENOTRAVEL.ground().unwrap();
    let out = search(&g, &SearchConfig { anytime: true, node_budget: 40, ..SearchConfig::default() });
    assert_eq!(out.termination, Termination::NodeBudget);
    assert!(out.incomplete());
    let sol = out.solution.unwrap();
    assert_eq!(Some(&sol.metric), out.improvements.last());
    assert_valid(&g, &sol);
}

#[test]
fn anytime_on_an_initial_goal() {
    let g = crate::load(ZENOTRAVEL.domain, &with_goal(ZENOTRAVEL.problem, "(at dan city-c)")).unwrap();
    let out = search(&g, &SearchConfig { anytime: true, ..SearchConfig::default() });
    assert_eq!(out.improvements, [0.0]);
    assert!(out.solution.unwrap().plan.is_empty());
}

#[test]
fn metric_monotonicity() {
    assert!(monotone_metric(&ZENOTRAVEL.ground().unwrap()));
    assert!(monotone_metric(&ZENOTRAVEL_FUEL.ground().unwrap()));
    assert!(monotone_metric(&ZENOTRAVEL_MIXED.ground().unwrap()));
    let p = ZENOTRAVEL.problem.replace("(:metric minimize total-time)", "(:metric minimize (fuel plane))");
    assert!(!monotone_metric(&crate::load(ZENOTRAVEL.domain, &p).unwrap()));
    let p = ZENOTRAVEL.problem.replace("(:metric minimize total-time)", "(:metric maximize (total-fuel-used))");
    assert!(!monotone_metric(&crate::load(ZENOTRAVEL.domain, &p).unwrap()));
}

#[test]
fn masked_duplicates_lose_the_shorter_schedule() {
    let g = ZENOTRAVEL.ground().unwrap();
    let deps = g.dependency_table();
    let better =
        "(zoom plane city-a city-c)\n(board dan plane city-c)\n(refuel plane city-c)\n(zoom plane city-c city-a)\n\
                  (board scott plane city-a)\n(debark dan plane city-a)\n(refuel plane city-a)\n";
    let worse =
        "(board scott plane city-a)\n(zoom plane city-a city-c)\n(board dan plane city-c)\n(refuel plane city-c)\n\
                 (zoom plane city-c city-a)\n(debark dan plane city-a)\n(refuel plane city-a)\n";
    let run = |text: &str| {
        let plan = replay(&g, &ops_of(&g, text)).unwrap();
        let sched = schedule(&plan, &deps);
        (plan.final_state, sched)
    };
    let (s_worse, p_worse) = run(worse);
    let (s_better, p_better) = run(better);
    assert_eq!(s_worse, s_better);
    assert!(p_better.makespan() < p_worse.makespan());

    let sig_worse = schedule_signature(g.operators.len(), &deps, &p_worse.steps);
    let sig_better = schedule_signature(g.operators.len(), &deps, &p_better.steps);
    let mut masked = ClosedSet::new(&g, false);
    masked.insert(masked.key(&s_worse, &sig_worse), Entry { node: 0, g_p: 7, cost: p_worse.makespan() });
    let stored = *masked.get(&masked.key(&s_better, &sig_better)).expect("same masked state");
    assert!(!supersedes(false, 7, p_better.makespan(), &stored));

    let mut exact = ClosedSet::new(&g, true);
    exact.insert(exact.key(&s_worse, &sig_worse), Entry { node: 0, g_p: 7, cost: p_worse.makespan() });
    assert!(!exact.duplicate_check(&s_better, &sig_better));
}

#[test]
fn exact_duplicates_still_find_plans() {
    let g = small_gripper(2);
    let out = search(&g, &SearchConfig { exact_duplicates: true, anytime: true, ..SearchConfig::default() });
    let sol = out.solution.unwrap();
    assert_valid(&g, &sol);
    let plain = search(&g, &SearchConfig { anytime: true, ..SearchConfig::default() });
    assert!(sol.schedule.makespan() <= plain.solution.unwrap().schedule.makespan());
}

#[test]
fn weight_below_one_is_rejected() {
    assert!(SearchConfig { weight: 0.5, ..SearchConfig::default() }.validate().is_err());
    assert!(SearchConfig { weight: f64::NAN, ..SearchConfig::default() }.validate().is_err());
    assert!(SearchConfig::default().validate().is_ok());
}
