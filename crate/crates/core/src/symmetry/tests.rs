use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::*;
use crate::benchmarks::{GRIPPER, ZENOTRAVEL};

fn pair(inst: &GroundedInstance, x: &str, y: &str) -> Transposition {
    Transposition::new(inst.object_id(x).unwrap(), inst.object_id(y).unwrap())
}

fn table_of(sym: &Symmetries, t: Transposition) -> usize {
    sym.tables.iter().position(|x| x.pair == t).unwrap()
}

fn random_walk(inst: &GroundedInstance, rng: &mut StdRng, steps: usize) -> State {
    let mut s = inst.init.clone();
    for _ in 0..steps {
        let ops: Vec<&GroundedOperator> = inst.operators.iter().filter(|o| o.applicable(&s, 0.0)).collect();
        if ops.is_empty() {
            break;
        }
        s = ops[rng.gen_range(0..ops.len())].apply(&s);
    }
    s
}

#[test]
fn typed_pair_counts() {
    let g = ZENOTRAVEL.ground().unwrap();
    assert_eq!(generate_typed_transpositions(&g).len(), 9);

    let mut objects = String::new();
    for (ty, n) in [("city", 10), ("truck", 10), ("airplane", 5), ("package", 15)] {
        for i in 0..n {
            objects.push_str(&format!(" {ty}{i}"));
        }
        objects.push_str(&format!(" - {ty}"));
    }
    let domain = "(define (domain logistics) (:requirements :typing) (:types city truck airplane package))";
    let problem = format!("(define (problem p) (:domain logistics) (:objects{objects}) (:init) (:goal (and)))");
    let l = crate::load(domain, &problem).unwrap();
    assert_eq!(generate_typed_transpositions(&l).len(), 205);

    let single = "(define (problem p) (:domain logistics) (:objects c - city t - truck) (:init) (:goal (and)))";
    assert!(generate_typed_transpositions(&crate::load(domain, single).unwrap()).is_empty());
}

#[test]
fn fluent_images_and_involution() {
    let g = ZENOTRAVEL.ground().unwrap();
    let sym = Symmetries::new(&g);
    let t = sym.table(table_of(&sym, pair(&g, "scott", "dan")));
    let f = g.find_fluent("at", &["scott", "city-a"]).unwrap();
    assert_eq!(t.fluent(f), g.find_fluent("at", &["dan", "city-a"]));
    let plane = g.find_fluent("at", &["plane", "city-b"]).unwrap();
    assert_eq!(t.fluent(plane), Some(plane));
    for t in &sym.tables {
        for f in 0..g.fluents.len() as FluentId {
            if let Some(x) = t.fluent(f) {
                assert_eq!(t.fluent(x), Some(f));
            }
        }
        for o in 0..g.operators.len() as OpId {
            if let Some(x) = t.op(o) {
                assert_eq!(t.op(x), Some(o));
            }
        }
        for v in 0..g.variables.len() as VarId {
            if let Some(x) = t.var(v) {
                assert_eq!(t.var(x), Some(v));
            }
        }
    }
}

#[test]
fn initial_state_transpositions() {
    let g = ZENOTRAVEL.ground().unwrap();
    let sym = Symmetries::new(&g);
    let de = sym.table(table_of(&sym, pair(&g, "dan", "ernie")));
    assert_eq!(de.transpose_state(&g.init).as_ref(), Some(&g.init));
    let se = sym.table(table_of(&sym, pair(&g, "scott", "ernie")));
    assert_ne!(se.transpose_state(&g.init).as_ref(), Some(&g.init));
}

#[test]
fn goal_refinement() {
    let g = ZENOTRAVEL.ground().unwrap();
    let sym = Symmetries::new(&g);
    let kept: Vec<Transposition> = sym.goal_preserving.iter().map(|&i| sym.tables[i].pair).collect();
    assert_eq!(kept, [pair(&g, "ernie", "scott")]);
    assert_eq!(sym.stats, SymmetryStats { sym: 9, sym_goal: 1, objects: 7, representatives: 4 });

    let gr = GRIPPER.ground().unwrap();
    let gs = Symmetries::new(&gr);
    assert_eq!(gs.goal_preserving.len(), 16);
    let problem = GRIPPER.problem.replace(
        "(:goal (and (at ball1 roomb) (at ball2 roomb) (at ball3 roomb)\n              (at ball4 roomb) (at ball5 roomb) (at ball6 roomb)))",
        "(:goal (and))",
    );
    let open = crate::load(GRIPPER.domain, &problem).unwrap();
    let os = Symmetries::new(&open);
    assert_eq!(refine_by_goal(&open, &os.tables).len(), os.tables.len());

    let pinned = GRIPPER.problem.replace("(at ball1 roomb) (at ball2 roomb)", "(at ball1 roomb) (at ball2 rooma)");
    let pinned = pinned.replace("(at ball4 roomb) (at ball5 roomb) (at ball6 roomb)", "(at ball4 rooma)");
    let p = crate::load(GRIPPER.domain, &pinned).unwrap();
    let ps = Symmetries::new(&p);
    let balls: Vec<Transposition> = refine_by_goal(&p, &ps.tables)
        .into_iter()
        .map(|i| ps.tables[i].pair)
        .filter(|t| p.objects[t.a as usize].ty == "ball")
        .collect();
    // Pairs survive only between balls sharing a goal room, or both free.
    assert_eq!(balls, [pair(&p, "ball1", "ball3"), pair(&p, "ball2", "ball4"), pair(&p, "ball5", "ball6")]);
}

#[test]
fn dynamic_symmetries_follow_locations() {
    let g = ZENOTRAVEL.ground().unwrap();
    let sym = Symmetries::new(&g);
    assert!(sym.dynamic(&g.init).is_empty());
    assert!(sym.fast(&g.init).is_empty());

    let mut s = g.init.clone();
    s.props.remove(g.find_fluent("at", &["scott", "city-a"]).unwrap());
    s.props.insert(g.find_fluent("at", &["scott", "city-c"]).unwrap());
    let se = table_of(&sym, pair(&g, "ernie", "scott"));
    assert_eq!(sym.dynamic(&s), [se]);
    assert_eq!(sym.fast(&s), [se]);
}

#[test]
fn pruning_keeps_the_smaller_index() {
    let g = ZENOTRAVEL.ground().unwrap();
    let sym = Symmetries::new(&g);
    let mut s = g.init.clone();
    for (p, from, to) in [("scott", "city-a", "city-c"), ("plane", "city-a", "city-c")] {
        s.props.remove(g.find_fluent("at", &[p, from]).unwrap());
        s.props.insert(g.find_fluent("at", &[p, to]).unwrap());
    }
    let applicable: Vec<OpId> =
        (0..g.operators.len() as OpId).filter(|&o| g.operators[o as usize].applicable(&s, 0.0)).collect();
    let active = sym.dynamic(&s);
    let pruned = sym.pruning_set(&applicable, &active);
    let be = g.find_operator("board", &["ernie", "plane", "city-c"]).unwrap();
    let bs = g.find_operator("board", &["scott", "plane", "city-c"]).unwrap();
    let (lo, hi) = (be.min(bs), be.max(bs));
    assert_eq!(pruned, [hi]);
    assert!(!pruned.contains(&lo));
    assert!(sym.pruning_set(&applicable, &[]).is_empty());
}

#[test]
fn fast_path_agrees_with_exact_check() {
    for b in [&ZENOTRAVEL, &GRIPPER] {
        let g = b.ground().unwrap();
        let sym = Symmetries::new(&g);
        let reps: BTreeSet<ObjId> = g.groups.iter().filter_map(|x| x.representative).collect();
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..500 {
            let steps = rng.gen_range(0..12);
            let s = random_walk(&g, &mut rng, steps);
            let exact = sym.dynamic(&s);
            let fast = sym.fast(&s);
            assert!(fast.iter().all(|i| exact.contains(i)));
            for &i in &fast {
                assert!(sym.tables[i].fixes(&s));
            }
            let eligible: Vec<usize> = exact
                .iter()
                .copied()
                .filter(|&i| reps.contains(&sym.tables[i].pair.a) && reps.contains(&sym.tables[i].pair.b))
                .collect();
            assert_eq!(fast, eligible);
            assert!(exact.iter().all(|i| sym.goal_preserving.contains(i)));
        }
    }
}

#[test]
fn metric_guard_detects_moved_metric_variables() {
    let g = ZENOTRAVEL.ground().unwrap();
    assert!(Symmetries::new(&g).metric_safe);
}
