//! Object transpositions: lookup tables, goal refinement, per-state
//! detection and operator pruning.

use std::collections::BTreeSet;

use crate::ground::{Fluent, GroundedInstance, NumericVariable};
use crate::state::{ArithExpr, FluentId, GroundedOperator, NumericCondition, ObjId, OpId, State, VarId};

/// Unordered pair of distinct same-typed objects, `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transposition {
    pub a: ObjId,
    pub b: ObjId,
}

impl Transposition {
    pub fn new(x: ObjId, y: ObjId) -> Self {
        Transposition { a: x.min(y), b: x.max(y) }
    }

    pub fn swap(&self, o: ObjId) -> ObjId {
        if o == self.a {
            self.b
        } else if o == self.b {
            self.a
        } else {
            o
        }
    }

    fn swap_args(&self, args: &[ObjId]) -> Vec<ObjId> {
        args.iter().map(|&o| self.swap(o)).collect()
    }
}

/// All same-type pairs, in object index order.
pub fn generate_typed_transpositions(inst: &GroundedInstance) -> Vec<Transposition> {
    let mut out = Vec::new();
    for (i, x) in inst.objects.iter().enumerate() {
        for (j, y) in inst.objects.iter().enumerate().skip(i + 1) {
            if x.ty == y.ty {
                out.push(Transposition::new(i as ObjId, j as ObjId));
            }
        }
    }
    out
}

/// Images of every fluent, variable and operator under one transposition;
/// `None` where the image is not part of the instance.
#[derive(Debug, Clone)]
pub struct TranspositionTable {
    pub pair: Transposition,
    pub fluents: Vec<Option<FluentId>>,
    pub vars: Vec<Option<VarId>>,
    pub ops: Vec<Option<OpId>>,
    /// Every operator maps onto an operator with the transposed structure.
    pub transparent: bool,
    moved_fluents: Vec<FluentId>,
    moved_vars: Vec<VarId>,
}

impl TranspositionTable {
    pub fn build(inst: &GroundedInstance, pair: Transposition) -> Self {
        let fluents: Vec<Option<FluentId>> = inst
            .fluents
            .iter()
            .map(|f| inst.fluent_id(&Fluent { predicate: f.predicate.clone(), args: pair.swap_args(&f.args) }))
            .collect();
        let vars: Vec<Option<VarId>> = inst
            .variables
            .iter()
            .map(|v| inst.var_id(&NumericVariable { function: v.function.clone(), args: pair.swap_args(&v.args) }))
            .collect();
        let ops: Vec<Option<OpId>> =
            inst.operators.iter().map(|o| inst.op_id(&o.schema, &pair.swap_args(&o.args))).collect();
        let moved_fluents = (0..fluents.len() as FluentId).filter(|&f| fluents[f as usize] != Some(f)).collect();
        let moved_vars = (0..vars.len() as VarId).filter(|&v| vars[v as usize] != Some(v)).collect();
        let mut t = TranspositionTable { pair, fluents, vars, ops, transparent: false, moved_fluents, moved_vars };
        t.transparent = (0..inst.operators.len()).all(|i| t.op_matches(inst, i as OpId));
        t
    }

    pub fn fluent(&self, f: FluentId) -> Option<FluentId> {
        self.fluents[f as usize]
    }

    pub fn var(&self, v: VarId) -> Option<VarId> {
        self.vars[v as usize]
    }

    pub fn op(&self, o: OpId) -> Option<OpId> {
        self.ops[o as usize]
    }

    fn map_set(&self, s: &[FluentId]) -> Option<Vec<FluentId>> {
        let mut v = s.iter().map(|&f| self.fluent(f)).collect::<Option<Vec<_>>>()?;
        v.sort_unstable();
        Some(v)
    }

    fn map_expr(&self, e: &ArithExpr) -> Option<ArithExpr> {
        if e.leaves().iter().any(|&v| self.var(v).is_none()) {
            return None;
        }
        Some(e.map_vars(&|v| self.var(v).unwrap()))
    }

    fn map_condition(&self, c: &NumericCondition) -> Option<NumericCondition> {
        Some(NumericCondition { lhs: self.map_expr(&c.lhs)?, cmp: c.cmp, rhs: self.map_expr(&c.rhs)? })
    }

    /// O[o↔o′] exists and equals O with every fluent and variable mapped.
    fn op_matches(&self, inst: &GroundedInstance, o: OpId) -> bool {
        let Some(image) = self.op(o) else { return false };
        let (x, y): (&GroundedOperator, &GroundedOperator) =
            (&inst.operators[o as usize], &inst.operators[image as usize]);
        let sets = [(&x.pre, &y.pre), (&x.pre_neg, &y.pre_neg), (&x.add, &y.add), (&x.del, &y.del)];
        if !sets.iter().all(|(a, b)| self.map_set(a).as_ref() == Some(*b)) {
            return false;
        }
        if x.conditions.len() != y.conditions.len() || x.effects.len() != y.effects.len() {
            return false;
        }
        let conds = x.conditions.iter().zip(&y.conditions).all(|(c, d)| self.map_condition(c).as_ref() == Some(d));
        let effs = x.effects.iter().zip(&y.effects).all(|(e, f)| {
            self.var(e.head) == Some(f.head) && e.op == f.op && self.map_expr(&e.body).as_ref() == Some(&f.body)
        });
        conds && effs && self.map_expr(&x.duration).as_ref() == Some(&y.duration)
    }

    /// S[o↔o′], or `None` when a true fluent or a variable has no image.
    pub fn transpose_state(&self, s: &State) -> Option<State> {
        let mut props = crate::state::BitSet::new(s.props.len());
        for f in s.props.iter() {
            props.insert(self.fluent(f)?);
        }
        let mut vals = vec![0.0; s.vals.len()];
        for (v, &x) in s.vals.iter().enumerate() {
            vals[self.var(v as VarId)? as usize] = x;
        }
        Some(State { props, vals })
    }

    /// C[o↔o′] = C, touching only fluents and variables the pair moves.
    pub fn fixes(&self, s: &State) -> bool {
        self.moved_fluents.iter().all(|&f| {
            let holds = s.props.contains(f);
            match self.fluent(f) {
                Some(g) => s.props.contains(g) == holds,
                None => !holds,
            }
        }) && self.moved_vars.iter().all(|&v| match self.var(v) {
            Some(w) => s.vals[v as usize].to_bits() == s.vals[w as usize].to_bits(),
            None => false,
        })
    }
}

/// Pairs leaving the goal description unchanged.
pub fn refine_by_goal(inst: &GroundedInstance, tables: &[TranspositionTable]) -> Vec<usize> {
    let g = &inst.goal;
    let pos: BTreeSet<FluentId> = g.pos.iter().copied().collect();
    let neg: BTreeSet<FluentId> = g.neg.iter().copied().collect();
    (0..tables.len())
        .filter(|&i| {
            let t = &tables[i];
            let maps = |set: &BTreeSet<FluentId>| {
                set.iter().map(|&f| t.fluent(f)).collect::<Option<BTreeSet<_>>>().as_ref() == Some(set)
            };
            let numeric = g.numeric.iter().all(|c| t.map_condition(c).is_some_and(|m| g.numeric.contains(&m)));
            maps(&pos) && maps(&neg) && numeric
        })
        .collect()
}

/// Pairing of the fact groups of two representatives, member by member.
#[derive(Debug, Clone)]
struct Chain {
    table: usize,
    /// (group of a, group of b).
    groups: Vec<(usize, usize)>,
    /// Moved fluents outside the paired groups.
    rest: Vec<FluentId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SymmetryStats {
    pub sym: usize,
    pub sym_goal: usize,
    /// Objects in some typed transposition.
    pub objects: usize,
    /// Objects that represent some fact group.
    pub representatives: usize,
}

/// Tables for SYM and the derived sets used at search time.
pub struct Symmetries {
    pub tables: Vec<TranspositionTable>,
    /// SYM′: goal-preserving and transparent, as indices into `tables`.
    pub goal_preserving: Vec<usize>,
    /// No pair in SYM′ moves a variable of the metric.
    pub metric_safe: bool,
    chains: Vec<Chain>,
    /// fluent → (group, position).
    group_of: Vec<Option<(usize, usize)>>,
    group_count: usize,
    pub stats: SymmetryStats,
}

impl Symmetries {
    pub fn new(inst: &GroundedInstance) -> Self {
        let pairs = generate_typed_transpositions(inst);
        let tables: Vec<TranspositionTable> = pairs.iter().map(|&p| TranspositionTable::build(inst, p)).collect();
        let goal_preserving: Vec<usize> =
            refine_by_goal(inst, &tables).into_iter().filter(|&i| tables[i].transparent).collect();
        let metric_vars = inst.metric_vars();
        let metric_safe = goal_preserving.iter().all(|&i| metric_vars.iter().all(|&v| tables[i].var(v) == Some(v)));

        let mut group_of = vec![None; inst.fluents.len()];
        for (g, grp) in inst.groups.iter().enumerate() {
            for (k, &m) in grp.members.iter().enumerate() {
                group_of[m as usize] = Some((g, k));
            }
        }
        let reps: BTreeSet<ObjId> = inst.groups.iter().filter_map(|g| g.representative).collect();
        let mut chains = Vec::new();
        for &i in &goal_preserving {
            let t = &tables[i];
            if !reps.contains(&t.pair.a) || !reps.contains(&t.pair.b) {
                continue;
            }
            if let Some(c) = Self::chain(inst, i, t) {
                chains.push(c);
            }
        }
        let objects: BTreeSet<ObjId> = pairs.iter().flat_map(|p| [p.a, p.b]).collect();
        let stats = SymmetryStats {
            sym: tables.len(),
            sym_goal: goal_preserving.len(),
            objects: objects.len(),
            representatives: reps.len(),
        };
        Symmetries { tables, goal_preserving, metric_safe, chains, group_of, group_count: inst.groups.len(), stats }
    }

    /// Aligns the groups of `a` with those of `b`; `None` if some group has
    /// no position-wise image.
    fn chain(inst: &GroundedInstance, table: usize, t: &TranspositionTable) -> Option<Chain> {
        let mut groups = Vec::new();
        let mut covered = BTreeSet::new();
        for (g, grp) in inst.groups.iter().enumerate() {
            if grp.representative != Some(t.pair.a) {
                continue;
            }
            let first = t.fluent(grp.members[0])?;
            let h = inst.groups.iter().position(|x| x.members.contains(&first))?;
            let other = &inst.groups[h];
            if other.representative != Some(t.pair.b) || other.members.len() != grp.members.len() {
                return None;
            }
            if grp.members.iter().zip(&other.members).any(|(&m, &n)| t.fluent(m) != Some(n)) {
                return None;
            }
            covered.extend(grp.members.iter().copied());
            covered.extend(other.members.iter().copied());
            groups.push((g, h));
        }
        let rest = t.moved_fluents.iter().copied().filter(|f| !covered.contains(f)).collect();
        Some(Chain { table, groups, rest })
    }

    pub fn sym(&self) -> impl Iterator<Item = Transposition> + '_ {
        self.tables.iter().map(|t| t.pair)
    }

    pub fn table(&self, i: usize) -> &TranspositionTable {
        &self.tables[i]
    }

    /// SYM″(C) by the exact state comparison over SYM′.
    pub fn dynamic(&self, s: &State) -> Vec<usize> {
        self.goal_preserving
            .iter()
            .copied()
            .filter(|&i| self.tables[i].transpose_state(s).is_some_and(|t| &t == s))
            .collect()
    }

    /// SYM″(C) restricted to group representatives: compares the positions of
    /// paired groups, then the remaining moved fluents and variables.
    pub fn fast(&self, s: &State) -> Vec<usize> {
        if self.chains.is_empty() {
            return Vec::new();
        }
        let mut pos = vec![usize::MAX; self.group_count];
        for f in s.props.iter() {
            if let Some((g, k)) = self.group_of[f as usize] {
                pos[g] = k;
            }
        }
        self.chains
            .iter()
            .filter(|c| {
                let t = &self.tables[c.table];
                c.groups.iter().all(|&(g, h)| pos[g] == pos[h])
                    && c.rest.iter().all(|&f| {
                        let holds = s.props.contains(f);
                        t.fluent(f).map_or(!holds, |g| s.props.contains(g) == holds)
                    })
                    && t.moved_vars.iter().all(|&v| {
                        t.var(v).is_some_and(|w| s.vals[v as usize].to_bits() == s.vals[w as usize].to_bits())
                    })
            })
            .map(|c| c.table)
            .collect()
    }

    /// Δ(C): applicable operators with an applicable image of smaller index
    /// under some pair in `active`. `applicable` must be sorted.
    pub fn pruning_set(&self, applicable: &[OpId], active: &[usize]) -> Vec<OpId> {
        if active.is_empty() {
            return Vec::new();
        }
        applicable
            .iter()
            .copied()
            .filter(|&o| {
                active
                    .iter()
                    .any(|&i| self.tables[i].op(o).is_some_and(|img| img < o && applicable.binary_search(&img).is_ok()))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests;
