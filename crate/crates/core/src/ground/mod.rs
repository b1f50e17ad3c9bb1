//! Static analysis: grounding, constant folding, simplification and fact groups.

mod emit;
mod explore;
mod flatten;
mod functions;
mod groups;
mod reader;
mod simplify;

pub use emit::{emit_grounded, format_number6};
pub use explore::GAtom;
pub use flatten::{flatten_temporal, FlatSchema};
pub use functions::{rational_to_f64, FoldError, RatExpr};
pub use groups::{ceil_log2, encoding_width, FactGroup};
pub use reader::parse_grounded;
pub use simplify::{simplify_operators, DraftOperator, SimplifyStats};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_rational::BigRational;

use crate::pddl::{AssignOp, ConditionAst, DomainAst, ExprAst, FunctionTerm, Optimization, ProblemAst, Term};
use crate::state::{
    ArithExpr, BitSet, DependencyTable, FluentId, Goal, GroundedOperator, NumericCondition, NumericEffect, ObjId, OpId,
    State, VarId,
};
use explore::{fact_space_explore, CAtom, Resolver};
use functions::{FunctionEnv, FunctionKey};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{message}")]
pub struct GroundError {
    pub message: String,
}

impl GroundError {
    pub fn new(message: impl Into<String>) -> Self {
        GroundError { message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Object {
    pub name: String,
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fluent {
    pub predicate: String,
    pub args: Vec<ObjId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NumericVariable {
    pub function: String,
    pub args: Vec<ObjId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub direction: Optimization,
    pub expr: ArithExpr,
}

impl Metric {
    /// Value to minimise: maximisation metrics are negated.
    pub fn cost(&self, vals: &[f64]) -> Option<f64> {
        let v = self.expr.eval(vals)?;
        Some(match self.direction {
            Optimization::Minimize => v,
            Optimization::Maximize => -v,
        })
    }
}

/// Counts behind the "operators: N (from M)" report line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundingStats {
    pub explored: usize,
    pub explored_by_schema: BTreeMap<String, usize>,
    pub simplify: SimplifyStats,
    pub static_facts: usize,
}

/// The grounded quadruple ⟨S, I, O, G⟩ with symbol tables, groups and metric.
#[derive(Debug, Clone)]
pub struct GroundedInstance {
    pub domain_name: String,
    pub problem_name: String,
    /// Sorted by name; the index is the object id.
    pub objects: Vec<Object>,
    /// type → supertype.
    pub types: BTreeMap<String, String>,
    /// (name, arity) in name order.
    pub predicates: Vec<(String, usize)>,
    pub fluents: Vec<Fluent>,
    pub variables: Vec<NumericVariable>,
    pub total_time: VarId,
    pub init: State,
    pub goal: Goal,
    pub goal_unreachable: bool,
    pub operators: Vec<GroundedOperator>,
    pub groups: Vec<FactGroup>,
    pub metric: Metric,
    pub stats: GroundingStats,
    fluent_index: HashMap<Fluent, FluentId>,
    var_index: HashMap<NumericVariable, VarId>,
    op_index: HashMap<(String, Vec<ObjId>), OpId>,
    object_index: HashMap<String, ObjId>,
}

impl GroundedInstance {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        domain_name: String,
        problem_name: String,
        objects: Vec<Object>,
        types: BTreeMap<String, String>,
        predicates: Vec<(String, usize)>,
        fluents: Vec<Fluent>,
        variables: Vec<NumericVariable>,
        init: State,
        goal: Goal,
        goal_unreachable: bool,
        operators: Vec<GroundedOperator>,
        groups: Vec<FactGroup>,
        metric: Metric,
        stats: GroundingStats,
    ) -> Self {
        let fluent_index = fluents.iter().cloned().enumerate().map(|(i, f)| (f, i as FluentId)).collect();
        let var_index = variables.iter().cloned().enumerate().map(|(i, v)| (v, i as VarId)).collect();
        let op_index =
            operators.iter().enumerate().map(|(i, o)| ((o.schema.clone(), o.args.clone()), i as OpId)).collect();
        let object_index = objects.iter().enumerate().map(|(i, o)| (o.name.clone(), i as ObjId)).collect();
        let total_time = variables
            .iter()
            .position(|v| v.function == "total-time" && v.args.is_empty())
            .expect("total-time is always a variable") as VarId;
        GroundedInstance {
            domain_name,
            problem_name,
            objects,
            types,
            predicates,
            fluents,
            variables,
            total_time,
            init,
            goal,
            goal_unreachable,
            operators,
            groups,
            metric,
            stats,
            fluent_index,
            var_index,
            op_index,
            object_index,
        }
    }

    /// `<domain>-<problem>`, or the stored name for instances read back from text.
    pub fn grounded_name(&self) -> String {
        if self.problem_name.is_empty() {
            self.domain_name.clone()
        } else {
            format!("{}-{}", self.domain_name, self.problem_name)
        }
    }

    pub fn fluent_id(&self, f: &Fluent) -> Option<FluentId> {
        self.fluent_index.get(f).copied()
    }

    pub fn var_id(&self, v: &NumericVariable) -> Option<VarId> {
        self.var_index.get(v).copied()
    }

    pub fn op_id(&self, schema: &str, args: &[ObjId]) -> Option<OpId> {
        self.op_index.get(&(schema.to_string(), args.to_vec())).copied()
    }

    pub fn object_id(&self, name: &str) -> Option<ObjId> {
        self.object_index.get(name).copied()
    }

    /// Looks up `(board dan plane city-a)`-style names.
    pub fn find_operator(&self, schema: &str, args: &[&str]) -> Option<OpId> {
        let ids = args.iter().map(|a| self.object_id(a)).collect::<Option<Vec<_>>>()?;
        self.op_id(schema, &ids)
    }

    pub fn find_fluent(&self, predicate: &str, args: &[&str]) -> Option<FluentId> {
        let ids = args.iter().map(|a| self.object_id(a)).collect::<Option<Vec<_>>>()?;
        self.fluent_id(&Fluent { predicate: predicate.to_string(), args: ids })
    }

    pub fn find_var(&self, function: &str, args: &[&str]) -> Option<VarId> {
        let ids = args.iter().map(|a| self.object_id(a)).collect::<Option<Vec<_>>>()?;
        self.var_id(&NumericVariable { function: function.to_string(), args: ids })
    }

    fn paren_name(&self, head: &str, args: &[ObjId]) -> String {
        let mut s = format!("({head}");
        for &a in args {
            s.push(' ');
            s.push_str(&self.objects[a as usize].name);
        }
        s.push(')');
        s
    }

    pub fn fluent_name(&self, f: FluentId) -> String {
        let fl = &self.fluents[f as usize];
        self.paren_name(&fl.predicate, &fl.args)
    }

    pub fn var_name(&self, v: VarId) -> String {
        let var = &self.variables[v as usize];
        self.paren_name(&var.function, &var.args)
    }

    pub fn op_name(&self, o: OpId) -> String {
        let op = &self.operators[o as usize];
        self.paren_name(&op.schema, &op.args)
    }

    pub fn is_goal(&self, s: &State) -> bool {
        !self.goal_unreachable && self.goal.satisfied(s, 0.0)
    }

    pub fn dependency_table(&self) -> DependencyTable {
        DependencyTable::build(&self.operators)
    }

    pub fn encoding_width(&self) -> u32 {
        encoding_width(&self.groups)
    }

    /// Variables read by the metric expression.
    pub fn metric_vars(&self) -> Vec<VarId> {
        self.metric.expr.leaves()
    }

    pub fn display_expr(&self, e: &ArithExpr) -> ExprDisplay<'_> {
        ExprDisplay { inst: self, expr: e.clone() }
    }

    /// Duration-free static check: every pair of distinct operators is
    /// dependent, or one of them certainly takes zero time.
    pub fn inherently_sequential(&self, deps: &DependencyTable) -> bool {
        let zero: Vec<bool> = self.operators.iter().map(|o| o.duration.as_const() == Some(0.0)).collect();
        for i in 0..self.operators.len() {
            for j in i + 1..self.operators.len() {
                if !deps.get(i as OpId, j as OpId) && !zero[i] && !zero[j] {
                    return false;
                }
            }
        }
        true
    }
}

/// Prints an expression with variables by name and constants as `(30.000000)`.
pub struct ExprDisplay<'a> {
    inst: &'a GroundedInstance,
    expr: ArithExpr,
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        emit::write_expr(f, self.inst, &self.expr)
    }
}

fn sort_key(objects: &[Object], head: &str, args: &[ObjId]) -> (String, Vec<String>) {
    (head.to_string(), args.iter().map(|&a| objects[a as usize].name.clone()).collect())
}

/// Full pipeline from parsed domain and problem to the grounded instance.
pub fn ground(domain: &DomainAst, problem: &ProblemAst) -> Result<GroundedInstance, GroundError> {
    // Objects, sorted by name.
    let mut objects: Vec<Object> = Vec::new();
    for o in domain.constants.iter().chain(&problem.objects) {
        if objects.iter().any(|x| x.name == o.name) {
            continue;
        }
        objects.push(Object { name: o.name.clone(), ty: o.types[0].clone() });
    }
    objects.sort_by(|a, b| a.name.cmp(&b.name));
    let object_map: HashMap<String, ObjId> =
        objects.iter().enumerate().map(|(i, o)| (o.name.clone(), i as ObjId)).collect();

    let mut predicates: Vec<(String, usize)> =
        domain.predicates.iter().map(|p| (p.name.clone(), p.params.len())).collect();
    predicates.sort();
    let pred_map: HashMap<String, u32> = predicates.iter().enumerate().map(|(i, p)| (p.0.clone(), i as u32)).collect();

    let schemas: Vec<FlatSchema> = domain.actions.iter().map(flatten_temporal).collect();
    let resolver = Resolver { predicates: &pred_map, objects: &object_map };
    let mut pre = Vec::new();
    let mut adds = Vec::new();
    let mut domains = Vec::new();
    for s in &schemas {
        pre.push(s.pre_pos.iter().map(|a| resolver.atom(s, a)).collect::<Result<Vec<_>, _>>()?);
        adds.push(s.adds.iter().map(|a| resolver.atom(s, a)).collect::<Result<Vec<_>, _>>()?);
        domains.push(
            s.params
                .iter()
                .map(|p| {
                    (0..objects.len() as ObjId)
                        .filter(|&o| p.types.iter().any(|t| domain.is_subtype(&objects[o as usize].ty, t)))
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>(),
        );
        check_function_constants(s, &object_map)?;
    }
    let init_atoms: Vec<GAtom> = problem
        .init_atoms
        .iter()
        .map(|a| (pred_map[&a.predicate], a.args.iter().map(|x| object_map[x]).collect()))
        .collect();

    let explored = fact_space_explore(&schemas, &pre, &adds, &domains, &init_atoms, predicates.len());
    let init_set: BTreeSet<GAtom> = init_atoms.iter().cloned().collect();

    // Fluents: reached atoms appearing in some add or delete list.
    let mut compiled_effects: Vec<(Vec<CAtom>, Vec<CAtom>)> = Vec::new();
    for s in &schemas {
        let dels = s.dels.iter().map(|a| resolver.atom(s, a)).collect::<Result<Vec<_>, _>>()?;
        let negs = s.pre_neg.iter().map(|a| resolver.atom(s, a)).collect::<Result<Vec<_>, _>>()?;
        compiled_effects.push((dels, negs));
    }
    let mut touched: BTreeSet<GAtom> = BTreeSet::new();
    for (s, b) in &explored.ops {
        for a in &adds[*s] {
            touched.insert(a.ground(b));
        }
        for a in &compiled_effects[*s].0 {
            let g = a.ground(b);
            if explored.reached.contains(&g) {
                touched.insert(g);
            }
        }
    }
    let mut fluents: Vec<Fluent> = touched
        .iter()
        .map(|(p, args)| Fluent { predicate: predicates[*p as usize].0.clone(), args: args.clone() })
        .collect();
    fluents.sort_by_cached_key(|f| sort_key(&objects, &f.predicate, &f.args));
    let fluent_of: HashMap<GAtom, FluentId> =
        fluents.iter().enumerate().map(|(i, f)| ((pred_map[&f.predicate], f.args.clone()), i as FluentId)).collect();
    let static_true = |g: &GAtom| explored.reached.contains(g) && !fluent_of.contains_key(g);

    // Numeric variables: heads of effects plus total-time.
    let resolve_in = |s: &FlatSchema, b: &[ObjId], t: &Term| -> ObjId {
        match t {
            Term::Var(v) => b[s.params.iter().position(|p| &p.name == v).unwrap()],
            Term::Const(c) => object_map[c],
        }
    };
    let mut var_keys: BTreeSet<FunctionKey> = BTreeSet::new();
    for (s, b) in &explored.ops {
        let sch = &schemas[*s];
        for (_, head, _) in &sch.num_effects {
            var_keys.insert(FunctionEnv::key(head, &|t| resolve_in(sch, b, t)));
        }
    }
    var_keys.insert(("total-time".to_string(), vec![]));
    let mut variables: Vec<NumericVariable> =
        var_keys.into_iter().map(|(function, args)| NumericVariable { function, args }).collect();
    variables.sort_by_cached_key(|v| sort_key(&objects, &v.function, &v.args));
    let var_map: HashMap<FunctionKey, VarId> =
        variables.iter().enumerate().map(|(i, v)| ((v.function.clone(), v.args.clone()), i as VarId)).collect();
    let total_time = var_map[&("total-time".to_string(), vec![])];

    let mut init_values: HashMap<FunctionKey, BigRational> = HashMap::new();
    for (a, v) in &problem.init_values {
        init_values.insert((a.predicate.clone(), a.args.iter().map(|x| object_map[x]).collect()), v.clone());
    }
    let mut vals = vec![0.0; variables.len()];
    for (i, v) in variables.iter().enumerate() {
        if i as VarId == total_time {
            continue;
        }
        match init_values.get(&(v.function.clone(), v.args.clone())) {
            Some(x) => vals[i] = rational_to_f64(x),
            None => {
                let name = sort_key(&objects, &v.function, &v.args);
                let mut s = format!("({}", name.0);
                for a in name.1 {
                    s.push(' ');
                    s.push_str(&a);
                }
                return Err(GroundError::new(format!("initial value missing for numeric variable {s})")));
            }
        }
    }
    let constants: HashMap<FunctionKey, BigRational> =
        init_values.into_iter().filter(|(k, _)| !var_map.contains_key(k)).collect();
    let env = FunctionEnv { vars: &var_map, constants: &constants };

    // Operators.
    let mut drafts = Vec::new();
    for (s, b) in &explored.ops {
        let sch = &schemas[*s];
        let resolve = |t: &Term| resolve_in(sch, b, t);
        let mut op = GroundedOperator::new(sch.name.clone(), b.clone());
        let mut unsat: Option<String> = None;
        for a in &pre[*s] {
            let g = a.ground(b);
            if let Some(&f) = fluent_of.get(&g) {
                op.pre.push(f);
            }
        }
        for a in &compiled_effects[*s].1 {
            let g = a.ground(b);
            if let Some(&f) = fluent_of.get(&g) {
                op.pre_neg.push(f);
            } else if static_true(&g) {
                unsat = Some("negative precondition on a constant fact".into());
            }
        }
        op.add = adds[*s].iter().map(|a| fluent_of[&a.ground(b)]).collect();
        op.del = compiled_effects[*s].0.iter().filter_map(|a| fluent_of.get(&a.ground(b)).copied()).collect();

        let fold = |e: &ExprAst, unsat: &mut Option<String>| -> Option<RatExpr> {
            match env.fold(e, &resolve) {
                Ok(r) => Some(r),
                Err(err) => {
                    if unsat.is_none() {
                        *unsat = Some(describe_fold_error(&err, &objects));
                    }
                    None
                }
            }
        };
        for (cmp, l, r) in &sch.num_conds {
            let (Some(l), Some(r)) = (fold(l, &mut unsat), fold(r, &mut unsat)) else { continue };
            match normalize_condition(*cmp, l, r) {
                Ok(Some(c)) => op.conditions.push(c),
                Ok(None) => {}
                Err(()) => {
                    unsat.get_or_insert_with(|| "numeric condition false on constants".into());
                }
            }
        }
        if let Some(d) = &sch.duration {
            if let Some(d) = fold(d, &mut unsat) {
                if d.as_const().is_some_and(|c| c < &BigRational::from_integer(0.into())) {
                    return Err(GroundError::new(format!("negative duration for {}", sch.name)));
                }
                let body = d.to_arith();
                op.duration = body.clone();
                op.effects.push(NumericEffect { head: total_time, op: AssignOp::Increase, body });
            }
        }
        for (mode, head, body) in &sch.num_effects {
            let h = var_map[&FunctionEnv::key(head, &resolve)];
            if let Some(body) = fold(body, &mut unsat) {
                op.effects.push(NumericEffect { head: h, op: *mode, body: body.to_arith() });
            }
        }
        drafts.push(DraftOperator { op, unsat });
    }
    drafts.sort_by_cached_key(|d| sort_key(&objects, &d.op.schema, &d.op.args));
    let mut explored_by_schema = BTreeMap::new();
    for d in &drafts {
        *explored_by_schema.entry(d.op.schema.clone()).or_insert(0) += 1;
    }
    let explored_count = drafts.len();
    let (mut operators, simplify_stats) = simplify_operators(drafts, total_time);
    for o in &mut operators {
        o.finalize(Some(total_time));
    }

    // Goal.
    let gctx_resolve = |t: &Term| match t {
        Term::Const(c) => object_map.get(c).copied().unwrap_or(ObjId::MAX),
        Term::Var(_) => ObjId::MAX,
    };
    let mut goal = Goal::default();
    let mut goal_unreachable = false;
    for c in &problem.goal {
        match c {
            ConditionAst::Atom(a) | ConditionAst::Not(a) => {
                let g: GAtom = (pred_map[&a.predicate], a.args.iter().map(gctx_resolve).collect());
                let positive = matches!(c, ConditionAst::Atom(_));
                match (fluent_of.get(&g), positive) {
                    (Some(&f), true) => goal.pos.push(f),
                    (Some(&f), false) => goal.neg.push(f),
                    (None, true) => goal_unreachable |= !static_true(&g),
                    (None, false) => goal_unreachable |= static_true(&g),
                }
            }
            ConditionAst::Compare(cmp, l, r) => {
                let folded = env.fold(l, &gctx_resolve).and_then(|l| Ok((l, env.fold(r, &gctx_resolve)?)));
                match folded {
                    Ok((l, r)) => match normalize_condition(*cmp, l, r) {
                        Ok(Some(c)) => goal.numeric.push(c),
                        Ok(None) => {}
                        Err(()) => goal_unreachable = true,
                    },
                    Err(e) => return Err(GroundError::new(format!("goal: {}", describe_fold_error(&e, &objects)))),
                }
            }
        }
    }
    goal.pos.sort_unstable();
    goal.neg.sort_unstable();

    // Metric: only fluent variables may appear.
    let no_constants = HashMap::new();
    let metric_env = FunctionEnv { vars: &var_map, constants: &no_constants };
    let metric_expr = match metric_env.fold(&problem.metric.expr, &gctx_resolve) {
        Ok(e) => e.to_arith(),
        Err(FoldError::Undefined(k)) => {
            return Err(GroundError::new(format!(
                "metric references {} which is a constant, not a fluent variable",
                describe_key(&k, &objects)
            )))
        }
        Err(e) => return Err(GroundError::new(format!("metric: {}", describe_fold_error(&e, &objects)))),
    };

    let props = BitSet::from_indices(fluents.len(), init_set.iter().filter_map(|g| fluent_of.get(g).copied()));
    let init = State { props, vals };

    let group_input: Vec<(u32, Vec<ObjId>)> =
        fluents.iter().map(|f| (pred_map[&f.predicate], f.args.clone())).collect();
    let arity: Vec<usize> = predicates.iter().map(|p| p.1).collect();
    let candidates = groups::cluster_groups(&group_input, &arity, &operators, &init.props);
    let mut covered = vec![false; fluents.len()];
    let mut fact_groups = Vec::new();
    for c in candidates {
        for &m in &c.members {
            covered[m as usize] = true;
        }
        let representative = (c.key.len() == 1).then(|| c.key[0]);
        let name = match representative {
            Some(r) => objects[r as usize].name.clone(),
            None => {
                let f = &fluents[c.members[0] as usize];
                let mut n = f.predicate.clone();
                for &k in &c.key {
                    n.push('-');
                    n.push_str(&objects[k as usize].name);
                }
                n
            }
        };
        fact_groups.push(FactGroup { name, representative, members: c.members, exhaustive: true });
    }
    for (f, done) in covered.iter().enumerate() {
        if !done {
            let fl = &fluents[f];
            let mut name = fl.predicate.clone();
            for &a in &fl.args {
                name.push('-');
                name.push_str(&objects[a as usize].name);
            }
            fact_groups.push(FactGroup { name, representative: None, members: vec![f as FluentId], exhaustive: false });
        }
    }

    let stats = GroundingStats {
        explored: explored_count,
        explored_by_schema,
        simplify: simplify_stats,
        static_facts: explored.reached.iter().filter(|g| static_true(g)).count(),
    };
    Ok(GroundedInstance::assemble(
        domain.name.clone(),
        problem.name.clone(),
        objects,
        domain.types.clone(),
        predicates,
        fluents,
        variables,
        init,
        goal,
        goal_unreachable,
        operators,
        fact_groups,
        Metric { direction: problem.metric.direction, expr: metric_expr },
        stats,
    ))
}

fn check_function_constants(s: &FlatSchema, objects: &HashMap<String, ObjId>) -> Result<(), GroundError> {
    let mut bad = None;
    let mut check = |t: &FunctionTerm| {
        for a in &t.args {
            if let Term::Const(c) = a {
                if !objects.contains_key(c) {
                    bad = Some(c.clone());
                }
            }
        }
    };
    for (_, l, r) in &s.num_conds {
        l.for_each_function(&mut check);
        r.for_each_function(&mut check);
    }
    for (_, h, b) in &s.num_effects {
        check(h);
        b.for_each_function(&mut check);
    }
    if let Some(d) = &s.duration {
        d.for_each_function(&mut check);
    }
    match bad {
        Some(c) => Err(GroundError::new(format!("unknown constant {c} in {}", s.name))),
        None => Ok(()),
    }
}

fn describe_key(k: &FunctionKey, objects: &[Object]) -> String {
    let mut s = format!("({}", k.0);
    for &a in &k.1 {
        s.push(' ');
        s.push_str(objects.get(a as usize).map_or("?", |o| o.name.as_str()));
    }
    s.push(')');
    s
}

fn describe_fold_error(e: &FoldError, objects: &[Object]) -> String {
    match e {
        FoldError::Undefined(k) => format!("undefined constant {}", describe_key(k, objects)),
        FoldError::DivisionByZero => "division by zero in constant expression".into(),
    }
}

/// Puts a variable on the left when possible; `Ok(None)` for a condition that
/// holds on constants and `Err` for one that fails.
fn normalize_condition(cmp: crate::pddl::Comparator, l: RatExpr, r: RatExpr) -> Result<Option<NumericCondition>, ()> {
    if let (Some(a), Some(b)) = (l.as_const(), r.as_const()) {
        let holds = match cmp {
            crate::pddl::Comparator::Le => a <= b,
            crate::pddl::Comparator::Lt => a < b,
            crate::pddl::Comparator::Eq => a == b,
            crate::pddl::Comparator::Gt => a > b,
            crate::pddl::Comparator::Ge => a >= b,
        };
        return if holds { Ok(None) } else { Err(()) };
    }
    let (lhs, cmp, rhs) = match (&l, &r) {
        (RatExpr::Var(_), _) => (l, cmp, r),
        (_, RatExpr::Var(_)) => (r, cmp.flipped(), l),
        _ => (l, cmp, r),
    };
    Ok(Some(NumericCondition { lhs: lhs.to_arith(), cmp, rhs: rhs.to_arith() }))
}
