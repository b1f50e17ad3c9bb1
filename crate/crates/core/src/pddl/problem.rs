use super::{
    eval_ground_number, expect_list, expect_symbol, parse_typed_list, split_define, ConditionAst, DomainAst,
    FormulaContext, GroundAtomAst, MetricAst, Optimization, ParseError, ProblemAst, Result, SExpr,
};

pub fn parse_problem(e: &SExpr, domain: &DomainAst) -> Result<ProblemAst> {
    let (name, sections) = split_define(e, "problem")?;
    let mut prob = ProblemAst {
        name,
        domain: String::new(),
        objects: Vec::new(),
        init_atoms: Vec::new(),
        init_values: Vec::new(),
        goal: Vec::new(),
        metric: MetricAst::total_time(),
    };
    let ctx = FormulaContext {
        predicates: &domain.predicates,
        functions: &domain.functions,
        params: &[],
        allow_duration: false,
    };
    let mut init = None;
    let mut goal = None;
    for section in sections {
        let items = expect_list(section, "problem section")?;
        let kw = items
            .first()
            .and_then(SExpr::as_keyword)
            .ok_or_else(|| ParseError::at(section.loc, "expected a :section"))?;
        let body = &items[1..];
        match kw {
            ":domain" => {
                let d = expect_symbol(
                    body.first().ok_or_else(|| ParseError::at(section.loc, ":domain needs a name"))?,
                    "domain name",
                )?;
                if d != domain.name {
                    return Err(ParseError::at(
                        section.loc,
                        format!("problem names domain {d} but {} was given", domain.name),
                    ));
                }
                prob.domain = d.to_string();
            }
            ":objects" => {
                for o in parse_typed_list(body)? {
                    if o.types.len() != 1 {
                        return Err(ParseError::at(section.loc, format!("object {} needs a single type", o.name)));
                    }
                    if !domain.has_type(&o.types[0]) {
                        return Err(ParseError::at(
                            section.loc,
                            format!("object {} has undeclared type {}", o.name, o.types[0]),
                        ));
                    }
                    prob.objects.push(o);
                }
            }
            ":init" => init = Some(body),
            ":goal" => goal = Some(section),
            ":metric" => prob.metric = parse_metric(&ctx, section, body)?,
            ":requirements" => {}
            other => return Err(ParseError::at(section.loc, format!("unknown problem section {other}"))),
        }
    }
    if prob.domain.is_empty() {
        return Err(ParseError::at(e.loc, "problem lacks (:domain ...)"));
    }

    let is_object = |n: &str| prob.objects.iter().any(|o| o.name == n) || domain.constants.iter().any(|o| o.name == n);
    for lit in init.unwrap_or_default() {
        if lit.head() == Some("=") {
            let l = lit.as_list().unwrap();
            if l.len() != 3 {
                return Err(ParseError::at(lit.loc, "(= <function> <value>) expected"));
            }
            let term = ctx.function_term(&l[1])?;
            if term.is_total_time() {
                return Err(ParseError::at(lit.loc, "total-time cannot be initialised"));
            }
            let atom =
                GroundAtomAst { predicate: term.function, args: term.args.iter().map(ToString::to_string).collect() };
            check_objects(&atom, lit, &is_object)?;
            prob.init_values.push((atom, eval_ground_number(&l[2])?));
        } else {
            let a = ctx.atom(lit)?;
            let atom = GroundAtomAst { predicate: a.predicate, args: a.args.iter().map(ToString::to_string).collect() };
            check_objects(&atom, lit, &is_object)?;
            prob.init_atoms.push(atom);
        }
    }

    if let Some(g) = goal {
        let l = g.as_list().unwrap();
        if l.len() > 2 {
            return Err(ParseError::at(g.loc, ":goal takes a single formula"));
        }
        if let Some(formula) = l.get(1) {
            let mut parts = Vec::new();
            ctx.conjuncts(formula, &mut parts)?;
            for p in parts {
                let c = ctx.condition(p)?;
                if let ConditionAst::Atom(a) | ConditionAst::Not(a) = &c {
                    for arg in &a.args {
                        let s = arg.to_string();
                        if !is_object(&s) {
                            return Err(ParseError::at(p.loc, format!("unknown object {s}")));
                        }
                    }
                }
                prob.goal.push(c);
            }
        }
    }
    Ok(prob)
}

fn check_objects(atom: &GroundAtomAst, at: &SExpr, is_object: &impl Fn(&str) -> bool) -> Result<()> {
    for a in &atom.args {
        if !is_object(a) {
            return Err(ParseError::at(at.loc, format!("unknown object {a} in init")));
        }
    }
    Ok(())
}

fn parse_metric(ctx: &FormulaContext<'_>, section: &SExpr, body: &[SExpr]) -> Result<MetricAst> {
    let [dir, expr] = body else {
        return Err(ParseError::at(section.loc, "(:metric minimize|maximize <expr>) expected"));
    };
    let direction = match dir.as_symbol() {
        Some("minimize") => Optimization::Minimize,
        Some("maximize") => Optimization::Maximize,
        _ => return Err(ParseError::at(dir.loc, "metric direction must be minimize or maximize")),
    };
    Ok(MetricAst { direction, expr: ctx.expr(expr)? })
}

#[cfg(test)]
mod tests {
    use num_rational::BigRational;

    use super::super::{parse_domain_text, parse_problem_text, BinOp, ExprAst};
    use super::*;

    const DOMAIN: &str = include_str!("../../data/zenotravel-domain.pddl");
    const PROBLEM: &str = include_str!("../../data/zenotravel-problem.pddl");

    fn zeno() -> (DomainAst, ProblemAst) {
        let d = parse_domain_text(DOMAIN).unwrap();
        let p = parse_problem_text(PROBLEM, &d).unwrap();
        (d, p)
    }

    #[test]
    fn zenotravel_problem_shape() {
        let (_, p) = zeno();
        assert_eq!(p.objects.len(), 8);
        let count = |t: &str| p.objects.iter().filter(|o| o.types[0] == t).count();
        assert_eq!((count("aircraft"), count("person"), count("city")), (1, 3, 4));
        assert_eq!(p.init_atoms.len(), 4);
        // The problem text carries eighteen numeric assignments.
        assert_eq!(p.init_values.len(), 18);
        assert_eq!(p.goal.len(), 3);
        assert_eq!(p.metric, MetricAst::total_time());
    }

    #[test]
    fn rational_init_values_are_exact() {
        let (_, p) = zeno();
        let value = |f: &str| p.init_values.iter().find(|(a, _)| a.predicate == f).unwrap().1.clone();
        assert_eq!(value("slow-burn"), BigRational::new(1.into(), 3.into()));
        assert_eq!(value("fast-speed"), BigRational::from_integer(10.into()));
        assert_eq!(value("refuel-rate"), BigRational::new(25.into(), 2.into()));
        assert_eq!(value("fuel"), BigRational::from_integer(750.into()));
    }

    #[test]
    fn compound_metric_tree() {
        let d = parse_domain_text(DOMAIN).unwrap();
        let text = PROBLEM.replace(
            "(:metric minimize total-time)",
            "(:metric minimize (+ (* 10 (total-time)) (* 1 (total-fuel-used))))",
        );
        let p = parse_problem_text(&text, &d).unwrap();
        let ExprAst::Binary(BinOp::Add, lhs, rhs) = &p.metric.expr else { panic!() };
        assert!(matches!(**lhs, ExprAst::Binary(BinOp::Mul, _, _)));
        assert!(matches!(**rhs, ExprAst::Binary(BinOp::Mul, _, _)));
    }

    #[test]
    fn empty_goal_is_valid() {
        let d = parse_domain_text(DOMAIN).unwrap();
        let text =
            PROBLEM.replace("(:goal (and (at dan city-a) (at ernie city-d) (at scott city-d)))", "(:goal (and))");
        let p = parse_problem_text(&text, &d).unwrap();
        assert!(p.goal.is_empty());
    }

    #[test]
    fn undeclared_object_type() {
        let d = parse_domain_text(DOMAIN).unwrap();
        let text = PROBLEM.replace("plane - aircraft", "plane - rocket");
        let err = parse_problem_text(&text, &d).unwrap_err();
        assert!(err.message.contains("undeclared type rocket"));
    }

    #[test]
    fn init_arity_mismatch() {
        let d = parse_domain_text(DOMAIN).unwrap();
        let text = PROBLEM.replace("(at plane city-a)", "(at plane)");
        let err = parse_problem_text(&text, &d).unwrap_err();
        assert!(err.message.contains("expects 2 arguments"));
    }
}
