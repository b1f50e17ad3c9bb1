use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::pddl::{read_single, AssignOp, BinOp, Comparator, Optimization, ParseError, SExpr, SExprKind};
use crate::state::{ArithExpr, BitSet, Goal, GroundedOperator, NumericCondition, NumericEffect, ObjId, State};

use super::{
    rational_to_f64, FactGroup, Fluent, GroundedInstance, GroundingStats, Metric, NumericVariable, Object,
    SimplifyStats,
};

type Result<T> = std::result::Result<T, ParseError>;

fn list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr]> {
    e.as_list().ok_or_else(|| ParseError::at(e.loc, format!("expected {what}")))
}

fn sym<'a>(e: &'a SExpr, what: &str) -> Result<&'a str> {
    e.as_symbol().ok_or_else(|| ParseError::at(e.loc, format!("expected {what}")))
}

/// `(head a b)` → ("head", ["a", "b"]).
fn ground_term(e: &SExpr) -> Result<(String, Vec<String>)> {
    let items = list(e, "ground term")?;
    let head = sym(items.first().ok_or_else(|| ParseError::at(e.loc, "empty term"))?, "name")?;
    let args = items[1..].iter().map(|a| sym(a, "object").map(str::to_string)).collect::<Result<_>>()?;
    Ok((head.to_string(), args))
}

struct Tables {
    objects: HashMap<String, ObjId>,
    fluents: HashMap<(String, Vec<String>), u32>,
    vars: HashMap<(String, Vec<String>), u32>,
}

impl Tables {
    fn fluent(&self, e: &SExpr) -> Result<u32> {
        let t = ground_term(e)?;
        self.fluents.get(&t).copied().ok_or_else(|| ParseError::at(e.loc, format!("unknown fluent {e}")))
    }

    fn expr(&self, e: &SExpr) -> Result<ArithExpr> {
        let items = list(e, "expression")?;
        match items {
            [n] if n.as_number().is_some() => return Ok(ArithExpr::Const(rational_to_f64(n.as_number().unwrap()))),
            [op, a] if op.as_symbol() == Some("-") && a.as_list().is_some() => {
                return Ok(ArithExpr::Neg(Box::new(self.expr(a)?)))
            }
            [op, a, b] => {
                let bin = match op.as_symbol() {
                    Some("+") => Some(BinOp::Add),
                    Some("-") => Some(BinOp::Sub),
                    Some("*") => Some(BinOp::Mul),
                    Some("/") => Some(BinOp::Div),
                    _ => None,
                };
                if let Some(bin) = bin {
                    return Ok(ArithExpr::binary(bin, self.expr(a)?, self.expr(b)?));
                }
            }
            _ => {}
        }
        let t = ground_term(e)?;
        self.vars
            .get(&t)
            .map(|&v| ArithExpr::Var(v))
            .ok_or_else(|| ParseError::at(e.loc, format!("unknown variable {e}")))
    }

    fn condition(&self, e: &SExpr) -> Result<Option<NumericCondition>> {
        let items = list(e, "condition")?;
        let Some(cmp) = e.head().and_then(Comparator::from_symbol) else { return Ok(None) };
        if items.len() != 3 {
            return Err(ParseError::at(e.loc, "comparison takes two operands"));
        }
        Ok(Some(NumericCondition { lhs: self.expr(&items[1])?, cmp, rhs: self.expr(&items[2])? }))
    }
}

fn collect_names(e: &SExpr, out: &mut BTreeSet<String>) {
    if let SExprKind::List(items) = &e.kind {
        let is_term = items.first().and_then(SExpr::as_symbol).is_some_and(|h| {
            !matches!(
                h,
                "and"
                    | "not"
                    | "+"
                    | "-"
                    | "*"
                    | "/"
                    | "<"
                    | "<="
                    | "="
                    | ">"
                    | ">="
                    | "assign"
                    | "increase"
                    | "decrease"
            )
        });
        if is_term && items[1..].iter().all(|a| a.as_symbol().is_some()) {
            for a in &items[1..] {
                out.insert(a.as_symbol().unwrap().to_string());
            }
        } else {
            for i in items {
                collect_names(i, out);
            }
        }
    }
}

/// Reads the grounded intermediate format back into an instance.
pub fn parse_grounded(text: &str) -> Result<GroundedInstance> {
    let top = read_single(text)?;
    let items = list(&top, "(define ...)")?;
    if items.first().and_then(SExpr::as_symbol) != Some("define") || items.len() < 2 {
        return Err(ParseError::at(top.loc, "expected (define (grounded <name>) ...)"));
    }
    let header = list(&items[1], "header")?;
    if header.len() != 2 || header[0].as_symbol() != Some("grounded") {
        return Err(ParseError::at(items[1].loc, "expected (grounded <name>)"));
    }
    let name = sym(&header[1], "name")?.to_string();

    let mut sections: BTreeMap<&str, Vec<&SExpr>> = BTreeMap::new();
    for s in &items[2..] {
        let kw = list(s, "section")?
            .first()
            .and_then(SExpr::as_keyword)
            .ok_or_else(|| ParseError::at(s.loc, "expected a :section"))?;
        sections.entry(kw).or_default().push(s);
    }
    let one = |k: &str| -> Result<&[SExpr]> {
        match sections.get(k).map(Vec::as_slice) {
            Some([s]) => Ok(&s.as_list().unwrap()[1..]),
            Some(_) => Err(ParseError::new(format!("duplicate {k} section"))),
            None => Ok(&[]),
        }
    };

    let fluent_terms = one(":fluents")?.iter().map(ground_term).collect::<Result<Vec<_>>>()?;
    let var_terms = one(":variables")?.iter().map(ground_term).collect::<Result<Vec<_>>>()?;

    let mut names = BTreeSet::new();
    for s in &items[2..] {
        collect_names(s, &mut names);
    }
    for s in sections.get(":action").into_iter().flatten() {
        let l = s.as_list().unwrap();
        if let Some(k) = l.iter().skip(1).position(|x| x.as_keyword().is_some()) {
            for a in &l[2..k + 1] {
                names.insert(sym(a, "object")?.to_string());
            }
        }
    }
    // Group names and action schema names are not objects unless used as arguments.
    let objects: Vec<Object> = names.iter().map(|n| Object { name: n.clone(), ty: "object".into() }).collect();
    let tables = Tables {
        objects: objects.iter().enumerate().map(|(i, o)| (o.name.clone(), i as ObjId)).collect(),
        fluents: fluent_terms.iter().cloned().enumerate().map(|(i, t)| (t, i as u32)).collect(),
        vars: var_terms.iter().cloned().enumerate().map(|(i, t)| (t, i as u32)).collect(),
    };
    let ids = |args: &[String]| args.iter().map(|a| tables.objects[a]).collect::<Vec<_>>();

    let mut arity: BTreeMap<String, usize> = BTreeMap::new();
    for (p, a) in &fluent_terms {
        arity.insert(p.clone(), a.len());
    }
    let fluents: Vec<Fluent> =
        fluent_terms.iter().map(|(p, a)| Fluent { predicate: p.clone(), args: ids(a) }).collect();
    let variables: Vec<NumericVariable> =
        var_terms.iter().map(|(f, a)| NumericVariable { function: f.clone(), args: ids(a) }).collect();
    let total_time = variables
        .iter()
        .position(|v| v.function == "total-time" && v.args.is_empty())
        .ok_or_else(|| ParseError::new("(:variables ...) must contain (total-time)"))? as u32;

    let mut props = BitSet::new(fluents.len());
    let mut vals = vec![0.0; variables.len()];
    for e in one(":init")? {
        if e.head() == Some("=") {
            let l = e.as_list().unwrap();
            let (Some(v), Some(x)) = (l.get(1), l.get(2).and_then(SExpr::as_number)) else {
                return Err(ParseError::at(e.loc, "(= <variable> <number>) expected"));
            };
            let t = ground_term(v)?;
            let id = tables.vars.get(&t).ok_or_else(|| ParseError::at(v.loc, "unknown variable"))?;
            vals[*id as usize] = rational_to_f64(x);
        } else {
            props.insert(tables.fluent(e)?);
        }
    }

    let mut goal = Goal::default();
    for e in one(":goal")? {
        if e.head() == Some("not") {
            goal.neg.push(tables.fluent(&e.as_list().unwrap()[1])?);
        } else if let Some(c) = tables.condition(e)? {
            goal.numeric.push(c);
        } else {
            goal.pos.push(tables.fluent(e)?);
        }
    }

    let metric = match one(":metric")? {
        [] => Metric { direction: Optimization::Minimize, expr: ArithExpr::Var(total_time) },
        [d, e] => Metric {
            direction: match d.as_symbol() {
                Some("minimize") => Optimization::Minimize,
                Some("maximize") => Optimization::Maximize,
                _ => return Err(ParseError::at(d.loc, "minimize or maximize expected")),
            },
            expr: tables.expr(e)?,
        },
        _ => return Err(ParseError::new("malformed :metric")),
    };

    let mut operators = Vec::new();
    for s in sections.get(":action").into_iter().flatten() {
        let l = s.as_list().unwrap();
        let schema = sym(l.get(1).ok_or_else(|| ParseError::at(s.loc, "action name missing"))?, "name")?;
        let k = l.iter().position(|x| x.as_keyword().is_some() && x.as_keyword() != Some(":action")).unwrap_or(l.len());
        let args: Vec<String> = l[2..k].iter().map(|a| sym(a, "object").map(str::to_string)).collect::<Result<_>>()?;
        let mut op = GroundedOperator::new(schema, ids(&args));
        let mut i = k;
        while i + 1 < l.len() {
            let field = l[i].as_keyword().unwrap_or_default();
            let body = &l[i + 1];
            let parts: Vec<&SExpr> =
                if body.head() == Some("and") { body.as_list().unwrap()[1..].iter().collect() } else { vec![body] };
            for p in parts {
                match (field, p.head()) {
                    (":condition", Some("not")) => op.pre_neg.push(tables.fluent(&p.as_list().unwrap()[1])?),
                    (":condition", _) => match tables.condition(p)? {
                        Some(c) => op.conditions.push(c),
                        None => op.pre.push(tables.fluent(p)?),
                    },
                    (":effect", Some("not")) => op.del.push(tables.fluent(&p.as_list().unwrap()[1])?),
                    (":effect", Some(m @ ("assign" | "increase" | "decrease"))) => {
                        let pl = p.as_list().unwrap();
                        if pl.len() != 3 {
                            return Err(ParseError::at(p.loc, "numeric effect takes a head and a body"));
                        }
                        let head = match tables.expr(&pl[1])? {
                            ArithExpr::Var(v) => v,
                            _ => return Err(ParseError::at(pl[1].loc, "effect head must be a variable")),
                        };
                        let mode = match m {
                            "assign" => AssignOp::Assign,
                            "increase" => AssignOp::Increase,
                            _ => AssignOp::Decrease,
                        };
                        let body = tables.expr(&pl[2])?;
                        if head == total_time && mode == AssignOp::Increase && op.effects.is_empty() {
                            op.duration = body.clone();
                        }
                        op.effects.push(NumericEffect { head, op: mode, body });
                    }
                    (":effect", _) => op.add.push(tables.fluent(p)?),
                    _ => return Err(ParseError::at(l[i].loc, format!("unknown action field {field}"))),
                }
            }
            i += 2;
        }
        op.finalize(Some(total_time));
        operators.push(op);
    }

    let mut groups = Vec::new();
    let mut covered = vec![false; fluents.len()];
    for s in sections.get(":group").into_iter().flatten() {
        let l = s.as_list().unwrap();
        let gname = sym(l.get(1).ok_or_else(|| ParseError::at(s.loc, "group name missing"))?, "group name")?;
        let mut members = l[2..].iter().map(|m| tables.fluent(m)).collect::<Result<Vec<_>>>()?;
        members.sort_unstable();
        for &m in &members {
            covered[m as usize] = true;
        }
        groups.push(FactGroup {
            name: gname.to_string(),
            representative: tables.objects.get(gname).copied(),
            members,
            exhaustive: true,
        });
    }
    for (f, done) in covered.iter().enumerate() {
        if !done {
            groups.push(FactGroup {
                name: format!("{}-{f}", fluents[f].predicate),
                representative: None,
                members: vec![f as u32],
                exhaustive: false,
            });
        }
    }

    let stats = GroundingStats {
        explored: operators.len(),
        simplify: SimplifyStats { kept: operators.len(), ..Default::default() },
        ..Default::default()
    };
    Ok(GroundedInstance::assemble(
        name,
        String::new(),
        objects,
        BTreeMap::new(),
        arity.into_iter().collect(),
        fluents,
        variables,
        State { props, vals },
        goal,
        false,
        operators,
        groups,
        metric,
        stats,
    ))
}
