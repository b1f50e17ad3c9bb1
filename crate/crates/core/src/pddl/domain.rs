use std::collections::BTreeMap;

use super::{
    expect_list, expect_symbol, parse_typed_list, split_define, ActionAst, AssignOp, DomainAst, EffectAst,
    FormulaContext, ParseError, Requirement, Result, SExpr, Schema, TimeSpec, Timed, TypedName,
};

pub fn parse_domain(e: &SExpr) -> Result<DomainAst> {
    let (name, sections) = split_define(e, "domain")?;
    let mut dom = DomainAst {
        name,
        requirements: Vec::new(),
        types: BTreeMap::new(),
        constants: Vec::new(),
        predicates: Vec::new(),
        functions: Vec::new(),
        actions: Vec::new(),
    };
    let mut action_exprs = Vec::new();
    for section in sections {
        let items = expect_list(section, "domain section")?;
        let kw = items
            .first()
            .and_then(SExpr::as_keyword)
            .ok_or_else(|| ParseError::at(section.loc, "expected a :section"))?;
        let body = &items[1..];
        match kw {
            ":requirements" => {
                for r in body {
                    let kw = r.as_keyword().unwrap_or_default();
                    let req = Requirement::from_keyword(kw).ok_or_else(|| {
                        let supported: Vec<_> = Requirement::SUPPORTED.iter().map(|r| r.keyword()).collect();
                        ParseError::at(
                            r.loc,
                            format!("unsupported requirement {r}; supported: {}", supported.join(" ")),
                        )
                    })?;
                    dom.requirements.push(req);
                }
            }
            ":types" => {
                for t in parse_typed_list(body)? {
                    if t.types.len() != 1 {
                        return Err(ParseError::at(section.loc, "supertype cannot be an either-type"));
                    }
                    if t.name != "object" {
                        dom.types.insert(t.name, t.types[0].clone());
                    }
                }
            }
            ":constants" => dom.constants.extend(parse_typed_list(body)?),
            ":predicates" => {
                for p in body {
                    dom.predicates.push(parse_schema(p)?);
                }
            }
            ":functions" => {
                let mut i = 0;
                while i < body.len() {
                    if body[i].as_symbol() == Some("-") {
                        if body.get(i + 1).and_then(SExpr::as_symbol) != Some("number") {
                            return Err(ParseError::at(body[i].loc, "only numeric functions are supported"));
                        }
                        i += 2;
                        continue;
                    }
                    dom.functions.push(parse_schema(&body[i])?);
                    i += 1;
                }
            }
            ":durative-action" | ":action" => action_exprs.push(section),
            other => return Err(ParseError::at(section.loc, format!("unknown domain section {other}"))),
        }
    }

    // Supertypes named only on the right of '-' hang from `object`.
    let parents: Vec<String> = dom.types.values().cloned().collect();
    for p in parents {
        if p != "object" && !dom.types.contains_key(&p) {
            dom.types.insert(p, "object".into());
        }
    }
    for c in &dom.constants {
        check_types(&dom, c, e)?;
    }
    for s in dom.predicates.iter().chain(&dom.functions) {
        for p in &s.params {
            check_types(&dom, p, e)?;
        }
    }

    for a in action_exprs {
        let action = parse_action(&dom, a)?;
        dom.actions.push(action);
    }
    Ok(dom)
}

fn check_types(dom: &DomainAst, t: &TypedName, at: &SExpr) -> Result<()> {
    for ty in &t.types {
        if !dom.has_type(ty) {
            return Err(ParseError::at(at.loc, format!("undeclared type {ty} for {}", t.name)));
        }
    }
    Ok(())
}

fn parse_schema(e: &SExpr) -> Result<Schema> {
    let items = expect_list(e, "schema")?;
    let name = expect_symbol(items.first().ok_or_else(|| ParseError::at(e.loc, "empty schema"))?, "name")?;
    Ok(Schema { name: name.to_string(), params: parse_typed_list(&items[1..])? })
}

fn parse_action(dom: &DomainAst, e: &SExpr) -> Result<ActionAst> {
    let items = e.as_list().unwrap();
    let durative = items[0].as_keyword() == Some(":durative-action");
    let name = expect_symbol(items.get(1).ok_or_else(|| ParseError::at(e.loc, "action name missing"))?, "action name")?;
    let mut fields: BTreeMap<&str, &SExpr> = BTreeMap::new();
    let mut i = 2;
    while i < items.len() {
        let kw =
            items[i].as_keyword().ok_or_else(|| ParseError::at(items[i].loc, "expected an action field keyword"))?;
        let val = items.get(i + 1).ok_or_else(|| ParseError::at(items[i].loc, format!("{kw} has no value")))?;
        fields.insert(kw, val);
        i += 2;
    }
    let params = match fields.get(":parameters") {
        Some(p) => parse_typed_list(expect_list(p, "parameter list")?)?,
        None => Vec::new(),
    };
    for p in &params {
        if !p.name.starts_with('?') {
            return Err(ParseError::at(e.loc, format!("parameter {} must start with '?'", p.name)));
        }
        check_types(dom, p, e)?;
    }
    let ctx = FormulaContext {
        predicates: &dom.predicates,
        functions: &dom.functions,
        params: &params,
        allow_duration: durative,
    };

    let mut action = ActionAst {
        name: name.to_string(),
        params: params.clone(),
        duration: None,
        conditions: Vec::new(),
        effects: Vec::new(),
        loc: e.loc,
    };

    if durative {
        let d = fields
            .get(":duration")
            .ok_or_else(|| ParseError::at(e.loc, format!("durative action {name} has no :duration")))?;
        let mut parts = Vec::new();
        ctx.conjuncts(d, &mut parts)?;
        let [d] = parts.as_slice() else {
            return Err(ParseError::at(d.loc, "expected a single (= ?duration <expr>) constraint"));
        };
        let l = expect_list(d, "duration constraint")?;
        if l.len() != 3 || l[0].as_symbol() != Some("=") || l[1].as_symbol() != Some("?duration") {
            return Err(ParseError::at(d.loc, "expected (= ?duration <expr>)"));
        }
        let no_dur = FormulaContext { allow_duration: false, ..ctx };
        action.duration = Some(no_dur.expr(&l[2])?);

        if let Some(c) = fields.get(":condition") {
            let mut parts = Vec::new();
            ctx.conjuncts(c, &mut parts)?;
            for p in parts {
                let (when, inner) = split_timed(p, &[TimeSpec::AtStart, TimeSpec::OverAll, TimeSpec::AtEnd])?;
                action.conditions.push(Timed { when, item: ctx.condition(inner)? });
            }
        }
        if let Some(eff) = fields.get(":effect") {
            let mut parts = Vec::new();
            ctx.conjuncts(eff, &mut parts)?;
            for p in parts {
                let (when, inner) = split_timed(p, &[TimeSpec::AtStart, TimeSpec::AtEnd])?;
                action.effects.push(Timed { when, item: parse_effect(&ctx, inner)? });
            }
        }
    } else {
        if let Some(c) = fields.get(":precondition") {
            let mut parts = Vec::new();
            ctx.conjuncts(c, &mut parts)?;
            for p in parts {
                action.conditions.push(Timed { when: TimeSpec::AtStart, item: ctx.condition(p)? });
            }
        }
        if let Some(eff) = fields.get(":effect") {
            let mut parts = Vec::new();
            ctx.conjuncts(eff, &mut parts)?;
            for p in parts {
                action.effects.push(Timed { when: TimeSpec::AtStart, item: parse_effect(&ctx, p)? });
            }
        }
    }
    Ok(action)
}

fn split_timed<'a>(e: &'a SExpr, allowed: &[TimeSpec]) -> Result<(TimeSpec, &'a SExpr)> {
    let items = expect_list(e, "timed formula")?;
    let when = match (items.first().and_then(SExpr::as_symbol), items.get(1).and_then(SExpr::as_symbol)) {
        (Some("at"), Some("start")) if items.len() == 3 && items[2].as_list().is_some() => TimeSpec::AtStart,
        (Some("at"), Some("end")) if items.len() == 3 && items[2].as_list().is_some() => TimeSpec::AtEnd,
        (Some("over"), Some("all")) if items.len() == 3 => TimeSpec::OverAll,
        _ => return Err(ParseError::at(e.loc, format!("expected a time specifier, found '{e}'"))),
    };
    if !allowed.contains(&when) {
        return Err(ParseError::at(e.loc, "time specifier not allowed here"));
    }
    Ok((when, &items[2]))
}

fn parse_effect(ctx: &FormulaContext<'_>, e: &SExpr) -> Result<EffectAst> {
    let items = expect_list(e, "effect")?;
    let op = match e.head() {
        Some("not") => {
            if items.len() != 2 {
                return Err(ParseError::at(e.loc, "(not ...) takes one atom"));
            }
            return Ok(EffectAst::Delete(ctx.atom(&items[1])?));
        }
        Some("assign") => AssignOp::Assign,
        Some("increase") => AssignOp::Increase,
        Some("decrease") => AssignOp::Decrease,
        Some("forall" | "when" | "scale-up" | "scale-down") => {
            return Err(ParseError::at(e.loc, format!("'{}' is outside the supported subset", e.head().unwrap())))
        }
        _ => return Ok(EffectAst::Add(ctx.atom(e)?)),
    };
    if items.len() != 3 {
        return Err(ParseError::at(e.loc, format!("'{}' takes a head and a value", op.keyword())));
    }
    let head = ctx.function_term(&items[1])?;
    if head.is_total_time() {
        return Err(ParseError::at(e.loc, "total-time cannot be modified directly"));
    }
    Ok(EffectAst::Numeric(op, head, ctx.expr(&items[2])?))
}
