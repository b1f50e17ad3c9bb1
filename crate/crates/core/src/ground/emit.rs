use std::fmt::{self, Write};

use crate::pddl::Optimization;
use crate::state::{ArithExpr, NumericCondition};

use super::GroundedInstance;

pub fn format_number6(x: f64) -> String {
    format!("{x:.6}")
}

pub(crate) fn write_expr(f: &mut impl Write, inst: &GroundedInstance, e: &ArithExpr) -> fmt::Result {
    match e {
        ArithExpr::Const(c) => write!(f, "({})", format_number6(*c)),
        ArithExpr::Var(v) => f.write_str(&inst.var_name(*v)),
        ArithExpr::Neg(a) => {
            f.write_str("(- ")?;
            write_expr(f, inst, a)?;
            f.write_str(")")
        }
        ArithExpr::Binary(op, a, b) => {
            write!(f, "({} ", op.symbol())?;
            write_expr(f, inst, a)?;
            f.write_str(" ")?;
            write_expr(f, inst, b)?;
            f.write_str(")")
        }
    }
}

fn write_condition(f: &mut String, inst: &GroundedInstance, c: &NumericCondition) -> fmt::Result {
    write!(f, "({} ", c.cmp.symbol())?;
    write_expr(f, inst, &c.lhs)?;
    f.write_str(" ")?;
    write_expr(f, inst, &c.rhs)?;
    f.write_str(")")
}

fn wrapped(out: &mut String, indent: &str, items: &[String]) {
    for chunk in items.chunks(4) {
        out.push('\n');
        out.push_str(indent);
        out.push_str(&chunk.join(" "));
    }
}

/// Grounded intermediate format: fluents, variables, init, goal, metric,
/// invariant groups, then one action block per operator.
pub fn emit_grounded(inst: &GroundedInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (grounded {})", inst.grounded_name());

    out.push_str("  (:fluents");
    let fluents: Vec<String> = (0..inst.fluents.len() as u32).map(|f| inst.fluent_name(f)).collect();
    wrapped(&mut out, "    ", &fluents);
    out.push_str(")\n");

    let vars: Vec<String> = (0..inst.variables.len() as u32).map(|v| inst.var_name(v)).collect();
    let _ = writeln!(out, "  (:variables {})", vars.join(" "));

    out.push_str("  (:init");
    let facts: Vec<String> = inst.init.props.iter().map(|f| inst.fluent_name(f)).collect();
    wrapped(&mut out, "    ", &facts);
    let values: Vec<String> = vars.iter().zip(&inst.init.vals).map(|(name, v)| format!("(= {name} {v})")).collect();
    wrapped(&mut out, "    ", &values);
    out.push_str(")\n");

    out.push_str("  (:goal");
    for &g in &inst.goal.pos {
        let _ = write!(out, " {}", inst.fluent_name(g));
    }
    for &g in &inst.goal.neg {
        let _ = write!(out, " (not {})", inst.fluent_name(g));
    }
    for c in &inst.goal.numeric {
        out.push(' ');
        let _ = write_condition(&mut out, inst, c);
    }
    out.push_str(")\n");

    let dir = match inst.metric.direction {
        Optimization::Minimize => "minimize",
        Optimization::Maximize => "maximize",
    };
    out.push_str("  (:metric ");
    out.push_str(dir);
    out.push(' ');
    let _ = write_expr(&mut out, inst, &inst.metric.expr);
    out.push_str(" )\n");

    for g in inst.groups.iter().filter(|g| g.exhaustive) {
        let _ = write!(out, "  (:group {}", g.name);
        let members: Vec<String> = g.members.iter().map(|&m| inst.fluent_name(m)).collect();
        wrapped(&mut out, "    ", &members);
        out.push_str(")\n");
    }

    for (i, op) in inst.operators.iter().enumerate() {
        let name = inst.op_name(i as u32);
        let _ = writeln!(out, "(:action {}", &name[1..name.len() - 1]);
        out.push_str(":condition\n  (and");
        for &p in &op.pre {
            let _ = write!(out, " {}", inst.fluent_name(p));
        }
        for &p in &op.pre_neg {
            let _ = write!(out, " (not {})", inst.fluent_name(p));
        }
        for c in &op.conditions {
            out.push_str("\n    ");
            let _ = write_condition(&mut out, inst, c);
        }
        out.push_str(")\n:effect\n  (and");
        for &a in &op.add {
            let _ = write!(out, " {}", inst.fluent_name(a));
        }
        for &d in &op.del {
            let _ = write!(out, " (not {})", inst.fluent_name(d));
        }
        for e in &op.effects {
            let _ = write!(out, "\n        ({} {} ", e.op.keyword(), inst.var_name(e.head));
            let _ = write_expr(&mut out, inst, &e.body);
            out.push(')');
        }
        out.push_str("))\n");
    }
    out.push_str(")\n");
    out
}
