use std::fmt::Write;

use thiserror::Error;

use crate::ground::GroundedInstance;
use crate::state::OpId;

use super::TimedStep;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message}")]
pub struct PlanParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanLine {
    pub line: usize,
    pub start: Option<f64>,
    pub name: String,
    pub args: Vec<String>,
    pub duration: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlanFile {
    /// Comment lines without the leading `;`.
    pub comments: Vec<String>,
    pub steps: Vec<PlanLine>,
}

impl PlanFile {
    /// Value of a `; makespan <x>` header, if any.
    pub fn claimed_makespan(&self) -> Option<f64> {
        self.comments.iter().find_map(|c| {
            let mut w = c.split_whitespace();
            while let Some(t) = w.next() {
                if t.trim_end_matches(':') == "makespan" {
                    return w.next()?.parse().ok();
                }
            }
            None
        })
    }

    pub fn is_timed(&self) -> bool {
        self.steps.iter().all(|s| s.start.is_some() && s.duration.is_some())
    }
}

fn err(line: usize, message: impl Into<String>) -> PlanParseError {
    PlanParseError { line, message: message.into() }
}

fn number(text: &str, line: usize, what: &str) -> Result<f64, PlanParseError> {
    let t = text.trim();
    let v: f64 = t.parse().map_err(|_| err(line, format!("bad {what} '{t}'")))?;
    if !v.is_finite() || v < 0.0 {
        return Err(err(line, format!("{what} must be a finite non-negative number")));
    }
    Ok(v)
}

/// Lines of the form `<start>: (<name> <args>) [<duration>]`. Start and
/// duration may both be omitted for an untimed sequence.
pub fn parse_plan(text: &str) -> Result<PlanFile, PlanParseError> {
    let mut out = PlanFile::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut body = raw.trim();
        if let Some(c) = body.strip_prefix(';') {
            out.comments.push(c.trim().to_string());
            continue;
        }
        if let Some(k) = body.find(';') {
            body = body[..k].trim();
        }
        if body.is_empty() {
            continue;
        }
        let open = body.find('(').ok_or_else(|| err(line, "expected '(' before the action"))?;
        let close = body.find(')').ok_or_else(|| err(line, "missing ')'"))?;
        if close < open {
            return Err(err(line, "unbalanced parentheses"));
        }
        let prefix = body[..open].trim();
        let start = if prefix.is_empty() {
            None
        } else {
            let t = prefix.strip_suffix(':').ok_or_else(|| err(line, "expected ':' after the start time"))?;
            Some(number(t, line, "start time")?)
        };
        let mut words = body[open + 1..close].split_whitespace().map(str::to_lowercase);
        let name = words.next().ok_or_else(|| err(line, "empty action"))?;
        let args: Vec<String> = words.collect();
        let rest = body[close + 1..].trim();
        let duration = if rest.is_empty() {
            None
        } else {
            let inner = rest
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| err(line, "expected '[<duration>]' after the action"))?;
            Some(number(inner, line, "duration")?)
        };
        if start.is_some() != duration.is_some() {
            return Err(err(line, "start time and duration must be given together"));
        }
        out.steps.push(PlanLine { line, start, name, args, duration });
    }
    if out.steps.iter().any(|s| s.start.is_some()) && !out.is_timed() {
        let bad = out.steps.iter().find(|s| s.start.is_none()).unwrap();
        return Err(err(bad.line, "untimed step in a timed plan"));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedStep {
    pub line: usize,
    pub op: OpId,
    pub start: Option<f64>,
    pub duration: Option<f64>,
}

/// Maps each plan line to a grounded operator.
pub fn resolve_plan(inst: &GroundedInstance, plan: &PlanFile) -> Result<Vec<ResolvedStep>, PlanParseError> {
    plan.steps
        .iter()
        .map(|s| {
            let args: Vec<&str> = s.args.iter().map(String::as_str).collect();
            let op = inst.find_operator(&s.name, &args).ok_or_else(|| {
                let mut t = format!("unknown operator ({}", s.name);
                for a in &s.args {
                    t.push(' ');
                    t.push_str(a);
                }
                t.push(')');
                err(s.line, t)
            })?;
            Ok(ResolvedStep { line: s.line, op, start: s.start, duration: s.duration })
        })
        .collect()
}

/// Shortest decimal that round-trips.
pub fn format_time(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

pub fn print_plan(inst: &GroundedInstance, steps: &[TimedStep]) -> String {
    let mut out = String::new();
    for s in steps {
        let _ = writeln!(out, "{}: {} [{}]", format_time(s.start), inst.op_name(s.op), format_time(s.duration));
    }
    out
}
