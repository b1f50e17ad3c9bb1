use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::{json, Value};
use tempoplan::ground::{emit_grounded, GroundedInstance};
use tempoplan::heuristic::HeuristicKind;
use tempoplan::report::AnalysisReport;
use tempoplan::schedule::{
    format_time, gantt_svg, gantt_text, parse_plan, print_plan, replay, resolve_plan, schedule, validate_parallel,
    GanttRow, ParallelPlan, PlanFile, TimedStep,
};
use tempoplan::search::{search_with, Algorithm, SearchConfig, SearchOutcome, Solution, Termination};
use tempoplan::symmetry::Symmetries;

use crate::{Command, Format, Input};

pub const OK: u8 = 0;
pub const NO_PLAN: u8 = 1;
pub const INPUT: u8 = 2;
pub const BUDGET: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: INPUT, message: message.into() }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load(input: &Input) -> Result<GroundedInstance, Failure> {
    let domain = read(&input.domain)?;
    let problem = read(&input.problem)?;
    tempoplan::load(&domain, &problem).map_err(|e| input_error(e.to_string()))
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| input_error(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn allow(format: Format, allowed: &[Format], command: &str) -> Result<(), Failure> {
    if allowed.contains(&format) {
        Ok(())
    } else {
        Err(input_error(format!("format {format:?} is not available for {command}").to_lowercase()))
    }
}

fn read_plan(path: &Path) -> Result<PlanFile, Failure> {
    let text = read(path)?;
    parse_plan(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn timed(inst: &GroundedInstance, path: &Path, plan: &PlanFile) -> Result<ParallelPlan, Failure> {
    if !plan.is_timed() {
        return Err(input_error(format!(
            "{}: lines need start times and durations; `tempoplan schedule` accepts untimed sequences",
            path.display()
        )));
    }
    let steps = resolve_plan(inst, plan).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    Ok(ParallelPlan {
        steps: steps
            .iter()
            .map(|s| TimedStep { op: s.op, start: s.start.unwrap_or(0.0), duration: s.duration.unwrap_or(0.0) })
            .collect(),
    })
}

fn rows(inst: &GroundedInstance, plan: &ParallelPlan) -> Vec<GanttRow> {
    plan.steps.iter().map(|s| GanttRow { label: inst.op_name(s.op), start: s.start, duration: s.duration }).collect()
}

fn steps_json(inst: &GroundedInstance, steps: &[TimedStep]) -> Value {
    steps.iter().map(|s| json!({ "start": s.start, "action": inst.op_name(s.op), "duration": s.duration })).collect()
}

fn heuristic_name(h: HeuristicKind) -> &'static str {
    match h {
        HeuristicKind::Rph => "rph",
        HeuristicKind::RphSched => "rph-sched",
        HeuristicKind::Zero => "zero",
    }
}

pub fn summary(inst: &GroundedInstance, cfg: &SearchConfig, out: &SearchOutcome) -> Value {
    let plan = out.solution.as_ref().map(|s| {
        json!({
            "sequential": steps_json(inst, &s.plan.timed().steps),
            "parallel": steps_json(inst, &s.schedule.steps),
            "length": s.plan.len(),
            "sequential_makespan": s.plan.makespan(),
            "makespan": s.schedule.makespan(),
            "metric": s.metric,
        })
    });
    json!({
        "schema": 1,
        "instance": inst.grounded_name(),
        "config": {
            "algorithm": match cfg.algorithm {
                Algorithm::WeightedAstar => "astar",
                Algorithm::HillClimbing => "ehc",
            },
            "weight": cfg.weight,
            "delta": cfg.delta,
            "anytime": cfg.anytime,
            "heuristic": heuristic_name(cfg.heuristic),
            "symmetry": cfg.symmetry,
            "exact_duplicates": cfg.exact_duplicates,
            "node_budget": cfg.node_budget,
            "time_budget": cfg.time_budget.map(|d| d.as_secs_f64()),
        },
        "termination": out.termination,
        "incomplete": out.incomplete(),
        "stats": out.stats,
        "improvements": out.improvements,
        "plan": plan,
    })
}

/// Sequential plan as comments, then the parallel plan with the makespan
/// header that `validate` checks.
pub fn plan_text(inst: &GroundedInstance, sol: &Solution, incomplete: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "; {}", inst.grounded_name());
    if incomplete {
        let _ = writeln!(out, "; incomplete: budget exhausted, best plan so far");
    }
    let _ = writeln!(out, "; sequential: {} steps ending at {}", sol.plan.len(), format_time(sol.plan.makespan()));
    for line in print_plan(inst, &sol.plan.timed().steps).lines() {
        let _ = writeln!(out, ";   {line}");
    }
    let _ = writeln!(out, "; parallel");
    let _ = writeln!(out, "; makespan {}", format_time(sol.schedule.makespan()));
    let _ = writeln!(out, "; metric {}", format_time(sol.metric));
    out.push_str(&print_plan(inst, &sol.schedule.steps));
    out
}

fn render_schedule(inst: &GroundedInstance, sol: &Solution, format: Format) -> String {
    match format {
        Format::GanttSvg => gantt_svg(&rows(inst, &sol.schedule)),
        Format::GanttText => gantt_text(&rows(inst, &sol.schedule), 60),
        _ => String::new(),
    }
}

fn cmd_ground(input: &Input, format: Option<Format>, output: Option<&Path>) -> Result<u8, Failure> {
    let format = format.unwrap_or(Format::Plan);
    allow(format, &[Format::Plan, Format::Grounded, Format::Json], "ground")?;
    let inst = load(input)?;
    let grounded = emit_grounded(&inst);
    if let Some(p) = output {
        emit(Some(p), &grounded)?;
    }
    match format {
        Format::Grounded if output.is_none() => print!("{grounded}"),
        Format::Grounded => {}
        Format::Json => {
            let mut v = serde_json::to_value(AnalysisReport::new(&inst)).expect("report serializes");
            v["schema"] = json!(1);
            println!("{}", serde_json::to_string_pretty(&v).expect("json"));
        }
        _ => print!("{}", AnalysisReport::new(&inst)),
    }
    Ok(OK)
}

fn cmd_plan(input: &Input, cfg: &SearchConfig, format: Format, output: Option<&Path>) -> Result<u8, Failure> {
    let inst = load(input)?;
    let deps = inst.dependency_table();
    let sym = cfg.symmetry.then(|| Symmetries::new(&inst));
    let out = search_with(&inst, &deps, sym.as_ref(), cfg);
    let code = match (&out.solution, out.termination) {
        (_, t) if t.is_budget() => BUDGET,
        (Some(_), _) => OK,
        (None, _) => NO_PLAN,
    };
    if format == Format::Json {
        emit(output, &format!("{}\n", serde_json::to_string_pretty(&summary(&inst, cfg, &out)).expect("json")))?;
    } else if let Some(sol) = &out.solution {
        let text = match format {
            Format::Plan => plan_text(&inst, sol, out.incomplete()),
            f => render_schedule(&inst, sol, f),
        };
        emit(output, &text)?;
    }
    match (code, out.termination) {
        (NO_PLAN, Termination::NoPlan) => eprintln!("tempoplan: no plan: search space exhausted"),
        (NO_PLAN, _) => eprintln!("tempoplan: no plan found"),
        (BUDGET, t) => eprintln!(
            "tempoplan: {} budget exhausted after {} expansions{}",
            if t == Termination::TimeBudget { "time" } else { "node" },
            out.stats.expansions,
            if out.solution.is_some() { "; printed the best plan so far" } else { "" }
        ),
        _ => {}
    }
    Ok(code)
}

fn cmd_validate(input: &Input, path: &Path, format: Option<Format>) -> Result<u8, Failure> {
    let format = format.unwrap_or(Format::Plan);
    allow(format, &[Format::Plan, Format::Json], "validate")?;
    let inst = load(input)?;
    let file = read_plan(path)?;
    let plan = timed(&inst, path, &file)?;
    let deps = inst.dependency_table();
    let verdict = validate_parallel(&inst, &plan, &deps, file.claimed_makespan());
    if format == Format::Json {
        let v = json!({
            "schema": 1,
            "valid": verdict.is_valid(),
            "violations": verdict.describe(&inst, &plan).to_string().lines().collect::<Vec<_>>(),
            "makespan": verdict.makespan,
            "metric": verdict.metric,
        });
        println!("{}", serde_json::to_string_pretty(&v).expect("json"));
    } else {
        println!("{}", if verdict.is_valid() { "valid" } else { "invalid" });
        print!("{}", verdict.describe(&inst, &plan));
        println!("makespan {}", format_time(verdict.makespan));
        match verdict.metric {
            Some(m) => println!("metric {}", format_time(m)),
            None => println!("metric undefined"),
        }
    }
    Ok(if verdict.is_valid() { OK } else { NO_PLAN })
}

fn cmd_schedule(input: &Input, path: &Path, format: Format, output: Option<&Path>) -> Result<u8, Failure> {
    allow(format, &[Format::Plan, Format::Json, Format::GanttSvg, Format::GanttText], "schedule")?;
    let inst = load(input)?;
    let file = read_plan(path)?;
    let ops: Vec<_> = resolve_plan(&inst, &file)
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?
        .iter()
        .map(|s| s.op)
        .collect();
    let seq = replay(&inst, &ops).map_err(|e| Failure { code: NO_PLAN, message: e.to_string() })?;
    let deps = inst.dependency_table();
    let par = schedule(&seq, &deps);
    let metric = tempoplan::schedule::evaluate_metric(&inst, par.makespan(), &seq.final_state).unwrap_or(f64::NAN);
    let reached = inst.is_goal(&seq.final_state);
    if !reached {
        eprintln!("tempoplan: warning: the sequence does not reach the goal");
    }
    let text = match format {
        Format::Json => {
            let v = json!({
                "schema": 1,
                "goal_reached": reached,
                "sequential_makespan": seq.makespan(),
                "makespan": par.makespan(),
                "metric": metric,
                "parallel": steps_json(&inst, &par.steps),
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
        Format::Plan => {
            let sol = Solution { plan: seq, schedule: par, metric };
            plan_text(&inst, &sol, false)
        }
        f => render_schedule(&inst, &Solution { plan: seq, schedule: par, metric }, f),
    };
    emit(output, &text)?;
    Ok(OK)
}

fn cmd_gantt(input: &Input, path: &Path, format: Format, output: Option<&Path>) -> Result<u8, Failure> {
    allow(format, &[Format::GanttSvg, Format::GanttText], "gantt")?;
    let inst = load(input)?;
    let file = read_plan(path)?;
    let plan = timed(&inst, path, &file)?;
    let verdict = validate_parallel(&inst, &plan, &inst.dependency_table(), file.claimed_makespan());
    if !verdict.is_valid() {
        return Err(Failure {
            code: NO_PLAN,
            message: format!("{} is not a valid plan; `tempoplan validate` lists the problems", path.display()),
        });
    }
    let text = match format {
        Format::GanttText => gantt_text(&rows(&inst, &plan), 60),
        _ => gantt_svg(&rows(&inst, &plan)),
    };
    emit(output, &text)?;
    Ok(OK)
}

pub fn run(command: &Command) -> Result<u8, Failure> {
    match command {
        Command::Ground { input, format, output } => cmd_ground(input, *format, output.as_deref()),
        Command::Plan { input, search, format, output } => {
            let cfg = search.config().map_err(input_error)?;
            allow(*format, &[Format::Plan, Format::Json, Format::GanttSvg, Format::GanttText], "plan")?;
            cmd_plan(input, &cfg, *format, output.as_deref())
        }
        Command::Validate { input, plan, format } => cmd_validate(input, plan, *format),
        Command::Schedule { input, plan, format, output } => cmd_schedule(input, plan, *format, output.as_deref()),
        Command::Gantt { input, plan, format, output } => cmd_gantt(input, plan, *format, output.as_deref()),
    }
}
