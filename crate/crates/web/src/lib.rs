//! Browser bindings: grounding report, planning with a Gantt chart, and
//! scheduling a user-supplied sequence.

use serde_json::json;
use tempoplan::report::AnalysisReport;
use tempoplan::schedule::{
    evaluate_metric, format_time, gantt_svg, parse_plan, print_plan, replay, resolve_plan, schedule, GanttRow,
    ParallelPlan,
};
use tempoplan::search::{search, SearchConfig};
use tempoplan::{ground::GroundedInstance, load};
use wasm_bindgen::prelude::*;

/// Node budget used when the page does not pass one; keeps the tab responsive.
pub const DEFAULT_NODE_BUDGET: u64 = 200_000;

fn instance(domain: &str, problem: &str) -> Result<GroundedInstance, String> {
    load(domain, problem).map_err(|e| e.to_string())
}

fn chart(inst: &GroundedInstance, plan: &ParallelPlan) -> String {
    let rows: Vec<GanttRow> = plan
        .steps
        .iter()
        .map(|s| GanttRow { label: inst.op_name(s.op), start: s.start, duration: s.duration })
        .collect();
    gantt_svg(&rows)
}

pub fn ground_report_text(domain: &str, problem: &str) -> Result<String, String> {
    Ok(AnalysisReport::new(&instance(domain, problem)?).to_string())
}

/// JSON with the termination reason, the printed parallel plan, its makespan
/// and metric, and an SVG chart. `plan` is null when nothing was found.
pub fn plan_json(domain: &str, problem: &str, anytime: bool, weight: f64, node_budget: u64) -> Result<String, String> {
    let inst = instance(domain, problem)?;
    let cfg = SearchConfig {
        anytime,
        weight,
        node_budget: if node_budget == 0 { DEFAULT_NODE_BUDGET } else { node_budget },
        ..SearchConfig::default()
    };
    cfg.validate().map_err(|e| e.to_string())?;
    let out = search(&inst, &cfg);
    let plan = out.solution.as_ref().map(|sol| {
        json!({
            "text": print_plan(&inst, &sol.schedule.steps),
            "steps": sol.plan.len(),
            "sequential_makespan": sol.plan.makespan(),
            "makespan": sol.schedule.makespan(),
            "metric": sol.metric,
            "svg": chart(&inst, &sol.schedule),
        })
    });
    Ok(json!({
        "termination": out.termination,
        "incomplete": out.incomplete(),
        "expansions": out.stats.expansions,
        "improvements": out.improvements,
        "plan": plan,
    })
    .to_string())
}

/// Schedules a sequence of action lines (timed or untimed) by critical path.
pub fn schedule_json(domain: &str, problem: &str, plan_text: &str) -> Result<String, String> {
    let inst = instance(domain, problem)?;
    let file = parse_plan(plan_text).map_err(|e| e.to_string())?;
    let ops: Vec<_> = resolve_plan(&inst, &file).map_err(|e| e.to_string())?.iter().map(|s| s.op).collect();
    let seq = replay(&inst, &ops).map_err(|e| e.to_string())?;
    let par = schedule(&seq, &inst.dependency_table());
    let metric = evaluate_metric(&inst, par.makespan(), &seq.final_state).ok();
    Ok(json!({
        "goal_reached": inst.is_goal(&seq.final_state),
        "text": format!("; makespan {}\n{}", format_time(par.makespan()), print_plan(&inst, &par.steps)),
        "sequential_makespan": seq.makespan(),
        "makespan": par.makespan(),
        "metric": metric,
        "svg": chart(&inst, &par),
    })
    .to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = groundReport)]
pub fn ground_report(domain: &str, problem: &str) -> Result<String, JsValue> {
    js(ground_report_text(domain, problem))
}

#[wasm_bindgen(js_name = plan)]
pub fn plan(domain: &str, problem: &str, anytime: bool, weight: f64, node_budget: u32) -> Result<String, JsValue> {
    js(plan_json(domain, problem, anytime, weight, node_budget as u64))
}

#[wasm_bindgen(js_name = schedulePlan)]
pub fn schedule_plan(domain: &str, problem: &str, plan_text: &str) -> Result<String, JsValue> {
    js(schedule_json(domain, problem, plan_text))
}

/// Bundled examples as `{name, domain, problem}` JSON, for the page's picker.
#[wasm_bindgen(js_name = examples)]
pub fn examples() -> String {
    let list: Vec<_> = tempoplan::benchmarks::ALL
        .iter()
        .map(|b| json!({ "name": b.name, "domain": b.domain, "problem": b.problem }))
        .collect();
    json!({ "examples": list, "sequence": tempoplan::benchmarks::ZENOTRAVEL_PLAN }).to_string()
}
