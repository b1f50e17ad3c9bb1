//! Static analysis summary of a grounded instance.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::ground::GroundedInstance;
use crate::symmetry::Symmetries;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupSummary {
    pub name: String,
    pub members: Vec<String>,
    pub bits: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnalysisReport {
    pub name: String,
    pub fluents: usize,
    pub variables: Vec<String>,
    pub operators: usize,
    pub explored: usize,
    pub explored_by_schema: BTreeMap<String, usize>,
    pub removed_unsatisfiable: BTreeMap<String, usize>,
    pub removed_noop: BTreeMap<String, usize>,
    pub removed_duplicate: BTreeMap<String, usize>,
    pub static_facts: usize,
    pub groups: Vec<GroupSummary>,
    pub bits: u32,
    pub sym: usize,
    pub sym_goal: usize,
    pub symmetric_objects: usize,
    pub representatives: usize,
    pub inherently_sequential: bool,
    pub goal_unreachable: bool,
}

impl AnalysisReport {
    pub fn new(inst: &GroundedInstance) -> Self {
        let sym = Symmetries::new(inst);
        let deps = inst.dependency_table();
        let s = &inst.stats;
        AnalysisReport {
            name: inst.grounded_name(),
            fluents: inst.fluents.len(),
            variables: (0..inst.variables.len() as u32).map(|v| inst.var_name(v)).collect(),
            operators: inst.operators.len(),
            explored: s.explored,
            explored_by_schema: s.explored_by_schema.clone(),
            removed_unsatisfiable: s.simplify.unsatisfiable.clone(),
            removed_noop: s.simplify.noop.clone(),
            removed_duplicate: s.simplify.duplicate.clone(),
            static_facts: s.static_facts,
            groups: inst
                .groups
                .iter()
                .map(|g| GroupSummary {
                    name: g.name.clone(),
                    members: g.members.iter().map(|&f| inst.fluent_name(f)).collect(),
                    bits: g.width(),
                })
                .collect(),
            bits: inst.encoding_width(),
            sym: sym.stats.sym,
            sym_goal: sym.stats.sym_goal,
            symmetric_objects: sym.stats.objects,
            representatives: sym.stats.representatives,
            inherently_sequential: inst.inherently_sequential(&deps),
            goal_unreachable: inst.goal_unreachable,
        }
    }
}

fn per_schema(m: &BTreeMap<String, usize>) -> String {
    if m.is_empty() {
        return "0".into();
    }
    let total: usize = m.values().sum();
    let parts: Vec<String> = m.iter().map(|(k, v)| format!("{k} {v}")).collect();
    format!("{total} ({})", parts.join(", "))
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "instance: {}", self.name)?;
        writeln!(f, "fluents: {}", self.fluents)?;
        writeln!(f, "variables: {}", self.variables.len())?;
        for v in &self.variables {
            writeln!(f, "  {v}")?;
        }
        writeln!(f, "operators: {} (from {})", self.operators, self.explored)?;
        writeln!(f, "  explored: {}", per_schema(&self.explored_by_schema))?;
        writeln!(f, "  removed unsatisfiable: {}", per_schema(&self.removed_unsatisfiable))?;
        writeln!(f, "  removed no-op: {}", per_schema(&self.removed_noop))?;
        writeln!(f, "  removed duplicate: {}", per_schema(&self.removed_duplicate))?;
        writeln!(f, "static facts: {}", self.static_facts)?;
        writeln!(f, "groups: {}", self.groups.len())?;
        for g in &self.groups {
            writeln!(f, "  {} [{} bits]: {}", g.name, g.bits, g.members.join(" "))?;
        }
        writeln!(f, "bits: {}", self.bits)?;
        writeln!(f, "sym: {}", self.sym)?;
        writeln!(f, "sym-goal: {}", self.sym_goal)?;
        writeln!(f, "symmetric objects: {} (representatives {})", self.symmetric_objects, self.representatives)?;
        writeln!(f, "inherently sequential: {}", if self.inherently_sequential { "yes" } else { "no" })?;
        if self.goal_unreachable {
            writeln!(f, "goal: unreachable")?;
        }
        Ok(())
    }
}
