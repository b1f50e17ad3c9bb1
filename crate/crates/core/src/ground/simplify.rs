use std::collections::{BTreeMap, HashSet};

use crate::state::{GroundedOperator, VarId};

/// Operator before simplification; `unsat` explains a static contradiction.
#[derive(Debug, Clone)]
pub struct DraftOperator {
    pub op: GroundedOperator,
    pub unsat: Option<String>,
}

/// Removal counts per rule, keyed by schema name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimplifyStats {
    pub unsatisfiable: BTreeMap<String, usize>,
    pub noop: BTreeMap<String, usize>,
    pub duplicate: BTreeMap<String, usize>,
    pub kept: usize,
}

impl SimplifyStats {
    pub fn total(m: &BTreeMap<String, usize>) -> usize {
        m.values().sum()
    }
}

/// Applies, in order: statically unsatisfiable removal, β_d := β_d \ β_a and
/// trivial numeric effect removal, no-op removal, duplicate removal.
pub fn simplify_operators(drafts: Vec<DraftOperator>, total_time: VarId) -> (Vec<GroundedOperator>, SimplifyStats) {
    let mut stats = SimplifyStats::default();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for d in drafts {
        let mut op = d.op;
        if d.unsat.is_some() {
            *stats.unsatisfiable.entry(op.schema.clone()).or_insert(0) += 1;
            continue;
        }
        op.pre.sort_unstable();
        op.pre.dedup();
        op.add.sort_unstable();
        op.add.dedup();
        op.del.sort_unstable();
        op.del.dedup();
        op.del.retain(|f| op.add.binary_search(f).is_err());
        op.effects.retain(|e| !e.is_trivial());

        let only_time = op.effects.iter().all(|e| e.head == total_time);
        let adds_nothing_new = op.add.iter().all(|f| op.pre.binary_search(f).is_ok());
        if adds_nothing_new && op.del.is_empty() && only_time {
            *stats.noop.entry(op.schema.clone()).or_insert(0) += 1;
            continue;
        }
        let signature = format!(
            "{:?}|{:?}|{:?}|{:?}|{:?}|{:?}|{:?}",
            op.pre, op.pre_neg, op.add, op.del, op.conditions, op.effects, op.duration
        );
        if !seen.insert(signature) {
            *stats.duplicate.entry(op.schema.clone()).or_insert(0) += 1;
            continue;
        }
        out.push(op);
    }
    stats.kept = out.len();
    (out, stats)
}
