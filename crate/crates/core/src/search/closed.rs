use std::collections::HashMap;

use crate::ground::GroundedInstance;
use crate::state::State;

/// Hashed part of a state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateKey {
    props: Vec<u64>,
    vals: Vec<u64>,
    schedule: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub node: u32,
    pub g_p: u32,
    /// Objective value of the generating prefix.
    pub cost: f64,
}

fn bits(x: f64) -> u64 {
    if x == 0.0 {
        0
    } else {
        x.to_bits()
    }
}

/// Visited states keyed with total-time and the metric variables left out,
/// or in exact mode with every variable and a schedule signature.
#[derive(Debug)]
pub struct ClosedSet {
    hashed: Vec<usize>,
    exact: bool,
    map: HashMap<StateKey, Entry>,
}

impl ClosedSet {
    pub fn new(inst: &GroundedInstance, exact: bool) -> Self {
        let metric = inst.metric_vars();
        let hashed = (0..inst.variables.len())
            .filter(|&v| v != inst.total_time as usize && (exact || !metric.contains(&(v as u32))))
            .collect();
        ClosedSet { hashed, exact, map: HashMap::new() }
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// `signature` is consulted only in exact mode.
    pub fn key(&self, s: &State, signature: &[f64]) -> StateKey {
        StateKey {
            props: s.props.words().to_vec(),
            vals: self.hashed.iter().map(|&v| bits(s.vals[v])).collect(),
            schedule: if self.exact { signature.iter().map(|&x| bits(x)).collect() } else { Vec::new() },
        }
    }

    pub fn get(&self, key: &StateKey) -> Option<&Entry> {
        self.map.get(key)
    }

    pub fn get_mut(&mut self, key: &StateKey) -> Option<&mut Entry> {
        self.map.get_mut(key)
    }

    pub fn insert(&mut self, key: StateKey, entry: Entry) {
        self.map.insert(key, entry);
    }

    /// True when an equal state, under this set's equality, is stored.
    pub fn duplicate_check(&self, s: &State, signature: &[f64]) -> bool {
        self.map.contains_key(&self.key(s, signature))
    }
}
