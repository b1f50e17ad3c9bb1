use std::collections::{BTreeMap, HashMap};

use crate::state::{BitSet, FluentId, GroundedOperator, ObjId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactGroup {
    pub name: String,
    pub representative: Option<ObjId>,
    /// Sorted by fluent index, so same-shape groups align position by position.
    pub members: Vec<FluentId>,
    /// Exactly one member holds in every reachable state; otherwise a
    /// "none of these" slot is added to the encoding.
    pub exhaustive: bool,
}

impl FactGroup {
    pub fn slots(&self) -> usize {
        self.members.len() + usize::from(!self.exhaustive)
    }

    pub fn width(&self) -> u32 {
        ceil_log2(self.slots())
    }
}

pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

pub fn encoding_width(groups: &[FactGroup]) -> u32 {
    groups.iter().map(FactGroup::width).sum()
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

fn key_of(args: &[ObjId], skip: usize) -> Vec<ObjId> {
    args.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, &o)| o).collect()
}

/// Candidate group produced before greedy selection.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub key: Vec<ObjId>,
    pub members: Vec<FluentId>,
}

/// Detects single-valued invariants by counting in the initial state and
/// checking add/delete balance of every operator. `fluents[i]` is
/// (predicate index, args); `arity[p]` is the predicate arity.
pub fn cluster_groups(
    fluents: &[(u32, Vec<ObjId>)],
    arity: &[usize],
    ops: &[GroundedOperator],
    init: &BitSet,
) -> Vec<Candidate> {
    // Candidate (p, i): predicate p with varying argument i.
    let mut cand_id: HashMap<(u32, usize), usize> = HashMap::new();
    let mut cands = Vec::new();
    for (p, &n) in arity.iter().enumerate() {
        for i in 0..n {
            cand_id.insert((p as u32, i), cands.len());
            cands.push((p as u32, i));
        }
    }
    let mut uf = UnionFind((0..cands.len()).collect());
    for o in ops {
        for &a in &o.add {
            let (pa, aa) = &fluents[a as usize];
            for &d in &o.del {
                if o.pre.binary_search(&d).is_err() {
                    continue;
                }
                let (pd, ad) = &fluents[d as usize];
                for i in 0..aa.len() {
                    for j in 0..ad.len() {
                        if (pa, i) != (pd, j) && key_of(aa, i) == key_of(ad, j) {
                            uf.union(cand_id[&(*pa, i)], cand_id[&(*pd, j)]);
                        }
                    }
                }
            }
        }
    }

    // Candidate sets: every merged class plus each candidate on its own.
    let mut sets: Vec<Vec<usize>> = Vec::new();
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for c in 0..cands.len() {
        classes.entry(uf.find(c)).or_default().push(c);
        sets.push(vec![c]);
    }
    sets.extend(classes.into_values().filter(|v| v.len() > 1));

    let mut valid = Vec::new();
    for set in &sets {
        let mut by_key: BTreeMap<Vec<ObjId>, Vec<FluentId>> = BTreeMap::new();
        for (f, (p, args)) in fluents.iter().enumerate() {
            for &c in set {
                let (cp, ci) = cands[c];
                if cp == *p {
                    by_key.entry(key_of(args, ci)).or_default().push(f as FluentId);
                }
            }
        }
        for (key, mut members) in by_key {
            members.sort_unstable();
            members.dedup();
            if members.len() >= 2 && exactly_one_invariant(&members, ops, init) {
                valid.push(Candidate { key, members });
            }
        }
    }

    valid.sort_by(|a, b| b.members.len().cmp(&a.members.len()).then(a.members.cmp(&b.members)));
    let mut covered = vec![false; fluents.len()];
    let mut chosen = Vec::new();
    for c in valid {
        if c.members.iter().all(|&f| !covered[f as usize]) {
            for &f in &c.members {
                covered[f as usize] = true;
            }
            chosen.push(c);
        }
    }
    chosen.sort_by(|a, b| a.key.cmp(&b.key).then(a.members.cmp(&b.members)));
    chosen
}

fn exactly_one_invariant(members: &[FluentId], ops: &[GroundedOperator], init: &BitSet) -> bool {
    if members.iter().filter(|&&f| init.contains(f)).count() != 1 {
        return false;
    }
    let is_member = |f: &FluentId| members.binary_search(f).is_ok();
    for o in ops {
        let added = o.add.iter().filter(|f| is_member(f)).count();
        let deleted: Vec<_> = o.del.iter().filter(|f| is_member(f)).collect();
        if added == 0 && deleted.is_empty() {
            continue;
        }
        if added != 1 || !deleted.iter().any(|d| o.pre.binary_search(d).is_ok()) {
            return false;
        }
    }
    true
}
