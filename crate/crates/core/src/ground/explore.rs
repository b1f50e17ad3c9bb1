use std::collections::{HashMap, HashSet, VecDeque};

use crate::pddl::{AtomAst, Term};
use crate::state::ObjId;

use super::flatten::FlatSchema;
use super::GroundError;

/// Ground atom keyed by predicate index.
pub type GAtom = (u32, Vec<ObjId>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TRef {
    Param(usize),
    Obj(ObjId),
}

#[derive(Debug, Clone)]
pub struct CAtom {
    pub pred: u32,
    pub args: Vec<TRef>,
}

impl CAtom {
    pub fn ground(&self, binding: &[ObjId]) -> GAtom {
        let args = self
            .args
            .iter()
            .map(|t| match *t {
                TRef::Param(i) => binding[i],
                TRef::Obj(o) => o,
            })
            .collect();
        (self.pred, args)
    }
}

pub struct Resolver<'a> {
    pub predicates: &'a HashMap<String, u32>,
    pub objects: &'a HashMap<String, ObjId>,
}

impl Resolver<'_> {
    pub fn term(&self, schema: &FlatSchema, t: &Term) -> Result<TRef, GroundError> {
        match t {
            Term::Var(v) => schema
                .params
                .iter()
                .position(|p| &p.name == v)
                .map(TRef::Param)
                .ok_or_else(|| GroundError::new(format!("unbound variable {v} in {}", schema.name))),
            Term::Const(c) => self
                .objects
                .get(c)
                .map(|&o| TRef::Obj(o))
                .ok_or_else(|| GroundError::new(format!("unknown constant {c} in {}", schema.name))),
        }
    }

    pub fn atom(&self, schema: &FlatSchema, a: &AtomAst) -> Result<CAtom, GroundError> {
        let pred = *self
            .predicates
            .get(&a.predicate)
            .ok_or_else(|| GroundError::new(format!("undeclared predicate {}", a.predicate)))?;
        let args = a.args.iter().map(|t| self.term(schema, t)).collect::<Result<_, _>>()?;
        Ok(CAtom { pred, args })
    }
}

pub struct Explored {
    /// Every atom reached by the delete-free enumeration, initial facts included.
    pub reached: HashSet<GAtom>,
    /// (schema index, binding) in discovery order.
    pub ops: Vec<(usize, Vec<ObjId>)>,
}

/// FIFO fixpoint over add effects; deletes and numeric conditions are ignored.
/// `domains[s][i]` lists the objects admissible for parameter `i` of schema `s`.
pub fn fact_space_explore(
    schemas: &[FlatSchema],
    pre: &[Vec<CAtom>],
    adds: &[Vec<CAtom>],
    domains: &[Vec<Vec<ObjId>>],
    init: &[GAtom],
    n_preds: usize,
) -> Explored {
    let mut seen: HashSet<GAtom> = HashSet::new();
    let mut queue: VecDeque<GAtom> = VecDeque::new();
    let mut processed: Vec<Vec<Vec<ObjId>>> = vec![Vec::new(); n_preds];
    let mut op_set: HashSet<(usize, Vec<ObjId>)> = HashSet::new();
    let mut ops = Vec::new();

    for a in init {
        if seen.insert(a.clone()) {
            queue.push_back(a.clone());
        }
    }

    let mut emit = |s: usize,
                    binding: Vec<ObjId>,
                    seen: &mut HashSet<GAtom>,
                    queue: &mut VecDeque<GAtom>,
                    ops: &mut Vec<(usize, Vec<ObjId>)>| {
        if op_set.insert((s, binding.clone())) {
            for a in &adds[s] {
                let g = a.ground(&binding);
                if seen.insert(g.clone()) {
                    queue.push_back(g);
                }
            }
            ops.push((s, binding));
        }
    };

    for (s, _) in schemas.iter().enumerate() {
        if pre[s].is_empty() {
            let mut out = Vec::new();
            enumerate_free(&domains[s], &mut vec![None; domains[s].len()], 0, &mut out);
            for b in out {
                emit(s, b, &mut seen, &mut queue, &mut ops);
            }
        }
    }

    while let Some(atom) = queue.pop_front() {
        processed[atom.0 as usize].push(atom.1.clone());
        for (s, _) in schemas.iter().enumerate() {
            for (k, p) in pre[s].iter().enumerate() {
                if p.pred != atom.0 {
                    continue;
                }
                let mut binding = vec![None; domains[s].len()];
                if !unify(p, &atom.1, &mut binding, &domains[s]) {
                    continue;
                }
                let mut out = Vec::new();
                join(&pre[s], k, 0, &processed, &domains[s], &mut binding, &mut out);
                for b in out {
                    emit(s, b, &mut seen, &mut queue, &mut ops);
                }
            }
        }
    }
    Explored { reached: seen, ops }
}

fn unify(p: &CAtom, args: &[ObjId], binding: &mut [Option<ObjId>], domains: &[Vec<ObjId>]) -> bool {
    for (t, &o) in p.args.iter().zip(args) {
        match *t {
            TRef::Obj(c) => {
                if c != o {
                    return false;
                }
            }
            TRef::Param(i) => match binding[i] {
                Some(b) if b != o => return false,
                Some(_) => {}
                None => {
                    if domains[i].binary_search(&o).is_err() {
                        return false;
                    }
                    binding[i] = Some(o);
                }
            },
        }
    }
    true
}

fn join(
    pre: &[CAtom],
    skip: usize,
    j: usize,
    processed: &[Vec<Vec<ObjId>>],
    domains: &[Vec<ObjId>],
    binding: &mut Vec<Option<ObjId>>,
    out: &mut Vec<Vec<ObjId>>,
) {
    if j == pre.len() {
        enumerate_free(domains, binding, 0, out);
        return;
    }
    if j == skip {
        join(pre, skip, j + 1, processed, domains, binding, out);
        return;
    }
    let p = &pre[j];
    for cand in &processed[p.pred as usize] {
        let saved = binding.clone();
        if unify(p, cand, binding, domains) {
            join(pre, skip, j + 1, processed, domains, binding, out);
        }
        *binding = saved;
    }
}

fn enumerate_free(domains: &[Vec<ObjId>], binding: &mut Vec<Option<ObjId>>, i: usize, out: &mut Vec<Vec<ObjId>>) {
    if i == binding.len() {
        out.push(binding.iter().map(|b| b.unwrap()).collect());
        return;
    }
    if binding[i].is_some() {
        enumerate_free(domains, binding, i + 1, out);
        return;
    }
    for &o in &domains[i] {
        binding[i] = Some(o);
        enumerate_free(domains, binding, i + 1, out);
    }
    binding[i] = None;
}
