//! Bundled benchmark instances.

use crate::ground::GroundedInstance;
use crate::{load, Error};

pub struct Benchmark {
    pub name: &'static str,
    pub domain: &'static str,
    pub problem: &'static str,
}

impl Benchmark {
    pub fn ground(&self) -> Result<GroundedInstance, Error> {
        load(self.domain, self.problem)
    }
}

const ZENO_DOMAIN: &str = include_str!("../data/zenotravel-domain.pddl");

pub const ZENOTRAVEL: Benchmark =
    Benchmark { name: "zenotravel", domain: ZENO_DOMAIN, problem: include_str!("../data/zenotravel-problem.pddl") };

pub const ZENOTRAVEL_FUEL: Benchmark = Benchmark {
    name: "zenotravel-fuel",
    domain: ZENO_DOMAIN,
    problem: include_str!("../data/zenotravel-problem-fuel.pddl"),
};

pub const ZENOTRAVEL_MIXED: Benchmark = Benchmark {
    name: "zenotravel-mixed",
    domain: ZENO_DOMAIN,
    problem: include_str!("../data/zenotravel-problem-mixed.pddl"),
};

pub const GRIPPER: Benchmark = Benchmark {
    name: "gripper",
    domain: include_str!("../data/gripper-domain.pddl"),
    problem: include_str!("../data/gripper-problem.pddl"),
};

pub const TRAP: Benchmark = Benchmark {
    name: "one-way-door",
    domain: include_str!("../data/trap-domain.pddl"),
    problem: include_str!("../data/trap-problem.pddl"),
};

/// Sequential ZenoTravel plan with makespan 670.
pub const ZENOTRAVEL_PLAN: &str = include_str!("../data/zenotravel-plan.txt");

pub const ALL: [&Benchmark; 5] = [&ZENOTRAVEL, &ZENOTRAVEL_FUEL, &ZENOTRAVEL_MIXED, &GRIPPER, &TRAP];

pub fn find(name: &str) -> Option<&'static Benchmark> {
    ALL.into_iter().find(|b| b.name == name)
}
