//! Temporal and metric planning over a PDDL2.1 subset.
//!
//! The pipeline: [`pddl`] parses domain and problem text, [`ground`] turns
//! them into a [`ground::GroundedInstance`], [`search`] finds a sequential
//! plan and [`schedule`] turns it into a parallel one.

pub mod benchmarks;
pub mod ground;
pub mod heuristic;
pub mod pddl;
pub mod report;
pub mod schedule;
pub mod search;
pub mod state;
pub mod symmetry;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] pddl::ParseError),
    #[error("grounding error: {0}")]
    Ground(#[from] ground::GroundError),
}

/// Parses and grounds a domain/problem pair.
pub fn load(domain: &str, problem: &str) -> Result<ground::GroundedInstance, Error> {
    let d = pddl::parse_domain_text(domain)?;
    let p = pddl::parse_problem_text(problem, &d)?;
    Ok(ground::ground(&d, &p)?)
}
