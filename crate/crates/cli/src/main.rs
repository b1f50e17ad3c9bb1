//! `tempoplan` command-line front end.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tempoplan::heuristic::HeuristicKind;
use tempoplan::search::{Algorithm, SearchConfig};

#[derive(Debug, Parser)]
#[command(name = "tempoplan", version, about = "Temporal and metric planner for a PDDL2.1 subset")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ground a problem, print the analysis report and optionally the grounded text.
    Ground {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Also write the grounded text to this file.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Search for a plan and print its sequential and parallel form.
    Plan {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        search: SearchFlags,
        #[arg(long, value_enum, default_value = "plan")]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a timed plan against the problem.
    Validate {
        #[command(flatten)]
        input: Input,
        plan: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Schedule a sequential plan (timed or untimed lines) by critical path.
    Schedule {
        #[command(flatten)]
        input: Input,
        plan: PathBuf,
        #[arg(long, value_enum, default_value = "plan")]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Draw a valid timed plan as a Gantt chart.
    Gantt {
        #[command(flatten)]
        input: Input,
        plan: PathBuf,
        #[arg(long, value_enum, default_value = "gantt-svg")]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct Input {
    pub domain: PathBuf,
    pub problem: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Plan,
    Grounded,
    GanttSvg,
    GanttText,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HeuristicArg {
    Rph,
    RphSched,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    Astar,
    Ehc,
}

#[derive(Debug, Args)]
pub struct SearchFlags {
    #[arg(long, default_value_t = 2.0)]
    pub weight: f64,
    /// Propositional window inside which the schedule estimate decides.
    #[arg(long, default_value_t = 0)]
    pub delta: u32,
    /// Keep searching after the first plan and report the best one.
    #[arg(long)]
    pub anytime: bool,
    #[arg(long, value_enum, default_value = "rph-sched")]
    pub heuristic: HeuristicArg,
    #[arg(long, value_enum, default_value = "astar")]
    pub algorithm: AlgorithmArg,
    #[arg(long)]
    pub no_symmetry: bool,
    /// Check symmetries by full state comparison.
    #[arg(long)]
    pub exact_symmetry: bool,
    /// Compare full states and schedules in duplicate detection.
    #[arg(long)]
    pub exact_duplicates: bool,
    #[arg(long, default_value_t = 10_000_000)]
    pub node_budget: u64,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    pub time_budget: Option<f64>,
}

impl SearchFlags {
    pub fn config(&self) -> Result<SearchConfig, String> {
        let time_budget = match self.time_budget {
            Some(t) if !(t.is_finite() && t > 0.0) => return Err(format!("time budget must be positive, got {t}")),
            t => t.map(Duration::from_secs_f64),
        };
        let cfg = SearchConfig {
            algorithm: match self.algorithm {
                AlgorithmArg::Astar => Algorithm::WeightedAstar,
                AlgorithmArg::Ehc => Algorithm::HillClimbing,
            },
            weight: self.weight,
            delta: self.delta,
            anytime: self.anytime,
            heuristic: match self.heuristic {
                HeuristicArg::Rph => HeuristicKind::Rph,
                HeuristicArg::RphSched => HeuristicKind::RphSched,
                HeuristicArg::Zero => HeuristicKind::Zero,
            },
            symmetry: !self.no_symmetry,
            exact_symmetry: self.exact_symmetry,
            exact_duplicates: self.exact_duplicates,
            node_budget: self.node_budget,
            time_budget,
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TEMPOPLAN_LOG", "warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli.command) {
        Ok(code) => code.into(),
        Err(e) => {
            eprintln!("tempoplan: {}", e.message);
            e.code.into()
        }
    }
}
