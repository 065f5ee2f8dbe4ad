//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use gliq_core::check::CheckOptions;
use gliq_core::smt::SmtConfig;

#[derive(Parser, Debug)]
#[command(name = "gliq", version, about = "Gradual liquid type inference")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Infer safe concretizations for a program and report them.
    Check {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Write the JSON report here.
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
        /// Write a self-contained HTML report here.
        #[arg(long, value_name = "PATH")]
        html: Option<PathBuf>,
    },
    /// Check a program and serve the report over local HTTP.
    Serve {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 8017)]
        port: u16,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Maximum number of qualifiers conjoined in one candidate.
    #[arg(long, default_value_t = 1)]
    pub depth: usize,
    /// Solver command reading SMT-LIB on stdin.
    #[arg(long, value_name = "CMD", default_value = "z3 -in")]
    pub smt_cmd: String,
    /// Per-query solver timeout.
    #[arg(long, value_name = "N", default_value_t = 2000)]
    pub timeout_ms: u64,
    /// Enumerate one joint product instead of independent partitions.
    #[arg(long)]
    pub no_partition: bool,
    /// Keep candidates the syntactic sensibility filter would drop.
    #[arg(long)]
    pub no_sensibility: bool,
    /// Use the ordering-only template set.
    #[arg(long)]
    pub templates_minimal: bool,
    /// Worker threads (0: one per core).
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub jobs: usize,
    /// Cap on the combined inferred types listed.
    #[arg(long, value_name = "N", default_value_t = 50)]
    pub max_types: usize,
}

impl Common {
    pub fn options(&self) -> CheckOptions {
        CheckOptions {
            depth: self.depth,
            partition: !self.no_partition,
            sensibility: !self.no_sensibility,
            minimal_templates: self.templates_minimal,
            jobs: self.jobs,
            max_types: self.max_types,
            smt: SmtConfig { cmd: self.smt_cmd.clone(), timeout_ms: self.timeout_ms },
            ..CheckOptions::default()
        }
    }
}
