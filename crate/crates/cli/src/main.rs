// SPDX-License-Identifier: Apache-2.0
//! `cellprobe`: generate forests, measure them, and check bounds on them.
//!
//! Exit status is 0 on success, 1 when a verification fails, and 2 on usage,
//! input or budget errors. Errors are printed to stderr as
//! `{"error":{"reason":..,"message":..}}`.

mod commands;
mod failure;
mod output;
mod params;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use failure::Failure;
use params::Params;

#[derive(Debug, Parser)]
#[command(name = "cellprobe", version, about = "Cell-probe sampling laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    params: Params,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Analysis {
    Tv,
    Entropy,
    CondEntropy,
    Collision,
    Lipschitz,
    Neighborhood,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compile the Thorp shuffle into a forest (`--log2n`, `--rounds`).
    GenThorp,
    /// Draw a random forest (`--s --lambda --m --sigma --depth --seed`).
    GenRandom,
    /// Evaluate a forest on `--input`, or on a random input from `--seed`.
    Eval,
    /// Measure one quantity of a forest, set or ensemble.
    Analyze {
        #[arg(value_enum)]
        what: Analysis,
    },
    /// Fix cells greedily until the forest is average-μ-Lipschitz.
    EnforceLipschitz,
    /// Draw one pair from the accepting-set coupling of a 0/1 tree.
    Couple,
    /// One round of the random depth reduction.
    DepthReduce,
    /// Low-entropy container versus high-entropy bucket.
    Dichotomy,
    /// Check one bound on explicit inputs, or on a generated instance.
    Verify { lemma: String },
    /// Run every corpus of a config document (`standard` for the built-in set).
    Sweep { corpus_config: String },
}

/// Whether a command ran through but some verification did not hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failed,
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let p = params::merge(cli.params)?;
    match cli.command {
        Command::GenThorp => commands::gen_thorp(&p),
        Command::GenRandom => commands::gen_random(&p),
        Command::Eval => commands::eval(&p),
        Command::Analyze { what } => commands::analyze(&p, what),
        Command::EnforceLipschitz => commands::enforce(&p),
        Command::Couple => commands::couple(&p),
        Command::DepthReduce => commands::depth_reduce(&p),
        Command::Dichotomy => commands::dichotomy(&p),
        Command::Verify { lemma } => commands::verify(&p, &lemma),
        Command::Sweep { corpus_config } => commands::sweep(&p, &corpus_config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(2)
        }
    }
}
