use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;
mod prescription;

use output::Format;

#[derive(Debug, Parser)]
#[command(name = "prenorm", version, about = "Normal elements of finite fields with prescribed norms")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value = "records")]
    format: Format,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct PrescriptionArgs {
    /// Base field order (a prime power).
    q: Option<u64>,
    /// Extension degree.
    n: Option<u32>,
    /// Comma-separated proper divisors of n.
    #[arg(long)]
    divisors: Option<String>,
    /// Norm values: `1,g^3,[[1],[0]]` matched with --divisors, or `d=value` pairs.
    #[arg(long)]
    norms: Option<String>,
    /// TOML prescription file with keys q, n, D, A.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Allow divisor tuples that are not antichains.
    #[arg(long)]
    relaxed: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Moduli, factorizations and normal-element counts of F_{q^n}.
    FieldInfo { q: u64, n: u32 },
    /// Search the norm fiber for a normal element.
    Search {
        #[command(flatten)]
        p: PrescriptionArgs,
        /// Fiber elements to examine.
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        /// Sample fiber indices at random from this seed instead of scanning in order.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Which existence result covers (q, n, D).
    Classify {
        #[command(flatten)]
        p: PrescriptionArgs,
    },
    /// Fiber sizes and normal-element counts.
    Count {
        #[command(flatten)]
        p: PrescriptionArgs,
        /// Count the fiber exhaustively when q^n is at most this.
        #[arg(long, default_value_t = 1 << 20)]
        budget: u64,
    },
    /// Check the gluing condition on the prescribed norms.
    Admissible {
        #[command(flatten)]
        p: PrescriptionArgs,
    },
    /// Additive character sums over the norm fiber.
    Charsum {
        #[command(flatten)]
        p: PrescriptionArgs,
        /// Twist c; without it the largest nontrivial sum is reported.
        #[arg(long)]
        twist: Option<String>,
        /// Largest field the twist sweep may scan.
        #[arg(long, default_value_t = 1 << 16)]
        budget: u64,
    },
    /// Run an invariant suite.
    Verify {
        /// lemma1, thm1, thm2_soundness, thm3_soundness, thm4_soundness,
        /// indicator, charsum, appendix or lambda_count.
        suite: String,
        /// Largest q^n checked (suite default if omitted).
        #[arg(long)]
        budget: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = output::Emitter::new(cli.format);
    let result = match cli.command {
        Command::FieldInfo { q, n } => commands::field_info(&mut out, q, n),
        Command::Search { p, budget, seed } => commands::search(&mut out, &p, budget, seed, cli.jobs),
        Command::Classify { p } => commands::classify(&mut out, &p),
        Command::Count { p, budget } => commands::count(&mut out, &p, budget),
        Command::Admissible { p } => commands::admissible(&mut out, &p),
        Command::Charsum { p, twist, budget } => commands::charsum(&mut out, &p, twist.as_deref(), budget),
        Command::Verify { suite, budget } => commands::verify(&mut out, &suite, budget, cli.jobs),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::Exit::Usage as u8)
        }
    }
}
