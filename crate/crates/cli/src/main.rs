//! `rv` decides rational-verification queries over concurrent stochastic
//! games described by JSON files. Answers go to stdout as a single JSON
//! document (or plain text with `--format text`); the exit code mirrors the
//! verdict: 0 yes, 1 no, 2 bad input, 3 resource limit hit.

mod hoa;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rv_core::{
    a_core, a_nash, beneficial_deviation, core_membership, e_core, e_nash, ltl_to_dpw, membership,
    non_emptiness, parse_ltl, validate_model, validate_profile, QueryVerdict, RvError,
    RvOptions, SatMode, DEFAULT_DPW_STATE_CAP,
};

#[derive(Parser)]
#[command(name = "rv", version, about = "Rational verification of concurrent stochastic games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file (and optionally a profile) for problems
    Validate {
        #[command(flatten)]
        common: Common,
        /// Strategy profile file to check against the model
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Is the given strategy profile a Nash equilibrium?
    Membership {
        #[command(flatten)]
        common: Common,
        /// Strategy profile file, one entry per player
        #[arg(long)]
        profile: PathBuf,
    },
    /// Does some Nash equilibrium satisfy the formula?
    ENash {
        #[command(flatten)]
        common: Common,
        /// LTL specification formula
        #[arg(long)]
        phi: String,
    },
    /// Do all Nash equilibria satisfy the formula?
    ANash {
        #[command(flatten)]
        common: Common,
        /// LTL specification formula
        #[arg(long)]
        phi: String,
    },
    /// Does the game have any Nash equilibrium?
    NonEmptiness {
        #[command(flatten)]
        common: Common,
    },
    /// Does some profile in the core satisfy the formula?
    ECore {
        #[command(flatten)]
        common: Common,
        /// LTL specification formula
        #[arg(long)]
        phi: String,
    },
    /// Do all profiles in the core satisfy the formula?
    ACore {
        #[command(flatten)]
        common: Common,
        /// LTL specification formula
        #[arg(long)]
        phi: String,
    },
    /// Is the given strategy profile in the core?
    CoreMembership {
        #[command(flatten)]
        common: Common,
        /// Strategy profile file, one entry per player
        #[arg(long)]
        profile: PathBuf,
    },
    /// Does switching to the deviation benefit every coalition member?
    BeneficialDeviation {
        #[command(flatten)]
        common: Common,
        /// Strategy profile file, one entry per player
        #[arg(long)]
        profile: PathBuf,
        /// Comma-separated player names forming the coalition
        #[arg(long)]
        coalition: String,
        /// Strategy file for the coalition, one entry per member
        #[arg(long)]
        deviation: PathBuf,
    },
    /// Translate an LTL formula to a deterministic parity automaton (HOA)
    CompileDpw {
        /// LTL specification formula
        #[arg(long)]
        phi: String,
        /// Cap on constructed automaton states
        #[arg(long, default_value_t = DEFAULT_DPW_STATE_CAP)]
        max_dpw_states: usize,
    },
}

#[derive(Args)]
struct Common {
    /// Game model file
    #[arg(long)]
    model: PathBuf,
    /// How the formula must hold: almost surely or with positive probability
    #[arg(long, value_enum, default_value_t = Mode::As)]
    mode: Mode,
    /// Keep full witness detail in the output
    #[arg(long)]
    witness: bool,
    /// Cap on constructed automaton states
    #[arg(long, default_value_t = DEFAULT_DPW_STATE_CAP)]
    max_dpw_states: usize,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

impl Common {
    fn opts(&self) -> RvOptions {
        let mode = match self.mode {
            Mode::As => SatMode::AlmostSure,
            Mode::Nz => SatMode::NonZero,
        };
        RvOptions { mode, max_dpw_states: self.max_dpw_states }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Almost surely (probability one)
    As,
    /// With positive probability
    Nz,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Serialize)]
struct ValidationReport {
    valid: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    diagnostics: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                RvError::Resource(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(command: Command) -> Result<ExitCode, RvError> {
    match command {
        Command::Validate { common, profile } => {
            let g = input::load_model(&common.model)?;
            let mut diagnostics: Vec<String> =
                validate_model(&g).iter().map(ToString::to_string).collect();
            if let Some(path) = profile {
                match input::load_profile(&g, &path) {
                    Ok(p) => {
                        diagnostics.extend(validate_profile(&g, &p).iter().map(ToString::to_string));
                    }
                    Err(e) => diagnostics.push(e.to_string()),
                }
            }
            let report = ValidationReport { valid: diagnostics.is_empty(), diagnostics };
            match common.format {
                Format::Json => println!("{}", serde_json::to_string(&report).expect("serializable")),
                Format::Text => {
                    if report.valid {
                        println!("valid");
                    } else {
                        for line in &report.diagnostics {
                            println!("{line}");
                        }
                    }
                }
            }
            Ok(if report.valid { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Membership { common, profile } => {
            let g = input::load_model(&common.model)?;
            let p = input::load_profile(&g, &profile)?;
            finish(membership(&g, &p, &common.opts())?, &common)
        }
        Command::ENash { common, phi } => {
            let g = input::load_model(&common.model)?;
            finish(e_nash(&g, &parse_ltl(&phi)?, &common.opts())?, &common)
        }
        Command::ANash { common, phi } => {
            let g = input::load_model(&common.model)?;
            finish(a_nash(&g, &parse_ltl(&phi)?, &common.opts())?, &common)
        }
        Command::NonEmptiness { common } => {
            let g = input::load_model(&common.model)?;
            finish(non_emptiness(&g, &common.opts())?, &common)
        }
        Command::ECore { common, phi } => {
            let g = input::load_model(&common.model)?;
            finish(e_core(&g, &parse_ltl(&phi)?, &common.opts())?, &common)
        }
        Command::ACore { common, phi } => {
            let g = input::load_model(&common.model)?;
            finish(a_core(&g, &parse_ltl(&phi)?, &common.opts())?, &common)
        }
        Command::CoreMembership { common, profile } => {
            let g = input::load_model(&common.model)?;
            let p = input::load_profile(&g, &profile)?;
            finish(core_membership(&g, &p, &common.opts())?, &common)
        }
        Command::BeneficialDeviation { common, profile, coalition, deviation } => {
            let g = input::load_model(&common.model)?;
            let p = input::load_profile(&g, &profile)?;
            let members = input::parse_coalition(&g, &coalition)?;
            let d = input::load_deviation(&g, &members, &deviation)?;
            finish(beneficial_deviation(&g, &p, &members, &d, &common.opts())?, &common)
        }
        Command::CompileDpw { phi, max_dpw_states } => {
            let formula = parse_ltl(&phi)?;
            let dpw = ltl_to_dpw(&formula, max_dpw_states)?;
            print!("{}", hoa::render(&dpw, &formula.to_string()));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn finish(mut verdict: QueryVerdict, common: &Common) -> Result<ExitCode, RvError> {
    if !common.witness {
        // keep only the headline facts unless full detail was asked for
        if let Some(w) = verdict.witness.as_mut() {
            w.punished = None;
            w.restriction = None;
            if w.winners.is_none() && w.player.is_none() && w.coalition.is_none() {
                verdict.witness = None;
            }
        }
    }
    match common.format {
        Format::Json => println!("{}", serde_json::to_string(&verdict).expect("serializable")),
        Format::Text => {
            println!("answer: {}", if verdict.is_yes() { "yes" } else { "no" });
            if let Some(w) = &verdict.witness {
                if let Some(names) = &w.winners {
                    println!("winners: {}", names.join(", "));
                }
                if let Some(names) = &w.punished {
                    println!("punished: {}", names.join(", "));
                }
                if let Some(r) = &w.restriction {
                    println!("restriction: {} states, {} choices", r.states, r.choices);
                }
                if let Some(name) = &w.player {
                    println!("player: {name}");
                }
                if let Some(names) = &w.coalition {
                    println!("coalition: {}", names.join(", "));
                }
            }
        }
    }
    Ok(if verdict.is_yes() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
