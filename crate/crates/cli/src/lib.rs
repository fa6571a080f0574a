//! `bhtool`: every operation of `bhcore` behind one command.
//!
//! Exit codes: 0 on success, 2 on domain errors (a JSON error object is
//! printed), 1 on I/O, parse or usage failures.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use bhcore::atoms_tree::{assign_types, build_tree, export_tree, ExportFormat};
use bhcore::cayley::{build_ball, enumerate_atoms};
use bhcore::kuznetsov::{kuznetsov_decide_with, Mode, DEFAULT_BUDGET};
use bhcore::piecewise::{compose_prefix_maps, invert_prefix_map, PrefixMap};
use bhcore::presentation::{
    check_dehn_condition, parse_ratio, random_presentation, DehnSolver, DehnStep, Presentation,
};
use bhcore::transducer::{compose, encode_word, nucleus, parse_word, NucleusResult, Transducer, NUCLEUS_BUDGET};
use bhcore::Error;

/// Environment variable that replaces the default budgets.
pub const BUDGET_ENV: &str = "BHTOOL_BUDGET";

#[derive(Parser, Debug)]
#[command(name = "bhtool", version, about = "Word problems, Dehn presentations, transducers and trees of atoms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Small-cancellation checks
    #[command(subcommand)]
    Dehn(DehnCmd),
    /// Word problem via Dehn's algorithm
    #[command(subcommand)]
    Word(WordCmd),
    /// Presentations
    #[command(subcommand)]
    Pres(PresCmd),
    /// Cayley graph balls
    #[command(subcommand)]
    Ball(BallCmd),
    /// Atoms and the tree of atoms
    #[command(subcommand)]
    Atoms(AtomsCmd),
    /// Transducers
    #[command(subcommand)]
    Trans(TransCmd),
    /// Prefix maps
    #[command(subcommand)]
    Vmap(VmapCmd),
    /// Kuznetsov's procedure
    #[command(subcommand)]
    Kuz(KuzCmd),
}

#[derive(Subcommand, Debug)]
enum DehnCmd {
    /// Largest piece ratio between circular relators
    Check {
        presentation: PathBuf,
        #[arg(long, default_value = "1/2")]
        lambda: String,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TextOrJson {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum WordCmd {
    /// Decide whether a word is trivial
    Solve {
        presentation: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long, value_enum, default_value = "text")]
        format: TextOrJson,
    },
}

#[derive(Subcommand, Debug)]
enum PresCmd {
    /// Random presentation in the few-relator model
    Random {
        #[arg(long, default_value_t = 2)]
        gens: usize,
        #[arg(long, default_value_t = 1)]
        relators: usize,
        #[arg(long)]
        length: usize,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
enum BallCmd {
    /// Ball of the given radius in the Cayley graph
    Build {
        presentation: PathBuf,
        #[arg(long)]
        radius: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TreeFormat {
    Json,
    Dot,
}

#[derive(Subcommand, Debug)]
enum AtomsCmd {
    /// Atoms of one level
    List {
        presentation: PathBuf,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        horizon: usize,
    },
    /// Tree of atoms down to a depth
    Tree {
        presentation: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        horizon: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: TreeFormat,
        /// Label nodes by translation class
        #[arg(long)]
        types: bool,
        #[arg(long)]
        window: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum TransCmd {
    /// Output on a finite input word
    Run {
        machine: PathBuf,
        #[arg(long)]
        input: String,
    },
    /// Machine applying the first, then the second
    Compose { first: PathBuf, second: PathBuf },
    /// States visited by infinitely many prefixes
    Core { machine: PathBuf },
    /// Nucleus of the group generated by every state of the given machines
    Nucleus {
        #[arg(required = true)]
        machines: Vec<PathBuf>,
        #[arg(long)]
        budget: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum VmapCmd {
    /// Apply the first map, then the second
    Compose { first: PathBuf, second: PathBuf },
    Invert { map: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Interleaved,
    Workers,
}

#[derive(Subcommand, Debug)]
enum KuzCmd {
    /// Semidecide a word problem in a simple group
    Decide {
        presentation: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, value_enum, default_value = "interleaved")]
        mode: ModeArg,
    },
}

enum Failure {
    Io(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Out = std::result::Result<String, Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

/// Runs one invocation. `args` includes the program name.
pub fn execute<I, S>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    execute_with_budget(args, std::env::var(BUDGET_ENV).ok().as_deref())
}

/// Like [`execute`], with the budget override passed in instead of read
/// from the environment.
pub fn execute_with_budget<I, S>(args: I, budget_override: Option<&str>) -> (i32, String)
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            return (code, e.render().to_string());
        }
    };
    let default_budget = match budget_override.map(str::parse::<usize>) {
        None => None,
        Some(Ok(b)) => Some(b),
        Some(Err(_)) => return (1, error_json("Parse", &format!("{BUDGET_ENV} is not a number"))),
    };
    match run(cli.command, default_budget) {
        Ok(out) => (0, out),
        Err(Failure::Io(msg)) => (1, error_json("Io", &msg)),
        Err(Failure::Core(e)) => {
            let code = if e.is_input_error() { 1 } else { 2 };
            (code, error_json(e.kind(), &e.to_string()))
        }
    }
}

fn error_json(kind: &str, message: &str) -> String {
    pretty(&json!({ "error": kind, "message": message }))
}

fn run(cmd: Command, default_budget: Option<usize>) -> Out {
    match cmd {
        Command::Dehn(DehnCmd::Check { presentation, lambda }) => {
            let p = Presentation::from_json(&read(&presentation)?)?;
            let report = check_dehn_condition(&p, parse_ratio(&lambda)?)?;
            Ok(pretty(&report.to_json(&p)))
        }
        Command::Word(WordCmd::Solve {
            presentation,
            word,
            format,
        }) => {
            let p = Presentation::from_json(&read(&presentation)?)?;
            let w = p.parse_word(&word)?;
            let solver = DehnSolver::new(&p)?;
            let trivial = solver.solve(&w);
            let answer = if trivial { "identity" } else { "not identity" };
            match format {
                TextOrJson::Text => {
                    let mut out = format!("{answer}\n");
                    if let Some(warn) = solver.warning() {
                        out.push_str(&format!(
                            "warning: {} (max overlap {}, need below {})\n",
                            warn.code, warn.max_overlap_ratio, warn.required_below
                        ));
                    }
                    Ok(out)
                }
                TextOrJson::Json => {
                    let trace: Vec<Value> = solver
                        .trace(&w)
                        .iter()
                        .map(|s| match s {
                            DehnStep::Replace {
                                start,
                                removed,
                                inserted,
                                result,
                            } => json!({
                                "replace": { "start": start, "removed": p.format_word(removed), "inserted": p.format_word(inserted) },
                                "result": p.format_word(result),
                            }),
                            DehnStep::Cancel { position, result } => json!({
                                "cancel": position,
                                "result": p.format_word(result),
                            }),
                        })
                        .collect();
                    Ok(pretty(&json!({
                        "identity": trivial,
                        "trace": trace,
                        "warning": solver.warning(),
                    })))
                }
            }
        }
        Command::Pres(PresCmd::Random {
            gens,
            relators,
            length,
            seed,
        }) => Ok(random_presentation(gens, relators, length, seed)?.to_json() + "\n"),
        Command::Ball(BallCmd::Build { presentation, radius }) => {
            let p = Presentation::from_json(&read(&presentation)?)?;
            Ok(pretty(&build_ball(&p, radius)?.to_json(&p)))
        }
        Command::Atoms(AtomsCmd::List {
            presentation,
            level,
            horizon,
        }) => {
            let p = Presentation::from_json(&read(&presentation)?)?;
            Ok(pretty(&enumerate_atoms(&p, level, horizon)?.to_json(&p)))
        }
        Command::Atoms(AtomsCmd::Tree {
            presentation,
            depth,
            horizon,
            format,
            types,
            window,
        }) => {
            let p = Presentation::from_json(&read(&presentation)?)?;
            let mut tree = build_tree(&p, depth, horizon)?;
            if types {
                tree = assign_types(&tree, &p, window)?;
            }
            let format = match format {
                TreeFormat::Json => ExportFormat::Json,
                TreeFormat::Dot => ExportFormat::Dot,
            };
            Ok(export_tree(&tree, &p, format))
        }
        Command::Trans(TransCmd::Run { machine, input }) => {
            let t = Transducer::from_json(&read(&machine)?)?;
            let out = t.run(&parse_word(&input, t.d())?);
            Ok(if out.is_empty() {
                "ε\n".to_string()
            } else {
                encode_word(&out) + "\n"
            })
        }
        Command::Trans(TransCmd::Compose { first, second }) => {
            let f = Transducer::from_json(&read(&first)?)?;
            let g = Transducer::from_json(&read(&second)?)?;
            Ok(pretty(&compose(&f, &g)?.to_json()))
        }
        Command::Trans(TransCmd::Core { machine }) => {
            let t = Transducer::from_json(&read(&machine)?)?;
            let states: Vec<&str> = t.core().states.iter().map(|&s| t.names()[s].as_str()).collect();
            Ok(pretty(&json!({ "core": states })))
        }
        Command::Trans(TransCmd::Nucleus { machines, budget }) => {
            let mut gens = Vec::new();
            for m in &machines {
                gens.extend(Transducer::all_states_from_json(&read(m)?)?);
            }
            let budget = budget.or(default_budget).unwrap_or(NUCLEUS_BUDGET);
            Ok(pretty(&match nucleus(&gens, budget)? {
                NucleusResult::Nucleus(ms) => json!({
                    "result": "Nucleus",
                    "size": ms.len(),
                    "machines": ms.iter().map(Transducer::to_json).collect::<Vec<_>>(),
                }),
                NucleusResult::BudgetExceeded { collected } => json!({
                    "result": "BudgetExceeded",
                    "budget": budget,
                    "collected": collected,
                }),
            }))
        }
        Command::Vmap(VmapCmd::Compose { first, second }) => {
            let f = PrefixMap::from_json(&read(&first)?)?;
            let g = PrefixMap::from_json(&read(&second)?)?;
            Ok(pretty(&compose_prefix_maps(&f, &g)?.to_json()))
        }
        Command::Vmap(VmapCmd::Invert { map }) => {
            let f = PrefixMap::from_json(&read(&map)?)?;
            Ok(pretty(&invert_prefix_map(&f).canonical().to_json()))
        }
        Command::Kuz(KuzCmd::Decide {
            presentation,
            word,
            budget,
            mode,
        }) => {
            let p = Presentation::from_json(&read(&presentation)?)?;
            let w = p.parse_word(&word)?;
            let budget = budget.or(default_budget).unwrap_or(DEFAULT_BUDGET);
            let mode = match mode {
                ModeArg::Interleaved => Mode::Interleaved,
                ModeArg::Workers => Mode::TwoWorkers,
            };
            Ok(pretty(&kuznetsov_decide_with(&p, &w, budget, mode)?.to_json(&p)))
        }
    }
}
