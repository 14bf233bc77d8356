use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use des_attack::attack::{describe_witness, synthesize_absra, verify_absra, AttackSpec, FeasibilityMode};
use des_attack::automaton::check_supervisor_feasibility;
use des_attack::io::{self, model::Model, ModelFile};
use des_attack::robust::{min_protected, synthesize_robust, DifferenceMode};
use des_attack::transducer::AlterationRelation;
use des_attack::{Automaton, Error, Supervisor, Symbol};

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_EMPTY: u8 = 3;
const EXIT_CAPACITY: u8 = 4;

#[derive(Parser)]
#[command(name = "des-attack", version, about = "Sensor-attack synthesis and robust supervision for discrete-event systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct AttackArgs {
    /// Output-length bound of the attacker's replacement strings.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Comma-separated events the attacker cannot alter.
    #[arg(long, value_delimiter = ',')]
    protect: Vec<String>,
    /// Relation file (`event output` lines or `full`); all of Δn by default.
    #[arg(long)]
    relation: Option<PathBuf>,
    /// paper-literal, plant-aware or actuator-preserving.
    #[arg(long, default_value = "actuator-preserving")]
    mode: String,
}

#[derive(Subcommand)]
enum Command {
    /// Supremal attack against a plant/supervisor pair.
    SynthesizeAttack {
        #[arg(long)]
        plant: PathBuf,
        #[arg(long)]
        supervisor: PathBuf,
        #[command(flatten)]
        attack: AttackArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Checks the four attack properties of a given attack.
    VerifyAttack {
        #[arg(long)]
        plant: PathBuf,
        #[arg(long)]
        supervisor: PathBuf,
        #[arg(long)]
        attack: PathBuf,
        #[arg(long, default_value = "actuator-preserving")]
        mode: String,
    },
    /// Supervisor that no attack of the given kind can defeat.
    SynthesizeRobust {
        #[arg(long)]
        plant: PathBuf,
        #[arg(long)]
        requirement: PathBuf,
        #[command(flatten)]
        attack: AttackArgs,
        /// extensions, literal or lifted.
        #[arg(long, default_value = "extensions")]
        difference: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Smallest set of observable events to protect.
    MinProtect {
        #[arg(long)]
        plant: PathBuf,
        #[arg(long)]
        requirement: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        relation: Option<PathBuf>,
        #[arg(long, default_value = "actuator-preserving")]
        mode: String,
        #[arg(long, default_value = "extensions")]
        difference: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Feasibility and legality of a supervisor.
    CheckSupervisor {
        #[arg(long)]
        plant: PathBuf,
        #[arg(long)]
        supervisor: PathBuf,
    },
    /// Graphviz rendering of a model file.
    ExportDot {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn automaton(path: &Path) -> Result<Automaton, Error> {
    io::read_model(path)?.into_automaton()
}

fn relation(path: Option<&Path>, g: &Automaton, n: usize) -> Result<AlterationRelation, Error> {
    match path {
        Some(p) => io::parse_relation(&fs::read_to_string(p)?, g.alphabet(), n),
        None => AlterationRelation::full(g.alphabet(), n),
    }
}

fn symbols(g: &Automaton, names: &[String]) -> Result<BTreeSet<Symbol>, Error> {
    names.iter().map(|n| g.alphabet().lookup(n).map(|e| e.name.clone())).collect()
}

fn spec(g: &Automaton, a: &AttackArgs) -> Result<AttackSpec, Error> {
    let protected = symbols(g, &a.protect)?;
    let relation = relation(a.relation.as_deref(), g, a.n)?.restricted_to_unprotected(&protected);
    Ok(AttackSpec::new(a.n, protected, relation).with_mode(a.mode.parse()?))
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::SynthesizeAttack {
            plant,
            supervisor,
            attack,
            out,
            dot,
        } => {
            let g = automaton(&plant)?;
            let s = Supervisor::new(automaton(&supervisor)?);
            let spec = spec(&g, &attack)?;
            let outcome = synthesize_absra(&g, &s, &spec)?;
            if !outcome.supervisor_report.is_ok() {
                eprintln!("warning: supervisor findings:\n{}", outcome.supervisor_report);
            }
            println!("iterations: {}", outcome.iterations);
            println!("attack states: {}", outcome.attack.num_states());
            if let Some(w) = &outcome.witness {
                println!("witness: {}", describe_witness(w));
            }
            io::write_model(&ModelFile::transducer(outcome.attack.clone()), &out)?;
            if let Some(d) = dot {
                fs::write(d, io::transducer_to_dot(&outcome.attack))?;
            }
            Ok(if outcome.is_empty() { EXIT_EMPTY } else { 0 })
        }
        Command::VerifyAttack {
            plant,
            supervisor,
            attack,
            mode,
        } => {
            let g = automaton(&plant)?;
            let s = Supervisor::new(automaton(&supervisor)?);
            let file = io::read_model(&attack)?;
            let spec = file.attack_spec.clone();
            let a = file.into_transducer()?;
            let spec = spec
                .unwrap_or_else(|| AttackSpec::new(a.bound(), BTreeSet::new(), AlterationRelation::identity()))
                .with_mode(mode.parse::<FeasibilityMode>()?);
            let report = verify_absra(&a, &g, &s, &spec)?;
            print!("{report}");
            Ok(if report.is_absra { 0 } else { EXIT_EMPTY })
        }
        Command::SynthesizeRobust {
            plant,
            requirement,
            attack,
            difference,
            out,
            dot,
        } => {
            let g = automaton(&plant)?;
            let e = automaton(&requirement)?;
            let spec = spec(&g, &attack)?;
            let outcome = synthesize_robust(&g, &e, &spec, difference.parse::<DifferenceMode>()?)?;
            println!("rounds: {}", outcome.rounds);
            println!("supervisor states: {}", outcome.supervisor.automaton().num_states());
            println!("residual attack empty: {}", outcome.residual_attack_empty);
            let a = outcome.supervisor.automaton();
            io::write_model(&ModelFile::automaton(a.clone()), &out)?;
            if let Some(d) = dot {
                fs::write(d, io::automaton_to_dot(a))?;
            }
            Ok(if outcome.is_empty() { EXIT_EMPTY } else { 0 })
        }
        Command::MinProtect {
            plant,
            requirement,
            n,
            relation: rel,
            mode,
            difference,
            out,
        } => {
            let g = automaton(&plant)?;
            let e = automaton(&requirement)?;
            let base = AttackSpec::new(n, BTreeSet::new(), relation(rel.as_deref(), &g, n)?).with_mode(mode.parse()?);
            let outcome = min_protected(&g, &e, &base, difference.parse()?)?;
            for t in &outcome.trace {
                println!(
                    "tried {{{}}}: {}",
                    t.protected.iter().map(Symbol::as_str).collect::<Vec<_>>().join(","),
                    if t.succeeded() { "robust supervisor found" } else { "insufficient" }
                );
            }
            println!("subsets examined: {}", outcome.subsets_examined);
            match (&outcome.protected_set, &outcome.supervisor) {
                (Some(set), Some(s)) => {
                    let names: Vec<&str> = set.iter().map(Symbol::as_str).collect();
                    println!("protected: {}", names.join(","));
                    if let Some(out) = out {
                        io::write_model(&ModelFile::automaton(s.automaton().clone()), &out)?;
                    }
                    Ok(0)
                }
                _ => {
                    println!("protected: none works");
                    Ok(EXIT_EMPTY)
                }
            }
        }
        Command::CheckSupervisor { plant, supervisor } => {
            let g = automaton(&plant)?;
            let s = Supervisor::new(automaton(&supervisor)?);
            let report = check_supervisor_feasibility(&s, &g)?;
            print!("{report}");
            Ok(if report.is_ok() { 0 } else { EXIT_EMPTY })
        }
        Command::ExportDot { model, out } => {
            let dot = match io::read_model(&model)?.model {
                Model::Automaton(a) => io::automaton_to_dot(&a),
                Model::Transducer(t) => io::transducer_to_dot(&t),
            };
            fs::write(out, dot)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Capacity { .. } => EXIT_CAPACITY,
                Error::Config(_) => EXIT_USAGE,
                _ => EXIT_VALIDATION,
            })
        }
    }
}
